//! Front extraction and speed measurement: front position, least-squares
//! wave speed, shape invariance, minimax speed brackets from test profiles,
//! and the fast-variable (epsilon) convergence study.

use rayon::prelude::*;

use crate::equilibria::{self, Classification};
use crate::error::{CoagError, Result};
use crate::models::{Model, ModelKind};
use crate::params::Config;
use crate::rdsolver::{self, Grid1D, SpaceTimeField};
use crate::speed_formulas;

/// Front location of a single profile: the unique threshold crossing,
/// linearly interpolated between the bracketing nodes. A node exactly at
/// the threshold is itself the crossing.
pub fn front_position(grid: &Grid1D, profile: &[f64], threshold: f64) -> Result<f64> {
    let n = grid.nodes;
    if profile.len() != n {
        return Err(CoagError::DimensionMismatch {
            kind: "front profile".into(),
            expected: n,
            got: profile.len(),
        });
    }
    let dx = grid.dx();
    let s: Vec<f64> = profile.iter().map(|v| v - threshold).collect();
    let mut crossings: Vec<f64> = Vec::new();
    let mut i = 0;
    if s[0] == 0.0 {
        crossings.push(0.0);
        while i + 1 < n && s[i + 1] == 0.0 {
            i += 1;
        }
    }
    while i + 1 < n {
        let (a, b) = (s[i], s[i + 1]);
        if a * b < 0.0 {
            crossings.push(dx * (i as f64 + a / (a - b)));
        } else if b == 0.0 && a != 0.0 {
            crossings.push(dx * (i + 1) as f64);
            while i + 1 < n && s[i + 1] == 0.0 {
                i += 1;
            }
            continue;
        }
        i += 1;
    }
    if crossings.len() != 1 {
        return Err(CoagError::NoFront {
            crossings: crossings.len(),
        });
    }
    Ok(crossings[0])
}

/// Least-squares wave speed from the front trace.
#[derive(Debug, Clone)]
pub struct SpeedMeasurement {
    /// mm/min (dimensionless for the scalar model).
    pub speed: f64,
    /// Residual below 1%: the trailing-quarter slope agrees with the window
    /// slope.
    pub converged: bool,
    /// (t_start, t_end) of the fitted window.
    pub window: (f64, f64),
    /// |slope(last quarter) - slope(window)| / |slope(window)|.
    pub residual: f64,
    /// Every snapshot with an identifiable front, as (t, x_front).
    pub front_trace: Vec<(f64, f64)>,
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut st, mut sx, mut stt, mut stx) = (0.0, 0.0, 0.0, 0.0);
    for &(t, x) in points {
        st += t;
        sx += x;
        stt += t * t;
        stx += t * x;
    }
    (n * stx - st * sx) / (n * stt - st * st)
}

/// Fit x_front(t) over the trailing `window_fraction` of the usable trace.
/// Usable points have a unique crossing that sits at least 10% of L away
/// from either boundary. Converged means the slope over the last quarter of
/// the window agrees with the window slope to 1%; a front that retreats
/// anywhere in the window is reported as NotConverged instead of producing
/// a misleading fit.
pub fn measure_speed(
    field: &SpaceTimeField,
    threshold: f64,
    window_fraction: f64,
) -> Result<SpeedMeasurement> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(CoagError::Config(format!(
            "window_fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    if field.times.len() < 10 {
        return Err(CoagError::NotConverged(format!(
            "speed measurement needs at least 10 snapshots, got {}",
            field.times.len()
        )));
    }
    let t_idx = field.model.thrombin_index();
    let mut front_trace = Vec::new();
    for (k, &t) in field.times.iter().enumerate() {
        if let Ok(x) = front_position(&field.grid, field.component(k, t_idx), threshold) {
            front_trace.push((t, x));
        }
    }
    if front_trace.is_empty() {
        return Err(CoagError::NoFront { crossings: 0 });
    }
    let l = field.grid.length;
    let eligible: Vec<(f64, f64)> = front_trace
        .iter()
        .copied()
        .filter(|&(_, x)| x >= 0.1 * l && x <= 0.9 * l)
        .collect();
    let take = ((eligible.len() as f64) * window_fraction).ceil() as usize;
    let window_points = &eligible[eligible.len().saturating_sub(take)..];
    if window_points.len() < 10 {
        return Err(CoagError::NotConverged(format!(
            "only {} usable front points in the fit window (need 10): front never \
             establishes itself in the interior [0.1 L, 0.9 L]",
            window_points.len()
        )));
    }
    for pair in window_points.windows(2) {
        if pair[1].1 < pair[0].1 - 1e-9 * l {
            return Err(CoagError::NotConverged(format!(
                "front trace is non-monotone: retreats from {:.6} to {:.6} at t = {:.3}",
                pair[0].1, pair[1].1, pair[1].0
            )));
        }
    }
    let slope = ls_slope(window_points);
    let quarter = window_points.len().div_ceil(4).max(3);
    let tail = &window_points[window_points.len() - quarter..];
    let tail_slope = ls_slope(tail);
    let residual = if slope == 0.0 {
        f64::INFINITY
    } else {
        ((tail_slope - slope) / slope).abs()
    };
    Ok(SpeedMeasurement {
        speed: slope,
        converged: residual < 1e-2,
        window: (window_points[0].0, window_points[window_points.len() - 1].0),
        residual,
        front_trace,
    })
}

/// Maximal aligned-profile discrepancy over the trailing `window` snapshots,
/// normalized by `scale` (T0 for coagulation kinds, 1 for the scalar model).
/// Profiles are aligned on their front positions and compared pointwise on
/// the overlap; each raw profile must be monotone decreasing to
/// 1e-8 * scale, the monotone-wave form of the established regime.
pub fn shape_drift(field: &SpaceTimeField, window: usize, scale: f64) -> Result<f64> {
    let total = field.times.len();
    if window < 2 || window > total {
        return Err(CoagError::Config(format!(
            "shape window must hold 2..={total} snapshots, got {window}"
        )));
    }
    let t_idx = field.model.thrombin_index();
    let threshold = 0.5
        * field
            .thrombin(total - 1)
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
    let dx = field.grid.dx();
    let n = field.grid.nodes;
    let tol = 1e-8 * scale;
    for k in total - window..total {
        let u = field.component(k, t_idx);
        for i in 1..n {
            if u[i] > u[i - 1] + tol {
                return Err(CoagError::NotConverged(format!(
                    "thrombin profile at t = {} is not monotone decreasing \
                     (rise of {:.3e} at node {i})",
                    field.times[k],
                    u[i] - u[i - 1]
                )));
            }
        }
    }
    let reference = field.component(total - 1, t_idx);
    let x_ref = front_position(&field.grid, reference, threshold)?;
    let mut drift = 0.0f64;
    for k in total - window..total - 1 {
        let u = field.component(k, t_idx);
        let shift = x_ref - front_position(&field.grid, u, threshold)?;
        // compare reference(x) with u(x - shift) wherever the shifted
        // coordinate stays inside the domain
        for (i, &r) in reference.iter().enumerate() {
            let xs = i as f64 * dx - shift;
            if xs < 0.0 || xs > field.grid.length {
                continue;
            }
            let j = (xs / dx).floor() as usize;
            let frac = xs / dx - j as f64;
            let val = if j + 1 < n {
                u[j] * (1.0 - frac) + u[j + 1] * frac
            } else {
                u[n - 1]
            };
            drift = drift.max((val - r).abs() / scale);
        }
    }
    Ok(drift)
}

/// Componentwise monotone test profile with wave limits, for the minimax
/// bracket.
#[derive(Debug, Clone)]
pub struct TestProfile {
    pub grid: Grid1D,
    pub model: ModelKind,
    /// rho[comp * nodes + i], monotone non-increasing per component with a
    /// strictly decreasing transition.
    pub rho: Vec<f64>,
}

/// Upper wave limit u*: the stable upper equilibrium (slaved state at T2*),
/// or w* for the scalar model.
fn upper_state(model: &Model) -> Result<Vec<f64>> {
    match model.kind() {
        ModelKind::Scalar(sp) => Ok(vec![speed_formulas::w_star(sp.n, sp.b, sp.sigma)?]),
        ModelKind::Full14 => Err(CoagError::UnusableProfile(
            "minimax test profiles apply to the monotone kinds (the full model's \
             precursor components increase along the front)"
                .into(),
        )),
        _ => {
            let report = equilibria::classify(model.rates())?;
            if report.classification != Classification::Bistable {
                return Err(CoagError::UnusableProfile(format!(
                    "wave limits need a bistable parameter set, found {}",
                    report.classification
                )));
            }
            Ok(model.slaved_state(report.roots[1].t))
        }
    }
}

impl TestProfile {
    /// Adopt one simulation snapshot as a test profile. Ripples up to
    /// 1e-8 * scale are flattened onto the running monotone envelope;
    /// anything larger, or end values not matching the wave limits to
    /// 1e-3 * scale, rejects the snapshot.
    pub fn from_simulation(
        field: &SpaceTimeField,
        snapshot: usize,
        model: &Model,
    ) -> Result<TestProfile> {
        let n = field.grid.nodes;
        let dim = model.dim();
        let scales = model.scales();
        let upper = upper_state(model)?;
        let mut rho = field.snapshots[snapshot].to_vec();
        for comp in 0..dim {
            let scale = scales[comp].max(1e-300);
            let u = &mut rho[comp * n..(comp + 1) * n];
            let mut prev = u[0];
            for (i, v) in u.iter_mut().enumerate().skip(1) {
                if *v > prev + 1e-8 * scale {
                    return Err(CoagError::UnusableProfile(format!(
                        "component {comp} rises by {:.3e} at node {i}",
                        *v - prev
                    )));
                }
                if *v > prev {
                    *v = prev;
                }
                prev = *v;
            }
            if (u[0] - upper[comp]).abs() > 1e-3 * scale {
                return Err(CoagError::UnusableProfile(format!(
                    "component {comp} starts at {:.6e}, wave limit is {:.6e}",
                    u[0], upper[comp]
                )));
            }
            if u[n - 1].abs() > 1e-3 * scale {
                return Err(CoagError::UnusableProfile(format!(
                    "component {comp} ends at {:.6e}, not at rest",
                    u[n - 1]
                )));
            }
        }
        Ok(TestProfile {
            grid: field.grid,
            model: field.model,
            rho,
        })
    }

    /// Deliberately crude but admissible profile: every component rides the
    /// same shifted tanh between its wave limits. Needs x0 and L - x0 both
    /// above ~3.5 widths so the end values sit within 1e-3 of the limits.
    pub fn tanh_profile(model: &Model, grid: &Grid1D, x0: f64, width: f64) -> Result<TestProfile> {
        if !(width > 0.0) || x0 / width < 3.5 || (grid.length - x0) / width < 3.5 {
            return Err(CoagError::UnusableProfile(format!(
                "tanh profile needs x0 and L - x0 at least 3.5 widths from the ends \
                 (x0 = {x0}, width = {width}, L = {})",
                grid.length
            )));
        }
        let upper = upper_state(model)?;
        let n = grid.nodes;
        let dim = model.dim();
        let mut rho = vec![0.0; dim * n];
        for (i, x) in grid.xs().iter().enumerate() {
            let chi = 0.5 * (1.0 - ((x - x0) / width).tanh());
            for comp in 0..dim {
                rho[comp * n + i] = upper[comp] * chi;
            }
        }
        Ok(TestProfile {
            grid: *grid,
            model: model.kind(),
            rho,
        })
    }
}

/// Minimax speed bracket extracted from one test profile.
#[derive(Debug, Clone)]
pub struct SpeedBracket {
    pub lower: f64,
    pub upper: f64,
    /// (inf, sup) of S_i per component; None where the component has no
    /// usable slope.
    pub per_component: Vec<Option<(f64, f64)>>,
}

/// Evaluate S_i = (D rho_i'' + F_i(rho)) / (-rho_i') with second-order
/// differences and take per-component inf/sup over interior nodes whose
/// slope magnitude exceeds 1e-4 * scale_i / dx (the flat tails make S a 0/0
/// form). The bracket is (min_i inf_i, max_i sup_i).
pub fn minimax_bracket(rho: &TestProfile, model: &Model) -> Result<SpeedBracket> {
    let n = rho.grid.nodes;
    let dim = model.dim();
    if rho.rho.len() != dim * n {
        return Err(CoagError::DimensionMismatch {
            kind: "test profile".into(),
            expected: dim * n,
            got: rho.rho.len(),
        });
    }
    let dx = rho.grid.dx();
    let d = model.diffusion();
    let scales = model.scales();
    let mut f = vec![0.0; dim * n];
    model.rhs_field_into(&rho.rho, n, &mut f);
    let mut per_component: Vec<Option<(f64, f64)>> = vec![None; dim];
    for comp in 0..dim {
        let u = &rho.rho[comp * n..(comp + 1) * n];
        let fc = &f[comp * n..(comp + 1) * n];
        let eps = 1e-4 * scales[comp].max(1e-300) / dx;
        let mut bounds: Option<(f64, f64)> = None;
        for i in 1..n - 1 {
            let d1 = (u[i + 1] - u[i - 1]) / (2.0 * dx);
            if d1 >= -eps {
                continue;
            }
            let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
            let s = (d * d2 + fc[i]) / (-d1);
            bounds = Some(match bounds {
                None => (s, s),
                Some((lo, hi)) => (lo.min(s), hi.max(s)),
            });
        }
        per_component[comp] = bounds;
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for b in per_component.iter().flatten() {
        lower = lower.min(b.0);
        upper = upper.max(b.1);
    }
    if !lower.is_finite() || !upper.is_finite() {
        return Err(CoagError::UnusableProfile(
            "no component has slope above the evaluation floor".into(),
        ));
    }
    Ok(SpeedBracket {
        lower,
        upper,
        per_component,
    })
}

/// One row of the fast-variable convergence study.
#[derive(Debug, Clone)]
pub struct EpsilonEntry {
    pub epsilon: f64,
    /// None when the run failed to ignite or converge.
    pub speed: Option<f64>,
    /// |c_eps - c0| when available.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EpsilonTable {
    /// One-equation limit speed.
    pub c0: f64,
    pub entries: Vec<EpsilonEntry>,
    /// Least-squares slope through the origin of gap vs epsilon, over the
    /// successful entries. A diagnostic: it understates the constant when the
    /// ladder has not yet reached the linear regime.
    pub fitted_k: f64,
    /// Smallest K with |c_eps - c0| <= K eps across every successful entry,
    /// i.e. max gap/eps. NaN when no entry succeeded.
    pub bound_k: f64,
}

fn measured_speed_for(model: &Model, cfg: &Config) -> Result<f64> {
    let grid = Grid1D::from_domain(&cfg.domain)?;
    let ic = rdsolver::default_ic(model, &grid)?;
    let sim = rdsolver::simulate(
        model,
        &grid,
        &ic,
        cfg.domain.t_end,
        cfg.domain.snapshot_every,
    )?;
    let threshold = cfg.domain.threshold_fraction * cfg.rates.t0;
    let m = measure_speed(&sim.field, threshold, cfg.domain.window_fraction)?;
    if !m.converged {
        return Err(CoagError::NotConverged(format!(
            "speed fit residual {:.3e} above 1%",
            m.residual
        )));
    }
    Ok(m.speed)
}

/// Speed of the two-equation system with the fast variable sped up by
/// 1/epsilon (k11 and h11 scaled together, which leaves the equilibria in
/// place), against the one-equation limit c0. Runs are independent and
/// execute in parallel.
pub fn epsilon_convergence(cfg: &Config, epsilons: &[f64]) -> Result<EpsilonTable> {
    for &e in epsilons {
        if !(e > 0.0 && e <= 1.0) {
            return Err(CoagError::InvalidParameter {
                name: "epsilon".into(),
                value: e,
                reason: "epsilon values must lie in (0, 1]".into(),
            });
        }
    }
    let c0 = {
        let model = Model::new(ModelKind::OneEq, cfg)?;
        measured_speed_for(&model, cfg)?
    };
    let entries: Vec<EpsilonEntry> = epsilons
        .par_iter()
        .map(|&epsilon| {
            let speed = cfg
                .rates
                .with_epsilon(epsilon)
                .and_then(|rates| Model::from_rates(ModelKind::TwoEq, rates, None))
                .and_then(|model| measured_speed_for(&model, cfg));
            match speed {
                Ok(c) => EpsilonEntry {
                    epsilon,
                    speed: Some(c),
                    gap: Some((c - c0).abs()),
                },
                Err(err) => {
                    log::warn!("epsilon = {epsilon}: run failed: {err}");
                    EpsilonEntry {
                        epsilon,
                        speed: None,
                        gap: None,
                    }
                }
            }
        })
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    let mut bound_k = f64::NAN;
    for e in &entries {
        if let Some(gap) = e.gap {
            num += e.epsilon * gap;
            den += e.epsilon * e.epsilon;
            let k = gap / e.epsilon;
            if !(k <= bound_k) {
                bound_k = k;
            }
        }
    }
    let fitted_k = if den > 0.0 { num / den } else { f64::NAN };
    Ok(EpsilonTable {
        c0,
        entries,
        fitted_k,
        bound_k,
    })
}
