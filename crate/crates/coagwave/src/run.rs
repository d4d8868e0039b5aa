//! End-to-end orchestration: configured wave runs, parameter sweeps over
//! models and estimators, the enzyme-activity curve, and k2_bar calibration.

use rayon::prelude::*;

use crate::error::{CoagError, Result};
use crate::models::{Model, ModelKind, ScalarParams};
use crate::params::{Config, Domain};
use crate::rdsolver::{self, Grid1D, IcShape, InitialCondition, Simulation, SolverOptions};
use crate::speed_formulas;
use crate::wavefront::{self, SpeedMeasurement};

/// Default activation with the domain's explicit ic_* overrides applied.
/// An explicit amplitude also bypasses the bistability requirement of the
/// default.
pub fn build_ic(model: &Model, grid: &Grid1D, domain: &Domain) -> Result<InitialCondition> {
    let mut ic = if let Some(amplitude) = domain.ic_amplitude {
        let width = grid.length / 20.0;
        InitialCondition {
            amplitude,
            width,
            shape: IcShape::SmoothedStep(width / 5.0),
        }
    } else {
        rdsolver::default_ic(model, grid)?
    };
    if let Some(width) = domain.ic_width {
        ic.width = width;
    }
    if let Some(ramp) = domain.ic_ramp {
        ic.shape = if ramp == 0.0 {
            IcShape::Step
        } else {
            IcShape::SmoothedStep(ramp)
        };
    }
    ic.validate(grid)?;
    Ok(ic)
}

/// Front threshold: the configured fraction of the thrombin scale (T0 for
/// the coagulation kinds, 1 for the scalar equation).
pub fn threshold_for(model: &Model, cfg: &Config) -> f64 {
    cfg.domain.threshold_fraction * model.scales()[model.thrombin_index()]
}

/// One configured run with its speed fit.
#[derive(Debug)]
pub struct WaveRun {
    pub model: Model,
    pub grid: Grid1D,
    pub sim: Simulation,
    pub measurement: SpeedMeasurement,
}

pub fn run_wave(cfg: &Config, kind: ModelKind) -> Result<WaveRun> {
    cfg.validate()?;
    let model = Model::new(kind, cfg)?;
    let grid = Grid1D::from_domain(&cfg.domain)?;
    let ic = build_ic(&model, &grid, &cfg.domain)?;
    let opts = SolverOptions {
        scheme: cfg.domain.scheme,
        ..SolverOptions::default()
    };
    let sim = rdsolver::simulate_with_options(
        &model,
        &grid,
        &ic,
        cfg.domain.t_end,
        cfg.domain.snapshot_every,
        &opts,
    )?;
    let measurement = wavefront::measure_speed(
        &sim.field,
        threshold_for(&model, cfg),
        cfg.domain.window_fraction,
    )?;
    Ok(WaveRun {
        model,
        grid,
        sim,
        measurement,
    })
}

/// Short stable name used in CSV series columns and CLI flags.
pub fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Full14 => "full14",
        ModelKind::Reduced6 => "reduced6",
        ModelKind::TwoEq => "two_eq",
        ModelKind::OneEq => "one_eq",
        ModelKind::Scalar(_) => "scalar",
    }
}

pub fn parse_model(name: &str, scalar: ScalarParams) -> Result<ModelKind> {
    match name {
        "full14" => Ok(ModelKind::Full14),
        "reduced6" => Ok(ModelKind::Reduced6),
        "two_eq" => Ok(ModelKind::TwoEq),
        "one_eq" => Ok(ModelKind::OneEq),
        "scalar" => Ok(ModelKind::Scalar(scalar)),
        other => Err(CoagError::Config(format!(
            "unknown model {other:?}; expected one of full14, reduced6, two_eq, one_eq, scalar"
        ))),
    }
}

/// Set one numeric configuration key. Keys are the bare field names of the
/// rate table plus domain.*, full_model.*, fit.* paths; "D" aliases the
/// diffusion coefficient.
pub fn apply_param(cfg: &mut Config, key: &str, value: f64) -> Result<()> {
    let r = &mut cfg.rates;
    match key {
        "k11" => r.k11 = value,
        "h11" => r.h11 = value,
        "k10" => r.k10 = value,
        "k10_bar" => r.k10_bar = value,
        "h10" => r.h10 = value,
        "k9" => r.k9 = value,
        "h9" => r.h9 = value,
        "k89" => r.k89 = value,
        "h89" => r.h89 = value,
        "k8" => r.k8 = value,
        "h8" => r.h8 = value,
        "k5" => r.k5 = value,
        "h5" => r.h5 = value,
        "k510" => r.k510 = value,
        "h510" => r.h510 = value,
        "k2" => r.k2 = value,
        "k2_bar" => r.k2_bar = value,
        "h2" => r.h2 = value,
        "k2m" => r.k2m = value,
        "k2m_bar" => r.k2m_bar = value,
        "D" | "diffusion" => r.diffusion = value,
        "t0" => r.t0 = value,
        "domain.length" => cfg.domain.length = value,
        "domain.nodes" => cfg.domain.nodes = value as usize,
        "domain.t_end" => cfg.domain.t_end = value,
        "domain.snapshot_every" => cfg.domain.snapshot_every = value,
        "domain.ic_amplitude" => cfg.domain.ic_amplitude = Some(value),
        "domain.ic_width" => cfg.domain.ic_width = Some(value),
        "domain.ic_ramp" => cfg.domain.ic_ramp = Some(value),
        "domain.threshold_fraction" => cfg.domain.threshold_fraction = value,
        "domain.window_fraction" => cfg.domain.window_fraction = value,
        "full_model.p0" => cfg.full_model.p0 = value,
        "full_model.f5_0" => cfg.full_model.f5_0 = value,
        "full_model.f8_0" => cfg.full_model.f8_0 = value,
        "full_model.f9_0" => cfg.full_model.f9_0 = value,
        "full_model.f10_0" => cfg.full_model.f10_0 = value,
        "full_model.f11_0" => cfg.full_model.f11_0 = value,
        "fit.activity_fit_scale" => cfg.fit.activity_fit_scale = value,
        other => {
            return Err(CoagError::Config(format!(
                "unknown parameter key {other:?}"
            )))
        }
    }
    Ok(())
}

pub fn linear_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// One sweep result row. Non-igniting or non-converging points are data.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub series: String,
    pub speed: Option<f64>,
    pub converged: bool,
}

/// Apply one sweep value: scalar shape parameters (n, b, sigma) change the
/// model kind, everything else changes the config.
fn sweep_point(cfg: &mut Config, kind: ModelKind, param: &str, value: f64) -> Result<ModelKind> {
    if let ModelKind::Scalar(mut sp) = kind {
        match param {
            "n" => {
                sp.n = value as u32;
                return Ok(ModelKind::Scalar(sp));
            }
            "b" => {
                sp.b = value;
                return Ok(ModelKind::Scalar(sp));
            }
            "sigma" => {
                sp.sigma = value;
                return Ok(ModelKind::Scalar(sp));
            }
            _ => {}
        }
    } else if matches!(param, "n" | "b" | "sigma") {
        return Err(CoagError::Config(format!(
            "parameter {param:?} applies to the scalar model only"
        )));
    }
    apply_param(cfg, param, value)?;
    Ok(kind)
}

/// Simulate every (value, model) pair independently (work pool), measure
/// speeds, and return rows sorted by value then series.
pub fn speed_sweep(
    cfg: &Config,
    param: &str,
    values: &[f64],
    kinds: &[ModelKind],
) -> Result<Vec<SweepRow>> {
    if values.len() < 2 {
        return Err(CoagError::Config("a sweep needs at least 2 values".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoagError::Config(
            "sweep values must be strictly increasing".into(),
        ));
    }
    for (&v, &k) in values
        .iter()
        .flat_map(|v| kinds.iter().map(move |k| (v, k)))
    {
        sweep_point(&mut cfg.clone(), k, param, v)?;
    }
    let jobs: Vec<(f64, ModelKind)> = values
        .iter()
        .flat_map(|&v| kinds.iter().map(move |&k| (v, k)))
        .collect();
    let mut rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(value, kind)| {
            let run = (|| -> Result<WaveRun> {
                let mut c = cfg.clone();
                let kind = sweep_point(&mut c, kind, param, value)?;
                run_wave(&c, kind)
            })();
            let series = model_name(kind).to_string();
            match run {
                Ok(w) => SweepRow {
                    value,
                    series,
                    speed: Some(w.measurement.speed),
                    converged: w.measurement.converged,
                },
                Err(err) => {
                    log::info!("sweep point {param} = {value}, {series}: {err}");
                    SweepRow {
                        value,
                        series,
                        speed: None,
                        converged: false,
                    }
                }
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.series.cmp(&b.series))
    });
    Ok(rows)
}

/// One point of the enzyme-activity curve.
#[derive(Debug, Clone, Copy)]
pub struct ActivityPoint {
    /// Percent of nominal k9.
    pub activity: f64,
    /// Narrow-zone estimate, None below the propagation threshold.
    pub speed: Option<f64>,
}

/// Analytic speed vs factor-IX activity: k9 scales with activity while
/// k2_bar carries the single-point calibration multiplier. Points below the
/// propagation threshold report no speed.
pub fn activity_curve(cfg: &Config, activities: &[f64]) -> Result<Vec<ActivityPoint>> {
    activities
        .iter()
        .map(|&activity| {
            let mut rates = cfg.rates.with_k9_activity(activity)?;
            rates.k2_bar *= cfg.fit.activity_fit_scale;
            let speed = match speed_formulas::coag_speed_estimates(&rates) {
                Ok(est) if est.c1.propagating => Some(est.c1.value),
                Ok(_) => None,
                Err(CoagError::NoUpperState { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(ActivityPoint { activity, speed })
        })
        .collect()
}

/// One row of the scalar power-law study: numeric speed against both
/// estimates at the same (n, b, sigma, D).
#[derive(Debug, Clone, Copy)]
pub struct ScalarStudyRow {
    pub n: u32,
    pub c_numeric: f64,
    pub c1: f64,
    /// None when the kink construction fails.
    pub c2: Option<f64>,
}

/// Simulate the scalar equation for each n and pair the measured speed with
/// the analytical estimates. Runs execute in parallel.
pub fn scalar_n_study(
    ns: &[u32],
    b: f64,
    sigma: f64,
    d: f64,
    domain: &Domain,
) -> Result<Vec<ScalarStudyRow>> {
    ns.par_iter()
        .map(|&n| {
            let mut cfg = Config::default();
            cfg.rates.diffusion = d;
            cfg.domain = domain.clone();
            let run = run_wave(&cfg, ModelKind::Scalar(ScalarParams { n, b, sigma }))?;
            if !run.measurement.converged {
                return Err(CoagError::NotConverged(format!(
                    "scalar n = {n}: residual {:.3e}",
                    run.measurement.residual
                )));
            }
            Ok(ScalarStudyRow {
                n,
                c_numeric: run.measurement.speed,
                c1: speed_formulas::narrow_zone_speed(n, b, sigma, d)?.value,
                c2: speed_formulas::piecewise_linear_speed(n, b, sigma, d)
                    .ok()
                    .filter(|e| e.propagating)
                    .map(|e| e.value),
            })
        })
        .collect()
}

/// Bisect k2_bar so the reduced-model speed hits `target` on the configured
/// grid. The speed is monotone increasing in k2_bar; the bracket must
/// straddle the target.
pub fn calibrate_k2bar(cfg: &Config, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let speed_at = |k2_bar: f64| -> Result<f64> {
        let mut c = cfg.clone();
        c.rates.k2_bar = k2_bar;
        Ok(run_wave(&c, ModelKind::Reduced6)?.measurement.speed)
    };
    let f_lo = speed_at(lo)? - target;
    let f_hi = speed_at(hi)? - target;
    if f_lo * f_hi > 0.0 {
        return Err(CoagError::InvalidParameter {
            name: "k2_bar bracket".into(),
            value: lo,
            reason: format!(
                "speeds at the bracket ends ({:.4}, {:.4}) do not straddle the target {target}",
                f_lo + target,
                f_hi + target
            ),
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f_lo;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = speed_at(mid)? - target;
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic_overrides_take_precedence() {
        let mut cfg = Config::default();
        let model = Model::new(ModelKind::Reduced6, &cfg).unwrap();
        let grid = Grid1D::new(5.0, 101).unwrap();
        let base = build_ic(&model, &grid, &cfg.domain).unwrap();
        assert_eq!(base.width, 0.25);
        cfg.domain.ic_amplitude = Some(900.0);
        cfg.domain.ic_width = Some(0.4);
        cfg.domain.ic_ramp = Some(0.1);
        let ic = build_ic(&model, &grid, &cfg.domain).unwrap();
        assert_eq!(ic.amplitude, 900.0);
        assert_eq!(ic.width, 0.4);
        assert_eq!(ic.shape, IcShape::SmoothedStep(0.1));
        // explicit amplitude works even where the default would refuse
        cfg.rates.h2 *= 100.0;
        assert!(build_ic(&model, &grid, &cfg.domain).is_ok());
    }

    #[test]
    fn apply_param_sets_known_keys_and_rejects_others() {
        let mut cfg = Config::default();
        apply_param(&mut cfg, "k2_bar", 7.0).unwrap();
        assert_eq!(cfg.rates.k2_bar, 7.0);
        apply_param(&mut cfg, "D", 0.005).unwrap();
        assert_eq!(cfg.rates.diffusion, 0.005);
        apply_param(&mut cfg, "domain.nodes", 501.0).unwrap();
        assert_eq!(cfg.domain.nodes, 501);
        assert!(matches!(
            apply_param(&mut cfg, "k99", 1.0),
            Err(CoagError::Config(_))
        ));
    }

    #[test]
    fn one_eq_wave_runs_and_converges() {
        let mut cfg = Config::default();
        cfg.rates.k2_bar = 2.5;
        cfg.domain.length = 5.0;
        cfg.domain.nodes = 501;
        cfg.domain.t_end = 15.0;
        cfg.domain.snapshot_every = 0.25;
        let run = run_wave(&cfg, ModelKind::OneEq).unwrap();
        assert!(run.measurement.converged);
        assert!(
            run.measurement.speed > 0.15 && run.measurement.speed < 0.32,
            "speed = {}",
            run.measurement.speed
        );
    }

    #[test]
    fn activity_curve_is_gated_then_increasing() {
        let cfg = Config::default();
        let points = activity_curve(&cfg, &[0.01, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0]).unwrap();
        assert!(points[0].speed.is_none(), "far below threshold: no wave");
        let speeds: Vec<f64> = points.iter().filter_map(|p| p.speed).collect();
        assert!(speeds.len() >= 5, "the calibrated curve covers 1..100%");
        for pair in speeds.windows(2) {
            assert!(pair[1] > pair[0], "activity curve must increase");
        }
    }

    #[test]
    fn sweep_validates_and_orders_rows() {
        let cfg = Config::default();
        assert!(speed_sweep(&cfg, "D", &[0.01], &[ModelKind::OneEq]).is_err());
        assert!(speed_sweep(&cfg, "D", &[0.01, 0.002], &[ModelKind::OneEq]).is_err());
        assert!(speed_sweep(&cfg, "q", &[0.1, 0.2], &[ModelKind::OneEq]).is_err());
        assert!(matches!(
            speed_sweep(&cfg, "b", &[1.0, 2.0], &[ModelKind::OneEq]),
            Err(CoagError::Config(_))
        ));
    }

    #[test]
    fn diffusion_sweep_speeds_increase() {
        let mut cfg = Config::default();
        cfg.rates.k2_bar = 2.5;
        cfg.domain.length = 5.0;
        cfg.domain.nodes = 501;
        cfg.domain.t_end = 15.0;
        cfg.domain.snapshot_every = 0.25;
        let rows = speed_sweep(&cfg, "D", &[0.0037, 0.0148], &[ModelKind::OneEq]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.converged));
        assert!(rows[1].speed.unwrap() > rows[0].speed.unwrap());
    }

    #[test]
    fn non_igniting_sweep_points_are_rows_not_errors() {
        let mut cfg = Config::default();
        cfg.domain.nodes = 201;
        cfg.domain.t_end = 12.0;
        // amplitude far below threshold: decays, no front
        cfg.domain.ic_amplitude = Some(1.0);
        let rows = speed_sweep(&cfg, "D", &[0.001, 0.01], &[ModelKind::OneEq]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| !r.converged));
    }
}
