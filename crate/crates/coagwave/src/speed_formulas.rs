//! Closed-form wave-speed estimates for the scalar bistable equation
//! D w'' + f(w), f(w) = b w^n (1 - w) - sigma w: the narrow-reaction-zone
//! estimate (c1) and the piecewise-linear kink estimate (c2), plus their
//! dimensional coagulation-parameter versions.
//!
//! The dimensional displays are also transcribed verbatim as
//! [`printed_dimensional`]; at the shipped rate table their radicands are
//! negative, so they evaluate to NaN and are reported as such rather than
//! silently repaired.

use crate::error::{CoagError, Result};
use crate::models::{nondimensionalize, redimensionalize_speed};
use crate::params::CoagParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    NarrowZone,
    PiecewiseLinear,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateMethod::NarrowZone => "narrow-zone",
            EstimateMethod::PiecewiseLinear => "piecewise-linear",
        })
    }
}

/// Intermediates of the analytical constructions. Fields a method does not
/// compute stay `None`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticWorkpad {
    /// Maximal positive root of b w^(n-1) (1 - w) = sigma.
    pub w_star: f64,
    /// Narrow-zone integral constant A (production part of the integral).
    pub a: Option<f64>,
    /// f'(0) = -sigma.
    pub alpha: Option<f64>,
    /// f'(w_star).
    pub beta: Option<f64>,
    /// Area-matching constant of the kink quadratic.
    pub r: Option<f64>,
    /// Kink location, in (0, w_star).
    pub w0: Option<f64>,
    /// w0 / (w0 - w_star).
    pub w_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SpeedEstimate {
    pub method: EstimateMethod,
    /// mm/min for the dimensional path, dimensionless otherwise.
    pub value: f64,
    /// False when the suppression term wins (A <= 2 D sigma): the estimate
    /// is nonpositive and the wave does not propagate.
    pub propagating: bool,
    pub workpad: AnalyticWorkpad,
}

fn validate_scalar_inputs(n: u32, b: f64, sigma: f64) -> Result<()> {
    if n < 2 {
        return Err(CoagError::InvalidParameter {
            name: "n".into(),
            value: n as f64,
            reason: "degree must be at least 2".into(),
        });
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(CoagError::InvalidParameter {
            name: "b".into(),
            value: b,
            reason: "production coefficient must be positive and finite".into(),
        });
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(CoagError::InvalidParameter {
            name: "sigma".into(),
            value: sigma,
            reason: "suppression rate must be nonnegative and finite".into(),
        });
    }
    Ok(())
}

fn validate_diffusion(d: f64) -> Result<()> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(CoagError::InvalidParameter {
            name: "D".into(),
            value: d,
            reason: "diffusion coefficient must be positive and finite".into(),
        });
    }
    Ok(())
}

/// Maximal positive root of b w^(n-1) (1 - w) = sigma, the upper state of
/// the scalar equation. For sigma = 0 the root is exactly 1; otherwise the
/// left side peaks at w = (n-1)/n and decreases to 0 at w = 1, so the
/// maximal root is bracketed by [(n-1)/n, 1] and bisection converges
/// unconditionally.
pub fn w_star(n: u32, b: f64, sigma: f64) -> Result<f64> {
    validate_scalar_inputs(n, b, sigma)?;
    if sigma == 0.0 {
        return Ok(1.0);
    }
    let pow = n as i32 - 1;
    let g = |w: f64| b * w.powi(pow) * (1.0 - w) - sigma;
    let peak = (n as f64 - 1.0) / n as f64;
    let max = g(peak) + sigma;
    if g(peak) < 0.0 {
        return Err(CoagError::NoUpperState { sigma, max });
    }
    let (mut lo, mut hi) = (peak, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Narrow-reaction-zone estimate c1 = (A - 2 D sigma) / sqrt(2 A) with
/// A = 4 b D (w*^(n-1)/(n+1) - w*^n/(n+2)), the production part of
/// 4D/w*^2 * integral of f. c1 solves the narrow-zone speed equation
/// c^2 + c sqrt(c^2 + 4 D sigma) + 2 D sigma = A exactly.
pub fn narrow_zone_speed(n: u32, b: f64, sigma: f64, d: f64) -> Result<SpeedEstimate> {
    validate_diffusion(d)?;
    let ws = w_star(n, b, sigma)?;
    let nf = n as f64;
    let a = 4.0 * b * d * (ws.powi(n as i32 - 1) / (nf + 1.0) - ws.powi(n as i32) / (nf + 2.0));
    if a <= 0.0 {
        return Err(CoagError::InvalidParameter {
            name: "A".into(),
            value: a,
            reason: "narrow-zone integral constant must be positive".into(),
        });
    }
    let value = (a - 2.0 * d * sigma) / (2.0 * a).sqrt();
    Ok(SpeedEstimate {
        method: EstimateMethod::NarrowZone,
        value,
        propagating: a > 2.0 * d * sigma,
        workpad: AnalyticWorkpad {
            w_star: ws,
            a: Some(a),
            alpha: Some(-sigma),
            ..Default::default()
        },
    })
}

/// Area integral of f over [0, w_star].
fn reaction_integral(n: u32, b: f64, sigma: f64, ws: f64) -> f64 {
    let nf = n as f64;
    b * (ws.powi(n as i32 + 1) / (nf + 1.0) - ws.powi(n as i32 + 2) / (nf + 2.0))
        - sigma * ws * ws / 2.0
}

/// The constant term of the kink quadratic as displayed in print:
/// b w*^(n+1) (-n/2 - b/(n+1)) + b w*^(n+2) ((n+1)/2 + 1/(n+2)) + sigma w*^2.
/// The b inside the first parenthesis is a copy slip for 1 (it makes the
/// term quadratic in b and breaks the area-matching definition); the
/// corrected form equals -beta w*^2/2 - integral(f), which is what
/// [`piecewise_linear_speed`] uses.
pub fn printed_r_polynomial(n: u32, b: f64, sigma: f64, ws: f64) -> f64 {
    let nf = n as f64;
    b * ws.powi(n as i32 + 1) * (-nf / 2.0 - b / (nf + 1.0))
        + b * ws.powi(n as i32 + 2) * ((nf + 1.0) / 2.0 + 1.0 / (nf + 2.0))
        + sigma * ws * ws
}

/// Piecewise-linear kink estimate c2. The reaction term is replaced by the
/// two-segment linearization f0 (slope alpha = f'(0) through the origin,
/// slope beta = f'(w_star) through w_star); the kink w0 is fixed by matching
/// the area under f, and the wave of the piecewise-linear equation is then
/// exact, with speed c2 = sqrt(D) (alpha wb^2 - beta) /
/// sqrt((wb - 1)(alpha wb^2 - beta wb)), wb = w0/(w0 - w_star).
///
/// The kink quadratic has two branches; print shows only the plus branch,
/// but at the reference parameters that branch lands outside (0, w_star)
/// and the minus branch is the kink, so both are computed and membership in
/// (0, w_star) selects.
pub fn piecewise_linear_speed(n: u32, b: f64, sigma: f64, d: f64) -> Result<SpeedEstimate> {
    validate_diffusion(d)?;
    if sigma == 0.0 {
        return Err(CoagError::InvalidParameter {
            name: "sigma".into(),
            value: sigma,
            reason: "kink construction needs alpha = -sigma < 0".into(),
        });
    }
    let ws = w_star(n, b, sigma)?;
    let nf = n as f64;
    let alpha = -sigma;
    let beta = b * nf * ws.powi(n as i32 - 1) - b * (nf + 1.0) * ws.powi(n as i32) - sigma;
    let integral = reaction_integral(n, b, sigma, ws);
    let r = -beta * ws * ws / 2.0 - integral;
    let discriminant = beta * beta * ws * ws - 2.0 * (alpha - beta) * r;
    if discriminant < 0.0 {
        return Err(CoagError::InvalidKink {
            reason: "kink quadratic has no real root".into(),
            w_star: ws,
            r,
            discriminant,
        });
    }
    let sq = discriminant.sqrt();
    let plus = (-beta * ws + sq) / (alpha - beta);
    let minus = (-beta * ws - sq) / (alpha - beta);
    let in_range = |w: f64| w > 0.0 && w < ws;
    let w0 = if in_range(plus) {
        plus
    } else if in_range(minus) {
        minus
    } else {
        return Err(CoagError::InvalidKink {
            reason: format!("both kink candidates fall outside (0, w_star): {plus} and {minus}"),
            w_star: ws,
            r,
            discriminant,
        });
    };
    let w_bar = w0 / (w0 - ws);
    let radicand = (w_bar - 1.0) * (alpha * w_bar * w_bar - beta * w_bar);
    if radicand <= 0.0 {
        return Err(CoagError::InvalidKink {
            reason: format!("speed radicand is nonpositive: {radicand}"),
            w_star: ws,
            r,
            discriminant,
        });
    }
    let value = d.sqrt() * (alpha * w_bar * w_bar - beta) / radicand.sqrt();
    Ok(SpeedEstimate {
        method: EstimateMethod::PiecewiseLinear,
        value,
        propagating: value > 0.0,
        workpad: AnalyticWorkpad {
            w_star: ws,
            a: None,
            alpha: Some(alpha),
            beta: Some(beta),
            r: Some(r),
            w0: Some(w0),
            w_bar: Some(w_bar),
        },
    })
}

/// Verbatim transcription of the dimensional closed-form displays,
/// evaluated in f64. Negative radicands surface as NaN.
#[derive(Debug, Clone, Copy)]
pub struct PrintedEstimates {
    /// b = k9 k11 k10_bar k8 k89 k2_bar k5 k510 T0^2 / (h9 h10 h11 h8 h89 h5 h510).
    pub b_dim: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn printed_dimensional(p: &CoagParams) -> PrintedEstimates {
    let b = p.k9 * p.k11 * p.k10_bar * p.k8 * p.k89 * p.k2_bar * p.k5 * p.k510 * p.t0 * p.t0
        / (p.h9 * p.h10 * p.h11 * p.h8 * p.h89 * p.h5 * p.h510);
    let t0 = p.t0;
    let d = p.diffusion;
    let h2 = p.h2;
    let core = b * t0.powi(2) - 0.8 * b * t0.powi(3);
    let c1 = d.sqrt() * (core - 2.0 * h2) / (2.0 * core).sqrt();
    let den = 4.0 * b * t0.powi(2) - 3.0 * b * t0;
    let radicand = (3.0 * b * t0.powi(2) - 4.0 * b * t0.powi(3) - h2).powi(2)
        - 2.0
            * b
            * (4.0 * t0 - 3.0)
            * t0.powi(2)
            * (-1.5 * b * t0.powi(2) - b * b / 4.0 * t0.powi(2) + 2.2 * b * t0.powi(3) + h2);
    let t_star = (-3.0 * b * t0.powi(2) + 4.0 * b * t0.powi(4) + h2) / den + radicand.sqrt() / den;
    let t_bar = t_star / (t_star - t0);
    let c2 = d.sqrt() * (-3.0 * b * t0.powi(2) - h2 * t_bar + 4.0 * b * t0.powi(3) - h2)
        / ((t0 - 1.0) * t_bar * (-h2 * t_bar - 3.0 * b * t0.powi(2) + 4.0 * b * t0.powi(3) + h2))
            .sqrt();
    PrintedEstimates { b_dim: b, c1, c2 }
}

/// Both analytical estimates at coagulation parameters, in mm/min.
#[derive(Debug, Clone, Copy)]
pub struct CoagSpeedEstimates {
    pub c1: SpeedEstimate,
    pub c2: SpeedEstimate,
    /// Verbatim dimensional displays, reported side by side.
    pub printed: PrintedEstimates,
}

/// Canonical dimensional path: nondimensionalize (n = 3, sigma = 1,
/// b = M1 M2 M3, D~ = D/h2), evaluate both scalar estimates, and scale the
/// speeds back by h2 (time rescaling with unchanged space unit).
pub fn coag_speed_estimates(p: &CoagParams) -> Result<CoagSpeedEstimates> {
    let dl = nondimensionalize(p)?;
    let mut c1 = narrow_zone_speed(3, dl.b, 1.0, dl.d_tilde)?;
    let mut c2 = piecewise_linear_speed(3, dl.b, 1.0, dl.d_tilde)?;
    c1.value = redimensionalize_speed(c1.value, p);
    c2.value = redimensionalize_speed(c2.value, p);
    Ok(CoagSpeedEstimates {
        c1,
        c2,
        printed: printed_dimensional(p),
    })
}
