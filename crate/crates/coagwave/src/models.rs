//! The model hierarchy: reaction-rate evaluators with analytic Jacobians,
//! the nondimensionalization map, and monotonicity checks.
//!
//! Four fidelities share one trait-free interface keyed by [`ModelKind`]:
//! the fourteen-component cascade, the six-component reduction, the
//! two-component thrombin/XIa system, and the single-equation limit. A
//! dimensionless scalar model `b w^n (1-w) - sigma w` hosts the analytic
//! speed estimates.

use nalgebra::DMatrix;

use crate::error::{CoagError, Result};
use crate::params::{CoagParams, Config, FullModel, FullRates};

pub const FULL14_NAMES: [&str; 14] = [
    "U11", "V11", "T", "P", "C1", "U5", "V5", "U10", "V10", "C2", "U8", "V8", "U9", "V9",
];
pub const REDUCED6_NAMES: [&str; 6] = ["T", "U5", "U8", "U9", "U10", "U11"];
pub const TWOEQ_NAMES: [&str; 2] = ["T", "U11"];
pub const ONEEQ_NAMES: [&str; 1] = ["T"];
pub const SCALAR_NAMES: [&str; 1] = ["w"];

/// Dimensionless scalar reaction `b w^n (1-w) - sigma w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarParams {
    pub n: u32,
    pub b: f64,
    pub sigma: f64,
}

impl ScalarParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CoagError::InvalidParameter {
                name: "scalar.n".into(),
                value: self.n as f64,
                reason: "degree must be >= 2".into(),
            });
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(CoagError::InvalidParameter {
                name: "scalar.b".into(),
                value: self.b,
                reason: "must be finite and > 0".into(),
            });
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(CoagError::InvalidParameter {
                name: "scalar.sigma".into(),
                value: self.sigma,
                reason: "must be finite and >= 0".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Full14,
    Reduced6,
    TwoEq,
    OneEq,
    Scalar(ScalarParams),
}

impl ModelKind {
    pub fn dim(&self) -> usize {
        match self {
            ModelKind::Full14 => 14,
            ModelKind::Reduced6 => 6,
            ModelKind::TwoEq => 2,
            ModelKind::OneEq | ModelKind::Scalar(_) => 1,
        }
    }

    pub fn names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::Full14 => &FULL14_NAMES,
            ModelKind::Reduced6 => &REDUCED6_NAMES,
            ModelKind::TwoEq => &TWOEQ_NAMES,
            ModelKind::OneEq => &ONEEQ_NAMES,
            ModelKind::Scalar(_) => &SCALAR_NAMES,
        }
    }

    /// Index of the front-tracked component (thrombin, or w for Scalar).
    pub fn thrombin_index(&self) -> usize {
        match self {
            ModelKind::Full14 => 2,
            _ => 0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelKind::Full14 => "full14".into(),
            ModelKind::Reduced6 => "reduced6".into(),
            ModelKind::TwoEq => "two_eq".into(),
            ModelKind::OneEq => "one_eq".into(),
            ModelKind::Scalar(s) => format!("scalar(n={},b={},sigma={})", s.n, s.b, s.sigma),
        }
    }

    /// Parse a named (non-scalar) kind; scalar kinds are built from explicit
    /// parameters instead.
    pub fn parse_named(s: &str) -> Option<ModelKind> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "full14" | "full" => Some(ModelKind::Full14),
            "reduced6" | "reduced" => Some(ModelKind::Reduced6),
            "two_eq" | "twoeq" => Some(ModelKind::TwoEq),
            "one_eq" | "oneeq" => Some(ModelKind::OneEq),
            _ => None,
        }
    }
}

/// Dimensionless groups of the scalar reduction. `m1` follows the source
/// exactly (no h11 factor); the canonical speed pipeline never consumes the
/// groups separately, only their product `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub b: f64,
    pub d_tilde: f64,
}

/// Map Table-1-style rates onto the dimensionless scalar groups. Time unit
/// 1/h2, concentration unit T0, space unit unchanged (mm).
pub fn nondimensionalize(r: &CoagParams) -> Result<DimensionlessParams> {
    r.validate()?;
    if r.h2 <= 0.0 {
        return Err(CoagError::InvalidParameter {
            name: "h2".into(),
            value: r.h2,
            reason: "nondimensionalization rescales time by h2; need h2 > 0".into(),
        });
    }
    let m1 = r.k2 * r.k9 * r.k10 * r.k11 / (r.h2 * r.h9 * r.h10);
    let m2 = r.k8 * r.k89 * r.k10_bar * r.t0 / (r.k10 * r.h8 * r.h89);
    let m3 = r.k2_bar * r.k5 * r.k510 * r.t0 / (r.k2 * r.h5 * r.h510);
    Ok(DimensionlessParams {
        m1,
        m2,
        m3,
        b: m1 * m2 * m3,
        d_tilde: r.diffusion / r.h2,
    })
}

/// Undo the time rescaling for a speed: dimensionless c with D_tilde = D/h2
/// corresponds to c * h2 in mm/min.
pub fn redimensionalize_speed(c_dimensionless: f64, r: &CoagParams) -> f64 {
    c_dimensionless * r.h2
}

/// A model kind resolved against a parameter set. All evaluators are pure.
#[derive(Debug, Clone)]
pub struct Model {
    pub kind: ModelKind,
    pub rates: CoagParams,
    full: Option<(FullRates, FullModel)>,
}

impl Model {
    pub fn new(kind: ModelKind, cfg: &Config) -> Result<Self> {
        Self::from_rates(kind, cfg.rates.clone(), Some(&cfg.full_model))
    }

    pub fn from_rates(
        kind: ModelKind,
        rates: CoagParams,
        full: Option<&FullModel>,
    ) -> Result<Self> {
        rates.validate()?;
        if let ModelKind::Scalar(s) = kind {
            s.validate()?;
        }
        let full = match kind {
            ModelKind::Full14 => {
                let fm = full.ok_or_else(|| {
                    CoagError::Config("full14 needs the [full_model] section".into())
                })?;
                Some((fm.derive_rates(&rates)?, fm.clone()))
            }
            _ => None,
        };
        Ok(Model { kind, rates, full })
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn rates(&self) -> &CoagParams {
        &self.rates
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.kind.names()
    }

    pub fn diffusion(&self) -> f64 {
        self.rates.diffusion
    }

    pub fn thrombin_index(&self) -> usize {
        self.kind.thrombin_index()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(CoagError::DimensionMismatch {
                kind: self.kind.label(),
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// Reaction terms F(u), with input checking. The kinetics are not
    /// defined for negative concentrations.
    pub fn rhs(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(state.len())?;
        for (i, &v) in state.iter().enumerate() {
            if !(v >= 0.0) {
                return Err(CoagError::NegativeConcentration {
                    component: self.names()[i].into(),
                    value: v,
                });
            }
        }
        let mut out = vec![0.0; self.dim()];
        self.rhs_into_unchecked(state, &mut out);
        Ok(out)
    }

    /// Reaction terms without input checks; the solver clips states to
    /// nonnegative before calling.
    pub fn rhs_into_unchecked(&self, u: &[f64], out: &mut [f64]) {
        let r = &self.rates;
        match self.kind {
            ModelKind::Scalar(s) => {
                let w = u[0];
                out[0] = s.b * w.powi(s.n as i32) * (1.0 - w) - s.sigma * w;
            }
            ModelKind::OneEq => {
                let t = u[0];
                let gain = r.k9 * r.k11 / (r.h9 * r.h10 * r.h11);
                out[0] =
                    gain * t * (r.k10 + r.a2_prime() * t) * (r.k2 + r.b2() * t) * (1.0 - t / r.t0)
                        - r.h2 * t;
            }
            ModelKind::TwoEq => {
                let (t, u11) = (u[0], u[1]);
                out[0] = u11 * self.twoeq_gain(t) - r.h2 * t;
                out[1] = r.k11 * t - r.h11 * u11;
            }
            ModelKind::Reduced6 => {
                let (t, u5, u8, u9, u10, u11) = (u[0], u[1], u[2], u[3], u[4], u[5]);
                let b2p = r.k2_bar * r.k510 / r.h510;
                let a2p = r.k10_bar * r.k89 / r.h89;
                out[0] = (r.k2 * u10 + b2p * u10 * u5) * (1.0 - t / r.t0) - r.h2 * t;
                out[1] = r.k5 * t - r.h5 * u5;
                out[2] = r.k8 * t - r.h8 * u8;
                out[3] = r.k9 * u11 - r.h9 * u9;
                out[4] = r.k10 * u9 + a2p * u9 * u8 - r.h10 * u10;
                out[5] = r.k11 * t - r.h11 * u11;
            }
            ModelKind::Full14 => {
                let (fr, _) = self.full.as_ref().expect("full rates resolved");
                let [u11, v11, t, p, c1, u5, v5, u10, v10, c2, u8, v8, u9, v9]: [f64; 14] =
                    u.try_into().expect("dimension checked");
                let phi1 = p / (p + r.k2m);
                let phi2 = p / (p + r.k2m_bar);
                let thrombin_prod = fr.r2 * u10 * phi1 + fr.r2_bar * c1 * phi2;
                let x11 = fr.r11 * v11 * t;
                let x5 = fr.r5 * v5 * t;
                let x10 = fr.r10 * v10 * u9 + fr.r10_bar * v10 * c2;
                let x8 = fr.r8 * v8 * t;
                let x9 = fr.r9 * v9 * u11;
                out[0] = x11 - r.h11 * u11;
                out[1] = -x11;
                out[2] = thrombin_prod - r.h2 * t;
                out[3] = -thrombin_prod;
                out[4] = r.k510 * u5 * u10 - r.h510 * c1;
                out[5] = x5 - r.h5 * u5;
                out[6] = -x5;
                out[7] = x10 - fr.q10 * u10;
                out[8] = -x10;
                out[9] = r.k89 * u8 * u9 - r.h89 * c2;
                out[10] = x8 - fr.q8 * u8;
                out[11] = -x8;
                out[12] = x9 - fr.q9 * u9;
                out[13] = -x9;
            }
        }
    }

    /// Thrombin production gain of the two-component model: F_T = U11 * g(T) - h2 T.
    fn twoeq_gain(&self, t: f64) -> f64 {
        let r = &self.rates;
        (r.k9 / (r.h9 * r.h10))
            * (r.k10 + r.a2_prime() * t)
            * (r.k2 + r.b2() * t)
            * (1.0 - t / r.t0)
    }

    fn twoeq_gain_deriv(&self, t: f64) -> f64 {
        let r = &self.rates;
        let (a1, a2) = (r.k10, r.a2_prime());
        let (b1, b2) = (r.k2, r.b2());
        let pref = r.k9 / (r.h9 * r.h10);
        pref * (a2 * (b1 + b2 * t) * (1.0 - t / r.t0) + (a1 + a2 * t) * b2 * (1.0 - t / r.t0)
            - (a1 + a2 * t) * (b1 + b2 * t) / r.t0)
    }

    /// Reaction terms on a whole field in component-major layout
    /// `state[c*nodes + i]`. Semantically identical to mapping
    /// `rhs_into_unchecked` over nodes; written per-component so the
    /// inner loops vectorize.
    pub fn rhs_field_into(&self, state: &[f64], nodes: usize, out: &mut [f64]) {
        debug_assert_eq!(state.len(), self.dim() * nodes);
        debug_assert_eq!(out.len(), self.dim() * nodes);
        let r = &self.rates;
        match self.kind {
            ModelKind::Scalar(s) => {
                let ni = s.n as i32;
                for (o, &w) in out.iter_mut().zip(state) {
                    *o = s.b * w.powi(ni) * (1.0 - w) - s.sigma * w;
                }
            }
            ModelKind::OneEq => {
                let gain = r.k9 * r.k11 / (r.h9 * r.h10 * r.h11);
                let (a1, a2) = (r.k10, r.a2_prime());
                let (b1, b2) = (r.k2, r.b2());
                for (o, &t) in out.iter_mut().zip(state) {
                    *o = gain * t * (a1 + a2 * t) * (b1 + b2 * t) * (1.0 - t / r.t0) - r.h2 * t;
                }
            }
            ModelKind::TwoEq => {
                let (t, u11) = state.split_at(nodes);
                let (ot, o11) = out.split_at_mut(nodes);
                let pref = r.k9 / (r.h9 * r.h10);
                let (a1, a2) = (r.k10, r.a2_prime());
                let (b1, b2) = (r.k2, r.b2());
                for i in 0..nodes {
                    let gain = pref * (a1 + a2 * t[i]) * (b1 + b2 * t[i]) * (1.0 - t[i] / r.t0);
                    ot[i] = u11[i] * gain - r.h2 * t[i];
                    o11[i] = r.k11 * t[i] - r.h11 * u11[i];
                }
            }
            ModelKind::Reduced6 => {
                let b2p = r.k2_bar * r.k510 / r.h510;
                let a2p = r.k10_bar * r.k89 / r.h89;
                let t = &state[0..nodes];
                let u5 = &state[nodes..2 * nodes];
                let u8 = &state[2 * nodes..3 * nodes];
                let u9 = &state[3 * nodes..4 * nodes];
                let u10 = &state[4 * nodes..5 * nodes];
                let u11 = &state[5 * nodes..6 * nodes];
                let (ot, rest) = out.split_at_mut(nodes);
                let (o5, rest) = rest.split_at_mut(nodes);
                let (o8, rest) = rest.split_at_mut(nodes);
                let (o9, rest) = rest.split_at_mut(nodes);
                let (o10, o11) = rest.split_at_mut(nodes);
                for i in 0..nodes {
                    ot[i] =
                        (r.k2 * u10[i] + b2p * u10[i] * u5[i]) * (1.0 - t[i] / r.t0) - r.h2 * t[i];
                    o5[i] = r.k5 * t[i] - r.h5 * u5[i];
                    o8[i] = r.k8 * t[i] - r.h8 * u8[i];
                    o9[i] = r.k9 * u11[i] - r.h9 * u9[i];
                    o10[i] = r.k10 * u9[i] + a2p * u9[i] * u8[i] - r.h10 * u10[i];
                    o11[i] = r.k11 * t[i] - r.h11 * u11[i];
                }
            }
            ModelKind::Full14 => {
                let mut node = [0.0; 14];
                let mut f = [0.0; 14];
                for i in 0..nodes {
                    for c in 0..14 {
                        node[c] = state[c * nodes + i];
                    }
                    self.rhs_into_unchecked(&node, &mut f);
                    for c in 0..14 {
                        out[c * nodes + i] = f[c];
                    }
                }
            }
        }
    }

    /// Analytic Jacobian of the reaction terms.
    pub fn jacobian(&self, state: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(state.len())?;
        let r = &self.rates;
        let d = self.dim();
        let mut j = DMatrix::zeros(d, d);
        match self.kind {
            ModelKind::Scalar(s) => {
                let w = state[0];
                let n = s.n as i32;
                j[(0, 0)] =
                    s.b * (s.n as f64 * w.powi(n - 1) - (s.n as f64 + 1.0) * w.powi(n)) - s.sigma;
            }
            ModelKind::OneEq => {
                let t = state[0];
                let gain = r.k9 * r.k11 / (r.h9 * r.h10 * r.h11);
                let (a1, a2) = (r.k10, r.a2_prime());
                let (b1, b2) = (r.k2, r.b2());
                let (fa, fb, fc, fd) = (t, a1 + a2 * t, b1 + b2 * t, 1.0 - t / r.t0);
                j[(0, 0)] = gain
                    * (fb * fc * fd + fa * a2 * fc * fd + fa * fb * b2 * fd - fa * fb * fc / r.t0)
                    - r.h2;
            }
            ModelKind::TwoEq => {
                let (t, u11) = (state[0], state[1]);
                j[(0, 0)] = u11 * self.twoeq_gain_deriv(t) - r.h2;
                j[(0, 1)] = self.twoeq_gain(t);
                j[(1, 0)] = r.k11;
                j[(1, 1)] = -r.h11;
            }
            ModelKind::Reduced6 => {
                let (t, u5, _u8, u9, u10, _u11) =
                    (state[0], state[1], state[2], state[3], state[4], state[5]);
                let b2p = r.k2_bar * r.k510 / r.h510;
                let a2p = r.k10_bar * r.k89 / r.h89;
                let phi = r.k2 * u10 + b2p * u10 * u5;
                let logistic = 1.0 - t / r.t0;
                j[(0, 0)] = -phi / r.t0 - r.h2;
                j[(0, 1)] = b2p * u10 * logistic;
                j[(0, 4)] = (r.k2 + b2p * u5) * logistic;
                j[(1, 0)] = r.k5;
                j[(1, 1)] = -r.h5;
                j[(2, 0)] = r.k8;
                j[(2, 2)] = -r.h8;
                j[(3, 5)] = r.k9;
                j[(3, 3)] = -r.h9;
                j[(4, 3)] = r.k10 + a2p * state[2];
                j[(4, 2)] = a2p * u9;
                j[(4, 4)] = -r.h10;
                j[(5, 0)] = r.k11;
                j[(5, 5)] = -r.h11;
            }
            ModelKind::Full14 => {
                let (fr, _) = self.full.as_ref().expect("full rates resolved");
                let [u11, v11, t, p, c1, u5, v5, u10, v10, c2, _u8, v8, u9, v9]: [f64; 14] =
                    state.try_into().expect("dimension checked");
                let _ = u5;
                let phi1 = p / (p + r.k2m);
                let phi2 = p / (p + r.k2m_bar);
                let dphi1 = r.k2m / ((p + r.k2m) * (p + r.k2m));
                let dphi2 = r.k2m_bar / ((p + r.k2m_bar) * (p + r.k2m_bar));
                // indices: 0 U11, 1 V11, 2 T, 3 P, 4 C1, 5 U5, 6 V5,
                //          7 U10, 8 V10, 9 C2, 10 U8, 11 V8, 12 U9, 13 V9
                j[(0, 1)] = fr.r11 * t;
                j[(0, 2)] = fr.r11 * v11;
                j[(0, 0)] = -r.h11;
                j[(1, 1)] = -fr.r11 * t;
                j[(1, 2)] = -fr.r11 * v11;
                j[(2, 7)] = fr.r2 * phi1;
                j[(2, 4)] = fr.r2_bar * phi2;
                j[(2, 3)] = fr.r2 * u10 * dphi1 + fr.r2_bar * c1 * dphi2;
                j[(2, 2)] = -r.h2;
                j[(3, 7)] = -fr.r2 * phi1;
                j[(3, 4)] = -fr.r2_bar * phi2;
                j[(3, 3)] = -(fr.r2 * u10 * dphi1 + fr.r2_bar * c1 * dphi2);
                j[(4, 5)] = r.k510 * u10;
                j[(4, 7)] = r.k510 * state[5];
                j[(4, 4)] = -r.h510;
                j[(5, 6)] = fr.r5 * t;
                j[(5, 2)] = fr.r5 * v5;
                j[(5, 5)] = -r.h5;
                j[(6, 6)] = -fr.r5 * t;
                j[(6, 2)] = -fr.r5 * v5;
                j[(7, 8)] = fr.r10 * u9 + fr.r10_bar * c2;
                j[(7, 12)] = fr.r10 * v10;
                j[(7, 9)] = fr.r10_bar * v10;
                j[(7, 7)] = -fr.q10;
                j[(8, 8)] = -(fr.r10 * u9 + fr.r10_bar * c2);
                j[(8, 12)] = -fr.r10 * v10;
                j[(8, 9)] = -fr.r10_bar * v10;
                j[(9, 10)] = r.k89 * u9;
                j[(9, 12)] = r.k89 * state[10];
                j[(9, 9)] = -r.h89;
                j[(10, 11)] = fr.r8 * t;
                j[(10, 2)] = fr.r8 * v8;
                j[(10, 10)] = -fr.q8;
                j[(11, 11)] = -fr.r8 * t;
                j[(11, 2)] = -fr.r8 * v8;
                j[(12, 13)] = fr.r9 * u11;
                j[(12, 0)] = fr.r9 * v9;
                j[(12, 12)] = -fr.q9;
                j[(13, 13)] = -fr.r9 * u11;
                j[(13, 0)] = -fr.r9 * v9;
            }
        }
        Ok(j)
    }

    /// Per-component positive envelope scales: the slaved-manifold values at
    /// T = T0 (precursor levels for the full model). Used to normalize
    /// stiffness estimates and instability thresholds.
    pub fn scales(&self) -> Vec<f64> {
        let r = &self.rates;
        match self.kind {
            ModelKind::Scalar(_) => vec![1.0],
            ModelKind::OneEq => vec![r.t0],
            ModelKind::TwoEq => vec![r.t0, r.k11 / r.h11 * r.t0],
            ModelKind::Reduced6 => {
                let m = self.slaved_state(r.t0);
                m.into_iter().map(|v| v.max(1e-300)).collect()
            }
            ModelKind::Full14 => {
                let (_, fm) = self.full.as_ref().expect("full levels resolved");
                // complexes are not pool-bounded; their kinetic ceiling is
                // the balance value at saturated constituents
                let c1 = r.k510 / r.h510 * fm.f5_0 * fm.f10_0;
                let c2 = r.k89 / r.h89 * fm.f8_0 * fm.f9_0;
                vec![
                    fm.f11_0,
                    fm.f11_0,
                    fm.p0,
                    fm.p0,
                    c1.max(1e-300),
                    fm.f5_0,
                    fm.f5_0,
                    fm.f10_0,
                    fm.f10_0,
                    c2.max(1e-300),
                    fm.f8_0,
                    fm.f8_0,
                    fm.f9_0,
                    fm.f9_0,
                ]
            }
        }
    }

    /// The resting state: everything inactive.
    pub fn rest_state(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.dim()];
        if let ModelKind::Full14 = self.kind {
            let (_, fm) = self.full.as_ref().expect("full levels resolved");
            u[1] = fm.f11_0;
            u[3] = fm.p0;
            u[6] = fm.f5_0;
            u[8] = fm.f10_0;
            u[11] = fm.f8_0;
            u[13] = fm.f9_0;
        }
        u
    }

    /// State on the quasi-steady manifold at thrombin level `t`: every fast
    /// component takes its kinetic-balance value, pool-clamped for the full
    /// model (whose precursors convert, conserving each pair sum). For
    /// Scalar, `t` is the w level directly.
    pub fn slaved_state(&self, t: f64) -> Vec<f64> {
        let r = &self.rates;
        match self.kind {
            ModelKind::Scalar(_) | ModelKind::OneEq => vec![t],
            ModelKind::TwoEq => vec![t, r.k11 / r.h11 * t],
            ModelKind::Reduced6 => {
                let g = r.g_chain();
                vec![
                    t,
                    r.k5 / r.h5 * t,
                    r.k8 / r.h8 * t,
                    g * t,
                    g / r.h10 * (r.k10 + r.a2_prime() * t) * t,
                    r.k11 / r.h11 * t,
                ]
            }
            // the full cascade at pool-clamped quasi-stationary levels:
            // thrombin alone cannot ignite the depletable model before it
            // decays, the activated zone must carry the enzymes too
            ModelKind::Full14 => {
                let (_, fm) = self.full.as_ref().expect("full levels resolved");
                let g = r.g_chain();
                let t = t.min(fm.p0);
                let u5 = (r.k5 / r.h5 * t).min(fm.f5_0);
                let u8 = (r.k8 / r.h8 * t).min(fm.f8_0);
                let u9 = (g * t).min(fm.f9_0);
                let u10 = (g / r.h10 * (r.k10 + r.a2_prime() * t) * t).min(fm.f10_0);
                let u11 = (r.k11 / r.h11 * t).min(fm.f11_0);
                let c1 = r.k510 / r.h510 * u5 * u10;
                let c2 = r.k89 / r.h89 * u8 * u9;
                vec![
                    u11,
                    fm.f11_0 - u11,
                    t,
                    fm.p0 - t,
                    c1,
                    u5,
                    fm.f5_0 - u5,
                    u10,
                    fm.f10_0 - u10,
                    c2,
                    u8,
                    fm.f8_0 - u8,
                    u9,
                    fm.f9_0 - u9,
                ]
            }
        }
    }

    /// Representative activation state at level `s` in [0, 1], used to probe
    /// reaction stiffness. Enzymes sit at slaved values clamped by their
    /// precursor levels so the probe covers the stiff bilinear terms.
    pub(crate) fn stiffness_probe(&self, s: f64) -> Vec<f64> {
        match self.kind {
            ModelKind::Scalar(_) => vec![s],
            ModelKind::Full14 => {
                let (_, fm) = self.full.as_ref().expect("full levels resolved");
                self.slaved_state(s * fm.p0)
            }
            _ => self.slaved_state(s * self.rates.t0),
        }
    }

    /// Structural state checks: dimensions, nonnegativity, and the full
    /// model's pairwise conservation bounds.
    pub fn check_state(&self, state: &[f64]) -> Result<()> {
        self.check_dim(state.len())?;
        for (i, &v) in state.iter().enumerate() {
            if !(v >= 0.0) {
                return Err(CoagError::NegativeConcentration {
                    component: self.names()[i].into(),
                    value: v,
                });
            }
        }
        if let ModelKind::Full14 = self.kind {
            let (_, fm) = self.full.as_ref().expect("full levels resolved");
            let tol = 1e-9;
            let pairs = [
                ("T+P", state[2] + state[3], fm.p0),
                ("U11+V11", state[0] + state[1], fm.f11_0),
                ("U5+V5", state[5] + state[6], fm.f5_0),
                ("U10+V10", state[7] + state[8], fm.f10_0),
                ("U8+V8", state[10] + state[11], fm.f8_0),
                ("U9+V9", state[12] + state[13], fm.f9_0),
            ];
            for (name, sum, cap) in pairs {
                if sum > cap * (1.0 + tol) {
                    return Err(CoagError::InvalidParameter {
                        name: name.into(),
                        value: sum,
                        reason: format!("exceeds the conserved level {cap}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// One monotonicity violation: off-diagonal Jacobian entry below tolerance.
#[derive(Debug, Clone)]
pub struct MonotoneViolation {
    pub row: usize,
    pub col: usize,
    pub entry: f64,
    pub state: Vec<f64>,
    pub in_box: bool,
}

#[derive(Debug, Clone)]
pub struct MonotoneReport {
    pub samples: usize,
    pub out_of_box: usize,
    pub min_entry: f64,
    pub min_location: (usize, usize),
    pub violations: Vec<MonotoneViolation>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.violations.iter().all(|v| !v.in_box)
    }
}

/// Check the monotone-system property (off-diagonal Jacobian entries >= 0)
/// at the given states. Samples outside the admissible box
/// [0, T0] x [0, envelope]^k are evaluated but flagged; the claim is local
/// to physical states.
pub fn check_monotone(model: &Model, samples: &[Vec<f64>]) -> Result<MonotoneReport> {
    let tol = -1e-12;
    let scales = model.scales();
    let mut report = MonotoneReport {
        samples: samples.len(),
        out_of_box: 0,
        min_entry: f64::INFINITY,
        min_location: (0, 0),
        violations: Vec::new(),
    };
    for state in samples {
        let in_box = state.len() == model.dim()
            && state
                .iter()
                .zip(&scales)
                .all(|(&v, &s)| (0.0..=s * (1.0 + 1e-12)).contains(&v));
        if !in_box {
            report.out_of_box += 1;
        }
        let j = model.jacobian(state)?;
        for row in 0..model.dim() {
            for col in 0..model.dim() {
                if row == col {
                    continue;
                }
                let e = j[(row, col)];
                if e < report.min_entry {
                    report.min_entry = e;
                    report.min_location = (row, col);
                }
                if e < tol {
                    report.violations.push(MonotoneViolation {
                        row,
                        col,
                        entry: e,
                        state: state.clone(),
                        in_box,
                    });
                }
            }
        }
    }
    Ok(report)
}
