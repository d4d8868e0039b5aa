//! Parameter schema, validation, and derived rate groups.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoagError, Result};

const DEFAULT_TOML: &str = include_str!("../config/default.toml");

/// Top-level configuration. One TOML file drives every model in the
/// hierarchy; unknown keys are rejected so typos never pass silently.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub rates: CoagParams,
    pub full_model: FullModel,
    pub domain: Domain,
    pub fit: Fit,
}

/// First-order kinetic constants (min^-1 unless noted), Michaelis constants
/// (nM), diffusion coefficient (mm^2/min), and prothrombin level (nM).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoagParams {
    pub k11: f64,
    pub h11: f64,
    pub k10: f64,
    pub k10_bar: f64,
    pub h10: f64,
    pub k9: f64,
    pub h9: f64,
    /// nM^-1 min^-1: factor VIIIa-IXa complex assembly.
    pub k89: f64,
    pub h89: f64,
    pub k8: f64,
    pub h8: f64,
    pub k5: f64,
    pub h5: f64,
    /// nM^-1 min^-1: factor Va-Xa complex assembly.
    pub k510: f64,
    pub h510: f64,
    pub k2: f64,
    pub k2_bar: f64,
    pub h2: f64,
    pub k2m: f64,
    pub k2m_bar: f64,
    pub diffusion: f64,
    pub t0: f64,
}

/// Zymogen levels and decay overrides needed only by the fourteen-component
/// model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FullModel {
    pub p0: f64,
    pub f5_0: f64,
    pub f8_0: f64,
    pub f9_0: f64,
    pub f10_0: f64,
    pub f11_0: f64,
    pub q8: Option<f64>,
    pub q9: Option<f64>,
    pub q10: Option<f64>,
}

/// Spatial grid, time horizon, initial-activation shape, and
/// front-measurement knobs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub length: f64,
    pub nodes: usize,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub ic_amplitude: Option<f64>,
    pub ic_width: Option<f64>,
    pub ic_ramp: Option<f64>,
    pub threshold_fraction: f64,
    pub window_fraction: f64,
    pub scheme: Scheme,
}

/// Time-stepping scheme. Both treat reactions explicitly; the semi-implicit
/// variant solves diffusion with a backward-Euler tridiagonal sweep, which
/// drops the dx^2 stability restriction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    SemiImplicit,
}

/// Knobs for the enzyme-deficiency study.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Fit {
    pub activity_fit_scale: f64,
}

impl Default for Config {
    fn default() -> Self {
        let cfg: Config = toml::from_str(DEFAULT_TOML).expect("built-in config parses");
        cfg.validate().expect("built-in config validates");
        cfg
    }
}

impl Config {
    /// Load and validate a TOML file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config = toml::from_str(&text)
            .map_err(|e| CoagError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        self.full_model.validate()?;
        self.domain.validate()?;
        require_pos("fit.activity_fit_scale", self.fit.activity_fit_scale)?;
        Ok(())
    }
}

fn require_pos(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CoagError::InvalidParameter {
            name: name.into(),
            value,
            reason: "must be finite and > 0".into(),
        })
    }
}

fn require_nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(CoagError::InvalidParameter {
            name: name.into(),
            value,
            reason: "must be finite and >= 0".into(),
        })
    }
}

impl CoagParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k11", self.k11),
            ("h11", self.h11),
            ("k10", self.k10),
            ("k10_bar", self.k10_bar),
            ("h10", self.h10),
            ("k9", self.k9),
            ("h9", self.h9),
            ("k89", self.k89),
            ("h89", self.h89),
            ("k8", self.k8),
            ("h8", self.h8),
            ("k5", self.k5),
            ("h5", self.h5),
            ("k510", self.k510),
            ("h510", self.h510),
            ("k2", self.k2),
            ("k2_bar", self.k2_bar),
            ("k2m", self.k2m),
            ("k2m_bar", self.k2m_bar),
            ("diffusion", self.diffusion),
            ("t0", self.t0),
        ] {
            require_pos(name, v)?;
        }
        // h2 = 0 is admissible: it turns thrombin removal off, which makes
        // total thrombin + prothrombin a conserved quantity.
        require_nonneg("h2", self.h2)?;
        Ok(())
    }

    /// Lumped tenase production slope: k10_bar k89 k8 / (h89 h8).
    pub fn a2_prime(&self) -> f64 {
        self.k10_bar * self.k89 * self.k8 / (self.h89 * self.h8)
    }

    /// Lumped prothrombinase production slope: k2_bar k5 k510 / (h5 h510).
    pub fn b2(&self) -> f64 {
        self.k2_bar * self.k5 * self.k510 / (self.h5 * self.h510)
    }

    /// Chain gain through factors XIa and IXa: k9 k11 / (h9 h11).
    pub fn g_chain(&self) -> f64 {
        self.k9 * self.k11 / (self.h9 * self.h11)
    }

    /// Rescale the factor XIa subsystem by 1/epsilon. Equilibria are
    /// unchanged; epsilon -> 0 slaves XIa to thrombin.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<CoagParams> {
        require_pos("epsilon", epsilon)?;
        let mut r = self.clone();
        r.k11 /= epsilon;
        r.h11 /= epsilon;
        Ok(r)
    }

    /// Reduce factor IX activation to `percent` % of nominal.
    pub fn with_k9_activity(&self, percent: f64) -> Result<CoagParams> {
        require_pos("k9 activity percent", percent)?;
        let mut r = self.clone();
        r.k9 *= percent / 100.0;
        Ok(r)
    }
}

/// Second-order rates of the fourteen-component model, derived from the
/// first-order constants and the zymogen levels they were measured at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRates {
    pub r11: f64,
    pub r10: f64,
    pub r10_bar: f64,
    pub r9: f64,
    pub r8: f64,
    pub r5: f64,
    pub r2: f64,
    pub r2_bar: f64,
    pub q8: f64,
    pub q9: f64,
    pub q10: f64,
}

impl FullModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("full_model.p0", self.p0),
            ("full_model.f5_0", self.f5_0),
            ("full_model.f8_0", self.f8_0),
            ("full_model.f9_0", self.f9_0),
            ("full_model.f10_0", self.f10_0),
            ("full_model.f11_0", self.f11_0),
        ] {
            require_pos(name, v)?;
        }
        for (name, v) in [
            ("full_model.q8", self.q8),
            ("full_model.q9", self.q9),
            ("full_model.q10", self.q10),
        ] {
            if let Some(v) = v {
                require_pos(name, v)?;
            }
        }
        Ok(())
    }

    /// Derive second-order rates so that each linearized production term
    /// matches its first-order constant: k_i = r_i * level_i.
    pub fn derive_rates(&self, rates: &CoagParams) -> Result<FullRates> {
        self.validate()?;
        let fr = FullRates {
            r11: rates.k11 / self.f11_0,
            r10: rates.k10 / self.f10_0,
            r10_bar: rates.k10_bar / self.f10_0,
            r9: rates.k9 / self.f9_0,
            r8: rates.k8 / self.f8_0,
            r5: rates.k5 / self.f5_0,
            r2: rates.k2 * rates.k2m / rates.t0,
            r2_bar: rates.k2_bar * rates.k2m_bar / rates.t0,
            q8: self.q8.unwrap_or(rates.h8),
            q9: self.q9.unwrap_or(rates.h9),
            q10: self.q10.unwrap_or(rates.h10),
        };
        // Consistency guard: the linearization identity must hold exactly.
        for (name, lhs, rhs) in [
            ("k11", rates.k11, fr.r11 * self.f11_0),
            ("k10", rates.k10, fr.r10 * self.f10_0),
            ("k9", rates.k9, fr.r9 * self.f9_0),
            ("k8", rates.k8, fr.r8 * self.f8_0),
            ("k5", rates.k5, fr.r5 * self.f5_0),
        ] {
            let rel = ((lhs - rhs) / lhs).abs();
            if rel > 1e-12 {
                return Err(CoagError::InvalidParameter {
                    name: name.into(),
                    value: rhs,
                    reason: format!("linearization identity broken, expected {lhs}"),
                });
            }
        }
        Ok(fr)
    }
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        require_pos("domain.length", self.length)?;
        require_pos("domain.t_end", self.t_end)?;
        require_pos("domain.snapshot_every", self.snapshot_every)?;
        if self.nodes < 3 {
            return Err(CoagError::InvalidParameter {
                name: "domain.nodes".into(),
                value: self.nodes as f64,
                reason: "need at least 3 grid nodes".into(),
            });
        }
        if self.snapshot_every > self.t_end {
            return Err(CoagError::InvalidParameter {
                name: "domain.snapshot_every".into(),
                value: self.snapshot_every,
                reason: format!("exceeds t_end = {}", self.t_end),
            });
        }
        if let Some(w) = self.ic_width {
            if !(w.is_finite() && w > 0.0 && w < self.length / 4.0) {
                return Err(CoagError::InvalidParameter {
                    name: "domain.ic_width".into(),
                    value: w,
                    reason: format!("must lie in (0, length/4) = (0, {})", self.length / 4.0),
                });
            }
        }
        if let Some(a) = self.ic_amplitude {
            require_pos("domain.ic_amplitude", a)?;
        }
        if let Some(r) = self.ic_ramp {
            require_nonneg("domain.ic_ramp", r)?;
        }
        let v = self.threshold_fraction;
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(CoagError::InvalidParameter {
                name: "domain.threshold_fraction".into(),
                value: v,
                reason: "must lie strictly between 0 and 1".into(),
            });
        }
        if !(self.window_fraction.is_finite()
            && self.window_fraction > 0.0
            && self.window_fraction <= 1.0)
        {
            return Err(CoagError::InvalidParameter {
                name: "domain.window_fraction".into(),
                value: self.window_fraction,
                reason: "must lie in (0, 1]".into(),
            });
        }
        Ok(())
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        self.length / (self.nodes - 1) as f64
    }

    /// Node coordinates, 0 to length inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nodes).map(|i| i as f64 * dx).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_matches_published_rate_table() {
        let c = Config::default();
        let r = &c.rates;
        assert_eq!(r.k11, 0.000011);
        assert_eq!(r.h11, 0.5);
        assert_eq!(r.k10, 0.00033);
        assert_eq!(r.k10_bar, 500.0);
        assert_eq!(r.h10, 1.0);
        assert_eq!(r.k9, 20.0);
        assert_eq!(r.h9, 0.2);
        assert_eq!(r.k89, 100.0);
        assert_eq!(r.h89, 100.0);
        assert_eq!(r.k8, 0.00001);
        assert_eq!(r.h8, 0.31);
        assert_eq!(r.k5, 0.17);
        assert_eq!(r.h5, 0.31);
        assert_eq!(r.k510, 100.0);
        assert_eq!(r.h510, 100.0);
        assert_eq!(r.k2, 2.45);
        assert_eq!(r.h2, 2.3);
        assert_eq!(r.k2m, 58.0);
        assert_eq!(r.k2m_bar, 210.0);
        assert_eq!(r.diffusion, 0.0037);
        assert_eq!(r.t0, 1400.0);
    }

    #[test]
    fn lumped_slopes_match_hand_computation() {
        let r = Config::default().rates;
        // k10_bar k89 k8 / (h89 h8) = 500*100*1e-5 / (100*0.31)
        assert!((r.a2_prime() - 0.016129032258064516).abs() < 1e-15);
        // b2 / k2_bar = k5 k510 / (h5 h510) = 0.17*100/(0.31*100)
        assert!((r.b2() / r.k2_bar - 0.548387096774193).abs() < 1e-14);
        assert!((r.g_chain() - 20.0 * 0.000011 / (0.2 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn epsilon_rescale_preserves_xia_ratio() {
        let r = Config::default().rates;
        let s = r.with_epsilon(0.25).unwrap();
        assert_eq!(s.k11, r.k11 * 4.0);
        assert_eq!(s.h11, r.h11 * 4.0);
        assert!((s.k11 / s.h11 - r.k11 / r.h11).abs() < 1e-18);
    }

    #[test]
    fn full_rates_satisfy_linearization_identity() {
        let c = Config::default();
        let fr = c.full_model.derive_rates(&c.rates).unwrap();
        assert!((fr.r9 * c.full_model.f9_0 - c.rates.k9).abs() < 1e-12);
        assert!((fr.r11 * c.full_model.f11_0 - c.rates.k11).abs() < 1e-18);
        assert_eq!(fr.q8, c.rates.h8);
        assert_eq!(fr.q9, c.rates.h9);
        assert_eq!(fr.q10, c.rates.h10);
        // r2 = k2 K2m / T0, r2_bar = k2_bar K2m_bar / T0.
        assert!((fr.r2 - 2.45 * 58.0 / 1400.0).abs() < 1e-15);
        assert!((fr.r2_bar - c.rates.k2_bar * 210.0 / 1400.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"
            [rates]
            k11 = 1.0
            typo_key = 2.0
        "#;
        let err = toml::from_str::<Config>(text);
        assert!(err.is_err());
    }

    #[test]
    fn negative_rate_is_rejected() {
        let mut c = Config::default();
        c.rates.k9 = -1.0;
        assert!(matches!(
            c.validate(),
            Err(CoagError::InvalidParameter { name, .. }) if name == "k9"
        ));
    }

    #[test]
    fn zero_h2_is_allowed() {
        let mut c = Config::default();
        c.rates.h2 = 0.0;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn domain_accessors() {
        let d = Config::default().domain;
        assert_eq!(d.nodes, 1001);
        assert!((d.dx() - 0.005).abs() < 1e-15);
        let g = d.grid();
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], 0.0);
        assert!((g[1000] - 5.0).abs() < 1e-12);
    }
}
