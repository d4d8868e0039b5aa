//! Stationary points of the reduced kinetics.
//!
//! On the quasi-steady manifold the thrombin equation reduces to
//! dT/dt = -P(T) with P(T) = T * Q(T) and Q a cubic. This module carries two
//! coefficient sets for Q: [`stationary_cubic`] expands the kinetics
//! directly (its roots are the true equilibria, as the residual checks
//! confirm), while [`polynomial_coeffs`] reproduces the published display
//! verbatim. The two agree in a and b at the shipped h10 = 1 but differ in c
//! and d by small absolute terms; roots of the published set are close but
//! not identical.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoagError, Result};
use crate::models::{Model, ModelKind};
use crate::params::CoagParams;

/// Coefficients of Q(T) = a T^3 + b T^2 + c T + d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicCoeffs {
    pub fn eval(&self, t: f64) -> f64 {
        ((self.a * t + self.b) * t + self.c) * t + self.d
    }

    pub fn deriv(&self, t: f64) -> f64 {
        (3.0 * self.a * t + 2.0 * self.b) * t + self.c
    }

    /// Magnitude scale of the coefficient vector.
    pub fn scale(&self) -> f64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
    }

    /// P'(T) where P(T) = T Q(T).
    pub fn p_prime(&self, t: f64) -> f64 {
        self.eval(t) + t * self.deriv(t)
    }
}

/// Exact cubic from the kinetics: with A1 = k10, A2 = k10_bar k89 k8/(h89 h8),
/// B1 = k2, B2 = k2_bar k5 k510/(h5 h510), g = k9 k11/(h9 h11 h10), the
/// manifold-reduced thrombin equation is dT/dt = -T Q(T) with
/// Q(T) = g A2 B2/T0 T^3 + g((A1 B2 + A2 B1)/T0 - A2 B2) T^2
///      + g(A1 B1/T0 - A1 B2 - A2 B1) T + (h2 - g A1 B1).
pub fn stationary_cubic(r: &CoagParams) -> CubicCoeffs {
    let a1 = r.k10;
    let a2 = r.a2_prime();
    let b1 = r.k2;
    let b2 = r.b2();
    let g = r.g_chain() / r.h10;
    CubicCoeffs {
        a: g * a2 * b2 / r.t0,
        b: g * ((a1 * b2 + a2 * b1) / r.t0 - a2 * b2),
        c: g * (a1 * b1 / r.t0 - a1 * b2 - a2 * b1),
        d: r.h2 - g * a1 * b1,
    }
}

/// Published coefficient display, reproduced verbatim. Relative to
/// T0 * stationary_cubic it carries four copy slips: b's third product and
/// c's second product drop h10, c's third product drops k10_bar, and d's
/// first product drops T0. At the shipped h10 = 1 the a and b entries agree
/// exactly; c and d differ by small absolute amounts.
pub fn polynomial_coeffs(r: &CoagParams) -> CubicCoeffs {
    let chain = r.k9 * r.k11 / (r.h9 * r.h11);
    let a = r.k10_bar * r.k89 * r.k8 * r.k2_bar * r.k5 * r.k510 * chain
        / (r.h89 * r.h8 * r.h5 * r.h10 * r.h510);
    let b = -a * r.t0
        + r.k10 * r.k2_bar * r.k5 * r.k510 * chain / (r.h5 * r.h10 * r.h510)
        + r.k2 * r.k10_bar * r.k89 * r.k8 * chain / (r.h89 * r.h8);
    let c = -r.k10 * r.k2_bar * r.k5 * r.k510 * chain / (r.h5 * r.h10 * r.h510) * r.t0
        + r.k2 * r.k10 * chain
        - r.k2 * r.k89 * r.k8 * chain / (r.h89 * r.h8 * r.h10) * r.t0;
    let d = -r.k2 * r.k10 * chain / r.h10 + r.h2 * r.t0;
    CubicCoeffs { a, b, c, d }
}

/// A polished root of Q with its degeneracy marker.
#[derive(Debug, Clone, Copy)]
pub struct RootInfo {
    pub t: f64,
    pub q_prime: f64,
    /// |Q'(t)| < 1e-10 * coefficient scale: too close to a double root for
    /// stability claims.
    pub degenerate: bool,
}

fn bisect_root(q: &CubicCoeffs, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = q.eval(lo);
    debug_assert!(flo == 0.0 || q.eval(hi) == 0.0 || (flo > 0.0) != (q.eval(hi) > 0.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = q.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-15 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
    }
    // Newton polish; fall back to the bisection midpoint if it wanders.
    let mut t = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = q.eval(t);
        let df = q.deriv(t);
        if df == 0.0 {
            break;
        }
        let step = f / df;
        let next = t - step;
        if !next.is_finite() || next < lo - (hi - lo) || next > hi + (hi - lo) {
            break;
        }
        t = next;
        if step.abs() <= 1e-14 * t.abs().max(1.0) {
            break;
        }
    }
    t
}

/// Expand from `anchor` in direction `dir` until the polynomial's sign
/// matches its leading-term sign at infinity.
fn expand_bracket(q: &CubicCoeffs, anchor: f64, dir: f64, target_sign: f64) -> Option<f64> {
    let mut step = anchor.abs().max(1.0);
    for _ in 0..80 {
        let t = anchor + dir * step;
        let f = q.eval(t);
        if f == 0.0 || (f > 0.0) == (target_sign > 0.0) {
            return Some(t);
        }
        step *= 2.0;
    }
    None
}

fn quadratic_real_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    // b t^2 + c t + d = 0
    if b == 0.0 {
        if c == 0.0 {
            return Vec::new();
        }
        return vec![-d / c];
    }
    let disc = c * c - 4.0 * b * d;
    if disc < 0.0 {
        return Vec::new();
    }
    // q = -(c + sign(c) sqrt(disc))/2 keeps the smaller root accurate.
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    let q = -0.5 * (c + sign * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / b, d / q]
}

/// All real roots of Q, ascending. Monotone-interval bracketing: the real
/// line splits at the critical points of Q into intervals where Q is
/// monotone, each holding at most one root.
pub fn real_roots(q: &CubicCoeffs) -> Vec<f64> {
    if q.a == 0.0 {
        let mut r = quadratic_real_roots(q.b, q.c, q.d);
        r.sort_by(|x, y| x.partial_cmp(y).unwrap());
        r.dedup();
        return r;
    }
    let sign_inf = q.a.signum();
    let crit_disc = q.b * q.b - 3.0 * q.a * q.c;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    if crit_disc <= 0.0 {
        // Q strictly monotone: exactly one real root.
        let lo = expand_bracket(q, 0.0, -1.0, -sign_inf);
        let hi = expand_bracket(q, 0.0, 1.0, sign_inf);
        if let (Some(lo), Some(hi)) = (lo, hi) {
            brackets.push((lo, hi));
        }
    } else {
        let sq = crit_disc.sqrt();
        let t1 = (-q.b - sq) / (3.0 * q.a);
        let t2 = (-q.b + sq) / (3.0 * q.a);
        let (t1, t2) = (t1.min(t2), t1.max(t2));
        let (f1, f2) = (q.eval(t1), q.eval(t2));
        if let Some(lo) = expand_bracket(q, t1, -1.0, -sign_inf) {
            if f1 == 0.0 || (q.eval(lo) > 0.0) != (f1 > 0.0) {
                brackets.push((lo.min(t1), t1.max(lo)));
            }
        }
        if f1 == 0.0 || f2 == 0.0 || (f1 > 0.0) != (f2 > 0.0) {
            brackets.push((t1, t2));
        }
        if let Some(hi) = expand_bracket(q, t2, 1.0, sign_inf) {
            if f2 == 0.0 || (q.eval(hi) > 0.0) != (f2 > 0.0) {
                brackets.push((t2.min(hi), hi.max(t2)));
            }
        }
    }
    let mut roots: Vec<f64> = brackets
        .into_iter()
        .map(|(lo, hi)| bisect_root(q, lo, hi))
        .collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * x.abs().max(1.0));
    roots
}

/// Strictly positive real roots, ascending, with degeneracy markers.
pub fn positive_roots(q: &CubicCoeffs) -> Vec<RootInfo> {
    let tol = 1e-10 * q.scale();
    real_roots(q)
        .into_iter()
        .filter(|&t| t > 0.0)
        .map(|t| {
            let q_prime = q.deriv(t);
            RootInfo {
                t,
                q_prime,
                degenerate: q_prime.abs() < tol,
            }
        })
        .collect()
}

/// Full Reduced6 stationary state from a thrombin level, per the kinetic
/// balance of each equation. The published display of the U10 relation drops
/// the k8/h8 factor inside the quadratic term; the form used here makes the
/// reaction terms vanish at every root of P, which the residual invariant
/// checks.
pub fn equilibrium_from_t(r: &CoagParams, t_star: f64) -> Result<Vec<f64>> {
    if !(t_star >= 0.0) {
        return Err(CoagError::InvalidParameter {
            name: "t_star".into(),
            value: t_star,
            reason: "equilibrium map needs T >= 0".into(),
        });
    }
    let model = Model::from_rates(ModelKind::Reduced6, r.clone(), None)?;
    Ok(model.slaved_state(t_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    NoPositiveEquilibrium,
    Monostable,
    Bistable,
    ThreePositiveRoots,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::NoPositiveEquilibrium => "no positive equilibrium",
            Classification::Monostable => "monostable",
            Classification::Bistable => "bistable",
            Classification::ThreePositiveRoots => "three positive roots",
        };
        f.write_str(s)
    }
}

/// Everything the `equilibria` subcommand reports for one parameter set.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub cubic: CubicCoeffs,
    pub printed: CubicCoeffs,
    pub roots: Vec<RootInfo>,
    /// Reduced6 stationary state per root.
    pub states: Vec<Vec<f64>>,
    /// P'(T*) per root (exact cubic).
    pub p_primes: Vec<f64>,
    /// max|F(u*)| per root.
    pub residuals: Vec<f64>,
    /// Principal (largest real part) eigenvalue of the analytic Reduced6
    /// Jacobian at each stationary state.
    pub principal_eigs: Vec<f64>,
    /// None when the root is degenerate.
    pub stable: Vec<Option<bool>>,
    /// The rest state T = 0 is stable iff Q(0) = d > 0.
    pub rest_stable: bool,
    pub classification: Classification,
}

/// Largest real part among the eigenvalues.
pub fn principal_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The analysis matrix at tau = 0 in the order (T, U5, U8, U11, U9, U10):
/// lower triangular, so its eigenvalues sit on the diagonal
/// (-P'(T*), -h5, -h8, -h11, -h9, -h10).
pub fn appendix_matrix(r: &CoagParams, q: &CubicCoeffs, t_star: f64) -> DMatrix<f64> {
    let a2p = r.k10_bar * r.k89 / r.h89;
    let u8 = r.k8 / r.h8 * t_star;
    let u9 = r.g_chain() * t_star;
    let mut m = DMatrix::zeros(6, 6);
    m[(0, 0)] = -q.p_prime(t_star);
    m[(1, 0)] = r.k5;
    m[(1, 1)] = -r.h5;
    m[(2, 0)] = r.k8;
    m[(2, 2)] = -r.h8;
    m[(3, 0)] = r.k11;
    m[(3, 3)] = -r.h11;
    m[(4, 3)] = r.k9;
    m[(4, 4)] = -r.h9;
    m[(5, 2)] = a2p * u9;
    m[(5, 4)] = r.k10 + a2p * u8;
    m[(5, 5)] = -r.h10;
    m
}

/// Root-count classification plus per-root stability data.
pub fn classify(r: &CoagParams) -> Result<EquilibriumReport> {
    r.validate()?;
    let cubic = stationary_cubic(r);
    let printed = polynomial_coeffs(r);
    let roots = positive_roots(&cubic);
    let model = Model::from_rates(ModelKind::Reduced6, r.clone(), None)?;
    let mut states = Vec::new();
    let mut p_primes = Vec::new();
    let mut residuals = Vec::new();
    let mut principal_eigs = Vec::new();
    let mut stable = Vec::new();
    for root in &roots {
        let state = model.slaved_state(root.t);
        let f = model.rhs(&state)?;
        let resid = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let eig = principal_eigenvalue(&model.jacobian(&state)?);
        p_primes.push(cubic.p_prime(root.t));
        residuals.push(resid);
        principal_eigs.push(eig);
        stable.push(if root.degenerate {
            None
        } else {
            Some(cubic.p_prime(root.t) > 0.0)
        });
        states.push(state);
    }
    let classification = match roots.len() {
        0 => Classification::NoPositiveEquilibrium,
        1 => Classification::Monostable,
        2 => Classification::Bistable,
        _ => Classification::ThreePositiveRoots,
    };
    Ok(EquilibriumReport {
        cubic,
        printed,
        roots,
        states,
        p_primes,
        residuals,
        principal_eigs,
        stable,
        rest_stable: cubic.d > 0.0,
        classification,
    })
}

pub fn is_bistable(r: &CoagParams) -> Result<bool> {
    Ok(classify(r)?.classification == Classification::Bistable)
}

/// Outcome of the randomized Theorem 1 verification.
#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub requested_trials: usize,
    pub bistable_trials: usize,
    pub attempts: usize,
    pub roots_checked: usize,
    pub degenerate_skipped: usize,
    pub max_residual: f64,
    pub failures: Vec<String>,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check the stability correspondence (principal eigenvalue of F'(u*)
/// positive iff P'(T*) < 0) on the base rates and on random x[0.5, 2]
/// per-rate perturbations that remain bistable, and check the triangular
/// analysis matrix against the same signs. Deterministic under `seed`.
pub fn verify_theorem1(r: &CoagParams, trials: usize, seed: u64) -> Result<Theorem1Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Theorem1Report {
        requested_trials: trials,
        bistable_trials: 0,
        attempts: 0,
        roots_checked: 0,
        degenerate_skipped: 0,
        max_residual: 0.0,
        failures: Vec::new(),
    };
    let check_config = |rates: &CoagParams, tag: &str, rep: &mut Theorem1Report| -> Result<()> {
        let eq = classify(rates)?;
        let q = eq.cubic;
        for (i, root) in eq.roots.iter().enumerate() {
            if root.degenerate || eq.p_primes[i].abs() < 1e-10 {
                rep.degenerate_skipped += 1;
                continue;
            }
            rep.roots_checked += 1;
            let scale = root.t.max(1.0);
            if eq.residuals[i] > 1e-8 * scale {
                rep.failures.push(format!(
                    "{tag}: residual {:.3e} at T* = {:.6} exceeds 1e-8 * {scale:.1}",
                    eq.residuals[i], root.t
                ));
            }
            let unstable_expected = eq.p_primes[i] < 0.0;
            let unstable_jacobian = eq.principal_eigs[i] > 0.0;
            if unstable_expected != unstable_jacobian {
                rep.failures.push(format!(
                    "{tag}: sign mismatch at T* = {:.6}: P' = {:.3e}, principal eig = {:.3e}",
                    root.t, eq.p_primes[i], eq.principal_eigs[i]
                ));
            }
            let tri = appendix_matrix(rates, &q, root.t);
            let diag_max = (0..6)
                .map(|k| tri[(k, k)])
                .fold(f64::NEG_INFINITY, f64::max);
            let tri_eig = principal_eigenvalue(&tri);
            if (tri_eig - diag_max).abs() > 1e-9 * diag_max.abs().max(1.0) {
                rep.failures.push(format!(
                    "{tag}: triangular matrix eigenvalue {tri_eig:.6e} differs from diagonal max {diag_max:.6e}"
                ));
            }
            if (tri_eig > 0.0) != unstable_expected {
                rep.failures.push(format!(
                    "{tag}: triangular matrix sign disagrees with P' at T* = {:.6}",
                    root.t
                ));
            }
            rep.max_residual = rep.max_residual.max(eq.residuals[i]);
        }
        Ok(())
    };

    check_config(r, "base", &mut report)?;
    let max_attempts = trials.saturating_mul(300).max(1000);
    while report.bistable_trials < trials && report.attempts < max_attempts {
        report.attempts += 1;
        let p = perturb_rates(r, &mut rng);
        if !is_bistable(&p)? {
            continue;
        }
        report.bistable_trials += 1;
        let tag = format!("trial {}", report.bistable_trials);
        check_config(&p, &tag, &mut report)?;
    }
    if report.bistable_trials < trials {
        report.failures.push(format!(
            "only {} of {trials} bistable perturbations found in {} attempts",
            report.bistable_trials, report.attempts
        ));
    }
    Ok(report)
}

/// Multiply every kinetic rate (k's and h's) by an independent log-uniform
/// factor in [0.5, 2]. T0, D, and the Michaelis constants stay fixed.
pub fn perturb_rates<R: Rng>(r: &CoagParams, rng: &mut R) -> CoagParams {
    let mut p = r.clone();
    let ln2 = std::f64::consts::LN_2;
    let factor = |rng: &mut R| (rng.gen_range(-ln2..=ln2)).exp();
    p.k11 *= factor(rng);
    p.h11 *= factor(rng);
    p.k10 *= factor(rng);
    p.k10_bar *= factor(rng);
    p.h10 *= factor(rng);
    p.k9 *= factor(rng);
    p.h9 *= factor(rng);
    p.k89 *= factor(rng);
    p.h89 *= factor(rng);
    p.k8 *= factor(rng);
    p.h8 *= factor(rng);
    p.k5 *= factor(rng);
    p.h5 *= factor(rng);
    p.k510 *= factor(rng);
    p.h510 *= factor(rng);
    p.k2 *= factor(rng);
    p.k2_bar *= factor(rng);
    p.h2 *= factor(rng);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Config;

    fn rates(k2_bar: f64) -> CoagParams {
        let mut r = Config::default().rates;
        r.k2_bar = k2_bar;
        r
    }

    #[test]
    fn exact_cubic_coefficients_at_reference_k2bar() {
        let q = stationary_cubic(&rates(2.5));
        assert!((q.a - 3.47480303256e-8).abs() < 1e-18);
        assert!((q.b + 4.85844347369e-5).abs() < 1e-15);
        assert!((q.c + 8.79295359516e-5).abs() < 1e-15);
        assert!((q.d - 2.2999982213).abs() < 1e-9);
    }

    #[test]
    fn printed_coefficients_match_the_display() {
        let q = polynomial_coeffs(&rates(2.5));
        assert!((q.a - 4.86472424558e-5).abs() < 1e-15);
        assert!((q.b + 0.0680182086316).abs() < 1e-12);
        assert!((q.c + 0.00163509226774).abs() < 1e-13);
        assert!((q.d - 3219.99999822).abs() < 1e-6);
        // d is k2_bar-free and sits within 2e-6 of h2 T0 = 3220.
        let q9 = polynomial_coeffs(&rates(9.0));
        assert_eq!(q.d, q9.d);
        assert!((q.d - 3220.0).abs() < 2e-6);
    }

    #[test]
    fn printed_and_exact_sets_agree_in_a_b_only_at_unit_h10() {
        let r = rates(2.5);
        let qe = stationary_cubic(&r);
        let qp = polynomial_coeffs(&r);
        assert!((qp.a - qe.a * r.t0).abs() < 1e-15 * qp.a.abs());
        assert!((qp.b - qe.b * r.t0).abs() < 1e-12 * qp.b.abs());
        assert!((qp.c - qe.c * r.t0).abs() > 0.1); // copy slips in c
        let mut r2 = r.clone();
        r2.h10 = 2.0;
        let qe2 = stationary_cubic(&r2);
        let qp2 = polynomial_coeffs(&r2);
        assert!((qp2.b - qe2.b * r2.t0).abs() > 1e-6 * qp2.b.abs());
    }

    #[test]
    fn zeroing_feedback_rates_kills_a_and_shrinks_b() {
        // k2_bar -> 0 and k10_bar -> 0 remove every a-term and two b-terms.
        let mut r = rates(1e-300);
        r.k10_bar = 1e-300;
        let q = polynomial_coeffs(&r);
        assert!(q.a < 1e-200);
        assert!(q.b.abs() < 1e-200);
    }

    #[test]
    fn synthetic_factored_cubic_roots() {
        // (T-1)(T-2)(T+3) = T^3 - 7T + 6
        let q = CubicCoeffs {
            a: 1.0,
            b: 0.0,
            c: -7.0,
            d: 6.0,
        };
        let pos = positive_roots(&q);
        assert_eq!(pos.len(), 2);
        assert!((pos[0].t - 1.0).abs() < 1e-12);
        assert!((pos[1].t - 2.0).abs() < 1e-12);
        assert!(!pos[0].degenerate && !pos[1].degenerate);
        let all = real_roots(&q);
        assert_eq!(all.len(), 3);
        assert!((all[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_fallback_when_a_is_zero() {
        let q = CubicCoeffs {
            a: 0.0,
            b: 1.0,
            c: -3.0,
            d: 2.0,
        };
        let pos = positive_roots(&q);
        assert_eq!(pos.len(), 2);
        assert!((pos[0].t - 1.0).abs() < 1e-12);
        assert!((pos[1].t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_roots_are_reproduced() {
        let q = stationary_cubic(&rates(2.5));
        let pos = positive_roots(&q);
        assert_eq!(pos.len(), 2);
        assert!((pos[0].t - 237.740042421448).abs() < 1e-6);
        assert!((pos[1].t - 1364.49592264325).abs() < 1e-6);
        let q13 = stationary_cubic(&rates(13.333));
        let pos13 = positive_roots(&q13);
        assert_eq!(pos13.len(), 2);
        assert!((pos13[0].t - 97.4347915320748).abs() < 1e-7);
        assert!((pos13[1].t - 1393.6112528673).abs() < 1e-6);
    }

    #[test]
    fn printed_cubic_roots_drift_from_exact_ones() {
        let pos = positive_roots(&polynomial_coeffs(&rates(2.5)));
        assert_eq!(pos.len(), 2);
        assert!((pos[0].t - 238.93668610882193).abs() < 1e-6);
        assert!((pos[1].t - 1362.5652186693503).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_components_and_residuals() {
        let r = rates(2.5);
        let state = equilibrium_from_t(&r, 1364.49592264325).unwrap();
        let expected = [
            1364.49592264325,
            748.271957579,
            0.0440159975046,
            3.00189102982,
            66.0666046628,
            0.0300189102982,
        ];
        for (got, want) in state.iter().zip(expected) {
            assert!(
                (got - want).abs() < 1e-8 * want.max(1e-3),
                "{got} vs {want}"
            );
        }
        let report = classify(&r).unwrap();
        for (i, root) in report.roots.iter().enumerate() {
            assert!(
                report.residuals[i] < 1e-8 * root.t.max(1.0),
                "residual {} at root {}",
                report.residuals[i],
                root.t
            );
        }
    }

    #[test]
    fn classification_and_stability_signs() {
        let report = classify(&rates(2.5)).unwrap();
        assert_eq!(report.classification, Classification::Bistable);
        assert!(report.rest_stable);
        assert!((report.p_primes[0] + 4.11217774481).abs() < 1e-6);
        assert!((report.p_primes[1] - 83.7968515246).abs() < 1e-5);
        assert_eq!(report.stable[0], Some(false));
        assert_eq!(report.stable[1], Some(true));
        assert!(report.principal_eigs[0] > 0.0);
        assert!(report.principal_eigs[1] < 0.0);
    }

    #[test]
    fn strong_inhibition_removes_positive_equilibria() {
        let mut r = rates(2.5);
        r.h2 *= 100.0;
        let report = classify(&r).unwrap();
        assert_eq!(report.classification, Classification::NoPositiveEquilibrium);
        assert!(report.rest_stable);
    }

    #[test]
    fn appendix_matrix_is_triangular_with_expected_diagonal() {
        let r = rates(2.5);
        let q = stationary_cubic(&r);
        let t2 = 1364.49592264325;
        let m = appendix_matrix(&r, &q, t2);
        for row in 0..6 {
            for col in (row + 1)..6 {
                assert_eq!(m[(row, col)], 0.0, "upper entry ({row},{col})");
            }
        }
        let diag = [-q.p_prime(t2), -r.h5, -r.h8, -r.h11, -r.h9, -r.h10];
        for (k, want) in diag.into_iter().enumerate() {
            assert!((m[(k, k)] - want).abs() < 1e-12 * want.abs().max(1.0));
        }
        let eig = principal_eigenvalue(&m);
        assert!((eig - diag.into_iter().fold(f64::NEG_INFINITY, f64::max)).abs() < 1e-9);
        assert!(eig < 0.0);
        let t1 = 237.740042421448;
        assert!(principal_eigenvalue(&appendix_matrix(&r, &q, t1)) > 0.0);
    }

    #[test]
    fn uniform_rate_scaling_preserves_roots_and_classification() {
        // Scaling every k and h (h2 included) by the same factor rescales
        // the whole polynomial, so roots and classification are invariant.
        let base = rates(2.5);
        let mut scaled = base.clone();
        let lam = 3.7;
        for f in [
            &mut scaled.k11,
            &mut scaled.h11,
            &mut scaled.k10,
            &mut scaled.k10_bar,
            &mut scaled.h10,
            &mut scaled.k9,
            &mut scaled.h9,
            &mut scaled.k89,
            &mut scaled.h89,
            &mut scaled.k8,
            &mut scaled.h8,
            &mut scaled.k5,
            &mut scaled.h5,
            &mut scaled.k510,
            &mut scaled.h510,
            &mut scaled.k2,
            &mut scaled.k2_bar,
            &mut scaled.h2,
        ] {
            *f *= lam;
        }
        let rb = classify(&base).unwrap();
        let rs = classify(&scaled).unwrap();
        assert_eq!(rb.classification, rs.classification);
        for (a, b) in rb.roots.iter().zip(&rs.roots) {
            assert!((a.t - b.t).abs() < 1e-7 * a.t);
        }
        let qb = stationary_cubic(&base);
        let qs = stationary_cubic(&scaled);
        assert!((qs.a / qb.a - lam).abs() < 1e-10);
        assert!((qs.d / qb.d - lam).abs() < 1e-10);
    }

    #[test]
    fn theorem1_verification_passes_on_perturbations() {
        let report = verify_theorem1(&rates(2.5), 20, 12345).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert_eq!(report.bistable_trials, 20);
        assert!(report.roots_checked >= 40);
    }
}
