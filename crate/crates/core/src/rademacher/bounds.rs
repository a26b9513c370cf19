//! Closed-form bounds on (block) Rademacher complexities and deviations.
//!
//! `M` and `K` are universal constants left unspecified by the theory; they
//! are inputs, never defaults.

use serde::{Deserialize, Serialize};

use crate::classes::admissible_c;
use crate::error::{Error, Result};

/// Inputs shared by the bound calculators. Each calculator reads only the
/// fields it needs and rejects nonpositive values among them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Envelope `U`.
    pub u: f64,
    /// `sigma` for i.i.d. bounds, `sigma'` for block bounds.
    pub sigma: f64,
    /// VC constant `C`.
    pub c: f64,
    /// VC exponent `v`.
    pub v: f64,
    /// Sample size or number of blocks.
    pub n: f64,
    /// Truncation level `L`.
    pub l: f64,
    /// Moment order `p` of the polynomial-moment regime.
    pub p: f64,
    /// `E_A[tau_A^p]`.
    pub e_tau_p: f64,
    /// Exponent `lambda` of the exponential-moment regime.
    pub lambda: f64,
    /// `C_lambda = 2 E_A[exp(lambda tau_A)] / lambda`.
    pub c_lambda: f64,
    pub m_const: f64,
    pub k_const: f64,
    /// `E_A[tau_A]`.
    pub e_tau_1: f64,
    /// `E_A[tau_A^2]`.
    pub e_tau_2: f64,
    /// `E_nu[tau_A]`.
    pub e_nu_tau: f64,
    /// `sup_f |E_pi f|`.
    pub sup_pi_f: f64,
    /// Tail parameter `tau` of the concentration bound.
    pub tau_param: f64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!("{name} must be positive and finite, got {x}")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!("{name} must be nonnegative and finite, got {x}")))
    }
}

impl BoundInputs {
    /// Checks `v >= 1` and `C >= (3 sqrt(e))^v`.
    pub fn check_vc(&self) -> Result<()> {
        if !(self.v >= 1.0) {
            return Err(Error::Hypothesis(format!("VC exponent v = {} must be at least 1", self.v)));
        }
        if !(self.c >= admissible_c(self.v) * (1.0 - 1e-12)) {
            return Err(Error::Hypothesis(format!(
                "VC constant C = {} is below (3 sqrt(e))^v = {}",
                self.c,
                admissible_c(self.v)
            )));
        }
        Ok(())
    }

    fn check_entropy(&self) -> Result<()> {
        positive("C", self.c)?;
        positive("v", self.v)?;
        positive("U", self.u)?;
        positive("M", self.m_const)?;
        nonnegative("n", self.n)
    }
}

/// `v U log(C U / sigma) + sqrt(v n sigma^2 log(C U / sigma))` with `U` replaced by `scale`.
fn entropy_term(v: f64, c: f64, scale: f64, sigma: f64, n: f64) -> f64 {
    let log = (c * scale / sigma).ln().max(0.0);
    v * scale * log + (v * n * sigma * sigma * log).sqrt()
}

/// `M [v U log(C U / sigma) + sqrt(v n sigma^2 log(C U / sigma))]`, valid for `0 < sigma <= U`.
pub fn bound_theorem1(x: &BoundInputs) -> Result<f64> {
    x.check_entropy()?;
    if !(x.sigma > 0.0 && x.sigma <= x.u) {
        return Err(Error::Hypothesis(format!(
            "the i.i.d. bound requires 0 < sigma <= U, got sigma = {}, U = {}",
            x.sigma, x.u
        )));
    }
    Ok(x.m_const * entropy_term(x.v, x.c, x.u, x.sigma, x.n))
}

/// Main term `v L U log(C L U / sigma') + sqrt(v n sigma'^2 log(C L U / sigma'))` (without `M`).
pub fn theorem2_main_term(x: &BoundInputs, l: f64) -> Result<f64> {
    x.check_entropy()?;
    positive("L", l)?;
    if !(x.sigma > 0.0 && x.sigma <= l * x.u) {
        return Err(Error::Hypothesis(format!(
            "the block bound requires 0 < sigma' <= L U, got sigma' = {}, L U = {}",
            x.sigma,
            l * x.u
        )));
    }
    Ok(entropy_term(x.v, x.c, l * x.u, x.sigma, x.n))
}

/// Which moment condition on the regeneration time is assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `E_A[tau^p] < inf` for some `p > 1`.
    Polynomial,
    /// `E_A[exp(lambda tau)] < inf` for some `lambda > 0`.
    Exponential,
}

/// `n E_A[tau^p] / L^(p - 1)`.
pub fn theorem2_pm_remainder(x: &BoundInputs, l: f64) -> Result<f64> {
    if !(x.p > 1.0) {
        return Err(Error::Hypothesis(format!("the polynomial-moment bound requires p > 1, got {}", x.p)));
    }
    positive("E_A[tau^p]", x.e_tau_p)?;
    positive("L", l)?;
    nonnegative("n", x.n)?;
    Ok(x.n * x.e_tau_p / l.powf(x.p - 1.0))
}

/// `n U exp(-L lambda / 2) C_lambda`.
pub fn theorem2_em_remainder(x: &BoundInputs, l: f64) -> Result<f64> {
    positive("lambda", x.lambda)?;
    positive("C_lambda", x.c_lambda)?;
    positive("U", x.u)?;
    positive("L", l)?;
    nonnegative("n", x.n)?;
    Ok(x.n * x.u * (-l * x.lambda / 2.0).exp() * x.c_lambda)
}

/// `C_lambda = 2 E_A[exp(lambda tau)] / lambda`.
pub fn c_lambda(mgf: f64, lambda: f64) -> f64 {
    2.0 * mgf / lambda
}

pub fn theorem2_remainder(x: &BoundInputs, l: f64, regime: Regime) -> Result<f64> {
    match regime {
        Regime::Polynomial => theorem2_pm_remainder(x, l),
        Regime::Exponential => theorem2_em_remainder(x, l),
    }
}

pub fn bound_theorem2(x: &BoundInputs, regime: Regime) -> Result<f64> {
    Ok(x.m_const * theorem2_main_term(x, x.l)? + theorem2_remainder(x, x.l, regime)?)
}

/// Block bound under polynomial moments, at `L = x.l`.
pub fn bound_theorem2_pm(x: &BoundInputs) -> Result<f64> {
    bound_theorem2(x, Regime::Polynomial)
}

/// Block bound under exponential moments, at `L = x.l`.
pub fn bound_theorem2_em(x: &BoundInputs) -> Result<f64> {
    bound_theorem2(x, Regime::Exponential)
}

/// Grid of truncation levels `2^0, ..., 2^30`.
pub fn l_grid() -> impl Iterator<Item = f64> {
    (0..=30).map(|k| 2f64.powi(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LOptimum {
    pub l: f64,
    pub bound: f64,
}

/// Minimizes the block bound over the feasible part (`sigma' <= L U`) of [`l_grid`].
pub fn optimize_l(x: &BoundInputs, regime: Regime) -> Result<LOptimum> {
    let mut best: Option<LOptimum> = None;
    for l in l_grid() {
        if x.sigma > l * x.u {
            continue;
        }
        let bound = x.m_const * theorem2_main_term(x, l)? + theorem2_remainder(x, l, regime)?;
        if best.is_none_or(|b| bound < b.bound) {
            best = Some(LOptimum { l, bound });
        }
    }
    best.ok_or_else(|| Error::Hypothesis(format!("sigma' = {} exceeds L U for every L on the grid", x.sigma)))
}

/// `4 R_{n,B} + 4 sup_f |E_pi f| sqrt(n E_A[tau^2]) + 2 U (E_nu[tau] + E_A[tau])`.
pub fn bound_theorem3(x: &BoundInputs, r_nb: f64) -> Result<f64> {
    nonnegative("R_{n,B}", r_nb)?;
    nonnegative("sup |E_pi f|", x.sup_pi_f)?;
    nonnegative("n", x.n)?;
    nonnegative("E_A[tau^2]", x.e_tau_2)?;
    nonnegative("U", x.u)?;
    nonnegative("E_nu[tau]", x.e_nu_tau)?;
    nonnegative("E_A[tau]", x.e_tau_1)?;
    Ok(4.0 * r_nb + 4.0 * x.sup_pi_f * (x.n * x.e_tau_2).sqrt() + 2.0 * x.u * (x.e_nu_tau + x.e_tau_1))
}

fn check_theorem4(x: &BoundInputs, r_n: f64) -> Result<()> {
    positive("K", x.k_const)?;
    positive("E_A[tau]", x.e_tau_1)?;
    positive("sigma'", x.sigma)?;
    positive("tau", x.tau_param)?;
    positive("U", x.u)?;
    nonnegative("R_n", r_n)?;
    if !(x.n > 1.0) {
        return Err(Error::Hypothesis(format!("the deviation bound needs n > 1, got {}", x.n)));
    }
    Ok(())
}

/// `K exp[-(E_A tau / K) min((t - K R)^2 / (n sigma'^2), (t - K R) / (tau^3 U log n))]`,
/// valid for `t >= 1 + K R`. The value may exceed 1.
pub fn bound_theorem4_probability(t: f64, x: &BoundInputs, r_n: f64) -> Result<f64> {
    check_theorem4(x, r_n)?;
    let k = x.k_const;
    if !(t >= 1.0 + k * r_n) {
        return Err(Error::Hypothesis(format!(
            "the deviation bound holds for t >= 1 + K R_n = {}, got t = {t}",
            1.0 + k * r_n
        )));
    }
    let a = t - k * r_n;
    let gaussian = a * a / (x.n * x.sigma * x.sigma);
    let linear = a / (x.tau_param.powi(3) * x.u * x.n.ln());
    Ok(k * (-(x.e_tau_1 / k) * gaussian.min(linear)).exp())
}

/// Smallest `t >= 1 + K R` at which [`bound_theorem4_probability`] is at most `delta`.
pub fn theorem4_threshold(x: &BoundInputs, r_n: f64, delta: f64) -> Result<f64> {
    check_theorem4(x, r_n)?;
    if !(delta > 0.0 && delta < x.k_const) {
        return Err(Error::Hypothesis(format!("need 0 < delta < K, got delta = {delta}")));
    }
    let s = x.k_const * (x.k_const / delta).ln() / x.e_tau_1;
    let a = (s * x.n * x.sigma * x.sigma).sqrt().max(s * x.tau_param.powi(3) * x.u * x.n.ln());
    Ok((x.k_const * r_n + a).max(1.0 + x.k_const * r_n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn base() -> BoundInputs {
        BoundInputs { u: 1.0, sigma: 1.0, c: E, v: 1.0, n: 100.0, m_const: 1.0, ..Default::default() }
    }

    #[test]
    fn iid_bound_hand_value() {
        assert!((bound_theorem1(&base()).unwrap() - 11.0).abs() < 1e-12);
        let err = bound_theorem1(&BoundInputs { sigma: 2.0, ..base() }).unwrap_err();
        assert!(err.to_string().contains("sigma <= U"));
        assert!(base().check_vc().is_err());
    }

    #[test]
    fn doubling_n_scales_only_the_root_term() {
        let x = base();
        let b1 = bound_theorem1(&x).unwrap();
        let b2 = bound_theorem1(&BoundInputs { n: 200.0, ..x }).unwrap();
        assert!((b2 - 1.0 - 10.0 * 2f64.sqrt()).abs() < 1e-12 && (b1 - 11.0).abs() < 1e-12);
    }

    #[test]
    fn remainders_hand_values() {
        let x = BoundInputs { p: 2.0, e_tau_p: 4.0, n: 100.0, ..Default::default() };
        assert!((theorem2_pm_remainder(&x, 10.0).unwrap() - 40.0).abs() < 1e-12);
        let cl = c_lambda(E * E, 2.0);
        assert!((cl - E * E).abs() < 1e-12);
        let x = BoundInputs { u: 1.0, lambda: 2.0, c_lambda: cl, n: 10.0, ..Default::default() };
        assert!((theorem2_em_remainder(&x, 2.0).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn block_bound_checks_sigma_against_l_u() {
        let x = BoundInputs { sigma: 3.0, l: 2.0, p: 2.0, e_tau_p: 1.0, c: 100.0, ..base() };
        assert!(bound_theorem2_pm(&x).unwrap_err().to_string().contains("sigma' <= L U"));
        assert!(bound_theorem2_pm(&BoundInputs { l: 4.0, ..x }).is_ok());
    }

    #[test]
    fn optimizer_finds_interior_minimum() {
        let x = BoundInputs { sigma: 2.0, c: 100.0, n: 1e4, p: 2.0, e_tau_p: 10.0, ..base() };
        let opt = optimize_l(&x, Regime::Polynomial).unwrap();
        let at = |l: f64| x.m_const * theorem2_main_term(&x, l).unwrap() + theorem2_pm_remainder(&x, l).unwrap();
        assert!(opt.l > 2.0 && opt.l < 2f64.powi(30));
        assert!(at(2.0) > opt.bound && at(2f64.powi(30)) > opt.bound);
    }

    #[test]
    fn expectation_bound_hand_values() {
        let x = BoundInputs { u: 1.0, e_tau_1: 1.0, e_tau_2: 1.0, e_nu_tau: 1.0, n: 4.0, ..Default::default() };
        assert!((bound_theorem3(&x, 2.5).unwrap() - 14.0).abs() < 1e-12);
        let x = BoundInputs { sup_pi_f: 1.0, ..x };
        assert!((bound_theorem3(&x, 0.0).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn deviation_bound_hand_value() {
        let x =
            BoundInputs { k_const: 1.0, e_tau_1: 1.0, n: E, sigma: 1.0, tau_param: 1.0, u: 1.0, ..Default::default() };
        let b = bound_theorem4_probability(1.0, &x, 0.0).unwrap();
        assert!((b - (-1.0 / E).exp()).abs() < 1e-12);
        assert!(bound_theorem4_probability(0.5, &x, 0.0).unwrap_err().to_string().contains("t >= 1 + K R_n"));
    }

    #[test]
    fn threshold_inverts_the_gaussian_branch() {
        let x = BoundInputs {
            k_const: 2.0,
            e_tau_1: 3.0,
            n: 1e4,
            sigma: 1.5,
            tau_param: 1.0,
            u: 1.0,
            ..Default::default()
        };
        let (r, delta) = (4.0, 0.05);
        let t = theorem4_threshold(&x, r, delta).unwrap();
        let gaussian = x.k_const * r
            + (x.n * x.sigma * x.sigma).sqrt() * (x.k_const * (x.k_const / delta).ln() / x.e_tau_1).sqrt();
        assert!((t - gaussian).abs() < 1e-9 * t);
        assert!((bound_theorem4_probability(t, &x, r).unwrap() - delta).abs() < 1e-12);
    }
}
