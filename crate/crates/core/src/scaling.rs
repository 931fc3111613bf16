//! Critical-regime arithmetic between `ε`, `h_ε`, `η_ε` and `r`.
//!
//! Both media contribute at the same order to the limit pressure when
//! `h_ε ≈ λ η_ε^{(2r−1)/(r−1)} ε^{−r/(r−1)}`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `λ_est` band counted as critical.
pub const CRITICAL_BAND: (f64, f64) = (0.1, 10.0);

/// Default ratio by which `h` and `η` must exceed `ε` in generated sequences.
pub const DEFAULT_MIN_SEPARATION: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub epsilon: f64,
    pub h: f64,
    pub eta: f64,
    pub r: f64,
    pub lambda: f64,
}

impl ScalingRegime {
    /// Builds a regime from its three lengths, deriving `λ`.
    pub fn from_lengths(epsilon: f64, h: f64, eta: f64, r: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("h", h), ("eta", eta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Regime(format!("{name} must lie in (0, 1) (got {v})")));
            }
        }
        if !(epsilon < h && epsilon < eta) {
            return Err(Error::Regime(format!(
                "need ε < h and ε < η (got ε = {epsilon}, h = {h}, η = {eta})"
            )));
        }
        check_r(r)?;
        Ok(Self {
            epsilon,
            h,
            eta,
            r,
            lambda: lambda_estimate(epsilon, h, eta, r),
        })
    }

    pub fn classification(&self) -> RegimeClass {
        classify_lambda(self.lambda)
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Domain(format!("flow_index must exceed 1 (got {r})")));
    }
    Ok(())
}

/// `((2r−1)/(r−1), r/(r−1))`.
pub fn critical_exponents(r: f64) -> (f64, f64) {
    ((2.0 * r - 1.0) / (r - 1.0), r / (r - 1.0))
}

pub fn critical_exponents_exact(r: Ratio<i64>) -> Result<(Ratio<i64>, Ratio<i64>)> {
    let one = Ratio::from_integer(1);
    if r <= one {
        return Err(Error::Domain(format!("flow_index must exceed 1 (got {r})")));
    }
    let two = Ratio::from_integer(2);
    Ok(((two * r - one) / (r - one), r / (r - one)))
}

/// Exponent `s` with `η = ε^s` when `h ≡ 1` and `λ = 1`: `r/(2r−1)`.
pub fn unit_thickness_eta_exponent_exact(r: Ratio<i64>) -> Result<Ratio<i64>> {
    let (a, b) = critical_exponents_exact(r)?;
    // h = η^a ε^{−b} = 1  ⇒  η = ε^{b/a}
    Ok(b / a)
}

pub fn unit_thickness_eta_exponent(r: f64) -> f64 {
    r / (2.0 * r - 1.0)
}

/// Exact rational for `r` when one with a small denominator reproduces it.
pub fn rational_flow_index(r: f64) -> Option<Ratio<i64>> {
    let q = Ratio::<i64>::approximate_float(r)?;
    (*q.numer() as f64 / *q.denom() as f64 == r && *q.denom() <= 1_000_000).then_some(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalThickness {
    pub h: f64,
    /// Admissibility problems of the result (`h ≥ 1` or `h ≤ ε`).
    pub warnings: Vec<String>,
}

impl CriticalThickness {
    pub fn is_admissible(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// `h = λ η^{(2r−1)/(r−1)} ε^{−r/(r−1)}`.
pub fn critical_thickness(epsilon: f64, eta: f64, r: f64, lambda: f64) -> Result<CriticalThickness> {
    check_r(r)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be positive (got {lambda})")));
    }
    if !(epsilon > 0.0 && epsilon < eta && eta < 1.0) {
        return Err(Error::Regime(format!(
            "need 0 < ε < η < 1 (got ε = {epsilon}, η = {eta})"
        )));
    }
    let (a, b) = critical_exponents(r);
    let h = lambda * eta.powf(a) * epsilon.powf(-b);
    let mut warnings = Vec::new();
    if h >= 1.0 {
        warnings.push(format!("h = {h} is not below 1"));
    }
    if h <= epsilon {
        warnings.push(format!("h = {h} does not exceed ε = {epsilon}"));
    }
    Ok(CriticalThickness { h, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: RegimeClass,
    pub lambda_est: f64,
}

fn lambda_estimate(epsilon: f64, h: f64, eta: f64, r: f64) -> f64 {
    let (a, b) = critical_exponents(r);
    h / (eta.powf(a) * epsilon.powf(-b))
}

fn classify_lambda(lambda: f64) -> RegimeClass {
    if lambda < CRITICAL_BAND.0 {
        RegimeClass::Subcritical
    } else if lambda > CRITICAL_BAND.1 {
        RegimeClass::Supercritical
    } else {
        RegimeClass::Critical
    }
}

pub fn classify_regime(epsilon: f64, h: f64, eta: f64, r: f64) -> Result<Classification> {
    check_r(r)?;
    for (name, v) in [("epsilon", epsilon), ("h", h), ("eta", eta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Regime(format!("{name} must lie in (0, 1) (got {v})")));
        }
    }
    let lambda_est = lambda_estimate(epsilon, h, eta, r);
    Ok(Classification {
        class: classify_lambda(lambda_est),
        lambda_est,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub porous_velocity_in_eps: f64,
    pub porous_gradient_in_eps: f64,
    pub film_velocity_in_eta: f64,
    pub film_gradient_in_eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactExponentTable {
    pub porous_velocity_in_eps: Ratio<i64>,
    pub porous_gradient_in_eps: Ratio<i64>,
    pub film_velocity_in_eta: Ratio<i64>,
    pub film_gradient_in_eta: Ratio<i64>,
}

/// Exponents of the a-priori velocity bounds in the critical regime.
pub fn predicted_exponents(r: f64) -> Result<ExponentTable> {
    check_r(r)?;
    let v = r / (r - 1.0);
    let g = 1.0 / (r - 1.0);
    Ok(ExponentTable {
        porous_velocity_in_eps: v,
        porous_gradient_in_eps: g,
        film_velocity_in_eta: v,
        film_gradient_in_eta: g,
    })
}

pub fn predicted_exponents_exact(r: Ratio<i64>) -> Result<ExactExponentTable> {
    let one = Ratio::from_integer(1);
    if r <= one {
        return Err(Error::Domain(format!("flow_index must exceed 1 (got {r})")));
    }
    let v = r / (r - one);
    let g = one / (r - one);
    Ok(ExactExponentTable {
        porous_velocity_in_eps: v,
        porous_gradient_in_eps: g,
        film_velocity_in_eta: v,
        film_gradient_in_eta: g,
    })
}

/// Midpoint of the admissible `η = ε^s` exponent interval `(r/(2r−1), 1)`.
pub fn default_eta_exponent(r: f64) -> f64 {
    0.5 * (unit_thickness_eta_exponent(r) + 1.0)
}

/// Critical sequence along `η = ε^s`, keeping the entries with
/// `sep·ε ≤ h < 1` and `sep·ε ≤ η < 1`.
pub fn regime_sequence(
    r: f64,
    lambda: f64,
    epsilons: &[f64],
    eta_exponent: Option<f64>,
    min_separation: f64,
) -> Result<Vec<ScalingRegime>> {
    check_r(r)?;
    if epsilons.is_empty() {
        return Err(Error::Input("empty ε list".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Input("every ε must lie in (0, 1)".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Input("ε list must be strictly decreasing".into()));
    }
    if !(min_separation >= 1.0) {
        return Err(Error::Configuration(format!(
            "min_separation must be at least 1 (got {min_separation})"
        )));
    }
    let lo = unit_thickness_eta_exponent(r);
    let s = eta_exponent.unwrap_or_else(|| default_eta_exponent(r));
    if !(s > lo && s < 1.0) {
        return Err(Error::Configuration(format!(
            "η exponent s = {s} must lie in ({lo}, 1) so that ε < η and h < 1 can both hold"
        )));
    }
    let mut kept = Vec::new();
    let mut reasons = Vec::new();
    for &eps in epsilons {
        let eta = eps.powf(s);
        if eta < min_separation * eps {
            reasons.push(format!("ε = {eps}: η = {eta:.4} is within a factor {min_separation} of ε"));
            continue;
        }
        let ct = critical_thickness(eps, eta, r, lambda)?;
        if ct.h >= 1.0 {
            reasons.push(format!("ε = {eps}: h = {:.4} ≥ 1", ct.h));
            continue;
        }
        if ct.h < min_separation * eps {
            reasons.push(format!("ε = {eps}: h = {:.4} is within a factor {min_separation} of ε", ct.h));
            continue;
        }
        kept.push(ScalingRegime {
            epsilon: eps,
            h: ct.h,
            eta,
            r,
            lambda: lambda_estimate(eps, ct.h, eta, r),
        });
    }
    if kept.is_empty() {
        return Err(Error::Configuration(format!(
            "no admissible regime: {}",
            reasons.join("; ")
        )));
    }
    Ok(kept)
}
