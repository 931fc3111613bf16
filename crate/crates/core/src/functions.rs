//! Scalar functions on the interval ω = (−1/2, 1/2): forcing profiles `f₁`
//! and film thickness profiles `g`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFunction {
    Constant {
        value: f64,
    },
    /// `Σ c_k x^k`.
    Polynomial {
        coefficients: Vec<f64>,
    },
    /// `offset + amplitude · cos(π · wavenumber · x)`.
    Cosine {
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude · sin(π · wavenumber · x)`.
    Sine {
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Piecewise-linear interpolation of samples; constant beyond the end nodes.
    Sampled {
        nodes: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ScalarFunction {
    pub fn constant(value: f64) -> Self {
        ScalarFunction::Constant { value }
    }

    pub fn cosine(amplitude: f64, wavenumber: f64, offset: f64) -> Self {
        ScalarFunction::Cosine {
            amplitude,
            wavenumber,
            offset,
        }
    }

    pub fn sine(amplitude: f64, wavenumber: f64, offset: f64) -> Self {
        ScalarFunction::Sine {
            amplitude,
            wavenumber,
            offset,
        }
    }

    pub fn sampled(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = ScalarFunction::Sampled { nodes, values };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            ScalarFunction::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::Input("constant function value is not finite".into()));
                }
            }
            ScalarFunction::Polynomial { coefficients } => {
                if coefficients.is_empty() || !finite(coefficients) {
                    return Err(Error::Input(
                        "polynomial needs at least one finite coefficient".into(),
                    ));
                }
            }
            ScalarFunction::Cosine {
                amplitude,
                wavenumber,
                offset,
            }
            | ScalarFunction::Sine {
                amplitude,
                wavenumber,
                offset,
            } => {
                if !finite(&[*amplitude, *wavenumber, *offset]) {
                    return Err(Error::Input("trigonometric parameters must be finite".into()));
                }
            }
            ScalarFunction::Sampled { nodes, values } => {
                if nodes.len() < 2 || nodes.len() != values.len() {
                    return Err(Error::Input(format!(
                        "sampled function needs matching node/value arrays of length ≥ 2 (got {} and {})",
                        nodes.len(),
                        values.len()
                    )));
                }
                if !finite(nodes) || !finite(values) {
                    return Err(Error::Input("sampled function has non-finite entries".into()));
                }
                if nodes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Input(
                        "sampled function nodes must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Constant { value } => *value,
            ScalarFunction::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            ScalarFunction::Cosine {
                amplitude,
                wavenumber,
                offset,
            } => offset + amplitude * (PI * wavenumber * x).cos(),
            ScalarFunction::Sine {
                amplitude,
                wavenumber,
                offset,
            } => offset + amplitude * (PI * wavenumber * x).sin(),
            ScalarFunction::Sampled { nodes, values } => interpolate(nodes, values, x),
        }
    }

    /// Breakpoints where the function is only piecewise smooth.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            ScalarFunction::Sampled { nodes, .. } => nodes,
            _ => &[],
        }
    }

    /// Canonical text used for fingerprints and cache keys.
    pub fn describe(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

fn interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let last = nodes.len() - 1;
    if x <= nodes[0] {
        return values[0];
    }
    if x >= nodes[last] {
        return values[last];
    }
    let k = nodes.partition_point(|&n| n <= x).saturating_sub(1).min(last - 1);
    let t = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
    values[k] + t * (values[k + 1] - values[k])
}

/// Film thickness profile `g` with bounds `0 < a ≤ g ≤ b` on ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmProfile {
    g: ScalarFunction,
    lower: f64,
    upper: f64,
}

/// Number of probe points used to check closed-form profiles against their bounds.
const BOUND_PROBES: usize = 4097;

impl FilmProfile {
    pub fn new(g: ScalarFunction, lower: f64, upper: f64) -> Result<Self> {
        g.validate()?;
        if !(lower > 0.0) || !(upper >= lower) || !upper.is_finite() {
            return Err(Error::Domain(format!(
                "film bounds need 0 < a ≤ b (got a = {lower}, b = {upper})"
            )));
        }
        let tol = 1e-12 * upper;
        let check = |v: f64, at: f64| -> Result<()> {
            if v < lower - tol || v > upper + tol {
                Err(Error::Domain(format!(
                    "film profile value {v} at x = {at} lies outside [{lower}, {upper}]"
                )))
            } else {
                Ok(())
            }
        };
        match &g {
            ScalarFunction::Sampled { nodes, values } => {
                for (x, v) in nodes.iter().zip(values) {
                    check(*v, *x)?;
                }
            }
            other => {
                for k in 0..BOUND_PROBES {
                    let x = -0.5 + k as f64 / (BOUND_PROBES - 1) as f64;
                    check(other.eval(x), x)?;
                }
            }
        }
        Ok(Self { g, lower, upper })
    }

    /// `g ≡ c`.
    pub fn uniform(c: f64) -> Result<Self> {
        Self::new(ScalarFunction::constant(c), c, c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.g.eval(x)
    }

    pub fn function(&self) -> &ScalarFunction {
        &self.g
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Same shape with every value multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let g = match &self.g {
            ScalarFunction::Constant { value } => ScalarFunction::constant(value * factor),
            ScalarFunction::Polynomial { coefficients } => ScalarFunction::Polynomial {
                coefficients: coefficients.iter().map(|c| c * factor).collect(),
            },
            ScalarFunction::Cosine {
                amplitude,
                wavenumber,
                offset,
            } => ScalarFunction::cosine(amplitude * factor, *wavenumber, offset * factor),
            ScalarFunction::Sine {
                amplitude,
                wavenumber,
                offset,
            } => ScalarFunction::sine(amplitude * factor, *wavenumber, offset * factor),
            ScalarFunction::Sampled { nodes, values } => ScalarFunction::Sampled {
                nodes: nodes.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
        };
        Self::new(g, self.lower * factor, self.upper * factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let p = ScalarFunction::Polynomial {
            coefficients: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(p.eval(2.0), 17.0);
        let c = ScalarFunction::cosine(2.0, 1.0, 1.0);
        assert!((c.eval(0.0) - 3.0).abs() < 1e-15);
        assert!((c.eval(0.5) - 1.0).abs() < 1e-15);
        let s = ScalarFunction::sampled(vec![-0.5, 0.0, 0.5], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.eval(-0.25), 2.0);
        assert_eq!(s.eval(0.25), 2.5);
        assert_eq!(s.eval(-1.0), 1.0);
        assert_eq!(s.eval(0.0), 3.0);
    }

    #[test]
    fn sampled_validation() {
        assert!(ScalarFunction::sampled(vec![0.0], vec![1.0]).is_err());
        assert!(ScalarFunction::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ScalarFunction::sampled(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(ScalarFunction::sampled(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn film_bounds() {
        assert!(FilmProfile::uniform(1.0).is_ok());
        assert!(FilmProfile::uniform(0.0).is_err());
        let wavy = ScalarFunction::cosine(0.5, 2.0, 1.0);
        assert!(FilmProfile::new(wavy.clone(), 0.5, 1.5).is_ok());
        assert!(FilmProfile::new(wavy, 0.6, 1.5).is_err());
        let sampled = ScalarFunction::sampled(vec![-0.5, 0.5], vec![1.0, 2.5]).unwrap();
        assert!(FilmProfile::new(sampled, 1.0, 2.0).is_err());
    }

    #[test]
    fn serde_tagging() {
        let f: ScalarFunction =
            serde_json::from_str(r#"{"kind":"cosine","amplitude":1.0,"wavenumber":1.0}"#).unwrap();
        assert_eq!(f, ScalarFunction::cosine(1.0, 1.0, 0.0));
        assert!(serde_json::from_str::<ScalarFunction>(
            r#"{"kind":"constant","value":1.0,"extra":2}"#
        )
        .is_err());
    }
}
