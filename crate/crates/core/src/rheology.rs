//! Power-law constitutive algebra.
//!
//! A power-law fluid with flow index `r` and consistency `ν` has the
//! strain-dependent viscosity `ν |𝔻u|^{r-2}`. The scalar map
//! `A_p(x) = |x|^{p-2} x` and its tensor analogue appear in every solver of
//! the crate; `A_p` and `A_{p'}` are mutually inverse when `1/p + 1/p' = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strain-rate floor used by default for shear-thinning fluids.
pub const DEFAULT_SHEAR_THINNING_DELTA: f64 = 1e-8;

/// Symmetric 2×2 tensor stored as a full matrix.
pub type Tensor2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidModel {
    flow_index: f64,
    consistency: f64,
    regularization: f64,
}

impl FluidModel {
    pub fn new(flow_index: f64, consistency: f64, regularization: f64) -> Result<Self> {
        if !(flow_index > 1.0) || !flow_index.is_finite() {
            return Err(Error::Domain(format!(
                "flow_index must exceed 1 (got {flow_index})"
            )));
        }
        if !(consistency > 0.0) || !consistency.is_finite() {
            return Err(Error::Domain(format!(
                "consistency must be positive (got {consistency})"
            )));
        }
        if !(regularization >= 0.0) || !regularization.is_finite() {
            return Err(Error::Domain(format!(
                "regularization must be non-negative (got {regularization})"
            )));
        }
        Ok(Self {
            flow_index,
            consistency,
            regularization,
        })
    }

    /// Model with the default strain-rate floor: `1e-8` below `r = 2`, none otherwise.
    pub fn with_default_regularization(flow_index: f64, consistency: f64) -> Result<Self> {
        let delta = if flow_index < 2.0 {
            DEFAULT_SHEAR_THINNING_DELTA
        } else {
            0.0
        };
        Self::new(flow_index, consistency, delta)
    }

    pub fn flow_index(&self) -> f64 {
        self.flow_index
    }

    pub fn conjugate_index(&self) -> f64 {
        self.flow_index / (self.flow_index - 1.0)
    }

    pub fn consistency(&self) -> f64 {
        self.consistency
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn is_newtonian(&self) -> bool {
        self.flow_index == 2.0
    }

    /// Same fluid with a different consistency.
    pub fn with_consistency(&self, consistency: f64) -> Result<Self> {
        Self::new(self.flow_index, consistency, self.regularization)
    }

    pub fn with_regularization(&self, regularization: f64) -> Result<Self> {
        Self::new(self.flow_index, self.consistency, regularization)
    }

    /// Regularized viscosity `ν (δ² + d2)^{(r-2)/2}` for a squared strain-rate norm `d2`.
    pub fn viscosity(&self, d2: f64) -> Result<f64> {
        regularized_viscosity(d2, self)
    }

    /// Unchecked viscosity for solver inner loops; callers guarantee `d2 ≥ 0`
    /// and a non-singular configuration.
    #[inline]
    pub(crate) fn viscosity_unchecked(&self, d2: f64) -> f64 {
        let r = self.flow_index;
        if r == 2.0 {
            return self.consistency;
        }
        let s = self.regularization * self.regularization + d2;
        self.consistency * s.powf(0.5 * (r - 2.0))
    }

    /// Rejects configurations whose viscosity blows up at zero strain.
    pub fn check_nonsingular(&self) -> Result<()> {
        if self.flow_index < 2.0 && self.regularization == 0.0 {
            return Err(Error::Configuration(format!(
                "shear-thinning flow index {} needs a positive regularization",
                self.flow_index
            )));
        }
        Ok(())
    }
}

pub fn conjugate_exponent(r: f64) -> Result<f64> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "conjugate exponent needs r > 1 (got {r})"
        )));
    }
    Ok(r / (r - 1.0))
}

/// `|x|^{p-2} x`, evaluated as `sign(x) |x|^{p-1}` so that `x = 0` maps to 0
/// for every `p > 1`.
#[inline]
pub fn power_map(x: f64, p: f64) -> f64 {
    debug_assert!(p > 1.0, "power_map needs p > 1");
    if p == 2.0 {
        return x;
    }
    if x == 0.0 {
        return 0.0;
    }
    x.signum() * x.abs().powf(p - 1.0)
}

/// Full-contraction norm `(Σ ξ_ij²)^{1/2}`.
pub fn frobenius_norm(xi: &Tensor2) -> f64 {
    (xi[0][0] * xi[0][0] + xi[0][1] * xi[0][1] + xi[1][0] * xi[1][0] + xi[1][1] * xi[1][1]).sqrt()
}

/// `|ξ|^{r-2} ξ` with the Frobenius norm; the zero tensor is a fixed point.
pub fn tensor_power_map(xi: &Tensor2, r: f64) -> Result<Tensor2> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("tensor_power_map needs r > 1 (got {r})")));
    }
    let scale = xi.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if (xi[0][1] - xi[1][0]).abs() > 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "tensor is not symmetric: off-diagonal entries {} and {}",
            xi[0][1], xi[1][0]
        )));
    }
    if r == 2.0 {
        return Ok(*xi);
    }
    let norm = frobenius_norm(xi);
    if norm == 0.0 {
        return Ok([[0.0; 2]; 2]);
    }
    let factor = norm.powf(r - 2.0);
    Ok([
        [factor * xi[0][0], factor * xi[0][1]],
        [factor * xi[1][0], factor * xi[1][1]],
    ])
}

pub fn regularized_viscosity(d2: f64, model: &FluidModel) -> Result<f64> {
    if !(d2 >= 0.0) {
        return Err(Error::Domain(format!(
            "squared strain-rate norm must be non-negative (got {d2})"
        )));
    }
    let r = model.flow_index;
    let delta = model.regularization;
    if delta == 0.0 && d2 == 0.0 && r < 2.0 {
        return Err(Error::Configuration(
            "singular viscosity: zero strain with r < 2 and no regularization".into(),
        ));
    }
    Ok(model.viscosity_unchecked(d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert_eq!(conjugate_exponent(3.0).unwrap(), 1.5);
        assert_eq!(conjugate_exponent(1.5).unwrap(), 3.0);
        assert!(matches!(conjugate_exponent(1.0), Err(Error::Domain(_))));
        assert!(matches!(conjugate_exponent(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn conjugate_reciprocal_sum() {
        for r in [1.01, 1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 10.0, 100.0] {
            let rc = conjugate_exponent(r).unwrap();
            assert!((1.0 / r + 1.0 / rc - 1.0).abs() < 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn power_map_examples() {
        assert_eq!(power_map(-3.0, 2.0), -3.0);
        assert_eq!(power_map(2.0, 3.0), 4.0);
        assert!((power_map(4.0, 1.5) - 2.0).abs() < 1e-15);
        for p in [1.1, 1.5, 2.0, 3.0] {
            assert_eq!(power_map(0.0, p), 0.0);
        }
    }

    #[test]
    fn tensor_examples() {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(tensor_power_map(&id, 2.0).unwrap(), id);
        let zero = [[0.0; 2]; 2];
        assert_eq!(tensor_power_map(&zero, 1.5).unwrap(), zero);
        let d = [[3.0, 0.0], [0.0, 4.0]];
        let out = tensor_power_map(&d, 3.0).unwrap();
        assert!((out[0][0] - 15.0).abs() < 1e-12);
        assert!((out[1][1] - 20.0).abs() < 1e-12);
        assert_eq!(out[0][1], 0.0);
        let skew = [[1.0, 2.0], [0.5, 1.0]];
        assert!(matches!(
            tensor_power_map(&skew, 3.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn viscosity_examples() {
        let newtonian = FluidModel::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(regularized_viscosity(4.0, &newtonian).unwrap(), 1.0);
        let thick = FluidModel::new(3.0, 1.0, 0.0).unwrap();
        assert!((regularized_viscosity(4.0, &thick).unwrap() - 2.0).abs() < 1e-15);
        let thin = FluidModel::new(1.5, 1.0, 1e-8).unwrap();
        let v = regularized_viscosity(0.0, &thin).unwrap();
        assert!((v - 1e4).abs() < 1e-8);
        let singular = FluidModel::new(1.5, 1.0, 0.0).unwrap();
        assert!(matches!(
            regularized_viscosity(0.0, &singular),
            Err(Error::Configuration(_))
        ));
        assert!(regularized_viscosity(-1.0, &thick).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(FluidModel::new(1.0, 1.0, 0.0).is_err());
        assert!(FluidModel::new(0.9, 1.0, 0.0).is_err());
        assert!(FluidModel::new(2.0, 0.0, 0.0).is_err());
        assert!(FluidModel::new(2.0, 1.0, -1.0).is_err());
        let m = FluidModel::with_default_regularization(1.5, 2.0).unwrap();
        assert_eq!(m.regularization(), DEFAULT_SHEAR_THINNING_DELTA);
        let m = FluidModel::with_default_regularization(3.0, 2.0).unwrap();
        assert_eq!(m.regularization(), 0.0);
        assert!((m.conjugate_index() - 1.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn inverse_pair(x in -1e3f64..1e3, idx in 0usize..5) {
            let r = [1.2, 1.5, 2.0, 3.0, 4.0][idx];
            let rc = conjugate_exponent(r).unwrap();
            let back = power_map(power_map(x, r), rc);
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1e-300));
        }

        #[test]
        fn strict_monotonicity(u in -1e3f64..1e3, v in -1e3f64..1e3, p in 1.05f64..6.0) {
            prop_assume!(u != v);
            prop_assert!((power_map(u, p) - power_map(v, p)) * (u - v) > 0.0);
        }

        #[test]
        fn homogeneity(c in -50f64..50.0, x in -50f64..50.0, p in 1.1f64..5.0) {
            let lhs = power_map(c * x, p);
            let rhs = power_map(c, p) * power_map(x, p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-300));
        }

        #[test]
        fn newtonian_tensor_identity(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3) {
            let xi = [[a, b], [b, c]];
            prop_assert_eq!(tensor_power_map(&xi, 2.0).unwrap(), xi);
        }
    }
}
