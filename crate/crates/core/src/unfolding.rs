//! Discrete unfolding of fields on the rescaled porous band.
//!
//! The band `ω × (0, 1)` is cut into blocks of width `ε` and height `ε/h`.
//! Inside block `k` the local coordinate is `y₁ = (z₁ − c₁)/ε`,
//! `y₂ = h(z₂ − c₂)/ε` with `c` the block center, so `y ∈ (−½, ½)²`.
//! Unfolded norms integrate over `(z, y)`, each block carrying its
//! `z`-measure `ε²/h`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellField, Coordinates, Medium};

const ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedField {
    pub epsilon: f64,
    pub h: f64,
    /// Blocks along `z₁` and `z₂`.
    pub blocks: [usize; 2],
    /// Samples per block along `y₁` and `y₂`.
    pub local: [usize; 2],
    /// Lower-left corner of the source grid.
    pub origin: [f64; 2],
    /// `values[((k₂·K₁ + k₁)·m₂ + a₂)·m₁ + a₁]`.
    pub values: Vec<f64>,
    pub fluid: Vec<bool>,
    source: SourceMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SourceMeta {
    medium: Medium,
    coordinates: Coordinates,
    z1: Vec<f64>,
    z2: Vec<f64>,
    dz1: f64,
    dz2: f64,
}

fn subdivisions(length: f64, step: f64, what: &str) -> Result<usize> {
    let m = (length / step).round();
    if m < 1.0 || (m * step - length).abs() > ALIGN_TOL * length {
        return Err(Error::Alignment(format!(
            "{what} block length {length} is not an integer multiple of the grid step {step}"
        )));
    }
    Ok(m as usize)
}

impl UnfoldedField {
    #[inline]
    pub fn index(&self, k1: usize, k2: usize, a1: usize, a2: usize) -> usize {
        let [kk1, _] = self.blocks;
        let [m1, m2] = self.local;
        ((k2 * kk1 + k1) * m2 + a2) * m1 + a1
    }

    #[inline]
    pub fn value(&self, k1: usize, k2: usize, a1: usize, a2: usize) -> f64 {
        self.values[self.index(k1, k2, a1, a2)]
    }

    /// `z`-measure of one block, `ε²/h`.
    pub fn block_measure(&self) -> f64 {
        self.epsilon * self.epsilon / self.h
    }

    pub fn block_center(&self, k1: usize, k2: usize) -> [f64; 2] {
        [
            self.origin[0] + self.epsilon * (k1 as f64 + 0.5),
            self.origin[1] + self.epsilon / self.h * (k2 as f64 + 0.5),
        ]
    }

    /// Local sample coordinate in `(−½, ½)²`.
    pub fn local_coordinate(&self, a1: usize, a2: usize) -> [f64; 2] {
        let [m1, m2] = self.local;
        [
            (a1 as f64 + 0.5) / m1 as f64 - 0.5,
            (a2 as f64 + 0.5) / m2 as f64 - 0.5,
        ]
    }

    pub fn dy(&self) -> [f64; 2] {
        [1.0 / self.local[0] as f64, 1.0 / self.local[1] as f64]
    }

    fn block_len(&self) -> usize {
        self.local[0] * self.local[1]
    }
}

/// Re-indexes a reference-coordinate porous field into blocks.
pub fn unfold(field: &CellField, epsilon: f64, h: f64) -> Result<UnfoldedField> {
    if field.coordinates != Coordinates::Reference {
        return Err(Error::Contract(
            "unfolding acts on fields in reference coordinates".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 && h > 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < ε < 1 and h > 0 (got ε = {epsilon}, h = {h})"
        )));
    }
    let m1 = subdivisions(epsilon, field.dz1, "horizontal")?;
    let m2 = subdivisions(epsilon / h, field.dz2, "vertical")?;
    if field.n1 % m1 != 0 || field.n2 % m2 != 0 {
        return Err(Error::Alignment(format!(
            "a {}×{} grid does not split into {m1}×{m2} blocks",
            field.n1, field.n2
        )));
    }
    let kk1 = field.n1 / m1;
    let kk2 = field.n2 / m2;
    let n = field.values.len();
    let mut values = vec![0.0; n];
    let mut fluid = vec![false; n];
    for j in 0..field.n2 {
        let (k2, a2) = (j / m2, j % m2);
        for i in 0..field.n1 {
            let (k1, a1) = (i / m1, i % m1);
            let dst = ((k2 * kk1 + k1) * m2 + a2) * m1 + a1;
            values[dst] = field.value(i, j);
            fluid[dst] = field.is_fluid(i, j);
        }
    }
    Ok(UnfoldedField {
        epsilon,
        h,
        blocks: [kk1, kk2],
        local: [m1, m2],
        origin: [
            field.z1[0] - 0.5 * field.dz1,
            field.z2[0] - 0.5 * field.dz2,
        ],
        values,
        fluid,
        source: SourceMeta {
            medium: field.medium,
            coordinates: field.coordinates,
            z1: field.z1.clone(),
            z2: field.z2.clone(),
            dz1: field.dz1,
            dz2: field.dz2,
        },
    })
}

/// Inverse of [`unfold`].
pub fn refold(unfolded: &UnfoldedField) -> CellField {
    let [kk1, kk2] = unfolded.blocks;
    let [m1, m2] = unfolded.local;
    let n1 = kk1 * m1;
    let n2 = kk2 * m2;
    let mut values = vec![0.0; n1 * n2];
    let mut fluid = vec![false; n1 * n2];
    for k2 in 0..kk2 {
        for k1 in 0..kk1 {
            for a2 in 0..m2 {
                for a1 in 0..m1 {
                    let src = unfolded.index(k1, k2, a1, a2);
                    let dst = (k2 * m2 + a2) * n1 + k1 * m1 + a1;
                    values[dst] = unfolded.values[src];
                    fluid[dst] = unfolded.fluid[src];
                }
            }
        }
    }
    let s = &unfolded.source;
    CellField {
        medium: s.medium,
        coordinates: s.coordinates,
        n1,
        n2,
        z1: s.z1.clone(),
        z2: s.z2.clone(),
        dz1: s.dz1,
        dz2: s.dz2,
        values,
        fluid,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub s: f64,
    pub epsilon: f64,
    pub h: f64,
    pub source_norm: f64,
    pub source_dz1_norm: f64,
    pub source_dz2_norm: f64,
    pub unfolded_norm: f64,
    pub unfolded_dy1_norm: f64,
    pub unfolded_dy2_norm: f64,
    /// `‖φ̂‖ / ‖φ̃‖`.
    pub value_norm_ratio: f64,
    /// `‖∂_{y₁}φ̂‖ / (ε‖∂_{z₁}φ̃‖)`.
    pub dy1_ratio: f64,
    /// `‖∂_{y₂}φ̂‖ / ((ε/h)‖∂_{z₂}φ̃‖)`.
    pub dy2_ratio: f64,
}

impl NormReport {
    pub fn max_deviation(&self) -> f64 {
        [self.value_norm_ratio, self.dy1_ratio, self.dy2_ratio]
            .iter()
            .map(|r| (r - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Source-side norms by direct loops over the grid, with forward differences
/// that never cross a block edge.
fn source_norms(field: &CellField, s: f64, m: [usize; 2]) -> [f64; 3] {
    let w = field.dz1 * field.dz2;
    let (mut n0, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for j in 0..field.n2 {
        for i in 0..field.n1 {
            if !field.is_fluid(i, j) {
                continue;
            }
            let v = field.value(i, j);
            n0 += v.abs().powf(s) * w;
            if (i + 1) % m[0] != 0 && field.is_fluid(i + 1, j) {
                let d = (field.value(i + 1, j) - v) / field.dz1;
                n1 += d.abs().powf(s) * w;
            }
            if (j + 1) % m[1] != 0 && field.is_fluid(i, j + 1) {
                let d = (field.value(i, j + 1) - v) / field.dz2;
                n2 += d.abs().powf(s) * w;
            }
        }
    }
    [n0, n1, n2].map(|x| x.powf(1.0 / s))
}

/// Unfolded norms over `(z, y)`, accumulated per block.
fn unfolded_norms(u: &UnfoldedField, s: f64) -> [f64; 3] {
    let [m1, m2] = u.local;
    let [dy1, dy2] = u.dy();
    let w = u.block_measure() * dy1 * dy2;
    let per_block: Vec<[f64; 3]> = u
        .values
        .par_chunks(u.block_len())
        .zip(u.fluid.par_chunks(u.block_len()))
        .map(|(vals, fl)| {
            let mut acc = [0.0; 3];
            for a2 in 0..m2 {
                for a1 in 0..m1 {
                    let p = a2 * m1 + a1;
                    if !fl[p] {
                        continue;
                    }
                    acc[0] += vals[p].abs().powf(s);
                    if a1 + 1 < m1 && fl[p + 1] {
                        acc[1] += ((vals[p + 1] - vals[p]) / dy1).abs().powf(s);
                    }
                    if a2 + 1 < m2 && fl[p + m1] {
                        acc[2] += ((vals[p + m1] - vals[p]) / dy2).abs().powf(s);
                    }
                }
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 3];
    for b in per_block {
        for c in 0..3 {
            tot[c] += b[c];
        }
    }
    tot.map(|x| (x * w).powf(1.0 / s))
}

pub fn verify_norm_identities(field: &CellField, s: f64, epsilon: f64, h: f64) -> Result<NormReport> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("exponent s must be at least 1 (got {s})")));
    }
    let u = unfold(field, epsilon, h)?;
    let src = source_norms(field, s, u.local);
    let unf = unfolded_norms(&u, s);
    Ok(NormReport {
        s,
        epsilon,
        h,
        source_norm: src[0],
        source_dz1_norm: src[1],
        source_dz2_norm: src[2],
        unfolded_norm: unf[0],
        unfolded_dy1_norm: unf[1],
        unfolded_dy2_norm: unf[2],
        value_norm_ratio: ratio(unf[0], src[0]),
        dy1_ratio: ratio(unf[1], epsilon * src[1]),
        dy2_ratio: ratio(unf[2], epsilon / h * src[2]),
    })
}

/// Block-wise `∫_{Y_f} v̂ dy` on the macro grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroField {
    pub blocks: [usize; 2],
    pub centers1: Vec<f64>,
    pub centers2: Vec<f64>,
    /// `values[k₂·K₁ + k₁]`.
    pub values: Vec<f64>,
}

pub fn cell_average(u: &UnfoldedField) -> MacroField {
    let [dy1, dy2] = u.dy();
    let values: Vec<f64> = u
        .values
        .par_chunks(u.block_len())
        .zip(u.fluid.par_chunks(u.block_len()))
        .map(|(vals, fl)| {
            vals.iter()
                .zip(fl)
                .filter(|(_, f)| **f)
                .map(|(v, _)| v)
                .sum::<f64>()
                * dy1
                * dy2
        })
        .collect();
    let [kk1, kk2] = u.blocks;
    MacroField {
        blocks: u.blocks,
        centers1: (0..kk1).map(|k| u.block_center(k, 0)[0]).collect(),
        centers2: (0..kk2).map(|k| u.block_center(0, k)[1]).collect(),
        values,
    }
}

/// `∫∫ v̂ dz dy` over all blocks.
pub fn unfolded_integral(u: &UnfoldedField) -> f64 {
    cell_average(u).values.iter().sum::<f64>() * u.block_measure()
}

/// Porous-band field in reference coordinates, `m` samples per block side,
/// with every block boundary on a grid line. `1/ε` and `h/ε` must be integers.
pub fn aligned_band(epsilon: f64, h: f64, m: usize, f: impl Fn(f64, f64) -> f64) -> Result<CellField> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(h > 0.0) || m == 0 {
        return Err(Error::Input(format!(
            "need 0 < ε < 1, h > 0 and m ≥ 1 (got ε = {epsilon}, h = {h}, m = {m})"
        )));
    }
    let kk1 = subdivisions(1.0, epsilon, "lateral")?;
    let kk2 = subdivisions(h, epsilon, "vertical")?;
    let n1 = kk1 * m;
    let n2 = kk2 * m;
    let dz1 = 1.0 / n1 as f64;
    let dz2 = 1.0 / n2 as f64;
    let z1: Vec<f64> = (0..n1).map(|i| -0.5 + (i as f64 + 0.5) * dz1).collect();
    let z2: Vec<f64> = (0..n2).map(|j| (j as f64 + 0.5) * dz2).collect();
    let mut values = Vec::with_capacity(n1 * n2);
    for &b in &z2 {
        for &a in &z1 {
            values.push(f(a, b));
        }
    }
    Ok(CellField {
        medium: Medium::Porous,
        coordinates: Coordinates::Reference,
        n1,
        n2,
        z1,
        z2,
        dz1,
        dz2,
        fluid: vec![true; n1 * n2],
        values,
    })
}
