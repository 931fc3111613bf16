//! Power-law Stokes solver on masked MAC grids.
//!
//! Unknowns: `u₁` on vertical faces, `u₂` on horizontal faces, pressure at
//! cell centers. The diagonal strain components live at cell centers and the
//! shear component at cell corners. The discrete problem is the minimization
//! of
//!
//! ```text
//! J(u) = Σ_cells A (ν/r) (δ² + |𝔻u|²_c)^{r/2} − Σ_faces A f·u,
//! |𝔻u|²_c = D₁₁² + D₂₂² + ½ Σ_{corners of c} D₁₂²,
//! ```
//!
//! over discretely divergence-free fields, so its optimality system is exactly
//! the variational form tested with the discrete solution itself.
//!
//! Non-periodic axes are no-slip walls on the grid boundary (tangential
//! ghosts are reflected with a sign change). Faces touching a solid cell are
//! held at zero.
//!
//! Each outer step solves a frozen-coefficient saddle-point system (Picard) or
//! the full linearization (Newton) with a sparse LU factorization, then takes
//! an exact line search on `J`. Accepted steps never increase `J`.

use std::io::Write;

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::geometry::Grid;
use crate::rheology::FluidModel;

/// Volume force sampled on the velocity faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyForce {
    Uniform { value: [f64; 2] },
    /// `f = (f₁(x₁), 0)`.
    Horizontal { f1: ScalarFunction },
    /// Explicit face values in solver ordering.
    Faces { u1: Vec<f64>, u2: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct StokesProblem {
    pub grid: Grid,
    pub model: FluidModel,
    pub force: BodyForce,
}

impl StokesProblem {
    pub fn new(grid: Grid, model: FluidModel, force: BodyForce) -> Self {
        Self { grid, model, force }
    }

    /// Same geometry and force, another fluid.
    pub fn with_model(&self, model: FluidModel) -> Self {
        Self {
            model,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Linearization {
    /// Frozen viscosity.
    Picard,
    /// Full Jacobian of the constitutive law.
    #[default]
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_momentum: f64,
    pub tol_div: f64,
    pub max_picard: usize,
    /// Upper bound of the line-search step.
    pub damping: f64,
    pub linearization: Linearization,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_momentum: 1e-8,
            tol_div: 1e-10,
            max_picard: 500,
            damping: 1.0,
            linearization: Linearization::Newton,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_momentum > 0.0) || !(self.tol_div > 0.0) {
            return Err(Error::Configuration("solver tolerances must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Configuration(format!(
                "damping must lie in (0, 1] (got {})",
                self.damping
            )));
        }
        if self.max_picard == 0 {
            return Err(Error::Configuration("max_picard must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub momentum_rel: f64,
    pub div_max: f64,
    pub energy: f64,
    pub residual_history: Vec<f64>,
    pub step_lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesSolution {
    pub nx: usize,
    pub ny: usize,
    /// `u₁` on vertical faces, `u1[j * nux + i]`.
    pub u1: Vec<f64>,
    /// `u₂` on horizontal faces, `u2[j * nx + i]`.
    pub u2: Vec<f64>,
    /// Cell-centered, zero mean over fluid cells, 0 in solid cells.
    pub pressure: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub momentum_rel: f64,
    pub div_max: f64,
}

/// Face bookkeeping shared by all routines.
#[derive(Debug, Clone, Copy)]
struct Faces {
    nx: usize,
    ny: usize,
    px: bool,
    py: bool,
    nux: usize,
    nvy: usize,
    dx: f64,
    dy: f64,
}

impl Faces {
    fn new(grid: &Grid) -> Self {
        let [px, py] = grid.periodic;
        Self {
            nx: grid.nx,
            ny: grid.ny,
            px,
            py,
            nux: if px { grid.nx } else { grid.nx + 1 },
            nvy: if py { grid.ny } else { grid.ny + 1 },
            dx: grid.dx,
            dy: grid.dy,
        }
    }

    fn n_u(&self) -> usize {
        self.nux * self.ny
    }

    fn n_faces(&self) -> usize {
        self.n_u() + self.nx * self.nvy
    }

    #[inline]
    fn u(&self, i: usize, j: usize) -> usize {
        j * self.nux + i % self.nux
    }

    #[inline]
    fn v(&self, i: usize, j: usize) -> usize {
        self.n_u() + (j % self.nvy) * self.nx + i
    }

    /// Corners coincide with the `u₁` columns and `u₂` rows.
    fn n_corners(&self) -> usize {
        self.nux * self.nvy
    }

    #[inline]
    fn corner(&self, i: usize, j: usize) -> usize {
        (j % self.nvy) * self.nux + i % self.nux
    }

    fn right(&self, i: usize) -> usize {
        if self.px {
            (i + 1) % self.nx
        } else {
            i + 1
        }
    }

    fn top(&self, j: usize) -> usize {
        if self.py {
            (j + 1) % self.ny
        } else {
            j + 1
        }
    }
}

type Entry = (usize, f64);

/// Linear strain stencils over the full face vector.
#[derive(Debug, Clone)]
struct StrainStencils {
    d11: Vec<[Entry; 2]>,
    d22: Vec<[Entry; 2]>,
    /// `D₁₂` per corner; ghost faces fold onto their mirror with a sign flip.
    d12: Vec<[Entry; 4]>,
    cell_corners: Vec<[usize; 4]>,
}

impl StrainStencils {
    fn new(f: &Faces) -> Self {
        let ncells = f.nx * f.ny;
        let mut d11 = Vec::with_capacity(ncells);
        let mut d22 = Vec::with_capacity(ncells);
        let mut cell_corners = Vec::with_capacity(ncells);
        for j in 0..f.ny {
            for i in 0..f.nx {
                d11.push([(f.u(f.right(i), j), 1.0 / f.dx), (f.u(i, j), -1.0 / f.dx)]);
                d22.push([(f.v(i, f.top(j)), 1.0 / f.dy), (f.v(i, j), -1.0 / f.dy)]);
                let (ir, jt) = (f.right(i), f.top(j));
                cell_corners.push([
                    f.corner(i, j),
                    f.corner(ir, j),
                    f.corner(i, jt),
                    f.corner(ir, jt),
                ]);
            }
        }
        let hy = 0.5 / f.dy;
        let hx = 0.5 / f.dx;
        let mut d12 = Vec::with_capacity(f.n_corners());
        for j in 0..f.nvy {
            for i in 0..f.nux {
                let top = if j < f.ny {
                    (f.u(i, j), hy)
                } else {
                    (f.u(i, f.ny - 1), -hy)
                };
                let bottom = if j >= 1 {
                    (f.u(i, j - 1), -hy)
                } else if f.py {
                    (f.u(i, f.ny - 1), -hy)
                } else {
                    (f.u(i, 0), hy)
                };
                let east = if i < f.nx {
                    (f.v(i, j), hx)
                } else {
                    (f.v(f.nx - 1, j), -hx)
                };
                let west = if i >= 1 {
                    (f.v(i - 1, j), -hx)
                } else if f.px {
                    (f.v(f.nx - 1, j), -hx)
                } else {
                    (f.v(0, j), hx)
                };
                d12.push([top, bottom, east, west]);
            }
        }
        Self {
            d11,
            d22,
            d12,
            cell_corners,
        }
    }

    #[inline]
    fn apply<const N: usize>(st: &[Entry; N], x: &[f64]) -> f64 {
        st.iter().map(|&(k, c)| c * x[k]).sum()
    }

    /// `(D₁₁, D₂₂)` per cell and `D₁₂` per corner.
    fn strains(&self, x: &[f64]) -> Strains {
        Strains {
            d11: self.d11.iter().map(|s| Self::apply(s, x)).collect(),
            d22: self.d22.iter().map(|s| Self::apply(s, x)).collect(),
            d12: self.d12.iter().map(|s| Self::apply(s, x)).collect(),
        }
    }
}

struct Strains {
    d11: Vec<f64>,
    d22: Vec<f64>,
    d12: Vec<f64>,
}

impl Strains {
    fn squared_norms(&self, corners: &[[usize; 4]]) -> Vec<f64> {
        (0..self.d11.len())
            .map(|c| {
                let k = &corners[c];
                self.d11[c] * self.d11[c]
                    + self.d22[c] * self.d22[c]
                    + 0.5 * k.iter().map(|&q| self.d12[q] * self.d12[q]).sum::<f64>()
            })
            .collect()
    }

    /// Per-cell `D(a):D(b)` in the same weighting as the squared norm.
    fn cross(&self, other: &Strains, corners: &[[usize; 4]]) -> Vec<f64> {
        (0..self.d11.len())
            .map(|c| {
                let k = &corners[c];
                self.d11[c] * other.d11[c]
                    + self.d22[c] * other.d22[c]
                    + 0.5 * k.iter().map(|&q| self.d12[q] * other.d12[q]).sum::<f64>()
            })
            .collect()
    }
}

/// Assembled discrete operators for one problem.
struct System<'a> {
    problem: &'a StokesProblem,
    faces: Faces,
    stencils: StrainStencils,
    /// Compact unknown index of each free face.
    vel_id: Vec<Option<usize>>,
    free_faces: Vec<usize>,
    /// Cells carrying a divergence row / pressure unknown (pinned ones excluded).
    pres_id: Vec<Option<usize>>,
    component: Vec<usize>,
    force: Vec<f64>,
}

impl<'a> System<'a> {
    fn new(problem: &'a StokesProblem) -> Result<Self> {
        let grid = &problem.grid;
        let f = Faces::new(grid);
        let nf = f.n_faces();
        let mut free = vec![false; nf];
        for j in 0..f.ny {
            for i in 0..f.nux {
                let wall = !f.px && (i == 0 || i == f.nx);
                if wall {
                    continue;
                }
                let left = if i == 0 { f.nx - 1 } else { i - 1 };
                let right = i % f.nx;
                free[f.u(i, j)] = !grid.is_solid(left, j) && !grid.is_solid(right, j);
            }
        }
        for j in 0..f.nvy {
            for i in 0..f.nx {
                let wall = !f.py && (j == 0 || j == f.ny);
                if wall {
                    continue;
                }
                let below = if j == 0 { f.ny - 1 } else { j - 1 };
                let above = j % f.ny;
                free[f.v(i, j)] = !grid.is_solid(i, below) && !grid.is_solid(i, above);
            }
        }
        let mut vel_id = vec![None; nf];
        let mut free_faces = Vec::new();
        for (k, fr) in free.iter().enumerate() {
            if *fr {
                vel_id[k] = Some(free_faces.len());
                free_faces.push(k);
            }
        }
        if free_faces.is_empty() {
            return Err(Error::Contract("grid has no free velocity faces".into()));
        }
        if f.px && f.py && grid.solid_count() == 0 {
            return Err(Error::Incompatible(
                "fully periodic grid without obstacles: rigid translations are not controlled".into(),
            ));
        }

        let ncells = f.nx * f.ny;
        let mut active = vec![false; ncells];
        let mut parent: Vec<usize> = (0..ncells).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for j in 0..f.ny {
            for i in 0..f.nx {
                let c = j * f.nx + i;
                let ir = f.right(i);
                let jt = f.top(j);
                let faces_of = [f.u(i, j), f.u(ir, j), f.v(i, j), f.v(i, jt)];
                active[c] = faces_of.iter().any(|&k| free[k]);
                if ir < f.nx && free[f.u(ir, j)] {
                    let (a, b) = (find(&mut parent, c), find(&mut parent, j * f.nx + ir));
                    parent[a.max(b)] = a.min(b);
                }
                if jt < f.ny && free[f.v(i, jt)] {
                    let (a, b) = (find(&mut parent, c), find(&mut parent, jt * f.nx + i));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let component: Vec<usize> = (0..ncells).map(|c| find(&mut parent, c)).collect();
        let mut pres_id = vec![None; ncells];
        let mut next = 0;
        for c in 0..ncells {
            // the root of each component is its smallest cell and is pinned
            if active[c] && component[c] != c {
                pres_id[c] = Some(next);
                next += 1;
            }
        }

        let mut force = vec![0.0; nf];
        match &problem.force {
            BodyForce::Uniform { value } => {
                for k in 0..f.n_u() {
                    force[k] = value[0];
                }
                for k in f.n_u()..nf {
                    force[k] = value[1];
                }
            }
            BodyForce::Horizontal { f1 } => {
                f1.validate()?;
                for i in 0..f.nux {
                    let v = f1.eval(grid.origin[0] + i as f64 * f.dx);
                    for j in 0..f.ny {
                        force[f.u(i, j)] = v;
                    }
                }
            }
            BodyForce::Faces { u1, u2 } => {
                if u1.len() != f.n_u() || u2.len() != nf - f.n_u() {
                    return Err(Error::Contract(format!(
                        "face force sizes ({}, {}) do not match the grid ({}, {})",
                        u1.len(),
                        u2.len(),
                        f.n_u(),
                        nf - f.n_u()
                    )));
                }
                force[..f.n_u()].copy_from_slice(u1);
                force[f.n_u()..].copy_from_slice(u2);
            }
        }
        if force.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("body force has non-finite samples".into()));
        }
        for (k, fr) in free.iter().enumerate() {
            if !fr {
                force[k] = 0.0;
            }
        }

        Ok(Self {
            problem,
            faces: f,
            stencils: StrainStencils::new(&f),
            vel_id,
            free_faces,
            pres_id,
            component,
            force,
        })
    }

    fn n_vel(&self) -> usize {
        self.free_faces.len()
    }

    fn n_pres(&self) -> usize {
        self.pres_id.iter().filter(|p| p.is_some()).count()
    }

    fn cell_area(&self) -> f64 {
        self.faces.dx * self.faces.dy
    }

    fn viscosities(&self, s: &[f64]) -> Vec<f64> {
        let m = &self.problem.model;
        s.iter().map(|&v| m.viscosity_unchecked(v)).collect()
    }

    fn corner_viscosity(&self, eta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.faces.n_corners()];
        for (c, k) in self.stencils.cell_corners.iter().enumerate() {
            for &q in k {
                out[q] += 0.25 * eta[c];
            }
        }
        out
    }

    /// `∇J/A + f`, the constitutive part of the gradient, on the full face vector.
    fn constitutive_gradient(&self, eta: &[f64], st: &Strains) -> Vec<f64> {
        let mut g = vec![0.0; self.faces.n_faces()];
        let s = &self.stencils;
        for c in 0..eta.len() {
            let a = eta[c] * st.d11[c];
            for &(k, w) in &s.d11[c] {
                g[k] += a * w;
            }
            let b = eta[c] * st.d22[c];
            for &(k, w) in &s.d22[c] {
                g[k] += b * w;
            }
        }
        let etab = self.corner_viscosity(eta);
        for (q, st12) in s.d12.iter().enumerate() {
            let t = 2.0 * etab[q] * st.d12[q];
            for &(k, w) in st12 {
                g[k] += t * w;
            }
        }
        g
    }

    fn expand(&self, compact: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.faces.n_faces()];
        for (n, &k) in self.free_faces.iter().enumerate() {
            x[k] = compact[n];
        }
        x
    }

    /// Per-component zero-mean pressure on all fluid cells.
    fn pressure_field(&self, compact: &[f64]) -> Vec<f64> {
        let grid = &self.problem.grid;
        let ncells = grid.cell_count();
        let mut p = vec![0.0; ncells];
        for c in 0..ncells {
            if let Some(id) = self.pres_id[c] {
                p[c] = compact[self.n_vel() + id];
            }
        }
        let mut sum = vec![0.0; ncells];
        let mut count = vec![0usize; ncells];
        for c in 0..ncells {
            if !grid.solid_mask()[c] {
                sum[self.component[c]] += p[c];
                count[self.component[c]] += 1;
            }
        }
        for c in 0..ncells {
            if !grid.solid_mask()[c] {
                let root = self.component[c];
                p[c] -= sum[root] / count[root] as f64;
            }
        }
        p
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Saddle-point matrix with a reusable sparsity pattern.
struct Kkt {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    pattern: Option<(SymbolicSparseColMat<usize>, faer::sparse::Argsort<usize>, SymbolicLu<usize>)>,
}

impl Kkt {
    fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
            cols: Vec::new(),
            pattern: None,
        }
    }

    fn solve(&mut self, rows: Vec<usize>, cols: Vec<usize>, vals: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let fail = |e: &dyn std::fmt::Debug| Error::LinearSolver(format!("{e:?}"));
        if self.pattern.is_none() || rows != self.rows || cols != self.cols {
            let pairs: Vec<Pair<usize, usize>> =
                rows.iter().zip(&cols).map(|(&r, &c)| Pair::new(r, c)).collect();
            let (sym, argsort) =
                SymbolicSparseColMat::try_new_from_indices(self.n, self.n, &pairs).map_err(|e| fail(&e))?;
            let lu_sym = SymbolicLu::try_new(sym.rb()).map_err(|e| fail(&e))?;
            self.pattern = Some((sym, argsort, lu_sym));
            self.rows = rows;
            self.cols = cols;
        }
        let (sym, argsort, lu_sym) = self.pattern.as_ref().expect("pattern set above");
        let mat = SparseColMat::<usize, f64>::new_from_argsort(sym.clone(), argsort, vals)
            .map_err(|e| fail(&e))?;
        let lu = Lu::try_new_with_symbolic(lu_sym.clone(), mat.rb()).map_err(|e| fail(&e))?;
        let solve = |b: &[f64]| -> Vec<f64> {
            let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
            lu.solve_in_place(m.as_mut());
            (0..self.n).map(|i| m[(i, 0)]).collect()
        };
        let mut x = solve(rhs);
        for _ in 0..2 {
            let mut res = rhs.to_vec();
            for ((&r, &c), &v) in self.rows.iter().zip(&self.cols).zip(vals) {
                res[r] -= v * x[c];
            }
            let dx = solve(&res);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("factorization produced non-finite values".into()));
        }
        Ok(x)
    }
}

/// Triplets of the linearized operator.
struct Assembly {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Assembly {
    fn push_outer(&mut self, sys: &System, entries: &[Entry], weight: f64) {
        for &(a, ca) in entries {
            let Some(ia) = sys.vel_id[a] else { continue };
            for &(b, cb) in entries {
                let Some(ib) = sys.vel_id[b] else { continue };
                self.rows.push(ia);
                self.cols.push(ib);
                self.vals.push(weight * ca * cb);
            }
        }
    }
}

fn assemble(sys: &System, eta_mat: &[f64], newton: Option<(&Strains, &[f64])>) -> Assembly {
    let mut asm = Assembly {
        rows: Vec::new(),
        cols: Vec::new(),
        vals: Vec::new(),
    };
    let s = &sys.stencils;
    for c in 0..eta_mat.len() {
        asm.push_outer(sys, &s.d11[c], eta_mat[c]);
        asm.push_outer(sys, &s.d22[c], eta_mat[c]);
    }
    let etab = sys.corner_viscosity(eta_mat);
    for (q, st) in s.d12.iter().enumerate() {
        asm.push_outer(sys, st, 2.0 * etab[q]);
    }
    if let Some((st, beta)) = newton {
        let mut g: Vec<Entry> = Vec::with_capacity(20);
        for c in 0..eta_mat.len() {
            g.clear();
            for &(k, w) in &s.d11[c] {
                g.push((k, st.d11[c] * w));
            }
            for &(k, w) in &s.d22[c] {
                g.push((k, st.d22[c] * w));
            }
            for &q in &s.cell_corners[c] {
                for &(k, w) in &s.d12[q] {
                    g.push((k, 0.5 * st.d12[q] * w));
                }
            }
            g.sort_by_key(|e| e.0);
            let mut merged: Vec<Entry> = Vec::with_capacity(g.len());
            for &(k, w) in &g {
                match merged.last_mut() {
                    Some(last) if last.0 == k => last.1 += w,
                    _ => merged.push((k, w)),
                }
            }
            if merged.iter().all(|&(k, _)| sys.vel_id[k].is_none()) {
                continue;
            }
            asm.push_outer(sys, &merged, beta[c]);
        }
    }
    let nv = sys.n_vel();
    let f = &sys.faces;
    for j in 0..f.ny {
        for i in 0..f.nx {
            let c = j * f.nx + i;
            let Some(pc) = sys.pres_id[c] else { continue };
            let row = nv + pc;
            let div = [
                (f.u(f.right(i), j), 1.0 / f.dx),
                (f.u(i, j), -1.0 / f.dx),
                (f.v(i, f.top(j)), 1.0 / f.dy),
                (f.v(i, j), -1.0 / f.dy),
            ];
            for (k, w) in div {
                if let Some(iv) = sys.vel_id[k] {
                    asm.rows.push(row);
                    asm.cols.push(iv);
                    asm.vals.push(-w);
                    asm.rows.push(iv);
                    asm.cols.push(row);
                    asm.vals.push(-w);
                }
            }
        }
    }
    asm
}

/// Solves the discrete power-law Stokes problem.
pub fn solve_stokes(problem: &StokesProblem, cfg: &SolverConfig) -> Result<StokesSolution> {
    cfg.validate()?;
    problem.model.check_nonsingular()?;
    if problem.grid.fluid_count() == 0 {
        return Err(Error::Contract("grid has no fluid cells".into()));
    }
    let sys = System::new(problem)?;
    let model = &problem.model;
    let (r, nu) = (model.flow_index(), model.consistency());
    let ncells = problem.grid.cell_count();
    let nv = sys.n_vel();
    let n = nv + sys.n_pres();
    let nf = sys.faces.n_faces();

    let force_norm = sys.free_faces.iter().map(|&k| sys.force[k].powi(2)).sum::<f64>().sqrt();
    if force_norm == 0.0 {
        return Ok(finish(
            &sys,
            vec![0.0; nf],
            vec![0.0; ncells],
            0,
            vec![0.0],
            Vec::new(),
        ));
    }

    let mut picard_kkt = Kkt::new(n);
    let mut newton_kkt = Kkt::new(n);
    let mut rhs = vec![0.0; n];
    for (m, &k) in sys.free_faces.iter().enumerate() {
        rhs[m] = sys.force[k];
    }

    // Newtonian solve with the fluid's consistency.
    let newtonian = vec![nu; ncells];
    let asm = assemble(&sys, &newtonian, None);
    let sol0 = picard_kkt.solve(asm.rows, asm.cols, &asm.vals, &rhs)?;
    let u0 = sys.expand(&sol0[..nv]);
    let p0 = sys.pressure_field(&sol0);
    let mut history = Vec::new();
    let mut steps = Vec::new();
    let res0 = residuals_raw(problem, &sys.faces, &u0, &p0, &sys.force);
    history.push(res0.momentum_rel);
    if res0.momentum_rel <= cfg.tol_momentum && res0.div_max <= cfg.tol_div {
        return Ok(finish(&sys, u0, p0, 0, history, steps));
    }

    // Rescale the Newtonian field to the power-law amplitude.
    let st0 = sys.stencils.strains(&u0);
    let s0 = st0.squared_norms(&sys.stencils.cell_corners);
    let work = dot(&sys.force, &u0);
    let sr: f64 = s0.iter().map(|v| v.powf(0.5 * r)).sum();
    let mut u = u0;
    if work > 0.0 && sr > 0.0 {
        let c = (work / (nu * sr)).powf(1.0 / (r - 1.0));
        for x in &mut u {
            *x *= c;
        }
    }

    let delta2 = model.regularization().powi(2);
    for iter in 1..=cfg.max_picard {
        let st = sys.stencils.strains(&u);
        let s = st.squared_norms(&sys.stencils.cell_corners);
        let eta = sys.viscosities(&s);
        let mut eta_mat = eta.clone();
        if r > 2.0 {
            let floor = 1e-12 * eta.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for e in &mut eta_mat {
                *e = e.max(floor);
            }
        }
        let grad = sys.constitutive_gradient(&eta, &st);
        for (m, &k) in sys.free_faces.iter().enumerate() {
            rhs[m] = sys.force[k] - grad[k];
        }
        for v in &mut rhs[nv..] {
            *v = 0.0;
        }
        let sol = match cfg.linearization {
            Linearization::Picard => {
                let asm = assemble(&sys, &eta_mat, None);
                picard_kkt.solve(asm.rows, asm.cols, &asm.vals, &rhs)?
            }
            Linearization::Newton => {
                let beta: Vec<f64> = s
                    .iter()
                    .map(|&v| {
                        let base = delta2 + v;
                        if base == 0.0 {
                            0.0
                        } else {
                            nu * (r - 2.0) * base.powf(0.5 * (r - 4.0))
                        }
                    })
                    .collect();
                let asm = assemble(&sys, &eta_mat, Some((&st, &beta)));
                newton_kkt.solve(asm.rows, asm.cols, &asm.vals, &rhs)?
            }
        };
        let step = sys.expand(&sol[..nv]);
        let p_new = sys.pressure_field(&sol);
        let candidate: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + b).collect();
        let res = residuals_raw(problem, &sys.faces, &candidate, &p_new, &sys.force);
        history.push(res.momentum_rel);
        if res.momentum_rel <= cfg.tol_momentum && res.div_max <= cfg.tol_div {
            steps.push(1.0);
            return Ok(finish(&sys, candidate, p_new, iter, history, steps));
        }
        let theta = line_search(&sys, &st, &s, &step, cfg.damping);
        steps.push(theta);
        for (a, b) in u.iter_mut().zip(&step) {
            *a += theta * b;
        }
    }
    Err(Error::Convergence {
        iterations: cfg.max_picard,
        last_residual: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

/// Exact minimization of the regularized energy along `u + θ d`, `θ ∈ (0, θ_max]`.
fn line_search(sys: &System, st: &Strains, s: &[f64], d: &[f64], theta_max: f64) -> f64 {
    let model = &sys.problem.model;
    let (r, nu, delta2) = (
        model.flow_index(),
        model.consistency(),
        model.regularization().powi(2),
    );
    let sd = sys.stencils.strains(d);
    let a = st.cross(&sd, &sys.stencils.cell_corners);
    let b = sd.squared_norms(&sys.stencils.cell_corners);
    let fd = dot(&sys.force, d);
    let slope = |theta: f64| -> f64 {
        let mut acc = 0.0;
        for c in 0..s.len() {
            let sc = (s[c] + 2.0 * theta * a[c] + theta * theta * b[c]).max(0.0);
            let eta = if r == 2.0 {
                nu
            } else {
                nu * (delta2 + sc).powf(0.5 * (r - 2.0))
            };
            acc += eta * (a[c] + theta * b[c]);
        }
        acc - fd
    };
    if slope(theta_max) <= 0.0 || slope(0.0) >= 0.0 {
        return theta_max;
    }
    let (mut lo, mut hi) = (0.0, theta_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    if theta > 0.0 {
        theta
    } else {
        theta_max
    }
}

fn finish(
    sys: &System,
    x: Vec<f64>,
    pressure: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
    steps: Vec<f64>,
) -> StokesSolution {
    let f = &sys.faces;
    let problem = sys.problem;
    let res = residuals_raw(problem, f, &x, &pressure, &sys.force);
    let st = sys.stencils.strains(&x);
    let s = st.squared_norms(&sys.stencils.cell_corners);
    let m = &problem.model;
    let r = m.flow_index();
    let energy = (m.consistency() / r * s.iter().map(|v| v.powf(0.5 * r)).sum::<f64>()
        - dot(&sys.force, &x))
        * sys.cell_area();
    let n_u = f.n_u();
    StokesSolution {
        nx: f.nx,
        ny: f.ny,
        u1: x[..n_u].to_vec(),
        u2: x[n_u..].to_vec(),
        pressure,
        diagnostics: Diagnostics {
            iterations,
            momentum_rel: res.momentum_rel,
            div_max: res.div_max,
            energy,
            residual_history: history,
            step_lengths: steps,
        },
    }
}

/// Face force actually used by the solver (zero on held faces).
fn face_force(problem: &StokesProblem) -> Result<Vec<f64>> {
    Ok(System::new(problem)?.force)
}

fn check_shape(problem: &StokesProblem, sol: &StokesSolution) -> Result<Faces> {
    let f = Faces::new(&problem.grid);
    if sol.nx != f.nx
        || sol.ny != f.ny
        || sol.u1.len() != f.n_u()
        || sol.u2.len() != f.nx * f.nvy
        || sol.pressure.len() != f.nx * f.ny
    {
        return Err(Error::Contract("solution does not conform to the grid".into()));
    }
    Ok(f)
}

fn concat(sol: &StokesSolution) -> Vec<f64> {
    let mut x = sol.u1.clone();
    x.extend_from_slice(&sol.u2);
    x
}

/// Momentum and divergence residuals, evaluated matrix-free by direct index
/// arithmetic (independent of the solver's stencil tables).
pub fn residuals(problem: &StokesProblem, sol: &StokesSolution) -> Result<Residuals> {
    let f = check_shape(problem, sol)?;
    let force = face_force(problem)?;
    Ok(residuals_raw(problem, &f, &concat(sol), &sol.pressure, &force))
}

fn residuals_raw(
    problem: &StokesProblem,
    f: &Faces,
    x: &[f64],
    pressure: &[f64],
    force: &[f64],
) -> Residuals {
    let grid = &problem.grid;
    let (nx, ny, dx, dy) = (f.nx, f.ny, f.dx, f.dy);
    let n_u = f.n_u();
    let (u, v) = x.split_at(n_u);
    let ui = |i: usize, j: usize| u[j * f.nux + i % f.nux];
    let vi = |i: usize, j: usize| v[(j % f.nvy) * nx + i];
    let wrap_x = |i: usize| if f.px { i % nx } else { i };
    let wrap_y = |j: usize| if f.py { j % ny } else { j };

    // diagonal strains at centers
    let mut e11 = vec![0.0; nx * ny];
    let mut e22 = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            e11[j * nx + i] = (ui(wrap_x(i + 1), j) - ui(i, j)) / dx;
            e22[j * nx + i] = (vi(i, wrap_y(j + 1)) - vi(i, j)) / dy;
        }
    }
    // shear strain at corners, ghosts reflected at walls
    let (ncx, ncy) = (f.nux, f.nvy);
    let mut e12 = vec![0.0; ncx * ncy];
    for j in 0..ncy {
        for i in 0..ncx {
            let u_top = if j < ny { ui(i, j) } else { -ui(i, ny - 1) };
            let u_bot = if j > 0 {
                ui(i, j - 1)
            } else if f.py {
                ui(i, ny - 1)
            } else {
                -ui(i, 0)
            };
            let v_east = if i < nx { vi(i, j) } else { -vi(nx - 1, j) };
            let v_west = if i > 0 {
                vi(i - 1, j)
            } else if f.px {
                vi(nx - 1, j)
            } else {
                -vi(0, j)
            };
            e12[j * ncx + i] = 0.5 * ((u_top - u_bot) / dy + (v_east - v_west) / dx);
        }
    }
    let corner = |i: usize, j: usize| (j % ncy) * ncx + (i % ncx);
    let mut eta = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            let shear = e12[corner(i, j)].powi(2)
                + e12[corner(wrap_x(i + 1), j)].powi(2)
                + e12[corner(i, wrap_y(j + 1))].powi(2)
                + e12[corner(wrap_x(i + 1), wrap_y(j + 1))].powi(2);
            let s2 = e11[c] * e11[c] + e22[c] * e22[c] + 0.5 * shear;
            eta[c] = problem.model.viscosity_unchecked(s2);
        }
    }
    // scatter stresses through the transposed difference operators
    let mut gu = vec![0.0; n_u];
    let mut gv = vec![0.0; v.len()];
    let uidx = |i: usize, j: usize| j * f.nux + i % f.nux;
    let vidx = |i: usize, j: usize| (j % f.nvy) * nx + i;
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            let s11 = eta[c] * e11[c] / dx;
            gu[uidx(wrap_x(i + 1), j)] += s11;
            gu[uidx(i, j)] -= s11;
            let s22 = eta[c] * e22[c] / dy;
            gv[vidx(i, wrap_y(j + 1))] += s22;
            gv[vidx(i, j)] -= s22;
        }
    }
    let mut eta_corner = vec![0.0; ncx * ncy];
    for j in 0..ny {
        for i in 0..nx {
            let q = 0.25 * eta[j * nx + i];
            for (a, b) in [(i, j), (wrap_x(i + 1), j), (i, wrap_y(j + 1)), (wrap_x(i + 1), wrap_y(j + 1))] {
                eta_corner[corner(a, b)] += q;
            }
        }
    }
    for j in 0..ncy {
        for i in 0..ncx {
            let t = eta_corner[j * ncx + i] * e12[j * ncx + i];
            let ty = t / dy;
            let tx = t / dx;
            if j < ny {
                gu[uidx(i, j)] += ty;
            } else {
                gu[uidx(i, ny - 1)] -= ty;
            }
            if j > 0 {
                gu[uidx(i, j - 1)] -= ty;
            } else if f.py {
                gu[uidx(i, ny - 1)] -= ty;
            } else {
                gu[uidx(i, 0)] += ty;
            }
            if i < nx {
                gv[vidx(i, j)] += tx;
            } else {
                gv[vidx(nx - 1, j)] -= tx;
            }
            if i > 0 {
                gv[vidx(i - 1, j)] -= tx;
            } else if f.px {
                gv[vidx(nx - 1, j)] -= tx;
            } else {
                gv[vidx(0, j)] += tx;
            }
        }
    }

    let solid = |i: usize, j: usize| grid.is_solid(i, j);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..ny {
        for i in 0..f.nux {
            if !f.px && (i == 0 || i == nx) {
                continue;
            }
            let left = if i == 0 { nx - 1 } else { i - 1 };
            let right = i % nx;
            if solid(left, j) || solid(right, j) {
                continue;
            }
            let grad_p = (pressure[j * nx + right] - pressure[j * nx + left]) / dx;
            let k = uidx(i, j);
            let fk = force[k];
            num += (gu[k] + grad_p - fk).powi(2);
            den += fk * fk;
        }
    }
    for j in 0..f.nvy {
        if !f.py && (j == 0 || j == ny) {
            continue;
        }
        for i in 0..nx {
            let below = if j == 0 { ny - 1 } else { j - 1 };
            let above = j % ny;
            if solid(i, below) || solid(i, above) {
                continue;
            }
            let grad_p = (pressure[above * nx + i] - pressure[below * nx + i]) / dy;
            let k = vidx(i, j);
            let fk = force[n_u + k];
            num += (gv[k] + grad_p - fk).powi(2);
            den += fk * fk;
        }
    }
    let momentum_rel = if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    };
    let mut div_max: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            if solid(i, j) {
                continue;
            }
            let d = (ui(wrap_x(i + 1), j) - ui(i, j)) / dx + (vi(i, wrap_y(j + 1)) - vi(i, j)) / dy;
            div_max = div_max.max(d.abs());
        }
    }
    Residuals {
        momentum_rel,
        div_max,
    }
}

/// `(ν/r) Σ |𝔻u|^r A − Σ f·u A`.
pub fn energy(problem: &StokesProblem, sol: &StokesSolution) -> Result<f64> {
    check_shape(problem, sol)?;
    let sys = System::new(problem)?;
    let x = concat(sol);
    let s = sys.stencils.strains(&x).squared_norms(&sys.stencils.cell_corners);
    let m = &problem.model;
    let r = m.flow_index();
    let e = m.consistency() / r * s.iter().map(|v| v.powf(0.5 * r)).sum::<f64>();
    Ok((e - dot(&sys.force, &x)) * sys.cell_area())
}

/// `|𝔻u|²` per cell (corner shear averaged onto the cell).
pub fn strain_rate_squared(problem: &StokesProblem, sol: &StokesSolution) -> Result<Vec<f64>> {
    check_shape(problem, sol)?;
    let f = Faces::new(&problem.grid);
    let st = StrainStencils::new(&f);
    Ok(st.strains(&concat(sol)).squared_norms(&st.cell_corners))
}

/// `ν Σ (δ² + |𝔻u|²)^{(r−2)/2} |𝔻u|² A`, the left side of the energy identity.
pub fn dissipation(problem: &StokesProblem, sol: &StokesSolution) -> Result<f64> {
    let s = strain_rate_squared(problem, sol)?;
    let a = problem.grid.cell_area();
    Ok(s.iter().map(|&v| problem.model.viscosity_unchecked(v) * v).sum::<f64>() * a)
}

/// `Σ f·u A`, the right side of the energy identity.
pub fn work(problem: &StokesProblem, sol: &StokesSolution) -> Result<f64> {
    check_shape(problem, sol)?;
    let force = face_force(problem)?;
    Ok(dot(&force, &concat(sol)) * problem.grid.cell_area())
}

/// Projects a face field onto the held-face constraints and the discrete
/// divergence-free space (least-squares correction through the pressure
/// Laplacian). Used to build admissible perturbations.
pub fn project_divergence_free(problem: &StokesProblem, u1: &[f64], u2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let sys = System::new(problem)?;
    let f = sys.faces;
    let mut x = u1.to_vec();
    x.extend_from_slice(u2);
    if x.len() != f.n_faces() {
        return Err(Error::Contract("face field does not conform to the grid".into()));
    }
    let nv = sys.n_vel();
    let n = nv + sys.n_pres();
    // minimize ½|y − x|² subject to B y = 0 via the same saddle-point layout
    let mut asm = Assembly {
        rows: Vec::new(),
        cols: Vec::new(),
        vals: Vec::new(),
    };
    for m in 0..nv {
        asm.rows.push(m);
        asm.cols.push(m);
        asm.vals.push(1.0);
    }
    let full = assemble(&sys, &vec![0.0; f.nx * f.ny], None);
    for ((r, c), v) in full.rows.iter().zip(&full.cols).zip(&full.vals) {
        if *r >= nv || *c >= nv {
            asm.rows.push(*r);
            asm.cols.push(*c);
            asm.vals.push(*v);
        }
    }
    let mut rhs = vec![0.0; n];
    for (m, &k) in sys.free_faces.iter().enumerate() {
        rhs[m] = x[k];
    }
    let mut kkt = Kkt::new(n);
    let sol = kkt.solve(asm.rows, asm.cols, &asm.vals, &rhs)?;
    let y = sys.expand(&sol[..nv]);
    Ok((y[..f.n_u()].to_vec(), y[f.n_u()..].to_vec()))
}

/// Cell-centered velocity (face averages) per cell; zero in solid cells.
pub fn cell_velocity(problem: &StokesProblem, sol: &StokesSolution) -> Result<Vec<[f64; 2]>> {
    let f = check_shape(problem, sol)?;
    let grid = &problem.grid;
    let mut out = vec![[0.0; 2]; f.nx * f.ny];
    for j in 0..f.ny {
        for i in 0..f.nx {
            if grid.is_solid(i, j) {
                continue;
            }
            let a = sol.u1[f.u(i, j)];
            let b = sol.u1[f.u(f.right(i), j)];
            let c = sol.u2[f.v(i, j) - f.n_u()];
            let d = sol.u2[f.v(i, f.top(j)) - f.n_u()];
            out[j * f.nx + i] = [0.5 * (a + b), 0.5 * (c + d)];
        }
    }
    Ok(out)
}

/// Writes `x1,x2,u1,u2,p` per fluid cell.
pub fn write_solution_csv<W: Write>(problem: &StokesProblem, sol: &StokesSolution, out: W) -> Result<()> {
    let vel = cell_velocity(problem, sol)?;
    let grid = &problem.grid;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "u1", "u2", "p"])?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_solid(i, j) {
                continue;
            }
            let c = grid.index(i, j);
            let [x1, x2] = grid.cell_center(i, j);
            w.write_record(&[
                format!("{x1:.12e}"),
                format!("{x2:.12e}"),
                format!("{:.12e}", vel[c][0]),
                format!("{:.12e}", vel[c][1]),
                format!("{:.12e}", sol.pressure[c]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
