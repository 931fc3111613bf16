//! Reference cell, two-media domain and the rasterized grids used by the
//! solvers.
//!
//! Everything is rasterized by cell-center membership on uniform grids. The
//! porous layer `Ω_ε` occupies `0 < x₂ < h` and is tiled by `ε × ε` cells,
//! each carrying a copy of the reference obstacle; the film `I_ε` occupies
//! `−η g(x₁) < x₂ < 0`. The interface `Σ` is the grid line `x₂ = 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::functions::FilmProfile;

/// Smallest resolution accepted for the reference cell.
pub const MIN_CELL_RESOLUTION: usize = 16;

/// Default cap on the number of grid cells of a two-media domain.
pub const DEFAULT_MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstacleShape {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Rectangle {
        center: [f64; 2],
        half_widths: [f64; 2],
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl ObstacleShape {
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        let s = ObstacleShape::Disk { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn centered_disk(radius: f64) -> Result<Self> {
        Self::disk([0.0, 0.0], radius)
    }

    pub fn rectangle(center: [f64; 2], half_widths: [f64; 2]) -> Result<Self> {
        let s = ObstacleShape::Rectangle {
            center,
            half_widths,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let s = ObstacleShape::Polygon { vertices };
        s.validate()?;
        Ok(s)
    }

    /// Checks positive area and positive clearance to the boundary of `Y`.
    pub fn validate(&self) -> Result<()> {
        match self {
            ObstacleShape::Disk { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::Geometry(format!(
                    "disk radius must be positive (got {radius})"
                )))
            }
            ObstacleShape::Rectangle { half_widths, .. }
                if !(half_widths[0] > 0.0 && half_widths[1] > 0.0) =>
            {
                return Err(Error::Geometry(format!(
                    "rectangle half-widths must be positive (got {half_widths:?})"
                )))
            }
            ObstacleShape::Polygon { vertices } if vertices.len() < 3 => {
                return Err(Error::Geometry("polygon needs at least 3 vertices".into()))
            }
            _ => {}
        }
        let area = self.area();
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::Geometry(format!(
                "obstacle must have positive area (got {area})"
            )));
        }
        let margin = self.clearance();
        if !(margin > 0.0) {
            return Err(Error::Geometry(format!(
                "obstacle must stay strictly inside the reference cell (clearance {margin})"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            ObstacleShape::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy < radius * radius
            }
            ObstacleShape::Rectangle {
                center,
                half_widths,
            } => {
                (p[0] - center[0]).abs() < half_widths[0]
                    && (p[1] - center[1]).abs() < half_widths[1]
            }
            ObstacleShape::Polygon { vertices } => {
                let mut inside = false;
                let n = vertices.len();
                let mut j = n - 1;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[j]);
                    if (a[1] > p[1]) != (b[1] > p[1])
                        && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]
                    {
                        inside = !inside;
                    }
                    j = i;
                }
                inside
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            ObstacleShape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            ObstacleShape::Rectangle { half_widths, .. } => 4.0 * half_widths[0] * half_widths[1],
            ObstacleShape::Polygon { vertices } => {
                let n = vertices.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - b[0] * a[1]
                    })
                    .sum();
                0.5 * twice.abs()
            }
        }
    }

    /// `(min corner, max corner)`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            ObstacleShape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            ObstacleShape::Rectangle {
                center,
                half_widths,
            } => (
                [center[0] - half_widths[0], center[1] - half_widths[1]],
                [center[0] + half_widths[0], center[1] + half_widths[1]],
            ),
            ObstacleShape::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for a in 0..2 {
                        lo[a] = lo[a].min(v[a]);
                        hi[a] = hi[a].max(v[a]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Bounding-box distance to the boundary of `Y = (−1/2, 1/2)²`.
    pub fn clearance(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        [lo[0] + 0.5, lo[1] + 0.5, 0.5 - hi[0], 0.5 - hi[1]]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Reflection `x₁ → −x₁` (across the `y₂` axis).
    pub fn mirrored_x1(&self) -> Self {
        match self {
            ObstacleShape::Disk { center, radius } => ObstacleShape::Disk {
                center: [-center[0], center[1]],
                radius: *radius,
            },
            ObstacleShape::Rectangle {
                center,
                half_widths,
            } => ObstacleShape::Rectangle {
                center: [-center[0], center[1]],
                half_widths: *half_widths,
            },
            ObstacleShape::Polygon { vertices } => ObstacleShape::Polygon {
                vertices: vertices.iter().rev().map(|v| [-v[0], v[1]]).collect(),
            },
        }
    }

    /// Reflection `x₂ → −x₂`.
    pub fn mirrored_x2(&self) -> Self {
        match self {
            ObstacleShape::Disk { center, radius } => ObstacleShape::Disk {
                center: [center[0], -center[1]],
                radius: *radius,
            },
            ObstacleShape::Rectangle {
                center,
                half_widths,
            } => ObstacleShape::Rectangle {
                center: [center[0], -center[1]],
                half_widths: *half_widths,
            },
            ObstacleShape::Polygon { vertices } => ObstacleShape::Polygon {
                vertices: vertices.iter().rev().map(|v| [v[0], -v[1]]).collect(),
            },
        }
    }

    /// Stable short hash of the shape parameters.
    pub fn shape_hash(&self) -> String {
        let text = serde_json::to_string(self).unwrap_or_default();
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCell {
    obstacle: ObstacleShape,
}

impl UnitCell {
    pub fn new(obstacle: ObstacleShape) -> Result<Self> {
        obstacle.validate()?;
        Ok(Self { obstacle })
    }

    pub fn obstacle(&self) -> &ObstacleShape {
        &self.obstacle
    }

    /// Exact `|Y_f| = 1 − |T|`.
    pub fn fluid_fraction(&self) -> f64 {
        1.0 - self.obstacle.area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LateralBoundary {
    /// No-slip walls at `x₁ = ±1/2`.
    #[default]
    Walls,
    /// Periodic in `x₁`.
    Periodic,
}

/// Parameters of the two-media domain `Λ_ε = Q_ε ∪ Σ ∪ I_ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerforatedDomain {
    pub epsilon: f64,
    pub h: f64,
    pub eta: f64,
    pub obstacle: ObstacleShape,
    pub film: FilmProfile,
    #[serde(default)]
    pub lateral: LateralBoundary,
}

impl PerforatedDomain {
    pub fn new(
        epsilon: f64,
        h: f64,
        eta: f64,
        obstacle: ObstacleShape,
        film: FilmProfile,
    ) -> Result<Self> {
        let d = Self {
            epsilon,
            h,
            eta,
            obstacle,
            film,
            lateral: LateralBoundary::Walls,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_lateral(mut self, lateral: LateralBoundary) -> Self {
        self.lateral = lateral;
        self
    }

    /// Number of `ε`-cells along ω.
    pub fn cells_along(&self) -> usize {
        (1.0 / self.epsilon).round() as usize
    }

    /// Whole `ε`-cell rows in the porous band (`h/ε` rounded, at least 1).
    pub fn porous_rows(&self) -> usize {
        ((self.h / self.epsilon).round() as usize).max(1)
    }

    /// Porous thickness actually realized by the grid.
    pub fn realized_h(&self) -> f64 {
        self.porous_rows() as f64 * self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("h", self.h), ("eta", self.eta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Regime(format!("{name} must lie in (0, 1) (got {v})")));
            }
        }
        let inv = 1.0 / self.epsilon;
        if (inv - inv.round()).abs() > 1e-9 * inv {
            return Err(Error::Regime(format!(
                "1/epsilon must be an integer so cells tile ω (got 1/ε = {inv})"
            )));
        }
        if self.h / self.epsilon < 1.0 {
            return Err(Error::Regime(format!(
                "h/ε = {} < 1: the porous band holds no full cell row (ε ≪ h violated)",
                self.h / self.epsilon
            )));
        }
        if self.eta <= self.epsilon {
            return Err(Error::Regime(format!(
                "eta = {} must exceed epsilon = {}",
                self.eta, self.epsilon
            )));
        }
        self.obstacle.validate()
    }
}

/// Metadata of a two-media grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoMediaLayout {
    pub epsilon: f64,
    pub h_requested: f64,
    /// Realized porous thickness `porous_cell_rows · ε`.
    pub h: f64,
    pub eta: f64,
    pub cells_along: usize,
    pub porous_cell_rows: usize,
    pub n_per_cell: usize,
    /// Grid rows below `Σ`; the interface is the grid line with this row index.
    pub film_rows: usize,
}

impl TwoMediaLayout {
    pub fn interface_row(&self) -> usize {
        self.film_rows
    }

    pub fn medium_of_row(&self, j: usize) -> Medium {
        if j < self.film_rows {
            Medium::Film
        } else {
            Medium::Porous
        }
    }
}

/// Uniform cell grid with a solid mask. Staggering: `u₁` on vertical faces,
/// `u₂` on horizontal faces, pressure at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Lower-left corner.
    pub origin: [f64; 2],
    pub periodic: [bool; 2],
    solid: Vec<bool>,
    pub layout: Option<TwoMediaLayout>,
}

impl Grid {
    pub fn new(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        origin: [f64; 2],
        periodic: [bool; 2],
        solid: Vec<bool>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 || solid.len() != nx * ny {
            return Err(Error::Contract(format!(
                "grid {nx}×{ny} does not match a mask of {} cells",
                solid.len()
            )));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::Contract("grid spacing must be positive".into()));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            origin,
            periodic,
            solid,
            layout: None,
        })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn is_solid(&self, i: usize, j: usize) -> bool {
        self.solid[j * self.nx + i]
    }

    pub fn solid_mask(&self) -> &[bool] {
        &self.solid
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.dx,
            self.origin[1] + (j as f64 + 0.5) * self.dy,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn solid_count(&self) -> usize {
        self.solid.iter().filter(|s| **s).count()
    }

    pub fn fluid_count(&self) -> usize {
        self.cell_count() - self.solid_count()
    }

    pub fn fluid_fraction(&self) -> f64 {
        self.fluid_count() as f64 / self.cell_count() as f64
    }

    /// Text mask, top row first, `1` for solid cells.
    pub fn mask_text(&self) -> String {
        let mut out = String::with_capacity((self.nx + 1) * self.ny);
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                out.push(if self.is_solid(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Mirror of the grid across its horizontal midline.
    pub fn flipped_vertically(&self) -> Self {
        let mut solid = vec![false; self.solid.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                solid[self.index(i, self.ny - 1 - j)] = self.is_solid(i, j);
            }
        }
        Self {
            solid,
            ..self.clone()
        }
    }
}

/// Cell-center rasterization of an obstacle on the `n × n` grid of `Y`,
/// without admissibility checks.
pub fn unit_cell_mask(obstacle: &ObstacleShape, n: usize) -> Vec<bool> {
    let h = 1.0 / n as f64;
    let mut mask = vec![false; n * n];
    for j in 0..n {
        let y = -0.5 + (j as f64 + 0.5) * h;
        for i in 0..n {
            let x = -0.5 + (i as f64 + 0.5) * h;
            mask[j * n + i] = obstacle.contains([x, y]);
        }
    }
    mask
}

/// `n × n` periodic grid on `Y` with the obstacle rasterized by cell centers.
pub fn build_unit_cell_grid(cell: &UnitCell, n: usize) -> Result<Grid> {
    if n < MIN_CELL_RESOLUTION {
        return Err(Error::Geometry(format!(
            "cell resolution must be at least {MIN_CELL_RESOLUTION} (got {n})"
        )));
    }
    let mask = unit_cell_mask(cell.obstacle(), n);
    if !mask.iter().any(|s| *s) {
        return Err(Error::Geometry(format!(
            "obstacle is not resolved at n = {n}: the mask is empty"
        )));
    }
    let touches = (0..n).any(|k| mask[k] || mask[(n - 1) * n + k] || mask[k * n] || mask[k * n + n - 1]);
    if touches {
        return Err(Error::Geometry(format!(
            "obstacle reaches the cell boundary at resolution n = {n}"
        )));
    }
    let h = 1.0 / n as f64;
    Grid::new(n, n, h, h, [-0.5, -0.5], [true, true], mask)
}

/// Plane channel of unit gap for kernel checks: periodic in `x₁`, solid rows
/// centered on `x₂ = 0` and `x₂ = 1`, so the wall velocity nodes sit exactly
/// on the walls.
pub fn build_channel_grid(gap_cells: usize, columns: usize) -> Result<Grid> {
    if gap_cells < 2 || columns == 0 {
        return Err(Error::Geometry("channel needs at least 2 gap cells".into()));
    }
    let h = 1.0 / gap_cells as f64;
    let ny = gap_cells + 1;
    let mut solid = vec![false; columns * ny];
    for i in 0..columns {
        solid[i] = true;
        solid[(ny - 1) * columns + i] = true;
    }
    Grid::new(columns, ny, h, h, [0.0, -0.5 * h], [true, false], solid)
}

/// Grid covering `Λ_ε` with square cells of side `ε / n_per_cell`.
pub fn build_perforated_domain(params: &PerforatedDomain, n_per_cell: usize) -> Result<Grid> {
    build_perforated_domain_capped(params, n_per_cell, DEFAULT_MAX_CELLS)
}

pub fn build_perforated_domain_capped(
    params: &PerforatedDomain,
    n_per_cell: usize,
    max_cells: usize,
) -> Result<Grid> {
    params.validate()?;
    if n_per_cell < MIN_CELL_RESOLUTION {
        return Err(Error::Geometry(format!(
            "resolution per cell must be at least {MIN_CELL_RESOLUTION} (got {n_per_cell})"
        )));
    }
    let unit = build_unit_cell_grid(&UnitCell::new(params.obstacle.clone())?, n_per_cell)?;
    let cells_along = params.cells_along();
    let rows = params.porous_rows();
    let delta = params.epsilon / n_per_cell as f64;
    let film_depth = params.eta * params.film.upper();
    let film_rows = ((film_depth / delta) - 1e-9).ceil().max(1.0) as usize;
    let nx = cells_along * n_per_cell;
    let ny = film_rows + rows * n_per_cell;
    let total = nx.checked_mul(ny).unwrap_or(usize::MAX);
    if total > max_cells {
        return Err(Error::Resource(format!(
            "domain needs {total} grid cells, above the cap of {max_cells}"
        )));
    }
    let origin = [-0.5, -(film_rows as f64) * delta];
    let mut solid = vec![false; nx * ny];
    for j in 0..film_rows {
        let y = origin[1] + (j as f64 + 0.5) * delta;
        for i in 0..nx {
            let x = origin[0] + (i as f64 + 0.5) * delta;
            solid[j * nx + i] = y < -params.eta * params.film.eval(x);
        }
    }
    for jj in 0..rows * n_per_cell {
        let j = film_rows + jj;
        let b = jj % n_per_cell;
        for i in 0..nx {
            let a = i % n_per_cell;
            solid[j * nx + i] = unit.is_solid(a, b);
        }
    }
    let periodic_x = params.lateral == LateralBoundary::Periodic;
    let mut grid = Grid::new(nx, ny, delta, delta, origin, [periodic_x, false], solid)?;
    grid.layout = Some(TwoMediaLayout {
        epsilon: params.epsilon,
        h_requested: params.h,
        h: params.realized_h(),
        eta: params.eta,
        cells_along,
        porous_cell_rows: rows,
        n_per_cell,
        film_rows,
    });
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Medium {
    Porous,
    Film,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    Physical,
    Reference,
}

/// Cell-centered scalar field on one medium of a two-media grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellField {
    pub medium: Medium,
    pub coordinates: Coordinates,
    pub n1: usize,
    pub n2: usize,
    /// Column centers.
    pub z1: Vec<f64>,
    /// Row centers.
    pub z2: Vec<f64>,
    pub dz1: f64,
    pub dz2: f64,
    /// Row-major values, `values[j * n1 + i]`.
    pub values: Vec<f64>,
    /// `true` where the value belongs to the fluid.
    pub fluid: Vec<bool>,
}

impl CellField {
    /// Restricts a cell-centered field on a two-media grid to one medium.
    pub fn from_grid(grid: &Grid, values: &[f64], medium: Medium) -> Result<Self> {
        let layout = grid.layout.as_ref().ok_or_else(|| {
            Error::Contract("grid carries no two-media layout".into())
        })?;
        if values.len() != grid.cell_count() {
            return Err(Error::Contract(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        let rows = match medium {
            Medium::Film => 0..layout.film_rows,
            Medium::Porous => layout.film_rows..grid.ny,
        };
        let n1 = grid.nx;
        let n2 = rows.len();
        let z1 = (0..n1).map(|i| grid.cell_center(i, 0)[0]).collect();
        let z2 = rows.clone().map(|j| grid.cell_center(0, j)[1]).collect();
        let mut vals = Vec::with_capacity(n1 * n2);
        let mut fluid = Vec::with_capacity(n1 * n2);
        for j in rows {
            for i in 0..n1 {
                vals.push(values[grid.index(i, j)]);
                fluid.push(!grid.is_solid(i, j));
            }
        }
        Ok(Self {
            medium,
            coordinates: Coordinates::Physical,
            n1,
            n2,
            z1,
            z2,
            dz1: grid.dx,
            dz2: grid.dy,
            values: vals,
            fluid,
        })
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n1 + i]
    }

    #[inline]
    pub fn is_fluid(&self, i: usize, j: usize) -> bool {
        self.fluid[j * self.n1 + i]
    }

    /// Fluid-cell quadrature of `|v|^s`, raised to `1/s`.
    pub fn lr_norm(&self, s: f64) -> f64 {
        let w = self.dz1 * self.dz2;
        let sum: f64 = self
            .values
            .iter()
            .zip(&self.fluid)
            .filter(|(_, f)| **f)
            .map(|(v, _)| v.abs().powf(s))
            .sum();
        (sum * w).powf(1.0 / s)
    }

    pub fn fluid_integral(&self) -> f64 {
        let w = self.dz1 * self.dz2;
        self.values
            .iter()
            .zip(&self.fluid)
            .filter(|(_, f)| **f)
            .map(|(v, _)| v)
            .sum::<f64>()
            * w
    }

    pub fn fluid_area(&self) -> f64 {
        self.fluid.iter().filter(|f| **f).count() as f64 * self.dz1 * self.dz2
    }

    pub fn fluid_mean(&self) -> f64 {
        self.fluid_integral() / self.fluid_area()
    }

    /// Shifts values so the fluid mean vanishes.
    pub fn with_zero_mean(mut self) -> Self {
        let m = self.fluid_mean();
        for (v, f) in self.values.iter_mut().zip(&self.fluid) {
            if *f {
                *v -= m;
            }
        }
        self
    }

    pub fn map_values(mut self, f: impl Fn(f64) -> f64) -> Self {
        for v in &mut self.values {
            *v = f(*v);
        }
        self
    }
}

/// Re-expresses a physical-medium field in the dilated coordinates
/// `z₂ = x₂/h` (porous) or `z₂ = x₂/η` (film). Values are unchanged.
pub fn rescale_field(field: &CellField, medium: Medium, layout: &TwoMediaLayout) -> Result<CellField> {
    if field.medium != medium {
        return Err(Error::Contract(format!(
            "field belongs to the {:?} medium, not {:?}",
            field.medium, medium
        )));
    }
    if field.coordinates != Coordinates::Physical {
        return Err(Error::Contract("field is already in reference coordinates".into()));
    }
    let scale = match medium {
        Medium::Porous => layout.h,
        Medium::Film => layout.eta,
    };
    let mut out = field.clone();
    out.coordinates = Coordinates::Reference;
    out.z2 = field.z2.iter().map(|x| x / scale).collect();
    out.dz2 = field.dz2 / scale;
    Ok(out)
}

/// Inverse of [`rescale_field`].
pub fn unscale_field(field: &CellField, layout: &TwoMediaLayout) -> Result<CellField> {
    if field.coordinates != Coordinates::Reference {
        return Err(Error::Contract("field is already in physical coordinates".into()));
    }
    let scale = match field.medium {
        Medium::Porous => layout.h,
        Medium::Film => layout.eta,
    };
    let mut out = field.clone();
    out.coordinates = Coordinates::Physical;
    out.z2 = field.z2.iter().map(|z| z * scale).collect();
    out.dz2 = field.dz2 * scale;
    Ok(out)
}

/// Renders a shape summary used in logs and reports.
pub fn describe_grid(grid: &Grid) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{}×{} cells, spacing {:.4e}×{:.4e}, fluid fraction {:.5}",
        grid.nx,
        grid.ny,
        grid.dx,
        grid.dy,
        grid.fluid_fraction()
    );
    s
}
