//! Periodic cell problem and permeability.
//!
//! The cell velocity solves the power-law Stokes problem on `Y_f` with unit
//! consistency, driven by `e₁`, periodic on `∂Y` and no-slip on the obstacle.
//! The permeability follows either as the flux `∫ ŵ₁` or as the energy
//! `∫ |𝔻ŵ|^r`; the two agree on converged discrete solutions.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_unit_cell_grid, unit_cell_mask, UnitCell};
use crate::rheology::{FluidModel, DEFAULT_SHEAR_THINNING_DELTA};
use crate::stokes::{self, BodyForce, SolverConfig, StokesProblem, StokesSolution};

pub const MIN_CELL_SOLVE_RESOLUTION: usize = 32;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "THINPORE_CACHE_DIR";

const CACHE_FILE: &str = "cell_cache.json";

#[derive(Debug, Clone)]
pub struct CellSolution {
    pub problem: StokesProblem,
    pub velocity: StokesSolution,
    pub resolution: usize,
    pub mu_flux: f64,
    pub mu_energy: f64,
}

impl CellSolution {
    pub fn flow_index(&self) -> f64 {
        self.problem.model.flow_index()
    }

    /// `∫_{Y_f} ŵ₂`.
    pub fn transverse_mean(&self) -> f64 {
        self.velocity.u2.iter().sum::<f64>() * self.problem.grid.cell_area()
    }
}

/// Default regularization for the cell solve at flow index `r`.
pub fn default_delta(r: f64) -> f64 {
    if r < 2.0 {
        DEFAULT_SHEAR_THINNING_DELTA
    } else {
        0.0
    }
}

pub fn solve_cell(cell: &UnitCell, r: f64, n: usize, cfg: &SolverConfig) -> Result<CellSolution> {
    solve_cell_with(cell, r, default_delta(r), n, 1.0, cfg)
}

/// Cell solve with explicit regularization and force amplitude `c` (force `c e₁`).
pub fn solve_cell_with(
    cell: &UnitCell,
    r: f64,
    delta: f64,
    n: usize,
    amplitude: f64,
    cfg: &SolverConfig,
) -> Result<CellSolution> {
    let model = FluidModel::new(r, 1.0, delta)?;
    if n < MIN_CELL_SOLVE_RESOLUTION {
        return Err(Error::Geometry(format!(
            "cell solves need n ≥ {MIN_CELL_SOLVE_RESOLUTION} (got {n})"
        )));
    }
    if unit_cell_mask(cell.obstacle(), n).iter().all(|s| !*s) {
        return Err(Error::Incompatible(
            "the cell has no obstacle at this resolution: the driving force cannot be balanced".into(),
        ));
    }
    let grid = build_unit_cell_grid(cell, n)?;
    let problem = StokesProblem::new(grid, model, BodyForce::Uniform { value: [amplitude, 0.0] });
    let velocity = stokes::solve_stokes(&problem, cfg)?;
    let mut sol = CellSolution {
        problem,
        velocity,
        resolution: n,
        mu_flux: 0.0,
        mu_energy: 0.0,
    };
    sol.mu_flux = permeability_flux(&sol);
    sol.mu_energy = permeability_energy(&sol, r)?;
    Ok(sol)
}

/// `∫_{Y_f} ŵ₁ dy`, each `u₁` face carrying one cell of area.
pub fn permeability_flux(sol: &CellSolution) -> f64 {
    sol.velocity.u1.iter().sum::<f64>() * sol.problem.grid.cell_area()
}

/// `∫_{Y_f} |𝔻ŵ|^r dy`.
pub fn permeability_energy(sol: &CellSolution, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("flow index must exceed 1 (got {r})")));
    }
    let s = stokes::strain_rate_squared(&sol.problem, &sol.velocity)?;
    Ok(s.iter().map(|v| v.powf(0.5 * r)).sum::<f64>() * sol.problem.grid.cell_area())
}

/// Cached outcome of one cell solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Permeability {
    pub mu_flux: f64,
    pub mu_energy: f64,
    pub flow_index: f64,
    pub resolution: usize,
    pub regularization: f64,
    pub iterations: usize,
    pub momentum_rel: f64,
    pub div_max: f64,
}

impl Permeability {
    fn from_solution(sol: &CellSolution) -> Self {
        let d = &sol.velocity.diagnostics;
        Self {
            mu_flux: sol.mu_flux,
            mu_energy: sol.mu_energy,
            flow_index: sol.flow_index(),
            resolution: sol.resolution,
            regularization: sol.problem.model.regularization(),
            iterations: d.iterations,
            momentum_rel: d.momentum_rel,
            div_max: d.div_max,
        }
    }

    pub fn relative_gap(&self) -> f64 {
        (self.mu_flux - self.mu_energy).abs() / self.mu_flux.abs()
    }
}

pub fn cache_key(cell: &UnitCell, r: f64, n: usize, delta: f64, cfg: &SolverConfig) -> String {
    format!(
        "{}|r={r:?}|n={n}|delta={delta:e}|tol_momentum={:e}|tol_div={:e}",
        cell.obstacle().shape_hash(),
        cfg.tol_momentum,
        cfg.tol_div
    )
}

/// Permeability cache persisted as a JSON map next to the outputs.
///
/// Lookups take a shared lock; inserts take the exclusive lock and commit the
/// whole map through a temporary file and an atomic rename.
#[derive(Debug)]
pub struct CellCache {
    path: Option<PathBuf>,
    entries: RwLock<BTreeMap<String, Permeability>>,
    commit: Mutex<()>,
    hits: AtomicUsize,
    solves: AtomicUsize,
}

impl CellCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            entries: RwLock::new(BTreeMap::new()),
            commit: Mutex::new(()),
            hits: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
        }
    }

    /// Opens (or starts) the cache file inside `dir`.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let entries = if path.exists() {
            let text = fs::read_to_string(&path)?;
            serde_json::from_str(&text)?
        } else {
            BTreeMap::new()
        };
        Ok(Self {
            path: Some(path),
            entries: RwLock::new(entries),
            commit: Mutex::new(()),
            hits: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
        })
    }

    /// Directory from the environment override, else `fallback`.
    pub fn directory(fallback: &Path) -> PathBuf {
        std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| fallback.to_path_buf())
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.entries.read().map(|e| e.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Permeability> {
        self.entries.read().ok()?.get(key).cloned()
    }

    pub fn get_or_solve(
        &self,
        cell: &UnitCell,
        r: f64,
        delta: f64,
        n: usize,
        cfg: &SolverConfig,
    ) -> Result<Permeability> {
        let key = cache_key(cell, r, n, delta, cfg);
        if let Some(hit) = self.get(&key) {
            self.hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        let sol = solve_cell_with(cell, r, delta, n, 1.0, cfg)?;
        self.solves.fetch_add(1, Ordering::SeqCst);
        let value = Permeability::from_solution(&sol);
        self.insert(key, value.clone())?;
        Ok(value)
    }

    fn insert(&self, key: String, value: Permeability) -> Result<()> {
        let _guard = self
            .commit
            .lock()
            .map_err(|_| Error::Resource("cache commit lock poisoned".into()))?;
        let snapshot = {
            let mut map = self
                .entries
                .write()
                .map_err(|_| Error::Resource("cache lock poisoned".into()))?;
            map.insert(key, value);
            serde_json::to_string_pretty(&*map)?
        };
        if let Some(path) = &self.path {
            let tmp = path.with_extension("json.tmp");
            fs::write(&tmp, snapshot)?;
            fs::rename(&tmp, path)?;
        }
        Ok(())
    }
}
