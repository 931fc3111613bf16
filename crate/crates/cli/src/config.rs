//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinpore_core::functions::{FilmProfile, ScalarFunction};
use thinpore_core::geometry::{LateralBoundary, ObstacleShape, UnitCell, DEFAULT_MAX_CELLS};
use thinpore_core::reynolds::{FilmTerm, FluxMode, ReynoldsProblem, DEFAULT_NODES};
use thinpore_core::rheology::{conjugate_exponent, FluidModel};
use thinpore_core::scaling::{regime_sequence, ScalingRegime, DEFAULT_MIN_SEPARATION};
use thinpore_core::stokes::SolverConfig;

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fluid: FluidSection,
    #[serde(default)]
    pub cell: CellSection,
    #[serde(default)]
    pub film: FilmSection,
    #[serde(default)]
    pub reynolds: ReynoldsSection,
    #[serde(default)]
    pub regime: RegimeSection,
    #[serde(default)]
    pub dns: DnsSection,
    #[serde(default)]
    pub unfold: UnfoldSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSection {
    pub r: f64,
    #[serde(default = "one")]
    pub nu: f64,
    /// Regularization of the cell solve; defaults by flow index.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub obstacle: ObstacleShape,
    pub resolution: usize,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            obstacle: ObstacleShape::Disk {
                center: [0.0, 0.0],
                radius: 0.25,
            },
            resolution: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilmSection {
    pub g: ScalarFunction,
    pub a: f64,
    pub b: f64,
}

impl Default for FilmSection {
    fn default() -> Self {
        Self {
            g: ScalarFunction::constant(1.0),
            a: 1.0,
            b: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReynoldsSection {
    pub f1: ScalarFunction,
    pub flux_mode: FluxMode,
    pub nodes: usize,
    pub film_term: FilmTerm,
    /// Uses this permeability instead of solving the cell problem.
    pub mu: Option<f64>,
}

impl Default for ReynoldsSection {
    fn default() -> Self {
        Self {
            f1: ScalarFunction::constant(1.0),
            flux_mode: FluxMode::PaperZeroFlux,
            nodes: DEFAULT_NODES,
            film_term: FilmTerm::MeanVelocity,
            mu: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeSection {
    pub lambda: f64,
    pub epsilon: Vec<f64>,
    pub eta_exponent: Option<f64>,
    pub min_separation: f64,
}

impl Default for RegimeSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            epsilon: vec![0.125, 0.0625],
            eta_exponent: None,
            min_separation: DEFAULT_MIN_SEPARATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DnsSection {
    pub enabled: bool,
    pub resolution: usize,
    pub max_cells: usize,
    pub lateral: LateralBoundary,
}

impl Default for DnsSection {
    fn default() -> Self {
        Self {
            enabled: false,
            resolution: 32,
            max_cells: DEFAULT_MAX_CELLS,
            lateral: LateralBoundary::Walls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnfoldSection {
    pub s: Vec<f64>,
    pub resolution: usize,
    pub seed: u64,
}

impl Default for UnfoldSection {
    fn default() -> Self {
        Self {
            s: vec![1.5, 2.0, 3.0],
            resolution: 16,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Parsed configuration plus the module-level values it describes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub cell: UnitCell,
    pub film: FilmProfile,
}

fn at(path: &str) -> impl Fn(thinpore_core::Error) -> Failure + '_ {
    move |e| Failure::config(path, e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new("io", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(self) -> Result<Resolved, Failure> {
        let f = &self.fluid;
        if !(f.r > 1.0) || !f.r.is_finite() {
            return Err(Failure::config("fluid.r", format!("flow_index must exceed 1 (got {})", f.r)));
        }
        FluidModel::new(f.r, f.nu, 0.0).map_err(at("fluid.nu"))?;
        if let Some(d) = f.delta {
            if !(d >= 0.0) {
                return Err(Failure::config("fluid.delta", format!("regularization must be non-negative (got {d})")));
            }
        }
        if let Some(mu) = self.reynolds.mu {
            if !(mu > 0.0) {
                return Err(Failure::config("reynolds.mu", format!("mu must be positive (got {mu})")));
            }
        }
        let cell = UnitCell::new(self.cell.obstacle.clone()).map_err(at("cell.obstacle"))?;
        let film = FilmProfile::new(self.film.g.clone(), self.film.a, self.film.b).map_err(at("film"))?;
        self.reynolds.f1.validate().map_err(at("reynolds.f1"))?;
        self.solver.validate().map_err(at("solver"))?;
        if self.unfold.s.iter().any(|s| !(*s >= 1.0)) {
            return Err(Failure::config("unfold.s", "exponents must be at least 1"));
        }
        if self.output.formats.is_empty() {
            return Err(Failure::config("output.formats", "at least one format is required"));
        }
        let resolved = Resolved {
            raw: self,
            cell,
            film,
        };
        resolved.reynolds_problem(1.0).map_err(|f| f.with_path("reynolds"))?;
        Ok(resolved)
    }
}

impl Resolved {
    pub fn r(&self) -> f64 {
        self.raw.fluid.r
    }

    pub fn delta(&self) -> f64 {
        self.raw
            .fluid
            .delta
            .unwrap_or_else(|| thinpore_core::cell_problem::default_delta(self.r()))
    }

    pub fn reynolds_problem(&self, mu: f64) -> Result<ReynoldsProblem, Failure> {
        let rs = &self.raw.reynolds;
        let rc = conjugate_exponent(self.r()).map_err(at("fluid.r"))?;
        let p = ReynoldsProblem::new(
            rs.f1.clone(),
            self.film.clone(),
            mu,
            self.raw.fluid.nu,
            rc,
            self.raw.regime.lambda,
            rs.flux_mode,
        )
        .map_err(at("reynolds"))?
        .with_nodes(rs.nodes)
        .map_err(at("reynolds.nodes"))?
        .with_film_term(rs.film_term);
        Ok(p)
    }

    pub fn regimes(&self) -> Result<Vec<ScalingRegime>, Failure> {
        let g = &self.raw.regime;
        regime_sequence(self.r(), g.lambda, &g.epsilon, g.eta_exponent, g.min_separation)
            .map_err(|e| Failure::from_core(e).with_path("regime"))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.raw.output.formats.contains(&f)
    }
}
