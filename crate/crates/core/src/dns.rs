//! Direct simulation of the full two-media problem and comparison with the
//! homogenized Reynolds limit.
//!
//! A case solves the power-law Stokes problem on `Λ_ε`, splits the solution
//! at `Σ`, rescales each medium to its reference domain and reports
//! per-medium mean-zero pressures, velocity norms and interface traces.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{FilmProfile, ScalarFunction};
use crate::geometry::{
    build_perforated_domain_capped, CellField, Coordinates, Grid, LateralBoundary, Medium,
    ObstacleShape, PerforatedDomain, TwoMediaLayout, DEFAULT_MAX_CELLS,
};
use crate::reynolds::{FluxMode, ReynoldsProblem, ReynoldsSolution};
use crate::rheology::{conjugate_exponent, power_map, FluidModel};
use crate::scaling::{classify_regime, RegimeClass, ScalingRegime};
use crate::stokes::{self, BodyForce, SolverConfig, StokesProblem, StokesSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnsCase {
    pub regime: ScalingRegime,
    pub nu: f64,
    pub obstacle: ObstacleShape,
    pub film: FilmProfile,
    pub f1: ScalarFunction,
    pub n_per_cell: usize,
    #[serde(default)]
    pub lateral: LateralBoundary,
    pub solver: SolverConfig,
    pub max_cells: usize,
}

impl DnsCase {
    pub fn new(
        regime: ScalingRegime,
        nu: f64,
        obstacle: ObstacleShape,
        film: FilmProfile,
        f1: ScalarFunction,
        n_per_cell: usize,
    ) -> Self {
        Self {
            regime,
            nu,
            obstacle,
            film,
            f1,
            n_per_cell,
            lateral: LateralBoundary::Walls,
            solver: SolverConfig::default(),
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn with_lateral(mut self, lateral: LateralBoundary) -> Self {
        self.lateral = lateral;
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    pub fn domain(&self) -> Result<PerforatedDomain> {
        Ok(PerforatedDomain::new(
            self.regime.epsilon,
            self.regime.h,
            self.regime.eta,
            self.obstacle.clone(),
            self.film.clone(),
        )?
        .with_lateral(self.lateral))
    }

    pub fn validate(&self) -> Result<()> {
        let c = classify_regime(self.regime.epsilon, self.regime.h, self.regime.eta, self.regime.r)?;
        if c.class != RegimeClass::Critical {
            return Err(Error::Regime(format!(
                "case is {:?} (λ_est = {:.4}), not critical",
                c.class, c.lambda_est
            )));
        }
        self.f1.validate()?;
        self.solver.validate()?;
        FluidModel::new(self.regime.r, self.nu, 0.0)?;
        self.domain().map(|_| ())
    }

    /// Flux condition of the matching Reynolds limit.
    pub fn limit_flux_mode(&self) -> FluxMode {
        limit_flux_mode(self.lateral)
    }
}

pub fn limit_flux_mode(lateral: LateralBoundary) -> FluxMode {
    match lateral {
        LateralBoundary::Walls => FluxMode::PaperZeroFlux,
        LateralBoundary::Periodic => FluxMode::PressureDrop {
            delta_p: 0.0,
            initial_bracket: 1.0,
        },
    }
}

/// Parameters a Reynolds limit must share with a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitParameters {
    pub f1: ScalarFunction,
    pub film: FilmProfile,
    pub r: f64,
    pub nu: f64,
    pub lambda: f64,
    pub lateral: LateralBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DnsNorms {
    /// `‖ṽ_ε‖_{L^r(Ω̃)}`.
    pub porous_velocity: f64,
    /// `‖𝔻_{h_ε}[ṽ_ε]‖_{L^r(Ω̃)}`.
    pub porous_strain: f64,
    /// `‖𝒰̃_ε‖_{L^r(Ĩ₁)}`.
    pub film_velocity: f64,
    /// `‖𝔻_{η_ε}[𝒰̃_ε]‖_{L^r(Ĩ₁)}`.
    pub film_strain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTraces {
    pub z1: Vec<f64>,
    /// Global-gauge pressure in the first porous row (NaN under an obstacle).
    pub porous: Vec<f64>,
    /// Global-gauge pressure in the last film row.
    pub film: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub momentum_rel: f64,
    pub div_max: f64,
    /// `|dissipation − work| / |work|` (0 when both vanish).
    pub energy_gap: f64,
    /// Largest `|u|` on faces touching an obstacle or the outer boundary.
    pub boundary_velocity_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnsReport {
    pub epsilon: f64,
    pub h_requested: f64,
    /// Realized porous thickness (whole cell rows).
    pub h: f64,
    pub eta: f64,
    pub lambda_est: f64,
    pub n_per_cell: usize,
    pub grid_cells: [usize; 2],
    pub params: LimitParameters,
    /// `P̃¹_ε`, mean-zero over the porous fluid cells.
    pub porous_pressure: CellField,
    /// `P̃²_ε`, mean-zero over the film fluid cells.
    pub film_pressure: CellField,
    /// Global-gauge fluid means of the pressure in each medium (`c̃_ε` for the film).
    pub porous_mean: f64,
    pub film_mean: f64,
    pub norms: DnsNorms,
    pub traces: InterfaceTraces,
    pub solve: SolveSummary,
}

/// Full output of a case: the report plus the raw solve.
#[derive(Debug, Clone)]
pub struct DnsRun {
    pub report: DnsReport,
    pub problem: StokesProblem,
    pub solution: StokesSolution,
}

pub fn run_dns(case: &DnsCase) -> Result<DnsRun> {
    case.validate()?;
    let domain = case.domain()?;
    let grid = build_perforated_domain_capped(&domain, case.n_per_cell, case.max_cells)?;
    let model = FluidModel::with_default_regularization(case.regime.r, case.nu)?;
    let problem = StokesProblem::new(
        grid,
        model,
        BodyForce::Horizontal { f1: case.f1.clone() },
    );
    let solution = stokes::solve_stokes(&problem, &case.solver)?;
    let report = build_report(case, &problem, &solution)?;
    Ok(DnsRun {
        report,
        problem,
        solution,
    })
}

fn layout_of(grid: &Grid) -> Result<&TwoMediaLayout> {
    grid.layout
        .as_ref()
        .ok_or_else(|| Error::Contract("grid carries no two-media layout".into()))
}

fn build_report(case: &DnsCase, problem: &StokesProblem, sol: &StokesSolution) -> Result<DnsReport> {
    let grid = &problem.grid;
    let layout = layout_of(grid)?;
    let r = case.regime.r;

    let porous_p = medium_pressure(grid, &sol.pressure, Medium::Porous, layout)?;
    let film_p = medium_pressure(grid, &sol.pressure, Medium::Film, layout)?;
    let porous_mean = porous_p.fluid_mean();
    let film_mean = film_p.fluid_mean();

    let vel = stokes::cell_velocity(problem, sol)?;
    let strain = stokes::strain_rate_squared(problem, sol)?;
    let area = grid.cell_area();
    let mut acc = [0.0f64; 4];
    for j in 0..grid.ny {
        let k = match layout.medium_of_row(j) {
            Medium::Porous => 0,
            Medium::Film => 2,
        };
        for i in 0..grid.nx {
            let c = grid.index(i, j);
            let speed = vel[c][0].hypot(vel[c][1]);
            acc[k] += speed.powf(r) * area;
            acc[k + 1] += strain[c].powf(0.5 * r) * area;
        }
    }
    // dz₂ = dx₂ / h (porous) or dx₂ / η (film)
    let norms = DnsNorms {
        porous_velocity: (acc[0] / layout.h).powf(1.0 / r),
        porous_strain: (acc[1] / layout.h).powf(1.0 / r),
        film_velocity: (acc[2] / layout.eta).powf(1.0 / r),
        film_strain: (acc[3] / layout.eta).powf(1.0 / r),
    };

    let top_film = layout.film_rows - 1;
    let bottom_porous = layout.film_rows;
    let trace = |j: usize| -> Vec<f64> {
        (0..grid.nx)
            .map(|i| {
                if grid.is_solid(i, j) {
                    f64::NAN
                } else {
                    sol.pressure[grid.index(i, j)]
                }
            })
            .collect()
    };
    let traces = InterfaceTraces {
        z1: (0..grid.nx).map(|i| grid.cell_center(i, 0)[0]).collect(),
        porous: trace(bottom_porous),
        film: trace(top_film),
    };

    let w = stokes::work(problem, sol)?;
    let d = stokes::dissipation(problem, sol)?;
    let energy_gap = if w == 0.0 && d == 0.0 {
        0.0
    } else {
        (d - w).abs() / w.abs()
    };

    Ok(DnsReport {
        epsilon: layout.epsilon,
        h_requested: layout.h_requested,
        h: layout.h,
        eta: layout.eta,
        lambda_est: classify_regime(layout.epsilon, layout.h, layout.eta, r)?.lambda_est,
        n_per_cell: layout.n_per_cell,
        grid_cells: [grid.nx, grid.ny],
        params: LimitParameters {
            f1: case.f1.clone(),
            film: case.film.clone(),
            r,
            nu: case.nu,
            lambda: case.regime.lambda,
            lateral: case.lateral,
        },
        porous_pressure: porous_p.with_zero_mean(),
        film_pressure: film_p.with_zero_mean(),
        porous_mean,
        film_mean,
        norms,
        traces,
        solve: SolveSummary {
            iterations: sol.diagnostics.iterations,
            momentum_rel: sol.diagnostics.momentum_rel,
            div_max: sol.diagnostics.div_max,
            energy_gap,
            boundary_velocity_max: boundary_velocity_max(grid, sol),
        },
    })
}

fn medium_pressure(grid: &Grid, p: &[f64], medium: Medium, layout: &TwoMediaLayout) -> Result<CellField> {
    let field = CellField::from_grid(grid, p, medium)?;
    let mut scaled = crate::geometry::rescale_field(&field, medium, layout)?;
    for (v, f) in scaled.values.iter_mut().zip(&scaled.fluid) {
        if !*f {
            *v = 0.0;
        }
    }
    Ok(scaled)
}

/// Largest speed on held faces, read straight from the face arrays.
pub fn boundary_velocity_max(grid: &Grid, sol: &StokesSolution) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    let [px, py] = grid.periodic;
    let nux = if px { nx } else { nx + 1 };
    let nvy = if py { ny } else { ny + 1 };
    let mut worst = 0.0f64;
    for j in 0..ny {
        for i in 0..nux {
            let held = if !px && (i == 0 || i == nx) {
                true
            } else {
                let left = (i + nx - 1) % nx;
                grid.is_solid(left, j) || grid.is_solid(i % nx, j)
            };
            if held {
                worst = worst.max(sol.u1[j * nux + i].abs());
            }
        }
    }
    for j in 0..nvy {
        for i in 0..nx {
            let held = if !py && (j == 0 || j == ny) {
                true
            } else {
                let below = (j + ny - 1) % ny;
                grid.is_solid(i, below) || grid.is_solid(i, j % ny)
            };
            if held {
                worst = worst.max(sol.u2[j * nx + i].abs());
            }
        }
    }
    worst
}

/// Builds the homogenized limit matching a case.
pub fn limit_problem(case: &DnsCase, mu: f64) -> Result<ReynoldsProblem> {
    ReynoldsProblem::new(
        case.f1.clone(),
        case.film.clone(),
        mu,
        case.nu,
        conjugate_exponent(case.regime.r)?,
        case.regime.lambda,
        case.limit_flux_mode(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `min_c ‖P̃¹_ε − p⋆ − c‖_{L^{r′}(Ω̃)}` over fluid cells.
    pub porous_distance: f64,
    /// `min_c ‖P̃²_ε − p⋆ − c‖_{L^{r′}(Ĩ₁)}` over fluid cells.
    pub film_distance: f64,
    /// Optimal shifts in the global pressure gauge.
    pub porous_shift: f64,
    pub film_shift: f64,
    /// `|ĉ₁ − ĉ₂|`.
    pub interface_jump: f64,
    /// `‖p⋆‖_{L^{r′}(ω)}`, for scale.
    pub limit_norm: f64,
}

fn check_params(report: &DnsReport, problem: &ReynoldsProblem) -> Result<()> {
    let p = &report.params;
    let mut bad = Vec::new();
    if p.f1 != problem.f1 {
        bad.push("f1");
    }
    if p.film != problem.film {
        bad.push("film profile");
    }
    let rc = conjugate_exponent(p.r)?;
    if (rc - problem.r_conj).abs() > 1e-12 * rc {
        bad.push("flow index");
    }
    if (p.nu - problem.nu).abs() > 1e-12 * p.nu {
        bad.push("consistency");
    }
    if (p.lambda - problem.lambda).abs() > 1e-12 * p.lambda {
        bad.push("lambda");
    }
    let expected = limit_flux_mode(p.lateral);
    let same_mode = match (expected, problem.flux_mode) {
        (FluxMode::PaperZeroFlux, FluxMode::PaperZeroFlux) => true,
        (FluxMode::PressureDrop { delta_p: a, .. }, FluxMode::PressureDrop { delta_p: b, .. }) => a == b,
        _ => false,
    };
    if !same_mode {
        bad.push("flux mode");
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "report and limit disagree on: {}",
            bad.join(", ")
        )))
    }
}

/// Weighted `L^p` fit of a constant: returns `(argmin_c, min value)` of
/// `(Σ w |dᵢ − c|^p)^{1/p}`.
pub fn optimal_shift(d: &[f64], w: &[f64], p: f64) -> (f64, f64) {
    if d.is_empty() {
        return (0.0, 0.0);
    }
    let norm = |c: f64| {
        d.iter()
            .zip(w)
            .map(|(x, wi)| wi * (x - c).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let c = if p == 2.0 {
        d.iter().zip(w).map(|(x, wi)| x * wi).sum::<f64>() / w.iter().sum::<f64>()
    } else {
        // Σ w A_p(dᵢ − c) is decreasing in c
        let slope = |c: f64| d.iter().zip(w).map(|(x, wi)| wi * power_map(x - c, p)).sum::<f64>();
        let mut lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (c, norm(c))
}

fn medium_distance(field: &CellField, offset: f64, limit: &ReynoldsSolution, p: f64) -> (f64, f64) {
    let w0 = field.dz1 * field.dz2;
    let mut d = Vec::new();
    for j in 0..field.n2 {
        for i in 0..field.n1 {
            if field.is_fluid(i, j) {
                d.push(field.value(i, j) + offset - limit.pressure_at(field.z1[i]));
            }
        }
    }
    let w = vec![w0; d.len()];
    optimal_shift(&d, &w, p)
}

pub fn compare_to_homogenized(
    report: &DnsReport,
    problem: &ReynoldsProblem,
    limit: &ReynoldsSolution,
) -> Result<Comparison> {
    check_params(report, problem)?;
    let p = problem.r_conj;
    let (c1, d1) = medium_distance(&report.porous_pressure, report.porous_mean, limit, p);
    let (c2, d2) = medium_distance(&report.film_pressure, report.film_mean, limit, p);
    let dz = limit.z[1] - limit.z[0];
    let limit_norm = (limit
        .pressure
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i + 1 == limit.pressure.len() { 0.5 } else { 1.0 };
            w * v.abs().powf(p)
        })
        .sum::<f64>()
        * dz)
        .powf(1.0 / p);
    Ok(Comparison {
        porous_distance: d1,
        film_distance: d2,
        porous_shift: c1,
        film_shift: c2,
        interface_jump: (c1 - c2).abs(),
        limit_norm,
    })
}

/// Least-squares slope of `log(norm)` against `log(ε)`.
pub fn fit_scaling_exponent(values: &[(f64, f64)]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Input(format!(
            "need at least two points to fit an exponent (got {})",
            values.len()
        )));
    }
    if values.iter().any(|(e, v)| !(*e > 0.0 && *v > 0.0)) {
        return Err(Error::Input("exponent fit needs positive ε and norms".into()));
    }
    let pts: Vec<(f64, f64)> = values.iter().map(|(e, v)| (e.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("exponent fit needs distinct ε values".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub epsilon: f64,
    pub h: f64,
    pub eta: f64,
    pub lambda_est: f64,
    pub grid_cells: [usize; 2],
    pub norms: DnsNorms,
    pub comparison: Comparison,
    pub energy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub mu: f64,
    /// Fitted exponents of the porous norms in `ε` and the film norms in `η`.
    pub fitted: Option<FittedExponents>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedExponents {
    pub porous_velocity_in_eps: f64,
    pub porous_strain_in_eps: f64,
    pub film_velocity_in_eta: f64,
    pub film_strain_in_eta: f64,
}

/// Runs the cases on up to `jobs` threads; rows come back sorted by
/// decreasing `ε`.
pub fn run_study(cases: &[DnsCase], mu: f64, jobs: usize) -> Result<(StudyReport, Vec<DnsRun>)> {
    if cases.is_empty() {
        return Err(Error::Input("study has no cases".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<(StudyRow, DnsRun)>> = pool.install(|| {
        cases
            .par_iter()
            .map(|case| {
                let run = run_dns(case)?;
                let problem = limit_problem(case, mu)?;
                let limit = crate::reynolds::solve_reynolds(&problem)?;
                let cmp = compare_to_homogenized(&run.report, &problem, &limit)?;
                let r = &run.report;
                let row = StudyRow {
                    epsilon: r.epsilon,
                    h: r.h,
                    eta: r.eta,
                    lambda_est: r.lambda_est,
                    grid_cells: r.grid_cells,
                    norms: r.norms,
                    comparison: cmp,
                    energy_gap: r.solve.energy_gap,
                };
                Ok((row, run))
            })
            .collect()
    });
    let mut pairs = results.into_iter().collect::<Result<Vec<_>>>()?;
    pairs.sort_by(|a, b| b.0.epsilon.total_cmp(&a.0.epsilon));
    let (rows, runs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let fitted = fit_all(&rows).ok();
    Ok((StudyReport { rows, mu, fitted }, runs))
}

fn fit_all(rows: &[StudyRow]) -> Result<FittedExponents> {
    let by_eps = |f: fn(&DnsNorms) -> f64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.epsilon, f(&r.norms))).collect()
    };
    let by_eta = |f: fn(&DnsNorms) -> f64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.eta, f(&r.norms))).collect()
    };
    Ok(FittedExponents {
        porous_velocity_in_eps: fit_scaling_exponent(&by_eps(|n| n.porous_velocity))?,
        porous_strain_in_eps: fit_scaling_exponent(&by_eps(|n| n.porous_strain))?,
        film_velocity_in_eta: fit_scaling_exponent(&by_eta(|n| n.film_velocity))?,
        film_strain_in_eta: fit_scaling_exponent(&by_eta(|n| n.film_strain))?,
    })
}

/// Writes `medium,z1,z2,p` for the rescaled pressures of a report.
pub fn write_pressure_csv<W: Write>(report: &DnsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["medium", "z1", "z2", "p"])?;
    for (name, field) in [("film", &report.film_pressure), ("porous", &report.porous_pressure)] {
        debug_assert_eq!(field.coordinates, Coordinates::Reference);
        for j in 0..field.n2 {
            for i in 0..field.n1 {
                if !field.is_fluid(i, j) {
                    continue;
                }
                w.write_record(&[
                    name.to_string(),
                    format!("{:.12e}", field.z1[i]),
                    format!("{:.12e}", field.z2[j]),
                    format!("{:.12e}", field.value(i, j)),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `z1,p_porous,p_film` along `Σ`.
pub fn write_trace_csv<W: Write>(report: &DnsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z1", "p_porous", "p_film"])?;
    let t = &report.traces;
    for i in 0..t.z1.len() {
        w.write_record(&[
            format!("{:.12e}", t.z1[i]),
            format!("{:.12e}", t.porous[i]),
            format!("{:.12e}", t.film[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one line per study row.
pub fn write_study_csv<W: Write>(study: &StudyReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "epsilon",
        "h",
        "eta",
        "lambda_est",
        "nx",
        "ny",
        "porous_velocity",
        "porous_strain",
        "film_velocity",
        "film_strain",
        "porous_distance",
        "film_distance",
        "interface_jump",
        "energy_gap",
    ])?;
    for r in &study.rows {
        let n = &r.norms;
        let c = &r.comparison;
        let mut rec = vec![
            format!("{:.12e}", r.epsilon),
            format!("{:.12e}", r.h),
            format!("{:.12e}", r.eta),
            format!("{:.12e}", r.lambda_est),
            r.grid_cells[0].to_string(),
            r.grid_cells[1].to_string(),
        ];
        for v in [
            n.porous_velocity,
            n.porous_strain,
            n.film_velocity,
            n.film_strain,
            c.porous_distance,
            c.film_distance,
            c.interface_jump,
            r.energy_gap,
        ] {
            rec.push(format!("{v:.12e}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_fit() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|e| (*e, e * e)).collect();
        assert!((fit_scaling_exponent(&pts).unwrap() - 2.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [0.5, 0.25].iter().map(|e| (*e, 3.0)).collect();
        assert!(fit_scaling_exponent(&flat).unwrap().abs() < 1e-12);
        assert!(matches!(fit_scaling_exponent(&pts[..1]), Err(Error::Input(_))));
    }

    #[test]
    fn shift_fit() {
        let d = [1.0, 2.0, 4.0];
        let w = [1.0, 1.0, 2.0];
        let (c, _) = optimal_shift(&d, &w, 2.0);
        assert!((c - 11.0 / 4.0).abs() < 1e-14);
        let (c3, v3) = optimal_shift(&d, &w, 3.0);
        for t in [c3 - 1e-4, c3 + 1e-4] {
            let v: f64 = d.iter().zip(&w).map(|(x, wi)| wi * (x - t).abs().powi(3)).sum::<f64>().cbrt();
            assert!(v >= v3);
        }
        let (c, v) = optimal_shift(&[5.0, 5.0], &[1.0, 1.0], 1.5);
        assert!((c - 5.0).abs() < 1e-12 && v < 1e-8);
    }
}
