//! Subcommand implementations. Every command writes its artifacts into the
//! output directory and returns the list of files it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thinpore_core::cell_problem::{CellCache, Permeability};
use thinpore_core::dns::{
    compare_to_homogenized, limit_problem, run_dns, run_study, write_pressure_csv, write_study_csv,
    write_trace_csv, Comparison, DnsCase, DnsNorms, StudyReport,
};
use thinpore_core::reynolds::{
    darcy_velocity, film_average_velocity, film_velocity_profile, solve_reynolds, weak_form_residual,
    write_reynolds_csv, ReynoldsProblem, ReynoldsSolution,
};
use thinpore_core::scaling::{
    classify_regime, predicted_exponents, predicted_exponents_exact, rational_flow_index, ExponentTable,
    RegimeClass, ScalingRegime,
};
use thinpore_core::unfolding::{aligned_band, verify_norm_identities, NormReport};

use crate::config::{Format, Resolved};
use crate::failure::Failure;
use crate::svg::{plot, Axes, Series};

/// Number of evenly spaced `p*` samples recorded in JSON outputs.
const PRESSURE_SAMPLES: usize = 11;

pub struct Context {
    pub cfg: Resolved,
    pub out: PathBuf,
    pub jobs: usize,
    pub cache: CellCache,
    pub written: Vec<PathBuf>,
}

impl Context {
    pub fn new(cfg: Resolved, out: PathBuf, jobs: usize) -> Result<Self, Failure> {
        fs::create_dir_all(&out)?;
        let cache = CellCache::open(&CellCache::directory(&out))?;
        Ok(Self {
            cfg,
            out,
            jobs: jobs.max(1),
            cache,
            written: Vec::new(),
        })
    }

    fn csv_enabled(&self) -> bool {
        // plots always come with their data
        self.cfg.wants(Format::Csv) || self.cfg.wants(Format::Svg)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.written.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        if self.cfg.wants(Format::Json) {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            fs::write(self.path(name), text)?;
        }
        Ok(())
    }

    fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(fs::File) -> thinpore_core::Result<()>,
    ) -> Result<(), Failure> {
        if self.csv_enabled() {
            let file = fs::File::create(self.path(name))?;
            write(file)?;
        }
        Ok(())
    }

    fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), Failure> {
        self.csv(name, |f| {
            let mut w = csv::Writer::from_writer(f);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    fn svg(&mut self, name: &str, content: impl FnOnce() -> String) -> Result<(), Failure> {
        if self.cfg.wants(Format::Svg) {
            fs::write(self.path(name), content())?;
        }
        Ok(())
    }

    pub fn relative(&self, p: &Path) -> String {
        p.strip_prefix(&self.out).unwrap_or(p).display().to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PermeabilityOut {
    pub r: f64,
    pub resolution: usize,
    pub regularization: f64,
    pub shape_hash: String,
    pub fluid_fraction: f64,
    pub mu_flux: f64,
    pub mu_energy: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub momentum_rel: f64,
    pub div_max: f64,
}

fn cell_permeability(ctx: &Context, n: usize) -> Result<Permeability, Failure> {
    let c = &ctx.cfg;
    ctx.cache
        .get_or_solve(&c.cell, c.r(), c.delta(), n, &c.raw.solver)
        .map_err(|e| Failure::from_core(e).with_path("cell"))
}

pub fn permeability(ctx: &mut Context) -> Result<PermeabilityOut, Failure> {
    let n = ctx.cfg.raw.cell.resolution;
    let p = cell_permeability(ctx, n)?;
    let out = PermeabilityOut {
        r: p.flow_index,
        resolution: p.resolution,
        regularization: p.regularization,
        shape_hash: ctx.cfg.cell.obstacle().shape_hash(),
        fluid_fraction: ctx.cfg.cell.fluid_fraction(),
        mu_flux: p.mu_flux,
        mu_energy: p.mu_energy,
        relative_gap: p.relative_gap(),
        iterations: p.iterations,
        momentum_rel: p.momentum_rel,
        div_max: p.div_max,
    };
    ctx.json("permeability.json", &out)?;
    ctx.rows("permeability.csv", std::slice::from_ref(&out))?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PressureSample {
    pub z1: f64,
    pub p_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReynoldsOut {
    pub mu: f64,
    pub q0: f64,
    pub bisection_steps: usize,
    pub weak_form_residual: f64,
    pub p_star: Vec<PressureSample>,
    pub v_av_max: f64,
    pub vfilm_av_max: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ProfileRow {
    z1: f64,
    z2: f64,
    u1: f64,
}

pub fn reynolds(ctx: &mut Context, mu: f64) -> Result<(ReynoldsOut, ReynoldsProblem, ReynoldsSolution), Failure> {
    let problem = ctx.cfg.reynolds_problem(mu)?;
    let sol = solve_reynolds(&problem).map_err(|e| Failure::from_core(e).with_path("reynolds"))?;
    let darcy = darcy_velocity(&sol, &problem);
    let film = film_average_velocity(&sol, &problem);
    let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let p_star = (0..PRESSURE_SAMPLES)
        .map(|k| {
            let z1 = (2 * k) as f64 / (2 * (PRESSURE_SAMPLES - 1)) as f64 - 0.5;
            PressureSample {
                z1,
                p_star: sol.pressure_at(z1),
            }
        })
        .collect();
    let out = ReynoldsOut {
        mu,
        q0: sol.q0,
        bisection_steps: sol.bisection_steps,
        weak_form_residual: weak_form_residual(&sol, &problem, 8)?,
        p_star,
        v_av_max: amax(&darcy.v1),
        vfilm_av_max: amax(&film.v1),
    };

    // film velocity at a few stations across the thickness
    let mut profile = Vec::new();
    for k in 0..5 {
        let z1 = -0.4 + 0.2 * k as f64;
        let g = problem.film.eval(z1);
        for t in 0..=20 {
            let z2 = -g * t as f64 / 20.0;
            profile.push(ProfileRow {
                z1,
                z2,
                u1: film_velocity_profile(z1, z2, &sol, &problem)?,
            });
        }
    }

    ctx.json("reynolds.json", &out)?;
    ctx.csv("reynolds.csv", |f| write_reynolds_csv(&sol, &problem, f))?;
    ctx.rows("film_profile.csv", &profile)?;
    let z = &sol.z;
    ctx.svg("pressure.svg", || {
        let pts = z.iter().copied().zip(sol.pressure.iter().copied()).collect();
        plot("Limit pressure", "z1", "p*", &[Series::line("p*", pts)], Axes::Linear)
    })?;
    ctx.svg("velocity.svg", || {
        let a = z.iter().copied().zip(darcy.v1.iter().copied()).collect();
        let b = z.iter().copied().zip(film.v1.iter().copied()).collect();
        plot(
            "Average velocities",
            "z1",
            "velocity",
            &[Series::line("porous V_av", a), Series::line("film V_av", b)],
            Axes::Linear,
        )
    })?;
    Ok((out, problem, sol))
}

/// Permeability used by the limit: the configured value, else the cell solve.
pub fn limit_mu(ctx: &Context, n: usize) -> Result<f64, Failure> {
    match ctx.cfg.raw.reynolds.mu {
        Some(mu) => Ok(mu),
        None => Ok(cell_permeability(ctx, n)?.mu_flux),
    }
}

#[derive(Debug, Clone, Serialize)]
struct RegimeRow {
    epsilon: f64,
    h: f64,
    eta: f64,
    lambda_est: f64,
    class: RegimeClass,
}

#[derive(Debug, Clone, Serialize)]
struct ExactTable {
    porous_velocity_in_eps: String,
    porous_gradient_in_eps: String,
    film_velocity_in_eta: String,
    film_gradient_in_eta: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeOut {
    r: f64,
    lambda: f64,
    cases: Vec<RegimeRow>,
    exponents: ExponentTable,
    exact_exponents: Option<ExactTable>,
}

pub fn critical_regime(ctx: &mut Context) -> Result<RegimeOut, Failure> {
    let r = ctx.cfg.r();
    let regimes = ctx.cfg.regimes()?;
    let cases = regimes
        .iter()
        .map(|g| {
            let c = classify_regime(g.epsilon, g.h, g.eta, g.r)?;
            Ok(RegimeRow {
                epsilon: g.epsilon,
                h: g.h,
                eta: g.eta,
                lambda_est: c.lambda_est,
                class: c.class,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let exact = match rational_flow_index(r) {
        Some(q) => {
            let t = predicted_exponents_exact(q)?;
            Some(ExactTable {
                porous_velocity_in_eps: t.porous_velocity_in_eps.to_string(),
                porous_gradient_in_eps: t.porous_gradient_in_eps.to_string(),
                film_velocity_in_eta: t.film_velocity_in_eta.to_string(),
                film_gradient_in_eta: t.film_gradient_in_eta.to_string(),
            })
        }
        None => None,
    };
    let out = RegimeOut {
        r,
        lambda: ctx.cfg.raw.regime.lambda,
        cases,
        exponents: predicted_exponents(r)?,
        exact_exponents: exact,
    };
    ctx.json("regime.json", &out)?;
    ctx.rows("regime.csv", &out.cases)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct UnfoldOut {
    pub seed: u64,
    pub max_deviation: f64,
    pub reports: Vec<NormReport>,
}

pub fn unfold_check(ctx: &mut Context) -> Result<UnfoldOut, Failure> {
    let u = ctx.cfg.raw.unfold.clone();
    let regimes = ctx.cfg.regimes()?;
    let mut rng = ChaCha8Rng::seed_from_u64(u.seed);
    let mut reports = Vec::new();
    for g in &regimes {
        // band height rounded to whole cells, as in the fine-scale grids
        let h = (g.h / g.epsilon).round().max(1.0) * g.epsilon;
        let mut field = aligned_band(g.epsilon, h, u.resolution, |_, _| 0.0)
            .map_err(|e| Failure::from_core(e).with_path("unfold"))?;
        for v in &mut field.values {
            *v = rng.random_range(-1.0..1.0);
        }
        for fl in &mut field.fluid {
            *fl = rng.random_range(0.0..1.0) > 0.2;
        }
        for &s in &u.s {
            reports.push(verify_norm_identities(&field, s, g.epsilon, h)?);
        }
    }
    let out = UnfoldOut {
        seed: u.seed,
        max_deviation: reports.iter().map(|r| r.max_deviation()).fold(0.0, f64::max),
        reports,
    };
    ctx.json("unfold.json", &out)?;
    ctx.rows("unfold.csv", &out.reports)?;
    Ok(out)
}

fn dns_case(ctx: &Context, regime: ScalingRegime) -> DnsCase {
    let c = &ctx.cfg.raw;
    let mut case = DnsCase::new(
        regime,
        c.fluid.nu,
        c.cell.obstacle.clone(),
        ctx.cfg.film.clone(),
        c.reynolds.f1.clone(),
        c.dns.resolution,
    )
    .with_lateral(c.dns.lateral)
    .with_solver(c.solver);
    case.max_cells = c.dns.max_cells;
    case
}

#[derive(Debug, Clone, Serialize)]
pub struct DnsOut {
    pub epsilon: f64,
    pub h: f64,
    pub eta: f64,
    pub lambda_est: f64,
    pub grid_cells: [usize; 2],
    pub mu: f64,
    pub norms: DnsNorms,
    pub comparison: Comparison,
    pub iterations: usize,
    pub momentum_rel: f64,
    pub div_max: f64,
    pub energy_gap: f64,
    pub boundary_velocity_max: f64,
}

pub fn dns(ctx: &mut Context) -> Result<DnsOut, Failure> {
    let regime = *ctx
        .cfg
        .regimes()?
        .first()
        .ok_or_else(|| Failure::config("regime.epsilon", "no admissible case"))?;
    let case = dns_case(ctx, regime);
    case.validate().map_err(|e| Failure::from_core(e).with_path("dns"))?;
    let mu = limit_mu(ctx, case.n_per_cell)?;
    let run = run_dns(&case).map_err(|e| Failure::from_core(e).with_path("dns"))?;
    let problem = limit_problem(&case, mu)?;
    let limit = solve_reynolds(&problem)?;
    let cmp = compare_to_homogenized(&run.report, &problem, &limit)?;
    let r = &run.report;
    let out = DnsOut {
        epsilon: r.epsilon,
        h: r.h,
        eta: r.eta,
        lambda_est: r.lambda_est,
        grid_cells: r.grid_cells,
        mu,
        norms: r.norms,
        comparison: cmp,
        iterations: r.solve.iterations,
        momentum_rel: r.solve.momentum_rel,
        div_max: r.solve.div_max,
        energy_gap: r.solve.energy_gap,
        boundary_velocity_max: r.solve.boundary_velocity_max,
    };
    ctx.json("dns.json", &out)?;
    ctx.csv("dns_pressure.csv", |f| write_pressure_csv(r, f))?;
    ctx.csv("dns_trace.csv", |f| write_trace_csv(r, f))?;
    ctx.svg("dns_trace.svg", || {
        let t = &r.traces;
        let shifted = |v: &[f64], c: f64| -> Vec<(f64, f64)> {
            t.z1.iter().zip(v).filter(|(_, p)| p.is_finite()).map(|(&z, &p)| (z, p - c)).collect()
        };
        let lim = limit.z.iter().copied().zip(limit.pressure.iter().copied()).collect();
        plot(
            "Interface pressure traces",
            "z1",
            "pressure",
            &[
                Series::line("p* (limit)", lim),
                Series::markers("porous trace", shifted(&t.porous, cmp.porous_shift)),
                Series::markers("film trace", shifted(&t.film, cmp.film_shift)),
            ],
            Axes::Linear,
        )
    })?;
    Ok(out)
}

pub fn study(ctx: &mut Context) -> Result<StudyReport, Failure> {
    let regimes = ctx.cfg.regimes()?;
    let cases: Vec<DnsCase> = regimes.iter().map(|g| dns_case(ctx, *g)).collect();
    for c in &cases {
        c.validate().map_err(|e| Failure::from_core(e).with_path("dns"))?;
    }
    let mu = limit_mu(ctx, ctx.cfg.raw.dns.resolution)?;
    let (report, _) = run_study(&cases, mu, ctx.jobs).map_err(|e| Failure::from_core(e).with_path("dns"))?;
    ctx.json("study.json", &report)?;
    ctx.csv("study.csv", |f| write_study_csv(&report, f))?;
    let rows = &report.rows;
    ctx.svg("study_distances.svg", || {
        let s = |f: fn(&Comparison) -> f64| rows.iter().map(|r| (r.epsilon, f(&r.comparison))).collect();
        plot(
            "Distance to the limit pressure",
            "epsilon",
            "distance",
            &[
                Series::markers("porous", s(|c| c.porous_distance)),
                Series::markers("film", s(|c| c.film_distance)),
                Series::markers("interface jump", s(|c| c.interface_jump)),
            ],
            Axes::LogLog,
        )
    })?;
    ctx.svg("study_norms.svg", || {
        let s = |f: fn(&DnsNorms) -> f64| rows.iter().map(|r| (r.epsilon, f(&r.norms))).collect();
        plot(
            "Rescaled norms",
            "epsilon",
            "norm",
            &[
                Series::markers("porous velocity", s(|n| n.porous_velocity)),
                Series::markers("porous strain", s(|n| n.porous_strain)),
                Series::markers("film velocity", s(|n| n.film_velocity)),
                Series::markers("film strain", s(|n| n.film_strain)),
            ],
            Axes::LogLog,
        )
    })?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub r: f64,
    pub mu_flux: f64,
    pub mu_energy: f64,
    pub mu: f64,
    pub q0: f64,
    pub p_star: Vec<PressureSample>,
    pub v_av_max: f64,
    pub vfilm_av_max: f64,
    pub weak_form_residual: f64,
    pub study: Option<StudyReport>,
}

pub fn pipeline(ctx: &mut Context) -> Result<Summary, Failure> {
    let perm = permeability(ctx)?;
    let mu = ctx.cfg.raw.reynolds.mu.unwrap_or(perm.mu_flux);
    let (rey, _, _) = reynolds(ctx, mu)?;
    let study = if ctx.cfg.raw.dns.enabled {
        Some(study(ctx)?)
    } else {
        None
    };
    let summary = Summary {
        r: perm.r,
        mu_flux: perm.mu_flux,
        mu_energy: perm.mu_energy,
        mu,
        q0: rey.q0,
        p_star: rey.p_star,
        v_av_max: rey.v_av_max,
        vfilm_av_max: rey.vfilm_av_max,
        weak_form_residual: rey.weak_form_residual,
        study,
    };
    // the summary is the pipeline's end product and is always written
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(ctx.path("summary.json"), text)?;
    Ok(summary)
}
