//! Generalized Reynolds equation on `ω = (−1/2, 1/2)`.
//!
//! The limit pressure satisfies `∫_ω G A_{r′}(f₁ − p′) ψ′ = 0`, with
//!
//! ```text
//! G(z) = μ/ν^{r′−1} + g(z)^{r′} / (λ 2^{r′/2} (r′+1) ν^{r′−1}).
//! ```
//!
//! In one dimension the flux `G A_{r′}(f₁ − p′)` is a constant `q₀`, so
//! `p′ = f₁ − A_r(q₀/G)` and the pressure follows by quadrature. With the
//! zero-flux boundary condition `q₀ = 0`; a prescribed flux or a prescribed
//! pressure drop select other constants.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{FilmProfile, ScalarFunction};
use crate::rheology::{conjugate_exponent, power_map};

pub const DEFAULT_NODES: usize = 1024;
pub const MIN_NODES: usize = 64;
const BRACKET_CAP: f64 = 1e12;

/// 5-point Gauss–Legendre rule on `[−1, 1]`.
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxMode {
    /// No flux through `∂ω`.
    PaperZeroFlux,
    PrescribedFlux { q0: f64 },
    /// `Δp = p(1/2) − p(−1/2)`; `initial_bracket` seeds the bisection.
    PressureDrop {
        delta_p: f64,
        #[serde(default = "default_bracket")]
        initial_bracket: f64,
    },
}

fn default_bracket() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReynoldsProblem {
    pub f1: ScalarFunction,
    pub film: FilmProfile,
    pub mu: f64,
    pub nu: f64,
    /// Conjugate exponent `r′`.
    pub r_conj: f64,
    pub lambda: f64,
    pub flux_mode: FluxMode,
    pub nodes: usize,
    #[serde(default)]
    pub film_term: FilmTerm,
}

/// How the film enters the coefficient `G`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilmTerm {
    /// `g^{r′}`: the thickness-averaged film velocity.
    #[default]
    MeanVelocity,
    /// `g^{r′+1}`: the film flux `g · 𝒱_av`.
    Flux,
}

impl ReynoldsProblem {
    pub fn new(
        f1: ScalarFunction,
        film: FilmProfile,
        mu: f64,
        nu: f64,
        r_conj: f64,
        lambda: f64,
        flux_mode: FluxMode,
    ) -> Result<Self> {
        let p = Self {
            f1,
            film,
            mu,
            nu,
            r_conj,
            lambda,
            flux_mode,
            nodes: DEFAULT_NODES,
            film_term: FilmTerm::MeanVelocity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        self.nodes = nodes;
        self.validate()?;
        Ok(self)
    }

    pub fn with_film_term(mut self, film_term: FilmTerm) -> Self {
        self.film_term = film_term;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("nu", self.nu), ("lambda", self.lambda)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive (got {v})")));
            }
        }
        conjugate_exponent(self.r_conj)?;
        if self.nodes < MIN_NODES {
            return Err(Error::Domain(format!(
                "need at least {MIN_NODES} quadrature nodes (got {})",
                self.nodes
            )));
        }
        self.f1.validate()?;
        match self.flux_mode {
            FluxMode::PrescribedFlux { q0 } if !q0.is_finite() => {
                Err(Error::Input("prescribed flux must be finite".into()))
            }
            FluxMode::PressureDrop {
                delta_p,
                initial_bracket,
            } if !delta_p.is_finite() || !(initial_bracket > 0.0) => Err(Error::Input(
                "pressure drop must be finite and the initial bracket positive".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Flow index `r`, conjugate of `r′`.
    pub fn flow_index(&self) -> f64 {
        self.r_conj / (self.r_conj - 1.0)
    }

    pub fn node(&self, i: usize) -> f64 {
        -0.5 + i as f64 / (self.nodes - 1) as f64
    }

    fn darcy_factor(&self) -> f64 {
        self.mu / self.nu.powf(self.r_conj - 1.0)
    }

    /// Film factor without `1/λ`: `g^{r′} / (2^{r′/2} (r′+1) ν^{r′−1})`.
    fn film_factor(&self, g: f64) -> f64 {
        let rc = self.r_conj;
        g.powf(rc) / (2f64.powf(0.5 * rc) * (rc + 1.0) * self.nu.powf(rc - 1.0))
    }

    fn film_coupling(&self, g: f64) -> f64 {
        match self.film_term {
            FilmTerm::MeanVelocity => self.film_factor(g),
            FilmTerm::Flux => g * self.film_factor(g),
        }
    }
}

pub fn coefficient_g(z1: f64, problem: &ReynoldsProblem) -> Result<f64> {
    problem.validate()?;
    Ok(g_unchecked(z1, problem))
}

fn g_unchecked(z1: f64, p: &ReynoldsProblem) -> f64 {
    p.darcy_factor() + p.film_coupling(p.film.eval(z1)) / p.lambda
}

/// Lower bound of `G` with `g` replaced by its lower bound `a`.
pub fn coefficient_g_lower_bound(problem: &ReynoldsProblem) -> f64 {
    problem.darcy_factor() + problem.film_coupling(problem.film.lower()) / problem.lambda
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReynoldsSolution {
    pub z: Vec<f64>,
    /// `p*` at the nodes, zero mean.
    pub pressure: Vec<f64>,
    /// `dp*/dz₁` at the nodes.
    pub gradient: Vec<f64>,
    pub q0: f64,
    pub mode: FluxMode,
    pub bisection_steps: usize,
}

impl ReynoldsSolution {
    /// Cubic Hermite interpolant of the nodal pressure and gradient.
    pub fn pressure_at(&self, z: f64) -> f64 {
        let m = self.z.len();
        let h = self.z[1] - self.z[0];
        let t = ((z - self.z[0]) / h).clamp(0.0, (m - 1) as f64);
        let i = (t.floor() as usize).min(m - 2);
        let s = t - i as f64;
        let (p0, p1) = (self.pressure[i], self.pressure[i + 1]);
        let (d0, d1) = (self.gradient[i] * h, self.gradient[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * d1
    }

    /// Integral of the Hermite interpolant over ω.
    pub fn mean_pressure(&self) -> f64 {
        hermite_integral(&self.z, &self.pressure, &self.gradient)
    }
}

fn hermite_integral(z: &[f64], p: &[f64], dp: &[f64]) -> f64 {
    (0..z.len() - 1)
        .map(|i| {
            let h = z[i + 1] - z[i];
            0.5 * h * (p[i] + p[i + 1]) + h * h * (dp[i] - dp[i + 1]) / 12.0
        })
        .sum()
}

/// Per-interval Gauss–Legendre integral of `φ` on `[a, b]`.
fn gauss(a: f64, b: f64, phi: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    GL_X.iter().zip(GL_W).map(|(x, w)| w * phi(c + h * x)).sum::<f64>() * h
}

/// Interval integrals `∫ f₁` and `∫ G^{1−r}` shared by the solver and the
/// weak-form check.
struct IntervalData {
    f1: Vec<f64>,
    inv_g: Vec<f64>,
}

impl IntervalData {
    fn new(problem: &ReynoldsProblem) -> Result<Self> {
        let r = problem.flow_index();
        let m = problem.nodes;
        let mut f1 = Vec::with_capacity(m - 1);
        let mut inv_g = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let (a, b) = (problem.node(i), problem.node(i + 1));
            f1.push(gauss(a, b, |z| problem.f1.eval(z)));
            inv_g.push(gauss(a, b, |z| g_unchecked(z, problem).powf(1.0 - r)));
        }
        if f1.iter().chain(&inv_g).any(|v| !v.is_finite()) {
            return Err(Error::Input("f₁ or G has non-finite samples on ω".into()));
        }
        Ok(Self { f1, inv_g })
    }

    fn total_f1(&self) -> f64 {
        self.f1.iter().sum()
    }

    fn total_inv_g(&self) -> f64 {
        self.inv_g.iter().sum()
    }
}

/// `Φ(q₀) = ∫_ω [f₁ − A_r(q₀/G)] − Δp`, strictly decreasing in `q₀`.
pub fn pressure_drop_mismatch(problem: &ReynoldsProblem, q0: f64, delta_p: f64) -> Result<f64> {
    problem.validate()?;
    let data = IntervalData::new(problem)?;
    Ok(mismatch(&data, problem.flow_index(), q0, delta_p))
}

fn mismatch(data: &IntervalData, r: f64, q0: f64, delta_p: f64) -> f64 {
    // A_r(q₀/G) = A_r(q₀) G^{1−r} for G > 0
    data.total_f1() - power_map(q0, r) * data.total_inv_g() - delta_p
}

fn bisect_flux(data: &IntervalData, r: f64, delta_p: f64, start: f64) -> Result<(f64, usize)> {
    let phi = |q: f64| mismatch(data, r, q, delta_p);
    let mut bound = start;
    while !(phi(-bound) >= 0.0 && phi(bound) <= 0.0) {
        bound *= 2.0;
        if bound > BRACKET_CAP {
            return Err(Error::Infeasible(format!(
                "pressure drop {delta_p} is not reachable with |q₀| ≤ {BRACKET_CAP:e}"
            )));
        }
    }
    let (mut lo, mut hi) = (-bound, bound);
    let mut steps = 0;
    while steps < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = phi(mid);
        if v == 0.0 {
            return Ok((mid, steps));
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok((0.5 * (lo + hi), steps))
}

pub fn solve_reynolds(problem: &ReynoldsProblem) -> Result<ReynoldsSolution> {
    problem.validate()?;
    let r = problem.flow_index();
    let m = problem.nodes;
    let data = IntervalData::new(problem)?;
    let (q0, bisection_steps) = match problem.flux_mode {
        FluxMode::PaperZeroFlux => (0.0, 0),
        FluxMode::PrescribedFlux { q0 } => (q0, 0),
        FluxMode::PressureDrop {
            delta_p,
            initial_bracket,
        } => bisect_flux(&data, r, delta_p, initial_bracket)?,
    };
    let aq = power_map(q0, r);
    let z: Vec<f64> = (0..m).map(|i| problem.node(i)).collect();
    let gradient: Vec<f64> = z
        .iter()
        .map(|&x| problem.f1.eval(x) - aq * g_unchecked(x, problem).powf(1.0 - r))
        .collect();
    if gradient.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("f₁ has non-finite samples".into()));
    }
    let mut pressure = Vec::with_capacity(m);
    pressure.push(0.0);
    for i in 0..m - 1 {
        let step = data.f1[i] - aq * data.inv_g[i];
        pressure.push(pressure[i] + step);
    }
    let mean = hermite_integral(&z, &pressure, &gradient);
    for p in &mut pressure {
        *p -= mean;
    }
    Ok(ReynoldsSolution {
        z,
        pressure,
        gradient,
        q0,
        mode: problem.flux_mode,
        bisection_steps,
    })
}

/// Average velocity over the nodes; the second component vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageVelocity {
    pub z: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

fn driving(solution: &ReynoldsSolution, problem: &ReynoldsProblem) -> Vec<f64> {
    solution
        .z
        .iter()
        .zip(&solution.gradient)
        .map(|(&x, &dp)| problem.f1.eval(x) - dp)
        .collect()
}

/// `V_av,1 = (μ/ν^{r′−1}) A_{r′}(f₁ − dp*/dz₁)`.
pub fn darcy_velocity(solution: &ReynoldsSolution, problem: &ReynoldsProblem) -> AverageVelocity {
    let k = problem.darcy_factor();
    let v1: Vec<f64> = driving(solution, problem)
        .into_iter()
        .map(|q| k * power_map(q, problem.r_conj))
        .collect();
    AverageVelocity {
        z: solution.z.clone(),
        v2: vec![0.0; v1.len()],
        v1,
    }
}

/// `𝒱_av,1 = g^{r′} / (2^{r′/2} (r′+1) ν^{r′−1}) A_{r′}(f₁ − dp*/dz₁)`.
pub fn film_average_velocity(solution: &ReynoldsSolution, problem: &ReynoldsProblem) -> AverageVelocity {
    let v1: Vec<f64> = solution
        .z
        .iter()
        .zip(driving(solution, problem))
        .map(|(&x, q)| problem.film_factor(problem.film.eval(x)) * power_map(q, problem.r_conj))
        .collect();
    AverageVelocity {
        z: solution.z.clone(),
        v2: vec![0.0; v1.len()],
        v1,
    }
}

/// Film velocity `𝒰₁(z₁, z₂)` for `z₂ ∈ [−g(z₁), 0]`.
pub fn film_velocity_profile(
    z1: f64,
    z2: f64,
    solution: &ReynoldsSolution,
    problem: &ReynoldsProblem,
) -> Result<f64> {
    let g = problem.film.eval(z1);
    if !(z2 >= -g && z2 <= 0.0) {
        return Err(Error::Domain(format!(
            "z₂ = {z2} lies outside the film [−{g}, 0] at z₁ = {z1}"
        )));
    }
    let r = problem.flow_index();
    // driving force from the constant flux, exact at any z₁
    let q = power_map(solution.q0, r) * g_unchecked(z1, problem).powf(1.0 - r);
    Ok(film_profile_value(q, g, z2, r, problem.nu))
}

/// Closed-form profile for driving force `q`, film thickness `g`, flow index `r`.
pub fn film_profile_value(q: f64, g: f64, z2: f64, r: f64, nu: f64) -> f64 {
    if z2 == 0.0 || z2 == -g {
        return 0.0;
    }
    let rc = r / (r - 1.0);
    let amp = power_map(2f64.powf(0.5 * r) * q / nu, rc);
    amp * ((0.5 * g).powf(rc) - (z2 + 0.5 * g).abs().powf(rc)) / rc
}

/// Constant flux per interval recovered from the nodal pressure:
/// `F = A_{r′}((∫f₁ − Δp_i) / ∫G^{1−r})`.
fn interval_fluxes(solution: &ReynoldsSolution, problem: &ReynoldsProblem) -> Result<Vec<f64>> {
    if solution.z.len() != problem.nodes {
        return Err(Error::Contract("solution does not match the problem's nodes".into()));
    }
    let data = IntervalData::new(problem)?;
    Ok((0..problem.nodes - 1)
        .map(|i| {
            let dp = solution.pressure[i + 1] - solution.pressure[i];
            power_map((data.f1[i] - dp) / data.inv_g[i], problem.r_conj)
        })
        .collect())
}

fn legendre(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return p0;
    }
    for n in 1..k {
        let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Test function `k` of the weak-form check. The zero-flux condition admits
/// any `ψ`; with a nonzero flux the boundary term is excluded by using
/// functions that vanish on `∂ω`, plus the constant.
fn test_function(mode: &FluxMode, k: usize, z: f64) -> f64 {
    let x = 2.0 * z;
    match mode {
        FluxMode::PaperZeroFlux => legendre(k + 1, x),
        _ if k == 0 => 1.0,
        _ => (0.25 - z * z) * legendre(k - 1, x),
    }
}

/// Largest `|Σ_i F_{i+½} (ψ(z_{i+1}) − ψ(z_i))|` over `k` polynomial test functions.
pub fn weak_form_residual(solution: &ReynoldsSolution, problem: &ReynoldsProblem, k: usize) -> Result<f64> {
    let flux = interval_fluxes(solution, problem)?;
    let mut worst: f64 = 0.0;
    for t in 0..k {
        let value: f64 = flux
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f * (test_function(&problem.flux_mode, t, solution.z[i + 1])
                    - test_function(&problem.flux_mode, t, solution.z[i]))
            })
            .sum();
        worst = worst.max(value.abs());
    }
    Ok(worst)
}

/// Typical size of the flux term, `max(|q₀|, max_z G |f₁|^{r′−1})`.
pub fn flux_scale(problem: &ReynoldsProblem, solution: &ReynoldsSolution) -> f64 {
    let s = solution
        .z
        .iter()
        .map(|&x| g_unchecked(x, problem) * problem.f1.eval(x).abs().powf(problem.r_conj - 1.0))
        .fold(0.0, f64::max);
    s.max(solution.q0.abs()).max(f64::MIN_POSITIVE)
}

/// Writes `z1,p_star,q_flux,V_av_1,Vfilm_av_1,G` per node.
pub fn write_reynolds_csv<W: Write>(solution: &ReynoldsSolution, problem: &ReynoldsProblem, out: W) -> Result<()> {
    let darcy = darcy_velocity(solution, problem);
    let film = film_average_velocity(solution, problem);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z1", "p_star", "q_flux", "V_av_1", "Vfilm_av_1", "G"])?;
    for (i, &z) in solution.z.iter().enumerate() {
        let g = g_unchecked(z, problem);
        let q = problem.f1.eval(z) - solution.gradient[i];
        w.write_record(&[
            format!("{z:.12e}"),
            format!("{:.12e}", solution.pressure[i]),
            format!("{:.12e}", g * power_map(q, problem.r_conj)),
            format!("{:.12e}", darcy.v1[i]),
            format!("{:.12e}", film.v1[i]),
            format!("{g:.12e}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn problem(f1: ScalarFunction, mode: FluxMode) -> ReynoldsProblem {
        ReynoldsProblem::new(f1, FilmProfile::uniform(1.0).unwrap(), 0.05, 1.0, 2.0, 1.0, mode).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let p = problem(ScalarFunction::constant(1.0), FluxMode::PaperZeroFlux);
        assert!((coefficient_g(0.0, &p).unwrap() - (0.05 + 1.0 / 6.0)).abs() < 1e-15);
        let mut bad = p.clone();
        bad.mu = 0.0;
        assert!(matches!(coefficient_g(0.0, &bad), Err(Error::Domain(_))));
        let mut thick = p.clone();
        thick.film = FilmProfile::uniform(2.0).unwrap();
        let film = |q: &ReynoldsProblem| coefficient_g(0.1, q).unwrap() - 0.05;
        assert!((film(&thick) - 4.0 * film(&p)).abs() < 1e-14);
        assert!(coefficient_g_lower_bound(&p) > 0.0);
    }

    #[test]
    fn paper_mode_is_antiderivative() {
        let p = problem(ScalarFunction::constant(1.0), FluxMode::PaperZeroFlux);
        let s = solve_reynolds(&p).unwrap();
        for (z, v) in s.z.iter().zip(&s.pressure) {
            assert!((v - z).abs() < 1e-12);
        }
        assert_eq!(s.q0, 0.0);
        let p = problem(ScalarFunction::cosine(1.0, 1.0, 0.0), FluxMode::PaperZeroFlux);
        let s = solve_reynolds(&p).unwrap();
        for (z, v) in s.z.iter().zip(&s.pressure) {
            assert!((v - (PI * z).sin() / PI).abs() < 1e-8);
        }
        assert!(s.mean_pressure().abs() < 1e-12);
        assert!(darcy_velocity(&s, &p).v1.iter().all(|v| v.abs() <= 1e-12));
        assert!(film_average_velocity(&s, &p).v1.iter().all(|v| v.abs() <= 1e-12));
        assert!(weak_form_residual(&s, &p, 6).unwrap() < 1e-10);
    }

    #[test]
    fn prescribed_flux_linear_pressure() {
        // G ≡ 1 with μ = 1 and a negligible film term is not expressible, so
        // take μ = 1 − film contribution.
        let film = FilmProfile::uniform(1.0).unwrap();
        let film_term = 1.0 / 6.0;
        let p = ReynoldsProblem::new(
            ScalarFunction::constant(0.0),
            film,
            1.0 - film_term,
            1.0,
            2.0,
            1.0,
            FluxMode::PrescribedFlux { q0: 0.5 },
        )
        .unwrap();
        assert!((coefficient_g(0.3, &p).unwrap() - 1.0).abs() < 1e-15);
        let s = solve_reynolds(&p).unwrap();
        for (z, v) in s.z.iter().zip(&s.pressure) {
            assert!((v + 0.5 * z).abs() < 1e-12);
        }
        assert!(weak_form_residual(&s, &p, 1).unwrap() < 1e-14);
    }

    #[test]
    fn velocity_examples() {
        let p = problem(ScalarFunction::constant(1.0), FluxMode::PrescribedFlux { q0: 0.0 });
        let fake = ReynoldsSolution {
            z: vec![-0.5, 0.5],
            pressure: vec![0.0, 0.0],
            gradient: vec![0.0, 0.0],
            q0: 0.0,
            mode: p.flux_mode,
            bisection_steps: 0,
        };
        assert!(darcy_velocity(&fake, &p).v1.iter().all(|v| (v - 0.05).abs() < 1e-15));
        assert!(film_average_velocity(&fake, &p).v1.iter().all(|v| (v - 1.0 / 6.0).abs() < 1e-15));
        let mut p2 = p.clone();
        p2.nu = 2.0;
        assert!(darcy_velocity(&fake, &p2).v1.iter().all(|v| (v - 0.025).abs() < 1e-15));
    }

    #[test]
    fn profile_examples() {
        assert!((film_profile_value(1.0, 1.0, -0.5, 2.0, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(film_profile_value(1.0, 1.3, 0.0, 3.0, 1.0), 0.0);
        assert_eq!(film_profile_value(1.0, 1.3, -1.3, 3.0, 1.0), 0.0);
        let p = problem(ScalarFunction::constant(1.0), FluxMode::PrescribedFlux { q0: 0.3 });
        let s = solve_reynolds(&p).unwrap();
        assert!(film_velocity_profile(0.0, 0.1, &s, &p).is_err());
        assert!(film_velocity_profile(0.0, -1.1, &s, &p).is_err());
    }

    #[test]
    fn pressure_drop_bisection() {
        let f1 = ScalarFunction::cosine(0.3, 2.0, 1.0);
        let mode = |start| FluxMode::PressureDrop {
            delta_p: 0.2,
            initial_bracket: start,
        };
        let a = solve_reynolds(&problem(f1.clone(), mode(1.0))).unwrap();
        let b = solve_reynolds(&problem(f1.clone(), mode(1e3))).unwrap();
        for (x, y) in a.pressure.iter().zip(&b.pressure) {
            assert!((x - y).abs() < 1e-10);
        }
        let drop = a.pressure_at(0.5) - a.pressure_at(-0.5);
        assert!((drop - 0.2).abs() < 1e-10);
        let p = problem(f1, mode(1.0));
        let mut last = f64::INFINITY;
        for k in -20..=20 {
            let v = pressure_drop_mismatch(&p, k as f64 * 0.25, 0.2).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn perturbation_raises_weak_residual() {
        let p = problem(ScalarFunction::cosine(1.0, 1.0, 0.0), FluxMode::PaperZeroFlux);
        let s = solve_reynolds(&p).unwrap();
        let base = weak_form_residual(&s, &p, 6).unwrap();
        let mut q = s.clone();
        for (z, v) in q.z.iter().zip(q.pressure.iter_mut()) {
            *v += 1e-3 * (2.0 * PI * z).sin();
        }
        assert!(weak_form_residual(&q, &p, 6).unwrap() > base);
    }

    #[test]
    fn zero_flux_ignores_g_scaling() {
        let f1 = ScalarFunction::sine(1.0, 1.0, 0.5);
        let a = solve_reynolds(&problem(f1.clone(), FluxMode::PaperZeroFlux)).unwrap();
        let mut p = problem(f1, FluxMode::PaperZeroFlux);
        p.mu *= 7.0;
        p.lambda *= 0.1;
        let b = solve_reynolds(&p).unwrap();
        assert_eq!(a.pressure, b.pressure);
    }
}
