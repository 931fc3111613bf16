use thinpore_core::cell_problem::{default_delta, solve_cell, solve_cell_with, CellCache};
use thinpore_core::geometry::{build_channel_grid, build_unit_cell_grid, ObstacleShape, UnitCell};
use thinpore_core::rheology::FluidModel;
use thinpore_core::stokes::{
    dissipation, energy, residuals, solve_stokes, work, BodyForce, Linearization, SolverConfig, StokesProblem,
};

fn disk() -> UnitCell {
    UnitCell::new(ObstacleShape::centered_disk(0.25).unwrap()).unwrap()
}

#[test]
fn newtonian_permeability_converges_under_refinement() {
    // a square rasterizes exactly, so only the discretization error remains
    let square = UnitCell::new(ObstacleShape::rectangle([0.0, 0.0], [0.25, 0.25]).unwrap()).unwrap();
    let cfg = SolverConfig::default();
    let mu: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| solve_cell(&square, 2.0, n, &cfg).unwrap().mu_flux)
        .collect();
    let (d1, d2) = (mu[0] - mu[1], mu[1] - mu[2]);
    // held faces next to the obstacle make the scheme first order
    let order = (d1 / d2).log2();
    assert!((0.8..1.3).contains(&order), "observed order {order}: {mu:?}");
    let coarse = 2.0 * mu[1] - mu[0];
    let fine = 2.0 * mu[2] - mu[1];
    assert!((coarse - fine).abs() < 0.05 * d2, "{coarse} vs {fine}");
}

#[test]
fn regularization_barely_moves_shear_thinning_permeability() {
    let cfg = SolverConfig::default();
    let a = solve_cell_with(&disk(), 1.5, 1e-6, 32, 1.0, &cfg).unwrap();
    let b = solve_cell_with(&disk(), 1.5, default_delta(1.5), 32, 1.0, &cfg).unwrap();
    let c = solve_cell_with(&disk(), 1.5, 1e-10, 32, 1.0, &cfg).unwrap();
    assert!(((a.mu_flux - b.mu_flux) / b.mu_flux).abs() < 1e-4);
    assert!(((c.mu_flux - b.mu_flux) / b.mu_flux).abs() < 1e-6);
}

#[test]
fn mirrored_polygon_keeps_permeability() {
    let tri = ObstacleShape::polygon(vec![[-0.2, -0.15], [0.25, -0.1], [0.0, 0.2]]).unwrap();
    let cfg = SolverConfig::default();
    let base = solve_cell(&UnitCell::new(tri.clone()).unwrap(), 2.0, 48, &cfg).unwrap().mu_flux;
    let up = solve_cell(&UnitCell::new(tri.mirrored_x2()).unwrap(), 2.0, 48, &cfg).unwrap().mu_flux;
    assert!(((base - up) / base).abs() < 1e-9, "{base} vs {up}");
}

#[test]
fn channel_velocity_scales_with_consistency() {
    for r in [1.5, 3.0] {
        let rc = r / (r - 1.0);
        let solve = |nu: f64| {
            let grid = build_channel_grid(32, 2).unwrap();
            let model = FluidModel::with_default_regularization(r, nu).unwrap();
            let p = StokesProblem::new(grid, model, BodyForce::Uniform { value: [1.0, 0.0] });
            solve_stokes(&p, &SolverConfig::default()).unwrap().u1
        };
        let (a, b) = (solve(1.0), solve(2.0));
        let factor = 2f64.powf(-(rc - 1.0));
        let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((y - factor * x).abs() <= 1e-6 * peak, "r={r}");
        }
    }
}

#[test]
fn energy_identity_holds_for_channel_and_cell() {
    for r in [1.5, 2.0, 3.0] {
        let model = FluidModel::with_default_regularization(r, 1.0).unwrap();
        let channel = StokesProblem::new(
            build_channel_grid(32, 2).unwrap(),
            model,
            BodyForce::Uniform { value: [1.0, 0.0] },
        );
        let cell = StokesProblem::new(
            build_unit_cell_grid(&disk(), 32).unwrap(),
            model,
            BodyForce::Uniform { value: [0.0, 1.0] },
        );
        for p in [channel, cell] {
            let sol = solve_stokes(&p, &SolverConfig::default()).unwrap();
            let (w, d) = (work(&p, &sol).unwrap(), dissipation(&p, &sol).unwrap());
            assert!(((w - d) / w).abs() < 1e-8, "r={r}: work {w} dissipation {d}");
            // the solution minimizes the energy: its value is −(1 − 1/r) · work
            let e = energy(&p, &sol).unwrap();
            if model.regularization() == 0.0 {
                assert!((e + (1.0 - 1.0 / r) * w).abs() < 1e-8 * w.abs(), "r={r}");
            }
            let res = residuals(&p, &sol).unwrap();
            assert!(res.momentum_rel < 1e-7 && res.div_max < 1e-9);
        }
    }
}

#[test]
fn picard_reaches_the_newton_solution() {
    let model = FluidModel::with_default_regularization(3.0, 1.0).unwrap();
    let p = StokesProblem::new(
        build_unit_cell_grid(&disk(), 32).unwrap(),
        model,
        BodyForce::Uniform { value: [1.0, 0.0] },
    );
    let newton = solve_stokes(&p, &SolverConfig::default()).unwrap();
    let picard_cfg = SolverConfig {
        linearization: Linearization::Picard,
        ..SolverConfig::default()
    };
    let picard = solve_stokes(&p, &picard_cfg).unwrap();
    let peak = newton.u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = newton.u1.iter().zip(&picard.u1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-6 * peak, "{diff}");
}

#[test]
fn cache_serves_repeated_requests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SolverConfig::default();
    let first = {
        let cache = CellCache::open(dir.path()).unwrap();
        let v = cache.get_or_solve(&disk(), 2.0, 0.0, 32, &cfg).unwrap();
        assert_eq!((cache.solves(), cache.hits()), (1, 0));
        v
    };
    let cache = CellCache::open(dir.path()).unwrap();
    let again = cache.get_or_solve(&disk(), 2.0, 0.0, 32, &cfg).unwrap();
    assert_eq!((cache.solves(), cache.hits()), (0, 1));
    assert_eq!(first, again);
    // a different resolution is a different entry
    cache.get_or_solve(&disk(), 2.0, 0.0, 40, &cfg).unwrap();
    assert_eq!(cache.solves(), 1);
    assert_eq!(cache.len(), 2);
}
