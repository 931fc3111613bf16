use thinpore_core::functions::{FilmProfile, ScalarFunction};
use thinpore_core::reynolds::{
    coefficient_g, darcy_velocity, film_average_velocity, pressure_drop_mismatch, solve_reynolds,
    weak_form_residual, FilmTerm, FluxMode, ReynoldsProblem,
};
use thinpore_core::rheology::power_map;

fn film() -> FilmProfile {
    FilmProfile::new(ScalarFunction::cosine(0.3, 2.0, 1.0), 0.7, 1.3).unwrap()
}

fn forcing() -> ScalarFunction {
    ScalarFunction::Polynomial {
        coefficients: vec![0.5, 1.0, -1.5],
    }
}

fn problem(rc: f64, mode: FluxMode) -> ReynoldsProblem {
    ReynoldsProblem::new(forcing(), film(), 0.04, 1.2, rc, 0.9, mode).unwrap()
}

#[test]
fn prescribed_flux_gradient_matches_the_flux_law() {
    for rc in [1.5, 2.0, 3.0] {
        let r = rc / (rc - 1.0);
        let q0 = 0.02;
        let p = problem(rc, FluxMode::PrescribedFlux { q0 });
        let s = solve_reynolds(&p).unwrap();
        assert_eq!(s.q0, q0);
        for (i, &z) in s.z.iter().enumerate() {
            let g = coefficient_g(z, &p).unwrap();
            let expected = forcing().eval(z) - power_map(q0 / g, r);
            assert!((s.gradient[i] - expected).abs() < 1e-12, "rc={rc} z={z}");
        }
        assert!(s.mean_pressure().abs() < 1e-12);
        assert!(weak_form_residual(&s, &p, 6).unwrap() < 1e-10);
    }
}

#[test]
fn pressure_drop_and_prescribed_flux_agree() {
    for rc in [1.5, 3.0] {
        let drop = problem(
            rc,
            FluxMode::PressureDrop {
                delta_p: -0.4,
                initial_bracket: 1.0,
            },
        );
        let a = solve_reynolds(&drop).unwrap();
        let m = a.z.len() - 1;
        assert!((a.pressure[m] - a.pressure[0] + 0.4).abs() < 1e-10);
        assert!(pressure_drop_mismatch(&drop, a.q0, -0.4).unwrap().abs() < 1e-12);
        let b = solve_reynolds(&problem(rc, FluxMode::PrescribedFlux { q0: a.q0 })).unwrap();
        for (x, y) in a.pressure.iter().zip(&b.pressure) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn zero_flux_pressure_is_independent_of_the_coefficient() {
    let base = solve_reynolds(&problem(2.0, FluxMode::PaperZeroFlux)).unwrap();
    let mut other = problem(2.0, FluxMode::PaperZeroFlux);
    other.mu = 3.0;
    other.film = FilmProfile::uniform(0.2).unwrap();
    let other = solve_reynolds(&other.with_film_term(FilmTerm::Flux)).unwrap();
    for (x, y) in base.pressure.iter().zip(&other.pressure) {
        assert!((x - y).abs() < 1e-13);
    }
}

#[test]
fn velocities_scale_with_consistency() {
    let rc = 3.0;
    let mode = FluxMode::PressureDrop {
        delta_p: 0.2,
        initial_bracket: 1.0,
    };
    let mut p1 = problem(rc, mode);
    p1.nu = 1.0;
    let mut p2 = p1.clone();
    p2.nu = 2.0;
    let (s1, s2) = (solve_reynolds(&p1).unwrap(), solve_reynolds(&p2).unwrap());
    let factor = 2f64.powf(-(rc - 1.0));
    for (a, b) in [
        (darcy_velocity(&s1, &p1).v1, darcy_velocity(&s2, &p2).v1),
        (film_average_velocity(&s1, &p1).v1, film_average_velocity(&s2, &p2).v1),
    ] {
        for (x, y) in a.iter().zip(&b) {
            assert!((y - factor * x).abs() < 1e-12 * x.abs().max(1e-3));
        }
    }
    // the pressure itself does not depend on ν
    for (x, y) in s1.pressure.iter().zip(&s2.pressure) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn flux_film_term_adds_one_power_of_thickness() {
    let p = problem(2.0, FluxMode::PaperZeroFlux);
    let q = p.clone().with_film_term(FilmTerm::Flux);
    let darcy = p.mu / p.nu.powf(p.r_conj - 1.0);
    for z in [-0.4, -0.1, 0.0, 0.3] {
        let g = p.film.eval(z);
        let a = coefficient_g(z, &p).unwrap() - darcy;
        let b = coefficient_g(z, &q).unwrap() - darcy;
        assert!((b - g * a).abs() < 1e-14);
    }
}

#[test]
fn invalid_problems_are_rejected() {
    assert!(ReynoldsProblem::new(forcing(), film(), 0.0, 1.0, 2.0, 1.0, FluxMode::PaperZeroFlux).is_err());
    assert!(ReynoldsProblem::new(forcing(), film(), 0.1, 1.0, 1.0, 1.0, FluxMode::PaperZeroFlux).is_err());
    assert!(problem(2.0, FluxMode::PaperZeroFlux).with_nodes(8).is_err());
}
