//! Equilibrium solver against independent oracles, plus property tests.

use std::f64::consts::PI;

use bubblelab::equilibrium::{
    derived_constants, equilibrium_density, inverse_map, poly_coeffs, poly_eval, scaled_poly, solve_radius,
    solve_with_volume_ratio,
};
use bubblelab::params::{PhysicalParams, Volume};
use bubblelab::{BubbleError, ErrorKind};
use proptest::prelude::*;

fn params(sigma: f64, sigma_bar: f64, t_inf: f64) -> PhysicalParams {
    PhysicalParams::new(sigma, sigma_bar, 1.0, 1.0, 1.0, 3.0, 2.0, t_inf).unwrap()
}

/// Plain bisection on the unscaled degree-9 polynomial in R, an oracle that
/// shares nothing with the solver beyond the coefficient formula.
fn bisect_unscaled(m: f64, v: f64, p: &PhysicalParams) -> f64 {
    let i = 3.0 * p.rt() * m / (8.0 * PI * p.sigma);
    let v_bar = 3.0 * v / (4.0 * PI);
    let c = poly_coeffs(i, p.beta(), v_bar).unwrap();
    let (mut a, mut b) = (i.sqrt() / (1.0 + p.beta()).sqrt(), i.sqrt());
    let fa = poly_eval(&c, a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if poly_eval(&c, mid).signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[test]
fn radius_matches_unscaled_bisection() {
    for (sigma, sigma_bar, m, v) in [(1.0, 1.0, 1.0, 10.0), (2.0, 0.5, 3.0, 0.7), (0.3, 4.0, 0.2, 50.0)] {
        let p = params(sigma, sigma_bar, 1.0);
        let eq = solve_radius(m, Volume::Finite(v), &p).unwrap();
        let oracle = bisect_unscaled(m, v, &p);
        assert!((eq.r_star - oracle).abs() <= 1e-10 * oracle, "{} vs {oracle}", eq.r_star);
    }
}

#[test]
fn equilibrium_satisfies_mass_and_pressure_balance() {
    let p = params(1.3, 0.7, 2.0);
    let (m, v) = (2.0, 5.0);
    let eq = solve_radius(m, Volume::Finite(v), &p).unwrap();
    let mass = 4.0 * PI / 3.0 * eq.rho_star * eq.r_star.powi(3);
    assert!((mass - m).abs() <= 1e-12 * m);
    // Gas pressure balances both Laplace jumps: 𝔎T∞ρ† = 2σ/R† + 2σ̄/R̄†.
    let laplace = 2.0 * p.sigma / eq.r_star + 2.0 * p.sigma_bar / eq.rbar_star;
    assert!((eq.pressure() - laplace).abs() <= 1e-12 * laplace);
    let v_bar = 3.0 * v / (4.0 * PI);
    assert!((eq.rbar_star.powi(3) - eq.r_star.powi(3) - v_bar).abs() <= 1e-12 * eq.rbar_star.powi(3));
}

#[test]
fn infinite_volume_has_closed_form() {
    let p = params(1.0, 2.0, 1.5);
    let m = 0.8;
    let eq = solve_radius(m, Volume::Infinite, &p).unwrap();
    let r = (3.0 * p.rt() * m / (8.0 * PI * p.sigma)).sqrt();
    assert!((eq.r_star - r).abs() <= 1e-14 * r);
    assert!((eq.rho_star - 2.0 * p.sigma / (p.rt() * r)).abs() <= 1e-13 * eq.rho_star);
    assert!(eq.rbar_star.is_infinite());
    assert_eq!(eq.r_tilde, eq.r_star);
}

#[test]
fn large_volume_approaches_infinite_volume() {
    let p = params(1.0, 1.0, 1.0);
    let inf = solve_radius(1.0, Volume::Infinite, &p).unwrap();
    let mut last = f64::INFINITY;
    for v in [1e2, 1e4, 1e6, 1e8] {
        let eq = solve_radius(1.0, Volume::Finite(v), &p).unwrap();
        let dev = (eq.r_star - inf.r_star).abs() / inf.r_star;
        assert!(dev < last);
        last = dev;
    }
    assert!(last < 1e-2);
}

#[test]
fn unbounded_liquid_stiffness_identity() {
    // With R̄ = ∞ and ρ† = 2σ/(𝔎T∞R†): KC + A = 3𝔎T∞ρ†/R†.
    let p = params(0.7, 1.9, 1.0);
    let eq = solve_radius(1.2, Volume::Infinite, &p).unwrap();
    let dc = derived_constants(&eq);
    let target = 3.0 * p.rt() * eq.rho_star / eq.r_star;
    assert!((dc.k * dc.c + dc.a - target).abs() <= 1e-13 * target);
}

#[test]
fn volume_ratio_family_has_requested_ratio() {
    let p = params(1.0, 1.0, 1.0);
    for ratio in [1e-4, 1e-3, 0.5, 10.0] {
        let eq = solve_with_volume_ratio(1.0, ratio, &p).unwrap();
        let got = eq.v_bar().unwrap() / eq.r_star.powi(3);
        assert!((got - ratio).abs() <= 1e-10 * ratio, "{got} vs {ratio}");
        assert!((4.0 * PI / 3.0 * eq.rho_star * eq.r_star.powi(3) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn scaled_polynomial_vanishes_at_the_root() {
    let p = params(1.0, 3.0, 1.0);
    let eq = solve_radius(1.0, Volume::Finite(2.0), &p).unwrap();
    let w = eq.r_star / eq.i.sqrt();
    let v = eq.v_bar().unwrap() / eq.i.powf(1.5);
    assert!(scaled_poly(w, eq.beta, v).abs() <= 1e-12);
    assert!(eq.poly_residual <= 1e-12);
}

#[test]
fn inverse_map_distinguishes_unequal_tensions() {
    let p = params(1.0, 2.5, 1.0);
    let eq = solve_radius(1.5, Volume::Finite(3.0), &p).unwrap();
    let mv = inverse_map(eq.rho_star, eq.r_star, &p).unwrap();
    assert!((mv.m - 1.5).abs() <= 1e-12 * 1.5);
    assert!((mv.v.value() - 3.0).abs() <= 1e-9 * 3.0);
}

#[test]
fn off_manifold_state_is_rejected() {
    let p = params(1.0, 1.0, 1.0);
    // Pressure below the inner Laplace jump: no external radius can balance it.
    let err = inverse_map(0.5, 1.0, &p).unwrap_err();
    assert!(matches!(err, BubbleError::NotOnManifold(_)));
    assert_eq!(err.kind(), ErrorKind::Validation);
}

#[test]
fn inconsistent_density_is_a_numerical_error() {
    let p = params(1.0, 1.0, 1.0);
    let eq = solve_radius(1.0, Volume::Finite(10.0), &p).unwrap();
    let err = equilibrium_density(1.01 * eq.r_star, &p, 1.0, Volume::Finite(10.0)).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Numerical);
}

#[test]
fn invalid_inputs_name_their_field() {
    let p = params(1.0, 1.0, 1.0);
    for (m, v, field) in [(0.0, 1.0, "M"), (-1.0, 1.0, "M"), (1.0, 0.0, "V"), (1.0, f64::NAN, "V")] {
        match solve_radius(m, Volume::Finite(v), &p) {
            Err(BubbleError::InvalidField { field: f, .. }) => assert_eq!(f, field),
            other => panic!("expected invalid {field}, got {other:?}"),
        }
    }
    assert!(PhysicalParams::new(1.0, -1.0, 1.0, 1.0, 1.0, 3.0, 2.0, 1.0).is_err());
    assert!(PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 3.0, 2.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn root_is_certified_and_bracketed(
        sigma in 0.1f64..10.0,
        beta in 0.0f64..20.0,
        t_inf in 0.1f64..10.0,
        log_m in -3.0f64..3.0,
        log_v in -3.0f64..4.0,
    ) {
        let p = params(sigma, beta * sigma, t_inf);
        let (m, v) = (10f64.powf(log_m), 10f64.powf(log_v));
        let eq = solve_radius(m, Volume::Finite(v), &p).unwrap();
        prop_assert!(eq.residual <= 1e-12);
        prop_assert!(eq.r_star <= eq.bracket[1] && eq.r_star >= eq.bracket[0]);
        if beta > 0.0 {
            prop_assert!(eq.r_star > eq.bracket[0] && eq.r_star < eq.bracket[1]);
        }
        prop_assert!(eq.kappa_bar > 0.0 && eq.r_tilde > 0.0 && eq.r_tilde < eq.r_star);
    }

    #[test]
    fn radius_grows_with_mass(
        beta in 0.01f64..5.0,
        log_v in -2.0f64..3.0,
        log_m in -2.0f64..2.0,
    ) {
        let p = params(1.0, beta, 1.0);
        let v = Volume::Finite(10f64.powf(log_v));
        let m = 10f64.powf(log_m);
        let a = solve_radius(m, v, &p).unwrap();
        let b = solve_radius(1.1 * m, v, &p).unwrap();
        prop_assert!(b.r_star > a.r_star);
    }

    #[test]
    fn round_trip_through_inverse_map(
        sigma in 0.2f64..5.0,
        beta in 0.05f64..10.0,
        log_m in -2.0f64..2.0,
        log_v in -2.0f64..3.0,
    ) {
        let p = params(sigma, beta * sigma, 1.0);
        let (m, v) = (10f64.powf(log_m), 10f64.powf(log_v));
        let eq = solve_radius(m, Volume::Finite(v), &p).unwrap();
        let back = inverse_map(eq.rho_star, eq.r_star, &p).unwrap();
        prop_assert!((back.m - m).abs() <= 1e-9 * m);
        prop_assert!((back.v.value() - v).abs() <= 1e-9 * v);
    }
}
