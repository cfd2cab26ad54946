//! Radial eigenfunctions, projections and coefficient sequences.

use std::f64::consts::PI;

use bubblelab::equilibrium::solve_radius;
use bubblelab::modal::{
    boundary_flux, boundary_slope, coupling, coupling_square_sum, coupling_square_tail, eigenfunction,
    eigenfunction_dy, eigenfunction_integral, ModalBasis,
};
use bubblelab::params::{PhysicalParams, Volume};
use bubblelab::quadrature::{gauss_quadrature, zeta, zeta_tail};
use proptest::prelude::*;

fn basis(n: usize) -> ModalBasis {
    let eq = solve_radius(1.0, Volume::Finite(10.0), &PhysicalParams::reference()).unwrap();
    ModalBasis::new(&eq, n).unwrap()
}

#[test]
fn centre_series_joins_the_closed_form() {
    for j in [1, 3, 17] {
        for y in [1e-9, 1e-6, 0.9e-2 / (j as f64 * PI), 1.1e-2 / (j as f64 * PI)] {
            let x = j as f64 * PI * y;
            let direct = x.sin() / ((2.0 * PI).sqrt() * y);
            assert!((eigenfunction(j, y) - direct).abs() <= 1e-12 * direct.abs());
        }
        assert!((eigenfunction(j, 0.0) - j as f64 * (PI / 2.0).sqrt()).abs() <= 1e-14 * j as f64);
    }
}

#[test]
fn derivative_matches_central_difference() {
    for j in [1, 4, 9] {
        for y in [1e-4, 0.1, 0.37, 0.8, 1.0] {
            let h = 1e-6;
            let fd = (eigenfunction(j, y + h) - eigenfunction(j, y - h)) / (2.0 * h);
            let exact = eigenfunction_dy(j, y);
            assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "j={j} y={y}: {fd} vs {exact}");
        }
        assert!((eigenfunction_dy(j, 1.0) - boundary_slope(j)).abs() <= 1e-12 * j as f64);
    }
}

#[test]
fn eigenfunctions_solve_the_radial_eigenproblem() {
    // (1/y²)(y²Ξ′)′ = −(jπ)²Ξ, checked by differencing y²Ξ′.
    for j in [1, 2, 5] {
        let lambda = (j as f64 * PI).powi(2);
        for y in [0.2, 0.5, 0.9] {
            let h = 1e-5;
            let flux = |y: f64| y * y * eigenfunction_dy(j, y);
            let lap = (flux(y + h) - flux(y - h)) / (2.0 * h) / (y * y);
            let target = -lambda * eigenfunction(j, y);
            assert!((lap - target).abs() <= 1e-6 * lambda);
        }
        assert!(eigenfunction(j, 1.0).abs() <= 1e-15 * j as f64);
    }
}

#[test]
fn ball_integrals_match_quadrature() {
    let rule = gauss_quadrature(200).unwrap();
    for j in 1..=8 {
        let q = rule.integrate_ball(|y| eigenfunction(j, y));
        assert!((q - eigenfunction_integral(j)).abs() <= 1e-13);
    }
}

#[test]
fn gram_matrix_is_identity() {
    let b = basis(24);
    let g = b.gram();
    for i in 0..24 {
        for j in 0..24 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((g[i * 24 + j] - target).abs() <= 1e-12);
        }
    }
}

#[test]
fn projection_recovers_a_mode_combination() {
    let b = basis(16);
    let coeffs = [0.3, -1.2, 0.0, 0.7, 0.05];
    let f = |y: f64| coeffs.iter().enumerate().map(|(i, c)| c * eigenfunction(i + 1, y)).sum::<f64>();
    let theta = b.project(f);
    for (k, t) in theta.iter().enumerate() {
        let target = coeffs.get(k).copied().unwrap_or(0.0);
        assert!((t - target).abs() <= 1e-12, "mode {}: {t} vs {target}", k + 1);
    }
    for y in [0.0, 0.25, 0.6, 1.0] {
        assert!((b.reconstruct(&theta, y) - f(y)).abs() <= 1e-12);
        assert!((b.reconstruct_dy(&theta, y) - (1..=5).map(|j| coeffs[j - 1] * eigenfunction_dy(j, y)).sum::<f64>()).abs() <= 1e-11);
    }
}

#[test]
fn coupling_sequence_sums_to_its_limit() {
    let gamma = 5.0 / 3.0;
    assert!((coupling_square_sum(gamma) - 16.0 * PI / 75.0).abs() <= 1e-15);
    let partial: f64 = (1..=200).map(|k| coupling(k, gamma).powi(2)).sum();
    assert!((partial + coupling_square_tail(200, gamma) - coupling_square_sum(gamma)).abs() <= 1e-14);
    assert!(coupling(1, gamma) > 0.0 && coupling(2, gamma) < 0.0);
}

#[test]
fn zeta_tails_are_consistent() {
    assert!((zeta(2) - PI * PI / 6.0).abs() <= 1e-15);
    assert!((zeta(4) - PI.powi(4) / 90.0).abs() <= 1e-15);
    for n in [1usize, 10, 1000] {
        for p in [2u32, 4] {
            let partial: f64 = (1..=n).map(|k| (k as f64).powi(-(p as i32))).sum();
            assert!((partial + zeta_tail(p, n) - zeta(p)).abs() <= 1e-14);
        }
    }
}

#[test]
fn cesaro_damping_only_scales_the_flux() {
    let theta = [1.0, 0.0, 0.0];
    assert!((boundary_flux(&theta, false) - boundary_slope(1)).abs() <= 1e-15);
    assert!((boundary_flux(&theta, true) - 0.75 * boundary_slope(1)).abs() <= 1e-15);
}

#[test]
fn basis_rejects_zero_modes() {
    let eq = solve_radius(1.0, Volume::Finite(10.0), &PhysicalParams::reference()).unwrap();
    assert!(ModalBasis::new(&eq, 0).is_err());
    assert!(ModalBasis::with_quadrature(&eq, 8, 4).is_err());
}

proptest! {
    #[test]
    fn projection_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, k in 1usize..6) {
        let basis = basis(12);
        let f = |y: f64| 1.0 - y * y;
        let g = |y: f64| eigenfunction(k, y);
        let combined = basis.project(|y| a * f(y) + b * g(y));
        let pf = basis.project(f);
        let pg = basis.project(g);
        for i in 0..12 {
            prop_assert!((combined[i] - a * pf[i] - b * pg[i]).abs() <= 1e-12);
        }
    }
}
