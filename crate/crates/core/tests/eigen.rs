//! Eigenvalue detection against closed-form spectra.
//!
//! The Dirichlet spectrum of the unit disk is {j_{m,k}²} (zeros of J_m),
//! the unit ball's is {z_{l,k}²} (zeros of spherical j_l, with z_{0,1} =
//! π), and the Neumann disk spectrum is {j′_{m,k}²}. The oracles compute
//! those zeros independently by series evaluation and bisection, so every
//! detected eigenvalue below is checked against an external value that
//! never touches the solver.

use std::sync::Arc;

use proptest::prelude::*;
use shellflow_core::eigensolver::{BoundaryCondition, EigenSweep, SweepOptions};
use shellflow_core::geometry::{DomainFamilyCache, LevelFunction, Point};
use shellflow_core::ode::Dopri5;
use shellflow_core::spectral::basis::BoundaryBasis;
use shellflow_oracles::{
    bessel_j, bessel_j_deriv, bessel_j_deriv_zero, bessel_j_zero, spherical_j_zero,
};

fn disk(n_max: usize, t_min: f64) -> (BoundaryBasis, DomainFamilyCache) {
    let basis = BoundaryBasis::circle(n_max);
    let cache = DomainFamilyCache::build(
        &LevelFunction::ball(2),
        basis.cache_angular(),
        t_min,
        &Dopri5::default(),
    )
    .unwrap();
    (basis, cache)
}

fn ball(l_max: usize, t_min: f64) -> (BoundaryBasis, DomainFamilyCache) {
    let basis = BoundaryBasis::sphere(l_max);
    let cache = DomainFamilyCache::build(
        &LevelFunction::ball(3),
        basis.cache_angular(),
        t_min,
        &Dopri5::default(),
    )
    .unwrap();
    (basis, cache)
}

#[test]
fn disk_dirichlet_detects_the_first_two_eigenvalues() {
    let (basis, cache) = disk(32, 0.2);
    let sweep = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet).unwrap();
    let report = sweep.run(1.0, 20.0).unwrap();

    let lambda1 = bessel_j_zero(0, 1).powi(2); // 5.7832…
    let lambda2 = bessel_j_zero(1, 1).powi(2); // 14.6820…
    assert_eq!(
        report.eigenvalues.len(),
        2,
        "expected exactly two eigenvalues in [1, 20], got {:?}",
        report.eigenvalues
    );
    let ev1 = &report.eigenvalues[0];
    let ev2 = &report.eigenvalues[1];
    assert!(
        (ev1.lambda - lambda1).abs() < 1e-4,
        "lambda_1 = {} vs j_01^2 = {lambda1}",
        ev1.lambda
    );
    assert_eq!(ev1.multiplicity, 1);
    assert!(
        (ev2.lambda - lambda2).abs() < 1e-3,
        "lambda_2 = {} vs j_11^2 = {lambda2}",
        ev2.lambda
    );
    assert_eq!(ev2.multiplicity, 2, "j_11^2 carries cos θ and sin θ");
    assert!(ev1.mismatch < 1e-4 && ev2.mismatch < 1e-4);
}

#[test]
fn ball_dirichlet_detects_pi_squared() {
    let (basis, cache) = ball(8, 0.25);
    let sweep = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet).unwrap();
    let report = sweep.run(5.0, 15.0).unwrap();

    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    assert_eq!(spherical_j_zero(0, 1), std::f64::consts::PI);
    assert_eq!(report.eigenvalues.len(), 1, "{:?}", report.eigenvalues);
    let ev = &report.eigenvalues[0];
    assert!(
        (ev.lambda - pi2).abs() < 1e-4,
        "lambda = {} vs pi^2 = {pi2}",
        ev.lambda
    );
    assert_eq!(ev.multiplicity, 1);
}

#[test]
fn disk_neumann_detects_the_first_nonzero_eigenvalue() {
    let (basis, cache) = disk(8, 0.2);
    let sweep = EigenSweep::new(&basis, &cache, BoundaryCondition::Neumann).unwrap();
    let report = sweep.run(1.0, 8.0).unwrap();

    let lambda = bessel_j_deriv_zero(1, 1).powi(2); // 3.3900…
    assert_eq!(report.eigenvalues.len(), 1, "{:?}", report.eigenvalues);
    let ev = &report.eigenvalues[0];
    assert!(
        (ev.lambda - lambda).abs() < 1e-4,
        "lambda = {} vs j'_11^2 = {lambda}",
        ev.lambda
    );
    assert_eq!(ev.multiplicity, 2);
}

#[test]
fn detection_is_invariant_under_the_scaling_exponent() {
    let (basis, cache) = disk(8, 0.2);
    let mut detected = Vec::new();
    for alpha in [0.25, 0.5] {
        let opts = SweepOptions {
            alpha: Some(alpha),
            ..SweepOptions::default()
        };
        let sweep = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
            .unwrap()
            .with_options(opts);
        let report = sweep.run(4.5, 7.0).unwrap();
        assert_eq!(report.eigenvalues.len(), 1);
        detected.push(report.eigenvalues[0].lambda);
    }
    assert!(
        (detected[0] - detected[1]).abs() < 1e-6,
        "alpha = 0.25 gives {}, alpha = 0.5 gives {}",
        detected[0],
        detected[1]
    );
}

#[test]
fn constant_potentials_shift_detection_covariantly() {
    let (basis, cache) = disk(8, 0.2);
    let plain = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
        .unwrap()
        .run(4.5, 7.0)
        .unwrap();
    let c = 2.5;
    let shifted = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
        .unwrap()
        .with_constant_potential(c)
        .run(4.5 + c, 7.0 + c)
        .unwrap();
    assert_eq!(plain.eigenvalues.len(), 1);
    assert_eq!(shifted.eigenvalues.len(), 1);
    let diff = shifted.eigenvalues[0].lambda - c - plain.eigenvalues[0].lambda;
    assert!(
        diff.abs() < 1e-6,
        "spectrum of −Δ + c did not translate: residual {diff}"
    );
}

#[test]
fn halving_the_seeding_time_leaves_detection_fixed() {
    let (basis, cache) = disk(8, 0.2);
    let mut detected = Vec::new();
    for t0 in [1e-3, 5e-4] {
        let opts = SweepOptions {
            t0,
            ..SweepOptions::default()
        };
        let sweep = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
            .unwrap()
            .with_options(opts);
        let report = sweep.run(4.5, 7.0).unwrap();
        assert_eq!(report.eigenvalues.len(), 1);
        detected.push(report.eigenvalues[0].lambda);
    }
    assert!(
        (detected[0] - detected[1]).abs() < 1e-4,
        "t0 = 1e-3 gives {}, t0 = 5e-4 gives {}",
        detected[0],
        detected[1]
    );
}

#[test]
fn frame_route_agrees_with_the_mode_route_on_the_ball() {
    // Seeding error scales like t0²λ on both routes, so the default small
    // t0 keeps each route's bias far below the agreement tolerance.
    let (basis, cache) = ball(3, 1e-3);
    let opts = SweepOptions {
        grid: 30,
        ..SweepOptions::default()
    };
    let mode = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
        .unwrap()
        .with_options(opts.clone());
    assert!(mode.uses_mode_route());
    let by_modes = mode.run(8.5, 11.5).unwrap();

    // A potential that is identically zero as a closure forces the
    // general frame route through seeding, propagation, and SVD.
    let frame = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
        .unwrap()
        .with_potential(Arc::new(|_: &Point| 0.0))
        .with_options(opts);
    assert!(!frame.uses_mode_route());
    let by_frames = frame.run(8.5, 11.5).unwrap();

    assert_eq!(by_modes.eigenvalues.len(), 1);
    assert_eq!(by_frames.eigenvalues.len(), 1);
    let (m, f) = (&by_modes.eigenvalues[0], &by_frames.eigenvalues[0]);
    assert!(
        (m.lambda - f.lambda).abs() < 2e-3,
        "mode route {} vs frame route {}",
        m.lambda,
        f.lambda
    );
    assert_eq!(m.multiplicity, f.multiplicity);
}

#[test]
fn planar_frame_route_detects_nonaxisymmetric_eigenvalues() {
    // The frozen operator's m = 0 block rotates the seed by a phase
    // proportional to t0, and the resulting J/Y mixture has spurious
    // roots away from the spectrum; at t0 = 1e-3 the mixture stays
    // within ~1e-3 of the bounded branch and the window is clean.
    let (basis, cache) = disk(6, 1e-3);
    let opts = SweepOptions {
        grid: 20,
        ..SweepOptions::default()
    };
    let sweep = EigenSweep::new(&basis, &cache, BoundaryCondition::Dirichlet)
        .unwrap()
        .with_potential(Arc::new(|_: &Point| 0.0))
        .with_options(opts);
    let report = sweep.run(13.5, 15.5).unwrap();

    let lambda2 = bessel_j_zero(1, 1).powi(2);
    assert_eq!(report.eigenvalues.len(), 1, "{:?}", report.eigenvalues);
    let ev = &report.eigenvalues[0];
    assert!(
        (ev.lambda - lambda2).abs() < 2e-3,
        "lambda = {} vs j_11^2 = {lambda2}",
        ev.lambda
    );
    assert_eq!(ev.multiplicity, 2);
}

/// The mode route integrates the same radial ODE the Bessel functions
/// solve, so its mismatch cosine must match the one assembled directly
/// from J_m and J_m′ at the boundary, for any λ and any mode.
fn oracle_mismatch(m: usize, lambda: f64, neumann: bool) -> f64 {
    let mu = (m * m) as f64;
    let r = lambda.sqrt();
    let f = bessel_j(m as u32, r);
    let g = r * bessel_j_deriv(m as u32, r);
    let wf = (1.0 + mu).powf(0.25);
    let wg = (1.0 + mu).powf(-0.25);
    let (num, other) = if neumann {
        (wg * g.abs(), wf * f)
    } else {
        (wf * f.abs(), wg * g)
    };
    num / num.hypot(other)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mode_mismatch_matches_the_bessel_assembled_cosine(
        lambda in 0.5f64..20.0,
        neumann in any::<bool>(),
    ) {
        let (basis, cache) = disk(6, 0.2);
        let bc = if neumann {
            BoundaryCondition::Neumann
        } else {
            BoundaryCondition::Dirichlet
        };
        let opts = SweepOptions {
            t0: 1e-4,
            ..SweepOptions::default()
        };
        let sweep = EigenSweep::new(&basis, &cache, bc)
            .unwrap()
            .with_options(opts);
        let profile = sweep.mismatch_profile(lambda).unwrap();
        let oracle_min = (0..=6)
            .map(|m| oracle_mismatch(m, lambda, neumann))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(
            (profile[0] - oracle_min).abs() < 1e-3,
            "lambda = {}, got {}, oracle {}",
            lambda, profile[0], oracle_min
        );
    }
}
