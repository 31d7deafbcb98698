// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{bessel_return, bessel_return_integral};
use ctoqw::fixtures::{example1, example4, scalar_coin};
use ctoqw::lattice::*;
use ctoqw::model::DensityMatrix;
use ctoqw::numkernel::c64;

#[test]
fn symmetric_scalar_walk_matches_bessel() {
    let coin = scalar_coin(1.0, 1.0);
    let rho = DensityMatrix::maximally_mixed(1);
    let gen = build_block_generator(&coin, 40).unwrap().with_method(Method::Adaptive);
    for (t, p) in probability_series(&gen, &rho, 0, 0, 5.0, 50).unwrap() {
        assert!((p - bessel_return(t)).abs() < 1e-9, "t = {t}: {p} vs {}", bessel_return(t));
    }
    let integral = return_integral(&gen, &rho, 0, 5.0, 0.0125).unwrap();
    assert!(
        (integral.value - bessel_return_integral(5.0)).abs() < 1e-8,
        "{} vs {}",
        integral.value,
        bessel_return_integral(5.0)
    );
}

#[test]
fn biased_scalar_walk_is_poisson_difference() {
    // Left rate 1, right rate 4: p_0j(t) = e^{-5t} 2^j I_|j|(4t).
    let coin = scalar_coin(1.0, 2.0);
    let rho = DensityMatrix::maximally_mixed(1);
    let gen = build_block_generator(&coin, 40).unwrap();
    let t = 1.5;
    let state = evolve(&gen, &rho, 0, t).unwrap();
    let mean: f64 = state.sites().map(|j| j as f64 * state.site_probability(j)).sum();
    let second: f64 = state.sites().map(|j| (j * j) as f64 * state.site_probability(j)).sum();
    assert!((mean - 3.0 * t).abs() < 1e-8, "mean {mean}");
    assert!((second - mean * mean - 5.0 * t).abs() < 1e-7, "variance {}", second - mean * mean);
}

#[test]
fn three_level_coin_keeps_mass_at_radius_twenty() {
    let coin = example4(1.0);
    let rho = DensityMatrix::maximally_mixed(3);
    let gen = build_block_generator(&coin, 20).unwrap();
    let state = evolve(&gen, &rho, 0, 1.0).unwrap();
    assert!(state.retained_mass() >= 1.0 - 1e-6, "retained {}", state.retained_mass());
    assert!(state.conservation_defect() < 1e-10);
    assert!(state.min_eigenvalue() >= -1e-12);
}

#[test]
fn chapman_kolmogorov_on_diagonal_coin() {
    let coin = example1(3.0);
    let rho = DensityMatrix::new(ctoqw::numkernel::diag(&[c64(0.25, 0.0), c64(0.75, 0.0)])).unwrap();
    let gen = build_block_generator(&coin, 40).unwrap();
    for j in -2..=2 {
        let r = chapman_kolmogorov_residual(&gen, &rho, 0, j, 0.7, 0.7).unwrap();
        assert!(r < 1e-10, "j = {j}: residual {r:.3e}");
    }
}

#[test]
fn small_truncation_reports_leakage() {
    let coin = example1(3.0);
    let rho = DensityMatrix::maximally_mixed(2);
    let gen = build_block_generator(&coin, 2).unwrap();
    assert!(matches!(
        chapman_kolmogorov_residual(&gen, &rho, 0, 0, 1.0, 1.0),
        Err(ctoqw::Error::LeakageExceeded { .. })
    ));
    assert!(return_integral(&gen, &rho, 0, 5.0, 0.1).is_err());
}

#[test]
fn skeleton_partial_sums_increase() {
    let coin = example4(0.0);
    let rho = DensityMatrix::maximally_mixed(3);
    let gen = fit_radius(&coin, &rho, 0, 20.0).unwrap();
    let sk = skeleton_sum(&gen, &rho, 0, 0, 1.0, 20).unwrap();
    assert_eq!(sk.partial_sums.len(), 21);
    assert!((sk.partial_sums[0] - 1.0).abs() < 1e-15);
    for w in sk.partial_sums.windows(2) {
        assert!(w[1] >= w[0]);
    }
    assert!(sk.leaked_mass < LEAK_LIMIT);
}

#[test]
fn conditioning_rejects_unreachable_sites() {
    let coin = example4(0.0);
    let rho = DensityMatrix::maximally_mixed(3);
    let gen = build_block_generator(&coin, 30).unwrap();
    let state = conditioned_state(&gen, &rho, 0, 1, 0.5).unwrap();
    assert!((state.matrix().trace().re - 1.0).abs() < 1e-12);
    assert!(matches!(conditioned_state(&gen, &rho, 0, 29, 1e-3), Err(ctoqw::Error::NegligibleProbability { .. })));
}
