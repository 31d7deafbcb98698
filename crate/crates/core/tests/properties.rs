// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{coin_from_entries, random_density, random_unitary};
use ctoqw::auxiliary::{
    apply_aux_lindblad, apply_aux_lindblad_adjoint, drift, solve_drift_operator, solve_drift_operator_gauged,
    stationary_states,
};
use ctoqw::classifier::{classify, classify_diagonal};
use ctoqw::lattice::{build_block_generator, evolve, BlockGenerator};
use ctoqw::model::{Coin, DensityMatrix};
use ctoqw::numkernel::{self, c64, CMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn entries(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 6 * d * d)
}

fn coin_strategy() -> impl Strategy<Value = Coin> {
    (2usize..=3).prop_flat_map(|d| entries(d).prop_map(move |v| coin_from_entries(d, &v)))
}

fn hs(x: &CMatrix, y: &CMatrix) -> num_complex::Complex64 {
    (x.adjoint() * y).trace()
}

fn frob(m: &CMatrix) -> f64 {
    numkernel::frobenius_norm(m)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn adjoint_pairing(coin in coin_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = coin.dim();
        let x = random_density(&mut rng, d).into_matrix();
        let y = random_unitary(&mut rng, d);
        let lhs = hs(&y, &apply_aux_lindblad(&coin, &x).unwrap());
        let rhs = hs(&apply_aux_lindblad_adjoint(&coin, &y).unwrap(), &x);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn trace_annihilation_and_unit_fixed(coin in coin_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = coin.dim();
        let rho = random_density(&mut rng, d);
        let scale = coin.rate_scale().max(1.0);
        prop_assert!(apply_aux_lindblad(&coin, rho.matrix()).unwrap().trace().norm() < 1e-12 * scale);
        prop_assert!(frob(&apply_aux_lindblad_adjoint(&coin, &numkernel::identity(d)).unwrap()) < 1e-12 * scale);
    }

    #[test]
    fn unitary_covariance(coin in coin_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = coin.dim();
        let u = random_unitary(&mut rng, d);
        let x = random_density(&mut rng, d).into_matrix();
        let rotated = coin.conjugated(&u).unwrap();
        let lhs = apply_aux_lindblad(&rotated, &(&u * &x * u.adjoint())).unwrap();
        let rhs = &u * apply_aux_lindblad(&coin, &x).unwrap() * u.adjoint();
        prop_assert!(frob(&(lhs - rhs)) < 1e-12 * coin.rate_scale().max(1.0));

        let st = stationary_states(&coin).unwrap();
        let st_rot = stationary_states(&rotated).unwrap();
        prop_assert_eq!(st.h1_holds, st_rot.h1_holds);
        if let (Some(r), Some(r_rot)) = (&st.rho_inv, &st_rot.rho_inv) {
            let expect = &u * r.matrix() * u.adjoint();
            prop_assert!(frob(&(r_rot.matrix() - expect)) < 1e-8);
            let m = drift(&coin, r).unwrap().m;
            let m_rot = drift(&rotated, r_rot).unwrap().m;
            prop_assert!((m - m_rot).abs() < 1e-8 * coin.rate_scale().max(1.0));
        }
    }

    #[test]
    fn drift_operator_gauges_differ_by_identity(coin in coin_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = stationary_states(&coin).unwrap();
        prop_assume!(st.h1_holds);
        let rho = st.rho_inv.unwrap();
        let m = drift(&coin, &rho).unwrap().m;
        let j1 = solve_drift_operator(&coin, m).unwrap();
        let gauge = random_density(&mut rng, coin.dim()).into_matrix();
        let j2 = solve_drift_operator_gauged(&coin, m, &gauge).unwrap();
        let scale = coin.rate_scale().max(1.0);
        prop_assert!(j1.residual < 1e-9 * scale);
        prop_assert!(j2.residual < 1e-9 * scale);
        // Solutions differ by a multiple of I, which commutes with everything.
        let diff = &j1.j - &j2.j;
        let shift = diff.trace() / c64(coin.dim() as f64, 0.0);
        let off = diff - numkernel::identity(coin.dim()) * shift;
        prop_assert!(frob(&off) < 1e-7 * (1.0 + frob(&j1.j)), "non-scalar gauge difference {}", frob(&off));
    }

    #[test]
    fn scaling_covariance(coin in coin_strategy(), lambda in 0.2f64..5.0) {
        let st = stationary_states(&coin).unwrap();
        prop_assume!(st.h1_holds);
        let scaled = coin.rescaled(lambda).unwrap();
        let st_s = stationary_states(&scaled).unwrap();
        prop_assert!(st_s.h1_holds);
        let (r, r_s) = (st.rho_inv.unwrap(), st_s.rho_inv.unwrap());
        prop_assert!(frob(&(r.matrix() - r_s.matrix())) < 1e-8);
        let m = drift(&coin, &r).unwrap().m;
        let m_s = drift(&scaled, &r_s).unwrap().m;
        prop_assert!((m_s - lambda * lambda * m).abs() < 1e-8 * (1.0 + m_s.abs()));
    }

    #[test]
    fn diagonal_coins_classify_consistently(
        c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
        h in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let z = |v: &[(f64, f64)]| numkernel::diag(&v.iter().map(|&(re, im)| c64(re, im)).collect::<Vec<_>>());
        let hm = numkernel::diag(&[c64(h[0], 0.0), c64(h[1], 0.0)]);
        let coin = Coin::new(z(&c), z(&a), hm).unwrap();
        let general = classify(&coin).unwrap();
        let diagonal = classify_diagonal(&coin).unwrap();
        prop_assert_eq!(general.verdict, diagonal.verdict);
        if let (Some(m1), Some(m2)) = (general.m, diagonal.m) {
            prop_assert!((m1 - m2).abs() < 1e-9 * coin.rate_scale().max(1.0));
        }
    }

    #[test]
    fn svd_reconstructs(v in prop::collection::vec(-1.0f64..1.0, 2 * 24), rank_drop in 0usize..3) {
        // 6x4 with up to two columns duplicated, so it may be rank deficient.
        let mut m = CMatrix::from_fn(6, 4, |i, j| c64(v[2 * (i * 4 + j)], v[2 * (i * 4 + j) + 1]));
        for k in 0..rank_drop {
            let col = m.column(k).clone_owned() * c64(0.5, -1.0);
            m.set_column(3 - k, &col);
        }
        let s = numkernel::svd(&m).unwrap();
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            s.singular_values.len(),
            s.singular_values.iter().map(|&x| c64(x, 0.0)),
        ));
        let back = &s.u * sigma * s.v.adjoint();
        prop_assert!(frob(&(back - &m)) < 1e-12 * (1.0 + frob(&m)));
        prop_assert!(s.singular_values.iter().all(|&x| x >= 0.0));
    }
}

fn small_generator(coin: &Coin) -> BlockGenerator {
    build_block_generator(coin, 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn lattice_semigroup_and_positivity(v in entries(2), seed in any::<u64>(), t in 0.05f64..0.4, s in 0.05f64..0.4) {
        let coin = coin_from_entries(2, &v);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, 2);
        let gen = small_generator(&coin);
        let direct = evolve(&gen, &rho, 0, t + s).unwrap();
        let first = evolve(&gen, &rho, 0, t).unwrap();
        // Continue from the intermediate blocks site by site, by linearity.
        let mut composed: Vec<CMatrix> = vec![CMatrix::zeros(2, 2); gen.n_sites()];
        for site in first.sites() {
            let block = first.block(site).unwrap();
            let w = block.trace().re;
            if w <= 1e-300 {
                continue;
            }
            let part = DensityMatrix::new(numkernel::hermitian_part(&(block * c64(1.0 / w, 0.0)))).unwrap();
            let after = evolve(&gen, &part, site, s).unwrap();
            for (k, j) in after.sites().enumerate() {
                composed[k] += after.block(j).unwrap() * c64(w, 0.0);
            }
        }
        let mut worst: f64 = 0.0;
        for (k, j) in direct.sites().enumerate() {
            worst = worst.max(numkernel::max_abs(&(direct.block(j).unwrap() - &composed[k])));
        }
        prop_assert!(worst < 1e-8, "semigroup defect {worst:.3e}");
        prop_assert!(direct.min_eigenvalue() >= -1e-12);
        prop_assert!(direct.conservation_defect() < 1e-9);
        prop_assert!(direct.hermiticity_defect() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// The return probability stays in `[0, 1]` and is positive for `t > 0`.
    #[test]
    fn return_probability_bounds(v in entries(2), seed in any::<u64>()) {
        let coin = coin_from_entries(2, &v);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, 2);
        let gen = small_generator(&coin);
        for t in [0.0, 0.1, 0.3, 0.6] {
            let p = ctoqw::lattice::transition_probability(&gen, &rho, 0, 0, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            if t > 0.0 {
                prop_assert!(p > 0.0);
            }
        }
    }
}
