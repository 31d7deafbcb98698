// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference coins with known stationary states, drifts and verdicts.

use num_complex::Complex64;

use crate::model::Coin;
use crate::numkernel::{self, c64, from_rows, CMatrix, ZERO};

fn real(x: f64) -> Complex64 {
    c64(x, 0.0)
}

/// One-dimensional coin: left rate `|c|²`, right rate `|a|²`, `H = 0`.
pub fn scalar_coin(c: f64, a: f64) -> Coin {
    let m = |x: f64| CMatrix::from_element(1, 1, real(x));
    Coin::new(m(c), m(a), m(0.0)).expect("scalar coin is valid")
}

/// `C = diag(√2, √11)`, `A = diag(−√5, a)` with a non-diagonal `H`.
/// Recurrent iff `|a| = 2√2`.
pub fn example1(a: f64) -> Coin {
    example1_complex(real(a))
}

pub fn example1_complex(a: Complex64) -> Coin {
    let c = numkernel::diag(&[real(2f64.sqrt()), real(11f64.sqrt())]);
    let a = numkernel::diag(&[real(-(5f64.sqrt())), a]);
    let h = from_rows(&[vec![real(1.0), c64(1.0, -2.0)], vec![c64(1.0, 2.0), real(1.0)]]);
    Coin::new(c, a, h).expect("example coin is valid")
}

/// Unitary whose columns `(−i, 1)/√2`, `(i, 1)/√2` diagonalize the
/// [`example2`] pair.
pub fn example2_basis() -> CMatrix {
    let s = 0.5f64.sqrt();
    from_rows(&[vec![c64(0.0, -s), c64(0.0, s)], vec![real(s), real(s)]])
}

/// `C = U diag(1, c) U*`, `A = U diag(a, 2) U*` with [`example2_basis`] `U`.
pub fn example2(a: Complex64, c: Complex64, h: CMatrix) -> Coin {
    let half = real(0.5);
    let i = numkernel::I;
    let cm = from_rows(&[
        vec![(real(1.0) + c) * half, i * (c - real(1.0)) * half],
        vec![i * (real(1.0) - c) * half, (real(1.0) + c) * half],
    ]);
    let am = from_rows(&[
        vec![(real(2.0) + a) * half, i * (real(2.0) - a) * half],
        vec![i * (a - real(2.0)) * half, (real(2.0) + a) * half],
    ]);
    Coin::new(cm, am, h).expect("example coin is valid")
}

/// The Hamiltonian whose matrix in the shared eigenbasis of the
/// [`example2`] pair is `[[h1, h2], [h̄2, h3]]`.
pub fn example2_hamiltonian_in_eigenbasis(h1: f64, h2: Complex64, h3: f64) -> CMatrix {
    let u = example2_basis();
    let inner = from_rows(&[vec![real(h1), h2], vec![h2.conj(), real(h3)]]);
    &u * inner * u.adjoint()
}

/// `C_y = [[−1, 1], [2y, 1]]`, `A_y = [[1, 1], [y, 2]]`,
/// `H_h = [[0, ih], [−ih, 0]]`.
pub fn example3(y: f64, h: f64) -> Coin {
    let c = numkernel::from_real_rows(&[&[-1.0, 1.0], &[2.0 * y, 1.0]]);
    let a = numkernel::from_real_rows(&[&[1.0, 1.0], &[y, 2.0]]);
    let hm = from_rows(&[vec![ZERO, c64(0.0, h)], vec![c64(0.0, -h), ZERO]]);
    Coin::new(c, a, hm).expect("example coin is valid")
}

/// Closed-form drift of [`example3`] at `y = 0`.
pub fn example3_drift_y0(h: f64) -> f64 {
    2.0 * h * (3.0 * h - 4.0) / (4.0 * h * h + 6.0 * h + 7.0)
}

/// Zeros of the [`example3`] drift at `y = ½`.
pub fn example3_boundary_y_half() -> [f64; 2] {
    let r = 71f64.sqrt();
    [(2.0 + r) / 12.0, (2.0 - r) / 12.0]
}

/// Three-dimensional coin; transient with `m = −6/53` at `c = 0`,
/// recurrent at `c = 1`.
pub fn example4(c: f64) -> Coin {
    let cm = numkernel::from_real_rows(&[&[c, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
    let am = numkernel::from_real_rows(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
    let h = numkernel::from_real_rows(&[&[1.0, 2.0, 0.0], &[2.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
    Coin::new(cm, am, h).expect("example coin is valid")
}

/// `ρ_inv` of [`example4`] at `c = 0`: `(1/53)[[21, −19−2i, 0], [−19+2i, 32, 0], [0, 0, 0]]`.
pub fn example4_rho_inv_c0() -> CMatrix {
    let s = 1.0 / 53.0;
    from_rows(&[
        vec![real(21.0 * s), c64(-19.0 * s, -2.0 * s), ZERO],
        vec![c64(-19.0 * s, 2.0 * s), real(32.0 * s), ZERO],
        vec![ZERO, ZERO, ZERO],
    ])
}

/// `ρ_inv` of [`example4`] at `c = 1`: `diag(½, ½, 0)`.
pub fn example4_rho_inv_c1() -> CMatrix {
    numkernel::diag(&[real(0.5), real(0.5), ZERO])
}
