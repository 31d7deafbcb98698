// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use ctoqw::model::{Coin, DensityMatrix};
use ctoqw::numkernel::{c64, CMatrix};
use rand::Rng;

/// Coin from `6·d²` reals in `[-1, 1]`: real and imaginary parts of C, A
/// and a raw H that is then made Hermitian.
pub fn coin_from_entries(d: usize, v: &[f64]) -> Coin {
    assert_eq!(v.len(), 6 * d * d);
    let n = d * d;
    let mat = |k: usize| CMatrix::from_fn(d, d, |i, j| c64(v[2 * k * n + i * d + j], v[(2 * k + 1) * n + i * d + j]));
    let h = mat(2);
    let h = (&h + h.adjoint()) * c64(0.5, 0.0);
    Coin::new(mat(0), mat(1), h).expect("random coin is valid")
}

pub fn random_coin<R: Rng>(rng: &mut R, d: usize) -> Coin {
    let v: Vec<f64> = (0..6 * d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    coin_from_entries(d, &v)
}

/// Coin with diagonal C, A and H.
pub fn random_diagonal_coin<R: Rng>(rng: &mut R, d: usize) -> Coin {
    let mut diag = |imag: bool| {
        let z: Vec<_> = (0..d)
            .map(|_| c64(rng.random_range(-1.0..1.0), if imag { rng.random_range(-1.0..1.0) } else { 0.0 }))
            .collect();
        ctoqw::numkernel::diag(&z)
    };
    let c = diag(true);
    let a = diag(true);
    let h = diag(false);
    Coin::new(c, a, h).expect("random coin is valid")
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    g.qr().q()
}

pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    DensityMatrix::from_unnormalized(&(&g * g.adjoint())).expect("Gram matrix is positive")
}

pub fn random_diagonal_density<R: Rng>(rng: &mut R, d: usize) -> DensityMatrix {
    let w: Vec<_> = (0..d).map(|_| c64(rng.random_range(0.05..1.0), 0.0)).collect();
    DensityMatrix::from_unnormalized(&ctoqw::numkernel::diag(&w)).expect("positive diagonal")
}

/// `Σ_k exp(−2t + (2k+s)·ln t − ln k! − ln (k+s)!)`, i.e. `e^{−2t} I_s(2t)`
/// for `s ∈ {0, 1}`, summed in log space so large `t` does not underflow.
fn scaled_bessel(s: u32, t: f64) -> f64 {
    if t == 0.0 {
        return if s == 0 { 1.0 } else { 0.0 };
    }
    let lt = t.ln();
    // log of the k = 0 term
    let mut l = -2.0 * t + f64::from(s) * lt;
    let mut sum = l.exp();
    let kmax = (t + 40.0 * t.sqrt() + 60.0) as usize;
    for k in 1..=kmax {
        let k = k as f64;
        l += 2.0 * lt - k.ln() - (k + f64::from(s)).ln();
        sum += l.exp();
    }
    sum
}

/// `e^{−2t} I₀(2t)`, the return probability of the symmetric walk with
/// unit rates.
pub fn bessel_return(t: f64) -> f64 {
    scaled_bessel(0, t)
}

/// `∫₀^T e^{−2t} I₀(2t) dt = T e^{−2T} (I₀(2T) + I₁(2T))`.
pub fn bessel_return_integral(t: f64) -> f64 {
    t * (scaled_bessel(0, t) + scaled_bessel(1, t))
}

pub fn report(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
}
