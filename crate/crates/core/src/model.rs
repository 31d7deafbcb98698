// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Coins, internal density matrices and the effective generator `G₀`.
//!
//! A coin `(C, A)_H` is three `d×d` matrices: `C` moves the walker one site
//! to the left, `A` one site to the right, and `H` is the on-site
//! Hamiltonian. The same coin acts at every site.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, c64, CMatrix, CVector};

/// Hermiticity defects below this are fixed silently.
pub const HERMITIAN_SILENT_TOL: f64 = 1e-10;
/// Hermiticity defects above this are rejected as user error.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-6;
/// Tolerance for the density matrix invariants.
pub const DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Coin {
    c: CMatrix,
    a: CMatrix,
    h: CMatrix,
    h_adjustment: f64,
}

impl Coin {
    /// Validates `(C, A, H)`; the dimension is taken from `C`.
    pub fn new(c: CMatrix, a: CMatrix, h: CMatrix) -> Result<Self> {
        let d = c.nrows();
        validate_coin(c, a, h, d)
    }

    /// Left-jump operator `C`.
    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    /// Right-jump operator `A`.
    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    /// Hamiltonian `H` (exactly Hermitian).
    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// Largest entry of `|H − H*| / 2` removed when symmetrizing the input.
    pub fn h_adjustment(&self) -> f64 {
        self.h_adjustment
    }

    /// `C*C + A*A`, the total jump-rate operator.
    pub fn rate_operator(&self) -> CMatrix {
        self.c.adjoint() * &self.c + self.a.adjoint() * &self.a
    }

    /// `‖C‖²_F + ‖A‖²_F`; the natural rate scale of the walk.
    pub fn rate_scale(&self) -> f64 {
        let fc = numkernel::frobenius_norm(&self.c);
        let fa = numkernel::frobenius_norm(&self.a);
        fc * fc + fa * fa
    }

    /// The coin `(UCU*, UAU*, UHU*)`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.shape() != self.c.shape() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {:?}, coin is {}x{}",
                u.shape(),
                self.dim(),
                self.dim()
            )));
        }
        let ud = u.adjoint();
        Coin::new(u * &self.c * &ud, u * &self.a * &ud, u * &self.h * &ud)
    }

    /// The coin `(λC, λA)_{|λ|²H}`, whose generators are `|λ|²` times this one's.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        let l = c64(lambda, 0.0);
        let l2 = c64(lambda * lambda, 0.0);
        Coin::new(&self.c * l, &self.a * l, &self.h * l2)
    }
}

/// Validates raw coin matrices. `H` is replaced by its Hermitian part.
pub fn validate_coin(c: CMatrix, a: CMatrix, h: CMatrix, d: usize) -> Result<Coin> {
    if d == 0 {
        return Err(Error::InvalidArgument("coin dimension must be at least 1".into()));
    }
    for (name, m) in [("C", &c), ("A", &a), ("H", &h)] {
        if m.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!("{name} is {}x{}, expected {d}x{d}", m.nrows(), m.ncols())));
        }
        if !numkernel::is_finite(m) {
            return Err(Error::NonFinite);
        }
    }
    let defect = numkernel::max_abs(&(&h - h.adjoint()));
    if defect > HERMITIAN_REJECT_TOL {
        return Err(Error::NotHermitian { deviation: defect });
    }
    if defect > HERMITIAN_SILENT_TOL {
        log::warn!("Hamiltonian symmetrized; removed anti-Hermitian part of size {defect:.3e}");
    }
    let h = numkernel::hermitian_part(&h);
    let movement = numkernel::frobenius_norm(&c) + numkernel::frobenius_norm(&a);
    if movement == 0.0 {
        return Err(Error::NoMovement);
    }
    Ok(Coin { c, a, h, h_adjustment: defect / 2.0 })
}

/// The effective generator `G₀ = −iH − ½(C*C + A*A)` of the inter-jump
/// evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGenerator {
    pub g0: CMatrix,
}

pub fn build_g0(coin: &Coin) -> EffectiveGenerator {
    let g0 = coin.h() * c64(0.0, -1.0) - coin.rate_operator() * c64(0.5, 0.0);
    EffectiveGenerator { g0 }
}

/// A `d×d` positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates `m` as a density matrix and symmetrizes it.
    pub fn new(m: CMatrix) -> Result<Self> {
        let d = numkernel::ensure_square(&m)?;
        if d == 0 {
            return Err(Error::InvalidArgument("density matrix must be at least 1x1".into()));
        }
        if !numkernel::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let defect = numkernel::max_abs(&(&m - m.adjoint()));
        if defect > DENSITY_TOL {
            return Err(Error::NotDensity(format!("not Hermitian (defect {defect:.3e})")));
        }
        let m = numkernel::hermitian_part(&m);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity(format!("trace is {tr}")));
        }
        let eig = numkernel::hermitian_eig(&m)?;
        if eig.values[0] < -DENSITY_TOL {
            return Err(Error::NotDensity(format!("eigenvalue {:.3e} is negative", eig.values[0])));
        }
        Ok(DensityMatrix { matrix: m })
    }

    /// Normalizes a nonzero positive semidefinite matrix by its trace.
    pub fn from_unnormalized(m: &CMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::NotDensity(format!("cannot normalize matrix with trace {tr}")));
        }
        DensityMatrix::new(numkernel::hermitian_part(m) * c64(1.0 / tr, 0.0))
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { matrix: numkernel::identity(d) * c64(1.0 / d as f64, 0.0) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// `UρU*`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        DensityMatrix::new(u * &self.matrix * u.adjoint())
    }
}

/// `|v⟩⟨v| / ⟨v|v⟩`.
pub fn density_from_pure(v: &CVector) -> Result<DensityMatrix> {
    let norm_sqr = v.norm_squared();
    if norm_sqr == 0.0 || !norm_sqr.is_finite() {
        return Err(Error::ZeroVector);
    }
    let m = v * v.adjoint() * c64(1.0 / norm_sqr, 0.0);
    DensityMatrix::new(m)
}

/// `[re, im]` pairs, the on-disk form of a complex scalar.
pub type ComplexPair = [f64; 2];
/// Row-major matrix of complex pairs.
pub type MatrixRows = Vec<Vec<ComplexPair>>;

/// On-disk coin: `{"d": int, "C": [[[re, im], ...], ...], "A": ..., "H": ...}`.
///
/// `rho0` optionally sets the initial internal state used by the lattice
/// and trajectory commands; `provenance` is free text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinFile {
    pub d: usize,
    #[serde(rename = "C")]
    pub c: MatrixRows,
    #[serde(rename = "A")]
    pub a: MatrixRows,
    #[serde(rename = "H")]
    pub h: MatrixRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

pub fn matrix_from_rows(name: &str, rows: &MatrixRows, d: usize) -> Result<CMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch(format!("{name} must be {d}x{d}")));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| c64(rows[i][j][0], rows[i][j][1])))
}

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl CoinFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn coin(&self) -> Result<Coin> {
        validate_coin(
            matrix_from_rows("C", &self.c, self.d)?,
            matrix_from_rows("A", &self.a, self.d)?,
            matrix_from_rows("H", &self.h, self.d)?,
            self.d,
        )
    }

    /// The declared initial state, or `I/d`.
    pub fn initial_state(&self) -> Result<DensityMatrix> {
        match &self.rho0 {
            Some(rows) => DensityMatrix::new(matrix_from_rows("rho0", rows, self.d)?),
            None => Ok(DensityMatrix::maximally_mixed(self.d)),
        }
    }

    pub fn from_coin(coin: &Coin) -> Self {
        CoinFile {
            d: coin.dim(),
            c: matrix_to_rows(coin.c()),
            a: matrix_to_rows(coin.a()),
            h: matrix_to_rows(coin.h()),
            rho0: None,
            provenance: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{diag, from_real_rows, from_rows, max_abs, ZERO};

    fn example1(a: f64) -> Coin {
        let c = diag(&[c64(2f64.sqrt(), 0.0), c64(11f64.sqrt(), 0.0)]);
        let a = diag(&[c64(-(5f64.sqrt()), 0.0), c64(a, 0.0)]);
        let h = from_rows(&[vec![c64(1.0, 0.0), c64(1.0, -2.0)], vec![c64(1.0, 2.0), c64(1.0, 0.0)]]);
        Coin::new(c, a, h).unwrap()
    }

    fn scalar(c: f64, a: f64, h: f64) -> Coin {
        let m = |x: f64| CMatrix::from_element(1, 1, c64(x, 0.0));
        Coin::new(m(c), m(a), m(h)).unwrap()
    }

    #[test]
    fn example_one_coin_validates() {
        let coin = example1(2.0 * 2f64.sqrt());
        assert_eq!(coin.dim(), 2);
        assert_eq!(coin.h_adjustment(), 0.0);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let h = from_real_rows(&[&[0.0, 1.0 + 1e-3], &[1.0, 0.0]]);
        let err = Coin::new(numkernel::identity(2), numkernel::identity(2), h).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn small_hermiticity_defect_is_fixed_and_reported() {
        let h = from_real_rows(&[&[0.0, 1.0 + 1e-8], &[1.0, 0.0]]);
        let coin = Coin::new(numkernel::identity(2), numkernel::identity(2), h).unwrap();
        assert!((coin.h_adjustment() - 0.5e-8).abs() < 1e-12);
        assert_eq!(numkernel::hermiticity_defect(coin.h()), 0.0);
    }

    #[test]
    fn rejects_shape_and_zero_coin() {
        let err = validate_coin(numkernel::identity(2), numkernel::identity(3), numkernel::identity(2), 2);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(Coin::new(z.clone(), z.clone(), z), Err(Error::NoMovement)));
    }

    #[test]
    fn scalar_coin_and_g0() {
        let g = build_g0(&scalar(1.0, 2.0, 0.0));
        assert_eq!(g.g0[(0, 0)], c64(-2.5, 0.0));
        let g = build_g0(&scalar(1.0, 1.0, 0.7));
        assert_eq!(g.g0[(0, 0)], c64(-1.0, -0.7));
    }

    #[test]
    fn example_one_g0() {
        let a = 1.3;
        let coin = example1(a);
        let g = build_g0(&coin).g0;
        let expected = coin.h() * c64(0.0, -1.0) - diag(&[c64(7.0, 0.0), c64(11.0 + a * a, 0.0)]) * c64(0.5, 0.0);
        assert!(max_abs(&(g - expected)) < 1e-14);
    }

    #[test]
    fn g0_dissipative_part_is_rate_operator() {
        let coin = example1(0.4);
        let g = build_g0(&coin).g0;
        let lhs = &g + g.adjoint();
        assert!(max_abs(&(lhs + coin.rate_operator())) <= 1e-12);
    }

    #[test]
    fn pure_densities() {
        let e1 = CVector::from_column_slice(&[c64(1.0, 0.0), ZERO]);
        assert_eq!(density_from_pure(&e1).unwrap().matrix(), &diag(&[c64(1.0, 0.0), ZERO]));

        let plus = CVector::from_column_slice(&[c64(1.0, 0.0), c64(1.0, 0.0)]);
        let rho = density_from_pure(&plus).unwrap();
        assert!(max_abs(&(rho.matrix() - CMatrix::from_element(2, 2, c64(0.5, 0.0)))) < 1e-15);

        let u1 = CVector::from_column_slice(&[c64(0.0, -1.0), c64(1.0, 0.0)]);
        let rho = density_from_pure(&u1).unwrap();
        // |u⟩⟨u| has (0,1) entry u₀ū₁ = −i/2
        let expected = from_rows(&[vec![c64(0.5, 0.0), c64(0.0, -0.5)], vec![c64(0.0, 0.5), c64(0.5, 0.0)]]);
        assert!(max_abs(&(rho.matrix() - expected)) < 1e-15);
        assert!(rho.is_pure(1e-12));

        assert!(matches!(density_from_pure(&CVector::zeros(2)), Err(Error::ZeroVector)));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(diag(&[c64(0.5, 0.0), c64(0.6, 0.0)])).is_err());
        assert!(DensityMatrix::new(diag(&[c64(1.5, 0.0), c64(-0.5, 0.0)])).is_err());
        assert!(DensityMatrix::new(from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]])).is_err());
        assert!(DensityMatrix::new(diag(&[c64(0.25, 0.0), c64(0.75, 0.0)])).is_ok());
    }

    #[test]
    fn coin_file_round_trip() {
        let text = r#"{"d": 1, "C": [[[1, 0]]], "A": [[[2, 0]]], "H": [[[0, 0]]]}"#;
        let file = CoinFile::from_json(text).unwrap();
        let coin = file.coin().unwrap();
        assert_eq!(coin.a()[(0, 0)], c64(2.0, 0.0));
        assert_eq!(file.initial_state().unwrap().matrix()[(0, 0)], c64(1.0, 0.0));
        let again = CoinFile::from_json(&serde_json::to_string(&CoinFile::from_coin(&coin)).unwrap()).unwrap();
        assert_eq!(again.coin().unwrap(), coin);
    }

    #[test]
    fn coin_file_rejects_ragged_matrix() {
        let text = r#"{"d": 2, "C": [[[1, 0]]], "A": [[[2, 0]]], "H": [[[0, 0]]]}"#;
        assert!(matches!(CoinFile::from_json(text).unwrap().coin(), Err(Error::DimensionMismatch(_))));
        assert!(matches!(CoinFile::from_json("{"), Err(Error::Json(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
            proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n)
        }

        proptest! {
            #[test]
            fn g0_identity_holds(d in 1usize..4, seed in entries(27)) {
                let pick = |k: usize| c64(seed[k % 27].0, seed[k % 27].1);
                let c = CMatrix::from_fn(d, d, |i, j| pick(i * d + j));
                let a = CMatrix::from_fn(d, d, |i, j| pick(9 + i * d + j));
                let hraw = CMatrix::from_fn(d, d, |i, j| pick(18 + i * d + j));
                let coin = Coin::new(c, a, numkernel::hermitian_part(&hraw));
                prop_assume!(coin.is_ok());
                let coin = coin.unwrap();
                let g = build_g0(&coin).g0;
                prop_assert!(max_abs(&(&g + g.adjoint() + coin.rate_operator())) <= 1e-12);
            }

            #[test]
            fn pure_densities_are_valid(v in entries(3)) {
                let vec = CVector::from_iterator(3, v.iter().map(|&(r, i)| c64(r, i)));
                prop_assume!(vec.norm() > 1e-3);
                let rho = density_from_pure(&vec).unwrap();
                prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
                prop_assert!(rho.is_pure(1e-10));
            }
        }
    }
}
