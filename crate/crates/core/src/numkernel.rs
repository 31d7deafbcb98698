// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Vectorization is always
//! column-stacking, which is also nalgebra's storage order, so
//! `vec(L ρ R) = (Rᵀ ⊗ L) vec(ρ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative threshold for [`null_space`].
pub const NULL_SPACE_REL_TOL: f64 = 1e-10;

/// Tolerance on `‖M − M*‖ / max(1, ‖M‖)` accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from row-major rows.
pub fn from_rows(rows: &[Vec<Complex64>]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| c64(rows[i][j], 0.0))
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Frobenius norm of `M − M*`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    frobenius_norm(&(m - m.adjoint()))
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

fn ensure_finite(m: &CMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a `d×d` matrix.
pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "vector length must be d²");
    CMatrix::from_column_slice(d, d, v.as_slice())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

// Padé numerator coefficients b_0..b_m and the 1-norm thresholds θ_m below
// which degree m meets double-precision backward error (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA13: f64 = 5.371920351148152e0;

/// `e^{tM}` by scaling and squaring around a diagonal Padé approximant.
pub fn mat_exp(m: &CMatrix, t: f64) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(CMatrix::from_element(1, 1, (m[(0, 0)] * t).exp()));
    }
    let a = m * c64(t, 0.0);
    let norm = one_norm(&a);
    if norm == 0.0 {
        return Ok(identity(n));
    }

    for &(degree, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let out = pade_low(&a, coeffs)?;
            ensure_finite(&out)?;
            return Ok(out);
        }
    }

    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = &a * c64(2f64.powi(-squarings), 0.0);
    let mut out = pade13(&scaled)?;
    for _ in 0..squarings {
        out = &out * &out;
    }
    ensure_finite(&out)?;
    Ok(out)
}

fn scale(m: &CMatrix, s: f64) -> CMatrix {
    m * c64(s, 0.0)
}

fn solve_pade(u: CMatrix, v: CMatrix) -> Result<CMatrix> {
    let q = &v - &u;
    let p = &v + &u;
    q.lu().solve(&p).ok_or_else(|| Error::Degenerate("singular Padé denominator".into()))
}

fn pade_low(a: &CMatrix, b: &[f64]) -> Result<CMatrix> {
    let n = a.nrows();
    let a2 = a * a;
    let mut u_acc = scale(&identity(n), b[1]);
    let mut v_acc = scale(&identity(n), b[0]);
    let mut power = identity(n);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u_acc += scale(&power, b[2 * k + 1]);
        v_acc += scale(&power, b[2 * k]);
    }
    let u = a * u_acc;
    solve_pade(u, v_acc)
}

fn pade13(a: &CMatrix) -> Result<CMatrix> {
    let b = &PADE13;
    let n = a.nrows();
    let id = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]))
        + scale(&a6, b[7])
        + scale(&a4, b[5])
        + scale(&a2, b[3])
        + scale(&id, b[1]);
    let u = a * u_inner;
    let v = &a6 * (scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]))
        + scale(&a6, b[6])
        + scale(&a4, b[4])
        + scale(&a2, b[2])
        + scale(&id, b[0]);
    solve_pade(u, v)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| c64(x, 0.0)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    let scale = frobenius_norm(m).max(1.0);
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation: defect });
    }
    if n == 0 {
        return Ok(HermitianEig { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEig { values, vectors })
}

/// Singular value decomposition `m = U Σ V*` with `U` of the same shape as
/// `m` (columns for zero singular values are left zero) and square unitary `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    /// Not sorted; `singular_values[k]` belongs to column `k` of `u` and `v`.
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Minimum-norm least-squares solution, discarding singular values
    /// below `cutoff`.
    pub fn solve(&self, b: &CVector, cutoff: f64) -> CVector {
        let mut y = self.u.adjoint() * b;
        for (k, &s) in self.singular_values.iter().enumerate() {
            y[k] = if s > cutoff { y[k] / s } else { ZERO };
        }
        &self.v * y
    }
}

/// One-sided Jacobi SVD.
///
/// Column pairs of a working copy of `m` are rotated until mutually
/// orthogonal; the accumulated rotations form `V` and the final column
/// norms are the singular values. Jacobi is used because it resolves
/// exactly singular matrices (which every stationary-state problem
/// produces) to full relative accuracy.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    let mut w = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    let tol = f64::EPSILON * (rows.max(1) as f64);
    // columns at rounding level of the whole matrix count as zero
    let floor = (f64::EPSILON * frobenius_norm(m)).powi(2);
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || alpha <= floor || beta <= floor || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Degenerate("Jacobi SVD did not converge".into()));
    }
    let mut singular_values = Vec::with_capacity(cols);
    let mut u = CMatrix::zeros(rows, cols);
    for k in 0..cols {
        let s = w.column(k).norm();
        singular_values.push(s);
        if s > 0.0 {
            u.set_column(k, &(w.column(k) / c64(s, 0.0)));
        }
    }
    Ok(Svd { u, singular_values, v })
}

/// Orthonormal basis of the right kernel of `m`: right singular vectors
/// whose singular value is below `rel_tol · σ_max`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> Result<Vec<CVector>> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    ensure_finite(m)?;
    if m.ncols() == 0 {
        return Ok(vec![]);
    }
    let svd = svd(m)?;
    let sigma_max = svd.sigma_max();
    let cutoff = rel_tol * sigma_max;
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if sigma_max == 0.0 || s < cutoff {
            basis.push(svd.v.column(k).into_owned());
        }
    }
    Ok(basis)
}

/// Matrix of `ρ ↦ Σ_k L_k ρ R_k` acting on column-stacked `vec(ρ)`.
pub fn superop_matrix(pairs: &[(CMatrix, CMatrix)]) -> Result<CMatrix> {
    let d = match pairs.first() {
        Some((l, _)) => ensure_square(l)?,
        None => return Err(Error::InvalidArgument("at least one (L, R) pair is required".into())),
    };
    let mut s = CMatrix::zeros(d * d, d * d);
    for (l, r) in pairs {
        if l.shape() != (d, d) || r.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator pair has shapes {:?} and {:?}, expected {d}x{d}",
                l.shape(),
                r.shape()
            )));
        }
        s += kron(&r.transpose(), l);
    }
    Ok(s)
}
