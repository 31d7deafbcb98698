// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! The auxiliary Lindblad operator on the internal space,
//!
//! ```text
//! 𝕃(ρ) = −i[H, ρ] − ½{C*C + A*A, ρ} + CρC* + AρA*,
//! ```
//!
//! which drives the internal state when the position is ignored. Its
//! stationary densities decide recurrence: with a unique stationary state
//! `ρ_inv` the walker has the almost-sure velocity
//! `m = Tr(Aρ_inv A*) − Tr(Cρ_inv C*)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_g0, Coin, DensityMatrix};
use crate::numkernel::{self, c64, CMatrix, CVector, NULL_SPACE_REL_TOL};

/// `‖𝕃(ρ_inv)‖` bound asserted on a reported stationary state.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-9;
/// `drift` refuses states with a larger stationarity residual.
pub const DRIFT_STATIONARITY_TOL: f64 = 1e-8;
/// Eigenvalue floor for the positivity check of a kernel element.
pub const PSD_FLOOR: f64 = -1e-10;
/// Relative tolerance for normality and commutation of `C`, `A`.
pub const NORMALITY_TOL: f64 = 1e-10;

/// `𝕃(ρ)` evaluated directly.
pub fn apply_aux_lindblad(coin: &Coin, rho: &CMatrix) -> Result<CMatrix> {
    check_shape(coin, rho)?;
    let g0 = build_g0(coin).g0;
    let (c, a) = (coin.c(), coin.a());
    Ok(&g0 * rho + rho * g0.adjoint() + c * rho * c.adjoint() + a * rho * a.adjoint())
}

/// The Hilbert–Schmidt adjoint `𝕃*(X) = G₀*X + XG₀ + C*XC + A*XA`
/// (Heisenberg picture). `𝕃*(I) = 0`.
pub fn apply_aux_lindblad_adjoint(coin: &Coin, x: &CMatrix) -> Result<CMatrix> {
    check_shape(coin, x)?;
    let g0 = build_g0(coin).g0;
    let (c, a) = (coin.c(), coin.a());
    Ok(g0.adjoint() * x + x * &g0 + c.adjoint() * x * c + a.adjoint() * x * a)
}

fn check_shape(coin: &Coin, m: &CMatrix) -> Result<()> {
    let d = coin.dim();
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("operand is {}x{}, coin dimension is {d}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// `d²×d²` matrix `S` with `S·vec(ρ) = vec(𝕃(ρ))`. Its conjugate
/// transpose represents [`apply_aux_lindblad_adjoint`].
pub fn aux_superoperator(coin: &Coin) -> CMatrix {
    let d = coin.dim();
    let g0 = build_g0(coin).g0;
    let id = numkernel::identity(d);
    let pairs = [
        (g0.clone(), id.clone()),
        (id, g0.adjoint()),
        (coin.c().clone(), coin.c().adjoint()),
        (coin.a().clone(), coin.a().adjoint()),
    ];
    numkernel::superop_matrix(&pairs).expect("coin matrices are square and equal-sized")
}

#[derive(Debug, Clone)]
pub struct StationaryAnalysis {
    /// Dimension of the kernel of `𝕃` (equal to the real dimension of its
    /// Hermitian part).
    pub kernel_dim: usize,
    /// The unique stationary density, present iff `h1_holds`.
    pub rho_inv: Option<DensityMatrix>,
    /// Hermitian basis of the kernel, orthonormal in the real
    /// Hilbert–Schmidt inner product.
    pub stationary_basis: Vec<CMatrix>,
    /// `𝕃` has exactly one stationary density.
    pub h1_holds: bool,
    /// `‖𝕃(ρ_inv)‖_F` when `rho_inv` is present.
    pub residual: Option<f64>,
}

fn real_inner(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Real Gram–Schmidt over Hermitian candidates; keeps at most `limit`.
fn hermitian_basis(candidates: Vec<CMatrix>, limit: usize) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::with_capacity(limit);
    for mut x in candidates {
        for b in &basis {
            let p = real_inner(b, &x);
            x -= b * c64(p, 0.0);
        }
        let n = real_inner(&x, &x).sqrt();
        if n > 1e-6 {
            basis.push(x * c64(1.0 / n, 0.0));
            if basis.len() == limit {
                break;
            }
        }
    }
    basis
}

pub fn stationary_states(coin: &Coin) -> Result<StationaryAnalysis> {
    let d = coin.dim();
    let s = aux_superoperator(coin);
    let kernel = numkernel::null_space(&s, NULL_SPACE_REL_TOL)?;
    if kernel.is_empty() {
        return Err(Error::NoStationaryState);
    }
    // 𝕃 commutes with X ↦ X*, so the complex kernel is spanned by the
    // Hermitian and anti-Hermitian parts of its vectors.
    let mut candidates = Vec::with_capacity(2 * kernel.len());
    for v in &kernel {
        let x = numkernel::unvectorize(v, d);
        candidates.push(numkernel::hermitian_part(&x));
        candidates.push(numkernel::hermitian_part(&(x * c64(0.0, -1.0))));
    }
    // Trace-carrying directions first, so a one-dimensional kernel keeps
    // its state rather than a traceless combination.
    candidates.sort_by(|x, y| y.trace().re.abs().total_cmp(&x.trace().re.abs()));
    let basis = hermitian_basis(candidates, kernel.len());
    let kernel_dim = basis.len();
    if kernel_dim == 0 {
        return Err(Error::NoStationaryState);
    }

    if kernel_dim > 1 {
        return Ok(StationaryAnalysis {
            kernel_dim,
            rho_inv: None,
            stationary_basis: basis,
            h1_holds: false,
            residual: None,
        });
    }

    let x = &basis[0];
    let tr = x.trace().re;
    if tr.abs() < 1e-10 {
        return Err(Error::Degenerate("one-dimensional kernel of the auxiliary generator is traceless".into()));
    }
    let rho = numkernel::hermitian_part(&(x * c64(1.0 / tr, 0.0)));
    let eig = numkernel::hermitian_eig(&rho)?;
    if eig.values[0] < PSD_FLOOR {
        return Err(Error::Degenerate(format!(
            "unique kernel element is not positive (eigenvalue {:.3e})",
            eig.values[0]
        )));
    }
    let rho_inv = DensityMatrix::new(rho)?;
    let residual = numkernel::frobenius_norm(&apply_aux_lindblad(coin, rho_inv.matrix())?);
    if residual > STATIONARY_RESIDUAL_TOL {
        return Err(Error::Degenerate(format!("stationary residual {residual:.3e} too large")));
    }
    Ok(StationaryAnalysis {
        kernel_dim,
        rho_inv: Some(rho_inv),
        stationary_basis: basis,
        h1_holds: true,
        residual: Some(residual),
    })
}

/// Asymptotic velocity of the walker, in sites per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub m: f64,
    /// `Tr(Aρ_inv A*)`.
    pub right_rate: f64,
    /// `Tr(Cρ_inv C*)`.
    pub left_rate: f64,
}

/// `m = Tr(Aρ_inv A*) − Tr(Cρ_inv C*)`.
pub fn drift(coin: &Coin, rho_inv: &DensityMatrix) -> Result<Drift> {
    let rho = rho_inv.matrix();
    let residual = numkernel::frobenius_norm(&apply_aux_lindblad(coin, rho)?);
    if residual > DRIFT_STATIONARITY_TOL {
        return Err(Error::NotStationary { residual });
    }
    let (c, a) = (coin.c(), coin.a());
    let right = (a * rho * a.adjoint()).trace();
    let left = (c * rho * c.adjoint()).trace();
    debug_assert!((right - left).im.abs() <= 1e-12 * coin.rate_scale().max(1.0));
    Ok(Drift { m: right.re - left.re, right_rate: right.re, left_rate: left.re })
}

/// Solution `J` of `𝕃*(J) = −(A*A − C*C − m·I)`.
#[derive(Debug, Clone)]
pub struct DriftOperator {
    /// Hermitian, gauge-fixed to `Tr(J) = 0`.
    pub j: CMatrix,
    /// `‖𝕃*(J) + (A*A − C*C − m·I)‖_F`.
    pub residual: f64,
}

fn drift_rhs(coin: &Coin, m: f64) -> CMatrix {
    let (c, a) = (coin.c(), coin.a());
    let d = coin.dim();
    -(a.adjoint() * a - c.adjoint() * c - numkernel::identity(d) * c64(m, 0.0))
}

fn drift_residual(coin: &Coin, m: f64, j: &CMatrix) -> Result<f64> {
    let lhs = apply_aux_lindblad_adjoint(coin, j)?;
    Ok(numkernel::frobenius_norm(&(lhs - drift_rhs(coin, m))))
}

fn least_squares(system: CMatrix, rhs: &CVector) -> Result<CVector> {
    let svd = numkernel::svd(&system)?;
    Ok(svd.solve(rhs, NULL_SPACE_REL_TOL * svd.sigma_max()))
}

/// Least-squares solution of the drift-operator equation, trace-free.
pub fn solve_drift_operator(coin: &Coin, m: f64) -> Result<DriftOperator> {
    let d = coin.dim();
    let system = aux_superoperator(coin).adjoint();
    let x = least_squares(system, &numkernel::vectorize(&drift_rhs(coin, m)))?;
    let mut j = numkernel::hermitian_part(&numkernel::unvectorize(&x, d));
    let shift = j.trace() / c64(d as f64, 0.0);
    j -= numkernel::identity(d) * shift;
    let residual = drift_residual(coin, m, &j)?;
    Ok(DriftOperator { j, residual })
}

/// Like [`solve_drift_operator`] but fixes the gauge by `Tr(G·J) = 0`
/// instead of `Tr(J) = 0`, by appending that constraint to the system.
pub fn solve_drift_operator_gauged(coin: &Coin, m: f64, gauge: &CMatrix) -> Result<DriftOperator> {
    let d = coin.dim();
    if gauge.shape() != (d, d) {
        return Err(Error::DimensionMismatch("gauge matrix must match the coin dimension".into()));
    }
    let s_adj = aux_superoperator(coin).adjoint();
    let n = d * d;
    let mut system = CMatrix::zeros(n + 1, n);
    system.view_mut((0, 0), (n, n)).copy_from(&s_adj);
    // Tr(G J) = Σ_ij G_ji J_ij = vec(Gᵀ)ᵀ vec(J).
    let g_t = gauge.transpose();
    for k in 0..n {
        system[(n, k)] = g_t.as_slice()[k];
    }
    let mut rhs = CVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&numkernel::vectorize(&drift_rhs(coin, m)));
    let x = least_squares(system, &rhs)?;
    let j = numkernel::hermitian_part(&numkernel::unvectorize(&x, d));
    let residual = drift_residual(coin, m, &j)?;
    Ok(DriftOperator { j, residual })
}

/// Shared orthonormal eigenbasis of a commuting normal pair.
#[derive(Debug, Clone)]
pub struct CommonEigenbasis {
    /// Columns are the shared eigenvectors.
    pub u: CMatrix,
    pub c_diag: Vec<Complex64>,
    pub a_diag: Vec<Complex64>,
}

impl CommonEigenbasis {
    pub fn vector(&self, k: usize) -> CVector {
        self.u.column(k).into_owned()
    }
}

fn commutator_defect(x: &CMatrix, y: &CMatrix) -> f64 {
    numkernel::frobenius_norm(&(x * y - y * x))
}

fn is_normal(m: &CMatrix) -> bool {
    let n = numkernel::frobenius_norm(m);
    commutator_defect(m, &m.adjoint()) <= NORMALITY_TOL * n * n
}

// Generic weights for the Hermitian combination; retried in order when the
// combination has a degenerate spectrum.
const MIXING_WEIGHTS: [[f64; 3]; 4] = [
    [0.754_877_666_246_692_7, 0.569_840_290_998_053_2, 0.430_159_709_001_946_8],
    [1.324_717_957_244_746, -0.618_033_988_749_894_8, 0.414_213_562_373_095],
    [-0.302_775_637_731_994_6, 1.732_050_807_568_877_2, -1.259_921_049_894_873],
    [2.236_067_977_499_79, 0.267_949_192_431_122_7, 1.144_714_242_553_331],
];

/// Common eigenbasis of `C` and `A` for `d = 2`; `None` when the pair is
/// not normal and commuting.
pub fn common_eigenstructure(c: &CMatrix, a: &CMatrix) -> Result<Option<CommonEigenbasis>> {
    if c.shape() != (2, 2) {
        return Err(Error::UnsupportedDimension(c.nrows()));
    }
    if a.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("C and A must both be 2x2".into()));
    }
    let (nc, na) = (numkernel::frobenius_norm(c), numkernel::frobenius_norm(a));
    if !is_normal(c) || !is_normal(a) || commutator_defect(c, a) > NORMALITY_TOL * nc * na {
        return Ok(None);
    }

    // C, C*, A, A* pairwise commute, so every real combination of the
    // Hermitian and anti-Hermitian parts shares their eigenvectors.
    let re = |m: &CMatrix, n: f64| numkernel::hermitian_part(m) * c64(1.0 / n.max(1e-300), 0.0);
    let im = |m: &CMatrix, n: f64| numkernel::hermitian_part(&(m * c64(0.0, -1.0))) * c64(1.0 / n.max(1e-300), 0.0);
    let parts = [re(c, nc), im(c, nc), re(a, na), im(a, na)];

    let mut u = numkernel::identity(2);
    for w in &MIXING_WEIGHTS {
        let mix = &parts[0] + &parts[1] * c64(w[0], 0.0) + &parts[2] * c64(w[1], 0.0) + &parts[3] * c64(w[2], 0.0);
        let eig = numkernel::hermitian_eig(&mix)?;
        if eig.values[1] - eig.values[0] > 1e-6 {
            u = eig.vectors;
            break;
        }
    }

    let ud = u.adjoint();
    let cd = &ud * c * &u;
    let ad = &ud * a * &u;
    let off = |m: &CMatrix| m[(0, 1)].norm().max(m[(1, 0)].norm());
    if off(&cd) > 1e-9 * nc.max(1.0) || off(&ad) > 1e-9 * na.max(1.0) {
        return Ok(None);
    }
    Ok(Some(CommonEigenbasis { u, c_diag: vec![cd[(0, 0)], cd[(1, 1)]], a_diag: vec![ad[(0, 0)], ad[(1, 1)]] }))
}
