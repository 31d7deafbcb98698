// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Recurrence verdicts for coin-induced walks.
//!
//! With a unique stationary state the sign of the drift decides. Without
//! one, only dimension two is covered: `C` and `A` are then simultaneously
//! diagonal and the moduli of their eigenvalues decide, possibly leaving a
//! single pure internal state transient. Everything else is reported as
//! [`Verdict::Undetermined`].

use std::fmt;

use crate::auxiliary::{self, CommonEigenbasis, StationaryAnalysis};
use crate::error::{Error, Result};
use crate::model::{density_from_pure, Coin, DensityMatrix};
use crate::numkernel::{self, c64, CMatrix};

/// Absolute tolerance for the drift and eigenvalue-modulus comparisons,
/// applied after normalizing the coin so that `‖C‖²_F + ‖A‖²_F = 1`.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Recurrent,
    Transient,
    /// Transient for exactly one pure internal state, recurrent for all others.
    PartiallyRecurrent,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Recurrent => "Recurrent",
            Verdict::Transient => "Transient",
            Verdict::PartiallyRecurrent => "PartiallyRecurrent",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which criterion produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Unique stationary state, zero drift.
    UniqueStateZeroDrift,
    /// Unique stationary state, nonzero drift.
    UniqueStateNonzeroDrift,
    /// Diagonal pair with unique stationary state `I/2`.
    DiagonalUniqueState,
    /// Diagonal pair, `H` diagonal too, `|a_i| ≠ |c_i|` for both `i`.
    DiagonalBothUnbalanced,
    /// Diagonal pair, `H` diagonal too, `|a_i| = |c_i|` for both `i`.
    DiagonalBothBalanced,
    /// Diagonal pair, `H` diagonal too, exactly one balanced eigenvector.
    DiagonalOneBalanced,
    /// Scalar pair `C = cI`, `A = aI` with off-diagonal `H`.
    ScalarPair,
    /// No criterion applies.
    NoCriterion,
}

impl Rule {
    /// Provenance tag used in machine-readable output.
    pub fn tag(self) -> &'static str {
        match self {
            Rule::UniqueStateZeroDrift => "corR-1",
            Rule::UniqueStateNonzeroDrift => "corR-2",
            Rule::DiagonalUniqueState => "LastProp-i",
            Rule::DiagonalBothUnbalanced => "2EiCriteria-2.1a",
            Rule::DiagonalBothBalanced => "2EiCriteria-2.1b",
            Rule::DiagonalOneBalanced => "2EiCriteria-2.1c",
            Rule::ScalarPair => "2EiCriteria-2.2",
            Rule::NoCriterion => "none",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    /// The one transient pure state of a partially recurrent coin.
    pub transient_state: Option<DensityMatrix>,
    pub rule: Rule,
    /// Drift, when a unique stationary state exists.
    pub m: Option<f64>,
    /// Whether the auxiliary generator has a unique stationary state.
    pub h1: bool,
    pub kernel_dim: usize,
    /// Dimensions of the spectral subspaces of a generic stationary
    /// element; reported only for undetermined verdicts.
    pub candidate_subspaces: Vec<usize>,
    pub diagnostic: Option<String>,
}

impl ClassificationResult {
    fn new(verdict: Verdict, rule: Rule, st: &StationaryAnalysis) -> Self {
        ClassificationResult {
            verdict,
            transient_state: None,
            rule,
            m: None,
            h1: st.h1_holds,
            kernel_dim: st.kernel_dim,
            candidate_subspaces: Vec::new(),
            diagnostic: None,
        }
    }

    fn undetermined(st: &StationaryAnalysis, diagnostic: String) -> Self {
        let mut r = ClassificationResult::new(Verdict::Undetermined, Rule::NoCriterion, st);
        r.candidate_subspaces = candidate_subspaces(&st.stationary_basis);
        r.diagnostic = Some(diagnostic);
        r
    }
}

fn is_zero_drift(m: f64, coin: &Coin) -> bool {
    (m / coin.rate_scale()).abs() <= CLASSIFY_TOL
}

/// Recurrence verdict for site `|0⟩` (and, by homogeneity, every site).
pub fn classify(coin: &Coin) -> Result<ClassificationResult> {
    let st = auxiliary::stationary_states(coin)?;
    if let Some(rho_inv) = &st.rho_inv {
        let m = auxiliary::drift(coin, rho_inv)?.m;
        let (verdict, rule) = if is_zero_drift(m, coin) {
            (Verdict::Recurrent, Rule::UniqueStateZeroDrift)
        } else {
            (Verdict::Transient, Rule::UniqueStateNonzeroDrift)
        };
        let mut r = ClassificationResult::new(verdict, rule, &st);
        r.m = Some(m);
        return Ok(r);
    }
    if coin.dim() != 2 {
        return Ok(ClassificationResult::undetermined(
            &st,
            format!(
                "{} independent stationary states in dimension {}; no criterion covers this case",
                st.kernel_dim,
                coin.dim()
            ),
        ));
    }
    match auxiliary::common_eigenstructure(coin.c(), coin.a())? {
        Some(basis) => Ok(classify_multiple_states(coin, &basis, &st)),
        None => Ok(ClassificationResult::undetermined(
            &st,
            format!("{} stationary states but C and A are not simultaneously diagonal within tolerance", st.kernel_dim),
        )),
    }
}

/// Verdict for a coin whose `C`, `A` are diagonal in a common basis.
pub fn classify_diagonal(coin: &Coin) -> Result<ClassificationResult> {
    if coin.dim() != 2 {
        return Err(Error::UnsupportedDimension(coin.dim()));
    }
    let basis = auxiliary::common_eigenstructure(coin.c(), coin.a())?
        .ok_or_else(|| Error::InvalidArgument("C and A are not diagonal in a common orthonormal basis".into()))?;
    let st = auxiliary::stationary_states(coin)?;
    if !st.h1_holds {
        return Ok(classify_multiple_states(coin, &basis, &st));
    }
    // I/2 is stationary for every commuting normal pair.
    let sq = |z: &num_complex::Complex64| z.norm_sqr();
    let a_rate: f64 = basis.a_diag.iter().map(sq).sum();
    let c_rate: f64 = basis.c_diag.iter().map(sq).sum();
    let m = 0.5 * (a_rate - c_rate);
    let (verdict, rule) = if is_zero_drift(m, coin) {
        (Verdict::Recurrent, Rule::DiagonalUniqueState)
    } else {
        (Verdict::Transient, Rule::DiagonalUniqueState)
    };
    let mut r = ClassificationResult::new(verdict, rule, &st);
    r.m = Some(m);
    Ok(r)
}

fn classify_multiple_states(coin: &Coin, basis: &CommonEigenbasis, st: &StationaryAnalysis) -> ClassificationResult {
    let scale = coin.rate_scale();
    let root = scale.sqrt();
    let h_local = basis.u.adjoint() * coin.h() * &basis.u;
    let h2 = h_local[(0, 1)].norm() / scale;
    let (a, c) = (&basis.a_diag, &basis.c_diag);

    if h2 > CLASSIFY_TOL {
        let spread = ((a[0] - a[1]).norm() + (c[0] - c[1]).norm()) / root;
        if spread > CLASSIFY_TOL {
            return ClassificationResult::undetermined(
                st,
                format!(
                    "paper-inconsistent input: H couples the common eigenvectors (|h2| = {:.3e}) \
                     while C, A are not scalar (spread {spread:.3e}) and {} stationary states were found",
                    h2 * scale,
                    st.kernel_dim
                ),
            );
        }
        let balanced = (a[0].norm() - c[0].norm()).abs() / root <= CLASSIFY_TOL;
        let verdict = if balanced { Verdict::Recurrent } else { Verdict::Transient };
        return ClassificationResult::new(verdict, Rule::ScalarPair, st);
    }

    let balanced: Vec<bool> = (0..2).map(|i| (a[i].norm() - c[i].norm()).abs() / root <= CLASSIFY_TOL).collect();
    match (balanced[0], balanced[1]) {
        (false, false) => ClassificationResult::new(Verdict::Transient, Rule::DiagonalBothUnbalanced, st),
        (true, true) => ClassificationResult::new(Verdict::Recurrent, Rule::DiagonalBothBalanced, st),
        (b0, _) => {
            let j = if b0 { 1 } else { 0 };
            let mut r = ClassificationResult::new(Verdict::PartiallyRecurrent, Rule::DiagonalOneBalanced, st);
            r.transient_state = Some(density_from_pure(&basis.vector(j)).expect("eigenvectors are unit vectors"));
            r
        }
    }
}

/// Dimensions of the eigenspaces of a generic combination of the
/// stationary basis, largest eigenvalue first.
fn candidate_subspaces(basis: &[CMatrix]) -> Vec<usize> {
    let Some(first) = basis.first() else {
        return Vec::new();
    };
    let mut mix = first.clone();
    for (k, b) in basis.iter().enumerate().skip(1) {
        let w = 1.0 / (k as f64 + std::f64::consts::SQRT_2);
        mix += b * c64(w, 0.0);
    }
    let Ok(eig) = numkernel::hermitian_eig(&mix) else {
        return Vec::new();
    };
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut dims = Vec::new();
    let mut last: Option<f64> = None;
    for &v in eig.values.iter().rev() {
        match last {
            Some(prev) if (prev - v).abs() <= 1e-8 * scale => *dims.last_mut().unwrap() += 1,
            _ => dims.push(1),
        }
        last = Some(v);
    }
    dims
}
