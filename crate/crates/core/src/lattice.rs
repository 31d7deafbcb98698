// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Evolution of block-diagonal walk states on the truncated lattice
//! `{−M, …, M}`.
//!
//! A block-diagonal state `Σ_i ρ(i) ⊗ |i⟩⟨i|` stays block diagonal, with
//!
//! ```text
//! dρ(i)/dt = G₀ρ(i) + ρ(i)G₀* + Aρ(i−1)A* + Cρ(i+1)C*.
//! ```
//!
//! Jumps out of the window are absorbed and their probability is booked in
//! `leaked_mass`, so truncation error is observable: every site
//! probability is off from its infinite-lattice value by at most the
//! leaked mass.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_g0, Coin, DensityMatrix};
use crate::numkernel::{self, c64, CMatrix};
use crate::ode::DormandPrince;

/// Leakage accepted by operations that need infinite-lattice accuracy.
pub const LEAK_LIMIT: f64 = 1e-8;
/// Probability below which a site is not conditioned on.
pub const CONDITIONING_THRESHOLD: f64 = 1e-12;
/// Largest augmented state size for which the exact dense propagator is used.
pub const DENSE_LIMIT: usize = 128;
/// Default per-step relative tolerance of the adaptive integrator.
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Default per-step absolute tolerance of the adaptive integrator.
pub const DEFAULT_ATOL: f64 = 1e-13;
const MAX_RADIUS: usize = 1 << 16;

/// Site on the integer line.
pub type Site = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Dense propagator for small windows, adaptive Runge–Kutta otherwise.
    #[default]
    Auto,
    Adaptive,
    /// Exact `e^{t𝓛}` of the full truncated generator.
    Dense,
}

/// Block generator on `{−M, …, M}` with absorbing boundary.
#[derive(Debug, Clone)]
pub struct BlockGenerator {
    coin: Coin,
    radius: usize,
    d: usize,
    g0: Vec<Complex64>,
    g0_adj: Vec<Complex64>,
    a: Vec<Complex64>,
    a_adj: Vec<Complex64>,
    c: Vec<Complex64>,
    c_adj: Vec<Complex64>,
    pub rtol: f64,
    pub atol: f64,
    pub method: Method,
}

pub fn build_block_generator(coin: &Coin, radius: usize) -> Result<BlockGenerator> {
    if radius == 0 {
        return Err(Error::InvalidArgument("truncation radius must be at least 1".into()));
    }
    if radius > MAX_RADIUS {
        return Err(Error::InvalidArgument(format!("truncation radius {radius} exceeds {MAX_RADIUS}")));
    }
    let g0 = build_g0(coin).g0;
    let flat = |m: &CMatrix| m.as_slice().to_vec();
    Ok(BlockGenerator {
        coin: coin.clone(),
        radius,
        d: coin.dim(),
        g0_adj: flat(&g0.adjoint()),
        g0: flat(&g0),
        a: flat(coin.a()),
        a_adj: flat(&coin.a().adjoint()),
        c: flat(coin.c()),
        c_adj: flat(&coin.c().adjoint()),
        rtol: DEFAULT_RTOL,
        atol: DEFAULT_ATOL,
        method: Method::Auto,
    })
}

// out += a·b for column-major D×D blocks; D is a compile-time constant
// for the common small dimensions so the loops unroll.
#[inline(always)]
fn matmul_acc<const D: usize>(a: &[Complex64], b: &[Complex64], out: &mut [Complex64], d: usize) {
    let d = if D == 0 { d } else { D };
    for (oj, bj) in out.chunks_exact_mut(d).zip(b.chunks_exact(d)) {
        for (ak, &bkj) in a.chunks_exact(d).zip(bj) {
            for (o, &x) in oj.iter_mut().zip(ak) {
                *o += x * bkj;
            }
        }
    }
}

#[inline(always)]
fn matmul<const D: usize>(a: &[Complex64], b: &[Complex64], out: &mut [Complex64], d: usize) {
    out.fill(Complex64::new(0.0, 0.0));
    matmul_acc::<D>(a, b, out, d);
}

impl BlockGenerator {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn coin(&self) -> &Coin {
        &self.coin
    }

    pub fn n_sites(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    /// Length of the flattened state: all blocks plus the leaked mass.
    fn state_len(&self) -> usize {
        self.n_sites() * self.d * self.d + 1
    }

    pub fn site_index(&self, site: Site) -> Option<usize> {
        let r = self.radius as i64;
        (-r..=r).contains(&site).then(|| (site + r) as usize)
    }

    fn require_site(&self, site: Site) -> Result<usize> {
        self.site_index(site).ok_or_else(|| {
            Error::InvalidArgument(format!("site {site} lies outside the truncation window ±{}", self.radius))
        })
    }

    /// Time derivative of a flattened state.
    pub fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        match self.d {
            1 => self.apply_dim::<1>(y, dy),
            2 => self.apply_dim::<2>(y, dy),
            3 => self.apply_dim::<3>(y, dy),
            4 => self.apply_dim::<4>(y, dy),
            _ => self.apply_dim::<0>(y, dy),
        }
    }

    fn apply_dim<const D: usize>(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let d = self.d;
        let bs = d * d;
        let n = self.n_sites();
        let zero = Complex64::new(0.0, 0.0);
        let mut t1 = vec![zero; bs];
        let mut spill = vec![zero; bs];
        dy.fill(zero);
        let (blocks_out, leak) = dy.split_at_mut(n * bs);
        for (s, rho) in y[..n * bs].chunks_exact(bs).enumerate() {
            {
                let out = &mut blocks_out[s * bs..(s + 1) * bs];
                matmul_acc::<D>(&self.g0, rho, out, d);
                matmul_acc::<D>(rho, &self.g0_adj, out, d);
            }
            // right jump: AρA* lands on s + 1, or leaves the window
            matmul::<D>(&self.a, rho, &mut t1, d);
            if s + 1 < n {
                matmul_acc::<D>(&t1, &self.a_adj, &mut blocks_out[(s + 1) * bs..(s + 2) * bs], d);
            } else {
                matmul::<D>(&t1, &self.a_adj, &mut spill, d);
                leak[0] += (0..d).map(|i| spill[i * d + i]).sum::<Complex64>();
            }
            // left jump: CρC* lands on s − 1
            matmul::<D>(&self.c, rho, &mut t1, d);
            if s > 0 {
                matmul_acc::<D>(&t1, &self.c_adj, &mut blocks_out[(s - 1) * bs..s * bs], d);
            } else {
                matmul::<D>(&t1, &self.c_adj, &mut spill, d);
                leak[0] += (0..d).map(|i| spill[i * d + i]).sum::<Complex64>();
            }
        }
    }

    /// Applies the generator to explicit blocks; returns the derivative
    /// blocks and the rate at which mass leaves the window.
    pub fn apply_to_blocks(&self, blocks: &[CMatrix]) -> Result<(Vec<CMatrix>, f64)> {
        if blocks.len() != self.n_sites() || blocks.iter().any(|b| b.shape() != (self.d, self.d)) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} blocks of size {}x{}",
                self.n_sites(),
                self.d,
                self.d
            )));
        }
        let y = flatten(blocks, 0.0, self.state_len());
        let mut dy = vec![Complex64::new(0.0, 0.0); y.len()];
        self.apply(&y, &mut dy);
        let state = unflatten(&dy, self.radius, self.d, 0.0);
        Ok((state.blocks, state.leaked_mass))
    }

    fn initial_step(&self) -> f64 {
        let rate = numkernel::one_norm(&self.coin.rate_operator()) + numkernel::one_norm(self.coin.h());
        0.05 / rate.max(1e-12)
    }

    fn dense_matrix(&self) -> CMatrix {
        let n = self.state_len();
        let mut m = CMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n - 1 {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            e[j] = Complex64::new(0.0, 0.0);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    fn use_dense(&self) -> bool {
        match self.method {
            Method::Dense => true,
            Method::Adaptive => false,
            Method::Auto => self.state_len() <= DENSE_LIMIT,
        }
    }

    fn delta_state(&self, rho0: &DensityMatrix, i0: Site) -> Result<Vec<Complex64>> {
        if rho0.dim() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "initial state is {}x{}, coin dimension is {}",
                rho0.dim(),
                rho0.dim(),
                self.d
            )));
        }
        let idx = self.require_site(i0)?;
        let bs = self.d * self.d;
        let mut y = vec![Complex64::new(0.0, 0.0); self.state_len()];
        y[idx * bs..(idx + 1) * bs].copy_from_slice(rho0.matrix().as_slice());
        Ok(y)
    }

    fn propagator(&self, y: Vec<Complex64>) -> Propagator<'_> {
        let stepper = if self.use_dense() {
            Stepper::Dense { generator: self.dense_matrix(), cached: None }
        } else {
            Stepper::Adaptive(DormandPrince::new(y.len(), self.rtol, self.atol, self.initial_step()))
        };
        Propagator { gen: self, y, t: 0.0, stepper }
    }
}

fn flatten(blocks: &[CMatrix], leaked: f64, len: usize) -> Vec<Complex64> {
    let mut y = Vec::with_capacity(len);
    for b in blocks {
        y.extend_from_slice(b.as_slice());
    }
    y.push(Complex64::new(leaked, 0.0));
    y
}

fn unflatten(y: &[Complex64], radius: usize, d: usize, time: f64) -> BlockState {
    let bs = d * d;
    let n = 2 * radius + 1;
    let blocks = (0..n).map(|s| CMatrix::from_column_slice(d, d, &y[s * bs..(s + 1) * bs])).collect();
    BlockState { radius, d, time, blocks, leaked_mass: y[n * bs].re }
}

enum Stepper {
    Adaptive(DormandPrince),
    Dense { generator: CMatrix, cached: Option<(f64, CMatrix)> },
}

struct Propagator<'g> {
    gen: &'g BlockGenerator,
    y: Vec<Complex64>,
    t: f64,
    stepper: Stepper,
}

impl Propagator<'_> {
    fn advance_to(&mut self, target: f64) -> Result<()> {
        if target < self.t {
            return Err(Error::InvalidArgument("cannot integrate backwards in time".into()));
        }
        let dt = target - self.t;
        if dt == 0.0 {
            return Ok(());
        }
        match &mut self.stepper {
            Stepper::Adaptive(dp) => {
                let gen = self.gen;
                dp.integrate(&|y: &[Complex64], dy: &mut [Complex64]| gen.apply(y, dy), &mut self.y, self.t, target)?;
            }
            Stepper::Dense { generator, cached } => {
                let hit = matches!(cached, Some((h, _)) if (*h - dt).abs() <= 1e-14 * dt);
                if !hit {
                    *cached = Some((dt, numkernel::mat_exp(generator, dt)?));
                }
                let prop = &cached.as_ref().expect("propagator cached above").1;
                let v = numkernel::CVector::from_column_slice(&self.y);
                self.y.copy_from_slice((prop * v).as_slice());
            }
        }
        self.t = target;
        Ok(())
    }

    fn site_trace(&self, idx: usize) -> f64 {
        let d = self.gen.d;
        let bs = d * d;
        (0..d).map(|i| self.y[idx * bs + i * d + i].re).sum()
    }

    fn leaked(&self) -> f64 {
        self.y[self.y.len() - 1].re
    }

    fn snapshot(&self) -> BlockState {
        unflatten(&self.y, self.gen.radius, self.gen.d, self.t)
    }
}

/// Block-diagonal state on the truncated lattice at a given time.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub radius: usize,
    pub d: usize,
    pub time: f64,
    /// `blocks[i + M] = ρ_t(i)`.
    pub blocks: Vec<CMatrix>,
    /// Probability absorbed at the window boundary so far.
    pub leaked_mass: f64,
}

impl BlockState {
    pub fn block(&self, site: Site) -> Option<&CMatrix> {
        let r = self.radius as i64;
        (-r..=r).contains(&site).then(|| &self.blocks[(site + r) as usize])
    }

    /// `Tr ρ_t(site)`, zero outside the window.
    pub fn site_probability(&self, site: Site) -> f64 {
        self.block(site).map_or(0.0, |b| b.trace().re)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> {
        let r = self.radius as i64;
        -r..=r
    }

    pub fn retained_mass(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    /// `|Σ Tr ρ(i) + leaked − 1|`.
    pub fn conservation_defect(&self) -> f64 {
        (self.retained_mass() + self.leaked_mass - 1.0).abs()
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                numkernel::hermitian_eig(&numkernel::hermitian_part(b))
                    .map(|e| e.values[0])
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest Hermiticity defect over all blocks.
    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks.iter().map(numkernel::hermiticity_defect).fold(0.0, f64::max)
    }
}

/// `ρ_t` for the walk started at `i0` in internal state `rho0`.
pub fn evolve(gen: &BlockGenerator, rho0: &DensityMatrix, i0: Site, t: f64) -> Result<BlockState> {
    check_time(t)?;
    let mut p = gen.propagator(gen.delta_state(rho0, i0)?);
    p.advance_to(t)?;
    Ok(p.snapshot())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `p_{j i0; ρ}(t) = Tr ρ_t(j)`.
pub fn transition_probability(gen: &BlockGenerator, rho0: &DensityMatrix, i0: Site, j: Site, t: f64) -> Result<f64> {
    gen.require_site(j)?;
    let state = evolve(gen, rho0, i0, t)?;
    Ok(state.site_probability(j).clamp(0.0, 1.0))
}

/// Internal state at site `k` at time `beta`, conditioned on the walker
/// being there.
pub fn conditioned_state(
    gen: &BlockGenerator,
    rho0: &DensityMatrix,
    i0: Site,
    k: Site,
    beta: f64,
) -> Result<DensityMatrix> {
    gen.require_site(k)?;
    let state = evolve(gen, rho0, i0, beta)?;
    conditioned_block(&state, k)
}

fn conditioned_block(state: &BlockState, k: Site) -> Result<DensityMatrix> {
    let block = state.block(k).expect("site checked by caller");
    let p = block.trace().re;
    if p <= CONDITIONING_THRESHOLD {
        return Err(Error::NegligibleProbability { probability: p });
    }
    DensityMatrix::new(numkernel::hermitian_part(block) * c64(1.0 / p, 0.0))
}

/// `|p_{j i0}(α+β) − Σ_k p_{j k; ρ'_k}(α) p_{k i0}(β)|`, where `ρ'_k` is
/// the state at `k` conditioned at time `β` and the sum skips sites with
/// `p_{k i0}(β) ≤ 10⁻¹²`.
pub fn chapman_kolmogorov_residual(
    gen: &BlockGenerator,
    rho0: &DensityMatrix,
    i0: Site,
    j: Site,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_time(alpha)?;
    check_time(beta)?;
    gen.require_site(j)?;
    let full = evolve(gen, rho0, i0, alpha + beta)?;
    if full.leaked_mass > LEAK_LIMIT {
        return Err(Error::LeakageExceeded { leaked: full.leaked_mass, limit: LEAK_LIMIT, radius: gen.radius });
    }
    let lhs = full.site_probability(j);
    let mid = evolve(gen, rho0, i0, beta)?;
    let mut rhs = 0.0;
    for k in mid.sites() {
        let p = mid.site_probability(k);
        if p <= CONDITIONING_THRESHOLD {
            continue;
        }
        let rho_k = conditioned_block(&mid, k)?;
        let onward = evolve(gen, &rho_k, k, alpha)?.site_probability(j);
        rhs += onward * p;
    }
    Ok((lhs - rhs).abs())
}

/// Composite-Simpson value of `∫₀^T p_{i0 i0; ρ}(t) dt` with partial values
/// at `T/4` and `T/2` as growth diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnIntegral {
    pub horizon: f64,
    pub value: f64,
    pub quarter: f64,
    pub half: f64,
    pub intervals: usize,
    pub leaked_mass: f64,
}

pub fn return_integral(
    gen: &BlockGenerator,
    rho0: &DensityMatrix,
    i0: Site,
    horizon: f64,
    quad_step: f64,
) -> Result<ReturnIntegral> {
    if !(horizon > 0.0) || !(quad_step > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument("horizon and quadrature step must be positive".into()));
    }
    let idx = gen.require_site(i0)?;
    // multiple of 8 so that T/4 and T/2 fall on even nodes
    let intervals = 8 * ((horizon / (8.0 * quad_step)).ceil() as usize).max(1);
    let h = horizon / intervals as f64;
    let mut p = gen.propagator(gen.delta_state(rho0, i0)?);
    let mut samples = Vec::with_capacity(intervals + 1);
    samples.push(p.site_trace(idx));
    for n in 1..=intervals {
        p.advance_to(n as f64 * h)?;
        samples.push(p.site_trace(idx));
    }
    let leaked = p.leaked();
    if leaked > LEAK_LIMIT {
        return Err(Error::LeakageExceeded { leaked, limit: LEAK_LIMIT, radius: gen.radius });
    }
    let simpson = |upto: usize| {
        let mut s = samples[0] + samples[upto];
        for (k, v) in samples.iter().enumerate().take(upto).skip(1) {
            s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * h / 3.0
    };
    Ok(ReturnIntegral {
        horizon,
        value: simpson(intervals),
        quarter: simpson(intervals / 4),
        half: simpson(intervals / 2),
        intervals,
        leaked_mass: leaked,
    })
}

/// Partial sums `Σ_{n=0}^{N} p_{j i0; ρ}(nδ)` of the δ-skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSum {
    pub delta: f64,
    /// `partial_sums[n] = Σ_{k ≤ n} p(kδ)`.
    pub partial_sums: Vec<f64>,
    pub leaked_mass: f64,
}

impl SkeletonSum {
    pub fn value(&self) -> f64 {
        *self.partial_sums.last().expect("at least the n = 0 term")
    }
}

pub fn skeleton_sum(
    gen: &BlockGenerator,
    rho0: &DensityMatrix,
    i0: Site,
    j: Site,
    delta: f64,
    n: usize,
) -> Result<SkeletonSum> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let idx = gen.require_site(j)?;
    let mut p = gen.propagator(gen.delta_state(rho0, i0)?);
    let mut acc = p.site_trace(idx);
    let mut partial_sums = Vec::with_capacity(n + 1);
    partial_sums.push(acc);
    for step in 1..=n {
        p.advance_to(step as f64 * delta)?;
        acc += p.site_trace(idx);
        partial_sums.push(acc);
    }
    Ok(SkeletonSum { delta, partial_sums, leaked_mass: p.leaked() })
}

/// `(t, p_{j i0}(t))` on a uniform grid of `intervals + 1` points over `[0, horizon]`.
pub fn probability_series(
    gen: &BlockGenerator,
    rho0: &DensityMatrix,
    i0: Site,
    j: Site,
    horizon: f64,
    intervals: usize,
) -> Result<Vec<(f64, f64)>> {
    let rows = profile_series(gen, rho0, i0, horizon, intervals)?;
    let idx = gen.require_site(j)?;
    Ok(rows.iter().map(|s| (s.time, s.blocks[idx].trace().re)).collect())
}

/// Full states on a uniform grid of `intervals + 1` points over `[0, horizon]`.
pub fn profile_series(
    gen: &BlockGenerator,
    rho0: &DensityMatrix,
    i0: Site,
    horizon: f64,
    intervals: usize,
) -> Result<Vec<BlockState>> {
    check_time(horizon)?;
    if intervals == 0 {
        return Err(Error::InvalidArgument("at least one time interval is required".into()));
    }
    let mut p = gen.propagator(gen.delta_state(rho0, i0)?);
    let mut out = vec![p.snapshot()];
    for n in 1..=intervals {
        p.advance_to(horizon * n as f64 / intervals as f64)?;
        out.push(p.snapshot());
    }
    Ok(out)
}

/// Smallest doubling of a diffusive first guess whose leakage at `horizon`
/// stays below [`LEAK_LIMIT`], judged by a coarse-tolerance pilot run.
pub fn fit_radius(coin: &Coin, rho0: &DensityMatrix, i0: Site, horizon: f64) -> Result<BlockGenerator> {
    check_time(horizon)?;
    let rate = numkernel::hermitian_eig(&coin.rate_operator())?.values.last().copied().unwrap_or(0.0);
    let mut radius = i0.unsigned_abs() as usize + (8.0 * (rate * horizon).sqrt()).ceil() as usize + 8;
    loop {
        let pilot = build_block_generator(coin, radius)?.with_tolerances(1e-7, 1e-15).with_method(Method::Adaptive);
        let state = evolve(&pilot, rho0, i0, horizon)?;
        if state.leaked_mass < 0.5 * LEAK_LIMIT {
            return build_block_generator(coin, radius);
        }
        if radius >= MAX_RADIUS / 2 {
            return Err(Error::LeakageExceeded { leaked: state.leaked_mass, limit: LEAK_LIMIT, radius });
        }
        radius *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numkernel::diag;

    fn mixed(d: usize) -> DensityMatrix {
        DensityMatrix::maximally_mixed(d)
    }

    #[test]
    fn scalar_symmetric_reduces_to_birth_death_rates() {
        let gen = build_block_generator(&fixtures::scalar_coin(1.0, 1.0), 1).unwrap();
        let probs = [0.2, 0.5, 0.3];
        let blocks: Vec<CMatrix> = probs.iter().map(|&p| CMatrix::from_element(1, 1, c64(p, 0.0))).collect();
        let (dot, leak) = gen.apply_to_blocks(&blocks).unwrap();
        // Q-matrix with unit rates in both directions, absorbing outside ±1
        let expected = [-2.0 * 0.2 + 0.5, -2.0 * 0.5 + 0.2 + 0.3, -2.0 * 0.3 + 0.5];
        for (b, e) in dot.iter().zip(expected) {
            assert!((b[(0, 0)].re - e).abs() < 1e-15);
        }
        assert!((leak - 0.5).abs() < 1e-15);
    }

    #[test]
    fn initial_derivative_of_right_neighbour() {
        let coin = fixtures::example4(0.0);
        let gen = build_block_generator(&coin, 3).unwrap();
        let rho = fixtures::example4_rho_inv_c0();
        let mut blocks = vec![CMatrix::zeros(3, 3); 7];
        blocks[3] = rho.clone();
        let (dot, _) = gen.apply_to_blocks(&blocks).unwrap();
        let expected = (coin.a() * &rho * coin.a().adjoint()).trace().re;
        assert!((dot[4].trace().re - expected).abs() < 1e-14);
        let total: f64 = dot.iter().map(|b| b.trace().re).sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_delta_state() {
        let gen = build_block_generator(&fixtures::example1(3.0), 4).unwrap();
        let rho = DensityMatrix::new(diag(&[c64(0.25, 0.0), c64(0.75, 0.0)])).unwrap();
        let s = evolve(&gen, &rho, -2, 0.0).unwrap();
        assert_eq!(s.block(-2).unwrap(), rho.matrix());
        assert_eq!(s.retained_mass(), 1.0);
        assert_eq!(transition_probability(&gen, &rho, -2, -2, 0.0).unwrap(), 1.0);
        assert_eq!(transition_probability(&gen, &rho, -2, 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_sites_outside_window() {
        let gen = build_block_generator(&fixtures::scalar_coin(1.0, 1.0), 2).unwrap();
        assert!(evolve(&gen, &mixed(1), 3, 1.0).is_err());
        assert!(transition_probability(&gen, &mixed(1), 0, -3, 1.0).is_err());
        assert!(build_block_generator(&fixtures::scalar_coin(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn conditioned_states() {
        let gen = build_block_generator(&fixtures::scalar_coin(1.0, 2.0), 10).unwrap();
        let s = conditioned_state(&gen, &mixed(1), 0, 2, 0.7).unwrap();
        assert!((s.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);

        let coin = fixtures::example1(3.0);
        let gen = build_block_generator(&coin, 6).unwrap();
        let rho = DensityMatrix::new(diag(&[c64(0.3, 0.0), c64(0.7, 0.0)])).unwrap();
        assert_eq!(conditioned_state(&gen, &rho, 1, 1, 0.0).unwrap(), rho);
        assert!(matches!(conditioned_state(&gen, &rho, 0, 3, 0.0), Err(Error::NegligibleProbability { .. })));
    }

    #[test]
    fn diagonal_coin_keeps_diagonal_blocks() {
        let c = diag(&[c64(1.0, 0.0), c64(0.5, 0.5)]);
        let a = diag(&[c64(0.7, 0.0), c64(1.2, 0.0)]);
        let h = diag(&[c64(0.4, 0.0), c64(-0.9, 0.0)]);
        let coin = Coin::new(c, a, h).unwrap();
        let gen = build_block_generator(&coin, 12).unwrap();
        let rho = mixed(2);
        let cond = conditioned_state(&gen, &rho, 0, 1, 1.3).unwrap();
        assert!(cond.matrix()[(0, 1)].norm() <= 1e-12);
        let s = evolve(&gen, &rho, 0, 2.0).unwrap();
        for b in &s.blocks {
            assert!(b[(0, 1)].norm() <= 1e-12 && b[(1, 0)].norm() <= 1e-12);
        }
    }

    #[test]
    fn chapman_kolmogorov_trivial_splits() {
        let coin = fixtures::example1(3.0);
        let gen = build_block_generator(&coin, 25).unwrap();
        let rho = mixed(2);
        assert!(chapman_kolmogorov_residual(&gen, &rho, 0, 1, 0.0, 0.6).unwrap() <= 1e-12);
        assert!(chapman_kolmogorov_residual(&gen, &rho, 0, 1, 0.6, 0.0).unwrap() <= 1e-12);
    }

    #[test]
    fn chapman_kolmogorov_detects_leakage() {
        let gen = build_block_generator(&fixtures::scalar_coin(1.0, 1.0), 1).unwrap();
        assert!(matches!(
            chapman_kolmogorov_residual(&gen, &mixed(1), 0, 0, 1.0, 1.0),
            Err(Error::LeakageExceeded { .. })
        ));
    }

    #[test]
    fn return_integral_short_horizon_is_linear() {
        let gen = build_block_generator(&fixtures::example1(3.0), 10).unwrap();
        let t = 1e-3;
        let r = return_integral(&gen, &mixed(2), 0, t, 1e-4).unwrap();
        assert!((r.value / t - 1.0).abs() < 1e-2);
        assert!(r.quarter < r.half && r.half < r.value);
    }

    #[test]
    fn skeleton_zero_terms() {
        let gen = build_block_generator(&fixtures::example1(3.0), 5).unwrap();
        let s = skeleton_sum(&gen, &mixed(2), 0, 0, 0.5, 0).unwrap();
        assert_eq!(s.value(), 1.0);
        let s = skeleton_sum(&gen, &mixed(2), 0, 2, 0.5, 0).unwrap();
        assert_eq!(s.value(), 0.0);
        assert!(skeleton_sum(&gen, &mixed(2), 0, 0, 0.0, 3).is_err());
    }

    #[test]
    fn dense_and_adaptive_routes_agree() {
        let coin = fixtures::example3(0.5, 0.8);
        let rho = DensityMatrix::new(diag(&[c64(0.6, 0.0), c64(0.4, 0.0)])).unwrap();
        let dense = build_block_generator(&coin, 6).unwrap().with_method(Method::Dense);
        let adaptive = build_block_generator(&coin, 6).unwrap().with_method(Method::Adaptive);
        let sd = evolve(&dense, &rho, 0, 1.5).unwrap();
        let sa = evolve(&adaptive, &rho, 0, 1.5).unwrap();
        for (x, y) in sd.blocks.iter().zip(&sa.blocks) {
            assert!(numkernel::max_abs(&(x - y)) < 1e-10);
        }
        assert!((sd.leaked_mass - sa.leaked_mass).abs() < 1e-10);
    }

    #[test]
    fn fitted_radius_meets_leak_limit() {
        let coin = fixtures::example4(1.0);
        let rho = mixed(3);
        let gen = fit_radius(&coin, &rho, 0, 1.0).unwrap();
        let s = evolve(&gen, &rho, 0, 1.0).unwrap();
        assert!(s.leaked_mass < LEAK_LIMIT);
        assert!(s.retained_mass() >= 1.0 - 1e-6);
    }
}
