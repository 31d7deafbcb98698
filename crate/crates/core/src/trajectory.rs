// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum-jump unraveling of the walk: the pair `(X_t, ρ_t)` of position
//! and conditioned internal state.
//!
//! Between jumps the unnormalized state follows `σ_t = e^{G₀t} ρ e^{G₀*t}`
//! and the survival probability is `Tr σ_t`. A jump to the right applies
//! `A`, a jump to the left applies `C`, each followed by renormalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::model::{build_g0, Coin, DensityMatrix};
use crate::numkernel::{self, CMatrix};
use crate::output::{fmt_real, json_real};

/// Maximum number of jumps on a single path.
pub const JUMP_GUARD: usize = 1_000_000;
/// Relative accuracy of sampled jump times.
pub const JUMP_TIME_RTOL: f64 = 1e-10;
// Survival must cross the drawn level before this many mean waiting times
// at the fastest rate.
const SURVIVAL_GUARD: f64 = 1e8;

/// Outcome of one jump draw.
#[derive(Debug, Clone)]
pub struct Jump {
    pub dt: f64,
    /// `+1` for a right jump (`A`), `−1` for a left jump (`C`).
    pub direction: i8,
    pub rho_after: DensityMatrix,
}

/// Precomputed operators for repeated jump sampling with one coin.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    coin: Coin,
    g0: CMatrix,
    rate: CMatrix,
    right_rate: CMatrix,
    lambda_max: f64,
}

impl JumpSampler {
    pub fn new(coin: &Coin) -> Result<Self> {
        let rate = coin.rate_operator();
        let lambda_max = *numkernel::hermitian_eig(&rate)?.values.last().expect("nonempty spectrum");
        if !(lambda_max > 0.0) {
            return Err(Error::NoMovement);
        }
        Ok(JumpSampler {
            g0: build_g0(coin).g0,
            right_rate: coin.a().adjoint() * coin.a(),
            rate,
            lambda_max,
            coin: coin.clone(),
        })
    }

    pub fn coin(&self) -> &Coin {
        &self.coin
    }

    /// `σ_t = e^{G₀t} ρ e^{G₀*t}`.
    pub fn no_jump_evolution(&self, rho: &DensityMatrix, t: f64) -> Result<CMatrix> {
        let e = numkernel::mat_exp(&self.g0, t)?;
        Ok(&e * rho.matrix() * e.adjoint())
    }

    /// Probability of no jump during `[0, t]`.
    pub fn survival(&self, rho: &DensityMatrix, t: f64) -> Result<f64> {
        Ok(self.no_jump_evolution(rho, t)?.trace().re)
    }

    /// Draws the waiting time, direction and post-jump state.
    pub fn sample<R: Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<Jump> {
        if rho.dim() != self.coin.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} does not match coin dimension {}",
                rho.dim(),
                self.coin.dim()
            )));
        }
        // (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let (dt, sigma) = self.invert_survival(rho, u)?;

        let total = (&self.rate * &sigma).trace().re;
        let right = (&self.right_rate * &sigma).trace().re.max(0.0);
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!("jump rate vanishes at t = {dt}")));
        }
        let go_right = rng.random::<f64>() * total < right;
        let k = if go_right { self.coin.a() } else { self.coin.c() };
        let after = k * &sigma * k.adjoint();
        Ok(Jump { dt, direction: if go_right { 1 } else { -1 }, rho_after: DensityMatrix::from_unnormalized(&after)? })
    }

    // Solves Tr σ_t = u. The survival is non-increasing with derivative
    // −Tr(Kσ_t), so Newton iterates are kept inside a shrinking bracket and
    // replaced by bisection whenever they leave it.
    fn invert_survival(&self, rho: &DensityMatrix, u: f64) -> Result<(f64, CMatrix)> {
        if u >= 1.0 {
            return Ok((0.0, rho.matrix().clone()));
        }
        let eval = |t: f64| -> Result<(f64, CMatrix)> {
            let s = self.no_jump_evolution(rho, t)?;
            Ok((s.trace().re, s))
        };
        let rate0 = (&self.rate * rho.matrix()).trace().re;
        let guard = SURVIVAL_GUARD / self.lambda_max;

        let mut lo = 0.0;
        let mut hi = if rate0 > 1e-300 { (-u.ln() / rate0).min(guard) } else { 1.0 / self.lambda_max };
        let (mut s, mut sigma) = eval(hi)?;
        while s > u {
            if hi >= guard {
                return Err(Error::SurvivalPlateau { level: s, horizon: hi });
            }
            lo = hi;
            hi = (2.0 * hi).min(guard);
            (s, sigma) = eval(hi)?;
        }

        let mut t = hi;
        for _ in 0..200 {
            let slope = (&self.rate * &sigma).trace().re;
            let newton = if slope > 0.0 { t + (s - u) / slope } else { f64::NAN };
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            let (s_next, sigma_next) = eval(next)?;
            if s_next > u {
                lo = next;
            } else {
                hi = next;
            }
            let step = (next - t).abs();
            t = next;
            s = s_next;
            sigma = sigma_next;
            if step <= JUMP_TIME_RTOL * t || hi - lo <= JUMP_TIME_RTOL * hi {
                break;
            }
        }
        Ok((t, sigma))
    }
}

/// One jump draw from `rho` with a freshly built sampler.
pub fn sample_next_jump<R: Rng + ?Sized>(coin: &Coin, rho: &DensityMatrix, rng: &mut R) -> Result<Jump> {
    JumpSampler::new(coin)?.sample(rho, rng)
}

/// A sampled path on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct TrajectoryPath {
    pub jump_times: Vec<f64>,
    /// Position before any jump followed by the position after each jump.
    pub sites: Vec<Site>,
    /// Internal state at time 0 followed by the state after each jump.
    pub states: Vec<DensityMatrix>,
    pub horizon: f64,
}

impl TrajectoryPath {
    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    /// `X_T`.
    pub fn final_site(&self) -> Site {
        *self.sites.last().expect("path holds its starting site")
    }

    /// Position at time `t ∈ [0, horizon]`.
    pub fn site_at(&self, t: f64) -> Site {
        let k = self.jump_times.partition_point(|&s| s <= t);
        self.sites[k]
    }

    /// CSV with header `jump_index,time,site`; row 0 is the start.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("jump_index,time,site\n");
        out.push_str(&format!("0,{},{}\n", fmt_real(0.0), self.sites[0]));
        for (k, (t, s)) in self.jump_times.iter().zip(&self.sites[1..]).enumerate() {
            out.push_str(&format!("{},{},{}\n", k + 1, fmt_real(*t), s));
        }
        out
    }
}

pub fn simulate_path<R: Rng + ?Sized>(
    coin: &Coin,
    i0: Site,
    rho0: &DensityMatrix,
    horizon: f64,
    rng: &mut R,
) -> Result<TrajectoryPath> {
    simulate_with(&JumpSampler::new(coin)?, i0, rho0, horizon, rng)
}

/// [`simulate_path`] with a prebuilt sampler.
pub fn simulate_with<R: Rng + ?Sized>(
    sampler: &JumpSampler,
    i0: Site,
    rho0: &DensityMatrix,
    horizon: f64,
    rng: &mut R,
) -> Result<TrajectoryPath> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let mut path = TrajectoryPath { jump_times: Vec::new(), sites: vec![i0], states: vec![rho0.clone()], horizon };
    let mut t = 0.0;
    let mut site = i0;
    let mut rho = rho0.clone();
    loop {
        let jump = sampler.sample(&rho, rng)?;
        t += jump.dt;
        if t > horizon {
            return Ok(path);
        }
        if path.jump_times.len() >= JUMP_GUARD {
            return Err(Error::JumpGuard { limit: JUMP_GUARD });
        }
        site += Site::from(jump.direction);
        path.jump_times.push(t);
        path.sites.push(site);
        path.states.push(jump.rho_after.clone());
        rho = jump.rho_after;
    }
}

/// Random stream of path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte Carlo estimate of the asymptotic velocity `X_T / T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n_paths`.
    pub stderr: f64,
    pub n_paths: usize,
    pub horizon: f64,
    pub seed: u64,
}

impl DriftEstimate {
    /// `{"mean", "stderr", "n_paths", "horizon", "seed"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mean": json_real(self.mean),
            "stderr": json_real(self.stderr),
            "n_paths": self.n_paths,
            "horizon": json_real(self.horizon),
            "seed": self.seed,
        })
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Final positions of `n_paths` walks from site 0; path `k` uses
/// [`path_rng`]`(seed, k)`, so the result does not depend on scheduling.
pub fn final_sites(coin: &Coin, rho0: &DensityMatrix, horizon: f64, n_paths: usize, seed: u64) -> Result<Vec<Site>> {
    let sampler = JumpSampler::new(coin)?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|k| simulate_with(&sampler, 0, rho0, horizon, &mut path_rng(seed, k)).map(|p| p.final_site()))
        .collect()
}

pub fn estimate_drift(
    coin: &Coin,
    rho0: &DensityMatrix,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<DriftEstimate> {
    if !(horizon >= 100.0) {
        return Err(Error::InvalidArgument(format!("drift estimation needs horizon >= 100, got {horizon}")));
    }
    if n_paths < 100 {
        return Err(Error::InvalidArgument(format!("drift estimation needs at least 100 paths, got {n_paths}")));
    }
    let velocities: Vec<f64> =
        final_sites(coin, rho0, horizon, n_paths, seed)?.into_iter().map(|x| x as f64 / horizon).collect();
    let n = n_paths as f64;
    let mean = compensated_sum(velocities.iter().copied()) / n;
    let var = compensated_sum(velocities.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    Ok(DriftEstimate { mean, stderr: (var / n).sqrt(), n_paths, horizon, seed })
}
