// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integrator for autonomous complex ODEs `y' = f(y)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince stepper with FSAL reuse.
///
/// The step is accepted when `max_i |err_i| / (atol + rtol·max(|y_i|, |ŷ_i|)) ≤ 1`.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    /// Next step size to try.
    pub h: f64,
    pub h_max: f64,
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    fsal_valid: bool,
    pub accepted: usize,
    pub rejected: usize,
}

impl DormandPrince {
    pub fn new(dim: usize, rtol: f64, atol: f64, h0: f64) -> Self {
        let z = || vec![Complex64::new(0.0, 0.0); dim];
        DormandPrince {
            rtol,
            atol,
            h: h0,
            h_max: f64::INFINITY,
            k: [z(), z(), z(), z(), z(), z(), z()],
            stage: z(),
            y_new: z(),
            fsal_valid: false,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Forget the cached derivative; call after modifying `y` externally.
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    fn combine<const N: usize>(&mut self, y: &[Complex64], h: f64, weights: [(usize, f64); N]) {
        let k = &self.k;
        let hw = weights.map(|(idx, w)| (idx, h * w));
        for (i, (s, &yi)) in self.stage.iter_mut().zip(y).enumerate() {
            let mut acc = yi;
            for &(idx, w) in &hw {
                acc += k[idx][i] * w;
            }
            *s = acc;
        }
    }

    /// Advances `y` from `t0` to `t1`, landing exactly on `t1`.
    pub fn integrate<F>(&mut self, f: &F, y: &mut [Complex64], t0: f64, t1: f64) -> Result<()>
    where
        F: Fn(&[Complex64], &mut [Complex64]),
    {
        let mut t = t0;
        if t1 <= t0 {
            return Ok(());
        }
        if !self.fsal_valid {
            f(y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        while t < t1 {
            let remaining = t1 - t;
            let mut h = self.h.min(self.h_max);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t });
            }

            self.combine(y, h, [(0, A21)]);
            f(&self.stage, &mut self.k[1]);
            self.combine(y, h, [(0, A31), (1, A32)]);
            f(&self.stage, &mut self.k[2]);
            self.combine(y, h, [(0, A41), (1, A42), (2, A43)]);
            f(&self.stage, &mut self.k[3]);
            self.combine(y, h, [(0, A51), (1, A52), (2, A53), (3, A54)]);
            f(&self.stage, &mut self.k[4]);
            self.combine(y, h, [(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            f(&self.stage, &mut self.k[5]);
            self.combine(y, h, [(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
            self.y_new.copy_from_slice(&self.stage);
            f(&self.y_new, &mut self.k[6]);

            // squared max-norm of the scaled error estimate
            let mut err2 = 0.0f64;
            #[allow(clippy::needless_range_loop)]
            for i in 0..y.len() {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h;
                let mag2 = y[i].norm_sqr().max(self.y_new[i].norm_sqr());
                let sc = self.atol + self.rtol * mag2.sqrt();
                err2 = err2.max(e.norm_sqr() / (sc * sc));
            }
            let err = err2.sqrt();
            if !err.is_finite() {
                return Err(Error::NonFinite);
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                t = if last { t1 } else { t + h };
                self.accepted += 1;
                // Keep the unclamped proposal when the step was shortened to
                // land on t1.
                let proposal = h * factor;
                self.h = if last { self.h.max(proposal) } else { proposal };
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = i y, y(0) = 1 → y(t) = e^{it}
        let f = |y: &[Complex64], dy: &mut [Complex64]| dy[0] = y[0] * Complex64::new(0.0, 1.0);
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut dp = DormandPrince::new(1, 1e-11, 1e-13, 0.1);
        dp.integrate(&f, &mut y, 0.0, 10.0).unwrap();
        let exact = Complex64::new(0.0, 10.0).exp();
        assert!((y[0] - exact).norm() < 1e-9);
    }

    #[test]
    fn decay_lands_on_targets() {
        let f = |y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = -y[0] * 3.0;
            dy[1] = y[0] * 3.0;
        };
        let mut y = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut dp = DormandPrince::new(2, 1e-10, 1e-14, 0.01);
        let mut t = 0.0;
        for k in 1..=20 {
            let next = 0.1 * k as f64;
            dp.integrate(&f, &mut y, t, next).unwrap();
            t = next;
            assert!((y[0].re - (-3.0 * t).exp()).abs() < 1e-10);
            assert!((y[0].re + y[1].re - 1.0).abs() < 1e-12);
        }
    }
}
