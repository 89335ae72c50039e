//! Adaptive Dormand–Prince 5(4) for complex linear systems y' = f(t, y).
//!
//! Fifth-order propagation with an embedded fourth-order error estimate and
//! first-same-as-last stages. The stepper keeps its step size between calls
//! to [`Dopri5::advance`], so sampling a trajectory at fixed times does not
//! restart the step-size search.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Order of the propagated solution.
pub const ORDER: u32 = 5;

const SAFETY: f64 = 0.9;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 5.0;
const MAX_STEPS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

pub struct Dopri5 {
    tol: Tolerances,
    h: Option<f64>,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
    stats: Stats,
}

impl Dopri5 {
    pub fn new(dim: usize, tol: Tolerances) -> Self {
        Self {
            tol,
            h: None,
            k: core::array::from_fn(|_| vec![ZERO; dim]),
            stage: vec![ZERO; dim],
            y_new: vec![ZERO; dim],
            stats: Stats::default(),
        }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Step size the next call will try first.
    pub fn step_size(&self) -> Option<f64> {
        self.h
    }

    fn error_norm(&self, y: &[C64], err: &[C64]) -> f64 {
        let mut acc = 0.0;
        for ((yo, yn), e) in y.iter().zip(&self.y_new).zip(err) {
            let scale = self.tol.abs_tol + self.tol.rel_tol * yo.norm().max(yn.norm());
            let r = e.norm() / scale;
            acc += r * r;
        }
        (acc / y.len().max(1) as f64).sqrt()
    }

    fn initial_step(&self, y: &[C64], dy: &[C64], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (a, b) in y.iter().zip(dy) {
            let sc = self.tol.abs_tol + self.tol.rel_tol * a.norm();
            d0 += (a.norm() / sc).powi(2);
            d1 += (b.norm() / sc).powi(2);
        }
        let h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * (d0 / d1).sqrt() };
        h.min(self.tol.max_step).min(span)
    }

    /// Integrates `y` from `t0` to `t1` in place.
    pub fn advance<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        assert_eq!(n, self.stage.len(), "state dimension changed");
        if t1 <= t0 {
            return Ok(());
        }
        let mut t = t0;
        f(t, y, &mut self.k[0]);
        self.stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(y, &self.k[0], t1 - t0),
        };
        let mut err_buf = vec![ZERO; n];

        loop {
            let remaining = t1 - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h.min(self.tol.max_step) };
            if step <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
                return Err(Error::ToleranceNotMet { t, step });
            }
            if self.stats.accepted + self.stats.rejected > MAX_STEPS {
                return Err(Error::ToleranceNotMet { t, step });
            }

            self.stages(f, t, step, y);
            for (i, e) in err_buf.iter_mut().enumerate().take(n) {
                *e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * step;
            }
            let err = self.error_norm(y, &err_buf);
            if !err.is_finite() {
                self.stats.rejected += 1;
                h = step * MIN_SHRINK;
                continue;
            }
            let factor = if err == 0.0 { MAX_GROW } else { (SAFETY * err.powf(-1.0 / ORDER as f64)).clamp(MIN_SHRINK, MAX_GROW) };
            if err <= 1.0 {
                self.stats.accepted += 1;
                t = if last { t1 } else { t + step };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                // a shortened final step says nothing about the natural size
                if !last || factor < 1.0 {
                    h = (step * factor).min(self.tol.max_step);
                }
                if last {
                    break;
                }
            } else {
                self.stats.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        self.h = Some(h);
        Ok(())
    }

    fn stages<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let s = &mut self.stage;

        for i in 0..n {
            s[i] = y[i] + k1[i] * (h * A21);
        }
        f(t + C2 * h, s, k2);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        f(t + C3 * h, s, k3);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        f(t + C4 * h, s, k4);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        f(t + C5 * h, s, k5);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        f(t + h, s, k6);
        for i in 0..n {
            self.y_new[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        f(t + h, &self.y_new, k7);
        self.stats.evaluations += 6;
    }
}
