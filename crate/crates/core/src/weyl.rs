//! L1 discretization of the left-sided fractional derivative on the line,
//!
//! ```text
//! ∂^α ψ(ξ_i) ≈ h^{−α}/Γ(2−α) Σ_{m≥0} b_m (ψ_{i−m} − ψ_{i−m−1}),
//! b_m = (m+1)^{1−α} − m^{1−α},
//! ```
//!
//! which is the exact derivative of the piecewise-linear interpolant. Values
//! left of the grid come from a [`LeftExtension`].
//!
//! Two evaluation routes are provided. [`WeylL1::history_direct`] sums every
//! term (O(N²)). [`WeylL1::history`] sums the first `m0` terms directly and
//! replaces `b_m`, `m ≥ m0`, by a positive sum of exponentials obtained from
//!
//! ```text
//! b_m = (1−α)/Γ(α) ∫_0^∞ x^{α−2} (1 − e^{−x}) e^{−m x} dx
//! ```
//!
//! with the trapezoid rule in `y = ln x`, so that the far history is carried
//! by first-order recurrences (O(N · nodes)). All weights are positive, so
//! relative accuracy survives in exponentially small tails.

use crate::caputo::l1_weight;
use crate::specfun::{gamma, ln_gamma};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Continuation of a grid function to the left of its first node:
/// `ψ_{−j} = ψ_0 e^{−λ j h}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "rate")]
pub enum LeftExtension {
    Constant,
    Exponential(f64),
}

impl LeftExtension {
    /// `q = e^{−λh}`, the ratio between consecutive extension values.
    pub fn ratio(&self, h: f64) -> f64 {
        match *self {
            LeftExtension::Constant => 1.0,
            LeftExtension::Exponential(l) => (-l * h).exp(),
        }
    }
}

/// Default number of directly summed weights.
pub const DEFAULT_M0: usize = 64;
/// Trapezoid step in `ln x`.
const SOE_STEP: f64 = 0.3;
/// Lower end of the trapezoid in `ln x`; everything below is lumped.
const SOE_Y_MIN: f64 = -36.0;

#[derive(Debug, Clone)]
pub struct WeylL1 {
    pub alpha: f64,
    pub h: f64,
    pub m0: usize,
    /// `b_0 … b_{m0−1}`.
    pub b: Vec<f64>,
    /// Exponential rates `s_q` and weights `w_q` with `b_m ≈ Σ w_q e^{−s_q m} + w_∞`.
    pub rates: Vec<f64>,
    pub weights: Vec<f64>,
    /// Weight of the rates below `e^{SOE_Y_MIN}`, treated as zero.
    pub lumped: f64,
    scale: f64,
}

impl WeylL1 {
    pub fn new(alpha: f64, h: f64) -> Result<Self> {
        Self::with_m0(alpha, h, DEFAULT_M0)
    }

    pub fn with_m0(alpha: f64, h: f64, m0: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("h must be positive, got {h}")));
        }
        if m0 < 2 {
            return Err(Error::Domain("m0 must be at least 2".into()));
        }
        let b = (0..m0).map(|m| l1_weight(alpha, m)).collect();
        let pref = ((1.0 - alpha).ln() - ln_gamma(alpha)?).exp();
        // Integrand in y: pref · x^{α−1} (1 − e^{−x}), x = e^y.
        let dens = |y: f64| {
            let x = y.exp();
            pref * (y * (alpha - 1.0)).exp() * (-(-x).exp_m1())
        };
        let y_max = (40.0 / m0 as f64).ln();
        let count = ((y_max - SOE_Y_MIN) / SOE_STEP).ceil() as usize;
        let mut rates = Vec::with_capacity(count + 1);
        let mut weights = Vec::with_capacity(count + 1);
        for j in 0..=count {
            let y = SOE_Y_MIN + j as f64 * SOE_STEP;
            rates.push(y.exp());
            weights.push(SOE_STEP * dens(y));
        }
        // Trapezoid nodes below SOE_Y_MIN, where e^{−m x} = 1 to working accuracy.
        let mut lumped = 0.0;
        let mut j = 1;
        loop {
            let t = SOE_STEP * dens(SOE_Y_MIN - j as f64 * SOE_STEP);
            lumped += t;
            if t < 1e-18 * lumped || j > 100_000 {
                break;
            }
            j += 1;
        }
        Ok(WeylL1 {
            alpha,
            h,
            m0,
            b,
            rates,
            weights,
            lumped,
            scale: h.powf(-alpha) / gamma(2.0 - alpha)?,
        })
    }

    /// `h^{−α}/Γ(2−α)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Exact weight `b_m`.
    pub fn b_exact(&self, m: usize) -> f64 {
        l1_weight(self.alpha, m)
    }

    /// Weight used by the fast route.
    pub fn b_fast(&self, m: usize) -> f64 {
        if m < self.m0 {
            return self.b[m];
        }
        let mf = m as f64;
        self.lumped
            + self
                .rates
                .iter()
                .zip(&self.weights)
                .map(|(s, w)| w * (-s * mf).exp())
                .sum::<f64>()
    }

    /// `H_i = Σ_{m≥1} b_m (ψ_{i−m} − ψ_{i−m−1})`, every term summed.
    pub fn history_direct(&self, psi: &[f64], ext: LeftExtension) -> Vec<f64> {
        let n = psi.len();
        let q = ext.ratio(self.h);
        let d0 = psi[0] * (1.0 - q);
        // tail[i] = Σ_{m≥i} b_m q^{m−i}
        let tail = self.extension_tail(q, n + 1);
        let b: Vec<f64> = (0..n).map(|m| self.b_exact(m)).collect();
        let deltas: Vec<f64> = (1..n).map(|j| psi[j] - psi[j - 1]).collect();
        let mut out = vec![0.0; n];
        for i in 0..n {
            // Δψ_{i−m} = deltas[i−m−1] for m < i
            let mut s: f64 = b[1..i.max(1)]
                .iter()
                .zip(deltas[..i.saturating_sub(1)].iter().rev())
                .map(|(b, d)| b * d)
                .sum();
            if i >= 1 {
                s += b[i] * d0;
            }
            // m ≥ i + 1: Δψ_{i−m} = d0 q^{m−i}
            if q < 1.0 {
                s += d0 * q * tail[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// `tail[i] = Σ_{m≥i} b_m q^{m−i}` for `i < len`, by backward recursion.
    fn extension_tail(&self, q: f64, len: usize) -> Vec<f64> {
        let mut tail = vec![0.0; len + 1];
        if q >= 1.0 {
            return tail;
        }
        // Start far enough out that q^k is negligible.
        let extra = if q > 0.0 { (40.0 / -q.ln()).ceil() as usize } else { 0 };
        let mut acc = 0.0;
        for m in (len..len + extra + 1).rev() {
            acc = self.b_exact(m) + q * acc;
        }
        tail[len] = acc;
        for i in (0..len).rev() {
            tail[i] = self.b_exact(i) + q * tail[i + 1];
        }
        tail
    }

    /// Fast route for `H_i`; writes into `out`.
    pub fn history(&self, psi: &[f64], ext: LeftExtension, out: &mut [f64]) {
        let n = psi.len();
        let m0 = self.m0;
        let q = ext.ratio(self.h);
        let d0 = psi[0] * (1.0 - q);
        let at_minus_inf = if q < 1.0 { 0.0 } else { psi[0] };
        // Δψ_j for j ≤ 0 is d0 q^{−j}.
        let delta = |j: isize| -> f64 {
            if j >= 1 {
                let j = j as usize;
                psi[j] - psi[j - 1]
            } else if q < 1.0 {
                d0 * q.powi((-j) as i32)
            } else {
                0.0
            }
        };
        let value = |j: isize| -> f64 {
            if j >= 0 {
                psi[j as usize]
            } else {
                psi[0] * q.powi((-j) as i32)
            }
        };
        // Lanes padded to a multiple of 4 with inert entries so the inner
        // loops run on independent accumulators.
        let lanes = self.rates.len().div_ceil(4) * 4;
        let mut decay = vec![0.0; lanes];
        let mut feed = vec![0.0; lanes];
        // U_q carries w_q Σ_{m≥m0} e^{−s m} Δψ_{i−m}
        let mut u = vec![0.0; lanes];
        for (k, (s, w)) in self.rates.iter().zip(&self.weights).enumerate() {
            decay[k] = (-s).exp();
            feed[k] = w * (-s * m0 as f64).exp();
            let r = decay[k] * q;
            u[k] = w * d0 * r.powi(m0 as i32) / (1.0 - r);
        }
        let mut deltas = Vec::with_capacity(n);
        deltas.push(d0);
        for j in 1..n {
            deltas.push(psi[j] - psi[j - 1]);
        }
        let b_rev: Vec<f64> = self.b[1..].iter().rev().copied().collect();
        for i in 0..n {
            let mut acc = [0.0; 4];
            if i > 0 {
                let d = delta(i as isize - m0 as isize);
                for ((u4, e4), f4) in u.chunks_exact_mut(4).zip(decay.chunks_exact(4)).zip(feed.chunks_exact(4)) {
                    for k in 0..4 {
                        u4[k] = e4[k] * u4[k] + f4[k] * d;
                        acc[k] += u4[k];
                    }
                }
            } else {
                acc[0] = u.iter().sum::<f64>();
            }
            if i + 1 >= m0 {
                let window = &deltas[i + 1 - m0..i];
                for (b4, d4) in b_rev.chunks_exact(4).zip(window.chunks_exact(4)) {
                    for k in 0..4 {
                        acc[k] += b4[k] * d4[k];
                    }
                }
                let done = (m0 - 1) / 4 * 4;
                for (b, d) in b_rev[done..].iter().zip(&window[done..]) {
                    acc[0] += b * d;
                }
            } else {
                for m in 1..=i {
                    acc[0] += self.b[m] * deltas[i - m];
                }
                for m in (i + 1).max(1)..m0 {
                    acc[0] += self.b[m] * delta(i as isize - m as isize);
                }
            }
            let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
            s += self.lumped * (value(i as isize - m0 as isize) - at_minus_inf);
            out[i] = s;
        }
    }

    /// Fast route for the full derivative, scale included.
    pub fn apply(&self, psi: &[f64], ext: LeftExtension) -> Vec<f64> {
        let mut out = vec![0.0; psi.len()];
        self.history(psi, ext, &mut out);
        self.finish(psi, ext, &mut out);
        out
    }

    /// Direct route for the full derivative, scale included.
    pub fn apply_direct(&self, psi: &[f64], ext: LeftExtension) -> Vec<f64> {
        let mut out = self.history_direct(psi, ext);
        self.finish(psi, ext, &mut out);
        out
    }

    fn finish(&self, psi: &[f64], ext: LeftExtension, out: &mut [f64]) {
        let q = ext.ratio(self.h);
        for i in 0..psi.len() {
            let prev = if i == 0 { q * psi[0] } else { psi[i - 1] };
            out[i] = self.scale * (psi[i] - prev + out[i]);
        }
    }

    /// Action on `e^{λξ}` as used by the fast route:
    /// `∂^α_h e^{λξ} = symbol(λ) e^{λξ}`.
    pub fn symbol(&self, lambda: f64) -> f64 {
        let q = (-lambda * self.h).exp();
        let mut s: f64 = (0..self.m0).map(|m| self.b[m] * q.powi(m as i32)).sum();
        let qm0 = q.powi(self.m0 as i32);
        for (r, w) in self.rates.iter().zip(&self.weights) {
            let e = (-r).exp() * q;
            s += w * e.powi(self.m0 as i32) / (1.0 - e);
        }
        s += self.lumped * qm0 / (1.0 - q);
        self.scale * (1.0 - q) * s
    }

    /// Same symbol with the exact weights.
    pub fn symbol_exact(&self, lambda: f64) -> f64 {
        let q = (-lambda * self.h).exp();
        let tail = self.extension_tail(q, 1);
        self.scale * (1.0 - q) * tail[0]
    }
}
