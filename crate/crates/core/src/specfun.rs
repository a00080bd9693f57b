//! Gamma and Mittag-Leffler functions.
//!
//! `E_{α,β}(z) = Σ_k z^k / Γ(αk + β)` is evaluated by one of four branches:
//! the power series, the large-|z| asymptotic expansion, an integral
//! representation for negative arguments (β = 1 only) and `exp` for α = β = 1.
//! The series suffers catastrophic cancellation on the negative axis, so a
//! branch is only accepted when its own error estimate is small; if no branch
//! qualifies the evaluation fails with [`Error::Range`].

use crate::quad::{integrate_points, QuadOptions};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// 1/Γ(x) on the whole real line, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    if x < 0.5 {
        // Reflection keeps the product finite for large negative x.
        return (PI * x).sin() * statrs::function::gamma::gamma(1.0 - x) / PI;
    }
    1.0 / statrs::function::gamma::gamma(x)
}

/// Arguments of `E_{α,β}(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub z: f64,
}

fn one() -> f64 {
    1.0
}

impl MLParams {
    pub fn new(alpha: f64, z: f64) -> Self {
        MLParams {
            alpha,
            beta: 1.0,
            z,
        }
    }
}

/// Which representation produced a Mittag-Leffler value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MlBranch {
    Exponential,
    Series,
    Asymptotic,
    Integral,
}

/// Default |z| at which the evaluator prefers the asymptotic expansion.
pub const ML_SWITCH: f64 = 10.0;

const SERIES_MAX_TERMS: usize = 500;
/// Largest tolerated ratio max|term| / |sum| in the series.
const SERIES_CANCELLATION: f64 = 1e3;
const ASYMPTOTIC_MAX_TERMS: usize = 80;
const ASYMPTOTIC_REL_TOL: f64 = 1e-12;

/// Mittag-Leffler evaluator with a configurable branch switch.
#[derive(Debug, Clone, Copy)]
pub struct MittagLeffler {
    pub switch: f64,
}

impl Default for MittagLeffler {
    fn default() -> Self {
        MittagLeffler { switch: ML_SWITCH }
    }
}

/// `E_{α,β}(z)` with the default switch point.
pub fn mittag_leffler(p: MLParams) -> Result<f64> {
    MittagLeffler::default().eval(p).map(|(v, _)| v)
}

impl MittagLeffler {
    /// Value and the branch that produced it.
    pub fn eval(&self, p: MLParams) -> Result<(f64, MlBranch)> {
        let MLParams { alpha, beta, z } = p;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if !z.is_finite() {
            return Err(Error::Range(format!("non-finite argument {z}")));
        }
        if alpha == 1.0 && beta == 1.0 {
            let v = z.exp();
            if !v.is_finite() {
                return Err(Error::Range(format!("exp({z}) overflows")));
            }
            return Ok((v, MlBranch::Exponential));
        }
        if z == 0.0 {
            let v = if beta == 1.0 { 1.0 } else { rgamma(beta) };
            return Ok((v, MlBranch::Series));
        }
        if z.abs() <= self.switch {
            if let Some(v) = ml_series(alpha, beta, z) {
                return Ok((v, MlBranch::Series));
            }
            if z < 0.0 {
                return self.negative_fallback(alpha, beta, z);
            }
            return ml_asymptotic_positive(alpha, beta, z).map(|v| (v, MlBranch::Asymptotic));
        }
        if z > 0.0 {
            return match ml_asymptotic_positive(alpha, beta, z) {
                Ok(v) => Ok((v, MlBranch::Asymptotic)),
                Err(e) => ml_series(alpha, beta, z)
                    .map(|v| (v, MlBranch::Series))
                    .ok_or(e),
            };
        }
        if let Some(v) = ml_asymptotic_negative(alpha, beta, z) {
            return Ok((v, MlBranch::Asymptotic));
        }
        self.negative_fallback(alpha, beta, z)
    }

    fn negative_fallback(&self, alpha: f64, beta: f64, z: f64) -> Result<(f64, MlBranch)> {
        if beta == 1.0 {
            return ml_integral_negative(alpha, -z).map(|v| (v, MlBranch::Integral));
        }
        ml_asymptotic_negative(alpha, beta, z)
            .map(|v| (v, MlBranch::Asymptotic))
            .ok_or_else(|| {
                Error::Range(format!(
                    "no accurate branch for E_{{{alpha},{beta}}}({z}) with beta != 1"
                ))
            })
    }
}

/// Power series; `None` when it fails to converge or cancels too much.
pub fn ml_series(alpha: f64, beta: f64, z: f64) -> Option<f64> {
    let lnz = z.abs().ln();
    let neg = z < 0.0;
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut prev_log = f64::INFINITY;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let log_mag = kf * lnz - statrs::function::gamma::ln_gamma(alpha * kf + beta);
        if log_mag > 700.0 {
            return None;
        }
        let mag = log_mag.exp();
        let term = if neg && k % 2 == 1 { -mag } else { mag };
        sum += term;
        max_term = max_term.max(mag);
        if k > 0 && log_mag < prev_log && mag < 1e-16 * sum.abs() {
            if max_term > SERIES_CANCELLATION * sum.abs() {
                return None;
            }
            return Some(sum);
        }
        prev_log = log_mag;
    }
    None
}

/// `(1/α) z^{(1−β)/α} exp(z^{1/α}) − Σ_k z^{−k}/Γ(β − αk)` for z → +∞.
pub fn ml_asymptotic_positive(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    let zr = z.powf(1.0 / alpha);
    if zr > 700.0 {
        return Err(Error::Range(format!(
            "E_{{{alpha},{beta}}}({z}) overflows double precision"
        )));
    }
    let lead = z.powf((1.0 - beta) / alpha) * zr.exp() / alpha;
    let tail = algebraic_tail(alpha, beta, z);
    Ok(lead - tail.0)
}

/// `−Σ_k z^{−k}/Γ(β − αk)` for z → −∞, optimally truncated.
pub fn ml_asymptotic_negative(alpha: f64, beta: f64, z: f64) -> Option<f64> {
    let (sum, remainder) = algebraic_tail(alpha, beta, z);
    let v = -sum;
    if remainder <= ASYMPTOTIC_REL_TOL * v.abs() && v != 0.0 {
        Some(v)
    } else {
        None
    }
}

/// Partial sum of `Σ_{k≥1} z^{−k}/Γ(β − αk)` stopped before the terms grow,
/// with the first omitted term as remainder estimate.
fn algebraic_tail(alpha: f64, beta: f64, z: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut zk = 1.0;
    let mut remainder = 0.0;
    for k in 1..=ASYMPTOTIC_MAX_TERMS {
        zk /= z;
        let term = zk * rgamma(beta - alpha * k as f64);
        let mag = term.abs();
        if mag > prev && mag > 0.0 {
            remainder = mag;
            break;
        }
        sum += term;
        if mag > 0.0 {
            prev = mag;
            remainder = mag;
        }
    }
    (sum, remainder)
}

/// `E_α(−x)` for x > 0, 0 < α < 1 from
/// `E_α(−x) = (1/(απ)) ∫_0^∞ e^{−r^{1/α}} x sin(απ) / (r² + 2rx cos(απ) + x²) dr`.
pub fn ml_integral_negative(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(x > 0.0) {
        return Err(Error::Domain(format!(
            "integral branch needs 0 < alpha < 1 and x > 0, got ({alpha}, {x})"
        )));
    }
    let (s, c) = (alpha * PI).sin_cos();
    let inv = 1.0 / alpha;
    let f = |r: f64| (-r.powf(inv)).exp() * x * s / (r * r + 2.0 * r * x * c + x * x);
    let upper = 60f64.powf(alpha);
    let mut pts = vec![1.0];
    if c < 0.0 {
        // Near-resonant denominator at r = −x cos(απ) with width x sin(απ).
        let r0 = -x * c;
        let w = x * s;
        for m in [-10.0, -1.0, 0.0, 1.0, 10.0] {
            pts.push(r0 + m * w);
        }
    }
    let r = integrate_points(f, 0.0, upper, &pts, QuadOptions::tol(1e-300, 1e-13))
        .map_err(|e| Error::Range(format!("integral branch of E_{alpha}(−{x}) failed: {e}")))?;
    Ok(r.value / (alpha * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(1.5).unwrap() - 0.5 * PI.sqrt()).abs() < 1e-14);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
    }

    #[test]
    fn rgamma_poles_and_reflection() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        // Γ(−1/2) = −2√π
        assert!((rgamma(-0.5) + 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn exponential_branch() {
        let (v, b) = MittagLeffler::default().eval(MLParams::new(1.0, 1.0)).unwrap();
        assert_eq!(b, MlBranch::Exponential);
        assert!((v - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(mittag_leffler(MLParams::new(0.0, 1.0)).is_err());
        assert!(mittag_leffler(MLParams::new(1.2, 1.0)).is_err());
        assert!(matches!(
            mittag_leffler(MLParams::new(0.5, f64::NAN)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn overflow_is_range_error() {
        assert!(matches!(
            mittag_leffler(MLParams::new(0.5, 40.0)),
            Err(Error::Range(_))
        ));
    }
}
