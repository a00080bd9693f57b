//! Characteristic polynomial of the traveling-wave problem linearized at u = 0.
//!
//! Substituting `e^{λξ}` into `c^α ∂^α φ = φ'' + f'(0) φ` gives
//!
//! ```text
//! V(λ) = λ² − (cλ)^α + f'(0).
//! ```
//!
//! V is strictly convex on (0, ∞) with `V(0+) = f'(0) > 0`, so it has two,
//! one or no positive roots according to the sign of its minimum at λ*. The
//! minimum vanishes exactly at the critical speed c*_α.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative tolerance under which `c` is treated as equal to `c*_α`.
pub const CRITICAL_REL_TOL: f64 = 1e-9;

fn check_params(alpha: f64, c: f64, fprime0: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("speed must be positive, got {c}")));
    }
    if !(fprime0 > 0.0) || !fprime0.is_finite() {
        return Err(Error::Domain(format!("f'(0) must be positive, got {fprime0}")));
    }
    Ok(())
}

#[inline]
fn v(lambda: f64, alpha: f64, c: f64, fprime0: f64) -> f64 {
    lambda * lambda - (c * lambda).powf(alpha) + fprime0
}

/// `V(λ) = λ² − (cλ)^α + f'(0)`.
pub fn char_poly(lambda: f64, alpha: f64, c: f64, fprime0: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    check_params(alpha, c, fprime0)?;
    Ok(v(lambda, alpha, c, fprime0))
}

/// `V''(λ) = 2 + α(1 − α) c^α λ^{α−2}`.
pub fn char_poly_curvature(lambda: f64, alpha: f64, c: f64) -> f64 {
    2.0 + alpha * (1.0 - alpha) * c.powf(alpha) * lambda.powf(alpha - 2.0)
}

/// Critical speed `c*_α = (2^{1/α}/√α) (f'(0)/(2 − α))^{(2−α)/(2α)}`.
pub fn critical_speed(alpha: f64, fprime0: f64) -> Result<f64> {
    check_params(alpha, 1.0, fprime0)?;
    Ok(2f64.powf(1.0 / alpha) / alpha.sqrt()
        * (fprime0 / (2.0 - alpha)).powf((2.0 - alpha) / (2.0 * alpha)))
}

/// Minimizer of V: `λ* = (α/2)^{1/(2−α)} c^{α/(2−α)}`.
pub fn lambda_star(alpha: f64, c: f64) -> f64 {
    (alpha / 2.0).powf(1.0 / (2.0 - alpha)) * c.powf(alpha / (2.0 - alpha))
}

/// Positive roots of V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Roots {
    None,
    Double(f64),
    Two(f64, f64),
}

impl Roots {
    pub fn as_vec(&self) -> Vec<f64> {
        match *self {
            Roots::None => vec![],
            Roots::Double(l) => vec![l],
            Roots::Two(a, b) => vec![a, b],
        }
    }

    /// Smallest positive root, if any.
    pub fn lambda1(&self) -> Option<f64> {
        match *self {
            Roots::None => None,
            Roots::Double(l) | Roots::Two(l, _) => Some(l),
        }
    }
}

/// Bisection on a sign change; runs until the midpoint coincides with an
/// endpoint, i.e. to full double precision.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> Result<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}"
        )));
    }
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Positive roots of V for the given speed.
///
/// Within [`CRITICAL_REL_TOL`] of c*_α the double root λ* is reported.
/// Otherwise the roots are bracketed by `(0, λ*)` and `(λ*, Λ)`, with Λ found
/// by doubling, and located by bisection.
pub fn char_roots(alpha: f64, c: f64, fprime0: f64) -> Result<Roots> {
    check_params(alpha, c, fprime0)?;
    let cstar = critical_speed(alpha, fprime0)?;
    let ls = lambda_star(alpha, c);
    if ((c - cstar) / cstar).abs() <= CRITICAL_REL_TOL {
        return Ok(Roots::Double(ls));
    }
    if c < cstar {
        return Ok(Roots::None);
    }
    let f = |l: f64| v(l, alpha, c, fprime0);
    let vmin = f(ls);
    if !(vmin < 0.0) {
        return Err(Error::Numeric(format!(
            "c = {c} exceeds c* = {cstar} but V(λ*) = {vmin:e} is not negative"
        )));
    }
    let mut hi = 2.0 * ls;
    let mut tries = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Numeric(format!(
                "upper bracket for the larger root not found (alpha={alpha}, c={c})"
            )));
        }
    }
    let l1 = bisect(f, 0.0, ls)?;
    let l2 = bisect(f, ls, hi)?;
    Ok(Roots::Two(l1, l2))
}

/// Summary of the linear analysis at one speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub alpha: f64,
    pub c: f64,
    pub fprime0: f64,
    pub cstar: f64,
    pub lambda_star: f64,
    pub roots: Vec<f64>,
}

impl DispersionReport {
    pub fn new(alpha: f64, c: f64, fprime0: f64) -> Result<Self> {
        let roots = char_roots(alpha, c, fprime0)?;
        Ok(DispersionReport {
            alpha,
            c,
            fprime0,
            cstar: critical_speed(alpha, fprime0)?,
            lambda_star: lambda_star(alpha, c),
            roots: roots.as_vec(),
        })
    }
}
