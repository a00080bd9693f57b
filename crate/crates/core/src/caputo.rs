//! L1 discretization of the Caputo derivative.
//!
//! On a uniform mesh `t_j = j δt` the derivative at `t_{j+1}` is approximated
//! by differentiating the piecewise-linear interpolant exactly:
//!
//! ```text
//! ∂^α v(t_{j+1}) ≈ 1/(Γ(2−α) δt^α) Σ_{m=0}^{j} w_m (v_{j+1−m} − v_{j−m}),
//! w_m = (m+1)^{1−α} − m^{1−α}.
//! ```

use crate::specfun::{gamma, mittag_leffler, MLParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// L1 weights `w_m`, independent of the step size.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    pub alpha: f64,
    /// Γ(2 − α), the denominator of the scale `1/(Γ(2−α) δt^α)`.
    pub gamma_2ma: f64,
    pub w: Vec<f64>,
}

/// `w_m` evaluated without cancellation: `m^{1−α} expm1((1−α) ln(1 + 1/m))`.
pub fn l1_weight(alpha: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mf = m as f64;
    let e = 1.0 - alpha;
    mf.powf(e) * (e * (1.0 / mf).ln_1p()).exp_m1()
}

/// Weights `w_0 … w_{count−1}` for order α ∈ (0, 1].
pub fn l1_weights(alpha: f64, count: usize) -> Result<L1Weights> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if count == 0 {
        return Err(Error::Domain("at least one weight is required".into()));
    }
    Ok(L1Weights {
        alpha,
        gamma_2ma: gamma(2.0 - alpha)?,
        w: (0..count).map(|m| l1_weight(alpha, m)).collect(),
    })
}

impl L1Weights {
    pub fn count(&self) -> usize {
        self.w.len()
    }

    /// Scale factor `1/(Γ(2−α) δt^α)`.
    pub fn scale(&self, dt: f64) -> f64 {
        1.0 / (self.gamma_2ma * dt.powf(self.alpha))
    }

    /// Extend the table to at least `count` entries.
    pub fn ensure(&mut self, count: usize) {
        let alpha = self.alpha;
        let start = self.w.len();
        self.w.extend((start..count).map(|m| l1_weight(alpha, m)));
    }
}

/// L1 approximation of `∂^α v` at the last entry of `history = (v_0, …, v_{j+1})`.
pub fn history_sum(history: &[f64], weights: &L1Weights, dt: f64) -> Result<f64> {
    let n = history.len();
    if n < 2 {
        return Err(Error::Contract("history needs at least two values".into()));
    }
    if weights.count() < n - 1 {
        return Err(Error::Contract(format!(
            "{} weights cannot cover a history of length {n}",
            weights.count()
        )));
    }
    let j1 = n - 1;
    let s: f64 = (0..j1)
        .map(|m| weights.w[m] * (history[j1 - m] - history[j1 - m - 1]))
        .sum();
    Ok(s * weights.scale(dt))
}

/// Whether the reaction term is evaluated at the new or the old time level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReactionTreatment {
    #[default]
    Implicit,
    Explicit,
}

/// Fractional Malthus problem `∂^α v = ζ v`, `v(0) = v0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MalthusRun {
    pub alpha: f64,
    pub zeta: f64,
    pub v0: f64,
    pub dt: f64,
    pub nsteps: usize,
    #[serde(default)]
    pub treatment: ReactionTreatment,
}

/// March the L1 scheme; returns `v_0 … v_nsteps`.
pub fn solve_malthus(run: &MalthusRun) -> Result<Vec<f64>> {
    if !(run.dt > 0.0) || run.nsteps == 0 {
        return Err(Error::Domain("dt must be positive and nsteps at least 1".into()));
    }
    if !run.zeta.is_finite() || !run.v0.is_finite() {
        return Err(Error::Domain("zeta and v0 must be finite".into()));
    }
    let wts = l1_weights(run.alpha, run.nsteps)?;
    let s = wts.scale(run.dt);
    if run.treatment == ReactionTreatment::Implicit && s - run.zeta <= 0.0 {
        return Err(Error::Numeric(format!(
            "implicit step ill-posed: 1 − ζΓ(2−α)δt^α = {:e} ≤ 0",
            1.0 - run.zeta / s
        )));
    }
    let mut v = Vec::with_capacity(run.nsteps + 1);
    v.push(run.v0);
    for j in 0..run.nsteps {
        // Memory terms m = 1..=j, all known.
        let mem: f64 = (1..=j).map(|m| wts.w[m] * (v[j + 1 - m] - v[j - m])).sum();
        let next = match run.treatment {
            ReactionTreatment::Implicit => s * (v[j] - mem) / (s - run.zeta),
            ReactionTreatment::Explicit => v[j] - mem + run.zeta * v[j] / s,
        };
        v.push(next);
    }
    Ok(v)
}

/// Exact solution `v0 E_α(ζ t^α)`.
pub fn malthus_exact(alpha: f64, zeta: f64, v0: f64, t: f64) -> Result<f64> {
    Ok(v0 * mittag_leffler(MLParams::new(alpha, zeta * t.powf(alpha)))?)
}

/// Error at `t_end` for each step size, with observed orders between
/// consecutive refinements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStudy {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

/// Convergence study of the L1 Malthus solver against the Mittag-Leffler oracle.
pub fn malthus_order_study(
    alpha: f64,
    zeta: f64,
    v0: f64,
    t_end: f64,
    dts: &[f64],
    treatment: ReactionTreatment,
) -> Result<OrderStudy> {
    let exact = malthus_exact(alpha, zeta, v0, t_end)?;
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let nsteps = (t_end / dt).round() as usize;
        if ((nsteps as f64) * dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::Domain(format!("dt = {dt} does not divide t_end = {t_end}")));
        }
        let v = solve_malthus(&MalthusRun {
            alpha,
            zeta,
            v0,
            dt,
            nsteps,
            treatment,
        })?;
        errors.push((v[nsteps] - exact).abs());
    }
    let orders = errors
        .windows(2)
        .zip(dts.windows(2))
        .map(|(e, d)| (e[0] / e[1]).ln() / (d[0] / d[1]).ln())
        .collect();
    Ok(OrderStudy {
        dts: dts.to_vec(),
        errors,
        orders,
    })
}
