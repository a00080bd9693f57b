//! Level-set front tracking and the numerical propagation speed.

use crate::dispersion::critical_speed;
use crate::fkpp::{ls_slope, run, Nonlinearity, RunStatus, SimConfig};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Leftmost level crossing of a grid profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub x: f64,
    /// More than one sign change of `u − level` was seen.
    pub multiple: bool,
}

/// Scan from the left for the first sign change of `u − level` and
/// interpolate linearly inside the bracketing cell.
pub fn crossing(u: &[f64], x: &[f64], level: f64) -> Option<Crossing> {
    debug_assert_eq!(u.len(), x.len());
    let mut found: Option<f64> = None;
    let mut changes = 0;
    for k in 0..u.len().saturating_sub(1) {
        let (a, b) = (u[k] - level, u[k + 1] - level);
        let brackets = (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) || (a == 0.0 && k == 0);
        if !brackets {
            continue;
        }
        changes += 1;
        if found.is_none() {
            found = Some(if a == 0.0 {
                x[k]
            } else {
                x[k] + (level - u[k]) / (u[k + 1] - u[k]) * (x[k + 1] - x[k])
            });
        }
    }
    found.map(|x| Crossing {
        x,
        multiple: changes > 1,
    })
}

/// Time series of the front position `x*(t)` and the stop record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrack {
    pub level: f64,
    pub x0: f64,
    pub t: Vec<f64>,
    pub x_star: Vec<f64>,
    /// First recorded time with `x*(t) < x0`.
    pub stop_time: Option<f64>,
    /// Speed magnitude at the stop time.
    pub c_num: Option<f64>,
    pub multiple_crossings: bool,
}

impl FrontTrack {
    pub fn new(level: f64, x0: f64) -> Self {
        FrontTrack {
            level,
            x0,
            t: Vec::new(),
            x_star: Vec::new(),
            stop_time: None,
            c_num: None,
            multiple_crossings: false,
        }
    }

    /// Record the crossing found at time `t`, if any.
    pub fn observe(&mut self, t: f64, c: Option<Crossing>) {
        let Some(c) = c else { return };
        self.t.push(t);
        self.x_star.push(c.x);
        self.multiple_crossings |= c.multiple;
        if self.stop_time.is_none() && c.x < self.x0 {
            self.stop_time = Some(t);
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Speed from the last difference quotient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub magnitude: f64,
    /// `(x*(T) − x*(T−δt))/δt`, negative for a left-moving front.
    pub raw: f64,
}

/// `|x*(T) − x*(T−δt)|/δt` at the stop time, or at the last sample when the
/// run did not stop.
pub fn numerical_speed(track: &FrontTrack, dt: f64) -> Result<SpeedEstimate> {
    let n = track.len();
    if n == 0 {
        return Err(Error::Contract("empty front track".into()));
    }
    let i = match track.stop_time {
        Some(t_stop) => track
            .t
            .iter()
            .position(|&t| t == t_stop)
            .ok_or_else(|| Error::Contract("stop time is not a recorded sample".into()))?,
        None => n - 1,
    };
    let t_end = track.t[i];
    let tol = 1e-9 * t_end.abs().max(1.0);
    if i == 0 || ((t_end - track.t[i - 1]) - dt).abs() > tol {
        return Err(Error::Contract(format!("no sample at T − δt = {}", t_end - dt)));
    }
    let raw = (track.x_star[i] - track.x_star[i - 1]) / dt;
    Ok(SpeedEstimate {
        magnitude: raw.abs(),
        raw,
    })
}

/// Magnitude of the least-squares slope of `x*(t)` over the last 10% of the
/// track (at least two samples).
pub fn smoothed_speed(track: &FrontTrack) -> Result<f64> {
    let n = track.len();
    if n < 2 {
        return Err(Error::Contract("need at least two track samples".into()));
    }
    let k = (n / 10).max(2);
    Ok(ls_slope(&track.t[n - k..], &track.x_star[n - k..]).abs())
}

/// Critical speed including the classical limit `2√f'(0)` at α = 1.
pub fn critical_speed_closed(alpha: f64, fprime0: f64) -> Result<f64> {
    if alpha == 1.0 {
        if !(fprime0 > 0.0) {
            return Err(Error::Domain(format!("f'(0) must be positive, got {fprime0}")));
        }
        return Ok(2.0 * fprime0.sqrt());
    }
    critical_speed(alpha, fprime0)
}

/// One row of a speed sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub c_num: f64,
    pub c_num_smoothed: f64,
    pub c_star: f64,
    /// `|c_num − c*|/c*`.
    pub rel_error: f64,
    /// `|c_num_smoothed − c*|/c*`.
    pub rel_error_smoothed: f64,
    pub stop_time: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(alpha: f64, c_star: f64, msg: String) -> Self {
        SweepRow {
            alpha,
            c_num: f64::NAN,
            c_num_smoothed: f64::NAN,
            c_star,
            rel_error: f64::NAN,
            rel_error_smoothed: f64::NAN,
            stop_time: None,
            error: Some(msg),
        }
    }
}

/// Run the front experiment for one α.
pub fn speed_row(alpha: f64, base: &SimConfig, nl: &Nonlinearity) -> SweepRow {
    let c_star = critical_speed_closed(alpha, nl.fprime0).unwrap_or(f64::NAN);
    let cfg = SimConfig {
        alpha,
        ..base.clone()
    };
    let traj = match run(&cfg, nl) {
        Ok(t) => t,
        Err(e) => return SweepRow::failed(alpha, c_star, e.to_string()),
    };
    if traj.status != RunStatus::Stopped {
        return SweepRow::failed(
            alpha,
            c_star,
            format!("front did not reach x0 by t_max ({:?})", traj.status),
        );
    }
    let c_num = match numerical_speed(&traj.track, cfg.dt) {
        Ok(s) => s.magnitude,
        Err(e) => return SweepRow::failed(alpha, c_star, e.to_string()),
    };
    let c_sm = smoothed_speed(&traj.track).unwrap_or(f64::NAN);
    SweepRow {
        alpha,
        c_num,
        c_num_smoothed: c_sm,
        c_star,
        rel_error: (c_num - c_star).abs() / c_star,
        rel_error_smoothed: (c_sm - c_star).abs() / c_star,
        stop_time: traj.track.stop_time,
        error: None,
    }
}

/// Independent runs over `alphas`; rows come back in input order and a
/// failing α is recorded without stopping the sweep.
pub fn speed_sweep(alphas: &[f64], base: &SimConfig, nl: &Nonlinearity) -> Vec<SweepRow> {
    alphas.par_iter().map(|&a| speed_row(a, base, nl)).collect()
}

/// The α grid `0.1 + 0.025 k`, `k = 0..=35`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=35).map(|k| 0.1 + 0.025 * k as f64).collect()
}
