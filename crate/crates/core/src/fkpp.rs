//! Time-fractional Fisher-KPP solver on `[0, l]` with Neumann boundaries.
//!
//! Each step solves
//!
//! ```text
//! s w_0 u_{j+1,k} − (Δ_h u_{j+1})_k = f(u_{j,k}) + s w_0 u_{j,k}
//!                                     − s Σ_{m=1}^{j} w_m (u_{j+1−m,k} − u_{j−m,k}),
//! s = 1/(Γ(2−α) δt^α),
//! ```
//!
//! i.e. L1 memory, implicit diffusion and explicit reaction. The ghost values
//! `u_{−1} = u_1` and `u_{K+1} = u_{K−1}` are folded into the first and last rows.

use crate::caputo::{l1_weights, L1Weights};
use crate::front::{crossing, FrontTrack};
use crate::tridiag::{diagonally_dominant, Tridiag};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reaction term together with the constants of the KPP bound
/// `−M u^{1+a} ≤ f(u) − f'(0) u ≤ 0`.
#[derive(Clone)]
pub struct Nonlinearity {
    pub name: String,
    f: ScalarFn,
    fprime: ScalarFn,
    pub fprime0: f64,
    pub kpp_m: f64,
    pub kpp_a: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("fprime0", &self.fprime0)
            .field("kpp_m", &self.kpp_m)
            .field("kpp_a", &self.kpp_a)
            .finish()
    }
}

impl Nonlinearity {
    /// `f(u) = u(1 − u)`, with M = 1 and a = 1.
    pub fn fisher() -> Self {
        Nonlinearity {
            name: "fisher".into(),
            f: Arc::new(|u| u * (1.0 - u)),
            fprime: Arc::new(|u| 1.0 - 2.0 * u),
            fprime0: 1.0,
            kpp_m: 1.0,
            kpp_a: 1.0,
        }
    }

    /// `f ≡ 0`, for pure fractional diffusion. Not a KPP nonlinearity.
    pub fn zero() -> Self {
        Nonlinearity {
            name: "zero".into(),
            f: Arc::new(|_| 0.0),
            fprime: Arc::new(|_| 0.0),
            fprime0: 0.0,
            kpp_m: 0.0,
            kpp_a: 1.0,
        }
    }

    pub fn custom<F, G>(name: &str, f: F, fprime: G, kpp_m: f64, kpp_a: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let fprime0 = fprime(0.0);
        Nonlinearity {
            name: name.into(),
            f: Arc::new(f),
            fprime: Arc::new(fprime),
            fprime0,
            kpp_m,
            kpp_a,
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn fprime(&self, u: f64) -> f64 {
        (self.fprime)(u)
    }

    /// Check the monostable KPP hypotheses on `samples` equispaced points of
    /// `[0, 1]`.
    pub fn check_kpp(&self, samples: usize) -> Result<()> {
        let tol = 1e-12;
        if self.f(0.0).abs() > tol || self.f(1.0).abs() > tol {
            return Err(Error::Domain(format!("{}: f(0) and f(1) must vanish", self.name)));
        }
        if !(self.fprime0 > 0.0) || !(self.kpp_m >= 0.0) || !(self.kpp_a > 0.0) {
            return Err(Error::Domain(format!(
                "{}: need f'(0) > 0, M ≥ 0, a > 0",
                self.name
            )));
        }
        let n = samples.max(2);
        for i in 0..=n {
            let u = i as f64 / n as f64;
            let fu = self.f(u);
            if i > 0 && i < n && !(fu > 0.0) {
                return Err(Error::Domain(format!("{}: f({u}) = {fu} is not positive", self.name)));
            }
            let gap = fu - self.fprime0 * u;
            if gap > tol || gap < -self.kpp_m * u.powf(1.0 + self.kpp_a) - tol {
                return Err(Error::Domain(format!(
                    "{}: KPP bound fails at u = {u} (f − f'(0)u = {gap:e})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn default_level() -> f64 {
    0.1
}
fn default_dx() -> f64 {
    0.25
}
fn default_dt() -> f64 {
    0.05
}
fn default_memory_budget_mb() -> f64 {
    2048.0
}

/// Simulation parameters. Field names double as the JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub alpha: f64,
    pub l: f64,
    pub l0: f64,
    pub omega: f64,
    pub x0: f64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_dx")]
    pub dx: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_max: f64,
    /// Steps between stored snapshots; 0 keeps only the first and last.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Cap on the stored history, in MiB.
    #[serde(default = "default_memory_budget_mb")]
    pub memory_budget_mb: f64,
}

impl SimConfig {
    /// Desk-scale front experiment on `[0, 150]`.
    pub fn desk(alpha: f64) -> Self {
        SimConfig {
            alpha,
            l: 150.0,
            l0: 145.0,
            omega: 0.01,
            x0: 37.5,
            level: 0.1,
            dx: 0.25,
            dt: 0.05,
            t_max: 400.0,
            snapshot_every: 0,
            memory_budget_mb: default_memory_budget_mb(),
        }
    }

    /// Number of grid intervals; `l` must be a multiple of `dx`.
    pub fn intervals(&self) -> Result<usize> {
        let n = (self.l / self.dx).round();
        if !(n >= 1.0) || (n * self.dx - self.l).abs() > 1e-9 * self.l {
            return Err(Error::config("dx", format!("dx = {} does not divide l = {}", self.dx, self.l)));
        }
        Ok(n as usize)
    }

    /// Number of time steps needed to reach `t_max`.
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::config("l", "must be positive"));
        }
        if !(self.l0 > 0.0 && self.l0 < self.l) {
            return Err(Error::config("l0", "must lie in (0, l)"));
        }
        if !(self.x0 > 0.0 && self.x0 < self.l) {
            return Err(Error::config("x0", "must lie in (0, l)"));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Error::config("omega", "must lie in [0, 1]"));
        }
        if !(self.dx > 0.0) {
            return Err(Error::config("dx", "must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config("dt", "must be positive"));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::config("t_max", "must be finite and non-negative"));
        }
        if !(self.memory_budget_mb > 0.0) {
            return Err(Error::config("memory_budget_mb", "must be positive"));
        }
        let n = self.intervals()?;
        let left = (0..=n).filter(|&k| !self.in_plateau(k)).count();
        let right = n + 1 - left;
        if left < 4 || right < 4 {
            return Err(Error::config(
                "dx",
                format!("grid too coarse to represent l0: {left} nodes left of it, {right} from it on"),
            ));
        }
        Ok(())
    }

    /// Right-closed step: the node at `l0` belongs to the plateau.
    fn in_plateau(&self, k: usize) -> bool {
        k as f64 * self.dx >= self.l0 - 1e-9 * self.dx
    }

    /// Bytes needed to store the full history up to `t_max`.
    pub fn history_bytes(&self) -> Result<f64> {
        Ok((self.steps() + 1) as f64 * (self.intervals()? + 1) as f64 * 8.0)
    }
}

/// Full solution history of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    pub alpha: f64,
    pub dx: f64,
    pub dt: f64,
    /// `history[j]` is the layer at `t = j δt`.
    pub history: Vec<Vec<f64>>,
    weights: L1Weights,
    scale: f64,
    solver: Tridiag,
    /// Smallest and largest value seen in any layer.
    pub min_value: f64,
    pub max_value: f64,
}

impl SimState {
    /// State with arbitrary initial layer on the grid `x_k = k dx`.
    pub fn from_initial(alpha: f64, dx: f64, dt: f64, u0: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(dx > 0.0 && dt > 0.0) {
            return Err(Error::Domain("dx and dt must be positive".into()));
        }
        let n = u0.len();
        if n < 3 {
            return Err(Error::Domain("need at least three grid nodes".into()));
        }
        let weights = l1_weights(alpha, 64)?;
        let scale = weights.scale(dt);
        let r = 1.0 / (dx * dx);
        let diag = vec![scale + 2.0 * r; n];
        let mut lower = vec![-r; n - 1];
        let mut upper = vec![-r; n - 1];
        upper[0] = -2.0 * r;
        lower[n - 2] = -2.0 * r;
        if !diagonally_dominant(&lower, &diag, &upper) {
            return Err(Error::Numeric("implicit diffusion matrix is not diagonally dominant".into()));
        }
        let solver = Tridiag::new(&lower, &diag, &upper)?;
        let (lo, hi) = u0
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        Ok(SimState {
            alpha,
            dx,
            dt,
            history: vec![u0],
            weights,
            scale,
            solver,
            min_value: lo,
            max_value: hi,
        })
    }

    /// Current step index j.
    pub fn j(&self) -> usize {
        self.history.len() - 1
    }

    pub fn t(&self) -> f64 {
        self.j() as f64 * self.dt
    }

    pub fn current(&self) -> &[f64] {
        self.history.last().expect("history is never empty")
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.current().len()).map(|k| k as f64 * self.dx).collect()
    }

    /// Largest excursion outside `[0, 1]` so far.
    pub fn range_excess(&self) -> f64 {
        (-self.min_value).max(self.max_value - 1.0).max(0.0)
    }

    /// Advance one step and append the new layer.
    pub fn step(&mut self, nl: &Nonlinearity) -> Result<()> {
        let j = self.j();
        self.weights.ensure(j + 1);
        let uj = &self.history[j];
        let n = uj.len();
        let mut mem = vec![0.0; n];
        for m in 1..=j {
            let w = self.weights.w[m];
            let (a, b) = (&self.history[j + 1 - m], &self.history[j - m]);
            for ((acc, x), y) in mem.iter_mut().zip(a).zip(b) {
                *acc += w * (x - y);
            }
        }
        let s = self.scale;
        let mut next: Vec<f64> = uj
            .iter()
            .zip(&mem)
            .map(|(&u, &h)| s * (u - h) + nl.f(u))
            .collect();
        self.solver.solve_in_place(&mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value at step {}", j + 1)));
        }
        for &v in &next {
            self.min_value = self.min_value.min(v);
            self.max_value = self.max_value.max(v);
        }
        self.history.push(next);
        Ok(())
    }
}

/// Step-function initial state of the front experiment.
pub fn init(config: &SimConfig) -> Result<SimState> {
    config.validate()?;
    let n = config.intervals()?;
    let u0 = (0..=n)
        .map(|k| if config.in_plateau(k) { config.omega } else { 0.0 })
        .collect();
    SimState::from_initial(config.alpha, config.dx, config.dt, u0)
}

/// Stored layer at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// The tracked level crossed `x0`.
    Stopped,
    /// `t_max` reached while the front was still to the right of `x0`.
    Horizon,
    /// `t_max` reached without the level ever being crossed.
    NoCrossing,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub track: FrontTrack,
    pub status: RunStatus,
    pub steps: usize,
    pub range_excess: f64,
}

/// Step until `t_max` or until the front passes `x0`.
pub fn run(config: &SimConfig, nl: &Nonlinearity) -> Result<Trajectory> {
    let mut state = init(config)?;
    let bytes = config.history_bytes()?;
    if bytes > config.memory_budget_mb * 1024.0 * 1024.0 {
        return Err(Error::config(
            "memory_budget_mb",
            format!(
                "history to t_max needs {:.1} MiB, budget is {} MiB",
                bytes / (1024.0 * 1024.0),
                config.memory_budget_mb
            ),
        ));
    }
    let x = state.grid();
    let nsteps = config.steps();
    let mut track = FrontTrack::new(config.level, config.x0);
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        u: state.current().to_vec(),
    }];
    track.observe(0.0, crossing(state.current(), &x, config.level));
    for j in 1..=nsteps {
        if track.stop_time.is_some() {
            break;
        }
        state.step(nl)?;
        let t = j as f64 * config.dt;
        track.observe(t, crossing(state.current(), &x, config.level));
        if config.snapshot_every > 0 && j % config.snapshot_every == 0 {
            snapshots.push(Snapshot {
                t,
                u: state.current().to_vec(),
            });
        }
    }
    let last_t = state.t();
    if snapshots.last().map(|s| s.t) != Some(last_t) {
        snapshots.push(Snapshot {
            t: last_t,
            u: state.current().to_vec(),
        });
    }
    if track.stop_time.is_some() {
        track.c_num = crate::front::numerical_speed(&track, config.dt).ok().map(|s| s.magnitude);
    }
    let status = if track.stop_time.is_some() {
        RunStatus::Stopped
    } else if track.t.is_empty() {
        RunStatus::NoCrossing
    } else {
        RunStatus::Horizon
    };
    Ok(Trajectory {
        x,
        snapshots,
        track,
        status,
        steps: state.j(),
        range_excess: state.range_excess(),
    })
}

fn default_var_alpha() -> f64 {
    0.5
}
fn default_var_l() -> f64 {
    80.0
}
fn default_var_dx() -> f64 {
    0.1
}
fn default_var_dt() -> f64 {
    0.01
}
fn default_var_t0() -> f64 {
    1.0
}
fn default_var_t1() -> f64 {
    10.0
}
fn default_var_samples() -> usize {
    11
}

/// Pure-diffusion spreading experiment: a unit-mass pulse at the centre of
/// `[0, l]`, sampled at log-spaced times in `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    #[serde(default = "default_var_alpha")]
    pub alpha: f64,
    #[serde(default = "default_var_l")]
    pub l: f64,
    #[serde(default = "default_var_dx")]
    pub dx: f64,
    #[serde(default = "default_var_dt")]
    pub dt: f64,
    #[serde(default = "default_var_t0")]
    pub t_start: f64,
    #[serde(default = "default_var_t1")]
    pub t_end: f64,
    #[serde(default = "default_var_samples")]
    pub samples: usize,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        VarianceConfig {
            alpha: default_var_alpha(),
            l: default_var_l(),
            dx: default_var_dx(),
            dt: default_var_dt(),
            t_start: default_var_t0(),
            t_end: default_var_t1(),
            samples: default_var_samples(),
        }
    }
}

/// Mass fraction allowed within the outer tenth of the domain on either side.
pub const BOUNDARY_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceFit {
    pub t: Vec<f64>,
    pub variance: Vec<f64>,
    pub slope: f64,
    pub boundary_mass: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fit `log Var(t)` against `log t` for pure fractional diffusion.
pub fn variance_fit(cfg: &VarianceConfig) -> Result<VarianceFit> {
    if !(cfg.t_start > 0.0 && cfg.t_end > cfg.t_start) || cfg.samples < 2 {
        return Err(Error::config("t_start", "need 0 < t_start < t_end and at least two samples"));
    }
    let n = (cfg.l / cfg.dx).round() as usize;
    if !n.is_multiple_of(2) || ((n as f64) * cfg.dx - cfg.l).abs() > 1e-9 * cfg.l {
        return Err(Error::config("dx", "l/dx must be an even integer"));
    }
    let mut u0 = vec![0.0; n + 1];
    u0[n / 2] = 1.0 / cfg.dx;
    let mut state = SimState::from_initial(cfg.alpha, cfg.dx, cfg.dt, u0)?;
    let nl = Nonlinearity::zero();
    let ratio = cfg.t_end / cfg.t_start;
    let mut targets: Vec<usize> = (0..cfg.samples)
        .map(|i| {
            let t = cfg.t_start * ratio.powf(i as f64 / (cfg.samples - 1) as f64);
            (t / cfg.dt).round() as usize
        })
        .collect();
    targets.dedup();
    let x = state.grid();
    let edge = (n as f64 * 0.1).ceil() as usize;
    let (mut ts, mut vars) = (Vec::new(), Vec::new());
    let mut boundary_mass: f64 = 0.0;
    for &target in &targets {
        while state.j() < target {
            state.step(&nl)?;
        }
        let u = state.current();
        let m0: f64 = u.iter().sum();
        let mean = x.iter().zip(u).map(|(x, u)| x * u).sum::<f64>() / m0;
        let var = x.iter().zip(u).map(|(x, u)| (x - mean).powi(2) * u).sum::<f64>() / m0;
        let outer: f64 = u[..edge].iter().chain(&u[n + 1 - edge..]).map(|v| v.abs()).sum();
        boundary_mass = boundary_mass.max(outer / m0);
        ts.push(state.t());
        vars.push(var);
    }
    if boundary_mass > BOUNDARY_MASS_TOL {
        return Err(Error::Numeric(format!(
            "boundary contamination: mass fraction {boundary_mass:e} near the ends exceeds {BOUNDARY_MASS_TOL:e}"
        )));
    }
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let lv: Vec<f64> = vars.iter().map(|v| v.ln()).collect();
    Ok(VarianceFit {
        slope: ls_slope(&lt, &lv),
        t: ts,
        variance: vars,
        boundary_mass,
    })
}

/// Slope of `log Var(t)` against `log t`; approximately α.
pub fn variance_slope(cfg: &VarianceConfig) -> Result<f64> {
    Ok(variance_fit(cfg)?.slope)
}
