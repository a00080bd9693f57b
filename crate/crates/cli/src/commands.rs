use crate::output::Outputs;
use frackpp::caputo::{malthus_exact, malthus_order_study, solve_malthus, MalthusRun, ReactionTreatment};
use frackpp::dispersion::DispersionReport;
use frackpp::fkpp::{run, variance_fit, Nonlinearity, RunStatus, SimConfig, VarianceConfig};
use frackpp::front::{critical_speed_closed, default_alpha_grid, smoothed_speed, speed_sweep};
use frackpp::quad::{integrate_to_inf, QuadOptions};
use frackpp::specfun::gamma;
use frackpp::wavekernels::{build_table, FactoredGreen, Kernel, KernelConfig, PicardOptions, TableGreen};
use frackpp::waveprofile::{residual, solve_profile, subsolution_check, ProfileOptions};
use frackpp::weyl::LeftExtension;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;

/// Failure of a subcommand, classified for the exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Refusal(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Refusal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Refusal(m) => write!(f, "refused: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<frackpp::Error> for CliError {
    fn from(e: frackpp::Error) -> Self {
        use frackpp::Error as E;
        match e {
            E::Config { .. } | E::Domain(_) => CliError::Config(e.to_string()),
            E::Refusal(_) => CliError::Refusal(e.to_string()),
            E::Numeric(_) | E::Range(_) | E::Contract(_) => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What a subcommand hands back to the driver.
pub struct Finished {
    pub outputs: Outputs,
    pub config: Value,
    pub steps: Option<usize>,
}

fn parse<T: DeserializeOwned>(value: Value) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

fn resolved<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config serializes")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reaction {
    #[default]
    Fisher,
    Zero,
}

impl Reaction {
    fn build(self) -> Nonlinearity {
        match self {
            Reaction::Fisher => Nonlinearity::fisher(),
            Reaction::Zero => Nonlinearity::zero(),
        }
    }
}

/// Front run or, for `f ≡ 0`, the spreading diagnostic.
pub fn simulate(mut value: Value) -> CliResult<Finished> {
    let reaction: Reaction = match value.as_object_mut().and_then(|m| m.remove("nonlinearity")) {
        Some(v) => parse(v)?,
        None => Reaction::Fisher,
    };
    let cfg: SimConfig = parse(value)?;
    cfg.validate()?;
    let mut config = resolved(&cfg);
    config["nonlinearity"] = resolved(&reaction);
    let mut out = Outputs::default();

    if reaction == Reaction::Zero {
        let vc = VarianceConfig {
            alpha: cfg.alpha,
            l: cfg.l,
            dx: cfg.dx,
            dt: cfg.dt,
            ..Default::default()
        };
        config["variance"] = resolved(&vc);
        let fit = variance_fit(&vc)?;
        out.csv(
            "variance.csv",
            &["t", "variance"],
            fit.t.iter().zip(&fit.variance).map(|(&t, &v)| vec![t, v]),
        );
        out.json(
            "summary.json",
            &serde_json::json!({
                "variance_slope": fit.slope,
                "boundary_mass": fit.boundary_mass,
            }),
        );
        let steps = (fit.t.last().copied().unwrap_or(0.0) / cfg.dt).round() as usize;
        return Ok(Finished {
            outputs: out,
            config,
            steps: Some(steps),
        });
    }

    let nl = reaction.build();
    let traj = run(&cfg, &nl).map_err(|e| match CliError::from(e) {
        CliError::Numeric(m) => CliError::Numeric(format!("{m} (during the time loop)")),
        other => other,
    })?;
    out.csv(
        "track.csv",
        &["t", "x_star"],
        traj.track.t.iter().zip(&traj.track.x_star).map(|(&t, &x)| vec![t, x]),
    );
    for snap in &traj.snapshots {
        out.csv(
            &format!("snapshots/u_t{:012.6}.csv", snap.t),
            &["x", "u"],
            traj.x.iter().zip(&snap.u).map(|(&x, &u)| vec![x, u]),
        );
    }
    let c_star = critical_speed_closed(cfg.alpha, nl.fprime0)?;
    let c_sm = smoothed_speed(&traj.track).ok();
    out.json(
        "summary.json",
        &serde_json::json!({
            "status": traj.status,
            "stop_time": traj.track.stop_time,
            "steps": traj.steps,
            "c_num": traj.track.c_num,
            "c_num_smoothed": c_sm,
            "c_star": c_star,
            "rel_error": traj.track.c_num.map(|c| (c - c_star).abs() / c_star),
            "multiple_crossings": traj.track.multiple_crossings,
            "range_excess": traj.range_excess,
            "final_x_star": traj.track.x_star.last(),
        }),
    );
    if traj.status == RunStatus::NoCrossing {
        eprintln!("warning: level {} never crossed", cfg.level);
    }
    Ok(Finished {
        outputs: out,
        config,
        steps: Some(traj.steps),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_alpha_grid")]
    pub alphas: Vec<f64>,
    #[serde(default = "desk_base")]
    pub sim: SimConfig,
    #[serde(default)]
    pub nonlinearity: Reaction,
}

fn desk_base() -> SimConfig {
    SimConfig::desk(0.5)
}

pub fn speed_sweep_cmd(value: Value) -> CliResult<Finished> {
    let cfg: SweepConfig = parse(value)?;
    if cfg.alphas.is_empty() {
        return Err(CliError::Config("`alphas` must not be empty".into()));
    }
    for &a in &cfg.alphas {
        SimConfig { alpha: a, ..cfg.sim.clone() }.validate()?;
    }
    let nl = cfg.nonlinearity.build();
    let rows = speed_sweep(&cfg.alphas, &cfg.sim, &nl);
    let mut out = Outputs::default();
    out.csv(
        "sweep.csv",
        &["alpha", "c_num", "c_num_smoothed", "c_star", "rel_error"],
        rows.iter()
            .map(|r| vec![r.alpha, r.c_num, r.c_num_smoothed, r.c_star, r.rel_error]),
    );
    let failures: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| serde_json::json!({"alpha": r.alpha, "error": e})))
        .collect();
    out.json("failures.json", &failures);
    Ok(Finished {
        outputs: out,
        config: resolved(&cfg),
        steps: None,
    })
}

fn default_t_samples() -> Vec<f64> {
    vec![1.0, 5.0, 20.0]
}

fn default_x_samples() -> Vec<f64> {
    (0..20).map(|k| -10.0 + 20.0 * k as f64 / 19.0).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub alpha: f64,
    #[serde(default)]
    pub c: Option<f64>,
    /// Solve at the critical speed, i.e. at `c*(1 + 1e-3)`.
    #[serde(default)]
    pub at_critical: bool,
    #[serde(default)]
    pub nonlinearity: Reaction,
    #[serde(default)]
    pub options: ProfileOptions,
    #[serde(default = "default_t_samples")]
    pub t_samples: Vec<f64>,
    #[serde(default = "default_x_samples")]
    pub x_samples: Vec<f64>,
}

pub fn profile(value: Value) -> CliResult<Finished> {
    let cfg: ProfileConfig = parse(value)?;
    let nl = cfg.nonlinearity.build();
    let c = match (cfg.c, cfg.at_critical) {
        (_, true) => critical_speed_closed(cfg.alpha, nl.fprime0)?,
        (Some(c), false) => c,
        (None, false) => return Err(CliError::Config("give `c` or set `at_critical`".into())),
    };
    let p = solve_profile(cfg.alpha, c, &nl, &cfg.options).map_err(|e| match e {
        frackpp::Error::Refusal(m) => {
            CliError::Refusal(format!("{m}: V(λ) = λ² − (cλ)^α + f'(0) has no positive root"))
        }
        other => other.into(),
    })?;
    let res = residual(&p, &nl)?;
    let mut summary = p.summary();
    if !cfg.t_samples.is_empty() && !cfg.x_samples.is_empty() {
        summary.subsolution_max_defect = Some(subsolution_check(&p, &nl, &cfg.t_samples, &cfg.x_samples)?);
    }
    let mut out = Outputs::default();
    out.csv(
        "profile.csv",
        &["xi", "phi", "residual"],
        (0..p.xi.len()).map(|i| vec![p.xi[i], p.phi[i], res[i]]),
    );
    out.json("profile.json", &summary);
    Ok(Finished {
        outputs: out,
        config: resolved(&cfg),
        steps: Some(p.iterations),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "four")]
    pub c: f64,
    #[serde(default = "one")]
    pub fprime0: f64,
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn four() -> f64 {
    4.0
}

pub fn dispersion(value: Value) -> CliResult<Finished> {
    let cfg: DispersionConfig = parse(value)?;
    let report = DispersionReport::new(cfg.alpha, cfg.c, cfg.fprime0)?;
    let mut out = Outputs::default();
    out.json("dispersion.json", &report);
    Ok(Finished {
        outputs: out,
        config: resolved(&cfg),
        steps: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCheckConfig {
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "two")]
    pub c: f64,
    #[serde(default = "two")]
    pub kappa: f64,
    /// Half-width of the table in units of 1/κ.
    #[serde(default = "forty")]
    pub width: f64,
    #[serde(default = "table_h")]
    pub h: f64,
}

fn forty() -> f64 {
    40.0
}
fn table_h() -> f64 {
    0.05
}

#[derive(Debug, Serialize)]
struct Identity {
    name: &'static str,
    measured: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

fn identity(name: &'static str, measured: f64, expected: f64, tolerance: f64) -> Identity {
    Identity {
        name,
        measured,
        expected,
        tolerance,
        pass: (measured - expected).abs() <= tolerance,
    }
}

pub fn kernel_check(value: Value) -> CliResult<Finished> {
    let cfg: KernelCheckConfig = parse(value)?;
    let kc = KernelConfig::new(cfg.alpha, cfg.c, cfg.kappa)?;
    let ker = Kernel::new(&kc)?;
    let (a, c, k) = (cfg.alpha, cfg.c, cfg.kappa);
    let p = -(c * k).powf(a) / (2.0 * k);
    let mut ids = Vec::new();

    let worst = [-0.01, -0.5, -1.0, -5.0]
        .iter()
        .map(|&x| Ok((ker.eval(x)? - p * (k * x).exp()).abs()))
        .collect::<Result<Vec<f64>, frackpp::Error>>()?
        .into_iter()
        .fold(0.0, f64::max);
    ids.push(identity("negative_side_closed_form", worst, 0.0, 1e-15));
    let jump = (ker.eval(1e-40)? - ker.eval(-1e-40)?).abs();
    ids.push(identity("continuity_at_zero", jump, 0.0, 1e-6));
    let mass = integrate_to_inf(|s| ker.eval(-s).map(f64::abs).unwrap_or(f64::NAN), 0.0, QuadOptions::tol(1e-14, 1e-12))
        .map_err(CliError::from)?
        .value;
    ids.push(identity("negative_side_mass", mass, (c * k).powf(a) / (2.0 * k * k), 1e-6));
    let law = a * c.powf(a) / (k * k * gamma(1.0 - a)?);
    let far = 2000.0 / k;
    ids.push(identity("tail_law", far.powf(1.0 + a) * ker.eval(far)?, law, 1e-2 * law));
    let near = 200.0 / k;
    ids.push(identity("tail_constant_stated", near.powf(1.0 + a) * ker.eval(near)?, 0.19947, 0.1 * 0.19947));

    let table = build_table(&kc, cfg.width / k, cfg.h)?;
    ids.push(identity("table_zero_mean", table.integral, 0.0, 1e-4));
    ids.push(identity("norm_below_one", kc.theta_bound, 0.0, 1.0 - 1e-12));
    let n = table.len();
    let green = TableGreen::new(table);
    let g = vec![k * k; n];
    let one = green.apply(&g, None, PicardOptions::default())?;
    let dev = one.psi.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    ids.push(identity("green_of_constant_table", 1.0 + dev, 1.0, 1e-8));
    let fg = FactoredGreen::new(a, c, k * k, cfg.h, n, LeftExtension::Constant)?;
    let one = fg.apply(&g, None, PicardOptions::default())?;
    let dev = one.psi.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    ids.push(identity("green_of_constant_factored", 1.0 + dev, 1.0, 1e-8));

    let all_pass = ids.iter().all(|i| i.pass);
    let mut out = Outputs::default();
    out.json(
        "kernel_check.json",
        &serde_json::json!({
            "norm": kc.theta_bound,
            "sign_change": ker.sign_change()?,
            "identities": ids,
            "all_pass": all_pass,
        }),
    );
    Ok(Finished {
        outputs: out,
        config: resolved(&cfg),
        steps: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MalthusCheckConfig {
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "minus_one")]
    pub zeta: f64,
    #[serde(default = "one")]
    pub v0: f64,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_dts")]
    pub dts: Vec<f64>,
    #[serde(default)]
    pub treatment: ReactionTreatment,
}

fn minus_one() -> f64 {
    -1.0
}
fn default_dts() -> Vec<f64> {
    vec![1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0]
}

pub fn malthus_check(value: Value) -> CliResult<Finished> {
    let cfg: MalthusCheckConfig = parse(value)?;
    if cfg.dts.is_empty() {
        return Err(CliError::Config("`dts` must not be empty".into()));
    }
    let study = malthus_order_study(cfg.alpha, cfg.zeta, cfg.v0, cfg.t_end, &cfg.dts, cfg.treatment)?;
    let dt = cfg.dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let nsteps = (cfg.t_end / dt).round() as usize;
    let v = solve_malthus(&MalthusRun {
        alpha: cfg.alpha,
        zeta: cfg.zeta,
        v0: cfg.v0,
        dt,
        nsteps,
        treatment: cfg.treatment,
    })?;
    let mut rows = Vec::with_capacity(v.len());
    for (j, &vn) in v.iter().enumerate() {
        let t = j as f64 * dt;
        let exact = malthus_exact(cfg.alpha, cfg.zeta, cfg.v0, t)?;
        rows.push(vec![t, vn, exact, (vn - exact).abs()]);
    }
    let mut out = Outputs::default();
    out.csv("malthus.csv", &["t", "v_numeric", "v_exact", "abs_error"], rows);
    out.json(
        "malthus.json",
        &serde_json::json!({
            "study": study,
            "target_order": 2.0 - cfg.alpha,
            "last_order": study.orders.last(),
        }),
    );
    Ok(Finished {
        outputs: out,
        config: resolved(&cfg),
        steps: Some(nsteps),
    })
}

/// Merge command-line overrides into a config object.
pub fn with_overrides(mut value: Value, overrides: &[(&str, Option<f64>)]) -> CliResult<Value> {
    if value.is_null() {
        value = Value::Object(Map::new());
    }
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    for (k, v) in overrides {
        if let Some(v) = v {
            obj.insert((*k).to_string(), serde_json::json!(v));
        }
    }
    Ok(value)
}
