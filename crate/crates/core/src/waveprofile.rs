//! Asymptotic traveling waves `u(t, x) ≈ φ(x + ct)` of the time-fractional
//! KPP equation, i.e. solutions of
//!
//! ```text
//! c^α ∂^α_ξ φ = φ'' + f(φ),   φ(−∞) = 0,  φ(+∞) = 1,
//! ```
//!
//! with `∂^α_ξ` the left-sided Caputo derivative on the whole line. Profiles
//! are built by monotone iteration `ψ_j = G(κ²ψ_{j−1} + f(ψ_{j−1}))` from a
//! mollified exponential upper solution, with `G` the inverse of
//! `κ² − ∂² + c^α ∂^α` ([`FactoredGreen`]).
//!
//! Everything is done for the discrete operator: L1 derivative, central
//! second difference, an exponential closure on the left with the discrete
//! decay rate `λ₁^h` (the smallest root of the discrete symbol), and a mirror
//! node on the right. With that choice the sampled upper solution is an exact
//! discrete supersolution on its exponential part, and the ordering of the
//! iterates holds to roundoff.

use crate::dispersion::{bisect, char_roots, critical_speed, lambda_star, Roots};
use crate::fkpp::Nonlinearity;
use crate::quad::{integrate, QuadOptions};
use crate::specfun::gamma;
use crate::wavekernels::{choose_kappa, FactoredGreen, PicardOptions};
use crate::weyl::{LeftExtension, WeylL1};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

const BUMP_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-16,
    rel_tol: 1e-14,
    max_intervals: 2000,
};

fn bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| integrate(bump, -1.0, 1.0, BUMP_QUAD).map(|r| r.value).unwrap_or(f64::NAN))
}

/// Standard bump `ρ(y) = C exp(−1/(1 − y²))` on `|y| < 1`, with `∫ρ = 1`.
pub fn mollifier(y: f64) -> f64 {
    bump(y) / bump_mass()
}

/// `∫_η^1 ρ(y) e^{−s y} dy`.
fn bump_moment(eta: f64, s: f64) -> f64 {
    if eta >= 1.0 {
        return 0.0;
    }
    let lo = eta.max(-1.0);
    integrate(|y| mollifier(y) * (-s * y).exp(), lo, 1.0, BUMP_QUAD)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

/// `R(λ, ε) = ∫ρ(y) e^{−ελy} dy`.
pub fn r_factor(lambda: f64, epsilon: f64) -> f64 {
    bump_moment(-1.0, epsilon * lambda)
}

/// Parameters of `φ̄ = ρ_ε ∗ min(e^{λ₁ξ}, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperSolutionParams {
    pub lambda1: f64,
    pub epsilon: f64,
    /// `R(λ₁, ε)`.
    pub r_eps: f64,
}

impl UpperSolutionParams {
    pub fn new(lambda1: f64, epsilon: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && epsilon > 0.0) {
            return Err(Error::Domain("lambda1 and epsilon must be positive".into()));
        }
        Ok(UpperSolutionParams {
            lambda1,
            epsilon,
            r_eps: r_factor(lambda1, epsilon),
        })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let (l, e) = (self.lambda1, self.epsilon);
        if xi <= -e {
            self.r_eps * (l * xi).exp()
        } else if xi >= e {
            1.0
        } else {
            let eta = xi / e;
            let below = 1.0 - bump_moment(eta, 0.0);
            below + (l * xi).exp() * bump_moment(eta, e * l)
        }
    }
}

pub fn upper_solution(params: &UpperSolutionParams, xi: &[f64]) -> Vec<f64> {
    xi.iter().map(|&x| params.eval(x)).collect()
}

/// Parameters of `φ_ = ρ_ε ∗ max(e^{λ₁ξ} − h e^{νλ₁ξ}, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerSolutionParams {
    pub lambda1: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub h: f64,
    /// Zero of `e^{λ₁ξ} − h e^{νλ₁ξ}`.
    pub xi0: f64,
    /// Left of `ξ*` the lower-solution inequality holds on the exponential part.
    pub xi_star: f64,
    pub r_eps: f64,
    pub r_nu_eps: f64,
}

impl LowerSolutionParams {
    /// ν at the midpoint of `(1, min(1+a, λ₂/λ₁))` and the smallest
    /// `h = 1.5·2^k` with `ξ₀ ≤ ξ*`. `v` is the symbol V used for the
    /// inequality; it must be negative at `νλ₁`.
    pub fn choose<V: Fn(f64) -> f64>(
        lambda1: f64,
        lambda2: f64,
        epsilon: f64,
        kpp_m: f64,
        kpp_a: f64,
        v: V,
    ) -> Result<Self> {
        let top = (1.0 + kpp_a).min(lambda2 / lambda1);
        if !(top > 1.0) {
            return Err(Error::Domain(format!("empty interval for nu: (1, {top})")));
        }
        let nu = 0.5 * (1.0 + top);
        let v_nu = v(nu * lambda1);
        let mut h = 1.5;
        for _ in 0..2000 {
            let p = Self::with(lambda1, epsilon, nu, h, kpp_m, kpp_a, v_nu)?;
            if p.xi0 <= p.xi_star {
                return Ok(p);
            }
            h *= 2.0;
        }
        Err(Error::Numeric("no admissible h for the lower solution".into()))
    }

    /// Explicit parameters; `v_nu = V(νλ₁)`. Refuses an inadmissible pair.
    pub fn new(
        lambda1: f64,
        epsilon: f64,
        nu: f64,
        h: f64,
        kpp_m: f64,
        kpp_a: f64,
        v_nu: f64,
    ) -> Result<Self> {
        let p = Self::with(lambda1, epsilon, nu, h, kpp_m, kpp_a, v_nu)?;
        if !(p.xi0 <= p.xi_star) {
            return Err(Error::config(
                "h",
                format!("h = {h} violates the lower-solution condition (ξ₀ = {} > ξ* = {})", p.xi0, p.xi_star),
            ));
        }
        Ok(p)
    }

    fn with(lambda1: f64, epsilon: f64, nu: f64, h: f64, kpp_m: f64, kpp_a: f64, v_nu: f64) -> Result<Self> {
        if !(nu > 1.0 && nu < 1.0 + kpp_a) {
            return Err(Error::config("nu", format!("nu = {nu} must lie in (1, 1 + a)")));
        }
        if !(h > 1.0) {
            return Err(Error::config("h", format!("h = {h} must exceed 1")));
        }
        if !(v_nu < 0.0) {
            return Err(Error::config("nu", format!("V(νλ₁) = {v_nu:e} must be negative")));
        }
        let r_eps = r_factor(lambda1, epsilon);
        let r_nu_eps = r_factor(nu * lambda1, epsilon);
        let xi0 = -h.ln() / (lambda1 * (nu - 1.0));
        let xi_star = if kpp_m > 0.0 {
            let q = h * r_nu_eps * (-v_nu) / (kpp_m * r_eps.powf(1.0 + kpp_a));
            q.ln() / ((1.0 + kpp_a - nu) * lambda1)
        } else {
            f64::INFINITY
        };
        Ok(LowerSolutionParams {
            lambda1,
            epsilon,
            nu,
            h,
            xi0,
            xi_star,
            r_eps,
            r_nu_eps,
        })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let (l, e, nu) = (self.lambda1, self.epsilon, self.nu);
        if xi <= self.xi0 - e {
            self.r_eps * (l * xi).exp() - self.h * self.r_nu_eps * (nu * l * xi).exp()
        } else if xi >= self.xi0 + e {
            0.0
        } else {
            let eta = (xi - self.xi0) / e;
            let v = (l * xi).exp() * bump_moment(eta, e * l) - self.h * (nu * l * xi).exp() * bump_moment(eta, e * nu * l);
            v.max(0.0)
        }
    }
}

pub fn lower_solution(params: &LowerSolutionParams, xi: &[f64]) -> Vec<f64> {
    xi.iter().map(|&x| params.eval(x)).collect()
}

/// Discrete symbol `V_h(λ) = (2cosh λh − 2)/h² − c^α σ_h(λ) + f'(0)` of the
/// linearization at 0, with `σ_h` the symbol of the L1 derivative.
#[derive(Debug, Clone)]
pub struct DiscreteSymbol {
    pub weyl: WeylL1,
    pub c: f64,
    pub fprime0: f64,
}

impl DiscreteSymbol {
    pub fn new(alpha: f64, c: f64, fprime0: f64, h: f64) -> Result<Self> {
        Ok(DiscreteSymbol {
            weyl: WeylL1::new(alpha, h)?,
            c,
            fprime0,
        })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let h = self.weyl.h;
        let d2 = 4.0 * (0.5 * lambda * h).sinh().powi(2) / (h * h);
        d2 - self.c.powf(self.weyl.alpha) * self.weyl.symbol(lambda) + self.fprime0
    }

    /// Both positive roots, bracketed around the continuous λ*.
    pub fn roots(&self) -> Result<(f64, f64)> {
        let alpha = self.weyl.alpha;
        let ls = lambda_star(alpha, self.c);
        let f = |l: f64| self.eval(l);
        if !(f(ls) < 0.0) {
            return Err(Error::Numeric(format!(
                "discrete symbol has no roots at c = {} and h = {}; refine h or raise c",
                self.c, self.weyl.h
            )));
        }
        let mut hi = 2.0 * ls;
        while f(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Numeric("larger discrete root not bracketed".into()));
            }
        }
        Ok((bisect(f, 1e-6 * ls, ls)?, bisect(f, ls, hi)?))
    }
}

/// Numerical options. `None` selects the defaults `L = 60/λ₁`,
/// `h = min(0.02/λ₂, 0.05)`, κ by [`choose_kappa`], `ε = 0.1/λ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileOptions {
    pub l: Option<f64>,
    pub h: Option<f64>,
    pub kappa: Option<f64>,
    pub epsilon: Option<f64>,
    /// Offset of the grid against the upper solution: `ξ_i = −L + shift + ih`.
    pub shift: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Inner Green solves stop at this fraction of the previous outer update.
    pub inner_rel: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            l: None,
            h: None,
            kappa: None,
            epsilon: None,
            shift: 0.0,
            tol: 1e-8,
            max_iter: 10_000,
            inner_rel: 1.0,
        }
    }
}

/// Tolerance of the pointwise ordering of consecutive iterates.
pub const ORDER_TOL: f64 = 1e-10;
/// Tolerance of the sandwich `φ_ ≤ φ ≤ φ̄`.
pub const SANDWICH_TOL: f64 = 1e-8;

/// A converged profile, translated so that `φ(0) = ½`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub alpha: f64,
    /// Speed the profile was computed at.
    pub c: f64,
    /// Speed that was asked for; differs from `c` only at the critical speed.
    pub c_requested: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Discrete decay rate used in the left closure.
    pub lambda1_grid: f64,
    pub kappa: f64,
    pub h: f64,
    /// Translation applied to the computational grid.
    pub offset: f64,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper_params: UpperSolutionParams,
    pub lower_params: LowerSolutionParams,
    pub iterations: usize,
    pub inner_sweeps: usize,
    pub last_update: f64,
    /// Largest `ψ_j − ψ_{j−1}` seen; non-positive up to roundoff.
    pub max_increase: f64,
    /// Sup-norm of the residual on the interior nodes.
    pub residual_sup: f64,
    /// `e^{−λ₁^h ξ₀} φ(ξ₀)` at the left end.
    pub decay_constant: f64,
    /// `1 − φ` at the right end.
    pub right_gap: f64,
}

impl WaveProfile {
    /// Four-point Lagrange interpolation; exponential continuation on the
    /// left, constant on the right.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.xi.len();
        let x0 = self.xi[0];
        if x <= x0 {
            return self.phi[0] * (self.lambda1_grid * (x - x0)).exp();
        }
        if x >= self.xi[n - 1] {
            return self.phi[n - 1];
        }
        let s = (x - x0) / self.h;
        let k = (s.floor() as usize).clamp(1, n - 3);
        let t = s - k as f64;
        let (p0, p1, p2, p3) = (self.phi[k - 1], self.phi[k], self.phi[k + 1], self.phi[k + 2]);
        -t * (t - 1.0) * (t - 2.0) / 6.0 * p0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * p1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * p2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * p3
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            alpha: self.alpha,
            c: self.c,
            c_requested: self.c_requested,
            lambda1: self.lambda1,
            lambda1_grid: self.lambda1_grid,
            kappa: self.kappa,
            h: self.h,
            nodes: self.xi.len(),
            iterations: self.iterations,
            residual_sup: self.residual_sup,
            decay_fit: decay_rate(self).ok(),
            decay_constant: self.decay_constant,
            right_gap: self.right_gap,
            subsolution_max_defect: None,
        }
    }
}

/// JSON sidecar of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub alpha: f64,
    pub c: f64,
    pub c_requested: f64,
    pub lambda1: f64,
    pub lambda1_grid: f64,
    pub kappa: f64,
    pub h: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub residual_sup: f64,
    pub decay_fit: Option<f64>,
    pub decay_constant: f64,
    pub right_gap: f64,
    pub subsolution_max_defect: Option<f64>,
}

/// The discrete problem on one grid.
#[derive(Debug, Clone)]
pub struct ProfileGrid {
    pub alpha: f64,
    pub c: f64,
    pub h: f64,
    pub xi: Vec<f64>,
    pub green: FactoredGreen,
}

impl ProfileGrid {
    pub fn new(alpha: f64, c: f64, kappa2: f64, h: f64, xi: Vec<f64>, lambda1_grid: f64) -> Result<Self> {
        let green = FactoredGreen::new(alpha, c, kappa2, h, xi.len(), LeftExtension::Exponential(lambda1_grid))?;
        Ok(ProfileGrid { alpha, c, h, xi, green })
    }

    /// `φ'' − c^α ∂^α φ + f(φ)` with the direct L1 sum.
    pub fn residual(&self, phi: &[f64], nl: &Nonlinearity) -> Vec<f64> {
        let d2 = self.green.second_difference(phi);
        let fr = self.green.fractional_term_direct(phi);
        (0..phi.len()).map(|i| d2[i] - fr[i] + nl.f(phi[i])).collect()
    }

    /// Same with the fast L1 route used by the iteration.
    pub fn residual_fast(&self, phi: &[f64], nl: &Nonlinearity) -> Vec<f64> {
        let d2 = self.green.second_difference(phi);
        let fr = self.green.fractional_term(phi);
        (0..phi.len()).map(|i| d2[i] - fr[i] + nl.f(phi[i])).collect()
    }
}

fn max_abs_fprime(nl: &Nonlinearity) -> f64 {
    (0..=1000).map(|i| nl.fprime(i as f64 / 1000.0).abs()).fold(0.0, f64::max)
}

/// Sign tolerance for the sampled upper and lower solutions.
const SIGN_TOL: f64 = 1e-12;

/// Build the profile at speed `c` by monotone iteration from the upper solution.
pub fn solve_profile(alpha: f64, c: f64, nl: &Nonlinearity, opts: &ProfileOptions) -> Result<WaveProfile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    nl.check_kpp(200)?;
    let f0 = nl.fprime0;
    let cstar = critical_speed(alpha, f0)?;
    if !(c > 0.0) || c < cstar * (1.0 - 1e-9) {
        return Err(Error::Refusal(format!("no asymptotic traveling wave below c* = {cstar}, got c = {c}")));
    }
    let c_req = c;
    let c = if c <= cstar * (1.0 + 1e-9) { cstar * (1.0 + 1e-3) } else { c };
    let (lambda1, lambda2) = match char_roots(alpha, c, f0)? {
        Roots::Two(a, b) => (a, b),
        r => return Err(Error::Numeric(format!("expected two characteristic roots, got {r:?}"))),
    };

    let h = opts.h.unwrap_or((0.02 / lambda2).min(0.05));
    let l = opts.l.unwrap_or(60.0 / lambda1);
    if !(h > 0.0 && l > 10.0 * h) {
        return Err(Error::config("h", format!("need 0 < 10h < L, got h = {h}, L = {l}")));
    }
    let n = (l / h).ceil() as usize;
    let len = 2 * n + 1;
    let xi: Vec<f64> = (0..len).map(|i| -(n as f64) * h + opts.shift + i as f64 * h).collect();

    let kappa = match opts.kappa {
        Some(k) => k,
        None => choose_kappa(alpha, c, max_abs_fprime(nl))?.kappa,
    };
    if kappa * kappa < max_abs_fprime(nl) {
        return Err(Error::config("kappa", format!("κ² = {} below max|f'|; iteration is not monotone", kappa * kappa)));
    }

    let symbol = DiscreteSymbol::new(alpha, c, f0, h)?;
    let (l1h, l2h) = symbol.roots()?;
    let grid = ProfileGrid::new(alpha, c, kappa * kappa, h, xi.clone(), l1h)?;

    // ε: halve until the sampled upper and lower solutions have the right signs.
    let mut eps = opts.epsilon.unwrap_or(0.1 / lambda2);
    let mut found = None;
    for _ in 0..40 {
        let up = UpperSolutionParams::new(l1h, eps)?;
        let lo = LowerSolutionParams::choose(l1h, l2h, eps, nl.kpp_m, nl.kpp_a, |x| symbol.eval(x))?;
        let upper = upper_solution(&up, &xi);
        let lower = lower_solution(&lo, &xi);
        let ok_up = grid.residual_fast(&upper, nl).iter().all(|&r| r <= SIGN_TOL);
        let ok_lo = grid.residual_fast(&lower, nl).iter().all(|&r| r >= -SIGN_TOL);
        if ok_up && ok_lo {
            found = Some((up, lo, upper, lower));
            break;
        }
        eps *= 0.5;
    }
    let (up, lo, upper, lower) =
        found.ok_or_else(|| Error::Numeric("no mollifier radius gives upper and lower solutions on this grid".into()))?;

    let k2 = kappa * kappa;
    let clamp = |u: f64| u.clamp(0.0, 1.0);
    let mut psi = upper.clone();
    let mut last = f64::INFINITY;
    let mut max_increase = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut inner_sweeps = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let g: Vec<f64> = psi.iter().map(|&u| k2 * u + nl.f(clamp(u))).collect();
        let inner = PicardOptions {
            abs_tol: (opts.inner_rel * last).clamp(1e-15, 1e-6),
            rel_tol: 0.0,
            max_iter: 10_000,
        };
        let step = grid.green.apply(&g, Some(&psi), inner)?;
        inner_sweeps += step.iterations;
        let mut sup: f64 = 0.0;
        for (a, b) in step.psi.iter().zip(&psi) {
            let d = a - b;
            max_increase = max_increase.max(d);
            sup = sup.max(d.abs());
        }
        if max_increase > ORDER_TOL {
            return Err(Error::Numeric(format!(
                "iterates increased by {max_increase:e} at step {iterations}; discretization too coarse"
            )));
        }
        psi = step.psi;
        last = sup;
        if sup < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "monotone iteration did not converge in {} steps (last update {last:e})",
            opts.max_iter
        )));
    }

    for i in 0..len {
        if psi[i] > upper[i] + SANDWICH_TOL || psi[i] < lower[i] - SANDWICH_TOL {
            return Err(Error::Numeric(format!(
                "profile leaves [lower, upper] at ξ = {}: {} not in [{}, {}]",
                xi[i], psi[i], lower[i], upper[i]
            )));
        }
    }
    if let Some(i) = (1..len).find(|&i| psi[i] <= psi[i - 1]) {
        return Err(Error::Numeric(format!("profile is not strictly increasing at ξ = {}", xi[i])));
    }

    let residual = grid.residual(&psi, nl);
    let residual_sup = residual[1..len - 1].iter().fold(0.0f64, |m, r| m.max(r.abs()));

    let mut profile = WaveProfile {
        alpha,
        c,
        c_requested: c_req,
        lambda1,
        lambda2,
        lambda1_grid: l1h,
        kappa,
        h,
        offset: 0.0,
        xi,
        phi: psi,
        upper,
        lower,
        upper_params: up,
        lower_params: lo,
        iterations,
        inner_sweeps,
        last_update: last,
        max_increase,
        residual_sup,
        decay_constant: f64::NAN,
        right_gap: f64::NAN,
    };
    let half = half_point(&profile)?;
    for x in profile.xi.iter_mut() {
        *x -= half;
    }
    profile.offset = half;
    profile.decay_constant = profile.phi[0] * (-l1h * profile.xi[0]).exp();
    profile.right_gap = 1.0 - profile.phi[len - 1];
    Ok(profile)
}

/// Location of `φ = ½`, with the crossing refined on the interpolant.
fn half_point(p: &WaveProfile) -> Result<f64> {
    let k = p
        .phi
        .windows(2)
        .position(|w| w[0] < 0.5 && w[1] >= 0.5)
        .ok_or_else(|| Error::Numeric("profile does not cross 1/2".into()))?;
    bisect(|x| p.interpolate(x) - 0.5, p.xi[k], p.xi[k + 1])
}

/// Residual of the profile equation at every node (direct L1 sum).
pub fn residual(profile: &WaveProfile, nl: &Nonlinearity) -> Result<Vec<f64>> {
    Ok(grid_of(profile)?.residual(&profile.phi, nl))
}

/// The discrete problem a profile was solved on.
pub fn grid_of(profile: &WaveProfile) -> Result<ProfileGrid> {
    ProfileGrid::new(
        profile.alpha,
        profile.c,
        profile.kappa * profile.kappa,
        profile.h,
        profile.xi.clone(),
        profile.lambda1_grid,
    )
}

/// Least-squares slope of `ln φ` over the nodes with `1e-8 < φ < 1e-3`.
pub fn decay_rate(profile: &WaveProfile) -> Result<f64> {
    fit_exponent(&profile.xi, &profile.phi)
}

pub fn fit_exponent(xi: &[f64], phi: &[f64]) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = xi
        .iter()
        .zip(phi)
        .filter(|(_, &p)| p > 1e-8 && p < 1e-3)
        .map(|(&x, &p)| (x, p.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::Numeric("fewer than three nodes with 1e-8 < φ < 1e-3".into()));
    }
    let span = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < std::f64::consts::LN_10 {
        return Err(Error::Numeric("left tail resolves less than one decade".into()));
    }
    Ok(crate::fkpp::ls_slope(&x, &y))
}

/// One point of the sub-solution check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectSample {
    pub t: f64,
    pub x: f64,
    pub defect: f64,
}

/// `∂^α_t v − v_xx − f(v)` for `v(t, x) = φ(x + ct)`, where the Caputo
/// derivative in t is the L1 sum of the profile truncated at `s = ct`.
/// Each `x` is moved to the nearest grid node of `ξ = x + ct`.
pub fn subsolution_defects(
    profile: &WaveProfile,
    nl: &Nonlinearity,
    t_samples: &[f64],
    x_samples: &[f64],
) -> Result<Vec<DefectSample>> {
    let grid = grid_of(profile)?;
    let weyl = &grid.green.weyl;
    let phi = &profile.phi;
    let n = phi.len();
    let h = profile.h;
    let alpha = profile.alpha;
    let d2 = grid.green.second_difference(phi);
    let ca = profile.c.powf(alpha) * weyl.scale();
    let delta = |j: isize| -> f64 {
        if j >= 1 {
            phi[j as usize] - phi[j as usize - 1]
        } else {
            // exponential continuation below the grid
            let q = (-profile.lambda1_grid * h).exp();
            phi[0] * (1.0 - q) * q.powi((-j) as i32)
        }
    };
    let mut out = Vec::with_capacity(t_samples.len() * x_samples.len());
    for &t in t_samples {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        let reach = profile.c * t / h;
        let whole = reach.floor() as usize;
        let part = reach.powf(1.0 - alpha) - (whole as f64).powf(1.0 - alpha);
        for &x in x_samples {
            let s = (x + profile.c * t - profile.xi[0]) / h;
            let i = s.round();
            if i < 1.0 || i as usize >= n - 1 {
                return Err(Error::Domain(format!("ξ = x + ct = {} leaves the profile grid", x + profile.c * t)));
            }
            let i = i as usize;
            let mut sum = 0.0;
            for m in 0..whole {
                sum += weyl.b_exact(m) * delta(i as isize - m as isize);
            }
            sum += part * delta(i as isize - whole as isize);
            let defect = ca * sum - d2[i] - nl.f(phi[i]);
            out.push(DefectSample {
                t,
                x: profile.xi[i] - profile.c * t,
                defect,
            });
        }
    }
    Ok(out)
}

/// Largest defect over the samples; negative for a sub-solution.
pub fn subsolution_check(
    profile: &WaveProfile,
    nl: &Nonlinearity,
    t_samples: &[f64],
    x_samples: &[f64],
) -> Result<f64> {
    Ok(subsolution_defects(profile, nl, t_samples, x_samples)?
        .iter()
        .map(|d| d.defect)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `(c^α/Γ(1−α)) ∫_{ct}^∞ φ'(ξ−s) s^{−α} ds`, the size of the deficit, by
/// quadrature on the interpolant. Used as a second route for the defect.
pub fn tail_deficit(profile: &WaveProfile, xi: f64, t: f64) -> Result<f64> {
    let a = profile.c * t;
    let d = 1e-4;
    let dphi = |s: f64| (profile.interpolate(xi - s + d) - profile.interpolate(xi - s - d)) / (2.0 * d);
    let opts = QuadOptions::tol(1e-14, 1e-9);
    let width = 40.0 / profile.lambda1_grid;
    let f = |s: f64| dphi(s) * s.powf(-profile.alpha);
    let grid_end = xi - profile.xi[0];
    let pts: Vec<f64> = [grid_end].into_iter().filter(|&p| p > a && p < a + width).collect();
    let mut val = crate::quad::integrate_points(f, a, a + width, &pts, opts)?.value;
    val += crate::quad::integrate_to_inf(f, a + width, opts)?.value;
    Ok(profile.c.powf(profile.alpha) / gamma(1.0 - profile.alpha)? * val)
}
