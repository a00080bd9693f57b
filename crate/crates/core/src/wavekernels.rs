//! Kernels of the linear profile operator and its Green function.
//!
//! With `K₀(ξ) = e^{−κ|ξ|}/(2κ)` (the Green function of `κ² − ∂²`) and
//! `K_α = −c^α ∂^α K₀`, the solution of `(κ² − ∂² + c^α ∂^α) ψ = g` is the
//! fixed point of `ψ = K_α ∗ ψ + K₀ ∗ g`. For ξ ≤ 0 the kernel is
//! `K_α(ξ) = −(cκ)^α K₀(ξ)`; for ξ > 0, with `x = κξ`,
//!
//! ```text
//! K_α(ξ) = −c^α κ^{α−1} / (2 Γ(1−α)) · (A(x) − B(x)),
//! A(x) = ∫_0^∞ e^{−v} (x+v)^{−α} dv,   B(x) = ∫_0^x e^{−(x−t)} t^{−α} dt,
//! ```
//!
//! and the right tail integral is
//! `∫_a^∞ K_α = c^α κ^{α−2} / (2 Γ(1−α)) · (A(κa) + B(κa))`.
//!
//! Two Green solvers are provided. [`TableGreen`] iterates the convolution
//! form on hat-function weights of the kernels. [`FactoredGreen`] works with
//! the differential form directly: a tridiagonal solve for the local part and
//! the L1 Weyl history from [`crate::weyl`] as the explicit part.

use crate::quad::{gauss_legendre, integrate, integrate_to_inf, QuadOptions};
use crate::specfun::gamma;
use crate::tridiag::{diagonally_dominant, Tridiag};
use crate::weyl::{LeftExtension, WeylL1};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

const KERNEL_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-300,
    rel_tol: 1e-13,
    max_intervals: 4000,
};

/// `K₀(ξ) = e^{−κ|ξ|}/(2κ)`.
pub fn k0(xi: f64, kappa: f64) -> f64 {
    (-kappa * xi.abs()).exp() / (2.0 * kappa)
}

/// `A(x)` and `B(x)`, the two one-sided integrals of the kernel representation.
#[derive(Debug, Clone, Copy)]
struct OneSided {
    alpha: f64,
    /// `A(1)`, reused for small arguments.
    a1: f64,
}

impl OneSided {
    fn new(alpha: f64) -> Result<Self> {
        let a1 = integrate_to_inf(|v| (-v).exp() * (1.0 + v).powf(-alpha), 0.0, KERNEL_QUAD)?.value;
        Ok(OneSided { alpha, a1 })
    }

    /// `∫_0^{X} e^{−(x−t)} t^{−α} dt` with `t = u^{1/(1−α)}`.
    fn left_part(&self, x: f64, upper: f64) -> Result<f64> {
        if upper <= 0.0 {
            return Ok(0.0);
        }
        let e = 1.0 / (1.0 - self.alpha);
        let f = |u: f64| (u.powf(e) - x).exp() * e;
        Ok(integrate(f, 0.0, upper.powf(1.0 - self.alpha), KERNEL_QUAD)?.value)
    }

    fn a(&self, x: f64) -> Result<f64> {
        let alpha = self.alpha;
        if x <= 1.0 {
            // ∫_x^1 by substitution, plus e^{x−1} A(1)
            let e = 1.0 / (1.0 - alpha);
            let f = |u: f64| (x - u.powf(e)).exp() * e;
            let lo = if x > 0.0 { x.powf(1.0 - alpha) } else { 0.0 };
            let near = integrate(f, lo, 1.0, KERNEL_QUAD)?.value;
            Ok(near + (x - 1.0).exp() * self.a1)
        } else {
            Ok(integrate_to_inf(|v| (-v).exp() * (x + v).powf(-alpha), 0.0, KERNEL_QUAD)?.value)
        }
    }

    fn b(&self, x: f64) -> Result<f64> {
        self.left_part(x, x)
    }

    /// `A − B`; for x > 1 after integrating by parts so that the two
    /// `x^{−α}` leading terms cancel analytically.
    fn a_minus_b(&self, x: f64) -> Result<f64> {
        if x <= 1.0 {
            return Ok(self.a(x)? - self.b(x)?);
        }
        let alpha = self.alpha;
        let t1 = integrate_to_inf(|v| (-v).exp() * (x + v).powf(-1.0 - alpha), 0.0, KERNEL_QUAD)?.value;
        let t2 = integrate(
            |t| (t - x).exp() * t.powf(-1.0 - alpha),
            0.5 * x,
            x,
            KERNEL_QUAD,
        )?
        .value;
        let t3 = (-0.5 * x).exp() * (0.5 * x).powf(-alpha);
        let t4 = self.left_part(x, 0.5 * x)?;
        Ok(-alpha * (t1 + t2) + t3 - t4)
    }
}

/// Parameters of the kernel pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub alpha: f64,
    pub c: f64,
    pub kappa: f64,
    /// Measured `‖K_α‖_{L¹}`.
    pub theta_bound: f64,
}

impl KernelConfig {
    /// Validates the parameters and measures `‖K_α‖_{L¹}`.
    pub fn new(alpha: f64, c: f64, kappa: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(c > 0.0) || !(kappa > 0.0) || !c.is_finite() || !kappa.is_finite() {
            return Err(Error::Domain(format!("c and kappa must be positive, got {c}, {kappa}")));
        }
        let mut cfg = KernelConfig {
            alpha,
            c,
            kappa,
            theta_bound: f64::NAN,
        };
        cfg.theta_bound = Kernel::new(&cfg)?.l1_norm()?;
        Ok(cfg)
    }
}

/// Evaluator for `K_α` and its integrals.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub alpha: f64,
    pub c: f64,
    pub kappa: f64,
    one_sided: OneSided,
    gamma_1ma: f64,
}

impl Kernel {
    pub fn new(cfg: &KernelConfig) -> Result<Self> {
        Ok(Kernel {
            alpha: cfg.alpha,
            c: cfg.c,
            kappa: cfg.kappa,
            one_sided: OneSided::new(cfg.alpha)?,
            gamma_1ma: gamma(1.0 - cfg.alpha)?,
        })
    }

    /// Coefficient `P` of `K_α(ξ) = P e^{κξ}` for ξ ≤ 0, `P = −(cκ)^α/(2κ)`.
    pub fn negative_prefactor(&self) -> f64 {
        -(self.c * self.kappa).powf(self.alpha) / (2.0 * self.kappa)
    }

    /// `lim ξ^{1+α} K_α(ξ) = α c^α / (κ² Γ(1−α))`.
    pub fn tail_coefficient(&self) -> f64 {
        self.alpha * self.c.powf(self.alpha) / (self.kappa * self.kappa * self.gamma_1ma)
    }

    /// `∫_{−∞}^0 |K_α| = (cκ)^α / (2κ²)`.
    pub fn negative_mass(&self) -> f64 {
        -self.negative_prefactor() / self.kappa
    }

    pub fn eval(&self, xi: f64) -> Result<f64> {
        if xi <= 0.0 {
            return Ok(self.negative_prefactor() * (self.kappa * xi).exp());
        }
        let d = self.one_sided.a_minus_b(self.kappa * xi).map_err(|e| {
            Error::Numeric(format!("K_alpha quadrature failed at xi = {xi}: {e}"))
        })?;
        Ok(self.negative_prefactor() / self.gamma_1ma * d)
    }

    /// `∫_a^∞ K_α(ξ) dξ`.
    pub fn tail_integral(&self, a: f64) -> Result<f64> {
        let k = self.kappa;
        let at_zero = self.negative_mass();
        if a <= 0.0 {
            return Ok(at_zero + self.negative_prefactor() * (1.0 - (k * a).exp()) / k);
        }
        let x = k * a;
        let s = self.one_sided.a(x)? + self.one_sided.b(x)?;
        Ok(at_zero * s / self.gamma_1ma)
    }

    /// The single sign change of `K_α` on (0, ∞).
    pub fn sign_change(&self) -> Result<f64> {
        let f = |x: f64| self.one_sided.a_minus_b(x).unwrap_or(f64::NAN);
        let mut hi = 1.0;
        while f(hi) >= 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Numeric("K_alpha has no sign change".into()));
            }
        }
        let x = crate::dispersion::bisect(f, 0.0, hi)?;
        Ok(x / self.kappa)
    }

    /// `‖K_α‖_{L¹} = 2 ∫_{ξ_s}^∞ K_α`, since the kernel has zero mean and is
    /// negative exactly on (−∞, ξ_s).
    pub fn l1_norm(&self) -> Result<f64> {
        Ok(2.0 * self.tail_integral(self.sign_change()?)?)
    }
}

/// `k_alpha` for a single point.
pub fn k_alpha(xi: f64, cfg: &KernelConfig) -> Result<f64> {
    Kernel::new(cfg)?.eval(xi)
}

/// Norm above which κ is increased.
pub const KAPPA_NORM_TARGET: f64 = 0.5;

/// Start at `κ² = 2 max|f'|` and double until `‖K_α‖_{L¹} ≤ 0.5`.
pub fn choose_kappa(alpha: f64, c: f64, max_fprime: f64) -> Result<KernelConfig> {
    let mut kappa2 = 2.0 * max_fprime.max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let cfg = KernelConfig::new(alpha, c, kappa2.sqrt())?;
        if cfg.theta_bound <= KAPPA_NORM_TARGET {
            return Ok(cfg);
        }
        kappa2 *= 2.0;
    }
    Err(Error::Numeric("no admissible kappa found".into()))
}

/// Hat-function weights `W(m) = ∫ K(mh − s)(1 − |s|/h)_+ ds` of both kernels
/// on `[−L, L]`, with the sums of the weights beyond the table in closed form.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub cfg: KernelConfig,
    pub h: f64,
    /// Half-width in nodes: the grid is `ξ_i = −L + i h`, `i = 0..=2n`.
    pub n: usize,
    pub xi: Vec<f64>,
    /// `K_α(ξ_i)`.
    pub samples: Vec<f64>,
    /// `W_α(m)` and `W₀(m)` for `m = −2n..=2n`, stored at index `m + 2n`.
    pub w_alpha: Vec<f64>,
    pub w_zero: Vec<f64>,
    /// `Σ_{m ≥ k+1} W_α(m)` for `k = 0..=2n`.
    right_tail_alpha: Vec<f64>,
    pub negative_prefactor: f64,
    pub tail_coefficient: f64,
    /// `∫K_α` from the weights plus the analytic tails.
    pub integral: f64,
    /// Trapezoid rule of the samples over `[−L, L]` alone.
    pub trapezoid: f64,
    /// `‖K_α‖_{L¹}` from the weights.
    pub weight_norm: f64,
}

/// `2(cosh κh − 1)/(κ² h)`: hat weight of `e^{κξ}` relative to its central value.
fn hat_factor(kappa: f64, h: f64) -> f64 {
    let x = kappa * h;
    // 2(cosh x − 1) = 4 sinh²(x/2)
    4.0 * (0.5 * x).sinh().powi(2) / (kappa * kappa * h)
}

/// `∫_{−h}^0 e^{κy}(1 + y/h) dy`.
fn half_hat_exp(kappa: f64, h: f64) -> f64 {
    1.0 / kappa + (-kappa * h).exp_m1() / (kappa * kappa * h)
}

impl KernelTable {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    #[inline]
    fn wa(&self, m: isize) -> f64 {
        self.w_alpha[(m + 2 * self.n as isize) as usize]
    }

    /// `Σ_{m ≤ M} W(m)` for `M ≤ −1` of a kernel equal to `P e^{κξ}` on ξ ≤ 0.
    fn left_cumulative(&self, prefactor: f64, big_m: isize) -> f64 {
        let k = self.cfg.kappa;
        prefactor * hat_factor(k, self.h) * (k * big_m as f64 * self.h).exp() / (-(-k * self.h).exp_m1())
    }

    /// `(K ∗ ψ)_i` with ψ held at its end values beyond the grid.
    pub fn convolve_alpha(&self, psi: &[f64]) -> Vec<f64> {
        let n2 = 2 * self.n;
        let p = self.negative_prefactor;
        (0..=n2)
            .map(|i| {
                let mut s = 0.0;
                for (j, v) in psi.iter().enumerate() {
                    s += self.wa(i as isize - j as isize) * v;
                }
                s += psi[0] * self.right_tail_alpha[i];
                s += psi[n2] * self.left_cumulative(p, i as isize - n2 as isize - 1);
                s
            })
            .collect()
    }

    pub fn convolve_zero(&self, g: &[f64]) -> Vec<f64> {
        let n2 = 2 * self.n;
        let p = 1.0 / (2.0 * self.cfg.kappa);
        (0..=n2)
            .map(|i| {
                let mut s = 0.0;
                for (j, v) in g.iter().enumerate() {
                    s += self.w_zero[(i as isize - j as isize + n2 as isize) as usize] * v;
                }
                s += g[0] * self.left_cumulative(p, -(i as isize) - 1);
                s += g[n2] * self.left_cumulative(p, i as isize - n2 as isize - 1);
                s
            })
            .collect()
    }
}

/// Tabulate the kernels on `[−L, L]` with spacing `h`.
pub fn build_table(cfg: &KernelConfig, l: f64, h: f64) -> Result<KernelTable> {
    if !(l > 0.0 && h > 0.0) {
        return Err(Error::Domain("L and h must be positive".into()));
    }
    let nf = (l / h).round();
    if (nf * h - l).abs() > 1e-9 * l || nf < 1.0 {
        return Err(Error::Domain(format!("L = {l} is not a multiple of h = {h}")));
    }
    if cfg.theta_bound >= 1.0 {
        return Err(Error::config(
            "kappa",
            format!(
                "measured ‖K_α‖ = {} ≥ 1; increase kappa",
                cfg.theta_bound
            ),
        ));
    }
    let n = nf as usize;
    let n2 = 2 * n;
    let ker = Kernel::new(cfg)?;
    let k = cfg.kappa;
    let p = ker.negative_prefactor();
    let xi: Vec<f64> = (0..=n2).map(|i| -l + i as f64 * h).collect();
    let samples = xi.iter().map(|&x| ker.eval(x)).collect::<Result<Vec<_>>>()?;

    // Cell moments on [kh, (k+1)h]: rise = ∫K (y − kh)/h, fall = ∫K ((k+1)h − y)/h.
    let (gx, gw) = gauss_legendre(16);
    let mut rise = vec![0.0; n2 + 1];
    let mut fall = vec![0.0; n2 + 1];
    for cell in 0..=n2 {
        let a = cell as f64 * h;
        let (mut r, mut f) = (0.0, 0.0);
        if cell < 4 {
            let opts = QuadOptions::tol(1e-300, 1e-12);
            let kr = |y: f64| ker.eval(y).unwrap_or(f64::NAN);
            r = integrate(|y| kr(y) * (y - a) / h, a, a + h, opts)?.value;
            f = integrate(|y| kr(y) * (a + h - y) / h, a, a + h, opts)?.value;
        } else {
            for (t, w) in gx.iter().zip(&gw) {
                let s = 0.5 * (t + 1.0);
                let kv = ker.eval(a + s * h)?;
                r += 0.5 * w * kv * s * h;
                f += 0.5 * w * kv * (1.0 - s) * h;
            }
        }
        rise[cell] = r;
        fall[cell] = f;
    }
    let hf = hat_factor(k, h);
    let mut w_alpha = vec![0.0; 2 * n2 + 1];
    let mut w_zero = vec![0.0; 2 * n2 + 1];
    for m in -(n2 as isize)..=(n2 as isize) {
        let idx = (m + n2 as isize) as usize;
        let mh = m as f64 * h;
        w_zero[idx] = if m == 0 {
            (1.0 + (-k * h).exp_m1() / (k * h)) / (k * k)
        } else {
            (-k * mh.abs()).exp() / (2.0 * k) * hf
        };
        w_alpha[idx] = match m {
            m if m < 0 => p * (k * mh).exp() * hf,
            0 => p * half_hat_exp(k, h) + fall[0],
            m => rise[m as usize - 1] + fall[m as usize],
        };
    }
    // Σ_{m ≥ 2n+1} W_α(m) = (1/h) ∫_{2nh}^{(2n+1)h} I(y) dy
    let (lx, lw) = gauss_legendre(10);
    let a = n2 as f64 * h;
    let mut last = 0.0;
    for (t, w) in lx.iter().zip(&lw) {
        last += 0.5 * w * ker.tail_integral(a + 0.5 * (t + 1.0) * h)?;
    }
    let mut right_tail_alpha = vec![0.0; n2 + 1];
    right_tail_alpha[n2] = last;
    for i in (0..n2).rev() {
        right_tail_alpha[i] = right_tail_alpha[i + 1] + w_alpha[i + 1 + n2];
    }
    let left_total = p * hf * (-k * (n2 as f64 + 1.0) * h).exp() / (-(-k * h).exp_m1());
    let integral = w_alpha.iter().sum::<f64>() + last + left_total;
    let trapezoid = h * (samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[n2]));
    let weight_norm = w_alpha.iter().map(|w| w.abs()).sum::<f64>() + last.abs() + left_total.abs();
    Ok(KernelTable {
        cfg: *cfg,
        h,
        n,
        xi,
        samples,
        w_alpha,
        w_zero,
        right_tail_alpha,
        negative_prefactor: p,
        tail_coefficient: ker.tail_coefficient(),
        integral,
        trapezoid,
        weight_norm,
    })
}

/// Stopping rule and budget of a Picard iteration. Converged when
/// `|ψ^{n+1}_i − ψ^n_i| ≤ abs_tol + rel_tol |ψ^{n+1}_i|` at every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenSolve {
    pub psi: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm of successive updates.
    pub updates: Vec<f64>,
}

impl GreenSolve {
    /// `‖ψ_{n+1} − ψ_n‖ / ‖ψ_n − ψ_{n−1}‖` for consecutive sweeps.
    pub fn ratios(&self) -> Vec<f64> {
        self.updates.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

fn picard<F>(mut psi: Vec<f64>, opts: PicardOptions, mut sweep: F) -> Result<GreenSolve>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut updates = Vec::new();
    for it in 1..=opts.max_iter {
        let next = sweep(&psi);
        let mut sup: f64 = 0.0;
        let mut ok = true;
        for (a, b) in next.iter().zip(&psi) {
            let d = (a - b).abs();
            sup = sup.max(d);
            if d > opts.abs_tol + opts.rel_tol * a.abs() {
                ok = false;
            }
        }
        if !sup.is_finite() {
            return Err(Error::Contract(format!("Picard iteration diverged at sweep {it}")));
        }
        updates.push(sup);
        psi = next;
        if ok {
            return Ok(GreenSolve {
                psi,
                iterations: it,
                updates,
            });
        }
    }
    Err(Error::Contract(format!(
        "Picard iteration did not converge in {} sweeps (last update {:e})",
        opts.max_iter,
        updates.last().copied().unwrap_or(f64::NAN)
    )))
}

/// Green operator through the convolution form `ψ ← K_α ∗ ψ + K₀ ∗ g`.
#[derive(Debug, Clone)]
pub struct TableGreen {
    pub table: KernelTable,
}

impl TableGreen {
    pub fn new(table: KernelTable) -> Self {
        TableGreen { table }
    }

    pub fn apply(&self, g: &[f64], warm: Option<&[f64]>, opts: PicardOptions) -> Result<GreenSolve> {
        if g.len() != self.table.len() {
            return Err(Error::Contract("g does not live on the table grid".into()));
        }
        let forcing = self.table.convolve_zero(g);
        let start = warm.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; g.len()]);
        picard(start, opts, |psi| {
            let mut out = self.table.convolve_alpha(psi);
            for (o, f) in out.iter_mut().zip(&forcing) {
                *o += f;
            }
            out
        })
    }
}

/// Green operator of the discrete problem
///
/// ```text
/// κ² ψ_i − (ψ_{i+1} − 2ψ_i + ψ_{i−1})/h² + c^α (∂^α_h ψ)_i = g_i
/// ```
///
/// with the L1 Weyl derivative, a left extension and a mirror ghost node at
/// the right end. Each sweep solves the tridiagonal part, which holds the
/// terms `b_0, b_1` of the derivative, and takes the rest of the history
/// from the previous sweep. All omitted coefficients are non-negative, so a
/// sweep started from a supersolution decreases monotonically.
#[derive(Debug, Clone)]
pub struct FactoredGreen {
    pub weyl: WeylL1,
    pub c: f64,
    pub kappa2: f64,
    pub ext: LeftExtension,
    pub len: usize,
    /// `c^α h^{−α}/Γ(2−α)`.
    sigma: f64,
    solver: Tridiag,
}

impl FactoredGreen {
    pub fn new(alpha: f64, c: f64, kappa2: f64, h: f64, len: usize, ext: LeftExtension) -> Result<Self> {
        if len < 3 {
            return Err(Error::Domain("need at least three nodes".into()));
        }
        if !(kappa2 > 0.0) {
            return Err(Error::Domain("kappa^2 must be positive".into()));
        }
        let weyl = WeylL1::new(alpha, h)?;
        let sigma = c.powf(alpha) * weyl.scale();
        let r = 1.0 / (h * h);
        let b1 = weyl.b[1];
        let q = ext.ratio(h);
        let lower_coef = -r - sigma * (1.0 - b1);
        let mut diag = vec![kappa2 + 2.0 * r + sigma; len];
        let mut lower = vec![lower_coef; len - 1];
        let upper = vec![-r; len - 1];
        diag[0] += q * lower_coef;
        lower[len - 2] -= r;
        if !diagonally_dominant(&lower, &diag, &upper) {
            return Err(Error::Numeric("local operator is not diagonally dominant".into()));
        }
        let solver = Tridiag::new(&lower, &diag, &upper)?;
        Ok(FactoredGreen {
            weyl,
            c,
            kappa2,
            ext,
            len,
            sigma,
            solver,
        })
    }

    pub fn h(&self) -> f64 {
        self.weyl.h
    }

    /// Second difference with the boundary closures.
    pub fn second_difference(&self, psi: &[f64]) -> Vec<f64> {
        let n = psi.len();
        let r = 1.0 / (self.h() * self.h());
        let q = self.ext.ratio(self.h());
        (0..n)
            .map(|i| {
                let left = if i == 0 { q * psi[0] } else { psi[i - 1] };
                let right = if i + 1 == n { psi[n - 2] } else { psi[i + 1] };
                (left - 2.0 * psi[i] + right) * r
            })
            .collect()
    }

    /// `c^α ∂^α_h ψ` by the fast route.
    pub fn fractional_term(&self, psi: &[f64]) -> Vec<f64> {
        let ca = self.c.powf(self.weyl.alpha);
        self.weyl.apply(psi, self.ext).into_iter().map(|v| ca * v).collect()
    }

    /// `c^α ∂^α_h ψ` with every history term summed.
    pub fn fractional_term_direct(&self, psi: &[f64]) -> Vec<f64> {
        let ca = self.c.powf(self.weyl.alpha);
        self.weyl.apply_direct(psi, self.ext).into_iter().map(|v| ca * v).collect()
    }

    /// One sweep: solve the local part with the remaining history frozen.
    pub fn sweep(&self, g: &[f64], psi: &[f64], hist: &mut [f64]) -> Vec<f64> {
        self.weyl.history(psi, self.ext, hist);
        let b1 = self.weyl.b[1];
        let q = self.ext.ratio(self.h());
        let mut rhs: Vec<f64> = (0..psi.len())
            .map(|i| {
                let prev = if i == 0 { q * psi[0] } else { psi[i - 1] };
                g[i] + self.sigma * (b1 * prev - hist[i])
            })
            .collect();
        self.solver.solve_in_place(&mut rhs);
        rhs
    }

    pub fn apply(&self, g: &[f64], warm: Option<&[f64]>, opts: PicardOptions) -> Result<GreenSolve> {
        if g.len() != self.len {
            return Err(Error::Contract("g has the wrong length".into()));
        }
        let start = warm.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; g.len()]);
        let mut hist = vec![0.0; g.len()];
        picard(start, opts, |psi| self.sweep(g, psi, &mut hist))
    }
}

/// `ψ'' − c^α ∂^α ψ − κ² ψ + g` at every node, with the direct L1 sum.
pub fn linear_residual(green: &FactoredGreen, psi: &[f64], g: &[f64]) -> Vec<f64> {
    let d2 = green.second_difference(psi);
    let fr = green.fractional_term_direct(psi);
    (0..psi.len())
        .map(|i| d2[i] - fr[i] - green.kappa2 * psi[i] + g[i])
        .collect()
}
