//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#![allow(clippy::needless_range_loop)]

use frackpp::caputo::{malthus_order_study, ReactionTreatment};
use frackpp::dispersion::{char_poly, char_roots, critical_speed};
use frackpp::fkpp::{variance_slope, Nonlinearity, SimConfig, SimState, VarianceConfig};
use frackpp::front::{critical_speed_closed, speed_row};
use frackpp::quad::{integrate_to_inf, QuadOptions};
use frackpp::specfun::{mittag_leffler, MLParams};
use frackpp::wavekernels::{build_table, Kernel, KernelConfig, PicardOptions, TableGreen};
use frackpp::waveprofile::{solve_profile, subsolution_defects, ProfileOptions, WaveProfile};
use statrs::function::erf::erfc;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(n: usize, name: &str, budget: Duration, elapsed: Duration, o: Outcome) -> bool {
    let in_time = elapsed <= budget;
    let pass = o.pass && in_time;
    println!(
        "criterion {n:>2} {:<4} {name}: {} [{:.3} s, budget {} s{}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" },
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn critical_speed_limit() -> Outcome {
    let c = critical_speed(0.999, 1.0).unwrap();
    outcome((1.99..=2.01).contains(&c), format!("c*(0.999) = {c:.6}"))
}

/// Independent root finder: scan V for sign changes, then bisect by hand.
fn scan_roots(alpha: f64, c: f64) -> Vec<f64> {
    let v = |l: f64| l * l - (c * l).powf(alpha) + 1.0;
    let n = 200_000;
    let top = 20.0;
    let mut roots = Vec::new();
    let mut prev = (1e-9, v(1e-9));
    for k in 1..=n {
        let l = top * k as f64 / n as f64;
        let f = v(l);
        if f.signum() != prev.1.signum() {
            let (mut a, mut b, fa) = (prev.0, l, prev.1);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if v(m).signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (l, f);
    }
    roots
}

fn root_structure() -> Outcome {
    let r3 = char_roots(0.5, 3.0, 1.0).unwrap().as_vec();
    let r32 = char_roots(0.5, 3.2, 1.0).unwrap().as_vec();
    let r4 = char_roots(0.5, 4.0, 1.0).unwrap().as_vec();
    let oracle = scan_roots(0.5, 4.0);
    let near = |a: &[f64], b: &[f64], tol: f64| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let pass = r3.is_empty()
        && r32.len() == 2
        && near(&r4, &[0.29560, 1.0], 1e-5)
        && near(&r4, &oracle, 1e-9)
        && r4.iter().all(|&l| char_poly(l, 0.5, 4.0, 1.0).unwrap().abs() < 1e-12);
    outcome(
        pass,
        format!("c=3: {} roots, c=3.2: {} roots, c=4: {r4:?} (scan {oracle:?})", r3.len(), r32.len()),
    )
}

fn mittag_leffler_values() -> Outcome {
    let p = mittag_leffler(MLParams::new(0.5, 1.0)).unwrap();
    let m = mittag_leffler(MLParams::new(0.5, -1.0)).unwrap();
    let cp = erfc(-1.0) * 1f64.exp();
    let cm = erfc(1.0) * 1f64.exp();
    let pass = (p - 5.00898).abs() <= 1e-5
        && (m - 0.427584).abs() <= 1e-5
        && (p - cp).abs() <= 1e-5
        && (m - cm).abs() <= 1e-5;
    outcome(pass, format!("E(1) = {p:.8}, E(-1) = {m:.8}; closed form {cp:.8}, {cm:.8}"))
}

fn l1_order() -> Outcome {
    let s = malthus_order_study(0.5, -1.0, 1.0, 1.0, &[1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0], ReactionTreatment::Implicit)
        .unwrap();
    let q = *s.orders.last().unwrap();
    outcome((1.2..=1.8).contains(&q), format!("orders {:?}, target 1.5", s.orders))
}

fn kernel_identities() -> Outcome {
    let (a, c, k) = (0.5, 2.0, 2.0);
    let kc = KernelConfig::new(a, c, k).unwrap();
    let ker = Kernel::new(&kc).unwrap();
    let p = -(c * k).powf(a) / (2.0 * k);
    let closed = [-1e-3, -0.1, -1.0, -4.0, -10.0]
        .iter()
        .map(|&x| {
            let want = p * (k * x).exp();
            (ker.eval(x).unwrap() - want).abs() / want.abs()
        })
        .fold(0.0, f64::max);
    let table = build_table(&kc, 40.0 / k, 0.05).unwrap();
    let integral = table.integral;
    let n = table.len();
    let mass = integrate_to_inf(|s| ker.eval(-s).unwrap().abs(), 0.0, QuadOptions::tol(1e-14, 1e-12))
        .unwrap()
        .value;
    let xi = 200.0 / k;
    let tail = xi.powf(1.0 + a) * ker.eval(xi).unwrap();
    let g = TableGreen::new(table)
        .apply(&vec![k * k; n], None, PicardOptions::default())
        .unwrap();
    let green = g.psi.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));

    let checks = [
        ("closed form", closed <= 4.0 * f64::EPSILON),
        ("zero mean", integral.abs() < 1e-4),
        ("mass", (mass - 0.25).abs() <= 1e-6),
        ("tail constant", (tail - 0.19947).abs() <= 0.1 * 0.19947),
        ("G*(κ²)", green <= 1e-8),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "closed-form rel {closed:.1e}, ∫K = {integral:.1e}, mass = {mass:.10}, \
             ξ^(1+α)K at 200/κ = {tail:.5} vs 0.19947, |G*(κ²)−1| = {green:.1e}; failing: {failed:?}"
        ),
    )
}

fn monotone_iteration(p: &WaveProfile) -> Outcome {
    let increasing = p.phi.windows(2).all(|w| w[1] > w[0]);
    let sandwiched = p
        .phi
        .iter()
        .zip(p.upper.iter().zip(&p.lower))
        .all(|(&f, (&u, &l))| f <= u + 1e-8 && f >= l - 1e-8);
    let decay = p.summary().decay_fit.unwrap_or(f64::NAN);
    let rel = (decay - 0.29560).abs() / 0.29560;
    let pass = p.max_increase <= 1e-10
        && increasing
        && sandwiched
        && p.residual_sup <= 1e-3
        && rel <= 0.02
        && p.iterations <= 10_000;
    outcome(
        pass,
        format!(
            "{} iterations, max increase {:.1e}, increasing {increasing}, sandwiched {sandwiched}, \
             residual {:.1e}, decay {decay:.5} ({:.2}% off λ₁)",
            p.iterations,
            p.max_increase,
            p.residual_sup,
            100.0 * rel
        ),
    )
}

fn subsolution(p: &WaveProfile) -> Outcome {
    let xs: Vec<f64> = (0..20).map(|k| -10.0 + 20.0 * k as f64 / 19.0).collect();
    let d = subsolution_defects(p, &Nonlinearity::fisher(), &[1.0, 5.0, 20.0], &xs).unwrap();
    let worst = d.iter().map(|s| s.defect).fold(f64::NEG_INFINITY, f64::max);
    outcome(d.len() == 60 && worst < 0.0, format!("{} points, max defect {worst:.3e}", d.len()))
}

fn front_speeds() -> Outcome {
    let nl = Nonlinearity::fisher();
    let mut lines = Vec::new();
    let mut pass = true;
    for (alpha, tol) in [(0.7, 0.1), (0.8, 0.1), (0.9, 0.1), (0.4, 0.3)] {
        let r = speed_row(alpha, &SimConfig::desk(alpha), &nl);
        let ok = r.error.is_none() && r.rel_error_smoothed < tol;
        pass &= ok;
        lines.push(format!("α={alpha}: {:.4} vs {:.4} ({:.3})", r.c_num_smoothed, r.c_star, r.rel_error_smoothed));
    }
    let c9 = critical_speed_closed(0.9, 1.0).unwrap();
    pass &= (c9 - 2.1483).abs() <= 1e-3;
    outcome(pass, format!("{}; c*(0.9) = {c9:.5}", lines.join(", ")))
}

fn variance_slopes() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 0.9] {
        let s = variance_slope(&VarianceConfig { alpha, ..Default::default() }).unwrap();
        pass &= (s - alpha).abs() <= 0.07;
        parts.push(format!("α={alpha}: {s:.4}"));
    }
    outcome(pass, parts.join(", "))
}

/// Dense backward Euler with explicit reaction and mirrored ghost nodes.
fn backward_euler_step(u: &[f64], dx: f64, dt: f64) -> Vec<f64> {
    let n = u.len();
    let r = 1.0 / (dx * dx);
    let mut a = vec![vec![0.0; n]; n];
    for k in 0..n {
        a[k][k] = 1.0 / dt + 2.0 * r;
        let left = if k == 0 { 1 } else { k - 1 };
        let right = if k == n - 1 { n - 2 } else { k + 1 };
        a[k][left] -= r;
        a[k][right] -= r;
    }
    let mut b: Vec<f64> = u.iter().map(|&v| v / dt + v * (1.0 - v)).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn degeneration() -> Outcome {
    let (dx, dt) = (0.5, 0.05);
    let mut be: Vec<f64> = (0..41)
        .map(|k| 0.5 + 0.4 * (k as f64 * 0.37).sin() * (-(k as f64 - 20.0).powi(2) / 80.0).exp())
        .collect();
    let nl = Nonlinearity::fisher();
    let mut s = SimState::from_initial(1.0 - 1e-9, dx, dt, be.clone()).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        s.step(&nl).unwrap();
        be = backward_euler_step(&be, dx, dt);
        let e = s.current().iter().zip(&be).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(e);
    }
    outcome(worst <= 1e-6, format!("max-norm gap over 100 steps {worst:.2e}"))
}

fn main() {
    let ms = Duration::from_millis;
    let secs = Duration::from_secs;
    let mut all = true;

    let (o, t) = timed(critical_speed_limit);
    all &= report(1, "critical-speed limit", ms(1), t, o);
    let (o, t) = timed(root_structure);
    all &= report(2, "root structure", ms(10), t, o);
    let (o, t) = timed(mittag_leffler_values);
    all &= report(3, "Mittag-Leffler oracle", ms(1), t, o);
    let (o, t) = timed(l1_order);
    all &= report(4, "L1 order", secs(1), t, o);
    let (o, t) = timed(kernel_identities);
    all &= report(5, "kernel identities", secs(10), t, o);

    let (profile, t_solve) = timed(|| solve_profile(0.5, 4.0, &Nonlinearity::fisher(), &ProfileOptions::default()));
    match profile {
        Ok(p) => {
            let (o, t) = timed(|| monotone_iteration(&p));
            all &= report(6, "monotone iteration", secs(60), t_solve + t, o);
            let (o, t) = timed(|| subsolution(&p));
            all &= report(7, "sub-solution defect", secs(30), t, o);
        }
        Err(e) => {
            all &= report(6, "monotone iteration", secs(60), t_solve, outcome(false, e.to_string()));
            all &= report(7, "sub-solution defect", secs(30), t_solve, outcome(false, "no profile".into()));
        }
    }

    let (o, t) = timed(front_speeds);
    all &= report(8, "front speed", secs(300), t, o);
    let (o, t) = timed(variance_slopes);
    all &= report(9, "anomalous diffusion", secs(60), t, o);
    let (o, t) = timed(degeneration);
    all &= report(10, "classical limit", secs(10), t, o);

    if !all {
        std::process::exit(1);
    }
}
