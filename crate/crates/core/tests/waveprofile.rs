use frackpp::dispersion::{char_roots, critical_speed};
use frackpp::fkpp::{Nonlinearity, SimState};
use frackpp::front::{crossing, smoothed_speed, FrontTrack};
use frackpp::waveprofile::*;
use frackpp::Error;
use std::sync::OnceLock;

fn fisher() -> Nonlinearity {
    Nonlinearity::fisher()
}

/// (α = 0.5, c = 4) at default resolution, shared by the tests below.
fn base() -> &'static WaveProfile {
    static P: OnceLock<WaveProfile> = OnceLock::new();
    P.get_or_init(|| solve_profile(0.5, 4.0, &fisher(), &ProfileOptions::default()).unwrap())
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn mollifier_properties() {
    let mass = simpson(mollifier, -1.0, 1.0, 20_000);
    assert!((mass - 1.0).abs() < 1e-10, "{mass}");
    assert_eq!(mollifier(1.0), 0.0);
    assert_eq!(mollifier(-1.0), 0.0);
    for y in [0.1, 0.5, 0.9, 0.999] {
        assert_eq!(mollifier(y), mollifier(-y));
        assert!(mollifier(y) > 0.0);
    }
    assert!((r_factor(0.3, 1e-6) - 1.0).abs() < 1e-5);
    let direct = simpson(|y| mollifier(y) * (-0.4 * y).exp(), -1.0, 1.0, 20_000);
    assert!((r_factor(2.0, 0.2) - direct).abs() < 1e-10);
}

#[test]
fn upper_solution_examples() {
    let l1 = 0.2956;
    let p = UpperSolutionParams::new(l1, 0.1).unwrap();
    let want = p.r_eps * (-10.0f64).exp();
    assert!((p.eval(-10.0 / l1) - want).abs() < 1e-15 * want.max(1e-300) * 10.0);
    assert!((want / p.r_eps - 4.54e-5).abs() < 1e-7);
    for xi in [0.1, 0.2, 5.0, 1e3] {
        assert_eq!(p.eval(xi), 1.0);
    }
    let xs: Vec<f64> = (0..=4000).map(|k| -0.2 + k as f64 * 1e-4).collect();
    let v = upper_solution(&p, &xs);
    for (w, x) in v.windows(2).zip(&xs) {
        assert!((w[1] - w[0]) / 1e-4 >= -1e-12, "decrease at {x}");
    }
    assert!(v.iter().all(|&u| (0.0..=1.0).contains(&u)));
}

/// `(ρ_ε ∗ ψ)(ξ) = ∫ρ(y) ψ(ξ − εy) dy` by Simpson on the bump.
fn mollify<F: Fn(f64) -> f64>(psi: F, eps: f64, xi: f64) -> f64 {
    simpson(|y| mollifier(y) * psi(xi - eps * y), -1.0, 1.0, 20_000)
}

#[test]
fn blends_match_direct_convolution() {
    let (l1, eps) = (0.3, 0.2);
    let up = UpperSolutionParams::new(l1, eps).unwrap();
    let psi_up = |x: f64| if x < 0.0 { (l1 * x).exp() } else { 1.0 };
    let lo = LowerSolutionParams::new(l1, eps, 1.5, 40.0, 1.0, 1.0, -0.1).unwrap();
    let psi_lo = |x: f64| {
        if x < lo.xi0 {
            (l1 * x).exp() - lo.h * (lo.nu * l1 * x).exp()
        } else {
            0.0
        }
    };
    for eta in [-0.9, -0.4, 0.0, 0.3, 0.95] {
        let xi = eta * eps;
        assert!((up.eval(xi) - mollify(psi_up, eps, xi)).abs() < 1e-9, "upper at {xi}");
        let xi = lo.xi0 + eta * eps;
        assert!((lo.eval(xi) - mollify(psi_lo, eps, xi)).abs() < 1e-9, "lower at {xi}");
    }
}

#[test]
fn lower_solution_examples() {
    let (l1, l2) = (0.2956, 1.0);
    let sym = DiscreteSymbol::new(0.5, 4.0, 1.0, 0.02).unwrap();
    let lo = LowerSolutionParams::choose(l1, l2, 0.1, 1.0, 1.0, |x| sym.eval(x)).unwrap();
    assert!(lo.nu > 1.0 && lo.nu < 2.0);
    assert!(lo.h >= 1.5);
    assert!(lo.xi0 < 0.0 && lo.xi0 <= lo.xi_star);
    let up = UpperSolutionParams::new(l1, 0.1).unwrap();
    let xs: Vec<f64> = (0..=20_000).map(|k| -100.0 + k as f64 * 0.01).collect();
    let v = lower_solution(&lo, &xs);
    let u = upper_solution(&up, &xs);
    for ((x, a), b) in xs.iter().zip(&v).zip(&u) {
        if *x >= lo.xi0 + lo.epsilon {
            assert_eq!(*a, 0.0);
        }
        assert!(*a >= 0.0 && a <= b, "ordering at {x}");
    }
    assert!(v.iter().cloned().fold(0.0, f64::max) > 0.0);
}

#[test]
fn lower_solution_refuses_small_h() {
    let sym = DiscreteSymbol::new(0.5, 4.0, 1.0, 0.02).unwrap();
    let v = sym.eval(1.5 * 0.2956);
    let r = LowerSolutionParams::new(0.2956, 0.1, 1.5, 1.01, 1.0, 1.0, v);
    assert!(matches!(r, Err(Error::Config { .. })), "{r:?}");
    assert!(LowerSolutionParams::new(0.2956, 0.1, 2.5, 3.0, 1.0, 1.0, v).is_err());
}

#[test]
fn discrete_roots_near_continuous() {
    let sym = DiscreteSymbol::new(0.5, 4.0, 1.0, 0.02).unwrap();
    let (a, b) = sym.roots().unwrap();
    let (l1, l2) = match char_roots(0.5, 4.0, 1.0).unwrap() {
        frackpp::dispersion::Roots::Two(a, b) => (a, b),
        r => panic!("{r:?}"),
    };
    assert!((a - l1).abs() < 1e-3 * l1);
    assert!((b - l2).abs() < 1e-2 * l2);
    assert!(sym.eval(a).abs() < 1e-12);
}

#[test]
fn fit_exponent_recovers_exponential() {
    let xi: Vec<f64> = (0..2000).map(|i| -60.0 + i as f64 * 0.02).collect();
    let phi: Vec<f64> = xi.iter().map(|x| 0.7 * (0.41 * x).exp()).collect();
    assert!((fit_exponent(&xi, &phi).unwrap() - 0.41).abs() < 1e-10);
    let flat = vec![1e-4; xi.len()];
    assert!(matches!(fit_exponent(&xi, &flat), Err(Error::Numeric(_))));
}

#[test]
fn profile_invariants() {
    let p = base();
    assert!(p.iterations <= 10_000);
    assert!(p.max_increase <= ORDER_TOL, "{:e}", p.max_increase);
    let n = p.phi.len();
    for i in 0..n {
        assert!(p.phi[i] <= p.upper[i] + SANDWICH_TOL);
        assert!(p.phi[i] >= p.lower[i] - SANDWICH_TOL);
        if i > 0 {
            assert!(p.phi[i] > p.phi[i - 1]);
        }
        if i > 0 && i + 1 < n {
            assert!(p.phi[i] > 0.0 && p.phi[i] < 1.0);
        }
    }
    assert!(p.phi[0] < 1e-4);
    assert!((p.interpolate(0.0) - 0.5).abs() < 1e-12);
    assert!(p.decay_constant.is_finite() && p.decay_constant > 0.0);
}

#[test]
fn profile_right_end() {
    let p = base();
    let last = *p.phi.last().unwrap();
    assert!(last > 1.0 - 1e-3, "φ(right end) = {last}");
}

#[test]
fn profile_residual() {
    let p = base();
    let nl = fisher();
    let r = residual(p, &nl).unwrap();
    let sup = r[1..r.len() - 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(sup <= 1e-3, "{sup:e}");
    assert!((sup - p.residual_sup).abs() < 1e-15);
    let grid = grid_of(p).unwrap();
    let ru = grid.residual(&p.upper, &nl);
    assert!(ru.iter().all(|&v| v <= 1e-9), "{:e}", ru.iter().cloned().fold(f64::MIN, f64::max));
    let rl = grid.residual(&p.lower, &nl);
    assert!(rl.iter().all(|&v| v >= -1e-6), "{:e}", rl.iter().cloned().fold(f64::MAX, f64::min));
}

#[test]
fn profile_decay_rate() {
    let p = base();
    let fit = decay_rate(p).unwrap();
    assert!((p.lambda1 - 0.29560).abs() < 1e-5);
    assert!(((fit - 0.29560) / 0.29560).abs() < 0.02, "{fit}");
}

fn x_samples() -> Vec<f64> {
    (0..20).map(|k| -10.0 + 20.0 * k as f64 / 19.0).collect()
}

#[test]
fn subsolution_defect_negative() {
    let p = base();
    let nl = fisher();
    let d = subsolution_defects(p, &nl, &[1.0, 5.0, 20.0], &x_samples()).unwrap();
    assert_eq!(d.len(), 60);
    for s in &d {
        assert!(s.defect < 0.0, "{s:?}");
    }
    // shrinking deficit at fixed x
    for k in 0..20 {
        let (a, b, c) = (d[k].defect, d[20 + k].defect, d[40 + k].defect);
        assert!(a < b && b < c, "x = {}: {a} {b} {c}", d[k].x);
    }
}

#[test]
fn subsolution_defect_matches_tail_integral() {
    let p = base();
    let nl = fisher();
    let r = residual(p, &nl).unwrap();
    for t in [1.0, 5.0] {
        for s in subsolution_defects(p, &nl, &[t], &[-5.0, 0.0, 5.0]).unwrap() {
            let xi = s.x + p.c * t;
            let i = ((xi - p.xi[0]) / p.h).round() as usize;
            let tail = tail_deficit(p, xi, t).unwrap();
            let want = -tail - r[i];
            assert!((s.defect - want).abs() < 1e-3 * tail, "t {t} x {}: {} vs {want}", s.x, s.defect);
        }
    }
}

#[test]
fn subsolution_near_classical_limit() {
    let opts = ProfileOptions {
        h: Some(0.02),
        l: Some(200.0),
        ..Default::default()
    };
    let p = solve_profile(0.999, 2.5, &fisher(), &opts).unwrap();
    let d = subsolution_defects(&p, &fisher(), &[50.0], &x_samples()).unwrap();
    for s in &d {
        assert!(s.defect < 0.0 && s.defect.abs() < 1e-4, "{s:?}");
    }
}

fn align_diff(a: &WaveProfile, b: &WaveProfile, lo: f64, hi: f64) -> f64 {
    a.xi
        .iter()
        .zip(&a.phi)
        .filter(|(x, _)| **x > lo && **x < hi)
        .map(|(&x, &v)| (v - b.interpolate(x)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn translation_covariance() {
    let p = base();
    let opts = ProfileOptions {
        shift: 5.3 + 0.37 * p.h,
        ..Default::default()
    };
    let q = solve_profile(0.5, 4.0, &fisher(), &opts).unwrap();
    // the mirror node at the right end leaves a boundary layer that moves with the grid
    let lo = p.xi[0].max(q.xi[0]) + 20.0;
    let hi = p.xi.last().unwrap().min(*q.xi.last().unwrap()) - 20.0;
    let d = align_diff(p, &q, lo, hi);
    assert!(d <= 1e-6, "{d:e}");
}

#[test]
fn kappa_invariance() {
    let p = base();
    let opts = ProfileOptions {
        kappa: Some(12f64.sqrt()),
        ..Default::default()
    };
    let q = solve_profile(0.5, 4.0, &fisher(), &opts).unwrap();
    assert_ne!(p.kappa, q.kappa);
    let d = align_diff(p, &q, p.xi[0] + 1.0, p.xi.last().unwrap() - 1.0);
    assert!(d <= 1e-5, "{d:e}");
}

#[test]
fn speed_consistency() {
    let p = base();
    let (dx, dt, l) = (0.25, 0.05, 150.0);
    let n = (l / dx) as usize;
    let x: Vec<f64> = (0..=n).map(|i| i as f64 * dx).collect();
    let start = 100.0;
    let u0: Vec<f64> = x.iter().map(|&x| p.interpolate(x - start)).collect();
    let mut st = SimState::from_initial(p.alpha, dx, dt, u0).unwrap();
    let nl = fisher();
    let mut track = FrontTrack::new(0.5, start);
    while st.t() < 15.0 {
        st.step(&nl).unwrap();
        track.observe(st.t(), crossing(st.current(), &x, 0.5));
    }
    let speed = smoothed_speed(&track).unwrap();
    assert!(((speed - p.c) / p.c).abs() < 0.15, "{speed} vs {}", p.c);
}

#[test]
fn refuses_subcritical_speed() {
    let r = solve_profile(0.5, 2.0, &fisher(), &ProfileOptions::default());
    assert!(matches!(r, Err(Error::Refusal(_))), "{r:?}");
}

#[test]
fn critical_speed_is_offset() {
    let cstar = critical_speed(0.5, 1.0).unwrap();
    let opts = ProfileOptions {
        h: Some(0.01),
        l: Some(60.0),
        // pulled fronts converge slowly at the critical speed
        tol: 1e-5,
        ..Default::default()
    };
    match solve_profile(0.5, cstar, &fisher(), &opts) {
        Ok(p) => {
            assert_eq!(p.c_requested, cstar);
            assert!((p.c / cstar - 1.001).abs() < 1e-12);
        }
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn summary_round_trips() {
    let s = base().summary();
    let text = serde_json::to_string(&s).unwrap();
    let back: ProfileSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(s, back);
}
