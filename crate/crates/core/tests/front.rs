use frackpp::fkpp::{run, Nonlinearity, SimConfig};
use frackpp::front::*;
use frackpp::Error;
use proptest::prelude::*;

#[test]
fn crossing_examples() {
    assert_eq!(crossing(&[0.0, 0.2], &[0.0, 1.0], 0.1).unwrap().x, 0.5);
    assert!(crossing(&[0.0, 0.05, 0.09], &[0.0, 1.0, 2.0], 0.1).is_none());
    let c = crossing(&[0.0, 0.05, 0.15, 0.9], &[0.0, 1.0, 2.0, 3.0], 0.1).unwrap();
    assert!((c.x - 1.5).abs() < 1e-15);
    assert!(!c.multiple);
}

proptest! {
    #[test]
    fn crossing_exact_for_linear_profiles(slope in 0.01f64..5.0, x_c in 1.0f64..9.0, level in 0.05f64..0.95) {
        let x: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let u: Vec<f64> = x.iter().map(|&x| level + slope * (x - x_c)).collect();
        let c = crossing(&u, &x, level).unwrap();
        prop_assert!((c.x - x_c).abs() < 1e-12 * x_c.max(1.0) + 1e-13, "{} vs {}", c.x, x_c);
    }
}

fn track(t: &[f64], x: &[f64], stop: Option<f64>) -> FrontTrack {
    FrontTrack {
        t: t.to_vec(),
        x_star: x.to_vec(),
        stop_time: stop,
        ..FrontTrack::new(0.1, 75.0)
    }
}

#[test]
fn speed_from_last_difference() {
    let tr = track(&[10.0, 10.05], &[75.0, 74.9], Some(10.05));
    let s = numerical_speed(&tr, 0.05).unwrap();
    assert!((s.magnitude - 2.0).abs() < 1e-9);
    assert!(s.raw < 0.0);
    let still = track(&[1.0, 1.05], &[80.0, 80.0], None);
    assert_eq!(numerical_speed(&still, 0.05).unwrap().magnitude, 0.0);
}

#[test]
fn speed_needs_previous_sample() {
    let tr = track(&[9.0, 10.0], &[76.0, 74.9], Some(10.0));
    assert!(matches!(numerical_speed(&tr, 0.05), Err(Error::Contract(_))));
    assert!(matches!(numerical_speed(&track(&[], &[], None), 0.05), Err(Error::Contract(_))));
}

#[test]
fn smoothed_speed_of_linear_track() {
    let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
    let x: Vec<f64> = t.iter().map(|t| 100.0 - 2.5 * t).collect();
    assert!((smoothed_speed(&track(&t, &x, None)).unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn stop_time_is_first_passage() {
    let mut tr = FrontTrack::new(0.1, 50.0);
    tr.observe(0.0, None);
    tr.observe(1.0, Some(Crossing { x: 51.0, multiple: false }));
    tr.observe(2.0, Some(Crossing { x: 49.0, multiple: false }));
    tr.observe(3.0, Some(Crossing { x: 47.0, multiple: true }));
    assert_eq!(tr.stop_time, Some(2.0));
    assert_eq!(tr.len(), 3);
    assert!(tr.multiple_crossings);
}

#[test]
fn desk_run_alpha_09_speed() {
    let cfg = SimConfig::desk(0.9);
    let tr = run(&cfg, &Nonlinearity::fisher()).unwrap();
    let c = tr.track.c_num.unwrap();
    let cstar = critical_speed_closed(0.9, 1.0).unwrap();
    assert!((cstar - 2.1483).abs() < 1e-3);
    assert!(((c - cstar) / cstar).abs() < 0.1, "{c} vs {cstar}");
    let t_stop = tr.track.stop_time.unwrap();
    let i = tr.track.t.iter().position(|&t| t == t_stop).unwrap();
    assert!(tr.track.x_star[i] < cfg.x0);
    assert!(tr.track.x_star[..i].iter().all(|&x| x >= cfg.x0));
}

#[test]
fn front_is_monotone_in_time() {
    for alpha in [0.5, 0.9] {
        let tr = run(&SimConfig::desk(alpha), &Nonlinearity::fisher()).unwrap();
        assert!(!tr.track.multiple_crossings);
        for w in tr.track.x_star.windows(2) {
            assert!(w[1] <= w[0], "alpha {alpha}: {} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn single_alpha_sweep_equals_direct_run() {
    let base = SimConfig::desk(0.5);
    let nl = Nonlinearity::fisher();
    let rows = speed_sweep(&[0.8], &base, &nl);
    let direct = run(&SimConfig::desk(0.8), &nl).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].c_num, direct.track.c_num.unwrap());
    assert_eq!(rows[0].stop_time, direct.track.stop_time);
}

#[test]
fn sweep_near_classical_range() {
    let alphas: Vec<f64> = default_alpha_grid().into_iter().filter(|&a| a >= 0.7 - 1e-12).collect();
    assert_eq!(alphas.len(), 12);
    let rows = speed_sweep(&alphas, &SimConfig::desk(0.5), &Nonlinearity::fisher());
    for r in &rows {
        assert!(r.error.is_none(), "{r:?}");
        assert!(r.rel_error < 0.1, "alpha {}: {}", r.alpha, r.rel_error);
    }
}

#[test]
fn full_grid_sweep_has_36_ordered_rows() {
    let alphas = default_alpha_grid();
    let rows = speed_sweep(&alphas, &SimConfig::desk(0.5), &Nonlinearity::fisher());
    assert_eq!(rows.len(), 36);
    for (r, a) in rows.iter().zip(&alphas) {
        assert_eq!(r.alpha, *a);
        assert!(r.c_star > 0.0);
    }
}

#[test]
fn sweep_records_failures_and_continues() {
    let base = SimConfig {
        t_max: 5.0,
        ..SimConfig::desk(0.5)
    };
    let rows = speed_sweep(&[0.6, 0.9], &base, &Nonlinearity::fisher());
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.error.is_some() && r.c_num.is_nan()));
}

/// Smoothed speed on successively halved (δx, δt); the differences between
/// consecutive levels must shrink by more than 1.3.
fn refinement_ratio(alpha: f64, levels: [f64; 3]) -> f64 {
    let nl = Nonlinearity::fisher();
    let speeds: Vec<f64> = levels
        .iter()
        .map(|&r| {
            let cfg = SimConfig {
                l: 60.0,
                l0: 55.0,
                x0: 15.0,
                dx: 0.5 / r,
                dt: 0.1 / r,
                ..SimConfig::desk(alpha)
            };
            smoothed_speed(&run(&cfg, &nl).unwrap().track).unwrap()
        })
        .collect();
    (speeds[0] - speeds[1]).abs() / (speeds[1] - speeds[2]).abs()
}

#[test]
fn speed_converges_under_refinement() {
    let r = refinement_ratio(0.5, [1.0, 2.0, 4.0]);
    assert!(r > 1.3, "alpha 0.5: {r}");
    let r = refinement_ratio(0.9, [2.0, 4.0, 8.0]);
    assert!(r > 1.3, "alpha 0.9: {r}");
}
