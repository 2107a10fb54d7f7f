//! Simulated-observer experiments end to end.

use retina_duo::psychophys::{
    identification_curve, log_sweep, prediction_table, run_letter_trial, simulate_brightness_match, FigureStatistic,
    LetterExperiment, ObserverParams, PerceivedPolarity,
};
use retina_duo::retina_front::Profile;
use retina_duo::talbot::octave_levels;
use retina_duo::{Error, Execution, Glyph};

const DURATIONS_US: [f64; 5] = [1.0, 10.0, 100.0, 1000.0, 10_000.0];

fn letters(bg: f64) -> LetterExperiment {
    LetterExperiment::new(Glyph::letter('E').unwrap(), 250.0, 2000.0, bg).with_grid(32, 32)
}

#[test]
fn twenty_four_hz_table_follows_the_law() {
    let cone = Profile::Fig1Display.cone_params();
    let levels = octave_levels(1.0, 5).unwrap();
    assert_eq!(levels, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
    let rows = prediction_table(&[24.0], &DURATIONS_US, &levels, &cone, Execution::default()).unwrap();
    assert_eq!(rows.len(), 25);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.duration_us, DURATIONS_US[i / 5]);
        assert_eq!(r.steady_cd_m2, levels[i % 5]);
        assert!(r.fused);
        let expect = r.steady_cd_m2 / (24.0 * r.duration_us * 1e-6);
        assert!((r.tp_predicted / expect - 1.0).abs() < 1e-12);
        assert!(r.relative_error.unwrap().abs() < 1e-3, "{r:?}");
        assert!((r.matched.unwrap() / expect - 1.0).abs() < 1e-3);
    }
}

#[test]
fn one_microsecond_flash_needs_forty_thousand_fold_intensity() {
    let m = simulate_brightness_match(2.0, 24.0, 1.0, &Profile::Fig1Display.cone_params()).unwrap();
    assert!((m.matched_intensity / (2.0 * 1e6 / 24.0) - 1.0).abs() < 1e-3);
    assert!((m.matched_intensity / 2.0 - 41_667.0).abs() < 50.0);
}

#[test]
fn relative_error_does_not_depend_on_duration() {
    let cone = Profile::Fig1Display.cone_params();
    for level in [1.0, 16.0] {
        let rows = prediction_table(&[24.0], &DURATIONS_US, &[level], &cone, Execution::Sequential).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.relative_error.unwrap()).collect();
        let spread =
            errs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - errs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(spread < 1e-4, "{errs:?}");
    }
}

#[test]
fn decade_frequencies_are_all_fused() {
    let cone = Profile::Fig5Display.cone_params();
    let freqs = [250.0, 2500.0, 25_000.0, 250_000.0];
    let durations: Vec<f64> = freqs.iter().map(|f| 0.5e6 / f).collect();
    for (&f, &d) in freqs.iter().zip(&durations) {
        let rows = prediction_table(&[f], &[d], &[4.0, 8.0], &cone, Execution::default()).unwrap();
        assert!(rows.iter().all(|r| r.fused && r.relative_error.unwrap().abs() < 1e-3), "{rows:?}");
    }
    let slow = prediction_table(&[1.0], &[0.5e6], &[8.0], &cone, Execution::default()).unwrap();
    assert!(!slow[0].fused && slow[0].matched.is_none());
    assert!(prediction_table(&[], &DURATIONS_US, &[1.0], &cone, Execution::default()).unwrap().is_empty());
}

#[test]
fn single_trials_at_and_around_balance() {
    let exp = letters(8.0);
    let observer = ObserverParams::default().noiseless();
    let balance = exp.balance_intensity().unwrap();
    assert_eq!(balance, 16.0);
    let at = run_letter_trial(&exp, balance, &observer, 0).unwrap();
    assert!(!at.identified && at.polarity == PerceivedPolarity::None && at.scaled_contrast == 0.0);
    let up = run_letter_trial(&exp, 2.0 * balance, &observer, 0).unwrap();
    assert!(up.identified && up.polarity == PerceivedPolarity::Bright && up.scaled_contrast > 0.0);
    let down = run_letter_trial(&exp, 0.5 * balance, &observer, 0).unwrap();
    assert!(down.identified && down.polarity == PerceivedPolarity::Dark);
    assert!((up.scaled_contrast + down.scaled_contrast).abs() < 1e-9);
}

#[test]
fn unfused_letters_are_rejected() {
    let exp = LetterExperiment::new(Glyph::letter('E').unwrap(), 1.0, 0.5e6, 8.0).with_grid(16, 16);
    let r = run_letter_trial(&exp, 16.0, &ObserverParams::default(), 0);
    assert!(matches!(r, Err(Error::NotFused { .. })));
}

#[test]
fn noiseless_crossover_sits_on_balance() {
    for bg in [4.0, 8.0, 12.0] {
        let exp = letters(bg);
        let balance = exp.balance_intensity().unwrap();
        let sweep = log_sweep(balance, 2.0, 21);
        let curve = identification_curve(&exp, &sweep, &ObserverParams::default().noiseless(), 5, Execution::default())
            .unwrap();
        assert!(curve.crossover_deviation().abs() < 1e-3, "bg {bg}: {}", curve.crossover_deviation());
        // Step at balance.
        for p in &curve.points {
            let expect = if p.intensity > balance * 1.05 { 1.0 } else { 0.0 };
            assert_eq!(p.p_bright, expect, "{p:?}");
        }
        // Flanks rise away from balance.
        let centre = curve.points.iter().position(|p| p.intensity == balance).unwrap();
        for w in curve.points[centre..].windows(2) {
            assert!(w[1].p_identified >= w[0].p_identified);
        }
        for w in curve.points[..=centre].windows(2) {
            assert!(w[1].p_identified <= w[0].p_identified);
        }
    }
}

#[test]
fn noisy_curve_is_least_visible_at_balance() {
    let exp = letters(8.0);
    let observer = ObserverParams::default();
    let sweep = log_sweep(16.0, 2.0, 21);
    let curve = identification_curve(&exp, &sweep, &observer, 200, Execution::default()).unwrap();
    assert!(curve.crossover_deviation().abs() <= 0.10);
    let min = curve.points.iter().map(|p| p.p_identified).fold(f64::INFINITY, f64::min);
    let at_balance = curve.points.iter().find(|p| p.intensity == 16.0).unwrap();
    assert_eq!(at_balance.p_identified, min);
    for p in &curve.points {
        assert!(p.p_bright + p.p_dark <= 1.0);
        assert!((p.p_identified - p.p_bright - p.p_dark).abs() < 1e-12);
    }
    // Common noise across points and a contrast that rises with intensity
    // make the polarity probabilities monotone.
    for w in curve.points.windows(2) {
        assert!(w[1].p_bright >= w[0].p_bright && w[1].p_dark <= w[0].p_dark);
    }
}

#[test]
fn scaled_contrast_is_antisymmetric_in_log_intensity() {
    let exp = letters(8.0);
    let observer = ObserverParams::default();
    let trials = 200;
    let sweep = log_sweep(16.0, 2.0, 21);
    let curve = identification_curve(&exp, &sweep, &observer, trials, Execution::default()).unwrap();
    let sigma = observer.contrast_scale * observer.noise_sigma_u * (2.0 / trials as f64).sqrt();
    let n = curve.points.len();
    for i in 0..n / 2 {
        let (lo, hi) = (&curve.points[i], &curve.points[n - 1 - i]);
        assert!((lo.intensity * hi.intensity / 256.0 - 1.0).abs() < 1e-12);
        assert!((lo.mean_scaled_contrast + hi.mean_scaled_contrast).abs() <= 3.0 * sigma, "{lo:?} {hi:?}");
    }
}

#[test]
fn curves_are_reproducible() {
    let exp = letters(12.0);
    let observer = ObserverParams { seed: 42, ..ObserverParams::default() };
    let sweep = log_sweep(24.0, 1.5, 9);
    let a = identification_curve(&exp, &sweep, &observer, 50, Execution::Sequential).unwrap();
    let b = identification_curve(&exp, &sweep, &observer, 50, Execution::Parallel).unwrap();
    let c = identification_curve(&exp, &sweep, &observer, 50, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(b, c);
    let other = identification_curve(&exp, &sweep, &ObserverParams { seed: 43, ..observer }, 50, Execution::Sequential)
        .unwrap();
    assert_ne!(a.points, other.points);
}

#[test]
fn sweeps_must_bracket_balance() {
    let exp = letters(8.0);
    let r = identification_curve(&exp, &[20.0, 30.0], &ObserverParams::default(), 10, Execution::default());
    assert!(matches!(r, Err(Error::SweepDoesNotBracket { .. })));
    let r = identification_curve(&exp, &[20.0, 10.0], &ObserverParams::default(), 10, Execution::default());
    assert!(r.is_err());
}

#[test]
fn max_abs_statistic_agrees_in_sign() {
    let exp = letters(8.0);
    let up = exp.figure_statistic(24.0, FigureStatistic::MaxAbs, Execution::default()).unwrap();
    let mean = exp.figure_statistic(24.0, FigureStatistic::Mean, Execution::default()).unwrap();
    assert!(up >= mean && mean > 0.0);
    assert!(exp.figure_statistic(16.0, FigureStatistic::MaxAbs, Execution::default()).unwrap().abs() < 1e-9);
}
