//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retina_duo::channels::{encode_luminance, ChannelParams};
use retina_duo::lateral::{
    and_not, contrast_fields, contrast_pair, surround_average, surround_average_naive, DriveField, SurroundParams,
};
use retina_duo::psychophys::{
    identification_curve, log_sweep, prediction_table, run_letter_trial, LetterExperiment, ObserverParams,
};
use retina_duo::retina_front::{integrate_step, ConeParams, ConeState, Profile};
use retina_duo::talbot::{average_luminance, octave_levels};
use retina_duo::{event_stream, is_fused, render_letter_program, Execution, FlickerSpec, Glyph, Grid};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Least-squares slope and R² of `y` on `x`.
fn fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

fn talbot_plateau_reproduction() -> Outcome {
    let cone = Profile::Fig1Display.cone_params();
    let durations = [1.0, 10.0, 100.0, 1000.0, 10_000.0];
    let levels = octave_levels(1.0, 5).unwrap();
    let rows = match prediction_table(&[24.0], &durations, &levels, &cone, Execution::default()) {
        Ok(rows) => rows,
        Err(e) => return check(false, format!("table failed: {e}")),
    };
    if rows.len() != 25 || rows.iter().any(|r| r.matched.is_none()) {
        return check(false, format!("{} rows, {} unfused", rows.len(), rows.iter().filter(|r| !r.fused).count()));
    }
    let expected: Vec<f64> = rows.iter().map(|r| r.steady_cd_m2 / (r.frequency_hz * r.duration_us * 1e-6)).collect();
    let matched: Vec<f64> = rows.iter().map(|r| r.matched.unwrap()).collect();
    let worst = matched.iter().zip(&expected).map(|(m, e)| (m / e - 1.0).abs()).fold(0.0, f64::max);
    let lx: Vec<f64> = expected.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = matched.iter().map(|v| v.log10()).collect();
    let (slope, r2) = fit(&lx, &ly);
    check(
        worst < 1e-3 && (slope - 1.0).abs() <= 1e-3 && r2 > 0.999999,
        format!("25 rows, max |rel err| {worst:.2e}, slope {slope:.7}, R² {r2:.10}"),
    )
}

fn balance_invisibility() -> Outcome {
    let observer = ObserverParams::default().noiseless();
    let mut notes = Vec::new();
    let mut pass = true;
    for (bg, balance) in [(4.0, 8.0), (8.0, 16.0), (12.0, 24.0)] {
        let exp = LetterExperiment::new(Glyph::letter('E').unwrap(), 250.0, 2000.0, bg);
        let computed = exp.balance_intensity().unwrap();
        let seen = |i: f64| run_letter_trial(&exp, i, &observer, 0).map(|t| t.identified).ok();
        let (at, under, over) = (seen(balance), seen(0.75 * balance), seen(1.25 * balance));
        let ok = computed == balance && (at, under, over) == (Some(false), Some(true), Some(true));
        pass &= ok;
        notes.push(format!("bg {bg}: balance {computed}, seen at/-25%/+25% {:?}/{:?}/{:?}", at, under, over));
    }
    check(pass, notes.join("; "))
}

fn crossover_bound() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for bg in [4.0, 8.0, 12.0] {
        let exp = LetterExperiment::new(Glyph::letter('E').unwrap(), 250.0, 2000.0, bg);
        let sweep = log_sweep(exp.balance_intensity().unwrap(), 2.0, 21);
        let noisy = identification_curve(&exp, &sweep, &ObserverParams::default(), 200, Execution::default());
        let clean =
            identification_curve(&exp, &sweep, &ObserverParams::default().noiseless(), 200, Execution::default());
        match (noisy, clean) {
            (Ok(n), Ok(c)) => {
                let (dn, dc) = (n.crossover_deviation(), c.crossover_deviation());
                pass &= dn.abs() <= 0.10 && dc.abs() < 1e-3;
                notes.push(format!("bg {bg}: noisy {:+.3}%, noiseless {:+.4}%", 100.0 * dn, 100.0 * dc));
            }
            (n, c) => {
                pass = false;
                notes.push(format!("bg {bg}: {:?} / {:?}", n.err(), c.err()));
            }
        }
    }
    check(pass, notes.join("; "))
}

fn frequency_range_fusion() -> Outcome {
    let cone = Profile::Fig5Display.cone_params();
    let mut pass = true;
    let mut notes = Vec::new();
    for f in [250.0, 2500.0, 25_000.0, 250_000.0] {
        let spec = FlickerSpec::with_duty(f, 0.5, 16.0, 0.0).unwrap();
        let fused = is_fused(&spec, &cone);
        let program = render_letter_program(&Glyph::letter('E').unwrap(), &spec, 8.0, 64, 64, 50.0, 20_000.0).unwrap();
        let events = event_stream(&program, &cone, 0.01, Execution::default()).map(|e| e.len());
        pass &= fused && events.as_ref().is_ok_and(|&n| n == 0);
        notes.push(format!("{f} Hz fused={fused} events={:?}", events.ok()));
    }
    let slow = is_fused(&FlickerSpec::with_duty(1.0, 0.5, 16.0, 0.0).unwrap(), &cone);
    pass &= !slow;
    notes.push(format!("1 Hz fused={slow}"));
    check(pass, notes.join(", "))
}

fn gate_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0usize;
    for _ in 0..10_000 {
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        let p = contrast_pair(x, y);
        let ok = and_not(x, y) == (x - y).max(0.0)
            && p.bright == (x - y).max(0.0)
            && p.bright * p.dark == 0.0
            && p.bright - p.dark == x - y;
        bad += usize::from(!ok);
    }
    let params = SurroundParams::default();
    let mut uniform_max: f64 = 0.0;
    for u in [0.0, 0.3, 0.5, 1.0] {
        let maps =
            contrast_fields(&DriveField::uniform(32, 32, 50.0, u).unwrap(), &params, Execution::default()).unwrap();
        uniform_max = maps.bright.iter().chain(maps.dark.iter()).fold(uniform_max, |a, v| a.max(v.abs()));
    }
    let mut offset_max: f64 = 0.0;
    for _ in 0..10 {
        let base: Vec<f64> = (0..32 * 32).map(|_| 0.25 + 0.5 * rng.random::<f64>()).collect();
        let c = rng.random_range(-0.25..0.25);
        let moved: Vec<f64> = base.iter().map(|v| v + c).collect();
        let a = contrast_fields(&DriveField::new(32, 32, 50.0, base).unwrap(), &params, Execution::default()).unwrap();
        let b = contrast_fields(&DriveField::new(32, 32, 50.0, moved).unwrap(), &params, Execution::default()).unwrap();
        for (p, q) in a.bright.iter().zip(b.bright.iter()).chain(a.dark.iter().zip(b.dark.iter())) {
            offset_max = offset_max.max((p - q).abs());
        }
    }
    check(
        bad == 0 && uniform_max == 0.0 && offset_max <= 1e-12,
        format!("10000 pairs, {bad} violations; uniform max {uniform_max:e}; offset drift {offset_max:.1e}"),
    )
}

fn dual_channel_sum_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = ChannelParams::default();
    let total = 2.0 * p.r_spont + p.r_max;
    let (mut sum_bad, mut worst) = (0usize, 0.0f64);
    for _ in 0..10_000 {
        let u: f64 = rng.random();
        let c = encode_luminance(u, &p);
        sum_bad += usize::from(c.bright_rate + c.dark_rate != total);
        worst = worst.max((c.drive_from_bright(&p) - u).abs()).max((c.drive_from_dark(&p) - u).abs());
    }
    check(
        sum_bad == 0 && worst <= 1e-12,
        format!("10000 u, {sum_bad} sum violations, reconstruction error {worst:.1e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut worst_avg = 0.0f64;
    let mut duties = Vec::new();
    for d in [1.0, 10.0, 100.0, 1000.0, 10_000.0, 41_667.0] {
        let spec = FlickerSpec::new(24.0, d, 100.0, 0.0).unwrap();
        duties.push(spec.duty());
        let n = 1_000_000usize;
        let h = spec.period_us() / n as f64;
        let t0 = spec.phase_us() + 0.5 * h;
        let f = |k: usize| spec.sample(t0 + k as f64 * h);
        let mut sum = 0.5 * (f(0) + f(n));
        for k in 1..n {
            sum += f(k);
        }
        let numeric = sum / n as f64;
        worst_avg = worst_avg.max((average_luminance(&spec) / numeric - 1.0).abs());
    }
    let cone = ConeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_step = 0.0f64;
    for _ in 0..1000 {
        let (start, input): (f64, f64) = (rng.random_range(0.0..1e4), rng.random_range(0.0..1e4));
        let dt = rng.random_range(1.0..1e6);
        let n = rng.random_range(1..100usize);
        let whole = integrate_step(ConeState::at_rest(start, 0.0), input, dt, &cone).unwrap().integrator_value;
        let mut s = ConeState::at_rest(start, 0.0);
        for k in 1..=n {
            s = integrate_step(s, input, dt * k as f64 / n as f64, &cone).unwrap();
        }
        worst_step = worst_step.max((s.integrator_value - whole).abs() / start.max(input));
    }
    check(
        worst_avg <= 1e-9 && worst_step <= 1e-12,
        format!(
            "duties {:.1e}..{}, average rel err {worst_avg:.1e}; substep rel err {worst_step:.1e}",
            duties[0],
            duties[duties.len() - 1]
        ),
    )
}

fn surround_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = SurroundParams::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let field = DriveField::from_grid(Grid::from_fn(32, 32, |_, _| rng.random::<f64>()), 50.0).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let fast = surround_average(&field, x, y, &params).unwrap();
                let naive = surround_average_naive(&field, x, y, &params).unwrap();
                worst = worst.max((fast - naive).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("100 fields x 1024 cells, max diff {worst:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 talbot-plateau reproduction", talbot_plateau_reproduction, Some(Duration::from_secs(10))),
        ("AC2 balance invisibility", balance_invisibility, Some(Duration::from_secs(5))),
        ("AC3 crossover bound", crossover_bound, Some(Duration::from_secs(60))),
        ("AC4 frequency-range fusion", frequency_range_fusion, None),
        ("AC5 gate algebra", gate_algebra, None),
        ("AC6 dual-channel sum rule", dual_channel_sum_rule, None),
        ("AC7 oracle equivalence", oracle_equivalence, None),
        ("AC8 surround brute-force equivalence", surround_equivalence, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = outcome.pass && in_time;
        failed += usize::from(!pass);
        let budget = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
        println!(
            "{} {name}: {} [{:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        println!("all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
