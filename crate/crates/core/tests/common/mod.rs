//! Independent reference computations shared by the integration tests.
//! Nothing here calls the closed forms it is used to check.
#![allow(dead_code)]

use retina_duo::retina_front::{integrate_step, transduce, ConeParams, ConeState};
use retina_duo::FlickerSpec;

/// Trapezoid rule over one period of the sampled waveform, with `n`
/// intervals starting half a step after flash onset.
pub fn trapezoid_average(spec: &FlickerSpec, n: usize) -> f64 {
    let p = spec.period_us();
    let h = p / n as f64;
    let t0 = spec.phase_us() + 0.5 * h;
    let f = |k: usize| spec.sample(t0 + k as f64 * h);
    let mut sum = 0.5 * (f(0) + f(n));
    for k in 1..n {
        sum += f(k);
    }
    sum * h / p
}

/// Whether `t` falls in any of the flash intervals `[phase + kP, phase + kP + d)`
/// for `k` in `-1..cycles`, by listing every interval.
pub fn lit_by_table(spec: &FlickerSpec, t: f64, cycles: i64) -> bool {
    (-1..cycles).any(|k| {
        let onset = spec.phase_us() + k as f64 * spec.period_us();
        t >= onset && t < onset + spec.flash_duration_us()
    })
}

pub struct SimulatedCycle {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub ripple: f64,
}

/// Time-stepped simulation from darkness with `steps_per_period` equal
/// steps, run for at least `settle_tau` time constants and `min_cycles`
/// cycles; the last cycle is measured from the samples.
pub fn simulate_cycle(
    spec: &FlickerSpec,
    cone: &ConeParams,
    steps_per_period: usize,
    settle_tau: f64,
    min_cycles: usize,
) -> SimulatedCycle {
    let p = spec.period_us();
    let dt = p / steps_per_period as f64;
    let cycles = ((settle_tau * cone.tau_us / p).ceil() as usize).max(min_cycles) + 1;
    let mut state = ConeState::at_rest(0.0, 0.0);
    let mut last = Vec::with_capacity(steps_per_period);
    for c in 0..cycles {
        for k in 0..steps_per_period {
            let t = (c * steps_per_period + k) as f64 * dt;
            let input = spec.sample(t + 0.5 * dt);
            state = integrate_step(state, input, t + dt, cone).unwrap();
            if c + 1 == cycles {
                last.push(state.integrator_value);
            }
        }
    }
    // Samples are at step ends; trapezoid over the closed cycle.
    let mut area = 0.0;
    let mut prev = *last.last().unwrap();
    for &v in &last {
        area += 0.5 * (prev + v) * dt;
        prev = v;
    }
    let mean = area / p;
    let min = last.iter().copied().fold(f64::INFINITY, f64::min);
    let max = last.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SimulatedCycle { mean, min, max, ripple: (max - min) / mean }
}

/// Counts threshold crossings of the transduced drive by brute-force time
/// stepping a single integrator through `(luminance, duration)` segments.
pub fn count_crossings(
    initial: f64,
    segments: &[(f64, f64)],
    cone: &ConeParams,
    threshold_u: f64,
    dt: f64,
) -> (usize, usize) {
    let mut state = ConeState::at_rest(initial, 0.0);
    let mut reference = transduce(initial, cone);
    let (mut on, mut off) = (0, 0);
    let mut t = 0.0;
    for &(level, duration) in segments {
        let end = t + duration;
        while t < end {
            let next = (t + dt).min(end);
            state = integrate_step(state, level, next, cone).unwrap();
            t = next;
            let u = transduce(state.integrator_value, cone);
            while u >= reference + threshold_u - 1e-9 {
                reference += threshold_u;
                on += 1;
            }
            while u <= reference - threshold_u + 1e-9 {
                reference -= threshold_u;
                off += 1;
            }
        }
    }
    (on, off)
}

/// `sqrt`-distance annulus membership, written out longhand.
pub fn in_default_annulus(dx: i64, dy: i64, pitch_um: f64) -> bool {
    let r = pitch_um * ((dx * dx + dy * dy) as f64).sqrt();
    r > 11.5 && r <= 225.5
}
