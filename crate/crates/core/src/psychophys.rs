//! Simulated-observer experiments.
//!
//! Brightness matching searches for the flash intensity whose settled cone
//! drive equals that of a steady light. Letter trials push a flicker-fused
//! letter through the whole front end and lateral gate, reduce the contrast
//! maps over the letter cells to one signed number, and let a noisy observer
//! decide whether a bright letter, a dark letter, or nothing was seen.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{non_negative, positive, Error, Result};
use crate::exec::Execution;
use crate::lateral::{contrast_fields, SurroundParams};
use crate::retina_front::{drive_field, steady_state_stats, transduce, ConeParams};
use crate::stimulus::{render_letter_program, FlickerSpec, Glyph};
use crate::talbot::{balance_intensity, matching_flash_intensity};

/// Bisection stops once the drive difference is below this.
pub const MATCH_TOLERANCE_U: f64 = 1e-6;
pub const MATCH_MAX_ITERATIONS: usize = 200;
/// The search starts from `[prediction / 16, prediction * 16]`.
pub const MATCH_BRACKET_FACTOR: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub steady_luminance: f64,
    pub frequency_hz: f64,
    pub flash_duration_us: f64,
    pub matched_intensity: f64,
    pub tp_predicted_intensity: f64,
    pub relative_error: f64,
    pub iterations: usize,
}

/// Flash intensity that the simulated retina cannot tell apart from a
/// steady light, found by bisection in log intensity.
pub fn simulate_brightness_match(
    steady_luminance: f64,
    frequency_hz: f64,
    flash_duration_us: f64,
    cone: &ConeParams,
) -> Result<MatchResult> {
    let tp = matching_flash_intensity(steady_luminance, frequency_hz, flash_duration_us)?.predicted_intensity;
    simulate_brightness_match_within(
        steady_luminance,
        frequency_hz,
        flash_duration_us,
        cone,
        (tp / MATCH_BRACKET_FACTOR, tp * MATCH_BRACKET_FACTOR),
    )
}

/// As [`simulate_brightness_match`] with an explicit starting bracket.
pub fn simulate_brightness_match_within(
    steady_luminance: f64,
    frequency_hz: f64,
    flash_duration_us: f64,
    cone: &ConeParams,
    bracket: (f64, f64),
) -> Result<MatchResult> {
    cone.validate()?;
    let prediction = matching_flash_intensity(steady_luminance, frequency_hz, flash_duration_us)?;
    if !(steady_luminance > cone.l_min && steady_luminance < cone.l_max) {
        return Err(Error::InvalidParameter { what: "steady luminance outside cone range", value: steady_luminance });
    }
    let spec = FlickerSpec::new(frequency_hz, flash_duration_us, prediction.predicted_intensity, 0.0)?;
    let stats = steady_state_stats(&spec, cone);
    if stats.ripple >= cone.ripple_fusion_threshold {
        return Err(Error::NotFused { frequency_hz, ripple: stats.ripple, threshold: cone.ripple_fusion_threshold });
    }

    let target = transduce(steady_luminance, cone);
    let mismatch = |intensity: f64| -> Result<f64> {
        let mean = steady_state_stats(&spec.with_intensity(intensity)?, cone).mean;
        Ok(transduce(mean, cone) - target)
    };

    let (mut lo, mut hi) = bracket;
    positive("bracket low", lo)?;
    positive("bracket high", hi)?;
    if !(mismatch(lo)? < 0.0 && mismatch(hi)? > 0.0) {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    for iteration in 1..=MATCH_MAX_ITERATIONS {
        let mid = (lo * hi).sqrt();
        let diff = mismatch(mid)?;
        if diff.abs() < MATCH_TOLERANCE_U {
            let tp = prediction.predicted_intensity;
            return Ok(MatchResult {
                steady_luminance,
                frequency_hz,
                flash_duration_us,
                matched_intensity: mid,
                tp_predicted_intensity: tp,
                relative_error: mid / tp - 1.0,
                iterations: iteration,
            });
        }
        if diff < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence { iterations: MATCH_MAX_ITERATIONS })
}

/// One row of a matching sweep. Conditions below fusion are flagged rather
/// than aborting the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRow {
    pub frequency_hz: f64,
    pub duration_us: f64,
    pub steady_cd_m2: f64,
    pub tp_predicted: f64,
    pub matched: Option<f64>,
    pub relative_error: Option<f64>,
    pub fused: bool,
}

/// Cross product of frequencies x durations x steady levels, in that
/// nesting order.
pub fn prediction_table(
    frequencies: &[f64],
    durations_us: &[f64],
    steady_levels: &[f64],
    cone: &ConeParams,
    exec: Execution,
) -> Result<Vec<MatchRow>> {
    let mut conditions = Vec::with_capacity(frequencies.len() * durations_us.len() * steady_levels.len());
    for &f in frequencies {
        for &d in durations_us {
            for &l in steady_levels {
                conditions.push((f, d, l));
            }
        }
    }
    exec.try_map_range(conditions.len(), |i| {
        let (f, d, l) = conditions[i];
        let tp = matching_flash_intensity(l, f, d)?.predicted_intensity;
        match simulate_brightness_match(l, f, d, cone) {
            Ok(m) => Ok(MatchRow {
                frequency_hz: f,
                duration_us: d,
                steady_cd_m2: l,
                tp_predicted: tp,
                matched: Some(m.matched_intensity),
                relative_error: Some(m.relative_error),
                fused: true,
            }),
            Err(Error::NotFused { .. }) => Ok(MatchRow {
                frequency_hz: f,
                duration_us: d,
                steady_cd_m2: l,
                tp_predicted: tp,
                matched: None,
                relative_error: None,
                fused: false,
            }),
            Err(e) => Err(e),
        }
    })
}

/// How the contrast maps are reduced over the letter cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FigureStatistic {
    /// Mean of `bright - dark` over letter cells.
    #[default]
    Mean,
    /// Signed value of the letter cell with the largest `|bright - dark|`.
    MaxAbs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverParams {
    pub id_threshold_u: f64,
    pub noise_sigma_u: f64,
    pub contrast_scale: f64,
    pub seed: u64,
    pub statistic: FigureStatistic,
}

impl Default for ObserverParams {
    fn default() -> Self {
        ObserverParams {
            id_threshold_u: 0.002,
            noise_sigma_u: 0.002,
            contrast_scale: 100.0,
            seed: 0x5EED_0001,
            statistic: FigureStatistic::Mean,
        }
    }
}

impl ObserverParams {
    pub fn noiseless(self) -> Self {
        ObserverParams { noise_sigma_u: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        positive("observer.id_threshold_u", self.id_threshold_u)?;
        non_negative("observer.noise_sigma_u", self.noise_sigma_u)?;
        if !self.contrast_scale.is_finite() {
            return Err(Error::InvalidParameter { what: "observer.contrast_scale", value: self.contrast_scale });
        }
        Ok(())
    }

    /// Standard-normal deviate for `trial_index`, independent of the order
    /// in which trials are evaluated.
    pub fn trial_noise(&self, trial_index: u64) -> f64 {
        if self.noise_sigma_u == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial_index);
        let z: f64 = StandardNormal.sample(&mut rng);
        self.noise_sigma_u * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerceivedPolarity {
    Bright,
    Dark,
    None,
}

impl fmt::Display for PerceivedPolarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerceivedPolarity::Bright => "bright",
            PerceivedPolarity::Dark => "dark",
            PerceivedPolarity::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub intensity: f64,
    pub identified: bool,
    pub polarity: PerceivedPolarity,
    pub scaled_contrast: f64,
}

/// A flicker-fused letter on a steady background.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterExperiment {
    pub glyph: Glyph,
    pub frequency_hz: f64,
    pub flash_duration_us: f64,
    pub background: f64,
    pub grid_width: usize,
    pub grid_height: usize,
    pub pixel_pitch_um: f64,
    pub cone: ConeParams,
    pub surround: SurroundParams,
}

impl LetterExperiment {
    /// Defaults: 64x64 grid at 50 µm pitch, default cone and surround.
    pub fn new(glyph: Glyph, frequency_hz: f64, flash_duration_us: f64, background: f64) -> Self {
        LetterExperiment {
            glyph,
            frequency_hz,
            flash_duration_us,
            background,
            grid_width: 64,
            grid_height: 64,
            pixel_pitch_um: 50.0,
            cone: ConeParams::default(),
            surround: SurroundParams::default(),
        }
    }

    pub fn with_grid(mut self, width: usize, height: usize) -> Self {
        self.grid_width = width;
        self.grid_height = height;
        self
    }

    pub fn balance_intensity(&self) -> Result<f64> {
        balance_intensity(self.background, self.frequency_hz, self.flash_duration_us)
    }

    /// Noiseless signed contrast of the letter at `intensity`.
    pub fn figure_statistic(&self, intensity: f64, statistic: FigureStatistic, exec: Execution) -> Result<f64> {
        let spec = FlickerSpec::new(self.frequency_hz, self.flash_duration_us, intensity, 0.0)?;
        let program = render_letter_program(
            &self.glyph,
            &spec,
            self.background,
            self.grid_width,
            self.grid_height,
            self.pixel_pitch_um,
            1e6,
        )?;
        let drive = drive_field(&program, &self.cone, exec)?;
        let maps = contrast_fields(&drive, &self.surround, exec)?;
        let mask = self.glyph.mask(self.grid_width, self.grid_height)?;
        let signed: Vec<f64> = mask
            .iter()
            .zip(maps.bright.iter().zip(maps.dark.iter()))
            .filter(|(&lit, _)| lit)
            .map(|(_, (b, d))| b - d)
            .collect();
        if signed.is_empty() {
            return Ok(0.0);
        }
        Ok(match statistic {
            FigureStatistic::Mean => signed.iter().sum::<f64>() / signed.len() as f64,
            FigureStatistic::MaxAbs => {
                signed.iter().copied().fold(0.0, |acc, v| if v.abs() > acc.abs() { v } else { acc })
            }
        })
    }
}

fn judge(statistic: f64, intensity: f64, observer: &ObserverParams, trial_index: u64) -> TrialResult {
    let perceived = statistic + observer.trial_noise(trial_index);
    let identified = perceived.abs() > observer.id_threshold_u;
    let polarity = match (identified, perceived > 0.0) {
        (false, _) => PerceivedPolarity::None,
        (true, true) => PerceivedPolarity::Bright,
        (true, false) => PerceivedPolarity::Dark,
    };
    let scaled_contrast = if identified { observer.contrast_scale * perceived } else { 0.0 };
    TrialResult { intensity, identified, polarity, scaled_contrast }
}

pub fn run_letter_trial(
    experiment: &LetterExperiment,
    intensity: f64,
    observer: &ObserverParams,
    trial_index: u64,
) -> Result<TrialResult> {
    observer.validate()?;
    let c = experiment.figure_statistic(intensity, observer.statistic, Execution::Sequential)?;
    Ok(judge(c, intensity, observer, trial_index))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub intensity: f64,
    pub p_identified: f64,
    pub p_bright: f64,
    pub p_dark: f64,
    pub mean_scaled_contrast: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub points: Vec<CurvePoint>,
    pub balance_intensity: f64,
    pub crossover_intensity: f64,
}

impl CurveResult {
    /// `crossover / balance - 1`.
    pub fn crossover_deviation(&self) -> f64 {
        self.crossover_intensity / self.balance_intensity - 1.0
    }
}

/// `points` intensities log-spaced over `[center / span, center * span]`;
/// with an odd count the middle point is exactly `center`.
pub fn log_sweep(center: f64, span: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![center],
        n => (0..n)
            .map(|i| {
                let e = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
                if e == 0.0 {
                    center
                } else {
                    center * span.powf(e)
                }
            })
            .collect(),
    }
}

/// Where `p_bright - p_dark` changes sign, interpolated in log intensity.
/// A run of exact ties is resolved to its geometric midpoint.
pub fn locate_crossover(points: &[CurvePoint], balance: f64) -> Result<f64> {
    let diff: Vec<f64> = points.iter().map(|p| p.p_bright - p.p_dark).collect();
    let not_found = || Error::SweepDoesNotBracket { balance };
    let first_positive = diff.iter().position(|&d| d > 0.0).ok_or_else(not_found)?;
    let last_negative = diff[..first_positive].iter().rposition(|&d| d < 0.0).ok_or_else(not_found)?;
    let (a, b) = (last_negative, first_positive);
    if b == a + 1 {
        let (la, lb) = (points[a].intensity.ln(), points[b].intensity.ln());
        let w = -diff[a] / (diff[b] - diff[a]);
        Ok((la + w * (lb - la)).exp())
    } else {
        Ok((points[a + 1].intensity * points[b - 1].intensity).sqrt())
    }
}

pub fn identification_curve(
    experiment: &LetterExperiment,
    intensity_sweep: &[f64],
    observer: &ObserverParams,
    trials_per_point: usize,
    exec: Execution,
) -> Result<CurveResult> {
    observer.validate()?;
    if trials_per_point == 0 {
        return Err(Error::InvalidParameter { what: "trials_per_point", value: 0.0 });
    }
    let balance = experiment.balance_intensity()?;
    let lo = intensity_sweep.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = intensity_sweep.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if intensity_sweep.is_empty() || !(lo <= balance && balance <= hi) {
        return Err(Error::SweepDoesNotBracket { balance });
    }
    if intensity_sweep.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { what: "intensity sweep must be increasing", value: lo });
    }

    let statistics = exec.try_map_range(intensity_sweep.len(), |i| {
        experiment.figure_statistic(intensity_sweep[i], observer.statistic, Execution::Sequential)
    })?;

    let points = exec.map_range(intensity_sweep.len(), |i| {
        let intensity = intensity_sweep[i];
        let (mut seen, mut bright, mut dark, mut scaled) = (0usize, 0usize, 0usize, 0.0);
        for t in 0..trials_per_point {
            let r = judge(statistics[i], intensity, observer, t as u64);
            seen += usize::from(r.identified);
            bright += usize::from(r.polarity == PerceivedPolarity::Bright);
            dark += usize::from(r.polarity == PerceivedPolarity::Dark);
            scaled += r.scaled_contrast;
        }
        let n = trials_per_point as f64;
        CurvePoint {
            intensity,
            p_identified: seen as f64 / n,
            p_bright: bright as f64 / n,
            p_dark: dark as f64 / n,
            mean_scaled_contrast: scaled / n,
        }
    });

    let crossover_intensity = locate_crossover(&points, balance)?;
    Ok(CurveResult { points, balance_intensity: balance, crossover_intensity })
}
