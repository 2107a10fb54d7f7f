//! Closed-form Talbot-Plateau arithmetic: a fused flash train is equivalent
//! to a steady light at its time-averaged luminance, so frequency, flash
//! duration and flash intensity trade off reciprocally.

use crate::error::{non_negative, positive, Error, Result};
use crate::stimulus::FlickerSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPrediction {
    pub steady_luminance: f64,
    pub frequency_hz: f64,
    pub flash_duration_us: f64,
    pub predicted_intensity: f64,
    pub duty: f64,
}

pub fn duty_cycle(spec: &FlickerSpec) -> f64 {
    spec.duty()
}

pub fn average_luminance(spec: &FlickerSpec) -> f64 {
    spec.flash_intensity() * spec.duty()
}

/// Flash intensity whose time average equals `steady_luminance`.
pub fn matching_flash_intensity(
    steady_luminance: f64,
    frequency_hz: f64,
    flash_duration_us: f64,
) -> Result<MatchPrediction> {
    let steady_luminance = non_negative("steady_luminance", steady_luminance)?;
    let duty = frequency_hz * flash_duration_us * 1e-6;
    if !(duty > 0.0) || !duty.is_finite() {
        return Err(Error::ZeroDuty);
    }
    // Validates the timing (and folds µs rounding at the duty-1 boundary).
    let spec = FlickerSpec::new(frequency_hz, flash_duration_us, 0.0, 0.0)?;
    Ok(MatchPrediction {
        steady_luminance,
        frequency_hz,
        flash_duration_us,
        predicted_intensity: steady_luminance / spec.duty(),
        duty: spec.duty(),
    })
}

/// Flash intensity at which a flickering figure has the same average
/// luminance as its steady background.
pub fn balance_intensity(background_luminance: f64, frequency_hz: f64, flash_duration_us: f64) -> Result<f64> {
    matching_flash_intensity(background_luminance, frequency_hz, flash_duration_us).map(|m| m.predicted_intensity)
}

/// `log10(average / background)`; zero at balance, positive for bright figures.
pub fn signed_log_contrast(spec: &FlickerSpec, background_luminance: f64) -> Result<f64> {
    let average = average_luminance(spec);
    if !(background_luminance > 0.0) {
        return Err(Error::NonPositiveLuminance(background_luminance));
    }
    if !(average > 0.0) {
        return Err(Error::NonPositiveLuminance(average));
    }
    Ok((average / background_luminance).log10())
}

/// `base * 2^k` for `k = 0..octaves`.
pub fn octave_levels(base_luminance: f64, octaves: usize) -> Result<Vec<f64>> {
    let base = positive("base_luminance", base_luminance)?;
    Ok((0..octaves).map(|k| base * f64::from(1u32 << k.min(31))).collect())
}
