use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("flash of {flash_duration_us} us does not fit in a {period_us} us cycle")]
    DutyOverflow { flash_duration_us: f64, period_us: f64 },
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} is out of range: {value}")]
    InvalidParameter { what: &'static str, value: f64 },
    #[error("glyph of {glyph_w}x{glyph_h} cells does not fit a {grid_w}x{grid_h} grid")]
    GlyphTooLarge { glyph_w: usize, glyph_h: usize, grid_w: usize, grid_h: usize },
    #[error("no glyph for character {0:?}")]
    UnknownGlyph(char),
    #[error("sample time {t_us} us outside [0, {duration_us}] us")]
    OutOfRangeTime { t_us: f64, duration_us: f64 },
    #[error("duty cycle is zero")]
    ZeroDuty,
    #[error("luminance must be positive, got {0}")]
    NonPositiveLuminance(f64),
    #[error("time went backwards: {t_us} us after {last_t_us} us")]
    NonMonotonicTime { t_us: f64, last_t_us: f64 },
    #[error("surround annulus around ({x}, {y}) contains no cells")]
    EmptySurround { x: usize, y: usize },
    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfGrid { x: usize, y: usize, width: usize, height: usize },
    #[error("bright ({bright}) and dark ({dark}) contrast are both positive")]
    BothPositive { bright: f64, dark: f64 },
    #[error("flicker at {frequency_hz} Hz is not fused (ripple {ripple:.4} >= {threshold})")]
    NotFused { frequency_hz: f64, ripple: f64, threshold: f64 },
    #[error("brightness match did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("intensity sweep does not bracket the balance point {balance}")]
    SweepDoesNotBracket { balance: f64 },
    #[error("unknown {what} {name:?}")]
    UnknownName { what: &'static str, name: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { what, value })
    }
}

pub(crate) fn non_negative(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}
