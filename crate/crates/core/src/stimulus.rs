//! Space-time stimuli: steady fields, rectangular flash trains and letter
//! glyphs on a uniform background, laid out on an LED-array-like grid.

use crate::error::{non_negative, positive, Error, Result};
use crate::font;
use crate::grid::Grid;

/// Flash durations within this many microseconds above one full period are
/// treated as a continuous emitter (periods are usually quoted to the µs).
const DUTY_ROUNDING_US: f64 = 0.5;

/// A periodic train of ideal rectangular flashes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlickerSpec {
    frequency_hz: f64,
    flash_duration_us: f64,
    flash_intensity: f64,
    phase_us: f64,
    period_us: f64,
    duty: f64,
}

impl FlickerSpec {
    pub fn new(frequency_hz: f64, flash_duration_us: f64, flash_intensity: f64, phase_us: f64) -> Result<Self> {
        let frequency_hz = positive("frequency_hz", frequency_hz)?;
        let mut flash_duration_us = positive("flash_duration_us", flash_duration_us)?;
        let flash_intensity = non_negative("flash_intensity", flash_intensity)?;
        let period_us = 1e6 / frequency_hz;
        if !period_us.is_finite() || period_us <= 0.0 {
            return Err(Error::NonPositive { what: "period_us", value: period_us });
        }
        let phase_us = non_negative("phase_us", phase_us)?;
        if phase_us >= period_us {
            return Err(Error::InvalidParameter { what: "phase_us", value: phase_us });
        }

        let mut duty = frequency_hz * flash_duration_us * 1e-6;
        if duty > 1.0 {
            if flash_duration_us - period_us > DUTY_ROUNDING_US {
                return Err(Error::DutyOverflow { flash_duration_us, period_us });
            }
            flash_duration_us = period_us;
            duty = 1.0;
        }

        Ok(FlickerSpec { frequency_hz, flash_duration_us, flash_intensity, phase_us, period_us, duty })
    }

    /// Spec with flash duration chosen to give the requested duty cycle.
    pub fn with_duty(frequency_hz: f64, duty: f64, flash_intensity: f64, phase_us: f64) -> Result<Self> {
        let frequency_hz = positive("frequency_hz", frequency_hz)?;
        let duty = positive("duty", duty)?;
        if duty > 1.0 {
            return Err(Error::InvalidParameter { what: "duty", value: duty });
        }
        FlickerSpec::new(frequency_hz, duty * 1e6 / frequency_hz, flash_intensity, phase_us)
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn flash_duration_us(&self) -> f64 {
        self.flash_duration_us
    }

    pub fn flash_intensity(&self) -> f64 {
        self.flash_intensity
    }

    pub fn phase_us(&self) -> f64 {
        self.phase_us
    }

    pub fn period_us(&self) -> f64 {
        self.period_us
    }

    /// Fraction of each period spent lit, in (0, 1].
    pub fn duty(&self) -> f64 {
        self.duty
    }

    pub fn is_continuous(&self) -> bool {
        self.duty >= 1.0
    }

    /// Same timing, different flash intensity.
    pub fn with_intensity(&self, flash_intensity: f64) -> Result<Self> {
        let flash_intensity = non_negative("flash_intensity", flash_intensity)?;
        Ok(FlickerSpec { flash_intensity, ..*self })
    }

    /// Position inside the current cycle, measured from flash onset.
    #[inline]
    pub fn cycle_position_us(&self, t_us: f64) -> f64 {
        (t_us - self.phase_us).rem_euclid(self.period_us)
    }

    /// Instantaneous luminance at `t_us`.
    #[inline]
    pub fn sample(&self, t_us: f64) -> f64 {
        if self.is_continuous() || self.cycle_position_us(t_us) < self.flash_duration_us {
            self.flash_intensity
        } else {
            0.0
        }
    }

    /// Piecewise-constant segments `(luminance, duration_us)` covering
    /// `[0, duration_us)`, split at every flash edge.
    pub fn segments(&self, duration_us: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if duration_us <= 0.0 {
            return out;
        }
        if self.is_continuous() {
            out.push((self.flash_intensity, duration_us));
            return out;
        }
        // Edges are generated from the cycle index so long trains do not
        // accumulate rounding.
        let first_cycle = ((0.0 - self.phase_us) / self.period_us).floor() as i64;
        let mut t = 0.0;
        let mut k = first_cycle;
        while t < duration_us {
            let onset = self.phase_us + k as f64 * self.period_us;
            let offset = onset + self.flash_duration_us;
            let next = onset + self.period_us;
            for (start, end, level) in [(onset, offset, self.flash_intensity), (offset, next, 0.0)] {
                let lo = start.max(t);
                let hi = end.min(duration_us);
                if hi > lo {
                    out.push((level, hi - lo));
                    t = hi;
                }
            }
            k += 1;
        }
        out
    }
}

/// Convenience constructor mirroring [`FlickerSpec::new`].
pub fn make_flicker(
    frequency_hz: f64,
    flash_duration_us: f64,
    flash_intensity: f64,
    phase_us: f64,
) -> Result<FlickerSpec> {
    FlickerSpec::new(frequency_hz, flash_duration_us, flash_intensity, phase_us)
}

pub fn sample_waveform(spec: &FlickerSpec, t_us: f64) -> f64 {
    spec.sample(t_us)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellProgram {
    Steady { luminance: f64 },
    Flicker { spec: FlickerSpec },
}

impl CellProgram {
    pub fn steady(luminance: f64) -> Result<Self> {
        Ok(CellProgram::Steady { luminance: non_negative("luminance", luminance)? })
    }

    pub fn sample(&self, t_us: f64) -> f64 {
        match self {
            CellProgram::Steady { luminance } => *luminance,
            CellProgram::Flicker { spec } => spec.sample(t_us),
        }
    }

    pub fn time_average(&self) -> f64 {
        match self {
            CellProgram::Steady { luminance } => *luminance,
            CellProgram::Flicker { spec } => spec.flash_intensity() * spec.duty(),
        }
    }

    pub fn segments(&self, duration_us: f64) -> Vec<(f64, f64)> {
        match self {
            CellProgram::Steady { luminance } => vec![(*luminance, duration_us)],
            CellProgram::Flicker { spec } => spec.segments(duration_us),
        }
    }
}

/// A letter (or any figure) as a boolean bitmap; `true` marks figure cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Glyph {
    letter: char,
    bitmap: Grid<bool>,
}

impl Glyph {
    pub fn new(letter: char, bitmap: Grid<bool>) -> Self {
        Glyph { letter, bitmap }
    }

    /// Uppercase letter from the built-in 5x7 font.
    pub fn letter(letter: char) -> Result<Self> {
        let rows = font::rows(letter).ok_or(Error::UnknownGlyph(letter))?;
        let bitmap = Grid::from_fn(font::FONT_WIDTH, font::FONT_HEIGHT, |x, y| rows[y].as_bytes()[x] == b'#');
        Ok(Glyph { letter: letter.to_ascii_uppercase(), bitmap })
    }

    /// Figure-free glyph.
    pub fn empty() -> Self {
        Glyph { letter: ' ', bitmap: Grid::filled(0, 0, false) }
    }

    /// Each font cell becomes a `factor` x `factor` block.
    pub fn scaled(&self, factor: usize) -> Self {
        let f = factor.max(1);
        let bitmap =
            Grid::from_fn(self.bitmap.width() * f, self.bitmap.height() * f, |x, y| *self.bitmap.get(x / f, y / f));
        Glyph { letter: self.letter, bitmap }
    }

    pub fn char(&self) -> char {
        self.letter
    }

    pub fn bitmap(&self) -> &Grid<bool> {
        &self.bitmap
    }

    pub fn width(&self) -> usize {
        self.bitmap.width()
    }

    pub fn height(&self) -> usize {
        self.bitmap.height()
    }

    pub fn popcount(&self) -> usize {
        self.bitmap.iter().filter(|&&b| b).count()
    }

    /// Glyph stamped centered into a `width` x `height` mask.
    pub fn mask(&self, width: usize, height: usize) -> Result<Grid<bool>> {
        if self.width() > width || self.height() > height {
            return Err(Error::GlyphTooLarge {
                glyph_w: self.width(),
                glyph_h: self.height(),
                grid_w: width,
                grid_h: height,
            });
        }
        let x0 = (width - self.width()) / 2;
        let y0 = (height - self.height()) / 2;
        Ok(Grid::from_fn(width, height, |x, y| {
            x >= x0 && y >= y0 && x < x0 + self.width() && y < y0 + self.height() && *self.bitmap.get(x - x0, y - y0)
        }))
    }
}

pub type LuminanceField = Grid<f64>;

/// Per-cell emission programs for an LED-array-like display.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusProgram {
    cells: Grid<CellProgram>,
    pixel_pitch_um: f64,
    duration_us: f64,
}

impl StimulusProgram {
    pub fn new(cells: Grid<CellProgram>, pixel_pitch_um: f64, duration_us: f64) -> Result<Self> {
        let pixel_pitch_um = positive("pixel_pitch_um", pixel_pitch_um)?;
        let duration_us = positive("duration_us", duration_us)?;
        if cells.is_empty() {
            return Err(Error::InvalidParameter { what: "cell count", value: 0.0 });
        }
        Ok(StimulusProgram { cells, pixel_pitch_um, duration_us })
    }

    /// Uniform steady field.
    pub fn uniform(width: usize, height: usize, luminance: f64, pixel_pitch_um: f64, duration_us: f64) -> Result<Self> {
        let cell = CellProgram::steady(luminance)?;
        StimulusProgram::new(Grid::filled(width, height, cell), pixel_pitch_um, duration_us)
    }

    pub fn width(&self) -> usize {
        self.cells.width()
    }

    pub fn height(&self) -> usize {
        self.cells.height()
    }

    pub fn pixel_pitch_um(&self) -> f64 {
        self.pixel_pitch_um
    }

    pub fn duration_us(&self) -> f64 {
        self.duration_us
    }

    pub fn cells(&self) -> &Grid<CellProgram> {
        &self.cells
    }

    pub fn cell(&self, x: usize, y: usize) -> &CellProgram {
        self.cells.get(x, y)
    }

    pub fn flicker_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, CellProgram::Flicker { .. })).count()
    }

    /// Instantaneous luminance of every cell.
    pub fn sample_field(&self, t_us: f64) -> Result<LuminanceField> {
        if !(0.0..=self.duration_us).contains(&t_us) {
            return Err(Error::OutOfRangeTime { t_us, duration_us: self.duration_us });
        }
        Ok(self.cells.map(|c| c.sample(t_us)))
    }

    /// Time-averaged luminance of every cell.
    pub fn mean_field(&self) -> LuminanceField {
        self.cells.map(CellProgram::time_average)
    }
}

pub fn sample_field(program: &StimulusProgram, t_us: f64) -> Result<LuminanceField> {
    program.sample_field(t_us)
}

/// Letter cells flicker with `letter_cells`; every other cell is steady at
/// `background_luminance`.
pub fn render_letter_program(
    glyph: &Glyph,
    letter_cells: &FlickerSpec,
    background_luminance: f64,
    width: usize,
    height: usize,
    pixel_pitch_um: f64,
    duration_us: f64,
) -> Result<StimulusProgram> {
    let background = CellProgram::steady(background_luminance)?;
    let mask = glyph.mask(width, height)?;
    let cells = mask.map(|&lit| if lit { CellProgram::Flicker { spec: *letter_cells } } else { background });
    StimulusProgram::new(cells, pixel_pitch_um, duration_us)
}
