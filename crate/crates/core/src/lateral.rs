//! Horizontal-cell surround pooling and the rectified AND-NOT contrast gate.
//!
//! Each cell's own drive is the center signal `X`; the weighted mean drive
//! over an annulus around it is the surround signal `Y`. The gate passes
//! `X - Y` when the center is brighter than its surround and clips to zero
//! otherwise, so the bright and dark channels each see one rectified half of
//! the departure from the local background.

use std::fmt;
use std::str::FromStr;

use crate::error::{positive, Error, Result};
use crate::exec::Execution;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    UniformAnnulus,
    /// Gaussian taper with sigma = surround radius / 2.
    GaussianAnnulus,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::UniformAnnulus => "uniform_annulus",
            Weighting::GaussianAnnulus => "gaussian_annulus",
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform_annulus" | "uniform" => Ok(Weighting::UniformAnnulus),
            "gaussian_annulus" | "gaussian" => Ok(Weighting::GaussianAnnulus),
            other => Err(Error::UnknownName { what: "surround weighting", name: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurroundParams {
    pub center_radius_um: f64,
    pub surround_radius_um: f64,
    pub weighting: Weighting,
    /// Pool the center disk together with the annulus.
    pub include_center: bool,
}

impl Default for SurroundParams {
    /// 23 µm center and 451 µm surround diameters.
    fn default() -> Self {
        SurroundParams {
            center_radius_um: 11.5,
            surround_radius_um: 225.5,
            weighting: Weighting::UniformAnnulus,
            include_center: false,
        }
    }
}

impl SurroundParams {
    pub fn validate(&self) -> Result<()> {
        positive("surround.center_um", self.center_radius_um)?;
        positive("surround.radius_um", self.surround_radius_um)?;
        if self.surround_radius_um <= self.center_radius_um {
            return Err(Error::InvalidParameter { what: "surround.radius_um", value: self.surround_radius_um });
        }
        Ok(())
    }

    /// Whether a cell `dist2_cells` (squared distance in cell units) away
    /// belongs to the pool.
    #[inline]
    pub fn contains(&self, dist2_cells: f64, pitch_um: f64) -> bool {
        let r2 = dist2_cells * pitch_um * pitch_um;
        let outer = r2 <= self.surround_radius_um * self.surround_radius_um;
        let outside_center = r2 > self.center_radius_um * self.center_radius_um;
        outer && (self.include_center || outside_center)
    }

    #[inline]
    pub fn weight(&self, dist2_cells: f64, pitch_um: f64) -> f64 {
        match self.weighting {
            Weighting::UniformAnnulus => 1.0,
            Weighting::GaussianAnnulus => {
                let sigma = self.surround_radius_um / 2.0;
                let r2 = dist2_cells * pitch_um * pitch_um;
                (-r2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Transduced drive of every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveField {
    values: Grid<f64>,
    pixel_pitch_um: f64,
}

impl DriveField {
    pub fn new(width: usize, height: usize, pixel_pitch_um: f64, values: Vec<f64>) -> Result<Self> {
        Self::from_grid(Grid::from_vec(width, height, values), pixel_pitch_um)
    }

    pub fn from_grid(values: Grid<f64>, pixel_pitch_um: f64) -> Result<Self> {
        positive("pixel_pitch_um", pixel_pitch_um)?;
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter { what: "drive value", value: bad });
        }
        Ok(DriveField { values, pixel_pitch_um })
    }

    pub fn uniform(width: usize, height: usize, pixel_pitch_um: f64, u: f64) -> Result<Self> {
        Self::from_grid(Grid::filled(width, height, u), pixel_pitch_um)
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn pixel_pitch_um(&self) -> f64 {
        self.pixel_pitch_um
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        *self.values.get(x, y)
    }

    fn check(&self, x: usize, y: usize) -> Result<()> {
        if self.values.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutOfGrid { x, y, width: self.width(), height: self.height() })
        }
    }
}

/// Running weighted mean of the pooled cells.
struct Pool {
    sum: f64,
    norm: f64,
    lo: f64,
    hi: f64,
}

impl Pool {
    fn new() -> Self {
        Pool { sum: 0.0, norm: 0.0, lo: f64::INFINITY, hi: f64::NEG_INFINITY }
    }

    #[inline]
    fn add(&mut self, weight: f64, value: f64) {
        self.sum += weight * value;
        self.norm += weight;
        self.lo = self.lo.min(value);
        self.hi = self.hi.max(value);
    }

    /// The mean, clamped to the pooled range: rounding in the sum must not
    /// push a uniform pool off its own value.
    fn finish(self, x: usize, y: usize) -> Result<f64> {
        if self.norm > 0.0 {
            Ok((self.sum / self.norm).clamp(self.lo, self.hi))
        } else {
            Err(Error::EmptySurround { x, y })
        }
    }
}

/// Surround offsets and weights for one pixel pitch, precomputed once and
/// reused for every cell.
#[derive(Debug, Clone)]
pub struct SurroundKernel {
    taps: Vec<(isize, isize, f64)>,
}

impl SurroundKernel {
    pub fn new(params: &SurroundParams, pixel_pitch_um: f64) -> Result<Self> {
        params.validate()?;
        let reach = (params.surround_radius_um / pixel_pitch_um).floor() as isize;
        let mut taps = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let d2 = (dx * dx + dy * dy) as f64;
                if params.contains(d2, pixel_pitch_um) {
                    taps.push((dx, dy, params.weight(d2, pixel_pitch_um)));
                }
            }
        }
        Ok(SurroundKernel { taps })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Weighted surround mean at `(x, y)`, renormalized over in-grid taps.
    pub fn average(&self, field: &DriveField, x: usize, y: usize) -> Result<f64> {
        let (w, h) = (field.width() as isize, field.height() as isize);
        let values = field.values.as_slice();
        let mut pool = Pool::new();
        for &(dx, dy, weight) in &self.taps {
            let sx = x as isize + dx;
            let sy = y as isize + dy;
            if sx >= 0 && sy >= 0 && sx < w && sy < h {
                pool.add(weight, values[(sy * w + sx) as usize]);
            }
        }
        pool.finish(x, y)
    }
}

/// Surround mean `Y` at `(x, y)` using the precomputed kernel.
pub fn surround_average(field: &DriveField, x: usize, y: usize, params: &SurroundParams) -> Result<f64> {
    field.check(x, y)?;
    SurroundKernel::new(params, field.pixel_pitch_um)?.average(field, x, y)
}

/// Reference implementation: tests every cell of the grid for membership.
pub fn surround_average_naive(field: &DriveField, x: usize, y: usize, params: &SurroundParams) -> Result<f64> {
    field.check(x, y)?;
    params.validate()?;
    let pitch = field.pixel_pitch_um;
    let mut pool = Pool::new();
    for sy in 0..field.height() {
        for sx in 0..field.width() {
            let dx = sx as f64 - x as f64;
            let dy = sy as f64 - y as f64;
            let d2 = dx * dx + dy * dy;
            if params.contains(d2, pitch) {
                pool.add(params.weight(d2, pitch), field.get(sx, sy));
            }
        }
    }
    pool.finish(x, y)
}

/// `Z = X - Y` if `Y <= X`, else 0.
#[inline]
pub fn and_not(x: f64, y: f64) -> f64 {
    if y <= x {
        x - y
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastPair {
    pub bright: f64,
    pub dark: f64,
}

#[inline]
pub fn contrast_pair(center: f64, surround: f64) -> ContrastPair {
    ContrastPair { bright: and_not(center, surround), dark: and_not(surround, center) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMaps {
    pub surround: Grid<f64>,
    pub bright: Grid<f64>,
    pub dark: Grid<f64>,
}

impl ContrastMaps {
    /// `bright - dark` per cell, i.e. the signed center-surround departure.
    pub fn signed(&self) -> Grid<f64> {
        let data = self.bright.iter().zip(self.dark.iter()).map(|(b, d)| b - d).collect();
        Grid::from_vec(self.bright.width(), self.bright.height(), data)
    }
}

pub fn contrast_fields(field: &DriveField, params: &SurroundParams, exec: Execution) -> Result<ContrastMaps> {
    let kernel = SurroundKernel::new(params, field.pixel_pitch_um)?;
    let (w, h) = (field.width(), field.height());
    let pairs = exec.try_map_range(w * h, |i| {
        let (x, y) = (i % w, i / w);
        let surround = kernel.average(field, x, y)?;
        Ok::<_, Error>((surround, contrast_pair(field.get(x, y), surround)))
    })?;
    let surround = Grid::from_vec(w, h, pairs.iter().map(|(s, _)| *s).collect());
    let bright = Grid::from_vec(w, h, pairs.iter().map(|(_, p)| p.bright).collect());
    let dark = Grid::from_vec(w, h, pairs.iter().map(|(_, p)| p.dark).collect());
    Ok(ContrastMaps { surround, bright, dark })
}
