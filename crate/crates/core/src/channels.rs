//! Ganglion-stage encoders.
//!
//! * Luminance: complementary tonic rates. The bright channel rises with the
//!   drive `u` and the dark channel with `1 - u`, so their sum is constant.
//! * Contrast: the rectified bright/dark gate outputs scaled onto rates.
//! * Events: a per-cell change detector on the transduced cone drive,
//!   emitting ON/OFF events whenever the drive moves one threshold away from
//!   the last reference level.

use std::cmp::Ordering;

use crate::error::{non_negative, positive, Error, Result};
use crate::exec::Execution;
use crate::lateral::ContrastPair;
use crate::retina_front::{relax, settled_value, transduce, ConeParams};
use crate::stimulus::{CellProgram, StimulusProgram};

/// Slack, in drive units, when deciding whether a level has been reached.
/// Keeps a swing of exactly `n * threshold` from losing its last event to
/// rounding.
pub const LEVEL_EPSILON: f64 = 1e-9;

pub const DEFAULT_EVENT_THRESHOLD_U: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub r_max: f64,
    pub r_spont: f64,
    pub contrast_gain: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams { r_max: 100.0, r_spont: 5.0, contrast_gain: 200.0 }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        positive("channel.r_max", self.r_max)?;
        non_negative("channel.r_spont", self.r_spont)?;
        positive("channel.contrast_gain", self.contrast_gain)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuminanceChannels {
    pub bright_rate: f64,
    pub dark_rate: f64,
}

impl LuminanceChannels {
    /// Drive recovered from the bright channel.
    pub fn drive_from_bright(&self, params: &ChannelParams) -> f64 {
        (self.bright_rate - params.r_spont) / params.r_max
    }

    /// Drive recovered from the dark channel.
    pub fn drive_from_dark(&self, params: &ChannelParams) -> f64 {
        1.0 - (self.dark_rate - params.r_spont) / params.r_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastChannels {
    pub bright_rate: f64,
    pub dark_rate: f64,
}

pub fn encode_luminance(u: f64, params: &ChannelParams) -> LuminanceChannels {
    let u = u.clamp(0.0, 1.0);
    let total = 2.0 * params.r_spont + params.r_max;
    let bright_rate = params.r_spont + params.r_max * u;
    // Dark is taken as the complement of bright so the pair sums to `total`
    // in floating point, not just algebraically.
    LuminanceChannels { bright_rate, dark_rate: total - bright_rate }
}

pub fn encode_contrast(pair: ContrastPair, params: &ChannelParams) -> Result<ContrastChannels> {
    let ContrastPair { bright, dark } = pair;
    if !(bright >= 0.0) || !(dark >= 0.0) {
        return Err(Error::InvalidParameter { what: "contrast", value: bright.min(dark) });
    }
    if bright > 0.0 && dark > 0.0 {
        return Err(Error::BothPositive { bright, dark });
    }
    Ok(ContrastChannels {
        bright_rate: params.r_spont + params.contrast_gain * bright,
        dark_rate: params.r_spont + params.contrast_gain * dark,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Polarity {
    Off = 0,
    On = 1,
}

impl Polarity {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(b: u8) -> Option<Self> {
        match b {
            0 => Some(Polarity::Off),
            1 => Some(Polarity::On),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub t_us: u64,
    pub x: u16,
    pub y: u16,
    pub polarity: Polarity,
}

impl Event {
    fn key(&self) -> (u64, u16, u16, Polarity) {
        (self.t_us, self.y, self.x, self.polarity)
    }
}

/// Events order by `(t, y, x, polarity)`.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventTally {
    pub on: usize,
    pub off: usize,
}

impl EventTally {
    pub fn of(events: &[Event]) -> Self {
        events.iter().fold(EventTally::default(), |mut t, e| {
            match e.polarity {
                Polarity::On => t.on += 1,
                Polarity::Off => t.off += 1,
            }
            t
        })
    }

    pub fn total(&self) -> usize {
        self.on + self.off
    }
}

/// Change detector for one cell, driven by piecewise-constant luminance.
///
/// Crossing times inside a segment are solved from the closed-form
/// exponential, so timestamps do not depend on any sampling step.
#[derive(Debug, Clone)]
pub struct ChangeDetector {
    value: f64,
    reference_u: f64,
    t_us: f64,
    threshold_u: f64,
    cone: ConeParams,
}

impl ChangeDetector {
    pub fn new(initial_value: f64, t_us: f64, threshold_u: f64, cone: ConeParams) -> Result<Self> {
        positive("threshold_u", threshold_u)?;
        let value = initial_value.max(0.0);
        Ok(ChangeDetector { value, reference_u: transduce(value, &cone), t_us, threshold_u, cone })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn reference_u(&self) -> f64 {
        self.reference_u
    }

    pub fn t_us(&self) -> f64 {
        self.t_us
    }

    /// Holds `input` for `dt_us`, calling `emit(t_us, polarity)` for every
    /// level crossed, in time order.
    pub fn advance(&mut self, input: f64, dt_us: f64, mut emit: impl FnMut(f64, Polarity)) {
        if dt_us <= 0.0 {
            return;
        }
        let tau = self.cone.tau_us;
        let start = self.value;
        let end = relax(start, input, dt_us, tau);
        let u_end = transduce(end, &self.cone);

        let (cone, t0) = (self.cone, self.t_us);
        let crossing = |level: f64| -> f64 {
            let target = cone.luminance_for_drive(level);
            let frac = (target - input) / (start - input);
            let dt = if frac > 0.0 && frac <= 1.0 { -tau * frac.ln() } else { dt_us };
            t0 + dt.clamp(0.0, dt_us)
        };

        while u_end >= self.reference_u + self.threshold_u - LEVEL_EPSILON {
            let level = self.reference_u + self.threshold_u;
            emit(crossing(level), Polarity::On);
            self.reference_u = level;
        }
        while u_end <= self.reference_u - self.threshold_u + LEVEL_EPSILON {
            let level = self.reference_u - self.threshold_u;
            emit(crossing(level), Polarity::Off);
            self.reference_u = level;
        }

        self.value = end;
        self.t_us += dt_us;
    }
}

/// Events of one cell over `[0, duration_us]`, starting from its settled
/// (periodic steady) state.
pub fn cell_events(
    cell: &CellProgram,
    x: u16,
    y: u16,
    duration_us: f64,
    cone: &ConeParams,
    threshold_u: f64,
) -> Result<Vec<Event>> {
    let mut out = Vec::new();
    if let CellProgram::Steady { .. } = cell {
        // Constant input at its own equilibrium never moves.
        return Ok(out);
    }
    let mut det = ChangeDetector::new(settled_value(cell, 0.0, cone), 0.0, threshold_u, *cone)?;
    for (level, dt) in cell.segments(duration_us) {
        det.advance(level, dt, |t, polarity| {
            out.push(Event { t_us: t.round() as u64, x, y, polarity });
        });
    }
    Ok(out)
}

/// ON/OFF events for every cell, sorted by `(t, y, x, polarity)`.
pub fn event_stream(
    program: &StimulusProgram,
    cone: &ConeParams,
    threshold_u: f64,
    exec: Execution,
) -> Result<Vec<Event>> {
    positive("threshold_u", threshold_u)?;
    if program.width() > usize::from(u16::MAX) + 1 || program.height() > usize::from(u16::MAX) + 1 {
        return Err(Error::InvalidParameter { what: "grid size", value: program.width().max(program.height()) as f64 });
    }
    let cells = program.cells();
    let duration = program.duration_us();
    let per_cell = exec.try_map_range(cells.len(), |i| {
        let (x, y) = cells.coords_of(i);
        cell_events(&cells.as_slice()[i], x as u16, y as u16, duration, cone, threshold_u)
    })?;
    let mut events: Vec<Event> = per_cell.into_iter().flatten().collect();
    events.sort_unstable();
    Ok(events)
}
