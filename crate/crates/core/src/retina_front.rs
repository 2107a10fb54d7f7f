//! Photoreceptor front end.
//!
//! Each cell low-pass filters its *linear* luminance with a first-order
//! integrator and only then compresses the result logarithmically into a
//! light drive `u` in `[0, 1]`. Because averaging precedes the nonlinearity,
//! a fused flash train and a steady light of equal mean produce the same
//! drive, which is how flicker fusion and the Talbot-Plateau law fall out of
//! the model rather than being imposed on it.
//!
//! Periodic rectangular input is handled segment by segment with the exact
//! exponential update, so 1 µs flashes inside 41 ms cycles cost the same as
//! any other flash train.

use std::fmt;
use std::str::FromStr;

use crate::error::{non_negative, positive, Error, Result};
use crate::exec::Execution;
use crate::lateral::DriveField;
use crate::stimulus::{CellProgram, FlickerSpec, StimulusProgram};

/// Named display calibrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    /// 24 Hz trains with flashes from 1 to 10,000 µs are seen as steady.
    Fig1Display,
    /// Letters on a steady background fuse at 50 Hz and above.
    #[default]
    Fig5Display,
}

impl Profile {
    pub const ALL: [Profile; 2] = [Profile::Fig1Display, Profile::Fig5Display];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Fig1Display => "fig1_display",
            Profile::Fig5Display => "fig5_display",
        }
    }

    pub fn cone_params(self) -> ConeParams {
        let tau_us = match self {
            Profile::Fig1Display => 1_000_000.0,
            Profile::Fig5Display => 250_000.0,
        };
        ConeParams { tau_us, ..ConeParams::base() }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::UnknownName { what: "profile", name: s.trim().to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    pub tau_us: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub ripple_fusion_threshold: f64,
}

impl ConeParams {
    fn base() -> Self {
        ConeParams { tau_us: 250_000.0, l_min: 1e-3, l_max: 1e4, ripple_fusion_threshold: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        positive("cone.tau_us", self.tau_us)?;
        positive("cone.l_min", self.l_min)?;
        positive("cone.l_max", self.l_max)?;
        if self.l_max <= self.l_min {
            return Err(Error::InvalidParameter { what: "cone.l_max", value: self.l_max });
        }
        let r = self.ripple_fusion_threshold;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter { what: "cone.ripple_threshold", value: r });
        }
        Ok(())
    }

    /// Operating range in decades.
    pub fn span_decades(&self) -> f64 {
        (self.l_max / self.l_min).log10()
    }

    /// Luminance that transduces to `u` (inverse of [`transduce`] inside the rails).
    pub fn luminance_for_drive(&self, u: f64) -> f64 {
        self.l_min * 10f64.powf(u.clamp(0.0, 1.0) * self.span_decades())
    }
}

impl Default for ConeParams {
    fn default() -> Self {
        Profile::default().cone_params()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeState {
    pub integrator_value: f64,
    pub last_t_us: f64,
}

impl ConeState {
    /// Integrator already settled on `luminance`.
    pub fn at_rest(luminance: f64, t_us: f64) -> Self {
        ConeState { integrator_value: luminance.max(0.0), last_t_us: t_us }
    }
}

/// Exact first-order response to input held at `input` for `dt_us`.
#[inline]
pub fn relax(value: f64, input: f64, dt_us: f64, tau_us: f64) -> f64 {
    let gain = -(-dt_us / tau_us).exp_m1();
    value + gain * (input - value)
}

/// Advances the integrator to `t_us` assuming `input_luminance` was held
/// constant since the previous update.
pub fn integrate_step(state: ConeState, input_luminance: f64, t_us: f64, params: &ConeParams) -> Result<ConeState> {
    if !(t_us > state.last_t_us) {
        return Err(Error::NonMonotonicTime { t_us, last_t_us: state.last_t_us });
    }
    let input = non_negative("input_luminance", input_luminance)?;
    let v = relax(state.integrator_value, input, t_us - state.last_t_us, params.tau_us);
    Ok(ConeState { integrator_value: v.max(0.0), last_t_us: t_us })
}

/// Log compression of a mean luminance onto `[0, 1]` between the rails.
pub fn transduce(mean_luminance: f64, params: &ConeParams) -> f64 {
    let l = mean_luminance.max(params.l_min);
    ((l.log10() - params.l_min.log10()) / params.span_decades()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateStats {
    /// Cycle-averaged integrator output.
    pub mean: f64,
    /// `(max - min) / mean` over one settled cycle.
    pub ripple: f64,
    pub min: f64,
    pub max: f64,
}

/// One flash cycle viewed as an affine map on the integrator value at onset.
#[derive(Debug, Clone, Copy)]
struct CycleMap {
    intensity: f64,
    on_us: f64,
    off_us: f64,
    tau_us: f64,
}

impl CycleMap {
    fn new(spec: &FlickerSpec, tau_us: f64) -> Self {
        let on_us = spec.flash_duration_us();
        CycleMap { intensity: spec.flash_intensity(), on_us, off_us: (spec.period_us() - on_us).max(0.0), tau_us }
    }

    fn period_us(&self) -> f64 {
        self.on_us + self.off_us
    }

    /// Onset value after `cycles` full cycles starting from `v0`.
    fn jump(&self, v0: f64, cycles: f64) -> f64 {
        let gain_on = -(-self.on_us / self.tau_us).exp_m1();
        let decay_off = (-self.off_us / self.tau_us).exp();
        let offset = self.intensity * gain_on * decay_off;
        // v_n = A^n v0 + B (1 - A^n) / (1 - A)
        let total_decay = (-cycles * self.period_us() / self.tau_us).exp();
        let settled_fraction = -(-cycles * self.period_us() / self.tau_us).exp_m1();
        let one_minus_decay = -(-self.period_us() / self.tau_us).exp_m1();
        total_decay * v0 + offset * settled_fraction / one_minus_decay
    }

    /// Exact fixed point of the cycle map: integrator value at flash onset.
    fn orbit_onset(&self) -> f64 {
        self.jump(0.0, f64::INFINITY)
    }

    fn peak_from(&self, onset: f64) -> f64 {
        relax(onset, self.intensity, self.on_us, self.tau_us)
    }

    /// Integrator value `pos_us` into a settled cycle.
    fn orbit_at(&self, pos_us: f64) -> f64 {
        let onset = self.orbit_onset();
        if pos_us < self.on_us {
            relax(onset, self.intensity, pos_us, self.tau_us)
        } else {
            relax(self.peak_from(onset), 0.0, pos_us - self.on_us, self.tau_us)
        }
    }

    /// Mean, min and max of the integrator over one cycle started at `onset`.
    fn measure(&self, onset: f64) -> SteadyStateStats {
        let tau = self.tau_us;
        let i = self.intensity;
        let peak = self.peak_from(onset);
        let end = relax(peak, 0.0, self.off_us, tau);
        // Closed-form integral of the exponential relaxation on each segment.
        let on_area = i * self.on_us + (onset - i) * tau * -(-self.on_us / tau).exp_m1();
        let off_area = peak * tau * -(-self.off_us / tau).exp_m1();
        let mean = (on_area + off_area) / self.period_us();
        let max = peak.max(onset).max(end);
        let min = onset.min(end).min(peak);
        let ripple = if mean > 0.0 { (max - min) / mean } else { 0.0 };
        SteadyStateStats { mean, ripple, min, max }
    }
}

/// Statistics of one cycle once the integrator has settled onto its
/// periodic orbit. The orbit is the fixed point of the cycle map, i.e. the
/// limit of integrating from darkness for arbitrarily many cycles.
pub fn steady_state_stats(spec: &FlickerSpec, params: &ConeParams) -> SteadyStateStats {
    let map = CycleMap::new(spec, params.tau_us);
    let onset = if map.off_us == 0.0 {
        // DC input: the settled state is the input itself.
        map.intensity
    } else {
        map.orbit_onset()
    };
    map.measure(onset)
}

/// Same statistics after integrating from darkness for `cycles` whole
/// cycles, for checking how quickly the orbit is reached.
pub fn stats_after_cycles(spec: &FlickerSpec, params: &ConeParams, cycles: f64) -> SteadyStateStats {
    let map = CycleMap::new(spec, params.tau_us);
    map.measure(map.jump(0.0, cycles))
}

pub fn is_fused(spec: &FlickerSpec, params: &ConeParams) -> bool {
    steady_state_stats(spec, params).ripple < params.ripple_fusion_threshold
}

/// Integrator value at `t_us` for a cell that has been on its periodic
/// orbit forever.
pub fn settled_value(program: &CellProgram, t_us: f64, params: &ConeParams) -> f64 {
    match program {
        CellProgram::Steady { luminance } => *luminance,
        CellProgram::Flicker { spec } => {
            let map = CycleMap::new(spec, params.tau_us);
            map.orbit_at(spec.cycle_position_us(t_us))
        }
    }
}

/// Fused drive for one cell program.
pub fn cell_drive(program: &CellProgram, params: &ConeParams) -> Result<f64> {
    match program {
        CellProgram::Steady { luminance } => Ok(transduce(*luminance, params)),
        CellProgram::Flicker { spec } => {
            let stats = steady_state_stats(spec, params);
            if stats.ripple >= params.ripple_fusion_threshold {
                return Err(Error::NotFused {
                    frequency_hz: spec.frequency_hz(),
                    ripple: stats.ripple,
                    threshold: params.ripple_fusion_threshold,
                });
            }
            Ok(transduce(stats.mean, params))
        }
    }
}

/// Drive of every cell once the integrators have settled. Fails if any
/// flickering cell is below fusion.
pub fn drive_field(program: &StimulusProgram, params: &ConeParams, exec: Execution) -> Result<DriveField> {
    let cells = program.cells();
    let values = exec.try_map_range(cells.len(), |i| cell_drive(&cells.as_slice()[i], params))?;
    DriveField::new(program.width(), program.height(), program.pixel_pitch_um(), values)
}
