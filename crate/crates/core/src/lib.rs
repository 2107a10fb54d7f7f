//! Dual-channel retinal encoding of luminance and contrast.
//!
//! The pipeline runs from display to observer:
//!
//! 1. [`stimulus`] builds steady fields, rectangular flash trains and
//!    flicker-fused letters on an LED-array-like grid.
//! 2. [`talbot`] gives the closed-form time-averaged luminance of a flash
//!    train and the flash intensity that balances a steady light.
//! 3. [`retina_front`] integrates linear luminance per cell and compresses
//!    the settled mean into a light drive in `[0, 1]`.
//! 4. [`lateral`] pools each cell's surround and splits the center-surround
//!    difference into rectified bright and dark contrast.
//! 5. [`channels`] maps drives and contrasts onto complementary bright/dark
//!    rates and emits ON/OFF change events.
//! 6. [`psychophys`] runs simulated brightness-matching and letter
//!    identification experiments on top of the pipeline.
//!
//! Data-parallel loops take an [`Execution`]; the `parallel` feature (on by
//! default) backs [`Execution::Parallel`] with rayon.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod config;
pub mod error;
pub mod exec;
mod font;
pub mod grid;
pub mod io;
pub mod lateral;
pub mod psychophys;
pub mod retina_front;
pub mod stimulus;
pub mod talbot;

pub use channels::{encode_contrast, encode_luminance, event_stream, ChannelParams, Event, EventTally, Polarity};
pub use config::{load_stimulus, parse_stimulus, RunConfig};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::Grid;
pub use lateral::{and_not, contrast_fields, contrast_pair, surround_average, DriveField, SurroundParams, Weighting};
pub use psychophys::{
    identification_curve, prediction_table, run_letter_trial, simulate_brightness_match, LetterExperiment,
    ObserverParams,
};
pub use retina_front::{integrate_step, is_fused, steady_state_stats, transduce, ConeParams, ConeState, Profile};
pub use stimulus::{make_flicker, render_letter_program, CellProgram, FlickerSpec, Glyph, StimulusProgram};
pub use talbot::{average_luminance, balance_intensity, duty_cycle, matching_flash_intensity, MatchPrediction};
