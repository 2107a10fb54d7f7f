//! Run configuration and stimulus description files.

use std::path::{Path, PathBuf};

use crate::channels::{ChannelParams, DEFAULT_EVENT_THRESHOLD_U};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io::Document;
use crate::lateral::{SurroundParams, Weighting};
use crate::psychophys::{FigureStatistic, ObserverParams};
use crate::retina_front::{ConeParams, Profile};
use crate::stimulus::{render_letter_program, CellProgram, FlickerSpec, Glyph, StimulusProgram};

/// Environment variable naming the default profile.
pub const PROFILE_ENV: &str = "RETINA_DUO_PROFILE";

const CONFIG_KEYS: &[&str] = &[
    "profile",
    "seed",
    "stimulus",
    "output_dir",
    "cone.tau_us",
    "cone.l_min",
    "cone.l_max",
    "cone.ripple_threshold",
    "surround.center_um",
    "surround.radius_um",
    "surround.weighting",
    "surround.include_center",
    "channel.r_max",
    "channel.r_spont",
    "channel.contrast_gain",
    "observer.id_threshold_u",
    "observer.noise_sigma_u",
    "observer.contrast_scale",
    "observer.statistic",
    "events.threshold_u",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: Profile,
    pub stimulus: Option<PathBuf>,
    pub cone: ConeParams,
    pub surround: SurroundParams,
    pub channel: ChannelParams,
    pub observer: ObserverParams,
    pub event_threshold_u: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let observer = ObserverParams::default();
        RunConfig {
            profile,
            stimulus: None,
            cone: profile.cone_params(),
            surround: SurroundParams::default(),
            channel: ChannelParams::default(),
            observer,
            event_threshold_u: DEFAULT_EVENT_THRESHOLD_U,
            output_dir: PathBuf::from("."),
            seed: observer.seed,
        }
    }

    /// Profile from `explicit`, else the config document, else the
    /// environment, else the built-in default; then the document's overrides.
    pub fn resolve(explicit: Option<Profile>, doc: Option<&Document>, env_profile: Option<&str>) -> Result<Self> {
        RunConfig::resolve_or(explicit, doc, env_profile, Profile::default())
    }

    /// As [`resolve`](Self::resolve) with `fallback` in place of the
    /// built-in default.
    pub fn resolve_or(
        explicit: Option<Profile>,
        doc: Option<&Document>,
        env_profile: Option<&str>,
        fallback: Profile,
    ) -> Result<Self> {
        let from_doc = doc.map(|d| d.parse_value::<Profile>("profile")).transpose()?.flatten();
        let from_env = env_profile.filter(|s| !s.trim().is_empty()).map(str::parse::<Profile>).transpose()?;
        let profile = explicit.or(from_doc).or(from_env).unwrap_or(fallback);
        let mut cfg = RunConfig::for_profile(profile);
        if let Some(doc) = doc {
            cfg.apply(doc)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, explicit: Option<Profile>, env_profile: Option<&str>) -> Result<Self> {
        RunConfig::load_or(path, explicit, env_profile, Profile::default())
    }

    /// Reads a config file; a relative `stimulus` path is taken relative to
    /// the file.
    pub fn load_or(
        path: &Path,
        explicit: Option<Profile>,
        env_profile: Option<&str>,
        fallback: Profile,
    ) -> Result<Self> {
        let doc = Document::parse(&std::fs::read_to_string(path)?)?;
        let mut cfg = RunConfig::resolve_or(explicit, Some(&doc), env_profile, fallback)?;
        if let Some(stim) = &cfg.stimulus {
            if stim.is_relative() {
                cfg.stimulus = Some(path.parent().unwrap_or(Path::new(".")).join(stim));
            }
        }
        Ok(cfg)
    }

    /// Applies every override present in `doc` and validates the result.
    pub fn apply(&mut self, doc: &Document) -> Result<()> {
        doc.reject_unknown(CONFIG_KEYS)?;
        macro_rules! set {
            ($key:literal, $field:expr) => {
                if let Some(v) = doc.parse_value($key)? {
                    $field = v;
                }
            };
        }
        set!("seed", self.seed);
        set!("cone.tau_us", self.cone.tau_us);
        set!("cone.l_min", self.cone.l_min);
        set!("cone.l_max", self.cone.l_max);
        set!("cone.ripple_threshold", self.cone.ripple_fusion_threshold);
        set!("surround.center_um", self.surround.center_radius_um);
        set!("surround.radius_um", self.surround.surround_radius_um);
        set!("surround.include_center", self.surround.include_center);
        set!("channel.r_max", self.channel.r_max);
        set!("channel.r_spont", self.channel.r_spont);
        set!("channel.contrast_gain", self.channel.contrast_gain);
        set!("observer.id_threshold_u", self.observer.id_threshold_u);
        set!("observer.noise_sigma_u", self.observer.noise_sigma_u);
        set!("observer.contrast_scale", self.observer.contrast_scale);
        set!("events.threshold_u", self.event_threshold_u);
        if let Some(w) = doc.get("surround.weighting") {
            self.surround.weighting = w.parse::<Weighting>().map_err(|_| Error::Parse {
                line: doc.line_of("surround.weighting"),
                message: format!("unknown weighting {w:?}"),
            })?;
        }
        if let Some(s) = doc.get("observer.statistic") {
            self.observer.statistic = match s {
                "mean" => FigureStatistic::Mean,
                "max" | "max_abs" => FigureStatistic::MaxAbs,
                other => {
                    return Err(Error::Parse {
                        line: doc.line_of("observer.statistic"),
                        message: format!("unknown statistic {other:?}"),
                    })
                }
            };
        }
        if let Some(s) = doc.get("stimulus") {
            self.stimulus = Some(PathBuf::from(s));
        }
        if let Some(s) = doc.get("output_dir") {
            self.output_dir = PathBuf::from(s);
        }
        self.observer.seed = self.seed;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.cone.validate()?;
        self.surround.validate()?;
        self.channel.validate()?;
        self.observer.validate()?;
        if !(self.event_threshold_u > 0.0) {
            return Err(Error::InvalidParameter { what: "events.threshold_u", value: self.event_threshold_u });
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.observer.seed = seed;
        self
    }
}

const STIMULUS_KEYS: &[&str] = &[
    "grid.width",
    "grid.height",
    "grid.pixel_pitch_um",
    "grid.duration_us",
    "background.luminance",
    "flicker.frequency_hz",
    "flicker.flash_duration_us",
    "flicker.duty",
    "flicker.flash_intensity",
    "flicker.phase_us",
    "glyph.letter",
    "glyph.scale",
];

/// Parses a stimulus description:
///
/// ```text
/// [grid]
/// width = 64
/// height = 64
/// pixel_pitch_um = 50
/// duration_us = 1000000
///
/// [background]
/// luminance = 8
///
/// [flicker]
/// frequency_hz = 250
/// duty = 0.5              # or flash_duration_us = 2000
/// flash_intensity = 16
/// phase_us = 0
///
/// [glyph]
/// letter = E
/// scale = 1
/// ```
///
/// Without `[flicker]` the field is steady. With `[flicker]` but no
/// `[glyph]` every cell flickers; with both, only the letter does.
pub fn parse_stimulus(text: &str) -> Result<StimulusProgram> {
    let doc = Document::parse(text)?;
    doc.reject_unknown(STIMULUS_KEYS)?;
    let width = doc.parse_value::<usize>("grid.width")?.unwrap_or(64);
    let height = doc.parse_value::<usize>("grid.height")?.unwrap_or(64);
    let pitch = doc.parse_value::<f64>("grid.pixel_pitch_um")?.unwrap_or(50.0);
    let duration = doc.parse_value::<f64>("grid.duration_us")?.unwrap_or(1e6);
    let background = doc.parse_value::<f64>("background.luminance")?.unwrap_or(0.0);

    let flicker = if doc.has_section("flicker") {
        let f: f64 = doc.parse_value("flicker.frequency_hz")?.ok_or(Error::MissingKey("flicker.frequency_hz"))?;
        let intensity = doc.parse_value::<f64>("flicker.flash_intensity")?.unwrap_or(0.0);
        let phase = doc.parse_value::<f64>("flicker.phase_us")?.unwrap_or(0.0);
        let spec = match (doc.parse_value::<f64>("flicker.flash_duration_us")?, doc.parse_value::<f64>("flicker.duty")?)
        {
            (Some(d), None) => FlickerSpec::new(f, d, intensity, phase)?,
            (None, Some(duty)) => FlickerSpec::with_duty(f, duty, intensity, phase)?,
            _ => {
                return Err(Error::Parse {
                    line: doc.line_of("flicker.frequency_hz"),
                    message: "[flicker] needs exactly one of flash_duration_us or duty".into(),
                })
            }
        };
        Some(spec)
    } else {
        None
    };

    let glyph = match doc.get("glyph.letter") {
        None => None,
        Some(l) => {
            let mut chars = l.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(Error::Parse { line: doc.line_of("glyph.letter"), message: format!("bad letter {l:?}") });
            };
            let scale = doc.parse_value::<usize>("glyph.scale")?.unwrap_or(1);
            Some(Glyph::letter(c)?.scaled(scale))
        }
    };

    match (flicker, glyph) {
        (None, _) => StimulusProgram::uniform(width, height, background, pitch, duration),
        (Some(spec), Some(glyph)) => render_letter_program(&glyph, &spec, background, width, height, pitch, duration),
        (Some(spec), None) => {
            StimulusProgram::new(Grid::filled(width, height, CellProgram::Flicker { spec }), pitch, duration)
        }
    }
}

pub fn load_stimulus(path: &Path) -> Result<StimulusProgram> {
    parse_stimulus(&std::fs::read_to_string(path)?)
}
