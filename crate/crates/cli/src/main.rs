//! `retina-duo` command-line driver.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numeric failure
//! (no convergence, or an unfused row under `--strict`).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use retina_duo::config::PROFILE_ENV;
use retina_duo::io::tables::{write_curve, write_match_table, write_predictions};
use retina_duo::io::{format_sig9, write_events, write_events_csv, Document};
use retina_duo::psychophys::{identification_curve, log_sweep, prediction_table, LetterExperiment};
use retina_duo::retina_front::steady_state_stats;
use retina_duo::talbot::octave_levels;
use retina_duo::{
    event_stream, load_stimulus, matching_flash_intensity, Error, EventTally, Execution, FlickerSpec, Glyph, Profile,
    RunConfig,
};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "retina-duo", version, about = "Flicker-fusion retina simulator experiments")]
struct Cli {
    /// Parameter profile (fig1_display, fig5_display). Falls back to the
    /// config file, then $RETINA_DUO_PROFILE.
    #[arg(long, global = true)]
    profile: Option<Profile>,
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form matching intensity for one condition.
    Predict {
        #[arg(long)]
        steady: f64,
        #[arg(long)]
        freq: f64,
        #[arg(long)]
        duration_us: f64,
    },
    /// Simulated brightness matches over a sweep.
    Match(MatchArgs),
    /// Letter identification curves against steady backgrounds.
    Letters(LettersArgs),
    /// ON/OFF event stream for a stimulus file.
    Events(EventsArgs),
    /// Ripple and fusion flag for one flicker condition.
    FuseCheck {
        #[arg(long)]
        freq: f64,
        #[arg(long, conflicts_with = "duty")]
        duration_us: Option<f64>,
        #[arg(long)]
        duty: Option<f64>,
    },
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    freq: Vec<f64>,
    #[arg(long)]
    duration_us: Vec<f64>,
    #[arg(long, conflicts_with = "base")]
    steady: Vec<f64>,
    /// Base luminance of an octave sweep.
    #[arg(long)]
    base: Option<f64>,
    #[arg(long, default_value_t = 5)]
    octaves: usize,
    /// File with a `[sweep]` section: frequencies, durations_us, steady.
    #[arg(long, conflicts_with_all = ["freq", "duration_us", "steady", "base"])]
    sweep_file: Option<PathBuf>,
    /// Output CSV; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 3 if any row is below fusion.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct LettersArgs {
    #[arg(long, default_value = "E")]
    glyph: String,
    #[arg(long)]
    bg: Vec<f64>,
    #[arg(long, default_value_t = 250.0)]
    freq: f64,
    #[arg(long, conflicts_with = "duration_us")]
    duty: Option<f64>,
    #[arg(long)]
    duration_us: Option<f64>,
    /// Observer noise sigma (drive units).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Sweep covers balance / span .. balance * span.
    #[arg(long, default_value_t = 2.0)]
    span: f64,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EventsArgs {
    #[arg(long)]
    stimulus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Write CSV instead of the binary format.
    #[arg(long)]
    csv: bool,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::NotFused { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let fallback = match cli.command {
        Command::Match(_) => Profile::Fig1Display,
        _ => Profile::Fig5Display,
    };
    let env = std::env::var(PROFILE_ENV).ok();
    if let Some(name) = env.as_deref().filter(|s| !s.trim().is_empty()) {
        name.parse::<Profile>().map_err(|_| Failure::Usage(format!("{PROFILE_ENV}: unknown profile {name:?}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load_or(path, cli.profile, env.as_deref(), fallback)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => RunConfig::resolve_or(cli.profile, None, env.as_deref(), fallback)?,
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };

    match cli.command {
        Command::Predict { steady, freq, duration_us } => predict(steady, freq, duration_us),
        Command::Match(args) => run_match(&cfg, args, exec),
        Command::Letters(args) => letters(&cfg, args, exec),
        Command::Events(args) => events(&cfg, args, exec),
        Command::FuseCheck { freq, duration_us, duty } => fuse_check(&cfg, freq, duration_us, duty),
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn predict(steady: f64, freq: f64, duration_us: f64) -> Outcome {
    let row = matching_flash_intensity(steady, freq, duration_us)?;
    write_predictions(output(None)?, &[row])?;
    Ok(())
}

/// Frequencies, durations and steady levels.
type Sweep = (Vec<f64>, Vec<f64>, Vec<f64>);

fn sweep_from_file(path: &Path) -> Result<Sweep, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let doc = Document::parse(&text)?;
    doc.reject_unknown(&["sweep.frequencies", "sweep.durations_us", "sweep.steady"])?;
    let list = |key| doc.parse_list::<f64>(key).map(Option::unwrap_or_default);
    Ok((list("sweep.frequencies")?, list("sweep.durations_us")?, list("sweep.steady")?))
}

fn run_match(cfg: &RunConfig, args: MatchArgs, exec: Execution) -> Outcome {
    let (freqs, durations, levels) = match &args.sweep_file {
        Some(path) => sweep_from_file(path)?,
        None => {
            let freqs = if args.freq.is_empty() { vec![24.0] } else { args.freq };
            let durations =
                if args.duration_us.is_empty() { vec![1.0, 10.0, 100.0, 1000.0, 10_000.0] } else { args.duration_us };
            let levels = if args.steady.is_empty() {
                octave_levels(args.base.unwrap_or(1.0), args.octaves)?
            } else {
                args.steady
            };
            (freqs, durations, levels)
        }
    };
    let rows = prediction_table(&freqs, &durations, &levels, &cfg.cone, exec)?;
    write_match_table(output(args.out.as_deref())?, &rows)?;
    let unfused = rows.iter().filter(|r| !r.fused).count();
    if unfused > 0 {
        eprintln!("{unfused} of {} conditions below fusion (profile {})", rows.len(), cfg.profile);
        if args.strict {
            return Err(Failure::Numeric(format!("{unfused} unfused conditions")));
        }
    }
    Ok(())
}

fn letters(cfg: &RunConfig, args: LettersArgs, exec: Execution) -> Outcome {
    let mut chars = args.glyph.chars();
    let glyph = match (chars.next(), chars.next()) {
        (Some(c), None) => Glyph::letter(c)?,
        _ => return Err(Failure::Usage(format!("glyph must be a single letter, got {:?}", args.glyph))),
    };
    let duration_us = match (args.duration_us, args.duty) {
        (Some(d), _) => d,
        (None, duty) => duty.unwrap_or(0.5) * 1e6 / args.freq,
    };
    let backgrounds = if args.bg.is_empty() { vec![4.0, 8.0, 12.0] } else { args.bg };
    let mut observer = cfg.observer;
    if let Some(sigma) = args.noise {
        observer.noise_sigma_u = sigma;
    }
    if args.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let out_dir = args.out_dir.unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&out_dir)?;

    let mut stdout = io::stdout().lock();
    for bg in backgrounds {
        let mut exp = LetterExperiment::new(glyph.clone(), args.freq, duration_us, bg).with_grid(args.grid, args.grid);
        exp.cone = cfg.cone;
        exp.surround = cfg.surround;
        let balance = exp.balance_intensity()?;
        let sweep = log_sweep(balance, args.span, args.points);
        let curve = identification_curve(&exp, &sweep, &observer, args.trials, exec)?;
        let path = out_dir.join(format!("letters_{}_bg{}.csv", glyph.char(), format_sig9(bg)));
        write_curve(output(Some(&path))?, &curve.points)?;
        writeln!(
            stdout,
            "bg={} balance={} crossover={} deviation={:.3}% file={}",
            format_sig9(bg),
            format_sig9(balance),
            format_sig9(curve.crossover_intensity),
            100.0 * curve.crossover_deviation(),
            path.display()
        )?;
    }
    Ok(())
}

fn events(cfg: &RunConfig, args: EventsArgs, exec: Execution) -> Outcome {
    let stimulus = args
        .stimulus
        .or_else(|| cfg.stimulus.clone())
        .ok_or_else(|| Failure::Usage("no stimulus file (use --stimulus or `stimulus =` in the config)".into()))?;
    let program = load_stimulus(&stimulus).map_err(|e| Failure::Usage(format!("{}: {e}", stimulus.display())))?;
    let threshold = args.threshold.unwrap_or(cfg.event_threshold_u);
    let events = event_stream(&program, &cfg.cone, threshold, exec)?;
    let default_name = if args.csv { "events.csv" } else { "events.rduo" };
    let out = args.out.unwrap_or_else(|| cfg.output_dir.join(default_name));
    let w = output(Some(&out))?;
    if args.csv {
        write_events_csv(w, &events)?;
    } else {
        write_events(w, &events)?;
    }
    let tally = EventTally::of(&events);
    println!("events={} on={} off={} file={}", tally.total(), tally.on, tally.off, out.display());
    Ok(())
}

fn fuse_check(cfg: &RunConfig, freq: f64, duration_us: Option<f64>, duty: Option<f64>) -> Outcome {
    let spec = match (duration_us, duty) {
        (Some(d), _) => FlickerSpec::new(freq, d, 1.0, 0.0)?,
        (None, Some(duty)) => FlickerSpec::with_duty(freq, duty, 1.0, 0.0)?,
        (None, None) => return Err(Failure::Usage("one of --duration-us or --duty is required".into())),
    };
    let stats = steady_state_stats(&spec, &cfg.cone);
    let threshold = cfg.cone.ripple_fusion_threshold;
    let mut out = io::stdout().lock();
    writeln!(out, "frequency_hz,duty,ripple,threshold,fused,profile")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        format_sig9(freq),
        format_sig9(spec.duty()),
        format_sig9(stats.ripple),
        format_sig9(threshold),
        stats.ripple < threshold,
        cfg.profile
    )?;
    Ok(())
}
