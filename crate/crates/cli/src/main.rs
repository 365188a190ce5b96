//! `szt-bss`: generate, mix, separate and score signals from the shell.
//!
//! Exit status is 0 on success, 1 on a usage error and 2 when a run fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use szt_core::pipeline::{write_json, DEFAULT_BURN_IN_TOL, RECOVERED_CSV};
use szt_core::{
    gen_gauss_pulse_train, gen_qpsk, gen_wgn, match_and_score, mix, random_mixer, read_csv,
    run_experiment, sample_z, szt_bss_separate, write_csv, CorrelationReport, Error,
    ExperimentConfig, JadeOptions, MultiSignal, PulseOrder, Seed, SeparationMeta, SztParams,
};

const SEPARATION_JSON: &str = "separation.json";

#[derive(Debug, Parser)]
#[command(
    name = "szt-bss",
    version,
    about = "Sliding Z transform blind source separation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one synthetic source as a single-channel CSV.
    Generate(GenerateArgs),
    /// Convolutively mix source channels with a random mixer.
    Mix(MixArgs),
    /// Separate mixtures; writes recovered.csv and separation.json.
    Separate(SeparateArgs),
    /// Score recovered channels against reference sources.
    Evaluate(EvaluateArgs),
    /// Run a preset experiment end to end.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Qpsk,
    Gpulse,
    Wgn,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// QPSK samples per symbol.
    #[arg(long, default_value_t = 8)]
    sps: usize,
    /// QPSK carrier in cycles per sample.
    #[arg(long, default_value_t = 0.1)]
    carrier: f64,
    /// Gaussian derivative order (1 or 2).
    #[arg(long, default_value_t = 1)]
    order: u32,
    #[arg(long, default_value_t = 5)]
    pulses: usize,
    /// Pulse width in samples.
    #[arg(long, default_value_t = 20.0)]
    width: f64,
    /// White noise variance.
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MixArgs {
    /// Source CSVs; their channels are stacked in order.
    #[arg(long, num_args = 1.., required = true)]
    sources: Vec<PathBuf>,
    /// Number of mixing paths L.
    #[arg(long, default_value_t = 2)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the mixer as JSON.
    #[arg(long)]
    mixer_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SeparateArgs {
    #[arg(long)]
    mixtures: PathBuf,
    /// Window length (a power of two unless --allow-any-win).
    #[arg(long)]
    win: usize,
    /// Transform point in (0, 1); drawn from --seed when absent.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BURN_IN_TOL)]
    burn_in_tol: f64,
    #[arg(long)]
    allow_any_win: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    recovered: PathBuf,
    /// Reference CSVs; their channels are stacked in order.
    #[arg(long, num_args = 1.., required = true)]
    sources: Vec<PathBuf>,
    /// Leading samples excluded from scoring.
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    id: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Samples per channel.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    win: Option<usize>,
    /// Channel SNR in dB; applied to every mixture channel.
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    allow_any_win: bool,
    /// First WAV source for experiment 1.
    #[arg(long)]
    wav1: Option<PathBuf>,
    /// Second WAV source for experiment 1.
    #[arg(long)]
    wav2: Option<PathBuf>,
    /// Run experiment 1 on synthetic noise bursts instead of WAV files.
    #[arg(long, conflicts_with_all = ["wav1", "wav2"])]
    synthetic_audio: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Mix(a) => mix_cmd(a),
        Command::Separate(a) => separate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let seed = Seed(a.seed);
    let signal = match a.kind {
        Kind::Qpsk => gen_qpsk(a.n, a.sps, a.carrier, seed),
        Kind::Gpulse => {
            let order = PulseOrder::from_order(a.order).map_err(usage)?;
            gen_gauss_pulse_train(a.n, order, a.pulses, a.width, seed)
        }
        Kind::Wgn => gen_wgn(a.n, a.variance, seed),
    }
    .map_err(usage)?;
    write_csv(&MultiSignal::new(vec![signal])?, &a.out)?;
    println!("wrote {} samples to {}", a.n, a.out.display());
    Ok(())
}

fn stack(paths: &[PathBuf]) -> CliResult<MultiSignal> {
    let mut channels = Vec::new();
    for p in paths {
        channels.extend(read_csv(p)?.into_channels());
    }
    Ok(MultiSignal::new(channels)?)
}

fn mix_cmd(a: MixArgs) -> CliResult<()> {
    let sources = stack(&a.sources)?;
    let mixer = random_mixer(sources.num_channels(), a.paths, Seed(a.seed)).map_err(usage)?;
    let mixtures = mix(&mixer, &sources)?;
    write_csv(&mixtures, &a.out)?;
    if let Some(path) = &a.mixer_out {
        write_json(&mixer, path)?;
    }
    println!(
        "mixed {} channels with {} paths into {}",
        sources.num_channels(),
        a.paths,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SeparationRecord<'a> {
    mixtures: &'a Path,
    seed: u64,
    z_sampled: bool,
    #[serde(flatten)]
    meta: &'a SeparationMeta,
    recovered: &'a str,
}

fn separate(a: SeparateArgs) -> CliResult<()> {
    let z = a.z.unwrap_or_else(|| sample_z(a.win, Seed(a.seed)));
    let params = if a.allow_any_win {
        SztParams::with_any_window(a.win, z)
    } else {
        SztParams::new(a.win, z)
    }
    .map_err(usage)?;
    if !(a.burn_in_tol > 0.0 && a.burn_in_tol <= 1.0) {
        return Err(Failure::Usage("--burn-in-tol must be in (0, 1]".into()));
    }
    let mixtures = read_csv(&a.mixtures)?;
    let sep = szt_bss_separate(&mixtures, &params, JadeOptions::default(), a.burn_in_tol)?;

    create_dir(&a.out)?;
    write_csv(&sep.recovered, a.out.join(RECOVERED_CSV))?;
    let record = SeparationRecord {
        mixtures: &a.mixtures,
        seed: a.seed,
        z_sampled: a.z.is_none(),
        meta: &sep.meta,
        recovered: RECOVERED_CSV,
    };
    write_json(&record, a.out.join(SEPARATION_JSON))?;
    println!(
        "z = {:.12} burn-in = {} jade sweeps = {} -> {}",
        sep.meta.z,
        sep.meta.burn_in,
        sep.meta.jade.sweeps,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvaluationRecord<'a> {
    burn_in: usize,
    min_matched: f64,
    #[serde(flatten)]
    correlation: &'a CorrelationReport,
}

fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let recovered = read_csv(&a.recovered)?;
    let sources = stack(&a.sources)?;
    let report = match_and_score(&recovered, &sources, a.burn_in)?;
    write_json(
        &EvaluationRecord {
            burn_in: a.burn_in,
            min_matched: report.min_matched(),
            correlation: &report,
        },
        &a.out,
    )?;
    println!("matched |C| = {}", fmt_scores(&report.matched_abs_corr));
    Ok(())
}

fn experiment(a: ExperimentArgs) -> CliResult<()> {
    let mut cfg = ExperimentConfig::preset(a.id, a.seed).map_err(usage)?;
    if a.id == 1 {
        match (&a.wav1, &a.wav2) {
            (Some(w1), Some(w2)) => cfg = cfg.with_wavs(w1, w2),
            _ if a.synthetic_audio => {}
            _ => {
                return Err(Failure::Usage(
                    "experiment 1 needs --wav1 and --wav2 (or --synthetic-audio)".into(),
                ))
            }
        }
    } else if a.wav1.is_some() || a.wav2.is_some() {
        cfg = match (&a.wav1, &a.wav2) {
            (Some(w1), Some(w2)) => cfg.with_wavs(w1, w2),
            _ => {
                return Err(Failure::Usage(
                    "--wav1 and --wav2 must be given together".into(),
                ))
            }
        };
    }
    if let Some(n) = a.n {
        cfg.n_samples = n;
    }
    if let Some(win) = a.win {
        cfg.win = win;
    }
    if let Some(snr) = a.snr_db {
        cfg.channel_snr_db = Some(snr);
    }
    if let Some(paths) = a.paths {
        cfg.paths = paths;
    }
    cfg.z = a.z.or(cfg.z);
    cfg.allow_any_win |= a.allow_any_win;
    cfg.validate().map_err(usage)?;

    create_dir(&a.out)?;
    let report = run_experiment(&cfg, &a.out)?;
    println!(
        "{}: seed {} z = {:.12}{} burn-in = {} matched |C| = {} -> {}",
        report.name,
        report.seed,
        report.z,
        if report.z_sampled { " (sampled)" } else { "" },
        report.burn_in,
        fmt_scores(&report.matched_abs_corr),
        a.out.display()
    );
    Ok(())
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| {
        Failure::Runtime(Error::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

fn fmt_scores(scores: &[f64]) -> String {
    scores
        .iter()
        .map(|c| format!("{c:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}
