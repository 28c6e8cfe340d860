//! `lmvr`: train, apply and analyse subword segmentations.

mod commands;
mod io;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lmvr_core::corpus::Dampening;
use lmvr_core::markers::MarkerScheme;

/// Morphology-aware subword segmentation with a target lexicon size.
#[derive(Debug, Parser)]
#[command(name = "lmvr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a segmentation model whose lexicon approaches a target size.
    Train(TrainArgs),
    /// Segment text with a trained model (LMVR or BPE, detected from the file).
    Segment(SegmentArgs),
    /// Learn BPE merge rules; prints merge and type counts.
    BpeTrain(BpeTrainArgs),
    /// Apply BPE merge rules, marking continuations with "@@".
    BpeApply(BpeApplyArgs),
    /// Join segmented text back into words.
    Detok(DetokArgs),
    /// Print corpus size statistics.
    Stats(StatsArgs),
    /// Compare two vocabulary listings.
    Overlap(OverlapArgs),
    /// Turn "root+Tag+Tag" analyses into "root +Tag +Tag <EOW>" tokens.
    ConvertAnalyses(ConvertArgs),
    /// Summarize a segmented text stream.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Streams {
    /// Input file; standard input when absent or "-".
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent or "-".
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training corpus, whitespace tokenized; standard input when absent or "-".
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Desired lexicon size (m2); alpha is set to types / m2.
    #[arg(long)]
    target_vocab: u64,
    /// Perplexity above which a morph looks like an affix.
    #[arg(long, default_value_t = 10.0)]
    ppl_threshold: f64,
    /// Length above which a morph looks like a stem.
    #[arg(long, default_value_t = 5.0)]
    len_threshold: f64,
    /// Steepness of the category sigmoids.
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    /// Upper bound on training epochs.
    #[arg(long, default_value_t = 15)]
    max_epochs: usize,
    /// Stop when an epoch improves the cost by less than this fraction.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Relative slack above the target before exit code 3 is returned.
    #[arg(long, default_value_t = 0.10)]
    size_tolerance: f64,
    /// Count transform applied before training: none, log or ones.
    #[arg(long, default_value_t = Dampening::None)]
    dampening: Dampening,
    /// Use this alpha instead of types / target.
    #[arg(long)]
    alpha: Option<f64>,
    /// Run exactly --max-epochs epochs, ignoring the stop rules.
    #[arg(long)]
    fixed_epochs: bool,
    /// Where to write the model.
    #[arg(long, short)]
    model: PathBuf,
    /// Where to write the training report [default: <model>.report].
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the segmented vocabulary of the training corpus.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Marker scheme for --vocab: plus or atat.
    #[arg(long, default_value_t = MarkerScheme::PlusPrefix)]
    marker: MarkerScheme,
    /// Leave the timestamp out of the report.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// Trained model file (LMVR or BPE).
    #[arg(long, short)]
    model: PathBuf,
    /// Require this method (lmvr or bpe) instead of detecting it.
    #[arg(long)]
    method: Option<String>,
    /// Marker scheme: plus ("ağ +larını") or atat ("ağ@@ larını").
    #[arg(long, default_value_t = MarkerScheme::PlusPrefix)]
    marker: MarkerScheme,
    /// Worker threads; output order always follows input order.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    streams: Streams,
}

#[derive(Debug, Args)]
struct BpeTrainArgs {
    /// Training corpus; standard input when absent or "-".
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Number of merge rules to learn.
    #[arg(long)]
    merges: usize,
    /// Stop once no pair occurs this many times.
    #[arg(long, default_value_t = 2)]
    min_frequency: u64,
    /// Count transform applied before learning: none, log or ones.
    #[arg(long, default_value_t = Dampening::None)]
    dampening: Dampening,
    /// Where to write the merge rules.
    #[arg(long, short)]
    model: PathBuf,
    /// Also write the segmented vocabulary of the training corpus.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BpeApplyArgs {
    /// BPE model file.
    #[arg(long, short)]
    model: PathBuf,
    /// Worker threads; output order always follows input order.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    streams: Streams,
}

#[derive(Debug, Args)]
struct DetokArgs {
    /// Marker scheme of the input: plus or atat.
    #[arg(long, default_value_t = MarkerScheme::PlusPrefix)]
    marker: MarkerScheme,
    #[command(flatten)]
    streams: Streams,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    streams: Streams,
}

#[derive(Debug, Args)]
struct OverlapArgs {
    /// First vocabulary: one entry per line, extra tab-separated fields ignored.
    #[arg(long)]
    a: PathBuf,
    /// Second vocabulary, same format.
    #[arg(long)]
    b: PathBuf,
    /// Compare entries with continuation markers removed.
    #[arg(long)]
    strip_markers: bool,
    /// Report file; standard output when absent or "-".
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    streams: Streams,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Marker scheme of the input: plus or atat.
    #[arg(long, default_value_t = MarkerScheme::PlusPrefix)]
    marker: MarkerScheme,
    /// Number of most frequent pieces to list.
    #[arg(long, default_value_t = 20)]
    top: usize,
    #[command(flatten)]
    streams: Streams,
}

/// Parses `args` and runs the command, returning the process exit code.
fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lmvr: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(run(std::env::args_os()))
}
