//! Subcommand handlers.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use lmvr_core::bpe::{self, BpeOptions};
use lmvr_core::corpus::{convert_analysis_line, corpus_stats, load_word_counts_with_lines};
use lmvr_core::evalkit::{read_vocab, segmentation_report, vocab_overlap};
use lmvr_core::markers::{detokenize, MarkerScheme};
use lmvr_core::segmenter::{check_line, segment_line_cached, vocab, Registry, Segmenter};
use lmvr_core::trainer::{train, TrainParams};
use rayon::prelude::*;
use thiserror::Error;

use crate::io::{open_input, read_chunk, read_to_string, write_file, Line, Output};
use crate::{
    BpeApplyArgs, BpeTrainArgs, Command, ConvertArgs, DetokArgs, OverlapArgs, ReportArgs, SegmentArgs,
    StatsArgs, Streams, TrainArgs,
};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_TARGET_MISSED: u8 = 3;

/// Lines handed to the worker pool at a time.
const CHUNK_LINES: usize = 4096;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: lmvr_core::Error },
    #[error(transparent)]
    Data(lmvr_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::File { .. } | CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl From<lmvr_core::Error> for CliError {
    fn from(e: lmvr_core::Error) -> Self {
        match e {
            lmvr_core::Error::InvalidParameter(msg) => CliError::Usage(msg),
            lmvr_core::Error::UnknownMethod(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

trait AtPath<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T, E: Into<lmvr_core::Error>> AtPath<T> for std::result::Result<T, E> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|e| CliError::File {
            path: path.to_owned(),
            source: e.into(),
        })
    }
}

pub fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Train(a) => train_cmd(a),
        Command::Segment(a) => segment_cmd(a),
        Command::BpeTrain(a) => bpe_train_cmd(a),
        Command::BpeApply(a) => bpe_apply_cmd(a),
        Command::Detok(a) => detok_cmd(a),
        Command::Stats(a) => stats_cmd(a),
        Command::Overlap(a) => overlap_cmd(a),
        Command::ConvertAnalyses(a) => convert_cmd(a),
        Command::Report(a) => report_cmd(a),
    }
    .map(|missed| if missed { EXIT_TARGET_MISSED } else { 0 })
}

/// Rejects output paths that collide with each other or with the input.
fn distinct_paths(input: Option<&Path>, outputs: &[&Path]) -> Result<()> {
    for (i, p) in outputs.iter().enumerate() {
        if input.is_some_and(|inp| inp == *p) {
            return Err(CliError::Usage(format!(
                "{} is both input and output",
                p.display()
            )));
        }
        if outputs[..i].iter().any(|q| q == p) {
            return Err(CliError::Usage(format!(
                "{} is given for two outputs",
                p.display()
            )));
        }
    }
    Ok(())
}

fn load_counts(input: Option<&Path>) -> Result<(lmvr_core::corpus::WordCounts, usize)> {
    let reader = open_input(input)?;
    let loaded = load_word_counts_with_lines(reader);
    match input {
        Some(p) => loaded.at(p),
        None => Ok(loaded?),
    }
}

fn write_vocab(path: &Path, pieces: &BTreeSet<String>) -> Result<()> {
    let mut text = String::new();
    for p in pieces {
        text.push_str(p);
        text.push('\n');
    }
    Ok(write_file(path, &text)?)
}

fn train_cmd(a: TrainArgs) -> Result<bool> {
    let params = TrainParams {
        target_lexicon_size: a.target_vocab,
        ppl_threshold: a.ppl_threshold,
        len_threshold: a.len_threshold,
        slope: a.slope,
        max_epochs: a.max_epochs,
        rel_cost_epsilon: a.epsilon,
        dampening: a.dampening,
        size_tolerance: a.size_tolerance,
        alpha_override: a.alpha,
        early_stopping: !a.fixed_epochs,
    };
    params.validate()?;
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.model.clone().into_os_string();
        p.push(".report");
        PathBuf::from(p)
    });
    let mut outputs = vec![a.model.as_path(), report_path.as_path()];
    if let Some(v) = &a.vocab {
        outputs.push(v);
    }
    distinct_paths(a.input.as_deref(), &outputs)?;

    let (counts, _) = load_counts(a.input.as_deref())?;
    let (model, report) = train(&counts, &params)?;
    let timestamp = (!a.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    write_file(&a.model, &model.to_model_text())?;
    write_file(&report_path, &report.to_text(timestamp))?;
    if let Some(v) = &a.vocab {
        write_vocab(v, &vocab(&model, &counts, a.marker))?;
    }
    log::info!(
        "trained {} epochs, lexicon {} ({})",
        report.epochs,
        report.final_lexicon_size,
        report.stop_reason
    );
    if report.target_missed {
        eprintln!(
            "lmvr: lexicon size {} missed target {} (tolerance {})",
            report.final_lexicon_size, report.target_lexicon_size, params.size_tolerance
        );
    }
    Ok(report.target_missed)
}

fn bpe_train_cmd(a: BpeTrainArgs) -> Result<bool> {
    if a.min_frequency == 0 {
        return Err(CliError::Usage("--min-frequency must be at least 1".into()));
    }
    let mut outputs = vec![a.model.as_path()];
    if let Some(v) = &a.vocab {
        outputs.push(v);
    }
    distinct_paths(a.input.as_deref(), &outputs)?;

    let (counts, _) = load_counts(a.input.as_deref())?;
    let counts = counts.dampened(a.dampening);
    let opts = BpeOptions {
        n_merges: a.merges,
        min_frequency: a.min_frequency,
    };
    let (model, steps) = bpe::learn_bpe_with(&counts, opts)?;
    if steps.len() < a.merges {
        log::warn!("learned {} of {} requested merges", steps.len(), a.merges);
    }
    write_file(&a.model, &model.to_text())?;
    // Merge count and type inventory differ; report both.
    let types = bpe::bpe_vocab(&model, &counts);
    if let Some(v) = &a.vocab {
        write_vocab(v, &types)?;
    }
    let summary = format!(
        "requested_merges\t{}\nmerges\t{}\nvocab_types\t{}\n",
        a.merges,
        model.len(),
        types.len()
    );
    emit(None, &summary)?;
    Ok(false)
}

fn load_segmenter(path: &Path, method: Option<&str>) -> Result<Box<dyn Segmenter>> {
    let registry = Registry::builtin();
    if let Some(name) = method {
        registry.get(name)?;
    }
    let text = read_to_string(path).at(path)?;
    match method {
        Some(name) => registry.load_as(name, &text),
        None => registry.load(&text),
    }
    .at(path)
}

fn pool(threads: usize) -> Result<Option<rayon::ThreadPool>> {
    match threads {
        0 => Err(CliError::Usage("--threads must be at least 1".into())),
        1 => Ok(None),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}"))),
    }
}

fn write_line(out: &mut Output, line: &Line, text: &str) -> io::Result<()> {
    out.write_all(text.as_bytes())?;
    if line.newline {
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Applies `f` to every line of `streams.input`, writing results in input
/// order. Line terminators are preserved, including a missing final one.
fn map_lines<F>(streams: &Streams, pool: Option<rayon::ThreadPool>, f: F) -> Result<()>
where
    F: Fn(&Line, &mut HashMap<String, String>) -> lmvr_core::Result<String> + Sync,
{
    if let (Some(i), Some(o)) = (streams.input.as_deref(), streams.output.as_deref()) {
        if i != Path::new("-") {
            distinct_paths(Some(i), &[o])?;
        }
    }
    let mut reader = open_input(streams.input.as_deref())?;
    let mut out = Output::create(streams.output.as_deref())?;
    let mut cache = HashMap::new();
    let mut next = 1;
    loop {
        let chunk = read_chunk(reader.as_mut(), next, CHUNK_LINES)?;
        if chunk.is_empty() {
            break;
        }
        next += chunk.len();
        let results: Vec<lmvr_core::Result<String>> = match &pool {
            None => chunk.iter().map(|line| f(line, &mut cache)).collect(),
            Some(p) => p.install(|| {
                chunk
                    .par_iter()
                    .map_init(HashMap::new, |cache, line| f(line, cache))
                    .collect()
            }),
        };
        for (line, result) in chunk.iter().zip(results) {
            write_line(&mut out, line, &result?)?;
        }
    }
    out.commit()?;
    Ok(())
}

fn segment_with(streams: &Streams, seg: &dyn Segmenter, scheme: MarkerScheme, threads: usize) -> Result<()> {
    let pool = pool(threads)?;
    map_lines(streams, pool, |line, cache| {
        check_line(&line.text, line.number)?;
        Ok(segment_line_cached(&line.text, seg, scheme, cache))
    })
}

fn segment_cmd(a: SegmentArgs) -> Result<bool> {
    pool(a.threads)?;
    let seg = load_segmenter(&a.model, a.method.as_deref())?;
    segment_with(&a.streams, seg.as_ref(), a.marker, a.threads)?;
    Ok(false)
}

fn bpe_apply_cmd(a: BpeApplyArgs) -> Result<bool> {
    pool(a.threads)?;
    let seg = load_segmenter(&a.model, Some("bpe"))?;
    segment_with(&a.streams, seg.as_ref(), MarkerScheme::AtatSuffix, a.threads)?;
    Ok(false)
}

fn detok_cmd(a: DetokArgs) -> Result<bool> {
    map_lines(&a.streams, None, |line, _| detokenize(&line.text, a.marker))?;
    Ok(false)
}

fn convert_cmd(a: ConvertArgs) -> Result<bool> {
    map_lines(&a.streams, None, |line, _| {
        convert_analysis_line(&line.text, line.number)
    })?;
    Ok(false)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    let mut out = Output::create(output)?;
    out.write_all(text.as_bytes())?;
    out.commit()?;
    Ok(())
}

fn stats_cmd(a: StatsArgs) -> Result<bool> {
    let (counts, lines) = load_counts(a.streams.input.as_deref())?;
    let s = corpus_stats(&counts, lines as u64);
    let text = format!(
        "sentences\t{}\ntokens\t{}\ntypes\t{}\nmean_word_length\t{:.6}\n",
        s.sentences, s.tokens, s.types, s.mean_word_length
    );
    emit(a.streams.output.as_deref(), &text)?;
    Ok(false)
}

fn read_vocab_file(path: &Path) -> Result<BTreeSet<String>> {
    let reader = open_input(Some(path)).at(path)?;
    read_vocab(reader).at(path)
}

fn overlap_cmd(a: OverlapArgs) -> Result<bool> {
    let va = read_vocab_file(&a.a)?;
    let vb = read_vocab_file(&a.b)?;
    let report = vocab_overlap(&va, &vb, a.strip_markers);
    emit(a.output.as_deref(), &report.to_text())?;
    Ok(false)
}

fn report_cmd(a: ReportArgs) -> Result<bool> {
    let reader: Box<dyn BufRead> = open_input(a.streams.input.as_deref())?;
    let report = segmentation_report(reader, a.marker, a.top)?;
    emit(a.streams.output.as_deref(), &report.to_text())?;
    Ok(false)
}
