//! Greedy MAP training with a target lexicon size.
//!
//! The lexicon weight is fixed at `alpha = m1 / m2` (initial over target
//! vocabulary size). Each epoch revisits every word type, most frequent
//! first, and keeps whichever of {current analysis, Viterbi proposal} has the
//! lower global cost. Usage statistics and transitions are re-estimated once
//! at the end of each epoch.

mod batch;
mod ledger;
mod proposal;

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use crate::corpus::{Dampening, WordCounts};
use crate::error::{Error, Result};
use crate::flatcat::{
    compute_alpha, total_cost, update_usage_stats, Analysis, CharModel, CostBreakdown, FlatCatModel,
    HyperParams, State, Transitions,
};
use ledger::{FrozenUsage, Ledger};

/// Add-kappa smoothing of transition counts.
pub const TRANSITION_SMOOTHING: f64 = 0.5;

/// Training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    /// Desired lexicon size, `m2`.
    pub target_lexicon_size: u64,
    pub ppl_threshold: f64,
    pub len_threshold: f64,
    pub slope: f64,
    pub max_epochs: usize,
    /// Stop once an epoch improves the cost by less than this fraction.
    pub rel_cost_epsilon: f64,
    pub dampening: Dampening,
    /// Relative slack above the target before a miss is reported.
    pub size_tolerance: f64,
    /// Use this alpha instead of `m1 / m2`.
    pub alpha_override: Option<f64>,
    /// When false, run exactly `max_epochs` epochs.
    pub early_stopping: bool,
}

impl TrainParams {
    pub fn new(target_lexicon_size: u64) -> Self {
        Self {
            target_lexicon_size,
            ppl_threshold: 10.0,
            len_threshold: 5.0,
            slope: 1.0,
            max_epochs: 15,
            rel_cost_epsilon: 1e-4,
            dampening: Dampening::None,
            size_tolerance: 0.10,
            alpha_override: None,
            early_stopping: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        // NaN fails both checks.
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let non_negative = |x: f64| x >= 0.0 && x.is_finite();
        if self.target_lexicon_size == 0 {
            return bad("target lexicon size must be at least 1".into());
        }
        if !positive(self.ppl_threshold) || !positive(self.len_threshold) {
            return bad("thresholds must be positive".into());
        }
        if !positive(self.slope) {
            return bad("slope must be positive".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.size_tolerance) {
            return bad(format!("size tolerance {} outside [0, 1)", self.size_tolerance));
        }
        if !non_negative(self.rel_cost_epsilon) {
            return bad("cost epsilon must be non-negative".into());
        }
        if let Some(a) = self.alpha_override {
            if !non_negative(a) {
                return bad(format!("alpha {a} must be a non-negative number"));
            }
        }
        Ok(())
    }
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    TargetReached,
    CostConverged,
    MaxEpochs,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TargetReached => "target_reached",
            StopReason::CostConverged => "cost_converged",
            StopReason::MaxEpochs => "max_epochs",
        })
    }
}

/// Bookkeeping of one epoch, with the consistency checks run at its end.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Total cost when the epoch started (parameters of this epoch).
    pub start_cost: f64,
    /// Incrementally tracked total at the end, before re-estimation.
    pub end_cost: f64,
    /// The same total recomputed from scratch.
    pub scratch_cost: f64,
    pub accepted_switches: usize,
    /// Largest measured delta among accepted switches (`<= 0`).
    pub max_accepted_delta: f64,
    /// True when the running total never increased during the epoch.
    pub monotone: bool,
    /// Lexicon counts matched a full recount of the analyses.
    pub counts_consistent: bool,
    pub lexicon_size: usize,
}

impl EpochLog {
    pub fn scratch_relative_error(&self) -> f64 {
        (self.end_cost - self.scratch_cost).abs() / self.scratch_cost.abs().max(1.0)
    }
}

/// Mutable training state: one analysis per word type plus the cost ledger.
#[derive(Debug, Clone)]
pub struct TrainState {
    /// Word types in visiting order: descending frequency, ties lexicographic.
    words: Vec<(String, u64)>,
    analyses: Vec<Analysis>,
    char_model: CharModel,
    ledger: Ledger,
    initial_vocab: u64,
    epoch: usize,
    history: Vec<CostBreakdown>,
    epochs: Vec<EpochLog>,
}

/// Sets up training: every word a single stem, alpha from the size ratio,
/// character model frozen, usage statistics and transitions estimated.
pub fn init_state(counts: &WordCounts, params: &TrainParams) -> Result<TrainState> {
    params.validate()?;
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let initial_vocab = counts.total_types() as u64;
    let alpha = match params.alpha_override {
        Some(a) => a,
        None => compute_alpha(initial_vocab, params.target_lexicon_size)?,
    };
    let hyper = HyperParams {
        alpha,
        ppl_threshold: params.ppl_threshold,
        len_threshold: params.len_threshold,
        slope: params.slope,
    };

    let counts = counts.dampened(params.dampening);
    let mut words: Vec<(String, u64)> = counts.iter().map(|(w, c)| (w.to_owned(), c)).collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let analyses = words.iter().map(|(w, _)| Analysis::single(w)).collect();
    let char_model = CharModel::from_counts(&counts);

    let mut state = TrainState {
        words,
        analyses,
        char_model,
        ledger: Ledger::new(hyper, FrozenUsage::default(), Transitions::uniform()),
        initial_vocab,
        epoch: 0,
        history: Vec::new(),
        epochs: Vec::new(),
    };
    state.reestimate();
    Ok(state)
}

impl TrainState {
    pub fn alpha(&self) -> f64 {
        self.ledger.hyper.alpha
    }

    pub fn hyper(&self) -> HyperParams {
        self.ledger.hyper
    }

    /// Initial vocabulary size, `m1`.
    pub fn initial_vocab(&self) -> u64 {
        self.initial_vocab
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn lexicon_size(&self) -> usize {
        self.ledger.lexicon_size()
    }

    /// Costs recorded after initialisation and after each re-estimation.
    pub fn history(&self) -> &[CostBreakdown] {
        &self.history
    }

    pub fn epoch_logs(&self) -> &[EpochLog] {
        &self.epochs
    }

    /// Current total as tracked incrementally.
    pub fn tracked_cost(&self) -> CostBreakdown {
        self.ledger.breakdown()
    }

    pub fn analysis(&self, word: &str) -> Option<&Analysis> {
        self.words
            .iter()
            .position(|(w, _)| w == word)
            .map(|i| &self.analyses[i])
    }

    /// `(word, count, analysis)` in visiting order.
    pub fn analyses(&self) -> impl Iterator<Item = (&str, u64, &Analysis)> + '_ {
        self.words
            .iter()
            .zip(&self.analyses)
            .map(|((w, c), a)| (w.as_str(), *c, a))
    }

    /// Model with the current lexicon and the parameters frozen for this
    /// epoch, built without touching the ledger.
    pub fn snapshot_model(&self) -> FlatCatModel {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for ((_, c), a) in self.words.iter().zip(&self.analyses) {
            for m in a.morphs() {
                *counts.entry(m).or_insert(0) += c;
            }
        }
        let stats: Vec<_> = counts
            .into_iter()
            .map(|(m, c)| self.ledger.usage.stats(m, c))
            .collect();
        FlatCatModel::new(
            self.ledger.hyper,
            stats,
            self.ledger.transitions.clone(),
            self.char_model.clone(),
        )
    }

    /// Total cost recomputed from scratch through the model's cost functions.
    pub fn scratch_cost(&self) -> CostBreakdown {
        let model = self.snapshot_model();
        total_cost(
            &model,
            self.words.iter().zip(&self.analyses).map(|((_, c), a)| (a, *c)),
        )
    }

    fn counts_consistent(&self) -> bool {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for ((_, c), a) in self.words.iter().zip(&self.analyses) {
            for m in a.morphs() {
                *counts.entry(m).or_insert(0) += c;
            }
        }
        counts.len() == self.ledger.lexicon_size()
            && self.ledger.counts().all(|(m, c)| counts.get(m) == Some(&c))
    }

    /// Re-estimates usage statistics and transitions from the current
    /// analyses and rebuilds the ledger under them.
    fn reestimate(&mut self) {
        let pairs = self.words.iter().zip(&self.analyses).map(|((_, c), a)| (a, *c));
        let stats = update_usage_stats(pairs);
        let mut counts = [[0u64; State::COUNT]; State::COUNT];
        for ((_, c), a) in self.words.iter().zip(&self.analyses) {
            let mut prev = State::Boundary;
            for state in a.categories().map(|k| k.state()).chain([State::Boundary]) {
                counts[prev.index()][state.index()] += c;
                prev = state;
            }
        }
        // Before the first epoch every word is a bare stem, so estimated
        // transitions would all but forbid splitting; start uniform instead.
        let transitions = if self.epoch == 0 {
            Transitions::uniform()
        } else {
            Transitions::estimate(&counts, TRANSITION_SMOOTHING)
        };
        let mut ledger = Ledger::new(self.ledger.hyper, FrozenUsage::new(stats.values()), transitions);
        for ((_, c), a) in self.words.iter().zip(&self.analyses) {
            ledger.add(a, *c, &self.char_model);
        }
        self.ledger = ledger;
        self.history.push(self.ledger.breakdown());
    }

    /// One pass over all word types. Returns the cost change over the pass
    /// (before re-estimation) and the resulting lexicon size.
    pub fn train_epoch(&mut self) -> (f64, usize) {
        self.epoch += 1;
        let start_cost = self.ledger.total();
        let mut running = start_cost;
        let mut accepted = 0;
        let mut max_delta = f64::NEG_INFINITY;
        let mut monotone = true;

        for i in 0..self.words.len() {
            let freq = self.words[i].1;
            let before = self.ledger.total();
            let current = self.analyses[i].clone();
            self.ledger.remove(&current, freq, &self.char_model);
            let candidates = proposal::candidates(
                &self.words[i].0,
                freq,
                &current,
                &mut self.ledger,
                &self.char_model,
            );
            let mut best: Option<(f64, Analysis)> = None;
            for candidate in candidates {
                self.ledger.add(&candidate, freq, &self.char_model);
                let after = self.ledger.total();
                self.ledger.remove(&candidate, freq, &self.char_model);
                if best.as_ref().is_none_or(|(b, _)| after < *b) {
                    best = Some((after, candidate));
                }
            }
            match best {
                Some((after, candidate)) if after - before < -1e-9 * before.abs().max(1.0) => {
                    self.ledger.add(&candidate, freq, &self.char_model);
                    // Measured after the real update, not the trial one.
                    let after = self.ledger.total();
                    let delta = after - before;
                    self.analyses[i] = candidate;
                    accepted += 1;
                    max_delta = max_delta.max(delta);
                    if after > running {
                        monotone = false;
                    }
                    running = after;
                }
                _ => self.ledger.add(&current, freq, &self.char_model),
            }
        }

        let mut record = |after: f64, delta: f64| {
            accepted += 1;
            max_delta = max_delta.max(delta);
            if after > running {
                monotone = false;
            }
            running = after;
        };
        let threshold = |before: f64| -1e-9 * before.abs().max(1.0);

        // Joint affix moves, most promising first.
        let mut scored = Vec::new();
        for affix in batch::affixes(&self.analyses) {
            let plan = batch::plan(
                &affix,
                &self.words,
                &self.analyses,
                &mut self.ledger,
                &self.char_model,
            );
            if plan.len() < 2 {
                continue;
            }
            let before = self.ledger.total();
            let after = batch::trial(
                &plan,
                &self.words,
                &self.analyses,
                &mut self.ledger,
                &self.char_model,
            );
            if after - before < threshold(before) {
                scored.push((after - before, affix));
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        for (_, affix) in scored {
            let plan = batch::plan(
                &affix,
                &self.words,
                &self.analyses,
                &mut self.ledger,
                &self.char_model,
            );
            if plan.is_empty() {
                continue;
            }
            let before = self.ledger.total();
            let after = batch::trial(
                &plan,
                &self.words,
                &self.analyses,
                &mut self.ledger,
                &self.char_model,
            );
            if after - before < threshold(before) {
                batch::apply(
                    &plan,
                    &self.words,
                    &self.analyses,
                    &mut self.ledger,
                    &self.char_model,
                );
                let after = self.ledger.total();
                for (i, new) in plan {
                    self.analyses[i] = new;
                }
                record(after, after - before);
            }
        }

        let end_cost = self.ledger.total();
        let scratch_cost = self.scratch_cost().total;
        let counts_consistent = self.counts_consistent();
        let lexicon_size = self.ledger.lexicon_size();
        self.epochs.push(EpochLog {
            epoch: self.epoch,
            start_cost,
            end_cost,
            scratch_cost,
            accepted_switches: accepted,
            max_accepted_delta: if accepted == 0 { 0.0 } else { max_delta },
            monotone,
            counts_consistent,
            lexicon_size,
        });
        log::debug!(
            "epoch {}: cost {start_cost:.3} -> {end_cost:.3}, {accepted} switches, lexicon {lexicon_size}",
            self.epoch
        );
        self.reestimate();
        let delta = if accepted == 0 { 0.0 } else { end_cost - start_cost };
        (delta, lexicon_size)
    }

    /// Final immutable model: usage statistics and transitions re-estimated
    /// from the current analyses.
    pub fn to_model(&self) -> FlatCatModel {
        let pairs = self.words.iter().zip(&self.analyses).map(|((_, c), a)| (a, *c));
        let stats = update_usage_stats(pairs);
        FlatCatModel::new(
            self.ledger.hyper,
            stats.into_values(),
            self.ledger.transitions.clone(),
            self.char_model.clone(),
        )
    }
}

/// Summary of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: usize,
    pub stop_reason: StopReason,
    pub initial_vocab: u64,
    pub target_lexicon_size: u64,
    pub final_lexicon_size: usize,
    pub alpha: f64,
    pub costs: CostBreakdown,
    /// Cost converged (or epochs ran out) with the lexicon above
    /// `target * (1 + tolerance)`.
    pub target_missed: bool,
    pub epoch_logs: Vec<EpochLog>,
}

impl TrainReport {
    /// `key<TAB>value` lines; `timestamp` is appended when given.
    pub fn to_text(&self, timestamp: Option<u64>) -> String {
        let mut out = String::new();
        let c = &self.costs;
        let _ = writeln!(out, "epochs\t{}", self.epochs);
        let _ = writeln!(out, "stop_reason\t{}", self.stop_reason);
        let _ = writeln!(out, "initial_vocab\t{}", self.initial_vocab);
        let _ = writeln!(out, "target_vocab\t{}", self.target_lexicon_size);
        let _ = writeln!(out, "final_lexicon_size\t{}", self.final_lexicon_size);
        let _ = writeln!(out, "alpha\t{}", self.alpha);
        let _ = writeln!(out, "corpus_cost\t{:.6}", c.corpus_cost);
        let _ = writeln!(out, "weighted_prior_cost\t{:.6}", c.weighted_prior_cost);
        let _ = writeln!(out, "frequency_cost\t{:.6}", c.frequency_cost);
        let _ = writeln!(out, "total_cost\t{:.6}", c.total);
        if self.target_missed {
            let _ = writeln!(out, "warning\ttarget_missed");
        }
        if let Some(ts) = timestamp {
            let _ = writeln!(out, "timestamp\t{ts}");
        }
        out
    }
}

/// Runs epochs until the lexicon fits the target, the cost stops improving,
/// or `max_epochs` is reached.
pub fn train(counts: &WordCounts, params: &TrainParams) -> Result<(FlatCatModel, TrainReport)> {
    let mut state = init_state(counts, params)?;
    let target = params.target_lexicon_size;
    let stop_reason = loop {
        let start = state.tracked_cost().total;
        let (delta, size) = state.train_epoch();
        if params.early_stopping {
            if size as u64 <= target {
                break StopReason::TargetReached;
            }
            let improvement = -delta / start.abs().max(f64::MIN_POSITIVE);
            if improvement < params.rel_cost_epsilon {
                break StopReason::CostConverged;
            }
        }
        if state.epoch() >= params.max_epochs {
            break StopReason::MaxEpochs;
        }
    };

    let model = state.to_model();
    let size = model.lexicon_size();
    let limit = target as f64 * (1.0 + params.size_tolerance);
    let target_missed = stop_reason != StopReason::TargetReached && size as f64 > limit;
    if target_missed {
        log::warn!("lexicon size {size} exceeds target {target} by more than the tolerance");
    }
    let pairs = state.analyses().map(|(_, c, a)| (a, c));
    let costs = total_cost(&model, pairs);
    let report = TrainReport {
        epochs: state.epoch(),
        stop_reason,
        initial_vocab: state.initial_vocab(),
        target_lexicon_size: target,
        final_lexicon_size: size,
        alpha: state.alpha(),
        costs,
        target_missed,
        epoch_logs: state.epoch_logs().to_vec(),
    };
    Ok((model, report))
}
