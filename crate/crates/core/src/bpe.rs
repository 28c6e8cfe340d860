//! Character-level byte-pair encoding: merge learning from word counts and
//! greedy application with `@@` continuation markers.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use crate::corpus::WordCounts;
use crate::error::{Error, Result};
use crate::markers::{annotate_piece, render_word, MarkerScheme};

/// Terminal symbol appended to every word during learning and application.
/// Never appears in output.
pub const END_OF_WORD: &str = "</w>";

pub const MAGIC: &str = "BPE1";

/// Ordered merge rules; position in the list is the application priority.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    ranks: HashMap<String, HashMap<String, usize>>,
}

/// One learned merge and the token-weighted count it had when chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeStep {
    pub left: String,
    pub right: String,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpeOptions {
    pub n_merges: usize,
    /// Learning stops once the best pair occurs fewer times than this.
    pub min_frequency: u64,
}

impl BpeOptions {
    pub fn new(n_merges: usize) -> Self {
        Self {
            n_merges,
            min_frequency: 2,
        }
    }
}

impl BpeModel {
    pub fn from_merges<I, S>(merges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut model = BpeModel::default();
        for (i, (left, right)) in merges.into_iter().enumerate() {
            model.push(left.into(), right.into(), i + 2)?;
        }
        Ok(model)
    }

    fn push(&mut self, left: String, right: String, line: usize) -> Result<()> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::format(line, "empty merge symbol"));
        }
        let rank = self.merges.len();
        let by_right = self.ranks.entry(left.clone()).or_default();
        if by_right.insert(right.clone(), rank).is_some() {
            return Err(Error::format(
                line,
                format!("duplicate merge ({left:?}, {right:?})"),
            ));
        }
        self.merges.push((left, right));
        Ok(())
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(left).and_then(|m| m.get(right)).copied()
    }

    /// Splits one word into pieces (markers not applied).
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        let mut symbols: Vec<String> = word.chars().map(String::from).collect();
        symbols.push(END_OF_WORD.to_owned());

        // Applying every rule in order is equivalent to repeatedly taking the
        // lowest-ranked pair present whose rank exceeds the last one applied.
        let mut last_applied: Option<usize> = None;
        loop {
            let next = symbols
                .windows(2)
                .filter_map(|w| self.rank(&w[0], &w[1]))
                .filter(|&r| last_applied.is_none_or(|last| r > last))
                .min();
            let Some(rank) = next else { break };
            let (left, right) = &self.merges[rank];
            symbols = merge_symbols(symbols, left, right);
            last_applied = Some(rank);
        }

        let last = symbols.pop().expect("terminal symbol present");
        let tail = last.strip_suffix(END_OF_WORD).unwrap_or(&last);
        if !tail.is_empty() {
            symbols.push(tail.to_owned());
        }
        symbols
    }

    /// Segments a line with `@@` markers. Whitespace between words is kept.
    pub fn apply_line(&self, line: &str) -> String {
        map_words(line, |word| {
            render_word(&self.segment_word(word), MarkerScheme::AtatSuffix)
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(MAGIC);
        out.push('\n');
        for (left, right) in &self.merges {
            out.push_str(left);
            out.push('\t');
            out.push_str(right);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(Error::format(1, format!("expected header {MAGIC:?}")));
        }
        let mut model = BpeModel::default();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            if line.is_empty() {
                continue;
            }
            let (left, right) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(line_no, "expected left<TAB>right"))?;
            if right.contains('\t') {
                return Err(Error::format(line_no, "too many fields"));
            }
            model.push(left.to_owned(), right.to_owned(), line_no)?;
        }
        Ok(model)
    }
}

/// Rewrites each whitespace-delimited word of `line` with `f`, copying the
/// separators through unchanged.
pub(crate) fn map_words(line: &str, mut f: impl FnMut(&str) -> String) -> String {
    let mut out = String::with_capacity(line.len() * 2);
    let mut word_start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = word_start.take() {
                out.push_str(&f(&line[s..i]));
            }
            out.push(ch);
        } else if word_start.is_none() {
            word_start = Some(i);
        }
    }
    if let Some(s) = word_start {
        out.push_str(&f(&line[s..]));
    }
    out
}

/// Replaces every adjacent `(left, right)` occurrence, scanning left to right.
fn merge_symbols(symbols: Vec<String>, left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut iter = symbols.into_iter().peekable();
    while let Some(sym) = iter.next() {
        if sym == left && iter.peek().is_some_and(|next| next == right) {
            let next = iter.next().unwrap();
            out.push(sym + &next);
        } else {
            out.push(sym);
        }
    }
    out
}

/// Learns up to `n_merges` merge rules.
pub fn learn_bpe(counts: &WordCounts, n_merges: usize) -> Result<BpeModel> {
    learn_bpe_with(counts, BpeOptions::new(n_merges)).map(|(model, _)| model)
}

/// Learns merges and also returns the count each merge had when selected.
pub fn learn_bpe_with(counts: &WordCounts, opts: BpeOptions) -> Result<(BpeModel, Vec<MergeStep>)> {
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut learner = Learner::new(counts);
    let mut model = BpeModel::default();
    let mut steps = Vec::new();
    while model.len() < opts.n_merges {
        let Some((pair, count)) = learner.best_pair() else {
            break;
        };
        if count < opts.min_frequency {
            break;
        }
        let (left, right) = (
            learner.symbol(pair.0).to_owned(),
            learner.symbol(pair.1).to_owned(),
        );
        learner.merge(pair);
        steps.push(MergeStep {
            left: left.clone(),
            right: right.clone(),
            count,
        });
        let line = model.len() + 2;
        model.push(left, right, line)?;
    }
    Ok((model, steps))
}

type SymbolId = u32;
type Pair = (SymbolId, SymbolId);
/// Max-heap entry: count first, then the smaller (left, right) strings win.
type HeapEntry = (u64, Reverse<(String, String)>, Pair);

struct Learner {
    symbols: Vec<String>,
    symbol_ids: HashMap<String, SymbolId>,
    words: Vec<Vec<SymbolId>>,
    freqs: Vec<u64>,
    pair_counts: HashMap<Pair, u64>,
    /// Words that may contain each pair (a superset; stale entries are tolerated).
    pair_words: HashMap<Pair, HashSet<usize>>,
    heap: BinaryHeap<HeapEntry>,
}

impl Learner {
    fn new(counts: &WordCounts) -> Self {
        let mut learner = Learner {
            symbols: Vec::new(),
            symbol_ids: HashMap::new(),
            words: Vec::with_capacity(counts.total_types()),
            freqs: Vec::with_capacity(counts.total_types()),
            pair_counts: HashMap::new(),
            pair_words: HashMap::new(),
            heap: BinaryHeap::new(),
        };
        for (word, freq) in counts.iter() {
            let mut syms: Vec<SymbolId> = word.chars().map(|c| learner.intern(&c.to_string())).collect();
            syms.push(learner.intern(END_OF_WORD));
            learner.words.push(syms);
            learner.freqs.push(freq);
        }
        let mut touched = HashSet::new();
        for idx in 0..learner.words.len() {
            learner.add_word_pairs(idx, &mut touched);
        }
        learner.refresh_heap(touched);
        learner
    }

    fn intern(&mut self, s: &str) -> SymbolId {
        if let Some(&id) = self.symbol_ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as SymbolId;
        self.symbols.push(s.to_owned());
        self.symbol_ids.insert(s.to_owned(), id);
        id
    }

    fn symbol(&self, id: SymbolId) -> &str {
        &self.symbols[id as usize]
    }

    fn add_word_pairs(&mut self, idx: usize, touched: &mut HashSet<Pair>) {
        let freq = self.freqs[idx];
        for w in self.words[idx].windows(2) {
            let pair = (w[0], w[1]);
            *self.pair_counts.entry(pair).or_insert(0) += freq;
            self.pair_words.entry(pair).or_default().insert(idx);
            touched.insert(pair);
        }
    }

    fn remove_word_pairs(&mut self, idx: usize, touched: &mut HashSet<Pair>) {
        let freq = self.freqs[idx];
        for w in self.words[idx].windows(2) {
            let pair = (w[0], w[1]);
            let count = self.pair_counts.get_mut(&pair).expect("pair was counted");
            *count -= freq;
            touched.insert(pair);
        }
    }

    fn refresh_heap(&mut self, touched: HashSet<Pair>) {
        for pair in touched {
            let count = self.pair_counts.get(&pair).copied().unwrap_or(0);
            if count == 0 {
                self.pair_counts.remove(&pair);
                continue;
            }
            let key = (self.symbol(pair.0).to_owned(), self.symbol(pair.1).to_owned());
            self.heap.push((count, Reverse(key), pair));
        }
    }

    /// Highest-count pair; ties go to the lexicographically smallest (left, right).
    fn best_pair(&mut self) -> Option<(Pair, u64)> {
        while let Some(&(count, _, pair)) = self.heap.peek() {
            if self.pair_counts.get(&pair).copied() == Some(count) {
                return Some((pair, count));
            }
            self.heap.pop();
        }
        None
    }

    fn merge(&mut self, pair: Pair) {
        let merged = format!("{}{}", self.symbol(pair.0), self.symbol(pair.1));
        let merged_id = self.intern(&merged);
        let mut word_ids: Vec<usize> = self
            .pair_words
            .remove(&pair)
            .unwrap_or_default()
            .into_iter()
            .collect();
        word_ids.sort_unstable();

        let mut touched = HashSet::new();
        for idx in word_ids {
            if !self.words[idx].windows(2).any(|w| (w[0], w[1]) == pair) {
                continue;
            }
            self.remove_word_pairs(idx, &mut touched);
            let old = std::mem::take(&mut self.words[idx]);
            let mut new = Vec::with_capacity(old.len());
            let mut i = 0;
            while i < old.len() {
                if i + 1 < old.len() && (old[i], old[i + 1]) == pair {
                    new.push(merged_id);
                    i += 2;
                } else {
                    new.push(old[i]);
                    i += 1;
                }
            }
            self.words[idx] = new;
            self.add_word_pairs(idx, &mut touched);
        }
        self.pair_counts.remove(&pair);
        touched.remove(&pair);
        self.refresh_heap(touched);
    }
}

/// Distinct `@@`-annotated pieces produced on every word type of `counts`.
pub fn bpe_vocab(model: &BpeModel, counts: &WordCounts) -> BTreeSet<String> {
    let mut vocab = BTreeSet::new();
    for (word, _) in counts.iter() {
        let pieces = model.segment_word(word);
        let n = pieces.len();
        for (i, piece) in pieces.iter().enumerate() {
            vocab.insert(annotate_piece(piece, i, n, MarkerScheme::AtatSuffix));
        }
    }
    vocab
}
