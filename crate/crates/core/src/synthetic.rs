//! Seeded generator of a toy agglutinative corpus with known stems and
//! suffixes, used to check that training recovers the inventory.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::WordCounts;

const CONSONANTS: &[char] = &[
    'b', 'd', 'g', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'y', 'z',
];
const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

/// Shape of the generated corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub stems: usize,
    pub suffixes: usize,
    /// Approximate number of running tokens.
    pub tokens: u64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            stems: 50,
            suffixes: 30,
            tokens: 50_000,
            seed: 7,
        }
    }
}

/// A generated word type with its gold stem/suffix split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldWord {
    pub word: String,
    pub count: u64,
    /// Character offset of the stem/suffix boundary.
    pub boundary: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub stems: Vec<String>,
    pub suffixes: Vec<String>,
    pub words: Vec<GoldWord>,
}

impl SyntheticCorpus {
    pub fn counts(&self) -> WordCounts {
        self.words.iter().map(|w| (w.word.as_str(), w.count)).collect()
    }

    pub fn total_tokens(&self) -> u64 {
        self.words.iter().map(|w| w.count).sum()
    }

    /// One word per line, repeated `count` times in a seeded shuffle, ten
    /// words to a line.
    pub fn to_text(&self, seed: u64) -> String {
        let mut tokens: Vec<&str> = self
            .words
            .iter()
            .flat_map(|w| std::iter::repeat_n(w.word.as_str(), w.count as usize))
            .collect();
        tokens.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut out = String::new();
        for line in tokens.chunks(10) {
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn syllable<R: Rng + ?Sized>(rng: &mut R) -> [char; 2] {
    [*CONSONANTS.choose(rng).unwrap(), *VOWELS.choose(rng).unwrap()]
}

/// Builds `len` characters from consonant-vowel syllables, optionally
/// closing with a consonant when `len` is odd.
fn form<R: Rng + ?Sized>(rng: &mut R, len: usize, start_vowel: bool) -> String {
    let mut s = String::new();
    if start_vowel {
        s.push(*VOWELS.choose(rng).unwrap());
    }
    while s.chars().count() + 2 <= len {
        s.extend(syllable(rng));
    }
    if s.chars().count() < len {
        s.push(*CONSONANTS.choose(rng).unwrap());
    }
    s
}

fn distinct<R: Rng>(rng: &mut R, n: usize, mut make: impl FnMut(&mut R) -> String) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = make(rng);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Generates every stem+suffix combination with Zipf-like counts
/// `max(1, round(k / (rank_stem * rank_suffix)))`, `k` scaled so the total is
/// close to `config.tokens`.
pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let stems = distinct(&mut rng, config.stems, |r| {
        let len = r.gen_range(5..=8);
        form(r, len, false)
    });
    let suffixes = distinct(&mut rng, config.suffixes, |r| {
        let len = r.gen_range(2..=4);
        form(r, len, true)
    });

    let harmonic = |n: usize| (1..=n).map(|r| 1.0 / r as f64).sum::<f64>();
    let mass = harmonic(stems.len()) * harmonic(suffixes.len());
    let k = config.tokens as f64 / mass;

    let mut words = Vec::with_capacity(stems.len() * suffixes.len());
    for (i, stem) in stems.iter().enumerate() {
        for (j, suffix) in suffixes.iter().enumerate() {
            let count = (k / ((i + 1) * (j + 1)) as f64).round().max(1.0) as u64;
            words.push(GoldWord {
                word: format!("{stem}{suffix}"),
                count,
                boundary: stem.chars().count(),
            });
        }
    }
    SyntheticCorpus {
        stems,
        suffixes,
        words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let corpus = generate(&SyntheticConfig::default());
        assert_eq!(corpus.words.len(), 1500);
        assert_eq!(corpus.counts().total_types(), 1500);
        let tokens = corpus.total_tokens();
        assert!((45_000..=60_000).contains(&tokens), "{tokens}");
        for s in &corpus.stems {
            assert!((5..=8).contains(&s.chars().count()));
        }
        for s in &corpus.suffixes {
            assert!((2..=4).contains(&s.chars().count()));
        }
    }

    #[test]
    fn seeded() {
        let a = generate(&SyntheticConfig::default());
        let b = generate(&SyntheticConfig::default());
        assert_eq!(a, b);
        assert_eq!(a.to_text(1), b.to_text(1));
        let c = generate(&SyntheticConfig {
            seed: 8,
            ..SyntheticConfig::default()
        });
        assert_ne!(a.stems, c.stems);
    }
}
