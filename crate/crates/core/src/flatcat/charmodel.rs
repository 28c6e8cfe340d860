use std::collections::BTreeMap;

use crate::corpus::{corpus_stats, WordCounts};

/// Unigram character model with a geometric length distribution, used to
/// price the spelling of morphs. Frozen from the training corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CharModel {
    probs: BTreeMap<char, f64>,
    end_prob: f64,
    mean_word_length: f64,
    char_tokens: u64,
}

impl CharModel {
    /// Token-weighted character MLE; the terminator probability is
    /// `1 / (mean_word_length + 1)`.
    pub fn from_counts(counts: &WordCounts) -> Self {
        let mut char_counts: BTreeMap<char, u64> = BTreeMap::new();
        for (word, count) in counts.iter() {
            for ch in word.chars() {
                *char_counts.entry(ch).or_insert(0) += count;
            }
        }
        let char_tokens: u64 = char_counts.values().sum();
        let mean_word_length = corpus_stats(counts, 0).mean_word_length;
        let end_prob = 1.0 / (mean_word_length + 1.0);
        let probs = char_counts
            .into_iter()
            .map(|(ch, n)| (ch, (1.0 - end_prob) * n as f64 / char_tokens as f64))
            .collect();
        Self {
            probs,
            end_prob,
            mean_word_length,
            char_tokens,
        }
    }

    /// Rebuilds a model from stored probabilities.
    pub fn from_parts(probs: BTreeMap<char, f64>, mean_word_length: f64, char_tokens: u64) -> Self {
        Self {
            probs,
            end_prob: 1.0 / (mean_word_length + 1.0),
            mean_word_length,
            char_tokens,
        }
    }

    pub fn end_prob(&self) -> f64 {
        self.end_prob
    }

    pub fn mean_word_length(&self) -> f64 {
        self.mean_word_length
    }

    pub fn char_tokens(&self) -> u64 {
        self.char_tokens
    }

    pub fn probs(&self) -> &BTreeMap<char, f64> {
        &self.probs
    }

    /// Probability of emitting `ch`. Characters never seen in training get
    /// an add-one estimate over the alphabet plus one unknown symbol.
    pub fn prob(&self, ch: char) -> f64 {
        match self.probs.get(&ch) {
            Some(&p) => p,
            None => {
                let denom = self.char_tokens as f64 + self.probs.len() as f64 + 1.0;
                (1.0 - self.end_prob) / denom
            }
        }
    }

    /// Code length of spelling `morph` character by character, in nats.
    pub fn form_cost(&self, morph: &str) -> f64 {
        let chars: f64 = morph.chars().map(|ch| -self.prob(ch).ln()).sum();
        chars - self.end_prob.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_letter_alphabet() {
        // Mean word length 3, a and b equally frequent.
        let counts: WordCounts = [("aab", 1), ("abb", 1)].into_iter().collect();
        let cm = CharModel::from_counts(&counts);
        assert_relative_eq!(cm.end_prob(), 0.25);
        assert_relative_eq!(cm.prob('a'), 0.375);
        assert_relative_eq!(cm.prob('b'), 0.375);
        let expected = -(0.375f64 * 0.375 * 0.25).ln();
        assert_relative_eq!(cm.form_cost("ab"), expected, max_relative = 1e-12);
        assert_relative_eq!(cm.form_cost("ab"), 3.348, max_relative = 1e-3);
    }

    #[test]
    fn single_letter_alphabet() {
        let counts: WordCounts = [("a", 5)].into_iter().collect();
        let cm = CharModel::from_counts(&counts);
        assert_relative_eq!(cm.end_prob(), 0.5);
        assert_relative_eq!(cm.form_cost("a"), 4f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn longer_morphs_cost_more() {
        let counts: WordCounts = [("kitaplar", 3), ("evde", 2)].into_iter().collect();
        let cm = CharModel::from_counts(&counts);
        let word = "kitaplarde";
        let mut prev = 0.0;
        for end in 1..=word.len() {
            let c = cm.form_cost(&word[..end]);
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn unseen_characters_are_smoothed() {
        let counts: WordCounts = [("ab", 2)].into_iter().collect();
        let cm = CharModel::from_counts(&counts);
        let p = cm.prob('z');
        assert!(p > 0.0 && p < cm.prob('a'));
        assert!(cm.form_cost("z").is_finite());
    }
}
