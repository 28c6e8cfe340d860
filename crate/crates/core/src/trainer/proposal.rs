//! Candidate analyses during training.
//!
//! The word being re-analysed has already been taken out of the ledger.
//! Candidates are the Viterbi analysis over the current lexicon (with the
//! single-character fallback) and the local edits of the current analysis:
//! one piece split in two, or two neighbours joined. Each segmentation is
//! tagged by Viterbi restricted to its own pieces. Pieces not yet in the
//! lexicon are priced with an estimate of their lexicon cost; the estimate
//! only steers tagging, acceptance uses the exact delta.

use std::collections::HashSet;

use statrs::function::factorial::ln_binomial;

use super::ledger::Ledger;
use crate::flatcat::{decode, Analysis, Category, CharModel};

struct Pricing {
    freq: f64,
    alpha: f64,
    new_morph_penalty: f64,
    cat_mass: [f64; 4],
}

impl Pricing {
    fn new(freq: u64, ledger: &Ledger) -> Self {
        let alpha = ledger.hyper.alpha;
        let m = ledger.lexicon_size() as u64;
        let nu = ledger.nu();
        // One extra morph: alpha * (form - ln(m + 1)) plus the change of the
        // frequency term when m and nu both grow.
        let freq_now = if m == 0 { 0.0 } else { ln_binomial(nu - 1, m - 1) };
        let extra_freq = ln_binomial(nu + freq - 1, m) - freq_now;
        Self {
            freq: freq as f64,
            alpha,
            new_morph_penalty: -alpha * ((m + 1) as f64).ln() + extra_freq,
            cat_mass: ledger.cat_mass(),
        }
    }

    fn cost(&self, ledger: &mut Ledger, chars: &CharModel, morph: &str, cat: Category) -> Option<f64> {
        let hyper = ledger.hyper;
        let p = ledger.usage.prior(morph, &hyper).get(cat);
        if p <= 0.0 {
            return None;
        }
        let f = self.freq;
        let count = ledger.count(morph) as f64;
        let mass = self.cat_mass[cat.index()] + f * p;
        let emission = f * (-p.ln() - (count + f).ln() + mass.ln());
        let lexicon = if count == 0.0 {
            self.alpha * chars.form_cost(morph) + self.new_morph_penalty
        } else {
            0.0
        };
        Some(emission + lexicon)
    }
}

fn tag(
    word: &str,
    pricing: &Pricing,
    ledger: &mut Ledger,
    chars: &CharModel,
    allowed: impl Fn(&str, &Ledger) -> bool,
) -> Option<Analysis> {
    let transitions = ledger.transitions.clone();
    let max_chars = word.chars().count();
    decode(word, &transitions, pricing.freq, max_chars, |morph, cat| {
        if allowed(morph, ledger) {
            pricing.cost(ledger, chars, morph, cat)
        } else {
            None
        }
    })
    .map(|(analysis, _)| analysis)
}

/// Best tagging of the fixed segmentation `pieces` of `word`.
pub(crate) fn retag(
    word: &str,
    freq: u64,
    pieces: &[String],
    ledger: &mut Ledger,
    chars: &CharModel,
) -> Option<Analysis> {
    let pricing = Pricing::new(freq, ledger);
    let set: HashSet<&str> = pieces.iter().map(String::as_str).collect();
    tag(word, &pricing, ledger, chars, |m, _| set.contains(m))
}

/// Segmentations one edit away from `pieces`.
fn edits(pieces: &[&str]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        for (cut, _) in piece.char_indices().skip(1) {
            let mut seg: Vec<String> = pieces[..i].iter().map(|s| s.to_string()).collect();
            seg.push(piece[..cut].to_owned());
            seg.push(piece[cut..].to_owned());
            seg.extend(pieces[i + 1..].iter().map(|s| s.to_string()));
            out.push(seg);
        }
    }
    for i in 1..pieces.len() {
        let mut seg: Vec<String> = pieces[..i - 1].iter().map(|s| s.to_string()).collect();
        seg.push(format!("{}{}", pieces[i - 1], pieces[i]));
        seg.extend(pieces[i + 1..].iter().map(|s| s.to_string()));
        out.push(seg);
    }
    out
}

/// Distinct candidate analyses for `word`, excluding `current`.
pub(crate) fn candidates(
    word: &str,
    freq: u64,
    current: &Analysis,
    ledger: &mut Ledger,
    chars: &CharModel,
) -> Vec<Analysis> {
    let pricing = Pricing::new(freq, ledger);
    let mut out: Vec<Analysis> = Vec::new();
    let push = |a: Option<Analysis>, out: &mut Vec<Analysis>| {
        if let Some(a) = a {
            if &a != current && !out.contains(&a) {
                out.push(a);
            }
        }
    };

    let lexical = tag(word, &pricing, ledger, chars, |m, l| {
        l.count(m) > 0 || m.chars().nth(1).is_none()
    });
    push(lexical, &mut out);

    let pieces: Vec<&str> = current.morphs().collect();
    for seg in edits(&pieces) {
        let set: HashSet<&str> = seg.iter().map(String::as_str).collect();
        push(
            tag(word, &pricing, ledger, chars, |m, _| set.contains(m)),
            &mut out,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edits_split_and_join() {
        let got = edits(&["ab", "c"]);
        let want: Vec<Vec<String>> = vec![vec!["a".into(), "b".into(), "c".into()], vec!["abc".into()]];
        assert_eq!(got, want);
        assert_eq!(edits(&["ağ"]), vec![vec!["a".to_string(), "ğ".to_string()]]);
    }
}
