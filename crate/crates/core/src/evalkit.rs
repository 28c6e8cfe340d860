//! Comparing vocabularies and segmentations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::BufRead;

use crate::corpus::read_lines;
use crate::error::{Error, Result};
use crate::markers::{annotate_piece, split_segmented_line, strip_marker, MarkerScheme};

/// Set overlap between two sub-word vocabularies.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    pub size_a: usize,
    pub size_b: usize,
    pub intersection: usize,
    pub jaccard: f64,
    /// `|A ∩ B| / |A|`.
    pub contained_in_a: f64,
    /// `|A ∩ B| / |B|`.
    pub contained_in_b: f64,
}

impl OverlapReport {
    pub fn to_text(&self) -> String {
        format!(
            "size_a\t{}\nsize_b\t{}\nintersection\t{}\njaccard\t{:.6}\ncontained_in_a\t{:.6}\ncontained_in_b\t{:.6}\n",
            self.size_a, self.size_b, self.intersection, self.jaccard, self.contained_in_a, self.contained_in_b
        )
    }
}

fn ratio(num: usize, den: usize, side: &str) -> f64 {
    if den == 0 {
        log::warn!("vocabulary {side} is empty; its containment ratio is reported as 1");
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Overlap of `a` and `b`, optionally comparing marker-stripped types.
pub fn vocab_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>, strip_markers: bool) -> OverlapReport {
    let norm = |s: &BTreeSet<String>| -> BTreeSet<String> {
        if strip_markers {
            s.iter().map(|p| strip_marker(p).to_owned()).collect()
        } else {
            s.clone()
        }
    };
    let (a, b) = (norm(a), norm(b));
    let intersection = a.intersection(&b).count();
    let union = a.len() + b.len() - intersection;
    OverlapReport {
        size_a: a.len(),
        size_b: b.len(),
        intersection,
        jaccard: if union == 0 {
            1.0
        } else {
            intersection as f64 / union as f64
        },
        contained_in_a: ratio(intersection, a.len(), "a"),
        contained_in_b: ratio(intersection, b.len(), "b"),
    }
}

/// Reads a vocabulary listing: the first tab-separated field of each
/// non-empty line.
pub fn read_vocab<R: BufRead>(reader: R) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for item in read_lines(reader) {
        let (_, line) = item?;
        let entry = line.split('\t').next().unwrap_or("");
        if !entry.is_empty() {
            out.insert(entry.to_owned());
        }
    }
    Ok(out)
}

/// Statistics of a segmented text stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationReport {
    pub words: u64,
    pub pieces: u64,
    /// Distinct marker-annotated pieces.
    pub piece_types: usize,
    pub mean_pieces_per_word: f64,
    pub fraction_whole: f64,
    /// Most frequent pieces, by descending count then lexicographically.
    pub top: Vec<(String, u64)>,
}

impl SegmentationReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "words\t{}\npieces\t{}\npiece_types\t{}\nmean_pieces_per_word\t{:.6}\nfraction_whole\t{:.6}\n",
            self.words, self.pieces, self.piece_types, self.mean_pieces_per_word, self.fraction_whole
        );
        for (piece, count) in &self.top {
            let _ = writeln!(out, "top\t{piece}\t{count}");
        }
        out
    }
}

/// Summarizes a stream segmented under `scheme`, listing the `top_k` most
/// frequent pieces.
pub fn segmentation_report<R: BufRead>(
    reader: R,
    scheme: MarkerScheme,
    top_k: usize,
) -> Result<SegmentationReport> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let (mut words, mut pieces, mut whole) = (0u64, 0u64, 0u64);
    for item in read_lines(reader) {
        let (_, line) = item?;
        for word in split_segmented_line(&line, scheme)? {
            words += 1;
            pieces += word.len() as u64;
            if word.len() == 1 {
                whole += 1;
            }
            for (i, piece) in word.iter().enumerate() {
                *counts
                    .entry(annotate_piece(piece, i, word.len(), scheme))
                    .or_insert(0) += 1;
            }
        }
    }
    let per_word = |x: u64| if words == 0 { 0.0 } else { x as f64 / words as f64 };
    let mut top: Vec<(String, u64)> = counts.iter().map(|(p, c)| (p.clone(), *c)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(top_k);
    Ok(SegmentationReport {
        words,
        pieces,
        piece_types: counts.len(),
        mean_pieces_per_word: per_word(pieces),
        fraction_whole: per_word(whole),
        top,
    })
}

/// A word with its internal boundaries (character offsets) and weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedWord {
    pub word: String,
    pub count: u64,
    pub boundaries: BTreeSet<usize>,
}

impl SegmentedWord {
    pub fn from_pieces<S: AsRef<str>>(pieces: &[S], count: u64) -> Self {
        let mut word = String::new();
        let mut boundaries = BTreeSet::new();
        let mut offset = 0;
        for (i, piece) in pieces.iter().enumerate() {
            if i > 0 {
                boundaries.insert(offset);
            }
            word.push_str(piece.as_ref());
            offset += piece.as_ref().chars().count();
        }
        Self {
            word,
            count,
            boundaries,
        }
    }
}

/// Boundary precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BoundaryScore {
    pub fn to_text(&self) -> String {
        format!(
            "precision\t{:.6}\nrecall\t{:.6}\nf1\t{:.6}\n",
            self.precision, self.recall, self.f1
        )
    }
}

/// Micro-averaged boundary scores, each word weighted by its gold count.
///
/// With no predicted boundaries precision is 1; with no gold boundaries
/// recall is 1.
pub fn boundary_score(predicted: &[SegmentedWord], gold: &[SegmentedWord]) -> Result<BoundaryScore> {
    let n = predicted.len().max(gold.len());
    let (mut hits, mut n_pred, mut n_gold) = (0u64, 0u64, 0u64);
    for i in 0..n {
        let (p, g) = match (predicted.get(i), gold.get(i)) {
            (Some(p), Some(g)) if p.word == g.word => (p, g),
            (p, g) => {
                return Err(Error::WordMismatch {
                    index: i,
                    predicted: p.map_or_else(String::new, |w| w.word.clone()),
                    gold: g.map_or_else(String::new, |w| w.word.clone()),
                })
            }
        };
        let w = g.count;
        hits += w * p.boundaries.intersection(&g.boundaries).count() as u64;
        n_pred += w * p.boundaries.len() as u64;
        n_gold += w * g.boundaries.len() as u64;
    }
    let precision = if n_pred == 0 {
        1.0
    } else {
        hits as f64 / n_pred as f64
    };
    let recall = if n_gold == 0 {
        1.0
    } else {
        hits as f64 / n_gold as f64
    };
    let f1 = if precision == 0.0 || recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(BoundaryScore {
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn overlap_examples() {
        let r = vocab_overlap(&set(&["a", "b", "c"]), &set(&["b", "c", "d"]), false);
        assert_eq!(r.intersection, 2);
        assert_eq!(r.jaccard, 0.5);
        assert_relative_eq!(r.contained_in_a, 2.0 / 3.0);
        let same = vocab_overlap(&set(&["x", "y"]), &set(&["x", "y"]), false);
        assert_eq!(same.jaccard, 1.0);
        let disjoint = vocab_overlap(&set(&["x"]), &set(&["y"]), false);
        assert_eq!(disjoint.jaccard, 0.0);
    }

    #[test]
    fn overlap_marker_stripping() {
        let a = set(&["ağ@@", "larını"]);
        let b = set(&["ağ", "+larını"]);
        assert_eq!(vocab_overlap(&a, &b, false).intersection, 0);
        assert_eq!(vocab_overlap(&a, &b, true).intersection, 2);
    }

    #[test]
    fn overlap_empty_side() {
        let r = vocab_overlap(&set(&[]), &set(&["a"]), false);
        assert_eq!(r.contained_in_a, 1.0);
        assert_eq!(r.contained_in_b, 0.0);
        assert_eq!(r.jaccard, 0.0);
    }

    #[test]
    fn report_examples() {
        let r = segmentation_report("a b\nc\n".as_bytes(), MarkerScheme::PlusPrefix, 5).unwrap();
        assert_eq!(r.mean_pieces_per_word, 1.0);
        assert_eq!(r.fraction_whole, 1.0);

        let r = segmentation_report("ağ +larını\n".as_bytes(), MarkerScheme::PlusPrefix, 5).unwrap();
        assert_eq!(r.mean_pieces_per_word, 2.0);
        assert_eq!(r.fraction_whole, 0.0);

        // 5 words, 9 pieces, 2 whole; ev x3, +ler x2, kitap x2, +de, +ta.
        let text = "ev +ler +de kitap\nev\nev +ler kitap +ta\n";
        let r = segmentation_report(text.as_bytes(), MarkerScheme::PlusPrefix, 2).unwrap();
        assert_eq!(r.words, 5);
        assert_eq!(r.pieces, 9);
        assert_eq!(r.piece_types, 5);
        assert_relative_eq!(r.mean_pieces_per_word, 9.0 / 5.0);
        assert_relative_eq!(r.fraction_whole, 2.0 / 5.0);
        assert_eq!(r.top, vec![("ev".to_string(), 3), ("+ler".to_string(), 2)]);
    }

    #[test]
    fn report_rejects_bad_markers() {
        assert!(segmentation_report("+x\n".as_bytes(), MarkerScheme::PlusPrefix, 1).is_err());
        assert!(segmentation_report("x@@\n".as_bytes(), MarkerScheme::AtatSuffix, 1).is_err());
    }

    #[test]
    fn boundary_examples() {
        let gold = vec![SegmentedWord::from_pieces(&["ev", "ler", "de"], 1)];
        let pred = vec![SegmentedWord::from_pieces(&["ev", "lerde"], 1)];
        let s = boundary_score(&pred, &gold).unwrap();
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.5);
        assert_relative_eq!(s.f1, 2.0 / 3.0);

        let s = boundary_score(&gold, &gold).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));

        let none = vec![SegmentedWord::from_pieces(&["evlerde"], 1)];
        let s = boundary_score(&none, &gold).unwrap();
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn boundary_weights_and_offsets() {
        let gold = vec![
            SegmentedWord::from_pieces(&["ağ", "lar"], 3),
            SegmentedWord::from_pieces(&["ev", "de"], 1),
        ];
        assert_eq!(gold[0].boundaries, BTreeSet::from([2]));
        let pred = vec![
            SegmentedWord::from_pieces(&["ağ", "lar"], 3),
            SegmentedWord::from_pieces(&["e", "vde"], 1),
        ];
        let s = boundary_score(&pred, &gold).unwrap();
        assert_eq!(s.precision, 0.75);
        assert_eq!(s.recall, 0.75);
    }

    #[test]
    fn boundary_word_mismatch() {
        let a = vec![SegmentedWord::from_pieces(&["ev"], 1)];
        let b = vec![SegmentedWord::from_pieces(&["el"], 1)];
        assert!(matches!(
            boundary_score(&a, &b),
            Err(Error::WordMismatch { index: 0, .. })
        ));
        assert!(matches!(
            boundary_score(&a, &[]),
            Err(Error::WordMismatch { index: 0, .. })
        ));
    }

    #[test]
    fn vocab_listing() {
        let v = read_vocab("ab\t3\n\nc\n".as_bytes()).unwrap();
        assert_eq!(v, set(&["ab", "c"]));
    }
}
