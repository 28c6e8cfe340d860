//! Dynamic programming over (position, category) for minimum-cost
//! segmentation and tagging.

use std::cmp::Ordering;

use super::analysis::Analysis;
use super::category::{Category, State, Transitions};
use super::model::FlatCatModel;

#[derive(Debug, Clone, Copy)]
struct Cell {
    cost: f64,
    morphs: usize,
    /// `(position, category index, seen-non-ZZZ flag)` of the predecessor;
    /// `None` for the start cell.
    back: Option<(usize, usize, usize)>,
}

const START: usize = 4;

/// Minimum-cost analysis of `word`.
///
/// `emission_cost(morph, category)` returns the cost in nats of emitting
/// `morph` in `category`, or `None` when impossible. Transition costs are
/// multiplied by `transition_scale`. Candidate morphs are limited to
/// `max_chars` characters. Ties go to fewer morphs, then to the
/// lexicographically smallest boundary sequence.
pub(crate) fn decode<F>(
    word: &str,
    transitions: &Transitions,
    transition_scale: f64,
    max_chars: usize,
    mut emission_cost: F,
) -> Option<(Analysis, f64)>
where
    F: FnMut(&str, Category) -> Option<f64>,
{
    let offsets: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(word.len()))
        .collect();
    let n = offsets.len() - 1;
    if n == 0 {
        return None;
    }

    // cells[pos][state][flag]; state 0..4 are categories, START only at pos 0.
    let mut cells: Vec<[[Option<Cell>; 2]; 5]> = vec![[[None; 2]; 5]; n + 1];
    cells[0][START][0] = Some(Cell {
        cost: 0.0,
        morphs: 0,
        back: None,
    });

    let trans_cost = |from: usize, to: Category| -> Option<f64> {
        let from_state = if from == START {
            State::Boundary
        } else {
            Category::ALL[from].state()
        };
        let lp = transitions.log_prob(from_state, to.state());
        (lp > f64::NEG_INFINITY).then(|| -lp * transition_scale)
    };

    for end in 1..=n {
        let first = end.saturating_sub(max_chars.max(1));
        for start in first..end {
            let morph = &word[offsets[start]..offsets[end]];
            for cat in Category::ALL {
                let Some(emit) = emission_cost(morph, cat) else {
                    continue;
                };
                if !emit.is_finite() {
                    continue;
                }
                for from in 0..5 {
                    for flag in 0..2 {
                        let Some(prev) = cells[start][from][flag] else {
                            continue;
                        };
                        let Some(tc) = trans_cost(from, cat) else {
                            continue;
                        };
                        let new_flag = usize::from(flag == 1 || cat != Category::Zzz);
                        let cand = Cell {
                            cost: prev.cost + tc + emit,
                            morphs: prev.morphs + 1,
                            back: Some((start, from, flag)),
                        };
                        let slot = (end, cat.index(), new_flag);
                        let replace = match cells[end][cat.index()][new_flag] {
                            None => true,
                            Some(cur) => compare(&cells, &cand, &cur, slot) == Ordering::Less,
                        };
                        if replace {
                            cells[end][cat.index()][new_flag] = Some(cand);
                        }
                    }
                }
            }
        }
    }

    // Close with the transition into the word boundary.
    let mut best: Option<(Cell, usize)> = None;
    for cat in Category::ALL {
        let Some(cell) = cells[n][cat.index()][1] else {
            continue;
        };
        let lp = transitions.log_prob(cat.state(), State::Boundary);
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let closed = Cell {
            cost: cell.cost - lp * transition_scale,
            ..cell
        };
        let better = match &best {
            None => true,
            Some((cur, cur_cat)) => {
                let ord = closed
                    .cost
                    .partial_cmp(&cur.cost)
                    .unwrap_or(Ordering::Equal)
                    .then(closed.morphs.cmp(&cur.morphs))
                    .then_with(|| {
                        boundaries(&cells, (n, cat.index(), 1)).cmp(&boundaries(&cells, (n, *cur_cat, 1)))
                    });
                ord == Ordering::Less
            }
        };
        if better {
            best = Some((closed, cat.index()));
        }
    }

    let (final_cell, final_cat) = best?;
    let mut items = Vec::with_capacity(final_cell.morphs);
    let mut at = (n, final_cat, 1);
    while let Some(cell) = cells[at.0][at.1][at.2] {
        let Some(back) = cell.back else { break };
        items.push((
            word[offsets[back.0]..offsets[at.0]].to_owned(),
            Category::ALL[at.1],
        ));
        at = back;
    }
    items.reverse();
    Some((Analysis::from_valid(items), final_cell.cost))
}

/// Orders a candidate against the incumbent of the cell they both end in.
fn compare(
    cells: &[[[Option<Cell>; 2]; 5]],
    cand: &Cell,
    cur: &Cell,
    slot: (usize, usize, usize),
) -> Ordering {
    cand.cost
        .partial_cmp(&cur.cost)
        .unwrap_or(Ordering::Equal)
        .then(cand.morphs.cmp(&cur.morphs))
        .then_with(|| {
            // Both paths end at slot.0; compare their boundary sequences.
            let mut a = cand.back.map(|b| boundaries(cells, b)).unwrap_or_default();
            let mut b = cur.back.map(|b| boundaries(cells, b)).unwrap_or_default();
            a.push(slot.0);
            b.push(slot.0);
            a.cmp(&b)
        })
}

/// Morph end positions (in characters) along the best path into `at`.
fn boundaries(cells: &[[[Option<Cell>; 2]; 5]], mut at: (usize, usize, usize)) -> Vec<usize> {
    let mut out = Vec::new();
    while at.0 > 0 {
        out.push(at.0);
        match cells[at.0][at.1][at.2].and_then(|c| c.back) {
            Some(b) => at = b,
            None => break,
        }
    }
    out.reverse();
    out
}

/// Best analysis of `word` under `model` together with its cost in nats.
///
/// Candidate morphs are lexicon entries plus any single character (priced
/// by the smoothed fallback when outside the lexicon), so a path always
/// exists. Panics if `word` is empty.
pub fn viterbi_segment_with_cost(word: &str, model: &FlatCatModel) -> (Analysis, f64) {
    assert!(!word.is_empty(), "cannot segment an empty word");
    decode(
        word,
        model.transitions(),
        1.0,
        model.max_morph_chars().max(1),
        |morph, cat| Some(-model.segment_emission(morph, cat)),
    )
    .expect("single-character fallback always yields an analysis")
}

pub fn viterbi_segment(word: &str, model: &FlatCatModel) -> Analysis {
    viterbi_segment_with_cost(word, model).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WordCounts;
    use crate::flatcat::charmodel::CharModel;
    use crate::flatcat::model::analysis_cost;
    use crate::flatcat::prior::MorphStats;
    use crate::flatcat::HyperParams;
    use approx::assert_relative_eq;

    fn stats(morph: &str, count: u64, lppl: f64, rppl: f64) -> MorphStats {
        MorphStats {
            morph: morph.to_owned(),
            token_count: count,
            left_perplexity: lppl,
            right_perplexity: rppl,
        }
    }

    fn toy_model(lexicon: Vec<MorphStats>) -> FlatCatModel {
        let counts: WordCounts = [("evlerde", 1)].into_iter().collect();
        let mut tc = [[0u64; 5]; 5];
        tc[0][2] = 50; // B->STM
        tc[2][3] = 40; // STM->SUF
        tc[3][3] = 20; // SUF->SUF
        tc[3][0] = 40; // SUF->B
        tc[2][0] = 10; // STM->B
        FlatCatModel::new(
            HyperParams::default(),
            lexicon,
            Transitions::estimate(&tc, 0.5),
            CharModel::from_counts(&counts),
        )
    }

    #[test]
    fn single_character_word_is_a_stem() {
        let model = toy_model(vec![stats("ev", 3, 1.0, 20.0)]);
        let a = viterbi_segment("a", &model);
        assert_eq!(a.items(), &[("a".to_owned(), Category::Stm)]);
    }

    /// Every segmentation into lexicon morphs or single characters, with every
    /// tagging, priced independently of the DP.
    fn brute_force_min(word: &str, model: &FlatCatModel) -> f64 {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << (n - 1)) {
            let mut pieces = Vec::new();
            let mut cur = String::new();
            for (i, ch) in chars.iter().enumerate() {
                cur.push(*ch);
                if i == n - 1 || mask & (1 << i) != 0 {
                    pieces.push(std::mem::take(&mut cur));
                }
            }
            if pieces.iter().any(|p| !model.contains(p) && p.chars().count() > 1) {
                continue;
            }
            let k = pieces.len();
            for tags in 0..4usize.pow(k as u32) {
                let mut t = tags;
                let items: Vec<(String, Category)> = pieces
                    .iter()
                    .map(|p| {
                        let c = Category::ALL[t % 4];
                        t /= 4;
                        (p.clone(), c)
                    })
                    .collect();
                if let Ok(a) = Analysis::new(items) {
                    best = best.min(analysis_cost(&a, model));
                }
            }
        }
        best
    }

    #[test]
    fn recovers_stem_and_suffixes() {
        let model = toy_model(vec![
            stats("ev", 30, 1.0, 25.0),
            stats("ler", 40, 30.0, 12.0),
            stats("de", 35, 30.0, 1.0),
        ]);
        let (a, cost) = viterbi_segment_with_cost("evlerde", &model);
        assert_eq!(
            a.items(),
            &[
                ("ev".to_owned(), Category::Stm),
                ("ler".to_owned(), Category::Suf),
                ("de".to_owned(), Category::Suf),
            ]
        );
        assert_relative_eq!(cost, brute_force_min("evlerde", &model), max_relative = 1e-12);
        assert_relative_eq!(cost, analysis_cost(&a, &model), max_relative = 1e-12);
    }

    #[test]
    fn matches_brute_force_on_small_words() {
        let model = toy_model(vec![
            stats("ab", 5, 2.0, 12.0),
            stats("ba", 3, 11.0, 1.0),
            stats("a", 7, 4.0, 4.0),
            stats("bab", 2, 1.0, 1.0),
        ]);
        for word in ["a", "b", "ab", "ba", "abab", "babab", "aabba", "bbbbbb"] {
            let (a, cost) = viterbi_segment_with_cost(word, &model);
            assert_eq!(a.surface(), word);
            assert_relative_eq!(cost, brute_force_min(word, &model), max_relative = 1e-9);
        }
    }

    #[test]
    fn ties_prefer_fewer_morphs() {
        // With an all-zero cost function every analysis ties.
        let t = Transitions::uniform();
        let (a, _) = decode("abc", &t, 0.0, 3, |_, _| Some(0.0)).unwrap();
        assert_eq!(a.len(), 1);
        // Forced two-piece analyses: the earliest boundary wins.
        let (a, _) = decode("abc", &t, 0.0, 2, |_, _| Some(0.0)).unwrap();
        assert_eq!(a.boundaries(), vec![1]);
    }

    #[test]
    fn handles_multibyte_characters() {
        let model = toy_model(vec![stats("ağ", 10, 1.0, 15.0), stats("ları", 8, 15.0, 2.0)]);
        let a = viterbi_segment("ağlarını", &model);
        assert_eq!(a.surface(), "ağlarını");
    }
}
