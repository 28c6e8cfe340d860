//! Joint moves over groups of words.
//!
//! A prefix move cuts string `a` off the first morph of every word whose
//! first morph starts with `a`; a suffix move does the same at the end of the
//! last morph. Single-word moves cannot discover a stem shared by many
//! frequent words, because the first word to split pays for a fresh
//! low-count morph that only becomes cheap once the others follow.

use std::collections::BTreeMap;

use super::ledger::Ledger;
use super::proposal::retag;
use crate::flatcat::{Analysis, CharModel};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Affix {
    Prefix(String),
    Suffix(String),
}

/// New pieces for `analysis` under `affix`, or `None` if it does not apply.
fn cut(analysis: &Analysis, affix: &Affix) -> Option<Vec<String>> {
    let mut pieces: Vec<String> = analysis.morphs().map(str::to_owned).collect();
    match affix {
        Affix::Prefix(a) => {
            let first = &pieces[0];
            if first.len() <= a.len() || !first.starts_with(a.as_str()) {
                return None;
            }
            let rest = first[a.len()..].to_owned();
            pieces[0] = a.clone();
            pieces.insert(1, rest);
        }
        Affix::Suffix(b) => {
            let last = pieces.last().unwrap();
            if last.len() <= b.len() || !last.ends_with(b.as_str()) {
                return None;
            }
            let rest = last[..last.len() - b.len()].to_owned();
            let n = pieces.len();
            pieces[n - 1] = rest;
            pieces.push(b.clone());
        }
    }
    Some(pieces)
}

/// Affixes shared by at least two words, in a fixed order.
pub(crate) fn affixes(analyses: &[Analysis]) -> Vec<Affix> {
    let mut members: BTreeMap<Affix, usize> = BTreeMap::new();
    for a in analyses {
        let first = a.items()[0].0.as_str();
        for (cut, _) in first.char_indices().skip(1) {
            *members.entry(Affix::Prefix(first[..cut].to_owned())).or_insert(0) += 1;
        }
        let last = a.items()[a.len() - 1].0.as_str();
        for (cut, _) in last.char_indices().skip(1) {
            *members.entry(Affix::Suffix(last[cut..].to_owned())).or_insert(0) += 1;
        }
    }
    members
        .into_iter()
        .filter(|(_, n)| *n >= 2)
        .map(|(affix, _)| affix)
        .collect()
}

/// Words touched by `affix` and their proposed analyses.
pub(crate) fn plan(
    affix: &Affix,
    words: &[(String, u64)],
    analyses: &[Analysis],
    ledger: &mut Ledger,
    chars: &CharModel,
) -> Vec<(usize, Analysis)> {
    let mut out = Vec::new();
    for (i, a) in analyses.iter().enumerate() {
        if let Some(pieces) = cut(a, affix) {
            let (word, freq) = &words[i];
            if let Some(new) = retag(word, *freq, &pieces, ledger, chars) {
                if &new != a {
                    out.push((i, new));
                }
            }
        }
    }
    out
}

/// Total cost after replacing the analyses in `plan`; the ledger is left
/// unchanged.
pub(crate) fn trial(
    plan: &[(usize, Analysis)],
    words: &[(String, u64)],
    analyses: &[Analysis],
    ledger: &mut Ledger,
    chars: &CharModel,
) -> f64 {
    apply(plan, words, analyses, ledger, chars);
    let after = ledger.total();
    for (i, new) in plan {
        ledger.remove(new, words[*i].1, chars);
    }
    for (i, _) in plan {
        ledger.add(&analyses[*i], words[*i].1, chars);
    }
    after
}

/// Swaps the analyses in `plan` into the ledger (not into `analyses`).
pub(crate) fn apply(
    plan: &[(usize, Analysis)],
    words: &[(String, u64)],
    analyses: &[Analysis],
    ledger: &mut Ledger,
    chars: &CharModel,
) {
    for (i, _) in plan {
        ledger.remove(&analyses[*i], words[*i].1, chars);
    }
    for (i, new) in plan {
        ledger.add(new, words[*i].1, chars);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatcat::Category;

    fn stem(w: &str) -> Analysis {
        Analysis::single(w)
    }

    #[test]
    fn cut_prefix_and_suffix() {
        let a = stem("evler");
        assert_eq!(
            cut(&a, &Affix::Prefix("ev".into())),
            Some(vec!["ev".to_string(), "ler".to_string()])
        );
        assert_eq!(
            cut(&a, &Affix::Suffix("ler".into())),
            Some(vec!["ev".to_string(), "ler".to_string()])
        );
        assert_eq!(cut(&a, &Affix::Prefix("evler".into())), None);
        assert_eq!(cut(&a, &Affix::Suffix("de".into())), None);
        let b = Analysis::new(vec![
            ("ev".into(), Category::Stm),
            ("lerde".into(), Category::Suf),
        ])
        .unwrap();
        assert_eq!(
            cut(&b, &Affix::Suffix("de".into())),
            Some(vec!["ev".to_string(), "ler".to_string(), "de".to_string()])
        );
    }

    #[test]
    fn shared_affixes_only() {
        let got = affixes(&[stem("evde"), stem("evler"), stem("kitap")]);
        assert_eq!(got, vec![Affix::Prefix("e".into()), Affix::Prefix("ev".into())]);
    }
}
