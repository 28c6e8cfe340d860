//! Plain-text `LMVR1` model files.
//!
//! ```text
//! LMVR1
//! alpha<TAB>...            (header: alpha, ppl_threshold, len_threshold, slope,
//! ...                       nu, m, mean_word_length, char_tokens)
//! [chars]
//! a<TAB>prob
//! [transitions]
//! B<TAB>STM<TAB>prob
//! [lexicon]
//! morph<TAB>count<TAB>lppl<TAB>rppl
//! ```
//!
//! Floats are written with 17 significant digits so a reload reproduces
//! every probability bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::category::{is_allowed, State, Transitions};
use super::charmodel::CharModel;
use super::model::FlatCatModel;
use super::prior::MorphStats;
use super::HyperParams;
use crate::error::{Error, Result};

pub const MAGIC: &str = "LMVR1";

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_text(model: &FlatCatModel) -> String {
    let h = model.hyper();
    let cm = model.char_model();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let header = [
        ("alpha", float(h.alpha)),
        ("ppl_threshold", float(h.ppl_threshold)),
        ("len_threshold", float(h.len_threshold)),
        ("slope", float(h.slope)),
        ("nu", model.nu().to_string()),
        ("m", model.lexicon_size().to_string()),
        ("mean_word_length", float(cm.mean_word_length())),
        ("char_tokens", cm.char_tokens().to_string()),
    ];
    for (key, value) in header {
        let _ = writeln!(out, "{key}\t{value}");
    }
    out.push_str("[chars]\n");
    for (ch, p) in cm.probs() {
        let _ = writeln!(out, "{ch}\t{}", float(*p));
    }
    out.push_str("[transitions]\n");
    let t = model.transitions();
    for from in State::ALL {
        for to in State::ALL {
            if is_allowed(from, to) {
                let _ = writeln!(out, "{}\t{}\t{}", from.tag(), to.tag(), float(t.prob(from, to)));
            }
        }
    }
    out.push_str("[lexicon]\n");
    for s in model.lexicon() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            s.morph,
            s.token_count,
            float(s.left_perplexity),
            float(s.right_perplexity)
        );
    }
    out
}

#[derive(PartialEq, PartialOrd)]
enum Section {
    Header,
    Chars,
    Transitions,
    Lexicon,
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::format(line, format!("bad number {s:?}")))
}

fn parse_u64(s: &str, line: usize) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| Error::format(line, format!("bad integer {s:?}")))
}

pub fn from_text(text: &str) -> Result<FlatCatModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(Error::format(1, format!("expected header {MAGIC:?}"))),
    }

    let mut header: BTreeMap<&str, &str> = BTreeMap::new();
    let mut chars = BTreeMap::new();
    let mut trans = [[0.0; State::COUNT]; State::COUNT];
    let mut lexicon = Vec::new();
    let mut section = Section::Header;

    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let next = match line {
            "[chars]" => Some(Section::Chars),
            "[transitions]" => Some(Section::Transitions),
            "[lexicon]" => Some(Section::Lexicon),
            _ => None,
        };
        if let Some(next) = next {
            if next <= section {
                return Err(Error::format(no, "section out of order"));
            }
            section = next;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match section {
            Section::Header => {
                let [key, value] = fields[..] else {
                    return Err(Error::format(no, "expected key<TAB>value"));
                };
                if header.insert(key, value).is_some() {
                    return Err(Error::format(no, format!("duplicate key {key:?}")));
                }
            }
            Section::Chars => {
                let [ch, p] = fields[..] else {
                    return Err(Error::format(no, "expected char<TAB>prob"));
                };
                let mut it = ch.chars();
                let (Some(c), None) = (it.next(), it.next()) else {
                    return Err(Error::format(no, format!("not a single character: {ch:?}")));
                };
                chars.insert(c, parse_f64(p, no)?);
            }
            Section::Transitions => {
                let [from, to, p] = fields[..] else {
                    return Err(Error::format(no, "expected from<TAB>to<TAB>prob"));
                };
                let from: State = from
                    .parse()
                    .map_err(|e: Error| Error::format(no, e.to_string()))?;
                let to: State = to.parse().map_err(|e: Error| Error::format(no, e.to_string()))?;
                trans[from.index()][to.index()] = parse_f64(p, no)?;
            }
            Section::Lexicon => {
                let [morph, count, lppl, rppl] = fields[..] else {
                    return Err(Error::format(no, "expected morph<TAB>count<TAB>lppl<TAB>rppl"));
                };
                if morph.is_empty() {
                    return Err(Error::format(no, "empty morph"));
                }
                let token_count = parse_u64(count, no)?;
                if token_count == 0 {
                    return Err(Error::format(no, "zero-count morph"));
                }
                lexicon.push(MorphStats {
                    morph: morph.to_owned(),
                    token_count,
                    left_perplexity: parse_f64(lppl, no)?,
                    right_perplexity: parse_f64(rppl, no)?,
                });
            }
        }
    }

    let get = |key: &str| -> Result<&str> {
        header
            .get(key)
            .copied()
            .ok_or_else(|| Error::format(0, format!("missing header key {key:?}")))
    };
    let hyper = HyperParams {
        alpha: parse_f64(get("alpha")?, 0)?,
        ppl_threshold: parse_f64(get("ppl_threshold")?, 0)?,
        len_threshold: parse_f64(get("len_threshold")?, 0)?,
        slope: parse_f64(get("slope")?, 0)?,
    };
    let nu = parse_u64(get("nu")?, 0)?;
    let m = parse_u64(get("m")?, 0)?;
    let char_model = CharModel::from_parts(
        chars,
        parse_f64(get("mean_word_length")?, 0)?,
        parse_u64(get("char_tokens")?, 0)?,
    );
    let transitions = Transitions::from_probs(trans).map_err(|e| Error::format(0, e.to_string()))?;

    let mut seen = std::collections::HashSet::new();
    for s in &lexicon {
        if !seen.insert(s.morph.as_str()) {
            return Err(Error::format(0, format!("duplicate morph {:?}", s.morph)));
        }
    }
    let model = FlatCatModel::new(hyper, lexicon, transitions, char_model);
    if model.lexicon_size() as u64 != m || model.nu() != nu {
        return Err(Error::format(
            0,
            format!(
                "header says m={m}, nu={nu} but lexicon has m={}, nu={}",
                model.lexicon_size(),
                model.nu()
            ),
        ));
    }
    Ok(model)
}
