//! Corpus ingestion: word counting, corpus statistics and conversion of
//! externally produced morphological analyses into token streams.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::markers::is_reserved_token;

/// End-of-word token appended after every converted analysis.
pub const EOW: &str = "<EOW>";

/// Multiset of word types with their token frequencies.
///
/// Backed by an ordered map so that iteration (and everything derived from
/// it, model files included) is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordCounts {
    entries: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl WordCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `word`. Zero counts are ignored.
    ///
    /// Panics if `word` is empty or contains whitespace; callers that handle
    /// untrusted input go through [`load_word_counts`] instead.
    pub fn add(&mut self, word: &str, count: u64) {
        assert!(
            !word.is_empty() && !word.chars().any(char::is_whitespace),
            "word types must be non-empty and whitespace-free: {word:?}"
        );
        if count == 0 {
            return;
        }
        *self.entries.entry(word.to_owned()).or_insert(0) += count;
        self.total_tokens += count;
    }

    pub fn get(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_types(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates `(word, count)` in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.entries.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Applies a count transformation, returning a new multiset.
    pub fn dampened(&self, mode: Dampening) -> WordCounts {
        let mut out = WordCounts::new();
        for (word, count) in self.iter() {
            out.add(word, mode.apply(count));
        }
        out
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for WordCounts {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut counts = WordCounts::new();
        for (word, count) in iter {
            counts.add(word.as_ref(), count);
        }
        counts
    }
}

/// Count transformation applied before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dampening {
    /// Raw token counts.
    #[default]
    None,
    /// `1 + floor(ln c)`.
    Log,
    /// Every type counted once.
    Ones,
}

impl Dampening {
    pub fn apply(self, count: u64) -> u64 {
        match self {
            Dampening::None => count,
            Dampening::Log if count == 0 => 0,
            Dampening::Log => 1 + (count as f64).ln().floor() as u64,
            Dampening::Ones => u64::from(count > 0),
        }
    }
}

impl FromStr for Dampening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Dampening::None),
            "log" => Ok(Dampening::Log),
            "ones" => Ok(Dampening::Ones),
            other => Err(Error::InvalidParameter(format!(
                "unknown dampening mode {other:?} (expected none, log or ones)"
            ))),
        }
    }
}

impl fmt::Display for Dampening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dampening::None => "none",
            Dampening::Log => "log",
            Dampening::Ones => "ones",
        })
    }
}

/// Reads `reader` line by line, yielding `(1-based line number, line)` with the
/// trailing newline removed. Invalid UTF-8 is reported with its line number.
pub(crate) fn read_lines<R: BufRead>(mut reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    let mut line_no = 0usize;
    let mut buf = Vec::new();
    std::iter::from_fn(move || {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => None,
            Ok(_) => {
                line_no += 1;
                if buf.last() == Some(&b'\n') {
                    buf.pop();
                }
                Some(
                    String::from_utf8(std::mem::take(&mut buf))
                        .map(|s| (line_no, s))
                        .map_err(|_| Error::InvalidUtf8 { line: line_no }),
                )
            }
            Err(e) => Some(Err(e.into())),
        }
    })
}

/// Counts whitespace-separated tokens in a line-oriented UTF-8 stream.
///
/// Returns the counts together with the number of lines read.
pub fn load_word_counts_with_lines<R: BufRead>(reader: R) -> Result<(WordCounts, usize)> {
    let mut counts = WordCounts::new();
    let mut lines = 0;
    for item in read_lines(reader) {
        let (line_no, line) = item?;
        lines = line_no;
        for token in line.split_whitespace() {
            if is_reserved_token(token) {
                return Err(Error::ReservedMarker {
                    line: line_no,
                    token: token.to_owned(),
                });
            }
            counts.add(token, 1);
        }
    }
    Ok((counts, lines))
}

pub fn load_word_counts<R: BufRead>(reader: R) -> Result<WordCounts> {
    load_word_counts_with_lines(reader).map(|(counts, _)| counts)
}

/// Size statistics of a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub sentences: u64,
    pub tokens: u64,
    pub types: u64,
    /// Characters per word, token-weighted.
    pub mean_word_length: f64,
}

pub fn corpus_stats(counts: &WordCounts, sentence_count: u64) -> CorpusStats {
    let chars: u64 = counts.iter().map(|(w, c)| c * w.chars().count() as u64).sum();
    let tokens = counts.total_tokens();
    CorpusStats {
        sentences: sentence_count,
        tokens,
        types: counts.total_types() as u64,
        mean_word_length: if tokens == 0 {
            0.0
        } else {
            chars as f64 / tokens as f64
        },
    }
}

/// Converts one line of `root+Tag+Tag` analyses into the token stream
/// `root +Tag +Tag <EOW>`, one `<EOW>` per analyzed word.
pub fn convert_analysis_line(line: &str, line_no: usize) -> Result<String> {
    let mut out: Vec<&str> = Vec::new();
    for token in line.split_whitespace() {
        let mut parts = token.split('+');
        let root = parts.next().unwrap_or_default();
        if root.is_empty() {
            return Err(Error::EmptyRoot {
                line: line_no,
                token: token.to_owned(),
            });
        }
        out.push(root);
        // Tags keep their leading '+'; slice them out of the original token.
        let mut offset = root.len();
        for tag in parts {
            out.push(&token[offset..offset + 1 + tag.len()]);
            offset += 1 + tag.len();
        }
        out.push(EOW);
    }
    Ok(out.join(" "))
}

/// Converts a whole analysis stream, one output line per input line.
pub fn convert_morph_analyses<R: BufRead>(reader: R) -> Result<Vec<String>> {
    read_lines(reader)
        .map(|item| {
            let (line_no, line) = item?;
            convert_analysis_line(&line, line_no)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts_of(text: &str) -> WordCounts {
        load_word_counts(text.as_bytes()).unwrap()
    }

    #[test]
    fn counts_simple_line() {
        let c = counts_of("a b a\n");
        assert_eq!(c.get("a"), 2);
        assert_eq!(c.get("b"), 1);
        assert_eq!(c.total_tokens(), 3);
        assert_eq!(c.total_types(), 2);
    }

    #[test]
    fn empty_stream() {
        let c = counts_of("");
        assert!(c.is_empty());
        assert_eq!(c.total_tokens(), 0);
    }

    #[test]
    fn repeated_lines() {
        let c = counts_of("x y\nx y\n");
        assert_eq!(c.get("x"), 2);
        assert_eq!(c.get("y"), 2);
        assert_eq!(c.total_types(), 2);
    }

    #[test]
    fn rejects_reserved_markers_with_location() {
        match load_word_counts("ok fine\nsome +bad\n".as_bytes()) {
            Err(Error::ReservedMarker { line, token }) => {
                assert_eq!(line, 2);
                assert_eq!(token, "+bad");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_word_counts("ab@@ c".as_bytes()),
            Err(Error::ReservedMarker { line: 1, .. })
        ));
        // '+' and '@' inside a token are fine.
        assert_eq!(counts_of("a+b c@d").total_types(), 2);
    }

    #[test]
    fn rejects_invalid_utf8() {
        let bytes: &[u8] = b"fine\n\xff\xfe\n";
        assert!(matches!(
            load_word_counts(bytes),
            Err(Error::InvalidUtf8 { line: 2 })
        ));
    }

    #[test]
    fn stats_arithmetic() {
        let c: WordCounts = [("ab", 1), ("c", 1)].into_iter().collect();
        let s = corpus_stats(&c, 1);
        assert_eq!((s.tokens, s.types), (2, 2));
        assert_eq!(s.mean_word_length, 1.5);

        let c: WordCounts = [("a", 4)].into_iter().collect();
        assert_eq!(corpus_stats(&c, 1).mean_word_length, 1.0);

        let c: WordCounts = [("abc", 2), ("de", 1)].into_iter().collect();
        assert!((corpus_stats(&c, 1).mean_word_length - 8.0 / 3.0).abs() < 1e-15);

        assert_eq!(corpus_stats(&WordCounts::new(), 0).mean_word_length, 0.0);
    }

    #[test]
    fn mean_length_counts_characters_not_bytes() {
        let c: WordCounts = [("ağ", 1)].into_iter().collect();
        assert_eq!(corpus_stats(&c, 1).mean_word_length, 2.0);
    }

    #[test]
    fn dampening_modes() {
        assert_eq!(Dampening::None.apply(20), 20);
        assert_eq!(Dampening::Log.apply(1), 1);
        assert_eq!(Dampening::Log.apply(20), 1 + 2); // ln 20 = 2.99
        assert_eq!(Dampening::Ones.apply(20), 1);
        let c: WordCounts = [("a", 100), ("b", 1)].into_iter().collect();
        let d = c.dampened(Dampening::Ones);
        assert_eq!(d.total_tokens(), 2);
        assert_eq!("log".parse::<Dampening>().unwrap(), Dampening::Log);
        assert!("sqrt".parse::<Dampening>().is_err());
    }

    #[test]
    fn converts_analyses() {
        assert_eq!(
            convert_analysis_line("ağ+Noun+A3pl", 1).unwrap(),
            "ağ +Noun +A3pl <EOW>"
        );
        assert_eq!(convert_analysis_line("ev", 1).unwrap(), "ev <EOW>");
        assert_eq!(
            convert_analysis_line("ağla+Neg+Fut+A3sg", 1).unwrap(),
            "ağla +Neg +Fut +A3sg <EOW>"
        );
        assert_eq!(
            convert_analysis_line("ev ağ+Noun", 1).unwrap(),
            "ev <EOW> ağ +Noun <EOW>"
        );
        assert!(matches!(
            convert_analysis_line("ev +Noun", 3),
            Err(Error::EmptyRoot { line: 3, .. })
        ));
    }

    #[test]
    fn one_eow_per_word() {
        let lines = convert_morph_analyses("a+X b c+Y+Z\n\nd\n".as_bytes()).unwrap();
        assert_eq!(lines.len(), 3);
        let eows: Vec<usize> = lines
            .iter()
            .map(|l| l.split_whitespace().filter(|t| *t == EOW).count())
            .collect();
        assert_eq!(eows, vec![3, 0, 1]);
    }
}
