//! Continuation-marker conventions that make segmented text reversible.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const ATAT: &str = "@@";

/// How the pieces of a segmented word are marked in running text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MarkerScheme {
    /// First piece bare, later pieces prefixed with `+` (`ağ +larını`).
    #[default]
    PlusPrefix,
    /// Every non-final piece suffixed with `@@` (`ağ@@ larını`).
    AtatSuffix,
}

impl FromStr for MarkerScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "plus-prefix" => Ok(MarkerScheme::PlusPrefix),
            "atat" | "atat-suffix" => Ok(MarkerScheme::AtatSuffix),
            other => Err(Error::InvalidParameter(format!(
                "unknown marker scheme {other:?} (expected plus or atat)"
            ))),
        }
    }
}

impl fmt::Display for MarkerScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkerScheme::PlusPrefix => "plus",
            MarkerScheme::AtatSuffix => "atat",
        })
    }
}

/// True for tokens that would be ambiguous after segmentation.
pub fn is_reserved_token(token: &str) -> bool {
    token.starts_with('+') || token.ends_with(ATAT)
}

/// Renders the pieces of one word, joined by single spaces.
pub fn render_word<S: AsRef<str>>(pieces: &[S], scheme: MarkerScheme) -> String {
    let mut out = String::new();
    let last = pieces.len().saturating_sub(1);
    for (i, piece) in pieces.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match scheme {
            MarkerScheme::PlusPrefix => {
                if i > 0 {
                    out.push('+');
                }
                out.push_str(piece.as_ref());
            }
            MarkerScheme::AtatSuffix => {
                out.push_str(piece.as_ref());
                if i < last {
                    out.push_str(ATAT);
                }
            }
        }
    }
    out
}

/// Renders a single piece as it appears in a vocabulary listing.
pub fn annotate_piece(piece: &str, index: usize, count: usize, scheme: MarkerScheme) -> String {
    match scheme {
        MarkerScheme::PlusPrefix if index > 0 => format!("+{piece}"),
        MarkerScheme::AtatSuffix if index + 1 < count => format!("{piece}{ATAT}"),
        _ => piece.to_owned(),
    }
}

/// Removes the marker from a vocabulary entry, whichever scheme it uses.
pub fn strip_marker(piece: &str) -> &str {
    let piece = piece.strip_suffix(ATAT).unwrap_or(piece);
    if piece.len() > 1 {
        piece.strip_prefix('+').unwrap_or(piece)
    } else {
        piece
    }
}

/// Byte ranges of the whitespace-delimited tokens of `line`.
fn token_spans(line: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, line.len()));
    }
    spans
}

/// Undoes segmentation: joins marked pieces back into words.
///
/// Whitespace between words is copied through untouched, so the result is
/// byte-identical to the text that was segmented.
pub fn detokenize(line: &str, scheme: MarkerScheme) -> Result<String> {
    let spans = token_spans(line);
    let mut out = String::with_capacity(line.len());
    let mut cursor = 0;
    match scheme {
        MarkerScheme::PlusPrefix => {
            for (i, &(s, e)) in spans.iter().enumerate() {
                let token = &line[s..e];
                if let Some(rest) = token.strip_prefix('+') {
                    if i == 0 {
                        return Err(Error::MalformedMarker(format!(
                            "line starts with continuation token {token:?}"
                        )));
                    }
                    // Drop the separator before the continuation piece.
                    out.push_str(rest);
                } else {
                    out.push_str(&line[cursor..s]);
                    out.push_str(token);
                }
                cursor = e;
            }
        }
        MarkerScheme::AtatSuffix => {
            let mut joining = false;
            for &(s, e) in &spans {
                if !joining {
                    out.push_str(&line[cursor..s]);
                }
                let token = &line[s..e];
                match token.strip_suffix(ATAT) {
                    Some(stem) => {
                        out.push_str(stem);
                        joining = true;
                    }
                    None => {
                        out.push_str(token);
                        joining = false;
                    }
                }
                cursor = e;
            }
            if joining {
                return Err(Error::DanglingMarker(line.to_owned()));
            }
        }
    }
    out.push_str(&line[cursor..]);
    Ok(out)
}

/// Groups the tokens of a segmented line into words, markers removed.
pub fn split_segmented_line(line: &str, scheme: MarkerScheme) -> Result<Vec<Vec<String>>> {
    let mut words: Vec<Vec<String>> = Vec::new();
    match scheme {
        MarkerScheme::PlusPrefix => {
            for token in line.split_whitespace() {
                match token.strip_prefix('+') {
                    Some(rest) => match words.last_mut() {
                        Some(word) => word.push(rest.to_owned()),
                        None => {
                            return Err(Error::MalformedMarker(format!(
                                "line starts with continuation token {token:?}"
                            )))
                        }
                    },
                    None => words.push(vec![token.to_owned()]),
                }
            }
        }
        MarkerScheme::AtatSuffix => {
            let mut current: Vec<String> = Vec::new();
            for token in line.split_whitespace() {
                match token.strip_suffix(ATAT) {
                    Some(stem) => current.push(stem.to_owned()),
                    None => {
                        current.push(token.to_owned());
                        words.push(std::mem::take(&mut current));
                    }
                }
            }
            if !current.is_empty() {
                return Err(Error::DanglingMarker(line.to_owned()));
            }
        }
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detokenizes_both_schemes() {
        assert_eq!(
            detokenize("ağ +larını", MarkerScheme::PlusPrefix).unwrap(),
            "ağlarını"
        );
        assert_eq!(
            detokenize("ağ@@ larını", MarkerScheme::AtatSuffix).unwrap(),
            "ağlarını"
        );
        for scheme in [MarkerScheme::PlusPrefix, MarkerScheme::AtatSuffix] {
            assert_eq!(detokenize("hello world", scheme).unwrap(), "hello world");
        }
    }

    #[test]
    fn keeps_original_whitespace() {
        assert_eq!(
            detokenize("  a +b\t\tc +d +e ", MarkerScheme::PlusPrefix).unwrap(),
            "  ab\t\tcde "
        );
        assert_eq!(
            detokenize(" a@@ b\tc@@ d@@ e  ", MarkerScheme::AtatSuffix).unwrap(),
            " ab\tcde  "
        );
    }

    #[test]
    fn dangling_and_malformed() {
        assert!(matches!(
            detokenize("a b@@", MarkerScheme::AtatSuffix),
            Err(Error::DanglingMarker(_))
        ));
        assert!(matches!(
            detokenize("+a b", MarkerScheme::PlusPrefix),
            Err(Error::MalformedMarker(_))
        ));
        assert!(split_segmented_line("a@@", MarkerScheme::AtatSuffix).is_err());
    }

    #[test]
    fn renders_pieces() {
        assert_eq!(
            render_word(&["ağlama", "yacak"], MarkerScheme::PlusPrefix),
            "ağlama +yacak"
        );
        assert_eq!(
            render_word(&["ağ", "larını"], MarkerScheme::AtatSuffix),
            "ağ@@ larını"
        );
        assert_eq!(render_word(&["ev"], MarkerScheme::AtatSuffix), "ev");
    }

    #[test]
    fn plus_inside_pieces_survives() {
        // "a+b" split as a | +b renders "a ++b".
        let rendered = render_word(&["a", "+b"], MarkerScheme::PlusPrefix);
        assert_eq!(detokenize(&rendered, MarkerScheme::PlusPrefix).unwrap(), "a+b");
        let rendered = render_word(&["a@", "@b"], MarkerScheme::AtatSuffix);
        assert_eq!(detokenize(&rendered, MarkerScheme::AtatSuffix).unwrap(), "a@@b");
    }

    #[test]
    fn groups_words() {
        let words = split_segmented_line("ağ +larını ev", MarkerScheme::PlusPrefix).unwrap();
        assert_eq!(words, vec![vec!["ağ", "larını"], vec!["ev"]]);
        let words = split_segmented_line("ağ@@ larını ev", MarkerScheme::AtatSuffix).unwrap();
        assert_eq!(words, vec![vec!["ağ", "larını"], vec!["ev"]]);
    }

    #[test]
    fn strips_markers() {
        assert_eq!(strip_marker("+lar"), "lar");
        assert_eq!(strip_marker("ağ@@"), "ağ");
        assert_eq!(strip_marker("+"), "+");
        assert_eq!(annotate_piece("lar", 1, 2, MarkerScheme::PlusPrefix), "+lar");
        assert_eq!(annotate_piece("ağ", 0, 2, MarkerScheme::AtatSuffix), "ağ@@");
    }
}
