//! Common interface over the segmentation methods, and a registry that
//! selects one by name or by the header of a model file.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::bpe::{self, map_words, BpeModel};
use crate::corpus::{read_lines, WordCounts};
use crate::error::{Error, Result};
use crate::flatcat::{self, viterbi_segment, FlatCatModel};
use crate::markers::{annotate_piece, is_reserved_token, render_word, MarkerScheme};

/// A trained model that splits single words into pieces.
pub trait Segmenter: Send + Sync {
    /// Registry name of the method.
    fn method(&self) -> &'static str;

    /// Pieces of `word`; they concatenate back to `word`.
    fn segment_word(&self, word: &str) -> Vec<String>;

    /// Serialized model, starting with the method's magic line.
    fn to_model_text(&self) -> String;
}

impl Segmenter for FlatCatModel {
    fn method(&self) -> &'static str {
        "lmvr"
    }

    fn segment_word(&self, word: &str) -> Vec<String> {
        viterbi_segment(word, self).morphs().map(str::to_owned).collect()
    }

    fn to_model_text(&self) -> String {
        flatcat::io::to_text(self)
    }
}

impl Segmenter for BpeModel {
    fn method(&self) -> &'static str {
        "bpe"
    }

    fn segment_word(&self, word: &str) -> Vec<String> {
        BpeModel::segment_word(self, word)
    }

    fn to_model_text(&self) -> String {
        self.to_text()
    }
}

type Loader = fn(&str) -> Result<Box<dyn Segmenter>>;

/// One registered method.
#[derive(Clone, Copy)]
pub struct Method {
    pub name: &'static str,
    /// First line of the method's model files.
    pub magic: &'static str,
    pub load: Loader,
}

impl std::fmt::Debug for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Method")
            .field("name", &self.name)
            .field("magic", &self.magic)
            .finish()
    }
}

fn load_lmvr(text: &str) -> Result<Box<dyn Segmenter>> {
    Ok(Box::new(flatcat::io::from_text(text)?))
}

fn load_bpe(text: &str) -> Result<Box<dyn Segmenter>> {
    Ok(Box::new(BpeModel::from_text(text)?))
}

/// Segmentation methods keyed by name.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    methods: Vec<Method>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `lmvr` and `bpe`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Method {
            name: "lmvr",
            magic: flatcat::io::MAGIC,
            load: load_lmvr,
        });
        r.register(Method {
            name: "bpe",
            magic: bpe::MAGIC,
            load: load_bpe,
        });
        r
    }

    /// Adds `method`, replacing any earlier one with the same name.
    pub fn register(&mut self, method: Method) {
        self.methods.retain(|m| m.name != method.name);
        self.methods.push(method);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.methods.iter().map(|m| m.name)
    }

    pub fn get(&self, name: &str) -> Result<&Method> {
        self.methods
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMethod(name.to_owned()))
    }

    /// Loads a model, picking the method from its first line.
    pub fn load(&self, text: &str) -> Result<Box<dyn Segmenter>> {
        let first = text.lines().next().unwrap_or("");
        let method = self
            .methods
            .iter()
            .find(|m| m.magic == first)
            .ok_or_else(|| Error::format(1, format!("unrecognized model header {first:?}")))?;
        (method.load)(text)
    }

    /// Loads a model that must belong to method `name`.
    pub fn load_as(&self, name: &str, text: &str) -> Result<Box<dyn Segmenter>> {
        (self.get(name)?.load)(text)
    }
}

/// Segments every word of `line`, keeping the whitespace between words.
pub fn segment_line(line: &str, segmenter: &dyn Segmenter, scheme: MarkerScheme) -> String {
    map_words(line, |word| render_word(&segmenter.segment_word(word), scheme))
}

/// Like [`segment_line`], memoizing word segmentations in `cache`.
pub fn segment_line_cached(
    line: &str,
    segmenter: &dyn Segmenter,
    scheme: MarkerScheme,
    cache: &mut HashMap<String, String>,
) -> String {
    map_words(line, |word| {
        cache
            .entry(word.to_owned())
            .or_insert_with(|| render_word(&segmenter.segment_word(word), scheme))
            .clone()
    })
}

/// Fails on the first token carrying a reserved marker.
pub fn check_line(line: &str, line_no: usize) -> Result<()> {
    match line.split_whitespace().find(|t| is_reserved_token(t)) {
        Some(token) => Err(Error::ReservedMarker {
            line: line_no,
            token: token.to_owned(),
        }),
        None => Ok(()),
    }
}

/// Segments a text stream line by line.
pub fn segment_corpus<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    segmenter: &dyn Segmenter,
    scheme: MarkerScheme,
) -> Result<()> {
    let mut cache = HashMap::new();
    for item in read_lines(reader) {
        let (line_no, line) = item?;
        check_line(&line, line_no)?;
        writeln!(
            writer,
            "{}",
            segment_line_cached(&line, segmenter, scheme, &mut cache)
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Distinct marker-annotated pieces produced for the word types in `counts`.
pub fn vocab(segmenter: &dyn Segmenter, counts: &WordCounts, scheme: MarkerScheme) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (word, _) in counts.iter() {
        let pieces = segmenter.segment_word(word);
        for (i, piece) in pieces.iter().enumerate() {
            out.insert(annotate_piece(piece, i, pieces.len(), scheme));
        }
    }
    out
}
