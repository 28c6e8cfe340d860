use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: input is not valid UTF-8")]
    InvalidUtf8 { line: usize },

    #[error("line {line}: token {token:?} uses a reserved marker (leading '+' or trailing \"@@\")")]
    ReservedMarker { line: usize, token: String },

    #[error("line {line}: analysis token {token:?} has an empty root")]
    EmptyRoot { line: usize, token: String },

    #[error("dangling continuation marker at end of line: {0:?}")]
    DanglingMarker(String),

    #[error("malformed marker: {0}")]
    MalformedMarker(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("morph {0:?} is not in the lexicon")]
    UnknownMorph(String),

    #[error("word mismatch at position {index}: predicted {predicted:?}, gold {gold:?}")]
    WordMismatch {
        index: usize,
        predicted: String,
        gold: String,
    },

    #[error("model format error at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("unknown segmentation method {0:?}")]
    UnknownMethod(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::ModelFormat {
            line,
            message: message.into(),
        }
    }
}
