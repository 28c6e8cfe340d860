//! Unsupervised morphological segmentation with a controllable lexicon size.
//!
//! Two segmenters share one interface: a category-based MAP model trained to
//! a target vocabulary size ([`flatcat`], [`trainer`]) and byte-pair encoding
//! ([`bpe`]). Supporting modules handle corpus input, boundary markers and
//! evaluation.

pub mod bpe;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod flatcat;
pub mod markers;
pub mod segmenter;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};
pub use segmenter::{Registry, Segmenter};
