//! Category-based HMM segmentation model with an alpha-weighted MAP cost.
//!
//! Each word is generated as a sequence of morphs, each tagged as prefix,
//! stem, suffix or non-morpheme. The cost of a model is
//!
//! ```text
//! L(D, M) = -ln P(D | M) + alpha * (sum form costs - ln m!) + ln C(nu - 1, m - 1)
//! ```
//!
//! where the last term, the morph frequency distribution, is deliberately left
//! out of the alpha-weighted part.

mod analysis;
mod category;
mod charmodel;
pub mod io;
mod model;
mod prior;
mod viterbi;

pub use analysis::Analysis;
pub use category::{is_allowed, Category, State, Transitions};
pub use charmodel::CharModel;
pub use model::{
    analysis_cost, compute_alpha, corpus_cost, form_cost, lexicon_cost, total_cost, CostBreakdown,
    FlatCatModel,
};
pub use prior::{category_prior, update_usage_stats, CategoryDist, MorphStats};
pub use viterbi::{viterbi_segment, viterbi_segment_with_cost};

pub(crate) use viterbi::decode;

/// Model hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Weight on the lexicon prior.
    pub alpha: f64,
    /// Perplexity above which a morph looks like an affix.
    pub ppl_threshold: f64,
    /// Length (characters) above which a morph looks like a stem.
    pub len_threshold: f64,
    /// Steepness of the category sigmoids.
    pub slope: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            ppl_threshold: 10.0,
            len_threshold: 5.0,
            slope: 1.0,
        }
    }
}
