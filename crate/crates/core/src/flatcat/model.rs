use std::collections::BTreeMap;

use statrs::function::factorial::{ln_binomial, ln_factorial};

use super::analysis::Analysis;
use super::category::{Category, State, Transitions};
use super::charmodel::CharModel;
use super::prior::{category_prior, CategoryDist, MorphStats};
use super::HyperParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct LexiconEntry {
    stats: MorphStats,
    prior: CategoryDist,
}

/// Lexicon, HMM parameters and hyperparameters of a category-based
/// segmentation model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCatModel {
    hyper: HyperParams,
    lexicon: BTreeMap<String, LexiconEntry>,
    transitions: Transitions,
    char_model: CharModel,
    nu: u64,
    /// `sum_mu P(cat|mu) * count(mu)`, i.e. `nu * P(cat)`.
    cat_mass: [f64; 4],
    max_morph_chars: usize,
}

impl FlatCatModel {
    /// Zero-count entries are dropped.
    pub fn new<I>(hyper: HyperParams, stats: I, transitions: Transitions, char_model: CharModel) -> Self
    where
        I: IntoIterator<Item = MorphStats>,
    {
        let lexicon: BTreeMap<String, LexiconEntry> = stats
            .into_iter()
            .filter(|s| s.token_count > 0)
            .map(|s| {
                let prior = category_prior(&s, &hyper);
                (s.morph.clone(), LexiconEntry { stats: s, prior })
            })
            .collect();
        let nu = lexicon.values().map(|e| e.stats.token_count).sum();
        let mut cat_mass = [0.0; 4];
        for entry in lexicon.values() {
            for cat in Category::ALL {
                cat_mass[cat.index()] += entry.prior.get(cat) * entry.stats.token_count as f64;
            }
        }
        let max_morph_chars = lexicon.values().map(|e| e.stats.length()).max().unwrap_or(0);
        Self {
            hyper,
            lexicon,
            transitions,
            char_model,
            nu,
            cat_mass,
            max_morph_chars,
        }
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn transitions(&self) -> &Transitions {
        &self.transitions
    }

    pub fn char_model(&self) -> &CharModel {
        &self.char_model
    }

    /// Number of distinct morphs, `m`.
    pub fn lexicon_size(&self) -> usize {
        self.lexicon.len()
    }

    /// Total morph tokens, `nu`.
    pub fn nu(&self) -> u64 {
        self.nu
    }

    pub fn max_morph_chars(&self) -> usize {
        self.max_morph_chars
    }

    pub fn contains(&self, morph: &str) -> bool {
        self.lexicon.contains_key(morph)
    }

    pub fn stats(&self, morph: &str) -> Option<&MorphStats> {
        self.lexicon.get(morph).map(|e| &e.stats)
    }

    /// Lexicon entries in lexicographic order.
    pub fn lexicon(&self) -> impl Iterator<Item = &MorphStats> + '_ {
        self.lexicon.values().map(|e| &e.stats)
    }

    pub fn morph_prior(&self, morph: &str) -> Option<CategoryDist> {
        self.lexicon.get(morph).map(|e| e.prior)
    }

    /// `ln P(cat)`, the token-weighted category marginal.
    pub fn category_log_prob(&self, cat: Category) -> f64 {
        (self.cat_mass[cat.index()] / self.nu as f64).ln()
    }

    /// `ln P(morph | cat)` for a lexicon morph.
    pub fn emission_logprob(&self, morph: &str, cat: Category) -> Result<f64> {
        let entry = self
            .lexicon
            .get(morph)
            .ok_or_else(|| Error::UnknownMorph(morph.to_owned()))?;
        let mass = self.cat_mass[cat.index()];
        if mass <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let p_cat_given_morph = entry.prior.get(cat);
        if p_cat_given_morph <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(p_cat_given_morph.ln() + (entry.stats.token_count as f64).ln() - mass.ln())
    }

    /// Smoothed emission for a single character outside the lexicon.
    pub fn fallback_emission(&self, ch: &str, cat: Category) -> f64 {
        let prior = category_prior(&MorphStats::unseen(ch, 1), &self.hyper).get(cat);
        -((self.nu + self.lexicon.len() as u64) as f64).ln() + prior.ln()
    }

    /// Emission used when segmenting: lexicon morphs, plus single characters
    /// outside the lexicon. Anything else is impossible (`-inf`).
    pub fn segment_emission(&self, morph: &str, cat: Category) -> f64 {
        if self.lexicon.contains_key(morph) {
            self.emission_logprob(morph, cat)
                .expect("morph is in the lexicon")
        } else if morph.chars().count() == 1 {
            self.fallback_emission(morph, cat)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `sum_mu P(mu | cat)` over the lexicon; one for every usable category.
    pub fn emission_mass(&self, cat: Category) -> f64 {
        self.lexicon
            .keys()
            .map(|m| self.emission_logprob(m, cat).unwrap().exp())
            .sum()
    }
}

/// Fixed `alpha = m1 / m2`.
pub fn compute_alpha(initial_vocab: u64, target_vocab: u64) -> Result<f64> {
    if initial_vocab == 0 || target_vocab == 0 {
        return Err(Error::InvalidParameter(format!(
            "vocabulary sizes must be positive (initial {initial_vocab}, target {target_vocab})"
        )));
    }
    if target_vocab > initial_vocab {
        log::warn!(
            "target vocabulary {target_vocab} exceeds the initial vocabulary {initial_vocab}; \
             alpha < 1 discourages splitting"
        );
    }
    Ok(initial_vocab as f64 / target_vocab as f64)
}

/// Negative log-likelihood of one word under its analysis, in nats.
pub fn analysis_cost(analysis: &Analysis, model: &FlatCatModel) -> f64 {
    let t = model.transitions();
    let mut prev = State::Boundary;
    let mut cost = 0.0;
    for (morph, cat) in analysis.items() {
        let lp = t.log_prob(prev, cat.state()) + model.segment_emission(morph, *cat);
        if lp == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        cost -= lp;
        prev = cat.state();
    }
    let end = t.log_prob(prev, State::Boundary);
    if end == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    cost - end
}

/// `-ln P(D | M)`: count-weighted sum of analysis costs.
pub fn corpus_cost<'a, I>(model: &FlatCatModel, analyses: I) -> f64
where
    I: IntoIterator<Item = (&'a Analysis, u64)>,
{
    analyses
        .into_iter()
        .map(|(a, count)| count as f64 * analysis_cost(a, model))
        .sum()
}

pub fn form_cost(morph: &str, char_model: &CharModel) -> f64 {
    char_model.form_cost(morph)
}

/// Returns `(weighted_prior_cost, frequency_cost)`.
///
/// The weighted part is `alpha * (sum of form costs - ln m!)`; the frequency
/// part `ln C(nu - 1, m - 1)` stays outside the weight.
pub fn lexicon_cost(model: &FlatCatModel) -> (f64, f64) {
    let m = model.lexicon_size() as u64;
    if m == 0 {
        return (0.0, 0.0);
    }
    let forms: f64 = model
        .lexicon()
        .map(|s| model.char_model().form_cost(&s.morph))
        .sum();
    let weighted = model.hyper().alpha * (forms - ln_factorial(m));
    let frequency = ln_binomial(model.nu() - 1, m - 1);
    (weighted, frequency)
}

/// Cost components, all in nats.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub corpus_cost: f64,
    pub weighted_prior_cost: f64,
    pub frequency_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(corpus_cost: f64, weighted_prior_cost: f64, frequency_cost: f64) -> Self {
        Self {
            corpus_cost,
            weighted_prior_cost,
            frequency_cost,
            total: corpus_cost + weighted_prior_cost + frequency_cost,
        }
    }
}

pub fn total_cost<'a, I>(model: &FlatCatModel, analyses: I) -> CostBreakdown
where
    I: IntoIterator<Item = (&'a Analysis, u64)>,
{
    let corpus = corpus_cost(model, analyses);
    let (weighted, frequency) = lexicon_cost(model);
    CostBreakdown::new(corpus, weighted, frequency)
}
