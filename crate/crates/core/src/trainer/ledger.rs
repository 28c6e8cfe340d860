//! Incremental bookkeeping of the total cost.
//!
//! With category priors and transitions frozen, the corpus cost decomposes
//! into count statistics:
//!
//! ```text
//! -ln P(D|M) = sum_trans n(s->s') * -ln P(s'|s)
//!            + sum_{mu,cat} n(mu,cat) * -ln P(cat|mu)
//!            - sum_mu c(mu) ln c(mu)
//!            + sum_cat N(cat) ln S(cat),     S(cat) = sum_mu P(cat|mu) c(mu)
//! ```
//!
//! so adding or removing one word analysis only touches the morphs it uses.

use std::collections::HashMap;

use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::flatcat::{
    category_prior, Analysis, CategoryDist, CharModel, CostBreakdown, HyperParams, MorphStats, State,
    Transitions,
};

#[derive(Debug, Clone)]
struct Entry {
    count: u64,
    form: f64,
    prior: CategoryDist,
}

fn xlogx(c: u64) -> f64 {
    if c == 0 {
        0.0
    } else {
        let c = c as f64;
        c * c.ln()
    }
}

/// Perplexities frozen for the current epoch, and the priors derived from them.
#[derive(Debug, Clone, Default)]
pub(crate) struct FrozenUsage {
    perplexities: HashMap<String, (f64, f64)>,
    priors: HashMap<String, CategoryDist>,
}

impl FrozenUsage {
    pub(crate) fn new<'a, I>(stats: I) -> Self
    where
        I: IntoIterator<Item = &'a MorphStats>,
    {
        Self {
            perplexities: stats
                .into_iter()
                .map(|s| (s.morph.clone(), (s.left_perplexity, s.right_perplexity)))
                .collect(),
            priors: HashMap::new(),
        }
    }

    /// Frozen `(lppl, rppl)`; morphs unseen at epoch start count as context-free.
    pub(crate) fn perplexities(&self, morph: &str) -> (f64, f64) {
        self.perplexities.get(morph).copied().unwrap_or((1.0, 1.0))
    }

    pub(crate) fn stats(&self, morph: &str, token_count: u64) -> MorphStats {
        let (l, r) = self.perplexities(morph);
        MorphStats {
            morph: morph.to_owned(),
            token_count,
            left_perplexity: l,
            right_perplexity: r,
        }
    }

    pub(crate) fn prior(&mut self, morph: &str, hyper: &HyperParams) -> CategoryDist {
        if let Some(p) = self.priors.get(morph) {
            return *p;
        }
        let p = category_prior(&self.stats(morph, 1), hyper);
        self.priors.insert(morph.to_owned(), p);
        p
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Ledger {
    pub(crate) hyper: HyperParams,
    pub(crate) usage: FrozenUsage,
    pub(crate) transitions: Transitions,
    morphs: HashMap<String, Entry>,
    trans_counts: [[u64; State::COUNT]; State::COUNT],
    cat_tokens: [u64; 4],
    cat_mass: [f64; 4],
    trans_cost: f64,
    prior_cost: f64,
    sum_xlogx: f64,
    form_sum: f64,
    nu: u64,
}

impl Ledger {
    pub(crate) fn new(hyper: HyperParams, usage: FrozenUsage, transitions: Transitions) -> Self {
        Self {
            hyper,
            usage,
            transitions,
            morphs: HashMap::new(),
            trans_counts: [[0; State::COUNT]; State::COUNT],
            cat_tokens: [0; 4],
            cat_mass: [0.0; 4],
            trans_cost: 0.0,
            prior_cost: 0.0,
            sum_xlogx: 0.0,
            form_sum: 0.0,
            nu: 0,
        }
    }

    pub(crate) fn lexicon_size(&self) -> usize {
        self.morphs.len()
    }

    pub(crate) fn nu(&self) -> u64 {
        self.nu
    }

    pub(crate) fn count(&self, morph: &str) -> u64 {
        self.morphs.get(morph).map_or(0, |e| e.count)
    }

    pub(crate) fn counts(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.morphs.iter().map(|(m, e)| (m.as_str(), e.count))
    }

    pub(crate) fn cat_mass(&self) -> [f64; 4] {
        self.cat_mass
    }

    pub(crate) fn add(&mut self, analysis: &Analysis, freq: u64, chars: &CharModel) {
        self.apply(analysis, freq, true, chars);
    }

    pub(crate) fn remove(&mut self, analysis: &Analysis, freq: u64, chars: &CharModel) {
        self.apply(analysis, freq, false, chars);
    }

    fn apply(&mut self, analysis: &Analysis, freq: u64, adding: bool, chars: &CharModel) {
        let f = freq as f64;
        let sign = if adding { 1.0 } else { -1.0 };

        let mut prev = State::Boundary;
        for state in analysis
            .categories()
            .map(|c| c.state())
            .chain(std::iter::once(State::Boundary))
        {
            let slot = &mut self.trans_counts[prev.index()][state.index()];
            if adding {
                *slot += freq;
            } else {
                *slot -= freq;
            }
            self.trans_cost -= sign * f * self.transitions.log_prob(prev, state);
            prev = state;
        }

        for (morph, cat) in analysis.items() {
            if !self.morphs.contains_key(morph.as_str()) {
                debug_assert!(adding, "removing a morph that is not counted");
                let prior = self.usage.prior(morph, &self.hyper);
                let form = chars.form_cost(morph);
                self.form_sum += form;
                self.morphs.insert(
                    morph.clone(),
                    Entry {
                        count: 0,
                        form,
                        prior,
                    },
                );
            }
            let entry = self.morphs.get_mut(morph.as_str()).unwrap();
            self.sum_xlogx -= xlogx(entry.count);
            if adding {
                entry.count += freq;
                self.cat_tokens[cat.index()] += freq;
                self.nu += freq;
            } else {
                entry.count -= freq;
                self.cat_tokens[cat.index()] -= freq;
                self.nu -= freq;
            }
            self.sum_xlogx += xlogx(entry.count);
            for (mass, p) in self.cat_mass.iter_mut().zip(entry.prior.0) {
                *mass += sign * f * p;
            }
            self.prior_cost -= sign * f * entry.prior.get(*cat).ln();
            if entry.count == 0 {
                self.form_sum -= entry.form;
                self.morphs.remove(morph.as_str());
            }
        }
    }

    pub(crate) fn breakdown(&self) -> CostBreakdown {
        let mut corpus = self.trans_cost + self.prior_cost - self.sum_xlogx;
        for (n, mass) in self.cat_tokens.iter().zip(self.cat_mass) {
            if *n > 0 {
                corpus += *n as f64 * mass.ln();
            }
        }
        let m = self.morphs.len() as u64;
        let (weighted, frequency) = if m == 0 {
            (0.0, 0.0)
        } else {
            (
                self.hyper.alpha * (self.form_sum - ln_factorial(m)),
                ln_binomial(self.nu - 1, m - 1),
            )
        };
        CostBreakdown::new(corpus, weighted, frequency)
    }

    pub(crate) fn total(&self) -> f64 {
        self.breakdown().total
    }
}
