//! Usage statistics of morphs and the category prior derived from them.

use std::collections::{BTreeMap, HashMap};

use super::analysis::Analysis;
use super::category::Category;
use super::HyperParams;

/// Usage statistics of one lexicon entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphStats {
    pub morph: String,
    pub token_count: u64,
    /// exp-entropy of the distribution of left neighbours (boundary included).
    pub left_perplexity: f64,
    /// exp-entropy of the distribution of right neighbours (boundary included).
    pub right_perplexity: f64,
}

impl MorphStats {
    /// Stats of a morph that has never been observed in context.
    pub fn unseen(morph: &str, token_count: u64) -> Self {
        Self {
            morph: morph.to_owned(),
            token_count,
            left_perplexity: 1.0,
            right_perplexity: 1.0,
        }
    }

    pub fn length(&self) -> usize {
        self.morph.chars().count()
    }
}

/// `P(category | morph)`, indexed by [`Category::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryDist(pub [f64; 4]);

impl CategoryDist {
    pub fn get(&self, cat: Category) -> f64 {
        self.0[cat.index()]
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Category membership probabilities from perplexity and length evidence.
///
/// High right perplexity makes a morph prefix-like, high left perplexity
/// suffix-like, and length beyond the threshold stem-like.
pub fn category_prior(stats: &MorphStats, hyper: &HyperParams) -> CategoryDist {
    let b = hyper.slope;
    let pre_x = b * (stats.right_perplexity - hyper.ppl_threshold);
    let suf_x = b * (stats.left_perplexity - hyper.ppl_threshold);
    let stm_x = b * (stats.length() as f64 - hyper.len_threshold);
    // Complements evaluated as sigmoid(-x) to keep precision in the tails.
    let (prefixlike, not_prefixlike) = (sigmoid(pre_x), sigmoid(-pre_x));
    let (suffixlike, not_suffixlike) = (sigmoid(suf_x), sigmoid(-suf_x));
    let (stemlike, not_stemlike) = (sigmoid(stm_x), sigmoid(-stm_x));

    let raw = [
        prefixlike * not_suffixlike,
        stemlike,
        suffixlike * not_prefixlike,
        not_prefixlike * not_suffixlike * not_stemlike,
    ];
    let total: f64 = raw.iter().sum();
    CategoryDist(raw.map(|r| r / total))
}

/// Perplexity of a token-weighted outcome distribution. Ordered map so the
/// floating-point sum is reproducible.
fn perplexity<K>(counts: &BTreeMap<K, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 1.0;
    }
    let total = total as f64;
    let entropy: f64 = counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    entropy.exp()
}

/// Recomputes token counts and left/right perplexities of every morph used
/// by the given `(analysis, word count)` pairs.
///
/// The context of a morph is the neighbouring morph string, or the word
/// boundary (`None`).
pub fn update_usage_stats<'a, I>(analyses: I) -> BTreeMap<String, MorphStats>
where
    I: IntoIterator<Item = (&'a Analysis, u64)>,
{
    #[derive(Default)]
    struct Contexts<'s> {
        count: u64,
        left: BTreeMap<Option<&'s str>, u64>,
        right: BTreeMap<Option<&'s str>, u64>,
    }

    let mut table: HashMap<&'a str, Contexts<'a>> = HashMap::new();
    for (analysis, count) in analyses {
        let morphs: Vec<&str> = analysis.morphs().collect();
        for (i, &m) in morphs.iter().enumerate() {
            let entry = table.entry(m).or_default();
            entry.count += count;
            let left = if i == 0 { None } else { Some(morphs[i - 1]) };
            let right = morphs.get(i + 1).copied();
            *entry.left.entry(left).or_insert(0) += count;
            *entry.right.entry(right).or_insert(0) += count;
        }
    }

    table
        .into_iter()
        .filter(|(_, ctx)| ctx.count > 0)
        .map(|(m, ctx)| {
            (
                m.to_owned(),
                MorphStats {
                    morph: m.to_owned(),
                    token_count: ctx.count,
                    left_perplexity: perplexity(&ctx.left),
                    right_perplexity: perplexity(&ctx.right),
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stats(morph: &str, lppl: f64, rppl: f64) -> MorphStats {
        MorphStats {
            morph: morph.to_owned(),
            token_count: 1,
            left_perplexity: lppl,
            right_perplexity: rppl,
        }
    }

    fn an(items: &[(&str, Category)]) -> Analysis {
        Analysis::new(items.iter().map(|&(m, c)| (m.to_owned(), c)).collect()).unwrap()
    }

    #[test]
    fn thresholds_give_one_half() {
        let hyper = HyperParams::default();
        // rppl at the threshold: prefixlike = 0.5. lppl = 1, length 5: stemlike = 0.5.
        let d = category_prior(&stats("abcde", 1.0, 10.0), &hyper);
        let s = sigmoid(-9.0);
        let raw = [0.5 * (1.0 - s), 0.5, s * 0.5, 0.5 * (1.0 - s) * 0.5];
        let total: f64 = raw.iter().sum();
        for (i, r) in raw.iter().enumerate() {
            assert_relative_eq!(d.0[i], r / total, max_relative = 1e-12);
        }
    }

    #[test]
    fn closed_form_at_low_perplexity() {
        // Independent evaluation of the closed form: rppl = lppl = 1, len = 5.
        let d = category_prior(&stats("abcde", 1.0, 1.0), &HyperParams::default());
        let s9 = 1.0 / (1.0 + 9f64.exp());
        let pre = s9 * (1.0 - s9);
        let stm = 0.5;
        let suf = s9 * (1.0 - s9);
        let zzz = (1.0 - s9) * (1.0 - s9) * 0.5;
        let total = pre + stm + suf + zzz;
        assert_relative_eq!(d.get(Category::Pre), pre / total, max_relative = 1e-12);
        assert_relative_eq!(d.get(Category::Stm), stm / total, max_relative = 1e-12);
        assert_relative_eq!(d.get(Category::Suf), suf / total, max_relative = 1e-12);
        assert_relative_eq!(d.get(Category::Zzz), zzz / total, max_relative = 1e-12);
        assert_relative_eq!(d.0.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn extreme_perplexities_stay_finite() {
        let d = category_prior(&stats("x", 5000.0, 5000.0), &HyperParams::default());
        assert!(d.0.iter().all(|p| p.is_finite() && *p >= 0.0));
        assert_relative_eq!(d.0.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn word_final_morph_has_unit_right_perplexity() {
        let a = an(&[("ev", Category::Stm), ("ler", Category::Suf)]);
        let s = update_usage_stats([(&a, 7)]);
        assert_eq!(s["ler"].right_perplexity, 1.0);
        assert_eq!(s["ler"].token_count, 7);
        assert_eq!(s["ev"].left_perplexity, 1.0);
    }

    #[test]
    fn two_equal_contexts_give_perplexity_two() {
        let a = an(&[("ev", Category::Stm), ("ler", Category::Suf)]);
        let b = an(&[("ev", Category::Stm), ("de", Category::Suf)]);
        let s = update_usage_stats([(&a, 4), (&b, 4)]);
        assert_relative_eq!(s["ev"].right_perplexity, 2.0, max_relative = 1e-12);
        assert_eq!(s["ev"].token_count, 8);
    }

    #[test]
    fn skewed_contexts() {
        let a = an(&[("ev", Category::Stm), ("x", Category::Suf)]);
        let b = an(&[("ev", Category::Stm), ("y", Category::Suf)]);
        let s = update_usage_stats([(&a, 3), (&b, 1)]);
        let h: f64 = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert_relative_eq!(s["ev"].right_perplexity, h.exp(), max_relative = 1e-12);
        assert_relative_eq!(s["ev"].right_perplexity, 1.7548, max_relative = 1e-4);
    }

    #[test]
    fn repeated_morph_counts_each_occurrence() {
        let a = an(&[("ab", Category::Stm), ("ab", Category::Stm)]);
        let s = update_usage_stats([(&a, 10)]);
        assert_eq!(s["ab"].token_count, 20);
        // Left contexts: boundary and "ab", equally often.
        assert_relative_eq!(s["ab"].left_perplexity, 2.0, max_relative = 1e-12);
    }
}
