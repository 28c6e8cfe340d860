use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Morph categories of the HMM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    /// Prefix.
    Pre,
    /// Stem.
    Stm,
    /// Suffix.
    Suf,
    /// Non-morpheme fragment.
    Zzz,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Pre, Category::Stm, Category::Suf, Category::Zzz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn state(self) -> State {
        match self {
            Category::Pre => State::Pre,
            Category::Stm => State::Stm,
            Category::Suf => State::Suf,
            Category::Zzz => State::Zzz,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Category::Pre => "PRE",
            Category::Stm => "STM",
            Category::Suf => "SUF",
            Category::Zzz => "ZZZ",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// HMM state: a category or the word boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Boundary,
    Pre,
    Stm,
    Suf,
    Zzz,
}

impl State {
    pub const COUNT: usize = 5;
    pub const ALL: [State; 5] = [State::Boundary, State::Pre, State::Stm, State::Suf, State::Zzz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> &'static str {
        match self {
            State::Boundary => "B",
            State::Pre => "PRE",
            State::Stm => "STM",
            State::Suf => "SUF",
            State::Zzz => "ZZZ",
        }
    }

    pub fn category(self) -> Option<Category> {
        match self {
            State::Boundary => None,
            State::Pre => Some(Category::Pre),
            State::Stm => Some(Category::Stm),
            State::Suf => Some(Category::Suf),
            State::Zzz => Some(Category::Zzz),
        }
    }
}

impl From<Category> for State {
    fn from(c: Category) -> Self {
        c.state()
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        State::ALL
            .into_iter()
            .find(|st| st.tag() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown HMM state {s:?}")))
    }
}

/// Whether `from -> to` may carry probability mass.
///
/// Forbidden: B->SUF, PRE->SUF, PRE->B, and the empty word B->B.
pub fn is_allowed(from: State, to: State) -> bool {
    !matches!(
        (from, to),
        (State::Boundary, State::Suf)
            | (State::Pre, State::Suf)
            | (State::Pre, State::Boundary)
            | (State::Boundary, State::Boundary)
    )
}

/// Transition probabilities `P(to | from)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    probs: [[f64; State::COUNT]; State::COUNT],
    log_probs: [[f64; State::COUNT]; State::COUNT],
}

impl Transitions {
    /// Builds a table from raw probabilities, checking forbidden entries are
    /// zero and every row sums to one.
    pub fn from_probs(probs: [[f64; State::COUNT]; State::COUNT]) -> Result<Self> {
        for from in State::ALL {
            let row = &probs[from.index()];
            let mut sum = 0.0;
            for to in State::ALL {
                let p = row[to.index()];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "transition {}->{} has probability {p}",
                        from.tag(),
                        to.tag()
                    )));
                }
                if !is_allowed(from, to) && p != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "forbidden transition {}->{} has nonzero probability",
                        from.tag(),
                        to.tag()
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "transitions from {} sum to {sum}",
                    from.tag()
                )));
            }
        }
        Ok(Self::from_probs_unchecked(probs))
    }

    fn from_probs_unchecked(probs: [[f64; State::COUNT]; State::COUNT]) -> Self {
        let mut log_probs = [[f64::NEG_INFINITY; State::COUNT]; State::COUNT];
        for (lrow, prow) in log_probs.iter_mut().zip(probs.iter()) {
            for (l, &p) in lrow.iter_mut().zip(prow.iter()) {
                *l = if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
            }
        }
        Self { probs, log_probs }
    }

    /// Maximum-likelihood estimate with add-`kappa` smoothing over allowed
    /// transitions only.
    pub fn estimate(counts: &[[u64; State::COUNT]; State::COUNT], kappa: f64) -> Self {
        let mut probs = [[0.0; State::COUNT]; State::COUNT];
        for from in State::ALL {
            let allowed: Vec<State> = State::ALL
                .into_iter()
                .filter(|&to| is_allowed(from, to))
                .collect();
            let total: f64 = allowed
                .iter()
                .map(|to| counts[from.index()][to.index()] as f64 + kappa)
                .sum();
            for to in allowed {
                probs[from.index()][to.index()] = (counts[from.index()][to.index()] as f64 + kappa) / total;
            }
        }
        Self::from_probs_unchecked(probs)
    }

    /// Uniform over allowed successors.
    pub fn uniform() -> Self {
        Self::estimate(&[[0; State::COUNT]; State::COUNT], 1.0)
    }

    pub fn prob(&self, from: State, to: State) -> f64 {
        self.probs[from.index()][to.index()]
    }

    pub fn log_prob(&self, from: State, to: State) -> f64 {
        self.log_probs[from.index()][to.index()]
    }

    pub fn row_sum(&self, from: State) -> f64 {
        self.probs[from.index()].iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forbidden_transitions_are_zero() {
        let t = Transitions::uniform();
        assert_eq!(t.prob(State::Boundary, State::Suf), 0.0);
        assert_eq!(t.prob(State::Pre, State::Suf), 0.0);
        assert_eq!(t.prob(State::Pre, State::Boundary), 0.0);
        assert_eq!(t.log_prob(State::Pre, State::Suf), f64::NEG_INFINITY);
        assert!((t.prob(State::Boundary, State::Stm) - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.prob(State::Stm, State::Suf) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn smoothed_rows_are_normalized() {
        let mut counts = [[0u64; 5]; 5];
        counts[0][2] = 100;
        counts[2][3] = 40;
        counts[2][0] = 60;
        counts[3][0] = 40;
        let t = Transitions::estimate(&counts, 0.5);
        for s in State::ALL {
            assert!((t.row_sum(s) - 1.0).abs() < 1e-12);
        }
        assert!((t.prob(State::Boundary, State::Stm) - 100.5 / 101.5).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut probs = [[0.0; 5]; 5];
        for row in probs.iter_mut() {
            row[2] = 1.0;
        }
        assert!(Transitions::from_probs(probs).is_ok());
        probs[0][2] = 0.5;
        probs[0][3] = 0.5; // B->SUF
        assert!(Transitions::from_probs(probs).is_err());
    }

    #[test]
    fn tags_parse() {
        for s in State::ALL {
            assert_eq!(s.tag().parse::<State>().unwrap(), s);
        }
        assert_eq!(Category::Suf.to_string(), "SUF");
    }
}
