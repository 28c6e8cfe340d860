use std::fmt;

use super::category::{is_allowed, Category, State};
use crate::error::{Error, Result};

/// A word's segmentation as a sequence of tagged morphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Analysis {
    items: Vec<(String, Category)>,
}

impl Analysis {
    /// Validates the category sequence: non-empty, no empty morphs, no
    /// forbidden transition (word boundaries included) and not all ZZZ.
    pub fn new(items: Vec<(String, Category)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidParameter("empty analysis".into()));
        }
        if items.iter().any(|(m, _)| m.is_empty()) {
            return Err(Error::InvalidParameter("empty morph in analysis".into()));
        }
        if items.iter().all(|&(_, c)| c == Category::Zzz) {
            return Err(Error::InvalidParameter(
                "analysis has only non-morpheme categories".into(),
            ));
        }
        let states = std::iter::once(State::Boundary)
            .chain(items.iter().map(|&(_, c)| c.state()))
            .chain(std::iter::once(State::Boundary))
            .collect::<Vec<_>>();
        if let Some(w) = states.windows(2).find(|w| !is_allowed(w[0], w[1])) {
            return Err(Error::InvalidParameter(format!(
                "forbidden transition {}->{}",
                w[0].tag(),
                w[1].tag()
            )));
        }
        Ok(Self { items })
    }

    /// Builds an analysis without validation; callers guarantee the invariants.
    pub(crate) fn from_valid(items: Vec<(String, Category)>) -> Self {
        debug_assert!(Analysis::new(items.clone()).is_ok());
        Self { items }
    }

    #[cfg(test)]
    pub(crate) fn unchecked(items: Vec<(String, Category)>) -> Self {
        Self { items }
    }

    /// The whole word as a single stem.
    pub fn single(word: &str) -> Self {
        Self::from_valid(vec![(word.to_owned(), Category::Stm)])
    }

    pub fn items(&self) -> &[(String, Category)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn morphs(&self) -> impl Iterator<Item = &str> + '_ {
        self.items.iter().map(|(m, _)| m.as_str())
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        self.items.iter().map(|&(_, c)| c)
    }

    /// Concatenation of all morphs.
    pub fn surface(&self) -> String {
        self.morphs().collect()
    }

    /// Internal boundary positions as character offsets.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut offset = 0;
        let mut out = Vec::with_capacity(self.items.len().saturating_sub(1));
        for (m, _) in &self.items[..self.items.len() - 1] {
            offset += m.chars().count();
            out.push(offset);
        }
        out
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (m, c)) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{m}/{c}")?;
        }
        Ok(())
    }
}
