//! Literals: features and their negations.
//!
//! For `K` features, literal id `k < K` is `x_k` and `k + K` is `NOT x_k`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiteralId(pub u32);

impl LiteralId {
    pub fn positive(feature: u32) -> Self {
        Self(feature)
    }

    pub fn negated(feature: u32, n_features: usize) -> Self {
        Self(feature + n_features as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn feature(self, n_features: usize) -> u32 {
        if self.index() < n_features {
            self.0
        } else {
            self.0 - n_features as u32
        }
    }

    pub fn is_negated(self, n_features: usize) -> bool {
        self.index() >= n_features
    }
}

impl fmt::Display for LiteralId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// Truth values of all `2K` literals for one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literals {
    n_features: usize,
    values: Vec<bool>,
}

impl Literals {
    /// Builds the literal view from a dense feature vector.
    pub fn from_features(features: &[bool]) -> Self {
        let k = features.len();
        let mut values = Vec::with_capacity(2 * k);
        values.extend_from_slice(features);
        values.extend(features.iter().map(|&b| !b));
        Self { n_features: k, values }
    }

    /// Builds the literal view from the sorted indices of true features.
    pub fn from_true_indices(n_features: usize, true_indices: &[u32]) -> Result<Self> {
        let mut lits = Self {
            n_features,
            values: Vec::new(),
        };
        lits.refill(n_features, true_indices)?;
        Ok(lits)
    }

    /// Reuses the allocation for a new input.
    pub fn refill(&mut self, n_features: usize, true_indices: &[u32]) -> Result<()> {
        self.n_features = n_features;
        self.values.clear();
        self.values.resize(n_features, false);
        self.values.resize(2 * n_features, true);
        for &i in true_indices {
            let i = i as usize;
            if i >= n_features {
                return Err(Error::LiteralOutOfRange {
                    literal: i as u32,
                    n_features,
                });
            }
            self.values[i] = true;
            self.values[i + n_features] = false;
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_literals(&self) -> usize {
        self.values.len()
    }

    /// Truth value of `literal`; `None` when out of range.
    #[inline]
    pub fn get(&self, literal: u32) -> Option<bool> {
        self.values.get(literal as usize).copied()
    }

    #[inline]
    pub fn value(&self, literal: u32) -> bool {
        self.values[literal as usize]
    }

    pub fn features(&self) -> &[bool] {
        &self.values[..self.n_features]
    }
}
