//! Tsetlin Machine learning over sparse clauses: feedback tables, class
//! banks, the multiclass vote and the training loop.

mod feedback;
mod model;

pub use feedback::{type_i_feedback, type_ii_feedback, FeedbackRules};
pub use model::{ClassBank, FitOptions, Model};

pub(crate) use feedback::{apply_type_i, apply_type_ii};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Clauses per class, half positive and half negative. Must be even.
    pub clauses_per_class: usize,
    /// Voting margin `T`: class sums are clamped to `[-T, T]`.
    pub voting_margin: u32,
    /// Specificity `s >= 1`.
    pub specificity: f64,
    /// Literal budget per clause; Type I stops adding literals once reached.
    pub max_included_literals: Option<usize>,
    /// Fraction of the `2K` literals each clause may learn from.
    pub literal_sample_fraction: f64,
    /// Reinforce true literals of firing clauses with probability 1 instead
    /// of `(s - 1) / s`.
    pub boost_true_positive: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            clauses_per_class: 20,
            voting_margin: 10,
            specificity: 3.9,
            max_included_literals: None,
            literal_sample_fraction: 1.0,
            boost_true_positive: false,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHyperParams(m));
        if self.clauses_per_class == 0 || !self.clauses_per_class.is_multiple_of(2) {
            return bad(format!("clauses per class must be even and positive, got {}", self.clauses_per_class));
        }
        if self.voting_margin == 0 {
            return bad("voting margin must be at least 1".into());
        }
        if self.specificity.is_nan() || self.specificity < 1.0 || !self.specificity.is_finite() {
            return bad(format!("specificity must be >= 1, got {}", self.specificity));
        }
        if self.max_included_literals == Some(0) {
            return bad("literal budget must be positive".into());
        }
        if !(self.literal_sample_fraction > 0.0 && self.literal_sample_fraction <= 1.0) {
            return bad(format!("literal sample fraction {} outside (0, 1]", self.literal_sample_fraction));
        }
        Ok(())
    }

    pub fn clauses_per_polarity(&self) -> usize {
        self.clauses_per_class / 2
    }
}
