//! Type I and Type II feedback on a single sparse clause.
//!
//! Each live automaton receives at most one update per feedback call and
//! every decision depends only on the clause output, the literal's value and
//! a keyed draw, so the result is independent of visiting order. Lists are
//! walked back to front: a swap-remove at position `i` pulls in an element
//! that has already been visited, and automata moved from the included list
//! to the end of the excluded list are skipped by bounding the excluded walk
//! at its original length.

use crate::automata::AutomatonConfig;
use crate::clause::{ClauseEvalMode, EffectSink, SparseClause, UpdateEffect};
use crate::learner::HyperParams;
use crate::literal::Literals;
use crate::rng::{ClauseStream, Probability, Purpose};

/// Per-model constants of the feedback tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackRules {
    /// Probability of reinforcing inclusion of a true literal when the
    /// clause fires: `(s - 1) / s`, or 1 with boosting.
    pub include: Probability,
    /// Probability of pushing towards exclusion otherwise: `1 / s`.
    pub exclude: Probability,
    /// Maximum included literals per clause.
    pub budget: Option<usize>,
}

impl FeedbackRules {
    pub fn new(hyper: &HyperParams) -> Self {
        let s = hyper.specificity;
        let include = if hyper.boost_true_positive { 1.0 } else { (s - 1.0) / s };
        Self {
            include: Probability::new(include),
            exclude: Probability::new(1.0 / s),
            budget: hyper.max_included_literals,
        }
    }
}

/// Type I feedback given the clause's training-mode output `fired`.
/// Permanent literals receive nothing.
pub(crate) fn apply_type_i<S: EffectSink>(
    clause: &mut SparseClause,
    x: &Literals,
    fired: bool,
    rules: &FeedbackRules,
    config: &AutomatonConfig,
    rng: &ClauseStream,
    sink: &mut S,
) {
    // Budget is judged on the clause as it was when feedback started.
    let at_budget = rules.budget.is_some_and(|b| clause.conjunction_len() >= b);
    let original_excluded = clause.excluded().len();

    let mut i = clause.included().len();
    while i > 0 {
        i -= 1;
        let lit = clause.included()[i].literal;
        let effect = if fired && x.value(lit) {
            rng.hit(lit, Purpose::TypeI, rules.include)
                .then(|| clause.increase_included(i, config))
        } else {
            rng.hit(lit, Purpose::TypeI, rules.exclude)
                .then(|| clause.decrease_included(i, config))
        };
        if let Some(e) = effect {
            sink.record(e);
        }
    }

    let mut i = original_excluded;
    while i > 0 {
        i -= 1;
        let lit = clause.excluded()[i].literal;
        let effect = if fired && x.value(lit) {
            if at_budget {
                None
            } else {
                rng.hit(lit, Purpose::TypeI, rules.include)
                    .then(|| clause.increase_excluded(i, config))
            }
        } else {
            rng.hit(lit, Purpose::TypeI, rules.exclude)
                .then(|| clause.decrease_excluded(i, config))
        };
        if let Some(e) = effect {
            sink.record(e);
        }
    }
}

/// Type II feedback given the clause's training-mode output `fired`:
/// when the clause fires, every excluded automaton whose literal is false
/// moves one step towards Include.
pub(crate) fn apply_type_ii<S: EffectSink>(
    clause: &mut SparseClause,
    x: &Literals,
    fired: bool,
    config: &AutomatonConfig,
    sink: &mut S,
) {
    if !fired {
        return;
    }
    let mut i = clause.excluded().len();
    while i > 0 {
        i -= 1;
        if !x.value(clause.excluded()[i].literal) {
            sink.record(clause.increase_excluded(i, config));
        }
    }
}

/// Applies Type I feedback and returns the effects, one per automaton
/// update.
///
/// Panics if `x` does not match the clause's feature width.
pub fn type_i_feedback(
    clause: &mut SparseClause,
    x: &Literals,
    hyper: &HyperParams,
    config: &AutomatonConfig,
    rng: &ClauseStream,
) -> Vec<UpdateEffect> {
    let fired = clause.evaluate(x, ClauseEvalMode::Training).expect("feature width");
    let mut effects = Vec::new();
    apply_type_i(clause, x, fired, &FeedbackRules::new(hyper), config, rng, &mut effects);
    effects
}

/// Applies Type II feedback and returns the effects. Consumes no draws.
///
/// Panics if `x` does not match the clause's feature width.
pub fn type_ii_feedback(clause: &mut SparseClause, x: &Literals, config: &AutomatonConfig) -> Vec<UpdateEffect> {
    let fired = clause.evaluate(x, ClauseEvalMode::Training).expect("feature width");
    let mut effects = Vec::new();
    apply_type_ii(clause, x, fired, config, &mut effects);
    effects
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::{Entry, Polarity};
    use crate::literal::LiteralId;
    use crate::rng::RandomSource;

    fn hyper(s: f64, boost: bool, budget: Option<usize>) -> HyperParams {
        HyperParams {
            specificity: s,
            boost_true_positive: boost,
            max_included_literals: budget,
            ..HyperParams::default()
        }
    }

    fn stream(seed: u64) -> ClauseStream {
        RandomSource::new(seed).clause_stream(0, 0, 0, 0)
    }

    #[test]
    fn boosted_true_positive_always_increases() {
        let cfg = AutomatonConfig::default();
        // Empty clause fires in training; x0 = 1 so literal 0 is true.
        let x = Literals::from_features(&[true, false]);
        for seed in 0..50 {
            let mut c = SparseClause::from_parts(Polarity::Positive, 2, vec![Entry::new(0, 100)], vec![], vec![], &cfg).unwrap();
            let effects = type_i_feedback(&mut c, &x, &hyper(3.0, true, None), &cfg, &stream(seed));
            assert_eq!(effects, vec![UpdateEffect::StateChanged(101)]);
        }
    }

    #[test]
    fn non_firing_clause_decreases_about_one_in_s() {
        let cfg = AutomatonConfig::default();
        let k = 500;
        let x = Literals::from_features(&vec![false; k]);
        // Include literal 0 (false) so the clause outputs 0.
        let excluded: Vec<Entry> = (1..2 * k as u32).map(|l| Entry::new(l, 100)).collect();
        let mut c = SparseClause::from_parts(Polarity::Positive, k, excluded, vec![Entry::new(0, 150)], vec![], &cfg).unwrap();
        let effects = type_i_feedback(&mut c, &x, &hyper(2.0, false, None), &cfg, &stream(77));
        // 1000 automata, Binomial(1000, 0.5): 4 sigma is about 63.
        assert!((430..=570).contains(&effects.len()), "{}", effects.len());
        assert!(effects.iter().all(|e| matches!(e, UpdateEffect::StateChanged(_))));
        // Matches an independent recount of the keyed draws.
        let s = stream(77);
        let expected = (0..2 * k as u32).filter(|&l| s.unit(l, Purpose::TypeI) < 0.5).count();
        assert_eq!(effects.len(), expected);
    }

    #[test]
    fn budget_suppresses_new_inclusions() {
        let cfg = AutomatonConfig::default();
        let x = Literals::from_features(&[true, true, true]);
        for seed in 0..30 {
            let mut c = SparseClause::from_parts(
                Polarity::Positive,
                3,
                vec![Entry::new(1, 127), Entry::new(2, 127)],
                vec![Entry::new(0, 130)],
                vec![],
                &cfg,
            )
            .unwrap();
            let effects = type_i_feedback(&mut c, &x, &hyper(3.0, true, Some(1)), &cfg, &stream(seed));
            // Only the included automaton is reinforced.
            assert_eq!(effects, vec![UpdateEffect::StateChanged(131)]);
            assert_eq!(c.active_counts(), (2, 1, 0));
        }
    }

    #[test]
    fn permanent_literals_receive_no_feedback() {
        let cfg = AutomatonConfig::new(128, Some(50), Some(200)).unwrap();
        let x = Literals::from_features(&[false, true]);
        let mut c = SparseClause::from_parts(Polarity::Positive, 2, vec![], vec![], vec![0], &cfg).unwrap();
        assert!(type_i_feedback(&mut c, &x, &hyper(1.5, false, None), &cfg, &stream(1)).is_empty());
        assert_eq!(c.permanent(), &[0]);
    }

    #[test]
    fn type_ii_guard_and_rule() {
        let cfg = AutomatonConfig::default();
        // Clause x0; input x0 = 0, so it does not fire.
        let mut quiet = SparseClause::from_parts(Polarity::Negative, 2, vec![Entry::new(3, 127)], vec![Entry::new(0, 140)], vec![], &cfg).unwrap();
        let x = Literals::from_features(&[false, true]);
        let before = quiet.clone();
        assert!(type_ii_feedback(&mut quiet, &x, &cfg).is_empty());
        assert_eq!(quiet, before);

        // Empty clause fires; NOT x1 (id 3) is false with x1 = 1.
        let mut c = SparseClause::from_parts(Polarity::Negative, 2, vec![Entry::new(3, 127), Entry::new(1, 127)], vec![], vec![], &cfg).unwrap();
        let effects = type_ii_feedback(&mut c, &x, &cfg);
        assert_eq!(effects, vec![UpdateEffect::MovedToInclude]);
        assert_eq!(c.location(LiteralId(3)), Some(crate::clause::ListKind::Included));

        // All literals true: nothing to do.
        let y = Literals::from_features(&[true, true]);
        let mut d = SparseClause::from_parts(Polarity::Negative, 2, vec![Entry::new(0, 127), Entry::new(1, 127)], vec![], vec![], &cfg).unwrap();
        assert!(type_ii_feedback(&mut d, &y, &cfg).is_empty());
    }

    #[test]
    fn every_live_automaton_updated_at_most_once() {
        // Probability-1 rules, tiny N so automata cross lists during the pass.
        let cfg = AutomatonConfig::new(2, None, None).unwrap();
        let x = Literals::from_features(&[true, false, true, false]);
        let h = hyper(1.0, true, None);
        for seed in 0..20 {
            let mut c = SparseClause::from_parts(
                Polarity::Positive,
                4,
                vec![Entry::new(0, 1), Entry::new(5, 1), Entry::new(3, 0)],
                vec![Entry::new(2, 2), Entry::new(4, 2)],
                vec![],
                &cfg,
            )
            .unwrap();
            let live = c.live_count();
            let effects = type_i_feedback(&mut c, &x, &h, &cfg, &stream(seed));
            // s = 1 with boosting makes every decision certain.
            assert_eq!(effects.len(), live);
            c.validate(&cfg).unwrap();
        }
    }
}
