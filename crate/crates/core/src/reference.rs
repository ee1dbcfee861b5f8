//! Dense, array-backed Tsetlin Machine without absorption.
//!
//! Every clause stores one optional state per literal (absent = not in the
//! clause's pool) and every operation scans the full array. Fed the same
//! keyed randomness, it must evolve state-for-state like the sparse learner
//! with barriers disabled; it exists to check that.

use std::collections::BTreeMap;

use crate::automata::{self, AutomatonConfig, State, TransitionOutcome};
use crate::clause::{ClauseEvalMode, EffectSink, Polarity, UpdateEffect};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::learner::HyperParams;
use crate::literal::Literals;
use crate::metrics::StepMetrics;
use crate::rng::{ClauseStream, Purpose, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseClause {
    polarity: Polarity,
    states: Vec<Option<State>>,
}

impl DenseClause {
    pub fn new(
        polarity: Polarity,
        n_features: usize,
        sample_fraction: f64,
        config: &AutomatonConfig,
        rng: &ClauseStream,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::NoFeatures);
        }
        if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
            return Err(Error::InvalidSampleFraction(sample_fraction));
        }
        let states = (0..2 * n_features as u32)
            .map(|l| {
                let in_pool = sample_fraction >= 1.0 || rng.unit(l, Purpose::PoolSample) < sample_fraction;
                in_pool.then(|| automata::initial_state(config))
            })
            .collect();
        Ok(Self { polarity, states })
    }

    pub fn from_states(polarity: Polarity, states: Vec<Option<State>>) -> Self {
        Self { polarity, states }
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn states(&self) -> &[Option<State>] {
        &self.states
    }

    pub fn dense_evaluate(&self, x: &Literals, config: &AutomatonConfig, mode: ClauseEvalMode) -> Result<bool> {
        if x.n_literals() != self.states.len() {
            return Err(Error::FeatureWidth {
                expected: self.states.len() / 2,
                found: x.n_features(),
            });
        }
        let mut any = false;
        for (l, s) in self.states.iter().enumerate() {
            if let Some(s) = *s {
                if config.action(s) == automata::Action::Include {
                    any = true;
                    if !x.value(l as u32) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(any || mode == ClauseEvalMode::Training)
    }

    fn included_count(&self, config: &AutomatonConfig) -> usize {
        self.states
            .iter()
            .flatten()
            .filter(|&&s| config.action(s) == automata::Action::Include)
            .count()
    }

    fn step(&mut self, literal: usize, up: bool, config: &AutomatonConfig, sink: &mut impl EffectSink) {
        let old = self.states[literal].expect("pool literal");
        let outcome = if up {
            automata::increase(old, config)
        } else {
            automata::decrease(old, config)
        };
        let effect = match outcome {
            TransitionOutcome::Stayed(s) if s == old => UpdateEffect::Saturated,
            TransitionOutcome::Stayed(s) => UpdateEffect::StateChanged(s),
            TransitionOutcome::SwitchedToInclude => UpdateEffect::MovedToInclude,
            TransitionOutcome::SwitchedToExclude => UpdateEffect::MovedToExclude,
            TransitionOutcome::AbsorbedExclude | TransitionOutcome::AbsorbedInclude => {
                unreachable!("dense machine has no barriers")
            }
        };
        self.states[literal] = outcome.next_state(config);
        sink.record(effect);
    }
}

/// Multiclass dense machine mirroring [`crate::learner::Model`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseModel {
    n_features: usize,
    config: AutomatonConfig,
    hyper: HyperParams,
    classes: BTreeMap<Label, Vec<DenseClause>>,
}

impl DenseModel {
    /// Rejects configurations with absorbing barriers.
    pub fn new(n_features: usize, config: AutomatonConfig, hyper: HyperParams) -> Result<Self> {
        if config.has_barrier() {
            return Err(Error::BarrierInReference);
        }
        if n_features == 0 {
            return Err(Error::NoFeatures);
        }
        hyper.validate()?;
        Ok(Self {
            n_features,
            config,
            hyper,
            classes: BTreeMap::new(),
        })
    }

    pub fn add_class(&mut self, label: Label, rng: &RandomSource) -> Result<()> {
        if self.classes.contains_key(&label) {
            return Ok(());
        }
        let half = self.hyper.clauses_per_class / 2;
        let clauses = (0..self.hyper.clauses_per_class)
            .map(|j| {
                let polarity = if j < half { Polarity::Positive } else { Polarity::Negative };
                DenseClause::new(
                    polarity,
                    self.n_features,
                    self.hyper.literal_sample_fraction,
                    &self.config,
                    &rng.init_stream(label, j as u32),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        self.classes.insert(label, clauses);
        Ok(())
    }

    pub fn classes(&self) -> &BTreeMap<Label, Vec<DenseClause>> {
        &self.classes
    }

    fn class_sum(&self, clauses: &[DenseClause], x: &Literals, mode: ClauseEvalMode) -> Result<i32> {
        let mut sum = 0;
        for c in clauses {
            if c.dense_evaluate(x, &self.config, mode)? {
                sum += c.polarity.sign();
            }
        }
        Ok(sum)
    }

    pub fn predict(&self, x: &Literals) -> Result<Label> {
        let mut best: Option<(Label, i32)> = None;
        for (&label, clauses) in &self.classes {
            let s = self.class_sum(clauses, x, ClauseEvalMode::Inference)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((label, s));
            }
        }
        best.map(|(l, _)| l).ok_or(Error::NoClasses)
    }

    /// `(class, clause index, literal) -> state` for every pool literal.
    pub fn state_map(&self) -> BTreeMap<(Label, usize, u32), State> {
        let mut map = BTreeMap::new();
        for (&label, clauses) in &self.classes {
            for (j, c) in clauses.iter().enumerate() {
                for (l, s) in c.states.iter().enumerate() {
                    if let Some(s) = s {
                        map.insert((label, j, l as u32), *s);
                    }
                }
            }
        }
        map
    }

    /// One training step with the same routing and keyed draws as the
    /// sparse learner.
    pub fn dense_train_step(
        &mut self,
        x: &Literals,
        y: Label,
        epoch: u64,
        sample_index: u64,
        rng: &RandomSource,
    ) -> Result<StepMetrics> {
        if x.n_features() != self.n_features {
            return Err(Error::FeatureWidth {
                expected: self.n_features,
                found: x.n_features(),
            });
        }
        self.add_class(y, rng)?;
        let mut metrics = StepMetrics::default();
        let negative = if self.classes.len() > 1 {
            let others: Vec<Label> = self.classes.keys().copied().filter(|&l| l != y).collect();
            Some(others[rng.index(epoch, sample_index, y, Purpose::NegativeClass, others.len())])
        } else {
            None
        };
        self.train_bank(y, x, true, rng, epoch, sample_index, &mut metrics)?;
        if let Some(other) = negative {
            self.train_bank(other, x, false, rng, epoch, sample_index, &mut metrics)?;
        }
        Ok(metrics)
    }

    #[allow(clippy::too_many_arguments)]
    fn train_bank(
        &mut self,
        label: Label,
        x: &Literals,
        target: bool,
        rng: &RandomSource,
        epoch: u64,
        sample_index: u64,
        metrics: &mut StepMetrics,
    ) -> Result<()> {
        let config = self.config;
        let hyper = self.hyper;
        let t = hyper.voting_margin as i32;
        let outputs = self.classes[&label]
            .iter()
            .map(|c| c.dense_evaluate(x, &config, ClauseEvalMode::Training))
            .collect::<Result<Vec<bool>>>()?;
        let sum: i32 = self.classes[&label]
            .iter()
            .zip(&outputs)
            .filter(|(_, &o)| o)
            .map(|(c, _)| c.polarity.sign())
            .sum();
        let v = sum.clamp(-t, t);
        let p = if target { (t - v) as f64 } else { (t + v) as f64 } / (2 * t) as f64;

        let s = hyper.specificity;
        let p_include = if hyper.boost_true_positive { 1.0 } else { (s - 1.0) / s };
        let p_exclude = 1.0 / s;
        let n = config.n_states_per_action();

        for (j, clause) in self.classes.get_mut(&label).unwrap().iter_mut().enumerate() {
            let stream = rng.clause_stream(epoch, sample_index, label, j as u32);
            if stream.unit(u32::MAX, Purpose::ClauseSelect) >= p {
                continue;
            }
            let fired = outputs[j];
            let type_i = (clause.polarity == Polarity::Positive) == target;
            if type_i {
                metrics.type_i_clauses += 1;
                let at_budget = hyper
                    .max_included_literals
                    .is_some_and(|b| clause.included_count(&config) >= b);
                for l in 0..clause.states.len() {
                    let Some(state) = clause.states[l] else { continue };
                    let u = stream.unit(l as u32, Purpose::TypeI);
                    if fired && x.value(l as u32) {
                        if state < n && at_budget {
                            continue;
                        }
                        if u < p_include {
                            clause.step(l, true, &config, &mut metrics.effects);
                        }
                    } else if u < p_exclude {
                        clause.step(l, false, &config, &mut metrics.effects);
                    }
                }
            } else {
                metrics.type_ii_clauses += 1;
                if !fired {
                    continue;
                }
                for l in 0..clause.states.len() {
                    if let Some(state) = clause.states[l] {
                        if state < n && !x.value(l as u32) {
                            clause.step(l, true, &config, &mut metrics.effects);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
