use std::collections::BTreeMap;
use std::time::Instant;

use crate::automata::AutomatonConfig;
use crate::clause::{ClauseEvalMode, Polarity, SparseClause};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::learner::{apply_type_i, apply_type_ii, FeedbackRules, HyperParams};
use crate::literal::Literals;
use crate::metrics::{EpochMetrics, StepMetrics};
use crate::rng::{Probability, Purpose, RandomSource};

/// Literal slot used for per-clause draws that are not about a literal.
const CLAUSE_SLOT: u32 = u32::MAX;

/// The clauses voting for one class: positive polarity first, then
/// negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassBank {
    label: Label,
    clauses: Vec<SparseClause>,
}

impl ClassBank {
    pub fn new(
        label: Label,
        n_features: usize,
        hyper: &HyperParams,
        config: &AutomatonConfig,
        rng: &RandomSource,
    ) -> Result<Self> {
        hyper.validate()?;
        let half = hyper.clauses_per_polarity();
        let clauses = (0..hyper.clauses_per_class)
            .map(|j| {
                let polarity = if j < half { Polarity::Positive } else { Polarity::Negative };
                SparseClause::new(
                    polarity,
                    n_features,
                    hyper.literal_sample_fraction,
                    config,
                    &rng.init_stream(label, j as u32),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { label, clauses })
    }

    /// Assembles a bank from existing clauses; polarities must come as an
    /// equal-sized positive block followed by a negative block.
    pub fn from_clauses(label: Label, clauses: Vec<SparseClause>) -> Result<Self> {
        let half = clauses.len() / 2;
        let ordered = clauses.len().is_multiple_of(2)
            && !clauses.is_empty()
            && clauses.iter().enumerate().all(|(j, c)| {
                (c.polarity() == Polarity::Positive) == (j < half)
            });
        if !ordered {
            return Err(Error::InvalidArgument(format!(
                "class {label}: clauses must be {half} positive followed by {half} negative"
            )));
        }
        Ok(Self { label, clauses })
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn clauses(&self) -> &[SparseClause] {
        &self.clauses
    }

    pub fn clauses_mut(&mut self) -> &mut [SparseClause] {
        &mut self.clauses
    }

    pub fn positive(&self) -> &[SparseClause] {
        &self.clauses[..self.clauses.len() / 2]
    }

    pub fn negative(&self) -> &[SparseClause] {
        &self.clauses[self.clauses.len() / 2..]
    }

    /// Positive firing clauses minus negative firing clauses, unclamped.
    pub fn class_sum(&self, x: &Literals, mode: ClauseEvalMode) -> Result<i32> {
        let width = self.clauses.first().map_or(x.n_features(), |c| c.n_features());
        if width != x.n_features() {
            return Err(Error::FeatureWidth {
                expected: width,
                found: x.n_features(),
            });
        }
        Ok(self.sum(x, mode))
    }

    #[inline]
    fn sum(&self, x: &Literals, mode: ClauseEvalMode) -> i32 {
        self.clauses
            .iter()
            .map(|c| if c.output(x, mode) { c.polarity().sign() } else { 0 })
            .sum()
    }

    /// Unit-step decision on the inference-mode vote: `sum >= 0`.
    pub fn vote(&self, x: &Literals) -> Result<bool> {
        Ok(self.class_sum(x, ClauseEvalMode::Inference)? >= 0)
    }

    pub fn live_count(&self) -> usize {
        self.clauses.iter().map(SparseClause::live_count).sum()
    }

    /// Feedback to every clause of this bank for one sample. `target` selects
    /// the reinforcement direction: towards voting for the class, or against.
    #[allow(clippy::too_many_arguments)]
    fn train(
        &mut self,
        x: &Literals,
        target: bool,
        margin: i32,
        rules: &FeedbackRules,
        config: &AutomatonConfig,
        rng: &RandomSource,
        epoch: u64,
        sample_index: u64,
        metrics: &mut StepMetrics,
    ) {
        let outputs: Vec<bool> = self
            .clauses
            .iter()
            .map(|c| c.output(x, ClauseEvalMode::Training))
            .collect();
        let sum: i32 = self
            .clauses
            .iter()
            .zip(&outputs)
            .map(|(c, &o)| if o { c.polarity().sign() } else { 0 })
            .sum();
        let v = sum.clamp(-margin, margin);
        let numerator = if target { margin - v } else { margin + v };
        if numerator == 0 {
            return;
        }
        let p = Probability::new(numerator as f64 / (2 * margin) as f64);
        for (j, (clause, fired)) in self.clauses.iter_mut().zip(outputs).enumerate() {
            let stream = rng.clause_stream(epoch, sample_index, self.label, j as u32);
            if !stream.hit(CLAUSE_SLOT, Purpose::ClauseSelect, p) {
                continue;
            }
            if (clause.polarity() == Polarity::Positive) == target {
                apply_type_i(clause, x, fired, rules, config, &stream, &mut metrics.effects);
                metrics.type_i_clauses += 1;
            } else {
                apply_type_ii(clause, x, fired, config, &mut metrics.effects);
                metrics.type_ii_clauses += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    pub epochs: usize,
    /// Visit samples in a permutation keyed by `(seed, epoch)` instead of
    /// ascending order.
    pub shuffle: bool,
}

impl FitOptions {
    pub fn epochs(epochs: usize) -> Self {
        Self { epochs, shuffle: false }
    }
}

/// A multiclass contracting Tsetlin Machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    n_features: usize,
    config: AutomatonConfig,
    hyper: HyperParams,
    rules: FeedbackRules,
    classes: BTreeMap<Label, ClassBank>,
    initial_live: u64,
    absorbed_exclude: u64,
    absorbed_include: u64,
}

impl Model {
    pub fn new(n_features: usize, config: AutomatonConfig, hyper: HyperParams) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::NoFeatures);
        }
        hyper.validate()?;
        Ok(Self {
            n_features,
            config,
            hyper,
            rules: FeedbackRules::new(&hyper),
            classes: BTreeMap::new(),
            initial_live: 0,
            absorbed_exclude: 0,
            absorbed_include: 0,
        })
    }

    /// Rebuilds a model from stored banks and absorption counters.
    pub fn from_parts(
        n_features: usize,
        config: AutomatonConfig,
        hyper: HyperParams,
        banks: Vec<ClassBank>,
        initial_live: u64,
        absorbed_exclude: u64,
        absorbed_include: u64,
    ) -> Result<Self> {
        let mut model = Self::new(n_features, config, hyper)?;
        for bank in banks {
            if bank.clauses.len() != hyper.clauses_per_class {
                return Err(Error::InvalidArgument(format!(
                    "class {} has {} clauses, expected {}",
                    bank.label,
                    bank.clauses.len(),
                    hyper.clauses_per_class
                )));
            }
            if let Some(c) = bank.clauses.iter().find(|c| c.n_features() != n_features) {
                return Err(Error::FeatureWidth {
                    expected: n_features,
                    found: c.n_features(),
                });
            }
            let label = bank.label;
            if model.classes.insert(label, bank).is_some() {
                return Err(Error::InvalidArgument(format!("class {label} listed twice")));
            }
        }
        let live = model.live_ta_count();
        if live + absorbed_exclude + absorbed_include != initial_live {
            return Err(Error::InvalidArgument(format!(
                "absorption counters do not add up: {live} live + {absorbed_exclude} + {absorbed_include} != {initial_live}"
            )));
        }
        model.initial_live = initial_live;
        model.absorbed_exclude = absorbed_exclude;
        model.absorbed_include = absorbed_include;
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn automaton_config(&self) -> &AutomatonConfig {
        &self.config
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn classes(&self) -> &BTreeMap<Label, ClassBank> {
        &self.classes
    }

    pub fn bank(&self, label: Label) -> Option<&ClassBank> {
        self.classes.get(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.classes.keys().copied()
    }

    /// Registers a class with a fresh bank. Returns `false` if it already
    /// existed. Clause pools are keyed by the label, so the result does not
    /// depend on when the class is added.
    pub fn add_class(&mut self, label: Label, rng: &RandomSource) -> Result<bool> {
        if self.classes.contains_key(&label) {
            return Ok(false);
        }
        let bank = ClassBank::new(label, self.n_features, &self.hyper, &self.config, rng)?;
        self.initial_live += bank.live_count() as u64;
        self.classes.insert(label, bank);
        Ok(true)
    }

    fn check_width(&self, found: usize) -> Result<()> {
        if found != self.n_features {
            return Err(Error::FeatureWidth {
                expected: self.n_features,
                found,
            });
        }
        Ok(())
    }

    pub fn class_sum(&self, label: Label, x: &Literals, mode: ClauseEvalMode) -> Result<Option<i32>> {
        self.check_width(x.n_features())?;
        Ok(self.classes.get(&label).map(|b| b.sum(x, mode)))
    }

    /// Inference-mode class sums in label order.
    pub fn class_sums(&self, x: &Literals) -> Result<Vec<(Label, i32)>> {
        self.check_width(x.n_features())?;
        Ok(self
            .classes
            .values()
            .map(|b| (b.label, b.sum(x, ClauseEvalMode::Inference)))
            .collect())
    }

    /// Class with the largest inference-mode sum; ties go to the smallest
    /// label.
    pub fn predict(&self, x: &Literals) -> Result<Label> {
        self.check_width(x.n_features())?;
        let mut best: Option<(Label, i32)> = None;
        for bank in self.classes.values() {
            let s = bank.sum(x, ClauseEvalMode::Inference);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((bank.label, s));
            }
        }
        best.map(|(l, _)| l).ok_or(Error::NoClasses)
    }

    /// Fraction of samples predicted correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        self.check_width(data.n_features)?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut x = Literals::from_true_indices(self.n_features, &[])?;
        let mut correct = 0usize;
        for s in &data.samples {
            x.refill(self.n_features, &s.features)?;
            if self.predict(&x)? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    /// One training step: feedback to the target class and to one uniformly
    /// drawn other class.
    pub fn train_step(
        &mut self,
        x: &Literals,
        y: Label,
        epoch: u64,
        sample_index: u64,
        rng: &RandomSource,
    ) -> Result<StepMetrics> {
        self.check_width(x.n_features())?;
        self.add_class(y, rng)?;
        let mut metrics = StepMetrics::default();
        let margin = self.hyper.voting_margin as i32;

        let negative = if self.classes.len() > 1 {
            let k = rng.index(epoch, sample_index, y, Purpose::NegativeClass, self.classes.len() - 1);
            self.classes.keys().copied().filter(|&l| l != y).nth(k)
        } else {
            None
        };

        let Self {
            classes, rules, config, ..
        } = self;
        let bank = classes.get_mut(&y).expect("registered above");
        bank.train(x, true, margin, rules, config, rng, epoch, sample_index, &mut metrics);
        if let Some(other) = negative {
            let bank = classes.get_mut(&other).expect("existing class");
            bank.train(x, false, margin, rules, config, rng, epoch, sample_index, &mut metrics);
        }

        self.absorbed_exclude += metrics.effects.discarded;
        self.absorbed_include += metrics.effects.permanently_included;
        Ok(metrics)
    }

    /// Trains for `options.epochs` epochs and reports metrics after each.
    /// Wall time covers the training-step loop only; test accuracy, when a
    /// test set is given, is measured afterwards.
    pub fn fit(
        &mut self,
        train: &Dataset,
        options: &FitOptions,
        rng: &RandomSource,
        test: Option<&Dataset>,
        mut observer: impl FnMut(&EpochMetrics),
    ) -> Result<Vec<EpochMetrics>> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        self.check_width(train.n_features)?;
        if let Some(t) = test {
            self.check_width(t.n_features)?;
        }
        if let Some(s) = train
            .samples
            .iter()
            .find(|s| s.features.last().is_some_and(|&f| f as usize >= self.n_features))
        {
            return Err(Error::LiteralOutOfRange {
                literal: *s.features.last().unwrap(),
                n_features: self.n_features,
            });
        }
        let mut history = Vec::with_capacity(options.epochs);
        if options.epochs == 0 {
            return Ok(history);
        }
        for label in train.labels() {
            self.add_class(label, rng)?;
        }

        let mut x = Literals::from_true_indices(self.n_features, &[])?;
        let mut order: Vec<usize> = (0..train.len()).collect();
        for epoch in 0..options.epochs {
            if options.shuffle {
                order = (0..train.len()).collect();
                for i in (1..order.len()).rev() {
                    let j = rng.index(epoch as u64, i as u64, u32::MAX, Purpose::Shuffle, i + 1);
                    order.swap(i, j);
                }
            }
            let mut totals = StepMetrics::default();
            let start = Instant::now();
            for &i in &order {
                let sample = &train.samples[i];
                x.refill(self.n_features, &sample.features)?;
                totals += self.train_step(&x, sample.label, epoch as u64, i as u64, rng)?;
            }
            let train_wall_time = start.elapsed().as_secs_f64();
            let test_accuracy = test.map(|t| self.accuracy(t)).transpose()?;
            let metrics = EpochMetrics {
                epoch,
                train_wall_time,
                test_accuracy,
                absorbed_exclude_total: self.absorbed_exclude,
                absorbed_include_total: self.absorbed_include,
                live_ta_count: self.live_ta_count(),
                ta_update_events: totals.effects.ta_updates,
                effects: totals.effects,
            };
            observer(&metrics);
            history.push(metrics);
        }
        Ok(history)
    }

    /// Automata still learning across all clauses.
    pub fn live_ta_count(&self) -> u64 {
        self.classes.values().map(|b| b.live_count() as u64).sum()
    }

    /// Automata created, summed over all registered classes.
    pub fn initial_live_count(&self) -> u64 {
        self.initial_live
    }

    pub fn absorbed_exclude_total(&self) -> u64 {
        self.absorbed_exclude
    }

    pub fn absorbed_include_total(&self) -> u64 {
        self.absorbed_include
    }

    /// Share of all automata ever created that have been absorbed.
    pub fn absorption_rate(&self) -> f64 {
        if self.initial_live == 0 {
            return 0.0;
        }
        (self.absorbed_exclude + self.absorbed_include) as f64 / self.initial_live as f64
    }
}
