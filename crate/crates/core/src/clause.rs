//! The contracting sparse clause.
//!
//! A clause keeps its live automata in two lists of `(literal, state)`
//! tuples, one per action, and the literals absorbed on the Include side in a
//! third list without states. Literals absorbed on the Exclude side are
//! dropped entirely. Every removal is a swap-remove (overwrite with the last
//! element, then pop), and moved or absorbed literals are appended to the end
//! of their destination list. A per-clause slot table maps each literal to
//! its current list and position so single-literal updates locate their
//! tuple in constant time.

use std::fmt;

use crate::automata::{self, AutomatonConfig, State, TransitionOutcome};
use crate::error::{Error, Result};
use crate::literal::{LiteralId, Literals};
use crate::rng::{ClauseStream, Probability, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i32 {
        match self {
            Self::Positive => 1,
            Self::Negative => -1,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "+",
            Self::Negative => "-",
        })
    }
}

/// Selects the empty-clause rule: an empty clause outputs 1 while training
/// and 0 at inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseEvalMode {
    Training,
    Inference,
}

/// A live automaton: its literal and current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub literal: u32,
    pub state: State,
}

impl Entry {
    pub fn new(literal: u32, state: State) -> Self {
        Self { literal, state }
    }
}

/// Which list currently holds a literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ListKind {
    Excluded,
    Included,
    Permanent,
}

/// Structural result of one increase or decrease on a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateEffect {
    /// State moved within the same list.
    StateChanged(State),
    MovedToInclude,
    MovedToExclude,
    PermanentlyIncluded,
    Discarded,
    /// Already at the far end with no barrier; nothing changed.
    Saturated,
}

/// Receives one call per automaton update, i.e. one activity event.
pub trait EffectSink {
    fn record(&mut self, effect: UpdateEffect);
}

impl EffectSink for Vec<UpdateEffect> {
    fn record(&mut self, effect: UpdateEffect) {
        self.push(effect);
    }
}

/// Slot encoding: high two bits hold the list tag, the rest the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot(u32);

impl Slot {
    const ABSENT: Slot = Slot(0);
    const POS_MASK: u32 = (1 << 30) - 1;

    #[inline]
    fn new(kind: ListKind, pos: usize) -> Self {
        let tag = match kind {
            ListKind::Excluded => 1,
            ListKind::Included => 2,
            ListKind::Permanent => 3,
        };
        Slot((tag << 30) | pos as u32)
    }

    #[inline]
    fn get(self) -> Option<(ListKind, usize)> {
        let pos = (self.0 & Self::POS_MASK) as usize;
        match self.0 >> 30 {
            1 => Some((ListKind::Excluded, pos)),
            2 => Some((ListKind::Included, pos)),
            3 => Some((ListKind::Permanent, pos)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SparseClause {
    polarity: Polarity,
    n_features: usize,
    pool_size: usize,
    excluded: Vec<Entry>,
    included: Vec<Entry>,
    permanent: Vec<u32>,
    slots: Vec<Slot>,
}

impl PartialEq for SparseClause {
    /// Structural equality, list order included.
    fn eq(&self, other: &Self) -> bool {
        self.polarity == other.polarity
            && self.n_features == other.n_features
            && self.excluded == other.excluded
            && self.included == other.included
            && self.permanent == other.permanent
    }
}

impl Eq for SparseClause {}

impl SparseClause {
    /// Creates a clause whose pool draws each of the `2K` literals
    /// independently with probability `sample_fraction` (all literals when
    /// the fraction is 1). Selected literals start in the excluded list, in
    /// ascending id order, at the reset state.
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
        check_width(n_features)?;
        let n_literals = 2 * n_features as u32;
        let start = config.initial_state();
        let keep = Probability::new(sample_fraction);
        let excluded: Vec<Entry> = (0..n_literals)
            .filter(|&l| keep.is_certain() || rng.hit(l, Purpose::PoolSample, keep))
            .map(|l| Entry::new(l, start))
            .collect();
        Ok(Self::assemble(polarity, n_features, excluded, Vec::new(), Vec::new()))
    }

    /// Rebuilds a clause from explicit lists, preserving their order.
    pub fn from_parts(
        polarity: Polarity,
        n_features: usize,
        excluded: Vec<Entry>,
        included: Vec<Entry>,
        permanent: Vec<u32>,
        config: &AutomatonConfig,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::NoFeatures);
        }
        check_width(n_features)?;
        let clause = Self::assemble(polarity, n_features, excluded, included, permanent);
        clause
            .validate(config)
            .map_err(|e| Error::InvalidArgument(format!("inconsistent clause: {e}")))?;
        Ok(clause)
    }

    fn assemble(
        polarity: Polarity,
        n_features: usize,
        excluded: Vec<Entry>,
        included: Vec<Entry>,
        permanent: Vec<u32>,
    ) -> Self {
        let mut slots = vec![Slot::ABSENT; 2 * n_features];
        let mut set = |lit: u32, slot: Slot| {
            if let Some(s) = slots.get_mut(lit as usize) {
                *s = slot;
            }
        };
        for (i, e) in excluded.iter().enumerate() {
            set(e.literal, Slot::new(ListKind::Excluded, i));
        }
        for (i, e) in included.iter().enumerate() {
            set(e.literal, Slot::new(ListKind::Included, i));
        }
        for (i, &l) in permanent.iter().enumerate() {
            set(l, Slot::new(ListKind::Permanent, i));
        }
        let pool_size = excluded.len() + included.len() + permanent.len();
        Self {
            polarity,
            n_features,
            pool_size,
            excluded,
            included,
            permanent,
            slots,
        }
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Literal count when the clause was created (or loaded).
    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn excluded(&self) -> &[Entry] {
        &self.excluded
    }

    pub fn included(&self) -> &[Entry] {
        &self.included
    }

    pub fn permanent(&self) -> &[u32] {
        &self.permanent
    }

    /// `(|excluded|, |included|, |permanent|)`.
    pub fn active_counts(&self) -> (usize, usize, usize) {
        (self.excluded.len(), self.included.len(), self.permanent.len())
    }

    /// Automata still taking part in learning.
    pub fn live_count(&self) -> usize {
        self.excluded.len() + self.included.len()
    }

    /// Literals that currently form the conjunction.
    pub fn conjunction_len(&self) -> usize {
        self.included.len() + self.permanent.len()
    }

    pub fn location(&self, literal: LiteralId) -> Option<ListKind> {
        self.slot(literal.0).map(|(k, _)| k)
    }

    /// State of a live automaton.
    pub fn state_of(&self, literal: LiteralId) -> Option<State> {
        match self.slot(literal.0)? {
            (ListKind::Excluded, p) => Some(self.excluded[p].state),
            (ListKind::Included, p) => Some(self.included[p].state),
            (ListKind::Permanent, _) => None,
        }
    }

    /// `(literal, state)` for every live automaton, excluded list first.
    pub fn live_entries(&self) -> impl Iterator<Item = Entry> + '_ {
        self.excluded.iter().chain(self.included.iter()).copied()
    }

    #[inline]
    fn slot(&self, literal: u32) -> Option<(ListKind, usize)> {
        self.slots.get(literal as usize).and_then(|s| s.get())
    }

    /// Conjunction of the included and permanent literals. The excluded list
    /// is never read.
    pub fn evaluate(&self, x: &Literals, mode: ClauseEvalMode) -> Result<bool> {
        if x.n_features() != self.n_features {
            return Err(Error::FeatureWidth {
                expected: self.n_features,
                found: x.n_features(),
            });
        }
        Ok(self.output(x, mode))
    }

    /// `evaluate` without the width check.
    #[inline]
    pub(crate) fn output(&self, x: &Literals, mode: ClauseEvalMode) -> bool {
        if self.permanent.is_empty() && self.included.is_empty() {
            return mode == ClauseEvalMode::Training;
        }
        self.permanent.iter().all(|&l| x.value(l)) && self.included.iter().all(|e| x.value(e.literal))
    }

    /// Increases the automaton of `literal` by one state.
    pub fn increase_literal(&mut self, literal: LiteralId, config: &AutomatonConfig) -> Result<UpdateEffect> {
        match self.slot(literal.0) {
            Some((ListKind::Excluded, p)) => Ok(self.increase_excluded(p, config)),
            Some((ListKind::Included, p)) => Ok(self.increase_included(p, config)),
            _ => Err(Error::LiteralNotLive(literal.0)),
        }
    }

    /// Decreases the automaton of `literal` by one state.
    pub fn decrease_literal(&mut self, literal: LiteralId, config: &AutomatonConfig) -> Result<UpdateEffect> {
        match self.slot(literal.0) {
            Some((ListKind::Excluded, p)) => Ok(self.decrease_excluded(p, config)),
            Some((ListKind::Included, p)) => Ok(self.decrease_included(p, config)),
            _ => Err(Error::LiteralNotLive(literal.0)),
        }
    }

    #[inline]
    pub(crate) fn increase_excluded(&mut self, pos: usize, config: &AutomatonConfig) -> UpdateEffect {
        let e = self.excluded[pos];
        match automata::increase(e.state, config) {
            TransitionOutcome::Stayed(s) => self.stay(ListKind::Excluded, pos, e.state, s),
            TransitionOutcome::SwitchedToInclude => {
                let e = self.take_excluded(pos);
                self.push_included(Entry::new(e.literal, config.n_states_per_action()));
                UpdateEffect::MovedToInclude
            }
            // Unreachable for valid configs: b_in >= N + 1.
            TransitionOutcome::AbsorbedInclude => {
                let e = self.take_excluded(pos);
                self.push_permanent(e.literal);
                UpdateEffect::PermanentlyIncluded
            }
            other => unreachable!("increase produced {other:?}"),
        }
    }

    #[inline]
    pub(crate) fn increase_included(&mut self, pos: usize, config: &AutomatonConfig) -> UpdateEffect {
        let e = self.included[pos];
        match automata::increase(e.state, config) {
            TransitionOutcome::Stayed(s) => self.stay(ListKind::Included, pos, e.state, s),
            TransitionOutcome::AbsorbedInclude => {
                let e = self.take_included(pos);
                self.push_permanent(e.literal);
                UpdateEffect::PermanentlyIncluded
            }
            other => unreachable!("increase of an included automaton produced {other:?}"),
        }
    }

    #[inline]
    pub(crate) fn decrease_excluded(&mut self, pos: usize, config: &AutomatonConfig) -> UpdateEffect {
        let e = self.excluded[pos];
        match automata::decrease(e.state, config) {
            TransitionOutcome::Stayed(s) => self.stay(ListKind::Excluded, pos, e.state, s),
            TransitionOutcome::AbsorbedExclude => {
                self.take_excluded(pos);
                UpdateEffect::Discarded
            }
            other => unreachable!("decrease of an excluded automaton produced {other:?}"),
        }
    }

    #[inline]
    pub(crate) fn decrease_included(&mut self, pos: usize, config: &AutomatonConfig) -> UpdateEffect {
        let e = self.included[pos];
        match automata::decrease(e.state, config) {
            TransitionOutcome::Stayed(s) => self.stay(ListKind::Included, pos, e.state, s),
            TransitionOutcome::SwitchedToExclude => {
                let e = self.take_included(pos);
                self.push_excluded(Entry::new(e.literal, config.n_states_per_action() - 1));
                UpdateEffect::MovedToExclude
            }
            // Unreachable for valid configs: b_ex <= N - 2.
            TransitionOutcome::AbsorbedExclude => {
                self.take_included(pos);
                UpdateEffect::Discarded
            }
            other => unreachable!("decrease produced {other:?}"),
        }
    }

    #[inline]
    fn stay(&mut self, list: ListKind, pos: usize, old: State, new: State) -> UpdateEffect {
        if old == new {
            return UpdateEffect::Saturated;
        }
        match list {
            ListKind::Excluded => self.excluded[pos].state = new,
            ListKind::Included => self.included[pos].state = new,
            ListKind::Permanent => unreachable!(),
        }
        UpdateEffect::StateChanged(new)
    }

    fn take_excluded(&mut self, pos: usize) -> Entry {
        let e = self.excluded.swap_remove(pos);
        if let Some(moved) = self.excluded.get(pos) {
            self.slots[moved.literal as usize] = Slot::new(ListKind::Excluded, pos);
        }
        self.slots[e.literal as usize] = Slot::ABSENT;
        e
    }

    fn take_included(&mut self, pos: usize) -> Entry {
        let e = self.included.swap_remove(pos);
        if let Some(moved) = self.included.get(pos) {
            self.slots[moved.literal as usize] = Slot::new(ListKind::Included, pos);
        }
        self.slots[e.literal as usize] = Slot::ABSENT;
        e
    }

    fn push_excluded(&mut self, e: Entry) {
        self.slots[e.literal as usize] = Slot::new(ListKind::Excluded, self.excluded.len());
        self.excluded.push(e);
    }

    fn push_included(&mut self, e: Entry) {
        self.slots[e.literal as usize] = Slot::new(ListKind::Included, self.included.len());
        self.included.push(e);
    }

    fn push_permanent(&mut self, literal: u32) {
        self.slots[literal as usize] = Slot::new(ListKind::Permanent, self.permanent.len());
        self.permanent.push(literal);
    }

    /// Checks every structural invariant; returns a description of the first
    /// violation.
    pub fn validate(&self, config: &AutomatonConfig) -> std::result::Result<(), String> {
        let n = config.n_states_per_action();
        let n_lit = 2 * self.n_features;
        let mut seen = vec![false; n_lit];
        let mut mark = |lit: u32, list: &str| -> std::result::Result<(), String> {
            let slot = seen
                .get_mut(lit as usize)
                .ok_or_else(|| format!("{list} literal {lit} out of range"))?;
            if *slot {
                return Err(format!("literal {lit} appears more than once"));
            }
            *slot = true;
            Ok(())
        };
        for e in &self.excluded {
            mark(e.literal, "excluded")?;
            if e.state >= n || !config.is_live_state(e.state) {
                return Err(format!("excluded literal {} has state {}", e.literal, e.state));
            }
        }
        for e in &self.included {
            mark(e.literal, "included")?;
            if e.state < n || !config.is_live_state(e.state) {
                return Err(format!("included literal {} has state {}", e.literal, e.state));
            }
        }
        for &l in &self.permanent {
            mark(l, "permanent")?;
        }
        if self.excluded.len() + self.included.len() + self.permanent.len() > self.pool_size {
            return Err("list sizes exceed the initial pool".into());
        }
        for (lit, slot) in self.slots.iter().enumerate() {
            let expect = match slot.get() {
                None => !seen[lit],
                Some((ListKind::Excluded, p)) => self.excluded.get(p).map(|e| e.literal as usize) == Some(lit),
                Some((ListKind::Included, p)) => self.included.get(p).map(|e| e.literal as usize) == Some(lit),
                Some((ListKind::Permanent, p)) => self.permanent.get(p).map(|&l| l as usize) == Some(lit),
            };
            if !expect {
                return Err(format!("slot index stale for literal {lit}"));
            }
        }
        Ok(())
    }
}

fn check_width(n_features: usize) -> Result<()> {
    if n_features >= (1 << 28) {
        return Err(Error::InvalidArgument(format!("{n_features} features exceed the supported width")));
    }
    Ok(())
}
