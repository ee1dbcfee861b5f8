//! Training counters and per-epoch metrics.

use std::ops::AddAssign;

use crate::clause::{EffectSink, UpdateEffect};

/// Counts of automaton updates by structural effect. `ta_updates` counts
/// every increase/decrease call and is the switching-activity proxy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EffectCounts {
    pub ta_updates: u64,
    pub state_changed: u64,
    pub moved_to_include: u64,
    pub moved_to_exclude: u64,
    pub permanently_included: u64,
    pub discarded: u64,
    pub saturated: u64,
}

impl EffectCounts {
    /// Sum of the per-effect counters; equals `ta_updates` when every update
    /// went through [`EffectSink::record`].
    pub fn sum_by_effect(&self) -> u64 {
        self.state_changed
            + self.moved_to_include
            + self.moved_to_exclude
            + self.permanently_included
            + self.discarded
            + self.saturated
    }

    /// Automata removed from learning.
    pub fn absorbed(&self) -> u64 {
        self.permanently_included + self.discarded
    }
}

impl EffectSink for EffectCounts {
    #[inline]
    fn record(&mut self, effect: UpdateEffect) {
        self.ta_updates += 1;
        match effect {
            UpdateEffect::StateChanged(_) => self.state_changed += 1,
            UpdateEffect::MovedToInclude => self.moved_to_include += 1,
            UpdateEffect::MovedToExclude => self.moved_to_exclude += 1,
            UpdateEffect::PermanentlyIncluded => self.permanently_included += 1,
            UpdateEffect::Discarded => self.discarded += 1,
            UpdateEffect::Saturated => self.saturated += 1,
        }
    }
}

impl AddAssign for EffectCounts {
    fn add_assign(&mut self, o: Self) {
        self.ta_updates += o.ta_updates;
        self.state_changed += o.state_changed;
        self.moved_to_include += o.moved_to_include;
        self.moved_to_exclude += o.moved_to_exclude;
        self.permanently_included += o.permanently_included;
        self.discarded += o.discarded;
        self.saturated += o.saturated;
    }
}

/// Result of one training step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepMetrics {
    pub effects: EffectCounts,
    pub type_i_clauses: u64,
    pub type_ii_clauses: u64,
}

impl AddAssign for StepMetrics {
    fn add_assign(&mut self, o: Self) {
        self.effects += o.effects;
        self.type_i_clauses += o.type_i_clauses;
        self.type_ii_clauses += o.type_ii_clauses;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    /// Zero-based epoch index.
    pub epoch: usize,
    /// Seconds spent in the training-step loop only.
    pub train_wall_time: f64,
    pub test_accuracy: Option<f64>,
    pub absorbed_exclude_total: u64,
    pub absorbed_include_total: u64,
    pub live_ta_count: u64,
    /// Automaton updates during this epoch.
    pub ta_update_events: u64,
    /// Breakdown of this epoch's updates.
    pub effects: EffectCounts,
}

/// Optional circuit constants for a relative dynamic-power estimate
/// `0.5 * C * V^2 * f * alpha`, with alpha taken from update counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub capacitance: f64,
    pub supply_voltage: f64,
    pub frequency: f64,
}

impl PowerModel {
    /// `activity` is the fraction of automata updated per cycle.
    pub fn dynamic_power(&self, activity: f64) -> f64 {
        0.5 * self.capacitance * self.supply_voltage * self.supply_voltage * self.frequency * activity
    }
}

/// Ratio of update activity between two runs; `< 1` means fewer automaton
/// transitions in `candidate`.
pub fn relative_activity(candidate: u64, baseline: u64) -> Option<f64> {
    (baseline > 0).then(|| candidate as f64 / baseline as f64)
}
