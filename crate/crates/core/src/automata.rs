//! Tsetlin automata with optional absorbing barriers.
//!
//! States are 0-indexed: `0..N` select Exclude and `N..2N` select Include.
//! A freshly reset automaton sits at `N - 1`, the Exclude state nearest the
//! center. Setting an exclude barrier `b` makes the automaton absorb as soon
//! as a decrease lands on `b`; an include barrier does the same on the
//! Include side when an increase lands on it. Without a barrier the far ends
//! saturate.

use crate::error::{Error, Result};

/// Automaton state index in `[0, 2N)`.
pub type State = u32;

/// Action selected by an automaton state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Exclude,
    Include,
}

/// State-space geometry and absorption barriers shared by every automaton of
/// a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AutomatonConfig {
    n_states_per_action: u32,
    exclude_barrier: Option<State>,
    include_barrier: Option<State>,
}

impl Default for AutomatonConfig {
    /// 8-bit automaton (256 states), no absorption.
    fn default() -> Self {
        Self {
            n_states_per_action: 128,
            exclude_barrier: None,
            include_barrier: None,
        }
    }
}

impl AutomatonConfig {
    pub fn new(
        n_states_per_action: u32,
        exclude_barrier: Option<State>,
        include_barrier: Option<State>,
    ) -> Result<Self> {
        let n = n_states_per_action;
        if n == 0 {
            return Err(Error::InvalidAutomaton(
                "states per action must be positive".into(),
            ));
        }
        if n > (1 << 29) {
            return Err(Error::InvalidAutomaton(format!(
                "{n} states per action exceeds the supported maximum of 2^29"
            )));
        }
        if let Some(b) = exclude_barrier {
            // n - 1 is the reset state and must stay live.
            if n < 2 || b > n - 2 {
                return Err(Error::InvalidAutomaton(format!(
                    "exclude barrier {b} must lie in [0, {}]",
                    n as i64 - 2
                )));
            }
        }
        if let Some(b) = include_barrier {
            if b < n + 1 || b > 2 * n - 1 {
                return Err(Error::InvalidAutomaton(format!(
                    "include barrier {b} must lie in [{}, {}]",
                    n + 1,
                    2 * n - 1
                )));
            }
        }
        Ok(Self {
            n_states_per_action,
            exclude_barrier,
            include_barrier,
        })
    }

    /// Maps the experiment-style "absorbing state" parameter onto a config
    /// with `N = 128`: `0` disables Exclude absorption, any other value is
    /// the exclude barrier.
    pub fn with_absorbing_state(absorbing_state: u32) -> Result<Self> {
        let barrier = (absorbing_state != 0).then_some(absorbing_state);
        Self::new(128, barrier, None)
    }

    pub fn n_states_per_action(&self) -> u32 {
        self.n_states_per_action
    }

    pub fn total_states(&self) -> u32 {
        2 * self.n_states_per_action
    }

    pub fn exclude_barrier(&self) -> Option<State> {
        self.exclude_barrier
    }

    pub fn include_barrier(&self) -> Option<State> {
        self.include_barrier
    }

    pub fn has_barrier(&self) -> bool {
        self.exclude_barrier.is_some() || self.include_barrier.is_some()
    }

    /// Reset state: the Exclude state closest to the center.
    #[inline]
    pub fn initial_state(&self) -> State {
        self.n_states_per_action - 1
    }

    #[inline]
    pub fn action(&self, state: State) -> Action {
        if state >= self.n_states_per_action {
            Action::Include
        } else {
            Action::Exclude
        }
    }

    /// Whether `state` may be held by an automaton that has not absorbed.
    pub fn is_live_state(&self, state: State) -> bool {
        state < self.total_states()
            && self.exclude_barrier.is_none_or(|b| state > b)
            && self.include_barrier.is_none_or(|b| state < b)
    }
}

/// Structural consequence of a single transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionOutcome {
    /// The action is unchanged; carries the new (possibly identical) state.
    Stayed(State),
    /// Crossed from `N - 1` to `N`.
    SwitchedToInclude,
    /// Crossed from `N` to `N - 1`.
    SwitchedToExclude,
    AbsorbedExclude,
    AbsorbedInclude,
}

impl TransitionOutcome {
    /// State held after the transition, or `None` once absorbed.
    pub fn next_state(self, config: &AutomatonConfig) -> Option<State> {
        match self {
            Self::Stayed(s) => Some(s),
            Self::SwitchedToInclude => Some(config.n_states_per_action),
            Self::SwitchedToExclude => Some(config.n_states_per_action - 1),
            Self::AbsorbedExclude | Self::AbsorbedInclude => None,
        }
    }
}

/// Reset state of a new automaton, `N - 1`.
#[inline]
pub fn initial_state(config: &AutomatonConfig) -> State {
    config.initial_state()
}

/// Moves one step towards the Include end.
#[inline]
pub fn increase(state: State, config: &AutomatonConfig) -> TransitionOutcome {
    let n = config.n_states_per_action;
    let next = state + 1;
    if config.include_barrier == Some(next) {
        TransitionOutcome::AbsorbedInclude
    } else if state == n - 1 {
        TransitionOutcome::SwitchedToInclude
    } else if next >= 2 * n {
        TransitionOutcome::Stayed(state)
    } else {
        TransitionOutcome::Stayed(next)
    }
}

/// Moves one step towards the Exclude end.
#[inline]
pub fn decrease(state: State, config: &AutomatonConfig) -> TransitionOutcome {
    let n = config.n_states_per_action;
    if state == 0 {
        // Only reachable without an exclude barrier.
        return TransitionOutcome::Stayed(0);
    }
    let next = state - 1;
    if config.exclude_barrier == Some(next) {
        TransitionOutcome::AbsorbedExclude
    } else if state == n {
        TransitionOutcome::SwitchedToExclude
    } else {
        TransitionOutcome::Stayed(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force transition table: walks an explicit list of the 2N states
    /// and looks up neighbours by position, independent of the arithmetic in
    /// `increase`/`decrease`.
    fn table_outcome(state: u32, up: bool, n: u32, b_ex: Option<u32>, b_in: Option<u32>) -> TransitionOutcome {
        let states: Vec<u32> = (0..2 * n).collect();
        let pos = states.iter().position(|&s| s == state).unwrap();
        let target = if up {
            states.get(pos + 1).copied().unwrap_or(states[pos])
        } else if pos == 0 {
            states[0]
        } else {
            states[pos - 1]
        };
        let side = |s: u32| s >= n;
        if up && b_in == Some(target) && target != state {
            TransitionOutcome::AbsorbedInclude
        } else if !up && b_ex == Some(target) && target != state {
            TransitionOutcome::AbsorbedExclude
        } else if side(target) && !side(state) {
            TransitionOutcome::SwitchedToInclude
        } else if !side(target) && side(state) {
            TransitionOutcome::SwitchedToExclude
        } else {
            TransitionOutcome::Stayed(target)
        }
    }

    #[test]
    fn initial_state_examples() {
        assert_eq!(initial_state(&AutomatonConfig::default()), 127);
        assert_eq!(initial_state(&AutomatonConfig::new(4, None, None).unwrap()), 3);
        assert_eq!(initial_state(&AutomatonConfig::new(1, None, None).unwrap()), 0);
    }

    #[test]
    fn increase_examples() {
        let plain = AutomatonConfig::default();
        assert_eq!(increase(127, &plain), TransitionOutcome::SwitchedToInclude);
        assert_eq!(increase(255, &plain), TransitionOutcome::Stayed(255));
        let absorbing = AutomatonConfig::new(128, None, Some(255)).unwrap();
        assert_eq!(increase(254, &absorbing), TransitionOutcome::AbsorbedInclude);
    }

    #[test]
    fn decrease_examples() {
        let barrier = AutomatonConfig::new(128, Some(1), None).unwrap();
        assert_eq!(decrease(2, &barrier), TransitionOutcome::AbsorbedExclude);
        let plain = AutomatonConfig::default();
        assert_eq!(decrease(128, &plain), TransitionOutcome::SwitchedToExclude);
        assert_eq!(decrease(0, &plain), TransitionOutcome::Stayed(0));
        assert_eq!(decrease(40, &barrier), TransitionOutcome::Stayed(39));
    }

    #[test]
    fn transitions_match_exhaustive_table() {
        let n = 128;
        let mut barriers_ex: Vec<Option<u32>> = vec![None];
        barriers_ex.extend((0..=n - 2).map(Some));
        let mut barriers_in: Vec<Option<u32>> = vec![None];
        barriers_in.extend((n + 1..2 * n).map(Some));
        for &b_ex in &barriers_ex {
            let cfg = AutomatonConfig::new(n, b_ex, None).unwrap();
            for s in (0..2 * n).filter(|&s| cfg.is_live_state(s)) {
                assert_eq!(decrease(s, &cfg), table_outcome(s, false, n, b_ex, None), "dec s={s} b_ex={b_ex:?}");
                assert_eq!(increase(s, &cfg), table_outcome(s, true, n, b_ex, None), "inc s={s} b_ex={b_ex:?}");
            }
        }
        for &b_in in &barriers_in {
            let cfg = AutomatonConfig::new(n, None, b_in).unwrap();
            for s in (0..2 * n).filter(|&s| cfg.is_live_state(s)) {
                assert_eq!(increase(s, &cfg), table_outcome(s, true, n, None, b_in), "inc s={s} b_in={b_in:?}");
                assert_eq!(decrease(s, &cfg), table_outcome(s, false, n, None, b_in), "dec s={s} b_in={b_in:?}");
            }
        }
    }

    #[test]
    fn action_flips_only_at_center() {
        let cfg = AutomatonConfig::default();
        let flips = (1..cfg.total_states())
            .filter(|&s| cfg.action(s) != cfg.action(s - 1))
            .collect::<Vec<_>>();
        assert_eq!(flips, vec![128]);
        assert_eq!(cfg.action(127), Action::Exclude);
        assert_eq!(cfg.action(128), Action::Include);
    }

    #[test]
    fn exclude_barrier_reached_after_expected_decreases() {
        let n = 128;
        for b in 0..=n - 2 {
            let cfg = AutomatonConfig::new(n, Some(b), None).unwrap();
            let mut state = cfg.initial_state();
            let mut steps = 0;
            loop {
                steps += 1;
                match decrease(state, &cfg) {
                    TransitionOutcome::AbsorbedExclude => break,
                    TransitionOutcome::Stayed(s) => state = s,
                    other => panic!("unexpected {other:?}"),
                }
            }
            assert_eq!(steps, n - 1 - b);
        }
    }

    #[test]
    fn include_barrier_reached_after_expected_increases() {
        let n = 128;
        for b in n + 1..2 * n {
            let cfg = AutomatonConfig::new(n, None, Some(b)).unwrap();
            let mut state = n;
            let mut steps = 0;
            loop {
                steps += 1;
                match increase(state, &cfg) {
                    TransitionOutcome::AbsorbedInclude => break,
                    TransitionOutcome::Stayed(s) => state = s,
                    other => panic!("unexpected {other:?}"),
                }
            }
            assert_eq!(steps, b - n);
        }
    }

    #[test]
    fn rejects_degenerate_barriers() {
        assert!(AutomatonConfig::new(0, None, None).is_err());
        assert!(AutomatonConfig::new(128, Some(127), None).is_err());
        assert!(AutomatonConfig::new(128, None, Some(128)).is_err());
        assert!(AutomatonConfig::new(128, None, Some(256)).is_err());
        assert!(AutomatonConfig::new(1, Some(0), None).is_err());
        assert!(AutomatonConfig::new(128, Some(126), Some(129)).is_ok());
    }

    #[test]
    fn absorbing_state_parameter_mapping() {
        assert_eq!(AutomatonConfig::with_absorbing_state(0).unwrap().exclude_barrier(), None);
        assert_eq!(AutomatonConfig::with_absorbing_state(125).unwrap().exclude_barrier(), Some(125));
        assert!(AutomatonConfig::with_absorbing_state(127).is_err());
    }

    proptest! {
        #[test]
        fn state_stays_bounded(
            n in 1u32..40,
            ex in proptest::option::of(0u32..40),
            inc in proptest::option::of(0u32..80),
            moves in proptest::collection::vec(any::<bool>(), 0..400),
        ) {
            let b_ex = ex.filter(|&b| n >= 2 && b <= n - 2);
            let b_in = inc.filter(|&b| b > n && b < 2 * n);
            let cfg = AutomatonConfig::new(n, b_ex, b_in).unwrap();
            let mut state = cfg.initial_state();
            for up in moves {
                let out = if up { increase(state, &cfg) } else { decrease(state, &cfg) };
                match out.next_state(&cfg) {
                    Some(s) => {
                        prop_assert!(s < 2 * n);
                        prop_assert!(cfg.is_live_state(s));
                        state = s;
                    }
                    None => break,
                }
            }
        }
    }
}
