//! Contracting Tsetlin Machine.
//!
//! Clauses keep their literals in three lists: excluded, included and
//! permanently included. Automata that cross an absorbing barrier leave the
//! learning loop for good, so training work shrinks as the model converges.
//!
//! ```
//! use ctm_core::{synth_noisy_conjunction, AutomatonConfig, FitOptions, HyperParams, Model, RandomSource};
//!
//! let data = synth_noisy_conjunction(200, 8, 0.0, 1).unwrap();
//! let config = AutomatonConfig::new(128, Some(100), None).unwrap();
//! let mut model = Model::new(8, config, HyperParams::default()).unwrap();
//! model.fit(&data, &FitOptions::epochs(5), &RandomSource::new(1), None, |_| {}).unwrap();
//! assert!(model.live_ta_count() <= model.initial_live_count());
//! ```

pub mod automata;
pub mod clause;
pub mod data;
pub mod error;
pub mod explain;
pub mod learner;
pub mod literal;
pub mod metrics;
pub mod persist;
pub mod reference;
pub mod rng;
pub mod sweep;

pub use automata::{Action, AutomatonConfig, State, TransitionOutcome};
pub use clause::{ClauseEvalMode, EffectSink, Entry, ListKind, Polarity, SparseClause, UpdateEffect};
pub use data::{
    booleanize_corpus, noisy_conjunction_concept, parse_labeled_texts, synth_noisy_conjunction, BoolSample,
    BooleanizerConfig, Dataset, Label, LabeledText, Vocabulary,
};
pub use error::{Error, Result};
pub use explain::explain_model;
pub use learner::{ClassBank, FitOptions, HyperParams, Model};
pub use literal::{LiteralId, Literals};
pub use metrics::{relative_activity, EffectCounts, EpochMetrics, PowerModel, StepMetrics};
pub use persist::{load_model, save_model};
pub use reference::{DenseClause, DenseModel};
pub use rng::{Purpose, RandomSource};
pub use sweep::{run_sweep, run_sweep_to, SweepReport, SweepSpec};
