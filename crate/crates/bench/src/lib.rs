//! Fixtures shared by the criterion benches.

use ctm_core::{
    data::bundled, synth_noisy_conjunction, AutomatonConfig, BooleanizerConfig, Dataset, FitOptions, HyperParams,
    Model, RandomSource, Result,
};

/// Booleanized bundled corpus with the given vocabulary size.
pub fn corpus(vocabulary_size: usize) -> Result<(Dataset, Dataset)> {
    let (train, test) = bundled::sample_corpus()?;
    let (train, test, _) = ctm_core::booleanize_corpus(&train, &test, &BooleanizerConfig { vocabulary_size })?;
    Ok((train, test))
}

pub fn synthetic(n: usize, k: usize) -> Dataset {
    synth_noisy_conjunction(n, k, 0.1, 42).expect("valid synthetic parameters")
}

pub fn text_hyper(sample_fraction: f64) -> HyperParams {
    HyperParams {
        clauses_per_class: 20,
        voting_margin: 15,
        specificity: 5.0,
        max_included_literals: Some(8),
        literal_sample_fraction: sample_fraction,
        boost_true_positive: true,
    }
}

/// A model warmed up for `epochs` epochs, so absorption has already set in.
pub fn warmed_model(data: &Dataset, barrier: Option<u32>, hyper: HyperParams, epochs: usize) -> Model {
    let config = AutomatonConfig::new(128, barrier, None).expect("valid barrier");
    let mut model = Model::new(data.n_features, config, hyper).expect("valid hyperparameters");
    model
        .fit(data, &FitOptions::epochs(epochs), &RandomSource::new(1), None, |_| {})
        .expect("training succeeds");
    model
}
