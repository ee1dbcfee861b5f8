use ctm_core::{
    booleanize_corpus, data::bundled, sweep::CSV_HEADER, BooleanizerConfig, HyperParams, SweepSpec,
};

#[test]
fn barrier_sweep_on_bundled_corpus() {
    let (train, test) = bundled::sample_corpus().unwrap();
    let (train, test, _) = booleanize_corpus(&train, &test, &BooleanizerConfig { vocabulary_size: 2000 }).unwrap();
    let spec = SweepSpec {
        barriers: vec![0, 100],
        sample_fractions: vec![1.0],
        epochs: 6,
        seed: 42,
        hyper: HyperParams {
            clauses_per_class: 20,
            voting_margin: 15,
            specificity: 5.0,
            ..HyperParams::default()
        },
        ..SweepSpec::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let report = ctm_core::run_sweep(&spec, &train, Some(&test), &path).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + 2 * (6 + 1));

    let (absent, b100) = (report.cell(0, 1.0).unwrap(), report.cell(100, 1.0).unwrap());
    assert!(b100.summary.train_wall_time < absent.summary.train_wall_time);
    assert!(b100.total_ta_updates < absent.total_ta_updates);
    assert!(absent.history.iter().all(|m| m.absorbed_exclude_total == 0 && m.absorbed_include_total == 0));
    assert!(b100.absorption_rate > 0.0);
}
