//! Barrier and subsampling sweeps with per-epoch CSV output.
//!
//! CSV columns:
//!
//! ```text
//! epoch,barrier,sample_fraction,train_wall_time_s,test_accuracy,absorbed_exclude,absorbed_include,live_ta,ta_updates
//! ```
//!
//! `barrier` is `0` when absent. `test_accuracy` is empty without a test set.
//! After each cell's epoch rows comes one row with `epoch` set to
//! `mean_last_<n>` holding column means over the last `n = min(25, epochs)`
//! epochs.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::automata::AutomatonConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learner::{FitOptions, HyperParams, Model};
use crate::metrics::EpochMetrics;
use crate::rng::RandomSource;

pub const CSV_HEADER: &str =
    "epoch,barrier,sample_fraction,train_wall_time_s,test_accuracy,absorbed_exclude,absorbed_include,live_ta,ta_updates";

pub const SUMMARY_WINDOW: usize = 25;

pub fn write_csv_header(w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")
}

/// One epoch row. `barrier` 0 means absent.
pub fn write_epoch_row(w: &mut impl Write, barrier: u32, fraction: f64, m: &EpochMetrics) -> io::Result<()> {
    let acc = m.test_accuracy.map(|a| a.to_string()).unwrap_or_default();
    writeln!(
        w,
        "{},{barrier},{fraction},{:.6},{acc},{},{},{},{}",
        m.epoch, m.train_wall_time, m.absorbed_exclude_total, m.absorbed_include_total, m.live_ta_count, m.ta_update_events
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Exclude barriers; 0 means no barrier.
    pub barriers: Vec<u32>,
    pub sample_fractions: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
    pub states_per_action: u32,
    pub include_barrier: Option<u32>,
    /// `literal_sample_fraction` is overridden per cell.
    pub hyper: HyperParams,
    pub shuffle: bool,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            barriers: vec![0],
            sample_fractions: vec![1.0],
            epochs: 50,
            seed: 42,
            states_per_action: 128,
            include_barrier: None,
            hyper: HyperParams::default(),
            shuffle: false,
            train: None,
            test: None,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    value
        .trim_matches(|c| c == '[' || c == ']' || c == '{' || c == '}')
        .split(',')
        .map(|v| v.trim().parse().ok())
        .collect()
}

impl SweepSpec {
    /// Parses `key = value` lines. `#` starts a comment. Lists are comma
    /// separated. Unknown keys are errors. Relative `train`/`test` paths
    /// are resolved against `origin`'s directory.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let base = origin.parent().unwrap_or(Path::new(""));
        let mut spec = SweepSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, found {line:?}")))?;
            let bad = || err(format!("bad value for {key}: {value:?}"));
            fn one<T: std::str::FromStr>(v: &str) -> Option<T> {
                v.parse().ok()
            }
            fn optional<T: std::str::FromStr>(v: &str) -> Option<Option<T>> {
                if v == "none" || v == "absent" {
                    Some(None)
                } else {
                    v.parse().ok().map(Some)
                }
            }
            match key {
                "barriers" => spec.barriers = parse_list(value).ok_or_else(bad)?,
                "fractions" | "sample_fractions" => spec.sample_fractions = parse_list(value).ok_or_else(bad)?,
                "epochs" => spec.epochs = one(value).ok_or_else(bad)?,
                "seed" => spec.seed = one(value).ok_or_else(bad)?,
                "states" => spec.states_per_action = one(value).ok_or_else(bad)?,
                "include_barrier" => spec.include_barrier = optional(value).ok_or_else(bad)?,
                "clauses" => spec.hyper.clauses_per_class = one(value).ok_or_else(bad)?,
                "threshold" => spec.hyper.voting_margin = one(value).ok_or_else(bad)?,
                "specificity" => spec.hyper.specificity = one(value).ok_or_else(bad)?,
                "budget" => spec.hyper.max_included_literals = optional(value).ok_or_else(bad)?,
                "boost" => spec.hyper.boost_true_positive = one(value).ok_or_else(bad)?,
                "shuffle" => spec.shuffle = one(value).ok_or_else(bad)?,
                "train" => spec.train = Some(base.join(value)),
                "test" => spec.test = Some(base.join(value)),
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path)?, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.barriers.is_empty() || self.sample_fractions.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one barrier and one sample fraction".into()));
        }
        for &b in &self.barriers {
            self.automaton_config(b)?;
        }
        for &f in &self.sample_fractions {
            self.cell_hyper(f).validate()?;
        }
        Ok(())
    }

    pub fn automaton_config(&self, barrier: u32) -> Result<AutomatonConfig> {
        AutomatonConfig::new(self.states_per_action, (barrier > 0).then_some(barrier), self.include_barrier)
    }

    fn cell_hyper(&self, fraction: f64) -> HyperParams {
        HyperParams {
            literal_sample_fraction: fraction,
            ..self.hyper
        }
    }

    /// Cells in output order: barrier-major, then fraction.
    pub fn cells(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.barriers
            .iter()
            .flat_map(move |&b| self.sample_fractions.iter().map(move |&f| (b, f)))
    }
}

/// Means over the last `window` epochs of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub window: usize,
    pub train_wall_time: f64,
    /// `None` without a test set.
    pub test_accuracy: Option<f64>,
    pub absorbed_exclude: f64,
    pub absorbed_include: f64,
    pub live_ta: f64,
    pub ta_updates: f64,
}

impl CellSummary {
    /// `None` for an empty history.
    pub fn of(history: &[EpochMetrics]) -> Option<Self> {
        let window = history.len().min(SUMMARY_WINDOW);
        if window == 0 {
            return None;
        }
        let tail = &history[history.len() - window..];
        let mean = |f: &dyn Fn(&EpochMetrics) -> f64| tail.iter().map(f).sum::<f64>() / window as f64;
        let test_accuracy = tail
            .iter()
            .map(|m| m.test_accuracy)
            .sum::<Option<f64>>()
            .map(|s| s / window as f64);
        Some(Self {
            window,
            train_wall_time: mean(&|m| m.train_wall_time),
            test_accuracy,
            absorbed_exclude: mean(&|m| m.absorbed_exclude_total as f64),
            absorbed_include: mean(&|m| m.absorbed_include_total as f64),
            live_ta: mean(&|m| m.live_ta_count as f64),
            ta_updates: mean(&|m| m.ta_update_events as f64),
        })
    }

    pub fn write_row(&self, w: &mut impl Write, barrier: u32, fraction: f64) -> io::Result<()> {
        let acc = self.test_accuracy.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            w,
            "mean_last_{},{barrier},{fraction},{:.6},{acc},{},{},{},{}",
            self.window, self.train_wall_time, self.absorbed_exclude, self.absorbed_include, self.live_ta, self.ta_updates
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub barrier: u32,
    pub sample_fraction: f64,
    pub history: Vec<EpochMetrics>,
    pub summary: CellSummary,
    pub absorption_rate: f64,
    pub total_ta_updates: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub cells: Vec<CellReport>,
}

impl SweepReport {
    pub fn cell(&self, barrier: u32, fraction: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.barrier == barrier && c.sample_fraction == fraction)
    }
}

/// Trains a fresh model per cell, in spec order, writing the CSV to `out`.
pub fn run_sweep_to(spec: &SweepSpec, train: &Dataset, test: Option<&Dataset>, out: &mut impl Write) -> Result<SweepReport> {
    spec.validate()?;
    if let Some(t) = test {
        if t.n_features != train.n_features {
            return Err(Error::FeatureWidth {
                expected: train.n_features,
                found: t.n_features,
            });
        }
    }
    if spec.epochs == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one epoch".into()));
    }
    write_csv_header(out)?;
    let rng = RandomSource::new(spec.seed);
    let options = FitOptions {
        epochs: spec.epochs,
        shuffle: spec.shuffle,
    };
    let mut report = SweepReport::default();
    for (barrier, fraction) in spec.cells() {
        let mut model = Model::new(train.n_features, spec.automaton_config(barrier)?, spec.cell_hyper(fraction))?;
        let history = model.fit(train, &options, &rng, test, |_| {})?;
        for m in &history {
            write_epoch_row(out, barrier, fraction, m)?;
        }
        let summary = CellSummary::of(&history).expect("at least one epoch");
        summary.write_row(out, barrier, fraction)?;
        report.cells.push(CellReport {
            barrier,
            sample_fraction: fraction,
            total_ta_updates: history.iter().map(|m| m.ta_update_events).sum(),
            history,
            summary,
            absorption_rate: model.absorption_rate(),
        });
    }
    out.flush()?;
    Ok(report)
}

/// [`run_sweep_to`] writing to a file.
pub fn run_sweep(spec: &SweepSpec, train: &Dataset, test: Option<&Dataset>, out_path: impl AsRef<Path>) -> Result<SweepReport> {
    let mut out = io::BufWriter::new(fs::File::create(out_path)?);
    run_sweep_to(spec, train, test, &mut out)
}
