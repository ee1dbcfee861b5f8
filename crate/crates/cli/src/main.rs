use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctm_core::{
    data::bundled, explain_model, load_model, parse_labeled_texts, relative_activity, run_sweep, save_model,
    sweep::{write_csv_header, write_epoch_row, CellSummary},
    synth_noisy_conjunction, AutomatonConfig, BooleanizerConfig, Dataset, EpochMetrics, FitOptions, HyperParams,
    Model, PowerModel, RandomSource, SweepSpec,
};

#[derive(Parser)]
#[command(name = "ctm", version, about = "Contracting Tsetlin Machine trainer and benchmark driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and optionally write it and per-epoch metrics.
    Train(TrainArgs),
    /// Report a saved model's accuracy on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run a barrier x sample-fraction sweep described by a key = value file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        /// Overrides `train` from the spec.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Overrides `test` from the spec.
        #[arg(long)]
        test: Option<PathBuf>,
        #[command(flatten)]
        power: PowerArgs,
    },
    /// Turn `label<TAB>text` files into boolean bag-of-words datasets.
    Booleanize {
        #[arg(long, required_unless_present = "bundled")]
        train_texts: Option<PathBuf>,
        #[arg(long, required_unless_present = "bundled")]
        test_texts: Option<PathBuf>,
        /// Use the corpus shipped with the library.
        #[arg(long, conflicts_with_all = ["train_texts", "test_texts"])]
        bundled: bool,
        #[arg(long, default_value_t = 2000)]
        vocab_size: usize,
        /// Output directory for train.txt, test.txt and vocab.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print every clause as a readable conjunction.
    Explain {
        #[arg(long)]
        model: PathBuf,
        /// Dataset whose `#feature` directives supply feature names.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Generate a synthetic dataset.
    Synth {
        #[arg(long, value_enum, default_value_t = SynthKind::NoisyConjunction)]
        kind: SynthKind,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    NoisyConjunction,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Clauses per class (even).
    #[arg(long, default_value_t = 20)]
    clauses: usize,
    /// Voting margin T.
    #[arg(long, default_value_t = 10)]
    threshold: u32,
    #[arg(long, default_value_t = 3.9)]
    specificity: f64,
    /// Exclude barrier state; 0 means no barrier.
    #[arg(long, default_value_t = 0)]
    barrier: u32,
    #[arg(long)]
    include_barrier: Option<u32>,
    /// Maximum included literals per clause.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    sample_fraction: f64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// States per action N.
    #[arg(long, default_value_t = 128)]
    states: u32,
    /// Always reinforce true literals of firing clauses.
    #[arg(long)]
    boost: bool,
    /// Visit samples in a seeded random order each epoch.
    #[arg(long)]
    shuffle: bool,
    #[arg(long)]
    out_model: Option<PathBuf>,
    #[arg(long)]
    metrics_csv: Option<PathBuf>,
    #[command(flatten)]
    power: PowerArgs,
}

/// Circuit constants for an absolute dynamic-power estimate. All three are
/// required together.
#[derive(Args)]
struct PowerArgs {
    /// Switched capacitance in farads.
    #[arg(long, requires_all = ["supply_voltage", "frequency"])]
    capacitance: Option<f64>,
    /// Supply voltage in volts.
    #[arg(long, requires_all = ["capacitance", "frequency"])]
    supply_voltage: Option<f64>,
    /// Clock frequency in hertz.
    #[arg(long, requires_all = ["capacitance", "supply_voltage"])]
    frequency: Option<f64>,
}

impl PowerArgs {
    fn model(&self) -> Option<PowerModel> {
        Some(PowerModel {
            capacitance: self.capacitance?,
            supply_voltage: self.supply_voltage?,
            frequency: self.frequency?,
        })
    }
}

/// Updates per automaton per sample, over the run.
fn activity_factor(updates: u64, automata: u64, samples: usize, epochs: usize) -> f64 {
    let cycles = automata as f64 * samples as f64 * epochs as f64;
    if cycles == 0.0 {
        0.0
    } else {
        updates as f64 / cycles
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::load(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn train(args: TrainArgs) -> Result<()> {
    let train = load_dataset(&args.data)?;
    let test = args.test.as_deref().map(load_dataset).transpose()?;
    let config = AutomatonConfig::new(args.states, (args.barrier > 0).then_some(args.barrier), args.include_barrier)?;
    let hyper = HyperParams {
        clauses_per_class: args.clauses,
        voting_margin: args.threshold,
        specificity: args.specificity,
        max_included_literals: args.budget,
        literal_sample_fraction: args.sample_fraction,
        boost_true_positive: args.boost,
    };
    let mut model = Model::new(train.n_features, config, hyper)?;
    let mut csv = match &args.metrics_csv {
        Some(p) => {
            let mut w = BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?);
            write_csv_header(&mut w)?;
            Some(w)
        }
        None => None,
    };
    let options = FitOptions {
        epochs: args.epochs,
        shuffle: args.shuffle,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut io_error = None;
    let history = model.fit(&train, &options, &RandomSource::new(args.seed), test.as_ref(), |m: &EpochMetrics| {
        let acc = m.test_accuracy.map_or("-".to_string(), |a| format!("{a:.4}"));
        let mut res = writeln!(
            out,
            "epoch {:>3}  time {:.3}s  accuracy {acc}  live {}  updates {}",
            m.epoch, m.train_wall_time, m.live_ta_count, m.ta_update_events
        );
        if let Some(w) = csv.as_mut() {
            res = res.and(write_epoch_row(w, args.barrier, args.sample_fraction, m));
        }
        if let Err(e) = res {
            io_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(e).context("writing metrics");
    }
    if let (Some(w), Some(summary)) = (csv.as_mut(), CellSummary::of(&history)) {
        summary.write_row(w, args.barrier, args.sample_fraction)?;
        w.flush()?;
    }
    if let Some(p) = &args.out_model {
        save_model(&model, p).with_context(|| format!("writing model {}", p.display()))?;
    }
    writeln!(out, "absorption rate {:.4}", model.absorption_rate())?;
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        if let Some(r) = relative_activity(last.ta_update_events, first.ta_update_events) {
            writeln!(out, "activity, last epoch relative to first: {r:.4}")?;
        }
    }
    if let Some(power) = args.power.model() {
        let updates = history.iter().map(|m| m.ta_update_events).sum();
        let alpha = activity_factor(updates, model.initial_live_count(), train.len(), history.len());
        writeln!(out, "activity factor {alpha:.6}, estimated dynamic power {:.6e} W", power.dynamic_power(alpha))?;
    }
    Ok(())
}

fn eval(model: &Path, data: &Path) -> Result<()> {
    let model = load_model(model).with_context(|| format!("loading model {}", model.display()))?;
    let data = load_dataset(data)?;
    println!("accuracy {:.4} on {} samples", model.accuracy(&data)?, data.len());
    Ok(())
}

fn sweep(spec_path: &Path, out_csv: &Path, data: Option<PathBuf>, test: Option<PathBuf>, power: &PowerArgs) -> Result<()> {
    let mut spec = SweepSpec::load(spec_path).with_context(|| format!("loading sweep spec {}", spec_path.display()))?;
    spec.train = data.or(spec.train);
    spec.test = test.or(spec.test);
    let Some(train_path) = &spec.train else {
        bail!("no training data: set `train` in the spec or pass --data");
    };
    let train = load_dataset(train_path)?;
    let test = spec.test.as_deref().map(load_dataset).transpose()?;
    let report = run_sweep(&spec, &train, test.as_ref(), out_csv)?;
    println!("barrier  fraction  mean_time_s  mean_accuracy  absorption  activity_vs_absent");
    for cell in &report.cells {
        let baseline = report.cell(0, cell.sample_fraction).map(|c| c.total_ta_updates);
        let rel = baseline
            .and_then(|b| relative_activity(cell.total_ta_updates, b))
            .map_or("-".to_string(), |r| format!("{r:.4}"));
        let acc = cell.summary.test_accuracy.map_or("-".to_string(), |a| format!("{a:.4}"));
        let barrier = if cell.barrier == 0 { "absent".to_string() } else { cell.barrier.to_string() };
        print!(
            "{barrier:>7}  {:>8}  {:>11.4}  {acc:>13}  {:>10.4}  {rel:>18}",
            cell.sample_fraction, cell.summary.train_wall_time, cell.absorption_rate
        );
        if let Some(p) = power.model() {
            let initial = cell.history.first().map_or(0, |m| m.live_ta_count + m.absorbed_exclude_total + m.absorbed_include_total);
            let alpha = activity_factor(cell.total_ta_updates, initial, train.len(), cell.history.len());
            print!("  {:.6e} W", p.dynamic_power(alpha));
        }
        println!();
    }
    Ok(())
}

fn booleanize(train: Option<PathBuf>, test: Option<PathBuf>, use_bundled: bool, vocab_size: usize, out: &Path) -> Result<()> {
    let (train_docs, test_docs) = if use_bundled {
        bundled::sample_corpus()?
    } else {
        let read = |p: &Path| -> Result<_> {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(parse_labeled_texts(&text, p)?)
        };
        (read(train.as_deref().expect("required by clap"))?, read(test.as_deref().expect("required by clap"))?)
    };
    let cfg = BooleanizerConfig {
        vocabulary_size: vocab_size,
    };
    let (train, test, vocab) = ctm_core::booleanize_corpus(&train_docs, &test_docs, &cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    train.save(out.join("train.txt"))?;
    test.save(out.join("test.txt"))?;
    let mut v = vocab.tokens().join("\n");
    v.push('\n');
    fs::write(out.join("vocab.txt"), v)?;
    println!(
        "{} train and {} test samples, {} features, written to {}",
        train.len(),
        test.len(),
        vocab.len(),
        out.display()
    );
    Ok(())
}

fn explain(model: &Path, data: Option<&Path>) -> Result<()> {
    let model = load_model(model).with_context(|| format!("loading model {}", model.display()))?;
    let names = data.map(load_dataset).transpose()?.map(|d| {
        (0..model.n_features())
            .map(|i| d.feature_name(i).map_or_else(|| format!("f{i}"), str::to_string))
            .collect::<Vec<_>>()
    });
    print!("{}", explain_model(&model, names.as_deref()));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Eval { model, data } => eval(&model, &data),
        Command::Sweep {
            spec,
            out_csv,
            data,
            test,
            power,
        } => sweep(&spec, &out_csv, data, test, &power),
        Command::Booleanize {
            train_texts,
            test_texts,
            bundled,
            vocab_size,
            out,
        } => booleanize(train_texts, test_texts, bundled, vocab_size, &out),
        Command::Explain { model, data } => explain(&model, data.as_deref()),
        Command::Synth {
            kind: SynthKind::NoisyConjunction,
            k,
            n,
            noise,
            seed,
            out,
        } => {
            let data = synth_noisy_conjunction(n, k, noise, seed)?;
            data.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("{} samples with {} features written to {}", data.len(), k, out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
