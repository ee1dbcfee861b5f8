//! Versioned, line-oriented model files.
//!
//! ```text
//! CTM v1
//! features 4
//! automaton states_per_action=128 exclude_barrier=100 include_barrier=none
//! hyper clauses=2 threshold=3 specificity=2.5 budget=none sample_fraction=1 boost=false
//! counters initial_live=16 absorbed_exclude=3 absorbed_include=0
//! class 0
//! clause +
//! P: 2
//! I: (1,130)
//! E: (0,127) (5,101)
//! clause -
//! ...
//! ```
//!
//! List order is preserved exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::automata::AutomatonConfig;
use crate::clause::{Entry, Polarity, SparseClause};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::learner::{ClassBank, HyperParams, Model};

pub const MAGIC: &str = "CTM";
pub const VERSION: &str = "v1";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// Renders a model in the `CTM v1` format.
pub fn model_to_string(model: &Model) -> String {
    let cfg = model.automaton_config();
    let h = model.hyper();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "features {}", model.n_features());
    let _ = writeln!(
        out,
        "automaton states_per_action={} exclude_barrier={} include_barrier={}",
        cfg.n_states_per_action(),
        opt(cfg.exclude_barrier()),
        opt(cfg.include_barrier())
    );
    let _ = writeln!(
        out,
        "hyper clauses={} threshold={} specificity={} budget={} sample_fraction={} boost={}",
        h.clauses_per_class,
        h.voting_margin,
        h.specificity,
        opt(h.max_included_literals),
        h.literal_sample_fraction,
        h.boost_true_positive
    );
    let _ = writeln!(
        out,
        "counters initial_live={} absorbed_exclude={} absorbed_include={}",
        model.initial_live_count(),
        model.absorbed_exclude_total(),
        model.absorbed_include_total()
    );
    for (label, bank) in model.classes() {
        let _ = writeln!(out, "class {label}");
        for clause in bank.clauses() {
            let _ = writeln!(out, "clause {}", clause.polarity());
            out.push_str("P:");
            for l in clause.permanent() {
                let _ = write!(out, " {l}");
            }
            out.push_str("\nI:");
            for e in clause.included() {
                let _ = write!(out, " ({},{})", e.literal, e.state);
            }
            out.push_str("\nE:");
            for e in clause.excluded() {
                let _ = write!(out, " ({},{})", e.literal, e.state);
            }
            out.push('\n');
        }
    }
    out
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    parse_model(&fs::read_to_string(path)?, path)
}

struct Lines<'a> {
    origin: &'a Path,
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => Ok((i + 1, l)),
            None => Err(self.err(0, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| *l)
    }

    /// Parses `keyword k1=v1 k2=v2 ...`, requiring exactly the given keys in
    /// order.
    fn record(&mut self, keyword: &str, keys: &[&str]) -> Result<(usize, Vec<&'a str>)> {
        let (n, line) = self.next(keyword)?;
        let mut parts = line.split_ascii_whitespace();
        if parts.next() != Some(keyword) {
            return Err(self.err(n, format!("expected `{keyword}` line")));
        }
        let mut values = Vec::with_capacity(keys.len());
        for key in keys {
            let part = parts.next().ok_or_else(|| self.err(n, format!("missing `{key}`")))?;
            let value = part
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| self.err(n, format!("expected `{key}=`, found {part:?}")))?;
            values.push(value);
        }
        if parts.next().is_some() {
            return Err(self.err(n, "trailing fields"));
        }
        Ok((n, values))
    }
}

fn num<T: FromStr>(lines: &Lines<'_>, n: usize, v: &str) -> Result<T> {
    v.parse().map_err(|_| lines.err(n, format!("bad number {v:?}")))
}

fn opt_num<T: FromStr>(lines: &Lines<'_>, n: usize, v: &str) -> Result<Option<T>> {
    if v == "none" {
        Ok(None)
    } else {
        num(lines, n, v).map(Some)
    }
}

fn parse_entries(lines: &Lines<'_>, n: usize, body: &str) -> Result<Vec<Entry>> {
    body.split_ascii_whitespace()
        .map(|tok| {
            let inner = tok
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| lines.err(n, format!("expected (id,state), found {tok:?}")))?;
            let (l, s) = inner
                .split_once(',')
                .ok_or_else(|| lines.err(n, format!("expected (id,state), found {tok:?}")))?;
            Ok(Entry::new(num(lines, n, l)?, num(lines, n, s)?))
        })
        .collect()
}

/// Parses the `CTM v1` format; `origin` only labels error messages.
pub fn parse_model(text: &str, origin: impl AsRef<Path>) -> Result<Model> {
    let mut lines = Lines {
        origin: origin.as_ref(),
        inner: text.lines().enumerate().peekable(),
    };
    let (n, header) = lines.next("header")?;
    let mut head = header.split_ascii_whitespace();
    if head.next() != Some(MAGIC) {
        return Err(lines.err(n, "not a model file: missing `CTM` header"));
    }
    let version = head.next().unwrap_or_default();
    if version != VERSION || head.next().is_some() {
        return Err(Error::ModelVersion(header.trim_start_matches(MAGIC).trim().to_string()));
    }

    let (n, line) = lines.next("features")?;
    let n_features: usize = match line.split_once(' ') {
        Some(("features", v)) => num(&lines, n, v.trim())?,
        _ => return Err(lines.err(n, "expected `features <K>`")),
    };

    let (n, v) = lines.record("automaton", &["states_per_action", "exclude_barrier", "include_barrier"])?;
    let config = AutomatonConfig::new(num(&lines, n, v[0])?, opt_num(&lines, n, v[1])?, opt_num(&lines, n, v[2])?)
        .map_err(|e| lines.err(n, e.to_string()))?;

    let (n, v) = lines.record(
        "hyper",
        &["clauses", "threshold", "specificity", "budget", "sample_fraction", "boost"],
    )?;
    let hyper = HyperParams {
        clauses_per_class: num(&lines, n, v[0])?,
        voting_margin: num(&lines, n, v[1])?,
        specificity: num(&lines, n, v[2])?,
        max_included_literals: opt_num(&lines, n, v[3])?,
        literal_sample_fraction: num(&lines, n, v[4])?,
        boost_true_positive: num(&lines, n, v[5])?,
    };
    hyper.validate().map_err(|e| lines.err(n, e.to_string()))?;

    let (n, v) = lines.record("counters", &["initial_live", "absorbed_exclude", "absorbed_include"])?;
    let (initial, abs_ex, abs_in): (u64, u64, u64) = (num(&lines, n, v[0])?, num(&lines, n, v[1])?, num(&lines, n, v[2])?);

    let mut banks = Vec::new();
    while lines.peek().is_some() {
        let (n, line) = lines.next("class")?;
        if line.trim().is_empty() {
            continue;
        }
        let label: Label = match line.split_once(' ') {
            Some(("class", v)) => num(&lines, n, v.trim())?,
            _ => return Err(lines.err(n, format!("expected `class <label>`, found {line:?}"))),
        };
        let mut clauses = Vec::with_capacity(hyper.clauses_per_class);
        for _ in 0..hyper.clauses_per_class {
            let (n, line) = lines.next("clause")?;
            let polarity = match line.trim() {
                "clause +" => Polarity::Positive,
                "clause -" => Polarity::Negative,
                other => return Err(lines.err(n, format!("expected `clause +` or `clause -`, found {other:?}"))),
            };
            let (n, p) = lines.next("P:")?;
            let body = p.strip_prefix("P:").ok_or_else(|| lines.err(n, "expected `P:` line"))?;
            let permanent = body
                .split_ascii_whitespace()
                .map(|t| num(&lines, n, t))
                .collect::<Result<Vec<u32>>>()?;
            let (n, i) = lines.next("I:")?;
            let body = i.strip_prefix("I:").ok_or_else(|| lines.err(n, "expected `I:` line"))?;
            let included = parse_entries(&lines, n, body)?;
            let (n, e) = lines.next("E:")?;
            let body = e.strip_prefix("E:").ok_or_else(|| lines.err(n, "expected `E:` line"))?;
            let excluded = parse_entries(&lines, n, body)?;
            let clause = SparseClause::from_parts(polarity, n_features, excluded, included, permanent, &config)
                .map_err(|e| lines.err(n, e.to_string()))?;
            clauses.push(clause);
        }
        banks.push(ClassBank::from_clauses(label, clauses).map_err(|e| lines.err(n, e.to_string()))?);
    }
    Model::from_parts(n_features, config, hyper, banks, initial, abs_ex, abs_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_noisy_conjunction;
    use crate::learner::FitOptions;
    use crate::rng::RandomSource;

    fn trained(barrier: u32, include: Option<u32>) -> Model {
        let cfg = AutomatonConfig::new(128, (barrier > 0).then_some(barrier), include).unwrap();
        let h = HyperParams {
            clauses_per_class: 6,
            voting_margin: 4,
            specificity: 2.7,
            max_included_literals: Some(5),
            literal_sample_fraction: 0.8,
            boost_true_positive: true,
        };
        let mut m = Model::new(7, cfg, h).unwrap();
        let data = synth_noisy_conjunction(150, 7, 0.1, 5).unwrap();
        m.fit(&data, &FitOptions::epochs(3), &RandomSource::new(5), None, |_| {}).unwrap();
        m
    }

    #[test]
    fn round_trip_is_structural_identity() {
        for (b, inc) in [(0, None), (100, Some(140)), (125, None)] {
            let m = trained(b, inc);
            let text = model_to_string(&m);
            let back = parse_model(&text, "m").unwrap();
            assert_eq!(back, m);
            assert_eq!(model_to_string(&back), text);
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text = model_to_string(&trained(0, None)).replacen("CTM v1", "CTM v9", 1);
        assert!(matches!(parse_model(&text, "m"), Err(Error::ModelVersion(v)) if v == "v9"));
        assert!(matches!(parse_model("XYZ v1\n", "m"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let good = model_to_string(&trained(100, None));
        let truncated: String = good.lines().take(good.lines().count() - 2).collect::<Vec<_>>().join("\n");
        assert!(parse_model(&truncated, "m").is_err());
        assert!(parse_model(&good.replacen("E: (", "E: [", 1), "m").is_err());
        assert!(parse_model(&good.replacen("threshold=4", "threshold=x", 1), "m").is_err());
        assert!(parse_model(&good.replacen("initial_live=", "initial_live=1", 1), "m").is_err());
        assert!(parse_model(&good.replacen("clause -", "clause +", 1), "m").is_err());
        assert!(parse_model("", "m").is_err());
    }

    #[test]
    fn golden_rendering() {
        let cfg = AutomatonConfig::new(128, Some(100), None).unwrap();
        let h = HyperParams {
            clauses_per_class: 2,
            voting_margin: 3,
            specificity: 2.5,
            ..HyperParams::default()
        };
        let pos = SparseClause::from_parts(Polarity::Positive, 2, vec![Entry::new(0, 127), Entry::new(3, 101)], vec![Entry::new(1, 130)], vec![2], &cfg).unwrap();
        let neg = SparseClause::from_parts(Polarity::Negative, 2, vec![], vec![], vec![], &cfg).unwrap();
        let bank = ClassBank::from_clauses(0, vec![pos, neg]).unwrap();
        let m = Model::from_parts(2, cfg, h, vec![bank], 8, 4, 1).unwrap();
        let want = "CTM v1\n\
features 2\n\
automaton states_per_action=128 exclude_barrier=100 include_barrier=none\n\
hyper clauses=2 threshold=3 specificity=2.5 budget=none sample_fraction=1 boost=false\n\
counters initial_live=8 absorbed_exclude=4 absorbed_include=1\n\
class 0\n\
clause +\n\
P: 2\n\
I: (1,130)\n\
E: (0,127) (3,101)\n\
clause -\n\
P:\n\
I:\n\
E:\n";
        assert_eq!(model_to_string(&m), want);
        assert_eq!(parse_model(want, "g").unwrap(), m);
    }

    #[test]
    fn save_and_load_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ctm");
        let m = trained(50, None);
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }
}
