//! Human-readable rule listing.
//!
//! One line per clause:
//!
//! ```text
//! class 0 clause 3 +: NOT f1 (permanent) AND f2
//! class 0 clause 4 -: TRUE (empty)
//! ```
//!
//! Literals are listed in ascending id order. Features are named `f<index>`
//! unless names are supplied.

use std::fmt::Write as _;

use crate::learner::Model;

const PERMANENT_FLAG: &str = " (permanent)";

fn feature_name(feature: usize, names: Option<&[String]>) -> String {
    names
        .and_then(|n| n.get(feature))
        .cloned()
        .unwrap_or_else(|| format!("f{feature}"))
}

/// Renders every clause of every class as a conjunction.
pub fn explain_model(model: &Model, feature_names: Option<&[String]>) -> String {
    let k = model.n_features();
    let mut out = String::new();
    for (label, bank) in model.classes() {
        for (j, clause) in bank.clauses().iter().enumerate() {
            let mut lits: Vec<(u32, bool)> = clause
                .permanent()
                .iter()
                .map(|&l| (l, true))
                .chain(clause.included().iter().map(|e| (e.literal, false)))
                .collect();
            lits.sort_unstable();
            let _ = write!(out, "class {label} clause {j} {}: ", clause.polarity());
            if lits.is_empty() {
                out.push_str("TRUE (empty)");
            }
            for (i, (l, permanent)) in lits.into_iter().enumerate() {
                if i > 0 {
                    out.push_str(" AND ");
                }
                let l = l as usize;
                if l >= k {
                    out.push_str("NOT ");
                }
                out.push_str(&feature_name(l % k, feature_names));
                if permanent {
                    out.push_str(PERMANENT_FLAG);
                }
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::AutomatonConfig;
    use crate::clause::{Entry, Polarity, SparseClause};
    use crate::learner::{ClassBank, HyperParams};

    fn model(clauses: Vec<(u32, Vec<SparseClause>)>) -> Model {
        let cfg = AutomatonConfig::default();
        let h = HyperParams {
            clauses_per_class: 2,
            ..HyperParams::default()
        };
        let banks: Vec<ClassBank> = clauses
            .into_iter()
            .map(|(l, c)| ClassBank::from_clauses(l, c).unwrap())
            .collect();
        let live = banks.iter().map(|b| b.live_count() as u64).sum();
        Model::from_parts(3, cfg, h, banks, live, 0, 0).unwrap()
    }

    #[test]
    fn renders_conjunctions_and_flags() {
        let cfg = AutomatonConfig::default();
        // NOT x1 (permanent) AND x2 (included) over K = 3.
        let pos = SparseClause::from_parts(Polarity::Positive, 3, vec![Entry::new(0, 3)], vec![Entry::new(2, 140)], vec![4], &cfg).unwrap();
        let neg = SparseClause::from_parts(Polarity::Negative, 3, vec![], vec![], vec![], &cfg).unwrap();
        let m = model(vec![(0, vec![pos.clone(), neg.clone()]), (1, vec![pos, neg])]);
        let text = explain_model(&m, None);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "class 0 clause 0 +: f2 AND NOT f1 (permanent)");
        assert_eq!(lines[1], "class 0 clause 1 -: TRUE (empty)");
        assert_eq!(lines[3], "class 1 clause 1 -: TRUE (empty)");

        let names: Vec<String> = ["alpha", "beta", "gamma"].iter().map(|s| s.to_string()).collect();
        let named = explain_model(&m, Some(&names));
        assert!(named.starts_with("class 0 clause 0 +: gamma AND NOT beta (permanent)\n"));
    }
}
