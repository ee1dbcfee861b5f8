//! Drivers shared by the integration and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ctm_core::learner::{type_i_feedback, type_ii_feedback};
use ctm_core::{
    AutomatonConfig, ClauseEvalMode, DenseModel, EffectCounts, HyperParams, Label, ListKind, LiteralId,
    Literals, Model, Polarity, Purpose, RandomSource, SparseClause, State, UpdateEffect,
};

/// Sequential draws from the keyed generator.
pub struct Dice {
    rng: RandomSource,
    counter: u64,
}

impl Dice {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: RandomSource::new(seed),
            counter: 0,
        }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.counter += 1;
        self.rng.index(u64::MAX, self.counter, 0, Purpose::Shuffle, n)
    }

    pub fn unit(&mut self) -> f64 {
        self.counter += 1;
        self.rng.clause_stream(u64::MAX, self.counter, 1, 0).unit(0, Purpose::Shuffle)
    }

    pub fn coin(&mut self) -> bool {
        self.below(2) == 1
    }

    pub fn literals(&mut self, k: usize) -> Literals {
        Literals::from_features(&(0..k).map(|_| self.coin()).collect::<Vec<_>>())
    }
}

/// `(class, clause, literal) -> state` over every live automaton.
pub fn sparse_state_map(model: &Model) -> BTreeMap<(Label, usize, u32), State> {
    let mut map = BTreeMap::new();
    for (&label, bank) in model.classes() {
        for (j, clause) in bank.clauses().iter().enumerate() {
            for e in clause.live_entries() {
                map.insert((label, j, e.literal), e.state);
            }
        }
    }
    map
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OracleRun {
    pub steps: usize,
    pub sparse_effects: EffectCounts,
    pub dense_effects: EffectCounts,
    pub inputs_checked: usize,
}

/// Trains the sparse learner and the dense reference side by side on random
/// binary inputs labelled `(x0 + 2 x1) mod n_classes`, comparing
/// per-step effect counts, final state maps and predictions on every input
/// (when `2^k` is small enough) or on 4096 random inputs.
pub fn oracle_equivalence(k: usize, n_classes: u32, hyper: HyperParams, steps: usize, seed: u64) -> Result<OracleRun, String> {
    let config = AutomatonConfig::default();
    let rng = RandomSource::new(seed);
    let mut sparse = Model::new(k, config, hyper).map_err(|e| e.to_string())?;
    let mut dense = DenseModel::new(k, config, hyper).map_err(|e| e.to_string())?;
    let mut dice = Dice::new(seed ^ 0x5eed);
    let mut run = OracleRun::default();
    for step in 0..steps {
        let x = dice.literals(k);
        let f = x.features();
        let y = (f[0] as u32 + 2 * (k > 1 && f[1]) as u32) % n_classes;
        let a = sparse.train_step(&x, y, 0, step as u64, &rng).map_err(|e| e.to_string())?;
        let b = dense.dense_train_step(&x, y, 0, step as u64, &rng).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("step {step}: sparse metrics {a:?} != dense {b:?}"));
        }
        run.sparse_effects += a.effects;
        run.dense_effects += b.effects;
        run.steps += 1;
    }
    let (sm, dm) = (sparse_state_map(&sparse), dense.state_map());
    if sm != dm {
        let diff = sm.iter().find(|(key, v)| dm.get(key) != Some(v));
        return Err(format!("state maps differ ({} vs {} entries), first: {diff:?}", sm.len(), dm.len()));
    }
    let inputs: Vec<Literals> = if k <= 16 {
        (0..1u32 << k)
            .map(|bits| Literals::from_features(&(0..k).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()))
            .collect()
    } else {
        (0..4096).map(|_| dice.literals(k)).collect()
    };
    for x in &inputs {
        let (p, q) = (sparse.predict(x).map_err(|e| e.to_string())?, dense.predict(x).map_err(|e| e.to_string())?);
        if p != q {
            return Err(format!("prediction differs on {:?}: sparse {p}, dense {q}", x.features()));
        }
    }
    run.inputs_checked = inputs.len();
    Ok(run)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct StructureRun {
    pub ops: usize,
    pub clauses: usize,
    pub absorbed: usize,
}

fn live_set(c: &SparseClause) -> BTreeSet<u32> {
    c.live_entries().map(|e| e.literal).collect()
}

fn all_literals(c: &SparseClause) -> Vec<u32> {
    let mut v: Vec<u32> = c
        .excluded()
        .iter()
        .chain(c.included())
        .map(|e| e.literal)
        .chain(c.permanent().iter().copied())
        .collect();
    v.sort_unstable();
    v
}

fn conjunction(c: &SparseClause, x: &Literals, mode: ClauseEvalMode) -> bool {
    let mut lits = c.included().iter().map(|e| e.literal).chain(c.permanent().iter().copied()).peekable();
    if lits.peek().is_none() {
        return mode == ClauseEvalMode::Training;
    }
    lits.all(|l| x.value(l))
}

fn random_config(dice: &mut Dice) -> AutomatonConfig {
    let n = [4u32, 8, 128][dice.below(3)];
    let ex = match dice.below(3) {
        0 => None,
        _ => Some(dice.below(n as usize - 1) as u32),
    };
    let inc = match dice.below(3) {
        0 => Some(n + 1 + dice.below(n as usize - 1) as u32),
        _ => None,
    };
    AutomatonConfig::new(n, ex, inc).expect("barriers in range")
}

/// Runs `ops` random operations over a sequence of random clauses
/// (`K <= max_k`), checking after every operation:
/// list disjointness and slot consistency, that every literal of the
/// original pool sits in exactly one place or has been discarded
/// (swap-remove never loses or duplicates), that the live set only
/// shrinks, that permanent and discarded literals never come back, and
/// that evaluation depends only on the included and permanent lists.
pub fn structure_invariants(ops: usize, max_k: usize, seed: u64) -> Result<StructureRun, String> {
    let mut dice = Dice::new(seed);
    let mut run = StructureRun::default();
    let hyper_base = HyperParams::default();
    while run.ops < ops {
        let k = 1 + dice.below(max_k);
        let config = random_config(&mut dice);
        let fraction = [1.0, 0.5, 0.1][dice.below(3)];
        let polarity = if dice.coin() { Polarity::Positive } else { Polarity::Negative };
        let stream = RandomSource::new(seed).init_stream(run.clauses as u32, 0);
        let mut clause = SparseClause::new(polarity, k, fraction, &config, &stream).map_err(|e| e.to_string())?;
        run.clauses += 1;
        let pool = all_literals(&clause);
        let mut permanent: BTreeSet<u32> = BTreeSet::new();
        let mut discarded: BTreeSet<u32> = BTreeSet::new();
        let mut live = live_set(&clause);
        let hyper = HyperParams {
            specificity: 1.0 + 4.0 * dice.unit(),
            max_included_literals: dice.coin().then(|| 1 + dice.below(2 * k)),
            boost_true_positive: dice.coin(),
            ..hyper_base
        };
        let budget = 200 + dice.below(800);
        for _ in 0..budget {
            if run.ops >= ops {
                break;
            }
            run.ops += 1;
            let (op_no, clause_no) = (run.ops, run.clauses);
            let ctx = |what: String| format!("op {op_no} (clause {clause_no}, K={k}, {config:?}): {what}");
            let x = dice.literals(k);
            let effects: Vec<UpdateEffect> = match dice.below(10) {
                0 => type_i_feedback(&mut clause, &x, &hyper, &config, &RandomSource::new(seed).clause_stream(0, run.ops as u64, 0, 0)),
                1 => type_ii_feedback(&mut clause, &x, &config),
                op => {
                    let literal = LiteralId(dice.below(2 * k) as u32);
                    let before = clause.location(literal);
                    let state_before = clause.state_of(literal);
                    let result = if op % 2 == 0 {
                        clause.increase_literal(literal, &config)
                    } else {
                        clause.decrease_literal(literal, &config)
                    };
                    match (before, result) {
                        (Some(ListKind::Excluded | ListKind::Included), Ok(effect)) => {
                            let after = clause.location(literal);
                            let expected = match effect {
                                UpdateEffect::StateChanged(s) => after == before && clause.state_of(literal) == Some(s) && state_before != Some(s),
                                UpdateEffect::Saturated => after == before && clause.state_of(literal) == state_before,
                                UpdateEffect::MovedToInclude => before == Some(ListKind::Excluded) && after == Some(ListKind::Included),
                                UpdateEffect::MovedToExclude => before == Some(ListKind::Included) && after == Some(ListKind::Excluded),
                                UpdateEffect::PermanentlyIncluded => after == Some(ListKind::Permanent),
                                UpdateEffect::Discarded => after.is_none(),
                            };
                            if !expected {
                                return Err(ctx(format!("effect {effect:?} for {literal} does not match {before:?} -> {after:?}")));
                            }
                            vec![effect]
                        }
                        (_, Err(_)) if !matches!(before, Some(ListKind::Excluded | ListKind::Included)) => vec![],
                        (b, r) => return Err(ctx(format!("{literal} at {b:?} gave {r:?}"))),
                    }
                }
            };
            clause.validate(&config).map_err(|e| ctx(format!("structure: {e}")))?;
            let now_live = live_set(&clause);
            if !now_live.is_subset(&live) {
                return Err(ctx("live set grew".into()));
            }
            let perm_now: BTreeSet<u32> = clause.permanent().iter().copied().collect();
            if !permanent.is_subset(&perm_now) {
                return Err(ctx("permanent literal left the permanent list".into()));
            }
            for l in live.difference(&now_live) {
                if !perm_now.contains(l) {
                    discarded.insert(*l);
                }
            }
            if discarded.iter().any(|l| clause.location(LiteralId(*l)).is_some()) {
                return Err(ctx("discarded literal came back".into()));
            }
            let mut remaining = all_literals(&clause);
            remaining.extend(discarded.iter().copied());
            remaining.sort_unstable();
            if remaining != pool {
                return Err(ctx("pool multiset changed".into()));
            }
            let absorbed_now = effects
                .iter()
                .filter(|e| matches!(e, UpdateEffect::PermanentlyIncluded | UpdateEffect::Discarded))
                .count();
            if live.len() - now_live.len() != absorbed_now {
                return Err(ctx(format!("{} automata left but {absorbed_now} absorption effects", live.len() - now_live.len())));
            }
            run.absorbed += absorbed_now;
            for mode in [ClauseEvalMode::Training, ClauseEvalMode::Inference] {
                let got = clause.evaluate(&x, mode).map_err(|e| e.to_string())?;
                if got != conjunction(&clause, &x, mode) {
                    return Err(ctx(format!("evaluation in {mode:?} disagrees with the conjunction")));
                }
            }
            if run.ops % 64 == 0 {
                // Rewriting the excluded list must not change any output.
                let mut shuffled: Vec<_> = clause.excluded().to_vec();
                shuffled.reverse();
                for e in &mut shuffled {
                    e.state = (e.state + 1).min(config.n_states_per_action() - 1).max(config.exclude_barrier().map_or(0, |b| b + 1));
                }
                let twin = SparseClause::from_parts(
                    clause.polarity(),
                    k,
                    shuffled,
                    clause.included().to_vec(),
                    clause.permanent().to_vec(),
                    &config,
                )
                .map_err(|e| ctx(e.to_string()))?;
                let empty = SparseClause::from_parts(
                    clause.polarity(),
                    k,
                    vec![],
                    clause.included().to_vec(),
                    clause.permanent().to_vec(),
                    &config,
                )
                .map_err(|e| ctx(e.to_string()))?;
                for _ in 0..8 {
                    let y = dice.literals(k);
                    for mode in [ClauseEvalMode::Training, ClauseEvalMode::Inference] {
                        let want = clause.evaluate(&y, mode).unwrap();
                        if twin.evaluate(&y, mode).unwrap() != want || empty.evaluate(&y, mode).unwrap() != want {
                            return Err(ctx("evaluation depends on the excluded list".into()));
                        }
                    }
                }
            }
            permanent = perm_now;
            live = now_live;
        }
    }
    Ok(run)
}
