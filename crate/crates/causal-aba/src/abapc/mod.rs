//! Fact-dropping causal discovery: weight, solve, relax, score, select.
//!
//! [`run_abapc`] turns a weighted [`FactSet`] into a single DAG. The facts
//! are sorted ascending by strength and handed to the solver as hard
//! constraints; while no model exists, the weakest remaining fact is
//! dropped and the solve repeats. Statistical errors thus get sacrificed
//! cheapest-first until the surviving facts are mutually consistent.
//! Every surviving model is then scored against the *full* input fact set
//! ([`score_model`]) and the best-scoring model is returned, ties broken
//! by lexicographically smallest edge list.

use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use crate::facts::{CiFact, FactKind, FactSet};
use crate::graph::Dag;
use crate::solver::{causalaba, ModelSet, Outcome, SolveMode, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum AbapcError {
    #[error("discovery needs at least one fact")]
    NoFacts,
    #[error("time budget exhausted after {} solver calls", partial.iterations)]
    Budget {
        /// Everything decided before the clock ran out; `models`, `scores`
        /// and `selected` reflect the last completed solve, if any.
        partial: Box<PartialRun>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// The drop-loop state carried by a budget failure.
#[derive(Debug, Clone)]
pub struct PartialRun {
    pub dropped: Vec<CiFact>,
    pub iterations: usize,
    pub iteration_log: Vec<IterationRecord>,
}

/// Knobs for one discovery run. The solver mode is managed by the
/// algorithm itself — hard constraints in the drop loop, and a soft
/// (weight-maximizing) re-run only if a hard solve overflows the model
/// cap — so `solver.mode` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AbapcConfig {
    pub solver: SolverConfig,
    /// Score satisfied dependence facts as `+S` instead of the literal
    /// always-`−S` rule. Off by default.
    pub symmetric_scoring: bool,
}

impl Default for AbapcConfig {
    fn default() -> Self {
        AbapcConfig { solver: SolverConfig::default(), symmetric_scoring: false }
    }
}

/// One solver call in the drop loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    /// Facts still kept when this call ran.
    pub kept: usize,
    pub outcome: Outcome,
    pub model_count: usize,
}

/// A full discovery run: inputs, the drop trail, the surviving models
/// with their scores, and the selected DAG.
#[derive(Debug, Clone)]
pub struct AbapcRun {
    /// The complete input fact set (scoring always uses all of it).
    pub input: FactSet,
    /// The satisfiable subset that produced the final model set.
    pub kept: FactSet,
    /// Dropped facts in drop order (weakest first).
    pub dropped: Vec<CiFact>,
    /// Solver calls made by the drop loop.
    pub iterations: usize,
    pub iteration_log: Vec<IterationRecord>,
    /// Whether the model-cap overflow forced the soft re-run.
    pub used_soft_fallback: bool,
    pub models: ModelSet,
    /// Per-model score against the full input, aligned with
    /// `models.models`.
    pub scores: Vec<f64>,
    pub selected: Dag,
}

impl AbapcRun {
    /// Canonical JSON log: inputs, drops, per-iteration outcomes, scored
    /// models, and the selected graph. Wall-clock fields are excluded so
    /// identical runs serialize byte-for-byte identically.
    pub fn to_json(&self) -> String {
        let fact = |f: &CiFact| {
            json!({
                "kind": f.kind().to_string(),
                "x": f.x(),
                "y": f.y(),
                "z": f.z().iter().copied().collect::<Vec<_>>(),
                "p": f.p(),
                "strength": f.strength(),
            })
        };
        let edges = |g: &Dag| g.edges().to_vec();
        let value = json!({
            "d": self.input.d(),
            "input": self.input.iter().map(fact).collect::<Vec<_>>(),
            "dropped": self.dropped.iter().map(fact).collect::<Vec<_>>(),
            "iterations": self.iterations,
            "iteration_log": self
                .iteration_log
                .iter()
                .map(|r| json!({
                    "kept": r.kept,
                    "outcome": r.outcome.to_string(),
                    "models": r.model_count,
                }))
                .collect::<Vec<_>>(),
            "soft_fallback": self.used_soft_fallback,
            "models": self.models.models.iter().map(edges).collect::<Vec<_>>(),
            "scores": self.scores,
            "selected": edges(&self.selected),
        });
        serde_json::to_string_pretty(&value).expect("run log is valid JSON")
    }
}

/// Literal scoring of a candidate DAG against every conditional-
/// independence fact: an independence fact adds its strength when the
/// graph d-separates the pair, otherwise subtracts it; a dependence fact
/// always subtracts (its graph-dependent reward is the symmetric
/// variant's business). Structural arrow/no-edge facts carry no p-value
/// and do not score.
pub fn score_model(g: &Dag, all_facts: &FactSet) -> Result<f64, SolverError> {
    score(g, all_facts, false)
}

/// Symmetric variant: a dependence fact adds its strength when the graph
/// d-connects the pair, instead of always subtracting.
pub fn score_model_symmetric(g: &Dag, all_facts: &FactSet) -> Result<f64, SolverError> {
    score(g, all_facts, true)
}

fn score(g: &Dag, all_facts: &FactSet, symmetric: bool) -> Result<f64, SolverError> {
    if all_facts.d() != g.d() {
        return Err(SolverError::SizeMismatch { facts_d: all_facts.d(), d: g.d() });
    }
    let mut total = 0.0;
    for f in all_facts.iter() {
        let sep = match f.kind() {
            FactKind::Independence | FactKind::Dependence => {
                g.d_separated(f.x(), f.y(), f.z())?
            }
            _ => continue,
        };
        let satisfied = match f.kind() {
            FactKind::Independence => sep,
            _ => !sep,
        };
        total += match (f.kind(), satisfied, symmetric) {
            (FactKind::Independence, true, _) => f.strength(),
            (FactKind::Dependence, true, true) => f.strength(),
            _ => -f.strength(),
        };
    }
    Ok(total)
}

/// Runs the full discovery loop on `facts`.
///
/// The kept set starts as all facts; each iteration solves hard and, on
/// unsatisfiability, drops the lowest-strength fact and retries. Zero
/// facts admit every DAG, so the loop always terminates. If a hard solve
/// overflows the model cap, a soft re-run over the *full* input replaces
/// it: the returned models then maximize total agreement instead of
/// being an arbitrary truncation. The shared time budget spans the whole
/// loop; exhausting it is an error carrying the partial log.
pub fn run_abapc(facts: &FactSet, cfg: &AbapcConfig) -> Result<AbapcRun, AbapcError> {
    if facts.is_empty() {
        return Err(AbapcError::NoFacts);
    }
    let d = facts.d();
    let start = Instant::now();
    let budget = cfg.solver.time_budget;

    let sorted = facts.sorted_by_strength();
    let mut dropped: Vec<CiFact> = Vec::new();
    let mut iteration_log: Vec<IterationRecord> = Vec::new();
    let mut used_soft_fallback = false;

    let solve = |kept: &[CiFact],
                 mode: SolveMode,
                 start: &Instant,
                 log: &mut Vec<IterationRecord>,
                 dropped: &Vec<CiFact>|
     -> Result<ModelSet, AbapcError> {
        let spent = start.elapsed();
        if spent >= budget {
            return Err(AbapcError::Budget {
                partial: Box::new(PartialRun {
                    dropped: dropped.clone(),
                    iterations: log.len(),
                    iteration_log: log.clone(),
                }),
            });
        }
        let mut call_cfg = cfg.solver.clone();
        call_cfg.mode = mode;
        call_cfg.time_budget = budget - spent;
        let mut fs = FactSet::new(d).expect("the input fact set already validated d");
        for f in kept {
            fs.push(f.clone()).expect("kept facts come from a valid fact set");
        }
        let out = causalaba(d, &fs, &call_cfg)?;
        log.push(IterationRecord {
            kept: kept.len(),
            outcome: out.outcome,
            model_count: out.len(),
        });
        if out.outcome == Outcome::Timeout {
            return Err(AbapcError::Budget {
                partial: Box::new(PartialRun {
                    dropped: dropped.clone(),
                    iterations: log.len(),
                    iteration_log: log.clone(),
                }),
            });
        }
        Ok(out)
    };

    // The drop loop: hard solves over ever-smaller suffixes of the
    // ascending-strength order.
    let mut front = 0;
    let mut models = solve(&sorted[front..], SolveMode::Hard, &start, &mut iteration_log, &dropped)?;
    while models.is_empty() {
        dropped.push(sorted[front].clone());
        front += 1;
        models = solve(&sorted[front..], SolveMode::Hard, &start, &mut iteration_log, &dropped)?;
    }

    if models.outcome == Outcome::Capped {
        // Too many consistent graphs to enumerate: let the weights decide.
        // The soft re-run covers the full input, so its optima are the
        // graphs in maximal agreement with everything measured.
        used_soft_fallback = true;
        models = solve(&sorted, SolveMode::Soft, &start, &mut iteration_log, &dropped)?;
    }

    let mut kept = FactSet::new(d).expect("validated above");
    for f in &sorted[front..] {
        kept.push(f.clone()).expect("kept facts come from a valid fact set");
    }

    // Score every surviving model against the complete input.
    let scores: Vec<f64> = models
        .models
        .iter()
        .map(|g| score(g, facts, cfg.symmetric_scoring))
        .collect::<Result<_, _>>()?;
    // Models are canonically sorted, so the first maximum is the
    // lexicographically smallest edge list among ties.
    let best = scores
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.total_cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .expect("the drop loop ends with at least one model");
    let selected = models.models[best].clone();

    Ok(AbapcRun {
        input: facts.clone(),
        kept,
        dropped,
        iterations: iteration_log.len(),
        iteration_log,
        used_soft_fallback,
        models,
        scores,
        selected,
    })
}
