//! Graph-comparison metrics for judging an estimated causal graph against
//! a ground-truth one.
//!
//! Four families of measures:
//!
//! - [`shd`] — structural Hamming distance with its extra / missing /
//!   wrongly-oriented breakdown,
//! - [`sid_dag`] / [`sid_cpdag`] / [`sid_cpdag_between`] — structural
//!   intervention distance: the number of ordered node pairs whose
//!   interventional distribution would be mis-estimated when reading
//!   adjustment sets off the estimated graph while the truth generates the
//!   data ([`sid_dag_naive`] is the literal path-enumeration reference kept
//!   as a cross-check oracle),
//! - [`precision_recall_f1`] — orientation precision and recall over edges,
//! - [`MetricsReport`] — the bundle of all of the above plus the normalized
//!   forms (each raw value divided by the true graph's edge count, so the
//!   normalized values may exceed 1 when extra edges are introduced).
//!
//! # Conventions for partially directed graphs
//!
//! Estimated graphs are compared as partially directed graphs (CPDAGs in
//! the intended use). The undirected-edge conventions, pinned by golden
//! tests:
//!
//! - SHD: a shared skeleton edge whose orientation marks differ — directed
//!   one way vs. the other, or directed vs. undirected — counts as one
//!   orientation error.
//! - Precision/recall: a true positive is an estimated **directed** edge
//!   whose direction the truth asserts as well. An undirected estimated
//!   edge is never a true positive (it makes no directional claim), but it
//!   is also not a false positive unless its skeleton edge is absent from
//!   the truth. False negatives are true edges missing from the estimated
//!   skeleton; a mis-oriented shared edge is neither a true positive nor a
//!   false negative.

use std::collections::BTreeSet;

use crate::graph::{Dag, GraphError, Node, Pdag};

/// Default ceiling on Markov-equivalence-class enumeration inside
/// [`sid_cpdag`] and [`sid_cpdag_between`].
pub const DEFAULT_MEC_CAP: usize = 10_000;

/// Errors from metric computations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    /// The two graphs live on different node counts.
    #[error("graphs have different node counts: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    /// An equivalence class had more than `cap` members; the bounds found
    /// over the first `cap` members are reported so callers can degrade
    /// gracefully.
    #[error(
        "equivalence class exceeds {cap} members; bounds over the enumerated \
         members were {partial_low}..{partial_high}"
    )]
    MecCapExceeded {
        cap: usize,
        partial_low: usize,
        partial_high: usize,
    },
    /// A member cap of zero makes best/worst bounds meaningless.
    #[error("equivalence-class member cap must be positive")]
    ZeroCap,
    /// Graph-level failure (e.g. the estimated graph is not extendable).
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn same_d(left: usize, right: usize) -> Result<usize, EvalError> {
    if left == right {
        Ok(left)
    } else {
        Err(EvalError::SizeMismatch { left, right })
    }
}

// ---------------------------------------------------------------------------
// Structural Hamming distance
// ---------------------------------------------------------------------------

/// Structural Hamming distance together with its breakdown. The distance is
/// the number of edge-level mistakes: `shd = extra + missing + reversed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShdBreakdown {
    /// Total distance.
    pub shd: usize,
    /// Skeleton edges present in the estimate but absent from the truth.
    pub extra: usize,
    /// Skeleton edges present in the truth but absent from the estimate.
    pub missing: usize,
    /// Shared skeleton edges whose orientation marks disagree (reversed
    /// direction, or directed vs. undirected).
    pub reversed: usize,
}

/// Orientation mark of the pair `(u, v)` (with `u < v`) in a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Forward,
    Backward,
    Undirected,
}

fn mark(g: &Pdag, u: Node, v: Node) -> Option<Mark> {
    if g.has_directed(u, v) {
        Some(Mark::Forward)
    } else if g.has_directed(v, u) {
        Some(Mark::Backward)
    } else if g.has_undirected(u, v) {
        Some(Mark::Undirected)
    } else {
        None
    }
}

/// Structural Hamming distance between two partially directed graphs:
/// extra skeleton edges + missing skeleton edges + shared edges with
/// conflicting orientation. Swapping the arguments swaps `extra` with
/// `missing` and leaves `reversed` unchanged.
pub fn shd(true_g: &Pdag, est_g: &Pdag) -> Result<ShdBreakdown, EvalError> {
    let d = same_d(true_g.d(), est_g.d())?;
    let (mut extra, mut missing, mut reversed) = (0usize, 0usize, 0usize);
    for u in 0..d {
        for v in u + 1..d {
            match (mark(true_g, u, v), mark(est_g, u, v)) {
                (None, None) => {}
                (None, Some(_)) => extra += 1,
                (Some(_), None) => missing += 1,
                (Some(t), Some(e)) => {
                    if t != e {
                        reversed += 1;
                    }
                }
            }
        }
    }
    Ok(ShdBreakdown {
        shd: extra + missing + reversed,
        extra,
        missing,
        reversed,
    })
}

// ---------------------------------------------------------------------------
// Structural intervention distance
// ---------------------------------------------------------------------------
//
// For each ordered pair (i, j), i ≠ j, the estimate's parent set
// Z = pa_est(i) is used as the adjustment set for the effect of i on j. The
// pair counts as a mistake when Z is not guaranteed to yield the correct
// interventional distribution under the true graph:
//
// - If j ∈ Z, the estimate claims j causes i, predicting a null effect of
//   i on j; that is correct exactly when j is not a true descendant of i.
// - Otherwise Z must be a valid adjustment set for (i, j) in the truth:
//   (a) Z avoids the forbidden set — descendants of any node other than i
//       lying on a proper causal path from i to j — and
//   (b) Z blocks every proper non-causal path between i and j.
//
// `sid_dag` decides (b) with a d-separation query in the proper-backdoor
// graph (the truth minus each edge i→v that starts a causal path to j);
// `sid_dag_naive` walks every simple path literally. Both decide the same
// criterion; only the mechanism differs.

/// Structural intervention distance between two DAGs: the number of ordered
/// node pairs whose parent-adjustment estimate (read off `est_g`) is invalid
/// under `true_g`. Ranges over `0 ..= d·(d−1)`.
pub fn sid_dag(true_g: &Dag, est_g: &Dag) -> Result<usize, EvalError> {
    let d = same_d(true_g.d(), est_g.d())?;
    // reach[v] = v plus everything reachable from v along directed edges.
    let reach: Vec<u64> = (0..d).map(|v| true_g.descendants_mask(v)).collect();
    let mut mistakes = 0usize;
    for i in 0..d {
        let z = est_g.parents_mask(i);
        for j in 0..d {
            if j == i {
                continue;
            }
            let correct = if z & (1 << j) != 0 {
                // Estimate predicts no effect of i on j.
                reach[i] & (1 << j) == 0
            } else {
                adjustment_valid_by_dsep(true_g, &reach, i, j, z)
            };
            if !correct {
                mistakes += 1;
            }
        }
    }
    Ok(mistakes)
}

/// Decides whether `z` is a valid adjustment set for the effect of `i` on
/// `j` in `g`, via the forbidden-set check plus a d-separation query in the
/// proper-backdoor graph. `z` must not contain `i` or `j`.
fn adjustment_valid_by_dsep(g: &Dag, reach: &[u64], i: Node, j: Node, z: u64) -> bool {
    let jbit = 1u64 << j;
    // Forbidden set: descendants (reflexively) of every node w ≠ i that lies
    // on a proper causal path i → … → j, i.e. w reachable from i and j
    // reachable from w.
    let mut forbidden = 0u64;
    for w in 0..g.d() {
        if w != i && reach[i] & (1 << w) != 0 && reach[w] & jbit != 0 {
            forbidden |= reach[w];
        }
    }
    if z & forbidden != 0 {
        return false;
    }
    // Proper-backdoor graph: drop each edge i→v from which j is reachable
    // (the first edge of some proper causal path). What remains carries
    // exactly the proper non-causal paths, so one d-separation query decides
    // whether z blocks them all.
    let kept = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !(u == i && reach[v] & jbit != 0));
    let pbd = Dag::new(g.d(), kept).expect("an edge subset of a DAG stays acyclic");
    pbd.d_separated_mask(i, j, z)
}

/// Reference implementation of [`sid_dag`] that applies the adjustment
/// criterion literally: it enumerates every simple path between the pair,
/// classifies causal vs. non-causal, accumulates the forbidden set from the
/// causal ones, and checks blocking of each non-causal one node by node.
/// Exponential in graph size — intended as a cross-check oracle for small
/// graphs, not for production use.
pub fn sid_dag_naive(true_g: &Dag, est_g: &Dag) -> Result<usize, EvalError> {
    let d = same_d(true_g.d(), est_g.d())?;
    let mut mistakes = 0usize;
    for i in 0..d {
        let z: BTreeSet<Node> = est_g.parents(i).into_iter().collect();
        for j in 0..d {
            if j == i {
                continue;
            }
            let correct = if z.contains(&j) {
                !walk_reach(true_g, i).contains(&j)
            } else {
                adjustment_valid_by_paths(true_g, i, j, &z)
            };
            if !correct {
                mistakes += 1;
            }
        }
    }
    Ok(mistakes)
}

/// `v` plus every node reachable from `v`, found by walking edges one at a
/// time (no bitset shortcuts — this is oracle-side code).
fn walk_reach(g: &Dag, v: Node) -> BTreeSet<Node> {
    let mut seen = BTreeSet::from([v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for c in g.children(u) {
            if seen.insert(c) {
                stack.push(c);
            }
        }
    }
    seen
}

fn path_is_causal(g: &Dag, path: &[Node]) -> bool {
    path.windows(2).all(|w| g.has_edge(w[0], w[1]))
}

/// Whether `z` blocks the path: some interior non-collider lies in `z`, or
/// some interior collider has neither itself nor any descendant in `z`.
fn path_blocked(g: &Dag, path: &[Node], z: &BTreeSet<Node>) -> bool {
    for t in 1..path.len() - 1 {
        let (a, m, b) = (path[t - 1], path[t], path[t + 1]);
        if g.has_edge(a, m) && g.has_edge(b, m) {
            let opened = walk_reach(g, m).iter().any(|w| z.contains(w));
            if !opened {
                return true;
            }
        } else if z.contains(&m) {
            return true;
        }
    }
    false
}

fn adjustment_valid_by_paths(g: &Dag, i: Node, j: Node, z: &BTreeSet<Node>) -> bool {
    let paths = g.enumerate_paths(i, j).expect("nodes are distinct and in range");
    // (a) z must avoid descendants of every non-endpoint node on a causal path.
    let mut forbidden: BTreeSet<Node> = BTreeSet::new();
    for path in &paths {
        if path_is_causal(g, path) {
            for &w in &path[1..] {
                forbidden.extend(walk_reach(g, w));
            }
        }
    }
    if z.iter().any(|w| forbidden.contains(w)) {
        return false;
    }
    // (b) every non-causal path must be blocked.
    paths
        .iter()
        .filter(|path| !path_is_causal(g, path))
        .all(|path| path_blocked(g, path, z))
}

/// Best/worst structural intervention distance of a partially directed
/// estimate against a true DAG: the minimum and maximum of [`sid_dag`] over
/// every member of the estimate's Markov equivalence class. Enumeration is
/// capped at `cap` members; exceeding it errors with the bounds found so
/// far.
pub fn sid_cpdag(true_g: &Dag, est_c: &Pdag, cap: usize) -> Result<(usize, usize), EvalError> {
    if cap == 0 {
        return Err(EvalError::ZeroCap);
    }
    same_d(true_g.d(), est_c.d())?;
    let (members, truncated) = est_c.mec_members_capped(cap)?;
    let (mut low, mut high) = (usize::MAX, 0usize);
    for m in &members {
        let s = sid_dag(true_g, m)?;
        low = low.min(s);
        high = high.max(s);
    }
    if truncated {
        Err(EvalError::MecCapExceeded {
            cap,
            partial_low: low,
            partial_high: high,
        })
    } else {
        Ok((low, high))
    }
}

/// Best/worst structural intervention distance when the truth itself is
/// given as a partially directed graph: bounds are taken over every pairing
/// of a truth-class member with an estimate-class member. Each class
/// enumeration is capped at `cap` members.
pub fn sid_cpdag_between(
    true_c: &Pdag,
    est_c: &Pdag,
    cap: usize,
) -> Result<(usize, usize), EvalError> {
    if cap == 0 {
        return Err(EvalError::ZeroCap);
    }
    same_d(true_c.d(), est_c.d())?;
    let (true_members, t_trunc) = true_c.mec_members_capped(cap)?;
    let (est_members, e_trunc) = est_c.mec_members_capped(cap)?;
    let (mut low, mut high) = (usize::MAX, 0usize);
    for t in &true_members {
        for e in &est_members {
            let s = sid_dag(t, e)?;
            low = low.min(s);
            high = high.max(s);
        }
    }
    if t_trunc || e_trunc {
        Err(EvalError::MecCapExceeded {
            cap,
            partial_low: low,
            partial_high: high,
        })
    } else {
        Ok((low, high))
    }
}

// ---------------------------------------------------------------------------
// Precision / recall / F1
// ---------------------------------------------------------------------------

/// Orientation precision and recall, with the raw counts and definedness
/// flags (a zero denominator yields the value 0 with the flag cleared).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    /// `TP / (TP + FP)`, or 0 when that denominator is 0.
    pub precision: f64,
    /// `TP / (TP + FN)`, or 0 when that denominator is 0.
    pub recall: f64,
    /// Harmonic mean of precision and recall, or 0 when both are 0.
    pub f1: f64,
    /// Estimated directed edges whose direction the truth asserts too.
    pub true_positives: usize,
    /// Estimated skeleton edges absent from the true skeleton.
    pub false_positives: usize,
    /// True skeleton edges absent from the estimated skeleton.
    pub false_negatives: usize,
    /// Whether `TP + FP > 0`.
    pub precision_defined: bool,
    /// Whether `TP + FN > 0`.
    pub recall_defined: bool,
}

/// Orientation precision, recall, and F1 of an estimated partially directed
/// graph against a true one. See the module docs for the undirected-edge
/// conventions.
pub fn precision_recall_f1(true_g: &Pdag, est_g: &Pdag) -> Result<PrecisionRecall, EvalError> {
    same_d(true_g.d(), est_g.d())?;
    let tp = est_g
        .directed()
        .iter()
        .filter(|&&(u, v)| true_g.has_directed(u, v))
        .count();
    let fp = est_g
        .skeleton_pairs()
        .iter()
        .filter(|&&(u, v)| !true_g.adjacent(u, v))
        .count();
    let fn_ = true_g
        .skeleton_pairs()
        .iter()
        .filter(|&&(u, v)| !est_g.adjacent(u, v))
        .count();
    let precision_defined = tp + fp > 0;
    let recall_defined = tp + fn_ > 0;
    let precision = if precision_defined {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if recall_defined {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(PrecisionRecall {
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision_defined,
        recall_defined,
    })
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

/// The full metric bundle for one estimated graph against one true DAG.
/// Normalized values divide the raw ones by the true graph's edge count and
/// may exceed 1 when the estimate introduces extra edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub shd: usize,
    pub nshd: f64,
    pub sid_low: usize,
    pub sid_high: usize,
    pub nsid_low: f64,
    pub nsid_high: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub est_edges: usize,
    pub true_edges: usize,
}

impl MetricsReport {
    /// Computes every metric of an estimated partially directed graph
    /// against a true DAG, the way the benchmark harness consumes them:
    ///
    /// - SHD and precision/recall compare the estimate against the truth's
    ///   CPDAG (so the truth is judged only on what its equivalence class
    ///   determines),
    /// - SID bounds come from [`sid_cpdag`] with the true DAG itself as the
    ///   reference, minimizing/maximizing over the estimate's class members
    ///   (capped at `mec_cap`),
    /// - normalized forms divide by the true DAG's edge count (an edgeless
    ///   truth falls back to a divisor of 1 so the report stays finite).
    pub fn compute(true_g: &Dag, est_c: &Pdag, mec_cap: usize) -> Result<Self, EvalError> {
        let true_c = true_g.to_cpdag();
        let s = shd(&true_c, est_c)?;
        let (sid_low, sid_high) = sid_cpdag(true_g, est_c, mec_cap)?;
        let prf = precision_recall_f1(&true_c, est_c)?;
        let true_edges = true_g.edge_count();
        let norm = if true_edges == 0 { 1.0 } else { true_edges as f64 };
        Ok(MetricsReport {
            shd: s.shd,
            nshd: s.shd as f64 / norm,
            sid_low,
            sid_high,
            nsid_low: sid_low as f64 / norm,
            nsid_high: sid_high as f64 / norm,
            precision: prf.precision,
            recall: prf.recall,
            f1: prf.f1,
            est_edges: est_c.edge_count(),
            true_edges,
        })
    }

    /// One benchmark row in the stable JSON schema consumed by the
    /// evaluation tooling.
    pub fn to_json_row(
        &self,
        dataset: &str,
        seed: u64,
        method: &str,
        elapsed_s: f64,
    ) -> serde_json::Value {
        serde_json::json!({
            "dataset": dataset,
            "seed": seed,
            "method": method,
            "shd": self.shd,
            "nshd": self.nshd,
            "sid_low": self.sid_low,
            "sid_high": self.sid_high,
            "nsid_low": self.nsid_low,
            "nsid_high": self.nsid_high,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "elapsed_s": elapsed_s,
            "est_edges": self.est_edges,
            "true_edges": self.true_edges,
        })
    }
}
