//! Native search over DAG space under (in)dependence constraints.
//!
//! [`causalaba`] enumerates every DAG on `d` nodes consistent with a
//! [`FactSet`](crate::facts::FactSet) — the scalable counterpart of the
//! argumentation route in [`aba`](crate::aba), whose stable extensions
//! project to exactly the same graphs. Instead of grounding rule schemata,
//! the solver runs a depth-first search over per-pair edge states
//! ([`EdgeState`]) with constraint propagation ([`propagate`]) at every
//! node and full d-separation checks ([`check_model`]) at the leaves.
//!
//! Two modes:
//!
//! * **hard** — every fact is a constraint; the result is the complete set
//!   of satisfying DAGs (an empty set means unsatisfiable, not an error);
//! * **soft** — facts become weighted soft constraints and only the DAGs
//!   maximizing the summed strength of satisfied facts are returned. On a
//!   satisfiable fact set this coincides with the hard-mode answer (every
//!   hard model attains the full weight); on a contradictory set it
//!   degrades gracefully to the best-effort optima.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::facts::{CiFact, FactKind, FactSet};
use crate::graph::{check_d, check_node, Dag, GraphError, Node};

/// Default ceiling on the number of models retained by one search.
pub const DEFAULT_MODEL_CAP: usize = 100_000;

/// Bit layout of a pair mask. For the unordered pair `{lo, hi}` with
/// `lo < hi`: `FWD` keeps `lo -> hi` possible, `BWD` keeps `hi -> lo`,
/// `ABS` keeps "no edge".
const FWD: u8 = 0b001;
const BWD: u8 = 0b010;
const ABS: u8 = 0b100;
const ANY: u8 = FWD | BWD | ABS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("the solver needs at least 3 variables, got {0}")]
    TooFewNodes(usize),
    #[error("fact set is over {facts_d} variables but the query is over {d}")]
    SizeMismatch { facts_d: usize, d: usize },
    #[error("bad solver configuration: {0}")]
    BadConfig(&'static str),
    #[error("edge state is not fully decided; pair ({0}, {1}) is open")]
    Undecided(Node, Node),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How facts constrain the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMode {
    /// Facts are inviolable; enumerate every satisfying DAG.
    Hard,
    /// Facts carry weights; return only maximum-weight DAGs.
    Soft,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::Hard => "hard",
            SolveMode::Soft => "soft",
        })
    }
}

impl FromStr for SolveMode {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "hard" => Ok(SolveMode::Hard),
            "soft" => Ok(SolveMode::Soft),
            _ => Err(()),
        }
    }
}

/// Search budgets and mode. `workers` is accepted for interface stability
/// but the search itself is sequential — results are identical for any
/// value, which is exactly the determinism the pipeline relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: SolveMode,
    /// Maximum number of models retained; exceeding it yields
    /// [`Outcome::Capped`].
    pub max_models: usize,
    /// Wall-clock budget; exceeding it yields [`Outcome::Timeout`].
    pub time_budget: Duration,
    /// Worker count (≥ 1). Kept for CLI compatibility; see above.
    pub workers: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolveMode::Hard,
            max_models: DEFAULT_MODEL_CAP,
            time_budget: Duration::from_secs(3600),
            workers: 1,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolverError> {
        if self.max_models == 0 {
            return Err(SolverError::BadConfig("model cap must be at least 1"));
        }
        if self.time_budget.is_zero() {
            return Err(SolverError::BadConfig("time budget must be positive"));
        }
        if self.workers == 0 {
            return Err(SolverError::BadConfig("worker count must be at least 1"));
        }
        Ok(())
    }
}

/// How a search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// The search completed and found at least one model.
    Sat,
    /// The search completed and the constraints admit no model.
    Unsat,
    /// The wall-clock budget ran out; models and stats are partial.
    Timeout,
    /// More models exist than the cap allows; the first `max_models` (in
    /// search order) were kept.
    Capped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Sat => "sat",
            Outcome::Unsat => "unsat",
            Outcome::Timeout => "timeout",
            Outcome::Capped => "capped",
        })
    }
}

/// Search effort counters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    /// Search-tree nodes entered.
    pub nodes_expanded: u64,
    /// Subtrees abandoned by propagation, bounds, or failed leaf checks.
    pub prunes: u64,
    /// Wall time of the search.
    pub elapsed: Duration,
}

/// The result of one [`causalaba`] call: all models found, canonically
/// sorted by edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub models: Vec<Dag>,
    /// Per-model summed strength of satisfied facts, aligned with
    /// `models`; present exactly in soft mode.
    pub weights: Option<Vec<f64>>,
    pub outcome: Outcome,
    pub stats: SolverStats,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// The resolved state of one unordered pair, relative to a query order
/// `(x, y)`: `Forward` means `x -> y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairState {
    Forward,
    Backward,
    Absent,
    Undecided,
}

/// A partial orientation: for every unordered pair, the set of states
/// still possible. This is the searchable analogue of the choice
/// "arrow, reverse arrow, or no edge" that the argumentation encoding
/// spells out per pair.
///
/// The type never represents an outright contradiction — [`propagate`]
/// reports one as a value instead of returning a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeState {
    d: usize,
    masks: Vec<u8>,
}

impl EdgeState {
    /// The fully undecided state on `d` nodes.
    pub fn unconstrained(d: usize) -> Result<Self, SolverError> {
        check_d(d)?;
        Ok(EdgeState { d, masks: vec![ANY; d * (d - 1) / 2] })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn pair_index(&self, lo: Node, hi: Node) -> usize {
        debug_assert!(lo < hi && hi < self.d);
        lo * self.d - lo * (lo + 1) / 2 + (hi - lo - 1)
    }

    fn check_pair(&self, x: Node, y: Node) -> Result<(), SolverError> {
        check_node(x, self.d)?;
        check_node(y, self.d)?;
        if x == y {
            return Err(SolverError::Graph(GraphError::IdenticalQueryNodes));
        }
        Ok(())
    }

    /// The state of pair `{x, y}`, read in `(x, y)` order.
    pub fn pair_state(&self, x: Node, y: Node) -> Result<PairState, SolverError> {
        self.check_pair(x, y)?;
        let (lo, hi) = (x.min(y), x.max(y));
        let mask = self.masks[self.pair_index(lo, hi)];
        Ok(match mask {
            FWD => if x == lo { PairState::Forward } else { PairState::Backward },
            BWD => if x == lo { PairState::Backward } else { PairState::Forward },
            ABS => PairState::Absent,
            _ => PairState::Undecided,
        })
    }

    /// Overwrites pair `{x, y}` with a state given in `(x, y)` order.
    /// `Undecided` reopens all three possibilities.
    pub fn set_pair(&mut self, x: Node, y: Node, state: PairState) -> Result<(), SolverError> {
        self.check_pair(x, y)?;
        let (lo, hi) = (x.min(y), x.max(y));
        let idx = self.pair_index(lo, hi);
        self.masks[idx] = match (state, x == lo) {
            (PairState::Forward, true) | (PairState::Backward, false) => FWD,
            (PairState::Forward, false) | (PairState::Backward, true) => BWD,
            (PairState::Absent, _) => ABS,
            (PairState::Undecided, _) => ANY,
        };
        Ok(())
    }

    /// Whether `state` is still possible for pair `{x, y}` (in `(x, y)`
    /// order). `Undecided` asks whether more than one state remains.
    pub fn allows(&self, x: Node, y: Node, state: PairState) -> Result<bool, SolverError> {
        self.check_pair(x, y)?;
        let (lo, hi) = (x.min(y), x.max(y));
        let mask = self.masks[self.pair_index(lo, hi)];
        Ok(match (state, x == lo) {
            (PairState::Forward, true) | (PairState::Backward, false) => mask & FWD != 0,
            (PairState::Forward, false) | (PairState::Backward, true) => mask & BWD != 0,
            (PairState::Absent, _) => mask & ABS != 0,
            (PairState::Undecided, _) => mask.count_ones() > 1,
        })
    }

    /// Whether every pair is decided.
    pub fn is_complete(&self) -> bool {
        self.masks.iter().all(|m| m.count_ones() == 1)
    }

    /// The DAG a complete state describes.
    pub fn to_dag(&self) -> Result<Dag, SolverError> {
        let mut edges = Vec::new();
        let mut idx = 0;
        for lo in 0..self.d {
            for hi in lo + 1..self.d {
                match self.masks[idx] {
                    FWD => edges.push((lo, hi)),
                    BWD => edges.push((hi, lo)),
                    ABS => {}
                    _ => return Err(SolverError::Undecided(lo, hi)),
                }
                idx += 1;
            }
        }
        Ok(Dag::new(self.d, edges)?)
    }

    fn from_masks(d: usize, masks: Vec<u8>) -> Self {
        debug_assert!(masks.iter().all(|&m| m != 0));
        EdgeState { d, masks }
    }
}

/// Outcome of constraint propagation; a contradiction is an answer, not
/// an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Consistent(EdgeState),
    Contradiction,
}

/// One fact, pre-resolved for the hot loops.
#[derive(Debug, Clone, Copy)]
struct PFact {
    kind: FactKind,
    x: Node,
    y: Node,
    zmask: u64,
    strength: f64,
}

impl PFact {
    fn from_fact(f: &CiFact) -> Self {
        let mut zmask = 0u64;
        for &v in f.z() {
            zmask |= 1 << v;
        }
        PFact { kind: f.kind(), x: f.x(), y: f.y(), zmask, strength: f.strength() }
    }

    /// Whether a complete DAG satisfies this fact.
    fn satisfied_by(&self, g: &Dag) -> bool {
        match self.kind {
            FactKind::Independence => g.d_separated_mask(self.x, self.y, self.zmask),
            FactKind::Dependence => !g.d_separated_mask(self.x, self.y, self.zmask),
            FactKind::Arrow => g.has_edge(self.x, self.y),
            FactKind::NoEdge => !g.adjacent(self.x, self.y),
        }
    }
}

fn prepare(facts: &FactSet) -> Vec<PFact> {
    facts.iter().map(PFact::from_fact).collect()
}

/// Applies forced deductions from `facts` to `state` until fixpoint:
/// independence and no-edge facts clear their pair, arrow facts pin
/// theirs, and any orientation that would close a directed cycle among
/// already-decided arrows is dropped. Cheap violation bounds — a
/// dependence fact whose endpoints no possible skeleton path joins, or an
/// independence fact already witnessed by a decided directed chain that
/// avoids the conditioning set — turn the result into a contradiction.
pub fn propagate(state: &EdgeState, facts: &FactSet) -> Result<Propagation, SolverError> {
    if facts.d() != state.d {
        return Err(SolverError::SizeMismatch { facts_d: facts.d(), d: state.d });
    }
    let pfacts = prepare(facts);
    let mut masks = state.masks.clone();
    if fixpoint(state.d, &mut masks, &pfacts, true) {
        Ok(Propagation::Consistent(EdgeState::from_masks(state.d, masks)))
    } else {
        Ok(Propagation::Contradiction)
    }
}

/// Per-fact satisfaction of a complete DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCheck {
    /// Conjunction over all facts — the hard-mode acceptance test.
    pub satisfied: bool,
    /// One flag per fact, in fact-set order.
    pub per_fact: Vec<bool>,
}

/// Evaluates every fact against a complete DAG via d-separation and edge
/// lookups.
pub fn check_model(g: &Dag, facts: &FactSet) -> Result<ModelCheck, SolverError> {
    if facts.d() != g.d() {
        return Err(SolverError::SizeMismatch { facts_d: facts.d(), d: g.d() });
    }
    let per_fact: Vec<bool> =
        prepare(facts).iter().map(|f| f.satisfied_by(g)).collect();
    Ok(ModelCheck { satisfied: per_fact.iter().all(|&s| s), per_fact })
}

/// Enumerates the DAGs on `d` nodes consistent with `facts`.
///
/// Hard mode returns exactly the set of DAGs in which every independence
/// fact is d-separated, every dependence fact is d-connected, every arrow
/// fact's edge is present as directed, and every no-edge fact's pair is
/// non-adjacent; an empty model set signals unsatisfiability. Soft mode
/// searches the full DAG space and keeps only the models maximizing the
/// summed strength of satisfied facts, reported per model in
/// [`ModelSet::weights`].
///
/// Models are sorted canonically, so output is independent of search
/// order. Budget exhaustion and cap overflow are reported through
/// [`ModelSet::outcome`], never as errors.
pub fn causalaba(d: usize, facts: &FactSet, cfg: &SolverConfig) -> Result<ModelSet, SolverError> {
    cfg.validate()?;
    check_d(d)?;
    if d < 3 {
        return Err(SolverError::TooFewNodes(d));
    }
    if facts.d() != d {
        return Err(SolverError::SizeMismatch { facts_d: facts.d(), d });
    }
    let pfacts = prepare(facts);
    let start = Instant::now();
    let mut search = Search {
        d,
        pfacts: &pfacts,
        hard: cfg.mode == SolveMode::Hard,
        cap: cfg.max_models,
        budget: cfg.time_budget,
        start,
        models: Vec::new(),
        weights: Vec::new(),
        best: f64::NEG_INFINITY,
        nodes: 0,
        prunes: 0,
        timed_out: false,
        capped: false,
    };
    search.dfs(vec![ANY; d * (d - 1) / 2]);

    let Search { mut models, mut weights, timed_out, capped, nodes, prunes, .. } = search;
    // Canonical order: sort models (and their weights) by edge list.
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_unstable_by(|&a, &b| models[a].cmp(&models[b]));
    models = order.iter().map(|&i| models[i].clone()).collect();
    if cfg.mode == SolveMode::Soft {
        weights = order.iter().map(|&i| weights[i]).collect();
    }
    debug_assert!(models.windows(2).all(|w| w[0] < w[1]), "models must be distinct");

    let outcome = if timed_out {
        Outcome::Timeout
    } else if capped {
        Outcome::Capped
    } else if models.is_empty() {
        Outcome::Unsat
    } else {
        Outcome::Sat
    };
    Ok(ModelSet {
        models,
        weights: (cfg.mode == SolveMode::Soft).then_some(weights),
        outcome,
        stats: SolverStats { nodes_expanded: nodes, prunes, elapsed: start.elapsed() },
    })
}

struct Search<'a> {
    d: usize,
    pfacts: &'a [PFact],
    hard: bool,
    cap: usize,
    budget: Duration,
    start: Instant,
    models: Vec<Dag>,
    weights: Vec<f64>,
    /// Best weight seen so far (soft mode).
    best: f64,
    nodes: u64,
    prunes: u64,
    timed_out: bool,
    capped: bool,
}

/// Slack for the soft-mode bound test only: the optimistic bound and the
/// exact leaf weights are summed in different orders, so a strict
/// comparison could round away a genuine tie. Ties themselves are decided
/// at leaves by exact equality.
const BOUND_SLACK: f64 = 1e-9;

impl Search<'_> {
    fn dfs(&mut self, mut masks: Vec<u8>) {
        // A capped hard search is done; a capped soft search keeps going,
        // since a strictly better weight would reopen collection.
        if self.timed_out || (self.capped && self.hard) {
            return;
        }
        self.nodes += 1;
        if self.start.elapsed() > self.budget {
            self.timed_out = true;
            return;
        }
        if !fixpoint(self.d, &mut masks, self.pfacts, self.hard) {
            self.prunes += 1;
            return;
        }
        if !self.hard {
            let bound = self.soft_bound(&masks);
            if bound + BOUND_SLACK < self.best {
                self.prunes += 1;
                return;
            }
        }
        // Most-constrained pair first; ties break on the lowest index so
        // the traversal is deterministic.
        let mut pick: Option<(usize, u32)> = None;
        for (idx, m) in masks.iter().enumerate() {
            let bits = m.count_ones();
            if bits > 1 && pick.map_or(true, |(_, b)| bits < b) {
                pick = Some((idx, bits));
                if bits == 2 {
                    break;
                }
            }
        }
        match pick {
            None => self.leaf(&masks),
            Some((idx, _)) => {
                for bit in [FWD, BWD, ABS] {
                    if masks[idx] & bit != 0 {
                        let mut child = masks.clone();
                        child[idx] = bit;
                        self.dfs(child);
                    }
                }
            }
        }
    }

    fn leaf(&mut self, masks: &[u8]) {
        let g = dag_from_masks(self.d, masks);
        if self.hard {
            if self.pfacts.iter().all(|f| f.satisfied_by(&g)) {
                self.push_model(g, 0.0);
            } else {
                self.prunes += 1;
            }
        } else {
            // Exact weight, summed in fact order so equal-satisfaction
            // models get bit-identical weights.
            let w: f64 = self
                .pfacts
                .iter()
                .map(|f| if f.satisfied_by(&g) { f.strength } else { 0.0 })
                .sum();
            if w > self.best {
                self.best = w;
                self.models.clear();
                self.weights.clear();
                self.capped = false; // the truncated set was suboptimal anyway
            }
            if w == self.best {
                // Unlike hard mode, an overflowing tie set must not stop
                // the search — a strictly better weight may still appear.
                if self.models.len() == self.cap {
                    self.capped = true;
                } else {
                    self.models.push(g);
                    self.weights.push(w);
                }
            } else {
                self.prunes += 1;
            }
        }
    }

    fn push_model(&mut self, g: Dag, w: f64) {
        if self.models.len() == self.cap {
            self.capped = true;
            return;
        }
        self.models.push(g);
        self.weights.push(w);
    }

    /// Upper bound on any completion's weight: total strength minus the
    /// strengths of facts this partial state already dooms.
    fn soft_bound(&self, masks: &[u8]) -> f64 {
        self.pfacts
            .iter()
            .map(|f| if definitely_violated(self.d, masks, f) { 0.0 } else { f.strength })
            .sum()
    }
}

fn dag_from_masks(d: usize, masks: &[u8]) -> Dag {
    let mut edges = Vec::new();
    let mut idx = 0;
    for lo in 0..d {
        for hi in lo + 1..d {
            match masks[idx] {
                FWD => edges.push((lo, hi)),
                BWD => edges.push((hi, lo)),
                _ => debug_assert_eq!(masks[idx], ABS),
            }
            idx += 1;
        }
    }
    Dag::new(d, edges).expect("propagation keeps decided arrows acyclic")
}

/// Runs all deductions on `masks` until nothing changes. With `enforce`
/// set the facts act as hard constraints (their deductions are applied
/// and their violation bounds may fail the state); without it only
/// acyclicity propagates. Returns false on contradiction.
fn fixpoint(d: usize, masks: &mut [u8], pfacts: &[PFact], enforce: bool) -> bool {
    let pair_index =
        |lo: usize, hi: usize| lo * d - lo * (lo + 1) / 2 + (hi - lo - 1);
    if enforce {
        for f in pfacts {
            let (lo, hi) = (f.x.min(f.y), f.x.max(f.y));
            let idx = pair_index(lo, hi);
            masks[idx] &= match f.kind {
                FactKind::Independence | FactKind::NoEdge => ABS,
                FactKind::Arrow => {
                    if f.x == lo {
                        FWD
                    } else {
                        BWD
                    }
                }
                FactKind::Dependence => ANY,
            };
            if masks[idx] == 0 {
                return false;
            }
        }
    }
    // Acyclicity: forbid any orientation whose reverse is already forced
    // by a decided directed path. Each clearing can decide a pair and
    // extend reachability, so iterate to fixpoint.
    loop {
        let reach = decided_reachability(d, masks);
        let mut changed = false;
        let mut idx = 0;
        for lo in 0..d {
            for hi in lo + 1..d {
                let m = masks[idx];
                let mut next = m;
                if m & FWD != 0 && reach[hi] & (1 << lo) != 0 {
                    next &= !FWD; // lo -> hi would close hi ~> lo
                }
                if m & BWD != 0 && reach[lo] & (1 << hi) != 0 {
                    next &= !BWD; // hi -> lo would close lo ~> hi
                }
                if next == 0 {
                    return false;
                }
                if next != m {
                    masks[idx] = next;
                    changed = true;
                }
                idx += 1;
            }
        }
        if !changed {
            break;
        }
    }
    if enforce {
        for f in pfacts {
            if definitely_violated(d, masks, f) {
                return false;
            }
        }
    }
    true
}

/// Transitive reachability over decided arrows only: `reach[u]` has bit
/// `v` set when a directed path of forced arrows leads from `u` to `v`.
fn decided_reachability(d: usize, masks: &[u8]) -> Vec<u64> {
    let mut adj = vec![0u64; d];
    let mut idx = 0;
    for lo in 0..d {
        for hi in lo + 1..d {
            match masks[idx] {
                FWD => adj[lo] |= 1 << hi,
                BWD => adj[hi] |= 1 << lo,
                _ => {}
            }
            idx += 1;
        }
    }
    // Bitset Floyd–Warshall: cheap at these dimensions.
    for mid in 0..d {
        for u in 0..d {
            if adj[u] & (1 << mid) != 0 {
                adj[u] |= adj[mid];
            }
        }
    }
    adj
}

/// Whether no completion of `masks` can satisfy `f`. Sound but not
/// complete — used as a propagation bound (hard mode) and a
/// branch-and-bound term (soft mode).
fn definitely_violated(d: usize, masks: &[u8], f: &PFact) -> bool {
    let pair_index =
        |lo: usize, hi: usize| lo * d - lo * (lo + 1) / 2 + (hi - lo - 1);
    let (lo, hi) = (f.x.min(f.y), f.x.max(f.y));
    let m = masks[pair_index(lo, hi)];
    match f.kind {
        FactKind::Arrow => {
            let want = if f.x == lo { FWD } else { BWD };
            m & want == 0
        }
        FactKind::NoEdge => m & ABS == 0,
        FactKind::Independence => {
            // An edge between the endpoints, or a decided directed chain
            // whose interior avoids Z, stays active in every completion.
            m & ABS == 0
                || decided_chain_avoiding(d, masks, f.x, f.y, f.zmask)
                || decided_chain_avoiding(d, masks, f.y, f.x, f.zmask)
        }
        FactKind::Dependence => !possibly_connected(d, masks, f.x, f.y),
    }
}

/// Whether decided arrows already form a directed path `from ~> to` whose
/// interior nodes all avoid `zmask`. Such a chain is active given Z in
/// every completion, because extra edges never block an existing path.
fn decided_chain_avoiding(d: usize, masks: &[u8], from: Node, to: Node, zmask: u64) -> bool {
    let mut adj = vec![0u64; d];
    let mut idx = 0;
    for lo in 0..d {
        for hi in lo + 1..d {
            match masks[idx] {
                FWD => adj[lo] |= 1 << hi,
                BWD => adj[hi] |= 1 << lo,
                _ => {}
            }
            idx += 1;
        }
    }
    let mut seen = 1u64 << from;
    let mut frontier = vec![from];
    while let Some(u) = frontier.pop() {
        let mut out = adj[u];
        while out != 0 {
            let v = out.trailing_zeros() as usize;
            out &= out - 1;
            if v == to {
                return true;
            }
            // Interior nodes must avoid Z for the chain to stay active.
            if zmask & (1 << v) == 0 && seen & (1 << v) == 0 {
                seen |= 1 << v;
                frontier.push(v);
            }
        }
    }
    false
}

/// Whether `x` and `y` are joined in the possible skeleton (pairs whose
/// edge is not yet ruled out). Disconnection here rules out d-connection
/// in every completion.
fn possibly_connected(d: usize, masks: &[u8], x: Node, y: Node) -> bool {
    let pair_index =
        |lo: usize, hi: usize| lo * d - lo * (lo + 1) / 2 + (hi - lo - 1);
    let mut seen = 1u64 << x;
    let mut frontier = vec![x];
    while let Some(u) = frontier.pop() {
        for v in 0..d {
            if v == u || seen & (1 << v) != 0 {
                continue;
            }
            let (lo, hi) = (u.min(v), u.max(v));
            if masks[pair_index(lo, hi)] & (FWD | BWD) != 0 {
                if v == y {
                    return true;
                }
                seen |= 1 << v;
                frontier.push(v);
            }
        }
    }
    false
}
