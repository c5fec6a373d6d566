//! Data plumbing: discrete Bayesian networks read from BIF files,
//! ancestral sampling, random-DAG and linear-Gaussian structural-equation
//! generators, and CSV round-tripping of datasets.
//!
//! Discrete samples encode states as 0-based integer codes (emitted as
//! integer-valued columns), so downstream consumers — including the
//! Gaussian partial-correlation test — can treat every dataset uniformly
//! as numeric.

mod bif;

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::citest::{CitError, Dataset};
use crate::graph::{Dag, GraphError, Node};

pub use bif::{parse_bif, to_bif};

/// Tolerance for each conditional-probability row summing to one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Smallest admissible structural-equation edge weight magnitude; weaker
/// weights would make edges statistically near-invisible.
pub const MIN_SEM_WEIGHT: f64 = 0.1;

/// Errors from parsing, validation, generation, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    /// Malformed input text, located by line and column (1-based).
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    /// A conditional-probability row that does not sum to one (or has a
    /// negative entry).
    #[error("probability row for `{variable}` sums to {sum}, expected 1")]
    RowSum { variable: String, sum: f64 },
    /// More edges requested than a DAG on `d` nodes can hold.
    #[error("cannot place {requested} edges on {d} nodes (maximum {max})")]
    TooManyEdges { d: usize, requested: usize, max: usize },
    /// A structural-equation weight vector that does not match the edge
    /// list, or a weight below [`MIN_SEM_WEIGHT`] in magnitude, or a bad
    /// noise scale.
    #[error("bad structural-equation specification: {0}")]
    BadSem(String),
    /// Sample size must be at least one.
    #[error("sample size must be at least 1")]
    EmptySample,
    /// Graph-level failure (cyclic structure, too many nodes, …).
    #[error(transparent)]
    Graph(#[from] GraphError),
    /// Dataset-shape failure.
    #[error(transparent)]
    Dataset(#[from] CitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A named discrete variable with its ordered state list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

/// One variable's conditional probability table: one row per parent-state
/// combination (row-major over the declared parent order, first parent
/// slowest), each row holding one probability per child state.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    rows: Vec<Vec<f64>>,
}

/// A discrete Bayesian network: variables, acyclic structure, and one
/// validated conditional probability table per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    name: String,
    properties: Vec<String>,
    variables: Vec<Variable>,
    structure: Dag,
    /// Declared parent order per variable — the CPT row indexing order,
    /// which need not be sorted.
    parents: Vec<Vec<Node>>,
    cpts: Vec<Cpt>,
}

impl BayesNet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn structure(&self) -> &Dag {
        &self.structure
    }

    /// Declared parents of `v` in CPT order.
    pub fn parents_of(&self, v: Node) -> &[Node] {
        &self.parents[v]
    }

    /// CPT rows of `v`: row index is the row-major parent-state
    /// combination, entries follow the child's state order.
    pub fn cpt_rows(&self, v: Node) -> &[Vec<f64>] {
        &self.cpts[v].rows
    }

    /// Serializes back to BIF text; parsing the output reproduces `self`.
    pub fn to_bif(&self) -> String {
        bif::to_bif(self)
    }
}

// ---------------------------------------------------------------------------
// Ancestral sampling
// ---------------------------------------------------------------------------

/// Draws `n` joint samples by walking the network in topological order and
/// sampling each variable from its CPT row given the already-sampled
/// parents. States are emitted as 0-based integer codes; the same seed
/// always yields the same dataset.
pub fn ancestral_sample(net: &BayesNet, n: usize, seed: u64) -> Result<Dataset, DataError> {
    if n == 0 {
        return Err(DataError::EmptySample);
    }
    let d = net.d();
    let order = net
        .structure
        .topological_order()
        .expect("network structure was validated acyclic");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    let mut state = vec![0usize; d];
    for _ in 0..n {
        for &v in &order {
            let mut idx = 0usize;
            for &pv in &net.parents[v] {
                idx = idx * net.variables[pv].states.len() + state[pv];
            }
            let row = &net.cpts[v].rows[idx];
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut s = row.len() - 1;
            for (k, &pk) in row.iter().enumerate() {
                acc += pk;
                if u < acc {
                    s = k;
                    break;
                }
            }
            state[v] = s;
            cols[v].push(s as f64);
        }
    }
    Ok(Dataset::new(net.variable_names(), cols)?)
}

// ---------------------------------------------------------------------------
// Random DAGs and linear-Gaussian structural equations
// ---------------------------------------------------------------------------

/// A uniformly ordered random DAG: a node order is shuffled, then
/// `edge_count` node pairs are chosen uniformly without replacement and
/// oriented along the order. The result always has exactly `edge_count`
/// edges and is acyclic by construction.
pub fn random_dag(d: usize, edge_count: usize, seed: u64) -> Result<Dag, DataError> {
    let max = d * d.saturating_sub(1) / 2;
    if edge_count > max {
        return Err(DataError::TooManyEdges { d, requested: edge_count, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Node> = (0..d).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> =
        (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect();
    pairs.shuffle(&mut rng);
    pairs.truncate(edge_count);
    let edges = pairs.into_iter().map(|(a, b)| (order[a], order[b]));
    Ok(Dag::new(d, edges)?)
}

/// A linear-Gaussian structural-equation model: each variable is the
/// weighted sum of its parents plus independent Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SemSpec {
    structure: Dag,
    /// One weight per edge, parallel to `structure.edges()`.
    weights: Vec<f64>,
    noise_scale: f64,
    seed: u64,
}

impl SemSpec {
    /// Validates that weights are finite with magnitude at least
    /// [`MIN_SEM_WEIGHT`], one per edge, and that the noise scale is a
    /// positive finite number.
    pub fn new(
        structure: Dag,
        weights: Vec<f64>,
        noise_scale: f64,
        seed: u64,
    ) -> Result<Self, DataError> {
        if weights.len() != structure.edge_count() {
            return Err(DataError::BadSem(format!(
                "{} weights for {} edges",
                weights.len(),
                structure.edge_count()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || w.abs() < MIN_SEM_WEIGHT) {
            return Err(DataError::BadSem(format!(
                "edge weight {w} is not finite or below the minimum magnitude {MIN_SEM_WEIGHT}"
            )));
        }
        if !noise_scale.is_finite() || noise_scale <= 0.0 {
            return Err(DataError::BadSem(format!("noise scale {noise_scale} must be positive")));
        }
        Ok(SemSpec { structure, weights, noise_scale, seed })
    }

    /// Random weights with magnitude uniform in `[0.5, 2]` and random sign
    /// (drawn on a dedicated generator stream), unit noise.
    pub fn random(structure: Dag, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let weights = (0..structure.edge_count())
            .map(|_| {
                let w = rng.gen_range(0.5..=2.0);
                if rng.gen_bool(0.5) {
                    w
                } else {
                    -w
                }
            })
            .collect();
        SemSpec { structure, weights, noise_scale: 1.0, seed }
    }

    pub fn structure(&self) -> &Dag {
        &self.structure
    }

    /// Edge weights, parallel to `structure().edges()`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Draws `n` rows from the structural-equation model: in topological order,
/// `x_j = Σ_i w_ij · x_i + noise_scale · ε` with `ε ~ N(0, 1)`. Columns are
/// named `x0, x1, …`. Noise is drawn on a generator stream separate from
/// the one used for random weights, so a [`SemSpec::random`] spec and its
/// samples do not share random draws.
pub fn sem_sample(spec: &SemSpec, n: usize) -> Result<Dataset, DataError> {
    if n == 0 {
        return Err(DataError::EmptySample);
    }
    let d = spec.structure.d();
    let order = spec
        .structure
        .topological_order()
        .expect("a DAG always has a topological order");
    // Per-child weighted parent lists.
    let mut incoming: Vec<Vec<(Node, f64)>> = vec![Vec::new(); d];
    for (&(u, v), &w) in spec.structure.edges().iter().zip(&spec.weights) {
        incoming[v].push((u, w));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    for r in 0..n {
        for &v in &order {
            let eps: f64 = StandardNormal.sample(&mut rng);
            let mut x = spec.noise_scale * eps;
            for &(u, w) in &incoming[v] {
                x += w * cols[u][r];
            }
            cols[v].push(x);
        }
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Ok(Dataset::new(names, cols)?)
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Writes a dataset as CSV: one header row of variable names, then one row
/// per sample. Integer-valued cells are written without a decimal point so
/// discrete state codes stay integers on disk.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ds.names())?;
    let mut record = Vec::with_capacity(ds.d());
    for r in 0..ds.n() {
        record.clear();
        for j in 0..ds.d() {
            let v = ds.column(j)[r];
            if v.fract() == 0.0 && v.abs() < 9e15 {
                record.push(format!("{}", v as i64));
            } else {
                record.push(format!("{v}"));
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV with a header row of variable names and numeric cells.
pub fn read_csv<R: Read>(input: R) -> Result<Dataset, DataError> {
    let mut r = csv::Reader::from_reader(input);
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (rownum, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != names.len() {
            return Err(DataError::Parse {
                line: rownum + 2,
                col: 1,
                msg: format!("row has {} cells, header has {}", record.len(), names.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| DataError::Parse {
                line: rownum + 2,
                col: j + 1,
                msg: format!("malformed number `{cell}`"),
            })?;
            cols[j].push(v);
        }
    }
    Ok(Dataset::new(names, cols)?)
}

/// [`write_csv`] to a filesystem path.
pub fn write_csv_path(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    write_csv(ds, std::fs::File::create(path)?)
}

/// [`read_csv`] from a filesystem path.
pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    read_csv(std::fs::File::open(path)?)
}
