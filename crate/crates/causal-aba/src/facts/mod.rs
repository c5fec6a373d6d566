//! Weighted (in)dependence facts and their sourcing.
//!
//! A conditional-independence test on a pair `(x, y)` given `z` yields a
//! *fact*: independence when `p ≥ α`, dependence otherwise. Each fact
//! carries a strength in `[0, 1]` combining how decisive the p-value was
//! with how small the conditioning set was — see [`gamma`] and
//! [`strength`]. Discovery treats strengths as the order in which facts
//! are sacrificed when they cannot all hold at once.
//!
//! [`mpc`] sources facts by running a stable skeleton search with
//! majority-vote collider orientation over a [`CiTester`].
//!
//! [`CiTester`]: crate::citest::CiTester

pub mod mpc;

use crate::citest::CitError;
use crate::graph::{check_d, check_node, CondSet, GraphError, Node};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactError {
    #[error("significance level must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
    #[error("p-value must lie in [0, 1], got {0}")]
    BadP(f64),
    #[error("strength must be finite and non-negative, got {0}")]
    BadStrength(f64),
    #[error("weighting needs at least 3 variables, got {0}")]
    TooFewVariables(usize),
    #[error("conditioning set of size {s} exceeds the maximum {max} for {d} variables")]
    CondTooLarge { s: usize, max: usize, d: usize },
    #[error("structural facts take no conditioning set")]
    StructuralWithCondSet,
    #[error("duplicate fact for pair ({0}, {1})")]
    Duplicate(Node, Node),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cit(#[from] CitError),
}

/// What a fact asserts. Declaration order doubles as the tie-break rank
/// when sorting facts of equal strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactKind {
    /// `x` and `y` are dependent given `z`.
    Dependence,
    /// `x` and `y` are independent given `z`.
    Independence,
    /// Background knowledge: the edge `x -> y` is present.
    Arrow,
    /// Background knowledge: no edge joins `x` and `y`.
    NoEdge,
}

impl fmt::Display for FactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactKind::Dependence => "dep",
            FactKind::Independence => "indep",
            FactKind::Arrow => "arrow",
            FactKind::NoEdge => "noedge",
        })
    }
}

impl FromStr for FactKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "dep" => Ok(FactKind::Dependence),
            "indep" => Ok(FactKind::Independence),
            "arrow" => Ok(FactKind::Arrow),
            "noedge" => Ok(FactKind::NoEdge),
            _ => Err(()),
        }
    }
}

/// Decisiveness of a p-value against the significance level `α`: 1 at
/// `p = 0` or `p = 1`, falling linearly to ½ at the threshold itself.
///
/// ```text
/// γ(p) = 1 − p / 2α                    p < α   (dependence side)
/// γ(p) = (2α − p − 1) / (2(α − 1))     p ≥ α   (independence side)
/// ```
pub fn gamma(p: f64, alpha: f64) -> Result<f64, FactError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(FactError::BadP(p));
    }
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(FactError::BadAlpha(alpha));
    }
    Ok(if p < alpha {
        1.0 - p / (2.0 * alpha)
    } else {
        (2.0 * alpha - p - 1.0) / (2.0 * (alpha - 1.0))
    })
}

/// Strength of a fact from a test with p-value `p` and conditioning-set
/// size `s`, on `d ≥ 3` variables: `(1 − s/(d−2)) · γ(p, α)`.
///
/// Larger conditioning sets mean less reliable tests; at the maximum
/// possible size `s = d − 2` the strength is 0 regardless of `p`.
pub fn strength(p: f64, s: usize, d: usize, alpha: f64) -> Result<f64, FactError> {
    if d < 3 {
        return Err(FactError::TooFewVariables(d));
    }
    if s > d - 2 {
        return Err(FactError::CondTooLarge { s, max: d - 2, d });
    }
    Ok((1.0 - s as f64 / (d as f64 - 2.0)) * gamma(p, alpha)?)
}

/// One weighted fact. Pairs of non-[`Arrow`](FactKind::Arrow) facts are
/// canonicalized to `x < y`; arrows keep their direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CiFact {
    kind: FactKind,
    x: Node,
    y: Node,
    z: CondSet,
    p: f64,
    strength: f64,
}

impl CiFact {
    /// Builds a fact from explicit parts, validating the query shape, the
    /// p-value range and the strength.
    pub fn new(
        kind: FactKind,
        x: Node,
        y: Node,
        z: CondSet,
        p: f64,
        strength: f64,
    ) -> Result<Self, FactError> {
        if x == y {
            return Err(GraphError::IdenticalQueryNodes.into());
        }
        if z.contains(&x) || z.contains(&y) {
            let offender = if z.contains(&x) { x } else { y };
            return Err(GraphError::QueryInConditioningSet(offender).into());
        }
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(FactError::BadP(p));
        }
        if !strength.is_finite() || strength < 0.0 {
            return Err(FactError::BadStrength(strength));
        }
        if matches!(kind, FactKind::Arrow | FactKind::NoEdge) && !z.is_empty() {
            return Err(FactError::StructuralWithCondSet);
        }
        let (x, y) = if kind == FactKind::Arrow {
            (x, y)
        } else {
            (x.min(y), x.max(y))
        };
        Ok(CiFact { kind, x, y, z, p, strength })
    }

    /// Classifies and weights a test outcome: independence iff `p ≥ α`,
    /// strength from [`strength`] with `s = |z|` on `d` variables.
    pub fn from_test(
        d: usize,
        alpha: f64,
        x: Node,
        y: Node,
        z: CondSet,
        p: f64,
    ) -> Result<Self, FactError> {
        let s = strength(p, z.len(), d, alpha)?;
        let kind = if p >= alpha {
            FactKind::Independence
        } else {
            FactKind::Dependence
        };
        CiFact::new(kind, x, y, z, p, s)
    }

    /// Background-knowledge edge `x -> y`. Structural facts carry no
    /// weight: discovery neither scores nor drops them.
    pub fn arrow(x: Node, y: Node) -> Result<Self, FactError> {
        CiFact::new(FactKind::Arrow, x, y, CondSet::new(), 0.0, 0.0)
    }

    /// Background-knowledge absence of any edge between `x` and `y`.
    pub fn no_edge(x: Node, y: Node) -> Result<Self, FactError> {
        CiFact::new(FactKind::NoEdge, x, y, CondSet::new(), 0.0, 0.0)
    }

    pub fn kind(&self) -> FactKind {
        self.kind
    }

    pub fn x(&self) -> Node {
        self.x
    }

    pub fn y(&self) -> Node {
        self.y
    }

    pub fn z(&self) -> &CondSet {
        &self.z
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Whether this fact came from a CI test (as opposed to background
    /// knowledge).
    pub fn is_ci(&self) -> bool {
        matches!(self.kind, FactKind::Dependence | FactKind::Independence)
    }

    fn sort_key(&self) -> (FactKind, Node, Node, Vec<Node>) {
        (self.kind, self.x, self.y, self.z.iter().copied().collect())
    }
}

impl fmt::Display for CiFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z: Vec<String> = self.z.iter().map(|v| v.to_string()).collect();
        match self.kind {
            FactKind::Dependence => write!(f, "{} ~/⫫~ {} | {{{}}}", self.x, self.y, z.join(",")),
            FactKind::Independence => write!(f, "{} ⫫ {} | {{{}}}", self.x, self.y, z.join(",")),
            FactKind::Arrow => write!(f, "{} -> {}", self.x, self.y),
            FactKind::NoEdge => write!(f, "no edge {} -- {}", self.x, self.y),
        }
    }
}

/// A deduplicated collection of facts over `d` variables.
///
/// CI facts share one keyspace per `(x, y, z)` triple — one test, one
/// fact. Arrow facts key on their ordered pair, no-edge facts on the
/// unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FactSet {
    d: usize,
    facts: Vec<CiFact>,
}

impl FactSet {
    pub fn new(d: usize) -> Result<Self, FactError> {
        check_d(d)?;
        Ok(FactSet { d, facts: Vec::new() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn facts(&self) -> &[CiFact] {
        &self.facts
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CiFact> {
        self.facts.iter()
    }

    /// Adds a fact, rejecting out-of-range nodes and keyspace duplicates.
    pub fn push(&mut self, fact: CiFact) -> Result<(), FactError> {
        check_node(fact.x, self.d)?;
        check_node(fact.y, self.d)?;
        for &v in &fact.z {
            check_node(v, self.d)?;
        }
        let clash = self.facts.iter().any(|f| match (f.kind, fact.kind) {
            (FactKind::Arrow, FactKind::Arrow) => (f.x, f.y) == (fact.x, fact.y),
            (FactKind::NoEdge, FactKind::NoEdge) => (f.x, f.y) == (fact.x, fact.y),
            (a, b) if a != FactKind::Arrow && a != FactKind::NoEdge
                && b != FactKind::Arrow && b != FactKind::NoEdge =>
            {
                (f.x, f.y, &f.z) == (fact.x, fact.y, &fact.z)
            }
            _ => false,
        });
        if clash {
            return Err(FactError::Duplicate(fact.x, fact.y));
        }
        self.facts.push(fact);
        Ok(())
    }

    /// The facts sorted ascending by strength; ties break on kind
    /// (dependence first), then the pair, then the conditioning set. This
    /// is the sacrifice order used by discovery.
    pub fn sorted_by_strength(&self) -> Vec<CiFact> {
        let mut out = self.facts.clone();
        out.sort_by(|a, b| {
            a.strength
                .total_cmp(&b.strength)
                .then_with(|| a.sort_key().cmp(&b.sort_key()))
        });
        out
    }

    /// Tab-separated rendering: a `# d=<n>` preamble, a header, one fact
    /// per row. `z` is a comma-joined index list (empty for ∅). Floats use
    /// the shortest round-tripping decimal form.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# d={}\nkind\tx\ty\tz\tp\tstrength\n", self.d);
        for f in &self.facts {
            let z: Vec<String> = f.z.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                f.kind,
                f.x,
                f.y,
                z.join(","),
                f.p,
                f.strength
            ));
        }
        out
    }

    /// Parses the format produced by [`FactSet::to_tsv`].
    pub fn from_tsv(text: &str) -> Result<Self, FactError> {
        let err = |line: usize, msg: &str| FactError::Parse { line, msg: msg.to_string() };
        let mut set: Option<FactSet> = None;
        let mut saw_header = false;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if set.is_none() {
                    let rest = rest.trim();
                    let d = rest
                        .strip_prefix("d=")
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| err(lineno, "expected `# d=<count>` preamble"))?;
                    set = Some(FactSet::new(d)?);
                }
                continue;
            }
            let set = set
                .as_mut()
                .ok_or_else(|| err(lineno, "missing `# d=<count>` preamble"))?;
            if !saw_header {
                if line != "kind\tx\ty\tz\tp\tstrength" {
                    return Err(err(lineno, "expected header `kind\\tx\\ty\\tz\\tp\\tstrength`"));
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(err(lineno, &format!("expected 6 columns, got {}", cols.len())));
            }
            let kind: FactKind = cols[0]
                .parse()
                .map_err(|_| err(lineno, &format!("unknown fact kind `{}`", cols[0])))?;
            let parse_node = |s: &str| -> Result<Node, FactError> {
                s.parse::<Node>().map_err(|_| err(lineno, &format!("bad node index `{s}`")))
            };
            let x = parse_node(cols[1])?;
            let y = parse_node(cols[2])?;
            let mut z = CondSet::new();
            if !cols[3].is_empty() {
                for tok in cols[3].split(',') {
                    z.insert(parse_node(tok)?);
                }
            }
            let parse_f = |s: &str| -> Result<f64, FactError> {
                s.parse::<f64>().map_err(|_| err(lineno, &format!("bad number `{s}`")))
            };
            let p = parse_f(cols[4])?;
            let strength = parse_f(cols[5])?;
            set.push(CiFact::new(kind, x, y, z, p, strength)?)?;
        }
        set.ok_or_else(|| err(0, "empty document"))
    }
}

impl<'a> IntoIterator for &'a FactSet {
    type Item = &'a CiFact;
    type IntoIter = std::slice::Iter<'a, CiFact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}
