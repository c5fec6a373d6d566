//! Partially directed graphs: a directed edge set plus an undirected edge
//! set over disjoint node pairs. CPDAGs are the well-formed special case
//! produced by [`Dag::to_cpdag`](super::Dag::to_cpdag).

use super::cpdag;
use super::{check_d, check_node, Dag, GraphError, Node};

/// A partially directed graph. Directed edges are ordered pairs; undirected
/// edges are stored with the lower node first. A pair carries at most one
/// edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pdag {
    d: usize,
    directed: Vec<(Node, Node)>,
    undirected: Vec<(Node, Node)>,
}

impl Pdag {
    pub fn new(
        d: usize,
        directed: impl IntoIterator<Item = (Node, Node)>,
        undirected: impl IntoIterator<Item = (Node, Node)>,
    ) -> Result<Self, GraphError> {
        check_d(d)?;
        let mut pair_seen = vec![0u64; d];
        let mut mark = |u: Node, v: Node| -> Result<(), GraphError> {
            check_node(u, d)?;
            check_node(v, d)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (lo, hi) = (u.min(v), u.max(v));
            if pair_seen[lo] & (1 << hi) != 0 {
                return Err(GraphError::DuplicatePair(lo, hi));
            }
            pair_seen[lo] |= 1 << hi;
            Ok(())
        };
        let mut dir: Vec<(Node, Node)> = Vec::new();
        for (u, v) in directed {
            mark(u, v)?;
            dir.push((u, v));
        }
        let mut und: Vec<(Node, Node)> = Vec::new();
        for (u, v) in undirected {
            mark(u, v)?;
            und.push((u.min(v), u.max(v)));
        }
        dir.sort_unstable();
        und.sort_unstable();
        Ok(Pdag { d, directed: dir, undirected: und })
    }

    /// The fully directed view of a DAG.
    pub fn from_dag(g: &Dag) -> Self {
        Pdag {
            d: g.d(),
            directed: g.edges().to_vec(),
            undirected: Vec::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn directed(&self) -> &[(Node, Node)] {
        &self.directed
    }

    pub fn undirected(&self) -> &[(Node, Node)] {
        &self.undirected
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn has_directed(&self, u: Node, v: Node) -> bool {
        self.directed.binary_search(&(u, v)).is_ok()
    }

    pub fn has_undirected(&self, u: Node, v: Node) -> bool {
        self.undirected.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn adjacent(&self, u: Node, v: Node) -> bool {
        self.has_directed(u, v) || self.has_directed(v, u) || self.has_undirected(u, v)
    }

    /// All skeleton pairs `(lo, hi)`, sorted.
    pub fn skeleton_pairs(&self) -> Vec<(Node, Node)> {
        let mut pairs: Vec<(Node, Node)> = self
            .directed
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .chain(self.undirected.iter().copied())
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Converts to a DAG; errors if any undirected edge remains or the
    /// directed part is cyclic.
    pub fn to_dag(&self) -> Result<Dag, GraphError> {
        if let Some(&(u, v)) = self.undirected.first() {
            return Err(GraphError::UndirectedEdge(u, v));
        }
        Dag::new(self.d, self.directed.iter().copied())
    }

    /// Unshielded colliders `a -> b <- c` (with `a < c`, `a`,`c`
    /// nonadjacent), sorted.
    pub fn v_structures(&self) -> Vec<(Node, Node, Node)> {
        let mut out = Vec::new();
        for b in 0..self.d {
            let pars: Vec<Node> = self
                .directed
                .iter()
                .filter(|&&(_, v)| v == b)
                .map(|&(u, _)| u)
                .collect();
            for i in 0..pars.len() {
                for j in i + 1..pars.len() {
                    let (a, c) = (pars[i].min(pars[j]), pars[i].max(pars[j]));
                    if !self.adjacent(a, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All DAG extensions sharing this graph's skeleton and v-structures —
    /// the Markov equivalence class when `self` is a valid CPDAG. Members
    /// come back canonically sorted. Errors with
    /// [`GraphError::NotExtendable`] when no extension exists and
    /// [`GraphError::MecCapExceeded`] past `cap`.
    pub fn mec_members(&self, cap: usize) -> Result<Vec<Dag>, GraphError> {
        cpdag::mec_members(self, cap)
    }

    /// Like [`Pdag::mec_members`], but a class larger than `cap` yields the
    /// first `cap` members plus a `true` truncation flag instead of an error.
    pub(crate) fn mec_members_capped(
        &self,
        cap: usize,
    ) -> Result<(Vec<Dag>, bool), GraphError> {
        cpdag::mec_members_capped(self, cap)
    }

    /// Propagates forced orientations to fixpoint: whenever leaving an
    /// undirected edge unoriented one way would create a new unshielded
    /// collider or a directed cycle, orient it the other way. Applying
    /// this to a skeleton plus its v-structure arrows yields the CPDAG.
    pub fn meek_closure(&self) -> Pdag {
        cpdag::close_orientations(self)
    }
}
