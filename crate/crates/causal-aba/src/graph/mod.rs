//! Directed acyclic graphs, partially directed graphs, and the graphical
//! queries the rest of the crate is built on: d-separation, simple-path
//! enumeration, CPDAG completion and Markov-equivalence-class membership.
//!
//! Nodes are `0..d` indices. All edge and path enumerations are emitted in
//! lexicographic order so downstream output is deterministic.

mod cpdag;
mod dsep;
mod edgelist;
mod paths;
mod pdag;

pub use edgelist::{format_edge_list, parse_edge_list};
pub use pdag::Pdag;

use std::collections::BTreeSet;
use thiserror::Error;

/// Node index into a graph on `d` variables.
pub type Node = usize;

/// A conditioning set: sorted, deduplicated node indices.
pub type CondSet = BTreeSet<Node>;

/// Hard upper bound on variable count; adjacency sets are stored as `u64`
/// bitmasks.
pub const MAX_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph needs at least one node")]
    NoNodes,
    #[error("graph supports at most {MAX_NODES} nodes, got {0}")]
    TooManyNodes(usize),
    #[error("node {node} out of range for {d} variables")]
    NodeOutOfRange { node: Node, d: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(Node),
    #[error("pair {0},{1} listed more than once")]
    DuplicatePair(Node, Node),
    #[error("directed cycle through node {0}")]
    Cycle(Node),
    #[error("query nodes must be distinct")]
    IdenticalQueryNodes,
    #[error("query node {0} lies in the conditioning set")]
    QueryInConditioningSet(Node),
    #[error("graphs have different node counts: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("partially directed graph has no consistent extension")]
    NotExtendable,
    #[error("equivalence class exceeds the cap of {0} members")]
    MecCapExceeded(usize),
    #[error("expected a fully directed graph but found {0}--{1}")]
    UndirectedEdge(Node, Node),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A directed acyclic graph over nodes `0..d`.
///
/// Edges are kept sorted; parent/child sets are cached as bitmasks.
/// Equality, ordering and hashing go through the sorted edge list, so a
/// `Vec<Dag>` sorts into the canonical enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dag {
    d: usize,
    edges: Vec<(Node, Node)>,
    parents: Vec<u64>,
    children: Vec<u64>,
}

impl Dag {
    /// Builds a DAG, validating node ranges, self-loops, duplicate pairs
    /// (either orientation) and acyclicity.
    pub fn new(d: usize, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self, GraphError> {
        check_d(d)?;
        let mut parents = vec![0u64; d];
        let mut children = vec![0u64; d];
        let mut sorted: Vec<(Node, Node)> = Vec::new();
        for (u, v) in edges {
            check_node(u, d)?;
            check_node(v, d)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if children[u] & (1 << v) != 0 || children[v] & (1 << u) != 0 {
                return Err(GraphError::DuplicatePair(u.min(v), u.max(v)));
            }
            children[u] |= 1 << v;
            parents[v] |= 1 << u;
            sorted.push((u, v));
        }
        sorted.sort_unstable();
        let g = Dag { d, edges: sorted, parents, children };
        g.topological_order().map(|_| g)
    }

    /// The empty graph on `d` nodes.
    pub fn empty(d: usize) -> Self {
        Dag::new(d, []).expect("empty graph is valid for d >= 1")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Edges sorted lexicographically.
    pub fn edges(&self) -> &[(Node, Node)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: Node, v: Node) -> bool {
        u < self.d && v < self.d && self.children[u] & (1 << v) != 0
    }

    pub fn adjacent(&self, u: Node, v: Node) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    pub fn parents(&self, v: Node) -> Vec<Node> {
        mask_nodes(self.parents[v])
    }

    pub fn children(&self, v: Node) -> Vec<Node> {
        mask_nodes(self.children[v])
    }

    pub(crate) fn parents_mask(&self, v: Node) -> u64 {
        self.parents[v]
    }

    pub(crate) fn children_mask(&self, v: Node) -> u64 {
        self.children[v]
    }

    /// Nodes reachable from `v` along directed edges, excluding `v` itself.
    pub fn descendants(&self, v: Node) -> Vec<Node> {
        mask_nodes(self.descendants_mask(v) & !(1 << v))
    }

    /// Bitmask of `v` plus everything reachable from it.
    pub(crate) fn descendants_mask(&self, v: Node) -> u64 {
        let mut seen = 1u64 << v;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0u64;
            for u in Bits(frontier) {
                next |= self.children[u];
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen
    }

    /// One topological order (lowest-index-first among ready nodes), or the
    /// offending node if a directed cycle exists.
    pub fn topological_order(&self) -> Result<Vec<Node>, GraphError> {
        let mut indeg: Vec<u32> = (0..self.d).map(|v| self.parents[v].count_ones()).collect();
        let mut ready: BTreeSet<Node> = (0..self.d).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.d);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for c in Bits(self.children[v]) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == self.d {
            Ok(order)
        } else {
            let stuck = (0..self.d).find(|&v| indeg[v] > 0).unwrap_or(0);
            Err(GraphError::Cycle(stuck))
        }
    }

    /// Whether `x` and `y` are d-separated given `z`.
    ///
    /// Linear-time reachability over (node, direction) states; see
    /// [`dsep`](self) internals. `x`, `y` must be distinct and disjoint
    /// from `z`.
    pub fn d_separated(&self, x: Node, y: Node, z: &CondSet) -> Result<bool, GraphError> {
        check_node(x, self.d)?;
        check_node(y, self.d)?;
        if x == y {
            return Err(GraphError::IdenticalQueryNodes);
        }
        let mut z_mask = 0u64;
        for &w in z {
            check_node(w, self.d)?;
            z_mask |= 1 << w;
        }
        if z_mask & (1 << x) != 0 {
            return Err(GraphError::QueryInConditioningSet(x));
        }
        if z_mask & (1 << y) != 0 {
            return Err(GraphError::QueryInConditioningSet(y));
        }
        Ok(!dsep::d_connected_masks(&self.parents, &self.children, x, y, z_mask))
    }

    /// Mask-based variant for hot loops; preconditions as [`Dag::d_separated`],
    /// unchecked.
    pub(crate) fn d_separated_mask(&self, x: Node, y: Node, z_mask: u64) -> bool {
        !dsep::d_connected_masks(&self.parents, &self.children, x, y, z_mask)
    }

    /// All simple paths between `x` and `y` over the skeleton, as node
    /// sequences starting at `x`, in lexicographic order.
    pub fn enumerate_paths(&self, x: Node, y: Node) -> Result<Vec<Vec<Node>>, GraphError> {
        check_node(x, self.d)?;
        check_node(y, self.d)?;
        if x == y {
            return Err(GraphError::IdenticalQueryNodes);
        }
        Ok(paths::simple_paths(self, x, y))
    }

    /// The CPDAG of this DAG's Markov equivalence class: skeleton,
    /// unshielded colliders, and the closure under the four Meek rules.
    pub fn to_cpdag(&self) -> Pdag {
        cpdag::dag_to_cpdag(self)
    }
}

/// Every DAG on `d` nodes, canonically sorted. Brute force over all
/// orientation states of each unordered pair; intended as a reference
/// enumerator for small `d` (counts grow super-exponentially: 1, 3, 25,
/// 543, 29281 for d = 1..5).
pub fn all_dags(d: usize) -> Result<Vec<Dag>, GraphError> {
    check_d(d)?;
    if d > 6 {
        return Err(GraphError::TooManyNodes(d)); // 3^(d choose 2) blows past practical use
    }
    let pairs: Vec<(Node, Node)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let mut states = vec![0u8; pairs.len()]; // 0 absent, 1 lo->hi, 2 hi->lo
    loop {
        let edges: Vec<(Node, Node)> = pairs
            .iter()
            .zip(&states)
            .filter_map(|(&(i, j), &s)| match s {
                1 => Some((i, j)),
                2 => Some((j, i)),
                _ => None,
            })
            .collect();
        if let Ok(g) = Dag::new(d, edges) {
            out.push(g);
        }
        // odometer over pair states
        let mut k = 0;
        loop {
            if k == states.len() {
                out.sort_unstable();
                return Ok(out);
            }
            states[k] += 1;
            if states[k] < 3 {
                break;
            }
            states[k] = 0;
            k += 1;
        }
    }
}

pub(crate) fn check_d(d: usize) -> Result<(), GraphError> {
    if d == 0 {
        Err(GraphError::NoNodes)
    } else if d > MAX_NODES {
        Err(GraphError::TooManyNodes(d))
    } else {
        Ok(())
    }
}

pub(crate) fn check_node(v: Node, d: usize) -> Result<(), GraphError> {
    if v >= d {
        Err(GraphError::NodeOutOfRange { node: v, d })
    } else {
        Ok(())
    }
}

pub(crate) fn mask_nodes(mask: u64) -> Vec<Node> {
    Bits(mask).collect()
}

/// Iterator over the set bit positions of a mask, ascending.
#[derive(Clone, Copy)]
pub(crate) struct Bits(pub u64);

impl Iterator for Bits {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let b = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(nodes: &[Node]) -> CondSet {
        nodes.iter().copied().collect()
    }

    #[test]
    fn dag_rejects_bad_input() {
        assert_eq!(Dag::new(0, []), Err(GraphError::NoNodes));
        assert_eq!(Dag::new(2, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Dag::new(2, [(0, 1), (1, 0)]), Err(GraphError::DuplicatePair(0, 1)));
        assert_eq!(Dag::new(2, [(0, 2)]), Err(GraphError::NodeOutOfRange { node: 2, d: 2 }));
        assert!(matches!(Dag::new(3, [(0, 1), (1, 2), (2, 0)]), Err(GraphError::Cycle(_))));
    }

    #[test]
    fn dag_basic_accessors() {
        // 0 -> 1 -> 2, 0 -> 2
        let g = Dag::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.parents(2), vec![0, 1]);
        assert_eq!(g.children(0), vec![1, 2]);
        assert_eq!(g.descendants(0), vec![1, 2]);
        assert_eq!(g.descendants(2), Vec::<Node>::new());
        assert_eq!(g.topological_order().unwrap(), vec![0, 1, 2]);
        assert!(g.adjacent(2, 0));
        assert!(!g.has_edge(2, 0));
    }

    #[test]
    fn descendants_chain() {
        let g = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.descendants(0), vec![1, 2]);
    }

    #[test]
    fn dag_counts_by_brute_force() {
        // Known counts of labeled DAGs.
        assert_eq!(all_dags(1).unwrap().len(), 1);
        assert_eq!(all_dags(2).unwrap().len(), 3);
        assert_eq!(all_dags(3).unwrap().len(), 25);
        assert_eq!(all_dags(4).unwrap().len(), 543);
    }

    #[test]
    fn all_dags_sorted_unique() {
        let dags = all_dags(3).unwrap();
        for w in dags.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn d_separation_chain_fork_collider() {
        // chain 0 -> 1 -> 2
        let chain = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(!chain.d_separated(0, 2, &cs(&[])).unwrap());
        assert!(chain.d_separated(0, 2, &cs(&[1])).unwrap());

        // fork 0 <- 1 -> 2
        let fork = Dag::new(3, [(1, 0), (1, 2)]).unwrap();
        assert!(!fork.d_separated(0, 2, &cs(&[])).unwrap());
        assert!(fork.d_separated(0, 2, &cs(&[1])).unwrap());

        // collider 0 -> 1 <- 2
        let coll = Dag::new(3, [(0, 1), (2, 1)]).unwrap();
        assert!(coll.d_separated(0, 2, &cs(&[])).unwrap());
        assert!(!coll.d_separated(0, 2, &cs(&[1])).unwrap());
    }

    #[test]
    fn d_separation_collider_descendant_opens() {
        // 0 -> 1 <- 2, 1 -> 3: conditioning on the collider's descendant
        // activates the path.
        let g = Dag::new(4, [(0, 1), (2, 1), (1, 3)]).unwrap();
        assert!(g.d_separated(0, 2, &cs(&[])).unwrap());
        assert!(!g.d_separated(0, 2, &cs(&[3])).unwrap());
    }

    #[test]
    fn d_separation_rejects_bad_queries() {
        let g = Dag::new(3, [(0, 1)]).unwrap();
        assert_eq!(g.d_separated(0, 0, &cs(&[])), Err(GraphError::IdenticalQueryNodes));
        assert_eq!(g.d_separated(0, 1, &cs(&[1])), Err(GraphError::QueryInConditioningSet(1)));
        assert!(g.d_separated(0, 3, &cs(&[])).is_err());
    }

    /// Literal path-based evaluator: a path is active w.r.t. z iff every
    /// collider on it is in z or has a descendant in z, and every
    /// non-collider is outside z. Used as the oracle for the reachability
    /// implementation.
    fn d_separated_by_paths(g: &Dag, x: Node, y: Node, z: &CondSet) -> bool {
        let z_mask: u64 = z.iter().fold(0, |m, &w| m | (1 << w));
        for path in g.enumerate_paths(x, y).unwrap() {
            let mut active = true;
            for i in 1..path.len() - 1 {
                let (a, b, c) = (path[i - 1], path[i], path[i + 1]);
                let collider = g.has_edge(a, b) && g.has_edge(c, b);
                if collider {
                    if g.descendants_mask(b) & z_mask == 0 {
                        active = false;
                        break;
                    }
                } else if z_mask & (1 << b) != 0 {
                    active = false;
                    break;
                }
            }
            if active {
                return false;
            }
        }
        true
    }

    #[test]
    fn reachability_matches_path_oracle_exhaustively_d4() {
        // Every DAG on 4 nodes, every pair, every conditioning set.
        for g in all_dags(4).unwrap() {
            for x in 0..4 {
                for y in x + 1..4 {
                    let rest: Vec<Node> = (0..4).filter(|&v| v != x && v != y).collect();
                    for bits in 0..(1 << rest.len()) {
                        let z: CondSet = rest
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| bits & (1 << k) != 0)
                            .map(|(_, &v)| v)
                            .collect();
                        let fast = g.d_separated(x, y, &z).unwrap();
                        let slow = d_separated_by_paths(&g, x, y, &z);
                        assert_eq!(fast, slow, "g={:?} x={x} y={y} z={:?}", g.edges(), z);
                    }
                }
            }
        }
    }

    #[test]
    fn d_separation_symmetric_d4() {
        for g in all_dags(4).unwrap() {
            for x in 0..4 {
                for y in x + 1..4 {
                    let z = cs(&(0..4).filter(|&v| v != x && v != y).collect::<Vec<_>>());
                    assert_eq!(
                        g.d_separated(x, y, &z).unwrap(),
                        g.d_separated(y, x, &z).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn paths_complete_graph_k4() {
        // K4 skeleton: between any two nodes there are 5 simple paths.
        let g = Dag::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let paths = g.enumerate_paths(0, 3).unwrap();
        assert_eq!(paths.len(), 5);
        // lexicographic order by node sequence
        for w in paths.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(paths.contains(&vec![0, 3]));
        assert!(paths.contains(&vec![0, 1, 2, 3]));
    }

    #[test]
    fn paths_disconnected_pair_empty() {
        let g = Dag::new(3, [(0, 1)]).unwrap();
        assert!(g.enumerate_paths(0, 2).unwrap().is_empty());
    }
}
