//! Builders for the causal argumentation frameworks: an acyclic-orientation
//! core (one arrow-or-absent choice per variable pair plus cycle attacks),
//! a d-separation layer (independence assumptions attacked by active
//! collider-trees), and the integration of observed facts, which makes the
//! framework non-flat.
//!
//! Atom names are self-describing and round-trip through the text dump:
//! `arr(0,1)`, `noe(0,1)`, their contraries `-arr(0,1)` / `-noe(0,1)`,
//! `e(0,1)` and `dpath(0,1)` helper atoms, independence assumptions
//! `indep(0,1|2.3)` with contraries `dep(0,1|2.3)`, and per-path blocking
//! assumptions `bp(0-2-1|3)` with contraries `ap(0-2-1|3)`.

use super::{AbaError, AbaFramework, AssumptionSet};
use crate::facts::{FactKind, FactSet};
use crate::graph::{check_node, CondSet, Dag, GraphError, Node};
use std::collections::BTreeSet;

/// Ceiling on the variable count for framework construction. The rule count
/// for the d-separation layer grows with the number of collider-trees, which
/// explodes combinatorially; these frameworks are ground truth for small
/// instances, not a scalable encoding.
pub const MAX_CAUSAL_D: usize = 4;

/// A causal framework together with the variable count it was built for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalAba {
    d: usize,
    framework: AbaFramework,
}

impl CausalAba {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn framework(&self) -> &AbaFramework {
        &self.framework
    }

    pub fn into_framework(self) -> AbaFramework {
        self.framework
    }

    /// Reads the accepted arrows out of an extension and assembles the graph
    /// they describe.
    pub fn project_to_dag(&self, ext: &AssumptionSet) -> Result<Dag, AbaError> {
        extension_to_dag(self.d, ext)
    }
}

/// Collects every `arr(i,j)` member of `ext` into a graph on `d` nodes.
pub fn extension_to_dag(d: usize, ext: &AssumptionSet) -> Result<Dag, AbaError> {
    let mut edges = Vec::new();
    for name in ext.iter() {
        if let Some(pair) = parse_arr(name) {
            edges.push(pair);
        }
    }
    edges.sort_unstable();
    Ok(Dag::new(d, edges)?)
}

fn parse_arr(name: &str) -> Option<(Node, Node)> {
    let inner = name.strip_prefix("arr(")?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some((x.parse().ok()?, y.parse().ok()?))
}

/// Name of the arrow assumption `x -> y`.
pub fn arr_name(x: Node, y: Node) -> String {
    format!("arr({x},{y})")
}

/// Name of the no-edge assumption for the unordered pair `{x, y}`.
pub fn noe_name(x: Node, y: Node) -> String {
    let (a, b) = (x.min(y), x.max(y));
    format!("noe({a},{b})")
}

/// Name of the independence assumption for `x` and `y` given `z`.
pub fn indep_name(x: Node, y: Node, z: &CondSet) -> String {
    format!("indep({})", ci_key(x, y, z))
}

fn dep_name(x: Node, y: Node, z: &CondSet) -> String {
    format!("dep({})", ci_key(x, y, z))
}

fn ci_key(x: Node, y: Node, z: &CondSet) -> String {
    let (a, b) = (x.min(y), x.max(y));
    format!("{a},{b}|{}", cond_key(z))
}

fn cond_key(z: &CondSet) -> String {
    z.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(".")
}

fn path_key(path: &[Node]) -> String {
    path.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("-")
}

fn bp_name(path: &[Node], z: &CondSet) -> String {
    format!("bp({}|{})", path_key(path), cond_key(z))
}

fn ap_name(path: &[Node], z: &CondSet) -> String {
    format!("ap({}|{})", path_key(path), cond_key(z))
}

fn carr_name(x: Node, y: Node) -> String {
    format!("-arr({x},{y})")
}

fn cnoe_name(x: Node, y: Node) -> String {
    let (a, b) = (x.min(y), x.max(y));
    format!("-noe({a},{b})")
}

fn e_name(x: Node, y: Node) -> String {
    let (a, b) = (x.min(y), x.max(y));
    format!("e({a},{b})")
}

fn dpath_name(x: Node, y: Node) -> String {
    format!("dpath({x},{y})")
}

fn check_causal_d(d: usize) -> Result<(), AbaError> {
    if d == 0 {
        return Err(GraphError::NoNodes.into());
    }
    if d > MAX_CAUSAL_D {
        return Err(AbaError::CapacityExceeded { d, max: MAX_CAUSAL_D });
    }
    Ok(())
}

/// Builds the acyclic-orientation framework: per pair the three mutually
/// attacking choices `arr(x,y)`, `arr(y,x)`, `noe(x,y)`, plus one attack rule
/// per arrow of every simple directed cycle of length three or more (the
/// rule's body is the full cycle, so completing a cycle defeats it).
pub fn build_graph_abaf(d: usize) -> Result<AbaFramework, AbaError> {
    check_causal_d(d)?;
    let mut fw = AbaFramework::new();
    add_choice_layer(&mut fw, d)?;
    add_cycle_rules(&mut fw, d)?;
    Ok(fw)
}

/// Builds the full causal framework for `d` variables: the acyclic
/// orientation core, the d-separation layer (an independence assumption for
/// every pair and conditioning set, attacked by each active collider-tree),
/// and one integration per fact. Structural and independence facts become
/// empty-body rules; each dependence fact additionally introduces blocked-path
/// assumptions for every path between its variables, so that accepting the
/// fact forces some path to stay active. Any fact makes the framework
/// non-flat.
pub fn build_causal_abaf(d: usize, facts: &FactSet) -> Result<CausalAba, AbaError> {
    check_causal_d(d)?;
    if facts.d() != d {
        return Err(GraphError::SizeMismatch(d, facts.d()).into());
    }
    let mut fw = build_graph_abaf(d)?;
    add_dsep_layer(&mut fw, d)?;
    for fact in facts.iter() {
        add_fact(&mut fw, d, fact.kind(), fact.x(), fact.y(), fact.z())?;
    }
    Ok(CausalAba { d, framework: fw })
}

fn add_choice_layer(fw: &mut AbaFramework, d: usize) -> Result<(), AbaError> {
    for x in 0..d {
        for y in x + 1..d {
            fw.add_assumption(&arr_name(x, y), &carr_name(x, y))?;
            fw.add_assumption(&arr_name(y, x), &carr_name(y, x))?;
            fw.add_assumption(&noe_name(x, y), &cnoe_name(x, y))?;
            let atoms = [arr_name(x, y), arr_name(y, x), noe_name(x, y)];
            let contraries = [carr_name(x, y), carr_name(y, x), cnoe_name(x, y)];
            for (i, contrary) in contraries.iter().enumerate() {
                for (j, other) in atoms.iter().enumerate() {
                    if i != j {
                        fw.add_rule(contrary, &[other.as_str()])?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn add_cycle_rules(fw: &mut AbaFramework, d: usize) -> Result<(), AbaError> {
    for cycle in simple_cycles(d) {
        let arrows: Vec<String> = cycle
            .iter()
            .enumerate()
            .map(|(i, &from)| arr_name(from, cycle[(i + 1) % cycle.len()]))
            .collect();
        let body: Vec<&str> = arrows.iter().map(String::as_str).collect();
        for (i, &from) in cycle.iter().enumerate() {
            let to = cycle[(i + 1) % cycle.len()];
            fw.add_rule(&carr_name(from, to), &body)?;
        }
    }
    Ok(())
}

/// All simple directed cycles of length ≥ 3, one representative per rotation
/// (the smallest node leads); the two traversal directions stay distinct.
fn simple_cycles(d: usize) -> Vec<Vec<Node>> {
    let mut cycles = Vec::new();
    for start in 0..d {
        let rest: Vec<Node> = (start + 1..d).collect();
        let mut seq = vec![start];
        extend_cycles(&rest, &mut seq, &mut cycles);
    }
    cycles
}

fn extend_cycles(pool: &[Node], seq: &mut Vec<Node>, out: &mut Vec<Vec<Node>>) {
    if seq.len() >= 3 {
        out.push(seq.clone());
    }
    for &next in pool {
        if !seq.contains(&next) {
            seq.push(next);
            extend_cycles(pool, seq, out);
            seq.pop();
        }
    }
}

fn add_dsep_layer(fw: &mut AbaFramework, d: usize) -> Result<(), AbaError> {
    // Directed-path helper atoms (kept for inspectability; the collider-tree
    // rules below carry the actual d-connectivity reasoning).
    for x in 0..d {
        for y in 0..d {
            if x != y {
                fw.add_rule(&dpath_name(x, y), &[&arr_name(x, y)])?;
            }
        }
    }
    for x in 0..d {
        for z in 0..d {
            if x == z {
                continue;
            }
            for y in 0..d {
                if y != x && y != z {
                    fw.add_rule(&dpath_name(x, z), &[&dpath_name(x, y), &arr_name(y, z)])?;
                }
            }
        }
    }
    // An edge in either direction defeats the no-edge assumption.
    for x in 0..d {
        for y in x + 1..d {
            fw.add_rule(&e_name(x, y), &[&arr_name(x, y)])?;
            fw.add_rule(&e_name(x, y), &[&arr_name(y, x)])?;
            fw.add_rule(&cnoe_name(x, y), &[&e_name(x, y)])?;
        }
    }
    // Independence assumptions, each attacked by every active collider-tree.
    for x in 0..d {
        for y in x + 1..d {
            for zmask in 0u64..(1 << d) {
                if zmask & (1 << x) != 0 || zmask & (1 << y) != 0 {
                    continue;
                }
                let z: CondSet = (0..d).filter(|n| zmask & (1 << n) != 0).collect();
                fw.add_assumption(&indep_name(x, y, &z), &dep_name(x, y, &z))?;
                for tree in collider_trees(d, x, y, &z)? {
                    let arrows: Vec<String> =
                        tree.arrows.iter().map(|&(a, b)| arr_name(a, b)).collect();
                    let body: Vec<&str> = arrows.iter().map(String::as_str).collect();
                    fw.add_rule(&dep_name(x, y, &z), &body)?;
                }
            }
        }
    }
    Ok(())
}

fn add_fact(
    fw: &mut AbaFramework,
    d: usize,
    kind: FactKind,
    x: Node,
    y: Node,
    z: &CondSet,
) -> Result<(), AbaError> {
    match kind {
        FactKind::Arrow => fw.add_rule(&arr_name(x, y), &[])?,
        FactKind::NoEdge => fw.add_rule(&noe_name(x, y), &[])?,
        FactKind::Independence => fw.add_rule(&indep_name(x, y, z), &[])?,
        FactKind::Dependence => {
            // The fact itself: the independence assumption is flatly denied.
            fw.add_rule(&dep_name(x, y, z), &[])?;
            // One blocked-path assumption per path between x and y. If every
            // path were blocked, the independence assumption would be
            // derived, and closedness would drag the denied assumption into
            // the extension — so some path must stay active.
            let paths = simple_paths(d, x, y);
            let bp_names: Vec<String> = paths.iter().map(|p| bp_name(p, z)).collect();
            for (path, bp) in paths.iter().zip(&bp_names) {
                fw.add_assumption(bp, &ap_name(path, z))?;
            }
            let body: Vec<&str> = bp_names.iter().map(String::as_str).collect();
            fw.add_rule(&indep_name(x, y, z), &body)?;
            // A path is shown active by any of its active collider-trees.
            for tree in collider_trees(d, x, y, z)? {
                let arrows: Vec<String> =
                    tree.arrows.iter().map(|&(a, b)| arr_name(a, b)).collect();
                let arrow_refs: Vec<&str> = arrows.iter().map(String::as_str).collect();
                fw.add_rule(&ap_name(&tree.path, z), &arrow_refs)?;
            }
        }
    }
    Ok(())
}

/// An x-y-path plus, for each of its colliders, a directed branch that
/// reaches the conditioning set; `arrows` is the union of path and branch
/// arrows and is what rule bodies are made of.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ColliderTree {
    /// The underlying path as a node sequence from `x` to `y`.
    pub path: Vec<Node>,
    /// All arrows of the tree (path arrows plus branch arrows), acyclic and
    /// free of two-way conflicts.
    pub arrows: BTreeSet<(Node, Node)>,
}

/// Enumerates every `z`-active x-y-collider-tree over the complete support
/// on `d` nodes: each simple path between `x` and `y`, in each arrow
/// orientation whose non-collider interior nodes avoid `z`, extended by one
/// minimal directed branch per collider that reaches `z` (colliders already
/// in `z` need none). Orientation-conflicting or cyclic arrow sets are
/// discarded; results are sorted and deduplicated.
pub fn collider_trees(
    d: usize,
    x: Node,
    y: Node,
    z: &CondSet,
) -> Result<Vec<ColliderTree>, AbaError> {
    check_causal_d(d)?;
    check_node(x, d)?;
    check_node(y, d)?;
    if x == y {
        return Err(GraphError::IdenticalQueryNodes.into());
    }
    for &node in z {
        check_node(node, d)?;
        if node == x || node == y {
            return Err(GraphError::QueryInConditioningSet(node).into());
        }
    }

    let mut trees: BTreeSet<ColliderTree> = BTreeSet::new();
    for path in simple_paths(d, x, y) {
        let segments = path.len() - 1;
        for orient in 0u32..(1 << segments) {
            let mut arrows: BTreeSet<(Node, Node)> = BTreeSet::new();
            for i in 0..segments {
                if orient & (1 << i) != 0 {
                    arrows.insert((path[i], path[i + 1]));
                } else {
                    arrows.insert((path[i + 1], path[i]));
                }
            }
            // Interior nodes: collider iff both neighbors point at it.
            let mut colliders = Vec::new();
            let mut blocked = false;
            for i in 1..path.len() - 1 {
                let into_left = orient & (1 << (i - 1)) != 0;
                let into_right = orient & (1 << i) == 0;
                if into_left && into_right {
                    colliders.push(path[i]);
                } else if z.contains(&path[i]) {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            let branch_menu: Vec<Vec<Vec<(Node, Node)>>> = colliders
                .iter()
                .map(|&c| collider_branches(d, c, z))
                .collect();
            if branch_menu.iter().any(Vec::is_empty) {
                continue;
            }
            add_branch_combinations(d, &path, &arrows, &branch_menu, 0, &mut trees);
        }
    }
    Ok(trees.into_iter().collect())
}

/// Minimal directed witnesses that collider `c` has a descendant in `z`: all
/// simple directed paths from `c` whose interior avoids `z` and whose last
/// node lies in `z`. A collider already in `z` has the empty witness.
fn collider_branches(d: usize, c: Node, z: &CondSet) -> Vec<Vec<(Node, Node)>> {
    if z.contains(&c) {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut visited = vec![false; d];
    visited[c] = true;
    let mut arrows = Vec::new();
    descend_to_z(d, c, z, &mut visited, &mut arrows, &mut out);
    out
}

fn descend_to_z(
    d: usize,
    at: Node,
    z: &CondSet,
    visited: &mut Vec<bool>,
    arrows: &mut Vec<(Node, Node)>,
    out: &mut Vec<Vec<(Node, Node)>>,
) {
    for next in 0..d {
        if visited[next] {
            continue;
        }
        arrows.push((at, next));
        if z.contains(&next) {
            out.push(arrows.clone());
        } else {
            visited[next] = true;
            descend_to_z(d, next, z, visited, arrows, out);
            visited[next] = false;
        }
        arrows.pop();
    }
}

fn add_branch_combinations(
    d: usize,
    path: &[Node],
    arrows: &BTreeSet<(Node, Node)>,
    menu: &[Vec<Vec<(Node, Node)>>],
    index: usize,
    trees: &mut BTreeSet<ColliderTree>,
) {
    if index == menu.len() {
        let edges: Vec<(Node, Node)> = arrows.iter().copied().collect();
        if Dag::new(d, edges).is_ok() {
            trees.insert(ColliderTree { path: path.to_vec(), arrows: arrows.clone() });
        }
        return;
    }
    for branch in &menu[index] {
        let mut extended = arrows.clone();
        let mut conflict = false;
        for &(a, b) in branch {
            if extended.contains(&(b, a)) {
                conflict = true;
                break;
            }
            extended.insert((a, b));
        }
        if !conflict {
            add_branch_combinations(d, path, &extended, menu, index + 1, trees);
        }
    }
}

/// All simple paths between `x` and `y` over the complete graph on `d`
/// nodes, as node sequences starting at `x`, in sorted order.
fn simple_paths(d: usize, x: Node, y: Node) -> Vec<Vec<Node>> {
    let mut out = Vec::new();
    let mut seq = vec![x];
    let mut used = vec![false; d];
    used[x] = true;
    extend_paths(d, y, &mut seq, &mut used, &mut out);
    out.sort_unstable();
    out
}

fn extend_paths(
    d: usize,
    goal: Node,
    seq: &mut Vec<Node>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<Node>>,
) {
    for next in 0..d {
        if used[next] {
            continue;
        }
        if next == goal {
            let mut path = seq.clone();
            path.push(goal);
            out.push(path);
            continue;
        }
        seq.push(next);
        used[next] = true;
        extend_paths(d, goal, seq, used, out);
        used[next] = false;
        seq.pop();
    }
}
