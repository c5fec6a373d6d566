//! CPDAG completion (Meek closure over unshielded colliders) and
//! equivalence-class membership enumeration.

use super::{Bits, Dag, GraphError, Node, Pdag};

/// Working orientation state: per node, masks of parents / children /
/// undirected neighbors.
struct Orient {
    d: usize,
    pa: Vec<u64>,
    ch: Vec<u64>,
    un: Vec<u64>,
}

impl Orient {
    fn adjacent(&self, u: Node, v: Node) -> bool {
        (self.pa[u] | self.ch[u] | self.un[u]) & (1 << v) != 0
    }

    fn orient(&mut self, u: Node, v: Node) {
        self.un[u] &= !(1 << v);
        self.un[v] &= !(1 << u);
        self.ch[u] |= 1 << v;
        self.pa[v] |= 1 << u;
    }
}

/// Skeleton + unshielded colliders + Meek closure.
pub(crate) fn dag_to_cpdag(g: &Dag) -> Pdag {
    let d = g.d();
    let mut st = Orient {
        d,
        pa: vec![0; d],
        ch: vec![0; d],
        un: vec![0; d],
    };
    for &(u, v) in g.edges() {
        st.un[u] |= 1 << v;
        st.un[v] |= 1 << u;
    }
    // orient unshielded colliders a -> b <- c
    for b in 0..d {
        let pars = g.parents(b);
        for i in 0..pars.len() {
            for j in i + 1..pars.len() {
                let (a, c) = (pars[i], pars[j]);
                if !g.adjacent(a, c) {
                    st.orient(a, b);
                    st.orient(c, b);
                }
            }
        }
    }
    meek_closure(&mut st);
    rebuild(&st)
}

/// Runs the Meek rules to fixpoint on an arbitrary partially directed
/// graph; see [`Pdag::meek_closure`].
pub(crate) fn close_orientations(p: &Pdag) -> Pdag {
    let d = p.d();
    let mut st = Orient {
        d,
        pa: vec![0; d],
        ch: vec![0; d],
        un: vec![0; d],
    };
    for &(u, v) in p.directed() {
        st.ch[u] |= 1 << v;
        st.pa[v] |= 1 << u;
    }
    for &(u, v) in p.undirected() {
        st.un[u] |= 1 << v;
        st.un[v] |= 1 << u;
    }
    meek_closure(&mut st);
    rebuild(&st)
}

fn rebuild(st: &Orient) -> Pdag {
    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for u in 0..st.d {
        for v in Bits(st.ch[u]) {
            directed.push((u, v));
        }
        for v in Bits(st.un[u]) {
            if u < v {
                undirected.push((u, v));
            }
        }
    }
    Pdag::new(st.d, directed, undirected).expect("closure preserves pair disjointness")
}

/// The four Meek rules, applied to fixpoint.
///
/// R1: a -> b, b -- c, a,c nonadjacent            => b -> c
/// R2: a -> w, w -> b, a -- b                     => a -> b
/// R3: a -- b; c -> b, d -> b; a -- c, a -- d; c,d nonadjacent => a -> b
/// R4: a -- b; z -> w, w -> b; a ~ z, a ~ w; z,b nonadjacent   => a -> b
fn meek_closure(st: &mut Orient) {
    let d = st.d;
    loop {
        let mut changed = false;

        // R1
        for b in 0..d {
            if st.pa[b] == 0 || st.un[b] == 0 {
                continue;
            }
            for c in Bits(st.un[b]) {
                if Bits(st.pa[b]).any(|a| !st.adjacent(a, c)) {
                    st.orient(b, c);
                    changed = true;
                }
            }
        }
        // R2
        for a in 0..d {
            for b in Bits(st.un[a]) {
                if st.ch[a] & st.pa[b] != 0 {
                    st.orient(a, b);
                    changed = true;
                }
            }
        }
        // R3
        for a in 0..d {
            for b in Bits(st.un[a]) {
                let shared: Vec<Node> = Bits(st.pa[b] & st.un[a]).collect();
                let fire = (0..shared.len()).any(|i| {
                    (i + 1..shared.len()).any(|j| !st.adjacent(shared[i], shared[j]))
                });
                if fire {
                    st.orient(a, b);
                    changed = true;
                }
            }
        }
        // R4
        for a in 0..d {
            for b in Bits(st.un[a]) {
                let a_adj = st.pa[a] | st.ch[a] | st.un[a];
                let fire = Bits(st.pa[b] & a_adj).any(|w| {
                    Bits(st.pa[w] & a_adj).any(|z| !st.adjacent(z, b))
                });
                if fire {
                    st.orient(a, b);
                    changed = true;
                }
            }
        }

        if !changed {
            return;
        }
    }
}

/// Enumerates every acyclic orientation of the undirected edges that leaves
/// the v-structure set unchanged; see [`Pdag::mec_members`].
pub(crate) fn mec_members(p: &Pdag, cap: usize) -> Result<Vec<Dag>, GraphError> {
    let (out, truncated) = mec_members_capped(p, cap)?;
    if truncated {
        return Err(GraphError::MecCapExceeded(cap));
    }
    Ok(out)
}

/// Like [`mec_members`], but a class larger than `cap` comes back as the
/// first `cap` members found plus a `true` truncation flag instead of an
/// error, so callers can report partial results.
pub(crate) fn mec_members_capped(
    p: &Pdag,
    cap: usize,
) -> Result<(Vec<Dag>, bool), GraphError> {
    let truth_vs = p.v_structures();
    let und: Vec<(Node, Node)> = p.undirected().to_vec();
    let mut assign: Vec<bool> = Vec::with_capacity(und.len()); // true = lo -> hi
    let mut out: Vec<Dag> = Vec::new();
    let truncated = match extend(p, &und, &truth_vs, &mut assign, cap, &mut out) {
        Ok(()) => false,
        Err(GraphError::MecCapExceeded(_)) => true,
        Err(e) => return Err(e),
    };
    if out.is_empty() && !truncated {
        return Err(GraphError::NotExtendable);
    }
    out.sort_unstable();
    Ok((out, truncated))
}

fn extend(
    p: &Pdag,
    und: &[(Node, Node)],
    truth_vs: &[(Node, Node, Node)],
    assign: &mut Vec<bool>,
    cap: usize,
    out: &mut Vec<Dag>,
) -> Result<(), GraphError> {
    if assign.len() == und.len() {
        let edges = p.directed().iter().copied().chain(
            und.iter()
                .zip(assign.iter())
                .map(|(&(u, v), &fw)| if fw { (u, v) } else { (v, u) }),
        );
        if let Ok(g) = Dag::new(p.d(), edges) {
            if Pdag::from_dag(&g).v_structures() == truth_vs {
                if out.len() >= cap {
                    return Err(GraphError::MecCapExceeded(cap));
                }
                out.push(g);
            }
        }
        return Ok(());
    }
    for fw in [true, false] {
        assign.push(fw);
        // prune: directed cycle or foreign v-structure among decided edges
        if partial_ok(p, und, assign, truth_vs) {
            extend(p, und, truth_vs, assign, cap, out)?;
        }
        assign.pop();
    }
    Ok(())
}

/// Sound pruning on a partial orientation: decided edges must not close a
/// directed cycle, and any fully decided unshielded collider must already
/// be one of the target v-structures.
fn partial_ok(
    p: &Pdag,
    und: &[(Node, Node)],
    assign: &[bool],
    truth_vs: &[(Node, Node, Node)],
) -> bool {
    let d = p.d();
    let mut ch = vec![0u64; d];
    let mut pa = vec![0u64; d];
    for &(u, v) in p.directed() {
        ch[u] |= 1 << v;
        pa[v] |= 1 << u;
    }
    for (&(u, v), &fw) in und.iter().zip(assign.iter()) {
        let (a, b) = if fw { (u, v) } else { (v, u) };
        ch[a] |= 1 << b;
        pa[b] |= 1 << a;
    }
    // cycle check via Kahn count
    let mut indeg: Vec<u32> = (0..d).map(|v| pa[v].count_ones()).collect();
    let mut queue: Vec<Node> = (0..d).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0usize;
    while let Some(v) = queue.pop() {
        seen += 1;
        for c in Bits(ch[v]) {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                queue.push(c);
            }
        }
    }
    if seen != d {
        return false;
    }
    // foreign collider check among decided edges
    for b in 0..d {
        let pars: Vec<Node> = Bits(pa[b]).collect();
        for i in 0..pars.len() {
            for j in i + 1..pars.len() {
                let (x, y) = (pars[i].min(pars[j]), pars[i].max(pars[j]));
                if !p.adjacent(x, y) && !truth_vs.contains(&(x, b, y)) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::all_dags;
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn cpdag_of_chain_is_fully_undirected() {
        let g = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        let c = g.to_cpdag();
        assert!(c.directed().is_empty());
        assert_eq!(c.undirected(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn cpdag_of_collider_keeps_arrows() {
        let g = Dag::new(3, [(0, 2), (1, 2)]).unwrap();
        let c = g.to_cpdag();
        assert_eq!(c.directed(), &[(0, 2), (1, 2)]);
        assert!(c.undirected().is_empty());
    }

    #[test]
    fn cpdag_single_edge_undirected() {
        let g = Dag::new(2, [(0, 1)]).unwrap();
        let c = g.to_cpdag();
        assert_eq!(c.undirected(), &[(0, 1)]);
    }

    #[test]
    fn meek_r1_orients_descendant_edge() {
        // 0 -> 1 <- 2 collider plus 1 - 3 in the skeleton: R1 forces 1 -> 3.
        let g = Dag::new(4, [(0, 1), (2, 1), (1, 3)]).unwrap();
        let c = g.to_cpdag();
        assert!(c.has_directed(1, 3));
    }

    #[test]
    fn mec_members_chain_three() {
        // MEC of a chain = {chain, reversed chain, fork} = 3 members.
        let g = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        let members = g.to_cpdag().mec_members(1000).unwrap();
        assert_eq!(members.len(), 3);
        assert!(members.contains(&g));
        for w in members.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn mec_members_triangle_six() {
        // A complete triangle DAG's class has all 6 acyclic orderings.
        let g = Dag::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let members = g.to_cpdag().mec_members(1000).unwrap();
        assert_eq!(members.len(), 6);
    }

    #[test]
    fn mec_cap_and_nonextendable_errors() {
        let g = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.to_cpdag().mec_members(2), Err(GraphError::MecCapExceeded(2)));
        // 0 -> 1 directed plus 1 -- 0? not constructible; instead: a PDAG whose
        // only orientation creates a foreign collider: 0 -> 1, 2 -- 1 with 0,2
        // nonadjacent and v-structure set of the pdag itself empty.
        let p = Pdag::new(3, [(0, 1)], [(1, 2)]).unwrap();
        // orienting 2 -> 1 creates collider 0 -> 1 <- 2 (foreign), so the only
        // member orients 1 -> 2.
        let members = p.mec_members(10).unwrap();
        assert_eq!(members.len(), 1);
        assert!(members[0].has_edge(1, 2));
    }

    /// The d-separation signature of a DAG: the verdict of every
    /// (x, y, z) query. Two DAGs are Markov equivalent iff signatures match.
    fn signature(g: &Dag) -> Vec<bool> {
        let d = g.d();
        let mut sig = Vec::new();
        for x in 0..d {
            for y in x + 1..d {
                let rest: Vec<Node> = (0..d).filter(|&v| v != x && v != y).collect();
                for bits in 0..(1usize << rest.len()) {
                    let z = rest
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| bits & (1 << k) != 0)
                        .map(|(_, &v)| v)
                        .collect();
                    sig.push(g.d_separated(x, y, &z).unwrap());
                }
            }
        }
        sig
    }

    #[test]
    fn cpdag_characterizes_equivalence_d_up_to_4() {
        // Same d-separation signature <=> same CPDAG, exhaustively.
        for d in 2..=4 {
            let mut by_sig: BTreeMap<Vec<bool>, Vec<Dag>> = BTreeMap::new();
            for g in all_dags(d).unwrap() {
                by_sig.entry(signature(&g)).or_default().push(g);
            }
            let mut seen_cpdags = std::collections::BTreeSet::new();
            for group in by_sig.values() {
                let c = group[0].to_cpdag();
                for g in group {
                    assert_eq!(g.to_cpdag(), c, "same signature, different CPDAG");
                }
                assert!(seen_cpdags.insert(c), "distinct signatures share a CPDAG");
            }
        }
    }

    #[test]
    fn mec_members_roundtrip_d_up_to_4() {
        // Members of cpdag(g) are exactly the DAGs with g's signature.
        for d in 2..=4 {
            let mut by_sig: BTreeMap<Vec<bool>, Vec<Dag>> = BTreeMap::new();
            for g in all_dags(d).unwrap() {
                by_sig.entry(signature(&g)).or_default().push(g);
            }
            for group in by_sig.values() {
                let members = group[0].to_cpdag().mec_members(10_000).unwrap();
                assert_eq!(&members, group);
            }
        }
    }
}
