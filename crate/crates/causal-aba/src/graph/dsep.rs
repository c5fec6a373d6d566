//! Reachability-based d-connection test.
//!
//! Follows the classic two-phase scheme: first collect the ancestors of the
//! conditioning set, then breadth-first search over (node, direction)
//! states, where "up" means the node was entered against an edge (from a
//! child) and "down" means it was entered along an edge (from a parent).
//! A collider is traversable exactly when it is an ancestor of the
//! conditioning set. Linear in nodes + edges.

use super::Bits;
use super::Node;

/// True iff `x` and `y` are d-connected given the nodes of `z_mask`.
///
/// Preconditions (checked by the caller): `x != y`, neither in `z_mask`.
pub(crate) fn d_connected_masks(
    parents: &[u64],
    children: &[u64],
    x: Node,
    y: Node,
    z_mask: u64,
) -> bool {
    // Phase 1: ancestors of z (including z itself).
    let mut an_z = z_mask;
    let mut frontier = z_mask;
    while frontier != 0 {
        let mut next = 0u64;
        for v in Bits(frontier) {
            next |= parents[v];
        }
        frontier = next & !an_z;
        an_z |= next;
    }

    // Phase 2: BFS over (node, direction) states.
    let mut seen_up = 0u64;
    let mut seen_down = 0u64;
    let mut stack: Vec<(Node, bool)> = vec![(x, true)]; // true = up
    while let Some((v, up)) = stack.pop() {
        let seen = if up { &mut seen_up } else { &mut seen_down };
        if *seen & (1 << v) != 0 {
            continue;
        }
        *seen |= 1 << v;
        if v == y {
            return true;
        }
        let in_z = z_mask & (1 << v) != 0;
        if up && !in_z {
            for p in Bits(parents[v]) {
                stack.push((p, true));
            }
            for c in Bits(children[v]) {
                stack.push((c, false));
            }
        } else if !up {
            if !in_z {
                for c in Bits(children[v]) {
                    stack.push((c, false));
                }
            }
            if an_z & (1 << v) != 0 {
                for p in Bits(parents[v]) {
                    stack.push((p, true));
                }
            }
        }
    }
    false
}
