//! Simple-path enumeration over a DAG's skeleton.

use super::{mask_nodes, Dag, Node};

/// All simple `x`–`y` paths over the skeleton, lexicographic by node
/// sequence. Exponential in the worst case; meant for small graphs and as
/// the substrate for literal path-based oracles.
pub(crate) fn simple_paths(g: &Dag, x: Node, y: Node) -> Vec<Vec<Node>> {
    let mut out = Vec::new();
    let mut path = vec![x];
    let mut on_path = 1u64 << x;
    dfs(g, y, &mut path, &mut on_path, &mut out);
    out
}

fn dfs(g: &Dag, y: Node, path: &mut Vec<Node>, on_path: &mut u64, out: &mut Vec<Vec<Node>>) {
    let v = *path.last().expect("path never empty");
    if v == y {
        out.push(path.clone());
        return;
    }
    // ascending neighbor order gives lexicographic emission
    for w in mask_nodes(g.parents_mask(v) | g.children_mask(v)) {
        if *on_path & (1 << w) != 0 {
            continue;
        }
        path.push(w);
        *on_path |= 1 << w;
        dfs(g, y, path, on_path, out);
        path.pop();
        *on_path &= !(1 << w);
    }
}
