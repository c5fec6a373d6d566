//! Plain-text edge lists for partially directed graphs.
//!
//! ```text
//! # optional comment
//! vars: rain, sprinkler, wet
//! rain -> wet
//! sprinkler -- wet
//! ```
//!
//! The `vars:` header fixes the variable order (index = position). When it
//! is absent, node names must be `n<index>` and the node count is inferred
//! from the largest index mentioned. Directed edges use `->`, undirected
//! `--`; blank lines and `#` comments are skipped.

use super::{GraphError, Node, Pdag};

/// Parses an edge-list document into a graph plus its variable names.
pub fn parse_edge_list(text: &str) -> Result<(Pdag, Vec<String>), GraphError> {
    let mut names: Vec<String> = Vec::new();
    let mut have_header = false;
    let mut saw_edge = false;
    let mut directed: Vec<(Node, Node)> = Vec::new();
    let mut undirected: Vec<(Node, Node)> = Vec::new();
    let mut max_index: Option<Node> = None;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(k) => raw[..k].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vars:") {
            if have_header {
                return Err(parse_err(lineno, "duplicate vars header"));
            }
            if saw_edge {
                return Err(parse_err(lineno, "vars header must precede edges"));
            }
            have_header = true;
            for name in rest.split(',') {
                let name = name.trim();
                check_name(lineno, name)?;
                if names.iter().any(|n| n == name) {
                    return Err(parse_err(lineno, &format!("duplicate variable `{name}`")));
                }
                names.push(name.to_string());
            }
            if names.is_empty() {
                return Err(parse_err(lineno, "vars header names no variables"));
            }
            continue;
        }
        let (lhs, rhs, is_directed) = if let Some((l, r)) = line.split_once("->") {
            (l, r, true)
        } else if let Some((l, r)) = line.split_once("--") {
            (l, r, false)
        } else {
            return Err(parse_err(lineno, "expected `a -> b` or `a -- b`"));
        };
        saw_edge = true;
        let u = resolve(lineno, lhs.trim(), have_header, &names)?;
        let v = resolve(lineno, rhs.trim(), have_header, &names)?;
        max_index = Some(max_index.map_or(u.max(v), |m| m.max(u).max(v)));
        if is_directed {
            directed.push((u, v));
        } else {
            undirected.push((u, v));
        }
    }

    let d = if have_header {
        names.len()
    } else {
        match max_index {
            Some(m) => m + 1,
            None => return Err(parse_err(0, "empty document; need a vars header or edges")),
        }
    };
    if !have_header {
        names = (0..d).map(|i| format!("n{i}")).collect();
    }
    let pdag = Pdag::new(d, directed, undirected)?;
    Ok((pdag, names))
}

/// Renders a graph in the format accepted by [`parse_edge_list`]: a `vars:`
/// header, then sorted directed edges, then sorted undirected edges.
///
/// # Panics
///
/// When `names` is given with a length other than `p.d()`.
pub fn format_edge_list(p: &Pdag, names: Option<&[String]>) -> String {
    let default: Vec<String>;
    let names = match names {
        Some(n) => {
            assert_eq!(n.len(), p.d(), "need one name per node");
            n
        }
        None => {
            default = (0..p.d()).map(|i| format!("n{i}")).collect();
            &default
        }
    };
    let mut out = format!("vars: {}\n", names.join(", "));
    for &(u, v) in p.directed() {
        out.push_str(&format!("{} -> {}\n", names[u], names[v]));
    }
    for &(u, v) in p.undirected() {
        out.push_str(&format!("{} -- {}\n", names[u], names[v]));
    }
    out
}

fn parse_err(line: usize, msg: &str) -> GraphError {
    GraphError::Parse { line, msg: msg.to_string() }
}

fn check_name(lineno: usize, name: &str) -> Result<(), GraphError> {
    let ok = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.starts_with(|c: char| c.is_ascii_digit());
    if ok {
        Ok(())
    } else {
        Err(parse_err(
            lineno,
            &format!("invalid variable name `{name}` (letters, digits, `_`; no leading digit)"),
        ))
    }
}

fn resolve(lineno: usize, token: &str, have_header: bool, names: &[String]) -> Result<Node, GraphError> {
    if have_header {
        names
            .iter()
            .position(|n| n == token)
            .ok_or_else(|| parse_err(lineno, &format!("unknown variable `{token}`")))
    } else {
        token
            .strip_prefix('n')
            .and_then(|s| s.parse::<Node>().ok())
            .ok_or_else(|| parse_err(lineno, &format!("expected `n<index>` without a vars header, got `{token}`")))
    }
}
