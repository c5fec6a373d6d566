//! Reader and writer for a practical subset of the BIF (Bayesian
//! Interchange Format) dialect used by the classic small discrete
//! benchmark networks.
//!
//! Supported grammar, whitespace-insensitive, with `//` and `%` line
//! comments:
//!
//! ```text
//! network <name> { [property ...;] }
//! variable <name> {
//!     type discrete [ <count> ] { <state>, ... };
//!     [property ...;]
//! }
//! probability ( <child> ) { table p1, ..., pk; }
//! probability ( <child> | <parent>, ... ) {
//!     ( <parent-state>, ... ) p1, ..., pk;
//!     ...
//! }
//! ```
//!
//! `property` lines are preserved verbatim as opaque strings and written
//! back on serialization.

use super::{BayesNet, Cpt, DataError, Variable};
use crate::graph::{Dag, Node};

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Punct(char),
    /// A raw `property ...;` payload (everything up to the semicolon).
    Property(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> DataError {
        DataError::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, DataError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                b'(' | b')' | b'{' | b'}' | b'[' | b']' | b'|' | b',' | b';' => {
                    self.bump();
                    Tok::Punct(c as char)
                }
                _ if c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'+' => {
                    let start = self.pos;
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'.' || c == b'-' || c == b'+' {
                            // Accept exponent forms like 1e-3 greedily.
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let v: f64 = text.parse().map_err(|_| DataError::Parse {
                        line,
                        col,
                        msg: format!("malformed number `{text}`"),
                    })?;
                    Tok::Number(v)
                }
                _ if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = self.pos;
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'-' {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let word =
                        std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                    if word == "property" {
                        // Swallow the raw payload up to the terminating `;`.
                        let pstart = self.pos;
                        loop {
                            match self.peek() {
                                Some(b';') => break,
                                Some(_) => {
                                    self.bump();
                                }
                                None => return Err(self.err("unterminated property line")),
                            }
                        }
                        let payload = std::str::from_utf8(&self.src[pstart..self.pos])
                            .unwrap()
                            .trim()
                            .to_string();
                        self.bump(); // the `;`
                        Tok::Property(payload)
                    } else {
                        Tok::Ident(word)
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)))
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err_here(&self, msg: impl Into<String>) -> DataError {
        let (line, col) = self.here();
        DataError::Parse { line, col, msg: msg.into() }
    }

    fn next(&mut self, what: &str) -> Result<Spanned, DataError> {
        let s = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err_here(format!("expected {what}, found end of input")))?;
        self.pos += 1;
        Ok(s)
    }

    fn expect_punct(&mut self, p: char) -> Result<(), DataError> {
        let s = self.next(&format!("`{p}`"))?;
        match s.tok {
            Tok::Punct(c) if c == p => Ok(()),
            other => Err(DataError::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected `{p}`, found {}", describe(&other)),
            }),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), DataError> {
        let s = self.next(what)?;
        match s.tok {
            Tok::Ident(w) => Ok((w, s.line, s.col)),
            other => Err(DataError::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected {what}, found {}", describe(&other)),
            }),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), DataError> {
        let (w, line, col) = self.expect_ident(&format!("`{kw}`"))?;
        if w == kw {
            Ok(())
        } else {
            Err(DataError::Parse { line, col, msg: format!("expected `{kw}`, found `{w}`") })
        }
    }

    fn expect_number(&mut self) -> Result<f64, DataError> {
        let s = self.next("a number")?;
        match s.tok {
            Tok::Number(v) => Ok(v),
            other => Err(DataError::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected a number, found {}", describe(&other)),
            }),
        }
    }

    fn at_punct(&self, p: char) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Punct(c), .. }) if *c == p)
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(w) => format!("`{w}`"),
        Tok::Number(v) => format!("number `{v}`"),
        Tok::Punct(c) => format!("`{c}`"),
        Tok::Property(_) => "a property line".into(),
    }
}

struct RawCpt {
    child: Node,
    parents: Vec<Node>,
    /// Explicit rows: parent-state combination (by state index) → values.
    rows: Vec<(Vec<usize>, Vec<f64>)>,
    line: usize,
    col: usize,
}

/// Parses the supported BIF subset into a validated [`BayesNet`].
pub fn parse_bif(text: &str) -> Result<BayesNet, DataError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };

    let mut network_name = String::from("unnamed");
    let mut properties: Vec<String> = Vec::new();
    let mut variables: Vec<Variable> = Vec::new();
    let mut raw_cpts: Vec<RawCpt> = Vec::new();

    let find_var = |variables: &[Variable], name: &str| -> Option<Node> {
        variables.iter().position(|v| v.name == name)
    };

    while p.peek().is_some() {
        let (word, line, col) = p.expect_ident("`network`, `variable` or `probability`")?;
        match word.as_str() {
            "network" => {
                network_name = p.expect_ident("a network name")?.0;
                p.expect_punct('{')?;
                while !p.at_punct('}') {
                    let s = p.next("a property line or `}`")?;
                    match s.tok {
                        Tok::Property(text) => properties.push(text),
                        other => {
                            return Err(DataError::Parse {
                                line: s.line,
                                col: s.col,
                                msg: format!(
                                    "expected a property line or `}}`, found {}",
                                    describe(&other)
                                ),
                            })
                        }
                    }
                }
                p.expect_punct('}')?;
            }
            "variable" => {
                let (name, nline, ncol) = p.expect_ident("a variable name")?;
                if find_var(&variables, &name).is_some() {
                    return Err(DataError::Parse {
                        line: nline,
                        col: ncol,
                        msg: format!("variable `{name}` declared twice"),
                    });
                }
                p.expect_punct('{')?;
                p.expect_keyword("type")?;
                p.expect_keyword("discrete")?;
                p.expect_punct('[')?;
                let count = p.expect_number()?;
                p.expect_punct(']')?;
                p.expect_punct('{')?;
                let mut states = Vec::new();
                loop {
                    states.push(p.expect_ident("a state name")?.0);
                    if p.at_punct(',') {
                        p.expect_punct(',')?;
                    } else {
                        break;
                    }
                }
                p.expect_punct('}')?;
                p.expect_punct(';')?;
                while !p.at_punct('}') {
                    let s = p.next("a property line or `}`")?;
                    match s.tok {
                        Tok::Property(_) => {} // variable-level properties are dropped
                        other => {
                            return Err(DataError::Parse {
                                line: s.line,
                                col: s.col,
                                msg: format!(
                                    "expected a property line or `}}`, found {}",
                                    describe(&other)
                                ),
                            })
                        }
                    }
                }
                p.expect_punct('}')?;
                if count != states.len() as f64 {
                    return Err(DataError::Parse {
                        line: nline,
                        col: ncol,
                        msg: format!(
                            "variable `{name}` declares {count} states but lists {}",
                            states.len()
                        ),
                    });
                }
                if states.len() < 2 {
                    return Err(DataError::Parse {
                        line: nline,
                        col: ncol,
                        msg: format!("variable `{name}` needs at least 2 states"),
                    });
                }
                variables.push(Variable { name, states });
            }
            "probability" => {
                p.expect_punct('(')?;
                let (child_name, cline, ccol) = p.expect_ident("a variable name")?;
                let child = find_var(&variables, &child_name).ok_or(DataError::Parse {
                    line: cline,
                    col: ccol,
                    msg: format!("undeclared variable `{child_name}`"),
                })?;
                let mut parents: Vec<Node> = Vec::new();
                if p.at_punct('|') {
                    p.expect_punct('|')?;
                    loop {
                        let (pname, pl, pc) = p.expect_ident("a parent variable name")?;
                        let pv = find_var(&variables, &pname).ok_or(DataError::Parse {
                            line: pl,
                            col: pc,
                            msg: format!("undeclared variable `{pname}`"),
                        })?;
                        parents.push(pv);
                        if p.at_punct(',') {
                            p.expect_punct(',')?;
                        } else {
                            break;
                        }
                    }
                }
                p.expect_punct(')')?;
                p.expect_punct('{')?;
                let mut rows: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
                while !p.at_punct('}') {
                    if parents.is_empty() {
                        p.expect_keyword("table")?;
                        let mut vals = Vec::new();
                        loop {
                            vals.push(p.expect_number()?);
                            if p.at_punct(',') {
                                p.expect_punct(',')?;
                            } else {
                                break;
                            }
                        }
                        p.expect_punct(';')?;
                        rows.push((Vec::new(), vals));
                    } else {
                        p.expect_punct('(')?;
                        let mut combo = Vec::new();
                        for (k, &pv) in parents.iter().enumerate() {
                            let (sname, sl, sc) = p.expect_ident("a parent state name")?;
                            let si = variables[pv]
                                .states
                                .iter()
                                .position(|s| *s == sname)
                                .ok_or(DataError::Parse {
                                    line: sl,
                                    col: sc,
                                    msg: format!(
                                        "variable `{}` has no state `{sname}`",
                                        variables[pv].name
                                    ),
                                })?;
                            combo.push(si);
                            if k + 1 < parents.len() {
                                p.expect_punct(',')?;
                            }
                        }
                        p.expect_punct(')')?;
                        let mut vals = Vec::new();
                        loop {
                            vals.push(p.expect_number()?);
                            if p.at_punct(',') {
                                p.expect_punct(',')?;
                            } else {
                                break;
                            }
                        }
                        p.expect_punct(';')?;
                        rows.push((combo, vals));
                    }
                }
                p.expect_punct('}')?;
                raw_cpts.push(RawCpt { child, parents, rows, line, col });
            }
            other => {
                return Err(DataError::Parse {
                    line,
                    col,
                    msg: format!(
                        "expected `network`, `variable` or `probability`, found `{other}`"
                    ),
                })
            }
        }
    }

    assemble(network_name, properties, variables, raw_cpts)
}

/// Validates raw blocks into a [`BayesNet`]: acyclic structure, one CPT per
/// variable, complete and in-range parent-state combinations, row sums.
fn assemble(
    name: String,
    properties: Vec<String>,
    variables: Vec<Variable>,
    raw_cpts: Vec<RawCpt>,
) -> Result<BayesNet, DataError> {
    let d = variables.len();
    if d == 0 {
        return Err(DataError::Parse {
            line: 1,
            col: 1,
            msg: "no variables declared".into(),
        });
    }
    let mut parents: Vec<Option<Vec<Node>>> = vec![None; d];
    let mut cpts: Vec<Option<Cpt>> = vec![None; d];
    let mut edges: Vec<(Node, Node)> = Vec::new();

    for raw in raw_cpts {
        let child = raw.child;
        let cname = &variables[child].name;
        if parents[child].is_some() {
            return Err(DataError::Parse {
                line: raw.line,
                col: raw.col,
                msg: format!("variable `{cname}` has two probability blocks"),
            });
        }
        for w in 0..raw.parents.len() {
            if raw.parents[w] == child || raw.parents[..w].contains(&raw.parents[w]) {
                return Err(DataError::Parse {
                    line: raw.line,
                    col: raw.col,
                    msg: format!("repeated or self parent in probability block of `{cname}`"),
                });
            }
        }
        let k = variables[child].states.len();
        let combos: usize = raw.parents.iter().map(|&pv| variables[pv].states.len()).product();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; combos];
        for (combo, vals) in raw.rows {
            if vals.len() != k {
                return Err(DataError::Parse {
                    line: raw.line,
                    col: raw.col,
                    msg: format!(
                        "a row for `{cname}` lists {} probabilities, needs {k}",
                        vals.len()
                    ),
                });
            }
            // Row-major index: first declared parent varies slowest.
            let mut idx = 0usize;
            for (&si, &pv) in combo.iter().zip(&raw.parents) {
                idx = idx * variables[pv].states.len() + si;
            }
            if rows[idx].is_some() {
                return Err(DataError::Parse {
                    line: raw.line,
                    col: raw.col,
                    msg: format!("duplicate parent-state row for `{cname}`"),
                });
            }
            let sum: f64 = vals.iter().sum();
            if (sum - 1.0).abs() > super::ROW_SUM_TOLERANCE || vals.iter().any(|&v| v < 0.0) {
                return Err(DataError::RowSum { variable: cname.clone(), sum });
            }
            rows[idx] = Some(vals);
        }
        let filled: Result<Vec<Vec<f64>>, DataError> = rows
            .into_iter()
            .map(|r| {
                r.ok_or(DataError::Parse {
                    line: raw.line,
                    col: raw.col,
                    msg: format!("missing parent-state rows for `{cname}`"),
                })
            })
            .collect();
        edges.extend(raw.parents.iter().map(|&pv| (pv, child)));
        parents[child] = Some(raw.parents);
        cpts[child] = Some(Cpt { rows: filled? });
    }

    for (v, cpt) in cpts.iter().enumerate() {
        if cpt.is_none() {
            return Err(DataError::Parse {
                line: 1,
                col: 1,
                msg: format!("variable `{}` has no probability block", variables[v].name),
            });
        }
    }
    let structure = Dag::new(d, edges)?; // rejects cycles
    Ok(BayesNet {
        name,
        properties,
        variables,
        structure,
        parents: parents.into_iter().map(Option::unwrap).collect(),
        cpts: cpts.into_iter().map(Option::unwrap).collect(),
    })
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

/// Renders a network back into the supported BIF subset. Feeding the output
/// to [`parse_bif`] reproduces an equal network.
pub fn to_bif(net: &BayesNet) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "network {} {{", net.name).unwrap();
    for prop in &net.properties {
        writeln!(out, "  property {prop};").unwrap();
    }
    writeln!(out, "}}").unwrap();
    for v in &net.variables {
        writeln!(out, "variable {} {{", v.name).unwrap();
        writeln!(
            out,
            "  type discrete [ {} ] {{ {} }};",
            v.states.len(),
            v.states.join(", ")
        )
        .unwrap();
        writeln!(out, "}}").unwrap();
    }
    for child in 0..net.variables.len() {
        let pars = &net.parents[child];
        let cpt = &net.cpts[child];
        if pars.is_empty() {
            writeln!(out, "probability ( {} ) {{", net.variables[child].name).unwrap();
            writeln!(out, "  table {};", join_nums(&cpt.rows[0])).unwrap();
        } else {
            let pnames: Vec<&str> =
                pars.iter().map(|&pv| net.variables[pv].name.as_str()).collect();
            writeln!(
                out,
                "probability ( {} | {} ) {{",
                net.variables[child].name,
                pnames.join(", ")
            )
            .unwrap();
            let sizes: Vec<usize> =
                pars.iter().map(|&pv| net.variables[pv].states.len()).collect();
            for (idx, row) in cpt.rows.iter().enumerate() {
                // Decode the row-major index back into state names.
                let mut rem = idx;
                let mut combo = vec![0usize; sizes.len()];
                for k in (0..sizes.len()).rev() {
                    combo[k] = rem % sizes[k];
                    rem /= sizes[k];
                }
                let snames: Vec<&str> = combo
                    .iter()
                    .zip(pars)
                    .map(|(&si, &pv)| net.variables[pv].states[si].as_str())
                    .collect();
                writeln!(out, "  ({}) {};", snames.join(", "), join_nums(row)).unwrap();
            }
        }
        writeln!(out, "}}").unwrap();
    }
    out
}

fn join_nums(vals: &[f64]) -> String {
    vals.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")
}
