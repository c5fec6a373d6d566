//! A small assumption-based argumentation engine used as a desk-scale ground
//! truth: frameworks over named atoms, forward-chaining derivability, attack
//! computation, and exhaustive enumeration of conflict-free, admissible,
//! complete, grounded, preferred and stable assumption sets.
//!
//! Frameworks may be *non-flat*: rules are allowed to derive assumptions, in
//! which case every candidate extension is additionally required to be closed
//! (it already contains everything it derives), and defense is measured
//! against closed attackers. Flat frameworks are unaffected by either rule
//! because there every assumption set is closed.
//!
//! Enumeration is a plain subset sweep, deliberately unoptimized beyond bit
//! masks and rule counters; its job is to be obviously faithful to the
//! definitions so the search-based solver can be validated against it. The
//! assumption count is capped (24 by default) for exactly that reason.

mod causal;
mod setaf;

pub use causal::{
    arr_name, build_causal_abaf, build_graph_abaf, collider_trees, indep_name, noe_name,
    CausalAba, ColliderTree, MAX_CAUSAL_D,
};
pub use setaf::Setaf;

use crate::graph::GraphError;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Index of an interned atom inside one framework.
type AtomId = usize;

/// Hard ceiling on the assumption count for subset enumeration; extensions
/// are manipulated as `u32` masks and the sweep materializes two words per
/// subset.
pub const ENUM_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbaError {
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("atom {0:?} is not an assumption")]
    NotAnAssumption(String),
    #[error("assumption {0:?} declared twice")]
    DuplicateAssumption(String),
    #[error("atom {contrary:?} is already the contrary of {assumption:?}")]
    ContraryReuse { assumption: String, contrary: String },
    #[error("assumption {0:?} cannot be its own contrary")]
    SelfContrary(String),
    #[error(
        "invalid atom name {0:?}: names are nonempty, free of whitespace, '#', '<' and '>', \
         with balanced parentheses; ',' and '=' may appear only inside parentheses"
    )]
    BadName(String),
    #[error("{n} assumptions exceed the enumeration bound of {max}")]
    TooManyAssumptions { n: usize, max: usize },
    #[error("{d} variables exceed the causal-framework bound of {max}")]
    CapacityExceeded { d: usize, max: usize },
    #[error("SETAF form requires nonempty attacker sets, but {0:?} is attacked by the empty set")]
    EmptySetafAttacker(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A set of assumption names, ordered lexicographically.
///
/// The ordering (and the derived `Ord`) makes extension lists comparable and
/// lets enumeration output stay deterministic regardless of the order in
/// which assumptions were declared.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct AssumptionSet(BTreeSet<String>);

impl AssumptionSet {
    pub fn new() -> Self {
        AssumptionSet::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AssumptionSet(names.into_iter().map(Into::into).collect())
    }

    pub fn insert(&mut self, name: impl Into<String>) {
        self.0.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// True iff every member of `self` is a member of `other`.
    pub fn is_subset(&self, other: &AssumptionSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl fmt::Display for AssumptionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, name) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{name}")?;
        }
        write!(f, "}}")
    }
}

impl<S: Into<String>> FromIterator<S> for AssumptionSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        AssumptionSet::from_names(iter)
    }
}

/// The extension semantics the enumerator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    ConflictFree,
    Admissible,
    Complete,
    Grounded,
    Preferred,
    Stable,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Semantics::ConflictFree => "conflict-free",
            Semantics::Admissible => "admissible",
            Semantics::Complete => "complete",
            Semantics::Grounded => "grounded",
            Semantics::Preferred => "preferred",
            Semantics::Stable => "stable",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Semantics {
    type Err = String;

    /// Accepts the full names and the usual short forms (`cf`, `ad`, `co`,
    /// `gr`, `pr`, `stb`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conflict-free" | "cf" => Ok(Semantics::ConflictFree),
            "admissible" | "ad" => Ok(Semantics::Admissible),
            "complete" | "co" => Ok(Semantics::Complete),
            "grounded" | "gr" => Ok(Semantics::Grounded),
            "preferred" | "pr" => Ok(Semantics::Preferred),
            "stable" | "stb" => Ok(Semantics::Stable),
            other => Err(format!(
                "unknown semantics {other:?}; expected one of conflict-free, admissible, \
                 complete, grounded, preferred, stable"
            )),
        }
    }
}

/// Enumeration limits. `max_assumptions` may be lowered below the built-in
/// [`ENUM_CAP`]; values above it are clamped.
#[derive(Debug, Clone)]
pub struct EnumLimits {
    pub max_assumptions: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits { max_assumptions: ENUM_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Rule {
    head: AtomId,
    /// Sorted and deduplicated.
    body: Vec<AtomId>,
}

/// An assumption-based argumentation framework over interned atom names.
///
/// Assumptions carry exactly one contrary each, and distinct assumptions have
/// distinct contraries. Rules may derive any atom, including assumptions;
/// frameworks where no rule head is an assumption report [`is_flat`]
/// (`AbaFramework::is_flat`) and behave classically.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbaFramework {
    names: Vec<String>,
    index: BTreeMap<String, AtomId>,
    /// Slot order = declaration order; `assumptions[k]` is the atom id.
    assumptions: Vec<AtomId>,
    /// `contraries[k]` is the contrary atom of assumption slot `k`.
    contraries: Vec<AtomId>,
    /// Atom id → assumption slot, if the atom is an assumption.
    slot_of: BTreeMap<AtomId, usize>,
    /// Atom id → slot whose contrary it is, if any.
    contrary_slot_of: BTreeMap<AtomId, usize>,
    rules: Vec<Rule>,
}

impl AbaFramework {
    pub fn new() -> Self {
        AbaFramework::default()
    }

    /// Number of interned atoms (assumptions, contraries and rule atoms).
    pub fn atom_count(&self) -> usize {
        self.names.len()
    }

    pub fn assumption_count(&self) -> usize {
        self.assumptions.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Assumption names in declaration order.
    pub fn assumption_names(&self) -> impl Iterator<Item = &str> {
        self.assumptions.iter().map(|&a| self.names[a].as_str())
    }

    pub fn is_assumption(&self, name: &str) -> bool {
        self.index.get(name).is_some_and(|id| self.slot_of.contains_key(id))
    }

    /// The contrary of `name`.
    pub fn contrary(&self, name: &str) -> Result<&str, AbaError> {
        let id = self.lookup(name)?;
        let slot = self
            .slot_of
            .get(&id)
            .ok_or_else(|| AbaError::NotAnAssumption(name.to_string()))?;
        Ok(self.names[self.contraries[*slot]].as_str())
    }

    /// Rules as `(head, body)` name pairs, in insertion order.
    pub fn rules_named(&self) -> Vec<(String, Vec<String>)> {
        self.rules
            .iter()
            .map(|r| {
                (
                    self.names[r.head].clone(),
                    r.body.iter().map(|&a| self.names[a].clone()).collect(),
                )
            })
            .collect()
    }

    /// Declares an assumption together with its contrary atom.
    pub fn add_assumption(&mut self, name: &str, contrary: &str) -> Result<(), AbaError> {
        if name == contrary {
            return Err(AbaError::SelfContrary(name.to_string()));
        }
        let id = self.intern(name)?;
        if self.slot_of.contains_key(&id) {
            return Err(AbaError::DuplicateAssumption(name.to_string()));
        }
        let cid = self.intern(contrary)?;
        if self.contrary_slot_of.contains_key(&cid) {
            return Err(AbaError::ContraryReuse {
                assumption: name.to_string(),
                contrary: contrary.to_string(),
            });
        }
        let slot = self.assumptions.len();
        self.assumptions.push(id);
        self.contraries.push(cid);
        self.slot_of.insert(id, slot);
        self.contrary_slot_of.insert(cid, slot);
        Ok(())
    }

    /// Adds the rule `head <- body`. Bodies are sorted and deduplicated and
    /// exact duplicate rules are dropped, so insertion is idempotent.
    pub fn add_rule(&mut self, head: &str, body: &[&str]) -> Result<(), AbaError> {
        let head = self.intern(head)?;
        let mut atoms = Vec::with_capacity(body.len());
        for name in body {
            atoms.push(self.intern(name)?);
        }
        atoms.sort_unstable();
        atoms.dedup();
        let rule = Rule { head, body: atoms };
        if !self.rules.contains(&rule) {
            self.rules.push(rule);
        }
        Ok(())
    }

    /// A framework is flat iff no rule derives an assumption; every set of
    /// assumptions is then closed.
    pub fn is_flat(&self) -> bool {
        self.rules.iter().all(|r| !self.slot_of.contains_key(&r.head))
    }

    /// True iff `q` is derivable from some subset of `s` by forward chaining
    /// over the rules (equivalently: `q` has a proof tree with leaves in
    /// `s ∪ {⊤}`).
    pub fn derives(&self, s: &AssumptionSet, q: &str) -> Result<bool, AbaError> {
        let q = self.lookup(q)?;
        let seed = self.resolve(s)?;
        let mut engine = Engine::new(self);
        engine.close_seed(&seed);
        Ok(engine.is_derived(q))
    }

    /// True iff `s` derives the contrary of some member of `t`.
    pub fn attacks(&self, s: &AssumptionSet, t: &AssumptionSet) -> Result<bool, AbaError> {
        let seed = self.resolve(s)?;
        let mut engine = Engine::new(self);
        engine.close_seed(&seed);
        for name in t.iter() {
            let id = self.lookup(name)?;
            let slot = self
                .slot_of
                .get(&id)
                .ok_or_else(|| AbaError::NotAnAssumption(name.to_string()))?;
            if engine.is_derived(self.contraries[*slot]) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The assumptions derivable from `s` (always a superset of `s`).
    pub fn closure(&self, s: &AssumptionSet) -> Result<AssumptionSet, AbaError> {
        let seed = self.resolve(s)?;
        let mut engine = Engine::new(self);
        engine.close_seed(&seed);
        let mut out = AssumptionSet::new();
        for &atom in &self.assumptions {
            if engine.is_derived(atom) {
                out.insert(self.names[atom].clone());
            }
        }
        Ok(out)
    }

    /// True iff `s` already contains every assumption it derives.
    pub fn is_closed(&self, s: &AssumptionSet) -> Result<bool, AbaError> {
        Ok(&self.closure(s)? == s)
    }

    /// Enumerates all extensions of the requested semantics by sweeping every
    /// assumption subset.
    ///
    /// Candidate sets are always required to be closed; on flat frameworks
    /// this is vacuous, on non-flat ones it implements the closed-set reading
    /// of the semantics (defense is measured against closed attackers).
    /// Grounded (resp. preferred) returns the ⊆-minimal (resp. ⊆-maximal)
    /// complete sets, which on non-flat inputs may be empty or hold several
    /// members. The result is sorted lexicographically by member names.
    pub fn semantics_enumerate(
        &self,
        sem: Semantics,
        limits: &EnumLimits,
    ) -> Result<Vec<AssumptionSet>, AbaError> {
        let n = self.assumptions.len();
        let max = limits.max_assumptions.min(ENUM_CAP);
        if n > max {
            return Err(AbaError::TooManyAssumptions { n, max });
        }
        let size = 1usize << n;
        let full: u32 = (size - 1) as u32;

        // One closure per subset: the assumption part of the closure and the
        // set of assumptions whose contrary the subset derives.
        let mut clos = vec![0u32; size];
        let mut att = vec![0u32; size];
        let mut engine = Engine::new(self);
        for mask in 0..size {
            let (c, a) = engine.close_mask(mask as u32);
            clos[mask] = c;
            att[mask] = a;
        }

        // Minimal attacker seeds per assumption: masks m deriving the
        // contrary of `a` such that no single-element removal still does.
        // Derivability is monotone, so this is true minimality.
        let mut seeds: Vec<Vec<u32>> = vec![Vec::new(); n.max(1)];
        for mask in 0..size {
            let mut hits = att[mask];
            while hits != 0 {
                let a = hits.trailing_zeros() as usize;
                hits &= hits - 1;
                let mut members = mask as u32;
                let mut minimal = true;
                while members != 0 {
                    let bit = members & members.wrapping_neg();
                    members ^= bit;
                    if att[(mask as u32 ^ bit) as usize] & (1 << a) != 0 {
                        minimal = false;
                        break;
                    }
                }
                if minimal {
                    seeds[a].push(mask as u32);
                }
            }
        }

        // `s` defends assumption `a` iff it counter-attacks the closure of
        // every minimal attacker seed of `a` (any closed attacker contains
        // one such closure).
        let defends_assumption = |s_att: u32, a: usize| -> bool {
            seeds[a].iter().all(|&seed| s_att & clos[seed as usize] != 0)
        };
        let defends_set = |s_att: u32, t: u32| -> bool {
            let mut bits = t;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if !defends_assumption(s_att, b) {
                    return false;
                }
            }
            true
        };

        let closed = |m: u32| clos[m as usize] == m;
        let conflict_free = |m: u32| att[m as usize] & m == 0;
        let admissible = |m: u32| closed(m) && conflict_free(m) && defends_set(att[m as usize], m);
        // Complete: admissible and no defended closed set reaches outside;
        // it is enough to test the closure of each missing singleton.
        let complete = |m: u32| {
            if !admissible(m) {
                return false;
            }
            let mut outside = full & !m;
            while outside != 0 {
                let a = outside.trailing_zeros() as usize;
                outside &= outside - 1;
                if defends_set(att[m as usize], clos[1 << a]) {
                    return false;
                }
            }
            true
        };

        let mut picked: Vec<u32> = Vec::new();
        match sem {
            Semantics::ConflictFree => {
                for m in 0..=full {
                    if closed(m) && conflict_free(m) {
                        picked.push(m);
                    }
                }
            }
            Semantics::Admissible => {
                for m in 0..=full {
                    if admissible(m) {
                        picked.push(m);
                    }
                }
            }
            Semantics::Complete => {
                for m in 0..=full {
                    if complete(m) {
                        picked.push(m);
                    }
                }
            }
            Semantics::Grounded | Semantics::Preferred => {
                let all: Vec<u32> = (0..=full).filter(|&m| complete(m)).collect();
                for &m in &all {
                    let extreme = match sem {
                        Semantics::Grounded => all.iter().all(|&o| o == m || o & m != o),
                        _ => all.iter().all(|&o| o == m || o | m != o),
                    };
                    if extreme {
                        picked.push(m);
                    }
                }
            }
            Semantics::Stable => {
                for m in 0..=full {
                    if closed(m) && conflict_free(m) && m | att[m as usize] == full {
                        picked.push(m);
                    }
                }
            }
        }

        let mut out: Vec<AssumptionSet> = picked.iter().map(|&m| self.set_of_mask(m)).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Serializes the framework: one `contrary(a)=c` line per assumption in
    /// declaration order, then one `head <- b1,b2` line per rule in insertion
    /// order (`head <-` for empty bodies).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (slot, &atom) in self.assumptions.iter().enumerate() {
            out.push_str(&format!(
                "contrary({})={}\n",
                self.names[atom], self.names[self.contraries[slot]]
            ));
        }
        for rule in &self.rules {
            out.push_str(&self.names[rule.head]);
            out.push_str(" <-");
            for (i, &atom) in rule.body.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { "," });
                out.push_str(&self.names[atom]);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_text`](AbaFramework::to_text) format. Blank lines and
    /// `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<AbaFramework, AbaError> {
        let mut fw = AbaFramework::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let fail = |msg: String| AbaError::Parse { line, msg };
            let trimmed = match raw.find('#') {
                Some(pos) => raw[..pos].trim(),
                None => raw.trim(),
            };
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("contrary(") {
                let close = matching_paren(rest)
                    .ok_or_else(|| fail("unbalanced parentheses in contrary(...)".into()))?;
                let name = &rest[..close];
                let tail = rest[close + 1..].trim_start();
                let contrary = tail
                    .strip_prefix('=')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .ok_or_else(|| fail("expected contrary(a)=c".into()))?;
                fw.add_assumption(name, contrary).map_err(|e| fail(e.to_string()))?;
            } else if let Some(pos) = trimmed.find("<-") {
                let head = trimmed[..pos].trim();
                let body: Vec<&str> = split_atoms(trimmed[pos + 2..].trim());
                fw.add_rule(head, &body).map_err(|e| fail(e.to_string()))?;
            } else {
                return Err(fail("expected contrary(a)=c or head <- b1,b2".into()));
            }
        }
        Ok(fw)
    }

    fn set_of_mask(&self, mask: u32) -> AssumptionSet {
        let mut out = AssumptionSet::new();
        let mut bits = mask;
        while bits != 0 {
            let slot = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out.insert(self.names[self.assumptions[slot]].clone());
        }
        out
    }

    fn lookup(&self, name: &str) -> Result<AtomId, AbaError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| AbaError::UnknownAtom(name.to_string()))
    }

    fn resolve(&self, s: &AssumptionSet) -> Result<Vec<AtomId>, AbaError> {
        let mut out = Vec::with_capacity(s.len());
        for name in s.iter() {
            let id = self.lookup(name)?;
            if !self.slot_of.contains_key(&id) {
                return Err(AbaError::NotAnAssumption(name.to_string()));
            }
            out.push(id);
        }
        Ok(out)
    }

    fn intern(&mut self, name: &str) -> Result<AtomId, AbaError> {
        if let Some(&id) = self.index.get(name) {
            return Ok(id);
        }
        validate_name(name)?;
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }
}

/// Validates an atom name for round-trippable serialization.
fn validate_name(name: &str) -> Result<(), AbaError> {
    let bad = || AbaError::BadName(name.to_string());
    // A name that itself starts with `contrary(` would be misread on reload.
    if name.is_empty() || name.starts_with("contrary(") {
        return Err(bad());
    }
    let mut depth: i32 = 0;
    for ch in name.chars() {
        if ch.is_whitespace() || ch == '#' || ch == '<' || ch == '>' {
            return Err(bad());
        }
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(bad());
                }
            }
            ',' | '=' if depth == 0 => return Err(bad()),
            _ => {}
        }
    }
    if depth != 0 {
        return Err(bad());
    }
    Ok(())
}

/// Index of the `)` closing the implicit `(` that precedes `rest`, or `None`.
fn matching_paren(rest: &str) -> Option<usize> {
    let mut depth = 1i32;
    for (i, ch) in rest.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Splits a rule body on commas at parenthesis depth zero, so atom names such
/// as `arr(0,1)` survive intact.
fn split_atoms(body: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                let token = body[start..i].trim();
                if !token.is_empty() {
                    out.push(token);
                }
                start = i + 1;
            }
            _ => {}
        }
    }
    let token = body[start..].trim();
    if !token.is_empty() {
        out.push(token);
    }
    out
}

/// Forward-chaining closure engine: rule counters plus an occurrence list in
/// CSR form, with stamped scratch arrays so repeated closures avoid clearing.
pub(crate) struct Engine {
    heads: Vec<u32>,
    body_len: Vec<u32>,
    empty_heads: Vec<u32>,
    occ_start: Vec<u32>,
    occ_rules: Vec<u32>,
    asm_atom: Vec<u32>,
    slot_of_atom: Vec<i32>,
    contrary_slot_of_atom: Vec<i32>,
    remaining: Vec<u32>,
    rule_stamp: Vec<u32>,
    atom_stamp: Vec<u32>,
    stamp: u32,
    stack: Vec<u32>,
    cur_clos: u32,
    cur_att: u32,
}

impl Engine {
    pub(crate) fn new(fw: &AbaFramework) -> Engine {
        let n_atoms = fw.names.len();
        let n_rules = fw.rules.len();
        let mut heads = Vec::with_capacity(n_rules);
        let mut body_len = Vec::with_capacity(n_rules);
        let mut empty_heads = Vec::new();
        let mut counts = vec![0u32; n_atoms];
        for rule in &fw.rules {
            heads.push(rule.head as u32);
            body_len.push(rule.body.len() as u32);
            if rule.body.is_empty() {
                empty_heads.push(rule.head as u32);
            }
            for &atom in &rule.body {
                counts[atom] += 1;
            }
        }
        let mut occ_start = vec![0u32; n_atoms + 1];
        for atom in 0..n_atoms {
            occ_start[atom + 1] = occ_start[atom] + counts[atom];
        }
        let mut cursor = occ_start.clone();
        let mut occ_rules = vec![0u32; occ_start[n_atoms] as usize];
        for (ri, rule) in fw.rules.iter().enumerate() {
            for &atom in &rule.body {
                occ_rules[cursor[atom] as usize] = ri as u32;
                cursor[atom] += 1;
            }
        }
        let mut slot_of_atom = vec![-1i32; n_atoms];
        let mut contrary_slot_of_atom = vec![-1i32; n_atoms];
        for (slot, (&atom, &contrary)) in
            fw.assumptions.iter().zip(fw.contraries.iter()).enumerate()
        {
            slot_of_atom[atom] = slot as i32;
            contrary_slot_of_atom[contrary] = slot as i32;
        }
        Engine {
            heads,
            body_len,
            empty_heads,
            occ_start,
            occ_rules,
            asm_atom: fw.assumptions.iter().map(|&a| a as u32).collect(),
            slot_of_atom,
            contrary_slot_of_atom,
            remaining: vec![0; n_rules],
            rule_stamp: vec![0; n_rules],
            atom_stamp: vec![0; n_atoms],
            stamp: 0,
            stack: Vec::with_capacity(n_atoms),
            cur_clos: 0,
            cur_att: 0,
        }
    }

    /// Closes the subset of assumptions given as a slot mask and returns the
    /// assumption part of the closure plus the attacked-slot mask. Only valid
    /// for frameworks with at most 32 assumption slots.
    pub(crate) fn close_mask(&mut self, mask: u32) -> (u32, u32) {
        self.begin();
        let mut bits = mask;
        while bits != 0 {
            let slot = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            self.mark(self.asm_atom[slot]);
        }
        self.run();
        (self.cur_clos, self.cur_att)
    }

    /// Closes an arbitrary seed of atoms; query the outcome with
    /// [`is_derived`](Engine::is_derived).
    pub(crate) fn close_seed(&mut self, seed: &[AtomId]) {
        self.begin();
        for &atom in seed {
            self.mark(atom as u32);
        }
        self.run();
    }

    pub(crate) fn is_derived(&self, atom: AtomId) -> bool {
        self.atom_stamp[atom] == self.stamp
    }

    fn begin(&mut self) {
        if self.stamp == u32::MAX {
            self.rule_stamp.fill(0);
            self.atom_stamp.fill(0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stack.clear();
        self.cur_clos = 0;
        self.cur_att = 0;
        let empties = std::mem::take(&mut self.empty_heads);
        for &head in &empties {
            self.mark(head);
        }
        self.empty_heads = empties;
    }

    fn run(&mut self) {
        while let Some(atom) = self.stack.pop() {
            let lo = self.occ_start[atom as usize] as usize;
            let hi = self.occ_start[atom as usize + 1] as usize;
            for i in lo..hi {
                let ri = self.occ_rules[i] as usize;
                if self.rule_stamp[ri] != self.stamp {
                    self.rule_stamp[ri] = self.stamp;
                    self.remaining[ri] = self.body_len[ri];
                }
                self.remaining[ri] -= 1;
                if self.remaining[ri] == 0 {
                    self.mark(self.heads[ri]);
                }
            }
        }
    }

    fn mark(&mut self, atom: u32) {
        let a = atom as usize;
        if self.atom_stamp[a] == self.stamp {
            return;
        }
        self.atom_stamp[a] = self.stamp;
        self.stack.push(atom);
        let slot = self.slot_of_atom[a];
        if slot >= 0 && (slot as usize) < 32 {
            self.cur_clos |= 1 << slot;
        }
        let cslot = self.contrary_slot_of_atom[a];
        if cslot >= 0 && (cslot as usize) < 32 {
            self.cur_att |= 1 << cslot;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// The worked SETAF example: assumptions a, b, c with contraries s, p, q
    /// and rules (p <- a,c), (s <- c).
    fn example2() -> AbaFramework {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "s").unwrap();
        fw.add_assumption("b", "p").unwrap();
        fw.add_assumption("c", "q").unwrap();
        fw.add_rule("p", &["a", "c"]).unwrap();
        fw.add_rule("s", &["c"]).unwrap();
        fw
    }

    fn names(sets: &[AssumptionSet]) -> Vec<String> {
        sets.iter().map(|s| s.to_string()).collect()
    }

    fn set(names: &[&str]) -> AssumptionSet {
        AssumptionSet::from_names(names.iter().copied())
    }

    #[test]
    fn derivability_on_the_worked_example() {
        let fw = example2();
        assert!(fw.derives(&set(&["a", "c"]), "p").unwrap());
        assert!(fw.derives(&set(&["c"]), "s").unwrap());
        assert!(!fw.derives(&set(&["a"]), "p").unwrap());
        assert!(!fw.derives(&set(&[]), "q").unwrap());
        // Assumptions derive themselves.
        assert!(fw.derives(&set(&["b"]), "b").unwrap());
    }

    #[test]
    fn attacks_on_the_worked_example() {
        let fw = example2();
        assert!(fw.attacks(&set(&["a", "c"]), &set(&["b"])).unwrap());
        assert!(fw.attacks(&set(&["c"]), &set(&["a"])).unwrap());
        assert!(!fw.attacks(&set(&["a"]), &set(&["b"])).unwrap());
        assert!(!fw.attacks(&set(&[]), &set(&["a", "b", "c"])).unwrap());
        // Supersets of an attacker still attack.
        assert!(fw.attacks(&set(&["a", "b", "c"]), &set(&["b"])).unwrap());
        assert!(fw.is_flat());
    }

    #[test]
    fn empty_body_rules_fire_unconditionally() {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "ca").unwrap();
        fw.add_rule("p", &[]).unwrap();
        fw.add_rule("ca", &["p"]).unwrap();
        assert!(fw.derives(&set(&[]), "p").unwrap());
        assert!(fw.derives(&set(&[]), "ca").unwrap());
        // The empty set now attacks {a}, so no extension contains a.
        let stable = fw.semantics_enumerate(Semantics::Stable, &EnumLimits::default()).unwrap();
        assert_eq!(names(&stable), ["{}"]);
    }

    #[test]
    fn closure_and_flatness_on_a_non_flat_toy() {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "ca").unwrap();
        fw.add_assumption("b", "cb").unwrap();
        fw.add_rule("a", &["b"]).unwrap();
        assert!(!fw.is_flat());
        assert!(fw.is_closed(&set(&["a"])).unwrap());
        assert!(!fw.is_closed(&set(&["b"])).unwrap());
        assert_eq!(fw.closure(&set(&["b"])).unwrap(), set(&["a", "b"]));
        // Non-closed sets are filtered out of every semantics.
        let cf = fw.semantics_enumerate(Semantics::ConflictFree, &EnumLimits::default()).unwrap();
        assert_eq!(names(&cf), ["{}", "{a}", "{a,b}"]);
    }

    #[test]
    fn chain_attack_semantics() {
        // a attacks b attacks c: the classic reinstatement chain.
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "ca").unwrap();
        fw.add_assumption("b", "cb").unwrap();
        fw.add_assumption("c", "cc").unwrap();
        fw.add_rule("cb", &["a"]).unwrap();
        fw.add_rule("cc", &["b"]).unwrap();
        let limits = EnumLimits::default();
        let enumerate = |sem| names(&fw.semantics_enumerate(sem, &limits).unwrap());
        assert_eq!(enumerate(Semantics::Admissible), ["{}", "{a}", "{a,c}"]);
        assert_eq!(enumerate(Semantics::Complete), ["{a,c}"]);
        assert_eq!(enumerate(Semantics::Grounded), ["{a,c}"]);
        assert_eq!(enumerate(Semantics::Preferred), ["{a,c}"]);
        assert_eq!(enumerate(Semantics::Stable), ["{a,c}"]);
    }

    #[test]
    fn mutual_attack_semantics() {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "ca").unwrap();
        fw.add_assumption("b", "cb").unwrap();
        fw.add_rule("cb", &["a"]).unwrap();
        fw.add_rule("ca", &["b"]).unwrap();
        let limits = EnumLimits::default();
        let enumerate = |sem| names(&fw.semantics_enumerate(sem, &limits).unwrap());
        assert_eq!(enumerate(Semantics::Complete), ["{}", "{a}", "{b}"]);
        assert_eq!(enumerate(Semantics::Grounded), ["{}"]);
        assert_eq!(enumerate(Semantics::Preferred), ["{a}", "{b}"]);
        assert_eq!(enumerate(Semantics::Stable), ["{a}", "{b}"]);
    }

    #[test]
    fn worked_example_semantics() {
        // Attacks: {a,c} -> b and {c} -> a. c is never attacked.
        let fw = example2();
        let limits = EnumLimits::default();
        let enumerate = |sem| names(&fw.semantics_enumerate(sem, &limits).unwrap());
        // c is unattacked and attacks a; c alone already counters every
        // attacker of b (each one contains a), so b is reinstated.
        assert_eq!(enumerate(Semantics::Admissible), ["{}", "{b,c}", "{c}"]);
        assert_eq!(enumerate(Semantics::Grounded), ["{b,c}"]);
        assert_eq!(enumerate(Semantics::Preferred), ["{b,c}"]);
        assert_eq!(enumerate(Semantics::Stable), ["{b,c}"]);
    }

    #[test]
    fn enumeration_respects_the_assumption_bound() {
        let mut fw = AbaFramework::new();
        for i in 0..25 {
            fw.add_assumption(&format!("a{i}"), &format!("c{i}")).unwrap();
        }
        let err = fw.semantics_enumerate(Semantics::Stable, &EnumLimits::default()).unwrap_err();
        assert_eq!(err, AbaError::TooManyAssumptions { n: 25, max: 24 });
        let tight = EnumLimits { max_assumptions: 3 };
        let mut small = AbaFramework::new();
        for i in 0..4 {
            small.add_assumption(&format!("a{i}"), &format!("c{i}")).unwrap();
        }
        let err = small.semantics_enumerate(Semantics::Stable, &tight).unwrap_err();
        assert_eq!(err, AbaError::TooManyAssumptions { n: 4, max: 3 });
    }

    #[test]
    fn unknown_and_non_assumption_atoms_are_rejected() {
        let fw = example2();
        assert_eq!(fw.derives(&set(&["a"]), "zz").unwrap_err(), AbaError::UnknownAtom("zz".into()));
        assert_eq!(
            fw.attacks(&set(&["p"]), &set(&["a"])).unwrap_err(),
            AbaError::NotAnAssumption("p".into())
        );
        assert_eq!(fw.contrary("b").unwrap(), "p");
        assert_eq!(fw.contrary("p").unwrap_err(), AbaError::NotAnAssumption("p".into()));
    }

    #[test]
    fn declaration_errors_are_reported() {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "ca").unwrap();
        assert_eq!(
            fw.add_assumption("a", "other").unwrap_err(),
            AbaError::DuplicateAssumption("a".into())
        );
        assert_eq!(
            fw.add_assumption("b", "ca").unwrap_err(),
            AbaError::ContraryReuse { assumption: "b".into(), contrary: "ca".into() }
        );
        assert_eq!(fw.add_assumption("x", "x").unwrap_err(), AbaError::SelfContrary("x".into()));
        assert_eq!(fw.add_rule("bad name", &[]).unwrap_err(), AbaError::BadName("bad name".into()));
        assert_eq!(fw.add_rule("a,b", &[]).unwrap_err(), AbaError::BadName("a,b".into()));
        assert_eq!(fw.add_rule("f(", &[]).unwrap_err(), AbaError::BadName("f(".into()));
        // Names with commas inside parentheses are fine.
        fw.add_rule("arr(0,1)", &["noe(0,1)"]).unwrap();
    }

    #[test]
    fn text_dump_round_trips() {
        let mut fw = AbaFramework::new();
        fw.add_assumption("arr(0,1)", "-arr(0,1)").unwrap();
        fw.add_assumption("noe(0,1)", "-noe(0,1)").unwrap();
        fw.add_rule("-arr(0,1)", &["noe(0,1)"]).unwrap();
        fw.add_rule("-noe(0,1)", &["e(0,1)"]).unwrap();
        fw.add_rule("e(0,1)", &["arr(0,1)"]).unwrap();
        fw.add_rule("fact", &[]).unwrap();
        let text = fw.to_text();
        let back = AbaFramework::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back, fw);
    }

    #[test]
    fn text_parse_reports_line_numbers() {
        let err = AbaFramework::from_text("contrary(a)=ca\nnonsense line\n").unwrap_err();
        match err {
            AbaError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = AbaFramework::from_text("contrary(a=ca\n").unwrap_err();
        assert!(matches!(err, AbaError::Parse { line: 1, .. }));
        // Comments and blank lines are skipped.
        let fw = AbaFramework::from_text("# header\n\ncontrary(a)=ca # trailing\n").unwrap();
        assert_eq!(fw.assumption_count(), 1);
    }

    #[test]
    fn semantics_parse_from_strings() {
        for (text, sem) in [
            ("conflict-free", Semantics::ConflictFree),
            ("cf", Semantics::ConflictFree),
            ("admissible", Semantics::Admissible),
            ("complete", Semantics::Complete),
            ("gr", Semantics::Grounded),
            ("preferred", Semantics::Preferred),
            ("stb", Semantics::Stable),
        ] {
            assert_eq!(text.parse::<Semantics>().unwrap(), sem);
        }
        assert!("stage".parse::<Semantics>().is_err());
        assert_eq!(Semantics::Stable.to_string(), "stable");
    }

    /// Strategy: a random flat framework over up to five assumptions, with
    /// rules deriving contraries from assumption subsets.
    fn flat_framework() -> impl Strategy<Value = AbaFramework> {
        (2usize..=5, proptest::collection::vec((0usize..5, 0u8..32), 0..8)).prop_map(
            |(n, raw_rules)| {
                let mut fw = AbaFramework::new();
                for i in 0..n {
                    fw.add_assumption(&format!("a{i}"), &format!("c{i}")).unwrap();
                }
                for (target, body_mask) in raw_rules {
                    let target = target % n;
                    let body: Vec<String> = (0..n)
                        .filter(|i| body_mask & (1 << i) != 0)
                        .map(|i| format!("a{i}"))
                        .collect();
                    let body_refs: Vec<&str> = body.iter().map(String::as_str).collect();
                    fw.add_rule(&format!("c{target}"), &body_refs).unwrap();
                }
                fw
            },
        )
    }

    /// Strategy: as above, but rule heads may also be assumptions.
    fn any_framework() -> impl Strategy<Value = AbaFramework> {
        (2usize..=5, proptest::collection::vec((0usize..10, 0u8..32), 0..8)).prop_map(
            |(n, raw_rules)| {
                let mut fw = AbaFramework::new();
                for i in 0..n {
                    fw.add_assumption(&format!("a{i}"), &format!("c{i}")).unwrap();
                }
                for (head, body_mask) in raw_rules {
                    let head = head % (2 * n);
                    let head_name = if head < n {
                        format!("c{head}")
                    } else {
                        format!("a{}", head - n)
                    };
                    let body: Vec<String> = (0..n)
                        .filter(|i| body_mask & (1 << i) != 0)
                        .map(|i| format!("a{i}"))
                        .collect();
                    let body_refs: Vec<&str> = body.iter().map(String::as_str).collect();
                    fw.add_rule(&head_name, &body_refs).unwrap();
                }
                fw
            },
        )
    }

    fn contains_all(outer: &[AssumptionSet], inner: &[AssumptionSet]) -> bool {
        inner.iter().all(|s| outer.contains(s))
    }

    proptest! {
        #[test]
        fn flat_semantics_chain_and_grounded_uniqueness(fw in flat_framework()) {
            let limits = EnumLimits::default();
            let cf = fw.semantics_enumerate(Semantics::ConflictFree, &limits).unwrap();
            let ad = fw.semantics_enumerate(Semantics::Admissible, &limits).unwrap();
            let co = fw.semantics_enumerate(Semantics::Complete, &limits).unwrap();
            let gr = fw.semantics_enumerate(Semantics::Grounded, &limits).unwrap();
            let pr = fw.semantics_enumerate(Semantics::Preferred, &limits).unwrap();
            let st = fw.semantics_enumerate(Semantics::Stable, &limits).unwrap();
            prop_assert!(fw.is_flat());
            prop_assert!(contains_all(&cf, &ad));
            prop_assert!(contains_all(&ad, &co));
            prop_assert!(contains_all(&co, &pr));
            prop_assert!(contains_all(&pr, &st));
            // Flat frameworks have a unique grounded extension contained in
            // every complete extension.
            prop_assert_eq!(gr.len(), 1);
            for ext in &co {
                prop_assert!(gr[0].is_subset(ext));
            }
        }

        #[test]
        fn extensions_are_closed_and_stable_attacks_the_rest(fw in any_framework()) {
            let limits = EnumLimits::default();
            let st = fw.semantics_enumerate(Semantics::Stable, &limits).unwrap();
            let pr = fw.semantics_enumerate(Semantics::Preferred, &limits).unwrap();
            let co = fw.semantics_enumerate(Semantics::Complete, &limits).unwrap();
            prop_assert!(contains_all(&co, &pr));
            prop_assert!(contains_all(&pr, &st));
            for ext in co.iter().chain(&st) {
                prop_assert!(fw.is_closed(ext).unwrap());
                prop_assert!(!fw.attacks(ext, ext).unwrap());
            }
            for ext in &st {
                for name in fw.assumption_names() {
                    if !ext.contains(name) {
                        prop_assert!(fw.attacks(ext, &set(&[name])).unwrap());
                    }
                }
            }
            // Determinism: a second sweep returns the identical list.
            let again = fw.semantics_enumerate(Semantics::Stable, &limits).unwrap();
            prop_assert_eq!(st, again);
        }

        #[test]
        fn derivability_is_monotone(fw in any_framework(), extra in 0u8..32, q in 0usize..10) {
            let members: Vec<String> = fw.assumption_names().map(String::from).collect();
            let small: AssumptionSet = members.iter().take(2).cloned().collect();
            let mut big = small.clone();
            for (i, name) in members.iter().enumerate() {
                if extra & (1 << i) != 0 {
                    big.insert(name.clone());
                }
            }
            let q_name = if q < members.len() {
                members[q].clone()
            } else {
                format!("c{}", q % members.len())
            };
            if fw.derives(&small, &q_name).unwrap() {
                prop_assert!(fw.derives(&big, &q_name).unwrap());
            }
        }
    }
}
