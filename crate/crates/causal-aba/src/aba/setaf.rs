//! Collective-attack view of a framework: every minimal assumption set that
//! derives the contrary of an assumption becomes one attack. This is the
//! graphical form used to depict and debug attack structure; semantics stay
//! with the framework itself.

use super::{AbaError, AbaFramework, Engine, EnumLimits, ENUM_CAP};

/// An argumentation framework with collective attacks: the assumptions as
/// arguments plus `(attacker set, target)` pairs where the attacker set is a
/// *minimal* support deriving the target's contrary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Setaf {
    arguments: Vec<String>,
    attacks: Vec<(Vec<String>, String)>,
}

impl Setaf {
    /// Extracts the collective attacks of `fw` by sweeping all assumption
    /// subsets, subject to the enumeration bound.
    ///
    /// Attacker sets must be nonempty; a framework where the empty set
    /// already derives some contrary (an added fact directly contradicting an
    /// assumption) has no SETAF form and is reported as an error.
    pub fn from_framework(fw: &AbaFramework, limits: &EnumLimits) -> Result<Setaf, AbaError> {
        let n = fw.assumption_count();
        let max = limits.max_assumptions.min(ENUM_CAP);
        if n > max {
            return Err(AbaError::TooManyAssumptions { n, max });
        }
        let names: Vec<String> = fw.assumption_names().map(String::from).collect();
        let size = 1usize << n;
        let mut att = vec![0u32; size];
        let mut engine = Engine::new(fw);
        for mask in 0..size {
            let (_, a) = engine.close_mask(mask as u32);
            att[mask] = a;
        }
        let mut attacks = Vec::new();
        for mask in 0..size {
            let mut hits = att[mask];
            while hits != 0 {
                let target = hits.trailing_zeros() as usize;
                hits &= hits - 1;
                let mut members = mask as u32;
                let mut minimal = true;
                while members != 0 {
                    let bit = members & members.wrapping_neg();
                    members ^= bit;
                    if att[(mask as u32 ^ bit) as usize] & (1 << target) != 0 {
                        minimal = false;
                        break;
                    }
                }
                if !minimal {
                    continue;
                }
                if mask == 0 {
                    return Err(AbaError::EmptySetafAttacker(names[target].clone()));
                }
                let mut support: Vec<String> = Vec::new();
                let mut bits = mask as u32;
                while bits != 0 {
                    let slot = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    support.push(names[slot].clone());
                }
                support.sort_unstable();
                attacks.push((support, names[target].clone()));
            }
        }
        attacks.sort_unstable();
        Ok(Setaf { arguments: names, attacks })
    }

    /// Arguments in the framework's declaration order.
    pub fn arguments(&self) -> &[String] {
        &self.arguments
    }

    /// Sorted `(attacker set, target)` pairs; attacker sets are sorted and
    /// minimal.
    pub fn attacks(&self) -> &[(Vec<String>, String)] {
        &self.attacks
    }
}

impl std::fmt::Display for Setaf {
    /// One `{a,c} -> b` line per attack.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (support, target) in &self.attacks {
            write!(f, "{{")?;
            for (i, name) in support.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{name}")?;
            }
            writeln!(f, "}} -> {target}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example2() -> AbaFramework {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "s").unwrap();
        fw.add_assumption("b", "p").unwrap();
        fw.add_assumption("c", "q").unwrap();
        fw.add_rule("p", &["a", "c"]).unwrap();
        fw.add_rule("s", &["c"]).unwrap();
        fw
    }

    #[test]
    fn worked_example_collective_attacks() {
        // {a,c} collectively attacks b; c attacks a; nothing attacks c.
        let setaf = Setaf::from_framework(&example2(), &EnumLimits::default()).unwrap();
        assert_eq!(setaf.arguments(), ["a", "b", "c"]);
        let expected: Vec<(Vec<String>, String)> = vec![
            (vec!["a".into(), "c".into()], "b".into()),
            (vec!["c".into()], "a".into()),
        ];
        assert_eq!(setaf.attacks(), expected.as_slice());
        assert_eq!(setaf.to_string(), "{a,c} -> b\n{c} -> a\n");
    }

    #[test]
    fn supports_are_minimal() {
        // Both c alone and {a,c} derive s, so only {c} -> a must remain.
        let mut fw = example2();
        fw.add_rule("s", &["a", "c"]).unwrap();
        let setaf = Setaf::from_framework(&fw, &EnumLimits::default()).unwrap();
        let to_a: Vec<_> = setaf.attacks().iter().filter(|(_, t)| t == "a").collect();
        assert_eq!(to_a.len(), 1);
        assert_eq!(to_a[0].0, ["c"]);
    }

    #[test]
    fn empty_supports_are_rejected() {
        let mut fw = AbaFramework::new();
        fw.add_assumption("a", "ca").unwrap();
        fw.add_rule("ca", &[]).unwrap();
        let err = Setaf::from_framework(&fw, &EnumLimits::default()).unwrap_err();
        assert_eq!(err, AbaError::EmptySetafAttacker("a".into()));
    }

    #[test]
    fn respects_the_enumeration_bound() {
        let mut fw = AbaFramework::new();
        for i in 0..25 {
            fw.add_assumption(&format!("a{i}"), &format!("c{i}")).unwrap();
        }
        let err = Setaf::from_framework(&fw, &EnumLimits::default()).unwrap_err();
        assert_eq!(err, AbaError::TooManyAssumptions { n: 25, max: 24 });
    }
}
