use serde::Serialize;

use super::PriorityOrder;
use crate::structure::{readings, OrientedSymbol, TrianglePattern, TriangleSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ConditionVerdict {
    Pass,
    Fail { pattern: String, reason: String },
}

impl ConditionVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ConditionVerdict::Pass)
    }

    fn fail(p: &TrianglePattern, reason: impl Into<String>) -> Self {
        ConditionVerdict::Fail {
            pattern: p.to_string(),
            reason: reason.into(),
        }
    }
}

fn meets(solutions: &[OrientedSymbol], e: OrientedSymbol) -> bool {
    solutions.contains(&e) || solutions.contains(&e.dual())
}

/// Passes iff no forbidden pattern has two or more edges whose colour, up
/// to orientation, is a solution.
pub fn condition1_check(t: &TriangleSet, solutions: &[OrientedSymbol]) -> ConditionVerdict {
    for p in t.iter() {
        let hits = p.edges().iter().filter(|&&e| meets(solutions, e)).count();
        if hits >= 2 {
            return ConditionVerdict::fail(p, format!("{hits} edges coloured by solutions"));
        }
    }
    ConditionVerdict::Pass
}

/// Syntactic half of the main condition: no forbidden triangle has two
/// edges both coloured `R_1`, or one `R_1` and one `R_2`, in any reading.
pub fn maincond_syntactic(t: &TriangleSet, pr: &PriorityOrder) -> ConditionVerdict {
    let r1 = pr.first();
    let r2 = pr.solutions().get(1).copied();
    for p in t.iter() {
        let [ab, ac, bc] = p.edges();
        for reading in readings(ab, ac, bc) {
            let n1 = reading.iter().filter(|&&e| e == r1).count();
            let n2 = r2.map_or(0, |r2| reading.iter().filter(|&&e| e == r2).count());
            if n1 >= 2 {
                return ConditionVerdict::fail(p, format!("contains {r1}{r1}"));
            }
            if n1 >= 1 && n2 >= 1 {
                return ConditionVerdict::fail(p, format!("contains {r1}{}", r2.unwrap()));
            }
        }
    }
    ConditionVerdict::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::cherlin_preset;
    use crate::structure::Language;

    fn sols(x: &str) -> Vec<OrientedSymbol> {
        x.split_whitespace().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn condition1_on_presets() {
        let l = sols("R+ R-");
        for n in [8, 9, 10] {
            assert!(condition1_check(&cherlin_preset(n).unwrap().triangles, &l).passed());
        }
        match condition1_check(&cherlin_preset(11).unwrap().triangles, &l) {
            ConditionVerdict::Fail { pattern, .. } => assert_eq!(pattern, "G+ R+ R+"),
            v => panic!("{v:?}"),
        }
        assert!(condition1_check(&TriangleSet::empty(), &l).passed());
    }

    #[test]
    fn syntactic_main_condition() {
        let lang = Language::two_asymmetric();
        let pr = PriorityOrder::parse("R+ R-", &lang).unwrap();
        assert!(maincond_syntactic(&cherlin_preset(8).unwrap().triangles, &pr).passed());
        assert!(maincond_syntactic(&TriangleSet::empty(), &pr).passed());
        assert!(!maincond_syntactic(&cherlin_preset(11).unwrap().triangles, &pr).passed());
        // some reading of R+ G+ G+ carries two G+ edges
        let t = TriangleSet::parse("R+ G+ G+\n").unwrap();
        let pr_g = PriorityOrder::parse("G+", &lang).unwrap();
        assert!(!maincond_syntactic(&t, &pr_g).passed());
    }
}
