//! Prioritised semi-free amalgamation `A ⊗_B C` and classification of
//! forbidden-triangle sets.

mod classify;
mod conditions;
mod maincond;
mod presets;

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{
    embeds_forbidden, CompleteStructure, Language, OrientedSymbol, TrianglePattern, TriangleSet,
    VertexId, Violation,
};

pub use classify::{
    check_prioritised_class, ClassCheckOptions, ClassCheckReport, Counterexample, ProblemShape,
};
pub use conditions::{condition1_check, maincond_syntactic, ConditionVerdict};
pub use maincond::{maincond_check, MaincondBounds, MaincondReport};
pub use presets::{
    cherlin_preset, failure_problems, worked_problem, CherlinPreset, CHERLIN_NUMBERS,
};

/// Ordered set of solutions `R_1 > ... > R_m`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct PriorityOrder {
    solutions: Vec<OrientedSymbol>,
}

impl PriorityOrder {
    /// Validates non-emptiness, distinctness, and that the solutions form a
    /// proper subset of the language's oriented symbols.
    pub fn new(solutions: Vec<OrientedSymbol>, lang: &Language) -> Result<Self> {
        if solutions.is_empty() {
            return Err(Error::invalid("priority order is empty"));
        }
        let distinct: BTreeSet<_> = solutions.iter().collect();
        if distinct.len() != solutions.len() {
            return Err(Error::invalid("priority order repeats a symbol"));
        }
        for s in &solutions {
            if !lang.contains(*s) {
                return Err(Error::invalid(format!("solution {s} not in language")));
            }
        }
        if solutions.len() >= lang.oriented_symbols().len() {
            return Err(Error::invalid(
                "solutions must be a proper subset of the oriented symbols",
            ));
        }
        Ok(PriorityOrder { solutions })
    }

    pub fn parse(text: &str, lang: &Language) -> Result<Self> {
        let sols = text
            .split(|c: char| c.is_whitespace() || c == '>' || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse())
            .collect::<Result<Vec<_>>>()?;
        PriorityOrder::new(sols, lang)
    }

    pub fn solutions(&self) -> &[OrientedSymbol] {
        &self.solutions
    }

    pub fn first(&self) -> OrientedSymbol {
        self.solutions[0]
    }

    pub fn contains(&self, s: OrientedSymbol) -> bool {
        self.solutions.contains(&s)
    }

    pub fn to_line(&self) -> String {
        self.solutions
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for PriorityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.solutions.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(" > "))
    }
}

/// Two structures sharing exactly the base `B` as common vertices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AmalgamProblem {
    left: CompleteStructure,
    base: Vec<VertexId>,
    right: CompleteStructure,
}

impl AmalgamProblem {
    pub fn new(
        left: CompleteStructure,
        base: &[VertexId],
        right: CompleteStructure,
    ) -> Result<Self> {
        let mut base = base.to_vec();
        base.sort_unstable();
        base.dedup();
        for &b in &base {
            if !left.contains(b) || !right.contains(b) {
                return Err(Error::invalid(format!(
                    "base vertex {b} missing from a side"
                )));
            }
        }
        for &v in left.vertices() {
            if right.contains(v) && base.binary_search(&v).is_err() {
                return Err(Error::invalid(format!(
                    "vertex {v} is shared by both sides but not in the base"
                )));
            }
        }
        if left.induced(&base)? != right.induced(&base)? {
            return Err(Error::invalid("the two sides disagree on the base"));
        }
        Ok(AmalgamProblem { left, base, right })
    }

    pub fn left(&self) -> &CompleteStructure {
        &self.left
    }

    pub fn right(&self) -> &CompleteStructure {
        &self.right
    }

    pub fn base(&self) -> &[VertexId] {
        &self.base
    }

    pub fn left_new(&self) -> Vec<VertexId> {
        self.left
            .vertices()
            .iter()
            .copied()
            .filter(|v| self.base.binary_search(v).is_err())
            .collect()
    }

    pub fn right_new(&self) -> Vec<VertexId> {
        self.right
            .vertices()
            .iter()
            .copied()
            .filter(|v| self.base.binary_search(v).is_err())
            .collect()
    }

    /// The same problem with the sides exchanged: `C ⊗_B A`.
    pub fn mirrored(&self) -> Self {
        AmalgamProblem {
            left: self.right.clone(),
            base: self.base.clone(),
            right: self.left.clone(),
        }
    }

    /// `(|B|, |A∖B|, |C∖B|)`
    pub fn shape(&self) -> ProblemShape {
        ProblemShape {
            base: self.base.len(),
            left_new: self.left.len() - self.base.len(),
            right_new: self.right.len() - self.base.len(),
        }
    }

    /// Colour between two vertices of the same side, if any.
    fn side_color(&self, x: VertexId, y: VertexId) -> Option<OrientedSymbol> {
        self.left.color(x, y).or_else(|| self.right.color(x, y))
    }

    /// Whether a bijection maps base to base, left to left and right to
    /// right while preserving every colour inside each side.
    pub fn is_isomorphic_to(&self, other: &AmalgamProblem) -> bool {
        if self.shape() != other.shape() {
            return false;
        }
        let src: Vec<VertexId> = self
            .base
            .iter()
            .copied()
            .chain(self.left_new())
            .chain(self.right_new())
            .collect();
        let (b, l) = (self.base.len(), self.left_new().len());
        let blocks = [other.base.clone(), other.left_new(), other.right_new()];
        let perms = |v: &Vec<VertexId>| v.iter().copied().permutations(v.len()).collect::<Vec<_>>();
        let (pb, pl, pr) = (perms(&blocks[0]), perms(&blocks[1]), perms(&blocks[2]));
        for x in &pb {
            for y in &pl {
                for z in &pr {
                    let dst: Vec<VertexId> = x.iter().chain(y).chain(z).copied().collect();
                    let ok = (0..src.len()).all(|i| {
                        (i + 1..src.len()).all(|j| {
                            let cross = (b..b + l).contains(&i) && j >= b + l;
                            cross
                                || self.side_color(src[i], src[j])
                                    == other.side_color(dst[i], dst[j])
                        })
                    });
                    if ok {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Union structure with every cross pair coloured by `cross(a, c)`.
    fn complete_with<F>(&self, mut cross: F) -> CompleteStructure
    where
        F: FnMut(VertexId, VertexId) -> OrientedSymbol,
    {
        let mut all: Vec<VertexId> = self.left.vertices().to_vec();
        all.extend(self.right_new());
        CompleteStructure::from_fn(&all, |x, y| {
            match (self.left.color(x, y), self.right.color(x, y)) {
                (Some(s), _) | (None, Some(s)) => s,
                (None, None) => {
                    if self.left.contains(x) {
                        cross(x, y)
                    } else {
                        cross(y, x).dual()
                    }
                }
            }
        })
        .expect("disjoint union over the base")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AmalgamFailure {
    /// Every solution is blocked for the cross pair `(a, c)`; `blocked_by`
    /// lists, per solution, the base vertices forming a forbidden triangle.
    NoAdmissibleColor {
        a: VertexId,
        c: VertexId,
        blocked_by: Vec<(OrientedSymbol, Vec<VertexId>)>,
    },
    /// Each cross pair got a colour but together they embed a forbidden
    /// triangle.
    ForbiddenTriangleInResult {
        witness: Violation,
        structure: CompleteStructure,
    },
}

impl fmt::Display for AmalgamFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmalgamFailure::NoAdmissibleColor { a, c, blocked_by } => {
                write!(f, "no admissible colour for ({a}, {c}):")?;
                for (s, bs) in blocked_by {
                    write!(f, " {s} blocked by {bs:?};")?;
                }
                Ok(())
            }
            AmalgamFailure::ForbiddenTriangleInResult { witness, .. } => {
                write!(f, "amalgam embeds forbidden {witness}")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AmalgamOutcome {
    Completed(CompleteStructure),
    Failed(AmalgamFailure),
}

impl AmalgamOutcome {
    pub fn completed(&self) -> Option<&CompleteStructure> {
        match self {
            AmalgamOutcome::Completed(s) => Some(s),
            AmalgamOutcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&AmalgamFailure> {
        match self {
            AmalgamOutcome::Completed(_) => None,
            AmalgamOutcome::Failed(f) => Some(f),
        }
    }
}

/// Colour `⊗` assigns to the cross pair `(a, c)`: the first solution `R_i`
/// such that no base vertex `b` makes `(r(a,b), R_i, r(b,c))` forbidden.
/// Depends only on the colours between `{a, c}` and the base.
pub fn cross_color(
    problem: &AmalgamProblem,
    t: &TriangleSet,
    pr: &PriorityOrder,
    a: VertexId,
    c: VertexId,
) -> std::result::Result<OrientedSymbol, Vec<(OrientedSymbol, Vec<VertexId>)>> {
    let mut blocked = Vec::new();
    for &cand in pr.solutions() {
        let blockers: Vec<VertexId> = problem
            .base
            .iter()
            .copied()
            .filter(|&b| {
                let ab = problem.left.color(a, b).expect("a in left");
                let bc = problem.right.color(b, c).expect("c in right");
                t.contains(&TrianglePattern::new(ab, cand, bc))
            })
            .collect();
        if blockers.is_empty() {
            return Ok(cand);
        }
        blocked.push((cand, blockers));
    }
    Err(blocked)
}

fn check_sides(problem: &AmalgamProblem, t: &TriangleSet) -> Result<()> {
    for (name, side) in [("left", &problem.left), ("right", &problem.right)] {
        if let Some(v) = embeds_forbidden(side, t) {
            return Err(Error::invalid(format!(
                "{name} side is not in Forb_c(S): {v}"
            )));
        }
    }
    Ok(())
}

/// `A ⊗_B C`.
pub fn prioritised_amalgam(
    problem: &AmalgamProblem,
    t: &TriangleSet,
    pr: &PriorityOrder,
) -> Result<AmalgamOutcome> {
    check_sides(problem, t)?;
    let left_new = problem.left_new();
    let right_new = problem.right_new();
    let mut colors = std::collections::BTreeMap::new();
    for &a in &left_new {
        for &c in &right_new {
            match cross_color(problem, t, pr, a, c) {
                Ok(s) => {
                    colors.insert((a, c), s);
                }
                Err(blocked_by) => {
                    return Ok(AmalgamOutcome::Failed(AmalgamFailure::NoAdmissibleColor {
                        a,
                        c,
                        blocked_by,
                    }))
                }
            }
        }
    }
    let result = problem.complete_with(|a, c| colors[&(a, c)]);
    Ok(match embeds_forbidden(&result, t) {
        None => AmalgamOutcome::Completed(result),
        Some(witness) => AmalgamOutcome::Failed(AmalgamFailure::ForbiddenTriangleInResult {
            witness,
            structure: result,
        }),
    })
}

/// Amalgam with every cross pair coloured by the single `solution`. The
/// forbidden-triangle check is left to the caller.
pub fn free_amalgam(problem: &AmalgamProblem, solution: OrientedSymbol) -> CompleteStructure {
    problem.complete_with(|_, _| solution)
}

/// Backtracking search for any `Forb_c(t)` completion whose cross pairs all
/// use colours from `solutions`.
pub fn semifree_complete(
    problem: &AmalgamProblem,
    t: &TriangleSet,
    solutions: &[OrientedSymbol],
) -> Result<Option<CompleteStructure>> {
    check_sides(problem, t)?;
    let pairs: Vec<(VertexId, VertexId)> = problem
        .left_new()
        .iter()
        .flat_map(|&a| problem.right_new().into_iter().map(move |c| (a, c)))
        .collect();
    let mut chosen: Vec<OrientedSymbol> = Vec::with_capacity(pairs.len());
    if semifree_search(problem, t, solutions, &pairs, &mut chosen) {
        let result = problem.complete_with(|a, c| {
            let i = pairs.iter().position(|&p| p == (a, c)).expect("cross pair");
            chosen[i]
        });
        debug_assert!(embeds_forbidden(&result, t).is_none());
        Ok(Some(result))
    } else {
        Ok(None)
    }
}

fn semifree_search(
    problem: &AmalgamProblem,
    t: &TriangleSet,
    solutions: &[OrientedSymbol],
    pairs: &[(VertexId, VertexId)],
    chosen: &mut Vec<OrientedSymbol>,
) -> bool {
    let k = chosen.len();
    if k == pairs.len() {
        return true;
    }
    let (a, c) = pairs[k];
    let lookup = |chosen: &[OrientedSymbol], x: VertexId, y: VertexId| -> Option<OrientedSymbol> {
        if let Some(s) = problem
            .left
            .color(x, y)
            .or_else(|| problem.right.color(x, y))
        {
            return Some(s);
        }
        pairs[..chosen.len()]
            .iter()
            .position(|&p| p == (x, y))
            .map(|i| chosen[i])
            .or_else(|| {
                pairs[..chosen.len()]
                    .iter()
                    .position(|&p| p == (y, x))
                    .map(|i| chosen[i].dual())
            })
    };
    let all: Vec<VertexId> = problem
        .left
        .vertices()
        .iter()
        .copied()
        .chain(problem.right_new())
        .collect();
    for &cand in solutions {
        chosen.push(cand);
        let ok = all.iter().all(|&x| {
            if x == a || x == c {
                return true;
            }
            match (lookup(chosen, a, x), lookup(chosen, x, c)) {
                (Some(ax), Some(xc)) => !t.contains(&TrianglePattern::new(ax, cand, xc)),
                _ => true,
            }
        });
        if ok && semifree_search(problem, t, solutions, pairs, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> OrientedSymbol {
        x.parse().unwrap()
    }

    fn lit(x: &str) -> CompleteStructure {
        CompleteStructure::parse_literal(x).unwrap()
    }

    fn s8() -> TriangleSet {
        cherlin_preset(8).unwrap().triangles
    }

    #[test]
    fn worked_example_completes_with_r_minus_then_r_plus() {
        let lang = Language::two_asymmetric();
        let pr = PriorityOrder::parse("R+ > R-", &lang).unwrap();
        let out = prioritised_amalgam(&worked_problem(), &s8(), &pr).unwrap();
        let done = out.completed().expect("completes");
        assert_eq!(done.color(1, 3), Some(s("R-")));
        assert_eq!(done.color(2, 3), Some(s("R+")));
        assert!(embeds_forbidden(done, &s8()).is_none());
    }

    #[test]
    fn empty_base_uses_first_solution() {
        let lang = Language::two_asymmetric();
        let pr = PriorityOrder::parse("G- > R+", &lang).unwrap();
        let p = AmalgamProblem::new(lit("0 1 R+\n"), &[], lit("5 6 G+\n")).unwrap();
        let out = prioritised_amalgam(&p, &TriangleSet::empty(), &pr).unwrap();
        let done = out.completed().unwrap();
        for a in [0, 1] {
            for c in [5, 6] {
                assert_eq!(done.color(a, c), Some(s("G-")));
            }
        }
    }

    #[test]
    fn base_equal_to_left_returns_right() {
        let c = lit("0 1 G+\n0 2 R-\n1 2 R+\n");
        let a = c.induced(&[0, 1]).unwrap();
        let p = AmalgamProblem::new(a, &[0, 1], c.clone()).unwrap();
        assert_eq!(free_amalgam(&p, s("R+")), c);
        let pr = PriorityOrder::parse("R+", &Language::two_asymmetric()).unwrap();
        assert_eq!(
            prioritised_amalgam(&p, &s8(), &pr).unwrap().completed(),
            Some(&c)
        );
    }

    #[test]
    fn singleton_sides_with_empty_base() {
        let p = AmalgamProblem::new(
            CompleteStructure::singleton(0),
            &[],
            CompleteStructure::singleton(1),
        )
        .unwrap();
        let m = free_amalgam(&p, s("G-"));
        assert_eq!(m.color(0, 1), Some(s("G-")));
    }

    #[test]
    fn invalid_problems_are_rejected() {
        // shared vertex outside base
        assert!(AmalgamProblem::new(lit("0 1 G+\n"), &[], lit("1 2 G+\n")).is_err());
        // sides disagree on the base
        assert!(AmalgamProblem::new(lit("0 1 G+\n"), &[0, 1], lit("0 1 R+\n")).is_err());
        let lang = Language::two_asymmetric();
        assert!(PriorityOrder::parse("R+ R+", &lang).is_err());
        assert!(PriorityOrder::parse("R+ R- G+ G-", &lang).is_err());
        assert!(PriorityOrder::parse("", &lang).is_err());
        assert!(PriorityOrder::parse("B+", &lang).is_err());
    }

    #[test]
    fn sides_outside_forb_are_rejected() {
        let cyc = lit("0 1 G+\n1 2 G+\n2 0 R+\n");
        let p = AmalgamProblem::new(cyc, &[0], lit("0 9 G+\n")).unwrap();
        let pr = PriorityOrder::parse("R+ R-", &Language::two_asymmetric()).unwrap();
        assert!(prioritised_amalgam(&p, &s8(), &pr).is_err());
    }

    #[test]
    fn semifree_finds_the_worked_completion() {
        let found = semifree_complete(&worked_problem(), &s8(), &[s("R+"), s("R-")]).unwrap();
        assert!(found.is_some());
    }

    #[test]
    fn no_admissible_colour_reports_blockers() {
        // #12 with G priority: a->b R, c->b R blocks both G orientations
        let t = cherlin_preset(12).unwrap().triangles;
        let pr = PriorityOrder::parse("G+ G-", &Language::two_asymmetric()).unwrap();
        let p = AmalgamProblem::new(lit("1 0 R+\n"), &[0], lit("2 0 R+\n")).unwrap();
        match prioritised_amalgam(&p, &t, &pr).unwrap() {
            AmalgamOutcome::Failed(AmalgamFailure::NoAdmissibleColor { a, c, blocked_by }) => {
                assert_eq!((a, c), (1, 2));
                assert_eq!(blocked_by.len(), 2);
                assert!(blocked_by.iter().all(|(_, bs)| bs == &vec![0]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn left_figure() -> AmalgamProblem {
        failure_problems()[0].1.clone()
    }

    fn right_figure() -> AmalgamProblem {
        failure_problems()[1].1.clone()
    }

    #[test]
    fn left_figure_fails_with_red_priority() {
        let lang = Language::two_asymmetric();
        for n in [11, 12] {
            let t = cherlin_preset(n).unwrap().triangles;
            let out = prioritised_amalgam(
                &left_figure(),
                &t,
                &PriorityOrder::parse("R+ R-", &lang).unwrap(),
            )
            .unwrap();
            match out.failure() {
                Some(AmalgamFailure::ForbiddenTriangleInResult { witness, structure }) => {
                    let mut v = witness.vertices;
                    v.sort_unstable();
                    assert_eq!(v, [1, 2, 3]);
                    assert_eq!(witness.pattern, "G+ R+ R+".parse().unwrap());
                    assert_eq!(structure.color(1, 3), Some(s("R+")));
                    assert_eq!(structure.color(2, 3), Some(s("R+")));
                }
                other => panic!("#{n}: {other:?}"),
            }
        }
    }

    #[test]
    fn right_figure_fails_with_green_priority() {
        let lang = Language::two_asymmetric();
        for n in [11, 12] {
            let t = cherlin_preset(n).unwrap().triangles;
            let out = prioritised_amalgam(
                &right_figure(),
                &t,
                &PriorityOrder::parse("G+ G-", &lang).unwrap(),
            )
            .unwrap();
            match out.failure() {
                Some(AmalgamFailure::ForbiddenTriangleInResult { witness, .. }) => {
                    assert_eq!(witness.pattern, "G+ G+ G+".parse().unwrap());
                }
                other => panic!("#{n}: {other:?}"),
            }
        }
    }

    #[test]
    fn semifree_search_agrees_with_brute_force() {
        let sols = [s("R+"), s("R-")];
        for n in [8, 11, 12] {
            let t = cherlin_preset(n).unwrap().triangles;
            for p in [left_figure(), right_figure(), worked_problem()] {
                let mut brute = false;
                for x in sols {
                    for y in sols {
                        let m = p.complete_with(|a, _| if a == 1 { x } else { y });
                        brute |= embeds_forbidden(&m, &t).is_none();
                    }
                }
                let found = semifree_complete(&p, &t, &sols);
                match found {
                    Ok(f) => assert_eq!(f.is_some(), brute, "#{n}"),
                    Err(_) => assert!(embeds_forbidden(p.left(), &t).is_some()),
                }
            }
        }
    }

    #[test]
    fn figures_are_not_isomorphic_problems() {
        assert!(left_figure().is_isomorphic_to(&left_figure()));
        assert!(!left_figure().is_isomorphic_to(&right_figure()));
        let relabelled =
            AmalgamProblem::new(lit("5 2 R+\n1 5 G+\n1 2 G+\n"), &[5], lit("9 5 G+\n")).unwrap();
        assert!(left_figure().is_isomorphic_to(&relabelled));
    }
}
