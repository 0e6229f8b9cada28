use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::types::{one_point_extensions, tp, Colored, TypeDescriptor};
use crate::amalgamation::PriorityOrder;
use crate::error::{Error, Result};
use crate::structure::{
    triangle_of, CompleteStructure, Language, OrientedSymbol, TrianglePattern, TriangleSet,
    TriangleTable, VertexId, Violation,
};

const NO_EDGE: u8 = u8::MAX;

/// Which side the new tuple is placed on when completing by `⊗`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    /// `a ⫝_B M`: cross pairs coloured as `(B∪a) ⊗_B M`.
    Left,
    /// `M ⫝_B a`: cross pairs coloured as `M ⊗_B (B∪a)`.
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SaturationBudget {
    pub max_vertices: usize,
    pub max_base: usize,
}

impl SaturationBudget {
    pub fn new(max_vertices: usize, max_base: usize) -> Result<Self> {
        if max_vertices == 0 {
            return Err(Error::invalid("max_vertices must be positive"));
        }
        Ok(SaturationBudget {
            max_vertices,
            max_base,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum SaturationStatus {
    /// Every one-point extension over every small base is realised.
    Fixpoint,
    /// The vertex cap was reached first.
    BudgetExhausted,
}

/// Finite approximation `M_0 ⊆ M_1 ⊆ ...` of the limit of `Forb_c(S)`.
/// Vertices are `0..len()` in insertion order; stage `i` is the prefix
/// `0..stage_ends[i]`.
#[derive(Clone, Debug)]
pub struct ApproximationTower {
    language: Language,
    constraint: TriangleSet,
    constraint_name: String,
    priority: PriorityOrder,
    table: TriangleTable,
    dual: Vec<u8>,
    priority_codes: Vec<u8>,
    rows: Vec<Vec<u8>>,
    stage_ends: Vec<usize>,
}

impl Colored for ApproximationTower {
    fn has_vertex(&self, v: VertexId) -> bool {
        (v as usize) < self.rows.len()
    }

    fn edge(&self, a: VertexId, b: VertexId) -> OrientedSymbol {
        self.color(a, b)
    }
}

impl ApproximationTower {
    pub fn new(
        language: Language,
        constraint: TriangleSet,
        constraint_name: impl Into<String>,
        priority: PriorityOrder,
    ) -> Result<Self> {
        let table = constraint.compile(&language)?;
        for s in priority.solutions() {
            if !language.contains(*s) {
                return Err(Error::invalid(format!("solution {s} not in language")));
            }
        }
        let dual = language
            .oriented_symbols()
            .iter()
            .map(|s| language.code(s.dual()).expect("closed under duals"))
            .collect();
        let priority_codes = priority
            .solutions()
            .iter()
            .map(|&s| language.code(s).expect("checked"))
            .collect();
        let name = constraint_name.into();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::invalid(
                "constraint name must be a single non-empty word",
            ));
        }
        Ok(ApproximationTower {
            language,
            constraint,
            constraint_name: name,
            priority,
            table,
            dual,
            priority_codes,
            rows: Vec::new(),
            stage_ends: Vec::new(),
        })
    }

    /// Seeds the tower with `m` as its first stage; `m` must use ids `0..n`.
    pub fn with_initial(mut self, m: &CompleteStructure) -> Result<Self> {
        if !self.rows.is_empty() {
            return Err(Error::invalid("tower already has vertices"));
        }
        if m.vertices()
            .iter()
            .enumerate()
            .any(|(i, &v)| v as usize != i)
        {
            return Err(Error::invalid("initial structure must use vertex ids 0..n"));
        }
        m.check_language(&self.language)?;
        let n = m.len();
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        m.color_at(i, j)
                            .map_or(NO_EDGE, |s| self.language.code(s).expect("checked"))
                    })
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if self.table.forbids(rows[i][j], rows[i][k], rows[j][k]) {
                        let v = triangle_of(m, i as VertexId, j as VertexId, k as VertexId)?;
                        return Err(Error::invalid(format!(
                            "initial structure not in Forb_c(S): triangle ({i}, {j}, {k}) = {v}"
                        )));
                    }
                }
            }
        }
        self.rows = rows;
        if n > 0 {
            self.stage_ends.push(n);
        }
        Ok(self)
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn constraint(&self) -> &TriangleSet {
        &self.constraint
    }

    pub fn constraint_name(&self) -> &str {
        &self.constraint_name
    }

    pub fn priority(&self) -> &PriorityOrder {
        &self.priority
    }

    pub fn table(&self) -> &TriangleTable {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `r(a, b)` as a language code.
    #[inline]
    pub fn code(&self, a: VertexId, b: VertexId) -> u8 {
        self.rows[a as usize][b as usize]
    }

    pub fn color(&self, a: VertexId, b: VertexId) -> OrientedSymbol {
        let c = self.code(a, b);
        assert_ne!(c, NO_EDGE, "irreflexive");
        self.language.symbol(c)
    }

    #[inline]
    pub fn dual_code(&self, c: u8) -> u8 {
        self.dual[c as usize]
    }

    pub fn priority_codes(&self) -> &[u8] {
        &self.priority_codes
    }

    /// Closed stage boundaries; vertices after the last one belong to the
    /// open stage.
    pub fn stage_ends(&self) -> &[usize] {
        &self.stage_ends
    }

    /// Closes the current stage if it gained vertices.
    pub fn close_stage(&mut self) {
        if self.stage_ends.last().copied().unwrap_or(0) < self.len() {
            self.stage_ends.push(self.len());
        }
    }

    pub fn stage(&self, i: usize) -> Result<CompleteStructure> {
        let end = *self
            .stage_ends
            .get(i)
            .ok_or_else(|| Error::invalid(format!("no stage {i}")))?;
        self.prefix(end)
    }

    /// The whole current structure.
    pub fn structure(&self) -> CompleteStructure {
        self.prefix(self.len()).expect("prefix of self")
    }

    fn prefix(&self, end: usize) -> Result<CompleteStructure> {
        let ids: Vec<VertexId> = (0..end as VertexId).collect();
        CompleteStructure::from_fn(&ids, |x, y| self.color(x, y))
    }

    /// The tower truncated to its first `n` vertices.
    pub fn truncated(&self, n: usize) -> ApproximationTower {
        let n = n.min(self.len());
        let mut out = self.clone();
        out.rows.truncate(n);
        for row in &mut out.rows {
            row.truncate(n);
        }
        out.stage_ends.retain(|&e| e < n);
        out.stage_ends.push(n);
        out.stage_ends.dedup();
        out.stage_ends.retain(|&e| e > 0);
        out
    }

    pub fn tp(&self, tuple: &[VertexId], base: &[VertexId]) -> Result<TypeDescriptor> {
        tp(self, tuple, base)
    }

    pub fn one_point_extensions(&self, base: &[VertexId]) -> Result<Vec<TypeDescriptor>> {
        one_point_extensions(
            self,
            base,
            self.language.oriented_symbols(),
            &self.constraint,
        )
    }

    /// Colour `⊗` gives to `(a, c)` when `a` is on the left and `c` on the
    /// right of the base.
    pub fn prioritised_code(&self, a: VertexId, c: VertexId, base: &[VertexId]) -> Option<u8> {
        self.priority_codes.iter().copied().find(|&r| {
            base.iter()
                .all(|&b| !self.table.forbids(self.code(a, b), r, self.code(b, c)))
        })
    }

    /// `A ⫝_B C`: `A ∩ C ⊆ B` and every pair `(a, c)` outside the base has
    /// the colour `⊗` would give it.
    pub fn independent(&self, a: &[VertexId], b: &[VertexId], c: &[VertexId]) -> bool {
        for &x in a {
            if b.contains(&x) {
                continue;
            }
            for &y in c {
                if b.contains(&y) {
                    continue;
                }
                if x == y || self.prioritised_code(x, y, b) != Some(self.code(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// All tuples in the tower realising `p`.
    pub fn realizations(&self, p: &TypeDescriptor) -> Vec<Vec<VertexId>> {
        let n = self.len() as VertexId;
        let k = p.fresh_count();
        let mut out = Vec::new();
        let mut chosen: Vec<VertexId> = Vec::with_capacity(k);
        self.collect_realizations(p, n, &mut chosen, &mut out);
        out
    }

    fn collect_realizations(
        &self,
        p: &TypeDescriptor,
        n: VertexId,
        chosen: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let f = chosen.len();
        if f == p.fresh_count() {
            out.push(self.assemble(p, chosen));
            return;
        }
        for v in 0..n {
            if p.base().binary_search(&v).is_ok() || chosen.contains(&v) {
                continue;
            }
            let fits = (0..p.base().len())
                .all(|j| self.color(v, p.base()[j]) == p.color_to_base(f, j))
                && (0..f).all(|g| self.color(chosen[g], v) == p.color_among(g, f));
            if fits {
                chosen.push(v);
                self.collect_realizations(p, n, chosen, out);
                chosen.pop();
            }
        }
    }

    fn assemble(&self, p: &TypeDescriptor, fresh: &[VertexId]) -> Vec<VertexId> {
        p.slots()
            .iter()
            .map(|s| match *s {
                super::types::Slot::Base(j) => p.base()[j],
                super::types::Slot::Fresh(f) => fresh[f],
            })
            .collect()
    }

    /// Whether some vertex outside the base realises a one-point type.
    pub fn is_realized(&self, p: &TypeDescriptor) -> bool {
        if p.fresh_count() != 1 {
            return !self.realizations(p).is_empty();
        }
        let base = p.base();
        (0..self.len() as VertexId).any(|v| {
            base.binary_search(&v).is_err()
                && (0..base.len()).all(|j| self.color(v, base[j]) == p.color_to_base(0, j))
        })
    }

    /// Adds fresh vertices realising `p`, independent from every other
    /// vertex over the base on the given side. Returns the realising tuple.
    pub fn realize(&mut self, p: &TypeDescriptor, side: Side) -> Result<Vec<VertexId>> {
        if p.is_algebraic() {
            return Err(Error::invalid("algebraic types are not realised"));
        }
        p.check_consistent(self, &self.constraint)?;
        let n = self.len();
        let k = p.fresh_count();
        let base = p.base();
        let lang = &self.language;
        let code_of = |s: OrientedSymbol| {
            lang.code(s)
                .ok_or_else(|| Error::invalid(format!("{s} not in language")))
        };
        // new_rows[f][v] = r(x_f, v) over old vertices then fresh ones
        let mut new_rows: Vec<Vec<u8>> = vec![vec![NO_EDGE; n + k]; k];
        for f in 0..k {
            for (j, &b) in base.iter().enumerate() {
                new_rows[f][b as usize] = code_of(p.color_to_base(f, j))?;
            }
            for g in 0..k {
                if g != f {
                    new_rows[f][n + g] = code_of(p.color_among(f, g))?;
                }
            }
        }
        for f in 0..k {
            for m in 0..n as VertexId {
                if base.binary_search(&m).is_ok() {
                    continue;
                }
                let chosen = self.priority_codes.iter().copied().find(|&r| {
                    base.iter().all(|&b| {
                        let xb = new_rows[f][b as usize];
                        match side {
                            Side::Left => !self.table.forbids(xb, r, self.code(b, m)),
                            Side::Right => {
                                !self
                                    .table
                                    .forbids(self.code(m, b), r, self.dual[xb as usize])
                            }
                        }
                    })
                });
                let Some(r) = chosen else {
                    return Err(Error::logical(format!(
                        "no admissible colour between a new point and vertex {m}"
                    )));
                };
                new_rows[f][m as usize] = match side {
                    Side::Left => r,
                    Side::Right => self.dual[r as usize],
                };
            }
        }
        if let Some(v) = self.new_violation(&new_rows, base) {
            return Err(Error::logical(format!("completion embeds a forbidden {v}")));
        }
        for row in self.rows.iter_mut() {
            row.extend(std::iter::repeat_n(NO_EDGE, k));
        }
        for (i, row) in self.rows.iter_mut().enumerate() {
            for f in 0..k {
                row[n + f] = self.dual[new_rows[f][i] as usize];
            }
        }
        self.rows.extend(new_rows);
        let fresh: Vec<VertexId> = (n..n + k).map(|v| v as VertexId).collect();
        Ok(self.assemble(p, &fresh))
    }

    pub fn realize_left(&mut self, p: &TypeDescriptor) -> Result<Vec<VertexId>> {
        self.realize(p, Side::Left)
    }

    pub fn realize_right(&mut self, p: &TypeDescriptor) -> Result<Vec<VertexId>> {
        self.realize(p, Side::Right)
    }

    /// First forbidden triangle created by adding the fresh rows.
    fn new_violation(&self, new_rows: &[Vec<u8>], base: &[VertexId]) -> Option<Violation> {
        let n = self.len();
        let k = new_rows.len();
        let pattern = |a: u8, b: u8, c: u8| {
            TrianglePattern::new(
                self.language.symbol(a),
                self.language.symbol(b),
                self.language.symbol(c),
            )
        };
        for f in 0..k {
            let x = (n + f) as VertexId;
            for m in 0..n {
                let xm = new_rows[f][m];
                for m2 in m + 1..n {
                    if base.contains(&(m as VertexId)) && base.contains(&(m2 as VertexId)) {
                        continue;
                    }
                    let xm2 = new_rows[f][m2];
                    if self.table.forbids(xm, xm2, self.rows[m][m2]) {
                        return Some(Violation {
                            vertices: [x, m as VertexId, m2 as VertexId],
                            pattern: pattern(xm, xm2, self.rows[m][m2]),
                        });
                    }
                }
                for g in f + 1..k {
                    let xy = new_rows[f][n + g];
                    if self.table.forbids(xy, xm, new_rows[g][m]) {
                        return Some(Violation {
                            vertices: [x, (n + g) as VertexId, m as VertexId],
                            pattern: pattern(xy, xm, new_rows[g][m]),
                        });
                    }
                }
            }
        }
        None
    }

    /// Realises every missing one-point extension over every base of size
    /// at most `max_base`, round by round, until nothing is missing or the
    /// vertex cap is hit. Each productive round closes a stage.
    pub fn saturate(&mut self, budget: SaturationBudget) -> Result<SaturationStatus> {
        self.close_stage();
        loop {
            let n0 = self.len() as VertexId;
            let mut added = false;
            for size in 0..=budget.max_base {
                for base in (0..n0).combinations(size) {
                    for p in self.one_point_extensions(&base)? {
                        if self.is_realized(&p) {
                            continue;
                        }
                        if self.len() >= budget.max_vertices {
                            self.close_stage();
                            return Ok(SaturationStatus::BudgetExhausted);
                        }
                        self.realize_left(&p)?;
                        added = true;
                    }
                }
            }
            self.close_stage();
            if !added {
                return Ok(SaturationStatus::Fixpoint);
            }
        }
    }

    /// Text dump: header, structure literal, stage boundaries.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("language {}\n", self.language.to_line()));
        out.push_str(&format!("priority {}\n", self.priority.to_line()));
        out.push_str(&format!("triangles {}\n", self.constraint_name));
        for p in self.constraint.iter() {
            out.push_str(&format!("pattern {p}\n"));
        }
        out.push_str(&format!("vertices {}\n", self.len()));
        for a in 0..self.len() as VertexId {
            for b in a + 1..self.len() as VertexId {
                out.push_str(&format!("{a} {b} {}\n", self.color(a, b)));
            }
        }
        let ends: Vec<String> = self.stage_ends.iter().map(|e| e.to_string()).collect();
        out.push_str(format!("stages {}", ends.join(" ")).trim_end());
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let mut next = |key: &str| -> Result<(usize, String)> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing `{key}` line")))?;
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| Error::parse(i + 1, format!("expected `{key}`")))?;
            Ok((i + 1, rest.trim().to_string()))
        };
        let (_, lang_line) = next("language")?;
        let language = Language::parse_line(&lang_line)?;
        let (_, pr_line) = next("priority")?;
        let priority = PriorityOrder::parse(&pr_line, &language)?;
        let (_, name) = next("triangles")?;
        let mut patterns = Vec::new();
        let count: usize;
        loop {
            let (i, line) = next("")?;
            if let Some(p) = line.strip_prefix("pattern") {
                patterns.push(
                    p.trim()
                        .parse()
                        .map_err(|e: Error| Error::parse(i, e.to_string()))?,
                );
            } else if let Some(v) = line.strip_prefix("vertices") {
                count = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(i, "bad vertex count"))?;
                break;
            } else {
                return Err(Error::parse(i, "expected `pattern` or `vertices`"));
            }
        }
        let mut tower =
            ApproximationTower::new(language, TriangleSet::new(patterns), name, priority)?;
        let mut literal = String::new();
        for v in 0..count {
            literal.push_str(&format!("{v}\n"));
        }
        let mut stages = None;
        for (i, line) in lines {
            if let Some(rest) = line.strip_prefix("stages") {
                let ends = rest
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::parse(i + 1, "bad stage boundary"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                stages = Some(ends);
            } else {
                literal.push_str(line);
                literal.push('\n');
            }
        }
        let stages = stages.ok_or_else(|| Error::parse(0, "missing `stages` line"))?;
        let m = CompleteStructure::parse_literal(&literal)?;
        if m.len() != count {
            return Err(Error::invalid("vertex count does not match the edge list"));
        }
        tower = tower.with_initial(&m)?;
        if stages.windows(2).any(|w| w[0] >= w[1]) || stages.last().is_some_and(|&e| e > count) {
            return Err(Error::invalid(
                "stage boundaries must increase within the vertex count",
            ));
        }
        tower.stage_ends = stages;
        Ok(tower)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::cherlin_preset;
    use crate::structure::embeds_forbidden;

    fn tower8() -> ApproximationTower {
        let p = cherlin_preset(8).unwrap();
        let pr = PriorityOrder::parse("R+ R-", &p.language).unwrap();
        ApproximationTower::new(p.language, p.triangles, "cherlin-8", pr).unwrap()
    }

    fn s(x: &str) -> OrientedSymbol {
        x.parse().unwrap()
    }

    #[test]
    fn singleton_type_into_empty_tower() {
        let mut t = tower8();
        let p = t.one_point_extensions(&[]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(t.realize_left(&p[0]).unwrap(), vec![0]);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn worked_example_as_a_realisation() {
        // b = 0, a1 = 1, a2 = 2; new c with c -> b green
        let m = CompleteStructure::parse_literal("0 1 G+\n2 0 G+\n2 1 G+\n").unwrap();
        let mut t = tower8().with_initial(&m).unwrap();
        let p = TypeDescriptor::one_point(vec![0], vec![s("G+")]).unwrap();
        let c = t.realize_right(&p).unwrap()[0];
        assert_eq!(t.color(1, c), s("R-"));
        assert_eq!(t.color(2, c), s("R+"));
        assert!(t.independent(&[1, 2], &[0], &[c]));
    }

    #[test]
    fn realisation_is_independent_and_of_the_right_type() {
        let mut t = tower8();
        t.saturate(SaturationBudget::new(12, 1).unwrap()).unwrap();
        let base = [1, 3];
        for p in t.one_point_extensions(&base).unwrap() {
            for side in [Side::Left, Side::Right] {
                let mut u = t.clone();
                let a = u.realize(&p, side).unwrap();
                assert_eq!(u.tp(&a, &base).unwrap(), p);
                let rest: Vec<VertexId> = (0..t.len() as VertexId)
                    .filter(|v| !base.contains(v))
                    .collect();
                match side {
                    Side::Left => assert!(u.independent(&a, &base, &rest)),
                    Side::Right => assert!(u.independent(&rest, &base, &a)),
                }
                assert!(embeds_forbidden(&u.structure(), u.constraint()).is_none());
            }
        }
    }

    #[test]
    fn saturation_with_single_point_bases() {
        // new points only receive solution colours across, so single-point
        // bases never reach a fixpoint; each full round saturates the
        // stage before it
        let mut t = tower8();
        let status = t.saturate(SaturationBudget::new(60, 1).unwrap()).unwrap();
        assert_eq!(status, SaturationStatus::BudgetExhausted);
        let ends = t.stage_ends();
        let n = t.len() as VertexId;
        for v in 0..ends[ends.len() - 3] as VertexId {
            for sym in ["R+", "R-", "G+", "G-"] {
                assert!(
                    (0..n).any(|u| u != v && t.color(u, v) == s(sym)),
                    "{v} lacks {sym}"
                );
            }
        }
        assert!(embeds_forbidden(&t.structure(), t.constraint()).is_none());
    }

    #[test]
    fn empty_base_reaches_a_fixpoint_and_caps_hold() {
        let mut t = tower8();
        assert_eq!(
            t.saturate(SaturationBudget::new(5, 0).unwrap()).unwrap(),
            SaturationStatus::Fixpoint
        );
        assert_eq!(t.len(), 1);
        let status = t.saturate(SaturationBudget::new(3, 1).unwrap()).unwrap();
        assert_eq!(status, SaturationStatus::BudgetExhausted);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn stages_are_prefixes() {
        let mut t = tower8();
        t.saturate(SaturationBudget::new(25, 2).unwrap()).unwrap();
        let ends = t.stage_ends().to_vec();
        assert!(ends.windows(2).all(|w| w[0] < w[1]));
        let last = t.structure();
        for (i, &e) in ends.iter().enumerate() {
            let st = t.stage(i).unwrap();
            assert_eq!(st.len(), e);
            let ids: Vec<VertexId> = (0..e as VertexId).collect();
            assert_eq!(last.induced(&ids).unwrap(), st);
        }
    }

    #[test]
    fn dump_round_trips() {
        let mut t = tower8();
        t.saturate(SaturationBudget::new(15, 2).unwrap()).unwrap();
        let text = t.dump();
        let back = ApproximationTower::parse(&text).unwrap();
        assert_eq!(back.dump(), text);
        assert_eq!(back.structure(), t.structure());
        assert_eq!(back.stage_ends(), t.stage_ends());
    }

    #[test]
    fn algebraic_types_are_rejected() {
        let mut t = tower8();
        t.saturate(SaturationBudget::new(5, 1).unwrap()).unwrap();
        let p = t.tp(&[1], &[1, 2]).unwrap();
        assert!(matches!(t.realize_left(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn malformed_dumps_are_rejected() {
        assert!(ApproximationTower::parse("").is_err());
        assert!(ApproximationTower::parse(
            "language R+- G+-\npriority R+\ntriangles x\nvertices 2\n0 1 Q+\nstages 2\n"
        )
        .is_err());
        assert!(ApproximationTower::parse(
            "language R+- G+-\npriority R+\ntriangles x\nvertices 2\n0 1 R+\n"
        )
        .is_err());
    }
}
