use std::collections::{BTreeMap, BTreeSet};

use super::complete::{CompleteStructure, VertexId};
use super::symbol::{Language, OrientedSymbol};
use super::triangle::{TrianglePattern, TriangleSet};
use crate::error::{Error, Result};

/// Largest structure `canonical_form` accepts.
pub const CANONICAL_BOUND: usize = 10;
/// Largest size `enumerate_forb` accepts.
pub const ENUMERATION_BOUND: usize = 7;

/// Injective, colour-preserving vertex map between two structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureEmbedding {
    pub map: BTreeMap<VertexId, VertexId>,
}

impl StructureEmbedding {
    pub fn apply(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(&v).copied()
    }

    /// Verifies injectivity and colour preservation from `source` to `target`.
    pub fn is_valid(&self, source: &CompleteStructure, target: &CompleteStructure) -> bool {
        let images: BTreeSet<_> = self.map.values().collect();
        if images.len() != self.map.len() {
            return false;
        }
        let pairs: Vec<_> = self.map.iter().map(|(&a, &b)| (a, b)).collect();
        for (i, &(x, fx)) in pairs.iter().enumerate() {
            if !source.contains(x) || !target.contains(fx) {
                return false;
            }
            for &(y, fy) in &pairs[i + 1..] {
                if source.color(x, y) != target.color(fx, fy) {
                    return false;
                }
            }
        }
        true
    }
}

/// Searches for a bijective colour-preserving map `a -> b` extending
/// `fixed`. Vertices of `a` are assigned in id order, candidates tried in id
/// order, so the answer is deterministic.
pub fn find_isomorphism(
    a: &CompleteStructure,
    b: &CompleteStructure,
    fixed: &BTreeMap<VertexId, VertexId>,
) -> Option<StructureEmbedding> {
    if a.len() != b.len() {
        return None;
    }
    let seed = StructureEmbedding { map: fixed.clone() };
    if !seed.is_valid(a, b) {
        return None;
    }
    let todo: Vec<VertexId> = a
        .vertices()
        .iter()
        .copied()
        .filter(|v| !fixed.contains_key(v))
        .collect();
    let mut used: BTreeSet<VertexId> = fixed.values().copied().collect();
    let mut map = fixed.clone();
    if extend_iso(a, b, &todo, &mut map, &mut used) {
        Some(StructureEmbedding { map })
    } else {
        None
    }
}

fn extend_iso(
    a: &CompleteStructure,
    b: &CompleteStructure,
    todo: &[VertexId],
    map: &mut BTreeMap<VertexId, VertexId>,
    used: &mut BTreeSet<VertexId>,
) -> bool {
    let Some((&x, rest)) = todo.split_first() else {
        return true;
    };
    for &y in b.vertices() {
        if used.contains(&y) {
            continue;
        }
        if map.iter().all(|(&u, &fu)| a.color(x, u) == b.color(y, fu)) {
            map.insert(x, y);
            used.insert(y);
            if extend_iso(a, b, rest, map, used) {
                return true;
            }
            map.remove(&x);
            used.remove(&y);
        }
    }
    false
}

/// Isomorphism-invariant code of a structure: size plus the minimal
/// upper-triangle colour sequence over all admissible relabellings.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CanonicalKey {
    pub size: usize,
    pub code: Vec<OrientedSymbol>,
}

/// Canonical relabelling onto `0..n`, with the permutation realising it
/// (`order[p]` is the original vertex placed at position `p`).
pub fn canonical_labelling(s: &CompleteStructure) -> Result<(CanonicalKey, Vec<VertexId>)> {
    let n = s.len();
    if n > CANONICAL_BOUND {
        return Err(Error::Resource(format!(
            "canonical form limited to {CANONICAL_BOUND} vertices, got {n}"
        )));
    }
    // vertex invariant: sorted colours to the other vertices
    let invariants: Vec<Vec<OrientedSymbol>> = (0..n)
        .map(|i| {
            let mut v: Vec<_> = (0..n)
                .filter(|&j| j != i)
                .map(|j| s.color_at(i, j).unwrap())
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let mut classes: Vec<&Vec<OrientedSymbol>> = invariants.iter().collect();
    classes.sort();
    classes.dedup();
    // cell required at each position
    let mut position_cell = Vec::with_capacity(n);
    for (c, inv) in classes.iter().enumerate() {
        let count = invariants.iter().filter(|v| v == inv).count();
        position_cell.extend(std::iter::repeat_n(c, count));
    }
    let cell_of: Vec<usize> = invariants
        .iter()
        .map(|v| classes.iter().position(|c| *c == v).unwrap())
        .collect();

    let mut search = CanonSearch {
        s,
        position_cell: &position_cell,
        cell_of: &cell_of,
        best: None,
        current: Vec::with_capacity(n),
        code: Vec::new(),
        used: vec![false; n],
    };
    search.run();
    let (code, order) = search.best.unwrap_or_default();
    let ids = s.vertices();
    Ok((
        CanonicalKey { size: n, code },
        order.into_iter().map(|i| ids[i]).collect(),
    ))
}

struct CanonSearch<'a> {
    s: &'a CompleteStructure,
    position_cell: &'a [usize],
    cell_of: &'a [usize],
    best: Option<(Vec<OrientedSymbol>, Vec<usize>)>,
    current: Vec<usize>,
    code: Vec<OrientedSymbol>,
    used: Vec<bool>,
}

impl CanonSearch<'_> {
    fn run(&mut self) {
        let p = self.current.len();
        let n = self.position_cell.len();
        if p == n {
            let better = match &self.best {
                None => true,
                Some((b, _)) => self.code < *b,
            };
            if better {
                self.best = Some((self.code.clone(), self.current.clone()));
            }
            return;
        }
        for v in 0..n {
            if self.used[v] || self.cell_of[v] != self.position_cell[p] {
                continue;
            }
            let mark = self.code.len();
            for &u in &self.current {
                self.code.push(self.s.color_at(u, v).unwrap());
            }
            let prune = match &self.best {
                Some((b, _)) => self.code.as_slice() > &b[..self.code.len()],
                None => false,
            };
            if !prune {
                self.used[v] = true;
                self.current.push(v);
                self.run();
                self.current.pop();
                self.used[v] = false;
            }
            self.code.truncate(mark);
        }
    }
}

pub fn canonical_key(s: &CompleteStructure) -> Result<CanonicalKey> {
    Ok(canonical_labelling(s)?.0)
}

/// Relabels `s` onto vertices `0..n` canonically: isomorphic inputs give
/// identical outputs.
pub fn canonical_form(s: &CompleteStructure) -> Result<CompleteStructure> {
    let (_, order) = canonical_labelling(s)?;
    let pos: BTreeMap<VertexId, VertexId> = order
        .iter()
        .enumerate()
        .map(|(p, &v)| (v, p as VertexId))
        .collect();
    s.relabel(|v| pos[&v])
}

/// One canonical representative per isomorphism class of size-`n` members
/// of `Forb_c(t)` over `lang`, sorted by canonical key.
pub fn enumerate_forb(
    lang: &Language,
    t: &TriangleSet,
    n: usize,
) -> Result<Vec<CompleteStructure>> {
    if n > ENUMERATION_BOUND {
        return Err(Error::Resource(format!(
            "enumeration limited to {ENUMERATION_BOUND} vertices, got {n}"
        )));
    }
    t.check_language(lang)?;
    if n == 0 {
        return Ok(vec![CompleteStructure::empty()]);
    }
    let symbols = lang.oriented_symbols();
    let mut level = vec![CompleteStructure::singleton(0)];
    for m in 1..n {
        let mut next: BTreeMap<CanonicalKey, CompleteStructure> = BTreeMap::new();
        for rep in &level {
            let mut choice = vec![0usize; m];
            loop {
                if let Some(ext) = extend_if_free(rep, m as VertexId, &choice, symbols, t) {
                    let canon = canonical_form(&ext)?;
                    next.entry(canonical_key(&canon)?).or_insert(canon);
                }
                if !odometer(&mut choice, symbols.len()) {
                    break;
                }
            }
        }
        level = next.into_values().collect();
    }
    Ok(level)
}

fn extend_if_free(
    rep: &CompleteStructure,
    v: VertexId,
    choice: &[usize],
    symbols: &[OrientedSymbol],
    t: &TriangleSet,
) -> Option<CompleteStructure> {
    // rep has vertices 0..m; colour(v, x) = symbols[choice[x]]
    let col = |x: VertexId| symbols[choice[x as usize]];
    let ids = rep.vertices();
    for (i, &x) in ids.iter().enumerate() {
        for &y in &ids[i + 1..] {
            if t.contains(&TrianglePattern::new(
                col(x),
                col(y),
                rep.color(x, y).unwrap(),
            )) {
                return None;
            }
        }
    }
    rep.with_vertex(v, col).ok()
}

/// Advances a mixed-radix counter; false once it wraps around.
pub(crate) fn odometer(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> CompleteStructure {
        CompleteStructure::parse_literal(s).unwrap()
    }

    #[test]
    fn identity_found_with_one_fixed_vertex() {
        let a = lit("0 1 G+\n1 2 R-\n0 2 G-\n");
        let fixed = BTreeMap::from([(0, 0)]);
        let iso = find_isomorphism(&a, &a, &fixed).unwrap();
        assert!(iso.is_valid(&a, &a));
        assert_eq!(iso.map, BTreeMap::from([(0, 0), (1, 1), (2, 2)]));
    }

    #[test]
    fn green_cycle_is_not_a_transitive_triple() {
        let cycle = lit("0 1 G+\n1 2 G+\n2 0 G+\n");
        let trans = lit("0 1 G+\n1 2 G+\n0 2 G+\n");
        assert!(find_isomorphism(&cycle, &trans, &BTreeMap::new()).is_none());
        assert_ne!(
            canonical_form(&cycle).unwrap(),
            canonical_form(&trans).unwrap()
        );
    }

    #[test]
    fn cycles_with_different_colours_differ() {
        let ggg = lit("0 1 G+\n1 2 G+\n2 0 G+\n");
        let rgg = lit("0 1 R+\n1 2 G+\n2 0 G+\n");
        assert_ne!(canonical_form(&ggg).unwrap(), canonical_form(&rgg).unwrap());
    }

    #[test]
    fn single_vertex_canonical_form() {
        let one = CompleteStructure::singleton(0);
        assert_eq!(canonical_form(&one).unwrap(), one);
        let moved = CompleteStructure::singleton(4);
        assert_eq!(canonical_form(&moved).unwrap(), one);
    }

    #[test]
    fn bounds_are_enforced() {
        let big =
            CompleteStructure::from_fn(&(0..11).collect::<Vec<_>>(), |_, _| "R+".parse().unwrap())
                .unwrap();
        assert!(matches!(canonical_form(&big), Err(Error::Resource(_))));
        assert!(matches!(
            enumerate_forb(&Language::two_asymmetric(), &TriangleSet::empty(), 8),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn fixed_map_must_be_consistent() {
        let a = lit("0 1 G+\n");
        let b = lit("0 1 G+\n");
        assert!(find_isomorphism(&a, &b, &BTreeMap::from([(0, 1)])).is_none());
    }

    #[test]
    fn single_vertex_enumeration() {
        let l = Language::two_asymmetric();
        assert_eq!(
            enumerate_forb(&l, &TriangleSet::empty(), 1).unwrap().len(),
            1
        );
        assert_eq!(
            enumerate_forb(&l, &TriangleSet::empty(), 0).unwrap().len(),
            1
        );
    }
}
