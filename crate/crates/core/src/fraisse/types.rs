use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::structure::{CompleteStructure, OrientedSymbol, TriangleSet, VertexId};

/// Anything that answers colour queries between distinct vertices.
pub trait Colored {
    fn has_vertex(&self, v: VertexId) -> bool;
    /// `r(a, b)` for distinct vertices present in the structure.
    fn edge(&self, a: VertexId, b: VertexId) -> OrientedSymbol;
}

impl Colored for CompleteStructure {
    fn has_vertex(&self, v: VertexId) -> bool {
        self.contains(v)
    }

    fn edge(&self, a: VertexId, b: VertexId) -> OrientedSymbol {
        self.color(a, b)
            .expect("distinct vertices of the structure")
    }
}

/// Where a tuple coordinate lives relative to the base.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Slot {
    /// Equal to the `j`-th base element (base kept sorted).
    Base(usize),
    /// The `f`-th distinct coordinate outside the base.
    Fresh(usize),
}

/// Quantifier-free type of a tuple over a finite base.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct TypeDescriptor {
    base: Vec<VertexId>,
    slots: Vec<Slot>,
    /// `to_base[f][j]` is `r(x_f, b_j)`.
    to_base: Vec<Vec<OrientedSymbol>>,
    /// `among[f][g]` is `r(x_f, x_g)` for `f < g`; `among[f]` has length
    /// `fresh - f - 1`, indexed by `g - f - 1`.
    among: Vec<Vec<OrientedSymbol>>,
}

impl TypeDescriptor {
    /// One-point type from colours `r(x, b_j)` over a sorted base.
    pub fn one_point(base: Vec<VertexId>, to_base: Vec<OrientedSymbol>) -> Result<Self> {
        if base.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("type base must be sorted and distinct"));
        }
        if to_base.len() != base.len() {
            return Err(Error::invalid("one colour per base element required"));
        }
        Ok(TypeDescriptor {
            base,
            slots: vec![Slot::Fresh(0)],
            to_base: vec![to_base],
            among: vec![Vec::new()],
        })
    }

    pub fn base(&self) -> &[VertexId] {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Number of distinct coordinates outside the base.
    pub fn fresh_count(&self) -> usize {
        self.to_base.len()
    }

    /// A type is algebraic exactly when some coordinate lies in the base.
    pub fn is_algebraic(&self) -> bool {
        self.slots.iter().any(|s| matches!(s, Slot::Base(_)))
    }

    /// `r(x_f, b_j)`.
    pub fn color_to_base(&self, f: usize, j: usize) -> OrientedSymbol {
        self.to_base[f][j]
    }

    /// `r(x_f, x_g)` for distinct fresh coordinates.
    pub fn color_among(&self, f: usize, g: usize) -> OrientedSymbol {
        assert_ne!(f, g, "irreflexive");
        if f < g {
            self.among[f][g - f - 1]
        } else {
            self.among[g][f - g - 1].dual()
        }
    }

    /// Whether `tuple` (inside `m`) realises this type.
    pub fn is_realized_by<M: Colored + ?Sized>(&self, m: &M, tuple: &[VertexId]) -> bool {
        if tuple.len() != self.arity() || !tuple.iter().all(|&v| m.has_vertex(v)) {
            return false;
        }
        let mut fresh: Vec<Option<VertexId>> = vec![None; self.fresh_count()];
        for (&v, &slot) in tuple.iter().zip(&self.slots) {
            match slot {
                Slot::Base(j) => {
                    if self.base[j] != v {
                        return false;
                    }
                }
                Slot::Fresh(f) => match fresh[f] {
                    Some(w) if w != v => return false,
                    _ => fresh[f] = Some(v),
                },
            }
        }
        let fresh: Vec<VertexId> = fresh
            .into_iter()
            .map(|x| x.expect("every fresh slot used"))
            .collect();
        for (f, &x) in fresh.iter().enumerate() {
            if self.base.binary_search(&x).is_ok() {
                return false;
            }
            for (j, &b) in self.base.iter().enumerate() {
                if m.edge(x, b) != self.to_base[f][j] {
                    return false;
                }
            }
            for g in f + 1..fresh.len() {
                if fresh[g] == x || m.edge(x, fresh[g]) != self.color_among(f, g) {
                    return false;
                }
            }
        }
        true
    }

    /// The type with its base mapped through `f` and re-sorted; `None` when
    /// `f` is undefined on some base element or not injective there.
    pub fn transport(&self, f: &dyn Fn(VertexId) -> Option<VertexId>) -> Option<TypeDescriptor> {
        let images: Vec<VertexId> = self.base.iter().map(|&b| f(b)).collect::<Option<_>>()?;
        let mut order: Vec<usize> = (0..images.len()).collect();
        order.sort_by_key(|&j| images[j]);
        if order.windows(2).any(|w| images[w[0]] == images[w[1]]) {
            return None;
        }
        // new position of old base index j
        let mut new_pos = vec![0; order.len()];
        for (p, &j) in order.iter().enumerate() {
            new_pos[j] = p;
        }
        Some(TypeDescriptor {
            base: order.iter().map(|&j| images[j]).collect(),
            slots: self
                .slots
                .iter()
                .map(|&s| match s {
                    Slot::Base(j) => Slot::Base(new_pos[j]),
                    fresh => fresh,
                })
                .collect(),
            to_base: self
                .to_base
                .iter()
                .map(|row| order.iter().map(|&j| row[j]).collect())
                .collect(),
            among: self.among.clone(),
        })
    }

    /// The type restricted to the base elements kept by `keep`.
    pub fn restrict_base(&self, keep: &[VertexId]) -> Result<TypeDescriptor> {
        let idx: Vec<usize> = (0..self.base.len())
            .filter(|&j| keep.contains(&self.base[j]))
            .collect();
        if self
            .slots
            .iter()
            .any(|s| matches!(s, Slot::Base(j) if !idx.contains(j)))
        {
            return Err(Error::invalid(
                "restriction would drop a base coordinate of the tuple",
            ));
        }
        let pos = |j: usize| idx.iter().position(|&k| k == j).expect("kept");
        Ok(TypeDescriptor {
            base: idx.iter().map(|&j| self.base[j]).collect(),
            slots: self
                .slots
                .iter()
                .map(|&s| match s {
                    Slot::Base(j) => Slot::Base(pos(j)),
                    fresh => fresh,
                })
                .collect(),
            to_base: self
                .to_base
                .iter()
                .map(|row| idx.iter().map(|&j| row[j]).collect())
                .collect(),
            among: self.among.clone(),
        })
    }

    /// Same tuple shape over `base ∪ extra`, with `colours[f][e]` giving
    /// `r(x_f, extra_e)`. Extra elements already in the base are rejected.
    pub fn extend_base(
        &self,
        extra: &[VertexId],
        colours: &[Vec<OrientedSymbol>],
    ) -> Result<TypeDescriptor> {
        if colours.len() != self.fresh_count() || colours.iter().any(|row| row.len() != extra.len())
        {
            return Err(Error::invalid(
                "one colour per fresh coordinate and extra element required",
            ));
        }
        let mut all: Vec<(VertexId, Option<usize>, Option<usize>)> = self
            .base
            .iter()
            .enumerate()
            .map(|(j, &b)| (b, Some(j), None))
            .chain(extra.iter().enumerate().map(|(e, &x)| (x, None, Some(e))))
            .collect();
        all.sort_unstable_by_key(|t| t.0);
        if all.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("extra elements must be new and distinct"));
        }
        let mut new_index = vec![0; self.base.len()];
        for (p, t) in all.iter().enumerate() {
            if let Some(j) = t.1 {
                new_index[j] = p;
            }
        }
        Ok(TypeDescriptor {
            base: all.iter().map(|t| t.0).collect(),
            slots: self
                .slots
                .iter()
                .map(|&s| match s {
                    Slot::Base(j) => Slot::Base(new_index[j]),
                    fresh => fresh,
                })
                .collect(),
            to_base: (0..self.fresh_count())
                .map(|f| {
                    all.iter()
                        .map(|t| match t {
                            (_, Some(j), _) => self.to_base[f][*j],
                            (_, None, Some(e)) => colours[f][*e],
                            _ => unreachable!("every entry is base or extra"),
                        })
                        .collect()
                })
                .collect(),
            among: self.among.clone(),
        })
    }

    /// The induced pattern on base ∪ tuple, with fresh coordinates placed on
    /// ids above the base (and above `floor`). Returns the structure and the
    /// ids used for the fresh coordinates.
    pub fn pattern<M: Colored + ?Sized>(
        &self,
        m: &M,
        floor: VertexId,
    ) -> Result<(CompleteStructure, Vec<VertexId>)> {
        let start = self
            .base
            .iter()
            .copied()
            .max()
            .map_or(0, |x| x + 1)
            .max(floor);
        let fresh: Vec<VertexId> = (0..self.fresh_count() as VertexId)
            .map(|f| start + f)
            .collect();
        let mut ids = self.base.clone();
        ids.extend(&fresh);
        let s = CompleteStructure::from_fn(&ids, |x, y| match (x >= start, y >= start) {
            (false, false) => m.edge(x, y),
            (true, false) => {
                let j = self.base.binary_search(&y).expect("base id");
                self.to_base[(x - start) as usize][j]
            }
            (false, true) => {
                let j = self.base.binary_search(&x).expect("base id");
                self.to_base[(y - start) as usize][j].dual()
            }
            (true, true) => self.color_among((x - start) as usize, (y - start) as usize),
        })?;
        Ok((s, fresh))
    }

    /// Checks that the pattern over `m` embeds no forbidden triangle
    /// involving a fresh coordinate.
    pub fn check_consistent<M: Colored + ?Sized>(&self, m: &M, t: &TriangleSet) -> Result<()> {
        for &b in &self.base {
            if !m.has_vertex(b) {
                return Err(Error::invalid(format!(
                    "type base vertex {b} not in structure"
                )));
            }
        }
        let n = self.fresh_count();
        let k = self.base.len();
        for f in 0..n {
            for i in 0..k {
                for j in i + 1..k {
                    let bij = m.edge(self.base[i], self.base[j]);
                    if t.forbids(self.to_base[f][i], self.to_base[f][j], bij) {
                        return Err(Error::invalid("type pattern embeds a forbidden triangle"));
                    }
                }
            }
            for g in f + 1..n {
                let fg = self.color_among(f, g);
                for j in 0..k {
                    if t.forbids(fg, self.to_base[f][j], self.to_base[g][j]) {
                        return Err(Error::invalid("type pattern embeds a forbidden triangle"));
                    }
                }
                for h in g + 1..n {
                    if t.forbids(fg, self.color_among(f, h), self.color_among(g, h)) {
                        return Err(Error::invalid("type pattern embeds a forbidden triangle"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `tp(a/B)` inside `m`.
pub fn tp<M: Colored + ?Sized>(
    m: &M,
    tuple: &[VertexId],
    base: &[VertexId],
) -> Result<TypeDescriptor> {
    for &v in tuple.iter().chain(base) {
        if !m.has_vertex(v) {
            return Err(Error::invalid(format!("vertex {v} not in structure")));
        }
    }
    let mut base = base.to_vec();
    base.sort_unstable();
    base.dedup();
    let mut fresh: Vec<VertexId> = Vec::new();
    let mut index: BTreeMap<VertexId, usize> = BTreeMap::new();
    let slots = tuple
        .iter()
        .map(|&v| {
            if let Ok(j) = base.binary_search(&v) {
                Slot::Base(j)
            } else {
                let f = *index.entry(v).or_insert_with(|| {
                    fresh.push(v);
                    fresh.len() - 1
                });
                Slot::Fresh(f)
            }
        })
        .collect();
    let to_base = fresh
        .iter()
        .map(|&x| base.iter().map(|&b| m.edge(x, b)).collect())
        .collect();
    let among = (0..fresh.len())
        .map(|f| {
            (f + 1..fresh.len())
                .map(|g| m.edge(fresh[f], fresh[g]))
                .collect()
        })
        .collect();
    Ok(TypeDescriptor {
        base,
        slots,
        to_base,
        among,
    })
}

/// All non-algebraic one-point types over `base` avoiding `t`, in
/// lexicographic order of their colour vectors.
pub fn one_point_extensions<M: Colored + ?Sized>(
    m: &M,
    base: &[VertexId],
    symbols: &[OrientedSymbol],
    t: &TriangleSet,
) -> Result<Vec<TypeDescriptor>> {
    let mut base = base.to_vec();
    base.sort_unstable();
    base.dedup();
    for &b in &base {
        if !m.has_vertex(b) {
            return Err(Error::invalid(format!("base vertex {b} not in structure")));
        }
    }
    let k = base.len();
    let mut out = Vec::new();
    let mut digits = vec![0usize; k];
    loop {
        let ok = (0..k).all(|i| {
            (i + 1..k).all(|j| {
                !t.forbids(
                    symbols[digits[i]],
                    symbols[digits[j]],
                    m.edge(base[i], base[j]),
                )
            })
        });
        if ok {
            let colours = digits.iter().map(|&d| symbols[d]).collect();
            out.push(TypeDescriptor::one_point(base.clone(), colours)?);
        }
        // most significant digit first so the list is lexicographic
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < symbols.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::cherlin_preset;
    use crate::structure::{find_isomorphism, Language};

    fn lit(x: &str) -> CompleteStructure {
        CompleteStructure::parse_literal(x).unwrap()
    }

    #[test]
    fn algebraic_when_tuple_meets_base() {
        let m = lit("0 1 G+\n1 2 R-\n0 2 G-\n");
        assert!(tp(&m, &[1], &[1, 2]).unwrap().is_algebraic());
        assert!(!tp(&m, &[0], &[1, 2]).unwrap().is_algebraic());
    }

    #[test]
    fn singleton_types_over_empty_base_coincide() {
        let m = lit("0 1 G+\n1 2 R-\n0 2 G-\n");
        let t0 = tp(&m, &[0], &[]).unwrap();
        for v in [1, 2] {
            assert_eq!(tp(&m, &[v], &[]).unwrap(), t0);
        }
    }

    #[test]
    fn extension_counts() {
        let lang = Language::two_asymmetric();
        let s8 = cherlin_preset(8).unwrap().triangles;
        let m = lit("0 1 G+\n1 2 R-\n0 2 G-\n");
        let syms = lang.oriented_symbols();
        assert_eq!(one_point_extensions(&m, &[], syms, &s8).unwrap().len(), 1);
        assert_eq!(one_point_extensions(&m, &[2], syms, &s8).unwrap().len(), 4);
        // brute force over the 16 colourings of a point against {0, 1}
        let mut brute = 0;
        for x in syms {
            for y in syms {
                let pat = m
                    .induced(&[0, 1])
                    .unwrap()
                    .with_vertex(9, |v| if v == 0 { *x } else { *y })
                    .unwrap();
                if crate::structure::embeds_forbidden(&pat, &s8).is_none() {
                    brute += 1;
                }
            }
        }
        assert_eq!(
            one_point_extensions(&m, &[0, 1], syms, &s8).unwrap().len(),
            brute
        );
        assert!(brute < 16);
    }

    #[test]
    fn equality_matches_isomorphism_over_fixed_base() {
        let m = lit("0 1 G+\n0 2 R+\n0 3 R+\n1 2 G+\n1 3 G+\n2 3 R-\n");
        for x in 0..4 {
            for y in 0..4 {
                if x == 0 || y == 0 {
                    continue;
                }
                let (px, py) = (tp(&m, &[x], &[0]).unwrap(), tp(&m, &[y], &[0]).unwrap());
                let sx = m
                    .induced(&[0, x])
                    .unwrap()
                    .relabel(|v| if v == 0 { 0 } else { 7 })
                    .unwrap();
                let sy = m
                    .induced(&[0, y])
                    .unwrap()
                    .relabel(|v| if v == 0 { 0 } else { 7 })
                    .unwrap();
                let fixed = BTreeMap::from([(0, 0), (7, 7)]);
                assert_eq!(px == py, find_isomorphism(&sx, &sy, &fixed).is_some());
            }
        }
    }

    #[test]
    fn repeated_coordinates_and_transport() {
        let m = lit("0 1 G+\n0 2 R+\n1 2 G-\n");
        let p = tp(&m, &[2, 2, 1], &[0]).unwrap();
        assert_eq!(p.arity(), 3);
        assert_eq!(p.fresh_count(), 2);
        assert!(p.is_realized_by(&m, &[2, 2, 1]));
        assert!(!p.is_realized_by(&m, &[2, 1, 1]));
        let moved = p.transport(&|v| Some(v + 10)).unwrap();
        assert_eq!(moved.base(), &[10]);
        assert_eq!(moved.transport(&|v| Some(v - 10)).unwrap(), p);
    }

    #[test]
    fn transport_resorts_base() {
        let m = lit("0 1 G+\n0 2 R+\n1 2 G-\n");
        let p = tp(&m, &[2], &[0, 1]).unwrap();
        let q = p.transport(&|v| Some(1 - v)).unwrap();
        assert_eq!(q.base(), &[0, 1]);
        assert_eq!(q.color_to_base(0, 0), p.color_to_base(0, 1));
        assert!(p.transport(&|_| Some(3)).is_none());
    }
}
