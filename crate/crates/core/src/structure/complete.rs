use std::collections::BTreeMap;
use std::fmt;

use super::symbol::{Language, OrientedSymbol};
use crate::error::{Error, Result};

pub type VertexId = u32;

/// A finite complete edge-coloured directed graph: every ordered pair of
/// distinct vertices carries exactly one oriented symbol and
/// `color(y, x) == color(x, y).dual()`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CompleteStructure {
    ids: Vec<VertexId>,
    colors: Vec<Option<OrientedSymbol>>,
}

impl CompleteStructure {
    pub fn empty() -> Self {
        CompleteStructure {
            ids: Vec::new(),
            colors: Vec::new(),
        }
    }

    pub fn singleton(v: VertexId) -> Self {
        CompleteStructure {
            ids: vec![v],
            colors: vec![None],
        }
    }

    /// Builds a structure by asking `f(x, y)` for every pair with `x < y`.
    pub fn from_fn<F>(vertices: &[VertexId], mut f: F) -> Result<Self>
    where
        F: FnMut(VertexId, VertexId) -> OrientedSymbol,
    {
        let mut ids = vertices.to_vec();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate vertex id"));
        }
        let n = ids.len();
        let mut colors = vec![None; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let s = f(ids[i], ids[j]);
                colors[i * n + j] = Some(s);
                colors[j * n + i] = Some(s.dual());
            }
        }
        Ok(CompleteStructure { ids, colors })
    }

    /// Builds a structure from `(a, b, symbol)` triples; each unordered pair
    /// must be listed once, in either direction.
    pub fn from_edges(
        vertices: &[VertexId],
        edges: &[(VertexId, VertexId, OrientedSymbol)],
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(a, b, s) in edges {
            if a == b {
                return Err(Error::invalid(format!("loop at vertex {a}")));
            }
            let (key, val) = if a < b {
                ((a, b), s)
            } else {
                ((b, a), s.dual())
            };
            if let Some(prev) = map.insert(key, val) {
                if prev != val {
                    return Err(Error::invalid(format!(
                        "pair {a},{b} coloured twice ({prev} and {val})"
                    )));
                }
            }
        }
        let mut ids = vertices.to_vec();
        ids.sort_unstable();
        ids.dedup();
        for &(a, b) in map.keys() {
            if ids.binary_search(&a).is_err() || ids.binary_search(&b).is_err() {
                return Err(Error::invalid(format!(
                    "edge {a} {b} uses an unknown vertex"
                )));
            }
        }
        let mut missing = None;
        let s = CompleteStructure::from_fn(&ids, |a, b| match map.get(&(a, b)) {
            Some(&s) => s,
            None => {
                missing.get_or_insert((a, b));
                "R+".parse().expect("static")
            }
        })?;
        if let Some((a, b)) = missing {
            return Err(Error::invalid(format!("pair {a},{b} is not coloured")));
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index_of(v).is_some()
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.ids.binary_search(&v).ok()
    }

    /// Colour of the ordered pair `(a, b)`; `None` when `a == b` or a vertex
    /// is missing.
    pub fn color(&self, a: VertexId, b: VertexId) -> Option<OrientedSymbol> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        self.colors[i * self.len() + j]
    }

    pub fn color_at(&self, i: usize, j: usize) -> Option<OrientedSymbol> {
        self.colors[i * self.len() + j]
    }

    pub fn try_color(&self, a: VertexId, b: VertexId) -> Result<OrientedSymbol> {
        self.color(a, b)
            .ok_or_else(|| Error::invalid(format!("no colour for pair ({a}, {b})")))
    }

    pub fn next_free_id(&self) -> VertexId {
        self.ids.last().map_or(0, |&v| v + 1)
    }

    /// Induced substructure on `subset`.
    pub fn induced(&self, subset: &[VertexId]) -> Result<Self> {
        for &v in subset {
            if !self.contains(v) {
                return Err(Error::invalid(format!("vertex {v} not in structure")));
            }
        }
        CompleteStructure::from_fn(subset, |a, b| self.color(a, b).expect("checked"))
    }

    /// Relabels vertices through `map`, which must be injective on the
    /// vertex set.
    pub fn relabel<F: Fn(VertexId) -> VertexId>(&self, map: F) -> Result<Self> {
        let new_ids: Vec<VertexId> = self.ids.iter().map(|&v| map(v)).collect();
        let back: BTreeMap<VertexId, VertexId> = self.ids.iter().map(|&v| (map(v), v)).collect();
        if back.len() != self.ids.len() {
            return Err(Error::invalid("relabelling is not injective"));
        }
        CompleteStructure::from_fn(&new_ids, |a, b| {
            self.color(back[&a], back[&b]).expect("present")
        })
    }

    /// Returns a copy with a new vertex `v` coloured against every existing
    /// vertex `x` by `colors(x)`, read as `color(v, x)`.
    pub fn with_vertex<F>(&self, v: VertexId, colors: F) -> Result<Self>
    where
        F: Fn(VertexId) -> OrientedSymbol,
    {
        let mut out = self.clone();
        out.push_vertex(v, colors)?;
        Ok(out)
    }

    /// Appends `v` in place. Kept crate-private: public structures are values.
    pub(crate) fn push_vertex<F>(&mut self, v: VertexId, colors: F) -> Result<()>
    where
        F: Fn(VertexId) -> OrientedSymbol,
    {
        if self.contains(v) {
            return Err(Error::invalid(format!("vertex {v} already present")));
        }
        let n = self.len();
        let pos = self.ids.partition_point(|&x| x < v);
        let mut ids = self.ids.clone();
        ids.insert(pos, v);
        let m = n + 1;
        let mut new_colors = vec![None; m * m];
        let remap = |i: usize| if i < pos { i } else { i + 1 };
        for i in 0..n {
            for j in 0..n {
                new_colors[remap(i) * m + remap(j)] = self.colors[i * n + j];
            }
        }
        for (i, &x) in self.ids.iter().enumerate() {
            let s = colors(x);
            new_colors[pos * m + remap(i)] = Some(s);
            new_colors[remap(i) * m + pos] = Some(s.dual());
        }
        self.ids = ids;
        self.colors = new_colors;
        Ok(())
    }

    /// Checks completeness, coherence and irreflexivity.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if self.colors[i * n + i].is_some() {
                return Err(Error::logical("diagonal pair is coloured"));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (Some(x), Some(y)) = (self.colors[i * n + j], self.colors[j * n + i]) else {
                    return Err(Error::logical("pair without colour"));
                };
                if y != x.dual() {
                    return Err(Error::logical(format!(
                        "incoherent pair ({}, {})",
                        self.ids[i], self.ids[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn check_language(&self, lang: &Language) -> Result<()> {
        for s in self.colors.iter().flatten() {
            if !lang.contains(*s) {
                return Err(Error::invalid(format!("symbol {s} not in language")));
            }
        }
        Ok(())
    }

    /// Parses the structure literal format: one `a b SYMBOL` line per
    /// unordered pair, optional bare `a` lines to declare isolated vertices,
    /// `#` comments.
    pub fn parse_literal(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let vid = |t: &str| -> Result<VertexId> {
                t.parse()
                    .map_err(|_| Error::parse(lineno + 1, format!("bad vertex id `{t}`")))
            };
            match toks.as_slice() {
                [a] => vertices.push(vid(a)?),
                [a, b, s] => {
                    let (a, b) = (vid(a)?, vid(b)?);
                    let s: OrientedSymbol = s
                        .parse()
                        .map_err(|e: Error| Error::parse(lineno + 1, e.to_string()))?;
                    vertices.push(a);
                    vertices.push(b);
                    edges.push((a, b, s));
                }
                _ => return Err(Error::parse(lineno + 1, "expected `a b SYMBOL`")),
            }
        }
        CompleteStructure::from_edges(&vertices, &edges)
    }

    /// Literal with one line per pair `a < b`; isolated vertices are
    /// declared on their own line.
    pub fn to_literal(&self) -> String {
        let mut out = String::new();
        if self.len() <= 1 {
            for v in &self.ids {
                out.push_str(&format!("{v}\n"));
            }
            return out;
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let s = self.color_at(i, j).expect("complete");
                out.push_str(&format!("{} {} {}\n", self.ids[i], self.ids[j], s));
            }
        }
        out
    }
}

impl fmt::Debug for CompleteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompleteStructure{:?} {{", self.ids)?;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                write!(
                    f,
                    " {}{}:{}",
                    self.ids[i],
                    self.ids[j],
                    self.color_at(i, j).unwrap()
                )?;
            }
        }
        write!(f, " }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> OrientedSymbol {
        x.parse().unwrap()
    }

    #[test]
    fn literal_derives_duals() {
        let m = CompleteStructure::parse_literal("0 1 G+\n1 2 G+\n2 0 R+\n").unwrap();
        assert_eq!(m.color(1, 0), Some(s("G-")));
        assert_eq!(m.color(0, 2), Some(s("R-")));
        m.check_invariants().unwrap();
        assert_eq!(
            CompleteStructure::parse_literal(&m.to_literal()).unwrap(),
            m
        );
    }

    #[test]
    fn incomplete_or_conflicting_literals_fail() {
        assert!(CompleteStructure::parse_literal("0 1 G+\n1 2 G+\n").is_err());
        assert!(CompleteStructure::parse_literal("0 1 G+\n1 0 G+\n").is_err());
        assert!(CompleteStructure::parse_literal("0 0 G+\n").is_err());
        assert!(CompleteStructure::parse_literal("0 1 G+ extra\n").is_err());
    }

    #[test]
    fn single_vertex_literal() {
        let m = CompleteStructure::parse_literal("7\n").unwrap();
        assert_eq!(m.vertices(), &[7]);
        assert_eq!(
            CompleteStructure::parse_literal(&m.to_literal()).unwrap(),
            m
        );
    }

    #[test]
    fn push_vertex_keeps_order_and_coherence() {
        let m = CompleteStructure::parse_literal("2 5 R+\n").unwrap();
        let m2 = m
            .with_vertex(3, |x| if x == 2 { s("G+") } else { s("R-") })
            .unwrap();
        assert_eq!(m2.vertices(), &[2, 3, 5]);
        assert_eq!(m2.color(3, 2), Some(s("G+")));
        assert_eq!(m2.color(2, 3), Some(s("G-")));
        assert_eq!(m2.color(5, 3), Some(s("R+")));
        assert_eq!(m2.color(2, 5), Some(s("R+")));
        m2.check_invariants().unwrap();
    }

    #[test]
    fn induced_and_relabel() {
        let m = CompleteStructure::parse_literal("0 1 G+\n1 2 G+\n2 0 R+\n").unwrap();
        let sub = m.induced(&[0, 2]).unwrap();
        assert_eq!(sub.color(2, 0), Some(s("R+")));
        let r = m.relabel(|v| v + 10).unwrap();
        assert_eq!(r.color(12, 10), Some(s("R+")));
        assert!(m.relabel(|_| 0).is_err());
        assert!(m.induced(&[9]).is_err());
    }
}
