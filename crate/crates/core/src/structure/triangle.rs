use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::complete::{CompleteStructure, VertexId};
use super::symbol::{Language, OrientedSymbol};
use crate::error::{Error, Result};

/// The three vertex orderings of a triangle, read as
/// `(r(a,b), r(a,c), r(b,c))`. Only the canonical representative (the
/// lexicographically least reading over all six vertex orders) is stored.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrianglePattern([OrientedSymbol; 3]);

const ORDERINGS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// All six readings of the ordered triple `(ab, ac, bc)`.
pub fn readings(
    ab: OrientedSymbol,
    ac: OrientedSymbol,
    bc: OrientedSymbol,
) -> [[OrientedSymbol; 3]; 6] {
    let edge = |i: usize, j: usize| -> OrientedSymbol {
        match (i, j) {
            (0, 1) => ab,
            (0, 2) => ac,
            (1, 2) => bc,
            (1, 0) => ab.dual(),
            (2, 0) => ac.dual(),
            (2, 1) => bc.dual(),
            _ => unreachable!("irreflexive"),
        }
    };
    ORDERINGS.map(|[x, y, z]| [edge(x, y), edge(x, z), edge(y, z)])
}

impl TrianglePattern {
    pub fn new(ab: OrientedSymbol, ac: OrientedSymbol, bc: OrientedSymbol) -> Self {
        let best = readings(ab, ac, bc)
            .into_iter()
            .min()
            .expect("six readings");
        TrianglePattern(best)
    }

    pub fn edges(&self) -> [OrientedSymbol; 3] {
        self.0
    }

    /// The pattern as a structure on vertices `0, 1, 2`.
    pub fn to_structure(&self) -> CompleteStructure {
        let [ab, ac, bc] = self.0;
        CompleteStructure::from_edges(&[0, 1, 2], &[(0, 1, ab), (0, 2, ac), (1, 2, bc)])
            .expect("three coloured pairs")
    }
}

impl fmt::Display for TrianglePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Debug for TrianglePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for TrianglePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let [ab, ac, bc] = toks.as_slice() else {
            return Err(Error::invalid(format!(
                "triangle `{s}` needs three symbols"
            )));
        };
        Ok(TrianglePattern::new(ab.parse()?, ac.parse()?, bc.parse()?))
    }
}

/// An isomorphism-closed set of forbidden triangles.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct TriangleSet {
    patterns: BTreeSet<TrianglePattern>,
}

impl TriangleSet {
    pub fn new<I: IntoIterator<Item = TrianglePattern>>(patterns: I) -> Self {
        TriangleSet {
            patterns: patterns.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        TriangleSet::default()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TrianglePattern> {
        self.patterns.iter()
    }

    pub fn contains(&self, p: &TrianglePattern) -> bool {
        self.patterns.contains(p)
    }

    /// Whether the ordered reading `(r(a,b), r(a,c), r(b,c))` is forbidden.
    pub fn forbids(&self, ab: OrientedSymbol, ac: OrientedSymbol, bc: OrientedSymbol) -> bool {
        self.patterns.contains(&TrianglePattern::new(ab, ac, bc))
    }

    /// Parses one pattern per line with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let p = line
                .parse()
                .map_err(|e: Error| Error::parse(lineno + 1, e.to_string()))?;
            out.insert(p);
        }
        Ok(TriangleSet { patterns: out })
    }

    pub fn to_text(&self) -> String {
        self.patterns.iter().map(|p| format!("{p}\n")).collect()
    }

    pub fn check_language(&self, lang: &Language) -> Result<()> {
        for p in &self.patterns {
            for s in p.edges() {
                if !lang.contains(s) {
                    return Err(Error::invalid(format!(
                        "pattern {p} uses {s}, not in language"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn compile(&self, lang: &Language) -> Result<TriangleTable> {
        self.check_language(lang)?;
        let k = lang.oriented_symbols().len();
        let mut table = vec![false; k * k * k];
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    table[(x * k + y) * k + z] = self.forbids(
                        lang.symbol(x as u8),
                        lang.symbol(y as u8),
                        lang.symbol(z as u8),
                    );
                }
            }
        }
        Ok(TriangleTable { k, table })
    }
}

/// Lookup table over language codes: `forbids(ab, ac, bc)` in O(1).
#[derive(Clone, Debug)]
pub struct TriangleTable {
    k: usize,
    table: Vec<bool>,
}

impl TriangleTable {
    #[inline]
    pub fn forbids(&self, ab: u8, ac: u8, bc: u8) -> bool {
        self.table[(ab as usize * self.k + ac as usize) * self.k + bc as usize]
    }
}

/// Canonical pattern of the substructure induced on `a, b, c`.
pub fn triangle_of(
    s: &CompleteStructure,
    a: VertexId,
    b: VertexId,
    c: VertexId,
) -> Result<TrianglePattern> {
    if a == b || a == c || b == c {
        return Err(Error::invalid("triangle vertices must be distinct"));
    }
    Ok(TrianglePattern::new(
        s.try_color(a, b)?,
        s.try_color(a, c)?,
        s.try_color(b, c)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub vertices: [VertexId; 3],
    pub pattern: TrianglePattern,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.vertices;
        write!(f, "triangle ({a}, {b}, {c}) = {}", self.pattern)
    }
}

/// First forbidden triangle (in vertex order), if any.
pub fn embeds_forbidden(s: &CompleteStructure, t: &TriangleSet) -> Option<Violation> {
    if t.is_empty() {
        return None;
    }
    let ids = s.vertices();
    let n = ids.len();
    for i in 0..n {
        for j in i + 1..n {
            let ab = s.color_at(i, j).expect("complete");
            for k in j + 1..n {
                let p =
                    TrianglePattern::new(ab, s.color_at(i, k).unwrap(), s.color_at(j, k).unwrap());
                if t.contains(&p) {
                    return Some(Violation {
                        vertices: [ids[i], ids[j], ids[k]],
                        pattern: p,
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> OrientedSymbol {
        x.parse().unwrap()
    }

    #[test]
    fn cycle_with_red_back_edge_is_the_rgg_pattern() {
        // x->y G, y->z G, z->x R
        let m = CompleteStructure::parse_literal("0 1 G+\n1 2 G+\n2 0 R+\n").unwrap();
        let p = triangle_of(&m, 0, 1, 2).unwrap();
        assert_eq!(p, TrianglePattern::new(s("G+"), s("R-"), s("G+")));
        assert_eq!(p, "R+ G- G+".parse().unwrap());
    }

    #[test]
    fn symmetric_triangle_is_fixed() {
        let p = TrianglePattern::new(s("X"), s("X"), s("X"));
        assert_eq!(p.edges(), [s("X"); 3]);
    }

    #[test]
    fn distinct_vertices_required() {
        let m = CompleteStructure::parse_literal("0 1 G+\n").unwrap();
        assert!(triangle_of(&m, 0, 0, 1).is_err());
        assert!(triangle_of(&m, 0, 1, 5).is_err());
    }

    #[test]
    fn small_structures_embed_nothing() {
        let t: TriangleSet = TriangleSet::parse("G+ G- G+\nR+ G- G+\n").unwrap();
        let m = CompleteStructure::parse_literal("0 1 G+\n").unwrap();
        assert!(embeds_forbidden(&m, &t).is_none());
        let cyc = CompleteStructure::parse_literal("0 1 G+\n1 2 G+\n2 0 R+\n").unwrap();
        let v = embeds_forbidden(&cyc, &t).unwrap();
        assert_eq!(v.vertices, [0, 1, 2]);
    }

    #[test]
    fn table_matches_set() {
        let lang = Language::two_asymmetric();
        let t = TriangleSet::parse("G+ G- G+\nR+ G- G+\n").unwrap();
        let table = t.compile(&lang).unwrap();
        for x in 0..4u8 {
            for y in 0..4u8 {
                for z in 0..4u8 {
                    assert_eq!(
                        table.forbids(x, y, z),
                        t.forbids(lang.symbol(x), lang.symbol(y), lang.symbol(z))
                    );
                }
            }
        }
    }
}
