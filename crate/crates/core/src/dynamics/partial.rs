use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::swir::{Elem, IndependenceBackend};

/// A finite injective map on universe elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Elem, Elem)>", into = "Vec<(Elem, Elem)>")]
pub struct PartialAutomorphism {
    fwd: BTreeMap<Elem, Elem>,
    inv: BTreeMap<Elem, Elem>,
}

impl PartialAutomorphism {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn identity_on(set: &[Elem]) -> Self {
        let mut m = Self::empty();
        for &x in set {
            m.fwd.insert(x, x);
            m.inv.insert(x, x);
        }
        m
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Result<Self> {
        let mut m = Self::empty();
        for (x, y) in pairs {
            m.insert(x, y)?;
        }
        Ok(m)
    }

    /// Adds `x ↦ y`; a repeated identical pair is accepted.
    pub fn insert(&mut self, x: Elem, y: Elem) -> Result<()> {
        match (self.fwd.get(&x), self.inv.get(&y)) {
            (Some(&y0), _) if y0 == y => Ok(()),
            (Some(&y0), _) => Err(Error::invalid(format!("{x} already maps to {y0}, not {y}"))),
            (None, Some(&x0)) => Err(Error::invalid(format!("{y} is already the image of {x0}"))),
            (None, None) => {
                self.fwd.insert(x, y);
                self.inv.insert(y, x);
                Ok(())
            }
        }
    }

    /// Adds `xs[i] ↦ ys[i]` for every coordinate.
    pub fn insert_tuple(&mut self, xs: &[Elem], ys: &[Elem]) -> Result<()> {
        if xs.len() != ys.len() {
            return Err(Error::invalid("tuples of different lengths"));
        }
        xs.iter().zip(ys).try_for_each(|(&x, &y)| self.insert(x, y))
    }

    pub fn get(&self, x: Elem) -> Option<Elem> {
        self.fwd.get(&x).copied()
    }

    pub fn preimage(&self, y: Elem) -> Option<Elem> {
        self.inv.get(&y).copied()
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn domain(&self) -> Vec<Elem> {
        self.fwd.keys().copied().collect()
    }

    pub fn range(&self) -> Vec<Elem> {
        self.inv.keys().copied().collect()
    }

    pub fn pairs(&self) -> Vec<(Elem, Elem)> {
        self.fwd.iter().map(|(&x, &y)| (x, y)).collect()
    }

    pub fn apply(&self, xs: &[Elem]) -> Option<Vec<Elem>> {
        xs.iter().map(|&x| self.get(x)).collect()
    }

    pub fn inverse(&self) -> Self {
        PartialAutomorphism {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }

    /// `self ∘ other` on the points where both steps are defined.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::empty();
        for (&x, &y) in &other.fwd {
            if let Some(z) = self.get(y) {
                out.fwd.insert(x, z);
                out.inv.insert(z, x);
            }
        }
        out
    }

    /// `a g a⁻¹`.
    pub fn conjugate_by(&self, a: &Self) -> Self {
        a.compose(&self.compose(&a.inverse()))
    }

    /// `[g, h] = g⁻¹ h⁻¹ g h`.
    pub fn commutator(g: &Self, h: &Self) -> Self {
        g.inverse().compose(&h.inverse().compose(&g.compose(h)))
    }

    pub fn restrict(&self, set: &[Elem]) -> Self {
        let mut out = Self::empty();
        for &x in set {
            if let Some(y) = self.get(x) {
                out.fwd.insert(x, y);
                out.inv.insert(y, x);
            }
        }
        out
    }

    /// Whether every pair of `other` is a pair of `self`.
    pub fn extends(&self, other: &Self) -> bool {
        other.fwd.iter().all(|(x, y)| self.fwd.get(x) == Some(y))
    }

    pub fn fixes(&self, set: &[Elem]) -> bool {
        set.iter().all(|&x| self.get(x) == Some(x))
    }

    pub fn is_identity(&self) -> bool {
        self.fwd.iter().all(|(x, y)| x == y)
    }

    pub fn is_partial_iso<B: IndependenceBackend>(&self, backend: &B) -> bool {
        backend.is_partial_iso(&self.pairs())
    }
}

impl TryFrom<Vec<(Elem, Elem)>> for PartialAutomorphism {
    type Error = Error;

    fn try_from(pairs: Vec<(Elem, Elem)>) -> Result<Self> {
        Self::from_pairs(pairs)
    }
}

impl From<PartialAutomorphism> for Vec<(Elem, Elem)> {
    fn from(m: PartialAutomorphism) -> Self {
        m.pairs()
    }
}

impl fmt::Display for PartialAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.fwd.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}↦{y}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swir::DloBackend;

    fn pa(pairs: &[(Elem, Elem)]) -> PartialAutomorphism {
        PartialAutomorphism::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn injectivity_is_enforced() {
        let mut m = pa(&[(0, 1)]);
        assert!(m.insert(0, 1).is_ok());
        assert!(m.insert(0, 2).is_err());
        assert!(m.insert(3, 1).is_err());
    }

    #[test]
    fn composition_and_inverse() {
        let g = pa(&[(0, 1), (1, 2)]);
        let h = pa(&[(1, 5), (2, 6)]);
        let hg = h.compose(&g);
        assert_eq!(hg.pairs(), vec![(0, 5), (1, 6)]);
        assert_eq!(
            g.compose(&g.inverse()),
            PartialAutomorphism::identity_on(&[1, 2])
        );
    }

    #[test]
    fn conjugation_agrees_on_fixed_points() {
        // a fixes X ∪ g(X), so g^a = g on X
        let g = pa(&[(0, 1), (2, 3)]);
        let a = pa(&[(0, 0), (1, 1), (3, 7), (2, 9)]);
        let ga = g.conjugate_by(&a);
        assert_eq!(ga.get(0), Some(1));
        assert_eq!(ga.get(9), Some(7));
    }

    #[test]
    fn commutator_matches_four_step_composition() {
        let g = pa(&[(0, 1), (1, 2), (2, 0)]);
        let h = pa(&[(0, 0), (1, 2), (2, 1)]);
        let c = PartialAutomorphism::commutator(&g, &h);
        for x in 0..3 {
            let y = g
                .inverse()
                .get(h.inverse().get(g.get(h.get(x).unwrap()).unwrap()).unwrap())
                .unwrap();
            assert_eq!(c.get(x), Some(y));
        }
    }

    #[test]
    fn order_preservation_on_dlo() {
        let d = DloBackend::grid(6, 6);
        assert!(pa(&[(0, 1), (3, 5)]).is_partial_iso(&d));
        assert!(!pa(&[(0, 5), (3, 1)]).is_partial_iso(&d));
    }

    #[test]
    fn json_round_trip() {
        let g = pa(&[(4, 1), (0, 3)]);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, "[[0,3],[4,1]]");
        assert_eq!(serde_json::from_str::<PartialAutomorphism>(&s).unwrap(), g);
        assert!(serde_json::from_str::<PartialAutomorphism>("[[0,1],[0,2]]").is_err());
    }
}
