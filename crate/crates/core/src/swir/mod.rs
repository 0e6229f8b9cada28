//! The independence relation `A ⫝_B C` over two backends and exhaustive
//! audits of the stationary weak independence axioms.

mod audit;
mod dlo;
mod forb;

use std::fmt::Debug;
use std::hash::Hash;

use crate::error::Result;
pub use crate::fraisse::Side;

pub use audit::{
    audit_all, audit_axiom, monotonicity_decompose, replay_counterexample, AuditBounds,
    AuditCounterexample, Axiom, AxiomReport, MonotonicityInstance, Variant, LITERAL_READING,
    MIRROR_READING,
};
pub use dlo::{DloBackend, DloSlot, DloType};
pub use forb::ForbLimitBackend;

/// Universe elements are indices `0..len()`.
pub type Elem = u32;

/// What the audits and the back-and-forth constructions need from a
/// structure carrying an independence relation.
pub trait IndependenceBackend: Clone {
    type Type: Clone + Eq + Hash + Debug;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `A ⫝_B C`; false whenever `A ∩ C ⊄ B`.
    fn ind(&self, a: &[Elem], b: &[Elem], c: &[Elem]) -> bool;

    /// Pairwise form of `ind` over the first `window` elements: row `a` is
    /// the mask of `c` with `{a} ⫝_B {c}`, for `a, c` outside `B` and
    /// distinct. For both backends here `A ⫝_B C` holds iff `A ∩ C ⊆ B`
    /// and every cross pair outside `B` is independent.
    fn pair_rows(&self, base: u64, window: usize) -> Vec<u64>;

    fn tp(&self, tuple: &[Elem], base: &[Elem]) -> Self::Type;

    /// Maps the type's base through `f`; `None` if `f` is undefined there or
    /// does not preserve the base's structure.
    fn transport(&self, p: &Self::Type, f: &dyn Fn(Elem) -> Option<Elem>) -> Option<Self::Type>;

    fn type_base(&self, p: &Self::Type) -> Vec<Elem>;

    fn type_arity(&self, p: &Self::Type) -> usize;

    fn is_algebraic(&self, p: &Self::Type) -> bool;

    /// Non-algebraic types over `base ∪ extra` extending `p`.
    fn refinements(&self, p: &Self::Type, extra: &[Elem]) -> Vec<Self::Type>;

    fn realizations(&self, p: &Self::Type) -> Vec<Vec<Elem>>;

    /// Adds a fresh realisation of `p` independent of the whole current
    /// universe on `side` (`Left`: `a ⫝_B M`, `Right`: `M ⫝_B a`). Fails
    /// with a budget error when the element cap would be exceeded.
    fn realize(&mut self, p: &Self::Type, side: Side) -> Result<Vec<Elem>>;

    /// Whether `x_i ↦ y_i` is a partial isomorphism.
    fn is_partial_iso(&self, pairs: &[(Elem, Elem)]) -> bool;

    /// Non-algebraic 1-types over `base`.
    fn one_types(&self, base: &[Elem]) -> Vec<Self::Type>;

    /// Whether the relation is expected to be symmetric.
    fn expects_symmetry(&self) -> bool;

    /// Short human-readable name for reports.
    fn describe(&self) -> String;
}

/// `ind` evaluated through pair rows, for masks inside the window.
#[cfg(test)]
pub(crate) fn ind_by_rows(rows: &[u64], a: u64, b: u64, c: u64) -> bool {
    if a & c & !b != 0 {
        return false;
    }
    let cc = c & !b;
    let mut aa = a & !b;
    while aa != 0 {
        let x = aa.trailing_zeros() as usize;
        if cc & !rows[x] != 0 {
            return false;
        }
        aa &= aa - 1;
    }
    true
}

pub(crate) fn mask_of(xs: &[Elem]) -> u64 {
    xs.iter().fold(0, |m, &x| m | (1u64 << x))
}

pub(crate) fn elems_of(mask: u64) -> Vec<Elem> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros());
        m &= m - 1;
    }
    out
}
