//! Partial automorphisms over a growable universe and the finite-scale
//! back-and-forth constructions built from the independence relation.
//!
//! Conventions: `g^a = a g a⁻¹` and `[g, h] = g⁻¹ h⁻¹ g h`, composed right
//! to left.

mod builders;
mod partial;
mod pipeline;
mod random;
mod witness;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::swir::{Elem, IndependenceBackend, Side};

pub use builders::{
    colourrange_build, commutator_mover_build, default_schedule, ColourRangeReport,
    ColourRangeWitness, MoverReport, MoverSide, MoverVariant, MoverWitness, Schedule,
};
pub use partial::PartialAutomorphism;
pub use pipeline::{
    density_setup, density_witness, tz32_pipeline, tz34_solve, ConjugateProductCertificate,
    DensitySetup, DensityWitness, Tz32Output, VerifiedFact,
};
pub use random::{random_endpoints, random_partial_iso, random_pipeline_input, PipelineInput};
pub use witness::{
    addset, extend_partial, moving_witness, tz31, tz35, tz36, AddsetSide, IndConstraint,
    MovingMaxWitness,
};

/// How a registered map may grow when a word needs it at a new point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    /// Extended by back-and-forth, preferring existing vertices.
    Extendable,
    /// Never extended; undefined points abort the application.
    Frozen,
    /// Extended as the identity.
    Identity,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct MapId(pub usize);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter {
    pub map: MapId,
    pub inverse: bool,
}

/// A product of registered maps and their inverses. `letters[0]` is
/// applied last.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn map(id: MapId) -> Self {
        Word(vec![Letter {
            map: id,
            inverse: false,
        }])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inv(&self) -> Self {
        Word(
            self.0
                .iter()
                .rev()
                .map(|l| Letter {
                    map: l.map,
                    inverse: !l.inverse,
                })
                .collect(),
        )
    }

    /// `self ∘ other`, freely reduced.
    pub fn then(&self, other: &Word) -> Self {
        let mut out = self.0.clone();
        for &l in &other.0 {
            match out.last() {
                Some(&last) if last.map == l.map && last.inverse != l.inverse => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    /// `g^a = a g a⁻¹`.
    pub fn conj(g: &Word, a: &Word) -> Self {
        a.then(g).then(&a.inv())
    }

    /// `[g, h] = g⁻¹ h⁻¹ g h`.
    pub fn commutator(g: &Word, h: &Word) -> Self {
        g.inv().then(&h.inv()).then(g).then(h)
    }
}

/// Limits on candidate searches; the universe size cap lives in the backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsBudget {
    pub max_search: usize,
}

impl Default for DynamicsBudget {
    fn default() -> Self {
        DynamicsBudget { max_search: 4096 }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    map: PartialAutomorphism,
    kind: MapKind,
}

/// A backend together with named maps that grow on demand.
#[derive(Clone, Debug)]
pub struct Workbench<B> {
    backend: B,
    maps: Vec<Entry>,
    budget: DynamicsBudget,
}

impl<B: IndependenceBackend> Workbench<B> {
    pub fn new(backend: B, budget: DynamicsBudget) -> Self {
        Workbench {
            backend,
            maps: Vec::new(),
            budget,
        }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    pub fn into_backend(self) -> B {
        self.backend
    }

    pub fn budget(&self) -> DynamicsBudget {
        self.budget
    }

    pub fn add_map(
        &mut self,
        name: impl Into<String>,
        map: PartialAutomorphism,
        kind: MapKind,
    ) -> Result<MapId> {
        if !map.is_partial_iso(&self.backend) {
            return Err(Error::invalid(
                "map is not a partial isomorphism of the universe",
            ));
        }
        self.maps.push(Entry {
            name: name.into(),
            map,
            kind,
        });
        Ok(MapId(self.maps.len() - 1))
    }

    /// Registers `map` and returns it as a one-letter word.
    pub fn add_word(
        &mut self,
        name: impl Into<String>,
        map: PartialAutomorphism,
        kind: MapKind,
    ) -> Result<Word> {
        self.add_map(name, map, kind).map(Word::map)
    }

    pub fn map(&self, id: MapId) -> &PartialAutomorphism {
        &self.maps[id.0].map
    }

    pub fn name(&self, id: MapId) -> &str {
        &self.maps[id.0].name
    }

    pub fn kind(&self, id: MapId) -> MapKind {
        self.maps[id.0].kind
    }

    pub(crate) fn replace_map(&mut self, id: MapId, map: PartialAutomorphism) {
        self.maps[id.0].map = map;
    }

    pub fn set_kind(&mut self, id: MapId, kind: MapKind) {
        self.maps[id.0].kind = kind;
    }

    pub fn ind(&self, a: &[Elem], b: &[Elem], c: &[Elem]) -> bool {
        self.backend.ind(a, b, c)
    }

    pub fn tp(&self, tuple: &[Elem], base: &[Elem]) -> B::Type {
        self.backend.tp(tuple, base)
    }

    fn letter_get(&self, l: Letter, x: Elem) -> Option<Elem> {
        let m = &self.maps[l.map.0].map;
        if l.inverse {
            m.preimage(x)
        } else {
            m.get(x)
        }
    }

    fn letter_map(&self, l: Letter) -> PartialAutomorphism {
        let m = &self.maps[l.map.0].map;
        if l.inverse {
            m.inverse()
        } else {
            m.clone()
        }
    }

    fn letter_insert(&mut self, l: Letter, x: Elem, y: Elem) -> Result<()> {
        let m = &mut self.maps[l.map.0].map;
        if l.inverse {
            m.insert(y, x)
        } else {
            m.insert(x, y)
        }
    }

    /// Image of a new point `u` under the `choice`-th candidate extension of
    /// the letter: existing realisations of the transported type first,
    /// then fresh realisations of it and of its refinements over `extras`,
    /// each on the left then the right. `None` once candidates run out.
    fn extension_image(
        &mut self,
        l: Letter,
        u: Elem,
        choice: usize,
        extras: &[Elem],
        fresh_first: bool,
    ) -> Result<Option<Elem>> {
        match self.maps[l.map.0].kind {
            MapKind::Frozen => return Ok(None),
            MapKind::Identity => return Ok((choice == 0).then_some(u)),
            MapKind::Extendable => {}
        }
        let m = self.letter_map(l);
        let p = self.backend.tp(&[u], &m.domain());
        let q = self.backend.transport(&p, &|x| m.get(x)).ok_or_else(|| {
            Error::logical(format!(
                "map {} is not a partial isomorphism",
                self.name(l.map)
            ))
        })?;
        let existing = self.backend.realizations(&q);
        // a search tries fresh points before existing ones
        let (fresh_first, n) = (fresh_first as usize, existing.len());
        let k = match choice {
            c if fresh_first == 1 && c < 2 => c,
            c if fresh_first == 1 && c < 2 + n => return Ok(Some(existing[c - 2][0])),
            // refinements multiply quickly over large bases, so searches skip them
            _ if fresh_first == 1 => return Ok(None),
            c if c < n => return Ok(Some(existing[c][0])),
            c => c - n,
        };
        let (idx, side) = (k / 2, if k % 2 == 0 { Side::Left } else { Side::Right });
        let target = if idx == 0 {
            q
        } else {
            let base = self.backend.type_base(&q);
            let extra = minus(extras, &base);
            if extra.is_empty() {
                return Ok(None);
            }
            match self
                .backend
                .refinements(&q, &extra)
                .into_iter()
                .nth(idx - 1)
            {
                Some(r) => r,
                None => return Ok(None),
            }
        };
        let fresh = self.backend.realize(&target, side)?;
        Ok(Some(fresh[0]))
    }

    /// Applies `w` to `xs`, extending registered maps where undefined.
    pub fn apply(&mut self, w: &Word, xs: &[Elem]) -> Result<Vec<Elem>> {
        self.apply_choice(w, xs, 0, &[])?.ok_or_else(|| {
            Error::invalid(format!(
                "word is undefined at {xs:?} and cannot be extended"
            ))
        })
    }

    /// Like `apply`, but the first extension uses candidate `choice`.
    /// Returns `None` when no such candidate exists.
    pub fn apply_choice(
        &mut self,
        w: &Word,
        xs: &[Elem],
        choice: usize,
        extras: &[Elem],
    ) -> Result<Option<Vec<Elem>>> {
        let mut cur = xs.to_vec();
        let mut pending = Some(choice);
        for &l in w.0.iter().rev() {
            for i in 0..cur.len() {
                let x = cur[i];
                if self.letter_get(l, x).is_some() {
                    continue;
                }
                let c = pending.take().unwrap_or(0);
                match self.extension_image(l, x, c, extras, false)? {
                    Some(y) => self.letter_insert(l, x, y)?,
                    None => return Ok(None),
                }
            }
            for x in cur.iter_mut() {
                *x = self.letter_get(l, *x).expect("extended above");
            }
        }
        if matches!(pending, Some(c) if c > 0) {
            return Ok(None);
        }
        Ok(Some(cur))
    }

    /// Depth-first search over every extension choice made while applying
    /// `w` to `xs`, returning the first extended workbench and image that
    /// satisfy `pred`. Each tried extension counts against `tries`.
    pub fn search_apply<F>(
        &self,
        w: &Word,
        xs: &[Elem],
        extras: &[Elem],
        tries: &mut usize,
        pred: &mut F,
    ) -> Result<Option<(Self, Vec<Elem>)>>
    where
        F: FnMut(&Self, &[Elem]) -> bool,
    {
        self.search_from(w, w.0.len(), 0, xs.to_vec(), extras, tries, pred)
    }

    #[allow(clippy::too_many_arguments)]
    fn search_from<F>(
        &self,
        w: &Word,
        letter: usize,
        point: usize,
        cur: Vec<Elem>,
        extras: &[Elem],
        tries: &mut usize,
        pred: &mut F,
    ) -> Result<Option<(Self, Vec<Elem>)>>
    where
        F: FnMut(&Self, &[Elem]) -> bool,
    {
        if letter == 0 {
            return Ok(pred(self, &cur).then(|| (self.clone(), cur)));
        }
        let l = w.0[letter - 1];
        if point == cur.len() {
            let next: Vec<Elem> = cur
                .iter()
                .map(|&x| self.letter_get(l, x).expect("extended"))
                .collect();
            return self.search_from(w, letter - 1, 0, next, extras, tries, pred);
        }
        let x = cur[point];
        if self.letter_get(l, x).is_some() {
            return self.search_from(w, letter, point + 1, cur, extras, tries, pred);
        }
        for choice in 0.. {
            *tries += 1;
            if *tries > self.budget.max_search {
                return Err(Error::budget(format!(
                    "more than {} extension candidates tried",
                    self.budget.max_search
                )));
            }
            let mut next = self.clone();
            match next.extension_image(l, x, choice, extras, true) {
                Ok(Some(y)) => next.letter_insert(l, x, y)?,
                Ok(None) => break,
                Err(e) if e.is_budget() => break,
                Err(e) => return Err(e),
            }
            if let Some(found) =
                next.search_from(w, letter, point + 1, cur.clone(), extras, tries, pred)?
            {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    /// Applies `w` to a set and returns the sorted image.
    pub fn apply_set(&mut self, w: &Word, xs: &[Elem]) -> Result<Vec<Elem>> {
        Ok(sorted(self.apply(w, xs)?))
    }

    /// Image of `xs` under `w` without extending anything.
    pub fn image(&self, w: &Word, xs: &[Elem]) -> Option<Vec<Elem>> {
        xs.iter()
            .map(|&x| w.0.iter().rev().try_fold(x, |y, &l| self.letter_get(l, y)))
            .collect()
    }

    /// The composite of `w` on every point where its letters are defined.
    pub fn materialise(&self, w: &Word) -> PartialAutomorphism {
        let pts: Vec<Elem> = (0..self.backend.len() as Elem).collect();
        let pairs = pts
            .iter()
            .filter_map(|&x| self.image(w, &[x]).map(|y| (x, y[0])));
        PartialAutomorphism::from_pairs(pairs).expect("composite of injective maps")
    }

    /// A fresh realisation of `tp(tuple/base)`, or the tuple itself when
    /// it lies inside the base.
    pub fn realize_over(&mut self, tuple: &[Elem], base: &[Elem], side: Side) -> Result<Vec<Elem>> {
        self.realize_transported(tuple, base, &PartialAutomorphism::identity_on(base), side)
    }

    /// A fresh realisation of `φ·tp(tuple/base)`; coordinates in the base
    /// go to their `φ`-images.
    pub fn realize_transported(
        &mut self,
        tuple: &[Elem],
        base: &[Elem],
        phi: &PartialAutomorphism,
        side: Side,
    ) -> Result<Vec<Elem>> {
        // coordinates inside the base are carried by phi; the rest are realised
        let free: Vec<Elem> = tuple
            .iter()
            .copied()
            .filter(|e| !base.contains(e))
            .collect();
        let mut image = std::collections::BTreeMap::new();
        if !free.is_empty() {
            let p = self.backend.tp(&free, base);
            let q = self
                .backend
                .transport(&p, &|x| phi.get(x))
                .ok_or_else(|| Error::logical("transporting map is undefined on the base"))?;
            let r = self.backend.realize(&q, side)?;
            image.extend(free.iter().copied().zip(r));
        }
        tuple
            .iter()
            .map(|e| {
                image
                    .get(e)
                    .copied()
                    .or_else(|| phi.get(*e))
                    .ok_or_else(|| Error::logical("transporting map is undefined on the tuple"))
            })
            .collect()
    }
}

/// Sorted, deduplicated copy.
pub fn sorted(mut xs: Vec<Elem>) -> Vec<Elem> {
    xs.sort_unstable();
    xs.dedup();
    xs
}

/// Sorted union of several sets.
pub fn union(parts: &[&[Elem]]) -> Vec<Elem> {
    sorted(parts.iter().flat_map(|p| p.iter().copied()).collect())
}

/// `xs ∖ ys` keeping the order of `xs`.
pub fn minus(xs: &[Elem], ys: &[Elem]) -> Vec<Elem> {
    xs.iter().copied().filter(|x| !ys.contains(x)).collect()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        for l in &self.0 {
            write!(f, "m{}{}", l.map.0, if l.inverse { "⁻¹" } else { "" })?;
        }
        Ok(())
    }
}
