use std::fmt;

use serde::{Deserialize, Serialize};

use super::witness::moving_witness_avoiding;
use super::{union, MapKind, MovingMaxWitness, PartialAutomorphism, Word, Workbench};
use crate::error::{Error, Result};
use crate::swir::{Elem, ForbLimitBackend, IndependenceBackend, Side};

/// Types to process, in order, standing in for an enumeration of all
/// non-algebraic types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule<T> {
    pub types: Vec<T>,
}

impl<T> Schedule<T> {
    pub fn empty() -> Self {
        Schedule { types: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// Non-algebraic 1-types over `∅` and over each single vertex in `pool`.
pub fn default_schedule<B: IndependenceBackend>(backend: &B, pool: &[Elem]) -> Schedule<B::Type> {
    let mut types = backend.one_types(&[]);
    for &v in pool {
        types.extend(backend.one_types(&[v]));
    }
    Schedule { types }
}

/// One realisation `a` with every `r(a_i, z_j)` checked, `z = [h, g]a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourRangeWitness {
    pub type_index: usize,
    pub round: usize,
    pub a: Vec<Elem>,
    pub z: Vec<Elem>,
    /// `(a_i, z_j, r(a_i, z_j))`.
    pub colours: Vec<(Elem, Elem, String)>,
    pub in_solutions: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourRangeReport {
    pub scheduled: usize,
    pub rounds: usize,
    pub solutions: Vec<String>,
    pub witnesses: Vec<ColourRangeWitness>,
}

impl ColourRangeReport {
    /// Every scheduled type has at least one witness and all witnesses
    /// have their cross colours among the solutions.
    pub fn verified(&self) -> bool {
        (0..self.scheduled).all(|t| self.witnesses.iter().any(|w| w.type_index == t))
            && self.witnesses.iter().all(|w| w.in_solutions)
    }
}

impl fmt::Display for ColourRangeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "colour range: {} types, {} rounds, solutions {}",
            self.scheduled,
            self.rounds,
            self.solutions.join(" ")
        )?;
        for w in &self.witnesses {
            let cols: Vec<&str> = w.colours.iter().map(|c| c.2.as_str()).collect();
            writeln!(
                f,
                "  type {} round {}: a = {:?}, [h,g]a = {:?}, colours {} {}",
                w.type_index,
                w.round,
                w.a,
                w.z,
                cols.join(","),
                if w.in_solutions { "ok" } else { "OUTSIDE" }
            )?;
        }
        Ok(())
    }
}

/// Extends the registered map behind the one-letter word `g` at `xs`,
/// choosing among candidate images until `keep` accepts.
fn extend_with<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    xs: &[Elem],
    extras: &[Elem],
    keep: &dyn Fn(&[Elem]) -> bool,
    what: &str,
) -> Result<Vec<Elem>> {
    let mut tries = 0;
    let found = wb
        .search_apply(g, xs, extras, &mut tries, &mut |_, img| keep(img))
        .map_err(|e| e.context(what))?;
    let (w, img) =
        found.ok_or_else(|| Error::budget(format!("{what}: no admissible extension")))?;
    *wb = w;
    Ok(img)
}

fn insert_pairs<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    k: &Word,
    xs: &[Elem],
    ys: &[Elem],
) -> Result<()> {
    let id = k.letters()[0].map;
    let mut m = wb.map(id).clone();
    m.insert_tuple(xs, ys)?;
    if !m.is_partial_iso(wb.backend()) {
        return Err(Error::logical("extension is not a partial isomorphism"));
    }
    wb.replace_map(id, m);
    Ok(())
}

/// Builds `h` such that each scheduled type gains, per round, a
/// realisation `a` with `r(a_i, [h,g]a_j)` among the solutions.
pub fn colourrange_build(
    wb: &mut Workbench<ForbLimitBackend>,
    g: &Word,
    schedule: &Schedule<<ForbLimitBackend as IndependenceBackend>::Type>,
    rounds: usize,
) -> Result<(Word, ColourRangeReport)> {
    let h = wb.add_word("h", PartialAutomorphism::empty(), MapKind::Extendable)?;
    let solutions = wb.backend().tower().priority().solutions().to_vec();
    let mut report = ColourRangeReport {
        scheduled: schedule.len(),
        rounds,
        solutions: solutions.iter().map(|s| s.to_string()).collect(),
        witnesses: Vec::new(),
    };
    if schedule.is_empty() {
        return Ok((h, report));
    }
    let hinv = h.inv();
    for round in 0..rounds {
        for (ti, p) in schedule.types.iter().enumerate() {
            let stage = format!("colour range round {round} type {ti}");
            let tag = |e: Error| e.context(&stage);
            let x = wb.backend().type_base(p);
            wb.apply(&h, &x).map_err(tag)?;
            if round % 2 == 1 {
                wb.apply(&hinv, &x).map_err(tag)?;
            }
            let a_dom = wb.map(h.letters()[0].map).domain();
            let a = wb.backend_mut().realize(p, Side::Left).map_err(tag)?;
            let avoid_a = union(&[&a, &a_dom]);
            extend_with(
                wb,
                g,
                &a,
                &avoid_a,
                &|img| img.iter().all(|y| !avoid_a.contains(y)),
                "g at a",
            )
            .map_err(tag)?;
            let hm = wb.map(h.letters()[0].map).clone();
            let b = wb
                .realize_transported(&a, &a_dom, &hm, Side::Left)
                .map_err(tag)?;
            let b_rng = hm.range();
            let avoid_b = union(&[&b, &b_rng]);
            let gb = extend_with(
                wb,
                g,
                &b,
                &avoid_b,
                &|img| img.iter().all(|y| !avoid_b.contains(y)),
                "g at b",
            )
            .map_err(tag)?;
            insert_pairs(wb, &h, &a, &b).map_err(tag)?;
            let hm = wb.map(h.letters()[0].map).clone();
            let bb = union(&[&b, &b_rng]);
            let c = wb
                .realize_transported(&gb, &bb, &hm.inverse(), Side::Left)
                .map_err(tag)?;
            insert_pairs(wb, &h, &c, &gb).map_err(tag)?;
            let z = wb.apply(&Word::commutator(&h, g), &a).map_err(tag)?;
            let mut colours = Vec::new();
            let mut ok = true;
            for &ai in &a {
                for &zj in &z {
                    let col = wb.backend().color(ai, zj);
                    ok &= ai != zj && solutions.contains(&col);
                    colours.push((ai, zj, col.to_string()));
                }
            }
            report.witnesses.push(ColourRangeWitness {
                type_index: ti,
                round,
                a,
                z,
                colours,
                in_solutions: ok,
            });
        }
    }
    Ok((h, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoverVariant {
    /// `g` moves almost R- and L-maximally: Steps I to IV.
    BothSides,
    /// `g` moves almost R-maximally and `g⁻¹` almost L-maximally.
    Mixed,
}

/// The commutator and side a witness is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoverSide {
    /// `a ⫝_X [k,g]a`.
    KgRight,
    /// `[k,g]a ⫝_X a`.
    KgLeft,
    /// `a ⫝_X [g,k]a`.
    GkRight,
    /// `[g,k]a ⫝_X a`.
    GkLeft,
}

impl MoverSide {
    pub const ALL: [MoverSide; 4] = [
        MoverSide::KgRight,
        MoverSide::KgLeft,
        MoverSide::GkRight,
        MoverSide::GkLeft,
    ];

    fn side(self) -> Side {
        match self {
            MoverSide::KgRight | MoverSide::GkRight => Side::Right,
            MoverSide::KgLeft | MoverSide::GkLeft => Side::Left,
        }
    }

    fn word(self, g: &Word, k: &Word) -> Word {
        match self {
            MoverSide::KgRight | MoverSide::KgLeft => Word::commutator(k, g),
            MoverSide::GkRight | MoverSide::GkLeft => Word::commutator(g, k),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MoverSide::KgRight => "[k,g] R",
            MoverSide::KgLeft => "[k,g] L",
            MoverSide::GkRight => "[g,k] R",
            MoverSide::GkLeft => "[g,k] L",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoverWitness {
    pub type_index: usize,
    pub step: String,
    pub side: MoverSide,
    pub witness: MovingMaxWitness,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoverReport {
    pub variant: MoverVariant,
    pub scheduled: usize,
    pub witnesses: Vec<MoverWitness>,
}

impl MoverReport {
    /// Whether type `t` has a verified witness on `side`.
    pub fn covered(&self, t: usize, side: MoverSide) -> bool {
        self.witnesses
            .iter()
            .any(|w| w.type_index == t && w.side == side && w.verified)
    }

    /// Every scheduled type is witnessed on all four sides.
    pub fn verified(&self) -> bool {
        (0..self.scheduled).all(|t| MoverSide::ALL.iter().all(|&s| self.covered(t, s)))
    }

    pub fn failures(&self) -> Vec<&MoverWitness> {
        self.witnesses.iter().filter(|w| !w.verified).collect()
    }
}

impl fmt::Display for MoverReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "commutator mover ({:?}): {} types",
            self.variant, self.scheduled
        )?;
        for w in &self.witnesses {
            writeln!(
                f,
                "  type {} step {} {}: a = {:?}, image = {:?} {}",
                w.type_index,
                w.step,
                w.side.label(),
                w.witness.a,
                w.witness.image,
                if w.verified { "ok" } else { "FAILS" }
            )?;
        }
        Ok(())
    }
}

struct MoverCtx<'a> {
    g: &'a Word,
    k: Word,
}

impl MoverCtx<'_> {
    fn kmap<B: IndependenceBackend>(&self, wb: &Workbench<B>) -> PartialAutomorphism {
        wb.map(self.k.letters()[0].map).clone()
    }

    /// Ensures `X ∪ gX ⊆ A` and `g(kX) ⊆ B`.
    fn prepare<B: IndependenceBackend>(&self, wb: &mut Workbench<B>, x: &[Elem]) -> Result<()> {
        let gx = wb.apply(self.g, x)?;
        wb.apply(&self.k, &union(&[x, &gx]))?;
        let kx = wb.apply(&self.k, x)?;
        let gkx = wb.apply(self.g, &kx)?;
        wb.apply(&self.k.inv(), &gkx)?;
        Ok(())
    }

    fn finish<B: IndependenceBackend>(
        &self,
        wb: &mut Workbench<B>,
        x: &[Elem],
        a: Vec<Elem>,
        side: MoverSide,
    ) -> Result<(MovingMaxWitness, bool)> {
        let image = wb.apply(&side.word(self.g, &self.k), &a)?;
        let wit = MovingMaxWitness {
            base: x.to_vec(),
            a,
            image,
            side: side.side(),
        };
        let ok = wit.holds(wb.backend());
        Ok((wit, ok))
    }

    /// Steps I (side `Right`) and II (`Left`): `[k,g]` moves `p`.
    fn step_kg<B: IndependenceBackend>(
        &self,
        wb: &mut Workbench<B>,
        p: &B::Type,
        side: Side,
    ) -> Result<(MovingMaxWitness, bool)> {
        let x = wb.backend().type_base(p);
        self.prepare(wb, &x)?;
        let km = self.kmap(wb);
        let (a_set, b_set) = (km.domain(), km.range());
        let real = side.opposite();
        let a1 = wb.backend_mut().realize(p, real)?;
        let q = wb.tp(&a1, &a_set);
        let wit = moving_witness_avoiding(wb, self.g, &a_set, &q, side, &[])?
            .ok_or_else(|| Error::budget("g has no moving witness over A"))?;
        let a = wit.a;
        wb.apply(&self.g.inv(), &b_set)?;
        let km = self.kmap(wb);
        let b = wb.realize_transported(&a, &a_set, &km, real)?;
        insert_pairs(wb, &self.k, &a, &b)?;
        let gb = wb.apply(self.g, &b)?;
        let km = self.kmap(wb);
        let c = wb.realize_transported(&gb, &union(&[&b, &b_set]), &km.inverse(), real)?;
        insert_pairs(wb, &self.k, &c, &gb)?;
        let mside = if side == Side::Right {
            MoverSide::KgRight
        } else {
            MoverSide::KgLeft
        };
        self.finish(wb, &x, a, mside)
    }

    /// Steps III (side `Right`) and IV (`Left`): `[g,k]` moves `p`.
    fn step_gk<B: IndependenceBackend>(
        &self,
        wb: &mut Workbench<B>,
        p: &B::Type,
        side: Side,
    ) -> Result<(MovingMaxWitness, bool)> {
        let x = wb.backend().type_base(p);
        self.prepare(wb, &x)?;
        let km = self.kmap(wb);
        let (a_set, b_set) = (km.domain(), km.range());
        wb.apply(&self.g.inv(), &a_set)?;
        let real = side.opposite();
        let a = wb.backend_mut().realize(p, real)?;
        let km = self.kmap(wb);
        let q = wb.backend().tp(&a, &a_set);
        let q = wb
            .backend()
            .transport(&q, &|e| km.get(e))
            .ok_or_else(|| Error::logical("k is undefined on A"))?;
        let wit = moving_witness_avoiding(wb, self.g, &b_set, &q, side, &[])?
            .ok_or_else(|| Error::budget("g has no moving witness over B"))?;
        let b = wit.a;
        insert_pairs(wb, &self.k, &a, &b)?;
        let ga = wb.apply(self.g, &a)?;
        let km = self.kmap(wb);
        let c = wb.realize_transported(&ga, &union(&[&a, &a_set]), &km, real)?;
        insert_pairs(wb, &self.k, &ga, &c)?;
        let mside = if side == Side::Right {
            MoverSide::GkRight
        } else {
            MoverSide::GkLeft
        };
        self.finish(wb, &x, a, mside)
    }

    /// First half of the mixed variant: `[k,g]a ⫝_X a` using `g⁻¹`.
    fn mixed_kg_left<B: IndependenceBackend>(
        &self,
        wb: &mut Workbench<B>,
        p: &B::Type,
    ) -> Result<(MovingMaxWitness, bool)> {
        let x = wb.backend().type_base(p);
        self.prepare(wb, &x)?;
        let km = self.kmap(wb);
        let (a_set, b_set) = (km.domain(), km.range());
        let ginv_b = wb.apply(&self.g.inv(), &b_set)?;
        let a = wb.backend_mut().realize(p, Side::Right)?;
        let km = self.kmap(wb);
        let b1 = wb.realize_transported(&a, &a_set, &km, Side::Right)?;
        let base = union(&[&b_set, &ginv_b]);
        let q = wb.tp(&b1, &base);
        let wit = moving_witness_avoiding(wb, &self.g.inv(), &base, &q, Side::Left, &[])?
            .ok_or_else(|| Error::budget("g⁻¹ has no moving witness over Bg⁻¹B"))?;
        let b = wit.a;
        insert_pairs(wb, &self.k, &a, &b)?;
        let gb = wb.apply(self.g, &b)?;
        let km = self.kmap(wb);
        let c = wb.realize_transported(&gb, &union(&[&b, &b_set]), &km.inverse(), Side::Right)?;
        insert_pairs(wb, &self.k, &c, &gb)?;
        self.finish(wb, &x, a, MoverSide::KgLeft)
    }

    /// Second half of the mixed variant: `[g,k]a ⫝_X a` using `g⁻¹`.
    fn mixed_gk_left<B: IndependenceBackend>(
        &self,
        wb: &mut Workbench<B>,
        p: &B::Type,
    ) -> Result<(MovingMaxWitness, bool)> {
        let x = wb.backend().type_base(p);
        self.prepare(wb, &x)?;
        let km = self.kmap(wb);
        let (a_set, b_set) = (km.domain(), km.range());
        let ginv_a = wb.apply(&self.g.inv(), &a_set)?;
        let a1 = wb.backend_mut().realize(p, Side::Right)?;
        let base = union(&[&ginv_a, &x]);
        let q = wb.tp(&a1, &base);
        let wit = moving_witness_avoiding(wb, &self.g.inv(), &base, &q, Side::Left, &a_set)?
            .ok_or_else(|| Error::budget("g⁻¹ has no moving witness over g⁻¹(A)X"))?;
        let a = wit.a;
        let km = self.kmap(wb);
        let b = wb.realize_transported(&a, &a_set, &km, Side::Left)?;
        insert_pairs(wb, &self.k, &a, &b)?;
        let gb = wb.apply(self.g, &b)?;
        let km = self.kmap(wb);
        let c = wb.realize_transported(&gb, &union(&[&b, &b_set]), &km.inverse(), Side::Left)?;
        insert_pairs(wb, &self.k, &c, &gb)?;
        self.finish(wb, &x, a, MoverSide::GkLeft)
    }
}

/// Builds `k` so that `[k,g]` and `[g,k]` each move every scheduled type
/// almost R- and L-maximally, recording one witness per type and side.
pub fn commutator_mover_build<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    schedule: &Schedule<B::Type>,
    variant: MoverVariant,
) -> Result<(Word, MoverReport)> {
    let k = wb.add_word("k", PartialAutomorphism::empty(), MapKind::Extendable)?;
    let ctx = MoverCtx { g, k: k.clone() };
    let mut report = MoverReport {
        variant,
        scheduled: schedule.len(),
        witnesses: Vec::new(),
    };
    for (ti, p) in schedule.types.iter().enumerate() {
        if wb.backend().is_algebraic(p) {
            return Err(Error::invalid(format!("scheduled type {ti} is algebraic")));
        }
        let steps: [(&str, MoverSide); 4] = match variant {
            MoverVariant::BothSides => [
                ("I", MoverSide::KgRight),
                ("II", MoverSide::KgLeft),
                ("III", MoverSide::GkRight),
                ("IV", MoverSide::GkLeft),
            ],
            MoverVariant::Mixed => [
                ("I", MoverSide::KgRight),
                ("L1", MoverSide::KgLeft),
                ("III", MoverSide::GkRight),
                ("L2", MoverSide::GkLeft),
            ],
        };
        for (step, side) in steps {
            let r = match (step, side) {
                ("L1", _) => ctx.mixed_kg_left(wb, p),
                ("L2", _) => ctx.mixed_gk_left(wb, p),
                (_, MoverSide::KgRight) => ctx.step_kg(wb, p, Side::Right),
                (_, MoverSide::KgLeft) => ctx.step_kg(wb, p, Side::Left),
                (_, MoverSide::GkRight) => ctx.step_gk(wb, p, Side::Right),
                (_, MoverSide::GkLeft) => ctx.step_gk(wb, p, Side::Left),
            };
            let (witness, verified) =
                r.map_err(|e| e.context(&format!("type {ti} step {step}")))?;
            report.witnesses.push(MoverWitness {
                type_index: ti,
                step: step.to_string(),
                side,
                witness,
                verified,
            });
        }
    }
    // the final k only extends the intermediate ones, so every image stands
    for w in report.witnesses.iter_mut() {
        let word = w.side.word(g, &k);
        w.verified &= wb.image(&word, &w.witness.a).as_ref() == Some(&w.witness.image)
            && w.witness.holds(wb.backend());
    }
    Ok((k, report))
}
