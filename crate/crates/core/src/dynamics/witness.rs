use serde::{Deserialize, Serialize};

use super::{sorted, union, MapKind, PartialAutomorphism, Word, Workbench};
use crate::error::{Error, Result};
use crate::swir::{Elem, IndependenceBackend, Side};

/// A realisation `a` of `p` over `X` moved maximally by a word `g`:
/// side `Right` means `a ⫝_X g(a)`, side `Left` means `g(a) ⫝_X a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingMaxWitness {
    pub base: Vec<Elem>,
    pub a: Vec<Elem>,
    pub image: Vec<Elem>,
    pub side: Side,
}

impl MovingMaxWitness {
    pub fn holds<B: IndependenceBackend>(&self, backend: &B) -> bool {
        match self.side {
            Side::Right => backend.ind(&self.a, &self.base, &self.image),
            Side::Left => backend.ind(&self.image, &self.base, &self.a),
        }
    }
}

fn side_holds<B: IndependenceBackend>(
    b: &B,
    side: Side,
    a: &[Elem],
    base: &[Elem],
    ga: &[Elem],
) -> bool {
    match side {
        Side::Right => b.ind(a, base, ga),
        Side::Left => b.ind(ga, base, a),
    }
}

/// Candidate realisations of `p`: existing tuples, then fresh ones on
/// each side. Fresh candidates are realised on a clone.
fn realisation_candidates<B: IndependenceBackend>(
    wb: &Workbench<B>,
    p: &B::Type,
) -> Result<Vec<(Workbench<B>, Vec<Elem>)>> {
    let mut out: Vec<(Workbench<B>, Vec<Elem>)> = Vec::new();
    let existing = wb.backend.realizations(p);
    for a in existing.into_iter().take(wb.budget.max_search) {
        out.push((wb.clone(), a));
    }
    for side in [Side::Left, Side::Right] {
        let mut w = wb.clone();
        match w.backend.realize(p, side) {
            Ok(a) => out.push((w, a)),
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Searches jointly over realisations `a` of `p` and extensions of `g` at
/// `a` for one with the side's independence. On success the workbench
/// keeps the chosen extension. `None` when the finite candidates run out.
pub fn moving_witness<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    base: &[Elem],
    p: &B::Type,
    side: Side,
) -> Result<Option<MovingMaxWitness>> {
    moving_witness_avoiding(wb, g, base, p, side, &[])
}

/// `moving_witness` restricted to realisations disjoint from `avoid`.
pub(crate) fn moving_witness_avoiding<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    base: &[Elem],
    p: &B::Type,
    side: Side,
    avoid: &[Elem],
) -> Result<Option<MovingMaxWitness>> {
    if wb.backend.is_algebraic(p) {
        return Err(Error::invalid("moving witnesses need a non-algebraic type"));
    }
    let base = sorted(base.to_vec());
    let mut tries = 0;
    for (start, a) in realisation_candidates(wb, p)? {
        if a.iter().any(|e| avoid.contains(e)) {
            continue;
        }
        let extras = union(&[&base, &a]);
        let found = start.search_apply(g, &a, &extras, &mut tries, &mut |w, img| {
            side_holds(&w.backend, side, &a, &base, img)
        });
        let (w, image) = match found {
            Ok(Some(f)) => f,
            Ok(None) => continue,
            Err(e) if e.is_budget() => return Err(e.context("moving witness")),
            Err(e) => return Err(e),
        };
        let wit = MovingMaxWitness {
            base: base.clone(),
            a,
            image,
            side,
        };
        if w.backend.tp(&wit.a, &base) != *p || !wit.holds(&w.backend) {
            return Err(Error::logical("moving witness failed re-verification"));
        }
        *wb = w;
        return Ok(Some(wit));
    }
    Ok(None)
}

/// `ind(b, y, c)` for `Left`, `ind(c, y, b)` for `Right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndConstraint {
    pub y: Vec<Elem>,
    pub c: Vec<Elem>,
    pub side: Side,
}

impl IndConstraint {
    fn holds<B: IndependenceBackend>(&self, backend: &B, b: &[Elem]) -> bool {
        match self.side {
            Side::Left => backend.ind(b, &self.y, &self.c),
            Side::Right => backend.ind(&self.c, &self.y, b),
        }
    }
}

/// Extends `g` at `a` on the backend, optionally enforcing a constraint on
/// the image. Returns the extended map.
pub fn extend_partial<B: IndependenceBackend>(
    backend: &mut B,
    g: &PartialAutomorphism,
    a: &[Elem],
    constraint: Option<&IndConstraint>,
    budget: super::DynamicsBudget,
) -> Result<PartialAutomorphism> {
    if a.iter().any(|&x| x as usize >= backend.len()) {
        return Err(Error::invalid("tuple outside the universe"));
    }
    let mut wb = Workbench::new(backend.clone(), budget);
    let id = wb.add_map("g", g.clone(), MapKind::Extendable)?;
    let w = Word::map(id);
    let extras = match constraint {
        Some(c) => union(&[a, &c.y, &c.c]),
        None => sorted(a.to_vec()),
    };
    let mut tries = 0;
    let found = wb.search_apply(&w, a, &extras, &mut tries, &mut |w, img| {
        constraint.is_none_or(|c| c.holds(&w.backend, img))
    })?;
    let (attempt, _) =
        found.ok_or_else(|| Error::budget("no extension satisfies the constraint"))?;
    let out = attempt.map(id).clone();
    *backend = attempt.into_backend();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AddsetSide {
    /// `tp(D′/BC) = tp(D/BC)` and `A ⫝_B CD′`.
    I,
    /// `tp(D″/AB) = tp(D/AB)` and `AD″ ⫝_B C`.
    II,
}

/// Moves `d` over `BC` (side I) or `AB` (side II) so that it joins the
/// independent side of `A ⫝_B C`.
pub fn addset<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    a: &[Elem],
    b: &[Elem],
    c: &[Elem],
    d: &[Elem],
    side: AddsetSide,
) -> Result<Vec<Elem>> {
    if !wb.ind(a, b, c) {
        return Err(Error::invalid("addset needs A ⫝_B C"));
    }
    let (over, realise_side) = match side {
        AddsetSide::I => (union(&[b, c]), Side::Right),
        AddsetSide::II => (union(&[a, b]), Side::Left),
    };
    let d2 = wb.realize_over(d, &over, realise_side)?;
    let ok = wb.tp(&d2, &over) == wb.tp(d, &over)
        && match side {
            AddsetSide::I => wb.ind(a, b, &union(&[c, &d2])),
            AddsetSide::II => wb.ind(&union(&[a, &d2]), b, c),
        };
    if !ok {
        return Err(Error::logical(format!(
            "addset {side:?} postcondition fails"
        )));
    }
    Ok(d2)
}

/// Side I: `e` fixing `BC` with `A ⫝_B C g_1^e(C) ⋯ g_n^e(C)`.
/// Side II: `f` fixing `AB` with `A g_1^f(A) ⋯ g_n^f(A) ⫝_B C`.
/// The result is registered as an extendable map.
pub fn tz31<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    a: &[Elem],
    b: &[Elem],
    c: &[Elem],
    gs: &[Word],
    side: AddsetSide,
    name: &str,
) -> Result<Word> {
    if !wb.ind(a, b, c) {
        return Err(Error::invalid("tz31 needs A ⫝_B C"));
    }
    let (fixed, moved) = match side {
        AddsetSide::I => (union(&[b, c]), sorted(c.to_vec())),
        AddsetSide::II => (union(&[a, b]), sorted(a.to_vec())),
    };
    let mut d = Vec::new();
    for g in gs {
        d.extend(wb.apply(g, &moved)?);
    }
    let d2 = addset(wb, a, b, c, &d, side)?;
    let mut e = PartialAutomorphism::identity_on(&fixed);
    e.insert_tuple(&d, &d2)?;
    let ew = wb.add_word(name, e, MapKind::Extendable)?;
    let mut images = Vec::new();
    for g in gs {
        images.extend(wb.apply(&Word::conj(g, &ew), &moved)?);
    }
    let ok = match side {
        AddsetSide::I => wb.ind(a, b, &union(&[c, &images])),
        AddsetSide::II => wb.ind(&union(&[a, &images]), b, c),
    };
    if !ok || !wb.image(&ew, &fixed).is_some_and(|v| v == fixed) {
        return Err(Error::logical(format!("tz31 {side:?} postcondition fails")));
    }
    Ok(ew)
}

pub(super) fn check_maps_onto<B: IndependenceBackend>(
    wb: &Workbench<B>,
    g: &Word,
    x: &[Elem],
    y: &[Elem],
) -> Result<()> {
    match wb.image(g, x) {
        Some(img) if sorted(img.clone()) == sorted(y.to_vec()) => Ok(()),
        _ => Err(Error::invalid("the map does not send X onto Y")),
    }
}

/// For `g(X) = Y` and `X ⫝_Y C` (side `Left`, `g` moving almost
/// L-maximally) finds `a` fixing `XY` with `g^a(x) ⫝_Y C`. Side `Right` is
/// the mirror: `C ⫝_Y X` and `C ⫝_Y g^a(x)`. Returns `a` and `g^a(x)`.
#[allow(clippy::too_many_arguments)]
pub fn tz35<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    x_set: &[Elem],
    y_set: &[Elem],
    c: &[Elem],
    x: &[Elem],
    side: Side,
    name: &str,
) -> Result<(Word, Vec<Elem>)> {
    check_maps_onto(wb, g, x_set, y_set)?;
    let hyp = match side {
        Side::Left => wb.ind(x_set, y_set, c),
        Side::Right => wb.ind(c, y_set, x_set),
    };
    if !hyp {
        return Err(Error::invalid("tz35 independence hypothesis fails"));
    }
    let xy = union(&[x_set, y_set]);
    if x.iter().any(|e| xy.contains(e)) {
        return Err(Error::invalid("tz35 tuple meets XY"));
    }
    let p = wb.tp(x, &xy);
    let wit = moving_witness(wb, g, &xy, &p, side)?
        .ok_or_else(|| Error::budget("tz35: no moving witness among the candidates"))?;
    let mut a1 = PartialAutomorphism::identity_on(&xy);
    a1.insert_tuple(&wit.a, x)?;
    let a1w = wb.add_word(format!("{name}.1"), a1, MapKind::Extendable)?;
    let u = wb.apply(&Word::conj(g, &a1w), x)?;
    let first = match side {
        Side::Left => wb.ind(&u, &xy, x),
        Side::Right => wb.ind(x, &xy, &u),
    };
    if !first {
        return Err(Error::logical(
            "tz35: conjugated witness lost its independence",
        ));
    }
    let xxy = union(&[&xy, x]);
    let y = wb.realize_over(&u, &xxy, side)?;
    let second = match side {
        Side::Left => wb.ind(&y, y_set, c),
        Side::Right => wb.ind(c, y_set, &y),
    };
    if !second {
        return Err(Error::logical(
            "tz35: realised image is not independent from C over Y",
        ));
    }
    let mut a2 = PartialAutomorphism::identity_on(&xxy);
    a2.insert_tuple(&u, &y)?;
    let a2w = wb.add_word(format!("{name}.2"), a2, MapKind::Extendable)?;
    let a = a2w.then(&a1w);
    if wb.apply(&Word::conj(g, &a), x)? != y || wb.image(&a, &xy) != Some(xy.clone()) {
        return Err(Error::logical("tz35: g^a(x) differs from the target"));
    }
    Ok((a, y))
}

/// For `g(X) = Y`, `g·tp(x/X) = tp(y/Y)`, `x ⫝_X yY` and `y ⫝_Y X` (with
/// `g` moving almost R-maximally) finds `a` fixing `XY` with `g^a(x) = y`.
pub fn tz36<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    x_set: &[Elem],
    y_set: &[Elem],
    x: &[Elem],
    y: &[Elem],
    name: &str,
) -> Result<Word> {
    check_maps_onto(wb, g, x_set, y_set)?;
    let gm = wb.materialise(g);
    let px = wb.tp(x, x_set);
    let moved = wb.backend.transport(&px, &|e| gm.get(e));
    if moved.as_ref() != Some(&wb.tp(y, y_set)) {
        return Err(Error::invalid("tz36: g does not carry tp(x/X) to tp(y/Y)"));
    }
    if !wb.ind(x, x_set, &union(&[y, y_set])) || !wb.ind(y, y_set, x_set) {
        return Err(Error::invalid("tz36 independence hypotheses fail"));
    }
    if wb.image(g, x).as_deref() == Some(y) {
        return Ok(Word::identity());
    }
    let xy = union(&[x_set, y_set]);
    let gy = wb.apply_set(g, y_set)?;
    let y1 = wb.realize_over(y, &xy, Side::Left)?;
    let base = union(&[&xy, &gy]);
    let p = wb.tp(&y1, &base);
    let wit = moving_witness(wb, g, &base, &p, Side::Right)?
        .ok_or_else(|| Error::budget("tz36: no moving witness among the candidates"))?;
    let y2 = wit.a;
    if !wb.ind(&y2, y_set, &union(&[&wit.image, &gy])) {
        return Err(Error::logical("tz36: y″ ⫝_Y g(y″)g(Y) fails"));
    }
    let mut b = PartialAutomorphism::identity_on(&xy);
    b.insert_tuple(y, &y2)?;
    let bw = wb.add_word(format!("{name}.b"), b, MapKind::Extendable)?;
    let w = wb.apply(&bw.inv().then(&g.inv()), &y2)?;
    if !wb.ind(&w, x_set, &union(&[y, y_set])) || wb.tp(&w, x_set) != px {
        return Err(Error::logical(
            "tz36: stationarity premise fails for b⁻¹g⁻¹(y″)",
        ));
    }
    let xyy = union(&[&xy, y]);
    if wb.tp(&w, &xyy) != wb.tp(x, &xyy) {
        return Err(Error::logical(
            "tz36: stationarity does not identify the types over XYy",
        ));
    }
    let mut cm = PartialAutomorphism::identity_on(&xyy);
    cm.insert_tuple(&w, x)?;
    let cw = wb.add_word(format!("{name}.c"), cm, MapKind::Extendable)?;
    let a = cw.then(&bw.inv());
    if wb.apply(&Word::conj(g, &a), x)? != y || wb.image(&a, &xy) != Some(xy.clone()) {
        return Err(Error::logical("tz36: g^a(x) differs from y"));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicsBudget;
    use crate::swir::DloBackend;

    fn dlo(n: usize) -> Workbench<DloBackend> {
        Workbench::new(DloBackend::grid(n, 200), DynamicsBudget::default())
    }

    fn shift(n: u32) -> PartialAutomorphism {
        PartialAutomorphism::from_pairs((0..n).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn identity_never_moves_maximally() {
        let mut wb = dlo(6);
        let g = wb
            .add_word(
                "id",
                PartialAutomorphism::identity_on(&[2]),
                MapKind::Identity,
            )
            .unwrap();
        let p = wb.tp(&[4], &[2]);
        for side in [Side::Left, Side::Right] {
            assert_eq!(moving_witness(&mut wb, &g, &[2], &p, side).unwrap(), None);
        }
    }

    #[test]
    fn shift_moves_maximally_on_dlo() {
        let mut wb = dlo(6);
        let g = wb.add_word("s", shift(5), MapKind::Extendable).unwrap();
        let p = wb.tp(&[5], &[0, 1, 2]);
        let w = moving_witness(&mut wb, &g, &[0, 1, 2], &p, Side::Left)
            .unwrap()
            .unwrap();
        assert!(w.holds(wb.backend()));
        // g(a) ⫝_X a on a shift: the image lies above a
        assert!(wb.backend().value(w.image[0]) > wb.backend().value(w.a[0]));
    }

    #[test]
    fn extend_partial_keeps_existing_pairs_and_types() {
        let mut d = DloBackend::grid(6, 50);
        let g = PartialAutomorphism::from_pairs([(1, 2)]).unwrap();
        assert_eq!(
            extend_partial(&mut d, &g, &[1], None, DynamicsBudget::default()).unwrap(),
            g
        );
        let e = extend_partial(
            &mut d,
            &PartialAutomorphism::empty(),
            &[3],
            None,
            DynamicsBudget::default(),
        )
        .unwrap();
        assert_eq!(e.len(), 1);
        let h = extend_partial(&mut d, &g, &[4, 0], None, DynamicsBudget::default()).unwrap();
        assert!(h.extends(&g) && h.is_partial_iso(&d));
        let con = IndConstraint {
            y: vec![2],
            c: vec![5],
            side: Side::Left,
        };
        let k = extend_partial(&mut d, &g, &[3], Some(&con), DynamicsBudget::default()).unwrap();
        assert!(d.ind(&[k.get(3).unwrap()], &[2], &[5]));
    }

    #[test]
    fn addset_inside_the_base_is_the_identity() {
        let mut wb = dlo(5);
        assert_eq!(
            addset(&mut wb, &[0], &[1], &[2], &[1, 2], AddsetSide::I).unwrap(),
            vec![1, 2]
        );
        assert_eq!(
            addset(&mut wb, &[0], &[1], &[2], &[0], AddsetSide::II).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn addset_on_dlo_separates() {
        // 0 < 1 < 2 < 3: A={0} ⫝_{1} {2}, D={3}
        let mut wb = dlo(4);
        let d = addset(&mut wb, &[0], &[1], &[2], &[3], AddsetSide::I).unwrap();
        assert_eq!(wb.tp(&d, &[1, 2]), wb.tp(&[3], &[1, 2]));
        assert!(wb.ind(&[0], &[1], &[2, d[0]]));
        assert!(addset(&mut wb, &[0], &[], &[2], &[3], AddsetSide::I).is_err());
    }

    #[test]
    fn tz31_with_no_maps_is_the_identity() {
        let mut wb = dlo(5);
        let e = tz31(&mut wb, &[0], &[1], &[2], &[], AddsetSide::I, "e").unwrap();
        assert!(wb.materialise(&e).is_identity());
    }

    #[test]
    fn tz31_on_dlo_with_one_shift() {
        let mut wb = dlo(6);
        let g = wb.add_word("s", shift(5), MapKind::Extendable).unwrap();
        let e = tz31(
            &mut wb,
            &[0],
            &[1],
            &[2],
            std::slice::from_ref(&g),
            AddsetSide::I,
            "e",
        )
        .unwrap();
        let img = wb.apply(&Word::conj(&g, &e), &[2]).unwrap();
        assert!(wb.ind(&[0], &[1], &[2, img[0]]));
        let f = tz31(
            &mut wb,
            &[0],
            &[1],
            &[2],
            std::slice::from_ref(&g),
            AddsetSide::II,
            "f",
        )
        .unwrap();
        let img = wb.apply(&Word::conj(&g, &f), &[0]).unwrap();
        assert!(wb.ind(&[0, img[0]], &[1], &[2]));
    }

    #[test]
    fn tz36_trivial_case_returns_identity() {
        // X = {3}, Y = {1}, x = 5 above X, y = 4 = g(5) above Y
        let mut wb = dlo(6);
        let g = wb
            .add_word(
                "g",
                PartialAutomorphism::from_pairs([(3, 1), (5, 4)]).unwrap(),
                MapKind::Extendable,
            )
            .unwrap();
        let a = tz36(&mut wb, &g, &[3], &[1], &[5], &[4], "a").unwrap();
        assert!(a.is_identity());
    }

    #[test]
    fn tz36_on_dlo_singletons() {
        // g(X) = Y with X = {1}, Y = {0}; x = 5 and y = 3 above both
        let mut wb = dlo(6);
        let g = wb
            .add_word(
                "g",
                PartialAutomorphism::from_pairs([(1, 0)]).unwrap(),
                MapKind::Extendable,
            )
            .unwrap();
        let a = tz36(&mut wb, &g, &[1], &[0], &[5], &[3], "a").unwrap();
        assert_eq!(wb.apply(&Word::conj(&g, &a), &[5]).unwrap(), vec![3]);
        assert!(wb.materialise(&a).fixes(&[0, 1]));
    }

    #[test]
    fn tz36_rejects_hypothesis_violations() {
        let mut wb = dlo(6);
        let g = wb
            .add_word(
                "s",
                PartialAutomorphism::from_pairs([(2, 3)]).unwrap(),
                MapKind::Extendable,
            )
            .unwrap();
        // x above X but y below Y: types disagree
        let e = tz36(&mut wb, &g, &[2], &[3], &[4], &[1], "a").unwrap_err();
        assert!(matches!(e, Error::InvalidInput(_)));
    }

    #[test]
    fn tz35_on_dlo() {
        let mut wb = dlo(6);
        let g = wb
            .add_word(
                "s",
                PartialAutomorphism::from_pairs([(1, 2)]).unwrap(),
                MapKind::Extendable,
            )
            .unwrap();
        // X = {1}, Y = {2}, C = {4}: X ⫝_Y C holds as 1 < 2 < 4
        let (a, y) = tz35(&mut wb, &g, &[1], &[2], &[4], &[5], Side::Left, "a").unwrap();
        assert!(wb.ind(&y, &[2], &[4]));
        assert_eq!(wb.apply(&Word::conj(&g, &a), &[5]).unwrap(), y);
        assert!(tz35(&mut wb, &g, &[1], &[2], &[4], &[1], Side::Left, "b").is_err());
    }
}
