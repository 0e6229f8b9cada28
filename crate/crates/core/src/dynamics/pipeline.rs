use std::fmt;

use serde::{Deserialize, Serialize};

use super::witness::check_maps_onto;
use super::{
    addset, sorted, tz31, tz35, tz36, union, AddsetSide, MapKind, PartialAutomorphism, Word,
    Workbench,
};
use crate::error::{Error, Result};
use crate::swir::{Elem, IndependenceBackend, Side};

fn concat(parts: &[&[Elem]]) -> Vec<Elem> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn staged<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.context(stage))
}

fn require(cond: bool, stage: &str, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::logical(format!("{stage}: {what}")))
    }
}

/// Conjugators `a_i` fixing `X_{i−1}X_i` and sets `Y_i ⊇ X_i` with
/// `g_i^{a_i}(Y_{i−1}) = Y_i`, `Y_0 ⫝_{Y_1} Y_2` and `Y_4 ⫝_{Y_3} Y_2`.
#[derive(Clone, Debug)]
pub struct Tz32Output {
    pub conjugators: Vec<Word>,
    pub conjugated: Vec<Word>,
    pub y: Vec<Vec<Elem>>,
}

/// Builds the sets `Y_0 … Y_4` for `g_i(X_{i−1}) = X_i` in six steps and
/// re-verifies every claimed fact.
pub fn tz32_pipeline<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    gs: &[Word],
    xs: &[Vec<Elem>],
) -> Result<Tz32Output> {
    if gs.len() != 4 || xs.len() != 5 {
        return Err(Error::invalid("tz32 needs four maps and five sets"));
    }
    let xs: Vec<Vec<Elem>> = xs.iter().map(|x| sorted(x.clone())).collect();
    for i in 1..=4 {
        check_maps_onto(wb, &gs[i - 1], &xs[i - 1], &xs[i])
            .map_err(|e| e.context(&format!("g_{i}")))?;
    }
    let (g1, g2, g3, g4) = (&gs[0], &gs[1], &gs[2], &gs[3]);

    // Step 1
    let x1p = union(&xs.iter().map(|x| x.as_slice()).collect::<Vec<_>>());

    // Step 2
    let g32 = g3.then(g2);
    let g432 = g4.then(&g32);
    let e = staged(
        "step 2",
        tz31(
            wb,
            &xs[0],
            &x1p,
            &x1p,
            &[g2.clone(), g32.clone(), g432.clone()],
            AddsetSide::I,
            "e",
        ),
    )?;
    let xp2 = staged("step 2", wb.apply_set(&Word::conj(g2, &e), &x1p))?;
    let xp3 = staged("step 2", wb.apply_set(&Word::conj(&g32, &e), &x1p))?;
    let xp4 = staged("step 2", wb.apply_set(&Word::conj(&g432, &e), &x1p))?;
    let xp234 = union(&[&xp2, &xp3, &xp4]);
    require(
        wb.ind(&xs[0], &x1p, &xp234),
        "step 2",
        "X_0 ⫝_{X′_1} X′_2X′_3X′_4 fails",
    )?;

    // Step 3
    let f = staged(
        "step 3",
        tz31(wb, &x1p, &x1p, &xp234, &[g1.inv()], AddsetSide::II, "f"),
    )?;
    let xp0 = staged("step 3", wb.apply_set(&Word::conj(&g1.inv(), &f), &x1p))?;
    require(
        wb.ind(&xp0, &x1p, &xp234),
        "step 3",
        "X′_0 ⫝_{X′_1} X′_2X′_3X′_4 fails",
    )?;
    let h = [
        Word::conj(g1, &f),
        Word::conj(g2, &e),
        Word::conj(g3, &e),
        Word::conj(g4, &e),
    ];

    // Step 4: Y_3 is the union of the X′_i, so X′_2X′_1 ⫝_{Y_3} X′_4 holds trivially
    let y3 = union(&[&x1p, &xp2, &xp3, &xp4]);
    let h3i = h[2].inv();
    let h23i = h[1].inv().then(&h3i);
    let a = staged(
        "step 4",
        tz31(
            wb,
            &xp4,
            &y3,
            &y3,
            &[h3i.clone(), h23i.clone()],
            AddsetSide::I,
            "a",
        ),
    )?;
    let y2 = staged("step 4", wb.apply_set(&Word::conj(&h3i, &a), &y3))?;
    let y1 = staged("step 4", wb.apply_set(&Word::conj(&h23i, &a), &y3))?;
    require(
        wb.ind(&xp4, &y3, &union(&[&y1, &y2])),
        "step 4",
        "X′_4 ⫝_{Y_3} Y_1Y_2 fails",
    )?;

    // Step 5
    let y12 = union(&[&y1, &y2]);
    let b = staged(
        "step 5",
        tz31(wb, &y3, &y3, &y12, &[h[3].clone()], AddsetSide::II, "b"),
    )?;
    let y4 = staged("step 5", wb.apply_set(&Word::conj(&h[3], &b), &y3))?;
    require(wb.ind(&y4, &y3, &y12), "step 5", "Y_4 ⫝_{Y_3} Y_1Y_2 fails")?;

    // Step 6: relocate Y_1…Y_4 over X′_1…X′_4 away from X′_0
    let d = concat(&[&y1, &y2, &y3, &y4]);
    let d2 = staged("step 6", addset(wb, &xp0, &x1p, &xp234, &d, AddsetSide::I))?;
    let mut sigma = PartialAutomorphism::identity_on(&y3);
    staged("step 6", sigma.insert_tuple(&d, &d2))?;
    let sigma = staged("step 6", wb.add_word("sigma", sigma, MapKind::Extendable))?;
    let relocated: Vec<Vec<Elem>> = [&y1, &y2, &y3, &y4]
        .iter()
        .map(|y| wb.image(&sigma, y).map(sorted).expect("σ is defined on D"))
        .collect();
    let (y1, y2, y3, y4) = (&relocated[0], &relocated[1], &relocated[2], &relocated[3]);
    let y234 = union(&[y2, y3, y4]);
    let a01 = union(&[&xp0, y1]);
    require(
        wb.ind(&a01, y1, &y234),
        "step 6",
        "X′_0Y_1 ⫝_{Y_1} Y_2Y_3Y_4 fails",
    )?;
    let c = staged(
        "step 6",
        tz31(wb, &a01, y1, &y234, &[h[0].inv()], AddsetSide::II, "c"),
    )?;
    let y0 = staged("step 6", wb.apply_set(&Word::conj(&h[0].inv(), &c), y1))?;

    let sae = sigma.then(&a).then(&e);
    let conjugators = vec![c.then(&f), sae.clone(), sae, sigma.then(&b).then(&e)];
    let conjugated: Vec<Word> = gs
        .iter()
        .zip(&conjugators)
        .map(|(g, a)| Word::conj(g, a))
        .collect();
    let y = vec![y0, y1.clone(), y2.clone(), y3.clone(), y4.clone()];

    for i in 1..=4 {
        let stage = format!("verification of i = {i}");
        let img = staged(&stage, wb.apply_set(&conjugated[i - 1], &y[i - 1]))?;
        require(img == y[i], &stage, "g_i^{a_i}(Y_{i−1}) ≠ Y_i")?;
        let fixed = union(&[&xs[i - 1], &xs[i]]);
        let img = staged(&stage, wb.apply(&conjugators[i - 1], &fixed))?;
        require(img == fixed, &stage, "a_i moves X_{i−1}X_i")?;
        require(xs[i].iter().all(|e| y[i].contains(e)), &stage, "X_i ⊄ Y_i")?;
    }
    require(
        wb.ind(&y[0], &y[1], &y[2]),
        "verification",
        "Y_0 ⫝_{Y_1} Y_2 fails",
    )?;
    require(
        wb.ind(&y[4], &y[3], &y[2]),
        "verification",
        "Y_4 ⫝_{Y_3} Y_2 fails",
    )?;
    Ok(Tz32Output {
        conjugators,
        conjugated,
        y,
    })
}

/// A solution of `g_4^{a_4} ⋯ g_1^{a_1}(x_0) = x_4` with all data needed
/// to re-check it on a universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateProductCertificate {
    pub g: Vec<PartialAutomorphism>,
    pub a: Vec<PartialAutomorphism>,
    pub y: Vec<Vec<Elem>>,
    pub x0: Vec<Elem>,
    pub x4: Vec<Elem>,
    /// `x_1, x_2, x_3` along the product.
    pub trace: Vec<Vec<Elem>>,
}

/// One re-checked claim of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifiedFact {
    pub fact: String,
    pub holds: bool,
}

impl ConjugateProductCertificate {
    /// Re-checks every claim from the stored maps alone.
    pub fn check<B: IndependenceBackend>(&self, backend: &B) -> Vec<VerifiedFact> {
        let mut out = Vec::new();
        let mut fact = |fact: String, holds: bool| out.push(VerifiedFact { fact, holds });
        let shape =
            self.g.len() == 4 && self.a.len() == 4 && self.y.len() == 5 && self.trace.len() == 3;
        fact(
            "four maps, four conjugators, five sets, three trace tuples".into(),
            shape,
        );
        if !shape {
            return out;
        }
        let set_image = |m: &PartialAutomorphism, s: &[Elem]| m.apply(s).map(sorted);
        let mut xs = vec![self.x0.clone()];
        xs.extend(self.trace.iter().cloned());
        xs.push(self.x4.clone());
        let mut cur = Some(self.x0.clone());
        for i in 1..=4 {
            let (g, a) = (&self.g[i - 1], &self.a[i - 1]);
            let (prev, next) = (&self.y[i - 1], &self.y[i]);
            fact(
                format!("g_{i} is a partial isomorphism"),
                g.is_partial_iso(backend),
            );
            fact(
                format!("a_{i} is a partial isomorphism"),
                a.is_partial_iso(backend),
            );
            fact(
                format!("a_{i} fixes Y_{}Y_{i}", i - 1),
                a.fixes(&union(&[prev, next])),
            );
            fact(
                format!("g_{i}(Y_{}) = Y_{i}", i - 1),
                set_image(g, prev).as_ref() == Some(next),
            );
            let ga = g.conjugate_by(a);
            fact(
                format!("g_{i}^a_{i}(Y_{}) = Y_{i}", i - 1),
                set_image(&ga, prev).as_ref() == Some(next),
            );
            fact(
                format!("g_{i}^a_{i}(x_{}) = x_{i}", i - 1),
                ga.apply(&xs[i - 1]).as_ref() == Some(&xs[i]),
            );
            cur = cur.and_then(|x| ga.apply(&x));
        }
        fact(
            "Y_0 ⫝_{Y_1} Y_2".into(),
            backend.ind(&self.y[0], &self.y[1], &self.y[2]),
        );
        fact(
            "Y_4 ⫝_{Y_3} Y_2".into(),
            backend.ind(&self.y[4], &self.y[3], &self.y[2]),
        );
        fact(
            "g_4^a_4 ⋯ g_1^a_1(x_0) = x_4".into(),
            cur.as_ref() == Some(&self.x4),
        );
        out
    }

    pub fn verify<B: IndependenceBackend>(&self, backend: &B) -> Result<()> {
        match self.check(backend).into_iter().find(|f| !f.holds) {
            None => Ok(()),
            Some(f) => Err(Error::logical(format!(
                "certificate claim fails: {}",
                f.fact
            ))),
        }
    }
}

impl fmt::Display for ConjugateProductCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "x0 = {:?}, x4 = {:?}, trace = {:?}",
            self.x0, self.x4, self.trace
        )?;
        for (i, y) in self.y.iter().enumerate() {
            writeln!(f, "Y{i} = {y:?}")?;
        }
        for i in 0..self.a.len() {
            writeln!(f, "a{} = {}", i + 1, self.a[i])?;
        }
        Ok(())
    }
}

/// Solves `g_4^{a_4} ⋯ g_1^{a_1}(x_0) = x_4` with `a_i` fixing
/// `Y_{i−1}Y_i`, returning the conjugators as words too.
pub(crate) fn tz34_words<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    gs: &[Word],
    ys: &[Vec<Elem>],
    x0: &[Elem],
    x4: &[Elem],
) -> Result<(ConjugateProductCertificate, Vec<Word>)> {
    if gs.len() != 4 || ys.len() != 5 {
        return Err(Error::invalid("tz34 needs four maps and five sets"));
    }
    let ys: Vec<Vec<Elem>> = ys.iter().map(|y| sorted(y.clone())).collect();
    if x0.is_empty() || x0.iter().any(|e| ys[0].contains(e) || ys[1].contains(e)) {
        return Err(Error::invalid(
            "x_0 must be a non-empty tuple outside Y_0Y_1",
        ));
    }
    if x4.is_empty() || x4.iter().any(|e| ys[3].contains(e) || ys[4].contains(e)) {
        return Err(Error::invalid(
            "x_4 must be a non-empty tuple outside Y_3Y_4",
        ));
    }
    for i in 1..=4 {
        check_maps_onto(wb, &gs[i - 1], &ys[i - 1], &ys[i])
            .map_err(|e| e.context(&format!("g_{i}")))?;
    }
    if !wb.ind(&ys[0], &ys[1], &ys[2]) || !wb.ind(&ys[4], &ys[3], &ys[2]) {
        return Err(Error::invalid(
            "tz34 needs Y_0 ⫝_{Y_1} Y_2 and Y_4 ⫝_{Y_3} Y_2",
        ));
    }
    let product = wb
        .materialise(&gs[3].then(&gs[2]).then(&gs[1]).then(&gs[0]))
        .restrict(&ys[0]);
    let moved = wb
        .backend()
        .transport(&wb.tp(x0, &ys[0]), &|e| product.get(e));
    if moved.as_ref() != Some(&wb.tp(x4, &ys[4])) {
        return Err(Error::invalid(
            "g_4g_3g_2g_1 does not carry tp(x_0/Y_0) to tp(x_4/Y_4)",
        ));
    }

    let (a1, x1) = staged(
        "tz35 for g_1",
        tz35(wb, &gs[0], &ys[0], &ys[1], &ys[2], x0, Side::Left, "a1"),
    )?;
    let (a4, x3) = staged(
        "tz35 for g_4⁻¹",
        tz35(
            wb,
            &gs[3].inv(),
            &ys[4],
            &ys[3],
            &ys[2],
            x4,
            Side::Left,
            "a4",
        ),
    )?;
    let g2m = wb.materialise(&gs[1]).restrict(&ys[1]);
    let x2 = staged(
        "middle realisation",
        wb.realize_transported(&x1, &ys[1], &g2m, Side::Left),
    )?;
    let g3m = wb.materialise(&gs[2]).restrict(&ys[2]);
    let from3 = wb
        .backend()
        .transport(&wb.tp(&x3, &ys[3]), &|e| g3m.preimage(e));
    require(
        from3.as_ref() == Some(&wb.tp(&x2, &ys[2])),
        "middle realisation",
        "g_2·tp(x_1/Y_1) ≠ g_3⁻¹·tp(x_3/Y_3)",
    )?;
    require(
        wb.ind(&x2, &ys[2], &union(&[&x1, &ys[1], &x3, &ys[3]])),
        "middle realisation",
        "x_2 ⫝_{Y_2} x_1Y_1x_3Y_3 fails",
    )?;
    let a2 = staged(
        "tz36 for g_2⁻¹",
        tz36(wb, &gs[1].inv(), &ys[2], &ys[1], &x2, &x1, "a2"),
    )?;
    let a3 = staged(
        "tz36 for g_3",
        tz36(wb, &gs[2], &ys[2], &ys[3], &x2, &x3, "a3"),
    )?;
    let words = vec![a1, a2, a3, a4];
    // make sure every map is defined on the sets the certificate mentions
    for i in 1..=4 {
        let ga = Word::conj(&gs[i - 1], &words[i - 1]);
        wb.apply(&ga, &ys[i - 1])?;
        wb.apply(&words[i - 1], &union(&[&ys[i - 1], &ys[i]]))?;
    }
    let cert = ConjugateProductCertificate {
        g: gs.iter().map(|g| wb.materialise(g)).collect(),
        a: words.iter().map(|a| wb.materialise(a)).collect(),
        y: ys,
        x0: x0.to_vec(),
        x4: x4.to_vec(),
        trace: vec![x1, x2, x3],
    };
    cert.verify(wb.backend())?;
    Ok((cert, words))
}

/// Conjugate-product solve; the returned certificate has been re-verified.
pub fn tz34_solve<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    gs: &[Word],
    ys: &[Vec<Elem>],
    x0: &[Elem],
    x4: &[Elem],
) -> Result<ConjugateProductCertificate> {
    tz34_words(wb, gs, ys, x0, x4).map(|(c, _)| c)
}

/// Data of the density argument up to the finite isomorphism `w`.
#[derive(Clone, Debug)]
pub struct DensitySetup {
    pub g: Word,
    pub u: Vec<PartialAutomorphism>,
    /// `b_i a_i` as words.
    pub conjugators: Vec<Word>,
    pub y: Vec<Vec<Elem>>,
    pub w: PartialAutomorphism,
}

/// Extends each `u_i` to `a_i`, chooses `X_i` with
/// `g^{a_i}(X_{i−1}) = X_i ⊇ Im u_i`, runs the Y-construction and returns
/// `w = g^{b_4a_4} ⋯ g^{b_1a_1}` restricted to `Y_0`.
pub fn density_setup<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    g: &Word,
    us: &[PartialAutomorphism],
) -> Result<DensitySetup> {
    if us.len() != 4 {
        return Err(Error::invalid("density needs four partial isomorphisms"));
    }
    let mut u = Vec::new();
    for (i, m) in us.iter().enumerate() {
        u.push(wb.add_word(format!("u{}", i + 1), m.clone(), MapKind::Extendable)?);
    }
    let ga: Vec<Word> = u.iter().map(|a| Word::conj(g, a)).collect();
    let mut x0 = Vec::new();
    for i in 0..4 {
        let mut back = Word::identity();
        for gj in ga[..=i].iter() {
            back = gj.then(&back);
        }
        x0.extend(wb.apply(&back.inv(), &us[i].range())?);
    }
    let mut xs = vec![sorted(x0)];
    for i in 0..4 {
        let next = wb.apply_set(&ga[i], &xs[i])?;
        xs.push(next);
    }
    let out = staged("Y-construction", tz32_pipeline(wb, &ga, &xs))?;
    let conjugators: Vec<Word> = out
        .conjugators
        .iter()
        .zip(&u)
        .map(|(b, a)| b.then(a))
        .collect();
    let product = product_word(g, &conjugators);
    let img = wb.apply(&product, &out.y[0])?;
    let w = PartialAutomorphism::from_pairs(out.y[0].iter().copied().zip(img))?;
    Ok(DensitySetup {
        g: g.clone(),
        u: us.to_vec(),
        conjugators,
        y: out.y,
        w,
    })
}

fn product_word(g: &Word, conjugators: &[Word]) -> Word {
    conjugators
        .iter()
        .fold(Word::identity(), |acc, a| Word::conj(g, a).then(&acc))
}

/// Conjugators `c_i b_i a_i ⊇ u_i` whose product extends `w′`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityWitness {
    pub conjugators: Vec<PartialAutomorphism>,
    pub certificate: Option<ConjugateProductCertificate>,
}

pub fn density_witness<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    setup: &DensitySetup,
    target: &PartialAutomorphism,
) -> Result<DensityWitness> {
    if !target.extends(&setup.w) || !target.is_partial_iso(wb.backend()) {
        return Err(Error::invalid(
            "target must be a partial isomorphism extending w",
        ));
    }
    let x: Vec<Elem> = target
        .domain()
        .into_iter()
        .filter(|e| !setup.y[0].contains(e))
        .collect();
    let (full, certificate) = if x.is_empty() {
        (setup.conjugators.clone(), None)
    } else {
        let y = target.apply(&x).expect("x ⊆ dom w′");
        let gs: Vec<Word> = setup
            .conjugators
            .iter()
            .map(|a| Word::conj(&setup.g, a))
            .collect();
        let (cert, cs) = staged("conjugate product", tz34_words(wb, &gs, &setup.y, &x, &y))?;
        let full = cs
            .iter()
            .zip(&setup.conjugators)
            .map(|(c, ba)| c.then(ba))
            .collect();
        (full, Some(cert))
    };
    let product = product_word(&setup.g, &full);
    let dom = target.domain();
    let img = wb.apply(&product, &dom)?;
    require(
        target.apply(&dom) == Some(img),
        "density",
        "the product does not extend w′",
    )?;
    for (i, (c, u)) in full.iter().zip(&setup.u).enumerate() {
        let img = wb.apply(c, &u.domain())?;
        require(
            u.apply(&u.domain()) == Some(img),
            "density",
            &format!("conjugator {} does not extend u_{}", i + 1, i + 1),
        )?;
    }
    Ok(DensityWitness {
        conjugators: full.iter().map(|c| wb.materialise(c)).collect(),
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{random_endpoints, random_pipeline_input, DynamicsBudget};
    use crate::swir::DloBackend;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bench() -> Workbench<DloBackend> {
        Workbench::new(DloBackend::grid(6, 400), DynamicsBudget::default())
    }

    fn register(wb: &mut Workbench<DloBackend>, gs: &[PartialAutomorphism]) -> Vec<Word> {
        gs.iter()
            .enumerate()
            .map(|(i, g)| {
                Word::map(
                    wb.add_map(format!("g{}", i + 1), g.clone(), MapKind::Extendable)
                        .unwrap(),
                )
            })
            .collect()
    }

    fn solve(seed: u64) -> (Workbench<DloBackend>, ConjugateProductCertificate) {
        let mut wb = bench();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inp = random_pipeline_input(wb.backend(), 2, &mut rng).unwrap();
        let gs = register(&mut wb, &inp.g);
        let out = tz32_pipeline(&mut wb, &gs, &inp.x).unwrap();
        let c = &out.conjugated;
        let product = wb.materialise(&c[3].then(&c[2]).then(&c[1]).then(&c[0]));
        let (x0, x4) = random_endpoints(wb.backend_mut(), &out.y, &product, &mut rng).unwrap();
        let cert = tz34_solve(&mut wb, &out.conjugated, &out.y, &x0, &x4).unwrap();
        (wb, cert)
    }

    #[test]
    fn tz32_on_identities_keeps_the_sets() {
        let mut wb = bench();
        let id = PartialAutomorphism::identity_on(&[1, 3]);
        let gs = register(&mut wb, &[id.clone(), id.clone(), id.clone(), id]);
        let xs = vec![vec![1, 3]; 5];
        let out = tz32_pipeline(&mut wb, &gs, &xs).unwrap();
        for (i, y) in out.y.iter().enumerate() {
            assert!(y.contains(&1) && y.contains(&3), "Y_{i} = {y:?}");
        }
        for a in &out.conjugators {
            assert_eq!(wb.apply(a, &[1, 3]).unwrap(), vec![1, 3]);
        }
    }

    #[test]
    fn tz32_rejects_maps_that_miss_the_sets() {
        let mut wb = bench();
        let g = PartialAutomorphism::from_pairs([(1, 2)]).unwrap();
        let gs = register(&mut wb, &[g.clone(), g.clone(), g.clone(), g]);
        let xs = vec![vec![1]; 5];
        assert!(matches!(
            tz32_pipeline(&mut wb, &gs, &xs),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn tz32_then_tz34_verifies_on_dlo() {
        for seed in 0..6 {
            let (wb, cert) = solve(seed);
            assert!(
                cert.check(wb.backend()).iter().all(|f| f.holds),
                "seed {seed}"
            );
            assert_eq!(cert.trace.len(), 3);
        }
    }

    #[test]
    fn certificate_survives_a_json_round_trip() {
        let (wb, cert) = solve(1);
        let text = serde_json::to_string(&cert).unwrap();
        let back: ConjugateProductCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        back.verify(wb.backend()).unwrap();
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let (wb, mut cert) = solve(2);
        cert.x4 = cert.x0.clone();
        assert!(matches!(cert.verify(wb.backend()), Err(Error::Logical(_))));
    }

    #[test]
    fn tz34_rejects_x0_inside_y0() {
        let mut wb = bench();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inp = random_pipeline_input(wb.backend(), 2, &mut rng).unwrap();
        let gs = register(&mut wb, &inp.g);
        let out = tz32_pipeline(&mut wb, &gs, &inp.x).unwrap();
        let x0 = vec![out.y[0][0]];
        let r = tz34_solve(&mut wb, &out.conjugated, &out.y, &x0, &x0);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    fn density_bench() -> (Workbench<DloBackend>, DensitySetup) {
        let mut wb = bench();
        let shift = PartialAutomorphism::from_pairs((0..5).map(|i| (i, i + 1))).unwrap();
        let g = Word::map(wb.add_map("g", shift, MapKind::Extendable).unwrap());
        let us: Vec<PartialAutomorphism> = [(0, 1), (2, 2), (4, 3), (1, 5)]
            .iter()
            .map(|&(x, y)| PartialAutomorphism::from_pairs([(x, y)]).unwrap())
            .collect();
        let setup = density_setup(&mut wb, &g, &us).unwrap();
        (wb, setup)
    }

    #[test]
    fn density_without_new_points_uses_the_setup() {
        let (mut wb, setup) = density_bench();
        let target = setup.w.clone();
        let wit = density_witness(&mut wb, &setup, &target).unwrap();
        assert!(wit.certificate.is_none());
        for (c, u) in wit.conjugators.iter().zip(&setup.u) {
            assert!(c.extends(u));
        }
    }

    #[test]
    fn density_extends_a_larger_target() {
        let (mut wb, setup) = density_bench();
        let mut target = setup.w.clone();
        let outside: Vec<Elem> = (0..wb.backend().len() as Elem)
            .filter(|e| setup.y.iter().all(|y| !y.contains(e)))
            .collect();
        // a point and its image with matching types over Y_0 and Y_4
        let x = outside[0];
        let q = wb
            .backend()
            .transport(&wb.tp(&[x], &setup.y[0]), &|e| setup.w.get(e))
            .unwrap();
        let y = wb.backend_mut().realize(&q, Side::Left).unwrap();
        target.insert(x, y[0]).unwrap();
        let wit = density_witness(&mut wb, &setup, &target).unwrap();
        let cert = wit.certificate.expect("a new point needs a product solve");
        cert.verify(wb.backend()).unwrap();
    }
}
