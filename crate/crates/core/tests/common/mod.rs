//! Property bodies shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use fraisse_core::amalgamation::{
    cherlin_preset, cross_color, prioritised_amalgam, AmalgamProblem, PriorityOrder,
};
use fraisse_core::dynamics::{
    random_endpoints, random_pipeline_input, tz32_pipeline, tz34_solve,
    ConjugateProductCertificate, DynamicsBudget, MapKind, Workbench,
};
use fraisse_core::structure::{
    canonical_form, canonical_key, embeds_forbidden, enumerate_forb, find_isomorphism,
    CompleteStructure, Language, OrientedSymbol, TriangleSet, VertexId,
};
use fraisse_core::swir::{DloBackend, IndependenceBackend};
use itertools::Itertools;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Outcome = Result<(), TestCaseError>;

fn structure(ids: &[VertexId], codes: &[u8]) -> CompleteStructure {
    let l = Language::two_asymmetric();
    let syms = l.oriented_symbols();
    let mut k = 0;
    CompleteStructure::from_fn(ids, |_, _| {
        k += 1;
        syms[codes[k - 1] as usize % syms.len()]
    })
    .unwrap()
}

pub fn arb_structure(max: usize) -> impl Strategy<Value = CompleteStructure> {
    (1..=max).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), prop::collection::vec(any::<u8>(), pairs))
            .prop_map(|(n, codes)| structure(&(0..n as VertexId).collect::<Vec<_>>(), &codes))
    })
}

/// Exhaustive bijection search, independent of the library's matcher.
fn brute_isomorphic(a: &CompleteStructure, b: &CompleteStructure) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (va, vb) = (a.vertices(), b.vertices());
    vb.iter().copied().permutations(vb.len()).any(|img| {
        (0..va.len()).all(|i| {
            (0..va.len()).all(|j| i == j || a.color(va[i], va[j]) == b.color(img[i], img[j]))
        })
    })
}

pub fn coherence_round_trip(s: &CompleteStructure) -> Outcome {
    let vs = s.vertices().to_vec();
    for &x in &vs {
        for &y in &vs {
            if x != y {
                prop_assert_eq!(s.color(y, x), s.color(x, y).map(OrientedSymbol::dual));
            }
        }
    }
    let back = CompleteStructure::parse_literal(&s.to_literal()).unwrap();
    prop_assert_eq!(&back, s);
    Ok(())
}

pub fn canonical_form_sound(s: &CompleteStructure, seed: u64) -> Outcome {
    let canon = canonical_form(s).unwrap();
    prop_assert!(find_isomorphism(s, &canon, &BTreeMap::new()).is_some());
    let mut perm: Vec<VertexId> = (0..s.len() as VertexId).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let moved = s.relabel(|v| perm[v as usize]).unwrap();
    prop_assert_eq!(canonical_form(&moved).unwrap(), canon);
    Ok(())
}

pub fn canonical_form_complete(a: &CompleteStructure, b: &CompleteStructure) -> Outcome {
    let same = canonical_key(a).unwrap() == canonical_key(b).unwrap();
    prop_assert_eq!(same, brute_isomorphic(a, b));
    Ok(())
}

/// `(preset, |B|, |A∖B|, |C∖B|, seed)`
pub fn arb_amalgam_case() -> impl Strategy<Value = (u32, usize, usize, usize, u64)> {
    (8u32..=12, 0usize..=2, 1usize..=2, 1usize..=2, any::<u64>())
}

pub fn order_independent((number, base, p, q, seed): (u32, usize, usize, usize, u64)) -> Outcome {
    let preset = cherlin_preset(number).unwrap();
    let t = &preset.triangles;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = enumerate_forb(&preset.language, t, base).unwrap();
    let b = bases.choose(&mut rng).unwrap();
    let Some(problem) = random_problem(b, p, q, &preset.language, t, &mut rng) else {
        return Ok(());
    };
    let pr = PriorityOrder::new(
        vec!["R+".parse().unwrap(), "R-".parse().unwrap()],
        &preset.language,
    )
    .unwrap();
    let out = prioritised_amalgam(&problem, t, &pr).unwrap();
    let mut pairs: Vec<(VertexId, VertexId)> = problem
        .left_new()
        .into_iter()
        .cartesian_product(problem.right_new())
        .collect();
    pairs.shuffle(&mut rng);
    let mut colours = BTreeMap::new();
    for &(a, c) in &pairs {
        match cross_color(&problem, t, &pr, a, c) {
            Ok(s) => {
                colours.insert((a, c), s);
            }
            Err(_) => {
                prop_assert!(out.completed().is_none());
                return Ok(());
            }
        }
    }
    if let Some(m) = out.completed() {
        for ((a, c), s) in colours {
            prop_assert_eq!(m.color(a, c), Some(s));
        }
    }
    Ok(())
}

/// Random one-point-at-a-time extensions of `b` staying inside `Forb_c(t)`.
pub fn random_problem(
    b: &CompleteStructure,
    p: usize,
    q: usize,
    lang: &Language,
    t: &TriangleSet,
    rng: &mut ChaCha8Rng,
) -> Option<AmalgamProblem> {
    let syms = lang.oriented_symbols();
    let mut grow = |mut s: CompleteStructure, k: usize, start: VertexId| {
        for v in start..start + k as VertexId {
            s = (0..50).find_map(|_| {
                let pick: BTreeMap<VertexId, OrientedSymbol> = s
                    .vertices()
                    .iter()
                    .map(|&u| (u, *syms.choose(rng).unwrap()))
                    .collect();
                let next = s.with_vertex(v, |u| pick[&u]).ok()?;
                embeds_forbidden(&next, t).is_none().then_some(next)
            })?;
        }
        Some(s)
    };
    let start = b.next_free_id().max(b.len() as VertexId);
    let left = grow(b.clone(), p, start)?;
    let right = grow(b.clone(), q, start + p as VertexId)?;
    AmalgamProblem::new(left, b.vertices(), right).ok()
}

/// Every induced substructure of an enumerated structure is enumerated.
pub fn enumeration_hereditary(number: u32, max: usize) -> bool {
    let p = cherlin_preset(number).unwrap();
    let by_size: Vec<Vec<CompleteStructure>> = (0..=max)
        .map(|n| enumerate_forb(&p.language, &p.triangles, n).unwrap())
        .collect();
    (1..=max).all(|n| {
        by_size[n].iter().all(|s| {
            s.vertices().iter().copied().combinations(n - 1).all(|sub| {
                let induced = canonical_form(&s.induced(&sub).unwrap()).unwrap();
                by_size[n - 1].contains(&induced)
            })
        })
    })
}

/// Y-construction and product solve on random input; returns the grown backend.
pub fn pipeline_certificate<B: IndependenceBackend>(
    b: &B,
    max_x: usize,
    seed: u64,
) -> fraisse_core::Result<(ConjugateProductCertificate, B)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inp = random_pipeline_input(b, max_x, &mut rng)?;
    let mut wb = Workbench::new(b.clone(), DynamicsBudget::default());
    let mut gs = Vec::new();
    for (i, g) in inp.g.iter().enumerate() {
        gs.push(wb.add_word(format!("g{}", i + 1), g.clone(), MapKind::Extendable)?);
    }
    let out = tz32_pipeline(&mut wb, &gs, &inp.x)?;
    let c = &out.conjugated;
    let product = wb.materialise(&c[3].then(&c[2]).then(&c[1]).then(&c[0]));
    let (x0, x4) = random_endpoints(wb.backend_mut(), &out.y, &product, &mut rng)?;
    let cert = tz34_solve(&mut wb, &out.conjugated, &out.y, &x0, &x4)?;
    Ok((cert, wb.backend().clone()))
}

pub fn dlo_certificate(seed: u64) -> (ConjugateProductCertificate, DloBackend) {
    pipeline_certificate(&DloBackend::grid(6, 400), 2, seed).unwrap()
}

pub fn replay_deterministic(seed: u64) -> Outcome {
    let (first, backend) = dlo_certificate(seed);
    let (second, _) = dlo_certificate(seed);
    prop_assert_eq!(&first, &second);
    let json = serde_json::to_string(&first).unwrap();
    let back: ConjugateProductCertificate = serde_json::from_str(&json).unwrap();
    let (x, y) = (first.check(&backend), back.check(&backend));
    prop_assert!(x.iter().all(|f| f.holds), "{:?}", x);
    prop_assert_eq!(x, y);
    Ok(())
}
