use rand::seq::SliceRandom;
use rand::Rng;

use super::{union, PartialAutomorphism};
use crate::error::{Error, Result};
use crate::swir::{Elem, IndependenceBackend, Side};

/// A random partial isomorphism with the given domain, found by
/// backtracking over shuffled targets; `None` if none exists.
pub fn random_partial_iso<B: IndependenceBackend, R: Rng>(
    backend: &B,
    domain: &[Elem],
    rng: &mut R,
) -> Option<PartialAutomorphism> {
    let mut pairs: Vec<(Elem, Elem)> = Vec::with_capacity(domain.len());
    let n = backend.len() as Elem;
    fn go<B: IndependenceBackend, R: Rng>(
        b: &B,
        domain: &[Elem],
        n: Elem,
        pairs: &mut Vec<(Elem, Elem)>,
        rng: &mut R,
    ) -> bool {
        let Some(&x) = domain.get(pairs.len()) else {
            return true;
        };
        let mut targets: Vec<Elem> = (0..n).collect();
        targets.shuffle(rng);
        for y in targets {
            pairs.push((x, y));
            if b.is_partial_iso(pairs) && go(b, domain, n, pairs, rng) {
                return true;
            }
            pairs.pop();
        }
        false
    }
    go(backend, domain, n, &mut pairs, rng)
        .then(|| PartialAutomorphism::from_pairs(pairs).expect("injective"))
}

/// Maps `g_1 … g_4` and sets `X_0 … X_4` with `g_i(X_{i−1}) = X_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineInput {
    pub g: Vec<PartialAutomorphism>,
    pub x: Vec<Vec<Elem>>,
}

/// A random `X_0` of size `1..=max_x` and random `g_i` on `X_{i−1}`.
pub fn random_pipeline_input<B: IndependenceBackend, R: Rng>(
    backend: &B,
    max_x: usize,
    rng: &mut R,
) -> Result<PipelineInput> {
    let n = backend.len();
    if n == 0 || max_x == 0 {
        return Err(Error::invalid("need a non-empty universe and max_x ≥ 1"));
    }
    let size = rng.gen_range(1..=max_x.min(n));
    let mut all: Vec<Elem> = (0..n as Elem).collect();
    all.shuffle(rng);
    let mut x0: Vec<Elem> = all[..size].to_vec();
    x0.sort_unstable();
    let mut xs = vec![x0];
    let mut gs = Vec::new();
    for i in 0..4 {
        let g = random_partial_iso(backend, &xs[i], rng)
            .ok_or_else(|| Error::logical("no partial isomorphism on a subset of the universe"))?;
        let mut next = g.range();
        next.sort_unstable();
        xs.push(next);
        gs.push(g);
    }
    Ok(PipelineInput { g: gs, x: xs })
}

/// `x_0`: a random existing vertex outside every `Y_i`; `x_4`: a
/// realisation of `product·tp(x_0/Y_0)` outside every `Y_i`, existing when
/// possible and fresh otherwise.
pub fn random_endpoints<B: IndependenceBackend, R: Rng>(
    backend: &mut B,
    ys: &[Vec<Elem>],
    product: &PartialAutomorphism,
    rng: &mut R,
) -> Result<(Vec<Elem>, Vec<Elem>)> {
    let parts: Vec<&[Elem]> = ys.iter().map(|y| y.as_slice()).collect();
    let used = union(&parts);
    let outside: Vec<Elem> = (0..backend.len() as Elem)
        .filter(|e| !used.contains(e))
        .collect();
    let x0 = match outside.choose(rng) {
        Some(&v) => vec![v],
        None => {
            let p = backend
                .one_types(&used)
                .into_iter()
                .next()
                .ok_or_else(|| Error::logical("no non-algebraic 1-type over the Y_i"))?;
            backend.realize(&p, Side::Left)?
        }
    };
    let q = backend
        .transport(&backend.tp(&x0, &ys[0]), &|e| product.get(e))
        .ok_or_else(|| Error::invalid("the product is undefined on Y_0"))?;
    let mut cands: Vec<Vec<Elem>> = backend
        .realizations(&q)
        .into_iter()
        .filter(|t| t.iter().all(|e| !used.contains(e)))
        .collect();
    cands.sort();
    let x4 = match cands.choose(rng) {
        Some(t) => t.clone(),
        None => backend.realize(&q, Side::Left)?,
    };
    Ok((x0, x4))
}
