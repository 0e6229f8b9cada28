use super::{Elem, IndependenceBackend, Side};
use crate::error::{Error, Result};
use crate::fraisse::{ApproximationTower, TypeDescriptor};
use crate::structure::OrientedSymbol;

/// Independence in the limit of a prioritised semi-free class:
/// `A ⫝_B C` iff `ABC = AB ⊗_B BC`, evaluated inside a finite tower.
#[derive(Clone, Debug)]
pub struct ForbLimitBackend {
    tower: ApproximationTower,
    max_vertices: usize,
}

impl ForbLimitBackend {
    pub fn new(tower: ApproximationTower, max_vertices: usize) -> Self {
        ForbLimitBackend {
            tower,
            max_vertices,
        }
    }

    pub fn tower(&self) -> &ApproximationTower {
        &self.tower
    }

    pub fn into_tower(self) -> ApproximationTower {
        self.tower
    }

    pub fn max_vertices(&self) -> usize {
        self.max_vertices
    }

    pub fn color(&self, a: Elem, b: Elem) -> OrientedSymbol {
        self.tower.color(a, b)
    }

    fn pair_ok(&self, a: Elem, c: Elem, base: &[Elem]) -> bool {
        self.tower.prioritised_code(a, c, base) == Some(self.tower.code(a, c))
    }
}

impl IndependenceBackend for ForbLimitBackend {
    type Type = TypeDescriptor;

    fn len(&self) -> usize {
        self.tower.len()
    }

    fn ind(&self, a: &[Elem], b: &[Elem], c: &[Elem]) -> bool {
        self.tower.independent(a, b, c)
    }

    fn pair_rows(&self, base: u64, window: usize) -> Vec<u64> {
        let n = window.min(self.len()).min(64);
        let b = super::elems_of(base);
        (0..n as Elem)
            .map(|a| {
                if base >> a & 1 == 1 {
                    return 0;
                }
                (0..n as Elem)
                    .filter(|&c| c != a && base >> c & 1 == 0 && self.pair_ok(a, c, &b))
                    .fold(0u64, |m, c| m | 1 << c)
            })
            .collect()
    }

    fn tp(&self, tuple: &[Elem], base: &[Elem]) -> TypeDescriptor {
        self.tower
            .tp(tuple, base)
            .expect("elements of the universe")
    }

    fn transport(
        &self,
        p: &TypeDescriptor,
        f: &dyn Fn(Elem) -> Option<Elem>,
    ) -> Option<TypeDescriptor> {
        p.transport(f)
    }

    fn type_base(&self, p: &TypeDescriptor) -> Vec<Elem> {
        p.base().to_vec()
    }

    fn type_arity(&self, p: &TypeDescriptor) -> usize {
        p.arity()
    }

    fn is_algebraic(&self, p: &TypeDescriptor) -> bool {
        p.is_algebraic()
    }

    fn refinements(&self, p: &TypeDescriptor, extra: &[Elem]) -> Vec<TypeDescriptor> {
        let mut extra: Vec<Elem> = extra
            .iter()
            .copied()
            .filter(|x| p.base().binary_search(x).is_err())
            .collect();
        extra.sort_unstable();
        extra.dedup();
        let k = p.fresh_count();
        let symbols = self.tower.language().oriented_symbols();
        let slots = k * extra.len();
        let mut out = Vec::new();
        let mut digits = vec![0usize; slots];
        refine_search(self, p, &extra, symbols, &mut digits, 0, &mut out);
        out
    }

    fn realizations(&self, p: &TypeDescriptor) -> Vec<Vec<Elem>> {
        self.tower.realizations(p)
    }

    fn realize(&mut self, p: &TypeDescriptor, side: Side) -> Result<Vec<Elem>> {
        if self.tower.len() + p.fresh_count() > self.max_vertices {
            return Err(Error::budget(format!(
                "realising would exceed the cap of {} vertices",
                self.max_vertices
            )));
        }
        self.tower.realize(p, side)
    }

    fn is_partial_iso(&self, pairs: &[(Elem, Elem)]) -> bool {
        let n = self.len() as Elem;
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if x >= n || y >= n {
                return false;
            }
            for &(x2, y2) in &pairs[i + 1..] {
                if (x == x2) != (y == y2) {
                    return false;
                }
                if x != x2 && self.tower.code(x, x2) != self.tower.code(y, y2) {
                    return false;
                }
            }
        }
        true
    }

    fn one_types(&self, base: &[Elem]) -> Vec<TypeDescriptor> {
        self.tower
            .one_point_extensions(base)
            .expect("base inside the universe")
    }

    fn expects_symmetry(&self) -> bool {
        // ⊗ is orientation-blind exactly when every solution is symmetric
        self.tower
            .priority()
            .solutions()
            .iter()
            .all(|s| s.is_symmetric())
    }

    fn describe(&self) -> String {
        format!(
            "Forb limit {} with priority {} on {} vertices",
            self.tower.constraint_name(),
            self.tower.priority(),
            self.len()
        )
    }
}

/// Backtracking over colours `r(x_f, extra_e)`, one pair at a time, pruned
/// by forbidden triangles with base elements, earlier extras and other
/// fresh coordinates.
fn refine_search(
    backend: &ForbLimitBackend,
    p: &TypeDescriptor,
    extra: &[Elem],
    symbols: &[OrientedSymbol],
    digits: &mut Vec<usize>,
    pos: usize,
    out: &mut Vec<TypeDescriptor>,
) {
    let e_count = extra.len();
    let t = backend.tower.constraint();
    if pos == digits.len() {
        let colours: Vec<Vec<OrientedSymbol>> = (0..p.fresh_count())
            .map(|f| {
                (0..e_count)
                    .map(|e| symbols[digits[f * e_count + e]])
                    .collect()
            })
            .collect();
        if let Ok(q) = p.extend_base(extra, &colours) {
            out.push(q);
        }
        return;
    }
    let (f, e) = (pos / e_count, pos % e_count);
    let x_e = extra[e];
    for d in 0..symbols.len() {
        digits[pos] = d;
        let col = symbols[d];
        let ok = p.base().iter().enumerate().all(|(j, &b)| {
            b == x_e || !t.forbids(col, p.color_to_base(f, j), backend.color(x_e, b))
        }) && (0..e).all(|e2| {
            !t.forbids(
                col,
                symbols[digits[f * e_count + e2]],
                backend.color(x_e, extra[e2]),
            )
        }) && (0..f)
            .all(|g| !t.forbids(p.color_among(f, g), col, symbols[digits[g * e_count + e]]));
        if ok {
            refine_search(backend, p, extra, symbols, digits, pos + 1, out);
        }
    }
}
