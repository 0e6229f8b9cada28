use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Elem, IndependenceBackend, Side};
use crate::error::{Error, Result};

/// Position of one tuple coordinate relative to a base of rationals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum DloSlot {
    /// Equal to the `j`-th base element in increasing order.
    Base(usize),
    /// Strictly between base elements `cut - 1` and `cut`; `rank` orders
    /// the distinct fresh values.
    Fresh { cut: usize, rank: usize },
}

/// Order type of a tuple over a finite base.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct DloType {
    /// Base elements in increasing order of value.
    pub base: Vec<Elem>,
    pub slots: Vec<DloSlot>,
}

impl DloType {
    pub fn fresh_count(&self) -> usize {
        self.slots
            .iter()
            .filter_map(|s| match s {
                DloSlot::Fresh { rank, .. } => Some(rank + 1),
                DloSlot::Base(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Cut of each distinct fresh value, by rank.
    fn fresh_cuts(&self) -> Vec<usize> {
        let mut cuts = vec![0; self.fresh_count()];
        for s in &self.slots {
            if let DloSlot::Fresh { cut, rank } = *s {
                cuts[rank] = cut;
            }
        }
        cuts
    }
}

/// The dense linear order `(ℚ, ≤)` restricted to a growing finite set of
/// exact rationals, with `A ⫝_B C` iff `A ∩ C ⊆ B` and every `a ≤ c` with
/// `a ∈ A∖B`, `c ∈ C∖B` is separated by some `b ∈ B` with `a ≤ b ≤ c`.
#[derive(Clone, Debug)]
pub struct DloBackend {
    points: Vec<BigRational>,
    max_points: usize,
}

impl DloBackend {
    pub fn new(points: Vec<BigRational>, max_points: usize) -> Result<Self> {
        let mut sorted = points.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("points must be distinct"));
        }
        Ok(DloBackend { points, max_points })
    }

    /// The integers `0..n`.
    pub fn grid(n: usize, max_points: usize) -> Self {
        let pts = (0..n)
            .map(|i| BigRational::from_integer(BigInt::from(i)))
            .collect();
        DloBackend::new(pts, max_points).expect("distinct integers")
    }

    pub fn points(&self) -> &[BigRational] {
        &self.points
    }

    pub fn max_points(&self) -> usize {
        self.max_points
    }

    pub fn value(&self, e: Elem) -> &BigRational {
        &self.points[e as usize]
    }

    fn cmp(&self, x: Elem, y: Elem) -> Ordering {
        self.points[x as usize].cmp(&self.points[y as usize])
    }

    fn pair_ok(&self, a: Elem, c: Elem, base: &[Elem]) -> bool {
        let (va, vc) = (self.value(a), self.value(c));
        va > vc
            || base
                .iter()
                .any(|&b| va <= self.value(b) && self.value(b) <= vc)
    }

    fn sorted_base(&self, base: &[Elem]) -> Vec<Elem> {
        let mut b = base.to_vec();
        b.sort_by(|&x, &y| self.cmp(x, y));
        b.dedup();
        b
    }

    /// Open interval of a cut over a value-sorted base.
    fn cut_bounds<'a>(
        &'a self,
        base: &[Elem],
        cut: usize,
    ) -> (Option<&'a BigRational>, Option<&'a BigRational>) {
        let lo = if cut == 0 {
            None
        } else {
            Some(self.value(base[cut - 1]))
        };
        let hi = base.get(cut).map(|&b| self.value(b));
        (lo, hi)
    }

    fn in_cut(&self, v: &BigRational, lo: Option<&BigRational>, hi: Option<&BigRational>) -> bool {
        lo.is_none_or(|l| v > l) && hi.is_none_or(|h| v < h)
    }
}

impl IndependenceBackend for DloBackend {
    type Type = DloType;

    fn len(&self) -> usize {
        self.points.len()
    }

    fn ind(&self, a: &[Elem], b: &[Elem], c: &[Elem]) -> bool {
        for &x in a {
            if b.contains(&x) {
                continue;
            }
            for &y in c {
                if b.contains(&y) {
                    continue;
                }
                if x == y || !self.pair_ok(x, y, b) {
                    return false;
                }
            }
        }
        true
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

    fn tp(&self, tuple: &[Elem], base: &[Elem]) -> DloType {
        let base = self.sorted_base(base);
        let mut fresh: Vec<Elem> = tuple
            .iter()
            .copied()
            .filter(|x| !base.contains(x))
            .collect();
        fresh.sort_by(|&x, &y| self.cmp(x, y));
        fresh.dedup();
        let slots = tuple
            .iter()
            .map(|x| {
                if let Some(j) = base.iter().position(|b| b == x) {
                    DloSlot::Base(j)
                } else {
                    let cut = base
                        .iter()
                        .filter(|&&b| self.cmp(b, *x) == Ordering::Less)
                        .count();
                    let rank = fresh.iter().position(|f| f == x).expect("fresh");
                    DloSlot::Fresh { cut, rank }
                }
            })
            .collect();
        DloType { base, slots }
    }

    fn transport(&self, p: &DloType, f: &dyn Fn(Elem) -> Option<Elem>) -> Option<DloType> {
        let base: Vec<Elem> = p.base.iter().map(|&b| f(b)).collect::<Option<_>>()?;
        if base.iter().any(|&b| b as usize >= self.len()) {
            return None;
        }
        if base
            .windows(2)
            .any(|w| self.cmp(w[0], w[1]) != Ordering::Less)
        {
            return None;
        }
        Some(DloType {
            base,
            slots: p.slots.clone(),
        })
    }

    fn type_base(&self, p: &DloType) -> Vec<Elem> {
        p.base.clone()
    }

    fn type_arity(&self, p: &DloType) -> usize {
        p.slots.len()
    }

    fn is_algebraic(&self, p: &DloType) -> bool {
        p.slots.iter().any(|s| matches!(s, DloSlot::Base(_)))
    }

    fn refinements(&self, p: &DloType, extra: &[Elem]) -> Vec<DloType> {
        let mut all: Vec<Elem> = p.base.iter().chain(extra).copied().collect();
        all = self.sorted_base(&all);
        // new base index of each old base element
        let old_pos: Vec<usize> = p
            .base
            .iter()
            .map(|b| all.iter().position(|x| x == b).expect("kept"))
            .collect();
        let old_cuts = p.fresh_cuts();
        // each old cut maps to a range of new cuts
        let range = |cut: usize| -> (usize, usize) {
            let lo = if cut == 0 { 0 } else { old_pos[cut - 1] + 1 };
            let hi = if cut == p.base.len() {
                all.len()
            } else {
                old_pos[cut]
            };
            (lo, hi)
        };
        let mut out = Vec::new();
        let mut choice = Vec::with_capacity(old_cuts.len());
        refine_cuts(
            &old_cuts,
            &range,
            &mut choice,
            &mut |new_cuts: &[usize]| {
                let slots = p
                    .slots
                    .iter()
                    .map(|s| match *s {
                        DloSlot::Base(j) => DloSlot::Base(old_pos[j]),
                        DloSlot::Fresh { rank, .. } => DloSlot::Fresh {
                            cut: new_cuts[rank],
                            rank,
                        },
                    })
                    .collect();
                out.push(DloType {
                    base: all.clone(),
                    slots,
                });
            },
        );
        out
    }

    fn realizations(&self, p: &DloType) -> Vec<Vec<Elem>> {
        let cuts = p.fresh_cuts();
        let mut out = Vec::new();
        let mut chosen: Vec<Elem> = Vec::new();
        collect_dlo(self, p, &cuts, &mut chosen, &mut out);
        out
    }

    fn realize(&mut self, p: &DloType, side: Side) -> Result<Vec<Elem>> {
        if self.is_algebraic(p) {
            return Err(Error::invalid("algebraic types are not realised"));
        }
        let k = p.fresh_count();
        if self.len() + k > self.max_points {
            return Err(Error::budget(format!(
                "realising would exceed the cap of {} points",
                self.max_points
            )));
        }
        let cuts = p.fresh_cuts();
        let mut values: Vec<BigRational> = Vec::with_capacity(k);
        let mut r = 0;
        while r < k {
            let cut = cuts[r];
            let group = cuts[r..].iter().take_while(|&&c| c == cut).count();
            let (lo, hi) = self.cut_bounds(&p.base, cut);
            let inside: Vec<&BigRational> = self
                .points
                .iter()
                .filter(|v| self.in_cut(v, lo, hi))
                .collect();
            // left: above every universe point in the cut; right: below
            let (from, to) = match side {
                Side::Left => (inside.iter().max().copied().or(lo), hi),
                Side::Right => (lo, inside.iter().min().copied().or(hi)),
            };
            for i in 0..group {
                values.push(spread(from, to, i, group));
            }
            r += group;
        }
        let first = self.points.len() as Elem;
        self.points.extend(values);
        Ok(p.slots
            .iter()
            .map(|s| match *s {
                DloSlot::Base(j) => p.base[j],
                DloSlot::Fresh { rank, .. } => first + rank as Elem,
            })
            .collect())
    }

    fn is_partial_iso(&self, pairs: &[(Elem, Elem)]) -> bool {
        let n = self.len() as Elem;
        pairs.iter().all(|&(x, y)| x < n && y < n)
            && pairs.iter().all(|&(x, y)| {
                pairs
                    .iter()
                    .all(|&(x2, y2)| self.cmp(x, x2) == self.cmp(y, y2))
            })
    }

    fn one_types(&self, base: &[Elem]) -> Vec<DloType> {
        let base = self.sorted_base(base);
        (0..=base.len())
            .map(|cut| DloType {
                base: base.clone(),
                slots: vec![DloSlot::Fresh { cut, rank: 0 }],
            })
            .collect()
    }

    fn expects_symmetry(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        format!("dense linear order on {} rationals", self.len())
    }
}

/// The `i`-th of `n` increasing values strictly inside `(from, to)`.
fn spread(from: Option<&BigRational>, to: Option<&BigRational>, i: usize, n: usize) -> BigRational {
    let step = BigRational::from_integer(BigInt::from(i + 1));
    match (from, to) {
        (None, None) => step,
        (Some(l), None) => l + step,
        (None, Some(h)) => h - BigRational::from_integer(BigInt::from(n - i)),
        (Some(l), Some(h)) => {
            let frac = step / BigRational::from_integer(BigInt::from(n + 1));
            l + (h - l) * frac
        }
    }
}

fn refine_cuts(
    old: &[usize],
    range: &dyn Fn(usize) -> (usize, usize),
    choice: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let r = choice.len();
    if r == old.len() {
        emit(choice);
        return;
    }
    let (lo, hi) = range(old[r]);
    let start = match choice.last() {
        Some(&prev) if r > 0 && old[r - 1] == old[r] => prev.max(lo),
        _ => lo,
    };
    for c in start..=hi {
        choice.push(c);
        refine_cuts(old, range, choice, emit);
        choice.pop();
    }
}

fn collect_dlo(
    b: &DloBackend,
    p: &DloType,
    cuts: &[usize],
    chosen: &mut Vec<Elem>,
    out: &mut Vec<Vec<Elem>>,
) {
    let r = chosen.len();
    if r == cuts.len() {
        out.push(
            p.slots
                .iter()
                .map(|s| match *s {
                    DloSlot::Base(j) => p.base[j],
                    DloSlot::Fresh { rank, .. } => chosen[rank],
                })
                .collect(),
        );
        return;
    }
    let (lo, hi) = b.cut_bounds(&p.base, cuts[r]);
    for e in 0..b.len() as Elem {
        let v = b.value(e);
        if !b.in_cut(v, lo, hi) || p.base.contains(&e) {
            continue;
        }
        if let Some(&prev) = chosen.last() {
            if b.value(prev) >= v {
                continue;
            }
        }
        chosen.push(e);
        collect_dlo(b, p, cuts, chosen, out);
        chosen.pop();
    }
}
