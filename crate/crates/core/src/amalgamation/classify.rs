use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{prioritised_amalgam, AmalgamFailure, AmalgamOutcome, AmalgamProblem, PriorityOrder};
use crate::error::{Error, Result};
use crate::structure::{
    enumerate_forb, CompleteStructure, Language, TriangleSet, TriangleTable, VertexId,
    ENUMERATION_BOUND,
};

/// `(|B|, |A∖B|, |C∖B|)` of an amalgamation problem.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct ProblemShape {
    pub base: usize,
    pub left_new: usize,
    pub right_new: usize,
}

impl fmt::Display for ProblemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|B|={} |A\\B|={} |C\\B|={}",
            self.base, self.left_new, self.right_new
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassCheckOptions {
    pub max_size: usize,
    /// Without this, each side contributes at most two new points.
    pub full_sweep: bool,
    /// Keep sweeping after the first failure, recording every counterexample.
    pub collect_all: bool,
}

impl ClassCheckOptions {
    pub fn new(max_size: usize) -> Self {
        ClassCheckOptions {
            max_size,
            full_sweep: false,
            collect_all: false,
        }
    }

    pub fn full_sweep(mut self, on: bool) -> Self {
        self.full_sweep = on;
        self
    }

    pub fn collect_all(mut self, on: bool) -> Self {
        self.collect_all = on;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub problem: AmalgamProblem,
    pub failure: AmalgamFailure,
}

impl Counterexample {
    pub fn shape(&self) -> ProblemShape {
        self.problem.shape()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ClassCheckReport {
    pub problems_tested: u64,
    /// Least counterexample in enumeration order.
    pub first: Option<Counterexample>,
    pub failures_by_shape: BTreeMap<ProblemShape, u64>,
    /// Every counterexample, in enumeration order, when collecting.
    pub all: Vec<Counterexample>,
}

impl ClassCheckReport {
    pub fn passed(&self) -> bool {
        self.first.is_none()
    }
}

/// Side configuration: one-point type index per new vertex plus the colours
/// among the new vertices (`inner[h][i]` is `r(x_h, x_i)`).
struct SideConfig {
    types: Vec<usize>,
    inner: Vec<Vec<u8>>,
}

struct BaseContext<'a> {
    table: &'a TriangleTable,
    dual: &'a [u8],
    /// `types[t][j]` is `r(x, b_j)`.
    types: Vec<Vec<u8>>,
    /// `cross[ta][tc]` is the `⊗` colour for a pair of one-point types.
    cross: Vec<Vec<Option<u8>>>,
}

/// Exhaustively tests every amalgamation problem up to `max_size` vertices
/// built over `Forb_c(t)` representatives. Problems are ordered by total
/// size, then `|B|`, then `|A∖B|`, then base representative, then the two
/// side configurations.
pub fn check_prioritised_class(
    lang: &Language,
    t: &TriangleSet,
    pr: &PriorityOrder,
    opts: ClassCheckOptions,
) -> Result<ClassCheckReport> {
    if opts.max_size < 3 {
        return Err(Error::invalid("max_size must be at least 3"));
    }
    if opts.max_size > ENUMERATION_BOUND + 1 {
        return Err(Error::Resource(format!(
            "class check limited to {} vertices, got {}",
            ENUMERATION_BOUND + 1,
            opts.max_size
        )));
    }
    for s in pr.solutions() {
        if !lang.contains(*s) {
            return Err(Error::invalid(format!("solution {s} not in language")));
        }
    }
    let table = t.compile(lang)?;
    let codes: Vec<u8> = (0..lang.oriented_symbols().len() as u8).collect();
    let dual: Vec<u8> = codes
        .iter()
        .map(|&c| lang.code(lang.symbol(c).dual()).expect("dual in language"))
        .collect();
    let prio: Vec<u8> = pr
        .solutions()
        .iter()
        .map(|&s| lang.code(s).expect("checked above"))
        .collect();

    let mut report = ClassCheckReport::default();
    let mut reps: BTreeMap<usize, Vec<CompleteStructure>> = BTreeMap::new();
    for total in 2..=opts.max_size {
        for k in 0..=total - 2 {
            if let std::collections::btree_map::Entry::Vacant(e) = reps.entry(k) {
                e.insert(enumerate_forb(lang, t, k)?);
            }
            for p in 1..total - k {
                let q = total - k - p;
                if !opts.full_sweep && (p > 2 || q > 2) {
                    continue;
                }
                for base in &reps[&k] {
                    let ctx = base_context(base, &codes, &table, &dual, &prio, lang);
                    let left = side_configs(&ctx, p);
                    let right = if q == p {
                        None
                    } else {
                        Some(side_configs(&ctx, q))
                    };
                    let right = right.as_ref().unwrap_or(&left);
                    for a in &left {
                        for c in right {
                            report.problems_tested += 1;
                            if joint_ok(&ctx, a, c) {
                                continue;
                            }
                            let cex = materialise(base, &ctx, a, c, t, pr, lang)?;
                            *report.failures_by_shape.entry(cex.shape()).or_default() += 1;
                            if report.first.is_none() {
                                report.first = Some(cex.clone());
                            }
                            if !opts.collect_all {
                                return Ok(report);
                            }
                            report.all.push(cex);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

fn base_context<'a>(
    base: &CompleteStructure,
    codes: &[u8],
    table: &'a TriangleTable,
    dual: &'a [u8],
    prio: &[u8],
    lang: &Language,
) -> BaseContext<'a> {
    let k = base.len();
    let bc = |i: usize, j: usize| {
        lang.code(base.color_at(i, j).expect("complete"))
            .expect("in language")
    };
    let mut types = Vec::new();
    let mut digits = vec![0usize; k];
    loop {
        let ty: Vec<u8> = digits.iter().map(|&d| codes[d]).collect();
        let free = (0..k).all(|i| (i + 1..k).all(|j| !table.forbids(ty[i], ty[j], bc(i, j))));
        if free {
            types.push(ty);
        }
        if !crate::structure::odometer(&mut digits, codes.len()) {
            break;
        }
    }
    let cross = types
        .iter()
        .map(|ta| {
            types
                .iter()
                .map(|tc| {
                    prio.iter()
                        .copied()
                        .find(|&r| (0..k).all(|j| !table.forbids(ta[j], r, dual[tc[j] as usize])))
                })
                .collect()
        })
        .collect();
    BaseContext {
        table,
        dual,
        types,
        cross,
    }
}

/// All `n`-point extensions of the base (as ordered tuples) avoiding `T`.
fn side_configs(ctx: &BaseContext, n: usize) -> Vec<SideConfig> {
    let mut out = Vec::new();
    let mut cur = SideConfig {
        types: Vec::with_capacity(n),
        inner: vec![vec![0; n]; n],
    };
    extend_side(ctx, n, &mut cur, &mut out);
    out
}

fn extend_side(ctx: &BaseContext, n: usize, cur: &mut SideConfig, out: &mut Vec<SideConfig>) {
    let i = cur.types.len();
    if i == n {
        out.push(SideConfig {
            types: cur.types.clone(),
            inner: cur.inner.clone(),
        });
        return;
    }
    let k_colours = ctx.dual.len();
    for ti in 0..ctx.types.len() {
        cur.types.push(ti);
        // colours r(x_h, x_i) for h < i
        let mut digits = vec![0usize; i];
        loop {
            for h in 0..i {
                cur.inner[h][i] = digits[h] as u8;
                cur.inner[i][h] = ctx.dual[digits[h]];
            }
            if new_point_ok(ctx, cur, i) {
                extend_side(ctx, n, cur, out);
            }
            if !crate::structure::odometer(&mut digits, k_colours) {
                break;
            }
        }
        cur.types.pop();
    }
}

fn new_point_ok(ctx: &BaseContext, cur: &SideConfig, i: usize) -> bool {
    let ti = &ctx.types[cur.types[i]];
    for h in 0..i {
        let th = &ctx.types[cur.types[h]];
        let e = cur.inner[h][i];
        if (0..ti.len()).any(|j| ctx.table.forbids(e, th[j], ti[j])) {
            return false;
        }
        for l in h + 1..i {
            if ctx.table.forbids(cur.inner[h][l], e, cur.inner[l][i]) {
                return false;
            }
        }
    }
    true
}

fn joint_ok(ctx: &BaseContext, a: &SideConfig, c: &SideConfig) -> bool {
    let p = a.types.len();
    let q = c.types.len();
    let mut col = [[0u8; 8]; 8];
    for i in 0..p {
        for j in 0..q {
            match ctx.cross[a.types[i]][c.types[j]] {
                Some(r) => col[i][j] = r,
                None => return false,
            }
        }
    }
    for j in 0..q {
        for h in 0..p {
            for i in h + 1..p {
                if ctx.table.forbids(a.inner[h][i], col[h][j], col[i][j]) {
                    return false;
                }
            }
        }
    }
    for i in 0..p {
        for j in 0..q {
            for l in j + 1..q {
                if ctx.table.forbids(col[i][j], col[i][l], c.inner[j][l]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Builds the concrete problem (base `0..k`, left `k..k+p`, right after)
/// and recomputes its outcome with the reference operator.
fn materialise(
    base: &CompleteStructure,
    ctx: &BaseContext,
    a: &SideConfig,
    c: &SideConfig,
    t: &TriangleSet,
    pr: &PriorityOrder,
    lang: &Language,
) -> Result<Counterexample> {
    let k = base.len();
    let p = a.types.len();
    let side = |cfg: &SideConfig, offset: usize| -> Result<CompleteStructure> {
        let mut ids: Vec<VertexId> = (0..k as VertexId).collect();
        ids.extend((0..cfg.types.len()).map(|i| (offset + i) as VertexId));
        CompleteStructure::from_fn(&ids, |x, y| {
            let (x, y) = (x as usize, y as usize);
            let code = match (x < k, y < k) {
                (true, true) => lang
                    .code(base.color_at(x, y).expect("complete"))
                    .expect("in language"),
                (false, true) => ctx.types[cfg.types[x - offset]][y],
                (true, false) => ctx.dual[ctx.types[cfg.types[y - offset]][x] as usize],
                (false, false) => cfg.inner[x - offset][y - offset],
            };
            lang.symbol(code)
        })
    };
    let left = side(a, k)?;
    let right = side(c, k + p)?;
    let base_ids: Vec<VertexId> = (0..k as VertexId).collect();
    let problem = AmalgamProblem::new(left, &base_ids, right)?;
    match prioritised_amalgam(&problem, t, pr)? {
        AmalgamOutcome::Failed(failure) => Ok(Counterexample { problem, failure }),
        AmalgamOutcome::Completed(_) => Err(Error::logical(
            "class sweep and reference operator disagree on a problem",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::cherlin_preset;

    fn pr(x: &str) -> PriorityOrder {
        PriorityOrder::parse(x, &Language::two_asymmetric()).unwrap()
    }

    #[test]
    fn empty_constraint_always_passes() {
        let l = Language::two_asymmetric();
        let r = check_prioritised_class(
            &l,
            &TriangleSet::empty(),
            &pr("G-"),
            ClassCheckOptions::new(4),
        )
        .unwrap();
        assert!(r.passed());
        assert!(r.problems_tested > 0);
    }

    #[test]
    fn preset_eight_passes_at_five() {
        let p = cherlin_preset(8).unwrap();
        let r = check_prioritised_class(
            &p.language,
            &p.triangles,
            &pr("R+ R-"),
            ClassCheckOptions::new(5),
        )
        .unwrap();
        assert!(r.passed(), "{:?}", r.first.map(|c| c.failure.to_string()));
    }

    #[test]
    fn preset_eleven_fails_already_with_empty_base() {
        let p = cherlin_preset(11).unwrap();
        let r = check_prioritised_class(
            &p.language,
            &p.triangles,
            &pr("R+ R-"),
            ClassCheckOptions::new(4),
        )
        .unwrap();
        let first = r.first.unwrap();
        // a single point sending R+ to both ends of a green edge
        assert_eq!(
            first.shape(),
            ProblemShape {
                base: 0,
                left_new: 1,
                right_new: 2
            }
        );
        assert!(matches!(
            first.failure,
            AmalgamFailure::ForbiddenTriangleInResult { .. }
        ));
    }

    #[test]
    fn size_bounds() {
        let l = Language::two_asymmetric();
        let t = TriangleSet::empty();
        assert!(matches!(
            check_prioritised_class(&l, &t, &pr("R+"), ClassCheckOptions::new(2)),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            check_prioritised_class(&l, &t, &pr("R+"), ClassCheckOptions::new(9)),
            Err(Error::Resource(_))
        ));
    }
}
