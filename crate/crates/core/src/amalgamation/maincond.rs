use itertools::Itertools;
use serde::Serialize;

use super::conditions::{maincond_syntactic, ConditionVerdict};
use super::PriorityOrder;
use crate::error::{Error, Result};
use crate::structure::{TriangleSet, VertexId};
use crate::swir::{ForbLimitBackend, IndependenceBackend};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MaincondBounds {
    /// Largest `|B|`.
    pub max_base: usize,
    /// Only the first `window` vertices of the approximation are used.
    pub window: usize,
}

impl Default for MaincondBounds {
    fn default() -> Self {
        MaincondBounds {
            max_base: 2,
            window: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaincondReport {
    pub syntactic: ConditionVerdict,
    pub configurations: u64,
    /// `(a, b, c, B)` with `a ⫝_{bB} c`, `r(a,b)` a solution, but not `a ⫝_B c`.
    pub counterexample: Option<(VertexId, VertexId, VertexId, Vec<VertexId>)>,
}

impl MaincondReport {
    pub fn passed(&self) -> bool {
        self.syntactic.passed() && self.counterexample.is_none()
    }
}

/// Both halves of the main condition; the semantic half is swept over
/// single points `a, b, c` and bases `B` inside the backend's structure.
pub fn maincond_check(
    t: &TriangleSet,
    pr: &PriorityOrder,
    backend: &ForbLimitBackend,
    bounds: MaincondBounds,
) -> Result<MaincondReport> {
    if bounds.window > 64 {
        return Err(Error::Resource(format!(
            "configuration window limited to 64 vertices, got {}",
            bounds.window
        )));
    }
    let syntactic = maincond_syntactic(t, pr);
    let n = bounds.window.min(backend.len()) as VertexId;
    let mut configurations = 0u64;
    for a in 0..n {
        for b in 0..n {
            if b == a || !pr.contains(backend.color(a, b)) {
                continue;
            }
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                let rest: Vec<VertexId> = (0..n).filter(|&x| x != a && x != b && x != c).collect();
                for k in 0..=bounds.max_base {
                    for base in rest.iter().copied().combinations(k) {
                        configurations += 1;
                        let mut bb = base.clone();
                        bb.push(b);
                        bb.sort_unstable();
                        if backend.ind(&[a], &bb, &[c]) && !backend.ind(&[a], &base, &[c]) {
                            return Ok(MaincondReport {
                                syntactic,
                                configurations,
                                counterexample: Some((a, b, c, base)),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(MaincondReport {
        syntactic,
        configurations,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::cherlin_preset;
    use crate::fraisse::{ApproximationTower, SaturationBudget};
    use crate::structure::Language;

    fn backend(n: u32, vertices: usize) -> (TriangleSet, PriorityOrder, ForbLimitBackend) {
        let p = cherlin_preset(n).unwrap();
        let pr = PriorityOrder::parse("R+ > R-", &p.language).unwrap();
        let mut t = ApproximationTower::new(p.language, p.triangles.clone(), "cherlin", pr.clone())
            .unwrap();
        t.saturate(SaturationBudget::new(vertices, 2).unwrap())
            .unwrap();
        (p.triangles, pr, ForbLimitBackend::new(t, vertices))
    }

    #[test]
    fn cherlin_8_passes_in_a_size_7_approximation() {
        let (t, pr, b) = backend(8, 7);
        assert_eq!(b.len(), 7);
        let r = maincond_check(&t, &pr, &b, MaincondBounds::default()).unwrap();
        assert!(r.syntactic.passed());
        assert!(r.counterexample.is_none(), "{:?}", r.counterexample);
        assert!(r.configurations > 0);
    }

    #[test]
    fn empty_constraint_passes_syntactically() {
        let lang = Language::parse_line("R+- G+-").unwrap();
        let pr = PriorityOrder::parse("G+", &lang).unwrap();
        assert!(maincond_syntactic(&TriangleSet::empty(), &pr).passed());
    }

    #[test]
    fn window_over_64_is_a_resource_error() {
        let (t, pr, b) = backend(8, 7);
        let bounds = MaincondBounds {
            max_base: 1,
            window: 65,
        };
        assert!(matches!(
            maincond_check(&t, &pr, &b, bounds),
            Err(Error::Resource(_))
        ));
    }
}
