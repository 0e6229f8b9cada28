use itertools::Itertools;
use serde::Serialize;

use crate::structure::{CompleteStructure, VertexId};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Direction {
    /// A point of the domain side has no image.
    Forth,
    /// A point of the range side has no preimage.
    Back,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ExtensionFailure {
    pub domain: Vec<VertexId>,
    pub image: Vec<VertexId>,
    pub point: VertexId,
    pub direction: Direction,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HomogeneityReport {
    pub maps_checked: u64,
    /// Set when the map budget ran out before the sweep finished.
    pub truncated: bool,
    pub failures: Vec<ExtensionFailure>,
}

/// Checks one-point forth and back extension of every partial isomorphism
/// between substructures of `core` of size at most `max_size`: each further
/// point of `core` must find a partner anywhere in `m`. At most `budget`
/// maps are examined.
pub fn homogeneity_audit(
    m: &CompleteStructure,
    core: &[VertexId],
    max_size: usize,
    budget: u64,
) -> HomogeneityReport {
    let ids = m.vertices();
    let core: Vec<VertexId> = core.iter().copied().filter(|&v| m.contains(v)).collect();
    let mut report = HomogeneityReport::default();
    for size in 1..=max_size.min(core.len()) {
        for dom in core.iter().copied().combinations(size) {
            for img in core.iter().copied().permutations(size) {
                if !preserves(m, &dom, &img) {
                    continue;
                }
                if report.maps_checked >= budget {
                    report.truncated = true;
                    return report;
                }
                report.maps_checked += 1;
                for &x in &core {
                    if dom.contains(&x) {
                        continue;
                    }
                    let ok = ids
                        .iter()
                        .any(|&y| !img.contains(&y) && extends(m, &dom, &img, x, y));
                    if !ok {
                        report.failures.push(ExtensionFailure {
                            domain: dom.clone(),
                            image: img.clone(),
                            point: x,
                            direction: Direction::Forth,
                        });
                    }
                }
                for &y in &core {
                    if img.contains(&y) {
                        continue;
                    }
                    let ok = ids
                        .iter()
                        .any(|&x| !dom.contains(&x) && extends(m, &dom, &img, x, y));
                    if !ok {
                        report.failures.push(ExtensionFailure {
                            domain: dom.clone(),
                            image: img.clone(),
                            point: y,
                            direction: Direction::Back,
                        });
                    }
                }
            }
        }
    }
    report
}

fn preserves(m: &CompleteStructure, dom: &[VertexId], img: &[VertexId]) -> bool {
    (0..dom.len())
        .all(|i| (i + 1..dom.len()).all(|j| m.color(dom[i], dom[j]) == m.color(img[i], img[j])))
}

fn extends(
    m: &CompleteStructure,
    dom: &[VertexId],
    img: &[VertexId],
    x: VertexId,
    y: VertexId,
) -> bool {
    dom.iter()
        .zip(img)
        .all(|(&d, &e)| m.color(x, d) == m.color(y, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::{cherlin_preset, PriorityOrder};
    use crate::fraisse::{ApproximationTower, SaturationBudget, SaturationStatus};

    /// Tower plus a stage all of whose one-point extensions are realised.
    fn saturated_one() -> (ApproximationTower, Vec<VertexId>) {
        let p = cherlin_preset(8).unwrap();
        let pr = PriorityOrder::parse("R+ R-", &p.language).unwrap();
        let mut t = ApproximationTower::new(p.language, p.triangles, "cherlin-8", pr).unwrap();
        assert_eq!(
            t.saturate(SaturationBudget::new(60, 1).unwrap()).unwrap(),
            SaturationStatus::BudgetExhausted
        );
        let ends = t.stage_ends();
        let core = (0..ends[ends.len() - 3] as VertexId).collect();
        (t, core)
    }

    #[test]
    fn identity_maps_extend() {
        let m = CompleteStructure::parse_literal("0 1 G+\n1 2 R+\n0 2 G-\n").unwrap();
        for dom in [[0u32], [1], [2]] {
            for x in 0..3 {
                if x != dom[0] {
                    assert!(extends(&m, &dom, &dom, x, x));
                }
            }
        }
    }

    #[test]
    fn saturated_tower_has_no_size_one_failures() {
        let (t, core) = saturated_one();
        assert!(core.len() >= 3);
        let r = homogeneity_audit(&t.structure(), &core, 1, u64::MAX);
        assert!(!r.truncated);
        assert!(r.failures.is_empty(), "{:?}", &r.failures[..1]);
    }

    #[test]
    fn removing_a_vertex_breaks_extension() {
        let (t, core) = saturated_one();
        let m = t.structure();
        let broken = (0..m.len() as VertexId).any(|v| {
            let rest: Vec<VertexId> = m.vertices().iter().copied().filter(|&u| u != v).collect();
            !homogeneity_audit(&m.induced(&rest).unwrap(), &core, 1, u64::MAX)
                .failures
                .is_empty()
        });
        assert!(broken);
    }

    #[test]
    fn budget_truncates() {
        let (t, core) = saturated_one();
        let r = homogeneity_audit(&t.structure(), &core, 2, 10);
        assert!(r.truncated);
        assert_eq!(r.maps_checked, 10);
    }
}
