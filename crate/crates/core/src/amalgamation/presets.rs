use super::AmalgamProblem;
use crate::error::{Error, Result};
use crate::structure::{CompleteStructure, Language, TriangleSet};

/// Numbers of the built-in forbidden-triangle presets.
pub const CHERLIN_NUMBERS: [u32; 5] = [8, 9, 10, 11, 12];

/// A built-in set of forbidden triangles over `{R±, G±}`.
#[derive(Clone, Debug)]
pub struct CherlinPreset {
    pub number: u32,
    pub name: String,
    pub language: Language,
    pub triangles: TriangleSet,
    /// Whether some priority order is expected to make `⊗` close the class.
    pub expect_prioritised: bool,
}

fn listing(number: u32) -> Option<&'static str> {
    Some(match number {
        8 => "G+ G- G+\nR+ G- G+\n",
        9 => "G+ G+ G+\nR+ G- G+\n",
        10 => "G+ G+ G+\nG+ G- G+\nR+ G- G+\n",
        11 => "R+ R- R+\nG+ G+ G+\nG+ G- G+\nG+ R+ R+\nG+ R- R-\n",
        12 => "R+ R- R+\nG+ G+ G+\nR+ G- G+\nG+ R+ R+\nG+ R- R-\nG+ R+ R-\n",
        _ => return None,
    })
}

/// Preset `cherlin-N` for `N` in 8..=12.
pub fn cherlin_preset(number: u32) -> Result<CherlinPreset> {
    let text =
        listing(number).ok_or_else(|| Error::invalid(format!("no preset cherlin-{number}")))?;
    let language = Language::two_asymmetric();
    let triangles = TriangleSet::parse(text)?;
    triangles.check_language(&language)?;
    Ok(CherlinPreset {
        number,
        name: format!("cherlin-{number}"),
        language,
        triangles,
        expect_prioritised: number <= 10,
    })
}

impl CherlinPreset {
    pub fn by_name(name: &str) -> Result<Self> {
        let n = name
            .strip_prefix("cherlin-")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::invalid(format!("unknown preset `{name}`")))?;
        cherlin_preset(n)
    }
}

fn lit(text: &str) -> CompleteStructure {
    CompleteStructure::parse_literal(text).expect("valid literal")
}

/// Four-point problem over `Forb_c(#8)` with `b = 0`, `a1 = 1`, `a2 = 2`,
/// `c = 3`; under `R+ > R-` it completes with `r(a1,c) = R-` and
/// `r(a2,c) = R+`.
pub fn worked_problem() -> AmalgamProblem {
    AmalgamProblem::new(lit("0 1 G+\n2 0 G+\n2 1 G+\n"), &[0], lit("3 0 G+\n"))
        .expect("valid problem")
}

/// Problems on which `⊗` fails for #11 and #12, paired with the priority
/// that fails: one headed by `R`, one headed by `G`. Both have `|B| = 1`,
/// `|A∖B| = 2`, `|C∖B| = 1`.
pub fn failure_problems() -> [(&'static str, AmalgamProblem); 2] {
    [
        (
            "R+ R-",
            AmalgamProblem::new(lit("0 1 R+\n2 0 G+\n2 1 G+\n"), &[0], lit("3 0 G+\n"))
                .expect("valid problem"),
        ),
        (
            "G+ G-",
            AmalgamProblem::new(lit("1 0 R+\n0 2 R+\n2 1 G+\n"), &[0], lit("0 3 G+\n"))
                .expect("valid problem"),
        ),
    ]
}
