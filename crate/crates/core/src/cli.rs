//! Command line front end: configuration, dispatch and dual text/JSON
//! reports.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::amalgamation::{
    check_prioritised_class, cherlin_preset, condition1_check, failure_problems,
    prioritised_amalgam, worked_problem, AmalgamOutcome, AmalgamProblem, ClassCheckOptions,
    ClassCheckReport, Counterexample, PriorityOrder,
};
use crate::dynamics::{
    colourrange_build, commutator_mover_build, default_schedule, density_setup, density_witness,
    random_endpoints, random_partial_iso, random_pipeline_input, tz32_pipeline, tz34_solve,
    ConjugateProductCertificate, DynamicsBudget, MapKind, MoverVariant, PartialAutomorphism, Word,
    Workbench,
};
use crate::error::{Error, Result};
use crate::fraisse::{ApproximationTower, SaturationBudget};
use crate::structure::{CompleteStructure, Language, OrientedSymbol, TriangleSet, VertexId};
use crate::swir::{
    audit_all, replay_counterexample, AuditBounds, AuditCounterexample, AxiomReport, DloBackend,
    Elem, ForbLimitBackend, IndependenceBackend, Side, LITERAL_READING,
};

#[derive(Parser, Debug)]
#[command(
    name = "fraisse",
    version,
    about = "Prioritised semi-free amalgamation, Fraisse approximations and independence audits"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in triangle set, `cherlin-8` to `cherlin-12`.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Largest |A| and |C| in the class check (default 5).
    #[arg(long, global = true)]
    pub max_size: Option<usize>,
    /// Largest saturation base, and largest |X| in product runs (default 2).
    #[arg(long, global = true)]
    pub max_base: Option<usize>,
    /// Vertex cap for the saturated tower (default 30).
    #[arg(long, global = true)]
    pub max_vertices: Option<usize>,
    /// Random seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write the report as JSON to this path.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Condition 1 and the exhaustive class check, for one priority or all.
    Classify {
        /// Priority order such as `R+ > R-`.
        #[arg(long)]
        priority: Option<String>,
    },
    /// One prioritised amalgamation problem from structure literal files.
    Amalgamate {
        /// Structure literal for A.
        left: PathBuf,
        /// Structure literal for C.
        right: PathBuf,
        /// Shared vertices, comma separated.
        #[arg(long, value_delimiter = ',')]
        base: Vec<VertexId>,
        /// Priority order such as `R+ > R-`.
        #[arg(long)]
        priority: Option<String>,
    },
    /// Builds a saturated finite approximation of the limit.
    Limit {
        /// Write the tower dump here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Audits the independence axioms on a backend.
    CheckSwir {
        /// Independence backend.
        #[arg(long, value_enum, default_value = "forb")]
        backend: BackendKind,
        /// Universe size for `dlo`, sweep window for `forb`.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Runs a back-and-forth construction.
    Dynamics {
        /// Construction to run.
        #[arg(value_enum)]
        pipeline: Pipeline,
        /// Independence backend.
        #[arg(long, value_enum, default_value = "forb")]
        backend: BackendKind,
        /// Number of seeded runs, starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Write the first replay record here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Replays a certificate, a counterexample, or every record of a report.
    Verify {
        /// Replay record or JSON report.
        certificate: PathBuf,
    },
    /// End-to-end reproduction for a built-in triangle set.
    Cherlin {
        /// Triangle set number, 8 to 12.
        number: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Dlo,
    Forb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    /// Y-construction then the conjugate-product solve.
    Product,
    /// Density: four partial maps and one extra point.
    Density,
    /// Colour-range construction of `h`.
    Colourrange,
    /// Commutator mover `k` (after colour range on `forb`).
    Mover,
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Language line such as `R+- G+-`.
    pub language: Option<String>,
    pub preset: Option<String>,
    /// Forbidden triangles as `r(a,b) r(a,c) r(b,c)` strings.
    pub triangles: Option<Vec<String>>,
    /// Name used in dumps for an inline triangle set.
    pub name: Option<String>,
    /// Solutions in priority order, e.g. `R+ > R-`.
    pub priority: Option<String>,
    pub max_size: Option<usize>,
    pub max_base: Option<usize>,
    pub max_vertices: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}

/// Validated settings after merging the config file and the flags.
#[derive(Clone, Debug)]
pub struct Settings {
    pub language: Language,
    pub triangles: Option<(String, TriangleSet)>,
    pub priority: Option<PriorityOrder>,
    pub max_size: usize,
    pub max_base: usize,
    pub max_vertices: usize,
    pub seed: u64,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let language = match &cfg.language {
            Some(l) => Language::parse_line(l)?,
            None => Language::two_asymmetric(),
        };
        let preset = cli.preset.clone().or(cfg.preset.clone());
        let triangles = match (&preset, &cfg.triangles) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid(
                    "give either a preset or inline triangles, not both",
                ))
            }
            (Some(name), None) => {
                let p = crate::amalgamation::CherlinPreset::by_name(name)?;
                if cfg.language.is_some() && p.language != language {
                    return Err(Error::invalid("presets use the language R+- G+-"));
                }
                Some((p.name, p.triangles))
            }
            (None, Some(lines)) => {
                let t = TriangleSet::parse(&lines.join("\n"))?;
                t.check_language(&language)?;
                Some((cfg.name.clone().unwrap_or_else(|| "custom".into()), t))
            }
            (None, None) => None,
        };
        let priority = cfg
            .priority
            .as_deref()
            .map(|p| PriorityOrder::parse(p, &language))
            .transpose()?;
        Ok(Settings {
            language,
            triangles,
            priority,
            max_size: cli.max_size.or(cfg.max_size).unwrap_or(5),
            max_base: cli.max_base.or(cfg.max_base).unwrap_or(2),
            max_vertices: cli.max_vertices.or(cfg.max_vertices).unwrap_or(30),
            seed: cli.seed.or(cfg.seed).unwrap_or(0),
        })
    }

    fn triangles(&self) -> Result<(&str, &TriangleSet)> {
        self.triangles
            .as_ref()
            .map(|(n, t)| (n.as_str(), t))
            .ok_or_else(|| {
                Error::invalid("no triangle set: use --preset or a config with `triangles`")
            })
    }

    /// The explicit priority, else `R+ > R-` when the language has it.
    fn priority_or_default(&self, flag: Option<&str>) -> Result<PriorityOrder> {
        if let Some(p) = flag {
            return PriorityOrder::parse(p, &self.language);
        }
        match &self.priority {
            Some(p) => Ok(p.clone()),
            None => PriorityOrder::parse("R+ > R-", &self.language)
                .map_err(|_| Error::invalid("no priority given and R+ > R- is not available")),
        }
    }

    fn tower(&self, pr: &PriorityOrder) -> Result<ApproximationTower> {
        let (name, t) = self.triangles()?;
        let mut tower =
            ApproximationTower::new(self.language.clone(), t.clone(), name, pr.clone())?;
        tower.saturate(SaturationBudget::new(self.max_vertices, self.max_base)?)?;
        Ok(tower)
    }
}

/// Cap on the universe of a backend built from a tower of `n` vertices.
fn universe_cap(n: usize) -> usize {
    (n * 64).max(512)
}

/// A structure with its independence relation, serialised for replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Universe {
    Dlo {
        points: Vec<String>,
        max_points: usize,
    },
    Forb {
        dump: String,
        max_vertices: usize,
    },
}

pub trait Replayable: IndependenceBackend {
    fn universe(&self) -> Universe;
}

impl Replayable for DloBackend {
    fn universe(&self) -> Universe {
        Universe::Dlo {
            points: self.points().iter().map(|p| p.to_string()).collect(),
            max_points: self.max_points(),
        }
    }
}

impl Replayable for ForbLimitBackend {
    fn universe(&self) -> Universe {
        Universe::Forb {
            dump: self.tower().dump(),
            max_vertices: self.max_vertices(),
        }
    }
}

impl Universe {
    fn dlo(&self) -> Result<DloBackend> {
        match self {
            Universe::Dlo { points, max_points } => {
                let pts = points
                    .iter()
                    .map(|p| {
                        p.parse::<BigRational>()
                            .map_err(|e| Error::invalid(format!("point `{p}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DloBackend::new(pts, *max_points)
            }
            Universe::Forb { .. } => Err(Error::invalid("not a DLO universe")),
        }
    }

    fn forb(&self) -> Result<ForbLimitBackend> {
        match self {
            Universe::Forb { dump, max_vertices } => Ok(ForbLimitBackend::new(
                ApproximationTower::parse(dump)?,
                *max_vertices,
            )),
            Universe::Dlo { .. } => Err(Error::invalid("not a Forb universe")),
        }
    }
}

/// A claim that `verify` can re-check from scratch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Replay {
    /// `⊗` on this problem completes (or fails, when `completed` is false).
    Amalgam {
        language: String,
        triangles: Vec<String>,
        priority: String,
        left: String,
        base: Vec<VertexId>,
        right: String,
        completed: bool,
    },
    /// An audit counterexample that still violates its axiom.
    Swir {
        universe: Universe,
        counterexample: AuditCounterexample,
    },
    /// A conjugate-product certificate whose every fact holds.
    Product {
        universe: Universe,
        certificate: ConjugateProductCertificate,
    },
}

impl Replay {
    fn amalgam(
        lang: &Language,
        t: &TriangleSet,
        pr: &PriorityOrder,
        p: &AmalgamProblem,
        completed: bool,
    ) -> Self {
        Replay::Amalgam {
            language: lang.to_line(),
            triangles: t.iter().map(|x| x.to_string()).collect(),
            priority: pr.to_string(),
            left: p.left().to_literal(),
            base: p.base().to_vec(),
            right: p.right().to_literal(),
            completed,
        }
    }

    /// Re-checks the claim; `Ok(false)` when it no longer holds.
    pub fn check(&self) -> Result<bool> {
        match self {
            Replay::Amalgam {
                language,
                triangles,
                priority,
                left,
                base,
                right,
                completed,
            } => {
                let lang = Language::parse_line(language)?;
                let t = TriangleSet::parse(&triangles.join("\n"))?;
                let pr = PriorityOrder::parse(priority, &lang)?;
                let p = AmalgamProblem::new(
                    CompleteStructure::parse_literal(left)?,
                    base,
                    CompleteStructure::parse_literal(right)?,
                )?;
                let out = prioritised_amalgam(&p, &t, &pr)?;
                Ok(out.completed().is_some() == *completed)
            }
            Replay::Swir {
                universe,
                counterexample,
            } => Ok(match universe {
                Universe::Dlo { .. } => replay_counterexample(&universe.dlo()?, counterexample),
                Universe::Forb { .. } => replay_counterexample(&universe.forb()?, counterexample),
            }),
            Replay::Product {
                universe,
                certificate,
            } => {
                let facts = match universe {
                    Universe::Dlo { .. } => certificate.check(&universe.dlo()?),
                    Universe::Forb { .. } => certificate.check(&universe.forb()?),
                };
                Ok(facts.iter().all(|f| f.holds))
            }
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Replay::Amalgam {
                completed: true, ..
            } => "amalgam completes",
            Replay::Amalgam {
                completed: false, ..
            } => "amalgam fails",
            Replay::Swir { .. } => "audit counterexample",
            Replay::Product { .. } => "conjugate-product certificate",
        }
    }
}

/// Outcome of a command, emitted as text and as JSON.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub exit_code: i32,
    pub text: Vec<String>,
    pub data: Value,
    pub replays: Vec<Replay>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            exit_code: 0,
            text: Vec::new(),
            data: json!({}),
            replays: Vec::new(),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    fn set(&mut self, key: &str, v: impl Serialize) {
        self.data[key] = serde_json::to_value(v).expect("serialisable");
    }

    /// Raises the exit code; a counterexample outranks a budget failure.
    fn flag(&mut self, code: i32) {
        self.exit_code = match (self.exit_code, code) {
            (1, _) | (_, 1) => 1,
            (a, b) => a.max(b),
        };
    }

    pub fn to_text(&self) -> String {
        let mut s = self.text.join("\n");
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serialisable");
        s.push('\n');
        s
    }
}

/// Runs the command; writing the JSON report is left to the caller.
pub fn run(cli: &Cli) -> Result<Report> {
    let s = Settings::resolve(cli)?;
    match &cli.command {
        Command::Classify { priority } => classify(&s, priority.as_deref()),
        Command::Amalgamate {
            left,
            right,
            base,
            priority,
        } => amalgamate(&s, left, right, base, priority.as_deref()),
        Command::Limit { dump } => limit(&s, dump.as_deref()),
        Command::CheckSwir { backend, bound } => check_swir(&s, *backend, *bound),
        Command::Dynamics {
            pipeline,
            backend,
            runs,
            certificate,
        } => dynamics(&s, *pipeline, *backend, *runs, certificate.as_deref()),
        Command::Verify { certificate } => verify(certificate),
        Command::Cherlin { number } => cherlin(&s, *number),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))
}

/// Every priority order on a proper subset of the oriented symbols.
fn all_orders(lang: &Language) -> Vec<PriorityOrder> {
    let syms = lang.oriented_symbols();
    (1..syms.len())
        .flat_map(|k| syms.iter().copied().permutations(k))
        .filter_map(|sols| PriorityOrder::new(sols, lang).ok())
        .collect()
}

fn class_check(s: &Settings, t: &TriangleSet, pr: &PriorityOrder) -> Result<ClassCheckReport> {
    check_prioritised_class(
        &s.language,
        t,
        pr,
        ClassCheckOptions::new(s.max_size).full_sweep(true),
    )
}

/// A counterexample of the figure's shape isomorphic to it or its mirror.
fn figure_witness(
    s: &Settings,
    t: &TriangleSet,
    pr: &PriorityOrder,
    fp: &AmalgamProblem,
) -> Result<Option<Counterexample>> {
    let shape = fp.shape();
    let size = shape.base + shape.left_new + shape.right_new;
    let opts = ClassCheckOptions::new(size)
        .full_sweep(true)
        .collect_all(true);
    let rep = check_prioritised_class(&s.language, t, pr, opts)?;
    let mirror = fp.mirrored();
    Ok(rep
        .all
        .into_iter()
        .find(|cx| cx.problem.is_isomorphic_to(fp) || cx.problem.is_isomorphic_to(&mirror)))
}

fn class_line(pr: &PriorityOrder, rep: &ClassCheckReport) -> String {
    match &rep.first {
        None => format!(
            "class check under {pr}: passes ({} problems)",
            rep.problems_tested
        ),
        Some(cx) => format!(
            "class check under {pr}: FAILS at {} after {} problems: {}",
            cx.shape(),
            rep.problems_tested,
            cx.failure
        ),
    }
}

fn class_json(pr: &PriorityOrder, rep: &ClassCheckReport) -> Value {
    json!({
        "priority": pr.to_string(),
        "problems_tested": rep.problems_tested,
        "passed": rep.passed(),
        "counterexample": rep.first.as_ref().map(|cx| json!({
            "shape": cx.shape(),
            "left": cx.problem.left().to_literal(),
            "base": cx.problem.base(),
            "right": cx.problem.right().to_literal(),
            "failure": cx.failure.to_string(),
        })),
    })
}

fn classify(s: &Settings, flag: Option<&str>) -> Result<Report> {
    let (name, t) = s.triangles()?;
    let mut r = Report::new("classify");
    r.line(format!(
        "{name}: {} forbidden triangles, max size {}",
        t.len(),
        s.max_size
    ));
    let orders = match flag {
        Some(p) => vec![PriorityOrder::parse(p, &s.language)?],
        None => match &s.priority {
            Some(p) => vec![p.clone()],
            None => all_orders(&s.language),
        },
    };
    let mut rows = Vec::new();
    let mut passing = Vec::new();
    for pr in &orders {
        let c1 = condition1_check(t, pr.solutions());
        let rep = class_check(s, t, pr)?;
        r.line(format!(
            "condition 1 for {{{}}}: {}",
            pr.solutions().iter().join(", "),
            if c1.passed() { "passes" } else { "fails" }
        ));
        r.line(class_line(pr, &rep));
        if let Some(cx) = &rep.first {
            r.replays
                .push(Replay::amalgam(&s.language, t, pr, &cx.problem, false));
        } else {
            passing.push(pr.to_string());
        }
        let mut row = class_json(pr, &rep);
        row["condition1"] = serde_json::to_value(&c1).expect("serialisable");
        rows.push(row);
    }
    r.line(if passing.is_empty() {
        "no priority order makes the class closed under ⊗".to_string()
    } else {
        format!("prioritised semi-free under: {}", passing.join("; "))
    });
    if passing.is_empty() {
        r.flag(1);
    }
    r.set("triangles", name);
    r.set("orders", rows);
    Ok(r)
}

fn cross_lines(p: &AmalgamProblem, m: &CompleteStructure) -> Vec<String> {
    let mut out = Vec::new();
    for a in p.left_new() {
        for c in p.right_new() {
            out.push(format!("r({a},{c}) = {}", m.color(a, c).expect("complete")));
        }
    }
    out
}

fn amalgamate(
    s: &Settings,
    left: &Path,
    right: &Path,
    base: &[VertexId],
    flag: Option<&str>,
) -> Result<Report> {
    let (_, t) = s.triangles()?;
    let pr = s.priority_or_default(flag)?;
    let a = CompleteStructure::parse_literal(&read(left)?)?;
    let c = CompleteStructure::parse_literal(&read(right)?)?;
    a.check_language(&s.language)?;
    c.check_language(&s.language)?;
    let p = AmalgamProblem::new(a, base, c)?;
    let mut r = Report::new("amalgamate");
    r.line(format!("{} under {pr}", p.shape()));
    match prioritised_amalgam(&p, t, &pr)? {
        AmalgamOutcome::Completed(m) => {
            for l in cross_lines(&p, &m) {
                r.line(l);
            }
            r.set("completed", true);
            r.set("amalgam", m.to_literal());
            r.replays
                .push(Replay::amalgam(&s.language, t, &pr, &p, true));
        }
        AmalgamOutcome::Failed(f) => {
            r.line(format!("FAILS: {f}"));
            r.set("completed", false);
            r.set("failure", f.to_string());
            r.replays
                .push(Replay::amalgam(&s.language, t, &pr, &p, false));
            r.flag(1);
        }
    }
    Ok(r)
}

fn limit(s: &Settings, dump: Option<&Path>) -> Result<Report> {
    let pr = s.priority_or_default(None)?;
    let tower = s.tower(&pr)?;
    let mut r = Report::new("limit");
    r.line(format!(
        "{} under {pr}: {} vertices, stage ends {:?}",
        tower.constraint_name(),
        tower.len(),
        tower.stage_ends()
    ));
    let text = tower.dump();
    if let Some(p) = dump {
        write(p, &text)?;
        r.line(format!("dump written to {}", p.display()));
    }
    r.set("vertices", tower.len());
    r.set("stage_ends", tower.stage_ends());
    r.set("dump", text);
    Ok(r)
}

fn audit_report<B: Replayable>(r: &mut Report, b: &B, reports: &[AxiomReport]) {
    let universe = b.universe();
    for a in reports {
        let verdict = if a.as_expected() {
            if a.expected_to_fail {
                "fails as expected"
            } else {
                "passes"
            }
        } else if a.counterexample_count > 0 && a.reading.as_deref() == Some(LITERAL_READING) {
            "fails (literal reading, reported only)"
        } else if a.counterexample_count > 0 {
            r.flag(1);
            "FAILS"
        } else {
            r.flag(2);
            "BUDGET"
        };
        r.line(format!(
            "{:<44} {:>10} configurations {:>8} counterexamples  {verdict}",
            a.label(),
            a.configurations,
            a.counterexample_count
        ));
        if let Some(cx) = a.counterexamples.first() {
            let sets = cx
                .sets
                .iter()
                .map(|(n, v)| format!("{n} = {v:?}"))
                .join(", ");
            r.line(
                format!("    e.g. {sets} {}", cx.note)
                    .trim_end()
                    .to_string(),
            );
            r.replays.push(Replay::Swir {
                universe: universe.clone(),
                counterexample: cx.clone(),
            });
        }
    }
    r.set("axioms", reports);
}

fn check_swir(s: &Settings, kind: BackendKind, bound: Option<usize>) -> Result<Report> {
    let mut r = Report::new("check-swir");
    match kind {
        BackendKind::Dlo => {
            let n = bound.unwrap_or(8);
            let b = DloBackend::grid(n, universe_cap(n));
            let mut bounds = AuditBounds::exhaustive(n);
            bounds.seed = s.seed;
            r.line(format!("DLO on the integers 0..{n}, every subset"));
            let reports = audit_all(&b, &bounds)?;
            audit_report(&mut r, &b, &reports);
        }
        BackendKind::Forb => {
            let pr = s.priority_or_default(None)?;
            let tower = s.tower(&pr)?;
            let n = tower.len();
            let b = ForbLimitBackend::new(tower, universe_cap(n));
            let mut bounds = AuditBounds::small(bound.unwrap_or(n).min(64));
            bounds.seed = s.seed;
            r.line(format!("{}, window {}", b.describe(), bounds.window));
            let reports = audit_all(&b, &bounds)?;
            audit_report(&mut r, &b, &reports);
        }
    }
    Ok(r)
}

/// A verified certificate with the universe it lives in.
type Certified = (ConjugateProductCertificate, Universe);

fn register<B: IndependenceBackend>(
    wb: &mut Workbench<B>,
    name: &str,
    m: PartialAutomorphism,
) -> Result<Word> {
    wb.add_word(name, m, MapKind::Extendable)
}

/// One seeded run of the Y-construction followed by the product solve.
fn product_run<B: Replayable>(b: &B, max_x: usize, seed: u64) -> Result<Certified> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inp = random_pipeline_input(b, max_x, &mut rng)?;
    let mut wb = Workbench::new(b.clone(), DynamicsBudget::default());
    let mut gs = Vec::new();
    for (i, g) in inp.g.iter().enumerate() {
        gs.push(register(&mut wb, &format!("g{}", i + 1), g.clone())?);
    }
    let out = tz32_pipeline(&mut wb, &gs, &inp.x)?;
    let c = &out.conjugated;
    let product = wb.materialise(&c[3].then(&c[2]).then(&c[1]).then(&c[0]));
    let (x0, x4) = random_endpoints(wb.backend_mut(), &out.y, &product, &mut rng)?;
    let cert = tz34_solve(&mut wb, &out.conjugated, &out.y, &x0, &x4)?;
    Ok((cert, wb.backend().universe()))
}

/// Density with random `g` and `u_i` and one extra point in the target.
fn density_run<B: Replayable>(b: &B, seed: u64) -> Result<Certified> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = b.len() as Elem;
    if n < 4 {
        return Err(Error::invalid("density needs at least four points"));
    }
    let g0 = random_partial_iso(b, &[0, 1, 2], &mut rng)
        .ok_or_else(|| Error::logical("no partial isomorphism"))?;
    let mut us = Vec::new();
    for i in 0..4 {
        let u = random_partial_iso(b, &[(i * 3 + 1) % n], &mut rng)
            .ok_or_else(|| Error::logical("no partial isomorphism"))?;
        us.push(u);
    }
    let mut wb = Workbench::new(b.clone(), DynamicsBudget::default());
    let g = register(&mut wb, "g", g0)?;
    let setup = density_setup(&mut wb, &g, &us)?;
    let outside: Vec<Elem> = (0..wb.backend().len() as Elem)
        .filter(|e| setup.y.iter().all(|y| !y.contains(e)))
        .collect();
    let x = match outside.first() {
        Some(&x) => x,
        None => {
            let p = wb
                .backend()
                .one_types(&setup.y[0])
                .into_iter()
                .next()
                .ok_or_else(|| Error::logical("no non-algebraic 1-type over Y_0"))?;
            wb.backend_mut().realize(&p, Side::Left)?[0]
        }
    };
    let q = wb
        .backend()
        .transport(&wb.tp(&[x], &setup.y[0]), &|e| setup.w.get(e))
        .ok_or_else(|| Error::logical("w is undefined on Y_0"))?;
    let y = wb.backend_mut().realize(&q, Side::Left)?;
    let mut target = setup.w.clone();
    target.insert(x, y[0])?;
    let wit = density_witness(&mut wb, &setup, &target)?;
    let cert = wit
        .certificate
        .ok_or_else(|| Error::logical("an extra point needs a product solve"))?;
    Ok((cert, wb.backend().universe()))
}

fn seeded_runs<B: Replayable>(
    r: &mut Report,
    b: &B,
    s: &Settings,
    runs: usize,
    run: &dyn Fn(&B, u64) -> Result<Certified>,
) -> Result<()> {
    let mut rows = Vec::new();
    let (mut ok, mut budget) = (0usize, 0usize);
    for seed in s.seed..s.seed + runs as u64 {
        match run(b, seed) {
            Ok((certificate, universe)) => {
                ok += 1;
                let sizes: Vec<usize> = certificate.y.iter().map(Vec::len).collect();
                r.line(format!(
                    "seed {seed}: verified, x0 = {:?}, x4 = {:?}, |Y_i| = {sizes:?}",
                    certificate.x0, certificate.x4
                ));
                rows.push(json!({"seed": seed, "status": "verified"}));
                r.replays.push(Replay::Product {
                    universe,
                    certificate,
                });
            }
            Err(e) if e.is_budget() => {
                budget += 1;
                r.line(format!("seed {seed}: budget: {e}"));
                rows.push(json!({"seed": seed, "status": "budget", "message": e.to_string()}));
                r.flag(2);
            }
            Err(e @ Error::Logical(_)) => {
                r.line(format!("seed {seed}: FAILS: {e}"));
                rows.push(json!({"seed": seed, "status": "logical", "message": e.to_string()}));
                r.flag(1);
            }
            Err(e) => return Err(e),
        }
    }
    r.line(format!(
        "{ok} of {runs} runs verified, {budget} out of budget"
    ));
    r.set("runs", rows);
    Ok(())
}

fn colourrange_stage(
    r: &mut Report,
    wb: &mut Workbench<ForbLimitBackend>,
    seed: u64,
) -> Result<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = random_partial_iso(wb.backend(), &[0, 1], &mut rng)
        .ok_or_else(|| Error::logical("no partial isomorphism"))?;
    let g = register(wb, "g", g0)?;
    let schedule = default_schedule(wb.backend(), &[0, 1]);
    let (h, rep) = colourrange_build(wb, &g, &schedule, 4)?;
    r.text.extend(rep.to_string().lines().map(str::to_string));
    r.line(format!(
        "colour range {}",
        if rep.verified() { "verified" } else { "FAILS" }
    ));
    if !rep.verified() {
        r.flag(1);
    }
    r.set("colourrange", &rep);
    Ok(Word::commutator(&h, &g))
}

fn mover_stage<B: IndependenceBackend>(
    r: &mut Report,
    wb: &Workbench<B>,
    g: &Word,
    schedule: &crate::dynamics::Schedule<B::Type>,
) -> Result<()> {
    let mut rows = Vec::new();
    for variant in [MoverVariant::BothSides, MoverVariant::Mixed] {
        let mut w = wb.clone();
        let (_, rep) = commutator_mover_build(&mut w, g, schedule, variant)?;
        r.text.extend(rep.to_string().lines().map(str::to_string));
        r.line(format!(
            "{variant:?}: {}",
            if rep.verified() {
                "all four sides verified"
            } else {
                "FAILS"
            }
        ));
        if !rep.verified() {
            r.flag(1);
        }
        rows.push(rep);
    }
    r.set("mover", rows);
    Ok(())
}

fn forb_backend(s: &Settings) -> Result<ForbLimitBackend> {
    let pr = s.priority_or_default(None)?;
    let tower = s.tower(&pr)?;
    let n = tower.len();
    Ok(ForbLimitBackend::new(tower, universe_cap(n)))
}

fn dynamics(
    s: &Settings,
    pipeline: Pipeline,
    kind: BackendKind,
    runs: usize,
    out: Option<&Path>,
) -> Result<Report> {
    let mut r = Report::new("dynamics");
    let dlo = || DloBackend::grid(8, universe_cap(8));
    match (pipeline, kind) {
        (Pipeline::Product, BackendKind::Dlo) => {
            seeded_runs(&mut r, &dlo(), s, runs, &|b, seed| {
                product_run(b, s.max_base, seed)
            })?
        }
        (Pipeline::Product, BackendKind::Forb) => {
            let b = forb_backend(s)?;
            seeded_runs(&mut r, &b, s, runs, &|b, seed| {
                product_run(b, s.max_base, seed)
            })?
        }
        (Pipeline::Density, BackendKind::Dlo) => {
            seeded_runs(&mut r, &dlo(), s, runs, &density_run)?
        }
        (Pipeline::Density, BackendKind::Forb) => {
            let b = forb_backend(s)?;
            seeded_runs(&mut r, &b, s, runs, &density_run)?
        }
        (Pipeline::Colourrange, BackendKind::Dlo) => {
            return Err(Error::invalid("colour range needs a Forb backend"));
        }
        (Pipeline::Colourrange, BackendKind::Forb) => {
            let mut wb = Workbench::new(forb_backend(s)?, DynamicsBudget::default());
            colourrange_stage(&mut r, &mut wb, s.seed)?;
        }
        (Pipeline::Mover, BackendKind::Forb) => {
            let mut wb = Workbench::new(forb_backend(s)?, DynamicsBudget::default());
            let hg = colourrange_stage(&mut r, &mut wb, s.seed)?;
            let schedule = default_schedule(wb.backend(), &[]);
            mover_stage(&mut r, &wb, &hg, &schedule)?;
        }
        (Pipeline::Mover, BackendKind::Dlo) => {
            let mut wb = Workbench::new(dlo(), DynamicsBudget::default());
            let shift = PartialAutomorphism::from_pairs((0..7).map(|i| (i, i + 1)))?;
            let g = register(&mut wb, "g", shift)?;
            let schedule = default_schedule(wb.backend(), &[0, 1]);
            mover_stage(&mut r, &wb, &g, &schedule)?;
        }
    }
    if let (Some(p), Some(first)) = (out, r.replays.first()) {
        write(
            p,
            &serde_json::to_string_pretty(first).expect("serialisable"),
        )?;
        r.line(format!("replay record written to {}", p.display()));
    }
    Ok(r)
}

fn verify(path: &Path) -> Result<Report> {
    let value: Value =
        serde_json::from_str(&read(path)?).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let records: Vec<Replay> = match value.get("replays") {
        Some(list) => serde_json::from_value(list.clone()),
        None => serde_json::from_value(value).map(|r| vec![r]),
    }
    .map_err(|e| Error::invalid(format!("not a replay record or report: {e}")))?;
    let mut r = Report::new("verify");
    let mut rows = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let holds = rec.check()?;
        r.line(format!(
            "record {i}: {}: {}",
            rec.label(),
            if holds {
                "reproduced"
            } else {
                "NOT reproduced"
            }
        ));
        if !holds {
            r.flag(1);
        }
        rows.push(json!({"record": i, "kind": rec.label(), "reproduced": holds}));
    }
    r.line(format!("{} records checked", records.len()));
    r.set("records", rows);
    Ok(r)
}

fn sym(text: &str) -> OrientedSymbol {
    text.parse().expect("built-in symbol")
}

fn cherlin(s: &Settings, number: u32) -> Result<Report> {
    let p = cherlin_preset(number)?;
    let (lang, t) = (&p.language, &p.triangles);
    let mut r = Report::new("cherlin");
    r.line(format!("{}: {} forbidden triangles", p.name, t.len()));
    for pat in t.iter() {
        r.line(format!("  forbid {pat}"));
    }
    let sols = [sym("R+"), sym("R-")];
    let c1 = condition1_check(t, &sols);
    r.line(format!(
        "condition 1 for {{R+, R-}}: {}",
        if c1.passed() { "passes" } else { "fails" }
    ));
    r.set("condition1", &c1);
    let s = Settings {
        language: lang.clone(),
        triangles: Some((p.name.clone(), t.clone())),
        ..s.clone()
    };
    if p.expect_prioritised {
        let pr = PriorityOrder::new(sols.to_vec(), lang)?;
        let rep = class_check(&s, t, &pr)?;
        r.line(class_line(&pr, &rep));
        r.set("class_check", class_json(&pr, &rep));
        if !c1.passed() || !rep.passed() {
            r.flag(1);
        }
        if let Some(cx) = &rep.first {
            r.replays
                .push(Replay::amalgam(lang, t, &pr, &cx.problem, false));
        }
        if number == 8 {
            let wp = worked_problem();
            let out = prioritised_amalgam(&wp, t, &pr)?;
            let m = out
                .completed()
                .ok_or_else(|| Error::logical("the worked problem must complete"))?;
            let (c1, c2) = (
                m.color(1, 3).expect("complete"),
                m.color(2, 3).expect("complete"),
            );
            r.line(format!(
                "worked amalgam (b = 0, a1 = 1, a2 = 2, c = 3): r(a1,c) = {c1}, r(a2,c) = {c2}"
            ));
            if (c1, c2) != (sym("R-"), sym("R+")) {
                r.flag(1);
            }
            r.set(
                "worked",
                json!({"r_a1_c": c1.to_string(), "r_a2_c": c2.to_string()}),
            );
            r.replays.push(Replay::amalgam(lang, t, &pr, &wp, true));
        }
    } else {
        let mut rows = Vec::new();
        for (text, fp) in failure_problems() {
            let pr = PriorityOrder::parse(text, lang)?;
            let out = prioritised_amalgam(&fp, t, &pr)?;
            match out.failure() {
                Some(f) => r.line(format!("figure under {pr}: fails as expected: {f}")),
                None => {
                    r.line(format!("figure under {pr}: UNEXPECTEDLY completes"));
                    r.flag(1);
                }
            }
            r.replays.push(Replay::amalgam(
                lang,
                t,
                &pr,
                &fp,
                out.completed().is_some(),
            ));
            let rep = class_check(&s, t, &pr)?;
            r.line(class_line(&pr, &rep));
            if rep.passed() {
                r.flag(1);
            }
            let witness = figure_witness(&s, t, &pr, &fp)?;
            match &witness {
                Some(cx) => r.line(format!(
                    "  counterexample isomorphic to the figure configuration: {}",
                    cx.failure
                )),
                None => {
                    r.line("  no counterexample isomorphic to the figure configuration");
                    r.flag(1);
                }
            }
            let matches = witness.is_some();
            if let Some(cx) = witness {
                r.replays
                    .push(Replay::amalgam(lang, t, &pr, &cx.problem, false));
            }
            if let Some(cx) = &rep.first {
                r.replays
                    .push(Replay::amalgam(lang, t, &pr, &cx.problem, false));
            }
            let mut row = class_json(&pr, &rep);
            row["figure_fails"] = json!(out.failure().is_some());
            row["figure_witness_found"] = json!(matches);
            rows.push(row);
        }
        r.set("failures", rows);
    }
    Ok(r)
}
