//! One line per acceptance criterion: verdict, measurement, runtime and limit.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use fraisse_core::amalgamation::{
    check_prioritised_class, cherlin_preset, condition1_check, failure_problems, free_amalgam,
    prioritised_amalgam, worked_problem, AmalgamProblem, ClassCheckOptions, PriorityOrder,
};
use fraisse_core::dynamics::{
    colourrange_build, commutator_mover_build, default_schedule, random_partial_iso,
    DynamicsBudget, MapKind, MoverVariant, Word, Workbench,
};
use fraisse_core::fraisse::{ApproximationTower, SaturationBudget};
use fraisse_core::structure::{
    enumerate_forb, Language, OrientedSymbol, TrianglePattern, TriangleSet,
};
use fraisse_core::swir::{
    audit_all, audit_axiom, replay_counterexample, AuditBounds, Axiom, AxiomReport, DloBackend,
    ForbLimitBackend, IndependenceBackend, Variant, LITERAL_READING,
};
use fraisse_core::{Error, Result};
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sym(s: &str) -> OrientedSymbol {
    s.parse().unwrap()
}

fn r_order(lang: &Language) -> PriorityOrder {
    PriorityOrder::new(vec![sym("R+"), sym("R-")], lang).unwrap()
}

fn tower(number: u32, vertices: usize) -> ApproximationTower {
    let p = cherlin_preset(number).unwrap();
    let pr = r_order(&p.language);
    let mut t = ApproximationTower::new(p.language, p.triangles, p.name, pr).unwrap();
    t.saturate(SaturationBudget::new(vertices, 2).unwrap())
        .unwrap();
    t
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn criterion_1() -> Result<Outcome> {
    let p = cherlin_preset(8)?;
    let out = prioritised_amalgam(&worked_problem(), &p.triangles, &r_order(&p.language))?;
    let Some(m) = out.completed() else {
        return outcome(false, "worked problem did not complete");
    };
    let (c1, c2) = (m.try_color(1, 3)?, m.try_color(2, 3)?);
    outcome(
        c1 == sym("R-") && c2 == sym("R+"),
        format!("#8 worked amalgam: r(a1,c) = {c1}, r(a2,c) = {c2}"),
    )
}

fn criterion_2(number: u32) -> Result<Outcome> {
    let p = cherlin_preset(number)?;
    let c1 = condition1_check(&p.triangles, &[sym("R+"), sym("R-")]);
    let opts = ClassCheckOptions::new(6).full_sweep(true);
    let rep = check_prioritised_class(&p.language, &p.triangles, &r_order(&p.language), opts)?;
    outcome(
        c1.passed() && rep.passed(),
        format!(
            "#{number}: condition 1 {}, class check R+ > R- at size 6 {} ({} problems)",
            if c1.passed() { "passes" } else { "fails" },
            if rep.passed() { "passes" } else { "fails" },
            rep.problems_tested
        ),
    )
}

fn criterion_3(number: u32) -> Result<Outcome> {
    let p = cherlin_preset(number)?;
    let mut notes = Vec::new();
    let mut pass = true;
    for (order, figure) in failure_problems() {
        let pr = PriorityOrder::parse(order, &p.language)?;
        let opts = ClassCheckOptions::new(4).full_sweep(true).collect_all(true);
        let rep = check_prioritised_class(&p.language, &p.triangles, &pr, opts)?;
        let mirror = figure.mirrored();
        let hit = rep.all.iter().find(|cx| {
            cx.problem.is_isomorphic_to(&figure) || cx.problem.is_isomorphic_to(&mirror)
        });
        pass &= !rep.passed() && hit.is_some();
        notes.push(format!(
            "{pr}: {} counterexamples, figure witness {}",
            rep.all.len(),
            hit.map_or("missing".to_string(), |cx| format!("at {}", cx.shape()))
        ));
    }
    outcome(pass, format!("#{number}: {}", notes.join("; ")))
}

fn sound(reports: &[AxiomReport], axiom: Axiom) -> bool {
    reports
        .iter()
        .filter(|r| r.axiom == axiom && r.reading.as_deref() != Some(LITERAL_READING))
        .all(|r| r.passed() && r.configurations > 0)
}

fn criterion_4() -> Result<Outcome> {
    let t = tower(8, 30);
    let n = t.len();
    let b = ForbLimitBackend::new(t, 1500);
    let bounds = AuditBounds::small(n);
    let axioms = [
        Axiom::Monotonicity,
        Axiom::Transitivity,
        Axiom::Stationarity,
        Axiom::Existence,
    ];
    let mut reports = Vec::new();
    for axiom in axioms {
        for v in [Variant::Left, Variant::Right] {
            reports.extend(audit_axiom(&b, axiom, v, &bounds)?);
        }
    }
    let failing: Vec<String> = axioms
        .iter()
        .filter(|&&a| !sound(&reports, a))
        .map(|a| format!("{a:?}"))
        .collect();
    let existence: u64 = reports
        .iter()
        .filter(|r| r.axiom == Axiom::Existence)
        .map(|r| r.configurations)
        .sum();
    outcome(
        failing.is_empty() && n >= 30,
        format!(
            "#8 tower on {n} vertices: monotonicity, transitivity, stationarity clean; {existence} existence checks; failing {failing:?}"
        ),
    )
}

fn criterion_5() -> Result<Outcome> {
    let b = DloBackend::grid(8, 512);
    let reports = audit_all(&b, &AuditBounds::exhaustive(8))?;
    let five = [
        Axiom::Invariance,
        Axiom::Monotonicity,
        Axiom::Transitivity,
        Axiom::Existence,
        Axiom::Stationarity,
    ];
    let clean = five.iter().all(|&a| sound(&reports, a));
    let sym_rep = reports
        .iter()
        .find(|r| r.axiom == Axiom::Symmetry)
        .ok_or_else(|| Error::logical("no symmetry"))?;
    let emitted = !sym_rep.counterexamples.is_empty()
        && sym_rep
            .counterexamples
            .iter()
            .all(|cx| replay_counterexample(&b, cx));
    outcome(
        clean && sym_rep.counterexample_count > 0 && emitted,
        format!(
            "DLO 8-point grid: five axioms {}, symmetry fails on {} configurations with replayable counterexamples",
            if clean { "pass" } else { "FAIL" },
            sym_rep.counterexample_count
        ),
    )
}

/// `R±` with one symmetric `N`; forbidden triangles never use `N`.
fn free_setting(rng: &mut ChaCha8Rng) -> (Language, TriangleSet) {
    let lang = Language::new([("R", true), ("N", false)]).unwrap();
    let rs = [sym("R+"), sym("R-")];
    let mut all = BTreeSet::new();
    for a in rs {
        for b in rs {
            for c in rs {
                all.insert(TrianglePattern::new(a, b, c));
            }
        }
    }
    let all: Vec<_> = all.into_iter().collect();
    let k = rng.gen_range(0..=2);
    (lang, TriangleSet::new(all.choose_multiple(rng, k).copied()))
}

fn criterion_6() -> Result<Outcome> {
    let n_sym = sym("N");
    let mut agree = 0;
    let mut tested = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lang, t) = free_setting(&mut rng);
        let pr = PriorityOrder::new(vec![n_sym], &lang)?;
        let bases = enumerate_forb(&lang, &t, rng.gen_range(0..=2))?;
        let Some(b) = bases.choose(&mut rng) else {
            continue;
        };
        let (p, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let Some(problem): Option<AmalgamProblem> =
            common::random_problem(b, p, q, &lang, &t, &mut rng)
        else {
            continue;
        };
        tested += 1;
        let out = prioritised_amalgam(&problem, &t, &pr)?;
        if out.completed() == Some(&free_amalgam(&problem, n_sym)) {
            agree += 1;
        }
    }
    let mut symmetric = true;
    let mut configurations = 0;
    for seed in 0..3u64 {
        let (lang, t) = free_setting(&mut ChaCha8Rng::seed_from_u64(seed));
        let pr = PriorityOrder::new(vec![n_sym], &lang)?;
        let mut tw = ApproximationTower::new(lang, t, "free", pr)?;
        tw.saturate(SaturationBudget::new(20, 2)?)?;
        let n = tw.len();
        let b = ForbLimitBackend::new(tw, 512);
        let r = audit_axiom(&b, Axiom::Symmetry, Variant::Left, &AuditBounds::small(n))?;
        symmetric &= r.iter().all(|r| r.counterexample_count == 0) && b.expects_symmetry();
        configurations += r.iter().map(|r| r.configurations).sum::<u64>();
    }
    outcome(
        tested >= 900 && agree == tested && symmetric,
        format!(
            "singleton {{N}}: prioritised = free on {agree}/{tested} problems; ind symmetric on {configurations} configurations"
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let b = ForbLimitBackend::new(tower(8, 30), 1500);
    let (mut verified, mut budget, mut logical) = (0, 0, Vec::new());
    for seed in 0..100u64 {
        match common::pipeline_certificate(&b, 2, seed) {
            Ok((cert, grown)) => {
                if cert.check(&grown).iter().all(|f| f.holds) {
                    verified += 1;
                } else {
                    logical.push(seed);
                }
            }
            Err(e) if e.is_budget() => budget += 1,
            Err(_) => logical.push(seed),
        }
    }
    outcome(
        verified >= 95 && logical.is_empty(),
        format!("#8 product certificates: {verified}/100 re-verified, {budget} budget, logical failures {logical:?}"),
    )
}

fn criterion_8() -> Result<Outcome> {
    let mut wb = Workbench::new(
        ForbLimitBackend::new(tower(8, 30), 1500),
        DynamicsBudget::default(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let g0 = random_partial_iso(wb.backend(), &[0, 1], &mut rng)
        .ok_or_else(|| Error::logical("no map"))?;
    let g = wb.add_word("g", g0, MapKind::Extendable)?;
    let schedule = default_schedule(wb.backend(), &[0, 1]);
    let (h, colour) = colourrange_build(&mut wb, &g, &schedule, 4)?;
    let hg = Word::commutator(&h, &g);
    let movers = default_schedule(wb.backend(), &[]);
    let mut sides = Vec::new();
    for variant in [MoverVariant::BothSides, MoverVariant::Mixed] {
        let mut w = wb.clone();
        let (_, rep) = commutator_mover_build(&mut w, &hg, &movers, variant)?;
        sides.push((variant, rep.verified()));
    }
    outcome(
        colour.verified() && sides.iter().all(|s| s.1),
        format!(
            "#8: colour range over {} types in {{R+, R-}} {}; mover on [h,g] {sides:?}",
            colour.scheduled,
            if colour.verified() {
                "verified"
            } else {
                "FAILS"
            }
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let run = |cases: u32| {
        TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let mut failed = Vec::new();
    let mut note = |name: &str, r: std::result::Result<(), String>| {
        if let Err(e) = r {
            failed.push(format!("{name}: {e}"));
        }
    };
    note(
        "coherence",
        run(256)
            .run(&common::arb_structure(6), |x| {
                common::coherence_round_trip(&x)
            })
            .map_err(|e| e.to_string()),
    );
    note(
        "canonical soundness",
        run(256)
            .run(
                &(common::arb_structure(5), proptest::prelude::any::<u64>()),
                |(x, seed)| common::canonical_form_sound(&x, seed),
            )
            .map_err(|e| e.to_string()),
    );
    note(
        "canonical completeness",
        run(512)
            .run(
                &(common::arb_structure(4), common::arb_structure(4)),
                |(a, b)| common::canonical_form_complete(&a, &b),
            )
            .map_err(|e| e.to_string()),
    );
    note(
        "hereditariness",
        if [8, 9, 10, 11, 12]
            .iter()
            .all(|&n| common::enumeration_hereditary(n, 5))
        {
            Ok(())
        } else {
            Err("an induced substructure is missing".into())
        },
    );
    note(
        "order independence",
        run(512)
            .run(&common::arb_amalgam_case(), common::order_independent)
            .map_err(|e| e.to_string()),
    );
    note(
        "replay determinism",
        run(24)
            .run(&(0u64..1000), common::replay_deterministic)
            .map_err(|e| e.to_string()),
    );
    outcome(
        failed.is_empty(),
        format!("six property suites, failures {failed:?}"),
    )
}

fn main() {
    type Check = Box<dyn Fn() -> Result<Outcome>>;
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("1", 1, Box::new(criterion_1)),
        ("2 (#8)", 300, Box::new(|| criterion_2(8))),
        ("2 (#9)", 300, Box::new(|| criterion_2(9))),
        ("2 (#10)", 300, Box::new(|| criterion_2(10))),
        ("3 (#11)", 60, Box::new(|| criterion_3(11))),
        ("3 (#12)", 60, Box::new(|| criterion_3(12))),
        ("4", 600, Box::new(criterion_4)),
        ("5", 60, Box::new(criterion_5)),
        ("6", 60, Box::new(criterion_6)),
        ("7", 900, Box::new(criterion_7)),
        ("8", 900, Box::new(criterion_8)),
        ("9", 300, Box::new(criterion_9)),
    ];
    let mut failures = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && took <= Duration::from_secs(limit), o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {name:<8} {}  {detail}  [{:.2} s, limit {limit} s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("{failures} criteria failed");
    if failures > 0 {
        std::process::exit(1);
    }
}
