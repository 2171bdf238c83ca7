//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cohere::checker::{certify, check_program, RuleId};
use cohere::decl::initial_store;
use cohere::dsl::{parse, parse_raw, print_program};
use cohere::modes::{run_program, translate_mode, translate_program, AccessMode, ModeKind, Origin};
use cohere::overlap::{rewrite_program, OverlapRegistry, SegmentTree, SortedList};
use cohere::semantics::{run, step, Configuration, Outcome, Schedule, StepOutcome};
use cohere::syntax::{name, Condition, Site, Statement, Target, VarKey};
use cohere::{EffectKind, Pair};
use cohere_testkit::naive::{from_store, pair_chars};
use cohere_testkit::{
    all_schedules_run, enumerate_raw_programs, gen_well_declared, raw_layout, run_naive,
    CorpusSettings, NaiveOutcome,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    Deviation,
}

struct Report {
    failed: bool,
}

impl Report {
    fn line(&mut self, n: &str, title: &str, status: Status, detail: String) {
        let label = match status {
            Status::Pass => "PASS",
            Status::Fail => {
                self.failed = true;
                "FAIL"
            }
            Status::Deviation => "DEVIATION",
        };
        println!("criterion {n:>2} [{label}] {title}: {detail}");
    }

    fn check(&mut self, n: &str, title: &str, ok: bool, detail: String) {
        self.line(
            n,
            title,
            if ok { Status::Pass } else { Status::Fail },
            detail,
        );
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn safety(r: &mut Report) {
    let start = Instant::now();
    let init = initial_store(&raw_layout());
    let (mut programs, mut unsafe_stores, mut states) = (0usize, 0usize, 0usize);
    for p in enumerate_raw_programs(4) {
        programs += 1;
        let mut config = Configuration::new(p, init.clone());
        loop {
            states += 1;
            if config.store.is_unsafe() {
                unsafe_stores += 1;
            }
            match step(config, &mut Schedule::empty()).unwrap() {
                StepOutcome::Stepped(next) => config = next,
                StepOutcome::Done(s)
                | StepOutcome::Stuck {
                    config: Configuration { store: s, .. },
                    ..
                } => {
                    if s.is_unsafe() {
                        unsafe_stores += 1;
                    }
                    break;
                }
            }
        }
    }
    let t = start.elapsed();
    r.check(
        "1",
        "safety, exhaustive raw programs of length <= 4",
        programs >= 11_110 && unsafe_stores == 0 && t < Duration::from_secs(5),
        format!(
            "{programs} programs, {states} reachable states, {unsafe_stores} with (I,I), {}",
            secs(t)
        ),
    );
}

fn stuck_example(r: &mut Report) {
    let p = parse_raw("w x; gr x;").unwrap();
    let stuck_run = run(
        p.body,
        initial_store(&p.layout),
        100,
        &mut Schedule::empty(),
    )
    .unwrap();
    let stuck_ok = match &stuck_run.outcome {
        Outcome::Stuck(s) => {
            s.key == VarKey::scalar("x")
                && s.kind == EffectKind::Read
                && s.site == Site::Remote
                && s.actual == Pair::VI
                && s.expected.to_string() == "(X,V)"
                && stuck_run.steps == 1
                && stuck_run.remaining.to_string() == "gr x;"
        }
        _ => false,
    };
    let p = parse_raw("w x; push x; gr x;").unwrap();
    let done = run(
        p.body,
        initial_store(&p.layout),
        100,
        &mut Schedule::empty(),
    )
    .unwrap();
    let done_ok =
        done.outcome == Outcome::Done && done.store.get(&VarKey::scalar("x")) == Some(Pair::VV);
    r.check(
        "2",
        "stuck example",
        stuck_ok && done_ok,
        format!(
            "`w x; gr x;` -> {} ({}); `w x; push x; gr x;` -> {} with x = {}",
            stuck_run.outcome.label(),
            match &stuck_run.outcome {
                Outcome::Stuck(s) => s.to_string(),
                _ => "-".into(),
            },
            done.outcome.label(),
            done.store
                .get(&VarKey::scalar("x"))
                .map_or("-".into(), |p| p.to_string()),
        ),
    );
}

fn translation(r: &mut Report) {
    let layout = parse("scalar x").unwrap().layout;
    let x = || Target::Scalar(name("x"));
    let xa = || Target::Abstract(name("x"));
    let fetch = |c: Condition, k: EffectKind| {
        Statement::If(
            c,
            Box::new(Statement::Noop),
            Box::new(Statement::Seq(
                Box::new(Statement::local(k, x())),
                Box::new(Statement::local(k, xa())),
            )),
        )
    };
    let local_fetch = fetch(Condition::IsValid(name("x")), EffectKind::Pull);
    let remote_fetch = fetch(Condition::RemIsValid(name("x")), EffectKind::Push);
    let golden = [
        (
            ModeKind::R,
            Site::Local,
            local_fetch.clone(),
            "if (valid(x)) {} else { pull x; pull x^; }",
        ),
        (
            ModeKind::R,
            Site::Remote,
            remote_fetch.clone(),
            "if (gvalid(x)) {} else { push x; push x^; }",
        ),
        (
            ModeKind::RW,
            Site::Local,
            Statement::Seq(
                Box::new(local_fetch),
                Box::new(Statement::local(EffectKind::Write, xa())),
            ),
            "if (valid(x)) {} else { pull x; pull x^; } w x^;",
        ),
        (
            ModeKind::RW,
            Site::Remote,
            Statement::Seq(
                Box::new(remote_fetch),
                Box::new(Statement::remote(EffectKind::Write, xa())),
            ),
            "if (gvalid(x)) {} else { push x; push x^; } gw x^;",
        ),
        (
            ModeKind::W,
            Site::Local,
            Statement::local(EffectKind::Write, xa()),
            "w x^;",
        ),
        (
            ModeKind::W,
            Site::Remote,
            Statement::remote(EffectKind::Write, xa()),
            "gw x^;",
        ),
    ];
    let mut mismatches = Vec::new();
    for (kind, site, ast, text) in &golden {
        let mode = AccessMode::new(*kind, *site, name("x"));
        let got = translate_mode(&mode, &layout).unwrap();
        if &got != ast || got.to_string() != *text {
            mismatches.push(format!("{}: got `{got}`", mode.keyword()));
        }
    }
    let p = parse("scalar x  RW(x){ w x; }  GR(x){ gr x; }").unwrap();
    let whole = translate_program(&p).unwrap().to_string();
    let whole_ok = whole
        == "if (valid(x)) {} else { pull x; pull x^; } w x^; w x; \
            if (gvalid(x)) {} else { push x; push x^; } gr x;";
    let res = run_program(&p, 10_000, &mut Schedule::empty(), false).unwrap();
    let xs = res.store.get(&VarKey::scalar("x"));
    let xh = res.store.get(&VarKey::abstract_("x"));
    let run_ok = res.outcome == Outcome::Done && xs == Some(Pair::VV) && xh == Some(Pair::VV);
    r.check(
        "3",
        "translation fidelity",
        mismatches.is_empty() && whole_ok && run_ok,
        format!(
            "6/6 clause goldens{}; two-block translation {}; two-block example -> {}, x = {}, x^ = {}",
            if mismatches.is_empty() { String::new() } else { format!(" MISMATCH {mismatches:?}") },
            if whole_ok { "matches".to_string() } else { format!("MISMATCH `{whole}`") },
            res.outcome.label(),
            xs.map_or("-".into(), |p| p.to_string()),
            xh.map_or("-".into(), |p| p.to_string()),
        ),
    );
}

fn settings() -> CorpusSettings {
    let path = std::env::var_os("COHERE_CORPUS")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus.toml"));
    CorpusSettings::load(&path).unwrap_or_else(|e| panic!("corpus settings: {e}"))
}

#[derive(Default)]
struct CorpusStats {
    programs: usize,
    runs: usize,
    uncertified: usize,
    abstraction_failures: usize,
    stuck: usize,
    not_done: usize,
    truncated: usize,
    with_overlaps: usize,
    naive_checked: usize,
    naive_disagreements: usize,
    first_problem: Option<String>,
}

fn naive_agrees(
    outcome: &Outcome,
    store: &cohere::Store,
    naive: &cohere_testkit::NaiveRun,
) -> bool {
    let outcome_ok = match (outcome, &naive.outcome) {
        (Outcome::Done, NaiveOutcome::Done) | (Outcome::FuelExhausted, NaiveOutcome::OutOfFuel) => {
            true
        }
        (Outcome::Stuck(s), NaiveOutcome::Stuck { key, actual }) => {
            s.key.to_string() == *key && pair_chars(s.actual) == *actual
        }
        _ => false,
    };
    outcome_ok && from_store(store) == naive.store
}

fn corpus(s: &CorpusSettings) -> (CorpusStats, Duration) {
    let start = Instant::now();
    let mut st = CorpusStats::default();
    for (seed, limits) in s.corpus() {
        let p = gen_well_declared(seed, limits);
        st.programs += 1;
        let registry: OverlapRegistry = OverlapRegistry::from_layout(&p.layout);
        if !check_program(&p, &registry).is_empty() {
            st.uncertified += 1;
        }
        if !cohere_testkit::overlapping_pairs(&p.layout).is_empty() {
            st.with_overlaps += 1;
        }
        let report = all_schedules_run(&p, s.k, s.fuel);
        st.truncated += report.truncated as usize;
        let code = translate_program(&p).unwrap();
        let init = from_store(&initial_store(&p.layout));
        for run in &report.runs {
            st.runs += 1;
            let mut problem = None;
            if !run.abstraction_held {
                st.abstraction_failures += 1;
                problem = Some("abstraction");
            }
            match run.outcome {
                Outcome::Done => {}
                Outcome::Stuck(_) => {
                    st.stuck += 1;
                    st.not_done += 1;
                    problem = Some("stuck");
                }
                Outcome::FuelExhausted => {
                    st.not_done += 1;
                    problem = Some("fuel");
                }
            }
            let naive = run_naive(&code, init.clone(), s.fuel, &run.schedule);
            st.naive_checked += 1;
            if !naive_agrees(&run.outcome, &run.store, &naive) {
                st.naive_disagreements += 1;
                problem = Some("naive disagreement");
            }
            if let (Some(what), None) = (problem, &st.first_problem) {
                st.first_problem = Some(format!(
                    "seed {seed} schedule {:?}: {what}\n{}",
                    run.schedule,
                    print_program(&p)
                ));
            }
        }
    }
    (st, start.elapsed())
}

fn overlap_rewrite(r: &mut Report) {
    let src = "\
buffer v[10]
view pv1 = v[2:5]
view pv2 = v[4:8]
view pv3 = v[7:9]
view pv4 = v[2:3]

R(pv1), R(pv2) {
    r pv1[2];
    r pv2[8];
}

GW(pv3) {
    gw pv3[7];
    gw pv3[8];
    gw pv3[9];
}

RW(pv4), R(pv2) {
    r pv4[3];
    w pv4[2];
    r pv2[5];
}
";
    let golden = src
        .replace("GW(pv3) {", "GW(pv3), GRW(pv2) /*shadow*/ {")
        .replace("RW(pv4), R(pv2) {", "RW(pv4), R(pv2), RW(pv1) /*shadow*/ {");
    let p = parse(src).unwrap();
    let registry: OverlapRegistry = OverlapRegistry::from_layout(&p.layout);
    let rewritten = rewrite_program(&p, &registry).unwrap();
    let out = print_program(&rewritten);
    let added = |b: usize| -> Vec<String> {
        rewritten.blocks[b].modes[p.blocks[b].modes.len()..]
            .iter()
            .map(|m| m.to_string())
            .collect()
    };
    let kept =
        |b: usize| rewritten.blocks[b].modes[..p.blocks[b].modes.len()] == p.blocks[b].modes[..];
    let f2_exact = kept(1) && added(1) == ["GRW(pv2) /*shadow*/"];
    let f1_exact = kept(0) && added(0).is_empty();
    let f3_rule = kept(2) && added(2) == ["RW(pv1) /*shadow*/"];
    let shadows: usize = rewritten
        .blocks
        .iter()
        .map(|b| {
            b.modes
                .iter()
                .filter(|m| m.origin == Origin::Shadow)
                .count()
        })
        .sum();
    let upgrades = rewritten
        .blocks
        .iter()
        .flat_map(|b| &b.modes)
        .filter(|m| matches!(m.origin, Origin::Upgraded { .. }))
        .count();
    let golden_ok = out == golden;
    let run = all_schedules_run(&rewritten, 0, 10_000);
    let detail = format!(
        "f1 unchanged: {f1_exact}; f2 gains exactly [GRW(pv2) /*shadow*/]: {f2_exact}; \
         golden text match: {golden_ok}; rewritten program runs {} with abstraction {}; \
         whole-program shadow count {shadows}, upgrades {upgrades}",
        run.runs[0].outcome.label(),
        if run.abstraction_held() {
            "held"
        } else {
            "BROKEN"
        },
    );
    let core_ok =
        f1_exact && f2_exact && f3_rule && golden_ok && run.all_done() && run.abstraction_held();
    if !core_ok {
        r.check("6", "overlap rewrite", false, detail);
    } else if shadows == 1 && upgrades == 0 {
        r.check("6", "overlap rewrite", true, detail);
    } else {
        r.line(
            "6",
            "overlap rewrite",
            Status::Deviation,
            format!(
                "{detail}. The f2 rewrite matches exactly; f3 = RW(pv4), R(pv2) also gains RW(pv1) /*shadow*/ \
                 because pv4 [2:3] overlaps pv1 [2:5] and an RW entry forces RW on every overlapping view, \
                 so 'exactly one shadow entry in the whole program' cannot hold without dropping a required entry"
            ),
        );
    }
}

fn registry_oracle(r: &mut Report) {
    let start = Instant::now();
    let (mut queries, mut mismatches) = (0usize, 0usize);
    for seq in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seq);
        let mut list: OverlapRegistry<SortedList> = OverlapRegistry::new();
        let mut tree: OverlapRegistry<SegmentTree> = OverlapRegistry::new();
        let mut live: Vec<(String, usize, usize)> = Vec::new();
        let mut next = 0;
        for _ in 0..rng.gen_range(1..=120) {
            match rng.gen_range(0..10) {
                0..=3 => {
                    let lo = rng.gen_range(0..=64);
                    let hi = rng.gen_range(lo..=64);
                    let view = format!("p{next}");
                    next += 1;
                    let decl = cohere::decl::ViewDecl {
                        view: name(&view),
                        buffer: name("v"),
                        lo,
                        hi,
                    };
                    list.insert(&decl).unwrap();
                    tree.insert(&decl).unwrap();
                    live.push((view, lo, hi));
                }
                4..=5 if !live.is_empty() => {
                    let (view, _, _) = live.swap_remove(rng.gen_range(0..live.len()));
                    list.remove(&view).unwrap();
                    tree.remove(&view).unwrap();
                }
                _ => {
                    let lo = rng.gen_range(0..=64);
                    let hi = rng.gen_range(lo..=64);
                    let probe = cohere::decl::ViewDecl {
                        view: name("probe"),
                        buffer: name("v"),
                        lo,
                        hi,
                    };
                    let mut want: Vec<String> = live
                        .iter()
                        .filter(|(_, l, h)| *l <= hi && lo <= *h)
                        .map(|(v, _, _)| v.clone())
                        .collect();
                    want.sort();
                    for got in [list.query(&probe), tree.query(&probe)] {
                        let mut got: Vec<String> = got.iter().map(|n| n.to_string()).collect();
                        got.sort();
                        queries += 1;
                        if got != want {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    let t = start.elapsed();
    r.check(
        "7",
        "registry oracle",
        mismatches == 0 && t < Duration::from_secs(10),
        format!(
            "1000 sequences, {queries} backend queries, {mismatches} mismatches vs brute force, {}",
            secs(t)
        ),
    );
}

/// Hand-written programs, each expected to raise exactly one rule.
const NEGATIVE: &[(RuleId, &str)] = &[
    (RuleId::NoSync, "scalar x  RW(x) { pull x; r x; }"),
    (
        RuleId::NoSync,
        "buffer b[4] view v = b[0:3]  GR(v) { push v; gr v[1]; }",
    ),
    (RuleId::UndeclaredWrite, "scalar x  R(x) { r x; w x; }"),
    (RuleId::UndeclaredWrite, "scalar x  RW(x) { gw x; }"),
    (
        RuleId::UndeclaredRead,
        "scalar x scalar y  RW(x) { w x; r y; }",
    ),
    (
        RuleId::UndeclaredRead,
        "buffer b[3] view v = b[0:2]  GW(v) { gw v[0]; gw v[1]; gw v[2]; gr v[1]; }",
    ),
    (
        RuleId::WriteNotOnAllPaths,
        "scalar x  W(x) { if (opaque) { w x; } }",
    ),
    (
        RuleId::WriteNotOnAllPaths,
        "scalar x  GW(x) { while (opaque) { gw x; } }",
    ),
    (
        RuleId::WriteNotAllElements,
        "buffer b[4] view v = b[0:3]  W(v) { w v[0]; w v[1]; w v[2]; }",
    ),
    (
        RuleId::WriteNotAllElements,
        "buffer b[2] view v = b[0:1]  GW(v) { gw v[0]; if (opaque) { gw v[1]; } }",
    ),
    (
        RuleId::OverlapMissingRw,
        "buffer b[6] view p = b[0:3] view q = b[2:5]  RW(p) { w p[2]; }",
    ),
    (
        RuleId::OverlapMissingRw,
        "buffer b[6] view p = b[0:3] view q = b[2:5]  RW(p), GRW(q) { w p[3]; }",
    ),
    (RuleId::AbstractInBody, "scalar x  RW(x) { w x^; }"),
    (
        RuleId::AbstractInBody,
        "scalar x  R(x) { if (opaque) { r x^; } }",
    ),
];

/// Closure conflicts only arise when the overlap rewrite runs.
const NEGATIVE_WITH_REWRITE: &[(RuleId, &str)] = &[
    (RuleId::OverlapSiteConflict, "buffer b[6] view p = b[0:3] view q = b[2:5]  RW(p), GR(q) { w p[0]; gr q[4]; }"),
    (RuleId::OverlapSiteConflict, "buffer b[4] view p = b[0:1] view q = b[1:3]  W(p), GW(q) { w p[0]; w p[1]; gw q[1]; gw q[2]; gw q[3]; }"),
];

fn negative_suite(r: &mut Report) {
    let mut bad = Vec::new();
    let mut per_rule = std::collections::BTreeMap::<RuleId, usize>::new();
    let cases = NEGATIVE
        .iter()
        .map(|c| (c, false))
        .chain(NEGATIVE_WITH_REWRITE.iter().map(|c| (c, true)));
    for (&(rule, src), rewrite) in cases {
        let p = parse(src).unwrap();
        let registry: OverlapRegistry = OverlapRegistry::from_layout(&p.layout);
        let found: Vec<RuleId> = certify(&p, &registry, rewrite)
            .diagnostics
            .iter()
            .map(|d| d.rule)
            .collect();
        if !found.is_empty() && found.iter().all(|f| *f == rule) {
            *per_rule.entry(rule).or_default() += 1;
        } else {
            bad.push(format!("`{src}` expected {rule}, got {found:?}"));
        }
    }
    let required = [
        RuleId::NoSync,
        RuleId::UndeclaredWrite,
        RuleId::UndeclaredRead,
        RuleId::WriteNotOnAllPaths,
        RuleId::WriteNotAllElements,
        RuleId::OverlapMissingRw,
    ];
    let covered = required
        .iter()
        .all(|rule| per_rule.get(rule).copied().unwrap_or(0) >= 2);
    let counts: Vec<String> = per_rule.iter().map(|(k, v)| format!("{k} x{v}")).collect();
    r.check(
        "8",
        "checker negative suite",
        bad.is_empty() && covered,
        format!(
            "{}{}",
            counts.join(", "),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; WRONG: {bad:?}")
            }
        ),
    );
}

fn dual_raw() -> (usize, usize, usize) {
    let init = initial_store(&raw_layout());
    let (mut programs, mut states, mut disagreements) = (0, 0, 0);
    for p in enumerate_raw_programs(4) {
        programs += 1;
        let naive = run_naive(&p, from_store(&init), 100, &[]);
        let mut config = Configuration::new(p, init.clone());
        let mut i = 0;
        let agree = loop {
            match step(config, &mut Schedule::empty()).unwrap() {
                StepOutcome::Stepped(next) => {
                    states += 1;
                    if naive.history.get(i) != Some(&from_store(&next.store)) {
                        break false;
                    }
                    i += 1;
                    config = next;
                }
                StepOutcome::Done(s) => {
                    break naive.outcome == NaiveOutcome::Done && naive.store == from_store(&s)
                }
                StepOutcome::Stuck { config: c, stuck } => {
                    break naive.outcome
                        == NaiveOutcome::Stuck {
                            key: stuck.key.to_string(),
                            actual: pair_chars(stuck.actual),
                        }
                        && naive.store == from_store(&c.store)
                        && naive.history.len() == i
                }
            }
        };
        if !agree {
            disagreements += 1;
        }
    }
    (programs, states, disagreements)
}

fn main() -> ExitCode {
    let mut r = Report { failed: false };
    safety(&mut r);
    stuck_example(&mut r);
    translation(&mut r);

    let s = settings();
    let (st, t) = corpus(&s);
    let problem = st
        .first_problem
        .as_deref()
        .map(|p| format!("; first problem: {p}"))
        .unwrap_or_default();
    r.check(
        "4",
        "subject reduction over the generated corpus",
        st.programs == s.seeds as usize
            && st.uncertified == 0
            && st.abstraction_failures == 0
            && t < Duration::from_secs(120),
        format!(
            "{} programs ({} with overlapping views, {} uncertified), {} schedule runs (k = {}, fuel = {}), \
             {} abstraction failures, {}{problem}",
            st.programs, st.with_overlaps, st.uncertified, st.runs, s.k, s.fuel, st.abstraction_failures, secs(t)
        ),
    );
    r.check(
        "5",
        "progress over the generated corpus",
        st.stuck == 0 && st.not_done == 0,
        format!(
            "{} runs: {} stuck, {} not done ({} programs cut at k decisions)",
            st.runs, st.stuck, st.not_done, st.truncated
        ),
    );

    overlap_rewrite(&mut r);
    registry_oracle(&mut r);
    negative_suite(&mut r);

    let (programs, states, raw_disagreements) = dual_raw();
    r.check(
        "9",
        "dual-interpreter equivalence",
        raw_disagreements == 0 && st.naive_disagreements == 0 && st.naive_checked == st.runs,
        format!(
            "{programs} raw programs compared state by state ({states} states, {raw_disagreements} disagreements); \
             {} corpus runs compared on outcome and final store ({} disagreements)",
            st.naive_checked, st.naive_disagreements
        ),
    );

    if r.failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
