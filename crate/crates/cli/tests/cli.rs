use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn program(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/programs")
        .join(name)
        .display()
        .to_string()
}

fn cohere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohere"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn ndjson(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn two_block_example_checks_and_runs() {
    let f = program("two_blocks.coh");
    let o = cohere(&["check", &f]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = cohere(&["run", &f]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(
        out.starts_with("done after 7 step(s)\nabstraction held\n"),
        "{out}"
    );
    assert!(
        out.contains("\nx V V\n") && out.contains("\nx^ V V\n"),
        "{out}"
    );
}

#[test]
fn translate_golden() {
    let o = cohere(&["translate", &program("two_blocks.coh")]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "if (valid(x)) {} else {\n    pull x;\n    pull x^;\n}\nw x^;\nw x;\n\
         if (gvalid(x)) {} else {\n    push x;\n    push x^;\n}\ngr x;\n"
    );
}

#[test]
fn raw_stuck_program_exits_3() {
    let o = cohere(&["run", "--raw", &program("stuck.raw")]);
    assert_eq!(code(&o), 3);
    let out = stdout(&o);
    assert!(
        out.starts_with("stuck after 1 step(s): `gr` on x needs (X,V) but the status is (V,I)"),
        "{out}"
    );

    let o = cohere(&["run", "--raw", "--json", &program("stuck.raw")]);
    let v = &ndjson(&o)[0];
    assert_eq!(v["outcome"], "stuck");
    assert_eq!(v["stuck"]["key"], "x");
    assert_eq!(v["stuck"]["actual"], "(V,I)");
    assert_eq!(v["store"]["x"], "VI");
}

#[test]
fn repaired_raw_program_runs() {
    let o = cohere(&["run", "--raw", &program("repaired.raw")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().any(|l| l == "x V V"));
}

#[test]
fn sync_in_body_is_reported_with_position() {
    let f = program("pull_in_body.coh");
    let o = cohere(&["check", &f]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), format!("{f}:4:5: error: D2-NO-SYNC: `pull x` in a body; transfers are generated from the access modes\n"));
    let o = cohere(&["check", "--json", &f]);
    let d = ndjson(&o);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["rule"], "D2-NO-SYNC");
    assert_eq!(d[0]["view"], "x");
    assert_eq!(
        (d[0]["line"].as_u64(), d[0]["col"].as_u64()),
        (Some(4), Some(5))
    );
}

#[test]
fn partial_array_write_is_reported() {
    let o = cohere(&["check", "--json", &program("partial_write.coh")]);
    assert_eq!(code(&o), 1);
    let d = ndjson(&o);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["rule"], "D4-W-NOT-ALL-ELEMENTS");
    assert_eq!(d[0]["line"], 4);
}

#[test]
fn overlap_inference_golden() {
    let f = program("overlap.coh");
    let o = cohere(&["infer", &f]);
    assert_eq!(code(&o), 0);
    let expected = std::fs::read_to_string(&f)
        .unwrap()
        .replace("GW(pv3) {", "GW(pv3), GRW(pv2) /*shadow*/ {")
        .replace("RW(pv4), R(pv2) {", "RW(pv4), R(pv2), RW(pv1) /*shadow*/ {");
    assert_eq!(stdout(&o), expected);

    assert_eq!(code(&cohere(&["check", &f])), 0);
    let o = cohere(&["check", "--no-overlap", "--json", &f]);
    assert_eq!(code(&o), 1);
    let rules: Vec<Value> = ndjson(&o).into_iter().map(|d| d["rule"].clone()).collect();
    assert_eq!(rules, ["OVL-MISSING-RW", "OVL-MISSING-RW"]);

    let o = cohere(&["run", &f]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("abstraction held"));
}

#[test]
fn inferred_program_is_a_fixed_point() {
    let o = cohere(&["infer", &program("overlap.coh")]);
    let dir = std::env::temp_dir().join(format!("cohere-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("inferred.coh");
    std::fs::write(&f, stdout(&o)).unwrap();
    let again = cohere(&["infer", f.to_str().unwrap()]);
    assert_eq!(stdout(&again), stdout(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn site_conflict_exits_1() {
    for cmd in ["check", "run", "infer"] {
        let o = cohere(&[cmd, "--json", &program("conflict.coh")]);
        assert_eq!(code(&o), 1, "{cmd}");
        assert_eq!(ndjson(&o)[0]["rule"], "OVL-SITE-CONFLICT", "{cmd}");
    }
}

#[test]
fn schedule_and_fuel() {
    let f = program("spin.coh");
    let o = cohere(&["run", "--schedule", "111", &f]);
    assert_eq!(code(&o), 0);
    let o = cohere(&["run", "--schedule", "1111111111", "--fuel", "8", &f]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).starts_with("fuel-exhausted after 8 step(s)"));
    assert_eq!(code(&cohere(&["run", "--schedule", "12", &f])), 2);
    assert_eq!(code(&cohere(&["run", "--fuel", "0", &f])), 2);
}

#[test]
fn trace_lists_rules_and_deltas() {
    let o = cohere(&["trace", "--raw", &program("repaired.raw")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "   1  effect         w x;");
    assert_eq!(
        lines[1],
        "   2  effect         push x;                   x: (V,I) -> (V,V)"
    );
    assert_eq!(lines[2], "   3  remote-effect  gr x;");

    let o = cohere(&["trace", "--json", "--schedule", "1", &program("spin.coh")]);
    let steps = ndjson(&o);
    let rules: Vec<&str> = steps.iter().filter_map(|s| s["rule"].as_str()).collect();
    assert!(rules.contains(&"while-true") && rules.contains(&"while-false"));
    assert_eq!(steps.last().unwrap()["outcome"], "done");
}

#[test]
fn bad_input_exits_2() {
    let o = cohere(&["check", &program("missing.coh")]);
    assert_eq!(code(&o), 2);
    let o = cohere(&["check", &program("bad_syntax.coh")]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad_syntax.coh:5:1:"), "{err}");
    assert_eq!(code(&cohere(&["infer", "--raw", &program("stuck.raw")])), 2);
}
