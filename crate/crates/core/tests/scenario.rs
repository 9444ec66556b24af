use std::path::{Path, PathBuf};
use std::process::Command;

use warpcert::scenario::{emit, load_scenario, run, Format, RunOptions, RunReport, Scenario, ScenarioError};
use warpcert::Verdict;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_warpcert"))
}

#[test]
fn every_fixture_matches_its_expectations() {
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        let s = load_scenario(&path).unwrap();
        let r = run(&s, &RunOptions::default());
        assert_eq!(r.summary.mismatched, 0, "{}:\n{}", path.display(), emit(&r, Format::Text));
        assert_eq!(r.summary.errors, 0, "{}", path.display());
        assert_eq!(r.exit_code(), 0);
    }
}

#[test]
fn appendix_case1_declares_the_family() {
    let s = load_scenario(fixture("appendix_a.case1.toml")).unwrap();
    let st = &s.spacetimes["st"].spacetime;
    assert!(st.is_standard_static());
    assert_eq!(st.sigma().as_constant(), Some(1.5));
    let at = warpcert::Point::new().with("x", 2.5);
    assert_eq!(st.f().eval(&at).unwrap(), 6.0);
}

#[test]
fn appendix_suite_table() {
    let s = load_scenario(fixture("appendix_a.toml")).unwrap();
    let r = run(&s, &RunOptions::default());
    let fam = &r.checks[0].families;
    assert_eq!(fam.len(), 3);
    assert!(fam.iter().all(|f| f.passed == f.instances));
    let text = emit(&r, Format::Text);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("    ") && l.trim_start().starts_with(['1', '2', '3'])).collect();
    assert_eq!(rows.len(), 3, "{text}");
    assert!(rows[0].contains("r*(x+a)") && rows[1].contains("r*(t+a)") && rows[2].contains("x+b"));
}

#[test]
fn prop2_and_gaussian_suites() {
    let r = run(&load_scenario(fixture("prop2_oracle.toml")).unwrap(), &RunOptions::default());
    let ricci = r.checks.iter().find(|c| c.kind == "ricci_closed_form").unwrap();
    assert_eq!(ricci.verdict, Some(Verdict::Pass));
    let r = run(&load_scenario(fixture("gaussian_soliton.toml")).unwrap(), &RunOptions::default());
    let sol = &r.checks[0];
    assert_eq!(sol.verdict, Some(Verdict::Pass));
    assert_eq!(sol.derived["lambda"], 1.0);
}

#[test]
fn empty_report_json() {
    let r = run(&load_scenario(fixture("empty.toml")).unwrap(), &RunOptions::default());
    let v: serde_json::Value = serde_json::from_str(&emit(&r, Format::Json)).unwrap();
    assert_eq!(v["checks"], serde_json::json!([]));
}

#[test]
fn json_round_trips() {
    for name in ["appendix_a.toml", "solitons.toml", "products.toml", "spacetimes.toml"] {
        let r = run(&load_scenario(fixture(name)).unwrap(), &RunOptions { seed: Some(9), ..Default::default() });
        let json = emit(&r, Format::Json);
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(emit(&back, Format::Json), json);
    }
}

#[test]
fn overrides_apply() {
    let s = load_scenario(fixture("gaussian_soliton.toml")).unwrap();
    let r = run(&s, &RunOptions { seed: Some(77), tol: Some(1e-6), samples: Some(3) });
    assert_eq!(r.seed, 77);
    assert!(r.checks.iter().all(|c| c.seed == 77 && c.tol == 1e-6 && c.samples == 3));
    let a = emit(&run(&s, &RunOptions { seed: Some(1), ..Default::default() }), Format::Json);
    let b = emit(&run(&s, &RunOptions { seed: Some(2), ..Default::default() }), Format::Json);
    assert_ne!(a, b);
}

const BROKEN: &str = r#"
[[charts]]
id = "R"
coords = ["x"]
diagonal = ["1"]

[[spacetimes]]
id = "st"
base = "R"
f = "1"
sigma = "0*t"
interval = [0.0, 1.0]
box = { x = [0.0, 1.0] }

[[fields]]
id = "z"
on = "st"
h = "t"

[[checks]]
id = "degenerate"
kind = "soliton"
target = "st"
field = "z"
params = { lambda = 1.0 }
expect = "pass"

[[checks]]
id = "wrong_expectation"
kind = "lie_spacetime"
target = "st"
field = "z"
expect = "fail"
"#;

#[test]
fn numeric_errors_stay_on_their_check() {
    let s = Scenario::from_toml(BROKEN, "broken").unwrap();
    let r = run(&s, &RunOptions::default());
    assert_eq!(r.checks.len(), 2);
    assert!(r.checks[0].error.is_some());
    assert_eq!(r.checks[0].matches, Some(false));
    assert_eq!(r.summary.errors, 2);
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn load_errors() {
    let e = Scenario::from_toml("[[checks]]\nid = \"c\"\nkind = \"soliton\"\ntarget = \"missing\"\nfield = \"z\"\nparams = { lambda = 1.0 }\n", "x")
        .unwrap_err();
    assert!(matches!(e, ScenarioError::Unresolved { what: "space-time", .. }), "{e}");
    let e = load_scenario(fixture("no_such_file.toml")).unwrap_err();
    assert!(matches!(e, ScenarioError::Io { .. }));
}

#[test]
fn cli_exit_codes() {
    let ok = bin().args(["verify", fixture("appendix_a.case1.toml").to_str().unwrap()]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("concurrent"));

    let dir = std::env::temp_dir().join(format!("warpcert-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("mismatch.toml");
    std::fs::write(&bad, std::fs::read_to_string(fixture("appendix_a.case3.toml")).unwrap().replace(
        "expect = \"concurrent\"",
        "expect = \"not_concurrent\"",
    ))
    .unwrap();
    let out = bin().arg("verify").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let broken = dir.join("broken.toml");
    std::fs::write(&broken, "[[charts]]\nid = \"R\"\ncoords = [\"x\"]\ndiagonal = [\"1\", \"1\"]\n").unwrap();
    let out = bin().arg("verify").arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));

    // Bare names resolve against the fixture directory.
    let out = bin().args(["verify", "mismatch"]).env("WARPCERT_FIXTURES", &dir).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["verify", "empty", "--format", "json"]).env_remove("WARPCERT_FIXTURES").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cli_appendix_and_listing() {
    let a = bin().args(["appendix-a", "--format", "json", "--seed", "3"]).output().unwrap();
    let b = bin().args(["appendix-a", "--format", "json", "--seed", "3"]).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: RunReport = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report.checks[0].families.len(), 3);
    let list = bin().arg("list-checks").output().unwrap();
    let text = String::from_utf8(list.stdout).unwrap();
    assert_eq!(text.lines().count(), warpcert::scenario::CheckKind::ALL.len());
    assert!(text.contains("th2_checks"));
}
