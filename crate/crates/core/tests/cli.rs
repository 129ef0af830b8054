use std::process::Command;

use cdgl::dsl::{parse_model, render_model, Overrides};
use cdgl::error::Error;
use cdgl::fixtures::{fixture_text, SHIPPED};
use cdgl::report::{parse_window, run_scenario, Scenario, SCENARIOS};

const DISK: &str = "generator x : 0\ngenerator y : 1\nd y = x\nsub M = { x }";
const CP2: &str = "generator x1 : 1\ngenerator x2 : 3\nd x2 = 1/2 [x1, x1]";

fn cdgl(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cdgl")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("cdgl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn render_is_a_fixed_point() {
    for name in SHIPPED.iter().chain(["gauge"].iter()) {
        let s0 = parse_model(fixture_text(name).unwrap()).unwrap();
        let t1 = render_model(&s0.build(&Overrides::default()).unwrap(), None);
        let s1 = parse_model(&t1).unwrap();
        let t2 = render_model(&s1.build(&Overrides::default()).unwrap(), None);
        assert_eq!(t1, t2, "{name}");
        assert_eq!(s1, parse_model(&t2).unwrap(), "{name}");
    }
}

#[test]
fn spec_examples_parse() {
    let disk = parse_model(DISK).unwrap().build(&Overrides::default()).unwrap();
    assert_eq!(disk.pres.generators.len(), 2);
    assert_eq!(disk.sub_generators().map(|u| u.to_vec()), Some(vec![0]));
    let cp2 = parse_model(CP2).unwrap().build(&Overrides::default()).unwrap();
    let rendered = render_model(&cp2, None);
    assert!(rendered.contains("d x2 = 1/2 [x1, x1]"), "{rendered}");
}

#[test]
fn degree_mismatch_is_a_validation_error() {
    // the parser takes it, validation does not
    let s = parse_model("generator x : 0\ngenerator y : 3\nd y = [x, x]").unwrap();
    assert!(matches!(s.build(&Overrides::default()), Err(Error::Validation(_))));
    // for even x the bracket vanishes, so in the right degree this is d y = 0
    let l = parse_model("generator x : 0\ngenerator y : 1\nd y = [x, x]").unwrap().build(&Overrides::default()).unwrap();
    assert!(l.pres.differential[1].is_zero());
}

#[test]
fn parse_errors_carry_locations() {
    match parse_model("generator x : 1\nd x = [x, z]") {
        Err(Error::UnknownGenerator { name, line, col }) => assert_eq!((name.as_str(), line, col), ("z", 2, 11)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_model("generator x : 1\nd x = [x, "), Err(Error::Syntax { line: 2, .. })));
    assert!(matches!(parse_model("generator x 1"), Err(Error::Syntax { line: 1, .. })));
}

#[test]
fn window_flag() {
    assert_eq!(parse_window("-2..8").unwrap(), (-2, 8));
    assert!(parse_window("3..1").is_err());
    assert!(parse_window("3").is_err());
}

#[test]
fn odd_generator_homology() {
    let (code, out, _) = cdgl(&["homology", &scratch("odd.cdgl", "generator x : 1\n")]);
    assert_eq!(code, 0);
    assert!(out.contains("H_1: dim 1 betti 1"), "{out}");
    assert!(out.contains("H_2: dim 1 betti 1"), "{out}");
    assert!(out.contains("H_3: dim 0 betti 0"), "{out}");
}

#[test]
fn exit_codes() {
    let disk = scratch("disk.cdgl", DISK);
    let (code, out, _) = cdgl(&["classify-cell", &disk]);
    assert_eq!(code, 0);
    assert!(out.ends_with("PASS\n"));
    // the wedge coalgebra cap does not reach the comparison maps
    let (code, out, _) = cdgl(&["quasi-iso-suite", "fixture:wedge", "--truncate", "4"]);
    assert_eq!(code, 1);
    assert!(out.ends_with("FAIL\n"));
    let (code, _, err) = cdgl(&["check", &scratch("bad.cdgl", "generator x : 0\ngenerator y : 3\nd y = [x, x]\n")]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: invalid model"), "{err}");
    assert_eq!(cdgl(&["nonsense", &disk]).0, 2);
    assert_eq!(cdgl(&["check", "fixture:nope"]).0, 2);
    assert_eq!(cdgl(&["check", "/nonexistent/model.cdgl"]).0, 2);
    assert_eq!(cdgl(&["check", &disk, "--window", "5..1"]).0, 2);
    assert_eq!(cdgl(&["fibration", "fixture:gauge"]).0, 2);
    assert_eq!(cdgl(&["check"]).0, 2);
}

#[test]
fn json_report_is_written() {
    let disk = scratch("disk2.cdgl", DISK);
    let out = std::env::temp_dir().join(format!("cdgl-cli-{}-disk.json", std::process::id()));
    let (code, _, _) = cdgl(&["derivations", &disk, "--truncate", "5", "--window", "-1..6", "--json", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "cdgl-report/1");
    assert_eq!(v["scenario"], "derivations");
    assert_eq!(v["pass"], true);
    assert_eq!(v["model"]["truncation"], 5);
    assert_eq!(v["model"]["window"], "-1..6");
    std::fs::remove_file(out).unwrap();
}

#[test]
fn library_and_binary_agree() {
    let r = run_scenario(Scenario::Homology, "fixture:cp2", fixture_text("cp2").unwrap(), &Overrides::default()).unwrap();
    let (code, out, _) = cdgl(&["homology", "fixture:cp2"]);
    assert_eq!(code, r.exit_code());
    assert_eq!(out, r.text);
}

#[test]
fn every_scenario_has_a_name() {
    for s in SCENARIOS {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), *s);
    }
    assert_eq!(SCENARIOS.len(), 8);
}
