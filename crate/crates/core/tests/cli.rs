mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use bubble_core::catalogue::{build, ConfigurationKind as Kind, ConfigurationSpec};
use bubble_core::cli::{main_with_args, schemas, ExitCode};
use bubble_core::flow::jitter;
use bubble_core::io::write_off;
use common::*;
use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> ExitCode {
    let mut all = vec!["bubble", "--out"];
    let out = dir.to_str().unwrap();
    all.push(out);
    all.extend_from_slice(args);
    main_with_args(all)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn assert_valid(schema: &str, instance: &Value) {
    let schema = json(&schema_dir().join(format!("{schema}.schema.json")));
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

fn db_spec(dir: &Path, n: usize) -> PathBuf {
    write(dir, "db.json", &format!(r#"{{"kind":"standard_double_bubble","volumes":[1,1],"resolution":{{"frequency":{n}}}}}"#))
}

/// Set `BLESS=1` to regenerate the shipped schemas.
#[test]
fn shipped_schemas_are_current() {
    let dir = schema_dir();
    for (name, schema) in schemas() {
        let path = dir.join(format!("{name}.schema.json"));
        let text = serde_json::to_string_pretty(&schema).unwrap() + "\n";
        if std::env::var_os("BLESS").is_some() {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &text).unwrap();
        }
        assert_eq!(std::fs::read_to_string(&path).unwrap_or_default(), text, "{name} schema is stale; rerun with BLESS=1");
    }
}

#[test]
fn build_writes_meshes_and_report() {
    let d = TempDir::new().unwrap();
    let spec = db_spec(d.path(), 8);
    assert_eq!(run(d.path(), &["build", spec.to_str().unwrap()]), ExitCode::Success);
    for f in ["db.off", "db.obj", "db.report.json", "manifest.json"] {
        assert!(d.path().join(f).is_file(), "{f}");
    }
    let report = json(&d.path().join("db.report.json"));
    assert_eq!(report["branch"], "flat_interface");
    assert_valid("build_report", &report);
    assert_valid("run_manifest", &json(&d.path().join("manifest.json")));
    assert_valid("configuration_spec", &json(&spec));
}

#[test]
fn build_rejects_unequal_triple() {
    let d = TempDir::new().unwrap();
    let spec = write(d.path(), "t.json", r#"{"kind":"standard_triple","volumes":[1,2,3],"resolution":{"frequency":6}}"#);
    assert_eq!(run(d.path(), &["build", spec.to_str().unwrap()]), ExitCode::ConstructionError);
}

#[test]
fn malformed_json_reports_byte_offset() {
    let d = TempDir::new().unwrap();
    let spec = write(d.path(), "bad.json", "{\"kind\": \"standard_triple\",\n \"volumes\": [1, 1, 1],,\n}");
    let out = Command::new(env!("CARGO_BIN_EXE_bubble"))
        .args(["--out", d.path().to_str().unwrap(), "build", spec.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("at byte 50"), "{stderr}");
}

#[test]
fn schema_violations_are_input_errors() {
    let d = TempDir::new().unwrap();
    let spec = write(d.path(), "s.json", r#"{"kind":"standard_triple","volumes":[1,1,1],"resolution":{"frequency":6},"colour":"red"}"#);
    assert_eq!(run(d.path(), &["build", spec.to_str().unwrap()]), ExitCode::InputError);
    let spec = write(d.path(), "k.json", r#"{"kind":"quadruple","volumes":[1],"resolution":0.1}"#);
    assert_eq!(run(d.path(), &["build", spec.to_str().unwrap()]), ExitCode::InputError);
    assert_eq!(run(d.path(), &["build", "/no/such/spec.json"]), ExitCode::InputError);
    assert_eq!(run(d.path(), &["frobnicate"]), ExitCode::InputError);
    let good = db_spec(d.path(), 6);
    assert_eq!(run(d.path(), &["--tolerance-profile", "lax", "build", good.to_str().unwrap()]), ExitCode::InputError);
}

#[test]
fn verify_exit_codes() {
    let d = TempDir::new().unwrap();
    let cluster = build(&ConfigurationSpec::new(Kind::StandardDoubleBubble, vec![1.0, 1.0], freq(20))).unwrap();
    let good = d.path().join("good.off");
    write_off(&cluster.mesh, &good).unwrap();
    assert_eq!(run(d.path(), &["verify", good.to_str().unwrap()]), ExitCode::Success);
    let report = json(&d.path().join("good.verify.json"));
    assert!(report["report"]["residual_rel"].as_f64().unwrap() <= 0.02);
    assert_valid("verify_report", &report);

    let r = cluster.construction.as_ref().unwrap().radii[0];
    let mut mesh = cluster.mesh.clone();
    jitter(&mut mesh, 0.05 * r, 1);
    let bad = d.path().join("jittered.off");
    write_off(&mesh, &bad).unwrap();
    assert_eq!(run(d.path(), &["verify", bad.to_str().unwrap()]), ExitCode::ResidualAboveTolerance);
    let report = json(&d.path().join("jittered.verify.json"));
    assert!(report["report"]["residual_rel"].as_f64().unwrap() > report["tolerance"]["residual_rel"].as_f64().unwrap());

    let ball = build(&ConfigurationSpec::new(Kind::DisjointBalls, vec![1.0], freq(16))).unwrap();
    let r = ball.construction.as_ref().unwrap().radii[0];
    let path = d.path().join("ball.off");
    write_off(&ball.mesh, &path).unwrap();
    assert_eq!(run(d.path(), &["verify", path.to_str().unwrap()]), ExitCode::Success);
    let lambda = json(&d.path().join("ball.verify.json"))["report"]["lambdas"][0].as_f64().unwrap();
    assert!((lambda * r / 2.0 - 1.0).abs() < 0.02, "{lambda}");

    let broken = write(d.path(), "broken.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n");
    assert_eq!(run(d.path(), &["verify", broken.to_str().unwrap()]), ExitCode::InputError);
}

#[test]
fn evolve_recovers_double_bubble() {
    let d = TempDir::new().unwrap();
    let spec = db_spec(d.path(), 6);
    let params = write(d.path(), "p.json", r#"{"jitter":0.05,"seed":7}"#);
    assert_eq!(
        run(d.path(), &["evolve", spec.to_str().unwrap(), "--params", params.to_str().unwrap()]),
        ExitCode::Success
    );
    let cl = json(&d.path().join("db.classification.json"));
    assert_eq!(cl["configuration"], "standard_double_bubble");
    assert_valid("classification", &cl);
    assert_valid("flow_params", &json(&params));
    assert!(d.path().join("db.final.off").is_file());
    let trace = std::fs::read_to_string(d.path().join("db.trace.csv")).unwrap();
    assert!(trace.starts_with("step,area,residual_rel,vol_err_1,vol_err_2,step_size\n"));
}

#[test]
fn evolve_without_steps_does_not_converge() {
    let d = TempDir::new().unwrap();
    let spec = db_spec(d.path(), 6);
    let params = write(d.path(), "p.json", r#"{"max_steps":0}"#);
    assert_eq!(
        run(d.path(), &["evolve", spec.to_str().unwrap(), "--params", params.to_str().unwrap()]),
        ExitCode::NonConvergence
    );
    let trace = std::fs::read_to_string(d.path().join("db.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(d.path().join("db.final.off").is_file());
}

#[test]
fn evolve_rejects_flipped_triangles() {
    let d = TempDir::new().unwrap();
    let mut mesh = build(&ConfigurationSpec::new(Kind::StandardDoubleBubble, vec![1.0, 1.0], freq(6))).unwrap().mesh;
    mesh.faces[10].swap(1, 2);
    let path = d.path().join("flipped.off");
    write_off(&mesh, &path).unwrap();
    assert_eq!(run(d.path(), &["evolve", path.to_str().unwrap()]), ExitCode::MeshDegeneracy);
}

#[test]
fn classify_reports_configuration() {
    let d = TempDir::new().unwrap();
    let spec = write(d.path(), "t.json", r#"{"kind":"standard_triple","volumes":[1,1,1],"resolution":{"frequency":10}}"#);
    assert_eq!(run(d.path(), &["classify", spec.to_str().unwrap()]), ExitCode::Success);
    let cl = json(&d.path().join("t.classification.json"));
    assert_eq!(cl["case_label"], "triple_case_4");
    assert_eq!(cl["configuration"], "standard_triple");
    assert_valid("classification", &cl);
}

#[test]
fn sweep_reports_infeasible_rows() {
    let d = TempDir::new().unwrap();
    let grid = write(
        d.path(),
        "grid.json",
        r#"{"entries":[{"kind":"lined_up_triple","volumes":[[5.0,3.5342917352885173,3.5342917352885173]],"branches":["parallel"]},
                       {"kind":"standard_double_bubble","volumes":[[1,1]]}],
            "resolutions":[{"frequency":8}]}"#,
    );
    assert_valid("sweep_grid", &json(&grid));
    assert_eq!(run(d.path(), &["sweep", grid.to_str().unwrap()]), ExitCode::CheckFailed);
    let csv = std::fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains("outside the feasible range") || rows[1].contains("feasible"), "{}", rows[1]);
    assert!(rows[2].contains(",true,"), "{}", rows[2]);
}

#[test]
fn empty_sweep_writes_header() {
    let d = TempDir::new().unwrap();
    let grid = write(d.path(), "grid.json", r#"{"entries":[],"resolutions":[]}"#);
    assert_eq!(run(d.path(), &["sweep", grid.to_str().unwrap()]), ExitCode::Success);
    let csv = std::fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn manifests_replay_and_validate() {
    let d = TempDir::new().unwrap();
    db_spec(d.path(), 6);
    write(
        d.path(),
        "m.json",
        r#"{"format_version":1,"command":"build","input":"db.json","out":"out","seed":3}"#,
    );
    assert_eq!(main_with_args(["bubble", "run", d.path().join("m.json").to_str().unwrap()]), ExitCode::Success);
    assert!(d.path().join("out/db.off").is_file());
    let replay = d.path().join("out/manifest.json");
    assert_valid("run_manifest", &json(&replay));
    assert_eq!(main_with_args(["bubble", "run", replay.to_str().unwrap()]), ExitCode::Success);

    write(d.path(), "v2.json", r#"{"format_version":2,"command":"build","input":"db.json","out":"out"}"#);
    assert_eq!(main_with_args(["bubble", "run", d.path().join("v2.json").to_str().unwrap()]), ExitCode::InputError);
    write(d.path(), "missing.json", r#"{"format_version":1,"command":"verify","input":"nope.off","out":"out"}"#);
    assert_eq!(main_with_args(["bubble", "run", d.path().join("missing.json").to_str().unwrap()]), ExitCode::InputError);
    write(
        d.path(),
        "inline.json",
        r#"{"format_version":1,"command":"classify","out":"inline",
            "spec":{"kind":"disjoint_balls","volumes":[1,2],"resolution":{"frequency":8}}}"#,
    );
    assert_eq!(main_with_args(["bubble", "run", d.path().join("inline.json").to_str().unwrap()]), ExitCode::Success);
    assert_eq!(json(&d.path().join("inline/cluster.classification.json"))["configuration"], "disjoint_balls");
}

#[test]
fn binary_exit_status_matches_contract() {
    let d = TempDir::new().unwrap();
    let spec = write(d.path(), "t.json", r#"{"kind":"standard_triple","volumes":[1,2,3],"resolution":{"frequency":6}}"#);
    let status = Command::new(env!("CARGO_BIN_EXE_bubble"))
        .args(["build", spec.to_str().unwrap(), "--out", d.path().to_str().unwrap()])
        .env("BUBBLE_LOG", "error")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
