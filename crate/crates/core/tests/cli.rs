//! End-to-end runs of the `hardylab` binary: exit statuses, report contents,
//! reproducibility and the report schema.

use std::path::{Path, PathBuf};
use std::process::Command;

use hardylab::config::RunConfig;
use hardylab::report::{to_json, Report, EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK};

const HARDY: &str = r#"
command = "hardy"

[domain]
kind = "interval"
a = 0.0
b = 1.0

[form]
beta = 0.0

[hardy]
alpha = 0.0
lambda = 3.0

[numerics]
levels = 4

[output]
formats = ["json", "csv"]
"#;

const CRITERIA: &str = r#"
command = "criteria"

[domain]
kind = "interval"
a = 0.0
b = 1.0

[form]
beta = 0.0
gamma = 0.5
q = "-0.2*d^-2"
"#;

const OUTSIDE: &str = r#"
command = "distance"

[domain]
kind = "disc"
center = [0.0, 0.0]
radius = 1.0

[distance]
points = [[0.5, 0.0], [2.0, 0.0]]
"#;

struct Run {
    code: i32,
    report: Report,
    text: String,
    dir: PathBuf,
}

/// Writes `config` next to an output directory and runs the binary on it.
fn run(root: &Path, name: &str, command: &str, config: &str, extra: &[&str]) -> Run {
    let path = root.join(format!("{name}.toml"));
    std::fs::write(&path, config).unwrap();
    let dir = root.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .arg(command)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&dir)
        .args(extra)
        .output()
        .unwrap();
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).unwrap();
    let report = Report::parse(&text).unwrap();
    Run { code: status.status.code().unwrap(), report, text, dir }
}

#[test]
fn certified_hardy_run_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "hardy", "hardy", HARDY, &[]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.report.status, "CERTIFIED");
    let result = r.report.result.as_ref().unwrap();
    assert_eq!(result["levels"].as_array().unwrap().len(), 4);
    assert!(result["margin"].as_f64().unwrap() >= 0.0);
    let csv = std::fs::read_to_string(r.dir.join("hardy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("beta,alpha,lambda,level,dof,minimum,margin"));
}

#[test]
fn supercritical_criteria_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "criteria", "criteria", CRITERIA, &[]);
    assert_eq!(r.code, EXIT_NEGATIVE);
    assert_eq!(r.report.status, "FAIL");
    let result = r.report.result.as_ref().unwrap();
    assert_eq!(result["pointwise"]["verdict"], "FAIL");
    assert_eq!(result["pointwise"]["criterion"], "pointwise_hardy");
}

#[test]
fn outside_point_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "outside", "distance", OUTSIDE, &[]);
    assert_eq!(r.code, EXIT_ERROR);
    assert_eq!(r.report.status, "ERROR");
    assert_eq!(r.report.error.as_ref().unwrap().kind, "PointOutsideDomain");
}

#[test]
fn bad_configs_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "typo", "hardy", &HARDY.replace("levels = 4", "levls = 4"), &[]);
    assert_eq!(r.code, EXIT_ERROR);
    let err = r.report.error.unwrap();
    assert_eq!(err.kind, "Config");
    assert!(err.message.contains("levls") && err.message.contains("line"), "{}", err.message);

    // a config for one command run under another
    let r = run(tmp.path(), "mismatch", "distance", HARDY, &[]);
    assert_eq!(r.code, EXIT_ERROR);
}

#[test]
fn reports_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let strip = |text: &str| text.lines().filter(|l| !l.trim_start().starts_with("\"generated_at\"")).collect::<Vec<_>>().join("\n");
    let a = run(tmp.path(), "first", "criteria", CRITERIA, &[]);
    let b = run(tmp.path(), "second", "criteria", CRITERIA, &[]);
    // the output directory is part of the recorded config
    let a_text = a.text.replace(a.dir.to_str().unwrap(), "<out>");
    let b_text = b.text.replace(b.dir.to_str().unwrap(), "<out>");
    assert_eq!(strip(&a_text), strip(&b_text));
    assert!(a.text.lines().any(|l| l.trim_start().starts_with("\"generated_at\"")));
}

#[test]
fn report_schema_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "hardy", "hardy", HARDY, &[]);
    assert_eq!(r.report.schema, "hardylab-report");
    assert_eq!(to_json(&r.report), r.text);
    let cfg: RunConfig = r.report.config.clone().unwrap();
    let again = RunConfig::parse(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn dry_run_builds_meshes_only() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "dry", "hardy", HARDY, &["--dry-run"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.report.status, "VALID");
    let meshes = r.report.result.unwrap()["meshes"].as_array().unwrap().len();
    assert_eq!(meshes, 4);
    assert!(!r.dir.join("hardy.csv").exists());
}

#[test]
fn bundled_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 6);
}
