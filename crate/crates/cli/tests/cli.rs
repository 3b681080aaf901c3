use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use calagg_cli::config::RunConfig;
use calagg_cli::run;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn calagg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calagg")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    std::fs::copy(fixtures().join("fixture.csv"), dir.join("fixture.csv")).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const DATASET: &str = "[dataset]\npath = \"fixture.csv\"\nfeatures = [\"x\"]\nlabel = \"y\"\nprediction = \"p\"\n";

#[test]
fn fixture_report_is_deterministic_and_contains_ece() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("run.toml");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = calagg(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["scores"][0]["result"]["name"], "ece");
    assert_eq!(doc["scores"][0]["result"]["value"].as_f64().unwrap(), 0.25);
}

#[test]
fn report_numbers_are_reproducible_from_the_library() {
    let report = run(&RunConfig::load(&fixtures().join("run.toml")).unwrap()).unwrap();
    let ds = calagg_cli::load_dataset(&fixtures().join("fixture.csv"), &report.config.dataset.as_ref().unwrap().roles).unwrap();
    let direct = calagg::ece(&ds, &calagg::BinningScheme::equal_width(2)).unwrap();
    assert_eq!(report.scores[0].result.value(), Some(direct.value));
    assert_eq!(report.dataset.as_ref().unwrap().fingerprint, direct.fingerprint);
}

#[test]
fn empty_request_lists_give_summary_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), DATASET);
    let o = calagg(&["--config", config.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["dataset"]["fingerprint"]["n"], 4);
    assert_eq!(doc["scores"].as_array().unwrap().len(), 0);
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing_seed = format!(
        "{DATASET}[[experiments]]\nkind = \"axioms\"\nagglomerator = {{ kind = \"mean\" }}\naxioms = [\"A1\"]\n"
    );
    let config = write_config(dir.path(), &missing_seed);
    let o = calagg(&["--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let unknown = write_config(dir.path(), "[[scores]]\nscore = \"nope\"\n");
    assert_eq!(calagg(&["--config", unknown.to_str().unwrap()]).status.code(), Some(1));

    std::fs::write(dir.path().join("bad.csv"), "x,y,p\n0,0,0.2\n1,1,0.4\n2,2,0.6\n").unwrap();
    let config = write_config(dir.path(), DATASET);
    let bad = dir.path().join("bad.csv");
    let o = calagg(&["--config", config.to_str().unwrap(), "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"));
}

#[test]
fn execution_failures_exit_with_two_and_name_the_request() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{DATASET}[[scores]]\nscore = \"brier\"\n\n[[scores]]\nscore = \"ece\"\nbins = {{ count = 0 }}\n");
    let config = write_config(dir.path(), &body);
    let o = calagg(&["--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("score request #2 (ece)"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = "seed = 1\n[[experiments]]\nkind = \"axioms\"\nagglomerator = { kind = \"mean\" }\naxioms = [\"A1\"]\ntrials = 10\n";
    let config = write_config(dir.path(), body);
    let o = calagg(&["--config", config.to_str().unwrap(), "--seed", "77"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["seed"], 77);
}

#[test]
fn list_scores_prints_catalog() {
    let o = calagg(&["--list-scores"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["ece", "mlce", "superquantile_dev", "knn", "cvar_mixture"] {
        assert!(text.contains(name), "{name}");
    }
}
