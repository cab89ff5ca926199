use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqec")).args(args).output().expect("pqec runs")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_config(study: &str, config: &str, out: &Path) -> Output {
    let cfg = write(out, &format!("{study}.toml"), config);
    pqec(&[study, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn extract_probabilities_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(
        "extract",
        "[extract]\ndistance = 3\nnoise = { kind = \"depolarizing\", p_phys = 0.01 }\n",
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("extract/default");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("logical_channels.json")).unwrap()).unwrap();
    let probs = &doc[0]["pauli_probs"];
    let total: f64 = ["I", "X", "Y", "Z"].iter().map(|k| probs[k].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert!(manifest["files"]["pauli_probs.csv"].as_str().unwrap().len() == 64);
}

#[test]
fn fit_recovers_dephasing_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[fit]\ngamma_tau = [0.08]\nmismatch = [1.0]\n\
                  strategy_b = { distance = 3, noise = { kind = \"dephasing_only\", p_phys = 0.01 } }\n";
    let o = run_config("fit", config, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("fit/default/fit_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let want = (1.0 - (-0.08f64).exp()) / 2.0;
    let mut seen = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[col("strategy")] == "B" {
            let p_z: f64 = cells[col("p_z")].parse().unwrap();
            assert!((p_z - want).abs() < 1e-8, "{p_z} vs {want}");
            seen += 1;
        }
    }
    assert_eq!(seen, 1);
}

#[test]
fn resources_csv_header() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("resources", "[resources]\n", tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("resources/default/resources.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("scenario,d_A,d_B,footprint_A,footprint_B,ratio"));
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn unknown_key_is_a_config_error_with_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("fit", "study = \"fit\"\n[fit]\ngama_tau = [0.1]\n", tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("gama_tau"), "{err}");
    assert!(!tmp.path().join("fit").exists());
}

#[test]
fn override_and_label_place_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "r.toml", "label = \"from-file\"\n[resources]\n");
    let out = tmp.path().to_str().unwrap();
    let o = pqec(&["resources", "--config", cfg.to_str().unwrap(), "--out", out, "--override", "resources.m=10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(tmp.path().join("resources/from-file/manifest.json")).unwrap();
    assert!(manifest.contains("\"m\": 10"));
    let o = pqec(&["resources", "--config", cfg.to_str().unwrap(), "--out", out, "--label", "cli"]);
    assert!(o.status.success());
    assert!(tmp.path().join("resources/cli/resources.csv").exists());
    let o = pqec(&["resources", "--config", cfg.to_str().unwrap(), "--out", out, "--override", "resources.zeta=2.0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

const IDENTITY: &str = r#"{"dim_in": 2, "dim_out": 2, "representation": "kraus",
    "real": [[1.0, 0.0, 0.0, 1.0]], "imag": [[0.0, 0.0, 0.0, 0.0]]}"#;

#[test]
fn validate_channel_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write(tmp.path(), "id.json", IDENTITY);
    let o = pqec(&["validate-channel", ok.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("min_choi_eigenvalue") && text.contains("ptm_first_row") && text.contains("CPTP"));

    // identity Choi with a −0.01 entry on an otherwise empty diagonal slot
    let mut real = vec![0.0; 16];
    real[0] = 1.0;
    real[3] = 1.0;
    real[12] = 1.0;
    real[15] = 1.0;
    real[5] = -0.01;
    let doc = serde_json::json!({"dim_in": 2, "dim_out": 2, "representation": "choi", "real": [real], "imag": [vec![0.0; 16]]});
    let bad = write(tmp.path(), "bad.json", &doc.to_string());
    let o = pqec(&["validate-channel", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("NOT CPTP"));

    let junk = write(tmp.path(), "junk.json", "{\"dim_in\": 2}");
    assert_eq!(pqec(&["validate-channel", junk.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exported_channels_are_cptp() {
    let mut checked = 0;
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let expected = entry.unwrap().path().join("expected");
        for file in std::fs::read_dir(&expected).unwrap() {
            let path = file.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if name.starts_with("channel_") {
                let o = pqec(&["validate-channel", path.to_str().unwrap()]);
                assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stdout));
                checked += 1;
            }
        }
    }
    assert!(checked >= 5, "only {checked} channel files");
}

#[test]
fn regression_fixtures_pass() {
    let o = pqec(&["regress", "--fixtures", fixtures().to_str().unwrap()]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}{}", stderr(&o));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{text}");
}

#[test]
fn lambda_unit_change_breaks_dependent_fixtures() {
    let o = pqec(&["regress", "--fixtures", fixtures().to_str().unwrap(), "--perturb-lambda-unit", "0.35"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout);
    let mut failed: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("FAIL "))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    failed.sort();
    assert_eq!(failed, ["dynamics-short", "fit-ad-hull"]);
}

#[test]
fn missing_expected_files_are_harness_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("broken");
    std::fs::create_dir(&dir).unwrap();
    write(&dir, "fixture.toml", "study = \"resources\"\n");
    write(&dir, "config.toml", "[resources]\n");
    let o = pqec(&["regress", "--fixtures", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = "seed = 5\n[extract]\ndistance = 3\nnoise = { kind = \"depolarizing\", p_phys = 0.02 }\nsamples = 5000\n";
    for dir in [a.path(), b.path()] {
        assert!(run_config("extract", config, dir).status.success());
    }
    let read = |d: &Path| std::fs::read(d.join("extract/default/manifest.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let o = pqec(&[
        "extract",
        "--config",
        a.path().join("extract.toml").to_str().unwrap(),
        "--out",
        a.path().to_str().unwrap(),
        "--label",
        "other-seed",
        "--seed",
        "6",
    ]);
    assert!(o.status.success());
    let other = std::fs::read(a.path().join("extract/other-seed/pauli_probs.csv")).unwrap();
    assert_ne!(other, std::fs::read(a.path().join("extract/default/pauli_probs.csv")).unwrap());
}
