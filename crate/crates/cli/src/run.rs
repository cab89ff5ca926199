//! Run a resolved study and lay its outputs out on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use pqec_core::sim::{run_channel_fit_study, run_dynamics_study, run_extract_study, run_resource_study};

use crate::config::{Config, Study};

/// Files of one study run, in write order, plus any compile failures.
#[derive(Debug)]
pub struct StudyOutput {
    pub files: Vec<(String, String)>,
    pub failures: Vec<serde_json::Value>,
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn run_study(config: &Config) -> pqec_core::Result<StudyOutput> {
    let study = config.study.expect("resolved config names its study");
    let mut files = Vec::new();
    let mut failures = Vec::new();
    match study {
        Study::Extract => {
            let spec = config.extract.as_ref().expect("resolved");
            let report = run_extract_study(spec)?;
            files.push(("pauli_probs.csv".into(), report.csv()?));
            files.push(("logical_channels.json".into(), json(&report.channels)));
            for ch in &report.channels {
                let name = format!("channel_{}.json", ch.policy.label());
                files.push((name, ch.channel()?.to_json() + "\n"));
            }
        }
        Study::Fit => {
            let spec = config.fit.as_ref().expect("resolved");
            let report = run_channel_fit_study(spec)?;
            files.push(("fit_sweep.csv".into(), report.sweep_csv()?));
            files.push(("fit_mismatch.csv".into(), report.mismatch_csv()?));
            files.push(("weights.json".into(), json(&report.weights)));
            if spec.hull.is_some() {
                files.push(("hull.csv".into(), report.hull_csv()?));
            }
            failures.extend(report.failures().map(|p| serde_json::to_value(p).expect("plain data")));
        }
        Study::Dynamics => {
            let spec = config.dynamics.as_ref().expect("resolved");
            let report = run_dynamics_study(spec)?;
            files.push(("trajectories.csv".into(), report.csv()?));
            files.push(("summary.json".into(), json(&report)));
            for t in &report.strategies {
                if let Some(ch) = &t.channel {
                    files.push((format!("channel_{}.json", t.label), ch.to_choi().to_json() + "\n"));
                }
            }
            failures.extend(report.failures().map(|t| serde_json::to_value(t).expect("plain data")));
        }
        Study::Resources => {
            let spec = config.resources.as_ref().expect("resolved");
            let report = run_resource_study(spec)?;
            files.push(("resources.csv".into(), report.csv()?));
            files.push(("resources_detail.csv".into(), report.detail_csv()?));
        }
    }
    Ok(StudyOutput { files, failures })
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub study: &'a str,
    pub label: &'a str,
    pub version: &'a str,
    pub status: &'a str,
    pub config: &'a Config,
    /// SHA-256 of every file written next to the manifest.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Write `<root>/<study>/<label>/` and its manifest; returns the directory.
pub fn write_outputs(config: &Config, root: &Path, label: &str, output: &StudyOutput) -> std::io::Result<PathBuf> {
    let study = config.study.expect("resolved").name();
    let dir = root.join(study).join(label);
    std::fs::create_dir_all(&dir)?;
    let mut digests = BTreeMap::new();
    for (name, contents) in &output.files {
        std::fs::write(dir.join(name), contents)?;
        digests.insert(name.clone(), sha256_hex(contents.as_bytes()));
    }
    if !output.failures.is_empty() {
        let contents = json(&output.failures);
        std::fs::write(dir.join("compile_failures.json"), &contents)?;
        digests.insert("compile_failures.json".into(), sha256_hex(contents.as_bytes()));
    }
    let manifest = Manifest {
        study,
        label,
        version: env!("CARGO_PKG_VERSION"),
        status: if output.failures.is_empty() { "ok" } else { "compile_failure" },
        config,
        files: digests,
    };
    std::fs::write(dir.join("manifest.json"), json(&manifest))?;
    Ok(dir)
}
