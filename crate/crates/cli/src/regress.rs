//! Golden-data regression: rerun each fixture's config and compare the
//! outputs with the checked-in files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::{self, Study};
use crate::run::run_study;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Byte-identical files.
    #[default]
    Exact,
    /// Same layout, numbers within `abs_tol + rel_tol·|expected|`.
    Numeric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub study: Study,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default)]
    pub abs_tol: f64,
    #[serde(default)]
    pub rel_tol: f64,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug)]
pub struct FixtureResult {
    pub name: String,
    pub description: String,
    pub diffs: Vec<String>,
}

impl FixtureResult {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty()
    }
}

#[derive(Debug)]
pub struct HarnessError(pub String);

impl std::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "regression harness: {}", self.0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RegressOptions {
    /// Rewrite the expected files from the current build.
    pub bless: bool,
    /// Stand-in for a changed default `lambda_unit`: inserted wherever a
    /// config leaves it to the default.
    pub perturb_lambda_unit: Option<f64>,
    pub only: Vec<String>,
}

fn harness(msg: impl Into<String>) -> HarnessError {
    HarnessError(msg.into())
}

/// Fixture directories under `root`, sorted by name.
pub fn discover(root: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let entries = std::fs::read_dir(root).map_err(|e| harness(format!("cannot list {}: {e}", root.display())))?;
    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(harness(format!("no fixtures under {}", root.display())));
    }
    Ok(dirs)
}

fn perturb(text: &str, lambda_unit: f64) -> Result<String, HarnessError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| harness(e.to_string()))?;
    let set_default = |t: &mut toml::Table| {
        t.entry("lambda_unit").or_insert(toml::Value::Float(lambda_unit));
    };
    if let Some(toml::Value::Table(d)) = table.get_mut("dynamics") {
        set_default(d);
    }
    if let Some(toml::Value::Table(f)) = table.get_mut("fit") {
        if let Some(toml::Value::Table(h)) = f.get_mut("hull") {
            set_default(h);
        }
    }
    toml::to_string(&table).map_err(|e| harness(e.to_string()))
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| harness(format!("missing fixture file {}: {e}", path.display())))
}

pub fn run_fixture(dir: &Path, options: &RegressOptions) -> Result<FixtureResult, HarnessError> {
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let spec: FixtureSpec = toml::from_str(&read(&dir.join("fixture.toml"))?)
        .map_err(|e| harness(format!("{}: {e}", dir.join("fixture.toml").display())))?;
    let config_path = dir.join("config.toml");
    let mut text = read(&config_path)?;
    if let Some(l) = options.perturb_lambda_unit {
        text = perturb(&text, l)?;
    }
    let source = config_path.display().to_string();
    let mut cfg = config::parse(&text, &source, &[]).map_err(|e| harness(e.to_string()))?;
    cfg.resolve(spec.study, None, &source).map_err(|e| harness(e.to_string()))?;
    let output = run_study(&cfg).map_err(|e| harness(format!("{name}: {e}")))?;

    let expected_dir = dir.join("expected");
    if options.bless {
        if expected_dir.exists() {
            std::fs::remove_dir_all(&expected_dir).map_err(|e| harness(e.to_string()))?;
        }
        std::fs::create_dir_all(&expected_dir).map_err(|e| harness(e.to_string()))?;
        for (file, contents) in &output.files {
            std::fs::write(expected_dir.join(file), contents).map_err(|e| harness(e.to_string()))?;
        }
        return Ok(FixtureResult { name, description: spec.description, diffs: Vec::new() });
    }

    let mut expected: Vec<PathBuf> = std::fs::read_dir(&expected_dir)
        .map_err(|e| harness(format!("missing {}: {e}", expected_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    expected.sort();
    if expected.is_empty() {
        return Err(harness(format!("{} is empty", expected_dir.display())));
    }
    let mut diffs = Vec::new();
    for path in &expected {
        let file = path.file_name().unwrap().to_string_lossy().into_owned();
        let want = read(path)?;
        match output.files.iter().find(|(f, _)| *f == file) {
            None => diffs.push(format!("{file}: not produced")),
            Some((_, got)) => {
                let d = match spec.policy {
                    Policy::Exact => compare_exact(&want, got),
                    Policy::Numeric if file.ends_with(".json") => compare_json(&want, got, spec.abs_tol, spec.rel_tol),
                    Policy::Numeric => compare_csv(&want, got, spec.abs_tol, spec.rel_tol),
                };
                diffs.extend(d.into_iter().map(|m| format!("{file}: {m}")));
            }
        }
    }
    for (file, _) in &output.files {
        if !expected.iter().any(|p| p.file_name().is_some_and(|n| n.to_string_lossy() == file.as_str())) {
            diffs.push(format!("{file}: produced but not in expected/"));
        }
    }
    Ok(FixtureResult { name, description: spec.description, diffs })
}

fn compare_exact(want: &str, got: &str) -> Vec<String> {
    if want == got {
        return Vec::new();
    }
    let line = want.lines().zip(got.lines()).position(|(a, b)| a != b);
    match line {
        Some(i) => vec![format!(
            "line {} differs\n      expected: {}\n      got:      {}",
            i + 1,
            want.lines().nth(i).unwrap_or(""),
            got.lines().nth(i).unwrap_or("")
        )],
        None => vec![format!("length differs ({} vs {} lines)", want.lines().count(), got.lines().count())],
    }
}

fn close(want: f64, got: f64, abs_tol: f64, rel_tol: f64) -> bool {
    if want.is_nan() || got.is_nan() {
        return want.is_nan() && got.is_nan();
    }
    (want - got).abs() <= abs_tol + rel_tol * want.abs()
}

fn compare_csv(want: &str, got: &str, abs_tol: f64, rel_tol: f64) -> Vec<String> {
    let (w, g): (Vec<&str>, Vec<&str>) = (want.lines().collect(), got.lines().collect());
    if w.len() != g.len() {
        return vec![format!("{} rows expected, {} produced", w.len(), g.len())];
    }
    let header: Vec<&str> = w.first().map(|h| h.split(',').collect()).unwrap_or_default();
    let mut diffs = Vec::new();
    for (i, (a, b)) in w.iter().zip(&g).enumerate() {
        let (ca, cb): (Vec<&str>, Vec<&str>) = (a.split(',').collect(), b.split(',').collect());
        if ca.len() != cb.len() {
            diffs.push(format!("line {}: {} vs {} cells", i + 1, ca.len(), cb.len()));
            continue;
        }
        for (k, (x, y)) in ca.iter().zip(&cb).enumerate() {
            let ok = match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(p), Ok(q)) => close(p, q, abs_tol, rel_tol),
                _ => x == y,
            };
            if !ok {
                let col = header.get(k).copied().unwrap_or("?");
                diffs.push(format!("line {}, column {col}: expected {x}, got {y}", i + 1));
            }
        }
    }
    diffs
}

fn compare_values(path: &str, a: &serde_json::Value, b: &serde_json::Value, abs: f64, rel: f64, out: &mut Vec<String>) {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !close(x, y, abs, rel) {
                out.push(format!("{path}: expected {x}, got {y}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
                return;
            }
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                compare_values(&format!("{path}[{i}]"), p, q, abs, rel, out);
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for (k, v) in x {
                match y.get(k) {
                    Some(w) => compare_values(&format!("{path}.{k}"), v, w, abs, rel, out),
                    None => out.push(format!("{path}.{k}: missing")),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                out.push(format!("{path}.{k}: unexpected"));
            }
        }
        (x, y) if x == y => {}
        (x, y) => out.push(format!("{path}: expected {x}, got {y}")),
    }
}

fn compare_json(want: &str, got: &str, abs_tol: f64, rel_tol: f64) -> Vec<String> {
    let parse = |s: &str| serde_json::from_str::<serde_json::Value>(s);
    match (parse(want), parse(got)) {
        (Ok(a), Ok(b)) => {
            let mut out = Vec::new();
            compare_values("$", &a, &b, abs_tol, rel_tol, &mut out);
            out
        }
        (Err(e), _) | (_, Err(e)) => vec![format!("not JSON: {e}")],
    }
}

/// Runs every fixture, returning results in name order.
pub fn run_all(root: &Path, options: &RegressOptions) -> Result<Vec<FixtureResult>, HarnessError> {
    let mut results = Vec::new();
    for dir in discover(root)? {
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        if !options.only.is_empty() && !options.only.contains(&name) {
            continue;
        }
        results.push(run_fixture(&dir, options)?);
    }
    Ok(results)
}

pub fn render(results: &[FixtureResult]) -> String {
    let mut s = String::new();
    for r in results {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        if r.description.is_empty() {
            let _ = writeln!(s, "{verdict} {}", r.name);
        } else {
            let _ = writeln!(s, "{verdict} {} ({})", r.name, r.description);
        }
        for d in r.diffs.iter().take(10) {
            let _ = writeln!(s, "    {d}");
        }
        if r.diffs.len() > 10 {
            let _ = writeln!(s, "    ... {} more", r.diffs.len() - 10);
        }
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(s, "{} passed, {failed} failed", results.len() - failed);
    s
}
