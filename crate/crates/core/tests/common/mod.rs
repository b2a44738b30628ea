#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::Deserialize;
use transjudge::corpus::TestCase;
use transjudge::exec::Outcome;
use transjudge::lang::Language;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn minicorpus() -> PathBuf {
    fixtures().join("minicorpus")
}

#[derive(Deserialize)]
struct OracleTest {
    id: String,
    stdin: String,
    expected: String,
}

#[derive(Deserialize)]
struct OracleEntry {
    id: String,
    lang: Language,
    tests: String,
    outcome: String,
    passed: usize,
}

#[derive(Deserialize)]
struct OracleDoc {
    tests: std::collections::BTreeMap<String, Vec<OracleTest>>,
    cases: Vec<OracleEntry>,
}

pub struct OracleCase {
    pub id: String,
    pub lang: Language,
    pub code: String,
    pub tests: Vec<TestCase>,
    pub outcome: Outcome,
    pub passed: usize,
}

/// Programs with known outcomes, one file each under fixtures/oracle.
pub fn oracle_cases() -> Vec<OracleCase> {
    let dir = fixtures().join("oracle");
    let doc: OracleDoc = serde_json::from_str(&std::fs::read_to_string(dir.join("cases.json")).unwrap()).unwrap();
    doc.cases
        .into_iter()
        .map(|c| {
            let file = dir.join(format!("{}.{}", c.id, c.lang.extension()));
            let tests = doc.tests[&c.tests]
                .iter()
                .map(|t| TestCase {
                    id: t.id.clone(),
                    stdin: t.stdin.clone().into_bytes(),
                    expected_stdout: t.expected.clone().into_bytes(),
                })
                .collect();
            OracleCase {
                code: std::fs::read_to_string(&file).unwrap_or_else(|e| panic!("{}: {e}", file.display())),
                id: c.id,
                lang: c.lang,
                tests,
                outcome: c.outcome.parse().unwrap(),
                passed: c.passed,
            }
        })
        .collect()
}

#[derive(Deserialize)]
pub struct ExtractionCase {
    pub name: String,
    pub target: Language,
    pub sentinel: Option<String>,
    pub raw: String,
    pub code: String,
    pub method: String,
    pub warning: Option<String>,
}

pub fn extraction_cases() -> Vec<ExtractionCase> {
    #[derive(Deserialize)]
    struct Doc {
        cases: Vec<ExtractionCase>,
    }
    let text = std::fs::read_to_string(fixtures().join("extraction/cases.json")).unwrap();
    serde_json::from_str::<Doc>(&text).unwrap().cases
}

/// Writes a run config for the mini-corpus into `dir`, answering from the
/// checked-in cassette, with results under `dir/run`.
pub fn mini_config(dir: &Path) -> PathBuf {
    let mc = minicorpus();
    let cfg = serde_json::json!({
        "manifest": mc.join("manifest.json"),
        "targets": {"cpp": ["java", "python"], "python": ["cpp"], "java": ["python"]},
        "backends": [{"name": "canned-v1", "kind": "replay", "cassette": mc.join("cassette.jsonl")}],
        "limits": {"run_timeout_per_test": 2.0},
        "out_dir": dir.join("run"),
    });
    let p = dir.join("run.json");
    std::fs::write(&p, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    p
}

/// Task id → outcome of the canned translation before repair.
pub const MINI_BEFORE: [(&str, Outcome); 6] = [
    ("cases.forelse.python-cpp", Outcome::CompilationError),
    ("cases.inputsplit.cpp-java", Outcome::Success),
    ("cases.inputsplit.cpp-python", Outcome::RuntimeError),
    ("cases.intdiv.java-python", Outcome::FunctionalError),
    ("cases.scanner.cpp-java", Outcome::CompilationError),
    ("cases.scanner.cpp-python", Outcome::Success),
];

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transjudge"))
}

pub fn cli(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn cli_ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(
        out.status.success(),
        "transjudge {args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// translate (replay), evaluate, classify and repair over the mini-corpus.
pub fn run_mini_pipeline(config: &Path) {
    let c = config.to_str().unwrap();
    for args in [
        vec!["translate", "--config", c],
        vec!["evaluate", "--config", c],
        vec!["classify", "--config", c],
        vec!["repair", "--config", c, "--chain", "rules"],
    ] {
        cli_ok(&args);
    }
}
