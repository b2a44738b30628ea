//! Compiling and running candidate programs against test cases, and the
//! five-way verdict that comes out of it.
//!
//! Every evaluation gets a fresh temporary workdir. The workdir path is
//! replaced by `<workdir>` in all captured diagnostics, so verdicts are
//! byte-identical across runs.

mod compare;
mod toolchain;

pub use compare::{compare_output, normalize, ComparePolicy};
pub use toolchain::{java_names, probe, provenance, JavaNames, ProbeInfo, Toolchain, ToolchainSet, TOOLCHAINS_ENV};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::TestCase;
use crate::lang::Language;
use crate::process::{self, Exit, ProcessSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("toolchain missing: `{probe}` failed")]
    ToolchainMissing { probe: String },
    #[error("sandbox failure: {0}")]
    SandboxFailure(String),
    #[error("toolchain config: {0}")]
    ToolchainConfig(String),
    #[error("no test cases to run")]
    NoTests,
}

fn secs(d: f64) -> Duration {
    Duration::from_secs_f64(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    /// Seconds.
    pub compile_timeout: f64,
    /// Seconds; exceeding it means the run did not terminate.
    pub run_timeout_per_test: f64,
    pub max_output_bytes: usize,
    pub max_processes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            compile_timeout: 60.0,
            run_timeout_per_test: 10.0,
            max_output_bytes: 1 << 20,
            max_processes: 4096,
        }
    }
}

impl Limits {
    pub fn with_run_timeout(mut self, seconds: f64) -> Self {
        self.run_timeout_per_test = seconds;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.compile_timeout) || !pos(self.run_timeout_per_test) || self.max_output_bytes == 0 || self.max_processes == 0 {
            return Err(format!("all limits must be positive: {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    CompilationError,
    RuntimeError,
    FunctionalError,
    NonTerminating,
}

impl Outcome {
    /// Row/column order used by every table.
    pub const ALL: [Outcome; 5] = [
        Outcome::Success,
        Outcome::CompilationError,
        Outcome::RuntimeError,
        Outcome::FunctionalError,
        Outcome::NonTerminating,
    ];
    pub const FAILURES: [Outcome; 4] = [
        Outcome::CompilationError,
        Outcome::RuntimeError,
        Outcome::FunctionalError,
        Outcome::NonTerminating,
    ];

    /// Partial-progress rank for picking the best repair candidate; higher is better.
    pub fn rank(self) -> u8 {
        match self {
            Outcome::Success => 4,
            Outcome::FunctionalError => 3,
            Outcome::RuntimeError => 2,
            Outcome::NonTerminating => 1,
            Outcome::CompilationError => 0,
        }
    }

    pub fn index(self) -> usize {
        Outcome::ALL.iter().position(|o| *o == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "Success",
            Outcome::CompilationError => "CompilationError",
            Outcome::RuntimeError => "RuntimeError",
            Outcome::FunctionalError => "FunctionalError",
            Outcome::NonTerminating => "NonTerminating",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown outcome `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Passed,
    WrongOutput,
    Crashed,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub test_id: String,
    pub status: RunStatus,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompileResult {
    Ok { log: String },
    Failed { log: String },
    TimedOut { log: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Compile,
    Run,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstFailure {
    pub test_id: Option<String>,
    pub stage: Stage,
    pub diagnostic: String,
    #[serde(default)]
    pub expected: Option<String>,
    #[serde(default)]
    pub actual: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestStatus {
    pub test_id: String,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub tests_passed: usize,
    pub tests_total: usize,
    /// For failures, the first test (manifest order) whose status produced
    /// the outcome; for compilation errors, the compiler log.
    pub first_failure: Option<FirstFailure>,
    pub compile_log: String,
    /// Tests actually run, in order; tests skipped after repeated timeouts
    /// are absent.
    pub results: Vec<TestStatus>,
}

impl Verdict {
    pub fn compilation_error(tests_total: usize, log: String) -> Self {
        Verdict {
            outcome: Outcome::CompilationError,
            tests_passed: 0,
            tests_total,
            first_failure: Some(FirstFailure {
                test_id: None,
                stage: Stage::Compile,
                diagnostic: log.clone(),
                expected: None,
                actual: None,
            }),
            compile_log: log,
            results: Vec::new(),
        }
    }

    pub fn diagnostic(&self) -> &str {
        self.first_failure.as_ref().map_or("", |f| f.diagnostic.as_str())
    }

    /// Ordering key for candidate selection: outcome rank, then passed tests.
    pub fn progress(&self) -> (u8, usize) {
        (self.outcome.rank(), self.tests_passed)
    }
}

const EXCERPT_HEAD: usize = 2048;
const EXCERPT_TAIL: usize = 6144;

/// Keeps the start and the end of long text; tracebacks put the cause last.
pub fn excerpt(text: &str) -> String {
    if text.len() <= EXCERPT_HEAD + EXCERPT_TAIL {
        return text.to_string();
    }
    let mut h = EXCERPT_HEAD;
    while !text.is_char_boundary(h) {
        h -= 1;
    }
    let mut t = text.len() - EXCERPT_TAIL;
    while !text.is_char_boundary(t) {
        t += 1;
    }
    format!("{}\n...\n{}", &text[..h], &text[t..])
}

/// Files and placeholder values for one program in one workdir.
#[derive(Debug, Clone)]
pub struct Layout {
    pub workdir: PathBuf,
    pub src: PathBuf,
    pub out: PathBuf,
    pub class: String,
    pub main: String,
}

impl Layout {
    pub fn new(code: &str, lang: Language, tc: &Toolchain, workdir: &Path) -> Layout {
        let names = if lang == Language::Java {
            java_names(code)
        } else {
            JavaNames {
                file_class: "Main".into(),
                main_class: "Main".into(),
            }
        };
        let file = tc.source_file.replace("{class}", &names.file_class);
        Layout {
            workdir: workdir.to_path_buf(),
            src: workdir.join(file),
            out: workdir.join("prog"),
            class: names.file_class,
            main: names.main_class,
        }
    }

    fn expand(&self, template: &[String]) -> Vec<String> {
        template
            .iter()
            .map(|a| {
                a.replace("{src}", &self.src.to_string_lossy())
                    .replace("{out}", &self.out.to_string_lossy())
                    .replace("{workdir}", &self.workdir.to_string_lossy())
                    .replace("{class}", &self.class)
                    .replace("{main}", &self.main)
            })
            .collect()
    }

    /// Replaces the workdir path in tool output with `<workdir>`.
    fn scrub(&self, text: &str) -> String {
        let mut s = text.to_string();
        let mut paths = vec![self.workdir.to_string_lossy().into_owned()];
        if let Ok(c) = self.workdir.canonicalize() {
            paths.push(c.to_string_lossy().into_owned());
        }
        paths.sort_by_key(|p| std::cmp::Reverse(p.len()));
        for p in paths {
            if !p.is_empty() {
                s = s.replace(&p, "<workdir>");
            }
        }
        s
    }

    fn spec(&self, template: &[String], stdin: Vec<u8>, timeout: Duration, limits: &Limits) -> ProcessSpec {
        let mut ps = ProcessSpec::new(self.expand(template), timeout);
        ps.cwd = Some(self.workdir.clone());
        ps.env = vec![
            ("LC_ALL".into(), "C".into()),
            ("PYTHONHASHSEED".into(), "0".into()),
            ("PYTHONDONTWRITEBYTECODE".into(), "1".into()),
        ];
        ps.stdin = stdin;
        ps.max_output = limits.max_output_bytes;
        ps
    }
}

fn joined_log(layout: &Layout, stdout: &[u8], stderr: &[u8]) -> String {
    let mut log = String::from_utf8_lossy(stdout).into_owned();
    let err = String::from_utf8_lossy(stderr);
    if !log.is_empty() && !err.is_empty() && !log.ends_with('\n') {
        log.push('\n');
    }
    log.push_str(&err);
    layout.scrub(&log)
}

/// Writes the source into the layout and runs the compile (or syntax-check)
/// step, if the toolchain has one.
pub fn compile(code: &str, tc: &Toolchain, layout: &Layout, limits: &Limits) -> Result<CompileResult, ExecError> {
    probe(tc)?;
    if let Some(parent) = layout.src.parent() {
        std::fs::create_dir_all(parent).map_err(|e| ExecError::SandboxFailure(e.to_string()))?;
    }
    std::fs::write(&layout.src, code).map_err(|e| ExecError::SandboxFailure(format!("write source: {e}")))?;
    let Some(cmd) = tc.compile.as_ref().or(tc.syntax_check.as_ref()) else {
        return Ok(CompileResult::Ok { log: String::new() });
    };
    let ps = layout.spec(cmd, Vec::new(), secs(limits.compile_timeout), limits);
    let out = process::run(&ps).map_err(|_| ExecError::ToolchainMissing { probe: tc.probe.join(" ") })?;
    let log = joined_log(layout, &out.stdout, &out.stderr);
    Ok(match out.exit {
        Exit::Code(0) => CompileResult::Ok { log },
        Exit::TimedOut => CompileResult::TimedOut {
            log: format!("compilation timed out after {}s\n{log}", limits.compile_timeout),
        },
        _ => CompileResult::Failed { log },
    })
}

pub fn run_test(tc: &Toolchain, layout: &Layout, test: &TestCase, limits: &Limits, policy: ComparePolicy) -> Result<RunResult, ExecError> {
    let mut ps = layout.spec(&tc.run, test.stdin.clone(), secs(limits.run_timeout_per_test), limits);
    ps.max_processes = Some(limits.max_processes);
    let out = process::run(&ps).map_err(|e| ExecError::SandboxFailure(format!("spawn {:?}: {e}", ps.argv)))?;
    let (status, exit_code, signal) = match out.exit {
        Exit::TimedOut => (RunStatus::TimedOut, None, None),
        Exit::Signal(s) => (RunStatus::Crashed, None, Some(s)),
        Exit::Code(c) if c != 0 => (RunStatus::Crashed, Some(c), None),
        Exit::Code(c) => {
            let ok = compare_output(&out.stdout, &test.expected_stdout, policy);
            (if ok { RunStatus::Passed } else { RunStatus::WrongOutput }, Some(c), None)
        }
    };
    Ok(RunResult {
        test_id: test.id.clone(),
        status,
        exit_code,
        signal,
        stdout: out.stdout,
        stderr: layout.scrub(&String::from_utf8_lossy(&out.stderr)).into_bytes(),
        wall_ms: out.wall.as_millis() as u64,
    })
}

fn outcome_of(results: &[RunResult]) -> Outcome {
    let any = |s: RunStatus| results.iter().any(|r| r.status == s);
    if any(RunStatus::TimedOut) {
        Outcome::NonTerminating
    } else if any(RunStatus::Crashed) {
        Outcome::RuntimeError
    } else if any(RunStatus::WrongOutput) {
        Outcome::FunctionalError
    } else {
        Outcome::Success
    }
}

fn failure_for(r: &RunResult, test: &TestCase, limits: &Limits) -> FirstFailure {
    let stderr = String::from_utf8_lossy(&r.stderr);
    let (diagnostic, expected, actual) = match r.status {
        RunStatus::TimedOut => (format!("timed out after {}s", limits.run_timeout_per_test), None, None),
        RunStatus::Crashed => {
            let head = match (r.exit_code, r.signal) {
                (Some(c), _) => format!("exit code {c}"),
                (None, Some(s)) => format!("killed by signal {s}"),
                _ => "crashed".to_string(),
            };
            (format!("{head}\n{}", excerpt(&stderr)), None, None)
        }
        _ => {
            let exp = normalize(&test.expected_stdout);
            let act = normalize(&r.stdout);
            (
                "output differs from expected".to_string(),
                Some(excerpt(&exp)),
                Some(excerpt(&act)),
            )
        }
    };
    FirstFailure {
        test_id: Some(r.test_id.clone()),
        stage: Stage::Run,
        diagnostic,
        expected,
        actual,
    }
}

/// Evaluation context: toolchains, limits, comparison policy and where
/// scratch workdirs are created.
#[derive(Debug, Clone)]
pub struct Executor {
    pub toolchains: ToolchainSet,
    pub limits: Limits,
    pub policy: ComparePolicy,
    pub scratch_root: Option<PathBuf>,
}

/// Number of timeouts after which the remaining tests are skipped.
pub const TIMEOUT_SHORT_CIRCUIT: usize = 2;

impl Executor {
    pub fn new(toolchains: ToolchainSet, limits: Limits, policy: ComparePolicy) -> Self {
        Executor {
            toolchains,
            limits,
            policy,
            scratch_root: None,
        }
    }

    pub fn check_toolchain(&self, lang: Language) -> Result<ProbeInfo, ExecError> {
        probe(self.toolchains.get(lang))
    }

    fn workdir(&self) -> Result<tempfile::TempDir, ExecError> {
        let b = {
            let mut b = tempfile::Builder::new();
            b.prefix("tj-");
            b
        };
        match &self.scratch_root {
            Some(root) => b.tempdir_in(root),
            None => b.tempdir(),
        }
        .map_err(|e| ExecError::SandboxFailure(format!("create workdir: {e}")))
    }

    /// Compiles once, then runs every test in order. A timeout anywhere makes
    /// the outcome NonTerminating, else a crash makes it RuntimeError, else
    /// a mismatch makes it FunctionalError. After the second timeout the
    /// remaining tests are skipped and count as not passed.
    pub fn evaluate(&self, code: &str, lang: Language, tests: &[TestCase]) -> Result<Verdict, ExecError> {
        if tests.is_empty() {
            return Err(ExecError::NoTests);
        }
        let tc = self.toolchains.get(lang);
        probe(tc)?;
        if code.trim().is_empty() {
            return Ok(Verdict::compilation_error(tests.len(), "empty program".into()));
        }
        let dir = self.workdir()?;
        let layout = Layout::new(code, lang, tc, dir.path());
        let compile_log = match compile(code, tc, &layout, &self.limits)? {
            CompileResult::Ok { log } => log,
            CompileResult::Failed { log } | CompileResult::TimedOut { log } => {
                let log = if log.trim().is_empty() { "compilation failed".to_string() } else { log };
                return Ok(Verdict::compilation_error(tests.len(), log));
            }
        };
        let mut runs: Vec<(usize, RunResult)> = Vec::new();
        let mut timeouts = 0;
        for (i, test) in tests.iter().enumerate() {
            let r = run_test(tc, &layout, test, &self.limits, self.policy)?;
            if r.status == RunStatus::TimedOut {
                timeouts += 1;
            }
            runs.push((i, r));
            if timeouts >= TIMEOUT_SHORT_CIRCUIT {
                break;
            }
        }
        let results: Vec<RunResult> = runs.iter().map(|(_, r)| r.clone()).collect();
        let outcome = outcome_of(&results);
        let wanted = match outcome {
            Outcome::NonTerminating => Some(RunStatus::TimedOut),
            Outcome::RuntimeError => Some(RunStatus::Crashed),
            Outcome::FunctionalError => Some(RunStatus::WrongOutput),
            _ => None,
        };
        let first_failure = wanted.and_then(|w| {
            runs.iter()
                .find(|(_, r)| r.status == w)
                .map(|(i, r)| failure_for(r, &tests[*i], &self.limits))
        });
        let tests_passed = results.iter().filter(|r| r.status == RunStatus::Passed).count();
        Ok(Verdict {
            outcome,
            tests_passed,
            tests_total: tests.len(),
            first_failure,
            compile_log,
            results: results
                .into_iter()
                .map(|r| TestStatus {
                    test_id: r.test_id,
                    status: r.status,
                })
                .collect(),
        })
    }
}

impl Default for Executor {
    fn default() -> Self {
        Executor::new(ToolchainSet::default(), Limits::default(), ComparePolicy::default())
    }
}

/// Evaluates with the default toolchains (or `TRANSJUDGE_TOOLCHAINS`).
pub fn evaluate(code: &str, target: Language, tests: &[TestCase], limits: Limits, policy: ComparePolicy) -> Result<Verdict, ExecError> {
    let exec = Executor::new(ToolchainSet::from_env()?, limits, policy);
    exec.evaluate(code, target, tests)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(id: &str, input: &str, expected: &str) -> TestCase {
        TestCase {
            id: id.into(),
            stdin: input.as_bytes().to_vec(),
            expected_stdout: expected.as_bytes().to_vec(),
        }
    }

    fn quick() -> Executor {
        Executor::new(ToolchainSet::default(), Limits::default().with_run_timeout(1.0), ComparePolicy::default())
    }

    #[test]
    fn python_outcomes() {
        let ex = quick();
        let tests = [t("a", "5\n", "5"), t("b", "7\n", "7")];
        let v = ex.evaluate("print(input())", Language::Python, &tests).unwrap();
        assert_eq!((v.outcome, v.tests_passed, v.tests_total), (Outcome::Success, 2, 2));
        assert!(v.first_failure.is_none());

        let v = ex.evaluate("print(7/2)", Language::Python, &[t("a", "", "3")]).unwrap();
        assert_eq!(v.outcome, Outcome::FunctionalError);
        let ff = v.first_failure.unwrap();
        assert_eq!(ff.actual.as_deref(), Some("3.5"));

        let v = ex.evaluate("def f(:\n  pass", Language::Python, &tests).unwrap();
        assert_eq!(v.outcome, Outcome::CompilationError);
        assert!(v.results.is_empty());
        assert!(v.compile_log.contains("SyntaxError"));
        assert!(v.compile_log.contains("<workdir>"), "{}", v.compile_log);

        let v = ex.evaluate("x = int(input())\nprint(1 // x)", Language::Python, &[t("a", "1", "1"), t("b", "0", "0")]).unwrap();
        assert_eq!((v.outcome, v.tests_passed), (Outcome::RuntimeError, 1));
        assert!(v.diagnostic().contains("ZeroDivisionError"));
    }

    #[test]
    fn timeouts_short_circuit() {
        let ex = quick();
        let tests: Vec<TestCase> = (0..5).map(|i| t(&i.to_string(), "", "")).collect();
        let v = ex.evaluate("while True:\n    pass\n", Language::Python, &tests).unwrap();
        assert_eq!(v.outcome, Outcome::NonTerminating);
        assert_eq!(v.results.len(), 2);
        assert_eq!(v.tests_passed, 0);
        assert_eq!(v.tests_total, 5);
    }

    #[test]
    fn precedence_prefers_timeout_over_crash_over_mismatch() {
        let ex = quick();
        let code = "s = input()\nif s == 'crash': raise SystemExit(3)\nif s == 'hang':\n    while True: pass\nprint(s)\n";
        let tests = [t("1", "crash", "crash"), t("2", "wrong", "right"), t("3", "hang", "hang"), t("4", "ok", "ok")];
        let v = ex.evaluate(code, Language::Python, &tests).unwrap();
        assert_eq!(v.outcome, Outcome::NonTerminating);
        assert_eq!(v.first_failure.unwrap().test_id.as_deref(), Some("3"));
        let v = ex.evaluate(code, Language::Python, &tests[..2]).unwrap();
        assert_eq!(v.outcome, Outcome::RuntimeError);
    }

    #[test]
    fn empty_code_and_no_tests() {
        let ex = quick();
        let v = ex.evaluate("  \n", Language::Python, &[t("a", "", "")]).unwrap();
        assert_eq!(v.outcome, Outcome::CompilationError);
        assert_eq!(v.diagnostic(), "empty program");
        assert_eq!(ex.evaluate("print(1)", Language::Python, &[]), Err(ExecError::NoTests));
    }

    #[test]
    fn outcome_names_round_trip() {
        for o in Outcome::ALL {
            assert_eq!(o.name().parse::<Outcome>().unwrap(), o);
            assert_eq!(serde_json::to_string(&o).unwrap(), format!("\"{}\"", o.name()));
        }
    }

    #[test]
    fn excerpt_keeps_both_ends() {
        let long = format!("{}MIDDLE{}", "a".repeat(5000), "z".repeat(7000));
        let e = excerpt(&long);
        assert!(e.starts_with("aaa") && e.ends_with("zzz") && !e.contains("MIDDLE"));
    }
}
