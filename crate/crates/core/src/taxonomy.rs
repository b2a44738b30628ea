//! Root-cause categories for failed translations: an ordered heuristic
//! classifier plus a manual label channel that always wins.
//!
//! Heuristic labels carry the id of the rule that fired (`taxonomy/v1/...`),
//! so an auditor can see why and relabel.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::braces::syntax_markers;
use crate::analysis::detect::{detect_language, duplicate_line_fraction};
use crate::analysis::diagnostics::{has_input_parse_signature, mentions_unresolved, missing_modules, unresolved_symbols};
use crate::analysis::python::{int_division_sites, mutable_bound_loops};
use crate::analysis::symbols::std_import;
use crate::analysis::{control_flow, mask::mask};
use crate::exec::{Outcome, Verdict};
use crate::lang::Language;

pub const RULESET: &str = "taxonomy/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorCategory {
    SyntacticDifference,
    SemanticDifference,
    DependencyError,
    LogicError,
    DataRelatedError,
    ModelSpecificError,
    Other,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 7] = [
        ErrorCategory::SyntacticDifference,
        ErrorCategory::SemanticDifference,
        ErrorCategory::DependencyError,
        ErrorCategory::LogicError,
        ErrorCategory::DataRelatedError,
        ErrorCategory::ModelSpecificError,
        ErrorCategory::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::SyntacticDifference => "SyntacticDifference",
            ErrorCategory::SemanticDifference => "SemanticDifference",
            ErrorCategory::DependencyError => "DependencyError",
            ErrorCategory::LogicError => "LogicError",
            ErrorCategory::DataRelatedError => "DataRelatedError",
            ErrorCategory::ModelSpecificError => "ModelSpecificError",
            ErrorCategory::Other => "Other",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorCategory::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    Heuristic,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLabel {
    pub task_id: String,
    pub backend: String,
    pub category: ErrorCategory,
    pub source: LabelSource,
    pub evidence: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Fraction of duplicated lines above which output counts as degenerate.
    pub duplicate_threshold: f64,
    /// Shorter outputs are never called degenerate.
    pub duplicate_min_lines: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            duplicate_threshold: 0.5,
            duplicate_min_lines: 4,
        }
    }
}

pub struct ClassifyInput<'a> {
    pub verdict: &'a Verdict,
    pub translated_code: &'a str,
    pub source_code: &'a str,
    pub source_lang: Language,
    pub target: Language,
}

/// The category and the rule id that produced it.
pub type Classification = (ErrorCategory, String);

fn ev(rule: &str, detail: &str) -> String {
    if detail.is_empty() {
        format!("{RULESET}/{rule}")
    } else {
        format!("{RULESET}/{rule}: {detail}")
    }
}

fn model_specific(input: &ClassifyInput<'_>, cfg: &ClassifierConfig) -> Option<String> {
    let code = input.translated_code;
    if code.trim().is_empty() {
        return Some(ev("model-specific/empty-output", ""));
    }
    if let Some(lang) = detect_language(code) {
        if lang != input.target {
            return Some(ev("model-specific/wrong-language", lang.id()));
        }
    }
    let lines = code.lines().filter(|l| l.chars().any(char::is_alphanumeric)).count();
    let dup = duplicate_line_fraction(code);
    if lines >= cfg.duplicate_min_lines && dup > cfg.duplicate_threshold {
        return Some(ev("model-specific/duplicate-lines", &format!("{:.0}% duplicated", dup * 100.0)));
    }
    None
}

fn diagnostics_of(v: &Verdict) -> String {
    let mut d = v.compile_log.clone();
    if let Some(f) = &v.first_failure {
        if f.diagnostic != v.compile_log {
            d.push('\n');
            d.push_str(&f.diagnostic);
        }
    }
    d
}

fn dependency(input: &ClassifyInput<'_>, diag: &str) -> Option<String> {
    if !matches!(input.verdict.outcome, Outcome::CompilationError | Outcome::RuntimeError) {
        return None;
    }
    if let Some(m) = missing_modules(diag).first() {
        return Some(ev("dependency/module-not-found", m));
    }
    if !mentions_unresolved(diag) {
        return None;
    }
    unresolved_symbols(diag)
        .into_iter()
        .find(|s| std_import(input.target, s).is_some())
        .map(|s| ev("dependency/unresolved-standard-symbol", &s))
}

fn syntactic(input: &ClassifyInput<'_>) -> Option<String> {
    if input.verdict.outcome != Outcome::CompilationError {
        return None;
    }
    syntax_markers(input.translated_code, input.target)
        .first()
        .map(|m| ev("syntactic/foreign-construct", &format!("{} (line {})", m.marker, m.line)))
}

fn has_true_division(code: &str, lang: Language) -> bool {
    let m = mask(code, lang);
    let b = m.as_bytes();
    (0..b.len()).any(|i| {
        b[i] == b'/'
            && b.get(i + 1) != Some(&b'/')
            && b.get(i + 1) != Some(&b'=')
            && (i == 0 || b[i - 1] != b'/')
    })
}

fn semantic(input: &ClassifyInput<'_>) -> Option<String> {
    if input.verdict.outcome != Outcome::FunctionalError {
        return None;
    }
    if input.target == Language::Python {
        if input.source_lang.uses_braces() && !int_division_sites(input.translated_code).is_empty() {
            return Some(ev("semantic/int-division", "`/` between integers"));
        }
        if let Some(l) = mutable_bound_loops(input.translated_code).first() {
            return Some(ev("semantic/range-with-mutable-bound", &format!("line {}", l.header_line + 1)));
        }
    } else if input.source_lang == Language::Python
        && !int_division_sites(input.source_code).is_empty()
        && has_true_division(input.translated_code, input.target)
    {
        return Some(ev("semantic/int-division", "true division became integer division"));
    }
    None
}

fn first_token(s: &str) -> Option<&str> {
    s.split_whitespace().next()
}

fn data_related(input: &ClassifyInput<'_>, diag: &str) -> Option<String> {
    match input.verdict.outcome {
        Outcome::RuntimeError if has_input_parse_signature(diag) => Some(ev("data/input-parse", "")),
        Outcome::FunctionalError => {
            let f = input.verdict.first_failure.as_ref()?;
            let (exp, act) = (f.expected.as_deref()?, f.actual.as_deref()?);
            let et: Vec<&str> = exp.split_whitespace().collect();
            let at: Vec<&str> = act.split_whitespace().collect();
            if et == at {
                return Some(ev("data/output-layout", "same tokens, different whitespace"));
            }
            let (e0, a0) = (first_token(exp)?, first_token(act)?);
            if e0 != a0 {
                if let (Ok(x), Ok(y)) = (e0.parse::<f64>(), a0.parse::<f64>()) {
                    if x == y {
                        return Some(ev("data/output-format", &format!("`{a0}` printed for `{e0}`")));
                    }
                }
            }
            None
        }
        _ => None,
    }
}

fn logic(input: &ClassifyInput<'_>) -> Option<String> {
    if input.verdict.outcome != Outcome::FunctionalError {
        return None;
    }
    let s = control_flow(input.source_code, input.source_lang);
    let t = control_flow(input.translated_code, input.target);
    (s != t).then(|| {
        ev(
            "logic/control-flow-divergence",
            &format!("loops {}->{}, branches {}->{}", s.loops, t.loops, s.branches, t.branches),
        )
    })
}

/// First matching rule wins: model-specific, dependency, syntactic,
/// semantic, data-related, logic, other.
pub fn classify(input: &ClassifyInput<'_>, cfg: &ClassifierConfig) -> Classification {
    let diag = diagnostics_of(input.verdict);
    if let Some(e) = model_specific(input, cfg) {
        return (ErrorCategory::ModelSpecificError, e);
    }
    if let Some(e) = dependency(input, &diag) {
        return (ErrorCategory::DependencyError, e);
    }
    if let Some(e) = syntactic(input) {
        return (ErrorCategory::SyntacticDifference, e);
    }
    if let Some(e) = semantic(input) {
        return (ErrorCategory::SemanticDifference, e);
    }
    if let Some(e) = data_related(input, &diag) {
        return (ErrorCategory::DataRelatedError, e);
    }
    if let Some(e) = logic(input) {
        return (ErrorCategory::LogicError, e);
    }
    (ErrorCategory::Other, ev("other", ""))
}

pub fn heuristic_label(task_id: &str, backend: &str, input: &ClassifyInput<'_>, cfg: &ClassifierConfig) -> CategoryLabel {
    let (category, evidence) = classify(input, cfg);
    CategoryLabel {
        task_id: task_id.into(),
        backend: backend.into(),
        category,
        source: LabelSource::Heuristic,
        evidence,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("no labels")]
    EmptyInput,
    #[error("malformed label file: {0}")]
    MalformedLabelFile(String),
}

/// Share of each category; all seven are present.
pub fn distribution(labels: &[CategoryLabel]) -> Result<BTreeMap<ErrorCategory, f64>, TaxonomyError> {
    if labels.is_empty() {
        return Err(TaxonomyError::EmptyInput);
    }
    let mut counts: BTreeMap<ErrorCategory, usize> = ErrorCategory::ALL.into_iter().map(|c| (c, 0)).collect();
    for l in labels {
        *counts.get_mut(&l.category).unwrap() += 1;
    }
    let n = labels.len() as f64;
    Ok(counts.into_iter().map(|(c, k)| (c, k as f64 / n)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeResult {
    pub labels: Vec<CategoryLabel>,
    /// Manual rows naming tasks that are not part of this run.
    pub unknown_task_ids: Vec<String>,
}

#[derive(Deserialize)]
struct ManualRow {
    task_id: String,
    category: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManualLabel {
    pub task_id: String,
    /// `None` labels every backend's translation of the task.
    pub backend: Option<String>,
    pub category: ErrorCategory,
    /// 1-based line in the label file.
    pub line: usize,
}

/// Reads `task_id,category` rows. A task id may carry `@backend` to target
/// one backend's translation; without it the label applies to all backends.
pub fn read_manual_labels(path: &Path) -> Result<Vec<ManualLabel>, TaxonomyError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| TaxonomyError::MalformedLabelFile(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| TaxonomyError::MalformedLabelFile(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["task_id", "category"] {
        return Err(TaxonomyError::MalformedLabelFile(format!(
            "expected header `task_id,category`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<ManualRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| TaxonomyError::MalformedLabelFile(format!("line {line}: {e}")))?;
        if !seen.insert(row.task_id.clone()) {
            return Err(TaxonomyError::MalformedLabelFile(format!("line {line}: duplicate task id `{}`", row.task_id)));
        }
        let cat: ErrorCategory = row
            .category
            .parse()
            .map_err(|e| TaxonomyError::MalformedLabelFile(format!("line {line}: {e}")))?;
        let (task_id, backend) = match row.task_id.split_once('@') {
            Some((t, b)) => (t.to_string(), Some(b.to_string())),
            None => (row.task_id.clone(), None),
        };
        out.push(ManualLabel {
            task_id,
            backend,
            category: cat,
            line,
        });
    }
    Ok(out)
}

/// One label per (task, backend), manual labels replacing heuristic ones,
/// sorted by task id then backend.
pub fn merge_labels(heuristic: &[CategoryLabel], manual_file: Option<&Path>) -> Result<MergeResult, TaxonomyError> {
    let mut by_key: BTreeMap<(String, String), CategoryLabel> = BTreeMap::new();
    for l in heuristic {
        by_key.insert((l.task_id.clone(), l.backend.clone()), l.clone());
    }
    let mut unknown = Vec::new();
    if let Some(path) = manual_file {
        let mut backends_of: HashMap<String, Vec<String>> = HashMap::new();
        for (t, b) in by_key.keys() {
            backends_of.entry(t.clone()).or_default().push(b.clone());
        }
        for ManualLabel {
            task_id: task,
            backend,
            category,
            line,
        } in read_manual_labels(path)?
        {
            let targets: Vec<String> = match &backend {
                Some(b) => backends_of
                    .get(&task)
                    .map(|bs| bs.iter().filter(|x| *x == b).cloned().collect())
                    .unwrap_or_default(),
                None => backends_of.get(&task).cloned().unwrap_or_default(),
            };
            if targets.is_empty() {
                let id = match backend {
                    Some(b) => format!("{task}@{b}"),
                    None => task,
                };
                tracing::warn!("manual label for unknown task `{id}`");
                unknown.push(id);
                continue;
            }
            for b in targets {
                by_key.insert(
                    (task.clone(), b.clone()),
                    CategoryLabel {
                        task_id: task.clone(),
                        backend: b,
                        category,
                        source: LabelSource::Manual,
                        evidence: format!("manual label file line {line}"),
                    },
                );
            }
        }
    }
    Ok(MergeResult {
        labels: by_key.into_values().collect(),
        unknown_task_ids: unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{FirstFailure, Stage};

    fn verdict(outcome: Outcome, diag: &str) -> Verdict {
        match outcome {
            Outcome::CompilationError => Verdict::compilation_error(1, diag.into()),
            _ => Verdict {
                outcome,
                tests_passed: 0,
                tests_total: 1,
                first_failure: Some(FirstFailure {
                    test_id: Some("t1".into()),
                    stage: Stage::Run,
                    diagnostic: diag.into(),
                    expected: None,
                    actual: None,
                }),
                compile_log: String::new(),
                results: Vec::new(),
            },
        }
    }

    fn run(v: &Verdict, code: &str, src: &str, sl: Language, tl: Language) -> Classification {
        classify(
            &ClassifyInput {
                verdict: v,
                translated_code: code,
                source_code: src,
                source_lang: sl,
                target: tl,
            },
            &ClassifierConfig::default(),
        )
    }

    #[test]
    fn empty_output_is_model_specific() {
        let v = verdict(Outcome::CompilationError, "empty program");
        let (c, e) = run(&v, "", "print(1)", Language::Python, Language::Java);
        assert_eq!(c, ErrorCategory::ModelSpecificError);
        assert!(e.starts_with("taxonomy/v1/model-specific"));
    }

    #[test]
    fn wrong_language_and_duplicates() {
        let v = verdict(Outcome::CompilationError, "x");
        let py = "n = int(input())\nfor i in range(n):\n    print(i)\n";
        assert_eq!(run(&v, py, "", Language::Cpp, Language::Java).0, ErrorCategory::ModelSpecificError);
        let dup = "int a = 0;\nint a = 0;\nint a = 0;\nint a = 0;\nint b;";
        assert_eq!(run(&v, dup, "", Language::Python, Language::Cpp).0, ErrorCategory::ModelSpecificError);
    }

    #[test]
    fn missing_scanner_import_is_dependency() {
        let v = verdict(Outcome::CompilationError, "Main.java:3: error: cannot find symbol\n  symbol:   class Scanner");
        let code = "public class Main {\n  public static void main(String[] a) {\n    Scanner s = new Scanner(System.in);\n  }\n}";
        let (c, e) = run(&v, code, "", Language::Python, Language::Java);
        assert_eq!(c, ErrorCategory::DependencyError);
        assert_eq!(e, "taxonomy/v1/dependency/unresolved-standard-symbol: Scanner");
    }

    #[test]
    fn loop_else_is_syntactic() {
        let v = verdict(Outcome::CompilationError, "main.cpp:5:5: error: 'else' without a previous 'if'");
        let code = "#include <iostream>\nint main() {\n  for (int i = 0; i < 3; i++) {\n    if (i) break;\n  } else {\n    std::cout << 1;\n  }\n}";
        assert_eq!(run(&v, code, "", Language::Python, Language::Cpp).0, ErrorCategory::SyntacticDifference);
    }

    #[test]
    fn int_division_is_semantic() {
        let v = verdict(Outcome::FunctionalError, "output differs");
        let code = "a, b = map(int, input().split())\nprint(a / b)\n";
        assert_eq!(run(&v, code, "", Language::Java, Language::Python).0, ErrorCategory::SemanticDifference);
    }

    #[test]
    fn input_parse_is_data_related() {
        let v = verdict(Outcome::RuntimeError, "ValueError: invalid literal for int() with base 10: '3 4'");
        let code = "a = int(input())\nb = int(input())\nprint(a + b)\n";
        assert_eq!(run(&v, code, "", Language::Cpp, Language::Python).0, ErrorCategory::DataRelatedError);
    }

    #[test]
    fn numeric_format_mismatch_is_data_related() {
        let mut v = verdict(Outcome::FunctionalError, "output differs");
        let ff = v.first_failure.as_mut().unwrap();
        ff.expected = Some("3".into());
        ff.actual = Some("3.0".into());
        assert_eq!(run(&v, "print(float(3))", "", Language::Java, Language::Python).0, ErrorCategory::DataRelatedError);
    }

    #[test]
    fn control_flow_divergence_is_logic() {
        let v = verdict(Outcome::FunctionalError, "output differs");
        let src = "for (int i = 0; i < n; i++) { if (a) x++; }";
        let code = "x = 0\nprint(x)\n";
        assert_eq!(run(&v, code, src, Language::Java, Language::Python).0, ErrorCategory::LogicError);
        let same = "for i in range(n):\n    if a:\n        x += 1\n";
        assert_eq!(run(&v, same, src, Language::Java, Language::Python).0, ErrorCategory::Other);
    }

    #[test]
    fn distribution_closes() {
        let mk = |c| CategoryLabel {
            task_id: "t".into(),
            backend: "b".into(),
            category: c,
            source: LabelSource::Heuristic,
            evidence: String::new(),
        };
        let d = distribution(&vec![mk(ErrorCategory::LogicError); 4]).unwrap();
        assert_eq!(d[&ErrorCategory::LogicError], 1.0);
        assert_eq!(d.len(), 7);
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(distribution(&[]), Err(TaxonomyError::EmptyInput));
    }

    #[test]
    fn manual_labels_win() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        let h = vec![
            CategoryLabel {
                task_id: "a".into(),
                backend: "m1".into(),
                category: ErrorCategory::LogicError,
                source: LabelSource::Heuristic,
                evidence: "x".into(),
            },
            CategoryLabel {
                task_id: "a".into(),
                backend: "m2".into(),
                category: ErrorCategory::Other,
                source: LabelSource::Heuristic,
                evidence: "y".into(),
            },
        ];
        std::fs::write(&p, "task_id,category\na@m1,SemanticDifference\nghost,Other\n").unwrap();
        let r = merge_labels(&h, Some(&p)).unwrap();
        assert_eq!(r.labels[0].category, ErrorCategory::SemanticDifference);
        assert_eq!(r.labels[0].source, LabelSource::Manual);
        assert_eq!(r.labels[1].category, ErrorCategory::Other);
        assert_eq!(r.unknown_task_ids, vec!["ghost"]);
        assert_eq!(merge_labels(&h, None).unwrap().labels, h);
        std::fs::write(&p, "task_id,category\na,Other\na,LogicError\n").unwrap();
        assert!(matches!(merge_labels(&h, Some(&p)), Err(TaxonomyError::MalformedLabelFile(_))));
    }
}
