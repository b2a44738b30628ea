//! Translation corpora: manifest loading, validation, task enumeration and
//! seeded train/valid/test splitting.
//!
//! A corpus is described by a single JSON manifest whose file references are
//! relative to the manifest's own directory:
//!
//! ```json
//! { "name": "codenet-mini",
//!   "programs": [ { "id": "p01", "language": "python", "code_file": "p01.py",
//!                   "tests": [ { "id": "t1", "stdin_file": "t1.in", "expected_file": "t1.out" } ] } ] }
//! ```
//!
//! An optional top-level `"testcases"` integer declares the expected total
//! number of tests; loading fails when the files disagree with it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lang::Language;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("referenced file is missing: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("malformed manifest {}: at `{field}`: {message}", .path.display())]
    MalformedManifest {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("duplicate program id `{0}`")]
    DuplicateId(String),
    #[error("source file is not valid UTF-8: {}", .0.display())]
    NonUtf8Source(PathBuf),
    #[error("target map lists {0} as its own target")]
    InvalidTargetMap(Language),
    #[error("split ratios must be positive and sum to 1.0, got {0:?}")]
    BadRatios((f64, f64, f64)),
    #[error("nothing to split: empty id list")]
    EmptyInput,
    #[error("duplicate id `{0}` in split input")]
    DuplicateSplitId(String),
    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub stdin: Vec<u8>,
    pub expected_stdout: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub id: String,
    pub language: Language,
    pub code: String,
    pub tests: Vec<TestCase>,
    /// Set only by lenient loading when the code file was not UTF-8 and had
    /// to be decoded lossily for inspection.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub non_utf8: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub programs: Vec<SourceProgram>,
    pub manifest_path: PathBuf,
}

impl Corpus {
    pub fn test_count(&self) -> usize {
        self.programs.iter().map(|p| p.tests.len()).sum()
    }

    pub fn program(&self, id: &str) -> Option<&SourceProgram> {
        self.programs.iter().find(|p| p.id == id)
    }

    pub fn count_by_language(&self) -> BTreeMap<Language, usize> {
        let mut out = BTreeMap::new();
        for p in &self.programs {
            *out.entry(p.language).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    name: String,
    #[serde(default)]
    testcases: Option<usize>,
    programs: Vec<ManifestProgram>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestProgram {
    id: String,
    language: Language,
    code_file: PathBuf,
    tests: Vec<ManifestTest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTest {
    id: String,
    stdin_file: PathBuf,
    expected_file: PathBuf,
}

fn read_file(base: &Path, rel: &Path) -> Result<Vec<u8>, CorpusError> {
    let path = base.join(rel);
    match fs::read(&path) {
        Ok(bytes) => Ok(bytes),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(CorpusError::MissingFile(path)),
        Err(source) => Err(CorpusError::Io { path, source }),
    }
}

fn parse_manifest(path: &Path) -> Result<ManifestDoc, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CorpusError::MissingFile(path.to_path_buf()),
        _ => CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CorpusError::MalformedManifest {
        path: path.to_path_buf(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Loads a manifest and every file it references. Non-UTF-8 code files are
/// rejected.
pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    load(path, false)
}

/// Like [`load_manifest`] but decodes non-UTF-8 code lossily and flags the
/// program instead of failing, so [`validate_corpus`] can report it.
pub fn load_manifest_lenient(path: &Path) -> Result<Corpus, CorpusError> {
    load(path, true)
}

fn load(path: &Path, lenient: bool) -> Result<Corpus, CorpusError> {
    let doc = parse_manifest(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut seen = HashSet::new();
    let mut programs = Vec::with_capacity(doc.programs.len());
    for (i, p) in doc.programs.into_iter().enumerate() {
        if p.id.trim().is_empty() {
            return Err(CorpusError::MalformedManifest {
                path: path.to_path_buf(),
                field: format!("programs[{i}].id"),
                message: "empty id".into(),
            });
        }
        if !seen.insert(p.id.clone()) {
            return Err(CorpusError::DuplicateId(p.id));
        }
        let code_path = base.join(&p.code_file);
        let raw = read_file(base, &p.code_file)?;
        let (code, non_utf8) = match String::from_utf8(raw) {
            Ok(s) => (s, false),
            Err(e) if lenient => (String::from_utf8_lossy(e.as_bytes()).into_owned(), true),
            Err(_) => return Err(CorpusError::NonUtf8Source(code_path)),
        };
        let mut tests = Vec::with_capacity(p.tests.len());
        for t in p.tests {
            tests.push(TestCase {
                id: t.id,
                stdin: read_file(base, &t.stdin_file)?,
                expected_stdout: read_file(base, &t.expected_file)?,
            });
        }
        programs.push(SourceProgram {
            id: p.id,
            language: p.language,
            code,
            tests,
            non_utf8,
        });
    }

    let corpus = Corpus {
        name: doc.name,
        programs,
        manifest_path: path.to_path_buf(),
    };
    if let Some(declared) = doc.testcases {
        let actual = corpus.test_count();
        if declared != actual {
            return Err(CorpusError::MalformedManifest {
                path: path.to_path_buf(),
                field: "testcases".into(),
                message: format!("declares {declared} tests but programs list {actual}"),
            });
        }
    }
    Ok(corpus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FindingKind {
    EmptyCode,
    EmptyTestList,
    DuplicateTestId,
    NonUtf8Code,
}

impl FindingKind {
    pub fn describe(self) -> &'static str {
        match self {
            FindingKind::EmptyCode => "empty code",
            FindingKind::EmptyTestList => "empty test list",
            FindingKind::DuplicateTestId => "duplicate test id",
            FindingKind::NonUtf8Code => "non-UTF-8 code",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub program_id: String,
    pub kind: FindingKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub findings: Vec<Finding>,
}

pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut findings = Vec::new();
    for p in &corpus.programs {
        let mut push = |kind: FindingKind, detail: String| {
            findings.push(Finding {
                program_id: p.id.clone(),
                kind,
                detail,
            })
        };
        if p.code.trim().is_empty() {
            push(FindingKind::EmptyCode, FindingKind::EmptyCode.describe().into());
        }
        if p.non_utf8 {
            push(FindingKind::NonUtf8Code, FindingKind::NonUtf8Code.describe().into());
        }
        if p.tests.is_empty() {
            push(FindingKind::EmptyTestList, FindingKind::EmptyTestList.describe().into());
        }
        let mut ids = HashSet::new();
        let mut reported = HashSet::new();
        for t in &p.tests {
            if !ids.insert(t.id.as_str()) && reported.insert(t.id.as_str()) {
                push(
                    FindingKind::DuplicateTestId,
                    format!("{} `{}`", FindingKind::DuplicateTestId.describe(), t.id),
                );
            }
        }
    }
    ValidationReport {
        ok: findings.is_empty(),
        findings,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TranslationTask {
    pub task_id: String,
    pub program_id: String,
    pub source_lang: Language,
    pub target_lang: Language,
}

impl TranslationTask {
    pub fn new(corpus: &str, program_id: &str, source: Language, target: Language) -> Self {
        TranslationTask {
            task_id: task_id(corpus, program_id, source, target),
            program_id: program_id.to_string(),
            source_lang: source,
            target_lang: target,
        }
    }
}

pub fn task_id(corpus: &str, program_id: &str, source: Language, target: Language) -> String {
    format!("{corpus}.{program_id}.{}-{}", source.id(), target.id())
}

pub type TargetMap = BTreeMap<Language, Vec<Language>>;

/// Every source language maps to the two others, as in the CodeNet/AVATAR setup.
pub fn default_targets() -> TargetMap {
    Language::ALL.into_iter().map(|l| (l, l.others())).collect()
}

/// One task per (program, target) pair, ordered by program id then target.
/// Programs whose language has no entry in `targets` contribute nothing.
pub fn enumerate_tasks(corpus: &Corpus, targets: &TargetMap) -> Result<Vec<TranslationTask>, CorpusError> {
    for (src, tgts) in targets {
        if tgts.contains(src) {
            return Err(CorpusError::InvalidTargetMap(*src));
        }
    }
    let mut tasks = Vec::new();
    for p in &corpus.programs {
        let Some(tgts) = targets.get(&p.language) else {
            continue;
        };
        let unique: BTreeSet<Language> = tgts.iter().copied().collect();
        for t in unique {
            tasks.push(TranslationTask::new(&corpus.name, &p.id, p.language, t));
        }
    }
    tasks.sort_by(|a, b| {
        a.program_id
            .cmp(&b.program_id)
            .then(a.target_lang.cmp(&b.target_lang))
    });
    Ok(tasks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
}

impl SplitAssignment {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.valid.len(), self.test.len())
    }
}

// floor(r * n), tolerant of products like 0.7 * 10 = 7.000000000000001 or
// 0.29 * 100 = 28.999999999999996.
fn floor_share(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Shuffles `ids` with a seeded ChaCha8 permutation and cuts it into
/// floor(r_train·n) train ids, floor(r_valid·n) valid ids and the remainder as
/// test ids. Each output list is sorted.
pub fn split_tasks(ids: &[String], ratios: (f64, f64, f64), seed: u64) -> Result<SplitAssignment, CorpusError> {
    let (rt, rv, rs) = ratios;
    let finite = [rt, rv, rs].iter().all(|r| r.is_finite() && *r > 0.0);
    if !finite || ((rt + rv + rs) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadRatios(ratios));
    }
    if ids.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(CorpusError::DuplicateSplitId(id.clone()));
        }
    }

    let n = ids.len();
    let mut order: Vec<String> = ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_train = floor_share(rt, n);
    let n_valid = floor_share(rv, n).min(n - n_train);
    let mut test = order.split_off(n_train + n_valid);
    let mut valid = order.split_off(n_train);
    let mut train = order;
    train.sort();
    valid.sort();
    test.sort();
    Ok(SplitAssignment {
        seed,
        ratios: [rt, rv, rs],
        train,
        valid,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program(id: &str, lang: Language, tests: usize) -> SourceProgram {
        SourceProgram {
            id: id.into(),
            language: lang,
            code: "x".into(),
            tests: (0..tests)
                .map(|i| TestCase {
                    id: format!("t{i}"),
                    stdin: vec![],
                    expected_stdout: vec![],
                })
                .collect(),
            non_utf8: false,
        }
    }

    fn corpus(programs: Vec<SourceProgram>) -> Corpus {
        Corpus {
            name: "c".into(),
            programs,
            manifest_path: PathBuf::from("m.json"),
        }
    }

    #[test]
    fn validate_flags_empty_tests_and_duplicates() {
        let mut dup = program("b", Language::Java, 2);
        dup.tests[1].id = "t0".into();
        let c = corpus(vec![program("a", Language::Cpp, 0), dup]);
        let r = validate_corpus(&c);
        assert!(!r.ok);
        assert_eq!(r.findings.len(), 2);
        assert_eq!(r.findings[0].program_id, "a");
        assert_eq!(r.findings[0].kind.describe(), "empty test list");
        assert_eq!(r.findings[1].kind.describe(), "duplicate test id");
    }

    #[test]
    fn validate_clean_corpus() {
        let c = corpus(vec![program("a", Language::Cpp, 3), program("b", Language::Python, 3)]);
        let r = validate_corpus(&c);
        assert!(r.ok);
        assert!(r.findings.is_empty());
    }

    #[test]
    fn enumerate_single_target() {
        let c = corpus(vec![program("a", Language::Cpp, 1)]);
        let map: TargetMap = [(Language::Cpp, vec![Language::Java])].into();
        let tasks = enumerate_tasks(&c, &map).unwrap();
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].task_id, "c.a.cpp-java");
    }

    #[test]
    fn enumerate_rejects_self_target() {
        let c = corpus(vec![program("a", Language::Java, 1)]);
        let map: TargetMap = [(Language::Java, vec![Language::Java])].into();
        assert!(matches!(
            enumerate_tasks(&c, &map),
            Err(CorpusError::InvalidTargetMap(Language::Java))
        ));
    }

    #[test]
    fn enumerate_orders_by_program_then_target() {
        let c = corpus(vec![program("b", Language::Python, 1), program("a", Language::Java, 1)]);
        let tasks = enumerate_tasks(&c, &default_targets()).unwrap();
        let ids: Vec<_> = tasks.iter().map(|t| t.task_id.as_str()).collect();
        assert_eq!(ids, ["c.a.java-cpp", "c.a.java-python", "c.b.python-cpp", "c.b.python-java"]);
    }

    #[test]
    fn split_single_id_goes_to_test() {
        let s = split_tasks(&["x".to_string()], (0.8, 0.1, 0.1), 0).unwrap();
        assert_eq!(s.sizes(), (0, 0, 1));
    }

    #[test]
    fn split_errors() {
        let ids = vec!["a".to_string()];
        assert!(matches!(split_tasks(&ids, (0.8, 0.1, 0.2), 0), Err(CorpusError::BadRatios(_))));
        assert!(matches!(split_tasks(&ids, (1.0, 0.0, 0.0), 0), Err(CorpusError::BadRatios(_))));
        assert!(matches!(split_tasks(&[], (0.8, 0.1, 0.1), 0), Err(CorpusError::EmptyInput)));
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(split_tasks(&dup, (0.8, 0.1, 0.1), 0), Err(CorpusError::DuplicateSplitId(_))));
    }

    #[test]
    fn floor_share_absorbs_float_noise() {
        assert_eq!(floor_share(0.7, 10), 7);
        assert_eq!(floor_share(0.29, 100), 29);
        assert_eq!(floor_share(0.8, 1099), 879);
        assert_eq!(floor_share(0.1, 1099), 109);
    }
}
