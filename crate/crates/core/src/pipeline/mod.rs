//! The run directory and the phases that fill it: translate, evaluate,
//! classify, repair, report and export. Every phase skips work already
//! recorded, so re-running with unchanged inputs appends nothing.

pub mod config;
pub mod store;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{request_digest, Backend, BackendKind, Cassette};
use crate::corpus::{default_targets, enumerate_tasks, load_manifest, Corpus, CorpusError, SourceProgram, TranslationTask};
use crate::exec::{provenance, ExecError, Executor, Outcome, ToolchainSet, Verdict};
use crate::prompt::{extract_code, render_prompt, ExtractionMethod};
use crate::rectify::{export_pairs, repair_task, Corrector, ExportSummary, PairContext, RectifyError, RepairAttempt, RepairRequest};
use crate::report::{build, emit, Format, Phase, ReportError, ReportTable, ResultRecord, TableKind};
use crate::taxonomy::{classify, distribution, heuristic_label, merge_labels, CategoryLabel, ClassifyInput, ErrorCategory};

pub use config::{parse_chain, ChainItem, RunConfig};
use store::{read_jsonl, rewrite_jsonl, JsonlWriter};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("{what}; {hint}")]
    MissingPhase { what: String, hint: String },
    #[error("{0}")]
    Io(String),
    #[error("interrupted; finished work was saved")]
    Interrupted,
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

fn missing(what: &str, hint: &str) -> PipelineError {
    PipelineError::MissingPhase {
        what: what.into(),
        hint: hint.into(),
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Raw and extracted output of one translator for one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub task_id: String,
    pub backend: String,
    pub dataset: String,
    pub source_lang: crate::lang::Language,
    pub target_lang: crate::lang::Language,
    pub prompt_digest: String,
    pub raw_text: String,
    pub code: String,
    pub method: Option<ExtractionMethod>,
    pub warnings: Vec<String>,
    /// Set when no completion was obtained.
    pub error: Option<String>,
    #[serde(default)]
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub task_id: String,
    pub backend: String,
    pub phase: Phase,
    pub verdict: Verdict,
    #[serde(default)]
    pub timestamp: u64,
}

#[derive(Debug, Clone)]
pub enum CassetteMode {
    Live,
    Record(PathBuf),
    Replay(PathBuf),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseSummary {
    pub done: usize,
    pub skipped: usize,
    pub failed: usize,
    pub notice: Option<String>,
}

/// File names inside a run directory.
pub mod files {
    pub const CONFIG: &str = "config.json";
    pub const TOOLCHAINS: &str = "toolchains.json";
    pub const TRANSLATIONS: &str = "translations.jsonl";
    pub const RESULTS: &str = "results.jsonl";
    pub const VERDICTS: &str = "verdicts.jsonl";
    pub const LABELS: &str = "labels.jsonl";
    pub const ATTEMPTS: &str = "attempts.jsonl";
    pub const PAIRS: &str = "pairs.jsonl";
    pub const REPORTS: &str = "reports";
    pub const DISTRIBUTION: &str = "category_distribution.json";
}

type Key = (String, String);

fn key(task: &str, backend: &str) -> Key {
    (task.to_string(), backend.to_string())
}

/// Later records win.
fn latest<T>(items: Vec<T>, k: impl Fn(&T) -> Key) -> BTreeMap<Key, T> {
    items.into_iter().map(|t| (k(&t), t)).collect()
}

pub struct Run {
    pub config: RunConfig,
    pub corpus: Corpus,
    pub tasks: Vec<TranslationTask>,
    pub executor: Executor,
    dir: PathBuf,
    stop: Arc<AtomicBool>,
    pool: rayon::ThreadPool,
}

impl Run {
    /// Loads and validates the config and corpus, creates the run directory
    /// and stores the resolved config in it.
    pub fn open(config_path: &Path) -> Result<Run, PipelineError> {
        Run::from_config(RunConfig::load(config_path)?)
    }

    pub fn from_config(config: RunConfig) -> Result<Run, PipelineError> {
        config.validate()?;
        let corpus = load_manifest(&config.manifest)?;
        let targets = config.targets.clone().unwrap_or_else(default_targets);
        let tasks = enumerate_tasks(&corpus, &targets)?;
        let toolchains = match &config.toolchains {
            Some(p) => ToolchainSet::load(p)?,
            None => ToolchainSet::from_env()?,
        };
        let executor = Executor::new(toolchains, config.limits, config.compare);
        let dir = config.out_dir.clone();
        std::fs::create_dir_all(&dir)?;
        let mut text = serde_json::to_string_pretty(&config).expect("config serializes");
        text.push('\n');
        std::fs::write(dir.join(files::CONFIG), text)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
        Ok(Run {
            config,
            corpus,
            tasks,
            executor,
            dir,
            stop: Arc::new(AtomicBool::new(false)),
            pool,
        })
    }

    /// Share a flag that, once set, stops new work from starting.
    pub fn with_stop_flag(mut self, stop: Arc<AtomicBool>) -> Self {
        self.stop = stop;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn dataset(&self) -> String {
        self.config.dataset.clone().unwrap_or_else(|| self.corpus.name.clone())
    }

    fn program(&self, task: &TranslationTask) -> &SourceProgram {
        self.corpus.program(&task.program_id).expect("tasks come from the corpus")
    }

    fn task_map(&self) -> HashMap<&str, &TranslationTask> {
        self.tasks.iter().map(|t| (t.task_id.as_str(), t)).collect()
    }

    fn stopped(&self) -> bool {
        self.stop.load(Ordering::SeqCst)
    }

    fn finish(&self, s: PhaseSummary) -> Result<PhaseSummary, PipelineError> {
        if self.stopped() {
            return Err(PipelineError::Interrupted);
        }
        Ok(s)
    }

    fn result_record(&self, task: &TranslationTask, backend: &str, phase: Phase, v: &Verdict) -> ResultRecord {
        ResultRecord {
            task_id: task.task_id.clone(),
            backend: backend.to_string(),
            dataset: self.dataset(),
            source_lang: task.source_lang,
            target_lang: task.target_lang,
            phase,
            outcome: v.outcome,
            tests_passed: v.tests_passed,
            tests_total: v.tests_total,
            category: None,
            corrector: None,
            before_outcome: None,
            timestamp: now(),
        }
    }

    fn make_backend(&self, name: &str, replay: Option<&Arc<Cassette>>) -> Result<Arc<Backend>, PipelineError> {
        let spec = self.config.backend(name).ok_or_else(|| PipelineError::Config(format!("unknown backend `{name}`")))?;
        Ok(Arc::new(match replay {
            Some(c) => Backend::replaying(name, c.clone()),
            None => Backend::new(spec.clone()).map_err(|e| PipelineError::Config(e.to_string()))?,
        }))
    }

    /// Renders, completes and extracts every (task, translator) pair not yet
    /// recorded under the same prompt digest. With `retry_failed`, pairs
    /// whose last attempt got no completion are tried again.
    pub fn translate(&self, mode: &CassetteMode, retry_failed: bool) -> Result<PhaseSummary, PipelineError> {
        let cassette = match mode {
            CassetteMode::Live => None,
            CassetteMode::Record(p) | CassetteMode::Replay(p) => {
                Some(Arc::new(Cassette::open(p).map_err(|e| PipelineError::Config(e.to_string()))?))
            }
        };
        if let CassetteMode::Replay(p) = mode {
            if cassette.as_ref().is_some_and(|c| c.is_empty()) {
                return Err(PipelineError::Config(format!("replay cassette {} is missing or empty", p.display())));
            }
        }
        let replay = matches!(mode, CassetteMode::Replay(_)).then_some(()).and(cassette.as_ref());
        let mut backends = Vec::new();
        for name in self.config.translator_names() {
            let b = self.make_backend(&name, replay)?;
            if matches!(mode, CassetteMode::Record(_)) && b.spec().kind == BackendKind::Replay {
                return Err(PipelineError::Config(format!("cannot record with replay backend `{name}`")));
            }
            let template = self.config.template(&b.spec().template).expect("validated");
            backends.push((b, template));
        }

        let done: BTreeSet<(String, String, String)> = read_jsonl::<TranslationRecord>(&self.path(files::TRANSLATIONS))?
            .into_iter()
            .filter(|r| !(retry_failed && r.error.is_some()))
            .map(|r| (r.task_id, r.backend, r.prompt_digest))
            .collect();
        let writer = JsonlWriter::append(&self.path(files::TRANSLATIONS))?;

        let mut work = Vec::new();
        let mut summary = PhaseSummary::default();
        for task in &self.tasks {
            let program = self.program(task);
            for (b, template) in &backends {
                let prompt = render_prompt(template, &program.code, task.source_lang, task.target_lang);
                let digest = match &prompt {
                    Ok(p) => request_digest(b.name(), &p.text),
                    Err(_) => String::new(),
                };
                if done.contains(&(task.task_id.clone(), b.name().to_string(), digest.clone())) {
                    summary.skipped += 1;
                    continue;
                }
                work.push((task, b.clone(), prompt, digest));
            }
        }
        let results: Vec<Result<bool, PipelineError>> = self.pool.install(|| {
            work.par_iter()
                .map(|(task, b, prompt, digest)| {
                    if self.stopped() {
                        return Ok(false);
                    }
                    let mut rec = TranslationRecord {
                        task_id: task.task_id.clone(),
                        backend: b.name().to_string(),
                        dataset: self.dataset(),
                        source_lang: task.source_lang,
                        target_lang: task.target_lang,
                        prompt_digest: digest.clone(),
                        raw_text: String::new(),
                        code: String::new(),
                        method: None,
                        warnings: Vec::new(),
                        error: None,
                        timestamp: now(),
                    };
                    let completion = match prompt {
                        Err(e) => Err(e.to_string()),
                        Ok(p) => match (mode, &cassette) {
                            (CassetteMode::Record(_), Some(c)) => b.record(p, c),
                            _ => b.complete(p),
                        }
                        .map(|c| (c, p.sentinel.clone()))
                        .map_err(|e| e.to_string()),
                    };
                    match completion {
                        Ok((c, sentinel)) => {
                            let ex = extract_code(&c.raw_text, task.target_lang, sentinel.as_deref());
                            rec.raw_text = c.raw_text;
                            rec.code = ex.code;
                            rec.method = Some(ex.method);
                            rec.warnings = ex.warnings;
                        }
                        Err(e) => {
                            tracing::warn!("{} via {}: {e}", task.task_id, b.name());
                            rec.error = Some(e);
                        }
                    }
                    let ok = rec.error.is_none();
                    writer.write(&rec)?;
                    Ok(ok)
                })
                .collect()
        });
        for r in results {
            if r? {
                summary.done += 1;
            } else if !self.stopped() {
                summary.failed += 1;
            }
        }
        self.finish(summary)
    }

    fn translations(&self) -> Result<BTreeMap<Key, TranslationRecord>, PipelineError> {
        let all = read_jsonl::<TranslationRecord>(&self.path(files::TRANSLATIONS))?;
        Ok(latest(all, |r| key(&r.task_id, &r.backend)))
    }

    fn verdicts(&self, phase: Phase) -> Result<BTreeMap<Key, Verdict>, PipelineError> {
        let all: Vec<VerdictRecord> = read_jsonl(&self.path(files::VERDICTS))?;
        Ok(latest(all.into_iter().filter(|v| v.phase == phase).collect(), |v| key(&v.task_id, &v.backend))
            .into_iter()
            .map(|(k, v)| (k, v.verdict))
            .collect())
    }

    fn results(&self) -> Result<Vec<ResultRecord>, PipelineError> {
        let all: Vec<ResultRecord> = read_jsonl(&self.path(files::RESULTS))?;
        Ok(all
            .into_iter()
            .map(|r| ((r.task_id.clone(), r.backend.clone(), r.phase), r))
            .collect::<BTreeMap<_, _>>()
            .into_values()
            .collect())
    }

    fn labels(&self) -> Result<BTreeMap<Key, CategoryLabel>, PipelineError> {
        let all: Vec<CategoryLabel> = read_jsonl(&self.path(files::LABELS))?;
        Ok(latest(all, |l| key(&l.task_id, &l.backend)))
    }

    /// Probes every toolchain into `toolchains.json`, then evaluates every
    /// extracted translation that has no translate-phase result yet.
    pub fn evaluate(&self) -> Result<PhaseSummary, PipelineError> {
        let translations = self.translations()?;
        let usable: Vec<&TranslationRecord> = translations.values().filter(|r| r.error.is_none()).collect();
        let mut summary = PhaseSummary {
            failed: translations.len() - usable.len(),
            ..Default::default()
        };
        if usable.is_empty() {
            summary.notice = Some("nothing to evaluate".into());
            return Ok(summary);
        }
        let prov = provenance(&self.executor.toolchains);
        let mut text = serde_json::to_string_pretty(&prov).expect("provenance serializes");
        text.push('\n');
        std::fs::write(self.path(files::TOOLCHAINS), text)?;
        let langs: BTreeSet<_> = usable.iter().map(|r| r.target_lang).collect();
        for l in langs {
            self.executor.check_toolchain(l)?;
        }

        let done: BTreeSet<Key> = self
            .results()?
            .into_iter()
            .filter(|r| r.phase == Phase::Translate)
            .map(|r| key(&r.task_id, &r.backend))
            .collect();
        let tasks = self.task_map();
        let mut work = Vec::new();
        for r in usable {
            match tasks.get(r.task_id.as_str()) {
                Some(t) if !done.contains(&key(&r.task_id, &r.backend)) => work.push((*t, r)),
                Some(_) => summary.skipped += 1,
                None => {
                    tracing::warn!("translation for unknown task `{}` ignored", r.task_id);
                    summary.skipped += 1;
                }
            }
        }
        let verdicts = JsonlWriter::append(&self.path(files::VERDICTS))?;
        let results = JsonlWriter::append(&self.path(files::RESULTS))?;
        let outcome: Result<Vec<bool>, PipelineError> = self.pool.install(|| {
            work.par_iter()
                .map(|(task, rec)| {
                    if self.stopped() {
                        return Ok(false);
                    }
                    let v = self.executor.evaluate(&rec.code, task.target_lang, &self.program(task).tests)?;
                    tracing::debug!("{} via {}: {}", task.task_id, rec.backend, v.outcome);
                    verdicts.write(&VerdictRecord {
                        task_id: task.task_id.clone(),
                        backend: rec.backend.clone(),
                        phase: Phase::Translate,
                        verdict: v.clone(),
                        timestamp: now(),
                    })?;
                    results.write(&self.result_record(task, &rec.backend, Phase::Translate, &v))?;
                    Ok(true)
                })
                .collect()
        });
        summary.done = outcome?.into_iter().filter(|d| *d).count();
        self.finish(summary)
    }

    fn failing_verdicts(&self) -> Result<Vec<(Key, Verdict)>, PipelineError> {
        let all = self.verdicts(Phase::Translate)?;
        if all.is_empty() {
            return Err(missing("no verdicts found", "run `transjudge evaluate` first"));
        }
        Ok(all.into_iter().filter(|(_, v)| v.outcome != Outcome::Success).collect())
    }

    fn heuristic(&self, task: &TranslationTask, backend: &str, code: &str, v: &Verdict) -> CategoryLabel {
        let program = self.program(task);
        heuristic_label(
            &task.task_id,
            backend,
            &ClassifyInput {
                verdict: v,
                translated_code: code,
                source_code: &program.code,
                source_lang: task.source_lang,
                target: task.target_lang,
            },
            &self.config.classifier,
        )
    }

    /// Labels every failing translation, lets `manual` override, rewrites
    /// `labels.jsonl` and stores the per-backend distribution.
    pub fn classify(&self, manual: Option<&Path>) -> Result<PhaseSummary, PipelineError> {
        let failing = self.failing_verdicts()?;
        let translations = self.translations()?;
        let tasks = self.task_map();
        let mut heuristic = Vec::new();
        for ((task_id, backend), v) in &failing {
            let (Some(task), Some(tr)) = (tasks.get(task_id.as_str()), translations.get(&key(task_id, backend))) else {
                continue;
            };
            heuristic.push(self.heuristic(task, backend, &tr.code, v));
        }
        let merged = merge_labels(&heuristic, manual).map_err(|e| PipelineError::Config(e.to_string()))?;
        rewrite_jsonl(&self.path(files::LABELS), &merged.labels)?;

        let mut by_backend: BTreeMap<String, Vec<CategoryLabel>> = BTreeMap::new();
        for l in &merged.labels {
            by_backend.entry(l.backend.clone()).or_default().push(l.clone());
        }
        let mut dist: BTreeMap<String, BTreeMap<ErrorCategory, f64>> = BTreeMap::new();
        for (b, ls) in &by_backend {
            dist.insert(b.clone(), distribution(ls).expect("non-empty group"));
        }
        if !merged.labels.is_empty() {
            dist.insert(crate::report::POOLED.into(), distribution(&merged.labels).expect("non-empty"));
        }
        let reports = self.path(files::REPORTS);
        std::fs::create_dir_all(&reports)?;
        let mut text = serde_json::to_string_pretty(&dist).expect("distribution serializes");
        text.push('\n');
        std::fs::write(reports.join(files::DISTRIBUTION), text)?;
        Ok(PhaseSummary {
            done: merged.labels.len(),
            skipped: merged.unknown_task_ids.len(),
            failed: 0,
            notice: failing.is_empty().then(|| "no failed translations to classify".to_string()),
        })
    }

    fn correctors(&self, chain: &[String], replay: Option<&Arc<Cassette>>) -> Result<Vec<Corrector>, PipelineError> {
        parse_chain(chain)?
            .into_iter()
            .map(|item| {
                Ok(match item {
                    ChainItem::Rules(ids) => Corrector::Rules(ids),
                    ChainItem::Backend(name) => Corrector::Backend {
                        backend: self.make_backend(&name, replay)?,
                        encoding: self.config.repair_encoding,
                    },
                })
            })
            .collect()
    }

    /// Runs the corrector chain over every failing translation that has no
    /// repair attempt yet. `chain` overrides the configured chain; `replay`
    /// answers backend correctors from a cassette.
    pub fn repair(&self, chain: Option<&[String]>, replay: Option<&Path>) -> Result<PhaseSummary, PipelineError> {
        let failing = self.failing_verdicts()?;
        let cassette = replay
            .map(|p| Cassette::open(p).map(Arc::new).map_err(|e| PipelineError::Config(e.to_string())))
            .transpose()?;
        let correctors = self.correctors(chain.unwrap_or(&self.config.chain), cassette.as_ref())?;
        let translations = self.translations()?;
        let labels = self.labels()?;
        let done: BTreeSet<Key> = read_jsonl::<RepairAttempt>(&self.path(files::ATTEMPTS))?
            .into_iter()
            .map(|a| key(&a.task_id, &a.backend))
            .collect();
        let tasks = self.task_map();
        let mut summary = PhaseSummary::default();
        let mut work = Vec::new();
        for (k, v) in &failing {
            let (Some(task), Some(tr)) = (tasks.get(k.0.as_str()), translations.get(k)) else {
                continue;
            };
            if done.contains(k) {
                summary.skipped += 1;
            } else {
                work.push((*task, k.1.as_str(), tr.code.as_str(), v));
            }
        }
        if failing.is_empty() {
            summary.notice = Some("no failed translations to repair".into());
        }
        let attempts = JsonlWriter::append(&self.path(files::ATTEMPTS))?;
        let verdicts = JsonlWriter::append(&self.path(files::VERDICTS))?;
        let results = JsonlWriter::append(&self.path(files::RESULTS))?;
        let outcome: Result<Vec<Option<bool>>, PipelineError> = self.pool.install(|| {
            work.par_iter()
                .map(|(task, backend, code, v)| {
                    if self.stopped() {
                        return Ok(None);
                    }
                    let program = self.program(task);
                    let req = RepairRequest {
                        task,
                        backend,
                        source_code: &program.code,
                        tests: &program.tests,
                        code,
                        verdict: v,
                    };
                    let a = match repair_task(&req, &correctors, self.config.repair_budget, &self.executor) {
                        Ok(a) => a,
                        Err(RectifyError::Exec(e)) => return Err(e.into()),
                        Err(e) => return Err(PipelineError::Config(e.to_string())),
                    };
                    attempts.write(&a)?;
                    verdicts.write(&VerdictRecord {
                        task_id: a.task_id.clone(),
                        backend: a.backend.clone(),
                        phase: Phase::Repair,
                        verdict: a.after.clone(),
                        timestamp: now(),
                    })?;
                    let mut r = self.result_record(task, backend, Phase::Repair, &a.after);
                    r.before_outcome = Some(a.before.outcome);
                    r.corrector = Some(a.corrector.clone());
                    r.category = labels.get(&key(&a.task_id, &a.backend)).map(|l| l.category);
                    results.write(&r)?;
                    Ok(Some(a.success))
                })
                .collect()
        });
        for r in outcome?.into_iter().flatten() {
            if r {
                summary.done += 1;
            } else {
                summary.failed += 1;
            }
        }
        self.finish(summary)
    }

    /// Results with categories joined in from the label file.
    pub fn report_records(&self) -> Result<Vec<ResultRecord>, PipelineError> {
        let mut records = self.results()?;
        if !records.iter().any(|r| r.phase == Phase::Translate) {
            return Err(missing("no verdicts found", "run `transjudge evaluate` first"));
        }
        let labels = self.labels()?;
        for r in records.iter_mut().filter(|r| r.phase == Phase::Translate && r.outcome != Outcome::Success) {
            r.category = labels.get(&key(&r.task_id, &r.backend)).map(|l| l.category);
        }
        Ok(records)
    }

    /// Writes one file per requested table under `reports/`.
    pub fn report(&self, tables: &[TableKind], format: Format) -> Result<Vec<PathBuf>, PipelineError> {
        let records = self.report_records()?;
        let dir = self.path(files::REPORTS);
        let mut out = Vec::new();
        for &kind in tables {
            let table = match build(kind, &records) {
                Ok(t) => t,
                Err(ReportError::EmptyGroup(_)) => match kind {
                    TableKind::Breakdown => ReportTable::Breakdown { rows: Vec::new() },
                    TableKind::Category => return Err(missing("no labels found", "run `transjudge classify` first")),
                    TableKind::Repair | TableKind::Transitions => {
                        return Err(missing("no repair attempts found", "run `transjudge repair` first"))
                    }
                    TableKind::Success => return Err(missing("no verdicts found", "run `transjudge evaluate` first")),
                },
                Err(e) => return Err(PipelineError::Io(e.to_string())),
            };
            out.push(emit(&table, format, &dir).map_err(|e| PipelineError::Io(e.to_string()))?);
        }
        Ok(out)
    }

    /// Writes verified (invalid, valid) pairs from repair attempts and
    /// manual fixes.
    pub fn export(&self, manual_fixes: Option<&Path>, out: Option<&Path>) -> Result<ExportSummary, PipelineError> {
        let attempts: Vec<RepairAttempt> = read_jsonl(&self.path(files::ATTEMPTS))?;
        let attempts: Vec<RepairAttempt> = latest(attempts, |a| key(&a.task_id, &a.backend)).into_values().collect();
        let labels = self.labels()?;
        let tasks = self.task_map();
        let mut contexts = HashMap::new();
        for a in &attempts {
            let Some(task) = tasks.get(a.task_id.as_str()) else { continue };
            let cat = labels
                .get(&key(&a.task_id, &a.backend))
                .map(|l| l.category)
                .unwrap_or_else(|| {
                    let program = self.program(task);
                    classify(
                        &ClassifyInput {
                            verdict: &a.before,
                            translated_code: &a.code_before,
                            source_code: &program.code,
                            source_lang: task.source_lang,
                            target: task.target_lang,
                        },
                        &self.config.classifier,
                    )
                    .0
                });
            contexts.insert(key(&a.task_id, &a.backend), PairContext {
                task: (*task).clone(),
                tests: self.program(task).tests.clone(),
                category: cat,
            });
        }
        let out = out.map(Path::to_path_buf).unwrap_or_else(|| self.path(files::PAIRS));
        export_pairs(&attempts, &contexts, manual_fixes, &out, &self.executor).map_err(|e| match e {
            crate::rectify::ExportError::Exec(e) => PipelineError::Exec(e),
            other => PipelineError::Io(other.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latest_keeps_last() {
        let m = latest(vec![("a", 1), ("a", 2), ("b", 3)], |x| key(x.0, "m"));
        assert_eq!(m[&key("a", "m")].1, 2);
        assert_eq!(m.len(), 2);
    }
}
