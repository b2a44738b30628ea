//! (invalid, valid) translation pairs for training corrector models. A pair
//! is written only after both halves are re-run: the valid code must pass
//! and the invalid code must not.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{TestCase, TranslationTask};
use crate::exec::{ExecError, Executor, Outcome};
use crate::lang::Language;
use crate::taxonomy::ErrorCategory;

use super::RepairAttempt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub invalid: String,
    pub valid: String,
    pub source_lang: Language,
    pub target_lang: Language,
    /// `repair:<corrector>` or `manual`.
    pub origin: String,
    /// Outcome of the invalid half.
    pub outcome: Outcome,
    pub category: ErrorCategory,
}

pub struct PairContext {
    pub task: TranslationTask,
    pub tests: Vec<TestCase>,
    pub category: ErrorCategory,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ExportSummary {
    pub written: usize,
    /// (task id, backend, reason) for attempts that produced no pair.
    pub skipped: Vec<(String, String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{task_id}: valid code does not pass its tests ({outcome})")]
    UnverifiedValidCode { task_id: String, outcome: Outcome },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Where a hand-written fix for `task` lives under `dir`.
pub fn manual_fix_path(dir: &Path, task: &TranslationTask) -> PathBuf {
    dir.join(&task.task_id).join(format!("fixed.{}", task.target_lang.extension()))
}

/// Verifies one candidate pair; `Err(UnverifiedValidCode)` when the valid
/// half fails, `Ok(None)` when the invalid half passes.
pub fn verify_pair(
    invalid: &str,
    valid: &str,
    ctx: &PairContext,
    origin: &str,
    exec: &Executor,
) -> Result<Option<PairRecord>, ExportError> {
    let lang = ctx.task.target_lang;
    let v = exec.evaluate(valid, lang, &ctx.tests)?;
    if v.outcome != Outcome::Success {
        return Err(ExportError::UnverifiedValidCode {
            task_id: ctx.task.task_id.clone(),
            outcome: v.outcome,
        });
    }
    let iv = exec.evaluate(invalid, lang, &ctx.tests)?;
    if iv.outcome == Outcome::Success {
        return Ok(None);
    }
    Ok(Some(PairRecord {
        invalid: invalid.to_string(),
        valid: valid.to_string(),
        source_lang: ctx.task.source_lang,
        target_lang: lang,
        origin: origin.to_string(),
        outcome: iv.outcome,
        category: ctx.category,
    }))
}

/// Writes one JSON line per verified pair. `contexts` is keyed by
/// (task id, translating backend). The valid half is the repaired
/// code when the repair succeeded, else a manual fix if one exists. Pairs
/// that fail verification are skipped and listed in the summary.
pub fn export_pairs(
    attempts: &[RepairAttempt],
    contexts: &HashMap<(String, String), PairContext>,
    manual_fixes: Option<&Path>,
    out: &Path,
    exec: &Executor,
) -> Result<ExportSummary, ExportError> {
    let mut summary = ExportSummary::default();
    let mut lines = Vec::new();
    for a in attempts {
        let skip = |summary: &mut ExportSummary, why: String| summary.skipped.push((a.task_id.clone(), a.backend.clone(), why));
        let Some(ctx) = contexts.get(&(a.task_id.clone(), a.backend.clone())) else {
            skip(&mut summary, "unknown task".into());
            continue;
        };
        let (valid, origin) = if a.success {
            (a.code_after.clone(), format!("repair:{}", a.corrector))
        } else if let Some(p) = manual_fixes.map(|d| manual_fix_path(d, &ctx.task)).filter(|p| p.is_file()) {
            (std::fs::read_to_string(&p)?, "manual".to_string())
        } else {
            skip(&mut summary, "no valid counterpart".into());
            continue;
        };
        match verify_pair(&a.code_before, &valid, ctx, &origin, exec) {
            Ok(Some(rec)) => lines.push(serde_json::to_string(&rec).expect("pair serializes")),
            Ok(None) => skip(&mut summary, "invalid code passes on re-run".into()),
            Err(e @ ExportError::UnverifiedValidCode { .. }) => {
                tracing::warn!("{e}");
                skip(&mut summary, e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = tempfile::NamedTempFile::new_in(out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))?;
    for l in &lines {
        writeln!(f, "{l}")?;
    }
    f.persist(out).map_err(|e| e.error)?;
    summary.written = lines.len();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manual_fix_layout() {
        let t = TranslationTask::new("codenet", "p1", Language::Cpp, Language::Java);
        assert_eq!(
            manual_fix_path(Path::new("/fx"), &t),
            PathBuf::from("/fx/codenet.p1.cpp-java/fixed.java")
        );
    }

    #[test]
    fn pair_json_shape() {
        let p = PairRecord {
            invalid: "a".into(),
            valid: "b".into(),
            source_lang: Language::Cpp,
            target_lang: Language::Python,
            origin: "manual".into(),
            outcome: Outcome::FunctionalError,
            category: ErrorCategory::SemanticDifference,
        };
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        assert_eq!(v["source_lang"], "cpp");
        assert_eq!(v["outcome"], "FunctionalError");
        assert_eq!(v["category"], "SemanticDifference");
    }
}
