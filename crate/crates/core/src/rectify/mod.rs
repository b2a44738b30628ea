//! Repair of failed translations through a chain of correctors: the rule
//! catalog first, then optional backend correctors. Every candidate is
//! re-evaluated; nothing is accepted on faith.

pub mod export;
pub mod rules;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::corpus::{TestCase, TranslationTask};
use crate::exec::{ExecError, Executor, Outcome, Verdict};
use crate::prompt::{extract_code, render_repair_prompt, RepairEncoding, RepairInput};

pub use export::{export_pairs, manual_fix_path, verify_pair, ExportError, ExportSummary, PairContext, PairRecord};
pub use rules::{apply_rules, RuleContext, RuleId};

pub const DEFAULT_BUDGET: usize = 4;

#[derive(Clone)]
pub enum Corrector {
    Rules(Vec<RuleId>),
    Backend { backend: Arc<Backend>, encoding: RepairEncoding },
}

impl Corrector {
    pub fn rules() -> Self {
        Corrector::Rules(RuleId::CATALOG.to_vec())
    }

    pub fn name(&self) -> String {
        match self {
            Corrector::Rules(_) => "rules".into(),
            Corrector::Backend { backend, .. } => format!("backend:{}", backend.name()),
        }
    }
}

impl fmt::Debug for Corrector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RectifyError {
    #[error("translation already passes; nothing to repair")]
    AlreadySuccessful,
    #[error("empty corrector chain")]
    EmptyChain,
    #[error("candidate budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// One repair attempt for one (task, translating backend) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairAttempt {
    pub task_id: String,
    /// Backend that produced the translation being repaired.
    pub backend: String,
    /// Corrector (and rule ids) behind `code_after`, or `none`.
    pub corrector: String,
    pub before: Verdict,
    pub code_before: String,
    pub code_after: String,
    pub after: Verdict,
    pub success: bool,
    pub candidates_evaluated: usize,
    #[serde(default)]
    pub notes: Vec<String>,
}

pub struct RepairRequest<'a> {
    pub task: &'a TranslationTask,
    pub backend: &'a str,
    pub source_code: &'a str,
    pub tests: &'a [TestCase],
    pub code: &'a str,
    pub verdict: &'a Verdict,
}

/// Line-level edit distance, used to prefer the least invasive candidate.
pub fn line_edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<&str> = a.lines().collect();
    let b: Vec<&str> = b.lines().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

struct Best {
    corrector: String,
    code: String,
    verdict: Verdict,
    edit: usize,
}

impl Best {
    fn beats(&self, other: &Best) -> bool {
        let (a, b) = (self.verdict.progress(), other.verdict.progress());
        a > b || (a == b && self.edit < other.edit)
    }
}

/// Tries the chain in order, evaluating at most `budget` distinct candidates.
/// Stops at the first passing candidate; otherwise keeps the best one by
/// (outcome rank, tests passed, smallest edit).
pub fn repair_task(
    req: &RepairRequest<'_>,
    chain: &[Corrector],
    budget: usize,
    exec: &Executor,
) -> Result<RepairAttempt, RectifyError> {
    if req.verdict.outcome == Outcome::Success {
        return Err(RectifyError::AlreadySuccessful);
    }
    if chain.is_empty() {
        return Err(RectifyError::EmptyChain);
    }
    if budget == 0 {
        return Err(RectifyError::ZeroBudget);
    }
    let target = req.task.target_lang;
    let mut seen: HashSet<String> = HashSet::from([req.code.to_string()]);
    let mut best: Option<Best> = None;
    let mut evaluated = 0;
    let mut notes = Vec::new();

    'chain: for corrector in chain {
        let candidates: Vec<(String, String)> = match corrector {
            Corrector::Rules(ids) => {
                let ctx = RuleContext {
                    verdict: req.verdict,
                    code: req.code,
                    source_code: req.source_code,
                    source_lang: req.task.source_lang,
                    target,
                };
                apply_rules(&ctx, ids)
                    .into_iter()
                    .map(|(id, code)| (format!("rules:{id}"), code))
                    .collect()
            }
            Corrector::Backend { backend, encoding } => {
                let prompt = render_repair_prompt(
                    &RepairInput {
                        source_code: req.source_code,
                        source: req.task.source_lang,
                        target,
                        invalid_code: req.code,
                        diagnostic: req.verdict.diagnostic(),
                    },
                    *encoding,
                );
                match backend.complete(&prompt) {
                    Ok(c) => {
                        let ex = extract_code(&c.raw_text, target, prompt.sentinel.as_deref());
                        vec![(corrector.name(), ex.code)]
                    }
                    Err(e) => {
                        notes.push(format!("{}: {e}", corrector.name()));
                        Vec::new()
                    }
                }
            }
        };
        for (name, code) in candidates {
            if !seen.insert(code.clone()) {
                continue;
            }
            if evaluated == budget {
                notes.push("candidate budget exhausted".into());
                break 'chain;
            }
            evaluated += 1;
            let verdict = exec.evaluate(&code, target, req.tests)?;
            let cand = Best {
                corrector: name,
                edit: line_edit_distance(req.code, &code),
                code,
                verdict,
            };
            let done = cand.verdict.outcome == Outcome::Success;
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
            if done {
                break 'chain;
            }
        }
    }

    let (corrector, code_after, after) = match best {
        Some(b) => (b.corrector, b.code, b.verdict),
        None => ("none".to_string(), req.code.to_string(), req.verdict.clone()),
    };
    Ok(RepairAttempt {
        task_id: req.task.task_id.clone(),
        backend: req.backend.to_string(),
        corrector,
        before: req.verdict.clone(),
        code_before: req.code.to_string(),
        success: after.outcome == Outcome::Success,
        code_after,
        after,
        candidates_evaluated: evaluated,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edit_distance() {
        assert_eq!(line_edit_distance("a\nb\nc", "a\nb\nc"), 0);
        assert_eq!(line_edit_distance("a\nb\nc", "a\nx\nc"), 1);
        assert_eq!(line_edit_distance("a\nb", "x\na\nb"), 1);
        assert_eq!(line_edit_distance("", "a\nb"), 2);
    }

    #[test]
    fn refuses_success_and_empty_chain() {
        let task = TranslationTask::new("c", "p", crate::lang::Language::Java, crate::lang::Language::Python);
        let ok = Verdict {
            outcome: Outcome::Success,
            tests_passed: 1,
            tests_total: 1,
            first_failure: None,
            compile_log: String::new(),
            results: vec![],
        };
        let req = RepairRequest {
            task: &task,
            backend: "m",
            source_code: "",
            tests: &[],
            code: "print(1)",
            verdict: &ok,
        };
        let exec = Executor::default();
        assert!(matches!(repair_task(&req, &[Corrector::rules()], 4, &exec), Err(RectifyError::AlreadySuccessful)));
        let bad = Verdict::compilation_error(1, "x".into());
        let req = RepairRequest { verdict: &bad, ..req };
        assert!(matches!(repair_task(&req, &[], 4, &exec), Err(RectifyError::EmptyChain)));
        assert!(matches!(repair_task(&req, &[Corrector::rules()], 0, &exec), Err(RectifyError::ZeroBudget)));
        // nothing triggers: the attempt records no change
        let a = repair_task(&req, &[Corrector::rules()], 4, &exec).unwrap();
        assert_eq!((a.corrector.as_str(), a.success, a.candidates_evaluated), ("none", false, 0));
        assert_eq!(a.code_after, a.code_before);
    }
}
