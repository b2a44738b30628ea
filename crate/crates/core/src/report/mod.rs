//! Aggregation of the results log into success, breakdown, category and
//! repair tables plus outcome transition matrices. Every aggregate is a pure
//! function of the records.

mod emit;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exec::Outcome;
use crate::lang::Language;
use crate::taxonomy::ErrorCategory;

pub use emit::{canonicalize_results, emit, render, Format, Grid};

/// Label of the column or block that pools every backend.
pub const POOLED: &str = "pooled";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Translate,
    Repair,
}

/// One line of the results log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task_id: String,
    pub backend: String,
    pub dataset: String,
    pub source_lang: Language,
    pub target_lang: Language,
    pub phase: Phase,
    pub outcome: Outcome,
    pub tests_passed: usize,
    pub tests_total: usize,
    #[serde(default)]
    pub category: Option<ErrorCategory>,
    #[serde(default)]
    pub corrector: Option<String>,
    #[serde(default)]
    pub before_outcome: Option<Outcome>,
    /// Unix seconds; zeroed by canonicalization.
    #[serde(default)]
    pub timestamp: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("no records to aggregate for the {0} table")]
    EmptyGroup(&'static str),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("{0}")]
    Io(String),
}

/// Percent with one decimal, rounded half-up, as an integer count of tenths.
pub fn percent_tenths(num: u64, den: u64) -> u64 {
    assert!(den > 0, "percentage of an empty group");
    (2000 * num + den) / (2 * den)
}

pub fn format_tenths(t: u64) -> String {
    format!("{}.{}", t / 10, t % 10)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
    /// Rendered value such as `85.0%`.
    pub percent: String,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Ratio {
        Ratio {
            num,
            den,
            percent: format!("{}%", format_tenths(percent_tenths(num, den))),
        }
    }

    pub fn tenths(&self) -> u64 {
        percent_tenths(self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TableKind {
    Success,
    Breakdown,
    Category,
    Repair,
    Transitions,
}

impl TableKind {
    pub const ALL: [TableKind; 5] = [
        TableKind::Success,
        TableKind::Breakdown,
        TableKind::Category,
        TableKind::Repair,
        TableKind::Transitions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableKind::Success => "success",
            TableKind::Breakdown => "breakdown",
            TableKind::Category => "category",
            TableKind::Repair => "repair",
            TableKind::Transitions => "transitions",
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableKind {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TableKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| ReportError::UnknownTable(s.to_string()))
    }
}

/// Grouping key shared by all row-oriented tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub dataset: String,
    pub source: Language,
    pub target: Language,
}

impl GroupKey {
    fn of(r: &ResultRecord) -> GroupKey {
        GroupKey {
            dataset: r.dataset.clone(),
            source: r.source_lang,
            target: r.target_lang,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessRow {
    #[serde(flatten)]
    pub key: GroupKey,
    /// Distinct tasks in the group.
    pub number: usize,
    /// Success rate per backend; `None` where a backend has no records.
    pub cells: BTreeMap<String, Option<Ratio>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessTable {
    pub backends: Vec<String>,
    pub rows: Vec<SuccessRow>,
}

fn phase_records(records: &[ResultRecord], phase: Phase) -> impl Iterator<Item = &ResultRecord> {
    records.iter().filter(move |r| r.phase == phase)
}

fn backends_of<'a>(records: impl Iterator<Item = &'a ResultRecord>) -> Vec<String> {
    records.map(|r| r.backend.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

pub fn success_table(records: &[ResultRecord]) -> Result<SuccessTable, ReportError> {
    let backends = backends_of(phase_records(records, Phase::Translate));
    if backends.is_empty() {
        return Err(ReportError::EmptyGroup("success"));
    }
    let mut groups: BTreeMap<GroupKey, (BTreeSet<&str>, BTreeMap<&str, (u64, u64)>)> = BTreeMap::new();
    for r in phase_records(records, Phase::Translate) {
        let g = groups.entry(GroupKey::of(r)).or_default();
        g.0.insert(&r.task_id);
        let c = g.1.entry(&r.backend).or_default();
        c.0 += u64::from(r.outcome == Outcome::Success);
        c.1 += 1;
    }
    let rows = groups
        .into_iter()
        .map(|(key, (tasks, counts))| SuccessRow {
            key,
            number: tasks.len(),
            cells: backends
                .iter()
                .map(|b| (b.clone(), counts.get(b.as_str()).map(|&(s, n)| Ratio::new(s, n))))
                .collect(),
        })
        .collect();
    Ok(SuccessTable { backends, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownRow {
    #[serde(flatten)]
    pub key: GroupKey,
    /// A backend name or [`POOLED`].
    pub backend: String,
    pub failures: u64,
    /// Share of each failure outcome, in [`Outcome::FAILURES`] order.
    pub shares: Vec<Ratio>,
}

/// Shares of the four failure outcomes among `counts` (same order as
/// [`Outcome::FAILURES`]).
pub fn failure_shares(counts: [u64; 4]) -> Result<Vec<Ratio>, ReportError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ReportError::EmptyGroup("breakdown"));
    }
    Ok(counts.iter().map(|&c| Ratio::new(c, total)).collect())
}

// Sorts every backend before the pooled column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Column {
    Backend(String),
    Pooled,
}

/// Per-backend rows followed by a pooled row for every group. Groups or
/// backends without failures produce no row.
pub fn error_breakdown(records: &[ResultRecord]) -> Result<Vec<BreakdownRow>, ReportError> {
    let mut counts: BTreeMap<(GroupKey, Column), [u64; 4]> = BTreeMap::new();
    for r in phase_records(records, Phase::Translate).filter(|r| r.outcome != Outcome::Success) {
        let i = r.outcome.index() - 1;
        counts.entry((GroupKey::of(r), Column::Backend(r.backend.clone()))).or_default()[i] += 1;
        counts.entry((GroupKey::of(r), Column::Pooled)).or_default()[i] += 1;
    }
    if counts.is_empty() {
        return Err(ReportError::EmptyGroup("breakdown"));
    }
    counts
        .into_iter()
        .map(|((key, col), c)| {
            Ok(BreakdownRow {
                key,
                backend: match col {
                    Column::Backend(b) => b,
                    Column::Pooled => POOLED.to_string(),
                },
                failures: c.iter().sum(),
                shares: failure_shares(c)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTable {
    pub backends: Vec<String>,
    /// Labeled failures per backend.
    pub totals: BTreeMap<String, u64>,
    /// Category name → backend → share.
    pub rows: BTreeMap<ErrorCategory, BTreeMap<String, Ratio>>,
}

/// Category distribution per backend over labeled failing translations.
pub fn category_table(records: &[ResultRecord]) -> Result<CategoryTable, ReportError> {
    let mut counts: BTreeMap<String, BTreeMap<ErrorCategory, u64>> = BTreeMap::new();
    for r in phase_records(records, Phase::Translate).filter(|r| r.outcome != Outcome::Success) {
        if let Some(c) = r.category {
            *counts.entry(r.backend.clone()).or_default().entry(c).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(ReportError::EmptyGroup("category"));
    }
    let totals: BTreeMap<String, u64> = counts.iter().map(|(b, m)| (b.clone(), m.values().sum())).collect();
    let rows = ErrorCategory::ALL
        .into_iter()
        .map(|cat| {
            let cells = counts
                .iter()
                .map(|(b, m)| (b.clone(), Ratio::new(m.get(&cat).copied().unwrap_or(0), totals[b])))
                .collect();
            (cat, cells)
        })
        .collect();
    Ok(CategoryTable {
        backends: counts.keys().cloned().collect(),
        totals,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairCell {
    pub invalid: u64,
    pub repaired: u64,
    pub rate: Ratio,
}

impl RepairCell {
    pub fn new(invalid: u64, repaired: u64) -> RepairCell {
        RepairCell {
            invalid,
            repaired,
            rate: Ratio::new(repaired, invalid),
        }
    }

    /// `invalid/repaired (rate)`.
    pub fn render(&self) -> String {
        format!("{}/{} ({})", self.invalid, self.repaired, self.rate.percent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRow {
    #[serde(flatten)]
    pub key: GroupKey,
    pub cells: BTreeMap<String, Option<RepairCell>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTable {
    pub backends: Vec<String>,
    pub rows: Vec<RepairRow>,
}

/// Repair attempts per group and translating backend.
pub fn repair_table(records: &[ResultRecord]) -> Result<RepairTable, ReportError> {
    let backends = backends_of(phase_records(records, Phase::Repair));
    if backends.is_empty() {
        return Err(ReportError::EmptyGroup("repair"));
    }
    let mut groups: BTreeMap<GroupKey, BTreeMap<&str, (u64, u64)>> = BTreeMap::new();
    for r in phase_records(records, Phase::Repair) {
        let c = groups.entry(GroupKey::of(r)).or_default().entry(&r.backend).or_default();
        c.0 += 1;
        c.1 += u64::from(r.outcome == Outcome::Success);
    }
    let rows = groups
        .into_iter()
        .map(|(key, counts)| RepairRow {
            key,
            cells: backends
                .iter()
                .map(|b| (b.clone(), counts.get(b.as_str()).map(|&(n, s)| RepairCell::new(n, s))))
                .collect(),
        })
        .collect();
    Ok(RepairTable { backends, rows })
}

/// Counts of (before, after) outcome pairs over repair attempts, indexed in
/// [`Outcome::ALL`] order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub counts: [[u64; 5]; 5],
}

impl TransitionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Outcome, Outcome)>) -> Self {
        let mut m = TransitionMatrix::default();
        for (b, a) in pairs {
            m.add(b, a);
        }
        m
    }

    pub fn add(&mut self, before: Outcome, after: Outcome) {
        self.counts[before.index()][after.index()] += 1;
    }

    pub fn get(&self, before: Outcome, after: Outcome) -> u64 {
        self.counts[before.index()][after.index()]
    }

    pub fn row_sum(&self, before: Outcome) -> u64 {
        self.counts[before.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Share of attempts starting in `before` that ended in Success.
    pub fn fix_rate(&self, before: Outcome) -> Option<Ratio> {
        let n = self.row_sum(before);
        (n > 0).then(|| Ratio::new(self.get(before, Outcome::Success), n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionBlock {
    /// A backend name or [`POOLED`].
    pub backend: String,
    pub matrix: TransitionMatrix,
}

/// Attempts without a recorded starting outcome are ignored.
pub fn transition_matrix(records: &[ResultRecord]) -> TransitionMatrix {
    TransitionMatrix::from_pairs(
        phase_records(records, Phase::Repair).filter_map(|r| r.before_outcome.map(|b| (b, r.outcome))),
    )
}

/// One matrix per translating backend, then the pooled matrix.
pub fn transition_blocks(records: &[ResultRecord]) -> Result<Vec<TransitionBlock>, ReportError> {
    let backends = backends_of(phase_records(records, Phase::Repair));
    if backends.is_empty() {
        return Err(ReportError::EmptyGroup("transitions"));
    }
    let mut out: Vec<TransitionBlock> = backends
        .into_iter()
        .map(|b| {
            let own: Vec<ResultRecord> = records.iter().filter(|r| r.backend == b).cloned().collect();
            TransitionBlock {
                matrix: transition_matrix(&own),
                backend: b,
            }
        })
        .collect();
    out.push(TransitionBlock {
        backend: POOLED.into(),
        matrix: transition_matrix(records),
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "table", rename_all = "lowercase")]
pub enum ReportTable {
    Success(SuccessTable),
    Breakdown { rows: Vec<BreakdownRow> },
    Category(CategoryTable),
    Repair(RepairTable),
    Transitions { blocks: Vec<TransitionBlock> },
}

impl ReportTable {
    pub fn kind(&self) -> TableKind {
        match self {
            ReportTable::Success(_) => TableKind::Success,
            ReportTable::Breakdown { .. } => TableKind::Breakdown,
            ReportTable::Category(_) => TableKind::Category,
            ReportTable::Repair(_) => TableKind::Repair,
            ReportTable::Transitions { .. } => TableKind::Transitions,
        }
    }
}

pub fn build(kind: TableKind, records: &[ResultRecord]) -> Result<ReportTable, ReportError> {
    Ok(match kind {
        TableKind::Success => ReportTable::Success(success_table(records)?),
        TableKind::Breakdown => ReportTable::Breakdown {
            rows: error_breakdown(records)?,
        },
        TableKind::Category => ReportTable::Category(category_table(records)?),
        TableKind::Repair => ReportTable::Repair(repair_table(records)?),
        TableKind::Transitions => ReportTable::Transitions {
            blocks: transition_blocks(records)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn rec(task: &str, backend: &str, phase: Phase, outcome: Outcome) -> ResultRecord {
        ResultRecord {
            task_id: task.into(),
            backend: backend.into(),
            dataset: "codenet".into(),
            source_lang: Language::Cpp,
            target_lang: Language::Java,
            phase,
            outcome,
            tests_passed: 0,
            tests_total: 1,
            category: None,
            corrector: None,
            before_outcome: None,
            timestamp: 0,
        }
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(format_tenths(percent_tenths(1, 2000)), "0.1");
        assert_eq!(format_tenths(percent_tenths(1, 3)), "33.3");
        assert_eq!(format_tenths(percent_tenths(2, 3)), "66.7");
        assert_eq!(format_tenths(percent_tenths(0, 7)), "0.0");
        assert_eq!(format_tenths(percent_tenths(7, 7)), "100.0");
    }

    #[test]
    fn success_cells_and_missing_backend() {
        let mut rs = vec![
            rec("t1", "a", Phase::Translate, Outcome::Success),
            rec("t2", "a", Phase::Translate, Outcome::CompilationError),
            rec("t1", "b", Phase::Translate, Outcome::Success),
        ];
        let mut other = rec("t3", "a", Phase::Translate, Outcome::Success);
        other.target_lang = Language::Python;
        rs.push(other);
        let t = success_table(&rs).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].number, 2);
        assert_eq!(t.rows[0].cells["a"].as_ref().unwrap().percent, "50.0%");
        assert_eq!(t.rows[1].cells["b"], None);
        assert_eq!(success_table(&[]), Err(ReportError::EmptyGroup("success")));
    }

    #[test]
    fn breakdown_pooled_row_last() {
        let rs = vec![
            rec("t1", "a", Phase::Translate, Outcome::NonTerminating),
            rec("t2", "z", Phase::Translate, Outcome::RuntimeError),
            rec("t3", "z", Phase::Translate, Outcome::Success),
        ];
        let rows = error_breakdown(&rs).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.backend.as_str()).collect();
        assert_eq!(names, vec!["a", "z", POOLED]);
        assert_eq!(rows[0].shares[3].percent, "100.0%");
        assert_eq!(rows[2].failures, 2);
        assert!(failure_shares([0; 4]).is_err());
    }

    #[test]
    fn transition_single_attempt() {
        let m = TransitionMatrix::from_pairs([(Outcome::CompilationError, Outcome::FunctionalError)]);
        assert_eq!(m.get(Outcome::CompilationError, Outcome::FunctionalError), 1);
        assert_eq!(m.total(), 1);
        assert_eq!(TransitionMatrix::default().total(), 0);
        assert_eq!(m.fix_rate(Outcome::RuntimeError), None);
    }

    #[test]
    fn record_json_schema() {
        let mut r = rec("t", "b", Phase::Repair, Outcome::Success);
        r.before_outcome = Some(Outcome::CompilationError);
        r.corrector = Some("rules:R-IMPORT".into());
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["phase"], "repair");
        assert_eq!(v["before_outcome"], "CompilationError");
        assert_eq!(v["category"], serde_json::Value::Null);
        assert_eq!(v["source_lang"], "cpp");
        let back: ResultRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
