use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exec::Outcome;
use crate::taxonomy::ErrorCategory;

use super::{ReportError, ReportTable, TableKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(format!("unknown format `{other}` (expected md, csv or json)")),
        }
    }
}

/// A rendered table: header plus string cells, fixed column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn s(x: impl ToString) -> String {
    x.to_string()
}

impl Grid {
    pub fn of(table: &ReportTable) -> Grid {
        let key_cols = || vec![s("Dataset"), s("Source"), s("Target")];
        match table {
            ReportTable::Success(t) => {
                let mut header = key_cols();
                header.push(s("Number"));
                header.extend(t.backends.iter().cloned());
                let rows = t
                    .rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.key.dataset.clone(), s(r.key.source.display_name()), s(r.key.target.display_name()), s(r.number)];
                        row.extend(r.cells.values().map(|c| c.as_ref().map_or(s("-"), |c| c.percent.clone())));
                        row
                    })
                    .collect();
                Grid { header, rows }
            }
            ReportTable::Breakdown { rows } => {
                let mut header = key_cols();
                header.extend([s("Backend"), s("Failures")]);
                header.extend(Outcome::FAILURES.iter().map(|o| s(o.name())));
                let rows = rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![
                            r.key.dataset.clone(),
                            s(r.key.source.display_name()),
                            s(r.key.target.display_name()),
                            r.backend.clone(),
                            s(r.failures),
                        ];
                        row.extend(r.shares.iter().map(|x| x.percent.clone()));
                        row
                    })
                    .collect();
                Grid { header, rows }
            }
            ReportTable::Category(t) => {
                let mut header = vec![s("Category")];
                header.extend(t.backends.iter().cloned());
                let mut rows: Vec<Vec<String>> = ErrorCategory::ALL
                    .iter()
                    .map(|c| {
                        let mut row = vec![s(c.name())];
                        row.extend(t.rows[c].values().map(|x| x.percent.clone()));
                        row
                    })
                    .collect();
                let mut total = vec![s("Labeled failures")];
                total.extend(t.totals.values().map(s));
                rows.push(total);
                Grid { header, rows }
            }
            ReportTable::Repair(t) => {
                let mut header = key_cols();
                header.extend(t.backends.iter().cloned());
                let rows = t
                    .rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.key.dataset.clone(), s(r.key.source.display_name()), s(r.key.target.display_name())];
                        row.extend(r.cells.values().map(|c| c.as_ref().map_or(s("-"), |c| c.render())));
                        row
                    })
                    .collect();
                Grid { header, rows }
            }
            ReportTable::Transitions { blocks } => {
                let mut header = vec![s("Backend"), s("Before")];
                header.extend(Outcome::ALL.iter().map(|o| s(o.name())));
                header.extend([s("Total"), s("Fix rate")]);
                let mut rows = Vec::new();
                for b in blocks {
                    for before in Outcome::FAILURES {
                        let mut row = vec![b.backend.clone(), s(before.name())];
                        row.extend(Outcome::ALL.iter().map(|&a| s(b.matrix.get(before, a))));
                        row.push(s(b.matrix.row_sum(before)));
                        row.push(b.matrix.fix_rate(before).map_or(s("-"), |r| r.percent));
                        rows.push(row);
                    }
                }
                Grid { header, rows }
            }
        }
    }

    pub fn to_markdown(&self) -> String {
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
        let mut out = line(&self.header);
        out.push_str(&line(&vec![s("---"); self.header.len()]));
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory csv");
        for r in &self.rows {
            w.write_record(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 cells")
    }
}

pub fn render(table: &ReportTable, format: Format) -> String {
    match format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(table).expect("report serializes");
            t.push('\n');
            t
        }
        Format::Csv => Grid::of(table).to_csv(),
        Format::Markdown => Grid::of(table).to_markdown(),
    }
}

/// Writes `<dir>/<table>.<ext>` atomically and returns its path.
pub fn emit(table: &ReportTable, format: Format, dir: &Path) -> Result<PathBuf, ReportError> {
    let io = |e: std::io::Error| ReportError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let kind: TableKind = table.kind();
    let path = dir.join(format!("{}.{}", kind.name(), format.extension()));
    let mut f = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    f.write_all(render(table, format).as_bytes()).map_err(io)?;
    f.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

/// Zeroes timestamps and sorts lines so two runs of the same pipeline can
/// be compared byte for byte. Blank lines are dropped; lines that are not
/// JSON objects are kept verbatim.
pub fn canonicalize_results(text: &str) -> String {
    let mut lines: Vec<String> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match serde_json::from_str::<serde_json::Value>(l) {
            Ok(serde_json::Value::Object(mut m)) => {
                if m.contains_key("timestamp") {
                    m.insert("timestamp".into(), 0.into());
                }
                serde_json::Value::Object(m).to_string()
            }
            _ => l.to_string(),
        })
        .collect();
    lines.sort();
    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::rec;
    use super::super::*;
    use super::*;

    fn sample() -> Vec<ResultRecord> {
        let mut rs = vec![
            rec("t1", "m", Phase::Translate, Outcome::Success),
            rec("t2", "m", Phase::Translate, Outcome::CompilationError),
        ];
        let mut r = rec("t2", "m", Phase::Repair, Outcome::Success);
        r.before_outcome = Some(Outcome::CompilationError);
        rs.push(r);
        rs
    }

    #[test]
    fn markdown_header_and_determinism() {
        let t = build(TableKind::Success, &sample()).unwrap();
        let md = render(&t, Format::Markdown);
        assert!(md.starts_with("| Dataset | Source | Target | Number | m |\n| --- |"));
        assert!(md.contains("| codenet | C++ | Java | 2 | 50.0% |"));
        let dir = tempfile::tempdir().unwrap();
        let p = emit(&t, Format::Markdown, dir.path()).unwrap();
        let first = std::fs::read(&p).unwrap();
        emit(&t, Format::Markdown, dir.path()).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), first);
    }

    #[test]
    fn json_round_trip_every_table() {
        let rs = sample();
        for kind in [TableKind::Success, TableKind::Breakdown, TableKind::Repair, TableKind::Transitions] {
            let t = build(kind, &rs).unwrap();
            let back: ReportTable = serde_json::from_str(&render(&t, Format::Json)).unwrap();
            assert_eq!(back, t, "{kind}");
        }
    }

    #[test]
    fn csv_quotes_repair_cells() {
        let t = build(TableKind::Repair, &sample()).unwrap();
        assert_eq!(render(&t, Format::Csv), "Dataset,Source,Target,m\ncodenet,C++,Java,1/1 (100.0%)\n");
    }

    #[test]
    fn canonical_form_ignores_time_and_order() {
        let a = "{\"task_id\":\"b\",\"timestamp\":5}\n{\"task_id\":\"a\",\"timestamp\":9}\n";
        let b = "{\"task_id\":\"a\",\"timestamp\":1}\n\n{\"task_id\":\"b\",\"timestamp\":2}\n";
        assert_eq!(canonicalize_results(a), canonicalize_results(b));
        assert_eq!(canonicalize_results(""), "");
    }
}
