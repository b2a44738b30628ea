use serde::{Deserialize, Serialize};

use crate::analysis::detect::{is_opener, looks_like_code, looks_like_prose};
use crate::lang::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtractionMethod {
    Sentinel,
    FencedBlock,
    LanguageHeuristic,
    WholeCompletion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub code: String,
    pub method: ExtractionMethod,
    pub warnings: Vec<String>,
}

pub const NO_CODE_WARNING: &str = "no code region detected";

fn strip_blank_edges(s: &str) -> String {
    let lines: Vec<&str> = s.split('\n').collect();
    let first = lines.iter().position(|l| !l.trim().is_empty());
    let Some(first) = first else { return String::new() };
    let last = lines.iter().rposition(|l| !l.trim().is_empty()).unwrap();
    lines[first..=last].join("\n")
}

struct Fence {
    tag: String,
    body: String,
    closed: bool,
}

fn fences(text: &str) -> Vec<Fence> {
    let mut out = Vec::new();
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in text.split('\n') {
        let t = line.trim();
        match open.take() {
            None => {
                if let Some(rest) = t.strip_prefix("```") {
                    open = Some((rest.trim().to_ascii_lowercase(), Vec::new()));
                }
            }
            Some((tag, mut body)) => {
                if t.starts_with("```") {
                    out.push(Fence {
                        tag,
                        body: body.join("\n"),
                        closed: true,
                    });
                } else {
                    body.push(line);
                    open = Some((tag, body));
                }
            }
        }
    }
    if let Some((tag, body)) = open {
        out.push(Fence {
            tag,
            body: body.join("\n"),
            closed: false,
        });
    }
    out
}

/// First fenced block tagged for `target` (or untagged) with a non-blank
/// body, plus warnings about what was skipped.
fn fenced(text: &str, target: Language) -> Option<(String, Vec<String>)> {
    let all = fences(text);
    let mut usable = all
        .iter()
        .filter(|f| f.tag.is_empty() || target.fence_tags().contains(&f.tag.as_str()))
        .filter(|f| !f.body.trim().is_empty());
    let first = usable.next()?;
    let mut warnings = Vec::new();
    let ignored = all.iter().filter(|f| !f.body.trim().is_empty()).count() - 1;
    if ignored > 0 {
        warnings.push(format!("ignored {ignored} additional fenced block(s)"));
    }
    if !first.closed {
        warnings.push("fenced block is not terminated".to_string());
    }
    Some((strip_blank_edges(&first.body), warnings))
}

/// Lines from the first target-language opener up to the first prose line
/// that follows.
fn heuristic(text: &str, target: Language, require_opener: bool) -> Option<String> {
    let lines: Vec<&str> = text.split('\n').collect();
    let start = lines
        .iter()
        .position(|l| is_opener(l, target))
        .or_else(|| (!require_opener).then(|| lines.iter().position(|l| looks_like_code(l, target))).flatten())?;
    let mut end = lines.len();
    for (i, l) in lines.iter().enumerate().skip(start + 1) {
        if looks_like_prose(l) || l.trim_start().starts_with("```") {
            end = i;
            break;
        }
    }
    let code = strip_blank_edges(&lines[start..end].join("\n"));
    (!code.is_empty()).then_some(code)
}

/// Pulls the translated program out of a raw completion. Tries, in order: the
/// sentinel cut, the first fenced block, a target-language opener, and finally
/// the whole completion (with a warning).
pub fn extract_code(raw: &str, target: Language, sentinel: Option<&str>) -> ExtractionResult {
    let sentinel = sentinel.filter(|s| !s.is_empty());
    if let Some(s) = sentinel {
        if let Some(at) = raw.find(s) {
            let before = &raw[..at];
            let cut = match fenced(before, target) {
                Some((code, w)) => Some((code, w)),
                None => heuristic(before, target, false).map(|c| (c, Vec::new())),
            };
            if let Some((code, warnings)) = cut.filter(|(c, _)| !c.is_empty()) {
                return ExtractionResult {
                    code,
                    method: ExtractionMethod::Sentinel,
                    warnings,
                };
            }
        }
    }
    let cleaned = match sentinel {
        Some(s) => raw.replace(s, ""),
        None => raw.to_string(),
    };
    if let Some((code, warnings)) = fenced(&cleaned, target) {
        return ExtractionResult {
            code,
            method: ExtractionMethod::FencedBlock,
            warnings,
        };
    }
    if let Some(code) = heuristic(&cleaned, target, true) {
        return ExtractionResult {
            code,
            method: ExtractionMethod::LanguageHeuristic,
            warnings: Vec::new(),
        };
    }
    ExtractionResult {
        code: strip_blank_edges(&cleaned),
        method: ExtractionMethod::WholeCompletion,
        warnings: vec![NO_CODE_WARNING.to_string()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_with_chatter() {
        let r = extract_code("Here is the code:\n```python\nprint(1)\n```\nHope it helps", Language::Python, None);
        assert_eq!(r.code, "print(1)");
        assert_eq!(r.method, ExtractionMethod::FencedBlock);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn sentinel_cut() {
        let r = extract_code("print(1)\n|End-of-Code| extra chatter", Language::Python, Some("|End-of-Code|"));
        assert_eq!(r.code, "print(1)");
        assert_eq!(r.method, ExtractionMethod::Sentinel);
    }

    #[test]
    fn sentinel_beats_fence() {
        let raw = "Sure.\n```java\nclass A {}\n```\n|End-of-Code|\n```java\nclass B {}\n```";
        let r = extract_code(raw, Language::Java, Some("|End-of-Code|"));
        assert_eq!(r.method, ExtractionMethod::Sentinel);
        assert_eq!(r.code, "class A {}");
    }

    #[test]
    fn multiple_fences_warn() {
        let raw = "```cpp\nint a;\n```\ntext\n```cpp\nint b;\n```\n```\nint c;\n```";
        let r = extract_code(raw, Language::Cpp, None);
        assert_eq!(r.code, "int a;");
        assert_eq!(r.warnings, vec!["ignored 2 additional fenced block(s)"]);
    }

    #[test]
    fn heuristic_opener() {
        let raw = "The translation follows below.\n\nimport java.util.*;\npublic class Main {}\n\nThis program reads the input.";
        let r = extract_code(raw, Language::Java, None);
        assert_eq!(r.method, ExtractionMethod::LanguageHeuristic);
        assert_eq!(r.code, "import java.util.*;\npublic class Main {}");
    }

    #[test]
    fn prose_only_falls_back() {
        let r = extract_code("I am sorry, I cannot help with that request.", Language::Cpp, None);
        assert_eq!(r.method, ExtractionMethod::WholeCompletion);
        assert_eq!(r.warnings, vec![NO_CODE_WARNING]);
    }

    #[test]
    fn sentinel_never_in_code() {
        let r = extract_code("blah |End-of-Code|", Language::Python, Some("|End-of-Code|"));
        assert!(!r.code.contains("|End-of-Code|"));
    }

    #[test]
    fn fence_round_trip_keeps_indentation() {
        let c = "    x = 1\n\n  y = 2   ";
        let r = extract_code(&format!("```python\n{c}\n```"), Language::Python, None);
        assert_eq!(r.code, c);
    }
}
