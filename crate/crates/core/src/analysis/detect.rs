//! Cheap line- and token-level signals: which language a snippet is written
//! in, whether a line opens a program, whether a line is natural-language
//! prose, and how repetitive a completion is.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use crate::lang::Language;

struct Signals {
    cpp: Vec<(Regex, i32)>,
    java: Vec<(Regex, i32)>,
    python: Vec<(Regex, i32)>,
}

fn signals() -> &'static Signals {
    static S: OnceLock<Signals> = OnceLock::new();
    S.get_or_init(|| {
        let r = |p: &str, w: i32| (Regex::new(p).unwrap(), w);
        Signals {
            cpp: vec![
                r(r"(?m)^\s*#\s*include\b", 3),
                r(r"\bstd::", 2),
                r(r"(?m)^\s*using\s+namespace\b", 3),
                r(r"\b(cout|cin)\s*(<<|>>)", 2),
                r(r"\bint\s+main\s*\(", 2),
                r(r"\b(printf|scanf)\s*\(", 1),
                r(r"\blong\s+long\b", 2),
            ],
            java: vec![
                r(r"\bpublic\s+(final\s+)?class\b", 3),
                r(r"\bSystem\.(out|in)\b", 3),
                r(r"(?m)^\s*import\s+java\.", 3),
                r(r"\bString\s*\[\s*\]", 2),
                r(r"\bpublic\s+static\s+void\s+main\b", 3),
                r(r"\bnew\s+Scanner\b", 2),
            ],
            python: vec![
                r(r"(?m)^\s*def\s+\w+\s*\(.*\)\s*:", 3),
                r(r"(?m)^\s*(if|elif|while|for)\b[^;{]*:\s*$", 2),
                r(r"(?m)^\s*elif\b", 3),
                r(r"\binput\(\)", 2),
                r(r"(?m)^\s*(from\s+\w+\s+import|import\s+\w+\s*$)", 2),
                r(r"\bprint\((?s:.)*?\)\s*$", 1),
                r(r"\brange\s*\(", 1),
            ],
        }
    })
}

fn score(code: &str, rules: &[(Regex, i32)]) -> i32 {
    rules.iter().filter(|(re, _)| re.is_match(code)).map(|(_, w)| *w).sum()
}

/// Best-guess language of a snippet, or `None` when the evidence is weak or
/// ambiguous.
pub fn detect_language(code: &str) -> Option<Language> {
    let s = signals();
    let mut scored = [
        (score(code, &s.cpp), Language::Cpp),
        (score(code, &s.java), Language::Java),
        (score(code, &s.python), Language::Python),
    ];
    // braces and semicolons count against Python
    let semis = code.lines().filter(|l| l.trim_end().ends_with(';')).count();
    if semis >= 2 {
        scored[2].0 -= 3;
    }
    scored.sort_by_key(|s| std::cmp::Reverse(s.0));
    let (best, lang) = scored[0];
    if best >= 3 && best > scored[1].0 {
        Some(lang)
    } else {
        None
    }
}

fn opener_regex(lang: Language) -> &'static Regex {
    static CPP: OnceLock<Regex> = OnceLock::new();
    static JAVA: OnceLock<Regex> = OnceLock::new();
    static PY: OnceLock<Regex> = OnceLock::new();
    match lang {
        Language::Cpp => CPP.get_or_init(|| {
            Regex::new(r"^\s*(#\s*include\b|#\s*define\b|using\s+namespace\b|typedef\b|template\s*<|int\s+main\s*\()").unwrap()
        }),
        Language::Java => JAVA.get_or_init(|| {
            Regex::new(r"^\s*(import\s+[\w.]+(\.\*)?\s*;|package\s+[\w.]+\s*;|(public\s+)?(final\s+)?class\s+\w+)").unwrap()
        }),
        Language::Python => PY.get_or_init(|| {
            Regex::new(r"^(import\s+\w|from\s+[\w.]+\s+import\b|def\s+\w+\s*\(|class\s+\w+\s*[(:]|(print|for|while|if)\b.*[(:]|[A-Za-z_]\w*(\s*,\s*[A-Za-z_]\w*)*\s*=[^=])").unwrap()
        }),
    }
}

/// True when `line` looks like the first line of a `lang` program.
pub fn is_opener(line: &str, lang: Language) -> bool {
    if looks_like_prose(line) {
        return false;
    }
    opener_regex(lang).is_match(line)
}

/// Natural-language sentence heuristic used to trim chatter around code.
pub fn looks_like_prose(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() {
        return false;
    }
    if t.contains(';') || t.contains('{') || t.contains('}') || t.contains("==") || t.contains(" = ") {
        return false;
    }
    let first = t.chars().next().unwrap();
    if !first.is_uppercase() {
        return false;
    }
    let words: Vec<&str> = t.split_whitespace().collect();
    if words.len() < 3 {
        return false;
    }
    let wordy = words
        .iter()
        .filter(|w| {
            let core = w.trim_matches(|c: char| !c.is_alphanumeric());
            !core.is_empty() && core.chars().all(|c| c.is_alphabetic() || c == '\'')
        })
        .count();
    wordy * 10 >= words.len() * 6
}

/// True for lines that plausibly belong to source code.
pub fn looks_like_code(line: &str, lang: Language) -> bool {
    let t = line.trim();
    if t.is_empty() || looks_like_prose(t) {
        return false;
    }
    if is_opener(t, lang) {
        return true;
    }
    t.chars().any(|c| matches!(c, ';' | '{' | '}' | '(' | '=' | '[' | ':'))
}

/// Fraction of non-trivial lines that have an exact duplicate elsewhere in
/// the text. Lines made only of punctuation (`}`, `});`) are ignored.
pub fn duplicate_line_fraction(code: &str) -> f64 {
    let lines: Vec<&str> = code
        .lines()
        .map(str::trim)
        .filter(|l| l.chars().any(|c| c.is_alphanumeric()))
        .collect();
    if lines.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in &lines {
        *counts.entry(l).or_insert(0) += 1;
    }
    let dup = lines.iter().filter(|l| counts[*l] > 1).count();
    dup as f64 / lines.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_each_language() {
        let java = "import java.util.*;\npublic class Main {\n  public static void main(String[] a) { System.out.println(1); }\n}";
        let cpp = "#include <iostream>\nusing namespace std;\nint main() { cout << 1; }";
        let py = "n = int(input())\nfor i in range(n):\n    print(i)\n";
        assert_eq!(detect_language(java), Some(Language::Java));
        assert_eq!(detect_language(cpp), Some(Language::Cpp));
        assert_eq!(detect_language(py), Some(Language::Python));
        assert_eq!(detect_language("hello world"), None);
    }

    #[test]
    fn prose_vs_code() {
        assert!(looks_like_prose("Here is the translated Python code:"));
        assert!(looks_like_prose("Sure! Below is the equivalent Java program."));
        assert!(!looks_like_prose("print(1)"));
        assert!(!looks_like_prose("System.out.println(x);"));
        assert!(!looks_like_prose("Scanner sc = new Scanner(System.in);"));
    }

    #[test]
    fn openers() {
        assert!(is_opener("#include <bits/stdc++.h>", Language::Cpp));
        assert!(is_opener("public class Main {", Language::Java));
        assert!(is_opener("import sys", Language::Python));
        assert!(is_opener("n, m = map(int, input().split())", Language::Python));
        assert!(!is_opener("Here is the code", Language::Python));
    }

    #[test]
    fn duplicate_fraction_ignores_braces() {
        let code = "a();\n}\n}\n}\nb();";
        assert_eq!(duplicate_line_fraction(code), 0.0);
        let degenerate = "x = 1\nx = 1\nx = 1\ny = 2";
        assert!((duplicate_line_fraction(degenerate) - 0.75).abs() < 1e-12);
    }
}
