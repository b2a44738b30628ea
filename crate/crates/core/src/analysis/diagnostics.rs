//! Parsing of compiler and interpreter diagnostics (g++, javac, ECJ, CPython,
//! JVM stack traces) into the few facts the classifier and rules need.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

macro_rules! re {
    ($name:ident, $pat:expr) => {
        fn $name() -> &'static Regex {
            static R: OnceLock<Regex> = OnceLock::new();
            R.get_or_init(|| Regex::new($pat).unwrap())
        }
    };
}

const Q: &str = "['\u{2018}\u{2019}`]";

re!(javac_symbol, r"symbol:\s+(?:class|variable|method|interface)\s+(\w+)");
re!(ecj_unresolved, r"\b(\w+) cannot be resolved(?: to a (?:type|variable))?");
re!(ecj_import, r"The import ([\w.]+) cannot be resolved");
re!(py_name, r#"NameError: name ['"](\w+)['"] is not defined"#);
re!(py_module, r#"(?:ModuleNotFoundError|ImportError): No module named ['"]([\w.]+)['"]"#);
re!(py_import_name, r#"ImportError: cannot import name ['"](\w+)['"]"#);
fn gcc_undeclared() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| {
        Regex::new(&format!(
            r"{Q}(?:std::)?(\w+){Q} (?:was not declared|does not name a type|is not a member of {Q}std{Q}|has not been declared)"
        ))
        .unwrap()
    })
}
re!(unresolved_any, r"(?i)cannot find symbol|cannot be resolved|is not defined|was not declared|does not name a type|is not a member of|No module named|cannot import name|has not been declared");
re!(py_value_literal, r#"invalid literal for int\(\) with base \d+: (['"])(.*)['"]\s*$"#);
re!(py_float_literal, r#"could not convert string to float: (['"])(.*)['"]\s*$"#);
re!(java_number_format, r#"NumberFormatException: For input string: "(.*)""#);
re!(py_traceback_line, r#"File "[^"]*", line (\d+)"#);
re!(java_trace_line, r"at (\w[\w$.]*)\((\w+)\.java:(\d+)\)");
re!(input_parse_signature, r"(?i)invalid literal for int|could not convert string to float|NumberFormatException|InputMismatchException|NoSuchElementException|not enough values to unpack|too many values to unpack|EOFError|stoi|std::invalid_argument");

/// Symbols a diagnostic reports as unresolved, in first-seen order, deduplicated.
pub fn unresolved_symbols(diag: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |s: &str| {
        if seen.insert(s.to_string()) {
            out.push(s.to_string());
        }
    };
    for line in diag.lines() {
        for re in [javac_symbol(), py_name(), py_import_name(), gcc_undeclared()] {
            for c in re.captures_iter(line) {
                push(&c[1]);
            }
        }
        if !ecj_import().is_match(line) {
            for c in ecj_unresolved().captures_iter(line) {
                push(&c[1]);
            }
        }
    }
    out
}

/// Module names from "No module named ..." errors.
pub fn missing_modules(diag: &str) -> Vec<String> {
    py_module().captures_iter(diag).map(|c| c[1].to_string()).collect()
}

pub fn mentions_unresolved(diag: &str) -> bool {
    unresolved_any().is_match(diag)
}

/// The offending text of an input-parse failure, if any.
pub fn failed_parse_literal(diag: &str) -> Option<String> {
    for line in diag.lines() {
        let line = line.trim_end();
        if let Some(c) = py_value_literal().captures(line) {
            return Some(c[2].to_string());
        }
        if let Some(c) = py_float_literal().captures(line) {
            return Some(c[2].to_string());
        }
        if let Some(c) = java_number_format().captures(line) {
            return Some(c[1].to_string());
        }
    }
    None
}

pub fn has_input_parse_signature(diag: &str) -> bool {
    input_parse_signature().is_match(diag)
}

/// Line number of the innermost frame of a CPython traceback.
pub fn python_error_line(diag: &str) -> Option<usize> {
    py_traceback_line()
        .captures_iter(diag)
        .last()
        .and_then(|c| c[1].parse().ok())
}

/// Line number of the topmost stack frame in user code of a JVM trace.
pub fn java_error_line(diag: &str) -> Option<usize> {
    java_trace_line()
        .captures_iter(diag)
        .find(|c| !["java.", "jdk.", "sun."].iter().any(|p| c[1].starts_with(p)))
        .and_then(|c| c[3].parse().ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn javac_and_ecj_symbols() {
        let javac = "Main.java:3: error: cannot find symbol\n  Scanner s = new Scanner(System.in);\n  ^\n  symbol:   class Scanner\n  location: class Main";
        assert_eq!(unresolved_symbols(javac), vec!["Scanner"]);
        let ecj = "1. ERROR in Main.java (at line 3)\nScanner cannot be resolved to a type\n2. ERROR\nScanner cannot be resolved to a type";
        assert_eq!(unresolved_symbols(ecj), vec!["Scanner"]);
        assert!(mentions_unresolved(ecj));
    }

    #[test]
    fn gcc_and_python_symbols() {
        let gcc = "main.cpp:3:5: error: 'cout' was not declared in this scope; did you mean 'std::cout'?\nmain.cpp:4:5: error: \u{2018}vector\u{2019} was not declared in this scope";
        assert_eq!(unresolved_symbols(gcc), vec!["cout", "vector"]);
        let py = "Traceback (most recent call last):\n  File \"<workdir>/main.py\", line 2, in <module>\nNameError: name 'math' is not defined";
        assert_eq!(unresolved_symbols(py), vec!["math"]);
        assert_eq!(python_error_line(py), Some(2));
        assert_eq!(missing_modules("ModuleNotFoundError: No module named 'numpy'"), vec!["numpy"]);
    }

    #[test]
    fn parse_literals() {
        let py = "ValueError: invalid literal for int() with base 10: '3 4'";
        assert_eq!(failed_parse_literal(py).as_deref(), Some("3 4"));
        let java = "Exception in thread \"main\" java.lang.NumberFormatException: For input string: \"3 4\"\n\tat java.base/java.lang.Integer.parseInt(Integer.java:1)\n\tat Main.main(Main.java:7)";
        assert_eq!(failed_parse_literal(java).as_deref(), Some("3 4"));
        assert_eq!(java_error_line(java), Some(7));
        assert_eq!(java_error_line("\tat java.lang.Integer.parseInt(Integer.java:580)\n\tat Main.main(Main.java:9)"), Some(9));
        assert!(has_input_parse_signature(java));
    }
}
