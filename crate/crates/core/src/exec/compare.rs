use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// How program output is matched against the expected output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ComparePolicy {
    /// Exact match after stripping trailing whitespace from every line and
    /// dropping trailing blank lines.
    #[default]
    Trimmed,
    /// Whitespace-separated tokens; numeric tokens match within an absolute
    /// tolerance, all others exactly.
    TokenFloat { tolerance: f64 },
}

impl ComparePolicy {
    pub fn token_float() -> Self {
        ComparePolicy::TokenFloat { tolerance: 1e-6 }
    }
}

/// Default-policy normal form of program output.
pub fn normalize(bytes: &[u8]) -> String {
    let text = String::from_utf8_lossy(bytes);
    let mut lines: Vec<&str> = text.split('\n').map(|l| l.trim_end()).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

fn numeric(tok: &str) -> Option<f64> {
    static R: OnceLock<Regex> = OnceLock::new();
    let re = R.get_or_init(|| Regex::new(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$").unwrap());
    re.is_match(tok).then(|| tok.parse().ok()).flatten()
}

pub fn compare_output(actual: &[u8], expected: &[u8], policy: ComparePolicy) -> bool {
    match policy {
        ComparePolicy::Trimmed => normalize(actual) == normalize(expected),
        ComparePolicy::TokenFloat { tolerance } => {
            let a = String::from_utf8_lossy(actual);
            let e = String::from_utf8_lossy(expected);
            let mut at = a.split_whitespace();
            let mut et = e.split_whitespace();
            loop {
                match (at.next(), et.next()) {
                    (None, None) => return true,
                    (Some(x), Some(y)) => {
                        let same = match (numeric(x), numeric(y)) {
                            (Some(p), Some(q)) => (p - q).abs() <= tolerance,
                            _ => x == y,
                        };
                        if !same {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_policy() {
        assert!(compare_output(b"42\n", b"42", ComparePolicy::Trimmed));
        assert!(compare_output(b"a  \r\nb\n\n\n", b"a\nb", ComparePolicy::Trimmed));
        assert!(!compare_output(b"3.5", b"3", ComparePolicy::Trimmed));
        assert!(!compare_output(b" 42", b"42", ComparePolicy::Trimmed));
        assert!(!compare_output(b"a\n\nb", b"a\nb", ComparePolicy::Trimmed));
        assert!(compare_output(b"", b"\n\n", ComparePolicy::Trimmed));
    }

    #[test]
    fn token_float_policy() {
        let p = ComparePolicy::token_float();
        assert!(compare_output(b"0.3333333", b"0.333333", p));
        assert!(!compare_output(b"0.33", b"0.333333", p));
        assert!(compare_output(b"YES 1e3\n", b"YES\n1000.0000001", p));
        assert!(!compare_output(b"yes", b"YES", p));
        assert!(!compare_output(b"1 2", b"1", p));
        assert!(!compare_output(b"nan", b"nan0", p));
    }

    #[test]
    fn policy_json_shape() {
        assert_eq!(serde_json::to_string(&ComparePolicy::Trimmed).unwrap(), r#"{"mode":"trimmed"}"#);
        let p: ComparePolicy = serde_json::from_str(r#"{"mode":"token_float","tolerance":0.001}"#).unwrap();
        assert_eq!(p, ComparePolicy::TokenFloat { tolerance: 0.001 });
    }
}
