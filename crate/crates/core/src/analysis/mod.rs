//! Lightweight, language-aware source analysis shared by the classifier and
//! the repair rules. Nothing here builds a full AST; every scan works on
//! masked text so comments and string literals never match.

pub mod braces;
pub mod detect;
pub mod diagnostics;
pub mod mask;
pub mod python;
pub mod symbols;

use std::sync::OnceLock;

use regex::Regex;

use crate::lang::Language;

/// Statement-level loop and branch counts, used to spot translations whose
/// control flow diverges from the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControlFlow {
    pub loops: usize,
    pub branches: usize,
}

pub fn control_flow(code: &str, lang: Language) -> ControlFlow {
    static PY_LOOP: OnceLock<Regex> = OnceLock::new();
    static PY_BRANCH: OnceLock<Regex> = OnceLock::new();
    static C_LOOP: OnceLock<Regex> = OnceLock::new();
    static C_DO_TAIL: OnceLock<Regex> = OnceLock::new();
    static C_BRANCH: OnceLock<Regex> = OnceLock::new();
    let masked = mask::mask(code, lang);
    match lang {
        Language::Python => {
            let lp = PY_LOOP.get_or_init(|| Regex::new(r"(?m)^\s*(for|while)\b").unwrap());
            let br = PY_BRANCH.get_or_init(|| Regex::new(r"(?m)^\s*(if|elif)\b").unwrap());
            ControlFlow {
                loops: lp.find_iter(&masked).count(),
                branches: br.find_iter(&masked).count(),
            }
        }
        Language::Cpp | Language::Java => {
            let lp = C_LOOP.get_or_init(|| Regex::new(r"\b(for|while)\s*\(|\bdo\s*\{").unwrap());
            let tail = C_DO_TAIL.get_or_init(|| Regex::new(r"\}\s*while\s*\([^;{]*\)\s*;").unwrap());
            let br = C_BRANCH.get_or_init(|| Regex::new(r"\bif\s*\(").unwrap());
            ControlFlow {
                loops: lp.find_iter(&masked).count() - tail.find_iter(&masked).count(),
                branches: br.find_iter(&masked).count(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_across_languages() {
        let py = "n = int(input())\nfor i in range(n):\n    if i % 2:\n        print(i)\n    elif i == 4:\n        print('for if')\n";
        let java = "for (int i = 0; i < n; i++) {\n  if (i % 2 == 1) System.out.println(i);\n  else if (i == 4) System.out.println(\"x\");\n}\n";
        assert_eq!(control_flow(py, Language::Python), ControlFlow { loops: 1, branches: 2 });
        assert_eq!(control_flow(java, Language::Java), ControlFlow { loops: 1, branches: 2 });
    }

    #[test]
    fn do_while_counts_once() {
        let cpp = "do { x++; } while (x < 3);\nwhile (y) { y--; }";
        assert_eq!(control_flow(cpp, Language::Cpp).loops, 2);
    }
}
