//! Structure scans for the brace languages (C++ and Java): matching braces,
//! loops that carry a Python-style `else`, which `break`s belong to a loop,
//! and leftovers from indentation-based syntax.

use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;

use crate::analysis::mask::mask;
use crate::lang::Language;

/// For every `{` the index of its matching `}` (and vice versa); `None` for
/// unbalanced braces.
fn match_pairs(masked: &[u8], open: u8, close: u8) -> Vec<Option<usize>> {
    let mut pairs = vec![None; masked.len()];
    let mut stack = Vec::new();
    for (i, &c) in masked.iter().enumerate() {
        if c == open {
            stack.push(i);
        } else if c == close {
            if let Some(o) = stack.pop() {
                pairs[o] = Some(i);
                pairs[i] = Some(o);
            }
        }
    }
    pairs
}

fn is_ident(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

fn skip_ws_back(b: &[u8], mut i: usize) -> usize {
    while i > 0 && b[i - 1].is_ascii_whitespace() {
        i -= 1;
    }
    i
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn word_before(b: &[u8], end: usize) -> (usize, &str) {
    let mut s = end;
    while s > 0 && is_ident(b[s - 1]) {
        s -= 1;
    }
    (s, std::str::from_utf8(&b[s..end]).unwrap_or(""))
}

fn word_at(b: &[u8], i: usize, w: &str) -> bool {
    b[i..].starts_with(w.as_bytes())
        && (i == 0 || !is_ident(b[i - 1]))
        && b.get(i + w.len()).is_none_or(|c| !is_ident(*c))
}

/// The statement keyword (`for`, `while`, `switch`, `if`, `do`, ...) that
/// introduces the block opened at `open`, with the keyword's byte offset.
fn block_header<'a>(b: &'a [u8], parens: &[Option<usize>], open: usize) -> Option<(usize, &'a str)> {
    let end = skip_ws_back(b, open);
    if end == 0 {
        return None;
    }
    if b[end - 1] == b')' {
        let lp = parens[end - 1]?;
        let kw_end = skip_ws_back(b, lp);
        let (s, w) = word_before(b, kw_end);
        return Some((s, w));
    }
    let (s, w) = word_before(b, end);
    (w == "do" || w == "else" || w == "try").then_some((s, w))
}

/// A loop whose closing brace is directly followed by `else`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopElse {
    /// Offset of the `for`/`while` keyword.
    pub header: usize,
    pub body_open: usize,
    pub body_close: usize,
    /// Offset of the `else` keyword.
    pub else_kw: usize,
    /// The else branch: a braced block (braces included) or one statement.
    pub else_body: Range<usize>,
    pub else_braced: bool,
    /// Offsets of `break` keywords that exit this loop.
    pub breaks: Vec<usize>,
}

/// Ranges of nested loop/switch bodies inside `body`, whose `break`s do not
/// exit the enclosing loop.
fn nested_break_scopes(b: &[u8], braces: &[Option<usize>], parens: &[Option<usize>], body: Range<usize>) -> Vec<Range<usize>> {
    let mut scopes = Vec::new();
    let mut i = body.start;
    while i < body.end {
        let kw = ["for", "while", "switch", "do"].into_iter().find(|w| word_at(b, i, w));
        let Some(kw) = kw else {
            i += 1;
            continue;
        };
        let mut j = skip_ws(b, i + kw.len());
        if kw != "do" {
            if j >= body.end || b[j] != b'(' {
                i += kw.len();
                continue;
            }
            match parens[j] {
                Some(close) => j = skip_ws(b, close + 1),
                None => break,
            }
        }
        if j < body.end && b[j] == b'{' {
            if let Some(close) = braces[j] {
                scopes.push(j..close + 1);
            }
        } else if j < body.end {
            // single statement body: up to the next `;` outside parentheses
            let mut k = j;
            let mut depth = 0i32;
            while k < body.end {
                match b[k] {
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    b';' if depth <= 0 => break,
                    _ => {}
                }
                k += 1;
            }
            scopes.push(j..k + 1);
        }
        i += kw.len();
    }
    scopes
}

fn owned_breaks(b: &[u8], braces: &[Option<usize>], parens: &[Option<usize>], body: Range<usize>) -> Vec<usize> {
    let scopes = nested_break_scopes(b, braces, parens, body.clone());
    (body.start..body.end)
        .filter(|&i| word_at(b, i, "break"))
        .filter(|i| !scopes.iter().any(|s| s.contains(i)))
        .collect()
}

/// Every `for`/`while` loop in `code` followed by an `else` branch, which is
/// never legal in C++ or Java but is what a verbatim Python `for...else`
/// translation looks like.
pub fn loop_else_sites(code: &str, lang: Language) -> Vec<LoopElse> {
    let masked = mask(code, lang);
    let b = masked.as_bytes();
    let braces = match_pairs(b, b'{', b'}');
    let parens = match_pairs(b, b'(', b')');
    let mut out = Vec::new();
    for close in 0..b.len() {
        if b[close] != b'}' {
            continue;
        }
        let Some(open) = braces[close] else { continue };
        if open > close {
            continue;
        }
        let e = skip_ws(b, close + 1);
        if e >= b.len() || !word_at(b, e, "else") {
            continue;
        }
        let Some((header, kw)) = block_header(b, &parens, open) else { continue };
        if !matches!(kw, "for" | "while") {
            continue;
        }
        let body_start = skip_ws(b, e + 4);
        let (else_body, else_braced) = if body_start < b.len() && b[body_start] == b'{' {
            match braces[body_start] {
                Some(c) => (body_start..c + 1, true),
                None => continue,
            }
        } else {
            let mut k = body_start;
            let mut depth = 0i32;
            while k < b.len() {
                match b[k] {
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    b';' if depth <= 0 => break,
                    _ => {}
                }
                k += 1;
            }
            if k >= b.len() {
                continue;
            }
            (body_start..k + 1, false)
        };
        out.push(LoopElse {
            header,
            body_open: open,
            body_close: close,
            else_kw: e,
            else_body,
            else_braced,
            breaks: owned_breaks(b, &braces, &parens, open + 1..close),
        });
    }
    out
}

/// A source-language construct found in code of another language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxMarker {
    /// 1-based line.
    pub line: usize,
    pub marker: &'static str,
}

struct MarkerSet {
    brace_target: Vec<(Regex, &'static str)>,
    java_only: Vec<(Regex, &'static str)>,
    python_target: Vec<(Regex, &'static str)>,
}

fn markers() -> &'static MarkerSet {
    static M: OnceLock<MarkerSet> = OnceLock::new();
    M.get_or_init(|| {
        let r = |p: &str, m: &'static str| (Regex::new(p).unwrap(), m);
        MarkerSet {
            brace_target: vec![
                r(r"^\s*elif\b", "elif"),
                r(r"^\s*def\s+\w+\s*\(", "def"),
                r(r"^\s*(if|while|for|else|elif)\b[^{;]*:\s*$", "colon block header"),
                r(r"^\s*for\s+\w+\s+in\s+", "for-in loop"),
                r(r"\b(True|False|None)\b", "Python literal"),
                r(r"^\s*(print|input)\s*\(", "Python builtin call"),
                r(r"\brange\s*\(", "range call"),
                r(r"\blen\s*\(", "len call"),
            ],
            java_only: vec![r(r"\b(and|or|not)\b\s+\w", "word operator")],
            python_target: vec![
                r(r"[{}]\s*$", "brace block"),
                r(r"^\s*}", "brace block"),
                r(r"&&|\|\|", "C-style logical operator"),
                r(r"\w\+\+|\+\+\w|\w--\s*[;)]", "increment operator"),
                r(r"\belse\s+if\b", "else if"),
                r(r"\b(true|false|null|nullptr)\b", "C-family literal"),
                r(r"^\s*for\s*\(", "C-style for"),
                r(r"\bSystem\.(out|in)\b|\bstd::|\bcout\s*<<|\bcin\s*>>", "C-family I/O"),
                r(r"^\s*(int|long|double|float|char|bool|boolean|String|auto)\s+\w+\s*(=|;|\[)", "typed declaration"),
                r(r"!\s*[A-Za-z_(]", "C-style negation"),
                r(r"^\s*#\s*include\b|^\s*import\s+java\.", "C-family import"),
            ],
        }
    })
}

/// Lines of `code` (written in `target`) that carry syntax of another
/// language. Strings and comments are masked first.
pub fn syntax_markers(code: &str, target: Language) -> Vec<SyntaxMarker> {
    let masked = mask(code, target);
    let m = markers();
    let mut out = Vec::new();
    let mut rules: Vec<&(Regex, &'static str)> = Vec::new();
    match target {
        Language::Python => rules.extend(m.python_target.iter()),
        Language::Java => rules.extend(m.brace_target.iter().chain(m.java_only.iter())),
        Language::Cpp => rules.extend(m.brace_target.iter()),
    }
    for (n, line) in masked.lines().enumerate() {
        if let Some((_, marker)) = rules.iter().find(|(re, _)| re.is_match(line)) {
            // `!=` is an ordinary Python operator
            if *marker == "C-style negation" && !line.replace("!=", "").contains('!') {
                continue;
            }
            out.push(SyntaxMarker { line: n + 1, marker });
        }
    }
    if target != Language::Python {
        for site in loop_else_sites(code, target) {
            let line = code[..site.else_kw].matches('\n').count() + 1;
            out.push(SyntaxMarker { line, marker: "loop else" });
        }
        out.sort_by_key(|m| m.line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOR_ELSE: &str = "int main() {\n  for (int i = 0; i < n; i++) {\n    if (a[i] == k) { cout << i; break; }\n    for (int j = 0; j < 3; j++) { if (j == 1) break; }\n    while (x) break;\n  } else {\n    cout << -1;\n  }\n}\n";

    #[test]
    fn finds_loop_else_and_owned_breaks() {
        let sites = loop_else_sites(FOR_ELSE, Language::Cpp);
        assert_eq!(sites.len(), 1);
        let s = &sites[0];
        assert_eq!(&FOR_ELSE[s.header..s.header + 3], "for");
        assert_eq!(s.breaks.len(), 1);
        assert!(FOR_ELSE[..s.breaks[0]].ends_with("cout << i; "));
        assert_eq!(&FOR_ELSE[s.else_body.clone()], "{\n    cout << -1;\n  }");
        assert!(s.else_braced);
    }

    #[test]
    fn if_else_is_not_loop_else() {
        let code = "if (x) { y(); } else { z(); }\nwhile (a) { if (b) { c(); } else d(); }";
        assert!(loop_else_sites(code, Language::Java).is_empty());
    }

    #[test]
    fn else_in_comment_ignored() {
        let code = "for (;;) { break; } // else { }\n";
        assert!(loop_else_sites(code, Language::Java).is_empty());
    }

    #[test]
    fn unbraced_else_statement() {
        let code = "while (i < n) { if (f(i)) break; i++; } else found = false;\n";
        let s = &loop_else_sites(code, Language::Java)[0];
        assert!(!s.else_braced);
        assert_eq!(&code[s.else_body.clone()], "found = false;");
    }

    #[test]
    fn markers_per_target() {
        let py_in_java = "public class Main {\n  static void f() {\n    if x > 0:\n      return;\n  }\n}";
        let m = syntax_markers(py_in_java, Language::Java);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].line, 3);
        let c_in_py = "n = int(input())\nif n > 0 && n < 5:\n    print('&&')\n";
        let m = syntax_markers(c_in_py, Language::Python);
        assert_eq!(m, vec![SyntaxMarker { line: 2, marker: "C-style logical operator" }]);
        assert!(syntax_markers("x = 1\nif x != 2:\n    print(x)\n", Language::Python).is_empty());
        let m = syntax_markers(FOR_ELSE, Language::Cpp);
        assert!(m.iter().any(|m| m.marker == "loop else" && m.line == 6));
    }
}
