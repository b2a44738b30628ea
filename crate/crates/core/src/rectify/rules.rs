//! The deterministic rule corrector. Each rule pairs a trigger over
//! (verdict, code) with a rewrite; every rewrite removes the condition that
//! triggered it, so a second application is a no-op.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::analysis::braces::loop_else_sites;
use crate::analysis::diagnostics::{failed_parse_literal, java_error_line, python_error_line, unresolved_symbols};
use crate::analysis::mask::mask;
use crate::analysis::python::{int_division_sites, mutable_bound_loops};
use crate::analysis::symbols::{std_import, StdImport};
use crate::exec::{java_names, Outcome, Verdict};
use crate::lang::Language;
use crate::taxonomy::ErrorCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    #[serde(rename = "R-IMPORT")]
    Import,
    #[serde(rename = "R-FORELSE")]
    ForElse,
    #[serde(rename = "R-INTDIV")]
    IntDiv,
    #[serde(rename = "R-INPUTSPLIT")]
    InputSplit,
    #[serde(rename = "R-MUTBOUND")]
    MutBound,
    #[serde(rename = "R-MAINCLASS")]
    MainClass,
}

impl RuleId {
    /// Catalog order; also the order of composition.
    pub const CATALOG: [RuleId; 6] = [
        RuleId::Import,
        RuleId::ForElse,
        RuleId::IntDiv,
        RuleId::InputSplit,
        RuleId::MutBound,
        RuleId::MainClass,
    ];

    pub fn id(self) -> &'static str {
        match self {
            RuleId::Import => "R-IMPORT",
            RuleId::ForElse => "R-FORELSE",
            RuleId::IntDiv => "R-INTDIV",
            RuleId::InputSplit => "R-INPUTSPLIT",
            RuleId::MutBound => "R-MUTBOUND",
            RuleId::MainClass => "R-MAINCLASS",
        }
    }

    pub fn category_hint(self) -> ErrorCategory {
        match self {
            RuleId::Import => ErrorCategory::DependencyError,
            RuleId::ForElse => ErrorCategory::SyntacticDifference,
            RuleId::IntDiv | RuleId::MutBound => ErrorCategory::SemanticDifference,
            RuleId::InputSplit => ErrorCategory::DataRelatedError,
            RuleId::MainClass => ErrorCategory::Other,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            RuleId::Import => "insert the standard import that defines an unresolved symbol",
            RuleId::ForElse => "rewrite a loop-else into a completion flag",
            RuleId::IntDiv => "use // for division between integers",
            RuleId::InputSplit => "read several integers from one split line",
            RuleId::MutBound => "re-evaluate a loop bound that the body mutates",
            RuleId::MainClass => "rename the entry class to Main",
        }
    }

    /// The rewritten code, or `None` when the rule does not trigger or the
    /// rewrite would change nothing.
    pub fn apply(self, ctx: &RuleContext<'_>) -> Option<String> {
        if ctx.verdict.outcome == Outcome::Success {
            return None;
        }
        let out = match self {
            RuleId::Import => import(ctx),
            RuleId::ForElse => for_else(ctx),
            RuleId::IntDiv => int_div(ctx),
            RuleId::InputSplit => input_split(ctx),
            RuleId::MutBound => mut_bound(ctx),
            RuleId::MainClass => main_class(ctx),
        }?;
        (out != ctx.code).then_some(out)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::CATALOG
            .into_iter()
            .find(|r| r.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RuleContext<'a> {
    pub verdict: &'a Verdict,
    pub code: &'a str,
    pub source_code: &'a str,
    pub source_lang: Language,
    pub target: Language,
}

impl<'a> RuleContext<'a> {
    fn with_code(&self, code: &'a str) -> RuleContext<'a> {
        RuleContext { code, ..*self }
    }

    fn diagnostic(&self) -> String {
        let v = self.verdict;
        match &v.first_failure {
            Some(f) if f.diagnostic != v.compile_log => format!("{}\n{}", v.compile_log, f.diagnostic),
            _ => v.compile_log.clone(),
        }
    }
}

/// One candidate per triggered rule, then the composition of all triggered
/// rules in catalog order when it differs from every single-rule candidate.
pub fn apply_rules(ctx: &RuleContext<'_>, rules: &[RuleId]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut fired = Vec::new();
    for &r in rules {
        if let Some(code) = r.apply(ctx) {
            fired.push(r);
            out.push((r.id().to_string(), code));
        }
    }
    if fired.len() > 1 {
        let mut code = ctx.code.to_string();
        for &r in &fired {
            if let Some(next) = r.apply(&ctx.with_code(&code)) {
                code = next;
            }
        }
        if out.iter().all(|(_, c)| *c != code) {
            let id = fired.iter().map(|r| r.id()).collect::<Vec<_>>().join("+");
            out.push((id, code));
        }
    }
    out
}

fn re(cell: &'static OnceLock<Regex>, pat: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pat).unwrap())
}

fn line_start_after(code: &str, pos: usize) -> usize {
    code[pos..].find('\n').map_or(code.len(), |i| pos + i + 1)
}

fn insert_line_at(code: &str, at: usize, line: &str) -> String {
    let mut s = String::with_capacity(code.len() + line.len() + 1);
    s.push_str(&code[..at]);
    if at > 0 && !code[..at].ends_with('\n') {
        s.push('\n');
    }
    s.push_str(line);
    s.push('\n');
    s.push_str(&code[at..]);
    s
}

fn java_has_import(code: &str, fq: &str) -> bool {
    let (pkg, _) = fq.rsplit_once('.').unwrap();
    let m = mask(code, Language::Java);
    let exact = format!(r"(?m)^\s*import\s+{}\s*;", regex::escape(fq));
    let star = format!(r"(?m)^\s*import\s+{}\.\*\s*;", regex::escape(pkg));
    Regex::new(&exact).unwrap().is_match(&m) || Regex::new(&star).unwrap().is_match(&m)
}

fn py_has_import(code: &str, imp: &StdImport) -> bool {
    let m = mask(code, Language::Python);
    match imp {
        StdImport::PyModule(module) => {
            Regex::new(&format!(r"(?m)^\s*import\s+([\w.]+\s*,\s*)*{}\b", regex::escape(module)))
                .unwrap()
                .is_match(&m)
        }
        StdImport::PyFrom { module, name } => Regex::new(&format!(
            r"(?m)^\s*from\s+{}\s+import\s+.*\b({}|\*)\b",
            regex::escape(module),
            regex::escape(name)
        ))
        .unwrap()
        .is_match(&m),
        _ => false,
    }
}

fn cpp_has_include(code: &str, header: &str) -> bool {
    let m = mask(code, Language::Cpp);
    Regex::new(&format!(r#"(?m)^\s*#\s*include\s*[<"]({}|bits/stdc\+\+\.h)[>"]"#, regex::escape(header)))
        .unwrap()
        .is_match(&m)
        || code.contains(&format!("#include <{header}>"))
}

fn cpp_uses_std(code: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    re(&R, r"(?m)^\s*using\s+namespace\s+std\s*;").is_match(&mask(code, Language::Cpp))
}

/// Offset of the line after the last match of `pat`.
fn after_last_line(masked: &str, pat: &Regex) -> Option<usize> {
    pat.find_iter(masked).last().map(|m| line_start_after(masked, m.end()))
}

fn import(ctx: &RuleContext<'_>) -> Option<String> {
    if !matches!(ctx.verdict.outcome, Outcome::CompilationError | Outcome::RuntimeError) {
        return None;
    }
    let mut imports: Vec<StdImport> = Vec::new();
    for sym in unresolved_symbols(&ctx.diagnostic()) {
        if let Some(imp) = std_import(ctx.target, &sym) {
            if !imports.contains(&imp) {
                imports.push(imp);
            }
        }
    }
    let mut code = ctx.code.to_string();
    let mut changed = false;
    for imp in imports {
        match (&imp, ctx.target) {
            (StdImport::JavaClass(fq), Language::Java) => {
                if java_has_import(&code, fq) {
                    continue;
                }
                static PKG: OnceLock<Regex> = OnceLock::new();
                let m = mask(&code, Language::Java);
                let at = re(&PKG, r"(?m)^\s*package\s+[\w.]+\s*;")
                    .find(&m)
                    .map_or(0, |p| line_start_after(&m, p.end()));
                code = insert_line_at(&code, at, &format!("import {fq};"));
                changed = true;
            }
            (StdImport::PyModule(_) | StdImport::PyFrom { .. }, Language::Python) => {
                if py_has_import(&code, &imp) {
                    continue;
                }
                let line = match imp {
                    StdImport::PyModule(m) => format!("import {m}"),
                    StdImport::PyFrom { module, name } => format!("from {module} import {name}"),
                    _ => unreachable!(),
                };
                // after a shebang or encoding line, else at the very top
                let at = if code.starts_with("#!") || code.starts_with("# -*-") {
                    line_start_after(&code, 0)
                } else {
                    0
                };
                code = insert_line_at(&code, at, &line);
                changed = true;
            }
            (StdImport::CppHeader { header, std }, Language::Cpp) => {
                static INC: OnceLock<Regex> = OnceLock::new();
                let inc = re(&INC, r"(?m)^\s*#\s*include\b.*$");
                if !cpp_has_include(&code, header) {
                    let m = mask(&code, Language::Cpp);
                    let at = after_last_line(&m, inc).unwrap_or(0);
                    code = insert_line_at(&code, at, &format!("#include <{header}>"));
                    changed = true;
                }
                if *std && !cpp_uses_std(&code) {
                    let m = mask(&code, Language::Cpp);
                    let at = after_last_line(&m, inc).unwrap_or(0);
                    code = insert_line_at(&code, at, "using namespace std;");
                    changed = true;
                }
            }
            _ => {}
        }
    }
    changed.then_some(code)
}

fn fresh_name(code: &str, stem: &str) -> String {
    (0..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !code.contains(n.as_str()))
        .unwrap()
}

fn line_indent(code: &str, pos: usize) -> &str {
    let start = code[..pos].rfind('\n').map_or(0, |i| i + 1);
    let line = &code[start..];
    &line[..line.len() - line.trim_start_matches([' ', '\t']).len()]
}

fn for_else(ctx: &RuleContext<'_>) -> Option<String> {
    if !ctx.target.uses_braces() || ctx.verdict.outcome != Outcome::CompilationError {
        return None;
    }
    let bool_ty = if ctx.target == Language::Java { "boolean" } else { "bool" };
    let mut code = ctx.code.to_string();
    let mut changed = false;
    // rewrite the last site first so earlier offsets stay valid; rescan after each
    for _ in 0..64 {
        let sites = loop_else_sites(&code, ctx.target);
        let Some(s) = sites.last() else { break };
        let flag = fresh_name(&code, "loopCompleted");
        let indent = line_indent(&code, s.header).to_string();
        let body = &code[s.else_body.clone()];
        let mut next = String::with_capacity(code.len() + 128);
        next.push_str(&code[..s.header]);
        next.push_str(&format!("{bool_ty} {flag} = true;\n{indent}"));
        let mut cursor = s.header;
        for &b in &s.breaks {
            next.push_str(&code[cursor..b]);
            next.push_str(&format!("{{ {flag} = false; break; }}"));
            // skip `break` and its semicolon
            let semi = code[b..].find(';').map_or(b + 5, |i| b + i + 1);
            cursor = semi;
        }
        next.push_str(&code[cursor..s.else_kw]);
        next.push_str(&format!("if ({flag}) "));
        next.push_str(body);
        next.push_str(&code[s.else_body.end..]);
        code = next;
        changed = true;
    }
    changed.then_some(code)
}

fn int_div(ctx: &RuleContext<'_>) -> Option<String> {
    if ctx.target != Language::Python || !ctx.source_lang.uses_braces() || ctx.verdict.outcome != Outcome::FunctionalError {
        return None;
    }
    let sites = int_division_sites(ctx.code);
    if sites.is_empty() {
        return None;
    }
    let mut code = String::with_capacity(ctx.code.len() + sites.len());
    let mut last = 0;
    for s in sites {
        code.push_str(&ctx.code[last..s]);
        code.push_str("//");
        last = s + 1;
    }
    code.push_str(&ctx.code[last..]);
    Some(code)
}

fn input_split(ctx: &RuleContext<'_>) -> Option<String> {
    if !matches!(ctx.verdict.outcome, Outcome::RuntimeError | Outcome::FunctionalError) {
        return None;
    }
    let diag = ctx.diagnostic();
    let literal = failed_parse_literal(&diag)?;
    let tokens = literal.split_whitespace().count();
    if tokens < 2 {
        return None;
    }
    let lines: Vec<&str> = ctx.code.split('\n').collect();
    match ctx.target {
        Language::Python => {
            static READ: OnceLock<Regex> = OnceLock::new();
            let read = re(&READ, r"^(\s*)([A-Za-z_]\w*)\s*=\s*(int|float)\(\s*input\(\)(?:\.strip\(\))?\s*\)\s*$");
            let at = python_error_line(&diag)?.checked_sub(1)?;
            let first = read.captures(lines.get(at)?)?;
            let (indent, conv) = (first[1].to_string(), first[3].to_string());
            let mut names = Vec::new();
            for l in lines.iter().skip(at).take(tokens) {
                match read.captures(l) {
                    Some(c) if c[1] == indent && c[3] == conv => names.push(c[2].to_string()),
                    _ => break,
                }
            }
            if names.len() != tokens {
                return None;
            }
            let replacement = format!("{indent}{} = map({conv}, input().split())", names.join(", "));
            let mut out: Vec<String> = lines[..at].iter().map(|s| s.to_string()).collect();
            out.push(replacement);
            out.extend(lines[at + tokens..].iter().map(|s| s.to_string()));
            Some(out.join("\n"))
        }
        Language::Java => {
            static READ: OnceLock<Regex> = OnceLock::new();
            let read = re(
                &READ,
                r"^(\s*)((?:final\s+)?(?:int|long|double)\s+)?([A-Za-z_]\w*)\s*=\s*(Integer\.parseInt|Long\.parseLong|Double\.parseDouble)\(\s*([\w.]+)\.(readLine|nextLine)\(\)(?:\.trim\(\))?\s*\)\s*;\s*$",
            );
            let at = java_error_line(&diag)?.checked_sub(1)?;
            let first = read.captures(lines.get(at)?)?;
            let indent = first[1].to_string();
            let reader = format!("{}.{}()", &first[5], &first[6]);
            let mut decls = Vec::new();
            for l in lines.iter().skip(at).take(tokens) {
                match read.captures(l) {
                    Some(c) if c[1] == indent && format!("{}.{}()", &c[5], &c[6]) == reader => decls.push((
                        c.get(2).map_or(String::new(), |m| m.as_str().to_string()),
                        c[3].to_string(),
                        c[4].to_string(),
                    )),
                    _ => break,
                }
            }
            if decls.len() != tokens {
                return None;
            }
            let arr = fresh_name(ctx.code, "inputTokens");
            let mut out: Vec<String> = lines[..at].iter().map(|s| s.to_string()).collect();
            out.push(format!("{indent}String[] {arr} = {reader}.trim().split(\"\\\\s+\");"));
            for (i, (ty, name, parse)) in decls.iter().enumerate() {
                out.push(format!("{indent}{ty}{name} = {parse}({arr}[{i}]);"));
            }
            out.extend(lines[at + tokens..].iter().map(|s| s.to_string()));
            Some(out.join("\n"))
        }
        Language::Cpp => None,
    }
}

fn mut_bound(ctx: &RuleContext<'_>) -> Option<String> {
    if ctx.target != Language::Python || !matches!(ctx.verdict.outcome, Outcome::FunctionalError | Outcome::RuntimeError) {
        return None;
    }
    let loops = mutable_bound_loops(ctx.code);
    if loops.is_empty() {
        return None;
    }
    let lines: Vec<&str> = ctx.code.split('\n').collect();
    let mut out: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    // bottom-up so earlier line numbers stay valid
    for l in loops.iter().rev() {
        let body_indent = {
            let first = lines[l.body.start];
            first[..first.len() - first.trim_start().len()].to_string()
        };
        let mut replacement = vec![
            format!("{}{} = {}", l.indent, l.var, l.start),
            format!("{}while {} < {}:", l.indent, l.var, l.bound),
        ];
        replacement.extend(lines[l.body.clone()].iter().map(|s| s.to_string()));
        replacement.push(format!("{body_indent}{} += 1", l.var));
        out.splice(l.header_line..l.body.end, replacement);
    }
    Some(out.join("\n"))
}

fn main_class(ctx: &RuleContext<'_>) -> Option<String> {
    static DIAG: OnceLock<Regex> = OnceLock::new();
    let d = re(
        &DIAG,
        r"Could not find or load main class|should be declared in a file named|must be defined in its own file|Main method not found in class|ClassNotFoundException",
    );
    if ctx.target != Language::Java || !d.is_match(&ctx.diagnostic()) {
        return None;
    }
    let names = java_names(ctx.code);
    let old = names.main_class.rsplit('.').next().unwrap_or("Main").to_string();
    if old == "Main" {
        return None;
    }
    let masked = mask(ctx.code, Language::Java);
    let word = Regex::new(&format!(r"\b{}\b", regex::escape(&old))).unwrap();
    let mut out = String::with_capacity(ctx.code.len());
    let mut last = 0;
    for m in word.find_iter(&masked) {
        out.push_str(&ctx.code[last..m.start()]);
        out.push_str("Main");
        last = m.end();
    }
    out.push_str(&ctx.code[last..]);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{FirstFailure, Stage};

    fn failed(outcome: Outcome, diag: &str) -> Verdict {
        if outcome == Outcome::CompilationError {
            return Verdict::compilation_error(1, diag.into());
        }
        Verdict {
            outcome,
            tests_passed: 0,
            tests_total: 1,
            first_failure: Some(FirstFailure {
                test_id: Some("t".into()),
                stage: Stage::Run,
                diagnostic: diag.into(),
                expected: None,
                actual: None,
            }),
            compile_log: String::new(),
            results: vec![],
        }
    }

    fn ctx<'a>(v: &'a Verdict, code: &'a str, sl: Language, tl: Language) -> RuleContext<'a> {
        RuleContext {
            verdict: v,
            code,
            source_code: "",
            source_lang: sl,
            target: tl,
        }
    }

    fn idempotent(rule: RuleId, c: &RuleContext<'_>) -> String {
        let once = rule.apply(c).expect("rule should fire");
        assert_eq!(rule.apply(&c.with_code(&once)), None, "{rule} fired twice on:\n{once}");
        once
    }

    #[test]
    fn java_scanner_import_after_package() {
        let v = failed(Outcome::CompilationError, "Scanner cannot be resolved to a type");
        let code = "package p;\npublic class Main {\n  Scanner s;\n}\n";
        let out = idempotent(RuleId::Import, &ctx(&v, code, Language::Python, Language::Java));
        assert_eq!(out, "package p;\nimport java.util.Scanner;\npublic class Main {\n  Scanner s;\n}\n");
        let wildcard = "import java.util.*;\nclass A { Scanner s; }";
        assert_eq!(RuleId::Import.apply(&ctx(&v, wildcard, Language::Python, Language::Java)), None);
    }

    #[test]
    fn python_and_cpp_imports() {
        let v = failed(Outcome::RuntimeError, "NameError: name 'math' is not defined");
        let out = idempotent(RuleId::Import, &ctx(&v, "print(math.sqrt(4))\n", Language::Java, Language::Python));
        assert_eq!(out, "import math\nprint(math.sqrt(4))\n");
        let v = failed(Outcome::CompilationError, "a.cpp:3:3: error: 'cout' was not declared in this scope");
        let code = "#include <cstdio>\nint main() { cout << 1; }\n";
        let out = idempotent(RuleId::Import, &ctx(&v, code, Language::Java, Language::Cpp));
        assert_eq!(out, "#include <cstdio>\n#include <iostream>\nusing namespace std;\nint main() { cout << 1; }\n");
    }

    #[test]
    fn for_else_flag() {
        let v = failed(Outcome::CompilationError, "error: 'else' without a previous 'if'");
        let code = "int main() {\n    for (int i = 0; i < 3; i++) {\n        if (i == k) break;\n    } else {\n        puts(\"none\");\n    }\n}\n";
        let out = idempotent(RuleId::ForElse, &ctx(&v, code, Language::Python, Language::Cpp));
        assert_eq!(
            out,
            "int main() {\n    bool loopCompleted0 = true;\n    for (int i = 0; i < 3; i++) {\n        if (i == k) { loopCompleted0 = false; break; }\n    } if (loopCompleted0) {\n        puts(\"none\");\n    }\n}\n"
        );
    }

    #[test]
    fn int_div_only_for_int_operands() {
        let v = failed(Outcome::FunctionalError, "output differs");
        let code = "a, b = map(int, input().split())\nprint(a/b, a / 2.0)\n";
        let out = idempotent(RuleId::IntDiv, &ctx(&v, code, Language::Java, Language::Python));
        assert_eq!(out, "a, b = map(int, input().split())\nprint(a//b, a / 2.0)\n");
        // Python source: `/` was true division already
        assert_eq!(RuleId::IntDiv.apply(&ctx(&v, code, Language::Python, Language::Python)), None);
    }

    #[test]
    fn input_split_python() {
        let diag = "Traceback (most recent call last):\n  File \"<workdir>/main.py\", line 2, in <module>\n    a = int(input())\nValueError: invalid literal for int() with base 10: '3 4'";
        let v = failed(Outcome::RuntimeError, diag);
        let code = "# sum\na = int(input())\nb = int(input())\nprint(a + b)\n";
        let out = idempotent(RuleId::InputSplit, &ctx(&v, code, Language::Cpp, Language::Python));
        assert_eq!(out, "# sum\na, b = map(int, input().split())\nprint(a + b)\n");
    }

    #[test]
    fn input_split_java() {
        let diag = "Exception in thread \"main\" java.lang.NumberFormatException: For input string: \"3 4\"\n\tat java.base/java.lang.Integer.parseInt(Integer.java:1)\n\tat Main.main(Main.java:5)";
        let v = failed(Outcome::RuntimeError, diag);
        let code = "import java.io.*;\npublic class Main {\n  public static void main(String[] x) throws IOException {\n    BufferedReader br = new BufferedReader(new InputStreamReader(System.in));\n    int a = Integer.parseInt(br.readLine());\n    int b = Integer.parseInt(br.readLine());\n    System.out.println(a + b);\n  }\n}";
        let out = idempotent(RuleId::InputSplit, &ctx(&v, code, Language::Python, Language::Java));
        assert!(out.contains("    String[] inputTokens0 = br.readLine().trim().split(\"\\\\s+\");\n    int a = Integer.parseInt(inputTokens0[0]);\n    int b = Integer.parseInt(inputTokens0[1]);\n"));
    }

    #[test]
    fn mut_bound_becomes_while() {
        let v = failed(Outcome::FunctionalError, "output differs");
        let code = "count = int(input())\nans = 0\nfor j in range(1, count + 1):\n    count -= j\n    ans += 1\nprint(ans)\n";
        let out = idempotent(RuleId::MutBound, &ctx(&v, code, Language::Cpp, Language::Python));
        assert_eq!(
            out,
            "count = int(input())\nans = 0\nj = 1\nwhile j < count + 1:\n    count -= j\n    ans += 1\n    j += 1\nprint(ans)\n"
        );
    }

    #[test]
    fn main_class_rename() {
        let v = failed(Outcome::RuntimeError, "Error: Could not find or load main class Main");
        let code = "public class Solution {\n  public static void main(String[] a) { Solution s = new Solution(); System.out.println(\"Solution\"); }\n}";
        let out = idempotent(RuleId::MainClass, &ctx(&v, code, Language::Python, Language::Java));
        assert!(out.starts_with("public class Main {"));
        assert!(out.contains("Main s = new Main();") && out.contains("\"Solution\""));
    }

    #[test]
    fn composition_and_success_noop() {
        let v = failed(Outcome::CompilationError, "Scanner cannot be resolved to a type");
        let code = "public class Main { public static void main(String[] a) { Scanner s; for (;;) { break; } else { } } }";
        let c = ctx(&v, code, Language::Python, Language::Java);
        let cands = apply_rules(&c, &RuleId::CATALOG);
        let ids: Vec<&str> = cands.iter().map(|(i, _)| i.as_str()).collect();
        assert_eq!(ids, vec!["R-IMPORT", "R-FORELSE", "R-IMPORT+R-FORELSE"]);
        let ok = Verdict {
            outcome: Outcome::Success,
            tests_passed: 1,
            tests_total: 1,
            first_failure: None,
            compile_log: String::new(),
            results: vec![],
        };
        assert!(apply_rules(&ctx(&ok, code, Language::Python, Language::Java), &RuleId::CATALOG).is_empty());
    }

    #[test]
    fn rule_ids_parse() {
        for r in RuleId::CATALOG {
            assert_eq!(r.id().parse::<RuleId>().unwrap(), r);
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{}\"", r.id()));
        }
    }
}
