//! A tolerant, line-oriented reading of Python source: enough of a tokenizer
//! and Pratt parser to find true divisions between integer-typed operands,
//! plus indentation-based loop analysis.
//!
//! Anything the parser does not understand (comprehensions, lambdas,
//! decorators, walrus) makes the enclosing statement opaque, and opaque code
//! never produces a rewrite.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use crate::analysis::mask::mask;
use crate::lang::Language;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int,
    Float,
    Str,
    Op(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Range<usize>,
}

const OPS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "**", "//", "==", "!=", "<=", ">=", "->", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "@=", "<<", ">>", ":=", "+", "-", "*", "/", "%", "@", "<", ">", "=", "&", "|", "^", "~", ",", ":", ".", ";",
    "(", ")", "[", "]", "{", "}",
];

fn tokenize(masked: &str, range: Range<usize>) -> Option<Vec<Token>> {
    let b = masked.as_bytes();
    let mut i = range.start;
    let mut out = Vec::new();
    while i < range.end {
        let c = b[i];
        if c == b' ' || c == b'\t' || c == b'\n' || c == b'\r' || c == b'\\' {
            i += 1;
            continue;
        }
        if c == b'"' || c == b'\'' {
            let start = i;
            i = skip_string(b, i, range.end)?;
            out.push(Token { tok: Tok::Str, span: start..i });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 {
            let start = i;
            while i < range.end && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] >= 0x80) {
                i += 1;
            }
            let word = &masked[start..i];
            // string prefixes: f"", rb'', ...
            if i < range.end && (b[i] == b'"' || b[i] == b'\'') && word.len() <= 2 && word.chars().all(|ch| "rRbBfFuU".contains(ch)) {
                i = skip_string(b, i, range.end)?;
                out.push(Token { tok: Tok::Str, span: start..i });
                continue;
            }
            out.push(Token {
                tok: Tok::Name(word.to_string()),
                span: start..i,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && i + 1 < range.end && b[i + 1].is_ascii_digit()) {
            let start = i;
            let mut float = false;
            while i < range.end {
                let d = b[i];
                if d.is_ascii_alphanumeric() || d == b'_' {
                    if matches!(d, b'e' | b'E' | b'j' | b'J') && !masked[start..i].starts_with("0x") {
                        float = true;
                    }
                    i += 1;
                } else if d == b'.' {
                    float = true;
                    i += 1;
                } else if (d == b'+' || d == b'-') && matches!(b[i - 1], b'e' | b'E') && float {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: if float { Tok::Float } else { Tok::Int },
                span: start..i,
            });
            continue;
        }
        let rest = &masked[i..range.end];
        let op = OPS.iter().find(|op| rest.starts_with(**op))?;
        out.push(Token {
            tok: Tok::Op(op),
            span: i..i + op.len(),
        });
        i += op.len();
    }
    Some(out)
}

fn skip_string(b: &[u8], mut i: usize, end: usize) -> Option<usize> {
    let q = b[i];
    let triple = i + 2 < end && b[i + 1] == q && b[i + 2] == q;
    if triple {
        i += 3;
        while i + 2 < end && !(b[i] == q && b[i + 1] == q && b[i + 2] == q) {
            i += 1;
        }
        (i + 2 < end).then_some(i + 3)
    } else {
        i += 1;
        while i < end && b[i] != q {
            i += 1;
        }
        (i < end).then_some(i + 1)
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Name(String),
    Int,
    Float,
    Str,
    Call { func: Box<Expr>, args: Vec<Expr> },
    Index(Box<Expr>, Vec<Expr>),
    Attr(Box<Expr>),
    Unary(&'static str, Box<Expr>),
    Binary { op: &'static str, lhs: Box<Expr>, rhs: Box<Expr>, op_at: usize },
    Seq(Vec<Expr>),
    Cond(Vec<Expr>),
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

const KEYWORD_OPS: &[&str] = &["or", "and", "not", "in", "is", "if", "else", "for", "lambda", "yield", "await"];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_op(&self) -> Option<&'static str> {
        match self.peek() {
            Some(Tok::Op(o)) => Some(o),
            Some(Tok::Name(n)) => KEYWORD_OPS.iter().find(|k| **k == n.as_str()).copied(),
            _ => None,
        }
    }

    fn eat(&mut self, op: &str) -> bool {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn infix_bp(op: &str) -> Option<(u8, u8)> {
        Some(match op {
            "if" => (1, 2),
            "or" => (3, 4),
            "and" => (5, 6),
            "in" | "is" | "not" | "<" | ">" | "==" | "!=" | "<=" | ">=" => (9, 10),
            "|" => (11, 12),
            "^" => (13, 14),
            "&" => (15, 16),
            "<<" | ">>" => (17, 18),
            "+" | "-" => (19, 20),
            "*" | "/" | "//" | "%" | "@" => (21, 22),
            "**" => (26, 25),
            _ => return None,
        })
    }

    fn expr(&mut self, min_bp: u8) -> Option<Expr> {
        let mut lhs = self.prefix()?;
        loop {
            let Some(op) = self.peek_op() else { break };
            let Some((lbp, rbp)) = Self::infix_bp(op) else { break };
            if lbp < min_bp {
                break;
            }
            let op_at = self.toks[self.pos].span.start;
            self.pos += 1;
            if op == "if" {
                let cond = self.expr(0)?;
                if !self.eat("else") {
                    return None;
                }
                let other = self.expr(rbp)?;
                lhs = Expr::Cond(vec![lhs, cond, other]);
                continue;
            }
            if op == "not" && !self.eat("in") {
                return None;
            }
            if op == "is" {
                self.eat("not");
            }
            let rhs = self.expr(rbp)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                op_at,
            };
        }
        Some(lhs)
    }

    fn prefix(&mut self) -> Option<Expr> {
        let tok = self.peek()?.clone();
        self.pos += 1;
        let atom = match tok {
            Tok::Int => Expr::Int,
            Tok::Float => Expr::Float,
            Tok::Str => {
                while matches!(self.peek(), Some(Tok::Str)) {
                    self.pos += 1;
                }
                Expr::Str
            }
            Tok::Name(n) => match n.as_str() {
                "not" => return Some(Expr::Unary("not", Box::new(self.expr(7)?))),
                "lambda" | "yield" | "await" | "for" | "in" | "if" | "else" | "and" | "or" | "is" => return None,
                _ => Expr::Name(n),
            },
            Tok::Op(op) => match op {
                "-" | "+" | "~" => return Some(Expr::Unary(op, Box::new(self.expr(23)?))),
                "*" | "**" => return Some(Expr::Unary(op, Box::new(self.expr(23)?))),
                "(" => Expr::Seq(self.seq(")")?),
                "[" => Expr::Seq(self.seq("]")?),
                "{" => Expr::Seq(self.seq("}")?),
                _ => return None,
            },
        };
        self.trailers(atom)
    }

    fn trailers(&mut self, mut e: Expr) -> Option<Expr> {
        loop {
            match self.peek_op() {
                Some("(") => {
                    self.pos += 1;
                    let args = self.seq(")")?;
                    e = Expr::Call {
                        func: Box::new(e),
                        args,
                    };
                }
                Some("[") => {
                    self.pos += 1;
                    let idx = self.seq("]")?;
                    e = Expr::Index(Box::new(e), idx);
                }
                Some(".") => {
                    self.pos += 1;
                    match self.peek() {
                        Some(Tok::Name(_)) => self.pos += 1,
                        _ => return None,
                    }
                    e = Expr::Attr(Box::new(e));
                }
                _ => return Some(e),
            }
        }
    }

    /// Comma/colon separated items up to `close`. Keyword arguments keep
    /// only their value.
    fn seq(&mut self, close: &str) -> Option<Vec<Expr>> {
        let mut items = Vec::new();
        loop {
            if self.eat(close) {
                return Some(items);
            }
            if let (Some(Tok::Name(_)), Some(Token { tok: Tok::Op("="), .. })) =
                (self.peek(), self.toks.get(self.pos + 1))
            {
                self.pos += 2;
            }
            items.push(self.expr(0)?);
            if self.eat(",") || self.eat(":") {
                continue;
            }
            if self.eat(close) {
                return Some(items);
            }
            return None;
        }
    }
}

fn parse_expr(toks: &[Token]) -> Option<Expr> {
    if toks.is_empty() {
        return None;
    }
    let mut p = Parser { toks, pos: 0 };
    let mut items = vec![p.expr(0)?];
    while p.eat(",") {
        if p.pos == toks.len() {
            break;
        }
        items.push(p.expr(0)?);
    }
    if p.pos != toks.len() {
        return None;
    }
    Some(if items.len() == 1 { items.pop().unwrap() } else { Expr::Seq(items) })
}

/// Splits masked source into logical lines (bracket continuation and
/// backslash continuation joined), returning byte ranges.
fn logical_lines(masked: &str) -> Vec<Range<usize>> {
    let b = masked.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut depth: i32 = 0;
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth = (depth - 1).max(0),
            b'"' | b'\'' => {
                if let Some(j) = skip_string(b, i, b.len()) {
                    i = j;
                    continue;
                }
            }
            b'\n' => {
                let continued = i > 0 && b[i - 1] == b'\\';
                if depth == 0 && !continued {
                    out.push(start..i);
                    start = i + 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    if start < b.len() {
        out.push(start..b.len());
    }
    out
}

#[derive(Debug)]
enum Binding {
    Value(Expr),
    Aug(&'static str, Expr),
    IntLoop,
    MapInt,
    Unknown,
}

#[derive(Default)]
struct Module {
    exprs: Vec<Expr>,
    bindings: Vec<(String, Binding)>,
}

fn split_top(toks: &[Token], op: &str) -> Vec<Range<usize>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
            Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
            Tok::Op(o) if depth == 0 && o == op => {
                parts.push(start..i);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(start..toks.len());
    parts
}

fn target_names(toks: &[Token]) -> Option<Vec<String>> {
    let mut names = Vec::new();
    for part in split_top(toks, ",") {
        let t: Vec<&Token> = toks[part]
            .iter()
            .filter(|t| !matches!(t.tok, Tok::Op("(") | Tok::Op(")") | Tok::Op("[") | Tok::Op("]")))
            .collect();
        match t.as_slice() {
            [] => {}
            [Token { tok: Tok::Name(n), .. }] => names.push(n.clone()),
            // subscript or attribute targets do not bind a name
            _ => return None,
        }
    }
    Some(names)
}

fn is_map_int(e: &Expr) -> bool {
    matches!(e, Expr::Call { func, args } if matches!(func.as_ref(), Expr::Name(n) if n == "map")
        && matches!(args.first(), Some(Expr::Name(n)) if n == "int"))
}

fn analyze_statement(toks: &[Token], m: &mut Module) {
    if toks.is_empty() {
        return;
    }
    let head = match &toks[0].tok {
        Tok::Name(n) => n.as_str(),
        _ => "",
    };
    let top_colon = || {
        let mut depth = 0i32;
        for (i, t) in toks.iter().enumerate() {
            match t.tok {
                Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
                Tok::Op(":") if depth == 0 => return Some(i),
                _ => {}
            }
        }
        None
    };
    match head {
        "for" => {
            let Some(colon) = top_colon() else { return };
            let Some(in_at) = toks[..colon].iter().position(|t| t.tok == Tok::Name("in".into())) else {
                return;
            };
            let iter = parse_expr(&toks[in_at + 1..colon]);
            let is_range = matches!(&iter, Some(Expr::Call { func, .. }) if matches!(func.as_ref(), Expr::Name(n) if n == "range"));
            match target_names(&toks[1..in_at]) {
                Some(names) if names.len() == 1 && is_range => m.bindings.push((names[0].clone(), Binding::IntLoop)),
                Some(names) => m.bindings.extend(names.into_iter().map(|n| (n, Binding::Unknown))),
                None => {}
            }
            if let Some(e) = iter {
                m.exprs.push(e);
            }
            analyze_statement(&toks[colon + 1..], m);
        }
        "if" | "elif" | "while" => {
            let Some(colon) = top_colon() else { return };
            if let Some(e) = parse_expr(&toks[1..colon]) {
                m.exprs.push(e);
            }
            analyze_statement(&toks[colon + 1..], m);
        }
        "else" | "try" | "finally" => {
            if let Some(colon) = top_colon() {
                analyze_statement(&toks[colon + 1..], m);
            }
        }
        "return" | "assert" | "del" | "raise" => {
            if let Some(e) = parse_expr(&toks[1..]) {
                m.exprs.push(e);
            }
        }
        "def" | "class" | "with" | "except" | "import" | "from" | "global" | "nonlocal" | "lambda" => {
            for t in toks {
                if let Tok::Name(n) = &t.tok {
                    m.bindings.push((n.clone(), Binding::Unknown));
                }
            }
        }
        _ => {
            let eq_parts = split_top(toks, "=");
            if eq_parts.len() > 1 {
                let value = eq_parts.last().unwrap().clone();
                let rhs = parse_expr(&toks[value]);
                for part in &eq_parts[..eq_parts.len() - 1] {
                    let Some(names) = target_names(&toks[part.clone()]) else { continue };
                    for (k, n) in names.iter().enumerate() {
                        let b = match &rhs {
                            Some(e) if names.len() == 1 => Binding::Value(e.clone()),
                            Some(e) if is_map_int(e) => Binding::MapInt,
                            Some(Expr::Seq(items)) if items.len() == names.len() => Binding::Value(items[k].clone()),
                            _ => Binding::Unknown,
                        };
                        m.bindings.push((n.clone(), b));
                    }
                }
                if let Some(e) = rhs {
                    m.exprs.push(e);
                }
                return;
            }
            if let Some(pos) = toks.iter().position(|t| matches!(t.tok, Tok::Op(o) if o.len() >= 2 && o.ends_with('=') && !matches!(o, "==" | "!=" | "<=" | ">="))) {
                let op = match toks[pos].tok {
                    Tok::Op(o) => &o[..o.len() - 1],
                    _ => unreachable!(),
                };
                let op: &'static str = OPS.iter().find(|x| **x == op).copied().unwrap_or("?");
                let rhs = parse_expr(&toks[pos + 1..]);
                if let Some(names) = target_names(&toks[..pos]) {
                    for n in names {
                        let b = match &rhs {
                            Some(e) => Binding::Aug(op, e.clone()),
                            None => Binding::Unknown,
                        };
                        m.bindings.push((n, b));
                    }
                }
                if let Some(e) = rhs {
                    m.exprs.push(e);
                }
                return;
            }
            if let Some(e) = parse_expr(toks) {
                m.exprs.push(e);
            }
        }
    }
}

fn analyze(code: &str) -> (String, Module) {
    let masked = mask(code, Language::Python);
    let mut m = Module::default();
    for line in logical_lines(&masked) {
        let Some(toks) = tokenize(&masked, line) else { continue };
        for part in split_top(&toks, ";") {
            analyze_statement(&toks[part], &mut m);
        }
    }
    (masked, m)
}

/// Integer-typedness assuming every qualifying `/` is rewritten to `//`.
fn int_typed(e: &Expr, env: &HashSet<String>) -> bool {
    match e {
        Expr::Int => true,
        Expr::Name(n) => env.contains(n),
        Expr::Call { func, args } => match func.as_ref() {
            Expr::Name(f) if matches!(f.as_str(), "int" | "len" | "ord") => true,
            Expr::Name(f) if matches!(f.as_str(), "abs" | "min" | "max") => {
                !args.is_empty() && args.iter().all(|a| int_typed(a, env))
            }
            _ => false,
        },
        Expr::Unary(op, inner) => matches!(*op, "-" | "+" | "~") && int_typed(inner, env),
        Expr::Binary { op, lhs, rhs, .. } => match *op {
            "+" | "-" | "*" | "//" | "%" | "/" | "&" | "|" | "^" | "<<" | ">>" => int_typed(lhs, env) && int_typed(rhs, env),
            "**" => int_typed(lhs, env) && matches!(rhs.as_ref(), Expr::Int),
            _ => false,
        },
        Expr::Seq(items) if items.len() == 1 => int_typed(&items[0], env),
        _ => false,
    }
}

fn binding_is_int(b: &Binding, env: &HashSet<String>) -> bool {
    match b {
        Binding::IntLoop | Binding::MapInt => true,
        Binding::Value(e) => int_typed(e, env),
        Binding::Aug(op, e) => matches!(*op, "+" | "-" | "*" | "//" | "%") && int_typed(e, env),
        Binding::Unknown => false,
    }
}

fn int_env(m: &Module) -> HashSet<String> {
    let mut by_name: HashMap<&str, Vec<&Binding>> = HashMap::new();
    for (n, b) in &m.bindings {
        by_name.entry(n.as_str()).or_default().push(b);
    }
    let mut env: HashSet<String> = by_name
        .iter()
        .filter(|(_, bs)| !bs.iter().any(|b| matches!(b, Binding::Unknown)))
        .map(|(n, _)| n.to_string())
        .collect();
    loop {
        let drop: Vec<String> = env
            .iter()
            .filter(|n| !by_name[n.as_str()].iter().all(|b| binding_is_int(b, &env)))
            .cloned()
            .collect();
        if drop.is_empty() {
            return env;
        }
        for n in drop {
            env.remove(&n);
        }
    }
}

fn collect_divisions(e: &Expr, env: &HashSet<String>, out: &mut Vec<usize>) {
    match e {
        Expr::Binary { op, lhs, rhs, op_at } => {
            if *op == "/" && int_typed(lhs, env) && int_typed(rhs, env) {
                out.push(*op_at);
            }
            collect_divisions(lhs, env, out);
            collect_divisions(rhs, env, out);
        }
        Expr::Call { func, args } => {
            collect_divisions(func, env, out);
            args.iter().for_each(|a| collect_divisions(a, env, out));
        }
        Expr::Index(base, idx) => {
            collect_divisions(base, env, out);
            idx.iter().for_each(|a| collect_divisions(a, env, out));
        }
        Expr::Attr(inner) | Expr::Unary(_, inner) => collect_divisions(inner, env, out),
        Expr::Seq(items) | Expr::Cond(items) => items.iter().for_each(|a| collect_divisions(a, env, out)),
        Expr::Name(_) | Expr::Int | Expr::Float | Expr::Str => {}
    }
}

/// Byte offsets of every `/` operator whose operands are both integer-typed
/// by local inference. Sorted ascending.
pub fn int_division_sites(code: &str) -> Vec<usize> {
    let (_, m) = analyze(code);
    let env = int_env(&m);
    let mut out = Vec::new();
    for e in &m.exprs {
        collect_divisions(e, &env, &mut out);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Names inferred to always hold integers.
pub fn int_typed_names(code: &str) -> HashSet<String> {
    let (_, m) = analyze(code);
    int_env(&m)
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

/// A `for v in range(...)` loop whose bound depends on a name the body mutates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutableBoundLoop {
    pub header_line: usize,
    pub body: Range<usize>,
    pub indent: String,
    pub var: String,
    pub start: String,
    pub bound: String,
    pub mutated: Vec<String>,
}

fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

const BUILTINS: &[&str] = &["len", "int", "min", "max", "abs", "range", "sum", "ord", "True", "False", "None"];
const MUTATORS: &[&str] = &["append", "pop", "extend", "insert", "remove", "clear", "popleft", "appendleft"];

fn free_names(expr: &str) -> Vec<String> {
    let re = regex::Regex::new(r"(?:^|[^.\w])([A-Za-z_]\w*)").unwrap();
    let mut names: Vec<String> = re
        .captures_iter(expr)
        .map(|c| c[1].to_string())
        .filter(|n| !BUILTINS.contains(&n.as_str()))
        .collect();
    names.sort();
    names.dedup();
    names
}

fn assigns_name(line: &str, name: &str) -> bool {
    let t = line.trim();
    let word = regex::Regex::new(&format!(r"\b{}\b", regex::escape(name))).unwrap();
    for m in MUTATORS {
        if t.contains(&format!("{name}.{m}(")) {
            return true;
        }
    }
    // targets are everything before the first assignment operator
    let bytes = t.as_bytes();
    for (i, &c) in bytes.iter().enumerate() {
        if c != b'=' {
            continue;
        }
        let prev = if i > 0 { bytes[i - 1] } else { b' ' };
        let next = bytes.get(i + 1).copied().unwrap_or(b' ');
        if next == b'=' || matches!(prev, b'=' | b'!' | b'<' | b'>') {
            continue;
        }
        let targets = &t[..i];
        return word.is_match(targets) && !targets.contains('(');
    }
    false
}

/// Finds counted `range` loops whose bound references a variable the loop
/// body reassigns or mutates. Loops containing `continue`, an `else:` clause,
/// a non-unit step, or a reassignment of the loop variable are skipped.
pub fn mutable_bound_loops(code: &str) -> Vec<MutableBoundLoop> {
    let masked = mask(code, Language::Python);
    let mlines: Vec<&str> = masked.lines().collect();
    let olines: Vec<&str> = code.lines().collect();
    let header = regex::Regex::new(r"^(\s*)for\s+([A-Za-z_]\w*)\s+in\s+range\s*\((.*)\)\s*:\s*$").unwrap();
    let mut out = Vec::new();
    for (i, ml) in mlines.iter().enumerate() {
        let Some(c) = header.captures(ml) else { continue };
        let indent = c[1].to_string();
        let var = c[2].to_string();
        let args_range = c.get(3).unwrap().range();
        let args_src = &olines[i][args_range];
        let args = split_args(args_src);
        let (start, bound) = match args.as_slice() {
            [b] => ("0".to_string(), b.to_string()),
            [s, b] => (s.to_string(), b.to_string()),
            [s, b, step] if *step == "1" => (s.to_string(), b.to_string()),
            _ => continue,
        };
        if bound.is_empty() {
            continue;
        }
        let mut end = i + 1;
        let mut last_code = i;
        while end < mlines.len() {
            let l = mlines[end];
            if l.trim().is_empty() {
                end += 1;
                continue;
            }
            if indent_of(l) <= indent.len() {
                break;
            }
            last_code = end;
            end += 1;
        }
        if last_code == i {
            continue;
        }
        let body = i + 1..last_code + 1;
        if let Some(next) = mlines.get(last_code + 1..).and_then(|rest| rest.iter().find(|l| !l.trim().is_empty())) {
            if indent_of(next) == indent.len() && next.trim_start().starts_with("else") {
                continue;
            }
        }
        let body_lines = &mlines[body.clone()];
        let is_continue = |l: &&str| {
            l.trim_start()
                .strip_prefix("continue")
                .is_some_and(|r| !r.starts_with(|c: char| c.is_alphanumeric() || c == '_'))
        };
        if body_lines.iter().any(is_continue) {
            continue;
        }
        if body_lines.iter().any(|l| assigns_name(l, &var)) {
            continue;
        }
        let mutated: Vec<String> = free_names(&bound)
            .into_iter()
            .filter(|n| n != &var && body_lines.iter().any(|l| assigns_name(l, n)))
            .collect();
        if mutated.is_empty() {
            continue;
        }
        out.push(MutableBoundLoop {
            header_line: i,
            body,
            indent,
            var,
            start,
            bound,
            mutated,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_int_division_from_map_int() {
        let code = "a, b = map(int, input().split())\nprint(a / b)\n";
        let sites = int_division_sites(code);
        assert_eq!(sites.len(), 1);
        assert_eq!(&code[sites[0]..sites[0] + 1], "/");
    }

    #[test]
    fn float_operand_blocks_rewrite() {
        let code = "a = float(input())\nb = 2\nprint(a / b)\n";
        assert!(int_division_sites(code).is_empty());
        let code = "a = 3\na = 2.5\nprint(a / 2)\n";
        assert!(int_division_sites(code).is_empty());
    }

    #[test]
    fn loop_counters_and_len_are_int() {
        let code = "xs = input().split()\nn = len(xs)\nfor i in range(n):\n    print((i + 1) / n, n / 2)\n";
        assert_eq!(int_division_sites(code).len(), 2);
    }

    #[test]
    fn nested_and_chained_divisions_reach_fixpoint() {
        let code = "n = int(input())\nm = n / 2\nprint(m / 3, n / 2 / 2)\n";
        assert_eq!(int_division_sites(code).len(), 4);
    }

    #[test]
    fn strings_and_comments_are_ignored() {
        let code = "n = int(input())\nprint('n / 2') # n / 2\nprint(f\"{n / 2}\")\n";
        assert!(int_division_sites(code).is_empty());
    }

    #[test]
    fn params_are_not_assumed_int() {
        let code = "def f(a, b):\n    return a / b\nprint(f(1, 2))\n";
        assert!(int_division_sites(code).is_empty());
    }

    #[test]
    fn int_names() {
        let names = int_typed_names("a = int(input())\nb = a * 2\nc = input()\nd = a / 2\n");
        assert!(names.contains("a") && names.contains("b") && names.contains("d"));
        assert!(!names.contains("c"));
    }

    #[test]
    fn mutable_bound_loop_detected() {
        let code = "n = int(input())\ncount = n\nans = 0\nfor j in range(1, count + 1):\n    count -= j\n    ans += 1\nprint(ans)\n";
        let loops = mutable_bound_loops(code);
        assert_eq!(loops.len(), 1);
        let l = &loops[0];
        assert_eq!(l.header_line, 3);
        assert_eq!(l.body, 4..6);
        assert_eq!(l.var, "j");
        assert_eq!(l.start, "1");
        assert_eq!(l.bound, "count + 1");
        assert_eq!(l.mutated, vec!["count"]);
    }

    #[test]
    fn fixed_bound_loop_ignored() {
        let code = "n = 5\nfor i in range(n):\n    print(i)\n";
        assert!(mutable_bound_loops(code).is_empty());
        let with_continue = "n = 5\nfor i in range(n):\n    n -= 1\n    continue\n";
        assert!(mutable_bound_loops(with_continue).is_empty());
    }
}
