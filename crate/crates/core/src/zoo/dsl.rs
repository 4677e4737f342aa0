//! The `.space` description language for ray complexes.
//!
//! ```text
//! # comments run to the end of the line
//! ray alpha
//! ray beta
//! glue alpha:0 beta:0
//! base alpha:0
//! repeat i=1..3 {
//!   ray g{i}
//!   seg ca{i} 2^i
//!   glue ca{i}:0 g{i}:0
//!   glue ca{i}:2^i alpha:i
//! }
//! ```
//!
//! Statements are line-oriented. Identifiers may embed `{expr}` pieces that
//! evaluate to integers. Expressions use integers, loop variables, `+ - * /`,
//! `^` (integer power, right associative) and parentheses, all evaluated
//! exactly. Ranges in `repeat` are inclusive. An edge must be declared before
//! a `glue` or `base` refers to it.
//!
//! Diagnostics carry a code, a 1-based line and column (0 when the problem is
//! about the whole document) and a message. Codes: `E_SYNTAX`,
//! `E_UNDECLARED`, `E_LENGTH_NONPOSITIVE`, `E_NO_BASEPOINT`,
//! `E_DISCONNECTED`, `E_DUPLICATE`, `E_PARAM_RANGE`.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::complex::{BuildError, RayComplex, RayComplexBuilder};
use crate::scalar::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}:{}: {}", self.code, self.line, self.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

fn diag(code: &'static str, pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic { code, line: pos.line, col: pos.col, message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Var(String, Pos),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>, Pos),
}

#[derive(Clone, Debug, PartialEq)]
pub enum IdPart {
    Lit(String),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdTemplate {
    pub parts: Vec<IdPart>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Loc {
    pub id: IdTemplate,
    pub param: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Ray { id: IdTemplate, pos: Pos },
    Seg { id: IdTemplate, length: Expr, pos: Pos },
    Glue { a: Loc, b: Loc, pos: Pos },
    Base { at: Loc, pos: Pos },
    Repeat { var: String, from: i64, to: i64, body: Vec<Item>, pos: Pos },
}

/// Parsed, not yet evaluated, description.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceDescription {
    pub items: Vec<Item>,
    pub lines: usize,
}

/// Character cursor over one word of a line.
struct Cursor<'a> {
    chars: Vec<char>,
    at: usize,
    line: usize,
    col0: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize, col0: usize) -> Self {
        Cursor { chars: src.chars().collect(), at: 0, line, col0, _src: src }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col0 + self.at }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.at += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn done(&mut self) -> bool {
        self.skip_ws();
        self.at >= self.chars.len()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.at;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.at += 1;
        }
        if self.at == start || self.chars[start].is_ascii_digit() {
            self.at = start;
            return None;
        }
        Some(self.chars[start..self.at].iter().collect())
    }

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        let pos = self.pos();
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp), pos));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        self.skip_ws();
        let pos = self.pos();
        match self.peek() {
            Some('(') => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(diag("E_SYNTAX", self.pos(), "expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.at;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.at += 1;
                }
                let digits: String = self.chars[start..self.at].iter().collect();
                Ok(Expr::Int(digits.parse().expect("digits")))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => Ok(Expr::Var(self.ident().expect("identifier"), pos)),
            Some(c) => Err(diag("E_SYNTAX", pos, format!("unexpected `{c}` in expression"))),
            None => Err(diag("E_SYNTAX", pos, "expected an expression")),
        }
    }

    /// Identifier with optional `{expr}` pieces, e.g. `cb{i+1}`.
    fn id_template(&mut self) -> Result<IdTemplate, Diagnostic> {
        self.skip_ws();
        let pos = self.pos();
        let mut parts = Vec::new();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = self.at;
                    while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                        self.at += 1;
                    }
                    parts.push(IdPart::Lit(self.chars[start..self.at].iter().collect()));
                }
                Some('{') => {
                    self.at += 1;
                    let e = self.expr()?;
                    if !self.eat('}') {
                        return Err(diag("E_SYNTAX", self.pos(), "expected `}` closing identifier piece"));
                    }
                    parts.push(IdPart::Expr(e));
                }
                _ => break,
            }
        }
        match parts.first() {
            Some(IdPart::Lit(s)) if !s.starts_with(|c: char| c.is_ascii_digit()) => Ok(IdTemplate { parts, pos }),
            _ => Err(diag("E_SYNTAX", pos, "expected an identifier")),
        }
    }

    fn loc(&mut self) -> Result<Loc, Diagnostic> {
        let id = self.id_template()?;
        if !self.eat(':') {
            return Err(diag("E_SYNTAX", self.pos(), "expected `:` after identifier"));
        }
        let param = self.expr()?;
        Ok(Loc { id, param })
    }

    fn int(&mut self) -> Result<i64, Diagnostic> {
        self.skip_ws();
        let pos = self.pos();
        let neg = self.eat('-');
        self.skip_ws();
        let start = self.at;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.at += 1;
        }
        let digits: String = self.chars[start..self.at].iter().collect();
        let v: i64 = digits.parse().map_err(|_| diag("E_SYNTAX", pos, "expected an integer"))?;
        Ok(if neg { -v } else { v })
    }
}

/// Splits a line into whitespace-separated words with 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(b, w)| (line[..b].chars().count() + 1, w)).collect()
}

fn parse_word<T>(
    word: Option<&(usize, &str)>,
    line: usize,
    end_col: usize,
    what: &str,
    f: impl FnOnce(&mut Cursor) -> Result<T, Diagnostic>,
) -> Result<T, Diagnostic> {
    let Some(&(col, text)) = word else {
        return Err(diag("E_SYNTAX", Pos { line, col: end_col }, format!("expected {what}")));
    };
    let mut cur = Cursor::new(text, line, col);
    let v = f(&mut cur)?;
    if !cur.done() {
        return Err(diag("E_SYNTAX", cur.pos(), format!("unexpected trailing input in {what}")));
    }
    Ok(v)
}

/// Parses a description. Only syntax is checked here.
pub fn parse_space(text: &str) -> Result<SpaceDescription, Diagnostic> {
    let mut stack: Vec<(String, i64, i64, Pos, Vec<Item>)> = Vec::new();
    let mut top: Vec<Item> = Vec::new();
    let mut lines = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        lines = line;
        let content = raw.split('#').next().unwrap_or("");
        let ws = words(content);
        let Some(&(kw_col, kw)) = ws.first() else { continue };
        let pos = Pos { line, col: kw_col };
        let end_col = content.chars().count() + 1;
        let item = match kw {
            "ray" => {
                let id = parse_word(ws.get(1), line, end_col, "an identifier", |c| c.id_template())?;
                if ws.len() > 2 {
                    return Err(diag("E_SYNTAX", Pos { line, col: ws[2].0 }, "unexpected input after ray identifier"));
                }
                Item::Ray { id, pos }
            }
            "seg" => {
                let id = parse_word(ws.get(1), line, end_col, "an identifier", |c| c.id_template())?;
                let Some(&(col, _)) = ws.get(2) else {
                    return Err(diag("E_SYNTAX", Pos { line, col: end_col }, "expected a length expression"));
                };
                let rest: String = content.chars().skip(col - 1).collect();
                let mut cur = Cursor::new(&rest, line, col);
                let length = cur.expr()?;
                if !cur.done() {
                    return Err(diag("E_SYNTAX", cur.pos(), "unexpected trailing input in length"));
                }
                Item::Seg { id, length, pos }
            }
            "glue" => {
                let a = parse_word(ws.get(1), line, end_col, "a location `id:param`", |c| c.loc())?;
                let b = parse_word(ws.get(2), line, end_col, "a location `id:param`", |c| c.loc())?;
                if ws.len() > 3 {
                    return Err(diag("E_SYNTAX", Pos { line, col: ws[3].0 }, "unexpected input after glue"));
                }
                Item::Glue { a, b, pos }
            }
            "base" => {
                let at = parse_word(ws.get(1), line, end_col, "a location `id:param`", |c| c.loc())?;
                if ws.len() > 2 {
                    return Err(diag("E_SYNTAX", Pos { line, col: ws[2].0 }, "unexpected input after base"));
                }
                Item::Base { at, pos }
            }
            "repeat" => {
                let rest: String = content.chars().skip(kw_col - 1 + "repeat".len()).collect();
                let mut cur = Cursor::new(&rest, line, kw_col + "repeat".len());
                let var = cur.ident().ok_or_else(|| diag("E_SYNTAX", cur.pos(), "expected a loop variable"))?;
                if !cur.eat('=') {
                    return Err(diag("E_SYNTAX", cur.pos(), "expected `=`"));
                }
                let from = cur.int()?;
                if !(cur.eat('.') && cur.eat('.')) {
                    return Err(diag("E_SYNTAX", cur.pos(), "expected `..`"));
                }
                let to = cur.int()?;
                if !cur.eat('{') || !cur.done() {
                    return Err(diag("E_SYNTAX", cur.pos(), "expected `{` ending the repeat line"));
                }
                stack.push((var, from, to, pos, std::mem::take(&mut top)));
                continue;
            }
            "}" => {
                if ws.len() > 1 {
                    return Err(diag("E_SYNTAX", Pos { line, col: ws[1].0 }, "unexpected input after `}`"));
                }
                let Some((var, from, to, rpos, outer)) = stack.pop() else {
                    return Err(diag("E_SYNTAX", pos, "`}` without an open repeat"));
                };
                let body = std::mem::replace(&mut top, outer);
                Item::Repeat { var, from, to, body, pos: rpos }
            }
            other => return Err(diag("E_SYNTAX", pos, format!("unknown statement `{other}`"))),
        };
        top.push(item);
    }
    if let Some((_, _, _, pos, _)) = stack.last() {
        return Err(diag("E_SYNTAX", *pos, "repeat block is never closed"));
    }
    Ok(SpaceDescription { items: top, lines })
}

const MAX_EXPONENT: u64 = 4096;
const MAX_ITERATIONS: i64 = 1_000_000;

fn eval(e: &Expr, env: &BTreeMap<String, Q>) -> Result<Q, Diagnostic> {
    Ok(match e {
        Expr::Int(v) => Q::from_integer(v.clone()),
        Expr::Var(name, pos) => {
            env.get(name).cloned().ok_or_else(|| diag("E_UNDECLARED", *pos, format!("unknown variable `{name}`")))?
        }
        Expr::Neg(inner) => -eval(inner, env)?,
        Expr::Bin(op, a, b, pos) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.is_zero() {
                        return Err(diag("E_SYNTAX", *pos, "division by zero"));
                    }
                    x / y
                }
                BinOp::Pow => {
                    let exp = y
                        .is_integer()
                        .then(|| y.to_integer().to_u64())
                        .flatten()
                        .filter(|&k| k <= MAX_EXPONENT)
                        .ok_or_else(|| diag("E_SYNTAX", *pos, format!("exponent {y} must be an integer in 0..={MAX_EXPONENT}")))?;
                    let mut acc = Q::one();
                    for _ in 0..exp {
                        acc *= &x;
                    }
                    acc
                }
            }
        }
    })
}

fn eval_id(t: &IdTemplate, env: &BTreeMap<String, Q>) -> Result<String, Diagnostic> {
    let mut out = String::new();
    for part in &t.parts {
        match part {
            IdPart::Lit(s) => out.push_str(s),
            IdPart::Expr(e) => {
                let v = eval(e, env)?;
                if !v.is_integer() {
                    return Err(diag("E_SYNTAX", t.pos, format!("identifier piece evaluates to non-integer {v}")));
                }
                out.push_str(&v.to_integer().to_string());
            }
        }
    }
    Ok(out)
}

fn build_diag(err: BuildError, pos: Pos) -> Diagnostic {
    diag(err.code(), pos, err.to_string())
}

fn run(items: &[Item], env: &mut BTreeMap<String, Q>, b: &mut RayComplexBuilder) -> Result<(), Diagnostic> {
    for item in items {
        match item {
            Item::Ray { id, pos } => {
                b.ray(&eval_id(id, env)?).map_err(|e| build_diag(e, *pos))?;
            }
            Item::Seg { id, length, pos } => {
                let name = eval_id(id, env)?;
                let len = eval(length, env)?;
                if !len.is_positive() {
                    return Err(diag(
                        "E_LENGTH_NONPOSITIVE",
                        *pos,
                        format!("segment `{name}` has nonpositive length {len}"),
                    ));
                }
                b.segment(&name, len).map_err(|e| build_diag(e, *pos))?;
            }
            Item::Glue { a, b: c, pos } => {
                let (an, ap) = (eval_id(&a.id, env)?, eval(&a.param, env)?);
                let (cn, cp) = (eval_id(&c.id, env)?, eval(&c.param, env)?);
                b.glue((&an, ap), (&cn, cp)).map_err(|e| build_diag(e, *pos))?;
            }
            Item::Base { at, pos } => {
                let (n, p) = (eval_id(&at.id, env)?, eval(&at.param, env)?);
                b.basepoint((&n, p)).map_err(|e| build_diag(e, *pos))?;
            }
            Item::Repeat { var, from, to, body, pos } => {
                if to.saturating_sub(*from) > MAX_ITERATIONS {
                    return Err(diag("E_SYNTAX", *pos, "repeat range is too long"));
                }
                let shadowed = env.get(var).cloned();
                for i in *from..=*to {
                    env.insert(var.clone(), Q::from_integer(BigInt::from(i)));
                    run(body, env, b)?;
                }
                match shadowed {
                    Some(v) => env.insert(var.clone(), v),
                    None => env.remove(var),
                };
            }
        }
    }
    Ok(())
}

/// Evaluates a description into a complex.
pub fn compile(desc: &SpaceDescription) -> Result<RayComplex, Diagnostic> {
    let mut builder = RayComplexBuilder::new();
    run(&desc.items, &mut BTreeMap::new(), &mut builder)?;
    builder.build().map_err(|e| build_diag(e, Pos::default()))
}

/// Canonical text of a complex; parsing and compiling it gives the same complex.
pub fn serialize(space: &RayComplex) -> String {
    space.canonical_text()
}

/// `parse_space` followed by `compile`.
pub fn compile_str(text: &str) -> Result<RayComplex, Diagnostic> {
    compile(&parse_space(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn code(text: &str) -> &'static str {
        compile_str(text).unwrap_err().code
    }

    #[test]
    fn expressions_are_exact() {
        let env: BTreeMap<String, Q> = [("i".to_string(), q(62))].into();
        let mut c = Cursor::new("2^i - 2*i", 1, 1);
        let e = c.expr().unwrap();
        assert_eq!(eval(&e, &env).unwrap().to_string(), "4611686018427387780");
        let mut c = Cursor::new("-2^2 + 7/2", 1, 1);
        assert_eq!(eval(&c.expr().unwrap(), &env).unwrap().to_string(), "-1/2");
        let mut c = Cursor::new("2^3^2", 1, 1);
        assert_eq!(eval(&c.expr().unwrap(), &env).unwrap(), q(512));
    }

    #[test]
    fn diagnostics_have_codes_and_positions() {
        assert_eq!(code("ray a\nseg s -3\n"), "E_LENGTH_NONPOSITIVE");
        let d = compile_str("ray a\nbase a:0\nglue a:1 b:0\n").unwrap_err();
        assert_eq!((d.code, d.line, d.col), ("E_UNDECLARED", 3, 1));
        assert_eq!(code("ray a\n"), "E_NO_BASEPOINT");
        assert_eq!(code("ray a\nray b\nbase a:0\n"), "E_DISCONNECTED");
        let d = compile_str("ray a\nglue a:0 a:(1\n").unwrap_err();
        assert_eq!((d.code, d.line), ("E_SYNTAX", 2));
        assert_eq!(code("ray a\nray a\n"), "E_DUPLICATE");
        assert_eq!(code("seg s 1\nglue s:2 s:0\n"), "E_PARAM_RANGE");
        assert_eq!(code("repeat i=1..2 {\nray g{i}\n"), "E_SYNTAX");
        assert_eq!(code("}\n"), "E_SYNTAX");
        assert_eq!(code("ray g{j}\n"), "E_UNDECLARED");
        assert_eq!(code("seg s 1/0\n"), "E_SYNTAX");
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = compile_str("# x\n\nray a   # the ray\nbase a:0\n").unwrap();
        assert_eq!(c.canonical_text(), "ray a\nbase a:0\n");
    }

    #[test]
    fn nested_repeats() {
        let text = "ray a\nbase a:0\nrepeat i=1..2 {\nrepeat j=1..2 {\nseg s{i}x{j} i*j\nglue s{i}x{j}:0 a:i+j\n}\n}\n";
        let c = compile_str(text).unwrap();
        assert_eq!(c.edge_count(), 5);
        assert_eq!(c.edge_kind(c.edge_id("s2x2").unwrap()), &crate::complex::EdgeKind::Segment(crate::scalar::q(4)));
    }
}
