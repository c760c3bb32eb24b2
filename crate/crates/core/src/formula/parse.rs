use std::collections::BTreeSet;

use super::{expand_sigma, EqFormula, PropFormula, SigmaKind, Var};
use crate::error::ParseError;

/// Names that the parser maps positionally to `x0, x1, ...` in addition to
/// the literal `x<N>` spelling.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub params: Vec<String>,
}

impl ParseOptions {
    pub fn with_params<S: Into<String>>(params: impl IntoIterator<Item = S>) -> Self {
        ParseOptions { params: params.into_iter().map(Into::into).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Eq,
    Neq,
    Ge,
    Le,
    Not,
    Dia,
    Nec,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Dot,
    Ex,
    All,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        let push = |out: &mut Vec<Token>, tok: Tok| out.push(Token { tok, line: l0, column: c0 });
        let two = |s: &str| chars[i..].iter().take(s.chars().count()).copied().eq(s.chars());
        let mut width = 1;
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        } else if c.is_whitespace() {
        } else if two("<->") {
            push(&mut out, Tok::Iff);
            width = 3;
        } else if two("<>") {
            push(&mut out, Tok::Dia);
            width = 2;
        } else if two("<=") {
            push(&mut out, Tok::Le);
            width = 2;
        } else if two(">=") {
            push(&mut out, Tok::Ge);
            width = 2;
        } else if two("->") {
            push(&mut out, Tok::Imp);
            width = 2;
        } else if two("!=") {
            push(&mut out, Tok::Neq);
            width = 2;
        } else if two("[]") {
            push(&mut out, Tok::Nec);
            width = 2;
        } else if c.is_ascii_digit() {
            let start = i;
            while i + width < chars.len() && chars[i + width].is_ascii_digit() {
                width += 1;
            }
            let s: String = chars[start..start + width].iter().collect();
            let n = s.parse().map_err(|_| ParseError { line: l0, column: c0, message: format!("number `{s}` is too large") })?;
            push(&mut out, Tok::Nat(n));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i + width < chars.len() && (chars[i + width].is_alphanumeric() || chars[i + width] == '_' || chars[i + width] == '\'') {
                width += 1;
            }
            push(&mut out, Tok::Ident(chars[start..start + width].iter().collect()));
        } else {
            let tok = match c {
                '=' => Tok::Eq,
                '≠' => Tok::Neq,
                '≥' => Tok::Ge,
                '≤' => Tok::Le,
                '~' | '¬' => Tok::Not,
                '◇' => Tok::Dia,
                '□' => Tok::Nec,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '→' => Tok::Imp,
                '↔' => Tok::Iff,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '.' => Tok::Dot,
                '∃' => Tok::Ex,
                '∀' => Tok::All,
                _ => return Err(ParseError { line: l0, column: c0, message: format!("unexpected character `{c}`") }),
            };
            push(&mut out, tok);
        }
        i += width;
        column += width;
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

/// Surface syntax tree shared by both languages before name resolution.
#[derive(Clone, Debug)]
enum Raw {
    Eq(Name, Name),
    Neq(Name, Name),
    Sigma(SigmaKind),
    PropVar(u32),
    Not(Box<Raw>),
    Dia(Box<Raw>),
    Nec(Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
    Quant(bool, Vec<Name>, Box<Raw>),
}

#[derive(Clone, Copy, Debug)]
enum BinOp {
    And,
    Or,
    Imp,
    Iff,
}

#[derive(Clone, Debug)]
struct Name {
    text: String,
    line: usize,
    column: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prop: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, message: message.into() }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn formula(&mut self) -> Result<Raw, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            acc = Raw::Bin(BinOp::Iff, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    // Implication associates to the right.
    fn imp(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Raw::Bin(BinOp::Imp, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            acc = Raw::Bin(BinOp::Or, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            acc = Raw::Bin(BinOp::And, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Raw::Not(Box::new(self.unary()?)))
            }
            Tok::Dia => {
                self.bump();
                Ok(Raw::Dia(Box::new(self.unary()?)))
            }
            Tok::Nec => {
                self.bump();
                Ok(Raw::Nec(Box::new(self.unary()?)))
            }
            Tok::Ex | Tok::All => {
                let exists = *self.peek() == Tok::Ex;
                self.bump();
                self.quantifier(exists)
            }
            Tok::Ident(s) if !self.prop && (s == "E" || s == "A") && matches!(self.peek_at(1), Tok::Ident(_)) => {
                self.bump();
                self.quantifier(s == "E")
            }
            _ => self.atom(),
        }
    }

    fn quantifier(&mut self, exists: bool) -> Result<Raw, ParseError> {
        if self.prop {
            return Err(self.error("quantifiers are not part of the propositional language"));
        }
        let mut names = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            names.push(self.name()?);
        }
        if names.is_empty() {
            return Err(self.error("expected a bound variable"));
        }
        self.expect(Tok::Dot, "`.` after the bound variables")?;
        let body = self.unary()?;
        Ok(Raw::Quant(exists, names, Box::new(body)))
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(text) if text == "card" => {
                Err(ParseError { line: t.line, column: t.column, message: "`card` cannot be used as a variable".into() })
            }
            Tok::Ident(text) => Ok(Name { text, line: t.line, column: t.column }),
            other => Err(ParseError { line: t.line, column: t.column, message: format!("expected a variable, found {}", describe(&other)) }),
        }
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if self.prop => {
                // `p3` or `p 3`
                if let Some(digits) = s.strip_prefix('p') {
                    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                        let n = digits.parse().map_err(|_| self.error("variable index too large"))?;
                        self.bump();
                        return Ok(Raw::PropVar(n));
                    }
                    if digits.is_empty() {
                        if let Tok::Nat(n) = self.peek_at(1).clone() {
                            self.bump();
                            self.bump();
                            return Ok(Raw::PropVar(u32::try_from(n).map_err(|_| self.error("variable index too large"))?));
                        }
                    }
                }
                Err(self.error(format!("expected a propositional variable `p<n>`, found `{s}`")))
            }
            Tok::Ident(s) if s == "card" => {
                self.bump();
                let op = self.bump();
                let k = match self.bump().tok {
                    Tok::Nat(k) => u32::try_from(k).map_err(|_| self.error("cardinality too large"))?,
                    other => {
                        return Err(ParseError {
                            line: op.line,
                            column: op.column,
                            message: format!("expected a natural number after the comparison, found {}", describe(&other)),
                        })
                    }
                };
                let kind = match op.tok {
                    Tok::Eq => SigmaKind::Exact(k),
                    Tok::Ge => SigmaKind::AtLeast(k),
                    Tok::Le => SigmaKind::AtMost(k),
                    other => {
                        return Err(ParseError {
                            line: op.line,
                            column: op.column,
                            message: format!("expected `=`, `>=` or `<=` after `card`, found {}", describe(&other)),
                        })
                    }
                };
                Ok(Raw::Sigma(kind))
            }
            Tok::Ident(_) => {
                let a = self.name()?;
                let neq = match self.peek() {
                    Tok::Eq => false,
                    Tok::Neq => true,
                    other => return Err(self.error(format!("expected `=` or `!=`, found {}", describe(other)))),
                };
                self.bump();
                let b = self.name()?;
                Ok(if neq { Raw::Neq(a, b) } else { Raw::Eq(a, b) })
            }
            other => Err(self.error(format!("expected a formula, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Nat(n) => format!("`{n}`"),
        Tok::End => "end of input".into(),
        Tok::Eq => "`=`".into(),
        Tok::Neq => "`!=`".into(),
        Tok::Ge => "`>=`".into(),
        Tok::Le => "`<=`".into(),
        Tok::Not => "`~`".into(),
        Tok::Dia => "`<>`".into(),
        Tok::Nec => "`[]`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Imp => "`->`".into(),
        Tok::Iff => "`<->`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Ex => "`∃`".into(),
        Tok::All => "`∀`".into(),
    }
}

fn parse_raw(text: &str, prop: bool) -> Result<Raw, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, prop };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(f)
}

fn explicit_index(name: &str) -> Option<Var> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

struct Resolver<'a> {
    opts: &'a ParseOptions,
    /// Indices handed to bound names that are not spelled `x<N>`.
    fresh: Vec<(String, Var)>,
    next_fresh: Var,
}

impl Resolver<'_> {
    fn free_index(&self, n: &Name) -> Result<Var, ParseError> {
        if let Some(i) = explicit_index(&n.text) {
            return Ok(i);
        }
        if let Some(i) = self.opts.params.iter().position(|p| *p == n.text) {
            return Ok(i as Var);
        }
        Err(ParseError { line: n.line, column: n.column, message: format!("unbound variable `{}`", n.text) })
    }

    fn binder_index(&mut self, n: &Name) -> Var {
        if let Some(i) = explicit_index(&n.text) {
            return i;
        }
        if let Some((_, i)) = self.fresh.iter().find(|(s, _)| *s == n.text) {
            return *i;
        }
        let i = self.next_fresh;
        self.next_fresh += 1;
        self.fresh.push((n.text.clone(), i));
        i
    }

    fn resolve(&mut self, r: &Raw, env: &mut Vec<(String, Var)>) -> Result<EqFormula, ParseError> {
        let lookup = |this: &Self, env: &[(String, Var)], n: &Name| match env.iter().rev().find(|(s, _)| *s == n.text) {
            Some((_, v)) => Ok(*v),
            None => this.free_index(n),
        };
        Ok(match r {
            Raw::Eq(a, b) => EqFormula::atom(lookup(self, env, a)?, lookup(self, env, b)?),
            Raw::Neq(a, b) => EqFormula::not(EqFormula::atom(lookup(self, env, a)?, lookup(self, env, b)?)),
            Raw::Sigma(kind) => expand_sigma(*kind, false),
            Raw::PropVar(_) => unreachable!("propositional variable in the equality language"),
            Raw::Not(a) => EqFormula::not(self.resolve(a, env)?),
            Raw::Dia(a) => EqFormula::diamond(self.resolve(a, env)?),
            Raw::Nec(a) => EqFormula::boxed(self.resolve(a, env)?),
            Raw::Bin(op, a, b) => {
                let (a, b) = (self.resolve(a, env)?, self.resolve(b, env)?);
                match op {
                    BinOp::And => EqFormula::and(a, b),
                    BinOp::Or => EqFormula::or(a, b),
                    BinOp::Imp => EqFormula::implies(a, b),
                    BinOp::Iff => EqFormula::iff(a, b),
                }
            }
            Raw::Quant(exists, names, body) => {
                let vars: Vec<Var> = names.iter().map(|n| self.binder_index(n)).collect();
                for (n, v) in names.iter().zip(&vars) {
                    env.push((n.text.clone(), *v));
                }
                let mut f = self.resolve(body, env)?;
                for _ in names {
                    env.pop();
                }
                for v in vars.iter().rev() {
                    f = if *exists { EqFormula::exists(*v, f) } else { EqFormula::forall(*v, f) };
                }
                f
            }
        })
    }
}

fn collect_explicit(r: &Raw, out: &mut BTreeSet<Var>) {
    let mut name = |n: &Name| {
        if let Some(i) = explicit_index(&n.text) {
            out.insert(i);
        }
    };
    match r {
        Raw::Eq(a, b) | Raw::Neq(a, b) => {
            name(a);
            name(b);
        }
        Raw::Quant(_, names, body) => {
            names.iter().for_each(&mut name);
            collect_explicit(body, out);
        }
        Raw::Not(a) | Raw::Dia(a) | Raw::Nec(a) => collect_explicit(a, out),
        Raw::Bin(_, a, b) => {
            collect_explicit(a, out);
            collect_explicit(b, out);
        }
        Raw::Sigma(_) | Raw::PropVar(_) => {}
    }
}

/// Parses the equality language; free names must be `x<N>`.
pub fn parse_eq(text: &str) -> Result<EqFormula, ParseError> {
    parse_eq_with(text, &ParseOptions::default())
}

/// Parses the equality language with declared parameter names, then
/// normalizes binders.
pub fn parse_eq_with(text: &str, opts: &ParseOptions) -> Result<EqFormula, ParseError> {
    let raw = parse_raw(text, false)?;
    let mut explicit = BTreeSet::new();
    collect_explicit(&raw, &mut explicit);
    let floor = explicit.last().map_or(0, |v| v + 1).max(opts.params.len() as Var);
    let mut resolver = Resolver { opts, fresh: Vec::new(), next_fresh: floor };
    let f = resolver.resolve(&raw, &mut Vec::new())?;
    Ok(f.normalize_binders())
}

pub fn parse_prop(text: &str) -> Result<PropFormula, ParseError> {
    fn build(r: &Raw) -> PropFormula {
        match r {
            Raw::PropVar(p) => PropFormula::Var(*p),
            Raw::Not(a) => PropFormula::not(build(a)),
            Raw::Dia(a) => PropFormula::diamond(build(a)),
            Raw::Nec(a) => PropFormula::boxed(build(a)),
            Raw::Bin(op, a, b) => {
                let (a, b) = (build(a), build(b));
                match op {
                    BinOp::And => PropFormula::and(a, b),
                    BinOp::Or => PropFormula::or(a, b),
                    BinOp::Imp => PropFormula::implies(a, b),
                    BinOp::Iff => PropFormula::iff(a, b),
                }
            }
            Raw::Eq(..) | Raw::Neq(..) | Raw::Sigma(_) | Raw::Quant(..) => {
                unreachable!("equality syntax in the propositional language")
            }
        }
    }
    Ok(build(&parse_raw(text, true)?))
}
