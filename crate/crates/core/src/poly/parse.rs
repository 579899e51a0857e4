//! Parser for the system-definition grammar.
//!
//! ```text
//! statement := ("variable" | "variable_group") idents ";"
//!            | "parameter" idents ";"
//!            | "function" idents ";"
//!            | ident "=" expr ";"
//! expr      := term (("+" | "-") term)*
//! term      := unary ("*" unary)*
//! unary     := ("+" | "-") unary | power
//! power     := primary ("^" unary)?
//! primary   := number | "I" | ident | "(" expr ")"
//! ```
//!
//! `%` and `#` start comments that run to the end of the line. Expressions
//! are expanded into sparse term form as they are parsed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{ParamSystem, Term};
use crate::Complex;

const MAX_EXPONENT: u32 = 1024;

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    Undeclared(String),
    Duplicate(String),
    NonSquare { functions: usize, variables: usize },
    BadExponent(String),
    Undefined(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax(msg) => write!(f, "syntax error: {msg}"),
            Self::Undeclared(name) => write!(f, "undeclared identifier `{name}`"),
            Self::Duplicate(name) => write!(f, "duplicate declaration of `{name}`"),
            Self::NonSquare { functions, variables } => write!(
                f,
                "system is not square: {functions} functions but {variables} variables"
            ),
            Self::BadExponent(msg) => write!(f, "invalid exponent: {msg}"),
            Self::Undefined(name) => write!(f, "function `{name}` is declared but never defined"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, ch)) = next {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(ch) = self.peek() {
                if ch.is_whitespace() {
                    self.bump();
                } else if ch == '%' || ch == '#' {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(&(start, ch)) = self.chars.peek() else {
                out.push(Token { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = if ch.is_ascii_alphabetic() || ch == '_' {
                let mut end = start;
                while let Some(&(i, c)) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = i + c.len_utf8();
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(self.src[start..end].to_string())
            } else if ch.is_ascii_digit() || ch == '.' {
                Tok::Number(self.number(start, line, col)?)
            } else if "+-*^()=;,".contains(ch) {
                self.bump();
                Tok::Sym(ch)
            } else {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
                });
            };
            out.push(Token { tok, line, col });
        }
    }

    fn number(&mut self, start: usize, line: usize, col: usize) -> Result<f64, ParseError> {
        let mut end = start;
        let take_digits = |lex: &mut Self, end: &mut usize| {
            while let Some(&(i, c)) = lex.chars.peek() {
                if c.is_ascii_digit() {
                    *end = i + 1;
                    lex.bump();
                } else {
                    break;
                }
            }
        };
        take_digits(self, &mut end);
        if let Some(&(i, '.')) = self.chars.peek() {
            end = i + 1;
            self.bump();
            take_digits(self, &mut end);
        }
        if let Some(&(i, e)) = self.chars.peek() {
            if e == 'e' || e == 'E' {
                // Only consume the exponent marker if digits follow.
                let rest = &self.src[i + 1..];
                let digits_at = if rest.starts_with('+') || rest.starts_with('-') { 1 } else { 0 };
                if rest[digits_at..].starts_with(|c: char| c.is_ascii_digit()) {
                    self.bump();
                    end = i + 1;
                    if digits_at == 1 {
                        self.bump();
                        end += 1;
                    }
                    take_digits(self, &mut end);
                }
            }
        }
        let text = &self.src[start..end];
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| ParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            })
    }
}

/// Expanded polynomial over variables followed by parameters.
#[derive(Clone, Debug, Default)]
struct Poly(BTreeMap<Vec<u32>, Complex>);

impl Poly {
    fn constant(width: usize, c: Complex) -> Self {
        let mut map = BTreeMap::new();
        map.insert(vec![0; width], c);
        Poly(map)
    }

    fn symbol(width: usize, slot: usize) -> Self {
        let mut key = vec![0; width];
        key[slot] = 1;
        let mut map = BTreeMap::new();
        map.insert(key, Complex::new(1.0, 0.0));
        Poly(map)
    }

    fn add(mut self, other: Poly, sign: f64) -> Poly {
        for (k, c) in other.0 {
            let c = if sign < 0.0 { -c } else { c };
            *self.0.entry(k).or_insert(Complex::new(0.0, 0.0)) += c;
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out: BTreeMap<Vec<u32>, Complex> = BTreeMap::new();
        for (ka, ca) in &self.0 {
            for (kb, cb) in &other.0 {
                let key: Vec<u32> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                *out.entry(key).or_insert(Complex::new(0.0, 0.0)) += ca * cb;
            }
        }
        Poly(out)
    }

    fn pow(&self, width: usize, mut e: u32) -> Poly {
        let mut result = Poly::constant(width, Complex::new(1.0, 0.0));
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// The value if this polynomial has no non-constant monomials.
    fn as_constant(&self) -> Option<Complex> {
        let mut value = Complex::new(0.0, 0.0);
        for (k, c) in &self.0 {
            if k.iter().any(|&e| e > 0) {
                if *c != Complex::new(0.0, 0.0) {
                    return None;
                }
            } else {
                value += c;
            }
        }
        Some(value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Symbol {
    Variable(usize),
    Parameter(usize),
    Function(usize),
    /// Named intermediate expression, substituted where it is used.
    Intermediate(usize),
}

struct StatementParser {
    tokens: Vec<Token>,
    pos: usize,
    symbols: HashMap<String, Symbol>,
    vars: Vec<String>,
    params: Vec<String>,
    funcs: Vec<String>,
    definitions: Vec<Option<Poly>>,
    intermediates: Vec<Poly>,
}

impl StatementParser {
    fn new(tokens: Vec<Token>) -> Self {
        Self {
            tokens,
            pos: 0,
            symbols: HashMap::new(),
            vars: Vec::new(),
            params: Vec::new(),
            funcs: Vec::new(),
            definitions: Vec::new(),
            intermediates: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(tok: &Token, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            line: tok.line,
            col: tok.col,
            kind,
        })
    }

    fn expect_sym(&mut self, sym: char) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::Sym(sym) {
            Ok(())
        } else {
            Self::err(&t, ParseErrorKind::Syntax(format!("expected `{sym}`, found {}", describe(&t.tok))))
        }
    }

    fn width(&self) -> usize {
        self.vars.len() + self.params.len()
    }

    fn parse(mut self) -> Result<ParamSystem, ParseError> {
        loop {
            let t = self.next();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(word) => match word.as_str() {
                    "variable" | "variable_group" => self.declare(Symbol::Variable(0))?,
                    "parameter" => self.declare(Symbol::Parameter(0))?,
                    "function" => self.declare(Symbol::Function(0))?,
                    name => self.define(name.to_string(), &t)?,
                },
                other => {
                    return Self::err(
                        &t,
                        ParseErrorKind::Syntax(format!("expected a statement, found {}", describe(other))),
                    )
                }
            }
        }
        let eof = self.peek().clone();
        if self.funcs.len() != self.vars.len() {
            return Self::err(
                &eof,
                ParseErrorKind::NonSquare {
                    functions: self.funcs.len(),
                    variables: self.vars.len(),
                },
            );
        }
        let n = self.vars.len();
        let mut functions = Vec::with_capacity(n);
        for (name, def) in self.funcs.iter().zip(self.definitions) {
            let Some(poly) = def else {
                return Self::err(&eof, ParseErrorKind::Undefined(name.clone()));
            };
            let terms = poly
                .0
                .into_iter()
                .map(|(k, coeff)| Term {
                    coeff,
                    var_exps: k[..n].to_vec(),
                    param_exps: k[n..].to_vec(),
                })
                .collect();
            functions.push(terms);
        }
        ParamSystem::from_terms(self.vars, self.params, self.funcs, functions).map_err(|msg| ParseError {
            line: eof.line,
            col: eof.col,
            kind: ParseErrorKind::Syntax(msg),
        })
    }

    fn declare(&mut self, kind: Symbol) -> Result<(), ParseError> {
        loop {
            let t = self.next();
            let Tok::Ident(name) = &t.tok else {
                return Self::err(&t, ParseErrorKind::Syntax(format!("expected a name, found {}", describe(&t.tok))));
            };
            if is_reserved(name) {
                return Self::err(&t, ParseErrorKind::Syntax(format!("`{name}` is reserved")));
            }
            if self.symbols.contains_key(name) {
                return Self::err(&t, ParseErrorKind::Duplicate(name.clone()));
            }
            if matches!(kind, Symbol::Variable(_) | Symbol::Parameter(_))                 && (self.definitions.iter().any(Option::is_some) || !self.intermediates.is_empty())
            {
                return Self::err(
                    &t,
                    ParseErrorKind::Syntax("variables and parameters must be declared before any definition".into()),
                );
            }
            let sym = match kind {
                Symbol::Variable(_) => {
                    self.vars.push(name.clone());
                    Symbol::Variable(self.vars.len() - 1)
                }
                Symbol::Parameter(_) => {
                    self.params.push(name.clone());
                    Symbol::Parameter(self.params.len() - 1)
                }
                Symbol::Function(_) => {
                    self.funcs.push(name.clone());
                    self.definitions.push(None);
                    Symbol::Function(self.funcs.len() - 1)
                }
                Symbol::Intermediate(_) => unreachable!("intermediates are not declared"),
            };
            self.symbols.insert(name.clone(), sym);
            let sep = self.next();
            match sep.tok {
                Tok::Sym(',') => continue,
                Tok::Sym(';') => return Ok(()),
                ref other => {
                    return Self::err(&sep, ParseErrorKind::Syntax(format!("expected `,` or `;`, found {}", describe(other))))
                }
            }
        }
    }

    fn define(&mut self, name: String, at: &Token) -> Result<(), ParseError> {
        let idx = match self.symbols.get(&name) {
            Some(Symbol::Function(i)) => *i,
            Some(Symbol::Intermediate(_)) => return Self::err(at, ParseErrorKind::Duplicate(name)),
            Some(_) => {
                return Self::err(at, ParseErrorKind::Syntax(format!("`{name}` is not a function")));
            }
            None => {
                if is_reserved(&name) {
                    return Self::err(at, ParseErrorKind::Syntax(format!("`{name}` is reserved")));
                }
                self.expect_sym('=')?;
                let poly = self.expr()?;
                self.expect_sym(';')?;
                self.intermediates.push(poly);
                self.symbols.insert(name, Symbol::Intermediate(self.intermediates.len() - 1));
                return Ok(());
            }
        };
        if self.definitions[idx].is_some() {
            return Self::err(at, ParseErrorKind::Duplicate(name));
        }
        self.expect_sym('=')?;
        let poly = self.expr()?;
        self.expect_sym(';')?;
        self.definitions[idx] = Some(poly);
        Ok(())
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    acc = acc.add(self.term()?, 1.0);
                }
                Tok::Sym('-') => {
                    self.next();
                    acc = acc.add(self.term()?, -1.0);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Sym('*') {
            self.next();
            let rhs = self.unary()?;
            acc = acc.mul(&rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        match self.peek().tok {
            Tok::Sym('-') => {
                self.next();
                let inner = self.unary()?;
                Ok(Poly::default().add(inner, -1.0))
            }
            Tok::Sym('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.next();
        let at = self.peek().clone();
        let exponent = self.unary()?;
        let bad = |msg: String| Self::err(&at, ParseErrorKind::BadExponent(msg));
        let Some(value) = exponent.as_constant() else {
            return bad("exponent must be a constant".into());
        };
        if value.im != 0.0 || value.re.fract() != 0.0 {
            return bad(format!("exponent {value} is not an integer"));
        }
        if value.re < 0.0 {
            return bad(format!("negative exponent {}", value.re));
        }
        if value.re > MAX_EXPONENT as f64 {
            return bad(format!("exponent {} exceeds {MAX_EXPONENT}", value.re));
        }
        Ok(base.pow(self.width(), value.re as u32))
    }

    fn primary(&mut self) -> Result<Poly, ParseError> {
        let t = self.next();
        let width = self.width();
        match &t.tok {
            Tok::Number(v) => Ok(Poly::constant(width, Complex::new(*v, 0.0))),
            Tok::Ident(name) if name == "I" => Ok(Poly::constant(width, Complex::new(0.0, 1.0))),
            Tok::Ident(name) => match self.symbols.get(name) {
                Some(Symbol::Variable(i)) => Ok(Poly::symbol(width, *i)),
                Some(Symbol::Parameter(i)) => Ok(Poly::symbol(width, self.vars.len() + i)),
                Some(Symbol::Intermediate(i)) => Ok(self.intermediates[*i].clone()),
                Some(Symbol::Function(_)) => Self::err(
                    &t,
                    ParseErrorKind::Syntax(format!("function `{name}` cannot appear in an expression")),
                ),
                None => Self::err(&t, ParseErrorKind::Undeclared(name.clone())),
            },
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            other => Self::err(&t, ParseErrorKind::Syntax(format!("expected an operand, found {}", describe(other)))),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "I" | "variable" | "variable_group" | "parameter" | "function")
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(v) => format!("number {v}"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses declarations and definitions into an expanded [`ParamSystem`].
pub fn parse_system(text: &str) -> Result<ParamSystem, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    StatementParser::new(tokens).parse()
}
