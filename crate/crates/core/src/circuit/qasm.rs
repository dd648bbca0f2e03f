//! Parser for the QASM-2 subset used to describe compiled circuits.
//!
//! Accepted statements: optional `OPENQASM 2.0;` header, `include "...";`,
//! one `qreg`, one flat `creg`, gate applications with up to two qubit
//! operands and optional real parameters, `swap`, `measure` and `barrier`.
//! Indices refer to physical qubits. The initial logical→physical layout can
//! be given with a `// @layout p0,p1,...` comment (default: identity over the
//! whole register).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use thiserror::Error;

use super::{CompiledCircuit, GateOp, LayoutState};

/// Largest register the parser will allocate.
const MAX_QUBITS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error, expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("{line}:{col}: unknown gate `{name}`")]
    UnknownGate {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: index {index} out of range for register of size {size}")]
    IndexOutOfRange {
        line: usize,
        col: usize,
        index: u64,
        size: usize,
    },
    #[error("{line}:{col}: unsupported: {what}")]
    Unsupported {
        line: usize,
        col: usize,
        what: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str,
    Arrow,
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Directive {
    line: usize,
    body: String,
}

fn lex(text: &str) -> Result<(Vec<Token>, Vec<Directive>), QasmError> {
    let mut tokens = Vec::new();
    let mut directives = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(1, &mut i, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            let body: String = chars[start..end].iter().collect();
            if let Some(rest) = body.trim_start().strip_prefix("@layout") {
                directives.push(Directive {
                    line: tline,
                    body: rest.to_string(),
                });
            }
            col += end - i;
            i = end;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            tokens.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tline,
                col: tcol,
            });
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let syntax = || QasmError::Syntax {
                line: tline,
                col: tcol,
                expected: "number".into(),
            };
            let tok = if real {
                Tok::Real(s.parse().map_err(|_| syntax())?)
            } else {
                Tok::Int(s.parse().map_err(|_| syntax())?)
            };
            tokens.push(Token {
                tok,
                line: tline,
                col: tcol,
            });
        } else if c == '"' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(QasmError::Syntax {
                    line: tline,
                    col: tcol,
                    expected: "closing quote".into(),
                });
            }
            i += 1;
            col += i - start;
            tokens.push(Token {
                tok: Tok::Str,
                line: tline,
                col: tcol,
            });
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(2, &mut i, &mut col);
            tokens.push(Token {
                tok: Tok::Arrow,
                line: tline,
                col: tcol,
            });
        } else if "[](),;+-*/={}".contains(c) {
            advance(1, &mut i, &mut col);
            tokens.push(Token {
                tok: Tok::Sym(c),
                line: tline,
                col: tcol,
            });
        } else {
            return Err(QasmError::Syntax {
                line: tline,
                col: tcol,
                expected: "a token".into(),
            });
        }
    }
    Ok((tokens, directives))
}

struct Register {
    name: String,
    size: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    qreg: Option<Register>,
    creg: Option<Register>,
    layout_spec: Option<(usize, Vec<u64>)>,
    layout: Option<LayoutState>,
    num_logical: usize,
    initial_layout: Vec<usize>,
    ops: Vec<GateOp>,
    measured: BTreeMap<usize, usize>,
    measured_physical: BTreeSet<usize>,
    next_segment: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.col))
    }

    fn syntax(&self, expected: &str) -> QasmError {
        let (line, col) = self.here();
        QasmError::Syntax {
            line,
            col,
            expected: expected.to_string(),
        }
    }

    fn unsupported(&self, at: (usize, usize), what: &str) -> QasmError {
        QasmError::Unsupported {
            line: at.0,
            col: at.1,
            what: what.to_string(),
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Sym(s), ..
            }) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax(&format!("`{c}`"))),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<String, QasmError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.syntax("identifier")),
        }
    }

    fn expect_int(&mut self) -> Result<u64, QasmError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Int(v), ..
            }) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.syntax("integer")),
        }
    }

    fn parse(mut self) -> Result<CompiledCircuit, QasmError> {
        let mut first = true;
        while let Some(token) = self.peek().cloned() {
            let at = (token.line, token.col);
            let Tok::Ident(word) = token.tok else {
                return Err(self.syntax("statement"));
            };
            self.pos += 1;
            match word.as_str() {
                "OPENQASM" if first => {
                    match self.next().map(|t| t.tok) {
                        Some(Tok::Real(_)) | Some(Tok::Int(_)) => {}
                        _ => {
                            self.pos -= 1;
                            return Err(self.syntax("version number"));
                        }
                    }
                    self.expect_sym(';')?;
                }
                "include" => {
                    match self.peek() {
                        Some(Token { tok: Tok::Str, .. }) => self.pos += 1,
                        _ => return Err(self.syntax("file name string")),
                    }
                    self.expect_sym(';')?;
                }
                "qreg" => self.parse_qreg(at)?,
                "creg" => self.parse_creg(at)?,
                "barrier" => {
                    while !self.eat_sym(';') {
                        if self.next().is_none() {
                            return Err(self.syntax("`;`"));
                        }
                    }
                }
                "measure" => self.parse_measure(at)?,
                "swap" => {
                    let a = self.parse_qarg()?;
                    self.expect_sym(',')?;
                    let b = self.parse_qarg()?;
                    self.expect_sym(';')?;
                    self.push_swap(at, a, b)?;
                }
                "if" => return Err(self.unsupported(at, "classically conditioned operations")),
                "gate" | "opaque" => return Err(self.unsupported(at, "gate definitions")),
                "OPENQASM" => {
                    return Err(self.unsupported(at, "OPENQASM header after the first statement"))
                }
                name => {
                    let lowercase = name
                        .chars()
                        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
                        && name.starts_with(|c: char| c.is_ascii_lowercase());
                    if !lowercase || matches!(name, "reset" | "qreg" | "creg" | "pi") {
                        return Err(QasmError::UnknownGate {
                            line: at.0,
                            col: at.1,
                            name: name.to_string(),
                        });
                    }
                    self.parse_gate(at, name.to_string())?;
                }
            }
            first = false;
        }
        let Some(qreg) = self.qreg else {
            return Err(QasmError::Syntax {
                line: self.eof.0,
                col: self.eof.1,
                expected: "qreg declaration".into(),
            });
        };
        Ok(CompiledCircuit {
            num_physical: qreg.size,
            num_logical: self.num_logical,
            initial_layout: self.initial_layout,
            ops: self.ops,
            measured: self.measured,
        })
    }

    fn parse_register(&mut self) -> Result<Register, QasmError> {
        let name = self.expect_ident()?;
        self.expect_sym('[')?;
        let at = self.here();
        let size = self.expect_int()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        if size as usize > MAX_QUBITS || size == 0 {
            return Err(self.unsupported(at, "register size must be between 1 and 65536"));
        }
        Ok(Register {
            name,
            size: size as usize,
        })
    }

    fn parse_qreg(&mut self, at: (usize, usize)) -> Result<(), QasmError> {
        if self.qreg.is_some() {
            return Err(self.unsupported(at, "more than one quantum register"));
        }
        let reg = self.parse_register()?;
        let initial: Vec<usize> = match self.layout_spec.take() {
            None => (0..reg.size).collect(),
            Some((line, entries)) => {
                let mut seen = BTreeSet::new();
                for &p in &entries {
                    if p as usize >= reg.size {
                        return Err(QasmError::IndexOutOfRange {
                            line,
                            col: 1,
                            index: p,
                            size: reg.size,
                        });
                    }
                    if !seen.insert(p) {
                        return Err(QasmError::Syntax {
                            line,
                            col: 1,
                            expected: "injective @layout".into(),
                        });
                    }
                }
                entries.into_iter().map(|p| p as usize).collect()
            }
        };
        self.num_logical = initial.len();
        self.layout = Some(LayoutState::new(&initial, reg.size));
        self.initial_layout = initial;
        self.qreg = Some(reg);
        Ok(())
    }

    fn parse_creg(&mut self, at: (usize, usize)) -> Result<(), QasmError> {
        if self.creg.is_some() {
            return Err(self.unsupported(at, "more than one classical register"));
        }
        self.creg = Some(self.parse_register()?);
        Ok(())
    }

    /// `q[i]`, returning the physical index.
    fn parse_qarg(&mut self) -> Result<usize, QasmError> {
        let at = self.here();
        let name = self.expect_ident()?;
        let Some(qreg) = &self.qreg else {
            return Err(QasmError::Syntax {
                line: at.0,
                col: at.1,
                expected: "qreg declaration before use".into(),
            });
        };
        if name != qreg.name {
            return Err(QasmError::Syntax {
                line: at.0,
                col: at.1,
                expected: format!("quantum register `{}`", qreg.name),
            });
        }
        let size = qreg.size;
        self.expect_sym('[')?;
        let idx_at = self.here();
        let index = self.expect_int()?;
        self.expect_sym(']')?;
        if index as usize >= size || index > MAX_QUBITS as u64 {
            return Err(QasmError::IndexOutOfRange {
                line: idx_at.0,
                col: idx_at.1,
                index,
                size,
            });
        }
        Ok(index as usize)
    }

    fn parse_measure(&mut self, at: (usize, usize)) -> Result<(), QasmError> {
        let physical = self.parse_qarg()?;
        match self.peek() {
            Some(Token {
                tok: Tok::Arrow, ..
            }) => self.pos += 1,
            _ => return Err(self.syntax("`->`")),
        }
        let c_at = self.here();
        let name = self.expect_ident()?;
        let Some(creg) = &self.creg else {
            return Err(QasmError::Syntax {
                line: c_at.0,
                col: c_at.1,
                expected: "creg declaration before use".into(),
            });
        };
        if name != creg.name {
            return Err(QasmError::Syntax {
                line: c_at.0,
                col: c_at.1,
                expected: format!("classical register `{}`", creg.name),
            });
        }
        let size = creg.size;
        self.expect_sym('[')?;
        let idx_at = self.here();
        let clbit = self.expect_int()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        if clbit as usize >= size || clbit > MAX_QUBITS as u64 {
            return Err(QasmError::IndexOutOfRange {
                line: idx_at.0,
                col: idx_at.1,
                index: clbit,
                size,
            });
        }
        let layout = self.layout.as_ref().expect("qreg declared");
        let Some(logical) = layout.logical(physical) else {
            return Err(self.unsupported(at, "measurement of a qubit with no logical resident"));
        };
        if self.measured.contains_key(&logical) {
            return Err(self.unsupported(at, "qubit measured twice"));
        }
        if self.measured.values().any(|&c| c == clbit as usize) {
            return Err(self.unsupported(at, "classical bit written twice"));
        }
        self.measured.insert(logical, clbit as usize);
        self.measured_physical.insert(physical);
        Ok(())
    }

    fn check_not_measured(&self, at: (usize, usize), qubits: &[usize]) -> Result<(), QasmError> {
        if qubits.iter().any(|q| self.measured_physical.contains(q)) {
            return Err(self.unsupported(at, "operation after measurement"));
        }
        Ok(())
    }

    fn push_swap(&mut self, at: (usize, usize), a: usize, b: usize) -> Result<(), QasmError> {
        if a == b {
            return Err(QasmError::Syntax {
                line: at.0,
                col: at.1,
                expected: "distinct qubit operands".into(),
            });
        }
        self.check_not_measured(at, &[a, b])?;
        let segment = self.next_segment;
        self.next_segment += 1;
        for (q, partner) in [(a, b), (b, a)] {
            self.ops.push(GateOp {
                name: super::SWAP_MARKER.to_string(),
                qubits: vec![q],
                params: Vec::new(),
                tag: Some(super::OpTag::SwapSegment { segment, partner }),
            });
        }
        self.layout
            .as_mut()
            .expect("qreg declared")
            .swap_physical(a, b);
        Ok(())
    }

    fn parse_gate(&mut self, at: (usize, usize), name: String) -> Result<(), QasmError> {
        let mut params = Vec::new();
        if self.eat_sym('(') {
            if !self.eat_sym(')') {
                loop {
                    let p_at = self.here();
                    let value = self.parse_expr(0)?;
                    if !value.is_finite() {
                        return Err(QasmError::Syntax {
                            line: p_at.0,
                            col: p_at.1,
                            expected: "finite parameter".into(),
                        });
                    }
                    params.push(value);
                    if self.eat_sym(')') {
                        break;
                    }
                    self.expect_sym(',')?;
                }
            }
        }
        let mut qubits = vec![self.parse_qarg()?];
        if self.eat_sym(',') {
            qubits.push(self.parse_qarg()?);
        }
        self.expect_sym(';')?;
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(QasmError::Syntax {
                line: at.0,
                col: at.1,
                expected: "distinct qubit operands".into(),
            });
        }
        self.check_not_measured(at, &qubits)?;
        self.ops.push(GateOp {
            name,
            qubits,
            params,
            tag: None,
        });
        Ok(())
    }

    // expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    fn parse_expr(&mut self, nesting: usize) -> Result<f64, QasmError> {
        if nesting > 64 {
            return Err(self.unsupported(self.here(), "expression nesting deeper than 64"));
        }
        let mut value = self.parse_term(nesting)?;
        loop {
            if self.eat_sym('+') {
                value += self.parse_term(nesting)?;
            } else if self.eat_sym('-') {
                value -= self.parse_term(nesting)?;
            } else {
                return Ok(value);
            }
        }
    }

    fn parse_term(&mut self, nesting: usize) -> Result<f64, QasmError> {
        let mut value = self.parse_unary(nesting)?;
        loop {
            if self.eat_sym('*') {
                value *= self.parse_unary(nesting)?;
            } else if self.eat_sym('/') {
                value /= self.parse_unary(nesting)?;
            } else {
                return Ok(value);
            }
        }
    }

    fn parse_unary(&mut self, nesting: usize) -> Result<f64, QasmError> {
        if self.eat_sym('-') {
            return Ok(-self.parse_unary(nesting + 1)?);
        }
        if self.eat_sym('+') {
            return self.parse_unary(nesting + 1);
        }
        if self.eat_sym('(') {
            let v = self.parse_expr(nesting + 1)?;
            self.expect_sym(')')?;
            return Ok(v);
        }
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(v as f64)
            }
            Some(Tok::Real(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(s)) if s == "pi" => {
                self.pos += 1;
                Ok(PI)
            }
            _ => Err(self.syntax("parameter expression")),
        }
    }
}

pub fn parse_qasm(text: &str) -> Result<CompiledCircuit, QasmError> {
    let (tokens, directives) = lex(text)?;
    if directives.len() > 1 {
        return Err(QasmError::Unsupported {
            line: directives[1].line,
            col: 1,
            what: "more than one @layout directive".into(),
        });
    }
    let layout_spec = match directives.first() {
        None => None,
        Some(d) => {
            let mut entries = Vec::new();
            for part in d.body.split(|c: char| c == ',' || c.is_whitespace()) {
                if part.is_empty() {
                    continue;
                }
                let v = part.parse::<u64>().map_err(|_| QasmError::Syntax {
                    line: d.line,
                    col: 1,
                    expected: "comma-separated physical indices after @layout".into(),
                })?;
                entries.push(v);
            }
            Some((d.line, entries))
        }
    };
    let lines = text.split('\n').count();
    let last_col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Parser {
        tokens,
        pos: 0,
        eof: (lines, last_col),
        qreg: None,
        creg: None,
        layout_spec,
        layout: None,
        num_logical: 0,
        initial_layout: Vec::new(),
        ops: Vec::new(),
        measured: BTreeMap::new(),
        measured_physical: BTreeSet::new(),
        next_segment: 0,
    }
    .parse()
}
