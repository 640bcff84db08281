//! A small expression language for building words: literals, juxtaposition
//! for concatenation, and powers with constant or symbolic exponents.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! word := '(' ')' | '(' int (',' int)* ')'
//! atom := word | '(' expr ')'
//! pow  := atom ['^' (int | symbol)]
//! expr := pow+
//! ```
//!
//! A leading `(` followed by an integer or `)` starts a word literal;
//! followed by another `(` it starts a parenthesized sub-expression.
//! Literal validity (even length, entries >= 1) is checked at expansion
//! time, not at parse time.

use std::collections::BTreeMap;
use std::fmt;

use crate::word::EvenWord;
use crate::Error;

/// Exponent of a power node: a constant or a symbol bound at expansion time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exponent {
    Const(u64),
    Symbol(String),
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Const(n) => write!(f, "{}", n),
            Exponent::Symbol(s) => write!(f, "{}", s),
        }
    }
}

/// Abstract syntax tree of a word expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordExpr {
    /// A raw literal; may be invalid as an even word until expanded.
    Literal(Vec<u64>),
    Concat(Vec<WordExpr>),
    Power(Box<WordExpr>, Exponent),
}

impl WordExpr {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut p = Parser::new(text);
        let expr = p.expr()?;
        p.expect_eof()?;
        Ok(expr)
    }

    /// Substitutes bindings and flattens into a single even word.
    pub fn expand(&self, bindings: &BTreeMap<String, u64>) -> Result<EvenWord, Error> {
        let mut entries = Vec::new();
        self.expand_into(bindings, &mut entries)?;
        EvenWord::new(entries)
    }

    fn expand_into(
        &self,
        bindings: &BTreeMap<String, u64>,
        out: &mut Vec<u64>,
    ) -> Result<(), Error> {
        match self {
            WordExpr::Literal(entries) => {
                // Each literal must itself be a valid even word, so that the
                // expansion is valid under every exponent binding.
                let w = EvenWord::new(entries.clone())?;
                out.extend_from_slice(w.entries());
                Ok(())
            }
            WordExpr::Concat(parts) => {
                for p in parts {
                    p.expand_into(bindings, out)?;
                }
                Ok(())
            }
            WordExpr::Power(base, exp) => {
                let n = match exp {
                    Exponent::Const(n) => *n,
                    Exponent::Symbol(s) => *bindings
                        .get(s)
                        .ok_or_else(|| Error::UnboundSymbol(s.clone()))?,
                };
                for _ in 0..n {
                    base.expand_into(bindings, out)?;
                }
                Ok(())
            }
        }
    }

    /// Symbols appearing anywhere in the expression.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            WordExpr::Literal(_) => {}
            WordExpr::Concat(parts) => parts.iter().for_each(|p| p.collect_symbols(out)),
            WordExpr::Power(base, exp) => {
                base.collect_symbols(out);
                if let Exponent::Symbol(s) = exp {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
            }
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Literal(_) => write!(f, "{}", self),
            _ => write!(f, "({})", self),
        }
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Literal(entries) => {
                write!(f, "(")?;
                for (i, k) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", k)?;
                }
                write!(f, ")")
            }
            WordExpr::Concat(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", p)?;
                }
                Ok(())
            }
            WordExpr::Power(base, exp) => {
                base.fmt_atom(f)?;
                write!(f, "^{}", exp)
            }
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, bytes: text.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, expected: &str) -> Error {
        let found = match self.bytes.get(self.pos) {
            Some(_) => {
                let rest = &self.text[self.pos..];
                let end = rest
                    .char_indices()
                    .nth(1)
                    .map(|(i, _)| i)
                    .unwrap_or(rest.len());
                format!("'{}'", &rest[..end])
            }
            None => "end of input".to_string(),
        };
        Error::WordSyntax { position: self.pos, expected: expected.to_string(), found }
    }

    fn expect(&mut self, byte: u8, what: &str) -> Result<(), Error> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn expect_eof(&mut self) -> Result<(), Error> {
        if self.peek().is_none() {
            Ok(())
        } else {
            Err(self.err("end of input"))
        }
    }

    fn integer(&mut self) -> Result<u64, Error> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("integer"));
        }
        self.text[start..self.pos]
            .parse::<u64>()
            .map_err(|_| self.err("integer within range"))
    }

    fn symbol(&mut self) -> Result<String, Error> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("integer or symbol"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn expr(&mut self) -> Result<WordExpr, Error> {
        let mut parts = Vec::new();
        let push = |e: WordExpr, parts: &mut Vec<WordExpr>| match e {
            // Flatten nested concatenations; they are associative anyway and
            // flattening keeps printing a fixed point of parsing.
            WordExpr::Concat(inner) => parts.extend(inner),
            other => parts.push(other),
        };
        push(self.pow()?, &mut parts);
        while self.peek() == Some(b'(') {
            push(self.pow()?, &mut parts);
        }
        if parts.len() == 1 {
            Ok(parts.pop().unwrap())
        } else {
            Ok(WordExpr::Concat(parts))
        }
    }

    fn pow(&mut self) -> Result<WordExpr, Error> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = match self.peek() {
                Some(c) if c.is_ascii_digit() => Exponent::Const(self.integer()?),
                _ => Exponent::Symbol(self.symbol()?),
            };
            Ok(WordExpr::Power(Box::new(base), exp))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<WordExpr, Error> {
        self.expect(b'(', "'('")?;
        match self.peek() {
            Some(b'(') => {
                let inner = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(inner)
            }
            Some(b')') => {
                self.pos += 1;
                Ok(WordExpr::Literal(Vec::new()))
            }
            Some(c) if c.is_ascii_digit() => {
                let mut entries = vec![self.integer()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    entries.push(self.integer()?);
                }
                self.expect(b')', "',' or ')'")?;
                Ok(WordExpr::Literal(entries))
            }
            _ => Err(self.err("integer, '(' or ')'")),
        }
    }
}
