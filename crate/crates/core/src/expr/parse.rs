use std::sync::Arc;

use super::{Axis, Expr, Func};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}; allowed: {}", allowed.join(", "))]
    UnknownIdentifier {
        name: String,
        offset: usize,
        allowed: Vec<String>,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

/// Parse an expression, accepting any parameter name.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    Parser::new(text, None).run()
}

/// Parse an expression, rejecting parameter names outside `allowed`.
pub fn parse_with_params(text: &str, allowed: &[&str]) -> Result<Expr, ParseError> {
    Parser::new(text, Some(allowed)).run()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Exponent only when followed by an optional sign and a digit.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    allowed: Option<&'a [&'a str]>,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, allowed: Option<&'a [&'a str]>) -> Self {
        Parser {
            text,
            allowed,
            toks: Vec::new(),
            pos: 0,
        }
    }

    fn run(mut self) -> Result<Expr, ParseError> {
        self.toks = tokenize(self.text)?;
        let e = self.expr()?;
        match self.peek() {
            Tok::End => Ok(e),
            t => Err(self.syntax(format!("unexpected {}", describe(t)))),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, message: String) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Arc::new(base), Arc::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(n) => Ok(Expr::constant(n)),
            Tok::Minus => {
                // `-<literal>` is a negative constant; anything else is a negation.
                if let Tok::Num(n) = *self.peek() {
                    self.bump();
                    return Ok(Expr::constant(-n));
                }
                let inner = self.base()?;
                Ok(Expr::Neg(Arc::new(inner)))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, offset),
            t => {
                self.pos = self.pos.saturating_sub(1);
                Err(ParseError::Syntax {
                    offset,
                    message: format!("expected an operand, found {}", describe(&t)),
                })
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            t => Err(self.syntax(format!("expected `)`, found {}", describe(t)))),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::LParen {
            let Some(func) = Func::from_name(&name) else {
                return Err(ParseError::UnknownIdentifier {
                    name,
                    offset,
                    allowed: Func::ALL.iter().map(|f| f.name().to_string()).collect(),
                });
            };
            self.bump();
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Expr::Func(func, Arc::new(arg)));
        }
        match name.as_str() {
            "x1" => return Ok(Expr::Var(Axis::X1)),
            "x2" => return Ok(Expr::Var(Axis::X2)),
            "x3" => return Ok(Expr::Var(Axis::X3)),
            _ => {}
        }
        let reserved = Func::from_name(&name).is_some();
        let permitted = self.allowed.is_none_or(|a| a.contains(&name.as_str()));
        if reserved || !permitted {
            let mut allowed: Vec<String> = vec!["x1".into(), "x2".into(), "x3".into()];
            if let Some(a) = self.allowed {
                allowed.extend(a.iter().map(|s| s.to_string()));
            } else {
                allowed.push("<parameter name>".into());
            }
            return Err(ParseError::UnknownIdentifier {
                name,
                offset,
                allowed,
            });
        }
        Ok(Expr::Param(Arc::from(name.as_str())))
    }
}
