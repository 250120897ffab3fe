//! Lexer and polynomial expression parser shared by the structure DSL and the
//! command-line flags.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | power
//! power := atom ('^' INT)?
//! atom  := INT ('/' INT)? | 't' | 'x' INT | '(' expr ')'
//! ```

use std::fmt;
use std::str::FromStr;

use ncw_core::tensor::VectorField;
use ncw_core::{Poly, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(String),
    Ident(String),
    Str(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(s) | Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

/// A token with its 1-based column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub col: usize,
}

/// Tokenizes one line. `#` starts a comment.
pub fn lex_line(line_no: usize, text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Int(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return Err(ParseError::new(line_no, col, "unterminated string"));
            }
            out.push(Spanned {
                tok: Tok::Str(chars[start..i].iter().collect()),
                col,
            });
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '=' => Tok::Eq,
            ',' => Tok::Comma,
            _ => return Err(ParseError::new(line_no, col, format!("unexpected character `{c}`"))),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

/// Expression tree; variables keep their column for late range checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var { axis: usize, col: usize },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Evaluates in `nvars` variables (`t, x1, ..`); out-of-range variables are errors.
    pub fn to_poly(&self, line: usize, nvars: usize) -> Result<Poly, ParseError> {
        Ok(match self {
            Expr::Num(r) => Poly::constant(nvars, r.clone()),
            Expr::Var { axis, col } => {
                if *axis >= nvars {
                    return Err(ParseError::new(
                        line,
                        *col,
                        format!("variable x{axis} out of range for n = {}", nvars.saturating_sub(1)),
                    ));
                }
                Poly::var(nvars, *axis)
            }
            Expr::Neg(e) => -e.to_poly(line, nvars)?,
            Expr::Add(a, b) => &a.to_poly(line, nvars)? + &b.to_poly(line, nvars)?,
            Expr::Sub(a, b) => &a.to_poly(line, nvars)? - &b.to_poly(line, nvars)?,
            Expr::Mul(a, b) => &a.to_poly(line, nvars)? * &b.to_poly(line, nvars)?,
            Expr::Pow(a, k) => a.to_poly(line, nvars)?.pow(*k),
        })
    }
}

/// Recursive-descent parser over a token slice.
pub struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    pub fn new(line: usize, toks: &'a [Spanned], end_col: usize) -> Self {
        Parser {
            toks,
            pos: 0,
            line,
            end_col,
        }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), message)
    }

    pub fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {tok}")))
        }
    }

    pub fn unexpected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("{what}, found {t}")),
            None => self.error(format!("{what}, found end of line")),
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("expected end of line"))
        }
    }

    pub fn int(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Int(s)) => {
                let v = s.parse().map_err(|_| self.error("integer too large"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.unexpected("expected an integer")),
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        if self.peek() == Some(&Tok::Slash) {
            return Err(self.error("division is only allowed between integer literals"));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let k = self.int()?;
            let k = u32::try_from(k).map_err(|_| self.error("exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(p)) => {
                self.pos += 1;
                let mut r = Rational::from_str(&p).map_err(|_| self.error("bad integer"))?;
                if self.eat(&Tok::Slash) {
                    let Some(Tok::Int(qs)) = self.peek().cloned() else {
                        return Err(self.error("division is only allowed between integer literals"));
                    };
                    self.pos += 1;
                    let d = Rational::from_str(&qs).map_err(|_| self.error("bad integer"))?;
                    if num_traits::Zero::is_zero(&d) {
                        return Err(ParseError::new(self.line, col, "zero denominator"));
                    }
                    r /= d;
                }
                Ok(Expr::Num(r))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "t" {
                    return Ok(Expr::Var { axis: 0, col });
                }
                if let Some(k) = name.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()) {
                    if k == 0 {
                        return Err(ParseError::new(self.line, col, "the time coordinate is written `t`"));
                    }
                    return Ok(Expr::Var { axis: k, col });
                }
                Err(ParseError::new(self.line, col, format!("unknown variable `{name}`")))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("expected a number, variable or `(`")),
        }
    }
}

/// Parses a complete polynomial in `nvars` variables.
pub fn parse_poly(text: &str, nvars: usize) -> Result<Poly, ParseError> {
    let toks = lex_line(1, text)?;
    let mut p = Parser::new(1, &toks, text.chars().count() + 1);
    let e = p.expr()?;
    p.expect_end()?;
    e.to_poly(1, nvars)
}

/// Parses a comma-separated list of `dim` polynomials, e.g. `0, t, -x1`.
pub fn parse_poly_list(text: &str, dim: usize, nvars: usize) -> Result<Vec<Poly>, ParseError> {
    let toks = lex_line(1, text)?;
    let mut p = Parser::new(1, &toks, text.chars().count() + 1);
    let mut out = vec![p.expr()?.to_poly(1, nvars)?];
    while p.eat(&Tok::Comma) {
        out.push(p.expr()?.to_poly(1, nvars)?);
    }
    p.expect_end()?;
    if out.len() != dim {
        return Err(ParseError::new(
            1,
            1,
            format!("expected {dim} components, found {}", out.len()),
        ));
    }
    Ok(out)
}

pub fn parse_field(text: &str, dim: usize) -> Result<VectorField, ParseError> {
    let comps = parse_poly_list(text, dim, dim)?;
    Ok(VectorField::new(comps).expect("components share one variable count"))
}

/// `c0, c1, ...`: the inverse of [`parse_field`].
pub fn format_field(x: &VectorField) -> String {
    x.components()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn parses_rationals_and_precedence() {
        let p = parse_poly("3/2*t^2*x1 - 1", 2).unwrap();
        let expected = &(&Poly::var(2, 0).pow(2) * &Poly::var(2, 1)).scale(&q(3, 2)) - &Poly::one(2);
        assert_eq!(p, expected);
        assert_eq!(parse_poly("-x1^2", 2).unwrap(), -Poly::var(2, 1).pow(2));
        assert_eq!(
            parse_poly("2*(t + x1)^2", 2).unwrap().to_string(),
            "2*t^2 + 4*t*x1 + 2*x1^2"
        );
        assert_eq!(parse_poly("1 - -1", 1).unwrap(), Poly::int(1, 2));
    }

    #[test]
    fn display_round_trips() {
        for src in ["0", "3/2*t^2*x1 - 1", "-x2 + 5", "x1*x2*x3 - 7/3*t"] {
            let p = parse_poly(src, 4).unwrap();
            assert_eq!(parse_poly(&p.to_string(), 4).unwrap(), p);
        }
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_poly("x1 + ", 2).unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
        let e = parse_poly("x3", 3).unwrap_err();
        assert_eq!(e.col, 1);
        assert!(e.message.contains("out of range"));
        let e = parse_poly("x1/2", 2).unwrap_err();
        assert!(e.message.contains("division"));
        let e = parse_poly("1/0", 2).unwrap_err();
        assert!(e.message.contains("zero denominator"));
        let e = parse_poly("y", 2).unwrap_err();
        assert!(e.message.contains("unknown variable"));
        let e = parse_poly("2 $", 2).unwrap_err();
        assert_eq!(e.col, 3);
    }

    #[test]
    fn fields() {
        let x = parse_field("0, t, -x1", 3).unwrap();
        assert_eq!(format_field(&x), "0, t, -x1");
        assert!(parse_field("0, t", 3).is_err());
    }
}
