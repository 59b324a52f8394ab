//! Line-oriented constraint DSL.
//!
//! ```text
//! # at least 3 and at most 6 Asian tuples
//! div:  3 <= count(ETH="Asian") <= 6
//! fair: ceil_k((C/R0)*(N - S("GEN"))) <= count(GEN="Female")
//! ```

use num_traits::Zero;

use super::bound::{BinOp, BoundExpr, Expr, Rational, Rounding, Var};
use super::{Constraint, ConstraintKind};
use crate::error::{Error, Result};
use crate::relation::TargetValue;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number(Rational),
    LParen,
    RParen,
    Comma,
    Colon,
    Eq,
    Le,
    Plus,
    Minus,
    Star,
    Slash,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Number(n) => format!("number {n}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
        }
    }
}

fn lex(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>> {
    let err = |column: usize, message: String| Error::Parse {
        line: line_no,
        column,
        message,
    };
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            _ if c.is_whitespace() => i += 1,
            '#' => break,
            '(' | ')' | ',' | ':' | '=' | '+' | '-' | '*' | '/' => {
                out.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        ':' => Tok::Colon,
                        '=' => Tok::Eq,
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        '*' => Tok::Star,
                        _ => Tok::Slash,
                    },
                    col,
                ));
                i += 1;
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push((Tok::Le, col));
                    i += 2;
                } else {
                    return Err(err(col, "expected `<=`".into()));
                }
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(col, "unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some(&e @ ('"' | '\\')) => s.push(e),
                                _ => return Err(err(i + 1, "invalid escape".into())),
                            }
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push((Tok::Str(s), col));
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let int: String = chars[start..i].iter().collect();
                let mut frac = String::new();
                if chars.get(i) == Some(&'.') {
                    i += 1;
                    let fs = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac = chars[fs..i].iter().collect();
                    if frac.is_empty() {
                        return Err(err(col, "malformed number".into()));
                    }
                }
                if int.is_empty() && frac.is_empty() {
                    return Err(err(col, "malformed number".into()));
                }
                let value =
                    decimal(&int, &frac).ok_or_else(|| err(col, "number too large".into()))?;
                out.push((Tok::Number(value), col));
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            _ => return Err(err(col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn decimal(int: &str, frac: &str) -> Option<Rational> {
    let digits = format!("{int}{frac}");
    let numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let denom = 10i128.checked_pow(frac.len() as u32)?;
    Some(Rational::new(numer, denom))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {}", t.describe())),
            None => self.error(format!("expected {expected}, found end of line")),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn at_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == name)
    }

    fn line(&mut self) -> Result<Constraint> {
        let kind = match self.bump() {
            Some(Tok::Ident(s)) if s == "div" => ConstraintKind::Diversity,
            Some(Tok::Ident(s)) if s == "fair" => ConstraintKind::Fairness,
            _ => {
                self.pos = 0;
                return Err(self.unexpected("`div` or `fair`"));
            }
        };
        self.expect(Tok::Colon)?;

        let lower = if self.at_ident("count") {
            None
        } else {
            let b = self.bound()?;
            self.expect(Tok::Le)?;
            Some(b)
        };
        if !self.at_ident("count") {
            return Err(self.unexpected("`count(`"));
        }
        self.pos += 1;
        self.expect(Tok::LParen)?;
        let target = self.target()?;
        self.expect(Tok::RParen)?;
        let upper = if self.peek() == Some(&Tok::Le) {
            self.pos += 1;
            Some(self.bound()?)
        } else {
            None
        };
        if self.peek().is_some() {
            return Err(self.unexpected("end of line"));
        }
        if lower.is_none() && upper.is_none() {
            return Err(Error::Semantic {
                line: self.line,
                message: "constraint needs at least one bound".into(),
            });
        }
        if kind == ConstraintKind::Diversity
            && [&lower, &upper]
                .into_iter()
                .flatten()
                .any(BoundExpr::references_initial)
        {
            return Err(Error::Semantic {
                line: self.line,
                message: "diversity constraints may not reference C or R0; use `fair:`".into(),
            });
        }
        Constraint::new(kind, target, lower, upper).map_err(|e| Error::Semantic {
            line: self.line,
            message: e.to_string(),
        })
    }

    fn target(&mut self) -> Result<TargetValue> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        loop {
            let attr = match self.bump() {
                Some(Tok::Ident(s)) => s,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("attribute name"));
                }
            };
            self.expect(Tok::Eq)?;
            let value = match self.bump() {
                Some(Tok::Str(s)) => s,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("quoted value"));
                }
            };
            if pairs.iter().any(|(a, _)| *a == attr) {
                return Err(Error::Semantic {
                    line: self.line,
                    message: format!("attribute `{attr}` repeated in target"),
                });
            }
            pairs.push((attr, value));
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                break;
            }
        }
        TargetValue::new(pairs).map_err(|e| Error::Semantic {
            line: self.line,
            message: e.to_string(),
        })
    }

    fn bound(&mut self) -> Result<BoundExpr> {
        let rounding = if self.at_ident("ceil_k") {
            Some(Rounding::CeilK)
        } else if self.at_ident("floor_k") {
            Some(Rounding::FloorK)
        } else {
            None
        };
        if rounding.is_some() {
            self.pos += 1;
            self.expect(Tok::LParen)?;
            let e = self.arith()?;
            self.expect(Tok::RParen)?;
            Ok(BoundExpr::new(rounding, e))
        } else {
            Ok(BoundExpr::new(None, self.arith()?))
        }
    }

    fn arith(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::binary(lhs, op, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            if op == BinOp::Div && matches!(&rhs, Expr::Literal(r) if r.is_zero()) {
                return Err(Error::Semantic {
                    line: self.line,
                    message: "division by literal zero".into(),
                });
            }
            lhs = Expr::binary(lhs, op, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.pos += 1;
                Ok(Expr::Literal(n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.arith()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "N" => {
                    self.pos += 1;
                    Ok(Expr::Var(Var::N))
                }
                "C" => {
                    self.pos += 1;
                    Ok(Expr::Var(Var::InitialCount))
                }
                "R0" => {
                    self.pos += 1;
                    Ok(Expr::Var(Var::InitialSize))
                }
                "S" => {
                    self.pos += 1;
                    self.expect(Tok::LParen)?;
                    let attr = match self.bump() {
                        Some(Tok::Str(s)) => s,
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected("quoted attribute name"));
                        }
                    };
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Var(Var::Stars(attr)))
                }
                "ceil_k" | "floor_k" => {
                    Err(self.error("rounding is only allowed at the top of a bound"))
                }
                _ => Err(self.error(format!("unknown variable `{name}`"))),
            },
            _ => Err(self.unexpected("number, variable or `(`")),
        }
    }
}

/// Parses a constraint file. Blank lines and `#` comments are skipped.
pub fn parse_constraints(text: &str) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks = lex(line, i + 1)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = Parser {
            toks,
            pos: 0,
            line: i + 1,
            end_col: line.chars().count() + 1,
        };
        out.push(p.line()?);
    }
    Ok(out)
}

/// Parses exactly one constraint.
pub fn parse_constraint(text: &str) -> Result<Constraint> {
    let mut all = parse_constraints(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("expected exactly one constraint, found {n}"),
        }),
    }
}
