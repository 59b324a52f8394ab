//! Bound expressions and their exact evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::relation::escape;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rounding {
    /// Smallest multiple of `k` that is `>= x`.
    CeilK,
    /// Largest multiple of `k` that is `<= x`.
    FloorK,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Var {
    /// `N`: cardinality of the anonymized relation.
    N,
    /// `S("A")`: number of stars in attribute `A` of the anonymized relation.
    Stars(String),
    /// `C`: count of the constraint's own target in the initial relation.
    InitialCount,
    /// `R0`: cardinality of the initial relation.
    InitialSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Literal(Rational),
    Var(Var),
    Binary(Box<Expr>, BinOp, Box<Expr>),
}

impl Expr {
    pub fn binary(lhs: Expr, op: BinOp, rhs: Expr) -> Expr {
        Expr::Binary(Box::new(lhs), op, Box::new(rhs))
    }

    pub fn int(v: i128) -> Expr {
        Expr::Literal(Rational::from_integer(v))
    }

    fn references_initial(&self) -> bool {
        match self {
            Expr::Literal(_) => false,
            Expr::Var(v) => matches!(v, Var::InitialCount | Var::InitialSize),
            Expr::Binary(l, _, r) => l.references_initial() || r.references_initial(),
        }
    }

    pub(crate) fn collect_star_attributes<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Var(Var::Stars(a)) => out.push(a),
            Expr::Binary(l, _, r) => {
                l.collect_star_attributes(out);
                r.collect_star_attributes(out);
            }
            _ => {}
        }
    }

    pub fn eval(&self, ctx: &EvalContext) -> Result<Rational> {
        match self {
            Expr::Literal(r) => Ok(*r),
            Expr::Var(v) => ctx.resolve(v).map(|n| Rational::from_integer(n as i128)),
            Expr::Binary(l, op, r) => {
                let (a, b) = (l.eval(ctx)?, r.eval(ctx)?);
                let out = match op {
                    BinOp::Add => a.checked_add(&b),
                    BinOp::Sub => a.checked_sub(&b),
                    BinOp::Mul => a.checked_mul(&b),
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(Error::Eval(format!("division by zero in `{self}`")));
                        }
                        a.checked_div(&b)
                    }
                };
                out.ok_or_else(|| Error::Eval(format!("arithmetic overflow in `{self}`")))
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(r) => write_rational(f, r),
            Expr::Var(Var::N) => f.write_str("N"),
            Expr::Var(Var::InitialCount) => f.write_str("C"),
            Expr::Var(Var::InitialSize) => f.write_str("R0"),
            Expr::Var(Var::Stars(a)) => write!(f, "S(\"{}\")", escape(a)),
            Expr::Binary(l, op, r) => {
                write_operand(f, l)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Binary(..) => write!(f, "({e})"),
        Expr::Literal(r) if r.is_negative() || decimal_digits(r).is_none() => {
            write!(f, "(")?;
            write_rational(f, r)?;
            write!(f, ")")
        }
        _ => write!(f, "{e}"),
    }
}

/// Number of decimal places needed to print `r` exactly, if finite.
fn decimal_digits(r: &Rational) -> Option<u32> {
    let mut d = *r.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    (d == 1).then_some(twos.max(fives))
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_negative() {
        // no unary minus in the grammar
        write!(f, "0 - ")?;
        return write_rational(f, &-*r);
    }
    match decimal_digits(r) {
        Some(0) => write!(f, "{}", r.numer()),
        Some(places) => {
            let scale = 10i128.pow(places);
            let scaled = (r * Rational::from_integer(scale)).to_integer();
            let int = scaled / scale;
            let frac = scaled % scale;
            write!(f, "{int}.{frac:0width$}", width = places as usize)
        }
        None => write!(f, "{} / {}", r.numer(), r.denom()),
    }
}

/// A bound: an arithmetic expression, optionally rounded to a multiple of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundExpr {
    rounding: Option<Rounding>,
    expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPosition {
    Lower,
    Upper,
}

impl BoundExpr {
    pub fn new(rounding: Option<Rounding>, expr: Expr) -> Self {
        Self { rounding, expr }
    }

    pub fn literal(v: u64) -> Self {
        Self::new(None, Expr::int(v as i128))
    }

    pub fn rounding(&self) -> Option<Rounding> {
        self.rounding
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn as_literal(&self) -> Option<&Rational> {
        match (&self.rounding, &self.expr) {
            (None, Expr::Literal(r)) => Some(r),
            _ => None,
        }
    }

    pub fn references_initial(&self) -> bool {
        self.expr.references_initial()
    }

    /// Evaluates to a natural. Rounded bounds go through [`ceil_k`] /
    /// [`floor_k`]; an unrounded lower bound takes the ceiling and an
    /// unrounded upper bound the floor. Negative values clamp to 0.
    pub fn eval(&self, ctx: &EvalContext, position: BoundPosition) -> Result<u64> {
        let x = self.expr.eval(ctx)?;
        Ok(match self.rounding {
            Some(Rounding::CeilK) => ceil_k(x, ctx.k),
            Some(Rounding::FloorK) => floor_k(x, ctx.k),
            None => rational_to_natural(&x, position),
        })
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rounding {
            Some(Rounding::CeilK) => write!(f, "ceil_k({})", self.expr),
            Some(Rounding::FloorK) => write!(f, "floor_k({})", self.expr),
            None => write!(f, "{}", self.expr),
        }
    }
}

pub(crate) fn rational_to_natural(x: &Rational, position: BoundPosition) -> u64 {
    let r = match position {
        BoundPosition::Lower => x.ceil(),
        BoundPosition::Upper => x.floor(),
    };
    clamp_natural(r.to_integer())
}

fn clamp_natural(v: i128) -> u64 {
    if v <= 0 {
        0
    } else {
        v.to_u64().unwrap_or(u64::MAX)
    }
}

/// `k · ⌈x / k⌉`, clamped below at 0. Exact multiples map to themselves.
pub fn ceil_k(x: Rational, k: u64) -> u64 {
    let k = k.max(1) as i128;
    let q = (x / Rational::from_integer(k)).ceil().to_integer();
    clamp_natural(q.saturating_mul(k))
}

/// `k · ⌊x / k⌋`, clamped below at 0.
pub fn floor_k(x: Rational, k: u64) -> u64 {
    let k = k.max(1) as i128;
    let q = (x / Rational::from_integer(k)).floor().to_integer();
    clamp_natural(q.saturating_mul(k))
}

/// Statistics a bound expression may reference.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalContext {
    pub k: u64,
    /// `|R'|`
    pub n_prime: u64,
    /// `count(R'[A], ★)` per attribute
    pub stars: BTreeMap<String, u64>,
    /// `count(R[X], t)` for the constraint's own target, when the initial
    /// relation is known.
    pub initial_target_count: Option<u64>,
    /// `|R|`, when the initial relation is known.
    pub n_initial: Option<u64>,
}

impl EvalContext {
    fn resolve(&self, v: &Var) -> Result<u64> {
        match v {
            Var::N => Ok(self.n_prime),
            Var::Stars(a) => self
                .stars
                .get(a)
                .copied()
                .ok_or_else(|| Error::Eval(format!("no star count bound for S(\"{a}\")"))),
            Var::InitialCount => self
                .initial_target_count
                .ok_or_else(|| Error::Eval("C requires the initial relation".into())),
            Var::InitialSize => self
                .n_initial
                .ok_or_else(|| Error::Eval("R0 requires the initial relation".into())),
        }
    }
}
