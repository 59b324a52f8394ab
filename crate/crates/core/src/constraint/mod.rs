//! Diversity and fairness constraints.
//!
//! A constraint bounds `count(R'[X], t)` for a target value `X[t]` between a
//! lower and an upper [`BoundExpr`]. Diversity constraints may only look at
//! the anonymized relation (`N`, `S("A")`); fairness constraints may also use
//! statistics of the initial relation (`C`, `R0`).

mod bound;
mod parse;

use std::fmt;

use serde::{Serialize, Serializer};

pub use bound::{
    ceil_k, floor_k, BinOp, BoundExpr, BoundPosition, EvalContext, Expr, Rational, Rounding, Var,
};
pub use parse::{parse_constraint, parse_constraints};

use crate::error::{Error, Result};
use crate::relation::TargetValue;

/// `[lo, hi]` over the naturals; `hi = None` is `+∞`. Empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FrequencyRange {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl FrequencyRange {
    pub const UNIVERSAL: FrequencyRange = FrequencyRange { lo: 0, hi: None };

    pub fn new(lo: u64, hi: Option<u64>) -> Self {
        Self { lo, hi }
    }

    pub fn bounded(lo: u64, hi: u64) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn at_least(lo: u64) -> Self {
        Self { lo, hi: None }
    }

    pub fn at_most(hi: u64) -> Self {
        Self {
            lo: 0,
            hi: Some(hi),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.hi, Some(hi) if self.lo > hi)
    }

    pub fn contains(&self, count: u64) -> bool {
        self.lo <= count && self.hi.is_none_or(|hi| count <= hi)
    }

    pub fn intersect(&self, other: &FrequencyRange) -> FrequencyRange {
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        FrequencyRange {
            lo: self.lo.max(other.lo),
            hi,
        }
    }

    /// `self ⊆ other` as sets of naturals. The empty range is a subset of
    /// everything.
    pub fn is_subset(&self, other: &FrequencyRange) -> bool {
        if self.is_empty() {
            return true;
        }
        if other.is_empty() {
            return false;
        }
        let hi_ok = match (self.hi, other.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        other.lo <= self.lo && hi_ok
    }
}

impl fmt::Display for FrequencyRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        match self.hi {
            Some(hi) => write!(f, "[{}, {}]", self.lo, hi),
            None => write!(f, "[{}, +inf)", self.lo),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Diversity,
    Fairness,
}

impl ConstraintKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ConstraintKind::Diversity => "div",
            ConstraintKind::Fairness => "fair",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    kind: ConstraintKind,
    target: TargetValue,
    lower: Option<BoundExpr>,
    upper: Option<BoundExpr>,
}

impl Constraint {
    pub fn new(
        kind: ConstraintKind,
        target: TargetValue,
        lower: Option<BoundExpr>,
        upper: Option<BoundExpr>,
    ) -> Result<Self> {
        if lower.is_none() && upper.is_none() {
            return Err(Error::Contract(
                "a constraint needs a lower or an upper bound".into(),
            ));
        }
        if kind == ConstraintKind::Diversity
            && [&lower, &upper]
                .into_iter()
                .flatten()
                .any(BoundExpr::references_initial)
        {
            return Err(Error::Contract(
                "diversity constraints may not reference C or R0".into(),
            ));
        }
        Ok(Self {
            kind,
            target,
            lower,
            upper,
        })
    }

    /// Fixed-bound diversity constraint `lo <= count(target) <= hi`.
    pub fn fixed(target: TargetValue, lo: Option<u64>, hi: Option<u64>) -> Result<Self> {
        Self::new(
            ConstraintKind::Diversity,
            target,
            lo.map(BoundExpr::literal),
            hi.map(BoundExpr::literal),
        )
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn target(&self) -> &TargetValue {
        &self.target
    }

    pub fn lower(&self) -> Option<&BoundExpr> {
        self.lower.as_ref()
    }

    pub fn upper(&self) -> Option<&BoundExpr> {
        self.upper.as_ref()
    }

    /// Both present bounds are plain literals (an absent bound counts as the
    /// literal `0` or `+∞`).
    pub fn is_fixed_bound(&self) -> bool {
        [&self.lower, &self.upper]
            .into_iter()
            .flatten()
            .all(|b| b.as_literal().is_some())
    }

    /// The constant frequency range of a fixed-bound constraint.
    pub fn fixed_range(&self) -> Option<FrequencyRange> {
        if !self.is_fixed_bound() {
            return None;
        }
        let lo = self
            .lower
            .as_ref()
            .and_then(BoundExpr::as_literal)
            .map_or(0, |r| bound::rational_to_natural(r, BoundPosition::Lower));
        let hi = self
            .upper
            .as_ref()
            .and_then(BoundExpr::as_literal)
            .map(|r| bound::rational_to_natural(r, BoundPosition::Upper));
        Some(FrequencyRange { lo, hi })
    }

    /// Attributes named by `S(...)` in either bound.
    pub fn star_attributes(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for b in [&self.lower, &self.upper].into_iter().flatten() {
            b.expr().collect_star_attributes(&mut out);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.kind.keyword())?;
        if let Some(lo) = &self.lower {
            write!(f, "{lo} <= ")?;
        }
        write!(f, "count({})", self.target)?;
        if let Some(hi) = &self.upper {
            write!(f, " <= {hi}")?;
        }
        Ok(())
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Advisory diagnostics for a constraint set under a given `k`: fixed bounds
/// that are not multiples of `k`, and fixed lower bounds below `k`.
pub fn lint(constraints: &[Constraint], k: u64) -> Vec<String> {
    let mut out = Vec::new();
    for c in constraints {
        let Some(range) = c.fixed_range() else {
            continue;
        };
        if c.lower.is_some() && range.lo % k != 0 {
            out.push(format!(
                "`{c}`: lower bound {} is not a multiple of k={k}",
                range.lo
            ));
        }
        if let Some(hi) = range.hi {
            if hi % k != 0 {
                out.push(format!(
                    "`{c}`: upper bound {hi} is not a multiple of k={k}"
                ));
            }
        }
        if range.lo > 0 && range.lo < k {
            out.push(format!(
                "`{c}`: lower bound {} is below k={k} and can only hold through k-sized groups",
                range.lo
            ));
        }
    }
    out
}
