//! Implication, satisfiability and minimal cover for fixed-bound diversity
//! constraints.
//!
//! The range a constraint set allows for a target `X[t]` is the
//! intersection of:
//! - `[λl, λr]` of every constraint on `X[t]` itself (fixed attributes),
//! - `[0, λr]` of every constraint on a strict subset of `X[t]`
//!   (attribute extension: upper bounds carry over to supersets),
//! - `[λl, +∞)` of every constraint on a strict superset of `X[t]`
//!   (attribute reduction: lower bounds carry over to subsets).
//!
//! `Σ ⊨ σ` holds exactly when that range is contained in `σ`'s range.

use std::fmt;

use serde::Serialize;

use crate::constraint::{Constraint, ConstraintKind, FrequencyRange};
use crate::error::{Error, Result};
use crate::relation::TargetValue;

/// `(X[t], [λl, λr])`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FixedConstraint {
    pub target: TargetValue,
    pub range: FrequencyRange,
}

impl FixedConstraint {
    pub fn new(target: TargetValue, range: FrequencyRange) -> Self {
        Self { target, range }
    }

    pub fn bounded(target: TargetValue, lo: u64, hi: u64) -> Self {
        Self::new(target, FrequencyRange::bounded(lo, hi))
    }

    pub fn to_constraint(&self) -> Constraint {
        let FrequencyRange { lo, hi } = self.range;
        let lo = (lo > 0 || hi.is_none()).then_some(lo);
        Constraint::fixed(self.target.clone(), lo, hi).expect("at least one bound is present")
    }
}

impl TryFrom<&Constraint> for FixedConstraint {
    type Error = Error;

    fn try_from(c: &Constraint) -> Result<Self> {
        if c.kind() != ConstraintKind::Diversity {
            return Err(Error::Inference(format!(
                "`{c}`: implication is only defined for diversity constraints"
            )));
        }
        let range = c.fixed_range().ok_or_else(|| {
            Error::Inference(format!(
                "`{c}`: implication is only defined for fixed-bound constraints"
            ))
        })?;
        Ok(Self::new(c.target().clone(), range))
    }
}

impl fmt::Display for FixedConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.target, self.range)
    }
}

/// Projects a parsed constraint list onto fixed-bound constraints.
pub fn to_fixed(constraints: &[Constraint]) -> Result<Vec<FixedConstraint>> {
    constraints.iter().map(FixedConstraint::try_from).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    FixedAttributes,
    AttributeExtension,
    AttributeReduction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub source: FixedConstraint,
    /// How the contributed range was derived from `source`. Each step is
    /// folded into the running range by range intersection.
    pub axiom: Axiom,
    pub contributed: FrequencyRange,
    pub narrowed_to: FrequencyRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InferenceOutcome {
    pub implied: bool,
    pub derived_range: FrequencyRange,
    pub trace: Vec<TraceStep>,
}

/// Range for `target` entailed by `sigma`, with one trace step per
/// contributing constraint. Single pass over `sigma`.
pub fn range_for_target(
    sigma: &[FixedConstraint],
    target: &TargetValue,
) -> (FrequencyRange, Vec<TraceStep>) {
    let mut delta = FrequencyRange::UNIVERSAL;
    let mut trace = Vec::new();
    for s in sigma {
        let (axiom, contributed) = if s.target == *target {
            (Axiom::FixedAttributes, s.range)
        } else if s.target.is_strict_subset(target) {
            (
                Axiom::AttributeExtension,
                FrequencyRange::new(0, s.range.hi),
            )
        } else if target.is_strict_subset(&s.target) {
            (
                Axiom::AttributeReduction,
                FrequencyRange::at_least(s.range.lo),
            )
        } else {
            continue;
        };
        delta = delta.intersect(&contributed);
        trace.push(TraceStep {
            source: s.clone(),
            axiom,
            contributed,
            narrowed_to: delta,
        });
    }
    (delta, trace)
}

pub fn implies(sigma: &[FixedConstraint], query: &FixedConstraint) -> InferenceOutcome {
    let (derived_range, trace) = range_for_target(sigma, &query.target);
    InferenceOutcome {
        implied: derived_range.is_subset(&query.range),
        derived_range,
        trace,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Satisfiability {
    /// One count per distinct target of `Σ`, each inside its derived range,
    /// with a superset target never counted above any of its subsets.
    Satisfiable { witness: Vec<(TargetValue, u64)> },
    /// `Σ` implies the false constraint `(X[t], ∅)`.
    Unsatisfiable { false_constraint: FixedConstraint },
}

impl Satisfiability {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, Satisfiability::Satisfiable { .. })
    }
}

/// Only targets that occur in `sigma` are examined: a conflict on any other
/// target also empties the range of a superset target that does occur.
pub fn is_satisfiable(sigma: &[FixedConstraint]) -> Satisfiability {
    let mut targets: Vec<&TargetValue> = Vec::new();
    for s in sigma {
        if !targets.contains(&&s.target) {
            targets.push(&s.target);
        }
    }
    let mut witness = Vec::with_capacity(targets.len());
    let mut conflict: Option<FixedConstraint> = None;
    for t in targets {
        let (delta, _) = range_for_target(sigma, t);
        if delta.is_empty() {
            // report the most general conflicting target
            if conflict.as_ref().is_none_or(|c| t.len() < c.target.len()) {
                conflict = Some(FixedConstraint::new(t.clone(), delta));
            }
            continue;
        }
        // Lower bounds only flow from supersets to subsets, so taking every
        // target's lower end already orders supersets below their subsets.
        witness.push((t.clone(), delta.lo));
    }
    match conflict {
        Some(false_constraint) => Satisfiability::Unsatisfiable { false_constraint },
        None => Satisfiability::Satisfiable { witness },
    }
}

/// Drops, in input order, every constraint implied by the ones that remain.
pub fn minimal_cover(sigma: &[FixedConstraint]) -> Result<Vec<FixedConstraint>> {
    if let Satisfiability::Unsatisfiable { false_constraint } = is_satisfiable(sigma) {
        return Err(Error::Inference(format!(
            "constraint set is unsatisfiable: it implies the false constraint on {}",
            false_constraint.target
        )));
    }
    let mut cover = sigma.to_vec();
    let mut i = 0;
    while i < cover.len() {
        let candidate = cover.remove(i);
        if implies(&cover, &candidate).implied {
            continue;
        }
        cover.insert(i, candidate);
        i += 1;
    }
    Ok(cover)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(pairs: &[(&str, &str)]) -> TargetValue {
        TargetValue::new(pairs.iter().copied()).unwrap()
    }

    fn calgary_sigma() -> (FixedConstraint, FixedConstraint, FixedConstraint) {
        (
            FixedConstraint::bounded(tv(&[("CTY", "Calgary")]), 2, 10),
            FixedConstraint::bounded(
                tv(&[("GEN", "Female"), ("ETH", "Caucasian"), ("CTY", "Calgary")]),
                4,
                7,
            ),
            FixedConstraint::bounded(tv(&[("ETH", "Caucasian"), ("CTY", "Calgary")]), 5, 8),
        )
    }

    #[test]
    fn range_narrows_to_four_ten() {
        let (s1, s2, q) = calgary_sigma();
        let (delta, trace) = range_for_target(&[s1, s2], &q.target);
        assert_eq!(delta, FrequencyRange::bounded(4, 10));
        assert_eq!(trace[0].narrowed_to, FrequencyRange::bounded(0, 10));
        assert_eq!(trace[0].axiom, Axiom::AttributeExtension);
        assert_eq!(trace[1].axiom, Axiom::AttributeReduction);
    }

    #[test]
    fn implication_uses_delta_subset_of_query() {
        let (s1, s2, q) = calgary_sigma();
        // [4, 10] is not inside [5, 8]
        let out = implies(&[s1.clone(), s2.clone()], &q);
        assert!(!out.implied);
        let wide = FixedConstraint::bounded(q.target.clone(), 4, 10);
        assert!(implies(&[s1, s2], &wide).implied);
    }

    #[test]
    fn member_is_implied() {
        let (s1, s2, _) = calgary_sigma();
        assert!(implies(&[s1.clone(), s2.clone()], &s2).implied);
        assert!(implies(&[s1.clone(), s2], &s1).implied);
    }

    #[test]
    fn narrower_range_not_implied() {
        let a = FixedConstraint::bounded(tv(&[("A", "a")]), 3, 6);
        let q = FixedConstraint::bounded(tv(&[("A", "a")]), 4, 5);
        assert!(!implies(&[a], &q).implied);
    }

    #[test]
    fn empty_sigma_gives_universal_range() {
        let (delta, trace) = range_for_target(&[], &tv(&[("A", "a")]));
        assert_eq!(delta, FrequencyRange::UNIVERSAL);
        assert!(trace.is_empty());
    }

    #[test]
    fn unsatisfiable_on_calgary() {
        let sigma = [
            FixedConstraint::bounded(tv(&[("ETH", "Caucasian"), ("CTY", "Calgary")]), 6, 8),
            FixedConstraint::bounded(tv(&[("CTY", "Calgary")]), 1, 5),
        ];
        let (delta, _) = range_for_target(&sigma, &tv(&[("CTY", "Calgary")]));
        assert!(delta.is_empty());
        match is_satisfiable(&sigma) {
            Satisfiability::Unsatisfiable { false_constraint } => {
                assert_eq!(false_constraint.target, tv(&[("CTY", "Calgary")]));
                assert!(false_constraint.range.is_empty());
            }
            other => panic!("expected unsatisfiable, got {other:?}"),
        }
    }

    #[test]
    fn satisfiable_witnesses() {
        assert_eq!(
            is_satisfiable(&[]),
            Satisfiability::Satisfiable { witness: vec![] }
        );
        let sigma = [
            FixedConstraint::bounded(tv(&[("A", "a")]), 3, 6),
            FixedConstraint::bounded(tv(&[("A", "b")]), 3, 6),
        ];
        assert_eq!(
            is_satisfiable(&sigma),
            Satisfiability::Satisfiable {
                witness: vec![(tv(&[("A", "a")]), 3), (tv(&[("A", "b")]), 3)]
            }
        );
    }

    #[test]
    fn minimal_cover_examples() {
        let single = [FixedConstraint::bounded(tv(&[("A", "a")]), 3, 6)];
        assert_eq!(minimal_cover(&single).unwrap(), single);

        let pair = [
            FixedConstraint::bounded(tv(&[("A", "a")]), 3, 6),
            FixedConstraint::bounded(tv(&[("A", "a")]), 2, 8),
        ];
        assert_eq!(minimal_cover(&pair).unwrap(), vec![pair[0].clone()]);

        let (s1, s2, q) = calgary_sigma();
        // {s1, s2} does not imply q, so nothing is redundant
        assert_eq!(
            minimal_cover(&[s1.clone(), s2.clone(), q.clone()]).unwrap(),
            vec![s1.clone(), s2.clone(), q]
        );
        let wide = FixedConstraint::bounded(tv(&[("ETH", "Caucasian"), ("CTY", "Calgary")]), 4, 10);
        assert_eq!(
            minimal_cover(&[s1.clone(), s2.clone(), wide]).unwrap(),
            vec![s1, s2]
        );
    }

    #[test]
    fn minimal_cover_rejects_unsatisfiable() {
        let sigma = [
            FixedConstraint::bounded(tv(&[("A", "a")]), 6, 8),
            FixedConstraint::bounded(tv(&[("A", "a")]), 1, 5),
        ];
        assert!(matches!(minimal_cover(&sigma), Err(Error::Inference(_))));
    }

    #[test]
    fn non_fixed_constraints_are_rejected() {
        let c = crate::constraint::parse_constraint(r#"div: N - 3 <= count(A="a")"#).unwrap();
        assert!(FixedConstraint::try_from(&c).is_err());
        let c = crate::constraint::parse_constraint(r#"fair: 3 <= count(A="a")"#).unwrap();
        assert!(FixedConstraint::try_from(&c).is_err());
    }

    #[test]
    fn to_constraint_round_trips() {
        for r in [
            FrequencyRange::bounded(3, 6),
            FrequencyRange::at_least(3),
            FrequencyRange::at_most(5),
            FrequencyRange::UNIVERSAL,
        ] {
            let f = FixedConstraint::new(tv(&[("A", "a")]), r);
            assert_eq!(FixedConstraint::try_from(&f.to_constraint()).unwrap(), f);
        }
    }
}
