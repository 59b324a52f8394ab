//! Satisfaction of diversity (`R' ⊨ σ`) and fairness (`⟨R, R'⟩ ⊨ η`)
//! constraints, with the resolved bounds kept for diagnostics.

use serde::Serialize;

use crate::constraint::{BoundPosition, Constraint, ConstraintKind, EvalContext};
use crate::error::{Error, Result};
use crate::relation::Relation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatReport {
    pub constraint: Constraint,
    pub observed_count: u64,
    pub resolved_lo: u64,
    /// `None` is `+∞`.
    pub resolved_hi: Option<u64>,
    pub satisfied: bool,
}

impl SatReport {
    pub(crate) fn new(
        constraint: Constraint,
        observed_count: u64,
        resolved_lo: u64,
        resolved_hi: Option<u64>,
    ) -> Self {
        let satisfied =
            resolved_lo <= observed_count && resolved_hi.is_none_or(|hi| observed_count <= hi);
        Self {
            constraint,
            observed_count,
            resolved_lo,
            resolved_hi,
            satisfied,
        }
    }
}

/// Resolves both bounds of `c` in `ctx`; absent bounds are `0` and `+∞`.
pub fn resolve_bounds(c: &Constraint, ctx: &EvalContext) -> Result<(u64, Option<u64>)> {
    let lo = match c.lower() {
        Some(b) => b.eval(ctx, BoundPosition::Lower)?,
        None => 0,
    };
    let hi = match c.upper() {
        Some(b) => Some(b.eval(ctx, BoundPosition::Upper)?),
        None => None,
    };
    Ok((lo, hi))
}

fn anonymized_context(rp: &Relation, c: &Constraint, k: u64) -> Result<EvalContext> {
    let mut ctx = EvalContext {
        k,
        n_prime: rp.len() as u64,
        ..Default::default()
    };
    for a in c.star_attributes() {
        ctx.stars.insert(a.to_string(), rp.count_stars(a)? as u64);
    }
    Ok(ctx)
}

pub fn check_diversity(rp: &Relation, sigma: &Constraint, k: u64) -> Result<SatReport> {
    if sigma.kind() != ConstraintKind::Diversity {
        return Err(Error::Contract(format!(
            "`{sigma}` is not a diversity constraint"
        )));
    }
    let ctx = anonymized_context(rp, sigma, k)?;
    let observed = rp.count_target(sigma.target())? as u64;
    let (lo, hi) = resolve_bounds(sigma, &ctx)?;
    Ok(SatReport::new(sigma.clone(), observed, lo, hi))
}

/// `C` and `R0` are taken from `initial`; everything else from `rp`.
/// Whether `rp` actually refines `initial` is not re-checked.
pub fn check_fairness(
    initial: &Relation,
    rp: &Relation,
    eta: &Constraint,
    k: u64,
) -> Result<SatReport> {
    if eta.kind() != ConstraintKind::Fairness {
        return Err(Error::Contract(format!(
            "`{eta}` is not a fairness constraint"
        )));
    }
    if initial.schema() != rp.schema() {
        return Err(Error::Contract(
            "initial and anonymized relations have different schemas".into(),
        ));
    }
    if initial.len() != rp.len() {
        return Err(Error::Contract(format!(
            "initial relation has {} rows, anonymized has {}",
            initial.len(),
            rp.len()
        )));
    }
    let mut ctx = anonymized_context(rp, eta, k)?;
    ctx.initial_target_count = Some(initial.count_target(eta.target())? as u64);
    ctx.n_initial = Some(initial.len() as u64);
    let observed = rp.count_target(eta.target())? as u64;
    let (lo, hi) = resolve_bounds(eta, &ctx)?;
    Ok(SatReport::new(eta.clone(), observed, lo, hi))
}

/// One report per constraint, in order. The first error aborts and names the
/// offending constraint.
pub fn check_all(
    initial: &Relation,
    rp: &Relation,
    sigma: &[Constraint],
    k: u64,
) -> Result<Vec<SatReport>> {
    sigma
        .iter()
        .map(|c| {
            match c.kind() {
                ConstraintKind::Diversity => check_diversity(rp, c, k),
                ConstraintKind::Fairness => check_fairness(initial, rp, c, k),
            }
            .map_err(|e| Error::InConstraint {
                constraint: c.to_string(),
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn all_satisfied(reports: &[SatReport]) -> bool {
    reports.iter().all(|r| r.satisfied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::parse_constraint;
    use crate::fixtures;

    #[test]
    fn fixed_bound_verdicts_on_r1_and_r2() {
        let sigma1 = parse_constraint(r#"div: 3 <= count(ETH="Asian") <= 6"#).unwrap();
        let r1 = check_diversity(&fixtures::r1(), &sigma1, 3).unwrap();
        assert!(!r1.satisfied);
        assert_eq!(r1.observed_count, 0);
        assert_eq!((r1.resolved_lo, r1.resolved_hi), (3, Some(6)));
        let r2 = check_diversity(&fixtures::r2(), &sigma1, 3).unwrap();
        assert!(r2.satisfied);
        assert_eq!(r2.observed_count, 3);
    }

    #[test]
    fn variable_bound_on_r1() {
        let c = parse_constraint(r#"div: ceil_k(0.3 * (N - S("GEN"))) <= count(GEN="Female")"#)
            .unwrap();
        let rep = check_diversity(&fixtures::r1(), &c, 3).unwrap();
        assert_eq!(rep.resolved_lo, 3);
        assert_eq!(rep.observed_count, 0);
        assert!(!rep.satisfied);
        assert!(check_diversity(&fixtures::r2(), &c, 3).unwrap().satisfied);
    }

    #[test]
    fn fairness_on_r_and_r2() {
        let eta = parse_constraint(fixtures::FAIRNESS_FEMALE).unwrap();
        let rep = check_fairness(&fixtures::initial(), &fixtures::r2(), &eta, 3).unwrap();
        assert_eq!((rep.resolved_lo, rep.observed_count), (3, 3));
        assert!(rep.satisfied);
    }

    #[test]
    fn fairness_fails_with_one_more_female_suppressed() {
        let eta = parse_constraint(fixtures::FAIRNESS_FEMALE).unwrap();
        let rp = fixtures::r2_with_extra_female_star();
        assert_eq!(rp.count_stars("GEN").unwrap(), 7);
        let rep = check_fairness(&fixtures::initial(), &rp, &eta, 3).unwrap();
        assert_eq!((rep.resolved_lo, rep.observed_count), (3, 2));
        assert!(!rep.satisfied);
    }

    #[test]
    fn zero_lower_bound_always_holds() {
        let eta = parse_constraint(r#"fair: 0 <= count(GEN="Female")"#).unwrap();
        let rep = check_fairness(&fixtures::initial(), &fixtures::r1(), &eta, 3).unwrap();
        assert!(rep.satisfied);
    }

    #[test]
    fn kind_and_shape_mismatches() {
        let eta = parse_constraint(fixtures::FAIRNESS_FEMALE).unwrap();
        assert!(matches!(
            check_diversity(&fixtures::r2(), &eta, 3),
            Err(Error::Contract(_))
        ));
        let short = Relation::from_strs(&["GEN", "ETH", "CTY"], &[&["M", "A", "X"]], "*").unwrap();
        assert!(matches!(
            check_fairness(&fixtures::initial(), &short, &eta, 3),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn check_all_combines_verdicts() {
        let r = fixtures::initial();
        assert!(check_all(&r, &r, &[], 3).unwrap().is_empty());

        let sigma = vec![
            parse_constraint(r#"div: 3 <= count(ETH="Asian") <= 6"#).unwrap(),
            parse_constraint(r#"div: 3 <= count(ETH="Martian")"#).unwrap(),
        ];
        let reps = check_all(&r, &fixtures::r2(), &sigma, 3).unwrap();
        assert!(!all_satisfied(&reps));
        assert_eq!(reps.iter().filter(|r| !r.satisfied).count(), 1);

        let sigma = vec![
            parse_constraint(r#"div: 3 <= count(ETH="Asian") <= 6"#).unwrap(),
            parse_constraint(fixtures::FAIRNESS_FEMALE).unwrap(),
        ];
        assert!(all_satisfied(
            &check_all(&r, &fixtures::r2(), &sigma, 3).unwrap()
        ));
    }

    #[test]
    fn check_all_names_offending_constraint() {
        let r = fixtures::initial();
        let bad = parse_constraint(r#"div: 3 <= count(AGE="40")"#).unwrap();
        match check_all(&r, &r, &[bad], 3) {
            Err(Error::InConstraint { constraint, source }) => {
                assert!(constraint.contains("AGE"));
                assert_eq!(*source, Error::Schema("AGE".into()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
