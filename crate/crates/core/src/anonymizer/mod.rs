//! (k, Σ)-anonymization by cluster-uniform suppression.
//!
//! A [`Clustering`] partitions the rows; within each group a QI attribute is
//! either revealed (all members agree on it) or suppressed for every member.
//! Three solvers search over clusterings:
//!
//! - [`oracle_min_loss`]: every set partition, for small relations only;
//! - [`solve_exact`]: branch and bound with a provable optimum;
//! - [`solve_greedy`]: agglomerative grouping plus constraint repair.

mod compiled;
mod exact;
mod greedy;
mod oracle;

use std::fmt;
use std::time::Duration;

use serde::Serialize;

use crate::constraint::{Constraint, FrequencyRange};
use crate::error::{Error, Result};
use crate::relation::{refines, Cell, QiSet, Relation};
use crate::semantics::{all_satisfied, check_all, SatReport};

pub use exact::{solve_exact, ExactOutcome};
pub use greedy::{solve_greedy, GreedyOutcome};
pub use oracle::{decide, oracle_min_loss, OracleOutcome};

pub const DEFAULT_ORACLE_CAP: usize = 10;

/// Disjoint row-index groups covering `0..n`, kept in canonical form:
/// members ascending, groups ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Clustering {
    groups: Vec<Vec<usize>>,
}

impl Clustering {
    pub fn new(mut groups: Vec<Vec<usize>>, rows: usize) -> Result<Self> {
        let mut seen = vec![false; rows];
        for g in &mut groups {
            if g.is_empty() {
                return Err(Error::Contract("empty group in clustering".into()));
            }
            g.sort_unstable();
            for &i in g.iter() {
                match seen.get_mut(i) {
                    None => {
                        return Err(Error::Contract(format!(
                            "row index {i} out of range for {rows} rows"
                        )))
                    }
                    Some(true) => return Err(Error::Contract(format!("row {i} in two groups"))),
                    Some(s) => *s = true,
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Contract(format!(
                "row {i} not covered by clustering"
            )));
        }
        groups.sort_unstable_by_key(|g| g[0]);
        Ok(Self { groups })
    }

    /// Every row in its own group.
    pub fn singletons(rows: usize) -> Self {
        Self {
            groups: (0..rows).map(|i| vec![i]).collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn min_group_size(&self) -> Option<usize> {
        self.groups.iter().map(Vec::len).min()
    }
}

impl fmt::Display for Clustering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{g:?}")?;
        }
        Ok(())
    }
}

/// The suppression pattern induced by `clustering`: a QI attribute keeps its
/// value in a group iff all members share it, otherwise every member's cell
/// becomes a star. Non-QI cells pass through.
pub fn build_anonymized(
    relation: &Relation,
    clustering: &Clustering,
    qi: &QiSet,
) -> Result<Relation> {
    let cols = qi
        .iter()
        .map(|a| relation.column_index(a))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = relation.rows().to_vec();
    for g in clustering.groups() {
        if let Some(&bad) = g.iter().find(|&&i| i >= rows.len()) {
            return Err(Error::Contract(format!(
                "row index {bad} out of range for {} rows",
                rows.len()
            )));
        }
        for &c in &cols {
            let first = &relation.rows()[g[0]][c];
            if g.iter().any(|&i| relation.rows()[i][c] != *first) {
                for &i in g {
                    rows[i][c] = Cell::Star;
                }
            }
        }
    }
    Relation::new(relation.schema().to_vec(), rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Limits {
    /// Branch-and-bound node budget.
    pub max_nodes: Option<u64>,
    #[serde(serialize_with = "serialize_duration")]
    pub time_budget: Option<Duration>,
    pub seed: u64,
    /// Largest relation the exhaustive oracle accepts.
    pub oracle_cap: usize,
    /// Greedy repair iterations.
    pub repair_budget: usize,
}

fn serialize_duration<S: serde::Serializer>(
    d: &Option<Duration>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_some(&d.as_secs_f64()),
        None => s.serialize_none(),
    }
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_nodes: None,
            time_budget: None,
            seed: 0,
            oracle_cap: DEFAULT_ORACLE_CAP,
            repair_budget: 500,
        }
    }
}

/// A (k, Σ)-anonymization instance.
#[derive(Debug, Clone)]
pub struct Problem {
    relation: Relation,
    k: usize,
    qi: QiSet,
    sigma: Vec<Constraint>,
    limits: Limits,
}

impl Problem {
    /// Rejects relations that already contain stars, `k = 0`, attributes
    /// missing from the schema, and fixed lower bounds in `(0, k)`.
    pub fn new(
        relation: Relation,
        k: usize,
        qi: QiSet,
        sigma: Vec<Constraint>,
        limits: Limits,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        if relation.has_stars() {
            return Err(Error::Contract(
                "the relation to anonymize must not contain stars".into(),
            ));
        }
        for a in qi.iter() {
            relation.column_index(a)?;
        }
        for c in &sigma {
            for a in c.target().attributes().chain(c.star_attributes()) {
                relation.column_index(a)?;
            }
            if let (Some(_), Some(FrequencyRange { lo, .. })) = (c.lower(), c.fixed_range()) {
                if lo > 0 && lo < k as u64 {
                    return Err(Error::Contract(format!(
                        "`{c}`: fixed lower bound {lo} is below k={k}"
                    )));
                }
            }
        }
        Ok(Self {
            relation,
            k,
            qi,
            sigma,
            limits,
        })
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn qi(&self) -> &QiSet {
        &self.qi
    }

    pub fn sigma(&self) -> &[Constraint] {
        &self.sigma
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    /// Some constraint needs more matching rows than the relation has;
    /// suppression can only remove matches.
    pub(crate) fn trivially_infeasible(&self) -> Result<bool> {
        if self.relation.len() < self.k && !self.relation.is_empty() {
            return Ok(true);
        }
        for c in &self.sigma {
            if let Some(range) = c.fixed_range() {
                if range.lo > self.relation.count_target(c.target())? as u64 {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Builds and checks the solution for `clustering` along the reference
    /// path (materialized relation, [`check_all`]).
    pub fn evaluate(&self, clustering: &Clustering) -> Result<Candidate> {
        let anonymized = build_anonymized(&self.relation, clustering, &self.qi)?;
        let reports = check_all(&self.relation, &anonymized, &self.sigma, self.k as u64)?;
        let k_anonymous = clustering.min_group_size().is_none_or(|m| m >= self.k)
            && anonymized.is_k_anonymous(&self.qi, self.k)?;
        let feasible = k_anonymous && all_satisfied(&reports);
        Ok(Candidate {
            loss: anonymized.info_loss(),
            anonymized,
            reports,
            feasible,
        })
    }

    pub(crate) fn solution(
        &self,
        clustering: Clustering,
        optimal: bool,
        stats: SolverStats,
    ) -> Result<Solution> {
        let c = self.evaluate(&clustering)?;
        if !c.feasible {
            return Err(Error::Contract(format!(
                "solver produced an infeasible clustering: {clustering}"
            )));
        }
        Ok(Solution {
            anonymized: c.anonymized,
            clustering,
            loss: c.loss,
            constraint_reports: c.reports,
            optimal,
            stats,
        })
    }

    /// Independently re-checks every condition a solution must meet.
    pub fn verify(&self, s: &Solution) -> Result<bool> {
        let reports = check_all(&self.relation, &s.anonymized, &self.sigma, self.k as u64)?;
        Ok(refines(&self.relation, &s.anonymized)
            && s.anonymized.is_k_anonymous(&self.qi, self.k)?
            && all_satisfied(&reports)
            && s.loss == s.anonymized.info_loss()
            && s.anonymized == build_anonymized(&self.relation, &s.clustering, &self.qi)?)
    }
}

/// A clustering evaluated along the reference path.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub anonymized: Relation,
    pub reports: Vec<SatReport>,
    pub loss: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PruneCounts {
    /// Partial star count already at or above the incumbent.
    pub loss_bound: u64,
    /// Leftover rows could not form a group of size k.
    pub fill: u64,
    /// A fixed upper bound is already exceeded by closed groups.
    pub upper_bound: u64,
    /// A fixed lower bound can no longer be reached.
    pub lower_bound: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub nodes_expanded: u64,
    pub leaves_evaluated: u64,
    pub prunes: PruneCounts,
    pub repair_steps: u64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    #[serde(skip)]
    pub anonymized: Relation,
    pub clustering: Clustering,
    pub loss: usize,
    pub constraint_reports: Vec<SatReport>,
    pub optimal: bool,
    pub stats: SolverStats,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::parse_constraint;
    use crate::fixtures;
    use crate::relation::TargetValue;

    fn qi_all(r: &Relation) -> QiSet {
        QiSet::all(r.schema()).unwrap()
    }

    #[test]
    fn clustering_canonical_form() {
        let c = Clustering::new(vec![vec![3, 1], vec![2, 0]], 4).unwrap();
        assert_eq!(c.groups(), [vec![0, 2], vec![1, 3]]);
        assert!(Clustering::new(vec![vec![0, 0]], 1).is_err());
        assert!(Clustering::new(vec![vec![0]], 2).is_err());
        assert!(Clustering::new(vec![vec![5]], 1).is_err());
    }

    #[test]
    fn uniform_group_keeps_values() {
        let r = Relation::from_strs(&["A", "B"], &[&["a", "b"], &["a", "b"]], "*").unwrap();
        let out = build_anonymized(
            &r,
            &Clustering::new(vec![vec![0, 1]], 2).unwrap(),
            &qi_all(&r),
        )
        .unwrap();
        assert_eq!(out.info_loss(), 0);
    }

    #[test]
    fn mixed_group_suppresses_column() {
        let r = Relation::from_strs(&["GEN"], &[&["M"], &["M"], &["F"]], "*").unwrap();
        let out = build_anonymized(
            &r,
            &Clustering::new(vec![vec![0, 1, 2]], 3).unwrap(),
            &qi_all(&r),
        )
        .unwrap();
        assert_eq!(out.count_stars("GEN").unwrap(), 3);
    }

    #[test]
    fn non_qi_cells_pass_through() {
        let r = Relation::from_strs(&["A", "B"], &[&["a", "x"], &["b", "y"]], "*").unwrap();
        let qi = QiSet::new(["A"], r.schema()).unwrap();
        let out =
            build_anonymized(&r, &Clustering::new(vec![vec![0, 1]], 2).unwrap(), &qi).unwrap();
        assert_eq!(out.count_stars("A").unwrap(), 2);
        assert_eq!(out.count_stars("B").unwrap(), 0);
    }

    #[test]
    fn fixture_relations_come_from_clusterings() {
        let r = fixtures::initial();
        let qi = qi_all(&r);
        let r2 = build_anonymized(
            &r,
            &Clustering::new(vec![vec![0, 1, 2], vec![3, 4, 5, 6, 7, 8]], 9).unwrap(),
            &qi,
        )
        .unwrap();
        assert_eq!(r2, fixtures::r2());
        assert_eq!(
            r2.count_target(&TargetValue::single("ETH", "Asian"))
                .unwrap(),
            3
        );
        let r1 = build_anonymized(
            &r,
            &Clustering::new(vec![vec![4, 5, 6], vec![0, 1, 2, 3, 7, 8]], 9).unwrap(),
            &qi,
        )
        .unwrap();
        assert_eq!(r1, fixtures::r1());
        assert_eq!(r1.count_stars("GEN").unwrap(), 6);
    }

    #[test]
    fn out_of_range_index_is_contract_error() {
        let r = Relation::from_strs(&["A"], &[&["a"]], "*").unwrap();
        let bogus = Clustering {
            groups: vec![vec![0, 3]],
        };
        assert!(matches!(
            build_anonymized(&r, &bogus, &qi_all(&r)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn problem_validation() {
        let r = fixtures::initial();
        let qi = qi_all(&r);
        let low = parse_constraint(r#"div: 2 <= count(ETH="Asian")"#).unwrap();
        assert!(Problem::new(r.clone(), 3, qi.clone(), vec![low], Limits::default()).is_err());
        let zero = parse_constraint(r#"div: 0 <= count(ETH="Asian") <= 6"#).unwrap();
        assert!(Problem::new(r.clone(), 3, qi.clone(), vec![zero], Limits::default()).is_ok());
        assert!(Problem::new(fixtures::r2(), 3, qi.clone(), vec![], Limits::default()).is_err());
        assert!(Problem::new(r.clone(), 0, qi.clone(), vec![], Limits::default()).is_err());
        let unknown = parse_constraint(r#"div: 3 <= count(AGE="40")"#).unwrap();
        assert_eq!(
            Problem::new(r, 3, qi, vec![unknown], Limits::default()).unwrap_err(),
            Error::Schema("AGE".into())
        );
    }
}
