//! Branch and bound over clusterings.
//!
//! Groups are closed one at a time: each level picks the full membership of
//! the group holding the smallest unassigned row. Because a closed group
//! never changes, its stars and its contribution to every target count are
//! final, which makes the loss bound and the fixed-bound prunes sound.

use std::time::Instant;

use crate::error::Result;

use super::compiled::{Compiled, Totals};
use super::greedy::{solve_greedy, GreedyOutcome};
use super::{Clustering, Problem, Solution, SolverStats};

#[derive(Debug, Clone)]
pub enum ExactOutcome {
    /// Provably optimal (`optimal = true`).
    Solved(Solution),
    Infeasible,
    /// A node or time limit tripped; carries the best incumbent, if any.
    Aborted {
        best_so_far: Option<Solution>,
    },
}

struct Search<'a, 'p> {
    cp: &'a Compiled<'p>,
    best: Option<(u64, Vec<Vec<usize>>)>,
    stats: SolverStats,
    started: Instant,
    aborted: bool,
}

impl Search<'_, '_> {
    fn out_of_budget(&self) -> bool {
        let limits = self.cp.problem.limits();
        limits
            .max_nodes
            .is_some_and(|m| self.stats.nodes_expanded >= m)
            || limits
                .time_budget
                .is_some_and(|t| self.started.elapsed() >= t)
    }

    fn rec(
        &mut self,
        remaining: &[usize],
        groups: &mut Vec<Vec<usize>>,
        totals: &mut Totals,
    ) -> Result<()> {
        if self.aborted {
            return Ok(());
        }
        if remaining.is_empty() {
            self.stats.leaves_evaluated += 1;
            if self.cp.violation(totals)?.is_feasible()
                && self.best.as_ref().is_none_or(|(l, _)| totals.loss < *l)
            {
                self.best = Some((totals.loss, groups.clone()));
            }
            return Ok(());
        }
        if self.out_of_budget() {
            self.aborted = true;
            return Ok(());
        }
        self.stats.nodes_expanded += 1;

        let k = self.cp.k;
        let first = remaining[0];
        let others = &remaining[1..];
        let mut member = vec![false; others.len()];
        for extra in k.saturating_sub(1)..=others.len() {
            let leftover = others.len() - extra;
            if leftover != 0 && leftover < k {
                self.stats.prunes.fill += 1;
                continue;
            }
            let mut combo: Vec<usize> = (0..extra).collect();
            loop {
                member.iter_mut().for_each(|m| *m = false);
                let mut group = Vec::with_capacity(extra + 1);
                group.push(first);
                for &i in &combo {
                    member[i] = true;
                    group.push(others[i]);
                }
                let rest: Vec<usize> = others
                    .iter()
                    .zip(&member)
                    .filter(|(_, m)| !**m)
                    .map(|(r, _)| *r)
                    .collect();
                self.branch(group, &rest, groups, totals)?;
                if self.aborted || !next_combination(&mut combo, others.len()) {
                    break;
                }
            }
            if self.aborted {
                break;
            }
        }
        Ok(())
    }

    fn branch(
        &mut self,
        group: Vec<usize>,
        rest: &[usize],
        groups: &mut Vec<Vec<usize>>,
        totals: &mut Totals,
    ) -> Result<()> {
        let g = self.cp.group_stats(&group);
        totals.add(&g);
        if self.prune(rest, totals) {
            totals.sub(&g);
            return Ok(());
        }
        groups.push(group);
        let r = self.rec(rest, groups, totals);
        groups.pop();
        totals.sub(&g);
        r
    }

    fn prune(&mut self, rest: &[usize], totals: &Totals) -> bool {
        if let Some((best, _)) = &self.best {
            if totals.loss >= *best {
                self.stats.prunes.loss_bound += 1;
                return true;
            }
        }
        for (c, fixed) in self.cp.fixed.iter().enumerate() {
            let Some((lo, hi)) = *fixed else { continue };
            if hi.is_some_and(|hi| totals.counts[c] > hi) {
                self.stats.prunes.upper_bound += 1;
                return true;
            }
            if lo > totals.counts[c] {
                let potential = rest
                    .iter()
                    .filter(|&&r| self.cp.matches_initially(r, c))
                    .count() as u64;
                if totals.counts[c] + potential < lo {
                    self.stats.prunes.lower_bound += 1;
                    return true;
                }
            }
        }
        false
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let r = combo.len();
    let Some(i) = (0..r).rev().find(|&i| combo[i] < n - r + i) else {
        return false;
    };
    combo[i] += 1;
    for j in i + 1..r {
        combo[j] = combo[j - 1] + 1;
    }
    true
}

/// Minimum-loss (k, Σ)-anonymization by branch and bound, seeded with the
/// greedy solution as the first incumbent.
pub fn solve_exact(p: &Problem) -> Result<ExactOutcome> {
    let started = Instant::now();
    if p.trivially_infeasible()? {
        return Ok(ExactOutcome::Infeasible);
    }
    let cp = Compiled::new(p)?;
    let mut search = Search {
        cp: &cp,
        best: None,
        stats: SolverStats::default(),
        started,
        aborted: false,
    };
    if let GreedyOutcome::Solved(s) = solve_greedy(p)? {
        search.best = Some((s.loss as u64, s.clustering.groups().to_vec()));
    }
    let rows: Vec<usize> = (0..cp.n).collect();
    let mut totals = Totals::empty(cp.qi_len(), cp.constraint_len());
    search.rec(&rows, &mut Vec::new(), &mut totals)?;

    let mut stats = search.stats;
    stats.wall_time_ms = started.elapsed().as_millis() as u64;
    let aborted = search.aborted;
    let best = match search.best {
        Some((_, groups)) => Some(p.solution(Clustering::new(groups, cp.n)?, !aborted, stats)?),
        None => None,
    };
    Ok(match (aborted, best) {
        (true, best_so_far) => ExactOutcome::Aborted { best_so_far },
        (false, Some(s)) => ExactOutcome::Solved(s),
        (false, None) => ExactOutcome::Infeasible,
    })
}
