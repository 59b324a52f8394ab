use std::time::Instant;

use crate::error::{Error, Result};

use super::{Clustering, Problem, Solution, SolverStats};

#[derive(Debug, Clone)]
pub enum OracleOutcome {
    Solved(Solution),
    Infeasible,
}

impl OracleOutcome {
    pub fn loss(&self) -> Option<usize> {
        match self {
            OracleOutcome::Solved(s) => Some(s.loss),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// Calls `f` with every partition of `0..n` whose blocks all have at least
/// `min_size` elements, as block-membership lists.
pub(crate) fn for_each_partition(n: usize, min_size: usize, mut f: impl FnMut(&[Vec<usize>])) {
    fn rec(
        i: usize,
        n: usize,
        min_size: usize,
        blocks: &mut Vec<Vec<usize>>,
        f: &mut dyn FnMut(&[Vec<usize>]),
    ) {
        let deficit: usize = blocks
            .iter()
            .map(|b| min_size.saturating_sub(b.len()))
            .sum();
        if deficit > n - i {
            return;
        }
        if i == n {
            f(blocks);
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, n, min_size, blocks, f);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, n, min_size, blocks, f);
        blocks.pop();
    }
    rec(0, n, min_size.max(1), &mut Vec::new(), &mut f);
}

/// Exhaustive search over every clustering with groups of size `>= k`,
/// evaluated by materializing each anonymized relation. Among optimal
/// clusterings the lexicographically smallest canonical one is returned.
pub fn oracle_min_loss(p: &Problem) -> Result<OracleOutcome> {
    let n = p.relation().len();
    let cap = p.limits().oracle_cap;
    if n > cap {
        return Err(Error::OracleCap { rows: n, cap });
    }
    let started = Instant::now();
    let mut stats = SolverStats::default();
    let mut best: Option<(usize, Clustering)> = None;
    let mut failure = None;
    for_each_partition(n, p.k(), |blocks| {
        if failure.is_some() {
            return;
        }
        stats.leaves_evaluated += 1;
        let clustering = match Clustering::new(blocks.to_vec(), n) {
            Ok(c) => c,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        match p.evaluate(&clustering) {
            Ok(c) if c.feasible => {
                let better = match &best {
                    None => true,
                    Some((loss, cl)) => (c.loss, &clustering) < (*loss, cl),
                };
                if better {
                    best = Some((c.loss, clustering));
                }
            }
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    stats.wall_time_ms = started.elapsed().as_millis() as u64;
    match best {
        Some((_, clustering)) => Ok(OracleOutcome::Solved(p.solution(clustering, true, stats)?)),
        None => Ok(OracleOutcome::Infeasible),
    }
}

/// Whether any (k, Σ)-anonymization exists.
pub fn decide(p: &Problem) -> Result<bool> {
    Ok(matches!(oracle_min_loss(p)?, OracleOutcome::Solved(_)))
}
