//! Greedy heuristic: agglomerative grouping, then local constraint repair.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

use super::compiled::{Compiled, GroupStats, Totals, Violation};
use super::{Clustering, Problem, Solution, SolverStats};

#[derive(Debug, Clone)]
pub enum GreedyOutcome {
    Solved(Solution),
    /// The heuristic gave up. This is not a proof of infeasibility.
    Unknown {
        reason: String,
        stats: SolverStats,
    },
}

#[derive(Debug, Clone)]
enum Move {
    Swap {
        a: usize,
        ra: usize,
        b: usize,
        rb: usize,
    },
    Merge {
        a: usize,
        b: usize,
    },
    Split {
        g: usize,
        part: Vec<usize>,
    },
}

type Score = (usize, u64, u64, u64);

fn score(v: Violation, totals: &Totals) -> Score {
    (v.failing, v.distance, v.impurity, totals.loss)
}

struct State<'a, 'p> {
    cp: &'a Compiled<'p>,
    groups: Vec<Vec<usize>>,
    stats: Vec<GroupStats>,
    totals: Totals,
}

impl State<'_, '_> {
    fn with_replaced(&self, removed: &[usize], added: &[&GroupStats]) -> Totals {
        let mut t = self.totals.clone();
        for &g in removed {
            t.sub(&self.stats[g]);
        }
        for g in added {
            t.add(g);
        }
        t
    }

    /// Phase 1: groups of identical QI projection, then cheapest merges until
    /// every group has at least k rows.
    fn agglomerate(cp: &Compiled) -> Option<Vec<Vec<usize>>> {
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for r in 0..cp.n {
            let key: Vec<u32> = (0..cp.qi_len()).map(|q| cp.qi_code(r, q)).collect();
            let next = groups.len();
            let g = *index.entry(key).or_insert(next);
            if g == next {
                groups.push(Vec::new());
            }
            groups[g].push(r);
        }
        let mut stats: Vec<GroupStats> = groups.iter().map(|g| cp.group_stats(g)).collect();
        while groups.iter().any(|g| g.len() < cp.k) {
            if groups.len() < 2 {
                return None;
            }
            let mut best: Option<(i64, usize, usize, GroupStats)> = None;
            for i in 0..groups.len() {
                if groups[i].len() >= cp.k {
                    continue;
                }
                for j in 0..groups.len() {
                    if i == j {
                        continue;
                    }
                    let merged: Vec<usize> = groups[i].iter().chain(&groups[j]).copied().collect();
                    let ms = cp.group_stats(&merged);
                    let delta =
                        ms.stars() as i64 - stats[i].stars() as i64 - stats[j].stars() as i64;
                    if best.as_ref().is_none_or(|(d, ..)| delta < *d) {
                        best = Some((delta, i, j, ms));
                    }
                }
            }
            let (_, i, j, ms) = best?;
            let moved = std::mem::take(&mut groups[j]);
            groups[i].extend(moved);
            stats[i] = ms;
            groups.remove(j);
            stats.remove(j);
        }
        Some(groups)
    }

    fn candidates(&self) -> Vec<(Move, Vec<usize>, Vec<GroupStats>)> {
        let cp = self.cp;
        let k = cp.k;
        let mut out = Vec::new();
        let n = self.groups.len();
        for a in 0..n {
            for b in a + 1..n {
                for (ra, _) in self.groups[a].iter().enumerate() {
                    for (rb, _) in self.groups[b].iter().enumerate() {
                        let mut ga = self.groups[a].clone();
                        let mut gb = self.groups[b].clone();
                        std::mem::swap(&mut ga[ra], &mut gb[rb]);
                        out.push((
                            Move::Swap { a, ra, b, rb },
                            vec![a, b],
                            vec![cp.group_stats(&ga), cp.group_stats(&gb)],
                        ));
                    }
                }
                let merged: Vec<usize> = self.groups[a]
                    .iter()
                    .chain(&self.groups[b])
                    .copied()
                    .collect();
                out.push((
                    Move::Merge { a, b },
                    vec![a, b],
                    vec![cp.group_stats(&merged)],
                ));
            }
        }
        let split_cols = cp.split_columns();
        for (g, rows) in self.groups.iter().enumerate() {
            if rows.len() < 2 * k {
                continue;
            }
            let mut parts: Vec<Vec<usize>> = vec![rows[..rows.len() / 2].to_vec()];
            for &col in &split_cols {
                let mut seen = Vec::new();
                for &r in rows {
                    let code = cp.code(r, col);
                    if !seen.contains(&code) {
                        seen.push(code);
                    }
                }
                for code in seen {
                    parts.push(
                        rows.iter()
                            .copied()
                            .filter(|&r| cp.code(r, col) == code)
                            .collect(),
                    );
                }
            }
            let mut tried: Vec<Vec<usize>> = Vec::new();
            for part in parts {
                if part.len() < k || rows.len() - part.len() < k || tried.contains(&part) {
                    continue;
                }
                let rest: Vec<usize> = rows.iter().copied().filter(|r| !part.contains(r)).collect();
                let stats = vec![cp.group_stats(&part), cp.group_stats(&rest)];
                tried.push(part.clone());
                out.push((Move::Split { g, part }, vec![g], stats));
            }
        }
        out
    }

    fn apply(&mut self, mv: Move, new_stats: Vec<GroupStats>) {
        match mv {
            Move::Swap { a, ra, b, rb } => {
                let tmp = self.groups[a][ra];
                self.groups[a][ra] = self.groups[b][rb];
                self.groups[b][rb] = tmp;
                self.totals.sub(&self.stats[a]);
                self.totals.sub(&self.stats[b]);
                let mut it = new_stats.into_iter();
                self.stats[a] = it.next().expect("two stats");
                self.stats[b] = it.next().expect("two stats");
                self.totals.add(&self.stats[a]);
                self.totals.add(&self.stats[b]);
            }
            Move::Merge { a, b } => {
                self.totals.sub(&self.stats[a]);
                self.totals.sub(&self.stats[b]);
                let moved = self.groups.remove(b);
                self.stats.remove(b);
                self.groups[a].extend(moved);
                self.stats[a] = new_stats.into_iter().next().expect("one stat");
                self.totals.add(&self.stats[a]);
            }
            Move::Split { g, part } => {
                self.totals.sub(&self.stats[g]);
                let rest: Vec<usize> = self.groups[g]
                    .iter()
                    .copied()
                    .filter(|r| !part.contains(r))
                    .collect();
                let mut it = new_stats.into_iter();
                self.groups[g] = part;
                self.stats[g] = it.next().expect("two stats");
                self.totals.add(&self.stats[g]);
                self.groups.push(rest);
                self.stats.push(it.next().expect("two stats"));
                self.totals.add(self.stats.last().expect("just pushed"));
            }
        }
    }
}

/// Phase 1 groups rows by QI projection and merges the cheapest pairs until
/// every group has `k` rows. Phase 2, while a constraint fails, applies the
/// best swap, merge or split, ranked by (failing constraints, total distance
/// to the violated ranges, impurity of under-filled targets, stars). A move
/// must lower the first three, compared lexicographically. Ties are broken by an RNG
/// seeded from `limits.seed`. Returns a verified solution with `optimal = false`.
pub fn solve_greedy(p: &Problem) -> Result<GreedyOutcome> {
    let started = Instant::now();
    let mut run_stats = SolverStats::default();
    let unknown = |reason: &str, mut stats: SolverStats| {
        stats.wall_time_ms = started.elapsed().as_millis() as u64;
        Ok(GreedyOutcome::Unknown {
            reason: reason.to_string(),
            stats,
        })
    };
    if p.trivially_infeasible()? {
        return unknown(
            "a constraint needs more matching rows than the relation has",
            run_stats,
        );
    }
    let cp = Compiled::new(p)?;
    let Some(groups) = State::agglomerate(&cp) else {
        return unknown("fewer than k rows", run_stats);
    };
    let stats: Vec<GroupStats> = groups.iter().map(|g| cp.group_stats(g)).collect();
    let mut totals = Totals::empty(cp.qi_len(), cp.constraint_len());
    for s in &stats {
        totals.add(s);
    }
    let mut state = State {
        cp: &cp,
        groups,
        stats,
        totals,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(p.limits().seed);
    let mut current = score(cp.violation(&state.totals)?, &state.totals);
    while current.0 > 0 {
        if run_stats.repair_steps as usize >= p.limits().repair_budget {
            return unknown("repair budget exhausted", run_stats);
        }
        let mut best: Vec<(Move, Vec<GroupStats>)> = Vec::new();
        let mut best_score: Option<Score> = None;
        for (mv, removed, added) in state.candidates() {
            let t = state.with_replaced(&removed, &added.iter().collect::<Vec<_>>());
            let s = score(cp.violation(&t)?, &t);
            match best_score {
                Some(b) if s > b => {}
                Some(b) if s == b => best.push((mv, added)),
                _ => {
                    best_score = Some(s);
                    best = vec![(mv, added)];
                }
            }
        }
        match best_score {
            Some(s) if (s.0, s.1, s.2) < (current.0, current.1, current.2) => {
                let pick = rng.gen_range(0..best.len());
                let (mv, added) = best.swap_remove(pick);
                state.apply(mv, added);
                run_stats.repair_steps += 1;
                current = s;
            }
            _ => return unknown("repair stalled", run_stats),
        }
    }

    run_stats.wall_time_ms = started.elapsed().as_millis() as u64;
    let clustering = Clustering::new(state.groups, cp.n)?;
    Ok(GreedyOutcome::Solved(
        p.solution(clustering, false, run_stats)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymizer::{oracle_min_loss, Limits};
    use crate::constraint::parse_constraints;
    use crate::fixtures;
    use crate::relation::{QiSet, Relation};

    fn fixture_problem(sigma: &str, seed: u64) -> Problem {
        let r = fixtures::initial();
        let qi = QiSet::all(r.schema()).unwrap();
        Problem::new(
            r,
            3,
            qi,
            parse_constraints(sigma).unwrap(),
            Limits {
                seed,
                ..Limits::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn phase_one_only_when_unconstrained() {
        let p = fixture_problem("", 0);
        match solve_greedy(&p).unwrap() {
            GreedyOutcome::Solved(s) => {
                assert_eq!(s.stats.repair_steps, 0);
                assert!(s.clustering.min_group_size().unwrap() >= 3);
                assert!(!s.optimal);
                assert!(p.verify(&s).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repairs_towards_constraints() {
        let sigma = format!(
            "div: 3 <= count(ETH=\"Asian\") <= 6\n{}",
            fixtures::FAIRNESS_FEMALE
        );
        let p = fixture_problem(&sigma, 7);
        let oracle = oracle_min_loss(&p).unwrap().loss().unwrap();
        match solve_greedy(&p).unwrap() {
            GreedyOutcome::Solved(s) => {
                assert!(p.verify(&s).unwrap());
                assert!(s.loss >= oracle);
            }
            GreedyOutcome::Unknown { reason, .. } => panic!("{reason}"),
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let sigma = "div: 3 <= count(GEN=\"Female\")\ndiv: 3 <= count(ETH=\"White\") <= 3";
        let a = solve_greedy(&fixture_problem(sigma, 11)).unwrap();
        let b = solve_greedy(&fixture_problem(sigma, 11)).unwrap();
        match (a, b) {
            (GreedyOutcome::Solved(a), GreedyOutcome::Solved(b)) => {
                assert_eq!(a.clustering, b.clustering);
                assert_eq!(a.anonymized, b.anonymized);
            }
            (
                GreedyOutcome::Unknown { reason: a, .. },
                GreedyOutcome::Unknown { reason: b, .. },
            ) => {
                assert_eq!(a, b)
            }
            _ => panic!("runs disagree"),
        }
    }

    #[test]
    fn too_few_rows_is_unknown() {
        let r = Relation::from_strs(&["A"], &[&["a"], &["b"]], "*").unwrap();
        let qi = QiSet::all(r.schema()).unwrap();
        let p = Problem::new(r, 3, qi, vec![], Limits::default()).unwrap();
        assert!(matches!(
            solve_greedy(&p).unwrap(),
            GreedyOutcome::Unknown { .. }
        ));
    }
}
