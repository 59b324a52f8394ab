//! Integer-coded view of a [`Problem`] for the search loops. Statistics of
//! the anonymized relation are derived from per-group summaries without
//! materializing it.

use std::collections::HashMap;

use crate::constraint::EvalContext;
use crate::error::Result;
use crate::semantics::resolve_bounds;

use super::Problem;

pub(crate) struct Compiled<'p> {
    pub problem: &'p Problem,
    pub n: usize,
    pub k: usize,
    /// `codes[row][col]` over all schema columns.
    codes: Vec<Vec<u32>>,
    qi_cols: Vec<usize>,
    targets: Vec<CompiledTarget>,
    /// Per constraint: `(attribute, position in qi_cols)` for each `S(...)`;
    /// non-QI attributes never hold stars.
    star_refs: Vec<Vec<(String, Option<usize>)>>,
    initial_counts: Vec<u64>,
    /// Literal bounds of fixed-bound constraints, usable for pruning.
    pub fixed: Vec<Option<(u64, Option<u64>)>>,
}

struct CompiledTarget {
    /// `(column, code, position in qi_cols)`; `code = None` when the value
    /// never occurs in the column.
    pairs: Vec<(usize, Option<u32>, Option<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct GroupStats {
    pub size: usize,
    /// Per QI column: whether the group disagrees on it.
    pub suppressed: Vec<bool>,
    pub counts: Vec<u64>,
    /// Per constraint: `min(matching, non-matching)` rows by initial values.
    pub impurity: Vec<u64>,
}

impl GroupStats {
    pub fn stars(&self) -> u64 {
        (self.size * self.suppressed.iter().filter(|s| **s).count()) as u64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Totals {
    pub loss: u64,
    pub stars: Vec<u64>,
    pub counts: Vec<u64>,
    pub impurity: Vec<u64>,
}

impl Totals {
    pub fn empty(qi: usize, constraints: usize) -> Self {
        Self {
            loss: 0,
            stars: vec![0; qi],
            counts: vec![0; constraints],
            impurity: vec![0; constraints],
        }
    }

    pub fn add(&mut self, g: &GroupStats) {
        self.loss += g.stars();
        for (s, &sup) in self.stars.iter_mut().zip(&g.suppressed) {
            if sup {
                *s += g.size as u64;
            }
        }
        for (c, gc) in self.counts.iter_mut().zip(&g.counts) {
            *c += gc;
        }
        for (c, gc) in self.impurity.iter_mut().zip(&g.impurity) {
            *c += gc;
        }
    }

    pub fn sub(&mut self, g: &GroupStats) {
        self.loss -= g.stars();
        for (s, &sup) in self.stars.iter_mut().zip(&g.suppressed) {
            if sup {
                *s -= g.size as u64;
            }
        }
        for (c, gc) in self.counts.iter_mut().zip(&g.counts) {
            *c -= gc;
        }
        for (c, gc) in self.impurity.iter_mut().zip(&g.impurity) {
            *c -= gc;
        }
    }
}

/// Constraint status of a full clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Violation {
    pub failing: usize,
    /// Sum over failing constraints of the distance to their range.
    pub distance: u64,
    /// Impurity summed over constraints whose count is below the range.
    pub impurity: u64,
}

impl Violation {
    pub fn is_feasible(&self) -> bool {
        self.failing == 0
    }
}

impl<'p> Compiled<'p> {
    pub fn new(problem: &'p Problem) -> Result<Self> {
        let rel = problem.relation();
        let width = rel.schema().len();
        let mut dicts: Vec<HashMap<&str, u32>> = vec![HashMap::new(); width];
        let codes = rel
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(dicts.iter_mut())
                    .map(|(cell, dict)| {
                        let v = cell.as_value().unwrap_or_default();
                        let next = dict.len() as u32;
                        *dict.entry(v).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        let qi_cols = problem
            .qi()
            .iter()
            .map(|a| rel.column_index(a))
            .collect::<Result<Vec<_>>>()?;
        let qi_pos = |col: usize| qi_cols.iter().position(|&c| c == col);

        let mut targets = Vec::new();
        let mut star_refs = Vec::new();
        let mut initial_counts = Vec::new();
        let mut fixed = Vec::new();
        for c in problem.sigma() {
            let pairs = c
                .target()
                .iter()
                .map(|(a, v)| {
                    let col = rel.column_index(a)?;
                    Ok((col, dicts[col].get(v).copied(), qi_pos(col)))
                })
                .collect::<Result<Vec<_>>>()?;
            targets.push(CompiledTarget { pairs });
            star_refs.push(
                c.star_attributes()
                    .into_iter()
                    .map(|a| Ok((a.to_string(), qi_pos(rel.column_index(a)?))))
                    .collect::<Result<Vec<_>>>()?,
            );
            initial_counts.push(rel.count_target(c.target())? as u64);
            fixed.push(c.fixed_range().map(|r| (r.lo, r.hi)));
        }
        Ok(Self {
            problem,
            n: rel.len(),
            k: problem.k(),
            codes,
            qi_cols,
            targets,
            star_refs,
            initial_counts,
            fixed,
        })
    }

    pub fn qi_len(&self) -> usize {
        self.qi_cols.len()
    }

    pub fn constraint_len(&self) -> usize {
        self.targets.len()
    }

    pub fn qi_code(&self, row: usize, qi: usize) -> u32 {
        self.codes[row][self.qi_cols[qi]]
    }

    pub fn code(&self, row: usize, col: usize) -> u32 {
        self.codes[row][col]
    }

    /// Columns worth splitting on: QI columns and target columns.
    pub fn split_columns(&self) -> Vec<usize> {
        let mut cols = self.qi_cols.clone();
        for t in &self.targets {
            cols.extend(t.pairs.iter().map(|p| p.0));
        }
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    /// Whether `row` matches constraint `c`'s target in the initial relation.
    pub fn matches_initially(&self, row: usize, c: usize) -> bool {
        self.targets[c]
            .pairs
            .iter()
            .all(|&(col, code, _)| code == Some(self.codes[row][col]))
    }

    pub fn group_stats(&self, rows: &[usize]) -> GroupStats {
        let first = rows[0];
        let suppressed: Vec<bool> = self
            .qi_cols
            .iter()
            .map(|&col| {
                let v = self.codes[first][col];
                rows.iter().any(|&r| self.codes[r][col] != v)
            })
            .collect();
        let counts = self
            .targets
            .iter()
            .map(|t| {
                if t.pairs
                    .iter()
                    .any(|&(_, code, q)| code.is_none() || q.is_some_and(|q| suppressed[q]))
                {
                    return 0;
                }
                rows.iter()
                    .filter(|&&r| {
                        t.pairs
                            .iter()
                            .all(|&(col, code, _)| code == Some(self.codes[r][col]))
                    })
                    .count() as u64
            })
            .collect();
        let impurity = (0..self.targets.len())
            .map(|c| {
                let m = rows
                    .iter()
                    .filter(|&&r| self.matches_initially(r, c))
                    .count();
                m.min(rows.len() - m) as u64
            })
            .collect();
        GroupStats {
            size: rows.len(),
            suppressed,
            counts,
            impurity,
        }
    }

    /// Resolved `(lo, hi)` bounds of every constraint for the given totals.
    pub fn bounds(&self, totals: &Totals) -> Result<Vec<(u64, Option<u64>)>> {
        self.problem
            .sigma()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let ctx = EvalContext {
                    k: self.k as u64,
                    n_prime: self.n as u64,
                    stars: self.star_refs[i]
                        .iter()
                        .map(|(a, q)| (a.clone(), q.map_or(0, |q| totals.stars[q])))
                        .collect(),
                    initial_target_count: Some(self.initial_counts[i]),
                    n_initial: Some(self.n as u64),
                };
                resolve_bounds(c, &ctx)
            })
            .collect()
    }

    pub fn violation(&self, totals: &Totals) -> Result<Violation> {
        let mut v = Violation {
            failing: 0,
            distance: 0,
            impurity: 0,
        };
        let bounds = self.bounds(totals)?;
        for (i, ((lo, hi), &count)) in bounds.into_iter().zip(&totals.counts).enumerate() {
            let d = if count < lo {
                v.impurity += totals.impurity[i];
                lo - count
            } else {
                hi.map_or(0, |hi| count.saturating_sub(hi))
            };
            if d > 0 {
                v.failing += 1;
                v.distance += d;
            }
        }
        Ok(v)
    }
}
