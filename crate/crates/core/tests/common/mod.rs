//! Independent oracles and random generators shared by the integration tests.
//! Nothing here calls the library's counting or inference code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use divanon::anonymizer::{Limits, Problem, Solution};
use divanon::constraint::{parse_constraints, FrequencyRange};
use divanon::inference::FixedConstraint;
use divanon::relation::{Cell, QiSet, Relation, TargetValue};

pub const ATTRS: [&str; 3] = ["A", "B", "C"];

pub type Pairs = BTreeMap<String, String>;

pub fn pairs(t: &TargetValue) -> Pairs {
    t.iter()
        .map(|(a, v)| (a.to_string(), v.to_string()))
        .collect()
}

pub fn target(p: &Pairs) -> TargetValue {
    TargetValue::new(p.iter().map(|(a, v)| (a.as_str(), v.as_str()))).unwrap()
}

/// Rows of `r` whose concrete values match every pair of `t`.
pub fn brute_count(r: &Relation, t: &Pairs) -> u64 {
    let cols: Vec<(usize, &String)> = t
        .iter()
        .map(|(a, v)| (r.schema().iter().position(|s| s == a).unwrap(), v))
        .collect();
    r.rows()
        .iter()
        .filter(|row| {
            cols.iter()
                .all(|(c, v)| matches!(&row[*c], Cell::Value(x) if x == *v))
        })
        .count() as u64
}

pub fn in_range(count: u64, lo: u64, hi: Option<u64>) -> bool {
    lo <= count && hi.is_none_or(|h| count <= h)
}

pub fn brute_satisfies(r: &Relation, c: &FixedConstraint) -> bool {
    in_range(brute_count(r, &pairs(&c.target)), c.range.lo, c.range.hi)
}

/// Relation over `attrs` with `rows` rows and values `"0".."values-1"`.
pub fn random_relation(rng: &mut impl Rng, attrs: &[&str], rows: usize, values: usize) -> Relation {
    let data: Vec<Vec<Cell>> = (0..rows)
        .map(|_| {
            attrs
                .iter()
                .map(|_| Cell::value(rng.gen_range(0..values).to_string()))
                .collect()
        })
        .collect();
    Relation::new(attrs.iter().map(|a| a.to_string()).collect(), data).unwrap()
}

pub fn random_pairs(rng: &mut impl Rng, values: usize) -> Pairs {
    loop {
        let mut p = Pairs::new();
        for a in ATTRS {
            if rng.gen_bool(0.45) {
                p.insert(a.to_string(), rng.gen_range(0..values).to_string());
            }
        }
        if !p.is_empty() {
            return p;
        }
    }
}

/// A target that is a subset or superset of `base` when possible.
pub fn related_pairs(rng: &mut impl Rng, base: &Pairs, values: usize) -> Pairs {
    let mut p = base.clone();
    if rng.gen_bool(0.5) && p.len() > 1 {
        let drop = p.keys().nth(rng.gen_range(0..p.len())).unwrap().clone();
        p.remove(&drop);
    } else if let Some(a) = ATTRS.iter().find(|a| !p.contains_key(**a)) {
        p.insert(a.to_string(), rng.gen_range(0..values).to_string());
    }
    p
}

pub fn random_range(rng: &mut impl Rng, max: u64) -> FrequencyRange {
    let lo = rng.gen_range(0..=max);
    let hi = if rng.gen_bool(0.2) {
        None
    } else {
        Some(lo + rng.gen_range(0..=max))
    };
    FrequencyRange::new(lo, hi)
}

pub fn random_sigma(
    rng: &mut impl Rng,
    len: usize,
    values: usize,
    max: u64,
) -> Vec<FixedConstraint> {
    let mut sigma: Vec<FixedConstraint> = Vec::with_capacity(len);
    for _ in 0..len {
        let p = match sigma.choose(rng) {
            Some(prev) if rng.gen_bool(0.6) => related_pairs(rng, &pairs(&prev.target), values),
            _ => random_pairs(rng, values),
        };
        sigma.push(FixedConstraint::new(target(&p), random_range(rng, max)));
    }
    sigma
}

/// Tightest range for `tv` reachable by closing `sigma` under the four axioms
/// over every consistent target built from the pairs in play, iterated to a
/// fixpoint. Returned as `(lo, hi)`.
pub fn closure_range(sigma: &[FixedConstraint], tv: &TargetValue) -> (u64, Option<u64>) {
    let mut pool: BTreeSet<(String, String)> = pairs(tv).into_iter().collect();
    for s in sigma {
        pool.extend(pairs(&s.target));
    }
    let pool: Vec<_> = pool.into_iter().collect();
    let mut universe: Vec<Pairs> = Vec::new();
    for mask in 1u32..(1 << pool.len()) {
        let mut p = Pairs::new();
        let mut ok = true;
        for (i, (a, v)) in pool.iter().enumerate() {
            if mask & (1 << i) != 0 && p.insert(a.clone(), v.clone()).is_some() {
                ok = false;
                break;
            }
        }
        if ok {
            universe.push(p);
        }
    }

    let mut known: BTreeMap<Pairs, (u64, Option<u64>)> =
        universe.iter().map(|p| (p.clone(), (0, None))).collect();
    let meet = |a: Option<u64>, b: Option<u64>| match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    // Axioms 1 and 4: same target, intersect
    for s in sigma {
        let e = known.get_mut(&pairs(&s.target)).unwrap();
        *e = (e.0.max(s.range.lo), meet(e.1, s.range.hi));
    }
    let strict_subset =
        |x: &Pairs, y: &Pairs| x.len() < y.len() && x.iter().all(|(a, v)| y.get(a) == Some(v));
    loop {
        let mut changed = false;
        for x in &universe {
            for y in &universe {
                if !strict_subset(x, y) {
                    continue;
                }
                let (xr, yr) = (known[x], known[y]);
                // Axiom 2: upper bound extends to the superset target
                let y_new = (yr.0, meet(yr.1, xr.1));
                // Axiom 3: lower bound reduces to the subset target
                let x_new = (xr.0.max(yr.0), xr.1);
                if y_new != yr {
                    known.insert(y.clone(), y_new);
                    changed = true;
                }
                if x_new != xr {
                    known.insert(x.clone(), x_new);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    known[&pairs(tv)]
}

/// Random anonymization instance: up to `max_rows` rows over `ATTRS`, up to
/// three constraints mixing fixed, variable and fairness bounds. Fixed lower
/// bounds are multiples of `k`.
pub fn random_problem(rng: &mut impl Rng, max_rows: usize) -> Problem {
    let k = rng.gen_range(2..=3usize);
    let rows = rng.gen_range(2..=max_rows);
    let values = rng.gen_range(1..=3);
    let r = random_relation(rng, &ATTRS, rows, values);
    let qi: Vec<&str> = loop {
        let q: Vec<&str> = ATTRS
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        if !q.is_empty() {
            break q;
        }
    };
    let mut lines = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let p = random_pairs(rng, values);
        let tgt = p
            .iter()
            .map(|(a, v)| format!("{a}=\"{v}\""))
            .collect::<Vec<_>>()
            .join(", ");
        let attr = ATTRS.choose(rng).unwrap();
        let line = match rng.gen_range(0..5) {
            0 => format!("div: {} <= count({tgt})", k * rng.gen_range(1..=2)),
            1 => format!("div: count({tgt}) <= {}", rng.gen_range(0..=4)),
            2 => {
                let lo = k * rng.gen_range(1..=2);
                format!("div: {lo} <= count({tgt}) <= {}", lo + rng.gen_range(0..=3))
            }
            3 => format!("div: ceil_k(0.3 * (N - S(\"{attr}\"))) <= count({tgt})"),
            _ => format!("fair: ceil_k((C / R0) * (N - S(\"{attr}\"))) <= count({tgt})"),
        };
        lines.push(line);
    }
    let sigma = parse_constraints(&lines.join("\n")).unwrap();
    let qi = QiSet::new(qi, r.schema()).unwrap();
    Problem::new(r, k, qi, sigma, Limits::default()).unwrap()
}

/// Structural checks on a solution, computed from scratch: suppression-only
/// refinement, k-anonymity on the QI projection and the star count.
pub fn independently_valid(p: &Problem, s: &Solution) -> bool {
    let r = p.relation();
    let out = &s.anonymized;
    if out.schema() != r.schema() || out.rows().len() != r.rows().len() {
        return false;
    }
    let qi_cols: Vec<usize> = p
        .qi()
        .iter()
        .map(|a| r.schema().iter().position(|s| s == a).unwrap())
        .collect();
    let mut stars = 0;
    for (orig, anon) in r.rows().iter().zip(out.rows()) {
        for (c, (o, a)) in orig.iter().zip(anon).enumerate() {
            match a {
                Cell::Star if qi_cols.contains(&c) => stars += 1,
                Cell::Star => return false,
                v if v != o => return false,
                _ => {}
            }
        }
    }
    let mut classes: BTreeMap<Vec<&Cell>, usize> = BTreeMap::new();
    for row in out.rows() {
        *classes
            .entry(qi_cols.iter().map(|&c| &row[c]).collect())
            .or_default() += 1;
    }
    stars == s.loss && classes.values().all(|&n| n >= p.k())
}
