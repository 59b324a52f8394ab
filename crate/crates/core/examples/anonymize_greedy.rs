//! Heuristic anonymization for relations too large for exact search.

use divanon::anonymizer::{solve_greedy, GreedyOutcome, Limits, Problem};
use divanon::constraint::parse_constraints;
use divanon::relation::{Cell, QiSet, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> divanon::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gen = ["Female", "Male"];
    let eth = ["Asian", "White", "Black"];
    let cty = ["Calgary", "Edmonton", "Red Deer"];
    let rows = (0..60)
        .map(|_| {
            vec![
                Cell::value(gen[rng.gen_range(0..2)]),
                Cell::value(eth[rng.gen_range(0..3)]),
                Cell::value(cty[rng.gen_range(0..3)]),
            ]
        })
        .collect();
    let r = Relation::new(vec!["GEN".into(), "ETH".into(), "CTY".into()], rows)?;
    let sigma = parse_constraints(
        "div: 6 <= count(ETH=\"Black\")\n\
         fair: floor_k((C / R0) * (N - S(\"GEN\"))) <= count(GEN=\"Female\")",
    )?;
    let qi = QiSet::all(r.schema())?;
    let limits = Limits {
        seed: 7,
        ..Limits::default()
    };
    let p = Problem::new(r, 3, qi, sigma, limits)?;

    match solve_greedy(&p)? {
        GreedyOutcome::Solved(s) => {
            println!(
                "loss {} over {} groups, verified: {}",
                s.loss,
                s.clustering.groups().len(),
                p.verify(&s)?
            );
            for rep in &s.constraint_reports {
                println!(
                    "  observed {} >= {}  {}",
                    rep.observed_count, rep.resolved_lo, rep.constraint
                );
            }
        }
        GreedyOutcome::Unknown { reason, stats } => {
            println!(
                "no solution found: {reason} after {} repair steps",
                stats.repair_steps
            )
        }
    }
    Ok(())
}
