//! Minimum-loss anonymization by branch and bound, cross-checked against
//! exhaustive search.

use divanon::anonymizer::{oracle_min_loss, solve_exact, ExactOutcome, Limits, Problem};
use divanon::constraint::parse_constraints;
use divanon::fixtures;
use divanon::relation::QiSet;

fn main() -> divanon::Result<()> {
    let r = fixtures::initial();
    let qi = QiSet::all(r.schema())?;
    let sigma = parse_constraints(&format!(
        "div: 3 <= count(ETH=\"Asian\") <= 6\n{}",
        fixtures::FAIRNESS_FEMALE
    ))?;
    let p = Problem::new(r, 3, qi, sigma, Limits::default())?;

    match solve_exact(&p)? {
        ExactOutcome::Solved(s) => {
            println!("loss {} with groups {}", s.loss, s.clustering);
            println!("stats {:?}", s.stats);
            print!("{}", s.anonymized.to_csv_string("*")?);
        }
        ExactOutcome::Infeasible => println!("infeasible"),
        ExactOutcome::Aborted { .. } => println!("aborted"),
    }
    println!(
        "exhaustive search agrees: loss {:?}",
        oracle_min_loss(&p)?.loss()
    );
    Ok(())
}
