//! Deciding implication between fixed-bound constraints, with the derivation.

use divanon::constraint::{parse_constraint, parse_constraints};
use divanon::inference::{implies, to_fixed, FixedConstraint};

fn main() -> divanon::Result<()> {
    let sigma = to_fixed(&parse_constraints(
        "div: 2 <= count(CTY=\"Calgary\") <= 10\n\
         div: 4 <= count(GEN=\"Female\", ETH=\"Cauc\", CTY=\"Calgary\") <= 7",
    )?)?;
    for q in [
        "div: 5 <= count(ETH=\"Cauc\", CTY=\"Calgary\") <= 8",
        "div: 4 <= count(ETH=\"Cauc\", CTY=\"Calgary\") <= 10",
        "div: 1 <= count(GEN=\"Female\")",
    ] {
        let query = FixedConstraint::try_from(&parse_constraint(q)?)?;
        let out = implies(&sigma, &query);
        println!(
            "{query}: implied={} derived={}",
            out.implied, out.derived_range
        );
        for step in &out.trace {
            println!(
                "    {:?} from {} gives {}, now {}",
                step.axiom, step.source, step.contributed, step.narrowed_to
            );
        }
    }
    Ok(())
}
