//! Satisfiability of constraint sets: a witness count per target, or the
//! false constraint the set implies.

use divanon::constraint::parse_constraints;
use divanon::inference::{is_satisfiable, to_fixed, Satisfiability};

fn main() -> divanon::Result<()> {
    for text in [
        "div: 6 <= count(ETH=\"Cauc\", CTY=\"Calgary\") <= 8\ndiv: 1 <= count(CTY=\"Calgary\") <= 5",
        "div: 3 <= count(ETH=\"Cauc\", CTY=\"Calgary\") <= 8\ndiv: 1 <= count(CTY=\"Calgary\") <= 5",
    ] {
        let sigma = to_fixed(&parse_constraints(text)?)?;
        match is_satisfiable(&sigma) {
            Satisfiability::Satisfiable { witness } => {
                println!("satisfiable");
                for (t, n) in witness {
                    println!("  count({t}) = {n}");
                }
            }
            Satisfiability::Unsatisfiable { false_constraint } => {
                println!("unsatisfiable: implies {false_constraint}");
            }
        }
    }
    Ok(())
}
