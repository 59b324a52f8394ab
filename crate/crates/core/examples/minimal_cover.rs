//! Removing constraints implied by the others.

use divanon::constraint::parse_constraints;
use divanon::inference::{minimal_cover, to_fixed};

const SIGMA: &str = r#"
div: 2 <= count(CTY="Calgary") <= 10
div: 4 <= count(GEN="Female", ETH="Cauc", CTY="Calgary") <= 7
div: 4 <= count(ETH="Cauc", CTY="Calgary") <= 10
div: 3 <= count(ETH="Asian") <= 6
div: 2 <= count(ETH="Asian") <= 8
"#;

fn main() -> divanon::Result<()> {
    let sigma = to_fixed(&parse_constraints(SIGMA)?)?;
    let cover = minimal_cover(&sigma)?;
    println!(
        "{} constraints, {} after removing redundant ones:",
        sigma.len(),
        cover.len()
    );
    for c in cover {
        println!("{}", c.to_constraint());
    }
    Ok(())
}
