//! Parsing the constraint language, printing it back and linting bounds.

use divanon::constraint::{lint, parse_constraints};

const SIGMA: &str = r#"
# diversity: between 3 and 6 Asian tuples
div:  3 <= count(ETH="Asian") <= 6
div:  ceil_k(0.3 * (N - S("CTY"))) <= count(CTY="Calgary")
fair: ceil_k((C / R0) * (N - S("GEN"))) <= count(GEN="Female")
div:  2 <= count(GEN="Male", ETH="White") <= 5
"#;

fn main() {
    let sigma = parse_constraints(SIGMA).expect("valid constraints");
    for c in &sigma {
        println!(
            "{:<5} fixed={:<5} {c}",
            c.kind().keyword(),
            c.is_fixed_bound()
        );
    }
    for w in lint(&sigma, 3) {
        println!("warning: {w}");
    }

    let broken = "div: 3 <= count(ETH=\"Asian\")\ndiv: 3 count(ETH=\"White\")";
    match parse_constraints(broken) {
        Ok(_) => unreachable!(),
        Err(e) => println!("error: {e}"),
    }
}
