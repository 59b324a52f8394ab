//! Checking anonymized relations against diversity and fairness constraints.

use divanon::constraint::parse_constraints;
use divanon::fixtures;
use divanon::semantics::{all_satisfied, check_all};

fn main() -> divanon::Result<()> {
    let sigma = parse_constraints(&format!(
        "div: 3 <= count(ETH=\"Asian\") <= 6\n{}",
        fixtures::FAIRNESS_FEMALE
    ))?;
    let initial = fixtures::initial();
    for (name, rp) in [
        ("R1", fixtures::r1()),
        ("R2", fixtures::r2()),
        (
            "R2 with one more starred female",
            fixtures::r2_with_extra_female_star(),
        ),
    ] {
        let reports = check_all(&initial, &rp, &sigma, 3)?;
        println!(
            "{name}: {}",
            if all_satisfied(&reports) {
                "satisfied"
            } else {
                "violated"
            }
        );
        for r in reports {
            let hi = r.resolved_hi.map_or("inf".to_string(), |h| h.to_string());
            println!(
                "  {:<5} observed {} in [{}, {hi}]  {}",
                r.satisfied, r.observed_count, r.resolved_lo, r.constraint
            );
        }
    }
    Ok(())
}
