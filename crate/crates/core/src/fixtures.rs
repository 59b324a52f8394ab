//! Small reference relations used by the examples and tests.
//!
//! `initial()` is a 9-row relation with 4 females and 4 Asians. `r2()` is
//! its 3-anonymization by the clustering `{0,1,2} {3..8}`: 3 revealed
//! Asian females and 6 suppressed genders. `r1()` uses the clustering
//! `{4,5,6} {0,1,2,3,7,8}`: 6 suppressed genders, no Asians and no
//! revealed females.

use crate::relation::Relation;

pub const SCHEMA: [&str; 3] = ["GEN", "ETH", "CTY"];

/// Lower bound: the share of revealed genders that are female is at least
/// the female share of the initial relation, rounded up to a multiple of k.
pub const FAIRNESS_FEMALE: &str =
    r#"fair: ceil_k((C / R0) * (N - S("GEN"))) <= count(GEN="Female")"#;

pub const INITIAL_CSV: &str = "\
GEN,ETH,CTY
Female,Asian,Calgary
Female,Asian,Calgary
Female,Asian,Edmonton
Female,White,Calgary
Male,White,Calgary
Male,White,Edmonton
Male,Black,Edmonton
Male,Black,Calgary
Male,Asian,Edmonton
";

pub fn initial() -> Relation {
    Relation::from_csv_str(INITIAL_CSV, "*").expect("fixture")
}

pub fn r1() -> Relation {
    Relation::from_strs(
        &SCHEMA,
        &[
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["Male", "*", "*"],
            &["Male", "*", "*"],
            &["Male", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
        ],
        "*",
    )
    .expect("fixture")
}

pub fn r2() -> Relation {
    Relation::from_strs(
        &SCHEMA,
        &[
            &["Female", "Asian", "*"],
            &["Female", "Asian", "*"],
            &["Female", "Asian", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
        ],
        "*",
    )
    .expect("fixture")
}

/// `r2()` with one more female gender cell suppressed (7 stars in GEN).
pub fn r2_with_extra_female_star() -> Relation {
    Relation::from_strs(
        &SCHEMA,
        &[
            &["Female", "Asian", "*"],
            &["Female", "Asian", "*"],
            &["*", "Asian", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
            &["*", "*", "*"],
        ],
        "*",
    )
    .expect("fixture")
}
