//! Loading a relation, counting targets and checking k-anonymity.

use divanon::fixtures;
use divanon::relation::{refines, QiSet, TargetValue};

fn main() -> divanon::Result<()> {
    let r = fixtures::initial();
    let r2 = fixtures::r2();
    let females = TargetValue::single("GEN", "Female");
    let qi = QiSet::all(r.schema())?;

    println!("{} rows, schema {:?}", r.len(), r.schema());
    println!("count({females}) in R  = {}", r.count_target(&females)?);
    println!("count({females}) in R2 = {}", r2.count_target(&females)?);
    println!("stars in GEN of R2 = {}", r2.count_stars("GEN")?);
    println!("info loss of R2 = {}", r2.info_loss());
    println!("R2 refines R: {}", refines(&r, &r2));
    for k in 1..=4 {
        println!("R2 is {k}-anonymous: {}", r2.is_k_anonymous(&qi, k)?);
    }
    print!("{}", r2.to_csv_string("*")?);
    Ok(())
}
