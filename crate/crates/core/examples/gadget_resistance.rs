//! Effective resistance of the rigid gadget: exact solve, recurrence and the approach to 1+√3.

use perclab::gadget::{continued_fraction, decimal, distance_to_limit, gadget_table};

fn main() -> perclab::Result<()> {
    for row in gadget_table(10, 6)? {
        println!(
            "n = {:>2}  R = {:<14} ≈ {}  |R - (1+√3)| = {:.2e}",
            row.n,
            row.r.to_string(),
            decimal(&row.r, 12),
            distance_to_limit(&row.r, 200)
        );
    }
    let r = perclab::gadget::resistance_recurrence(6)?;
    println!("continued fraction of R_6: {:?}", continued_fraction(&r).iter().map(|x| x.to_string()).collect::<Vec<_>>());
    Ok(())
}
