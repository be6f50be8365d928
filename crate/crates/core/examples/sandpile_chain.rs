//! Sandpile chain from saturation: density trace, plateau time and the odometer identity.

use perclab::percolation::sample_cluster;
use perclab::sandpile::{odometer_consistent, plateau_time, run_chain, stabilize, trace_csv, SandpileState, TopplePolicy};

fn main() -> perclab::Result<()> {
    let g = sample_cluster(2, 12, 0.8, 2)?;
    let trace = run_chain(&g, 20_000, 1, 500)?;
    print!("{}", trace_csv(&trace[..6]));
    println!("plateau (2% band) from t = {:?}", plateau_time(&trace, 0.02));

    let mut s = SandpileState::saturated(&g)?;
    s.add_chip(0);
    let (fin, odo) = stabilize(&s, TopplePolicy::Random(9))?;
    println!("one avalanche: {} topplings, s' = s - L·odometer: {}", odo.iter().sum::<i64>(), odometer_consistent(&s, &fin, &odo));
    Ok(())
}
