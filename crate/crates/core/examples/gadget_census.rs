//! Plant a slow-mixing square in the full lattice, read off its exact eigenvalue, then count
//! such squares in percolation samples.

use std::sync::Arc;

use perclab::lattice::{site2, BoxRegion};
use perclab::percolation::{sample_cluster, sample_percolation};
use perclab::sandpile::{plant_gadget, slow_mixing_gadget_census, Diagonal};

fn main() -> perclab::Result<()> {
    let full = sample_percolation(BoxRegion::new(2, 6)?, 1.0, 0)?;
    let g = Arc::new(plant_gadget(&full, site2(0, 0), Diagonal::Anti)?.largest_cluster()?);
    let c = slow_mixing_gadget_census(&g)?;
    println!("planted: m = {}, eigenvalue {}", g.vertex_count(), c.eigenvalue.map_or("none".into(), |e| e.to_string()));

    for n in [20, 40] {
        let g = sample_cluster(2, n, 0.75, 1)?;
        let c = slow_mixing_gadget_census(&g)?;
        println!("n = {n}: {} sites, {} gadgets", g.vertex_count(), c.multiplicity());
    }
    Ok(())
}
