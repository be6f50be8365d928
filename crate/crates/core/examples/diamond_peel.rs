//! A compactly supported integer field is certified integer valued by peeling diamonds; a
//! half-integer perturbation is caught at the first vertex with non-integer Laplacian.

use std::sync::Arc;

use perclab::diamond::{diamond_peel, first_non_integer_laplacian};
use perclab::field::{q, qf, ScalarField};
use perclab::lattice::{l1, site2, BoxRegion};
use perclab::percolation::sample_percolation;

fn main() -> perclab::Result<()> {
    let g = Arc::new(sample_percolation(BoxRegion::new(2, 6)?, 1.0, 0)?.largest_cluster()?);
    let vals: Vec<_> = g.vertices().iter().map(|&x| q(if l1(x) <= 2 { (x[0] * 3 - x[1]) as i64 } else { 0 })).collect();
    let u = ScalarField::from_rational(&g, vals.clone())?;
    let v = diamond_peel(&u)?;
    println!("diamond {:?}, {} sites peeled, integer valued: {}", v.diamond, v.peeled, v.integer_valued);

    let mut bad = vals;
    bad[g.vertex_index(site2(1, 0)).unwrap()] += qf(1, 2);
    let w = ScalarField::from_rational(&g, bad)?;
    println!("first non-integer Laplacian at {:?}", first_non_integer_laplacian(&w)?);
    match diamond_peel(&w) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
