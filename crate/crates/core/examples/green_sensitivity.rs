//! Remove edges from a cluster and compare the change of the corrected plane's gradient
//! with the combination of Green's function gradients that should produce it.

use perclab::harmonic::{edge_flip_sensitivity, removable_edges};
use perclab::lattice::site2;
use perclab::percolation::sample_cluster;
use perclab::solver::{green_function, SolveOptions};

fn main() -> perclab::Result<()> {
    let g = sample_cluster(2, 24, 0.85, 4)?;
    let opts = SolveOptions::with_tolerance(1e-12);

    let green = green_function(&g, site2(0, 0), &opts)?;
    println!("G(0,0) before the shift: {:.4}", green.pole_value());

    let edges = removable_edges(&g, 2, 6)?;
    for tol in [1e-8, 1e-10, 1e-12] {
        let rep = edge_flip_sensitivity(&g, &edges, &[1.0, 0.0], &SolveOptions::with_tolerance(tol))?;
        println!("tolerance {tol:e}: largest discrepancy {:.2e}", rep.max_abs_discrepancy);
    }
    Ok(())
}
