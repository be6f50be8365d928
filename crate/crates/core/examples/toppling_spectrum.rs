//! Toppling invariants (multiplicative harmonic functions) of a small cluster, the group
//! order against the spanning-tree count, and the resulting l2 mixing curve.

use perclab::percolation::sample_cluster;
use perclab::sandpile::{count_spanning_trees, l2_mixing_curve, spectrum_csv, toppling_invariants, CurveMode, DEFAULT_CAP};

fn main() -> perclab::Result<()> {
    let g = sample_cluster(2, 1, 0.8, 3)?;
    let dg = toppling_invariants(&g)?;
    println!(
        "{} vertices, invariant factors {:?}",
        g.vertex_count(),
        dg.invariant_factors.iter().map(|d| d.to_string()).collect::<Vec<_>>()
    );
    println!("group order {} and spanning trees {}", dg.order, count_spanning_trees(&g)?);
    let rep = l2_mixing_curve(&dg, &g, &[0, 1, 2, 4, 8, 16, 32], CurveMode::Exact, DEFAULT_CAP)?;
    for (t, v) in &rep.curve {
        println!("t = {t:>2}: {v:.6}");
    }
    print!("{}", spectrum_csv(&rep).lines().take(6).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
