//! Draw a cluster by its harmonic embedding (the corrected planes in both directions) and
//! overlay the drawing after closing one edge near the centre.
//!
//! `cargo run --example harmonic_embedding -- out.svg`

use perclab::harmonic::{embedding_flip, embedding_svg, removable_edges};
use perclab::lattice::BoxRegion;
use perclab::percolation::sample_percolation;
use perclab::solver::SolveOptions;

fn main() -> perclab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("embedding.svg").display().to_string());
    let s = sample_percolation(BoxRegion::new(2, 16)?, 0.75, 3)?;
    let g = s.largest_cluster()?;
    let e = removable_edges(&g, 1, 5)?[0];
    let (before, after, rep) = embedding_flip(&s, e, &SolveOptions::with_tolerance(1e-12))?;
    for (r, m) in &rep.annulus_medians {
        println!("annulus from {r:>2}: median displacement {m:.2e}");
    }
    std::fs::write(&path, embedding_svg(&before, Some(&after)))?;
    println!("wrote {path}");
    Ok(())
}
