//! Oscillation of the corrector χ = ℓ − x₁ on balls of growing radius.

use perclab::harmonic::{corrected_plane, corrector_stats};
use perclab::percolation::sample_cluster;
use perclab::solver::SolveOptions;

fn main() -> perclab::Result<()> {
    let g = sample_cluster(2, 48, 0.8, 11)?;
    let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::with_tolerance(1e-10))?;
    let stats = corrector_stats(&plane, &[4, 8, 16, 24])?;
    for ((r, osc), grad) in stats.radii.iter().zip(&stats.osc).zip(&stats.max_grad) {
        println!("r = {r:>2}  osc = {osc:7.3}  osc/r = {:.3}  max |∇χ| = {grad:.3}", osc / *r as f64);
    }
    Ok(())
}
