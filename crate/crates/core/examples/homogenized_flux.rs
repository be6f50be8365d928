//! Estimate the homogenized coefficient from the flux of the corrected plane through the
//! left face of the box, for a few edge probabilities.

use perclab::harmonic::{corrected_plane, homogenized_flux};
use perclab::percolation::{derive_seed, sample_cluster};
use perclab::solver::SolveOptions;

fn main() -> perclab::Result<()> {
    let opts = SolveOptions::with_tolerance(1e-10);
    for p in [1.0, 0.9, 0.8, 0.7, 0.6] {
        let mut est = Vec::new();
        for i in 0..4 {
            let g = sample_cluster(2, 32, p, derive_seed(1, i))?;
            est.push(homogenized_flux(&corrected_plane(&g, &[1.0, 0.0], &opts)?)?.per_site);
        }
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        println!("p = {p:.1}: estimate {mean:.4} (effective-medium guess {:.1})", 2.0 * p - 1.0);
    }
    Ok(())
}
