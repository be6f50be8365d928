//! Potential of an integer pole function and its far-field comparison with the dipole law.

use perclab::harmonic::corrected_plane;
use perclab::lattice::site2;
use perclab::percolation::sample_cluster;
use perclab::potential::{fit_kappa, potential, two_scale_check, PoleFunction};
use perclab::solver::{laplacian_apply, SolveOptions};

fn main() -> perclab::Result<()> {
    let opts = SolveOptions::with_tolerance(1e-10);
    let g = sample_cluster(2, 64, 1.0, 0)?;
    let f = PoleFunction::dipole(site2(1, 0), site2(0, 0));
    let pot = potential(&g, &f, &opts)?;
    let lap = laplacian_apply(&pot.field);
    println!("Δu at the poles: {:.6} {:.6}", lap.at(site2(1, 0)).unwrap(), lap.at(site2(0, 0)).unwrap());

    let px = corrected_plane(&g, &[1.0, 0.0], &opts)?;
    let py = corrected_plane(&g, &[0.0, 1.0], &opts)?;
    let kappa = fit_kappa(&g, &opts)?;
    let t = two_scale_check(&pot, [&px, &py], [1.0, 0.0], &[4, 8, 16], kappa)?;
    print!("{}", t.to_csv());

    // exact mode on a small box gives integer Laplacian exactly
    let small = sample_cluster(2, 5, 0.8, 2)?;
    let c = small.site(small.vertex_count() / 2);
    let u = potential(&small, &PoleFunction::new(&[(c, 2), (small.site(0), -2)]), &SolveOptions::exact())?;
    println!("exact value at {:?}: {}", &c[..2], u.field.at_exact(c).unwrap());
    Ok(())
}
