//! Vertex-disjoint paths from a central set to the box boundary, with a matching separator.

use perclab::flow::{boundary_targets, disjoint_paths, verify_certificate};
use perclab::lattice::sub;
use perclab::percolation::sample_cluster;

fn main() -> perclab::Result<()> {
    let g = sample_cluster(2, 12, 0.7, 5)?;
    let src: Vec<_> = g.vertices().iter().copied().filter(|x| sub(*x, [0; 3]).iter().all(|v| v.abs() <= 1)).collect();
    let tgt = boundary_targets(&g);
    let cert = disjoint_paths(&g, &src, &tgt)?;
    verify_certificate(&g, &src, &tgt, &cert)?;
    println!("{} sources, {} disjoint paths, separator of size {}", src.len(), cert.count, cert.separator.len());
    for p in &cert.paths {
        println!("  path of length {} ending at {:?}", p.len() - 1, &p[p.len() - 1][..2]);
    }
    Ok(())
}
