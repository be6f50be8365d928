//! Sample bond percolation in a box, extract the largest cluster and check crossings.

use perclab::lattice::BoxRegion;
use perclab::percolation::sample_percolation;

fn main() -> perclab::Result<()> {
    let region = BoxRegion::new(2, 20)?;
    for p in [0.45, 0.55, 0.7, 0.9] {
        let s = sample_percolation(region, p, 7)?;
        let g = s.largest_cluster()?;
        println!(
            "p = {p:.2}: {} of {} edges open, largest cluster {} sites, crossing in each direction {:?}",
            s.open_count(),
            s.edge_count(),
            g.vertex_count(),
            s.crossing_directions(&region)?
        );
    }
    // a small sample round-trips through its text form
    let s = sample_percolation(BoxRegion::new(2, 2)?, 0.6, 1)?;
    print!("{}", s.to_text());
    Ok(())
}
