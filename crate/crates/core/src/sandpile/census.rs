//! Unit squares whose diagonal corners have degree two. Such a square carries the toppling
//! invariant equal to 1/2 at those two corners and 0 elsewhere, so its eigenvalue stays
//! within O(1/m) of one.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::algebra::Frequency;
use super::spectrum::eigenvalue_exact;
use crate::error::{param, Result};
use crate::field::Q;
use crate::graph::ClusterGraph;
use crate::lattice::{add, site2, Edge, Site};
use crate::percolation::PercolationSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Diagonal {
    /// Degree-two corners at `c` and `c + (1,1)`.
    Main,
    /// Degree-two corners at `c + (1,0)` and `c + (0,1)`.
    Anti,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GadgetOccurrence {
    pub corner: Site,
    pub diagonal: Diagonal,
}

impl GadgetOccurrence {
    pub fn square(&self) -> [Site; 4] {
        let c = self.corner;
        [c, add(c, site2(1, 0)), add(c, site2(1, 1)), add(c, site2(0, 1))]
    }

    /// The two degree-two corners.
    pub fn poles(&self) -> (Site, Site) {
        let s = self.square();
        match self.diagonal {
            Diagonal::Main => (s[0], s[2]),
            Diagonal::Anti => (s[1], s[3]),
        }
    }

    fn others(&self) -> (Site, Site) {
        let s = self.square();
        match self.diagonal {
            Diagonal::Main => (s[1], s[3]),
            Diagonal::Anti => (s[0], s[2]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Census {
    pub m: usize,
    pub occurrences: Vec<GadgetOccurrence>,
    /// Exact eigenvalue of the gadget frequency (the same for every occurrence).
    pub eigenvalue: Option<Q>,
}

impl Census {
    pub fn multiplicity(&self) -> usize {
        self.occurrences.len()
    }
}

/// The frequency with value 1/2 at the occurrence's poles, if it is a toppling invariant
/// of `g`.
pub fn gadget_frequency(g: &ClusterGraph, occ: &GadgetOccurrence) -> Result<Option<Frequency>> {
    let (v, w) = occ.poles();
    let (Some(i), Some(j)) = (g.vertex_index(v), g.vertex_index(w)) else {
        return Ok(None);
    };
    let mut num = vec![BigInt::zero(); g.vertex_count()];
    num[i] = 1.into();
    num[j] = 1.into();
    let xi = Frequency::new(num, 2.into())?;
    Ok(xi.is_toppling_invariant(g).then_some(xi))
}

pub fn slow_mixing_gadget_census(g: &ClusterGraph) -> Result<Census> {
    if g.d != 2 {
        return param("the gadget census is planar");
    }
    let mut occurrences = Vec::new();
    let deg = |x: Site| g.vertex_index(x).map(|i| g.full_degree(i));
    for &c in g.vertices() {
        let occ = GadgetOccurrence { corner: c, diagonal: Diagonal::Main };
        let s = occ.square();
        let square_open = (0..4).all(|k| g.edge_between_sites(s[k], s[(k + 1) % 4]).is_some());
        if !square_open {
            continue;
        }
        for diagonal in [Diagonal::Main, Diagonal::Anti] {
            let occ = GadgetOccurrence { corner: c, diagonal };
            let (v, w) = occ.poles();
            if deg(v) == Some(2) && deg(w) == Some(2) {
                occurrences.push(occ);
            }
        }
    }
    let mut eigenvalue = None;
    for occ in &occurrences {
        let xi = gadget_frequency(g, occ)?
            .ok_or_else(|| crate::error::LabError::Internal(format!("gadget at {:?} is not invariant", occ.corner)))?;
        let (re, im) = eigenvalue_exact(&xi).expect("half-integer phases");
        debug_assert!(im.is_zero());
        eigenvalue = Some(re);
    }
    Ok(Census { m: g.vertex_count(), occurrences, eigenvalue })
}

/// Opens the square and the outward edges of its two other corners, and closes the
/// outward edges of the poles.
pub fn plant_gadget(sample: &PercolationSample, corner: Site, diagonal: Diagonal) -> Result<PercolationSample> {
    if sample.region.d != 2 {
        return param("gadgets are planted in the plane");
    }
    let occ = GadgetOccurrence { corner, diagonal };
    let s = occ.square();
    if s.iter().any(|x| sample.region.depth(*x) < 2) {
        return param("gadget must sit at depth at least 2 inside the box");
    }
    let in_square = |x: Site| s.contains(&x);
    let mut edits = Vec::new();
    for k in 0..4 {
        edits.push((Edge::new(s[k], s[(k + 1) % 4])?, true));
    }
    let (v, w) = occ.poles();
    let (a, b) = occ.others();
    for (x, open) in [(v, false), (w, false), (a, true), (b, true)] {
        for y in crate::lattice::neighbours(x, 2) {
            if !in_square(y) {
                edits.push((Edge::new(x, y)?, open));
            }
        }
    }
    sample.modify_edges(&edits)
}
