//! Diamond peeling on the full planar lattice: a compactly supported function whose
//! Laplacian is integer valued is itself integer valued, checked constructively by solving
//! for the function one vertex at a time from the outside of its enclosing diamond.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::field::{NumericKind, ScalarField, Q};
use crate::lattice::{add, l1, neighbours, site2, sub, Site};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeelVerdict {
    pub integer_valued: bool,
    /// First vertex in peel order whose forced value was not an integer.
    pub witness: Option<Site>,
    /// Center and radius of the smallest enclosing ℓ¹ diamond of the support.
    pub diamond: Option<(Site, i32)>,
    /// Vertices solved for, in peel order.
    pub peeled: usize,
}

fn is_integer(v: &Q) -> bool {
    v.denom().is_one()
}

/// Laplacian of a finitely supported function on Z^2 at any lattice point.
fn lap(u: &BTreeMap<Site, Q>, x: Site) -> Q {
    let get = |y: Site| u.get(&y).cloned().unwrap_or_else(Q::zero);
    let mut s = Q::zero();
    for y in neighbours(x, 2) {
        s += get(y) - get(x);
    }
    s
}

fn rot(v: Site, r: usize) -> Site {
    let mut w = v;
    for _ in 0..r {
        w = site2(w[1], -w[0]);
    }
    w
}

/// Smallest `k` and center `c` (lexicographically first among ties) with
/// `|x - c|_1 <= k` on the support.
pub fn enclosing_diamond(support: &[Site]) -> Option<(Site, i32)> {
    let first = support.first()?;
    let (mut lo, mut hi) = (*first, *first);
    for x in support {
        for k in 0..2 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    let mut best: Option<(Site, i32)> = None;
    for cx in lo[0]..=hi[0] {
        for cy in lo[1]..=hi[1] {
            let c = site2(cx, cy);
            let k = support.iter().map(|x| l1(sub(*x, c))).max().unwrap_or(0);
            if best.is_none_or(|(_, b)| k < b) {
                best = Some((c, k));
            }
        }
    }
    best
}

fn check_full_box(u: &ScalarField) -> Result<()> {
    let g = &u.graph;
    let r = g.region.as_ref().ok_or_else(|| LabError::Precondition("field must live on a full box".into()))?;
    if g.d != 2 || g.vertex_count() != r.vertex_count() || g.edge_count() != r.edges().len() {
        return Err(LabError::Precondition("field must live on the full planar box".into()));
    }
    if u.kind() != NumericKind::Rational {
        return Err(LabError::Kind("diamond peeling needs exact values".into()));
    }
    Ok(())
}

/// Lexicographically first vertex of the box where the lattice Laplacian of `u`
/// (extended by zero) fails to be an integer.
pub fn first_non_integer_laplacian(u: &ScalarField) -> Result<Option<Site>> {
    check_full_box(u)?;
    let map = support_map(u)?;
    Ok(u.graph.vertices().iter().copied().find(|&x| !is_integer(&lap(&map, x))))
}

fn support_map(u: &ScalarField) -> Result<BTreeMap<Site, Q>> {
    let vals = u.values.rational()?;
    Ok(u.graph.vertices().iter().zip(vals).filter(|(_, v)| !v.is_zero()).map(|(x, v)| (*x, v.clone())).collect())
}

/// Peels `u` from the outside of its enclosing diamond.
///
/// Errors with [`LabError::Precondition`] when `u` does not vanish on the box boundary or
/// when its Laplacian has a non-integer value; the message names the lexicographically
/// first offending vertex.
pub fn diamond_peel(u: &ScalarField) -> Result<PeelVerdict> {
    check_full_box(u)?;
    let region = u.graph.region.expect("checked");
    let map = support_map(u)?;
    if let Some(x) = map.keys().find(|x| region.on_boundary(**x)) {
        return Err(LabError::Precondition(format!("support touches the box boundary at {x:?}")));
    }
    if let Some(x) = u.graph.vertices().iter().find(|&&x| !is_integer(&lap(&map, x))) {
        return Err(LabError::Precondition(format!("laplacian is not an integer at {x:?}")));
    }
    let support: Vec<Site> = map.keys().copied().collect();
    let Some((c, k)) = enclosing_diamond(&support) else {
        return Ok(PeelVerdict { integer_valued: true, witness: None, diamond: None, peeled: 0 });
    };

    // values are only ever read outside the current diamond or at already peeled vertices
    let mut known: BTreeMap<Site, Q> = BTreeMap::new();
    let get = |m: &BTreeMap<Site, Q>, y: Site| m.get(&y).cloned().unwrap_or_else(Q::zero);
    let mut witness = None;
    let mut peeled = 0;
    for j in (0..=k).rev() {
        let layer: Vec<(Site, Site)> = if j == 0 {
            vec![(c, add(c, site2(0, 1)))]
        } else {
            (0..4).flat_map(|r| (0..j).map(move |i| (add(c, rot(site2(i, j - i), r)), add(c, rot(site2(i, j - i + 1), r))))).collect()
        };
        for (b, q) in layer {
            // Δu(q) = u(b) + Σ_{other neighbours} u - 4 u(q)
            let mut v = lap(&map, q) + Q::from_integer(4.into()) * get(&known, q);
            for y in neighbours(q, 2) {
                if y != b {
                    v -= get(&known, y);
                }
            }
            if v != get(&map, b) {
                return Err(LabError::Internal(format!("peeling disagrees with the field at {b:?}")));
            }
            if witness.is_none() && !is_integer(&v) {
                witness = Some(b);
            }
            if !v.is_zero() {
                known.insert(b, v);
            }
            peeled += 1;
        }
    }
    Ok(PeelVerdict { integer_valued: witness.is_none(), witness, diamond: Some((c, k)), peeled })
}
