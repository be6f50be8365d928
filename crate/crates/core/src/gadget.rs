//! Resistance gadgets: the ladder `[1,4] x [0,n+1]` whose harmonic functions have
//! exponentially large denominators, and their embedding into sampled environments.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{param, LabError, Result};
use crate::field::{q, ScalarField, Values, Q};
use crate::graph::ClusterGraph;
use crate::lattice::{add, neighbours, site2, Edge, Site};
use crate::percolation::PercolationSample;
use crate::solver::{solve_dirichlet, SolveOptions, EXACT_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    pub n: usize,
    pub open_sites: BTreeSet<Site>,
    pub closed_sites: BTreeSet<Site>,
    pub s: Site,
    pub a: Site,
    pub b: Site,
    pub t: Site,
}

pub fn build_gadget(n: usize) -> Result<Gadget> {
    if n < 1 {
        return param("gadget size must be at least 1");
    }
    let top = n as i32 + 1;
    let mut open = BTreeSet::new();
    for x in 1..=4 {
        open.insert(site2(x, 1));
    }
    for x in 2..=3 {
        for y in 1..=n as i32 {
            open.insert(site2(x, y));
        }
    }
    let (s, t) = (site2(1, 1), site2(4, 1));
    let mut closed = BTreeSet::new();
    for x in 1..=4 {
        for y in 0..=top {
            let z = site2(x, y);
            let on_rim = x == 1 || x == 4 || y == 0 || y == top;
            if on_rim && z != s && z != t {
                closed.insert(z);
            }
        }
    }
    Ok(Gadget { n, open_sites: open, closed_sites: closed, s, a: site2(2, 1), b: site2(3, 1), t })
}

impl Gadget {
    /// All sites of the rectangle `[1,4] x [0,n+1]`.
    pub fn rectangle(&self) -> Vec<Site> {
        let mut v = Vec::new();
        for x in 1..=4 {
            for y in 0..=self.n as i32 + 1 {
                v.push(site2(x, y));
            }
        }
        v
    }

    /// Lattice edges with both endpoints open.
    pub fn open_edges(&self) -> Vec<(Site, Site)> {
        let mut out = Vec::new();
        for &x in &self.open_sites {
            for y in neighbours(x, 2) {
                if x < y && self.open_sites.contains(&y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// The open network with `s` and `t` as boundary.
    pub fn graph(&self) -> Result<Arc<ClusterGraph>> {
        let g = ClusterGraph::new(2, None, self.open_sites.iter().copied().collect(), &self.open_edges())?;
        Ok(Arc::new(g.with_inner_boundary(&[self.s, self.t])?))
    }

    /// Exact harmonic function with `h(s) = 0`, `h(t) = 1`.
    pub fn unit_potential(&self) -> Result<ScalarField> {
        let g = self.graph()?;
        if g.vertex_count() > EXACT_CAP {
            return Err(LabError::Capacity(format!("gadget of size {} exceeds the exact cap", self.n)));
        }
        let t = self.t;
        let bv = ScalarField::from_fn_rational(&g, |x| if x == t { q(1) } else { q(0) });
        let rhs = ScalarField::zeros(&g, crate::field::NumericKind::Rational);
        solve_dirichlet(&g, &g.boundary_mask(), &bv, &rhs, &SolveOptions::exact())
    }
}

/// `R_1 = 3`, `R_{n+1} = (3 R_n + 2) / (R_n + 1)`.
pub fn resistance_recurrence(n: usize) -> Result<Q> {
    if n < 1 {
        return param("gadget size must be at least 1");
    }
    let mut r = q(3);
    for _ in 1..n {
        r = (&r * q(3) + q(2)) / (&r + q(1));
    }
    Ok(r)
}

/// `X_n = 4 X_{n-1} - X_{n-2}` from the two initial values, returned for indices `0..=n`.
fn four_term(x0: i64, x1: i64, n: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::from(x0), BigInt::from(x1)];
    while v.len() <= n {
        let k = v.len();
        let next = BigInt::from(4) * &v[k - 1] - &v[k - 2];
        v.push(next);
    }
    v.truncate(n + 1);
    v
}

/// `A_0..=A_n` with `A_0 = A_1 = 1`.
pub fn a_sequence(n: usize) -> Vec<BigInt> {
    four_term(1, 1, n)
}

/// `B_0..=B_n` with `B_0 = 0`, `B_1 = 1`.
pub fn b_sequence(n: usize) -> Vec<BigInt> {
    four_term(0, 1, n)
}

/// `(A_{n+1}, B_n)`.
pub fn sequence_ab(n: usize) -> (BigInt, BigInt) {
    let a = a_sequence(n + 1);
    let b = b_sequence(n);
    (a[n + 1].clone(), b[n].clone())
}

/// `1 / h(a)` from the exact Dirichlet solve on the gadget.
pub fn resistance_by_solve(n: usize) -> Result<Q> {
    let gadget = build_gadget(n)?;
    let h = gadget.unit_potential()?;
    let ha = h.at_exact(gadget.a).ok_or_else(|| LabError::Internal("terminal a missing".into()))?;
    if ha.is_zero() {
        return Err(LabError::Internal("h(a) vanished".into()));
    }
    Ok(ha.recip())
}

/// Smallest nonzero `|u(t) - u(s)|` over integer-valued harmonic functions on the gadget:
/// the least common denominator of the unit potential.
pub fn integer_harmonic_gap(n: usize) -> Result<BigInt> {
    let h = build_gadget(n)?.unit_potential()?;
    let v = h.values.rational()?;
    Ok(v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom())))
}

/// Whether `u(t) - u(s) = gap` admits an integer-valued harmonic extension with `u(s) = 0`.
pub fn admits_integer_extension(n: usize, gap: i64) -> Result<bool> {
    let h = build_gadget(n)?.unit_potential()?;
    let v = h.values.rational()?;
    Ok(v.iter().all(|x| (x * q(gap)).is_integer()))
}

/// `floor(sqrt(3) * 2^bits)`.
fn sqrt3_scaled(bits: u32) -> BigInt {
    (BigInt::from(3) << (2 * bits) as usize).sqrt()
}

/// `|R - (1 + sqrt 3)|` evaluated in fixed point with `bits` fractional bits.
pub fn distance_to_limit(r: &Q, bits: u32) -> f64 {
    let one = BigInt::one() << bits as usize;
    let limit = Q::new(&one + sqrt3_scaled(bits), one);
    (r - limit).abs().to_f64().unwrap_or(f64::NAN)
}

/// Continued fraction expansion of a positive rational.
pub fn continued_fraction(r: &Q) -> Vec<BigInt> {
    let (mut a, mut b) = (r.numer().clone(), r.denom().clone());
    let mut out = Vec::new();
    while !b.is_zero() {
        let (qt, rm) = a.div_rem(&b);
        out.push(qt);
        a = b;
        b = rm;
    }
    out
}

/// Convergents `p_k / q_k` of `1 + sqrt 3 = [2; 1, 2, 1, 2, ...]`, first `count` of them.
pub fn limit_convergents(count: usize) -> Vec<Q> {
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(2), BigInt::one());
    let mut out = vec![Q::new(p1.clone(), q1.clone())];
    for k in 1..count {
        let a = BigInt::from(if k % 2 == 1 { 1 } else { 2 });
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        out.push(Q::new(p2.clone(), q2.clone()));
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    out
}

/// Decimal expansion with `digits` digits after the point (truncated).
pub fn decimal(r: &Q, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let neg = r.is_negative();
    let v = (r.abs() * Q::from_integer(scale.clone())).to_integer();
    let (ip, fp) = v.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = digits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetRow {
    pub n: usize,
    pub a_next: BigInt,
    pub b: BigInt,
    pub r: Q,
    pub r_solve: Option<Q>,
    pub distance: f64,
}

/// Rows for `n = 1..=max_n`; the exact solve is included up to `solve_up_to`.
pub fn gadget_table(max_n: usize, solve_up_to: usize) -> Result<Vec<GadgetRow>> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let (a_next, b) = sequence_ab(n);
        let r = resistance_recurrence(n)?;
        let r_solve = if n <= solve_up_to { Some(resistance_by_solve(n)?) } else { None };
        rows.push(GadgetRow { n, a_next, b, distance: distance_to_limit(&r, 200), r, r_solve });
    }
    Ok(rows)
}

/// CSV with columns `n,A_next,B_n,R_exact,R_decimal,distance`.
pub fn gadget_table_csv(rows: &[GadgetRow]) -> String {
    let mut s = String::from("n,A_next,B_n,R_exact,R_decimal,distance\n");
    for r in rows {
        s += &format!("{},{},{},{}/{},{},{:e}\n", r.n, r.a_next, r.b, r.r.numer(), r.r.denom(), decimal(&r.r, 30), r.distance);
    }
    s
}

/// Overrides that plant a translated gadget at `anchor` (the image of the origin), with
/// two open attachment paths starting at `s` and `t` and every other edge leaving the
/// rectangle closed.
pub fn embed_gadget(sample: &PercolationSample, anchor: Site, n: usize, attach_s: &[Site], attach_t: &[Site]) -> Result<PercolationSample> {
    let g = build_gadget(n)?;
    let shift = |x: Site| add(x, anchor);
    let rect: BTreeSet<Site> = g.rectangle().into_iter().map(shift).collect();
    let open: BTreeSet<Site> = g.open_sites.iter().map(|&x| shift(x)).collect();
    for z in &rect {
        if !sample.region.contains(*z) {
            return param(format!("gadget site {z:?} outside region"));
        }
    }
    let mut path_edges = BTreeSet::new();
    let mut used = BTreeSet::new();
    for (path, term) in [(attach_s, shift(g.s)), (attach_t, shift(g.t))] {
        if path.is_empty() {
            continue;
        }
        if path[0] != term {
            return param(format!("attachment path must start at terminal {term:?}"));
        }
        for (k, &z) in path.iter().enumerate() {
            if k > 0 && rect.contains(&z) {
                return param(format!("attachment path re-enters the gadget at {z:?}"));
            }
            if !sample.region.contains(z) {
                return param(format!("attachment path leaves the region at {z:?}"));
            }
            if !used.insert(z) {
                return param(format!("attachment paths collide at {z:?}"));
            }
        }
        for w in path.windows(2) {
            path_edges.insert(Edge::new(w[0], w[1])?);
        }
    }
    let mut edits = Vec::new();
    for &z in &rect {
        for y in neighbours(z, 2) {
            if !sample.region.contains(y) {
                continue;
            }
            let e = Edge::new(z, y)?;
            let state = if rect.contains(&y) { open.contains(&z) && open.contains(&y) } else { path_edges.contains(&e) };
            edits.push((e, state));
        }
    }
    for e in &path_edges {
        edits.push((*e, true));
    }
    edits.sort();
    edits.dedup();
    sample.modify_edges(&edits)
}

/// Checks `h(a) - h(s) = (B_n / A_{n+1}) (h(t) - h(s))` for an exact field on a graph
/// containing a gadget planted at `anchor`.
pub fn gadget_ratio_holds(field: &ScalarField, anchor: Site, n: usize) -> Result<bool> {
    let g = build_gadget(n)?;
    let vals = match &field.values {
        Values::Rational(_) => (field.at_exact(add(g.s, anchor)), field.at_exact(add(g.a, anchor)), field.at_exact(add(g.t, anchor))),
        Values::Float(_) => return Err(LabError::Kind("ratio check needs exact values".into())),
    };
    let (hs, ha, ht) = match vals {
        (Some(s), Some(a), Some(t)) => (s, a, t),
        _ => return param("gadget terminals are not in the field's graph"),
    };
    let (a_next, b) = sequence_ab(n);
    Ok(ha - &hs == Q::new(b, a_next) * (ht - hs))
}
