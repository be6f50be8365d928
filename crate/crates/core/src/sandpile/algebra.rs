//! Reduced Laplacian, Smith normal form and the dual group of toppling invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{param, LabError, Result};
use crate::field::Q;
use crate::graph::ClusterGraph;
use crate::solver::exact::bareiss_determinant;

type Mat = Vec<Vec<BigInt>>;

/// Full-degree Laplacian restricted to the cluster; the exterior is the eliminated sink.
pub fn reduced_laplacian(g: &ClusterGraph) -> Result<Mat> {
    if (0..g.vertex_count()).all(|v| g.exterior_degree(v) == 0) {
        return Err(LabError::Topology("no edge to the exterior: the sink is empty".into()));
    }
    let n = g.vertex_count();
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (v, row) in m.iter_mut().enumerate() {
        row[v] = BigInt::from(g.full_degree(v));
        for w in g.neighbours(v) {
            row[w] -= 1;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snf {
    pub u: Mat,
    /// Diagonal of `D`, with `d_1 | d_2 | ...` and nonnegative entries.
    pub d: Vec<BigInt>,
    pub v: Mat,
}

impl Snf {
    pub fn d_matrix(&self) -> Mat {
        let n = self.d.len();
        let mut m = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            m[i][i] = self.d[i].clone();
        }
        m
    }
}

pub(crate) fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![BigInt::zero(); k]; n];
    for i in 0..n {
        for (l, bl) in b.iter().enumerate() {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..k {
                if !bl[j].is_zero() {
                    out[i][j] += &a[i][l] * &bl[j];
                }
            }
        }
    }
    out
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

/// `dst -= q src`, skipping zeros and avoiding products for unit multipliers.
fn sub_scaled(dst: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    let unit = if q.is_one() {
        1
    } else if (-q).is_one() {
        -1
    } else {
        0
    };
    for (x, y) in dst.iter_mut().zip(src) {
        if y.is_zero() {
            continue;
        }
        match unit {
            1 => *x -= y,
            -1 => *x += y,
            _ => *x -= q * y,
        }
    }
}

struct Work {
    a: Mat,
    u: Option<Mat>,
    v: Mat,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = &mut self.u {
            u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in self.a.iter_mut().chain(self.v.iter_mut()) {
            r.swap(i, j);
        }
    }

    /// row_i -= q row_t
    fn row_sub(&mut self, i: usize, t: usize, q: &BigInt) {
        fn apply(m: &mut Mat, i: usize, t: usize, q: &BigInt) {
            let (src, dst) = if i < t {
                let (lo, hi) = m.split_at_mut(t);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = m.split_at_mut(i);
                (&lo[t], &mut hi[0])
            };
            sub_scaled(dst, src, q);
        }
        apply(&mut self.a, i, t, q);
        if let Some(u) = &mut self.u {
            apply(u, i, t, q);
        }
    }

    /// col_j -= q col_t
    fn col_sub(&mut self, j: usize, t: usize, q: &BigInt) {
        let unit = if q.is_one() {
            1
        } else if (-q).is_one() {
            -1
        } else {
            0
        };
        for r in self.a.iter_mut().chain(self.v.iter_mut()) {
            if r[t].is_zero() {
                continue;
            }
            let (x, y) = if j < t {
                let (lo, hi) = r.split_at_mut(t);
                (&mut lo[j], &hi[0])
            } else {
                let (lo, hi) = r.split_at_mut(j);
                (&mut hi[0], &lo[t])
            };
            match unit {
                1 => *x -= y,
                -1 => *x += y,
                _ => *x -= q * y,
            }
        }
    }
}

pub fn smith_normal_form(m: &[Vec<BigInt>]) -> Result<Snf> {
    snf_impl(m, true)
}

/// Elimination with a smallest-magnitude pivot (fewest nonzeros in its row and column
/// among ties) followed by a gcd/lcm sweep that enforces the divisibility chain.
pub(crate) fn snf_impl(m: &[Vec<BigInt>], track_u: bool) -> Result<Snf> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return param("smith normal form needs a square matrix");
    }
    let mut w = Work { a: m.to_vec(), u: track_u.then(|| identity(n)), v: identity(n) };
    for t in 0..n {
        loop {
            let mut row_nnz = vec![0usize; n];
            let mut col_nnz = vec![0usize; n];
            for i in t..n {
                for j in t..n {
                    if !w.a[i][j].is_zero() {
                        row_nnz[i] += 1;
                        col_nnz[j] += 1;
                    }
                }
            }
            let mut best: Option<(&num_bigint::BigUint, usize, usize, usize)> = None;
            'scan: for i in t..n {
                for j in t..n {
                    let x = &w.a[i][j];
                    if x.is_zero() {
                        continue;
                    }
                    let mag = x.magnitude();
                    let cost = (row_nnz[i] - 1) * (col_nnz[j] - 1);
                    let better = match &best {
                        None => true,
                        Some((bm, bc, _, _)) => mag < *bm || (mag == *bm && cost < *bc),
                    };
                    if better {
                        best = Some((mag, cost, i, j));
                        if cost == 0 && mag.is_one() {
                            break 'scan;
                        }
                    }
                }
            }
            let best = best.map(|(_, c, i, j)| ((), c, i, j));
            let Some((_, _, pi, pj)) = best else { break };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            let piv = w.a[t][t].clone();
            let mut clean = true;
            for i in t + 1..n {
                if w.a[i][t].is_zero() {
                    continue;
                }
                let q = &w.a[i][t] / &piv;
                if !q.is_zero() {
                    w.row_sub(i, t, &q);
                }
                clean &= w.a[i][t].is_zero();
            }
            for j in t + 1..n {
                if w.a[t][j].is_zero() {
                    continue;
                }
                let q = &w.a[t][j] / &piv;
                if !q.is_zero() {
                    w.col_sub(j, t, &q);
                }
                clean &= w.a[t][j].is_zero();
            }
            if clean {
                break;
            }
        }
    }
    // units first and zeros last, by symmetric swaps, so the gcd sweep only meets the
    // few nontrivial factors
    let key = |x: &BigInt| (x.is_zero(), x.magnitude().clone());
    for i in 0..n {
        let k = (i..n).min_by(|&p, &q| key(&w.a[p][p]).cmp(&key(&w.a[q][q]))).expect("nonempty");
        if k != i {
            w.swap_rows(i, k);
            w.swap_cols(i, k);
        }
    }
    // divisibility chain: replace (d_i, d_j) by (gcd, lcm) with unimodular 2x2 moves
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (w.a[i][i].clone(), w.a[j][j].clone());
            if b.is_zero() || (!a.is_zero() && (&b % &a).is_zero()) {
                continue;
            }
            // col_i += col_j
            w.col_sub(i, j, &BigInt::from(-1));
            let eg = a.extended_gcd(&b);
            let (g, s, tt) = (eg.gcd, eg.x, eg.y);
            let (bg, ag) = (&b / &g, &a / &g);
            let combine = |m: &mut Mat| {
                let (ri, rj) = (m[i].clone(), m[j].clone());
                for k in 0..ri.len() {
                    m[i][k] = &s * &ri[k] + &tt * &rj[k];
                    m[j][k] = -&bg * &ri[k] + &ag * &rj[k];
                }
            };
            combine(&mut w.a);
            if let Some(u) = &mut w.u {
                combine(u);
            }
            let q = &w.a[i][j] / &g;
            w.col_sub(j, i, &q);
        }
    }
    for i in 0..n {
        if w.a[i][i].is_negative() {
            for x in w.a[i].iter_mut() {
                *x = -&*x;
            }
            if let Some(u) = &mut w.u {
                for x in u[i].iter_mut() {
                    *x = -&*x;
                }
            }
        }
    }
    let d = (0..n).map(|i| w.a[i][i].clone()).collect();
    Ok(Snf { u: w.u.unwrap_or_default(), d, v: w.v })
}

/// A function on the vertices with values `num / den` in `R/Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frequency {
    pub den: BigInt,
    pub num: Vec<BigInt>,
}

impl Frequency {
    pub fn new(num: Vec<BigInt>, den: BigInt) -> Result<Frequency> {
        if !den.is_positive() {
            return param("frequency denominator must be positive");
        }
        let num = num.into_iter().map(|x| x.mod_floor(&den)).collect();
        Ok(Frequency { den, num })
    }

    pub fn zero(m: usize) -> Frequency {
        Frequency { den: BigInt::one(), num: vec![BigInt::zero(); m] }
    }

    pub fn value(&self, i: usize) -> Q {
        Q::new(self.num[i].clone(), self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|x| x.is_zero())
    }

    /// `L ξ ∈ Z^m` for the full-degree Laplacian with the exterior at value 0.
    pub fn is_toppling_invariant(&self, g: &ClusterGraph) -> bool {
        (0..g.vertex_count()).all(|v| {
            let mut s = BigInt::from(g.full_degree(v)) * &self.num[v];
            for w in g.neighbours(v) {
                s -= &self.num[w];
            }
            s.mod_floor(&self.den).is_zero()
        })
    }

    /// Numerator of `Σ s ξ mod 1` over `den`.
    pub fn pairing(&self, chips: &[i64]) -> BigInt {
        let mut s = BigInt::zero();
        for (c, x) in chips.iter().zip(&self.num) {
            if *c != 0 && !x.is_zero() {
                s += BigInt::from(*c) * x;
            }
        }
        s.mod_floor(&self.den)
    }
}

/// Largest reduced Laplacian handled by the exact `(U, D, V)` factorization; larger ones
/// use the modular route.
pub const EXACT_SNF_CAP: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnfRoute {
    /// Full unimodular factorization; generators are columns of `V D^{-1}`.
    Exact,
    /// Elimination modulo `det L`; generators are rows of `U` over `D`.
    Modular,
}

#[derive(Debug, Clone)]
pub struct DualGroup {
    pub reduced_laplacian: Mat,
    /// Present for the exact route.
    pub snf: Option<Snf>,
    pub route: SnfRoute,
    /// Invariant factors greater than one.
    pub invariant_factors: Vec<BigInt>,
    /// One generator per invariant factor, of that exact order.
    pub generators: Vec<Frequency>,
    pub order: BigInt,
}

impl DualGroup {
    /// Every generator is a toppling invariant of exactly its factor's order, the factors
    /// form a divisibility chain with product `|det L|`, and for the exact route
    /// `U L V = D` with unimodular `U`, `V`.
    pub fn verify(&self) -> bool {
        let n = self.reduced_laplacian.len();
        let gens_ok = self.generators.iter().zip(&self.invariant_factors).all(|(xi, d)| {
            let lx_integer = (0..n).all(|i| {
                let s: BigInt =
                    (0..n).filter(|&j| !self.reduced_laplacian[i][j].is_zero()).map(|j| &self.reduced_laplacian[i][j] * &xi.num[j]).sum();
                s.mod_floor(&xi.den).is_zero()
            });
            let g = xi.num.iter().fold(xi.den.clone(), |acc, x| acc.gcd(x));
            lx_integer && &xi.den == d && g.is_one()
        });
        let chain = self.invariant_factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero());
        let prod: BigInt = self.invariant_factors.iter().product();
        let snf_ok = match &self.snf {
            Some(snf) => {
                mat_mul(&mat_mul(&snf.u, &self.reduced_laplacian), &snf.v) == snf.d_matrix()
                    && bareiss_determinant(&snf.u).abs().is_one()
                    && bareiss_determinant(&snf.v).abs().is_one()
            }
            None => true,
        };
        gens_ok && chain && prod == self.order && snf_ok
    }
}

/// `det L` for a symmetric positive definite matrix by sparse rational elimination in
/// index order (fill stays inside the bandwidth of lattice orderings).
pub fn determinant_spd(l: &Mat) -> Result<BigInt> {
    use std::collections::BTreeMap;
    let n = l.len();
    let mut rows: Vec<BTreeMap<usize, Q>> = l
        .iter()
        .enumerate()
        .map(|(i, r)| (i..n).filter(|&j| !r[j].is_zero()).map(|j| (j, Q::from_integer(r[j].clone()))).collect())
        .collect();
    let mut det = Q::one();
    for k in 0..n {
        let row = std::mem::take(&mut rows[k]);
        let p = row.get(&k).cloned().unwrap_or_else(Q::zero);
        if !p.is_positive() {
            return Err(LabError::Topology("reduced laplacian is not positive definite".into()));
        }
        det *= &p;
        let tail: Vec<(usize, Q)> = row.into_iter().filter(|(j, _)| *j > k).collect();
        for (a, (i, lik)) in tail.iter().enumerate() {
            let f = lik / &p;
            for (j, lkj) in &tail[a..] {
                let e = rows[*i].entry(*j).or_insert_with(Q::zero);
                *e -= &f * lkj;
            }
        }
    }
    if !det.is_integer() {
        return Err(LabError::Internal("determinant is not an integer".into()));
    }
    Ok(det.to_integer())
}

fn sym_mod(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

/// Invariant factors of a nonsingular `L` and the row transform `U` reduced mod `M = |det L|`,
/// computed on `[L | M I]`, whose columns span the same lattice as those of `L`.
pub(crate) fn snf_modular(l: &Mat, modulus: &BigInt) -> (Vec<BigInt>, Mat) {
    let n = l.len();
    let m = modulus;
    let mut a: Mat = l.iter().map(|r| r.iter().map(|x| sym_mod(x, m)).collect()).collect();
    let mut u = identity(n);
    for t in 0..n {
        let mut row_nnz = vec![0usize; n];
        let mut col_nnz = vec![0usize; n];
        for i in t..n {
            for j in t..n {
                if !a[i][j].is_zero() {
                    row_nnz[i] += 1;
                    col_nnz[j] += 1;
                }
            }
        }
        let mut best: Option<(&num_bigint::BigUint, usize, usize, usize)> = None;
        'scan: for i in t..n {
            for j in t..n {
                let x = &a[i][j];
                if x.is_zero() {
                    continue;
                }
                let mag = x.magnitude();
                let cost = (row_nnz[i] - 1) * (col_nnz[j] - 1);
                if best.is_none_or(|(bm, bc, _, _)| mag < bm || (mag == bm && cost < bc)) {
                    best = Some((mag, cost, i, j));
                    if cost == 0 && mag.is_one() {
                        break 'scan;
                    }
                }
            }
        }
        let Some((_, _, pi, pj)) = best else { continue };
        a.swap(t, pi);
        u.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        // clear column and row t; a non-divisible entry is merged into the pivot by an
        // extended-gcd 2x2 move, so each entry costs one operation
        loop {
            for i in t + 1..n {
                if a[i][t].is_zero() {
                    continue;
                }
                let (x, y) = (a[t][t].clone(), a[i][t].clone());
                if (&y % &x).is_zero() {
                    let q = &y / &x;
                    let (lo, hi) = a.split_at_mut(i);
                    sub_scaled(&mut hi[0][t..], &lo[t][t..], &q);
                    for v in hi[0][t..].iter_mut() {
                        *v = sym_mod(v, m);
                    }
                    let (lo, hi) = u.split_at_mut(i);
                    sub_scaled(&mut hi[0], &lo[t], &q);
                    for v in hi[0].iter_mut() {
                        *v = v.mod_floor(m);
                    }
                } else {
                    let eg = x.extended_gcd(&y);
                    let (yg, xg) = (&y / &eg.gcd, &x / &eg.gcd);
                    for (mat, lo) in [(&mut a, t), (&mut u, 0)] {
                        for k in lo..n {
                            let (p, q) = (mat[t][k].clone(), mat[i][k].clone());
                            if p.is_zero() && q.is_zero() {
                                continue;
                            }
                            mat[t][k] = sym_mod(&(&eg.x * &p + &eg.y * &q), m);
                            mat[i][k] = sym_mod(&(&xg * &q - &yg * &p), m);
                        }
                    }
                }
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let (x, y) = (a[t][t].clone(), a[t][j].clone());
                if (&y % &x).is_zero() {
                    let q = &y / &x;
                    for r in a[t..].iter_mut() {
                        if !r[t].is_zero() {
                            let v = &q * &r[t];
                            r[j] = sym_mod(&(&r[j] - v), m);
                        }
                    }
                } else {
                    let eg = x.extended_gcd(&y);
                    let (yg, xg) = (&y / &eg.gcd, &x / &eg.gcd);
                    for r in a[t..].iter_mut() {
                        let (p, q) = (r[t].clone(), r[j].clone());
                        if p.is_zero() && q.is_zero() {
                            continue;
                        }
                        r[t] = sym_mod(&(&eg.x * &p + &eg.y * &q), m);
                        r[j] = sym_mod(&(&xg * &q - &yg * &p), m);
                    }
                }
            }
            if (t + 1..n).all(|i| a[i][t].is_zero()) {
                break;
            }
        }
    }
    let mut d: Vec<BigInt> = (0..n).map(|i| a[i][i].gcd(m)).collect();
    // units first, then the gcd/lcm sweep acting on the rows of U
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| d[p].cmp(&d[q]));
    d = order.iter().map(|&i| d[i].clone()).collect();
    u = order.iter().map(|&i| u[i].clone()).collect();
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (d[i].clone(), d[j].clone());
            if (&y % &x).is_zero() {
                continue;
            }
            let eg = x.extended_gcd(&y);
            let (g, s, tt) = (eg.gcd, eg.x, eg.y);
            let (yg, xg) = (&y / &g, &x / &g);
            let (ri, rj) = (u[i].clone(), u[j].clone());
            for k in 0..n {
                u[i][k] = (&s * &ri[k] + &tt * &rj[k]).mod_floor(m);
                u[j][k] = (-&yg * &ri[k] + &xg * &rj[k]).mod_floor(m);
            }
            d[j] = &x * &yg;
            d[i] = g;
        }
    }
    (d, u)
}

/// Generators of `{ξ : Lξ ∈ Z^m} / Z^m`, by the exact route for small graphs and the
/// modular route otherwise.
pub fn toppling_invariants(g: &ClusterGraph) -> Result<DualGroup> {
    let route = if g.vertex_count() <= EXACT_SNF_CAP { SnfRoute::Exact } else { SnfRoute::Modular };
    toppling_invariants_via(g, route)
}

pub fn toppling_invariants_via(g: &ClusterGraph, route: SnfRoute) -> Result<DualGroup> {
    let l = reduced_laplacian(g)?;
    let n = l.len();
    let mut invariant_factors = Vec::new();
    let mut generators = Vec::new();
    match route {
        SnfRoute::Exact => {
            let snf = snf_impl(&l, true)?;
            if snf.d.iter().any(|x| x.is_zero()) {
                return Err(LabError::Topology("reduced laplacian is singular".into()));
            }
            for j in 0..n {
                let dj = &snf.d[j];
                if dj.is_one() {
                    continue;
                }
                let col: Vec<BigInt> = (0..n).map(|i| snf.v[i][j].clone()).collect();
                generators.push(Frequency::new(col, dj.clone())?);
                invariant_factors.push(dj.clone());
            }
            let order = snf.d.iter().fold(BigInt::one(), |acc, x| acc * x);
            Ok(DualGroup { reduced_laplacian: l, snf: Some(snf), route, invariant_factors, generators, order })
        }
        SnfRoute::Modular => {
            let det = determinant_spd(&l)?;
            let (d, u) = snf_modular(&l, &det);
            for (j, dj) in d.iter().enumerate() {
                if dj.is_one() {
                    continue;
                }
                generators.push(Frequency::new(u[j].clone(), dj.clone())?);
                invariant_factors.push(dj.clone());
            }
            Ok(DualGroup { reduced_laplacian: l, snf: None, route, invariant_factors, generators, order: det })
        }
    }
}

/// Spanning trees of the cluster with all exterior edges joined to one sink vertex, by
/// explicit enumeration with union-find and rollback. Small graphs only.
pub fn count_spanning_trees(g: &ClusterGraph) -> Result<BigInt> {
    let n = g.vertex_count() + 1;
    if n > 17 {
        return param("spanning tree enumeration is limited to 16 vertices");
    }
    let sink = n - 1;
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    for v in 0..g.vertex_count() {
        for _ in 0..g.exterior_degree(v) {
            edges.push((v, sink));
        }
    }
    struct Dsu {
        parent: Vec<usize>,
        size: Vec<usize>,
        log: Vec<(usize, usize)>,
    }
    impl Dsu {
        fn find(&self, mut x: usize) -> usize {
            while self.parent[x] != x {
                x = self.parent[x];
            }
            x
        }
        fn union(&mut self, a: usize, b: usize) -> bool {
            let (mut a, mut b) = (self.find(a), self.find(b));
            if a == b {
                return false;
            }
            if self.size[a] < self.size[b] {
                std::mem::swap(&mut a, &mut b);
            }
            self.parent[b] = a;
            self.size[a] += self.size[b];
            self.log.push((a, b));
            true
        }
        fn undo(&mut self) {
            let (a, b) = self.log.pop().expect("undo log");
            self.parent[b] = b;
            self.size[a] -= self.size[b];
        }
    }
    fn rec(edges: &[(usize, usize)], k: usize, picked: usize, need: usize, dsu: &mut Dsu, count: &mut u64) {
        if picked == need {
            *count += 1;
            return;
        }
        if edges.len() - k < need - picked {
            return;
        }
        let (a, b) = edges[k];
        if dsu.union(a, b) {
            rec(edges, k + 1, picked + 1, need, dsu, count);
            dsu.undo();
        }
        rec(edges, k + 1, picked, need, dsu, count);
    }
    let mut dsu = Dsu { parent: (0..n).collect(), size: vec![1; n], log: Vec::new() };
    let mut count = 0u64;
    rec(&edges, 0, 0, n - 1, &mut dsu, &mut count);
    Ok(BigInt::from(count))
}
