//! Laplacian, Dirichlet and Neumann solvers, Green's functions, and discrete calculus.
//!
//! Conventions: `Δu(x) = Σ_{y~x} (u(y) - u(x))`, Dirichlet solves impose `Δu = -rhs`,
//! `∇u(x, y) = u(y) - u(x)` and `div F(x) = Σ_{y~x} F(x, y)`, so that `div ∘ ∇ = Δ`.

mod cg;
pub(crate) mod exact;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use exact::bareiss_determinant;

use crate::error::{param, LabError, Result};
use crate::field::{same_graph, EdgeField, NumericKind, ScalarField, Values, Q};
use crate::graph::ClusterGraph;
use crate::lattice::Site;

/// Exact solves above this many unknowns are refused.
pub const EXACT_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preconditioner {
    None,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
    pub exact: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-10, max_iterations: 200_000, preconditioner: Preconditioner::Diagonal, exact: false }
    }
}

impl SolveOptions {
    pub fn exact() -> Self {
        SolveOptions { exact: true, ..Default::default() }
    }

    pub fn with_tolerance(tol: f64) -> Self {
        SolveOptions { tolerance: tol, ..Default::default() }
    }

    pub fn kind(&self) -> NumericKind {
        if self.exact {
            NumericKind::Rational
        } else {
            NumericKind::Float64
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.exact && !(self.tolerance > 0.0) {
            return param("tolerance must be positive");
        }
        Ok(())
    }
}

/// Pointwise graph Laplacian.
pub fn laplacian_apply(u: &ScalarField) -> ScalarField {
    let g = &u.graph;
    let values = match &u.values {
        Values::Float(v) => Values::Float((0..g.vertex_count()).map(|i| g.neighbours(i).map(|j| v[j] - v[i]).sum()).collect()),
        Values::Rational(v) => Values::Rational(
            (0..g.vertex_count())
                .map(|i| {
                    let mut s = Q::zero();
                    for j in g.neighbours(i) {
                        s += &v[j] - &v[i];
                    }
                    s
                })
                .collect(),
        ),
    };
    ScalarField { graph: g.clone(), values }
}

/// Laplacian of `u` checked against the graph a caller expects.
pub fn laplacian_on(graph: &Arc<ClusterGraph>, u: &ScalarField) -> Result<ScalarField> {
    if !same_graph(graph, &u.graph) {
        return param("field lives on a different graph");
    }
    Ok(laplacian_apply(u))
}

/// Vertex mask from a list of sites.
pub fn mask_from_sites(graph: &ClusterGraph, sites: &[Site]) -> Result<Vec<bool>> {
    let mut m = vec![false; graph.vertex_count()];
    for x in sites {
        m[graph.require(*x)?] = true;
    }
    Ok(m)
}

fn check_kind(f: &ScalarField, opts: &SolveOptions, what: &str) -> Result<()> {
    if f.kind() != opts.kind() {
        return Err(LabError::Kind(format!("{what} is {:?} but the solve is {:?}", f.kind(), opts.kind())));
    }
    Ok(())
}

/// Every interior component must touch the boundary.
fn check_well_posed(graph: &ClusterGraph, boundary: &[bool]) -> Result<()> {
    let n = graph.vertex_count();
    let mut seen = boundary.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&i| boundary[i]).collect();
    while let Some(v) = stack.pop() {
        for w in graph.neighbours(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| !seen[i]) {
        return Err(LabError::IllPosed(format!("interior vertex {:?} has no path to the boundary", graph.site(i))));
    }
    Ok(())
}

/// Solves `Δu = -rhs` on the interior with `u = boundaryValues` on the boundary.
/// `boundary_values` and `rhs` are full-length fields; entries off their domain are ignored.
pub fn solve_dirichlet(
    graph: &Arc<ClusterGraph>,
    boundary: &[bool],
    boundary_values: &ScalarField,
    rhs: &ScalarField,
    opts: &SolveOptions,
) -> Result<ScalarField> {
    let mut out = solve_dirichlet_multi(graph, boundary, boundary_values, std::slice::from_ref(rhs), opts)?;
    Ok(out.pop().expect("one solution"))
}

/// Dirichlet solves sharing the boundary data, one per right-hand side.
pub fn solve_dirichlet_multi(
    graph: &Arc<ClusterGraph>,
    boundary: &[bool],
    boundary_values: &ScalarField,
    rhs: &[ScalarField],
    opts: &SolveOptions,
) -> Result<Vec<ScalarField>> {
    opts.validate()?;
    let n = graph.vertex_count();
    if boundary.len() != n {
        return param("boundary mask length mismatch");
    }
    if !same_graph(graph, &boundary_values.graph) || rhs.iter().any(|r| !same_graph(graph, &r.graph)) {
        return param("fields live on a different graph");
    }
    check_kind(boundary_values, opts, "boundary data")?;
    for r in rhs {
        check_kind(r, opts, "right-hand side")?;
    }
    let interior: Vec<usize> = (0..n).filter(|&i| !boundary[i]).collect();
    if !interior.is_empty() {
        check_well_posed(graph, boundary)?;
    }
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in interior.iter().enumerate() {
        pos[i] = k;
    }
    if opts.exact {
        if interior.len() > EXACT_CAP {
            return Err(LabError::Capacity(format!("{} unknowns exceed the exact cap {EXACT_CAP}", interior.len())));
        }
        let g = boundary_values.values.rational()?;
        let rows: Vec<(Vec<usize>, Vec<BigInt>)> = interior
            .iter()
            .map(|&i| {
                let mut cols = vec![pos[i]];
                let mut vals = vec![BigInt::from(graph.degree(i))];
                for j in graph.neighbours(i) {
                    if !boundary[j] {
                        cols.push(pos[j]);
                        vals.push(BigInt::from(-1));
                    }
                }
                (cols, vals)
            })
            .collect();
        let bs: Vec<Vec<Q>> = rhs
            .iter()
            .map(|r| {
                let rv = r.values.rational().expect("kind checked");
                interior
                    .iter()
                    .map(|&i| {
                        let mut b = rv[i].clone();
                        for j in graph.neighbours(i) {
                            if boundary[j] {
                                b += &g[j];
                            }
                        }
                        b
                    })
                    .collect()
            })
            .collect();
        let sols = exact::solve_exact(rows, &bs)?;
        Ok(sols
            .into_iter()
            .map(|s| {
                let mut v: Vec<Q> = g.to_vec();
                for (k, &i) in interior.iter().enumerate() {
                    v[i] = s[k].clone();
                }
                ScalarField { graph: graph.clone(), values: Values::Rational(v) }
            })
            .collect())
    } else {
        let g = boundary_values.values.float()?;
        let mut start = vec![0usize];
        let mut cols = Vec::new();
        let mut diag = Vec::with_capacity(interior.len());
        for &i in &interior {
            diag.push(graph.degree(i) as f64);
            for j in graph.neighbours(i) {
                if !boundary[j] {
                    cols.push(pos[j]);
                }
            }
            start.push(cols.len());
        }
        let op = cg::InteriorOperator { diag, start, cols };
        let mut outs = Vec::with_capacity(rhs.len());
        for r in rhs {
            let rv = r.values.float()?;
            let b: Vec<f64> =
                interior.iter().map(|&i| rv[i] + graph.neighbours(i).filter(|&j| boundary[j]).map(|j| g[j]).sum::<f64>()).collect();
            let res =
                cg::conjugate_gradient(&op, &b, opts.tolerance, opts.max_iterations, opts.preconditioner == Preconditioner::Diagonal)?;
            let mut v: Vec<f64> = (0..n).map(|i| if boundary[i] { g[i] } else { 0.0 }).collect();
            for (k, &i) in interior.iter().enumerate() {
                v[i] = res.x[k];
            }
            outs.push(ScalarField { graph: graph.clone(), values: Values::Float(v) });
        }
        Ok(outs)
    }
}

/// Solves `Δv = -rhs` with no flux across the graph's edge boundary, normalised so that
/// `Σ v = 0` on each connected component.
pub fn solve_neumann(graph: &Arc<ClusterGraph>, rhs: &ScalarField, opts: &SolveOptions) -> Result<ScalarField> {
    opts.validate()?;
    if !same_graph(graph, &rhs.graph) {
        return param("rhs lives on a different graph");
    }
    check_kind(rhs, opts, "right-hand side")?;
    let comp = graph.components();
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let n = graph.vertex_count();
    // compatibility per component
    match &rhs.values {
        Values::Rational(v) => {
            let mut sums = vec![Q::zero(); ncomp];
            for i in 0..n {
                sums[comp[i]] += &v[i];
            }
            if let Some(c) = sums.iter().position(|s| !s.is_zero()) {
                return Err(LabError::Compatibility(format!("rhs sums to {} on component {c}", sums[c])));
            }
        }
        Values::Float(v) => {
            let mut sums = vec![0.0; ncomp];
            let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            for i in 0..n {
                sums[comp[i]] += v[i];
            }
            if let Some(c) = sums.iter().position(|s| s.abs() > 1e-12 * scale) {
                return Err(LabError::Compatibility(format!("rhs sums to {:e} on component {c}", sums[c])));
            }
        }
    }
    // ground the first vertex of each component; its equation follows from compatibility
    let mut ground = vec![false; n];
    let mut seen = vec![false; ncomp];
    for i in 0..n {
        if !seen[comp[i]] {
            seen[comp[i]] = true;
            ground[i] = true;
        }
    }
    let zero = ScalarField::zeros(graph, opts.kind());
    let sol = solve_dirichlet(graph, &ground, &zero, rhs, opts)?;
    let values = match sol.values {
        Values::Rational(mut v) => {
            let mut sums = vec![Q::zero(); ncomp];
            let mut counts = vec![0i64; ncomp];
            for i in 0..n {
                sums[comp[i]] += &v[i];
                counts[comp[i]] += 1;
            }
            for i in 0..n {
                v[i] -= &sums[comp[i]] / Q::from_integer(BigInt::from(counts[comp[i]]));
            }
            Values::Rational(v)
        }
        Values::Float(mut v) => {
            let mut sums = vec![0.0; ncomp];
            let mut counts = vec![0.0; ncomp];
            for i in 0..n {
                sums[comp[i]] += v[i];
                counts[comp[i]] += 1.0;
            }
            for i in 0..n {
                v[i] -= sums[comp[i]] / counts[comp[i]];
            }
            Values::Float(v)
        }
    };
    Ok(ScalarField { graph: graph.clone(), values })
}

/// Finite-volume Green's function with pole `y`: `ΔG(·, y) = -δ_y` with zero Dirichlet
/// data on the inner boundary. In two dimensions [`GreenFunction::shifted`] subtracts
/// `G(y, y)` so the pole value is zero; `raw` keeps the unshifted solve.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub pole: Site,
    pub raw: ScalarField,
    /// Box radius of the proxy, when the graph has a box.
    pub box_radius: Option<i32>,
}

impl GreenFunction {
    pub fn pole_value(&self) -> f64 {
        self.raw.at(self.pole).unwrap_or(f64::NAN)
    }

    /// The field with the two-dimensional normalisation `G(y, y) = 0` (unchanged for d = 3).
    pub fn shifted(&self) -> ScalarField {
        if self.raw.graph.d != 2 {
            return self.raw.clone();
        }
        let i = self.raw.graph.vertex_index(self.pole).expect("pole in graph");
        let values = match &self.raw.values {
            Values::Float(v) => Values::Float(v.iter().map(|x| x - v[i]).collect()),
            Values::Rational(v) => Values::Rational(v.iter().map(|x| x - &v[i]).collect()),
        };
        ScalarField { graph: self.raw.graph.clone(), values }
    }
}

pub fn delta(graph: &Arc<ClusterGraph>, y: usize, kind: NumericKind) -> ScalarField {
    let mut f = ScalarField::zeros(graph, kind);
    match &mut f.values {
        Values::Float(v) => v[y] = 1.0,
        Values::Rational(v) => v[y] = Q::from_integer(BigInt::from(1)),
    }
    f
}

pub fn green_function(graph: &Arc<ClusterGraph>, pole: Site, opts: &SolveOptions) -> Result<GreenFunction> {
    let mut g = green_functions(graph, &[pole], opts)?;
    Ok(g.pop().expect("one pole"))
}

/// Green's functions for several poles sharing one boundary.
pub fn green_functions(graph: &Arc<ClusterGraph>, poles: &[Site], opts: &SolveOptions) -> Result<Vec<GreenFunction>> {
    let boundary = graph.boundary_mask();
    let mut rhs = Vec::new();
    for &y in poles {
        let i = graph.require(y)?;
        if boundary[i] {
            return param(format!("pole {y:?} lies on the boundary"));
        }
        rhs.push(delta(graph, i, opts.kind()));
    }
    let zero = ScalarField::zeros(graph, opts.kind());
    let sols = solve_dirichlet_multi(graph, &boundary, &zero, &rhs, opts)?;
    Ok(poles.iter().zip(sols).map(|(&pole, raw)| GreenFunction { pole, raw, box_radius: graph.region.map(|r| r.n) }).collect())
}

/// `∇u(x, y) = u(y) - u(x)` on every edge.
pub fn gradient(u: &ScalarField) -> EdgeField {
    let g = &u.graph;
    let values = match &u.values {
        Values::Float(v) => Values::Float(g.edges().iter().map(|&(a, b)| v[b] - v[a]).collect()),
        Values::Rational(v) => Values::Rational(g.edges().iter().map(|&(a, b)| &v[b] - &v[a]).collect()),
    };
    EdgeField { graph: g.clone(), values }
}

/// `(div F)(x) = Σ_{y~x} F(x, y)`.
pub fn divergence(f: &EdgeField) -> ScalarField {
    let g = &f.graph;
    let n = g.vertex_count();
    let values = match &f.values {
        Values::Float(v) => {
            let mut out = vec![0.0; n];
            for (k, &(a, b)) in g.edges().iter().enumerate() {
                out[a] += v[k];
                out[b] -= v[k];
            }
            Values::Float(out)
        }
        Values::Rational(v) => {
            let mut out = vec![Q::zero(); n];
            for (k, &(a, b)) in g.edges().iter().enumerate() {
                out[a] += &v[k];
                out[b] -= &v[k];
            }
            Values::Rational(out)
        }
    };
    ScalarField { graph: g.clone(), values }
}

/// `Σ_{(x,y) ∈ cut} (u(y) - u(x))` over oriented edges of the graph.
pub fn flux_through_edge_cut(u: &ScalarField, cut: &[(Site, Site)]) -> Result<f64> {
    let g = &u.graph;
    let mut s = 0.0;
    for &(x, y) in cut {
        let (i, j) = (g.require(x)?, g.require(y)?);
        if g.edge_between(i, j).is_none() {
            return param(format!("cut edge {x:?}-{y:?} is not an edge of the graph"));
        }
        s += u.values.get_f64(j) - u.values.get_f64(i);
    }
    Ok(s)
}

/// Exact version of [`flux_through_edge_cut`].
pub fn flux_through_edge_cut_exact(u: &ScalarField, cut: &[(Site, Site)]) -> Result<Q> {
    let g = &u.graph;
    let v = u.values.rational()?;
    let mut s = Q::zero();
    for &(x, y) in cut {
        let (i, j) = (g.require(x)?, g.require(y)?);
        if g.edge_between(i, j).is_none() {
            return param(format!("cut edge {x:?}-{y:?} is not an edge of the graph"));
        }
        s += &v[j] - &v[i];
    }
    Ok(s)
}

/// Oriented edges from `region` to its complement in the graph.
pub fn edge_boundary(graph: &ClusterGraph, region: &[bool]) -> Vec<(Site, Site)> {
    let mut out = Vec::new();
    for i in 0..graph.vertex_count() {
        if !region[i] {
            continue;
        }
        for j in graph.neighbours(i) {
            if !region[j] {
                out.push((graph.site(i), graph.site(j)));
            }
        }
    }
    out
}

/// Largest absolute value of a float field, or of the float image of a rational one.
pub fn max_abs(u: &ScalarField) -> f64 {
    match &u.values {
        Values::Float(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        Values::Rational(v) => v.iter().map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max),
    }
}
