//! Corrected planes, correctors, fluxes, edge-flip sensitivity and harmonic embeddings.

use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::field::{EdgeField, ScalarField, Values, Q};
use crate::graph::ClusterGraph;
use crate::lattice::{add, norm2, sub, unit, Edge, Site};
use crate::percolation::PercolationSample;
use crate::solver::{gradient, green_functions, solve_dirichlet, SolveOptions};

/// Harmonic function on the cluster with affine data `p·x` on its inner boundary.
#[derive(Debug, Clone)]
pub struct CorrectedPlane {
    pub graph: Arc<ClusterGraph>,
    pub slope: Vec<f64>,
    pub field: ScalarField,
    /// Radius of the box the proxy lives in (0 when the graph has no box).
    pub box_radius: i32,
}

fn dot(p: &[f64], x: Site) -> f64 {
    p.iter().enumerate().map(|(k, v)| v * x[k] as f64).sum()
}

fn dot_exact(p: &[Q], x: Site) -> Q {
    let mut s = Q::zero();
    for (k, v) in p.iter().enumerate() {
        s += v * Q::from_integer(x[k].into());
    }
    s
}

fn exact_slope(slope: &[f64]) -> Result<Vec<Q>> {
    slope.iter().map(|&v| Q::from_float(v).ok_or_else(|| LabError::Parameter(format!("slope entry {v} is not finite")))).collect()
}

pub fn corrected_plane(graph: &Arc<ClusterGraph>, slope: &[f64], opts: &SolveOptions) -> Result<CorrectedPlane> {
    if slope.len() != graph.d {
        return param(format!("slope has {} entries for dimension {}", slope.len(), graph.d));
    }
    if slope.iter().all(|v| *v == 0.0) {
        return param("slope must be nonzero");
    }
    let boundary = graph.boundary_mask();
    if !boundary.iter().any(|&b| b) {
        return Err(LabError::IllPosed("cluster does not touch its box boundary".into()));
    }
    let (bv, rhs) = if opts.exact {
        let p = exact_slope(slope)?;
        (ScalarField::from_fn_rational(graph, |x| dot_exact(&p, x)), ScalarField::zeros(graph, crate::field::NumericKind::Rational))
    } else {
        (ScalarField::from_fn_f64(graph, |x| dot(slope, x)), ScalarField::zeros(graph, crate::field::NumericKind::Float64))
    };
    let field = solve_dirichlet(graph, &boundary, &bv, &rhs, opts)?;
    Ok(CorrectedPlane { graph: graph.clone(), slope: slope.to_vec(), field, box_radius: graph.region.map_or(0, |r| r.n) })
}

/// `χ_p = ℓ_p - p·x`.
pub fn corrector(plane: &CorrectedPlane) -> ScalarField {
    let g = &plane.graph;
    let values = match &plane.field.values {
        Values::Float(v) => Values::Float(g.vertices().iter().zip(v).map(|(&x, l)| l - dot(&plane.slope, x)).collect()),
        Values::Rational(v) => {
            let p = exact_slope(&plane.slope).expect("finite slope");
            Values::Rational(g.vertices().iter().zip(v).map(|(&x, l)| l - dot_exact(&p, x)).collect())
        }
    };
    ScalarField { graph: g.clone(), values }
}

/// `sup w - inf w` over the vertices selected by `region`.
pub fn oscillation(u: &ScalarField, region: impl Fn(Site) -> bool) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &x) in u.graph.vertices().iter().enumerate() {
        if region(x) {
            let v = u.values.get_f64(i);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return param("region does not meet the graph");
    }
    Ok(hi - lo)
}

/// Euclidean ball `|x - c| <= r`.
pub fn ball(center: Site, r: f64) -> impl Fn(Site) -> bool {
    move |x| norm2(sub(x, center)) <= r
}

/// `max_e |∇u(e)|`.
pub fn lipschitz_constant(u: &ScalarField) -> f64 {
    gradient(u).max_abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectorStats {
    pub box_radius: i32,
    pub radii: Vec<i32>,
    pub osc: Vec<f64>,
    pub max_grad: Vec<f64>,
}

impl CorrectorStats {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,osc,maxgrad\n");
        for k in 0..self.radii.len() {
            let _ = writeln!(s, "{},{:?},{:?}", self.radii[k], self.osc[k], self.max_grad[k]);
        }
        s
    }
}

/// Oscillation of the corrector and largest plane gradient over `B_r` around the box centre.
pub fn corrector_stats(plane: &CorrectedPlane, radii: &[i32]) -> Result<CorrectorStats> {
    let mut rs = radii.to_vec();
    rs.sort_unstable();
    if let Some(&r) = rs.last() {
        if plane.box_radius > 0 && 2 * r > plane.box_radius {
            return param(format!("radius {r} exceeds half the box radius {}", plane.box_radius));
        }
    }
    let center = plane.graph.region.map_or([0; 3], |r| r.center);
    let chi = corrector(plane);
    let grad = gradient(&plane.field);
    let g = &plane.graph;
    let mut osc = Vec::new();
    let mut max_grad = Vec::new();
    for &r in &rs {
        let inside = ball(center, r as f64);
        osc.push(oscillation(&chi, &inside)?);
        let mut m: f64 = 0.0;
        for (k, &(a, b)) in g.edges().iter().enumerate() {
            if inside(g.site(a)) && inside(g.site(b)) {
                m = m.max(grad.values.get_f64(k).abs());
            }
        }
        max_grad.push(m);
    }
    Ok(CorrectorStats { box_radius: plane.box_radius, radii: rs, osc, max_grad })
}

/// Left-face flux of the plane with slope `e_1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxEstimate {
    pub box_radius: i32,
    /// Mean over the `(2N+1)^{d-1}` left-face sites of `∇ℓ(x, x+e_1) 1{edge open}`; estimates `ā`.
    pub per_site: f64,
    /// `Σ_left ∇ℓ 1{open} / N^{d-1}`.
    pub per_n: f64,
    /// Mean over open left-face edges (1 on the full lattice).
    pub per_open_edge: f64,
    pub open_edges: usize,
    /// Net `e_2` flux through the two transverse faces, per face site.
    pub transverse: f64,
}

fn face_sites(region: &crate::lattice::BoxRegion, axis: usize, value: i32) -> Vec<Site> {
    region.sites().filter(|x| x[axis] - region.center[axis] == value).collect()
}

pub fn homogenized_flux(plane: &CorrectedPlane) -> Result<FluxEstimate> {
    let g = &plane.graph;
    let region = g.region.ok_or_else(|| LabError::Parameter("flux needs a box cluster".into()))?;
    if plane.slope.iter().enumerate().any(|(k, &v)| v != if k == 0 { 1.0 } else { 0.0 }) {
        return param("flux estimator expects the slope e_1");
    }
    let n = region.n;
    let d = g.d;
    let diff = |x: Site, y: Site| -> Option<f64> {
        let (i, j) = (g.vertex_index(x)?, g.vertex_index(y)?);
        g.edge_between(i, j)?;
        Some(plane.field.values.get_f64(j) - plane.field.values.get_f64(i))
    };
    let left = face_sites(&region, 0, -n);
    let mut total = 0.0;
    let mut open = 0usize;
    for &x in &left {
        if let Some(v) = diff(x, add(x, unit(0))) {
            total += v;
            open += 1;
        }
    }
    let mut transverse = 0.0;
    let e2 = unit(1);
    let bottom = face_sites(&region, 1, -n);
    let top = face_sites(&region, 1, n);
    for &x in &bottom {
        transverse += diff(x, add(x, e2)).unwrap_or(0.0);
    }
    for &x in &top {
        transverse += diff(sub(x, e2), x).unwrap_or(0.0);
    }
    let face = left.len() as f64;
    Ok(FluxEstimate {
        box_radius: n,
        per_site: total / face,
        per_n: total / (n as f64).powi(d as i32 - 1),
        per_open_edge: if open > 0 { total / open as f64 } else { 0.0 },
        open_edges: open,
        transverse: transverse / (bottom.len() + top.len()) as f64,
    })
}

/// Both sides of `∇ℓ - ∇ℓ' = Σ_{(x,y) ∈ B} ∇ℓ'(x,y) ∇(G(·,x) - G(·,y))` on the edges of the
/// original cluster, where `ℓ'` is the plane after deleting `B`.
#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub removed: Vec<Edge>,
    pub left: EdgeField,
    pub right: EdgeField,
    pub max_abs_discrepancy: f64,
    pub box_radius: i32,
}

pub fn edge_flip_sensitivity(graph: &Arc<ClusterGraph>, removed: &[Edge], slope: &[f64], opts: &SolveOptions) -> Result<SensitivityReport> {
    if opts.exact {
        return Err(LabError::Kind("sensitivity check runs in float mode".into()));
    }
    let reduced = Arc::new(graph.without_edges(removed)?);
    if !reduced.is_connected() {
        return Err(LabError::Topology("removing the edge set disconnects the cluster".into()));
    }
    let plane = corrected_plane(graph, slope, opts)?;
    let plane2 = corrected_plane(&reduced, slope, opts)?;
    // ℓ' transported to the original graph (same vertex list)
    let l2 = ScalarField::from_f64(graph, plane2.field.values.float()?.to_vec())?;
    let gl = gradient(&plane.field);
    let gl2 = gradient(&l2);
    let left: Vec<f64> = gl.values.float()?.iter().zip(gl2.values.float()?).map(|(a, b)| a - b).collect();

    let boundary = graph.boundary_mask();
    let mut poles = Vec::new();
    for e in removed {
        for x in [e.a, e.b] {
            if !boundary[graph.require(x)?] && !poles.contains(&x) {
                poles.push(x);
            }
        }
    }
    let greens = green_functions(graph, &poles, opts)?;
    let green_of = |x: Site| greens.iter().find(|g| g.pole == x).map(|g| g.raw.values.float().expect("float"));
    let n = graph.vertex_count();
    let mut w = vec![0.0; n];
    for e in removed {
        let c = l2.at(e.b).expect("vertex") - l2.at(e.a).expect("vertex");
        if let Some(gx) = green_of(e.a) {
            for i in 0..n {
                w[i] += c * gx[i];
            }
        }
        if let Some(gy) = green_of(e.b) {
            for i in 0..n {
                w[i] -= c * gy[i];
            }
        }
    }
    let right_field = ScalarField::from_f64(graph, w)?;
    let right = gradient(&right_field);
    let disc = left.iter().zip(right.values.float()?).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(SensitivityReport {
        removed: removed.to_vec(),
        left: EdgeField::new(graph, Values::Float(left))?,
        right,
        max_abs_discrepancy: disc,
        box_radius: plane.box_radius,
    })
}

/// Up to `count` edges with both endpoints interior and within sup-distance `radius` of the
/// box centre, nearest first, whose joint removal keeps the graph connected.
pub fn removable_edges(g: &ClusterGraph, count: usize, radius: i32) -> Result<Vec<Edge>> {
    let c = g.region.map_or([0; 3], |r| r.center);
    let dist = |x: Site| sub(x, c).iter().map(|v| v.abs()).max().unwrap_or(0);
    let mut cand: Vec<(i32, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| g.tag(a).interior() && g.tag(b).interior())
        .map(|(k, &(a, b))| (dist(g.site(a)).max(dist(g.site(b))), k))
        .filter(|&(r, _)| r <= radius)
        .collect();
    cand.sort_unstable();
    let mut chosen = Vec::new();
    for (_, k) in cand {
        if chosen.len() == count {
            break;
        }
        let (a, b) = g.edges()[k];
        let mut trial = chosen.clone();
        trial.push(Edge::new(g.site(a), g.site(b))?);
        if g.without_edges(&trial)?.is_connected() {
            chosen = trial;
        }
    }
    Ok(chosen)
}

/// `∇_x ∇_y G(e', e) = G(x2,y2) - G(x1,y2) - G(x2,y1) + G(x1,y1)` for `e = (y1,y2)`,
/// `e' = (x1,x2)`, from the raw finite-volume Green proxy.
pub fn mixed_green_difference(graph: &Arc<ClusterGraph>, e: (Site, Site), e_prime: (Site, Site), opts: &SolveOptions) -> Result<f64> {
    for (x, y) in [e, e_prime] {
        let (i, j) = (graph.require(x)?, graph.require(y)?);
        if graph.edge_between(i, j).is_none() {
            return param(format!("{x:?}-{y:?} is not an edge of the graph"));
        }
    }
    if let Some(r) = graph.region {
        let margin = r.n / 4;
        for z in [e.0, e.1, e_prime.0, e_prime.1] {
            if r.depth(z) < margin {
                return param(format!("{z:?} lies within N/4 of the box boundary"));
            }
        }
    }
    let gs = green_functions(graph, &[e.0, e.1], opts)?;
    let at = |k: usize, x: Site| gs[k].raw.at(x).expect("vertex");
    Ok(at(1, e_prime.1) - at(1, e_prime.0) - at(0, e_prime.1) + at(0, e_prime.0))
}

/// Vertex positions `(ℓ_{e1}(x), ℓ_{e2}(x))` of the harmonic embedding.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub graph: Arc<ClusterGraph>,
    pub coords: Vec<[f64; 2]>,
}

pub fn harmonic_embedding(graph: &Arc<ClusterGraph>, opts: &SolveOptions) -> Result<Embedding> {
    if graph.d != 2 {
        return param("harmonic embedding needs d = 2");
    }
    let px = corrected_plane(graph, &[1.0, 0.0], opts)?.field.to_f64();
    let py = corrected_plane(graph, &[0.0, 1.0], opts)?.field.to_f64();
    Ok(Embedding { graph: graph.clone(), coords: px.into_iter().zip(py).map(|(a, b)| [a, b]).collect() })
}

impl Embedding {
    pub fn position(&self, x: Site) -> Option<[f64; 2]> {
        self.graph.vertex_index(x).map(|i| self.coords[i])
    }
}

fn svg_layer(out: &mut String, emb: &Embedding, name: &str, colour: &str, n: f64) {
    let _ = writeln!(out, "<g id=\"{name}\" stroke=\"{colour}\" stroke-width=\"0.15\" fill=\"none\">");
    for &(a, b) in emb.graph.edges() {
        let (p, q) = (emb.coords[a], emb.coords[b]);
        let _ = writeln!(out, "<polyline points=\"{:.4},{:.4} {:.4},{:.4}\"/>", p[0] + n, n - p[1], q[0] + n, n - q[1]);
    }
    out.push_str("</g>\n");
}

/// SVG drawing with one polyline per edge; the optional second embedding is drawn as a
/// separate layer named `flipped`.
pub fn embedding_svg(base: &Embedding, flipped: Option<&Embedding>) -> String {
    let n = base.graph.region.map_or(10, |r| r.n) as f64 + 1.0;
    let mut s = String::new();
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {0}\" width=\"800\" height=\"800\">", 2.0 * n);
    svg_layer(&mut s, base, "base", "#1f4e9c", n);
    if let Some(f) = flipped {
        svg_layer(&mut s, f, "flipped", "#c0392b", n);
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct FlipReport {
    pub flipped: Edge,
    pub max_displacement: f64,
    /// `(inner radius, median displacement)` over dyadic annuli around the flipped edge.
    pub annulus_medians: Vec<(f64, f64)>,
}

/// Closes `edge`, re-solves the embedding and measures vertex displacements.
pub fn embedding_flip(sample: &PercolationSample, edge: Edge, opts: &SolveOptions) -> Result<(Embedding, Embedding, FlipReport)> {
    let g = Arc::new(sample.largest_cluster()?);
    let flipped = sample.modify_edges(&[(edge, !sample.is_open(&edge))])?;
    let g2 = Arc::new(flipped.largest_cluster()?);
    let base = harmonic_embedding(&g, opts)?;
    let after = harmonic_embedding(&g2, opts)?;
    let mid = [(edge.a[0] + edge.b[0]) as f64 / 2.0, (edge.a[1] + edge.b[1]) as f64 / 2.0];
    let mut pairs = Vec::new();
    let mut max_d: f64 = 0.0;
    for (i, &x) in g.vertices().iter().enumerate() {
        if let Some(q) = after.position(x) {
            let p = base.coords[i];
            let disp = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let dist = ((x[0] as f64 - mid[0]).powi(2) + (x[1] as f64 - mid[1]).powi(2)).sqrt();
            max_d = max_d.max(disp);
            pairs.push((dist, disp));
        }
    }
    let mut medians = Vec::new();
    let mut lo = 1.0;
    let rmax = g.region.map_or(0, |r| r.n) as f64;
    while lo < rmax {
        let mut v: Vec<f64> = pairs.iter().filter(|(d, _)| *d >= lo && *d < 2.0 * lo).map(|p| p.1).collect();
        if !v.is_empty() {
            v.sort_by(|a, b| a.total_cmp(b));
            medians.push((lo, v[v.len() / 2]));
        }
        lo *= 2.0;
    }
    Ok((base, after, FlipReport { flipped: edge, max_displacement: max_d, annulus_medians: medians }))
}
