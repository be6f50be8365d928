//! Potentials `u_f = Σ f(y) G(·, y)` of integer pole functions, their divergence form,
//! the two-scale expansion check, level sets and sensitive edges.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::field::{q, EdgeField, NumericKind, ScalarField, Values, Q};
use crate::graph::ClusterGraph;
use crate::harmonic::CorrectedPlane;
use crate::lattice::{norm2, Site};
use crate::solver::{gradient, green_function, green_functions, solve_dirichlet, solve_neumann, SolveOptions};

/// Finitely supported integer function on the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PoleFunction {
    pub support: BTreeMap<Site, i64>,
}

impl PoleFunction {
    pub fn new(entries: &[(Site, i64)]) -> PoleFunction {
        let mut support = BTreeMap::new();
        for &(x, v) in entries {
            *support.entry(x).or_insert(0) += v;
        }
        support.retain(|_, v| *v != 0);
        PoleFunction { support }
    }

    pub fn delta(z: Site) -> PoleFunction {
        Self::new(&[(z, 1)])
    }

    /// `δ_z - δ_w`.
    pub fn dipole(z: Site, w: Site) -> PoleFunction {
        Self::new(&[(z, 1), (w, -1)])
    }

    pub fn value(&self, x: Site) -> i64 {
        self.support.get(&x).copied().unwrap_or(0)
    }

    /// Smallest `(min, max)` corners enclosing the support.
    pub fn box_fit(&self) -> Option<(Site, Site)> {
        let mut it = self.support.keys();
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for x in it {
            for k in 0..3 {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        Some((lo, hi))
    }

    /// `f` restricted to the graph as a field of the requested kind.
    pub fn on_graph(&self, graph: &Arc<ClusterGraph>, kind: NumericKind) -> ScalarField {
        match kind {
            NumericKind::Float64 => ScalarField::from_fn_f64(graph, |x| self.value(x) as f64),
            NumericKind::Rational => ScalarField::from_fn_rational(graph, |x| q(self.value(x))),
        }
    }

    /// `Σ_{x ∈ graph} f(x)`.
    pub fn sum_on(&self, graph: &ClusterGraph) -> i64 {
        self.support.iter().filter(|(x, _)| graph.contains(**x)).map(|(_, v)| v).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Potential {
    pub f: PoleFunction,
    pub field: ScalarField,
    pub box_radius: i32,
    pub mean_zero_on_cluster: bool,
    /// Proxy-quality notes (poles close to the box boundary).
    pub warnings: Vec<String>,
}

/// Superposition of the raw finite-volume Green's functions: the Dirichlet solve of
/// `Δu = -f` with zero data on the inner boundary.
pub fn potential(graph: &Arc<ClusterGraph>, f: &PoleFunction, opts: &SolveOptions) -> Result<Potential> {
    let mut warnings = Vec::new();
    let box_radius = graph.region.map_or(0, |r| r.n);
    if let Some(r) = graph.region {
        for x in f.support.keys() {
            if graph.contains(*x) && r.depth(*x) < r.n - r.n / 4 {
                warnings.push(format!("pole {:?} lies outside Q_{{N/4}}", &x[..graph.d]));
            }
        }
    }
    let boundary = graph.boundary_mask();
    let mut rhs = f.on_graph(graph, opts.kind());
    // poles on the Dirichlet boundary contribute nothing
    match &mut rhs.values {
        Values::Float(v) => (0..v.len()).filter(|&i| boundary[i]).for_each(|i| v[i] = 0.0),
        Values::Rational(v) => (0..v.len()).filter(|&i| boundary[i]).for_each(|i| v[i] = Q::zero()),
    }
    let zero = ScalarField::zeros(graph, opts.kind());
    let field = if f.support.keys().any(|x| graph.vertex_index(*x).is_some_and(|i| !boundary[i])) {
        solve_dirichlet(graph, &boundary, &zero, &rhs, opts)?
    } else {
        zero
    };
    Ok(Potential { f: f.clone(), field, box_radius, mean_zero_on_cluster: f.sum_on(graph) == 0, warnings })
}

/// Smallest origin-centred radius `r` such that the largest component of the cluster
/// restricted to `Q_r` contains `supp f ∩ cluster`, with that component's vertex mask.
fn absorbing_box(graph: &ClusterGraph, f: &PoleFunction) -> Result<(i32, Vec<bool>)> {
    let poles: Vec<usize> = f.support.keys().filter_map(|x| graph.vertex_index(*x)).collect();
    let center = graph.region.map_or([0; 3], |r| r.center);
    let rmax = match graph.region {
        Some(r) => r.n,
        None => graph.vertices().iter().map(|x| (0..graph.d).map(|k| (x[k] - center[k]).abs()).max().unwrap_or(0)).max().unwrap_or(0),
    };
    let rmin = poles
        .iter()
        .map(|&i| {
            let x = graph.site(i);
            (0..graph.d).map(|k| (x[k] - center[k]).abs()).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    for r in rmin.max(1)..=rmax {
        let inside: Vec<bool> = graph.vertices().iter().map(|x| (0..graph.d).all(|k| (x[k] - center[k]).abs() <= r)).collect();
        let sub = graph.induced(&inside)?;
        let comp = sub.components();
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &comp {
            *sizes.entry(c).or_insert(0) += 1;
        }
        let best = sizes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(c, _)| *c);
        let Some(best) = best else { continue };
        let mut mask = vec![false; graph.vertex_count()];
        for (k, &c) in comp.iter().enumerate() {
            if c == best {
                mask[graph.vertex_index(sub.site(k)).expect("sub-vertex")] = true;
            }
        }
        if poles.iter().all(|&i| mask[i]) {
            return Ok((r, mask));
        }
    }
    param("support of f is not absorbed by any box inside the region")
}

/// Compactly supported `F = ∇w` with `div F = f`, where `w` solves the Neumann problem on
/// the cluster of the smallest absorbing box.
pub fn divergence_representation(graph: &Arc<ClusterGraph>, f: &PoleFunction, opts: &SolveOptions) -> Result<EdgeField> {
    let kind = opts.kind();
    if f.sum_on(graph) != 0 {
        return Err(LabError::Compatibility(format!("Σ f = {} on the cluster", f.sum_on(graph))));
    }
    if f.support.keys().all(|x| !graph.contains(*x)) {
        return Ok(EdgeField::zeros_like(graph, kind));
    }
    let (_, mask) = absorbing_box(graph, f)?;
    let sub = Arc::new(graph.induced(&mask)?);
    let neg = f.on_graph(&sub, kind);
    let rhs = match neg.values {
        Values::Float(v) => ScalarField::from_f64(&sub, v.into_iter().map(|x| -x).collect())?,
        Values::Rational(v) => ScalarField::from_rational(&sub, v.into_iter().map(|x| -x).collect())?,
    };
    let w = solve_neumann(&sub, &rhs, opts)?;
    let gw = gradient(&w);
    let mut out = EdgeField::zeros_like(graph, kind);
    for (k, &(a, b)) in sub.edges().iter().enumerate() {
        let (x, y) = (sub.site(a), sub.site(b));
        let e = graph.edge_between_sites(x, y).expect("sub-edge");
        // both graphs order vertices lexicographically, so orientations agree
        match (&mut out.values, &gw.values) {
            (Values::Float(o), Values::Float(v)) => o[e] = v[k],
            (Values::Rational(o), Values::Rational(v)) => o[e] = v[k].clone(),
            _ => unreachable!("kinds agree"),
        }
    }
    Ok(out)
}

/// `u_f(x) = -Σ_{(y,z)} F(y,z) (G(x,z) - G(x,y))` at each point, using `G(x, ·) = G(·, x)`.
pub fn gradient_representation(field: &EdgeField, points: &[Site], opts: &SolveOptions) -> Result<Vec<f64>> {
    let g = &field.graph;
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let gx = green_function(g, x, opts)?;
        let v = gx.raw.to_f64();
        let mut s = 0.0;
        for (k, &(a, b)) in g.edges().iter().enumerate() {
            let fk = field.values.get_f64(k);
            if fk != 0.0 {
                s -= fk * (v[b] - v[a]);
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Exact version of [`gradient_representation`].
pub fn gradient_representation_exact(field: &EdgeField, points: &[Site]) -> Result<Vec<Q>> {
    let g = &field.graph;
    let fv = field.values.rational()?;
    let gs = green_functions(g, points, &SolveOptions::exact())?;
    Ok(gs
        .iter()
        .map(|gx| {
            let v = gx.raw.values.rational().expect("exact");
            let mut s = Q::zero();
            for (k, &(a, b)) in g.edges().iter().enumerate() {
                if !fv[k].is_zero() {
                    s -= &fv[k] * (&v[b] - &v[a]);
                }
            }
            s
        })
        .collect())
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-slope of `G(0,0) - G(x,0)` for cluster points with `4 <= |x| <= N/4`, from the raw
/// Green proxy with pole at the box centre.
pub fn green_log_slope(graph: &Arc<ClusterGraph>, opts: &SolveOptions) -> Result<f64> {
    let r = graph.region.ok_or_else(|| LabError::Parameter("Green slope needs a box cluster".into()))?;
    if graph.d != 2 {
        return param("Green slope fit needs d = 2");
    }
    let gf = green_function(graph, r.center, opts)?;
    let g0 = gf.pole_value();
    let hi = r.n as f64 / 4.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, &x) in graph.vertices().iter().enumerate() {
        let d = norm2(crate::lattice::sub(x, r.center));
        if (4.0..=hi).contains(&d) {
            xs.push(d.ln());
            ys.push(g0 - gf.raw.values.get_f64(i));
        }
    }
    if xs.len() < 2 {
        return param("box too small for a Green slope fit");
    }
    Ok(ls_slope(&xs, &ys))
}

/// `κ = 2π × log-slope`, the multiple of the continuum Green's function matched by the proxy.
pub fn fit_kappa(graph: &Arc<ClusterGraph>, opts: &SolveOptions) -> Result<f64> {
    Ok(2.0 * PI * green_log_slope(graph, opts)?)
}

/// Pole gradient `∇_{Y'} G` of the Dirichlet Green's function of `-Δ` on `(0,a)^2`,
/// expanded in sines of the second coordinate.
fn square_series(a: f64, x: f64, y: f64, xp: f64, yp: f64) -> [f64; 2] {
    let (lo, hi) = if x < xp { (x, xp) } else { (xp, x) };
    let mut dx = 0.0;
    let mut dy = 0.0;
    for n in 1..=2000 {
        let k = n as f64 * PI / a;
        let decay = (-k * (hi - lo)).exp();
        if decay < 1e-18 && n > 4 {
            break;
        }
        let den = 1.0 - (-2.0 * k * a).exp();
        let g = decay * (1.0 - (-2.0 * k * lo).exp()) * (1.0 - (-2.0 * k * (a - hi)).exp()) / (2.0 * k * den);
        let dg = if x >= xp {
            decay * (1.0 + (-2.0 * k * xp).exp()) * (1.0 - (-2.0 * k * (a - x)).exp()) / (2.0 * den)
        } else {
            -decay * (1.0 - (-2.0 * k * x).exp()) * (1.0 + (-2.0 * k * (a - xp)).exp()) / (2.0 * den)
        };
        let sy = (k * y).sin();
        dx += 2.0 / a * sy * (k * yp).sin() * dg;
        dy += 2.0 / a * sy * k * (k * yp).cos() * g;
    }
    [dx, dy]
}

/// Gradient in the pole `y` of the continuum Dirichlet Green's function of the square
/// `[-n, n]^2`, evaluated at `(x, y)`.
pub fn square_green_pole_gradient(n: f64, x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    let a = 2.0 * n;
    let (px, py, qx, qy) = (x[0] + n, x[1] + n, y[0] + n, y[1] + n);
    if (px - qx).abs() >= (py - qy).abs() {
        square_series(a, px, py, qx, qy)
    } else {
        let [d1, d0] = square_series(a, py, px, qy, qx);
        [d0, d1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoScaleRow {
    pub radius: i32,
    pub points: usize,
    pub mean_abs_error: f64,
    pub mean_abs_prediction: f64,
    pub mean_value: f64,
    /// Fraction of points with `u_f(x) · sign(c·direction) > 0`.
    pub sign_agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoScaleTable {
    pub box_radius: i32,
    pub kappa: f64,
    /// `c_i = Σ_y f(y) ℓ_{e_i}(y)`.
    pub c: [f64; 2],
    pub rows: Vec<TwoScaleRow>,
}

impl TwoScaleTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,points,mean_abs_error,mean_abs_prediction,mean_value,sign_agreement\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:?},{:?},{:?},{:?}",
                r.radius, r.points, r.mean_abs_error, r.mean_abs_prediction, r.mean_value, r.sign_agreement
            );
        }
        s
    }
}

/// Compares `u_f` with `Σ_i c_i ∂_{y_i} Ḡ(x, 0)` at cluster points near the ray
/// `{t·direction}`, where `Ḡ = κ ×` the continuum Green's function of the box.
pub fn two_scale_check(
    pot: &Potential,
    planes: [&CorrectedPlane; 2],
    direction: [f64; 2],
    radii: &[i32],
    kappa: f64,
) -> Result<TwoScaleTable> {
    let g = &pot.field.graph;
    if g.d != 2 {
        return param("two-scale check needs d = 2");
    }
    let region = g.region.ok_or_else(|| LabError::Parameter("two-scale check needs a box cluster".into()))?;
    if !pot.mean_zero_on_cluster {
        return param("two-scale check needs Σ f = 0 on the cluster");
    }
    let len = (direction[0].powi(2) + direction[1].powi(2)).sqrt();
    if len == 0.0 {
        return param("direction must be nonzero");
    }
    let dir = [direction[0] / len, direction[1] / len];
    for &r in radii {
        if 4 * r > region.n {
            return param(format!("radius {r} exceeds N/4: the ray leaves the trusted part of the box"));
        }
    }
    let mut c = [0.0; 2];
    for (i, plane) in planes.iter().enumerate() {
        for (x, v) in &pot.f.support {
            if let Some(l) = plane.field.at(*x) {
                c[i] += *v as f64 * l;
            }
        }
    }
    let cdir = c[0] * dir[0] + c[1] * dir[1];
    let n = region.n as f64;
    let mut rows = Vec::new();
    for &r in radii {
        let (mut err, mut pred_sum, mut val_sum, mut agree, mut count) = (0.0, 0.0, 0.0, 0usize, 0usize);
        for (i, &x) in g.vertices().iter().enumerate() {
            let p = [(x[0] - region.center[0]) as f64, (x[1] - region.center[1]) as f64];
            let along = p[0] * dir[0] + p[1] * dir[1];
            let perp = (p[0] * dir[1] - p[1] * dir[0]).abs();
            if perp > 1.0 || (along - r as f64).abs() > 1.0 {
                continue;
            }
            let grad = square_green_pole_gradient(n, p, [0.0, 0.0]);
            let pred = kappa * (c[0] * grad[0] + c[1] * grad[1]);
            let u = pot.field.values.get_f64(i);
            err += (u - pred).abs();
            pred_sum += pred.abs();
            val_sum += u;
            if u * cdir.signum() > 0.0 {
                agree += 1;
            }
            count += 1;
        }
        let m = count.max(1) as f64;
        rows.push(TwoScaleRow {
            radius: r,
            points: count,
            mean_abs_error: err / m,
            mean_abs_prediction: pred_sum / m,
            mean_value: val_sum / m,
            sign_agreement: agree as f64 / m,
        });
    }
    Ok(TwoScaleTable { box_radius: region.n, kappa, c, rows })
}

/// `{x : |u_f(x) - a| <= tol}`.
pub fn level_set(pot: &Potential, a: f64, tol: f64) -> Result<Vec<Site>> {
    if !(tol >= 0.0) {
        return param("tolerance must be nonnegative");
    }
    let g = &pot.field.graph;
    Ok((0..g.vertex_count()).filter(|&i| (pot.field.values.get_f64(i) - a).abs() <= tol).map(|i| g.site(i)).collect())
}

/// `{x : u_f(x) = a}` in exact arithmetic.
pub fn level_set_exact(pot: &Potential, a: &Q) -> Result<Vec<Site>> {
    let g = &pot.field.graph;
    let v = pot.field.values.rational()?;
    Ok((0..g.vertex_count()).filter(|&i| &v[i] == a).map(|i| g.site(i)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitiveEdges {
    pub edges: Vec<(Site, Site)>,
    /// `(k, |sensitive edges inside B_{2^k}| / |B_{2^k} ∩ Z^d|)`.
    pub densities: Vec<(u32, f64)>,
}

impl SensitiveEdges {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x1,y1,x2,y2\n");
        for (a, b) in &self.edges {
            let _ = writeln!(s, "{},{},{},{}", a[0], a[1], b[0], b[1]);
        }
        s
    }
}

fn lattice_points_in_ball(d: usize, r: f64) -> usize {
    let m = r.floor() as i64;
    let mut count = 0usize;
    if d == 2 {
        for x in -m..=m {
            let h = (r * r - (x * x) as f64).max(0.0).sqrt().floor() as i64;
            count += (2 * h + 1) as usize;
        }
    } else {
        for x in -m..=m {
            for y in -m..=m {
                let s = r * r - (x * x + y * y) as f64;
                if s >= 0.0 {
                    count += (2 * s.sqrt().floor() as i64 + 1) as usize;
                }
            }
        }
    }
    count
}

/// Edges where both `|∇u_f|` and `|∇ℓ|` exceed `tol`, with densities on dyadic balls.
pub fn sensitive_edges(pot: &Potential, plane: &CorrectedPlane, tol: f64) -> Result<SensitiveEdges> {
    let g = &pot.field.graph;
    if !crate::field::same_graph(g, &plane.graph) {
        return param("potential and plane live on different graphs");
    }
    let gu = gradient(&pot.field);
    let gl = gradient(&plane.field);
    let center = g.region.map_or([0; 3], |r| r.center);
    let mut edges = Vec::new();
    for (k, &(a, b)) in g.edges().iter().enumerate() {
        if gu.values.get_f64(k).abs() > tol && gl.values.get_f64(k).abs() > tol {
            edges.push((g.site(a), g.site(b)));
        }
    }
    let rmax = g.region.map_or(0, |r| r.n);
    let mut densities = Vec::new();
    let mut k = 0u32;
    while (1i64 << k) <= rmax as i64 {
        let r = (1i64 << k) as f64;
        let inside = |x: Site| norm2(crate::lattice::sub(x, center)) <= r;
        let cnt = edges.iter().filter(|(a, b)| inside(*a) && inside(*b)).count();
        densities.push((k, cnt as f64 / lattice_points_in_ball(g.d, r) as f64));
        k += 1;
    }
    Ok(SensitiveEdges { edges, densities })
}

/// CSV of coordinates, header `x1,...,xd`.
pub fn sites_csv(d: usize, sites: &[Site]) -> String {
    let mut s = (1..=d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for x in sites {
        s += &x[..d].iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        s.push('\n');
    }
    s
}

/// Level sets partition the vertices: `(value, size)` for every distinct exact value.
pub fn level_set_partition(pot: &Potential) -> Result<Vec<(Q, usize)>> {
    let v = pot.field.values.rational()?;
    let mut m: BTreeMap<Q, usize> = BTreeMap::new();
    for x in v {
        *m.entry(x.clone()).or_insert(0) += 1;
    }
    Ok(m.into_iter().collect())
}

/// Least-squares decay exponent of `|u_f|` along the positive `e_1` axis over `[lo, hi]`.
pub fn axis_decay_exponent(pot: &Potential, lo: i32, hi: i32) -> Result<f64> {
    let g = &pot.field.graph;
    let c = g.region.map_or([0; 3], |r| r.center);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in lo..=hi {
        let x = [c[0] + t, c[1], c[2]];
        if let Some(v) = pot.field.at(x) {
            if v != 0.0 {
                xs.push((t as f64).ln());
                ys.push(v.abs().ln());
            }
        }
    }
    if xs.len() < 2 {
        return param("not enough axis points for a decay fit");
    }
    Ok(-ls_slope(&xs, &ys))
}
