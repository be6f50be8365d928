//! Seeded bond percolation on boxes, largest-cluster extraction and connectivity diagnostics.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError, Result};
use crate::graph::ClusterGraph;
use crate::lattice::{add, unit, BoxRegion, Edge, Site};

/// Bernoulli(p) state of an edge from a counter-based stream keyed by `(seed, edge)`.
pub fn edge_draw(seed: u64, p: f64, e: &Edge) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(e.code());
    rng.gen::<f64>() < p
}

/// Child seed for replicate `index` of a run keyed by `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_c41d);
    rng.set_stream(index.wrapping_add(1));
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercolationSample {
    pub region: BoxRegion,
    pub p: f64,
    pub seed: u64,
    base: Vec<bool>,
    overrides: BTreeMap<Edge, bool>,
}

pub fn sample_percolation(region: BoxRegion, p: f64, seed: u64) -> Result<PercolationSample> {
    if !(p > 0.0 && p <= 1.0) {
        return param(format!("p = {p} outside (0,1]"));
    }
    let d = region.d;
    let mut base = vec![false; region.vertex_count() * d];
    for (i, x) in region.sites().enumerate() {
        for k in 0..d {
            let y = add(x, unit(k));
            if region.contains(y) {
                base[i * d + k] = edge_draw(seed, p, &Edge { a: x, b: y });
            }
        }
    }
    Ok(PercolationSample { region, p, seed, base, overrides: BTreeMap::new() })
}

impl PercolationSample {
    /// State of any lattice edge. Edges leaving the box are drawn from the same stream.
    pub fn is_open(&self, e: &Edge) -> bool {
        if let Some(&s) = self.overrides.get(e) {
            return s;
        }
        match self.region.index(e.a) {
            Some(i) if self.region.contains(e.b) => self.base[i * self.region.d + e.axis()],
            _ => edge_draw(self.seed, self.p, e),
        }
    }

    /// State drawn before overrides.
    pub fn sampled_state(&self, e: &Edge) -> bool {
        match self.region.index(e.a) {
            Some(i) if self.region.contains(e.b) => self.base[i * self.region.d + e.axis()],
            _ => edge_draw(self.seed, self.p, e),
        }
    }

    pub fn overrides(&self) -> &BTreeMap<Edge, bool> {
        &self.overrides
    }

    /// Open edges inside the region in lexicographic order.
    pub fn open_edges(&self) -> Vec<Edge> {
        self.region.edges().into_iter().filter(|e| self.is_open(e)).collect()
    }

    pub fn open_count(&self) -> usize {
        self.open_edges().len()
    }

    pub fn edge_count(&self) -> usize {
        self.region.edges().len()
    }

    /// Returns a new sample with the edits recorded as overrides.
    pub fn modify_edges(&self, edits: &[(Edge, bool)]) -> Result<PercolationSample> {
        for (e, _) in edits {
            if !self.region.contains_edge(e) {
                return param(format!("edge {e:?} outside region"));
            }
        }
        let mut out = self.clone();
        for &(e, s) in edits {
            out.overrides.insert(e, s);
        }
        Ok(out)
    }

    /// Copies the states of the half `x_2 >= c_2` onto their mirror images under
    /// `x_2 -> 2c_2 - x_2`, giving an environment symmetric about the axis through the centre.
    pub fn mirrored(&self) -> Result<PercolationSample> {
        if self.region.d != 2 {
            return param("mirroring is planar");
        }
        let c = self.region.center[1];
        let flip = |x: Site| [x[0], 2 * c - x[1], x[2]];
        let edits: Vec<(Edge, bool)> = self
            .region
            .edges()
            .into_iter()
            .filter(|e| e.a[1].min(e.b[1]) < c)
            .map(|e| Ok((e, self.is_open(&Edge::new(flip(e.a), flip(e.b))?))))
            .collect::<Result<_>>()?;
        self.modify_edges(&edits)
    }

    /// Largest open cluster `C_*(Q_N)`; ties broken by the smaller minimal vertex.
    pub fn largest_cluster(&self) -> Result<ClusterGraph> {
        self.largest_cluster_in(&self.region)
    }

    /// Largest open cluster using only edges inside `sub`, with boundary tags of `sub`.
    pub fn largest_cluster_in(&self, sub: &BoxRegion) -> Result<ClusterGraph> {
        if !self.region.contains_box(sub) {
            return param("sub-box outside the sample region");
        }
        let (label, best) = largest_component(self, sub);
        let best = best.ok_or(LabError::EmptyCluster)?;
        let mut sites = Vec::new();
        for (i, x) in sub.sites().enumerate() {
            if label[i] == best {
                sites.push(x);
            }
        }
        let mut edges = Vec::new();
        for &x in &sites {
            for k in 0..sub.d {
                let y = add(x, unit(k));
                if sub.contains(y) && self.is_open(&Edge { a: x, b: y }) {
                    edges.push((x, y));
                }
            }
        }
        let mut g = ClusterGraph::build(sub.d, Some(*sub), sites, &edges)?;
        let ext = (0..g.vertex_count())
            .map(|i| {
                let x = g.site(i);
                crate::lattice::neighbours(x, sub.d)
                    .filter(|&y| !sub.contains(y))
                    .filter(|&y| self.is_open(&Edge::new(x, y).expect("lattice neighbours")))
                    .count() as u32
            })
            .collect();
        g.set_exterior(ext);
        Ok(g)
    }

    /// For each axis, whether the two opposite faces of `sub` are joined inside its largest cluster.
    pub fn crossing_directions(&self, sub: &BoxRegion) -> Result<Vec<bool>> {
        if !self.region.contains_box(sub) {
            return param("subcube outside the sample region");
        }
        let g = match self.largest_cluster_in(sub) {
            Ok(g) => g,
            Err(LabError::EmptyCluster) => return Ok(vec![false; sub.d]),
            Err(e) => return Err(e),
        };
        Ok((0..sub.d)
            .map(|k| {
                let lo = g.vertices().iter().any(|x| x[k] == sub.center[k] - sub.n);
                let hi = g.vertices().iter().any(|x| x[k] == sub.center[k] + sub.n);
                lo && hi
            })
            .collect())
    }

    pub fn is_crossing(&self, sub: &BoxRegion) -> Result<bool> {
        Ok(self.crossing_directions(sub)?.into_iter().all(|b| b))
    }

    /// Canonical text form: header lines then one override per line.
    pub fn to_text(&self) -> String {
        let d = self.region.d;
        let coords = |x: &Site| x[..d].iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::from("# perclab sample v1\n");
        s += &format!("d={}\nN={}\ncenter={}\np={:?}\nseed={}\n", d, self.region.n, coords(&self.region.center), self.p, self.seed);
        for (e, st) in &self.overrides {
            s += &format!("{};{}={}\n", coords(&e.a), coords(&e.b), u8::from(*st));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PercolationSample> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("# perclab sample v1") {
            return param("missing sample header");
        }
        let mut kv = BTreeMap::new();
        let mut rest = Vec::new();
        for l in lines {
            match l.split_once('=') {
                Some((k, v)) if !k.contains(';') => {
                    kv.insert(k.trim().to_string(), v.trim().to_string());
                }
                _ => rest.push(l.trim().to_string()),
            }
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| LabError::Parameter(format!("missing header field {k}")));
        let bad = |k: &str| LabError::Parameter(format!("bad header field {k}"));
        let d: usize = get("d")?.parse().map_err(|_| bad("d"))?;
        let n: i32 = get("N")?.parse().map_err(|_| bad("N"))?;
        let p: f64 = get("p")?.parse().map_err(|_| bad("p"))?;
        let seed: u64 = get("seed")?.parse().map_err(|_| bad("seed"))?;
        let center = parse_site(&get("center")?, d)?;
        let mut s = sample_percolation(BoxRegion::centered(d, n, center)?, p, seed)?;
        let mut edits = Vec::new();
        for l in rest {
            let (lhs, st) = l.rsplit_once('=').ok_or_else(|| bad("override"))?;
            let (a, b) = lhs.split_once(';').ok_or_else(|| bad("override"))?;
            let st = match st.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad("override state")),
            };
            edits.push((Edge::new(parse_site(a, d)?, parse_site(b, d)?)?, st));
        }
        s = s.modify_edges(&edits)?;
        Ok(s)
    }
}

fn parse_site(s: &str, d: usize) -> Result<Site> {
    let v: Vec<i32> = s
        .split(',')
        .map(|t| t.trim().parse::<i32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| LabError::Parameter(format!("bad coordinates {s}")))?;
    if v.len() != d {
        return param(format!("expected {d} coordinates in {s}"));
    }
    let mut x = [0; 3];
    x[..d].copy_from_slice(&v);
    Ok(x)
}

/// Component labels over the sites of `sub` and the label of the largest component
/// containing at least one open edge.
fn largest_component(sample: &PercolationSample, sub: &BoxRegion) -> (Vec<usize>, Option<usize>) {
    let n = sub.vertex_count();
    let mut dsu = Dsu::new(n);
    for (i, x) in sub.sites().enumerate() {
        for k in 0..sub.d {
            let y = add(x, unit(k));
            if let Some(j) = sub.index(y) {
                if sample.is_open(&Edge { a: x, b: y }) {
                    dsu.union(i, j);
                }
            }
        }
    }
    let label: Vec<usize> = (0..n).map(|i| dsu.find(i)).collect();
    let mut size = vec![0usize; n];
    for &l in &label {
        size[l] += 1;
    }
    // sites are visited in lexicographic order, so the first hit of a label is its minimal vertex
    let mut best: Option<(usize, usize)> = None;
    let mut seen = vec![false; n];
    for &l in &label {
        if seen[l] {
            continue;
        }
        seen[l] = true;
        if size[l] < 2 {
            continue;
        }
        if best.is_none_or(|(_, s)| size[l] > s) {
            best = Some((l, size[l]));
        }
    }
    (label, best.map(|(l, _)| l))
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Dsu {
        Dsu { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Mesoscale parameters for [`well_connected_report`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MesoscaleConfig {
    /// Smallest scale is `N^min_exponent`.
    pub min_exponent: f64,
    /// Largest scale is `N * max_fraction`.
    pub max_fraction: f64,
    /// Open paths of length at least `M * absorb_fraction` must join the largest cluster.
    pub absorb_fraction: f64,
}

impl Default for MesoscaleConfig {
    fn default() -> Self {
        MesoscaleConfig { min_exponent: 0.25, max_fraction: 0.1, absorb_fraction: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellConnectedReport {
    pub scales: Vec<i32>,
    pub checked: usize,
    pub crossing_failures: Vec<BoxRegion>,
    pub absorption_failures: Vec<BoxRegion>,
}

impl WellConnectedReport {
    pub fn is_empty(&self) -> bool {
        self.crossing_failures.is_empty() && self.absorption_failures.is_empty()
    }

    pub fn failure_count(&self) -> usize {
        self.crossing_failures.len() + self.absorption_failures.len()
    }
}

/// Crossing and path-absorption checks on `cube` and on its mesoscopic sub-cubes.
/// Sub-cubes have radius `M` for dyadic `M` in `[N^a, N b]`, centred on the grid `c + M Z^d`
/// and kept when they fit in the sample region. Open path length is measured by the
/// graph diameter of each non-largest open component.
pub fn well_connected_report(sample: &PercolationSample, cube: &BoxRegion, cfg: &MesoscaleConfig) -> Result<WellConnectedReport> {
    if !sample.region.contains_box(cube) {
        return param("cube outside the sample region");
    }
    let n = cube.n as f64;
    let lo = n.powf(cfg.min_exponent).ceil().max(1.0) as i32;
    let hi = (n * cfg.max_fraction).floor() as i32;
    if lo > hi {
        return param(format!("empty mesoscale range [{lo}, {hi}] for N = {}", cube.n));
    }
    let mut scales = Vec::new();
    let mut m = lo;
    while m <= hi {
        scales.push(m);
        m *= 2;
    }
    let mut report = WellConnectedReport { scales: scales.clone(), checked: 0, crossing_failures: vec![], absorption_failures: vec![] };
    let mut cubes = vec![(*cube, cube.n)];
    for &m in &scales {
        let steps = cube.n / m;
        let mut offs = vec![[0i32; 3]];
        for k in 0..cube.d {
            let mut next = Vec::new();
            for o in &offs {
                for t in -steps..=steps {
                    let mut o2 = *o;
                    o2[k] = t * m;
                    next.push(o2);
                }
            }
            offs = next;
        }
        for o in offs {
            let sub = BoxRegion::centered(cube.d, m, add(cube.center, o))?;
            if sample.region.contains_box(&sub) {
                cubes.push((sub, m));
            }
        }
    }
    for (sub, m) in cubes {
        report.checked += 1;
        if !sample.is_crossing(&sub)? {
            report.crossing_failures.push(sub);
        }
        let need = ((m as f64) * cfg.absorb_fraction).ceil().max(1.0) as usize;
        if !absorbs_paths(sample, &sub, need) {
            report.absorption_failures.push(sub);
        }
    }
    Ok(report)
}

fn absorbs_paths(sample: &PercolationSample, sub: &BoxRegion, need: usize) -> bool {
    let (label, best) = largest_component(sample, sub);
    let Some(best) = best else { return false };
    let n = sub.vertex_count();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        if label[i] != best {
            members.entry(label[i]).or_default().push(i);
        }
    }
    for (_, verts) in members {
        if verts.len() < 2 {
            continue;
        }
        if component_diameter(sample, sub, &verts) >= need {
            return false;
        }
    }
    true
}

fn component_diameter(sample: &PercolationSample, sub: &BoxRegion, verts: &[usize]) -> usize {
    let local: std::collections::HashMap<usize, usize> = verts.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&i| {
            let x = sub.site(i);
            crate::lattice::neighbours(x, sub.d)
                .filter_map(|y| {
                    let j = sub.index(y)?;
                    let k = *local.get(&j)?;
                    sample.is_open(&Edge::new(x, y).ok()?).then_some(k)
                })
                .collect()
        })
        .collect();
    let ecc = |s: usize| -> (usize, usize) {
        let mut dist = vec![usize::MAX; adj.len()];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        let mut far = (0, s);
        while let Some(v) = q.pop_front() {
            if dist[v] > far.0 {
                far = (dist[v], v);
            }
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        far
    };
    if adj.len() <= 400 {
        (0..adj.len()).map(|s| ecc(s).0).max().unwrap_or(0)
    } else {
        let (_, far) = ecc(0);
        ecc(far).0
    }
}

/// Largest cluster of a fresh sample on `Q_n` centred at the origin.
pub fn sample_cluster(d: usize, n: i32, p: f64, seed: u64) -> Result<std::sync::Arc<ClusterGraph>> {
    let s = sample_percolation(BoxRegion::new(d, n)?, p, seed)?;
    Ok(std::sync::Arc::new(s.largest_cluster()?))
}
