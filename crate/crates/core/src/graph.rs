//! Immutable lattice subgraphs (clusters) on which every solver operates.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{param, LabError, Result};
use crate::lattice::{l1, neighbours, sub, BoxRegion, Edge, Site};

/// Face label of a vertex relative to the box decomposition
/// `L = {x_1 <= 0}`, `left = {x_1 = -N}`, `sides = ∂Q ∩ L`, `center = {x_1 = 0}`.
/// Labels are assigned with priority left > center > side so that they are disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Face {
    Left,
    Center,
    Side,
    /// Remaining vertices of `L` (strictly inside, `x_1 < 0`).
    LeftHalf,
    /// Vertices with `x_1 > 0`.
    RightHalf,
    /// Graphs built without a box.
    Unlabelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryTag {
    /// Vertex lies on the inner boundary (on `∂Q_N` for box clusters).
    pub inner_boundary: bool,
    pub face: Face,
}

impl BoundaryTag {
    pub fn interior(&self) -> bool {
        !self.inner_boundary
    }
}

#[derive(Debug, Clone)]
pub struct ClusterGraph {
    pub d: usize,
    pub region: Option<BoxRegion>,
    vertices: Vec<Site>,
    index: HashMap<Site, usize>,
    edges: Vec<(usize, usize)>,
    adj_start: Vec<usize>,
    adj: Vec<(usize, usize)>,
    exterior: Vec<u32>,
    tags: Vec<BoundaryTag>,
}

impl PartialEq for ClusterGraph {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.region == other.region
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.exterior == other.exterior
            && self.tags == other.tags
    }
}

pub(crate) fn face_of(region: &BoxRegion, x: Site) -> Face {
    let x1 = x[0] - region.center[0];
    if x1 == -region.n {
        Face::Left
    } else if x1 == 0 {
        Face::Center
    } else if x1 < 0 && region.on_boundary(x) {
        Face::Side
    } else if x1 < 0 {
        Face::LeftHalf
    } else {
        Face::RightHalf
    }
}

impl ClusterGraph {
    /// Builds a connected lattice graph. Vertices and edges are sorted lexicographically.
    /// With a region, boundary tags follow the box; without one, every vertex is interior
    /// until [`ClusterGraph::with_inner_boundary`] is applied.
    pub fn new(d: usize, region: Option<BoxRegion>, sites: Vec<Site>, edges: &[(Site, Site)]) -> Result<ClusterGraph> {
        let g = Self::build(d, region, sites, edges)?;
        if !g.is_connected() {
            return Err(LabError::Topology("graph is not connected".into()));
        }
        Ok(g)
    }

    pub(crate) fn build(d: usize, region: Option<BoxRegion>, mut sites: Vec<Site>, edges: &[(Site, Site)]) -> Result<ClusterGraph> {
        if d != 2 && d != 3 {
            return param(format!("dimension {d} unsupported"));
        }
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() {
            return param("graph needs at least one vertex");
        }
        if let Some(r) = &region {
            if let Some(x) = sites.iter().find(|x| !r.contains(**x)) {
                return param(format!("vertex {x:?} outside region"));
            }
        }
        let index: HashMap<Site, usize> = sites.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut es = Vec::with_capacity(edges.len());
        for &(x, y) in edges {
            if l1(sub(x, y)) != 1 {
                return param(format!("{x:?}-{y:?} is not a lattice edge"));
            }
            let (i, j) = match (index.get(&x), index.get(&y)) {
                (Some(&i), Some(&j)) => (i, j),
                _ => return param(format!("edge {x:?}-{y:?} has an endpoint outside the vertex list")),
            };
            es.push(if i < j { (i, j) } else { (j, i) });
        }
        es.sort_unstable();
        es.dedup();
        let tags = sites
            .iter()
            .map(|&x| match &region {
                Some(r) => BoundaryTag { inner_boundary: r.on_boundary(x), face: face_of(r, x) },
                None => BoundaryTag { inner_boundary: false, face: Face::Unlabelled },
            })
            .collect();
        let n = sites.len();
        let mut g = ClusterGraph {
            d,
            region,
            vertices: sites,
            index,
            edges: es,
            adj_start: Vec::new(),
            adj: Vec::new(),
            exterior: vec![0; n],
            tags,
        };
        g.rebuild_adjacency();
        Ok(g)
    }

    fn rebuild_adjacency(&mut self) {
        let n = self.vertices.len();
        let mut deg = vec![0usize; n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + deg[i];
        }
        let mut fill = start.clone();
        let mut adj = vec![(0, 0); start[n]];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            adj[fill[a]] = (b, k);
            fill[a] += 1;
            adj[fill[b]] = (a, k);
            fill[b] += 1;
        }
        for i in 0..n {
            adj[start[i]..start[i + 1]].sort_unstable();
        }
        self.adj_start = start;
        self.adj = adj;
    }

    /// Marks the given vertices as the inner boundary (all others interior).
    pub fn with_inner_boundary(mut self, boundary: &[Site]) -> Result<ClusterGraph> {
        for t in self.tags.iter_mut() {
            t.inner_boundary = false;
        }
        for x in boundary {
            let i = self.require(*x)?;
            self.tags[i].inner_boundary = true;
        }
        Ok(self)
    }

    /// Sets the number of open edges from each vertex to the exterior (dissipative sink).
    pub fn with_exterior_degree(mut self, ext: &[(Site, u32)]) -> Result<ClusterGraph> {
        for &(x, k) in ext {
            let i = self.require(x)?;
            self.exterior[i] = k;
        }
        Ok(self)
    }

    pub(crate) fn set_exterior(&mut self, ext: Vec<u32>) {
        self.exterior = ext;
    }

    /// Same vertices and tags, with the given edges removed. Connectivity is not required.
    pub fn without_edges(&self, removed: &[Edge]) -> Result<ClusterGraph> {
        let mut drop = std::collections::HashSet::new();
        for e in removed {
            let k = self.edge_between_sites(e.a, e.b).ok_or_else(|| LabError::Parameter(format!("edge {e:?} not in graph")))?;
            drop.insert(k);
        }
        let mut g = self.clone();
        g.edges = self.edges.iter().enumerate().filter(|(k, _)| !drop.contains(k)).map(|(_, &e)| e).collect();
        g.rebuild_adjacency();
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Site] {
        &self.vertices
    }

    pub fn site(&self, i: usize) -> Site {
        self.vertices[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_sites(&self, k: usize) -> (Site, Site) {
        let (a, b) = self.edges[k];
        (self.vertices[a], self.vertices[b])
    }

    pub fn vertex_index(&self, x: Site) -> Option<usize> {
        self.index.get(&x).copied()
    }

    pub fn contains(&self, x: Site) -> bool {
        self.index.contains_key(&x)
    }

    pub(crate) fn require(&self, x: Site) -> Result<usize> {
        self.vertex_index(x).ok_or_else(|| LabError::Parameter(format!("vertex {x:?} not in graph")))
    }

    /// Neighbours of vertex `i` as `(neighbour, edge id)` in increasing neighbour order.
    pub fn adjacent(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[self.adj_start[i]..self.adj_start[i + 1]]
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacent(i).iter().map(|&(j, _)| j)
    }

    /// Number of incident listed edges.
    pub fn degree(&self, i: usize) -> usize {
        self.adj_start[i + 1] - self.adj_start[i]
    }

    /// Open edges from `i` leaving the box.
    pub fn exterior_degree(&self, i: usize) -> u32 {
        self.exterior[i]
    }

    /// Degree including exterior edges.
    pub fn full_degree(&self, i: usize) -> usize {
        self.degree(i) + self.exterior[i] as usize
    }

    pub fn tag(&self, i: usize) -> BoundaryTag {
        self.tags[i]
    }

    pub fn tags(&self) -> &[BoundaryTag] {
        &self.tags
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        self.tags.iter().map(|t| t.inner_boundary).collect()
    }

    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        let adj = self.adjacent(i);
        adj.binary_search_by_key(&j, |&(v, _)| v).ok().map(|p| adj[p].1)
    }

    pub fn edge_between_sites(&self, x: Site, y: Site) -> Option<usize> {
        let (i, j) = (self.vertex_index(x)?, self.vertex_index(y)?);
        self.edge_between(i, j)
    }

    /// All lattice neighbours of vertex `i`, whether or not the edge is open.
    pub fn lattice_neighbours(&self, i: usize) -> impl Iterator<Item = Site> {
        neighbours(self.vertices[i], self.d)
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Connected component label of every vertex (labels in order of first vertex).
    pub fn components(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for w in self.neighbours(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Breadth-first distances from vertex `s` (`usize::MAX` for unreachable).
    pub fn bfs(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbours(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path length between two vertices, `None` if unreachable.
    pub fn graph_distance(&self, x: Site, y: Site) -> Result<Option<usize>> {
        let (i, j) = (self.require(x)?, self.require(y)?);
        let d = self.bfs(i)[j];
        Ok(if d == usize::MAX { None } else { Some(d) })
    }

    /// Induced subgraph on the vertices satisfying `keep` (not necessarily connected).
    pub fn induced(&self, keep: &[bool]) -> Result<ClusterGraph> {
        let sites: Vec<Site> = (0..self.vertex_count()).filter(|&i| keep[i]).map(|i| self.vertices[i]).collect();
        let edges: Vec<(Site, Site)> =
            self.edges.iter().filter(|&&(a, b)| keep[a] && keep[b]).map(|&(a, b)| (self.vertices[a], self.vertices[b])).collect();
        let mut g = Self::build(self.d, self.region, sites, &edges)?;
        for i in 0..g.vertex_count() {
            let j = self.index[&g.vertices[i]];
            g.tags[i] = self.tags[j];
            g.exterior[i] = self.exterior[j];
        }
        Ok(g)
    }
}
