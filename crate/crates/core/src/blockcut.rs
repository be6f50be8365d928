//! Biconnected components, block-cut trees, cut-vertex fluxes and the flux-maximising
//! exploration of the increasing subgraph of a level set.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{Debug, Write as _};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

use crate::error::{param, LabError, Result};
use crate::graph::ClusterGraph;
use crate::lattice::{add, unit, Site};

/// Values the flux bookkeeping runs on: `f64` or exact rationals.
pub trait Scalar: Clone + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Debug {}
impl Scalar for f64 {}
impl Scalar for BigRational {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    /// Index into [`BlockCutTree::components`].
    Component(usize),
    /// Vertex index of the cut vertex in the tree's graph.
    Cut(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// Sorted edge indices.
    pub edges: Vec<usize>,
}

/// Rooted block-cut tree. Node ids: components first (ordered by smallest vertex, then
/// smallest edge), then cut vertices in vertex order.
#[derive(Debug, Clone)]
pub struct BlockCutTree {
    pub graph: Arc<ClusterGraph>,
    pub components: Vec<Component>,
    pub cut_vertices: Vec<usize>,
    pub nodes: Vec<Node>,
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

/// Biconnected components by an iterative Tarjan edge-stack search.
pub fn biconnected_components(g: &ClusterGraph) -> Vec<Component> {
    let n = g.vertex_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut estack: Vec<usize> = Vec::new();
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        if g.degree(s) == 0 {
            disc[s] = time;
            time += 1;
            comps.push(Vec::new());
            continue;
        }
        disc[s] = time;
        low[s] = time;
        time += 1;
        // frames: (vertex, next adjacency slot, edge to parent)
        let mut frames: Vec<(usize, usize, usize)> = vec![(s, 0, usize::MAX)];
        while let Some(&mut (v, ref mut idx, pe)) = frames.last_mut() {
            let adj = g.adjacent(v);
            if *idx < adj.len() {
                let (w, e) = adj[*idx];
                *idx += 1;
                if e == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    estack.push(e);
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    frames.push((w, 0, e));
                } else if disc[w] < disc[v] {
                    estack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(&(u, _, _)) = frames.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let mut comp = Vec::new();
                        while let Some(e) = estack.pop() {
                            comp.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        comps.push(comp);
                    }
                }
            }
        }
    }
    let mut out: Vec<Component> = Vec::new();
    let mut isolated = (0..n).filter(|&v| g.degree(v) == 0);
    for mut edges in comps {
        if edges.is_empty() {
            let v = isolated.next().expect("isolated vertex");
            out.push(Component { vertices: vec![v], edges });
            continue;
        }
        edges.sort_unstable();
        let mut vs: Vec<usize> = edges.iter().flat_map(|&e| [g.edges()[e].0, g.edges()[e].1]).collect();
        vs.sort_unstable();
        vs.dedup();
        out.push(Component { vertices: vs, edges });
    }
    out.sort_by(|a, b| (a.vertices[0], a.edges.first()).cmp(&(b.vertices[0], b.edges.first())));
    out
}

/// Cut vertices by removing each vertex and counting components.
pub fn cut_vertices_bruteforce(g: &ClusterGraph) -> Vec<usize> {
    let count = |skip: usize| {
        let n = g.vertex_count();
        let mut seen = vec![false; n];
        let mut c = 0;
        for s in 0..n {
            if s == skip || seen[s] {
                continue;
            }
            c += 1;
            seen[s] = true;
            let mut st = vec![s];
            while let Some(v) = st.pop() {
                for w in g.neighbours(v) {
                    if w != skip && !seen[w] {
                        seen[w] = true;
                        st.push(w);
                    }
                }
            }
        }
        c
    };
    let base = count(usize::MAX);
    (0..g.vertex_count()).filter(|&v| count(v) > base).collect()
}

pub fn block_cut_tree(graph: &Arc<ClusterGraph>, root: Site) -> Result<BlockCutTree> {
    let rv = graph.require(root)?;
    if !graph.is_connected() {
        return param("block-cut tree needs a connected graph");
    }
    let components = biconnected_components(graph);
    let nc = components.len();
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); graph.vertex_count()];
    for (c, comp) in components.iter().enumerate() {
        for &v in &comp.vertices {
            membership[v].push(c);
        }
    }
    let cut_vertices: Vec<usize> = (0..graph.vertex_count()).filter(|&v| membership[v].len() > 1).collect();
    let mut nodes: Vec<Node> = (0..nc).map(Node::Component).collect();
    let mut cut_node = BTreeMap::new();
    for &v in &cut_vertices {
        cut_node.insert(v, nodes.len());
        nodes.push(Node::Cut(v));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for &v in &cut_vertices {
        let cn = cut_node[&v];
        for &c in &membership[v] {
            adj[c].push(cn);
            adj[cn].push(c);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let root_node = *membership[rv].iter().min().expect("vertex in a component");
    let mut parent = vec![None; nodes.len()];
    let mut children = vec![Vec::new(); nodes.len()];
    let mut seen = vec![false; nodes.len()];
    seen[root_node] = true;
    let mut q = VecDeque::from([root_node]);
    while let Some(x) = q.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
                children[x].push(y);
                q.push_back(y);
            }
        }
    }
    Ok(BlockCutTree { graph: graph.clone(), components, cut_vertices, nodes, root: root_node, parent, children })
}

impl BlockCutTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    pub fn cut_node_of(&self, v: usize) -> Option<usize> {
        self.nodes.iter().position(|n| *n == Node::Cut(v))
    }

    /// All descendants of `node` (excluding it).
    pub fn descendants(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut st = self.children[node].clone();
        while let Some(x) = st.pop() {
            out.push(x);
            st.extend(self.children[x].iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// Indented text rendering, one node per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut st = vec![(self.root, 0usize)];
        while let Some((x, depth)) = st.pop() {
            let pad = "  ".repeat(depth);
            match &self.nodes[x] {
                Node::Component(c) => {
                    let vs: Vec<String> = self.components[*c]
                        .vertices
                        .iter()
                        .map(|&v| {
                            let p = self.graph.site(v);
                            format!("({},{})", p[0], p[1])
                        })
                        .collect();
                    let _ = writeln!(s, "{pad}component {x}: {}", vs.join(" "));
                }
                Node::Cut(v) => {
                    let p = self.graph.site(*v);
                    let _ = writeln!(s, "{pad}cut {x}: ({},{})", p[0], p[1]);
                }
            }
            for &c in self.children[x].iter().rev() {
                st.push((c, depth + 1));
            }
        }
        s
    }

    /// Graphviz description of the tree.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph blockcut {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Component(c) => {
                    let _ = writeln!(s, "  n{i} [shape=box,label=\"C{c} ({})\"];", self.components[*c].vertices.len());
                }
                Node::Cut(v) => {
                    let p = self.graph.site(*v);
                    let _ = writeln!(s, "  n{i} [shape=circle,label=\"{},{}\"];", p[0], p[1]);
                }
            }
        }
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                let _ = writeln!(s, "  n{p} -- n{i};");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Incoming flux per cut node and outgoing flux per (cut node, child component).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxAnnotation<T> {
    pub i_in: BTreeMap<usize, T>,
    pub i_out: BTreeMap<(usize, usize), T>,
}

/// `Σ_{y ∈ comp, y ~ v} (ℓ(y) - ℓ(v))` over the component's edges at `v`.
fn edge_sum<T: Scalar>(tree: &BlockCutTree, comp: usize, v: usize, l: &[T]) -> T {
    let g = &tree.graph;
    let mut s = T::zero();
    for &e in &tree.components[comp].edges {
        let (a, b) = g.edges()[e];
        if a == v {
            s = s + (l[b].clone() - l[v].clone());
        } else if b == v {
            s = s + (l[a].clone() - l[v].clone());
        }
    }
    s
}

/// Fluxes of `l` (indexed by the tree graph's vertices) through every cut node.
pub fn cut_vertex_flux<T: Scalar>(tree: &BlockCutTree, l: &[T]) -> FluxAnnotation<T> {
    let mut i_in = BTreeMap::new();
    let mut i_out = BTreeMap::new();
    for (x, node) in tree.nodes.iter().enumerate() {
        if let Node::Cut(v) = node {
            if let Some(p) = tree.parent[x] {
                let Node::Component(pc) = tree.nodes[p] else { unreachable!("alternating tree") };
                i_in.insert(x, -edge_sum(tree, pc, *v, l));
            }
            for &c in &tree.children[x] {
                let Node::Component(cc) = tree.nodes[c] else { unreachable!("alternating tree") };
                i_out.insert((x, c), edge_sum(tree, cc, *v, l));
            }
        }
    }
    FluxAnnotation { i_in, i_out }
}

fn near<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    (a.clone() - b.clone()).abs() <= *tol
}

/// Vertices of the level set `{u = a}` reachable from `x1 = x0 + e_1` along paths in the
/// level set on which `ℓ` strictly increases, with the edges of the cluster joining two
/// such vertices at which `ℓ` differs. `x0` itself is not included.
pub fn increasing_subgraph<T: Scalar>(graph: &Arc<ClusterGraph>, u: &[T], l: &[T], x0: Site, tol: &T) -> Result<ClusterGraph> {
    let i0 = graph.require(x0)?;
    let x1 = add(x0, unit(0));
    let i1 = graph.require(x1)?;
    if graph.edge_between(i0, i1).is_none() {
        return param("seed edge is not open");
    }
    if !near(&u[i0], &u[i1], tol) {
        return param("seed edge is not inside one level set");
    }
    if !(l[i1].clone() - l[i0].clone() > *tol) {
        return param("plane must increase along the seed edge");
    }
    let a = u[i0].clone();
    let n = graph.vertex_count();
    let mut inside = vec![false; n];
    inside[i1] = true;
    let mut q = VecDeque::from([i1]);
    while let Some(y) = q.pop_front() {
        for z in graph.neighbours(y) {
            if !inside[z] && near(&u[z], &a, tol) && l[z].clone() - l[y].clone() > *tol {
                inside[z] = true;
                q.push_back(z);
            }
        }
    }
    let sites: Vec<Site> = (0..n).filter(|&i| inside[i]).map(|i| graph.site(i)).collect();
    let mut edges = Vec::new();
    for &(p, r) in graph.edges() {
        if inside[p] && inside[r] && !near(&l[p], &l[r], tol) {
            edges.push((graph.site(p), graph.site(r)));
        }
    }
    let mut g = ClusterGraph::new(graph.d, graph.region, sites, &edges)?;
    let boundary: Vec<Site> = g.vertices().iter().copied().filter(|x| !graph.tag(graph.vertex_index(*x).unwrap()).interior()).collect();
    g = g.with_inner_boundary(&boundary)?;
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct ExplorationReport<T> {
    pub x0: Site,
    pub level: T,
    pub subgraph: Arc<ClusterGraph>,
    pub tree: BlockCutTree,
    /// Nodes erased by the pruning rule.
    pub erased: Vec<bool>,
    pub flux: FluxAnnotation<T>,
    /// Alternating component / cut node ids from the root to the terminal leaf.
    pub path: Vec<usize>,
    pub leaf: usize,
    /// Edge `(y, z)` with `y` in the leaf where both gradients are nonzero.
    pub witness: Option<(Site, Site)>,
    pub ineq_component_checked: usize,
    pub ineq_component_failures: usize,
    pub ineq_cut_checked: usize,
    pub ineq_cut_failures: usize,
    /// `ℓ(argmax of ℓ on the leaf) - ℓ(x0)`.
    pub telescoping_lhs: T,
    /// `(1/4) Σ i_in` over the cut nodes of the path.
    pub telescoping_rhs: T,
}

impl<T: Scalar> ExplorationReport<T> {
    pub fn telescoping_holds(&self) -> bool {
        self.telescoping_lhs >= self.telescoping_rhs
    }
}

/// Pruning test: some `y` in the component has a cluster neighbour `z` outside the level
/// set with `ℓ(z) != ℓ(y)`. Returns the first such pair.
fn pruned_pair<T: Scalar>(
    ambient: &ClusterGraph,
    sub: &ClusterGraph,
    comp: &Component,
    u: &[T],
    l: &[T],
    a: &T,
    tol: &T,
) -> Option<(Site, Site)> {
    for &v in &comp.vertices {
        let y = ambient.vertex_index(sub.site(v)).expect("sub-vertex");
        for z in ambient.neighbours(y) {
            if !near(&u[z], a, tol) && !near(&l[z], &l[y], tol) {
                return Some((ambient.site(y), ambient.site(z)));
            }
        }
    }
    None
}

/// Builds the increasing subgraph from the seed `(x0, x0 + e_1)`, its pruned block-cut tree
/// and fluxes, walks the greedy path and checks the flux inequalities and the telescoping
/// bound. `u` and `l` are indexed by the ambient graph's vertices.
pub fn flux_exploration<T: Scalar>(graph: &Arc<ClusterGraph>, u: &[T], l: &[T], x0: Site, tol: &T) -> Result<ExplorationReport<T>> {
    if graph.d != 2 {
        return param("exploration needs d = 2");
    }
    let sub = Arc::new(increasing_subgraph(graph, u, l, x0, tol)?);
    let x1 = add(x0, unit(0));
    let tree = block_cut_tree(&sub, x1)?;
    let level = u[graph.require(x0)?].clone();
    let ls: Vec<T> = sub.vertices().iter().map(|&x| l[graph.vertex_index(x).expect("sub-vertex")].clone()).collect();
    let amb = |v: usize| graph.vertex_index(sub.site(v)).expect("sub-vertex");

    // pruning
    let mut erased = vec![false; tree.node_count()];
    let mut pairs: BTreeMap<usize, (Site, Site)> = BTreeMap::new();
    for (x, node) in tree.nodes.iter().enumerate() {
        if let Node::Component(c) = node {
            if let Some(pr) = pruned_pair(graph, &sub, &tree.components[*c], u, l, &level, tol) {
                pairs.insert(x, pr);
            }
        }
    }
    for &x in pairs.keys() {
        for d in tree.descendants(x) {
            erased[d] = true;
        }
    }
    let kids = |x: usize| -> Vec<usize> { tree.children[x].iter().copied().filter(|&c| !erased[c]).collect() };
    let flux = cut_vertex_flux(&tree, &ls);

    // flux inequalities at non-root, non-leaf components
    let interior = |v: usize| graph.tag(amb(v)).interior();
    let (mut c1, mut f1, mut c2, mut f2) = (0, 0, 0, 0);
    for (x, node) in tree.nodes.iter().enumerate() {
        let Node::Component(c) = node else { continue };
        if erased[x] || x == tree.root || kids(x).is_empty() {
            continue;
        }
        let p = tree.parent[x].expect("non-root");
        let Node::Cut(pv) = tree.nodes[p] else { unreachable!("alternating tree") };
        let child_cuts = kids(x);
        let cut_set: BTreeSet<usize> = child_cuts
            .iter()
            .map(|&k| match tree.nodes[k] {
                Node::Cut(v) => v,
                _ => unreachable!("alternating tree"),
            })
            .chain([pv])
            .collect();
        if tree.components[*c].vertices.iter().filter(|v| !cut_set.contains(v)).all(|&v| interior(v)) {
            c1 += 1;
            let mut lhs = T::zero();
            for &k in &child_cuts {
                lhs = lhs + flux.i_in[&k].clone();
            }
            if lhs.clone() + tol.clone() < flux.i_out[&(p, x)] {
                f1 += 1;
            }
        }
        if interior(pv) {
            c2 += 1;
            let mut lhs = T::zero();
            for k in kids(p) {
                lhs = lhs + flux.i_out[&(p, k)].clone();
            }
            if lhs + tol.clone() < flux.i_in[&p] {
                f2 += 1;
            }
        }
    }

    // greedy path
    let mut path = vec![tree.root];
    let mut x = tree.root;
    loop {
        let ks = kids(x);
        if ks.is_empty() {
            break;
        }
        let score = |k: usize| -> T {
            match tree.nodes[x] {
                Node::Component(_) => flux.i_in[&k].clone(),
                Node::Cut(_) => flux.i_out[&(x, k)].clone(),
            }
        };
        let mut best = ks[0];
        for &k in &ks[1..] {
            if score(k) > score(best) {
                best = k;
            }
        }
        path.push(best);
        x = best;
    }
    let leaf = x;
    let Node::Component(lc) = tree.nodes[leaf] else { unreachable!("leaves are components") };
    let comp = &tree.components[lc];
    let ymax = comp.vertices.iter().copied().fold(comp.vertices[0], |m, v| if ls[v] > ls[m] { v } else { m });
    let witness = pairs.get(&leaf).copied().or_else(|| {
        let y = amb(ymax);
        graph
            .neighbours(y)
            .find(|&z| l[z].clone() - l[y].clone() > *tol && !near(&u[z], &level, tol))
            .map(|z| (graph.site(y), graph.site(z)))
    });
    let four = T::from_i32(4).expect("small constant");
    let mut rhs = T::zero();
    for &k in &path {
        if let Some(v) = flux.i_in.get(&k) {
            rhs = rhs + v.clone();
        }
    }
    let lhs = ls[ymax].clone() - l[graph.require(x0)?].clone();
    Ok(ExplorationReport {
        x0,
        level,
        subgraph: sub.clone(),
        tree: tree.clone(),
        erased,
        flux,
        path,
        leaf,
        witness,
        ineq_component_checked: c1,
        ineq_component_failures: f1,
        ineq_cut_checked: c2,
        ineq_cut_failures: f2,
        telescoping_lhs: lhs,
        telescoping_rhs: rhs / four,
    })
}

/// Candidate seeds: vertices `x0` with `u(x0) = u(x0 + e_1)` and `ℓ(x0 + e_1) > ℓ(x0)`,
/// both interior.
pub fn exploration_seeds<T: Scalar>(graph: &ClusterGraph, u: &[T], l: &[T], tol: &T) -> Vec<Site> {
    let mut out = Vec::new();
    for (i, &x) in graph.vertices().iter().enumerate() {
        let Some(j) = graph.vertex_index(add(x, unit(0))) else { continue };
        if graph.edge_between(i, j).is_none() || !graph.tag(i).interior() || !graph.tag(j).interior() {
            continue;
        }
        if near(&u[i], &u[j], tol) && l[j].clone() - l[i].clone() > *tol {
            out.push(x);
        }
    }
    out
}

/// Checks a tree against the brute-force oracle: cut vertices, alternation, and that the
/// components partition the edges.
pub fn verify_tree(tree: &BlockCutTree) -> Result<()> {
    let g = &tree.graph;
    if cut_vertices_bruteforce(g) != tree.cut_vertices {
        return Err(LabError::Internal("cut vertices disagree with vertex removal".into()));
    }
    let mut owner = vec![usize::MAX; g.edge_count()];
    for (c, comp) in tree.components.iter().enumerate() {
        for &e in &comp.edges {
            if owner[e] != usize::MAX {
                return Err(LabError::Internal(format!("edge {e} in two components")));
            }
            owner[e] = c;
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(LabError::Internal("edge outside every component".into()));
    }
    for (x, p) in tree.parent.iter().enumerate() {
        match p {
            None if x != tree.root => return Err(LabError::Internal(format!("node {x} has no parent"))),
            Some(p) if matches!(tree.nodes[x], Node::Cut(_)) == matches!(tree.nodes[*p], Node::Cut(_)) => {
                return Err(LabError::Internal("tree does not alternate".into()))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Ambient cluster with an exact potential `u` and plane `ℓ` (slope `e_1`), ready for
/// [`flux_exploration`].
#[derive(Debug, Clone)]
pub struct ExplorationInstance {
    pub graph: Arc<ClusterGraph>,
    pub u: Vec<BigRational>,
    pub l: Vec<BigRational>,
}

fn exact_plane(graph: &Arc<ClusterGraph>) -> Result<Vec<BigRational>> {
    let plane = crate::harmonic::corrected_plane(graph, &[1.0, 0.0], &crate::solver::SolveOptions::exact())?;
    Ok(plane.field.values.rational()?.to_vec())
}

/// Mirror-symmetric sample (see [`PercolationSample::mirrored`]) with the antisymmetric
/// dipole `δ_z - δ_{z'}` across the axis, so that `u_f` vanishes exactly on the axis and
/// its level set contains increasing edges. `None` when no pole pair `(a, ±2)` lies in the
/// cluster.
///
/// [`PercolationSample::mirrored`]: crate::percolation::PercolationSample::mirrored
pub fn mirrored_dipole_instance(n: i32, p: f64, seed: u64) -> Result<Option<ExplorationInstance>> {
    let region = crate::lattice::BoxRegion::new(2, n)?;
    let s = crate::percolation::sample_percolation(region, p, seed)?.mirrored()?;
    let graph = match s.largest_cluster() {
        Ok(g) => Arc::new(g),
        Err(LabError::EmptyCluster) => return Ok(None),
        Err(e) => return Err(e),
    };
    let pole = |a: i32, y: i32| crate::lattice::add(region.center, crate::lattice::site2(a, y));
    let Some(a) = (0..n / 2).flat_map(|a| [a, -a]).find(|&a| graph.contains(pole(a, 2)) && graph.contains(pole(a, -2))) else {
        return Ok(None);
    };
    let f = crate::potential::PoleFunction::dipole(pole(a, 2), pole(a, -2));
    let pot = crate::potential::potential(&graph, &f, &crate::solver::SolveOptions::exact())?;
    let u = pot.field.values.rational()?.to_vec();
    let l = exact_plane(&graph)?;
    Ok(Some(ExplorationInstance { graph, u, l }))
}

/// The potential of `f = 0`: the whole cluster is one level set, nothing is pruned and the
/// flux inequalities are exercised on every non-root, non-leaf component.
pub fn constant_potential_instance(n: i32, p: f64, seed: u64) -> Result<ExplorationInstance> {
    let graph = crate::percolation::sample_cluster(2, n, p, seed)?;
    let u = vec![BigRational::from_integer(0.into()); graph.vertex_count()];
    let l = exact_plane(&graph)?;
    Ok(ExplorationInstance { graph, u, l })
}

/// Runs the exploration from every seed of [`exploration_seeds`], in exact arithmetic.
pub fn explore_all(inst: &ExplorationInstance) -> Result<Vec<ExplorationReport<BigRational>>> {
    let zero = BigRational::from_integer(0.into());
    exploration_seeds(&inst.graph, &inst.u, &inst.l, &zero)
        .into_iter()
        .map(|x0| flux_exploration(&inst.graph, &inst.u, &inst.l, x0, &zero))
        .collect()
}
