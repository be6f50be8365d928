//! Internally vertex-disjoint paths between vertex sets by unit-capacity max-flow, with a
//! certificate made of explicit paths and a matching vertex separator.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{param, LabError, Result};
use crate::graph::ClusterGraph;
use crate::lattice::Site;

const INF: u32 = u32::MAX / 4;

struct Network {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u32>,
    next: Vec<usize>,
}

impl Network {
    fn new(n: usize) -> Network {
        Network { head: vec![usize::MAX; n], to: Vec::new(), cap: Vec::new(), next: Vec::new() }
    }

    fn arc(&mut self, a: usize, b: usize, c: u32) {
        for (x, y, cc) in [(a, b, c), (b, a, 0)] {
            self.to.push(y);
            self.cap.push(cc);
            self.next.push(self.head[x]);
            self.head[x] = self.to.len() - 1;
        }
    }

    fn arcs(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let mut e = self.head[v];
        std::iter::from_fn(move || {
            if e == usize::MAX {
                return None;
            }
            let cur = e;
            e = self.next[e];
            Some(cur)
        })
    }

    /// Breadth-first augmenting paths; returns the flow value.
    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let n = self.head.len();
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                if v == t {
                    break;
                }
                let arcs: Vec<usize> = self.arcs(v).collect();
                for e in arcs {
                    let w = self.to[e];
                    if self.cap[e] > 0 && !seen[w] {
                        seen[w] = true;
                        prev[w] = e;
                        q.push_back(w);
                    }
                }
            }
            if !seen[t] {
                return flow;
            }
            let mut v = t;
            let mut push = INF;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            flow += push as usize;
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for e in self.arcs(v) {
                let w = self.to[e];
                if self.cap[e] > 0 && !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointPaths {
    pub count: usize,
    /// Explicit paths from `S` to the targets, pairwise disjoint away from their endpoints' sets.
    pub paths: Vec<Vec<Site>>,
    /// Vertices outside `S ∪ T` whose removal, together with the direct `S`-`T` edges,
    /// separates `S` from the targets. Its size plus the number of direct edges is `count`.
    pub separator: Vec<Site>,
    pub direct_edges: usize,
}

fn masks(graph: &ClusterGraph, s: &[Site], t: &[Site]) -> Result<(Vec<bool>, Vec<bool>)> {
    if s.is_empty() || t.is_empty() {
        return param("source and target sets must be nonempty");
    }
    let n = graph.vertex_count();
    let (mut ms, mut mt) = (vec![false; n], vec![false; n]);
    for x in s {
        ms[graph.require(*x)?] = true;
    }
    for x in t {
        let i = graph.require(*x)?;
        if ms[i] {
            return param(format!("{x:?} is both a source and a target"));
        }
        mt[i] = true;
    }
    Ok((ms, mt))
}

/// Maximum number of paths from `S` to the targets that share no vertex outside `S ∪ T`;
/// each direct `S`-`T` edge counts as one path.
pub fn count_disjoint_paths(graph: &ClusterGraph, s: &[Site], t: &[Site]) -> Result<usize> {
    Ok(disjoint_paths(graph, s, t)?.count)
}

pub fn disjoint_paths(graph: &ClusterGraph, s: &[Site], t: &[Site]) -> Result<DisjointPaths> {
    let (ms, mt) = masks(graph, s, t)?;
    let n = graph.vertex_count();
    let (src, snk) = (2 * n, 2 * n + 1);
    let mut net = Network::new(2 * n + 2);
    for v in 0..n {
        let c = if ms[v] || mt[v] { INF } else { 1 };
        net.arc(2 * v, 2 * v + 1, c);
        if ms[v] {
            net.arc(src, 2 * v, INF);
        }
        if mt[v] {
            net.arc(2 * v + 1, snk, INF);
        }
    }
    let mut direct = 0;
    for &(a, b) in graph.edges() {
        net.arc(2 * a + 1, 2 * b, 1);
        net.arc(2 * b + 1, 2 * a, 1);
        if (ms[a] && mt[b]) || (ms[b] && mt[a]) {
            direct += 1;
        }
    }
    let count = net.max_flow(src, snk);

    // separator from the minimum cut: every saturated arc leaving the residual-reachable
    // side is charged to an internal vertex (direct S-T edges are counted separately)
    let reach = net.reachable(src);
    let mut sep = BTreeSet::new();
    for a in 0..2 * n {
        if !reach[a] {
            continue;
        }
        for e in net.arcs(a) {
            let b = net.to[e];
            if e % 2 == 1 || b >= 2 * n || reach[b] {
                continue;
            }
            let (u, w) = (a / 2, b / 2);
            if u == w {
                sep.insert(u);
            } else if !((ms[u] && mt[w]) || (ms[w] && mt[u])) {
                sep.insert(if !ms[w] && !mt[w] { w } else { u });
            }
        }
    }
    let separator: Vec<Site> = sep.into_iter().map(|v| graph.site(v)).collect();

    // path decomposition on the flow-carrying arcs; original arcs have even index and
    // carry the residual capacity of their reverse arc as flow
    let mut used: Vec<u32> = vec![0; net.cap.len()];
    let mut paths = Vec::new();
    for _ in 0..count {
        let mut path = Vec::new();
        let mut v = src;
        let mut guard = 0;
        while v != snk {
            guard += 1;
            if guard > 4 * net.head.len() {
                return Err(LabError::Internal("flow decomposition did not terminate".into()));
            }
            let e = net
                .arcs(v)
                .find(|&e| e % 2 == 0 && net.cap[e ^ 1] > used[e])
                .ok_or_else(|| LabError::Internal("flow decomposition stalled".into()))?;
            used[e] += 1;
            let w = net.to[e];
            if w < 2 * n && w.is_multiple_of(2) {
                let x = graph.site(w / 2);
                if path.last() != Some(&x) {
                    path.push(x);
                }
            }
            v = w;
        }
        // drop cycles through S or T: keep the last source and first target
        let last_s = path.iter().rposition(|x| ms[graph.vertex_index(*x).expect("vertex")]).unwrap_or(0);
        let mut p: Vec<Site> = path[last_s..].to_vec();
        if let Some(k) = p.iter().position(|x| mt[graph.vertex_index(*x).expect("vertex")]) {
            p.truncate(k + 1);
        }
        paths.push(p);
    }
    let out = DisjointPaths { count, paths, separator, direct_edges: direct };
    verify_certificate(graph, s, t, &out)?;
    Ok(out)
}

/// Checks that the paths are valid and disjoint and that the separator separates, so the
/// count is both attained and unbeatable.
pub fn verify_certificate(graph: &ClusterGraph, s: &[Site], t: &[Site], cert: &DisjointPaths) -> Result<()> {
    let (ms, mt) = masks(graph, s, t)?;
    if cert.paths.len() != cert.count {
        return Err(LabError::Internal("path count mismatch".into()));
    }
    let mut inner = BTreeSet::new();
    let mut direct_used = BTreeSet::new();
    for p in &cert.paths {
        let idx: Vec<usize> = p.iter().map(|x| graph.require(*x)).collect::<Result<_>>()?;
        if idx.len() < 2 || !ms[idx[0]] || !mt[*idx.last().expect("nonempty")] {
            return Err(LabError::Internal("path does not join S to T".into()));
        }
        for w in idx.windows(2) {
            if graph.edge_between(w[0], w[1]).is_none() {
                return Err(LabError::Internal("path uses a missing edge".into()));
            }
        }
        if idx.len() == 2 && !direct_used.insert((idx[0], idx[1])) {
            return Err(LabError::Internal("direct edge used twice".into()));
        }
        for &v in &idx[1..idx.len() - 1] {
            if ms[v] || mt[v] || !inner.insert(v) {
                return Err(LabError::Internal("paths are not internally disjoint".into()));
            }
        }
    }
    if cert.separator.len() + cert.direct_edges != cert.count {
        return Err(LabError::Internal("separator size does not match the count".into()));
    }
    let n = graph.vertex_count();
    let mut blocked = vec![false; n];
    for x in &cert.separator {
        blocked[graph.require(*x)?] = true;
    }
    let mut seen = ms.clone();
    let mut q: VecDeque<usize> = (0..n).filter(|&v| ms[v]).collect();
    while let Some(v) = q.pop_front() {
        for w in graph.neighbours(v) {
            if seen[w] || blocked[w] || (ms[v] && mt[w]) {
                continue;
            }
            if mt[w] {
                return Err(LabError::Internal("separator leaves a path open".into()));
            }
            seen[w] = true;
            q.push_back(w);
        }
    }
    Ok(())
}

/// Exhaustive minimum separator size (direct edges included) by enumerating vertex subsets
/// in increasing size; intended for small graphs.
pub fn min_separator_bruteforce(graph: &ClusterGraph, s: &[Site], t: &[Site], max_size: usize) -> Result<Option<usize>> {
    let (ms, mt) = masks(graph, s, t)?;
    let n = graph.vertex_count();
    let direct = graph.edges().iter().filter(|&&(a, b)| (ms[a] && mt[b]) || (ms[b] && mt[a])).count();
    let candidates: Vec<usize> = (0..n).filter(|&v| !ms[v] && !mt[v]).collect();
    let separates = |blocked: &[bool]| -> bool {
        let mut seen = ms.clone();
        let mut q: VecDeque<usize> = (0..n).filter(|&v| ms[v]).collect();
        while let Some(v) = q.pop_front() {
            for w in graph.neighbours(v) {
                if seen[w] || blocked[w] || (ms[v] && mt[w]) {
                    continue;
                }
                if mt[w] {
                    return false;
                }
                seen[w] = true;
                q.push_back(w);
            }
        }
        true
    };
    for k in 0..=max_size.min(candidates.len()) {
        let mut pick: Vec<usize> = (0..k).collect();
        loop {
            let mut blocked = vec![false; n];
            for &i in &pick {
                blocked[candidates[i]] = true;
            }
            if separates(&blocked) {
                return Ok(Some(k + direct));
            }
            // next combination
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if pick[i] < candidates.len() - k + i {
                    pick[i] += 1;
                    for j in i + 1..k {
                        pick[j] = pick[j - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
    Ok(None)
}

/// Inner-boundary vertices of the graph, the finite stand-in for "infinity".
pub fn boundary_targets(graph: &ClusterGraph) -> Vec<Site> {
    (0..graph.vertex_count()).filter(|&i| !graph.tag(i).interior()).map(|i| graph.site(i)).collect()
}
