//! Abelian sandpile on a cluster whose exterior edges form the dissipative sink, the
//! sandpile Markov chain, toppling invariants and the spectrum of the chain.

mod algebra;
mod census;
mod spectrum;

pub use algebra::{
    count_spanning_trees, determinant_spd, reduced_laplacian, smith_normal_form, toppling_invariants, toppling_invariants_via, DualGroup,
    Frequency, Snf, SnfRoute, EXACT_SNF_CAP,
};
pub use census::{gadget_frequency, plant_gadget, slow_mixing_gadget_census, Census, Diagonal, GadgetOccurrence};
pub use spectrum::{eigenvalue, eigenvalue_exact, group_json, l2_mixing_curve, spectrum_csv, CurveMode, SpectrumReport, DEFAULT_CAP};

pub use crate::diamond::diamond_peel as diamond_peel_bridge;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, LabError, Result};
use crate::graph::ClusterGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct SandpileState {
    pub graph: Arc<ClusterGraph>,
    chips: Vec<i64>,
}

/// Toppling counts of one stabilization.
pub type Odometer = Vec<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopplePolicy {
    /// Queue of unstable vertices, each toppled until stable when dequeued.
    Fifo,
    /// One toppling at a time at a uniformly chosen unstable vertex.
    Random(u64),
}

fn full_degree(g: &ClusterGraph, v: usize) -> i64 {
    g.full_degree(v) as i64
}

impl SandpileState {
    pub fn new(graph: &Arc<ClusterGraph>, chips: Vec<i64>) -> Result<SandpileState> {
        if chips.len() != graph.vertex_count() {
            return param("one chip count per vertex is required");
        }
        if let Some(i) = chips.iter().position(|&c| c < 0) {
            return param(format!("negative chip count at {:?}", graph.site(i)));
        }
        Ok(SandpileState { graph: graph.clone(), chips })
    }

    /// `deg - 1` chips everywhere.
    pub fn saturated(graph: &Arc<ClusterGraph>) -> Result<SandpileState> {
        let chips = (0..graph.vertex_count()).map(|v| full_degree(graph, v) - 1).collect();
        Self::new(graph, chips)
    }

    pub fn chips(&self) -> &[i64] {
        &self.chips
    }

    pub fn is_stable(&self) -> bool {
        (0..self.chips.len()).all(|v| self.chips[v] < full_degree(&self.graph, v))
    }

    pub fn add_chip(&mut self, v: usize) {
        self.chips[v] += 1;
    }

    pub fn mean(&self) -> f64 {
        self.chips.iter().sum::<i64>() as f64 / self.chips.len() as f64
    }
}

/// Errors unless every component of the graph reaches the sink.
fn check_dissipative(g: &ClusterGraph) -> Result<()> {
    let comp = g.components();
    let k = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut sink = vec![false; k];
    for v in 0..g.vertex_count() {
        if g.exterior_degree(v) > 0 {
            sink[comp[v]] = true;
        }
    }
    if let Some(c) = sink.iter().position(|s| !s) {
        let v = comp.iter().position(|&x| x == c).expect("component vertex");
        return Err(LabError::Topology(format!(
            "the component of {:?} has no edge to the exterior, stabilization would not terminate",
            g.site(v)
        )));
    }
    Ok(())
}

fn topple(g: &ClusterGraph, chips: &mut [i64], odo: &mut [i64], v: usize, times: i64) {
    chips[v] -= times * full_degree(g, v);
    odo[v] += times;
    for w in g.neighbours(v) {
        chips[w] += times;
    }
}

pub fn stabilize(state: &SandpileState, policy: TopplePolicy) -> Result<(SandpileState, Odometer)> {
    let g = state.graph.clone();
    check_dissipative(&g)?;
    let n = g.vertex_count();
    let mut chips = state.chips.clone();
    let mut odo = vec![0i64; n];
    let unstable = |c: &[i64], v: usize| c[v] >= full_degree(&g, v);
    match policy {
        TopplePolicy::Fifo => {
            let mut queued = vec![false; n];
            let mut q: VecDeque<usize> = VecDeque::new();
            for v in 0..n {
                if unstable(&chips, v) {
                    queued[v] = true;
                    q.push_back(v);
                }
            }
            while let Some(v) = q.pop_front() {
                queued[v] = false;
                let times = chips[v] / full_degree(&g, v);
                if times == 0 {
                    continue;
                }
                topple(&g, &mut chips, &mut odo, v, times);
                for w in g.neighbours(v) {
                    if !queued[w] && unstable(&chips, w) {
                        queued[w] = true;
                        q.push_back(w);
                    }
                }
            }
        }
        TopplePolicy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pos = vec![usize::MAX; n];
            let mut set: Vec<usize> = Vec::new();
            let insert = |set: &mut Vec<usize>, pos: &mut Vec<usize>, v: usize| {
                if pos[v] == usize::MAX {
                    pos[v] = set.len();
                    set.push(v);
                }
            };
            for v in 0..n {
                if unstable(&chips, v) {
                    insert(&mut set, &mut pos, v);
                }
            }
            while !set.is_empty() {
                let k = rng.gen_range(0..set.len());
                let v = set[k];
                topple(&g, &mut chips, &mut odo, v, 1);
                if !unstable(&chips, v) {
                    let last = *set.last().expect("nonempty");
                    set.swap_remove(k);
                    pos[v] = usize::MAX;
                    if last != v {
                        pos[last] = k;
                    }
                }
                for w in g.neighbours(v) {
                    if unstable(&chips, w) {
                        insert(&mut set, &mut pos, w);
                    }
                }
            }
        }
    }
    Ok((SandpileState { graph: g, chips }, odo))
}

/// `L·odo` with the full-degree Laplacian including exterior edges.
pub fn laplacian_times(g: &ClusterGraph, odo: &[i64]) -> Vec<i64> {
    (0..g.vertex_count()).map(|v| full_degree(g, v) * odo[v] - g.neighbours(v).map(|w| odo[w]).sum::<i64>()).collect()
}

/// Checks `s_final = s_initial - L·odo`.
pub fn odometer_consistent(initial: &SandpileState, fin: &SandpileState, odo: &[i64]) -> bool {
    let l = laplacian_times(&initial.graph, odo);
    (0..l.len()).all(|v| fin.chips[v] == initial.chips[v] - l[v])
}

/// One chain step from a stable state: a chip at a uniform vertex, then FIFO stabilization.
/// Returns the new state, the chosen vertex and the odometer.
pub fn markov_step(state: &SandpileState, rng: &mut impl Rng) -> Result<(SandpileState, usize, Odometer)> {
    if !state.is_stable() {
        return param("chain steps start from a stable sandpile");
    }
    let v = rng.gen_range(0..state.chips.len());
    let mut s = state.clone();
    s.add_chip(v);
    let (out, odo) = stabilize(&s, TopplePolicy::Fifo)?;
    Ok((out, v, odo))
}

/// Mean chip count of the chain started from saturation, recorded at `t = 0` and every
/// `record_every` steps.
pub fn run_chain(graph: &Arc<ClusterGraph>, steps: u64, seed: u64, record_every: u64) -> Result<Vec<(u64, f64)>> {
    if record_every == 0 {
        return param("record_every must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SandpileState::saturated(graph)?;
    check_dissipative(graph)?;
    let g = graph.clone();
    let n = g.vertex_count();
    let mut queue = VecDeque::new();
    let mut trace = vec![(0, s.mean())];
    for t in 1..=steps {
        // in-place FIFO stabilization after a single chip, without the odometer
        let v = rng.gen_range(0..n);
        s.chips[v] += 1;
        queue.push_back(v);
        while let Some(v) = queue.pop_front() {
            let deg = full_degree(&g, v);
            if s.chips[v] < deg {
                continue;
            }
            let times = s.chips[v] / deg;
            s.chips[v] -= times * deg;
            for w in g.neighbours(v) {
                s.chips[w] += times;
                if s.chips[w] >= full_degree(&g, w) && s.chips[w] - times < full_degree(&g, w) {
                    queue.push_back(w);
                }
            }
        }
        if t % record_every == 0 {
            trace.push((t, s.mean()));
        }
    }
    Ok(trace)
}

pub fn trace_csv(trace: &[(u64, f64)]) -> String {
    let mut out = String::from("t,meanChips\n");
    for (t, m) in trace {
        out.push_str(&format!("{t},{m}\n"));
    }
    out
}

/// First recorded time after which the trace stays within a relative band of the mean of
/// its final half, if that time falls in the first half of the trace.
pub fn plateau_time(trace: &[(u64, f64)], band: f64) -> Option<u64> {
    if trace.is_empty() {
        return None;
    }
    let tail = &trace[trace.len() / 2..];
    let level = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
    let inside = |m: f64| (m - level).abs() <= band * level.abs();
    let k = trace.iter().rposition(|&(_, m)| !inside(m)).map_or(0, |i| i + 1);
    (k < trace.len() && k <= trace.len() / 2).then(|| trace[k].0)
}

/// Burning test: a stable sandpile is recurrent iff adding the sink's chips and stabilizing
/// topples every vertex exactly once.
pub fn is_recurrent(state: &SandpileState) -> Result<bool> {
    if !state.is_stable() {
        return Ok(false);
    }
    let g = &state.graph;
    let mut s = state.clone();
    for v in 0..g.vertex_count() {
        s.chips[v] += g.exterior_degree(v) as i64;
    }
    let (fin, odo) = stabilize(&s, TopplePolicy::Fifo)?;
    Ok(odo.iter().all(|&k| k == 1) && fin.chips == state.chips)
}
