use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use perclab::blockcut::*;
use perclab::field::{q, Q};
use perclab::graph::ClusterGraph;
use perclab::harmonic::corrected_plane;
use perclab::lattice::{site2, BoxRegion, Site};
use perclab::percolation::{derive_seed, sample_cluster, sample_percolation};
use perclab::potential::{potential, PoleFunction};
use perclab::solver::SolveOptions;
use proptest::prelude::*;

fn path_graph(sites: &[Site]) -> Arc<ClusterGraph> {
    let edges: Vec<_> = sites.windows(2).map(|w| (w[0], w[1])).collect();
    Arc::new(ClusterGraph::new(2, None, sites.to_vec(), &edges).unwrap())
}

fn graph_from(sites: &[Site], edges: &[(Site, Site)]) -> Arc<ClusterGraph> {
    Arc::new(ClusterGraph::new(2, None, sites.to_vec(), edges).unwrap())
}

#[test]
fn small_trees() {
    // a square is one block: the square lattice has no triangles
    let sq = [site2(0, 0), site2(1, 0), site2(1, 1), site2(0, 1)];
    let g = graph_from(&sq, &[(sq[0], sq[1]), (sq[1], sq[2]), (sq[2], sq[3]), (sq[3], sq[0])]);
    let t = block_cut_tree(&g, sq[0]).unwrap();
    assert_eq!(t.components.len(), 1);
    assert!(t.cut_vertices.is_empty());
    assert_eq!(t.node_count(), 1);

    let p: Vec<Site> = (0..5).map(|x| site2(x, 0)).collect();
    let g = path_graph(&p);
    let t = block_cut_tree(&g, p[0]).unwrap();
    assert_eq!(t.components.len(), 4);
    assert_eq!(t.cut_vertices, vec![1, 2, 3]);
    verify_tree(&t).unwrap();
    // rooted at an end the tree is a chain
    let mut depth = 0;
    let mut x = t.root;
    while let Some(&c) = t.children[x].first() {
        assert_eq!(t.children[x].len(), 1);
        x = c;
        depth += 1;
    }
    assert_eq!(depth, 6);

    let single = graph_from(&[site2(0, 0)], &[]);
    let t = block_cut_tree(&single, site2(0, 0)).unwrap();
    assert_eq!(t.components.len(), 1);
    assert_eq!(t.components[0].edges.len(), 0);
}

#[test]
fn disconnected_graph_rejected() {
    let r = ClusterGraph::new(2, None, vec![site2(0, 0), site2(3, 3)], &[]);
    assert!(matches!(r, Err(perclab::LabError::Topology(_))));
}

#[test]
fn random_clusters_match_bruteforce() {
    let mut checked = 0;
    for i in 0..100u64 {
        let seed = derive_seed(2024, i);
        let (d, n, p) = if i % 4 == 3 { (3, 2, 0.35) } else { (2, 3 + (i % 4) as i32, 0.5 + 0.1 * (i % 3) as f64) };
        let g = sample_cluster(d, n, p, seed).unwrap();
        assert!(g.vertex_count() <= 200);
        let t = block_cut_tree(&g, g.site(0)).unwrap();
        verify_tree(&t).unwrap();
        // every edge in exactly one component, and the tree has one node fewer edges
        let tree_edges = t.parent.iter().filter(|p| p.is_some()).count();
        assert_eq!(tree_edges + 1, t.node_count());
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn flux_examples() {
    let p: Vec<Site> = (0..3).map(|x| site2(x, 0)).collect();
    let g = path_graph(&p);
    let t = block_cut_tree(&g, p[0]).unwrap();
    let flux = cut_vertex_flux(&t, &[q(0), q(1), q(2)]);
    let cut = t.cut_node_of(1).unwrap();
    assert_eq!(flux.i_in[&cut], q(1));
    let child = t.children[cut][0];
    assert_eq!(flux.i_out[&(cut, child)], q(1));

    let flat = cut_vertex_flux(&t, &[q(5), q(5), q(5)]);
    assert!(flat.i_in.values().chain(flat.i_out.values()).all(|v| v.is_zero()));

    // on a percolation cluster a constant has zero flux everywhere
    let g = sample_cluster(2, 6, 0.6, 8).unwrap();
    let t = block_cut_tree(&g, g.site(0)).unwrap();
    let flat = cut_vertex_flux(&t, &vec![2.5; g.vertex_count()]);
    assert!(flat.i_in.values().chain(flat.i_out.values()).all(|v| *v == 0.0));
}

#[test]
fn increasing_subgraph_examples() {
    // level set {x0, x1} only: the subgraph is the single seed endpoint
    let s = [site2(0, 0), site2(1, 0), site2(2, 0), site2(1, 1)];
    let g = graph_from(&s, &[(s[0], s[1]), (s[1], s[2]), (s[1], s[3])]);
    let u = [q(0), q(0), q(1), q(2)];
    let l = [q(0), q(1), q(2), q(3)];
    let sub = increasing_subgraph(&g, &u, &l, s[0], &Q::zero()).unwrap();
    assert_eq!(sub.vertices(), &[site2(1, 0)]);

    // strictly monotone path inside the level set: the whole forward path
    let p: Vec<Site> = (0..6).map(|x| site2(x, 0)).collect();
    let g = path_graph(&p);
    let zero = vec![q(0); 6];
    let l: Vec<Q> = (0..6).map(q).collect();
    let sub = increasing_subgraph(&g, &zero, &l, p[0], &Q::zero()).unwrap();
    assert_eq!(sub.vertices(), &p[1..]);
    assert_eq!(sub.edge_count(), 4);

    // a dip stops the walk
    let l2 = [q(0), q(1), q(2), q(1), q(5), q(6)];
    let sub = increasing_subgraph(&g, &zero, &l2, p[0], &Q::zero()).unwrap();
    assert_eq!(sub.vertices(), &p[1..3]);

    // bad seeds
    assert!(increasing_subgraph(&g, &zero, &l, p[5], &Q::zero()).is_err());
    let decreasing: Vec<Q> = (0..6).map(|x| q(-x)).collect();
    assert!(increasing_subgraph(&g, &zero, &decreasing, p[0], &Q::zero()).is_err());
}

/// Every vertex reachable from `x1` by an explicit enumeration of simple paths inside the
/// level set along which `l` strictly increases.
fn brute_reachable(g: &ClusterGraph, u: &[i64], l: &[i64], i0: usize, i1: usize) -> BTreeSet<Site> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![i1]];
    while let Some(path) = stack.pop() {
        let y = *path.last().unwrap();
        out.insert(g.site(y));
        for z in g.neighbours(y) {
            if !path.contains(&z) && u[z] == u[i0] && l[z] > l[y] {
                let mut next = path.clone();
                next.push(z);
                stack.push(next);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increasing_subgraph_matches_path_enumeration(
        u in proptest::collection::vec(0i64..2, 15),
        l in proptest::collection::vec(0i64..6, 15),
        closed in proptest::collection::vec(0usize..22, 0..5),
    ) {
        // 5 x 3 grid with a few edges removed, seed (0,0) -> (1,0)
        let sites: Vec<Site> = (0..5).flat_map(|x| (0..3).map(move |y| site2(x, y))).collect();
        let mut edges = Vec::new();
        for &x in &sites {
            for y in [site2(x[0] + 1, x[1]), site2(x[0], x[1] + 1)] {
                if sites.contains(&y) {
                    edges.push((x, y));
                }
            }
        }
        let seed_edge = (site2(0, 0), site2(1, 0));
        let edges: Vec<_> = edges
            .iter()
            .enumerate()
            .filter(|(k, e)| **e == seed_edge || !closed.contains(k))
            .map(|(_, e)| *e)
            .collect();
        let Ok(g) = ClusterGraph::new(2, None, sites.clone(), &edges).map(Arc::new) else { return Ok(()) };
        let i0 = g.vertex_index(site2(0, 0)).unwrap();
        let i1 = g.vertex_index(site2(1, 0)).unwrap();
        let mut u = u;
        let mut l = l;
        u[i1] = u[i0];
        l[i0] = 0;
        l[i1] = l[i1].max(1);
        let uq: Vec<Q> = u.iter().map(|&v| q(v)).collect();
        let lq: Vec<Q> = l.iter().map(|&v| q(v)).collect();
        let sub = increasing_subgraph(&g, &uq, &lq, site2(0, 0), &Q::zero()).unwrap();
        let got: BTreeSet<Site> = sub.vertices().iter().copied().collect();
        prop_assert_eq!(&got, &brute_reachable(&g, &u, &l, i0, i1));
        prop_assert!(!got.contains(&site2(0, 0)));
        for &(a, b) in sub.edges() {
            let (ia, ib) = (g.vertex_index(sub.site(a)).unwrap(), g.vertex_index(sub.site(b)).unwrap());
            prop_assert!(g.edge_between(ia, ib).is_some());
            prop_assert!(l[ia] != l[ib]);
        }
        let want_edges = g
            .edges()
            .iter()
            .filter(|&&(a, b)| got.contains(&g.site(a)) && got.contains(&g.site(b)) && l[a] != l[b])
            .count();
        prop_assert_eq!(sub.edge_count(), want_edges);
    }
}

#[test]
fn exploration_on_a_hand_built_tree() {
    let x0 = site2(0, 0);
    let sites = [x0, site2(1, 0), site2(2, 0), site2(2, 1), site2(2, 2), site2(2, -1), site2(2, -2), site2(3, 0)];
    let e = |a: usize, b: usize| (sites[a], sites[b]);
    let g = graph_from(&sites, &[e(0, 1), e(1, 2), e(2, 3), e(3, 4), e(2, 5), e(5, 6), e(2, 7)]);
    let lv = |x: Site| -> Q {
        let k = sites.iter().position(|&y| y == x).unwrap();
        [q(0), q(1), q(2), q(5), q(6), q(3), q(4), Q::new(5.into(), 2.into())][k].clone()
    };
    let l: Vec<Q> = g.vertices().iter().map(|&x| lv(x)).collect();
    let u = vec![q(0); g.vertex_count()];
    let rep = flux_exploration(&g, &u, &l, x0, &Q::zero()).unwrap();
    // root, cut (2,0), up component, cut (2,1), top component
    assert_eq!(rep.path.len(), 5);
    let Node::Cut(v) = rep.tree.nodes[rep.path[1]] else { panic!("cut expected") };
    assert_eq!(rep.subgraph.site(v), site2(2, 0));
    let Node::Cut(v) = rep.tree.nodes[rep.path[3]] else { panic!("cut expected") };
    assert_eq!(rep.subgraph.site(v), site2(2, 1));
    let Node::Component(c) = rep.tree.nodes[rep.leaf] else { panic!("leaf is a component") };
    let leaf: Vec<Site> = rep.tree.components[c].vertices.iter().map(|&v| rep.subgraph.site(v)).collect();
    assert_eq!(leaf, vec![site2(2, 1), site2(2, 2)]);
    assert_eq!(rep.witness, None);
    assert_eq!(rep.telescoping_lhs, q(6));
    // i_in is 1 at (2,0) and 3 at (2,1)
    assert_eq!(rep.telescoping_rhs, q(1));
    assert!(rep.telescoping_holds());
    // the two branch edges below the first cut are non-root, non-leaf components
    assert_eq!((rep.ineq_component_checked, rep.ineq_component_failures), (2, 0));
    assert_eq!((rep.ineq_cut_checked, rep.ineq_cut_failures), (2, 0));

    // a single component: the path is the root
    let p: Vec<Site> = (0..2).map(|x| site2(x, 0)).collect();
    let g = path_graph(&p);
    let rep = flux_exploration(&g, &[q(0), q(0)], &[q(0), q(1)], p[0], &Q::zero()).unwrap();
    assert_eq!(rep.path, vec![rep.tree.root]);
}

struct Instance {
    graph: Arc<ClusterGraph>,
    u: Vec<Q>,
    l: Vec<Q>,
}

/// Mirror-symmetric p = 0.8 environment with an antisymmetric dipole: `u_f` vanishes on the
/// axis exactly, which gives level sets with increasing edges.
fn mirrored_instance(n: i32, seed: u64) -> Option<Instance> {
    let s = sample_percolation(BoxRegion::new(2, n).unwrap(), 0.8, seed).unwrap().mirrored().unwrap();
    let graph = Arc::new(s.largest_cluster().ok()?);
    let z = (0..n / 2).flat_map(|a| [site2(a, 2), site2(-a, 2)]).find(|&z| graph.contains(z) && graph.contains(site2(z[0], -2)))?;
    let f = PoleFunction::dipole(z, site2(z[0], -2));
    let pot = potential(&graph, &f, &SolveOptions::exact()).unwrap();
    let plane = corrected_plane(&graph, &[1.0, 0.0], &SolveOptions::exact()).unwrap();
    Some(Instance { u: pot.field.values.rational().unwrap().to_vec(), l: plane.field.values.rational().unwrap().to_vec(), graph })
}

#[test]
fn exploration_on_mirrored_samples() {
    let zero = Q::zero();
    let (mut runs, mut witnesses, mut checked) = (0, 0, 0);
    for i in 0..12u64 {
        let Some(inst) = mirrored_instance(10, derive_seed(77, i)) else { continue };
        let g = &inst.graph;
        for x in g.vertices().iter().filter(|x| x[1] == 0) {
            assert!(inst.u[g.vertex_index(*x).unwrap()].is_zero(), "antisymmetry");
        }
        for x0 in exploration_seeds(g, &inst.u, &inst.l, &zero) {
            let rep = flux_exploration(g, &inst.u, &inst.l, x0, &zero).unwrap();
            runs += 1;
            checked += rep.ineq_component_checked + rep.ineq_cut_checked;
            assert_eq!(rep.ineq_component_failures, 0, "{x0:?}");
            assert_eq!(rep.ineq_cut_failures, 0, "{x0:?}");
            assert!(rep.telescoping_holds(), "{x0:?}: {:?} < {:?}", rep.telescoping_lhs, rep.telescoping_rhs);
            if let Some((y, z)) = rep.witness {
                witnesses += 1;
                let (iy, iz) = (g.vertex_index(y).unwrap(), g.vertex_index(z).unwrap());
                assert!(g.edge_between(iy, iz).is_some());
                assert_ne!(inst.l[iy], inst.l[iz]);
                assert_ne!(inst.u[iy], inst.u[iz]);
            }
        }
    }
    assert!(runs >= 10, "{runs} explorations");
    assert!(witnesses > 0);
    eprintln!("explorations {runs}, witnesses {witnesses}, inequalities checked {checked}");
}

#[test]
fn float_and_exact_exploration_agree() {
    let inst = mirrored_instance(8, derive_seed(5, 0)).unwrap();
    let g = &inst.graph;
    let uf: Vec<f64> = inst.u.iter().map(|v| v.to_f64().unwrap()).collect();
    let lf: Vec<f64> = inst.l.iter().map(|v| v.to_f64().unwrap()).collect();
    let seeds = exploration_seeds(g, &inst.u, &inst.l, &Q::zero());
    assert_eq!(exploration_seeds(g, &uf, &lf, &1e-12), seeds);
    for x0 in seeds {
        let a = flux_exploration(g, &inst.u, &inst.l, x0, &Q::zero()).unwrap();
        let b = flux_exploration(g, &uf, &lf, x0, &1e-12).unwrap();
        assert_eq!(a.path, b.path);
        assert_eq!(a.witness, b.witness);
    }
}

#[test]
fn tree_exports() {
    let p: Vec<Site> = (0..3).map(|x| site2(x, 0)).collect();
    let t = block_cut_tree(&path_graph(&p), p[0]).unwrap();
    assert_eq!(t.to_text(), "component 0: (0,0) (1,0)\n  cut 2: (1,0)\n    component 1: (1,0) (2,0)\n");
    let dot = t.to_dot();
    assert!(dot.starts_with("graph blockcut {"));
    assert!(dot.contains("n0 -- n2;"));
    assert!(dot.contains("n2 -- n1;"));
}

#[test]
fn flux_inequalities_on_whole_cluster_level_sets() {
    // u ≡ 0 puts the whole cluster in one level set, so nothing is pruned and the
    // inequalities rest on the harmonicity of the plane alone
    let zero = Q::zero();
    let (mut runs, mut c1, mut c2) = (0, 0, 0);
    for i in 0..6u64 {
        let g = sample_cluster(2, 8, 0.8, derive_seed(90, i)).unwrap();
        let l = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::exact()).unwrap().field.values.rational().unwrap().to_vec();
        let u = vec![zero.clone(); g.vertex_count()];
        for x0 in exploration_seeds(&g, &u, &l, &zero) {
            let rep = flux_exploration(&g, &u, &l, x0, &zero).unwrap();
            runs += 1;
            c1 += rep.ineq_component_checked;
            c2 += rep.ineq_cut_checked;
            assert_eq!(rep.ineq_component_failures, 0, "{x0:?}");
            assert_eq!(rep.ineq_cut_failures, 0, "{x0:?}");
            assert!(rep.telescoping_holds(), "{x0:?}");
            assert_eq!(rep.witness, None);
        }
    }
    eprintln!("runs {runs}, component checks {c1}, cut checks {c2}");
    assert!(runs > 50 && c1 > 0 && c2 > 0);
}
