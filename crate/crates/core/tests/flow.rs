use std::sync::Arc;

use perclab::flow::*;
use perclab::graph::ClusterGraph;
use perclab::lattice::{l1, site2, sub, BoxRegion, Site};
use perclab::percolation::{derive_seed, sample_cluster, sample_percolation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full(n: i32) -> Arc<ClusterGraph> {
    Arc::new(sample_percolation(BoxRegion::new(2, n).unwrap(), 1.0, 0).unwrap().largest_cluster().unwrap())
}

#[test]
fn single_interior_vertex_on_full_lattice() {
    let g = full(6);
    let t = boundary_targets(&g);
    assert_eq!(t.len(), 48);
    for x in [site2(0, 0), site2(2, -3), site2(4, 4)] {
        let cert = disjoint_paths(&g, &[x], &t).unwrap();
        assert_eq!(cert.count, 4);
        assert_eq!(cert.paths.len(), 4);
        verify_certificate(&g, &[x], &t, &cert).unwrap();
    }
    // a whole row of sources: two ends plus an up and a down path per vertex
    let row: Vec<Site> = (-2..=2).map(|x| site2(x, 0)).collect();
    assert_eq!(count_disjoint_paths(&g, &row, &t).unwrap(), 12);
}

#[test]
fn adjacent_targets_count_as_direct_paths() {
    let g = full(4);
    let x = site2(0, 0);
    let nbrs = [site2(1, 0), site2(0, 1), site2(-1, 0), site2(0, -1)];
    for k in 1..=4 {
        let t = &nbrs[..k];
        let cert = disjoint_paths(&g, &[x], t).unwrap();
        assert_eq!(cert.direct_edges, k);
        // the other neighbours still reach a target around the sides
        assert_eq!(cert.count, 4);
        verify_certificate(&g, &[x], t, &cert).unwrap();
    }
    // a path graph with the target next door: exactly one
    let p: Vec<Site> = (0..4).map(|x| site2(x, 0)).collect();
    let edges: Vec<_> = p.windows(2).map(|w| (w[0], w[1])).collect();
    let g = ClusterGraph::new(2, None, p.clone(), &edges).unwrap();
    let cert = disjoint_paths(&g, &[p[1]], &[p[2]]).unwrap();
    assert_eq!((cert.count, cert.direct_edges), (1, 1));
    assert!(cert.separator.is_empty());
}

#[test]
fn bad_inputs() {
    let g = full(3);
    assert!(disjoint_paths(&g, &[], &[site2(0, 0)]).is_err());
    assert!(disjoint_paths(&g, &[site2(0, 0)], &[]).is_err());
    assert!(disjoint_paths(&g, &[site2(0, 0)], &[site2(0, 0)]).is_err());
    assert!(disjoint_paths(&g, &[site2(9, 9)], &[site2(0, 0)]).is_err());
}

#[test]
fn bottleneck_of_width_one() {
    // two full blocks joined by one vertex
    let mut sites = Vec::new();
    let mut edges = Vec::new();
    for x in -3..=3 {
        for y in -1..=1 {
            if x == 0 && y != 0 {
                continue;
            }
            sites.push(site2(x, y));
        }
    }
    for &a in &sites {
        for b in [site2(a[0] + 1, a[1]), site2(a[0], a[1] + 1)] {
            if sites.contains(&b) {
                edges.push((a, b));
            }
        }
    }
    let g = ClusterGraph::new(2, None, sites, &edges).unwrap();
    let cert = disjoint_paths(&g, &[site2(-3, 0)], &[site2(3, 1)]).unwrap();
    assert_eq!(cert.count, 1);
    assert_eq!(cert.separator.len(), 1);
    assert!(cert.separator[0][0] >= -1 && cert.separator[0][0] <= 1);
}

fn random_sets(g: &ClusterGraph, rng: &mut ChaCha8Rng) -> (Vec<Site>, Vec<Site>) {
    let mut vs = g.vertices().to_vec();
    vs.shuffle(rng);
    let ns = rng.gen_range(1..=3);
    let s: Vec<Site> = vs[..ns].to_vec();
    let t: Vec<Site> = if rng.gen_bool(0.5) {
        boundary_targets(g).into_iter().filter(|x| !s.contains(x)).collect()
    } else {
        vs[ns..ns + rng.gen_range(1..=3)].to_vec()
    };
    (s, t)
}

#[test]
fn random_instances_have_valid_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut done = 0;
    for i in 0..100u64 {
        let g = sample_cluster(2, 3 + (i % 2) as i32, rng.gen_range(0.55..1.0), derive_seed(31, i)).unwrap();
        assert!(g.vertex_count() <= 100);
        let (s, t) = random_sets(&g, &mut rng);
        if t.is_empty() {
            continue;
        }
        let cert = disjoint_paths(&g, &s, &t).unwrap();
        verify_certificate(&g, &s, &t, &cert).unwrap();
        assert!(cert.count <= s.iter().map(|x| g.degree(g.vertex_index(*x).unwrap())).sum());
        done += 1;
    }
    assert!(done >= 95, "{done}");
}

#[test]
fn flow_matches_exhaustive_separator() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut compared = 0;
    for i in 0..40u64 {
        let g = sample_cluster(2, 3, rng.gen_range(0.55..0.95), derive_seed(8, i)).unwrap();
        let (s, t) = random_sets(&g, &mut rng);
        if t.is_empty() {
            continue;
        }
        let k = count_disjoint_paths(&g, &s, &t).unwrap();
        if k > 5 {
            continue;
        }
        let brute = min_separator_bruteforce(&g, &s, &t, k).unwrap();
        assert_eq!(brute, Some(k), "instance {i}");
        compared += 1;
    }
    assert!(compared >= 25, "{compared}");
}

#[test]
fn tampered_certificates_are_rejected() {
    let g = full(5);
    let s = [site2(0, 0), site2(1, 0)];
    let t = boundary_targets(&g);
    let cert = disjoint_paths(&g, &s, &t).unwrap();
    assert_eq!(cert.count, 6);

    let mut short = cert.clone();
    short.paths.pop();
    assert!(verify_certificate(&g, &s, &t, &short).is_err());

    let mut small = cert.clone();
    small.separator.pop();
    small.count -= 1;
    small.paths.pop();
    assert!(verify_certificate(&g, &s, &t, &small).is_err());

    let mut crossing = cert.clone();
    let other = crossing.paths[1].clone();
    if crossing.paths[0].len() > 2 && other.len() > 2 {
        crossing.paths[0][1] = other[1];
        assert!(verify_certificate(&g, &s, &t, &crossing).is_err());
    }
}

#[test]
fn paths_are_lattice_walks() {
    let g = sample_cluster(2, 8, 0.75, 12).unwrap();
    let x = g.site(g.vertex_count() / 2);
    let t = boundary_targets(&g);
    let cert = disjoint_paths(&g, &[x], &t).unwrap();
    for p in &cert.paths {
        assert_eq!(p[0], x);
        assert!(p.windows(2).all(|w| l1(sub(w[0], w[1])) == 1));
    }
}
