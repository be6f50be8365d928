use std::sync::Arc;

use perclab::field::{q, NumericKind, ScalarField};
use perclab::graph::ClusterGraph;
use perclab::harmonic::*;
use perclab::lattice::{site2, BoxRegion, Edge, Site};
use perclab::percolation::{derive_seed, sample_cluster, sample_percolation};
use perclab::potential::ls_slope;
use perclab::solver::{gradient, laplacian_apply, SolveOptions};
use perclab::LabError;
use proptest::prelude::*;

fn tight() -> SolveOptions {
    SolveOptions::with_tolerance(1e-12)
}

#[test]
fn full_lattice_plane_is_linear() {
    let g = sample_cluster(2, 6, 1.0, 0).unwrap();
    let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::exact()).unwrap();
    assert_eq!(plane.box_radius, 6);
    for (i, &x) in g.vertices().iter().enumerate() {
        assert_eq!(plane.field.values.rational().unwrap()[i], q(x[0] as i64));
    }
    let chi = corrector(&plane);
    assert!(chi.values.rational().unwrap().iter().all(|v| *v == q(0)));
    let g3 = sample_cluster(3, 4, 1.0, 0).unwrap();
    let p3 = corrected_plane(&g3, &[0.0, 0.0, 1.0], &tight()).unwrap();
    assert!(corrector(&p3).to_f64().iter().all(|v| v.abs() < 1e-9));
    assert!(corrected_plane(&g, &[0.0, 0.0], &tight()).is_err());
    assert!(corrected_plane(&g, &[1.0], &tight()).is_err());
}

#[test]
fn plane_and_corrector_are_linear_in_slope() {
    let g = sample_cluster(2, 10, 0.75, 4).unwrap();
    let a = corrected_plane(&g, &[1.0, 0.0], &tight()).unwrap();
    let b = corrected_plane(&g, &[2.0, 0.0], &tight()).unwrap();
    for (x, y) in a.field.to_f64().iter().zip(b.field.to_f64()) {
        assert!((2.0 * x - y).abs() < 1e-8);
    }
    for (x, y) in corrector(&a).to_f64().iter().zip(corrector(&b).to_f64()) {
        assert!((2.0 * x - y).abs() < 1e-8);
    }
}

#[test]
fn corrector_satisfies_its_equation() {
    let g = sample_cluster(2, 6, 0.7, 2).unwrap();
    let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::exact()).unwrap();
    let chi = laplacian_apply(&corrector(&plane));
    let lin = laplacian_apply(&ScalarField::from_fn_rational(&g, |x| q(x[0] as i64)));
    for i in 0..g.vertex_count() {
        if g.tag(i).interior() {
            assert_eq!(chi.values.rational().unwrap()[i], -lin.values.rational().unwrap()[i].clone());
        }
    }
}

#[test]
fn corrector_is_sublinear_on_one_sample() {
    let g = sample_cluster(2, 128, 0.8, 11).unwrap();
    let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::default()).unwrap();
    let stats = corrector_stats(&plane, &[32]).unwrap();
    assert!(stats.osc[0] < 0.5 * 32.0, "{}", stats.osc[0]);
    assert!(stats.to_csv().starts_with("radius,osc,maxgrad\n32,"));
    assert!(corrector_stats(&plane, &[65]).is_err());
}

#[test]
fn oscillation_and_lipschitz_examples() {
    let g = sample_cluster(2, 5, 1.0, 0).unwrap();
    let c = ScalarField::from_fn_f64(&g, |_| 7.0);
    assert_eq!(oscillation(&c, |_| true).unwrap(), 0.0);
    assert_eq!(lipschitz_constant(&c), 0.0);
    let x1 = ScalarField::from_fn_f64(&g, |x| x[0] as f64);
    assert_eq!(oscillation(&x1, |_| true).unwrap(), 10.0);
    assert_eq!(lipschitz_constant(&x1), 1.0);
    assert!(oscillation(&x1, |x| x[0] > 100).is_err());
}

/// Rows `|x_2| <= 4` of `Q_5` with every horizontal edge across `x_1 = 0 | 1` closed except
/// one, so each half drains to its own side face through a single bridge (99 vertices).
fn bottleneck() -> Arc<ClusterGraph> {
    let s = sample_percolation(BoxRegion::new(2, 5).unwrap(), 1.0, 0).unwrap();
    let mut edits: Vec<_> = (-5..=5).filter(|&y| y != 0).map(|y| (Edge::new(site2(0, y), site2(1, y)).unwrap(), false)).collect();
    for x in -5..=5 {
        edits.push((Edge::new(site2(x, 4), site2(x, 5)).unwrap(), false));
        edits.push((Edge::new(site2(x, -5), site2(x, -4)).unwrap(), false));
    }
    Arc::new(s.modify_edges(&edits).unwrap().largest_cluster().unwrap())
}

#[test]
fn bottleneck_gradient_exceeds_three() {
    let g = bottleneck();
    assert!(g.vertex_count() <= 100);
    let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::exact()).unwrap();
    let grad = gradient(&plane.field);
    let bridge = grad.oriented_exact(site2(0, 0), site2(1, 0)).unwrap();
    assert!(bridge > q(3), "{bridge}");
    assert!(lipschitz_constant(&plane.field) > 3.0);
}

#[test]
fn flux_on_full_lattice() {
    let g = sample_cluster(2, 8, 1.0, 0).unwrap();
    let plane = corrected_plane(&g, &[1.0, 0.0], &tight()).unwrap();
    let f = homogenized_flux(&plane).unwrap();
    assert!((f.per_open_edge - 1.0).abs() < 1e-9);
    assert!((f.per_site - 1.0).abs() < 1e-9);
    assert!((f.per_n - 17.0 / 8.0).abs() < 1e-9);
    assert_eq!(f.open_edges, 17);
    assert!(f.transverse.abs() < 1e-9);
    let p2 = corrected_plane(&g, &[0.0, 1.0], &tight()).unwrap();
    assert!(homogenized_flux(&p2).is_err());
}

#[test]
fn flux_positive_and_below_one() {
    let mut vals = Vec::new();
    for k in 0..6 {
        let g = sample_cluster(2, 32, 0.8, derive_seed(40, k)).unwrap();
        let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::default()).unwrap();
        vals.push(homogenized_flux(&plane).unwrap().per_site);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    assert!(mean > 0.0 && mean < 1.0, "{mean}");
}

#[test]
fn sensitivity_identity() {
    let g = sample_cluster(2, 16, 0.8, 2).unwrap();
    let empty = edge_flip_sensitivity(&g, &[], &[1.0, 0.0], &tight()).unwrap();
    assert!(empty.left.max_abs() < 1e-9 && empty.right.max_abs() == 0.0);

    let full = sample_cluster(2, 32, 1.0, 0).unwrap();
    let e = Edge::new(site2(0, 0), site2(1, 0)).unwrap();
    let rep = edge_flip_sensitivity(&full, &[e], &[1.0, 0.0], &tight()).unwrap();
    assert!(rep.max_abs_discrepancy <= 1e-8, "{}", rep.max_abs_discrepancy);
    assert!(rep.left.max_abs() > 0.1);

    assert!(matches!(edge_flip_sensitivity(&g, &[], &[1.0, 0.0], &SolveOptions::exact()), Err(LabError::Kind(_))));
}

#[test]
fn sensitivity_on_sparse_sample() {
    let g = sample_cluster(2, 64, 0.8, 5).unwrap();
    let flips = removable_edges(&g, 3, 9).unwrap();
    assert_eq!(flips.len(), 3);
    let rep = edge_flip_sensitivity(&g, &flips, &[1.0, 0.0], &tight()).unwrap();
    assert!(rep.max_abs_discrepancy <= 1e-6, "{}", rep.max_abs_discrepancy);
}

#[test]
fn disconnecting_flip_rejected() {
    let g = bottleneck();
    let e = Edge::new(site2(0, 0), site2(1, 0)).unwrap();
    assert!(matches!(edge_flip_sensitivity(&g, &[e], &[1.0, 0.0], &tight()), Err(LabError::Topology(_))));
}

#[test]
fn mixed_green_difference_examples() {
    // b1 - y1 - y2 - b2 with the ends on the boundary: G = (1/3) [[2,1],[1,2]]
    let sites = vec![site2(0, 0), site2(1, 0), site2(2, 0), site2(3, 0)];
    let edges: Vec<_> = sites.windows(2).map(|w| (w[0], w[1])).collect();
    let g = Arc::new(ClusterGraph::new(2, None, sites.clone(), &edges).unwrap().with_inner_boundary(&[sites[0], sites[3]]).unwrap());
    let e = (sites[1], sites[2]);
    let v = mixed_green_difference(&g, e, e, &SolveOptions::exact()).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-15);
    let r = mixed_green_difference(&g, (sites[2], sites[1]), e, &SolveOptions::exact()).unwrap();
    assert!((r + v).abs() < 1e-15);
    let r2 = mixed_green_difference(&g, e, (sites[2], sites[1]), &SolveOptions::exact()).unwrap();
    assert!((r2 + v).abs() < 1e-15);

    let b = sample_cluster(2, 16, 1.0, 0).unwrap();
    assert!(mixed_green_difference(&b, (site2(14, 0), site2(15, 0)), (site2(0, 0), site2(1, 0)), &tight()).is_err());
}

#[test]
fn mixed_green_difference_decays_like_inverse_square() {
    let g = sample_cluster(2, 256, 1.0, 0).unwrap();
    let e = (site2(0, 0), site2(1, 0));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in [8, 16, 32, 64] {
        let ep = (site2(r, 0), site2(r + 1, 0));
        let v = mixed_green_difference(&g, e, ep, &tight()).unwrap();
        xs.push((r as f64).ln());
        ys.push(v.abs().ln());
    }
    let slope = ls_slope(&xs, &ys);
    assert!((slope + 2.0).abs() <= 0.4, "{slope}");
}

#[test]
fn embedding_examples() {
    let g = sample_cluster(2, 6, 1.0, 0).unwrap();
    let emb = harmonic_embedding(&g, &tight()).unwrap();
    for &x in g.vertices() {
        let p = emb.position(x).unwrap();
        assert!((p[0] - x[0] as f64).abs() < 1e-9 && (p[1] - x[1] as f64).abs() < 1e-9);
    }
    let svg = embedding_svg(&emb, Some(&emb));
    let layer = |name: &str| {
        let start = svg.find(&format!("<g id=\"{name}\"")).unwrap();
        let body = &svg[start..];
        let body = &body[body.find('\n').unwrap()..body.find("</g>").unwrap()];
        body.to_string()
    };
    assert_eq!(layer("base"), layer("flipped"));
    assert_eq!(svg.matches("<polyline").count(), 2 * g.edge_count());
    let g3 = sample_cluster(3, 3, 1.0, 0).unwrap();
    assert!(harmonic_embedding(&g3, &tight()).is_err());
}

#[test]
fn embedding_flip_ripples_decay() {
    let s = sample_percolation(BoxRegion::new(2, 50).unwrap(), 0.8, 1).unwrap();
    let g = s.largest_cluster().unwrap();
    let e = central_cycle_edge(&g);
    let (_, _, rep) = embedding_flip(&s, e, &tight()).unwrap();
    assert!(rep.max_displacement > 0.0);
    let m = &rep.annulus_medians;
    assert!(m.len() >= 4);
    // medians fall from the innermost to the outermost annulus
    assert!(m.last().unwrap().1 < m[0].1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = m.iter().filter(|(_, v)| *v > 0.0).map(|(r, v)| (r.ln(), v.ln())).unzip();
    assert!(ls_slope(&xs, &ys) < 0.0);
}

fn central_cycle_edge(g: &ClusterGraph) -> Edge {
    for r in 0..10 {
        for &(a, b) in g.edges() {
            let (x, y) = (g.site(a), g.site(b));
            if x[0].abs().max(x[1].abs()) != r {
                continue;
            }
            let e = Edge::new(x, y).unwrap();
            if g.without_edges(&[e]).unwrap().is_connected() {
                return e;
            }
        }
    }
    panic!("no cycle edge near the centre");
}

#[test]
fn flipping_outside_cluster_is_invisible() {
    let s = sample_percolation(BoxRegion::new(2, 14).unwrap(), 0.6, 17).unwrap();
    let g = Arc::new(s.largest_cluster().unwrap());
    let outside: Vec<_> =
        s.region.edges().into_iter().filter(|e| !g.contains(e.a) && !g.contains(e.b)).take(5).map(|e| (e, !s.is_open(&e))).collect();
    assert!(!outside.is_empty());
    let s2 = s.modify_edges(&outside).unwrap();
    let g2 = Arc::new(s2.largest_cluster().unwrap());
    assert_eq!(*g2, *g);
    let a = corrected_plane(&g, &[1.0, 0.0], &tight()).unwrap();
    let b = corrected_plane(&g2, &[1.0, 0.0], &tight()).unwrap();
    assert_eq!(a.field.to_f64(), b.field.to_f64());
}

#[test]
fn zero_gradient_edges_can_be_removed() {
    let mut tested = 0;
    for seed in 0..40 {
        let g = sample_cluster(2, 12, 0.65, seed).unwrap();
        let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::exact()).unwrap();
        let grad = gradient(&plane.field);
        for (k, &(a, b)) in g.edges().iter().enumerate() {
            if grad.values.rational().unwrap()[k] != q(0) {
                continue;
            }
            let e = Edge::new(g.site(a), g.site(b)).unwrap();
            let reduced = Arc::new(g.without_edges(&[e]).unwrap());
            if !reduced.is_connected() {
                continue;
            }
            let p2 = corrected_plane(&reduced, &[1.0, 0.0], &SolveOptions::exact()).unwrap();
            assert_eq!(p2.field.values.rational().unwrap(), plane.field.values.rational().unwrap());
            tested += 1;
            break;
        }
        if tested >= 3 {
            break;
        }
    }
    assert!(tested >= 3, "only {tested} instances found");
}

fn float_field(g: &Arc<ClusterGraph>, seed: u64) -> ScalarField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_f64(g, (0..g.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oscillation_monotone_in_region(seed in 0u64..5000, r1 in 1.0f64..6.0, extra in 0.0f64..4.0, cx in -3i32..3, cy in -3i32..3) {
        let g = sample_cluster(2, 7, 0.8, seed).unwrap();
        let u = float_field(&g, seed);
        let c: Site = site2(cx, cy);
        let small = oscillation(&u, ball(c, r1));
        let large = oscillation(&u, ball(c, r1 + extra)).unwrap();
        if let Ok(s) = small {
            prop_assert!(s <= large);
            prop_assert!(s >= 0.0);
        }
    }

    #[test]
    fn corrector_stats_nondecreasing(seed in 0u64..5000) {
        let g = sample_cluster(2, 16, 0.8, seed).unwrap();
        let plane = corrected_plane(&g, &[1.0, 0.0], &SolveOptions::default()).unwrap();
        let st = corrector_stats(&plane, &[2, 4, 8]).unwrap();
        prop_assert!(st.osc.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(st.max_grad.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn kinds_are_not_mixed() {
    let g = sample_cluster(2, 4, 1.0, 0).unwrap();
    let a = ScalarField::zeros(&g, NumericKind::Rational);
    let b = ScalarField::zeros(&g, NumericKind::Float64);
    assert!(a.combine(1.0, &b, 1.0).is_err());
}
