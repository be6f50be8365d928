use std::sync::Arc;

use perclab::field::{q, qf, NumericKind, ScalarField, Values, Q};
use perclab::gadget::build_gadget;
use perclab::graph::ClusterGraph;
use perclab::lattice::{add, site2, unit, BoxRegion, Site};
use perclab::percolation::{sample_cluster, sample_percolation};
use perclab::potential::ls_slope;
use perclab::solver::*;
use perclab::LabError;
use proptest::prelude::*;

fn path_graph(len: i32) -> Arc<ClusterGraph> {
    let sites: Vec<Site> = (0..len).map(|x| site2(x, 0)).collect();
    let edges: Vec<_> = sites.windows(2).map(|w| (w[0], w[1])).collect();
    Arc::new(ClusterGraph::new(2, None, sites, &edges).unwrap())
}

fn plus_graph() -> Arc<ClusterGraph> {
    let c = site2(0, 0);
    let arms: Vec<Site> = perclab::lattice::neighbours(c, 2).collect();
    let mut sites = arms.clone();
    sites.push(c);
    let edges: Vec<_> = arms.iter().map(|&a| (c, a)).collect();
    Arc::new(ClusterGraph::new(2, None, sites, &edges).unwrap().with_inner_boundary(&arms).unwrap())
}

fn exact_field(g: &Arc<ClusterGraph>, v: Vec<Q>) -> ScalarField {
    ScalarField::from_rational(g, v).unwrap()
}

#[test]
fn laplacian_examples() {
    let g = sample_cluster(2, 5, 1.0, 0).unwrap();
    let c = ScalarField::from_fn_f64(&g, |_| 3.5);
    assert_eq!(max_abs(&laplacian_apply(&c)), 0.0);
    let x1 = ScalarField::from_fn_rational(&g, |x| q(x[0] as i64));
    let lx = laplacian_apply(&x1);
    for (i, v) in lx.values.rational().unwrap().iter().enumerate() {
        if g.tag(i).interior() {
            assert_eq!(*v, q(0));
        }
    }
    let v = g.vertex_index(site2(0, 0)).unwrap();
    let delta_v = delta(&g, v, NumericKind::Rational);
    let l = laplacian_apply(&delta_v);
    assert_eq!(l.at_exact(site2(0, 0)).unwrap(), q(-4));
    assert_eq!(l.at_exact(site2(1, 0)).unwrap(), q(1));
    assert_eq!(l.at_exact(site2(2, 0)).unwrap(), q(0));
    let other = sample_cluster(2, 4, 1.0, 0).unwrap();
    assert!(laplacian_on(&other, &c).is_err());
}

#[test]
fn dirichlet_examples() {
    let g = path_graph(3);
    let bd = vec![true, false, true];
    let bv = exact_field(&g, vec![q(0), q(0), q(1)]);
    let zero = ScalarField::zeros(&g, NumericKind::Rational);
    let u = solve_dirichlet(&g, &bd, &bv, &zero, &SolveOptions::exact()).unwrap();
    assert_eq!(u.values.rational().unwrap()[1], qf(1, 2));

    let t1 = build_gadget(1).unwrap();
    let gg = t1.graph().unwrap();
    let bd = mask_from_sites(&gg, &[t1.s, t1.t]).unwrap();
    let bv = ScalarField::from_fn_rational(&gg, |x| if x == t1.t { q(1) } else { q(0) });
    let zero = ScalarField::zeros(&gg, NumericKind::Rational);
    let h = solve_dirichlet(&gg, &bd, &bv, &zero, &SolveOptions::exact()).unwrap();
    assert_eq!(h.at_exact(t1.a).unwrap(), qf(1, 3));

    // empty interior returns the boundary data
    let all = vec![true; 3];
    let bv = ScalarField::from_f64(&g, vec![4.0, -1.0, 2.5]).unwrap();
    let z = ScalarField::zeros(&g, NumericKind::Float64);
    let u = solve_dirichlet(&g, &all, &bv, &z, &SolveOptions::default()).unwrap();
    assert_eq!(u.to_f64(), vec![4.0, -1.0, 2.5]);
}

#[test]
fn dirichlet_errors() {
    let g = path_graph(4);
    let z = ScalarField::zeros(&g, NumericKind::Float64);
    let none = vec![false; 4];
    assert!(matches!(solve_dirichlet(&g, &none, &z, &z, &SolveOptions::default()), Err(LabError::IllPosed(_))));
    let big = sample_cluster(2, 20, 1.0, 0).unwrap();
    let bd = big.boundary_mask();
    let bv = ScalarField::from_fn_f64(&big, |x| x[0] as f64);
    let zb = ScalarField::zeros(&big, NumericKind::Float64);
    let opts = SolveOptions { max_iterations: 2, tolerance: 1e-14, ..Default::default() };
    assert!(matches!(solve_dirichlet(&big, &bd, &bv, &zb, &opts), Err(LabError::Convergence { .. })));
    let zr = ScalarField::zeros(&g, NumericKind::Rational);
    let bd = vec![true, false, false, true];
    assert!(matches!(solve_dirichlet(&g, &bd, &zr, &zr, &SolveOptions::default()), Err(LabError::Kind(_))));
    assert!(solve_dirichlet(&g, &bd, &z, &z, &SolveOptions::with_tolerance(0.0)).is_err());
}

#[test]
fn neumann_examples() {
    let g = path_graph(2);
    let rhs = exact_field(&g, vec![q(1), q(-1)]);
    let v = solve_neumann(&g, &rhs, &SolveOptions::exact()).unwrap();
    assert_eq!(v.values.rational().unwrap(), &[qf(1, 2), qf(-1, 2)]);
    let zero = ScalarField::zeros(&g, NumericKind::Rational);
    let v0 = solve_neumann(&g, &zero, &SolveOptions::exact()).unwrap();
    assert!(v0.values.rational().unwrap().iter().all(|x| *x == q(0)));
    let bad = exact_field(&g, vec![q(1), q(0)]);
    assert!(matches!(solve_neumann(&g, &bad, &SolveOptions::exact()), Err(LabError::Compatibility(_))));

    let b = sample_cluster(2, 10, 1.0, 0).unwrap();
    let (ia, ib) = (b.vertex_index(site2(-3, 2)).unwrap(), b.vertex_index(site2(4, -1)).unwrap());
    let mut r = vec![0.0; b.vertex_count()];
    r[ia] = 1.0;
    r[ib] = -1.0;
    let rhs = ScalarField::from_f64(&b, r.clone()).unwrap();
    let v = solve_neumann(&b, &rhs, &SolveOptions::with_tolerance(1e-12)).unwrap();
    assert!(v.to_f64().iter().sum::<f64>().abs() < 1e-9);
    let lv = laplacian_apply(&v).to_f64();
    for i in 0..b.vertex_count() {
        assert!((lv[i] + r[i]).abs() < 1e-8);
    }
}

#[test]
fn green_examples() {
    let g = plus_graph();
    let gf = green_function(&g, site2(0, 0), &SolveOptions::exact()).unwrap();
    assert_eq!(gf.raw.at_exact(site2(0, 0)).unwrap(), qf(1, 4));
    let sh = gf.shifted();
    assert_eq!(sh.at_exact(site2(0, 0)).unwrap(), q(0));
    assert_eq!(sh.at_exact(site2(1, 0)).unwrap(), qf(-1, 4));
    assert!(green_function(&g, site2(1, 0), &SolveOptions::exact()).is_err());

    let b = sample_cluster(2, 12, 1.0, 0).unwrap();
    let gf = green_function(&b, site2(0, 0), &SolveOptions::with_tolerance(1e-12)).unwrap();
    for &x in b.vertices() {
        let m = [-x[0], -x[1], 0];
        assert!((gf.raw.at(x).unwrap() - gf.raw.at(m).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn green_log_slope_matches_lattice_constant() {
    let g = sample_cluster(2, 256, 1.0, 0).unwrap();
    let gf = green_function(&g, site2(0, 0), &SolveOptions::with_tolerance(1e-10)).unwrap();
    let g0 = gf.pole_value();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in 4..=64 {
        xs.push((t as f64).ln());
        ys.push(g0 - gf.raw.at(site2(t, 0)).unwrap());
    }
    let slope = ls_slope(&xs, &ys);
    let want = 1.0 / (2.0 * std::f64::consts::PI);
    assert!((slope - want).abs() < 0.2 * want, "slope {slope} vs {want}");
}

#[test]
fn calculus_identities() {
    let g = sample_cluster(2, 5, 1.0, 0).unwrap();
    let c = ScalarField::from_fn_f64(&g, |_| 2.0);
    assert_eq!(gradient(&c).max_abs(), 0.0);
    let x1 = ScalarField::from_fn_f64(&g, |x| x[0] as f64);
    let gx = gradient(&x1);
    assert_eq!(gx.oriented(site2(0, 0), site2(1, 0)), Some(1.0));
    assert_eq!(gx.oriented(site2(1, 0), site2(0, 0)), Some(-1.0));
    assert_eq!(gx.oriented(site2(0, 0), site2(0, 1)), Some(0.0));
    let v = g.vertex_index(site2(1, 1)).unwrap();
    let d = delta(&g, v, NumericKind::Rational);
    let dg = divergence(&gradient(&d));
    assert_eq!(dg.values.rational().unwrap(), laplacian_apply(&d).values.rational().unwrap());

    let cut: Vec<_> = (-5..=5).map(|y| (site2(-5, y), site2(-4, y))).collect();
    assert_eq!(flux_through_edge_cut(&x1, &cut).unwrap(), 11.0);
    assert!(flux_through_edge_cut(&x1, &[(site2(0, 0), site2(2, 0))]).is_err());
}

#[test]
fn harmonic_flux_through_region_boundary() {
    let g = sample_cluster(2, 16, 0.75, 8).unwrap();
    let bd = g.boundary_mask();
    let bv = ScalarField::from_fn_f64(&g, |x| (x[0] * x[1]) as f64 + 0.3 * x[1] as f64);
    let z = ScalarField::zeros(&g, NumericKind::Float64);
    let u = solve_dirichlet(&g, &bd, &bv, &z, &SolveOptions::with_tolerance(1e-13)).unwrap();
    // left half region of the interior; its outward flux splits over three faces
    let region: Vec<bool> = (0..g.vertex_count()).map(|i| g.tag(i).interior() && g.site(i)[0] <= 0).collect();
    let cut = edge_boundary(&g, &region);
    let total = flux_through_edge_cut(&u, &cut).unwrap();
    assert!(total.abs() < 1e-9, "{total}");
    let face = |pred: &dyn Fn(Site, Site) -> bool| -> Vec<(Site, Site)> { cut.iter().copied().filter(|&(a, b)| pred(a, b)).collect() };
    let left = face(&|_, b| b[0] == -16);
    let centre = face(&|a, b| b[0] > a[0] && a[0] == 0);
    let sides = face(&|a, b| !(b[0] == -16) && !(b[0] > a[0] && a[0] == 0));
    let s: f64 = [left, centre, sides].iter().map(|c| flux_through_edge_cut(&u, c).unwrap()).sum();
    assert!(s.abs() < 1e-9);
}

#[test]
fn field_csv() {
    let g = path_graph(2);
    let f = exact_field(&g, vec![qf(1, 3), q(-2)]);
    assert_eq!(f.to_csv(), "x1,x2,value\n0,0,1/3\n1,0,-2/1\n");
}

#[test]
fn exact_cap_refused() {
    let g = sample_cluster(2, 40, 1.0, 0).unwrap();
    let bd = g.boundary_mask();
    let z = ScalarField::zeros(&g, NumericKind::Rational);
    assert!(matches!(solve_dirichlet(&g, &bd, &z, &z, &SolveOptions::exact()), Err(LabError::Capacity(_))));
}

fn random_data(g: &Arc<ClusterGraph>, seed: u64, scale: f64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..g.vertex_count()).map(|_| rng.gen_range(-scale..scale)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn maximum_principle(seed in 0u64..5000, p in 0.6f64..1.0) {
        let g = sample_cluster(2, 8, p, seed).unwrap();
        let bd = g.boundary_mask();
        let bv = ScalarField::from_f64(&g, random_data(&g, seed, 5.0)).unwrap();
        let z = ScalarField::zeros(&g, NumericKind::Float64);
        let u = solve_dirichlet(&g, &bd, &bv, &z, &SolveOptions::with_tolerance(1e-12)).unwrap().to_f64();
        let b: Vec<f64> = (0..g.vertex_count()).filter(|&i| bd[i]).map(|i| u[i]).collect();
        let (lo, hi) = (b.iter().cloned().fold(f64::INFINITY, f64::min), b.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        for v in u {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
    }

    #[test]
    fn exact_solve_resubstitutes(seed in 0u64..5000, p in 0.6f64..1.0) {
        let g = sample_cluster(2, 4, p, seed).unwrap();
        let bd = g.boundary_mask();
        let data = random_data(&g, seed, 4.0);
        let bv = ScalarField::from_fn_rational(&g, |x| q((x[0] - 2 * x[1]) as i64));
        let rhs = ScalarField::from_rational(&g, data.iter().map(|v| q(v.round() as i64)).collect()).unwrap();
        let u = solve_dirichlet(&g, &bd, &bv, &rhs, &SolveOptions::exact()).unwrap();
        let lu = laplacian_apply(&u);
        let (lu, r, uv) = (lu.values.rational().unwrap(), rhs.values.rational().unwrap(), u.values.rational().unwrap());
        for i in 0..g.vertex_count() {
            if bd[i] {
                prop_assert_eq!(&uv[i], &q((g.site(i)[0] - 2 * g.site(i)[1]) as i64));
            } else {
                prop_assert_eq!(&lu[i], &-r[i].clone());
            }
        }
        // div ∘ grad = Δ exactly
        let dg = divergence(&gradient(&u));
        prop_assert_eq!(dg.values.rational().unwrap(), lu);
    }

    #[test]
    fn linearity(seed in 0u64..5000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = sample_cluster(2, 8, 0.8, seed).unwrap();
        let bd = g.boundary_mask();
        let z = ScalarField::zeros(&g, NumericKind::Float64);
        let g1 = ScalarField::from_f64(&g, random_data(&g, seed, 1.0)).unwrap();
        let g2 = ScalarField::from_f64(&g, random_data(&g, seed + 1, 1.0)).unwrap();
        let opts = SolveOptions::with_tolerance(1e-13);
        let u1 = solve_dirichlet(&g, &bd, &g1, &z, &opts).unwrap();
        let u2 = solve_dirichlet(&g, &bd, &g2, &z, &opts).unwrap();
        let mix = g1.combine(a, &g2, b).unwrap();
        let u = solve_dirichlet(&g, &bd, &mix, &z, &opts).unwrap();
        let want = u1.combine(a, &u2, b).unwrap();
        for (x, y) in u.to_f64().iter().zip(want.to_f64()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn green_symmetry(seed in 0u64..5000, i in 0usize..1000, j in 0usize..1000) {
        let g = sample_cluster(2, 6, 0.8, seed).unwrap();
        let interior: Vec<Site> = (0..g.vertex_count()).filter(|&k| g.tag(k).interior()).map(|k| g.site(k)).collect();
        prop_assume!(!interior.is_empty());
        let (x, y) = (interior[i % interior.len()], interior[j % interior.len()]);
        let gs = green_functions(&g, &[x, y], &SolveOptions::exact()).unwrap();
        prop_assert_eq!(gs[0].raw.at_exact(y).unwrap(), gs[1].raw.at_exact(x).unwrap());
    }

    #[test]
    fn divergence_sums_to_zero(seed in 0u64..5000) {
        let g = sample_cluster(2, 6, 0.7, seed).unwrap();
        let f = perclab::field::EdgeField::new(&g, Values::Float(random_data(&g, seed, 1.0).into_iter().cycle().take(g.edge_count()).collect())).unwrap();
        let s: f64 = divergence(&f).to_f64().iter().sum();
        prop_assert!(s.abs() < 1e-10);
    }
}

#[test]
fn box_boundary_counts() {
    let r = BoxRegion::new(2, 3).unwrap();
    assert_eq!(r.vertex_count(), 49);
    assert!(r.on_boundary(add(site2(2, 0), unit(0))));
    let s = sample_percolation(r, 1.0, 0).unwrap();
    assert_eq!(s.largest_cluster().unwrap().boundary_mask().iter().filter(|b| **b).count(), 24);
}
