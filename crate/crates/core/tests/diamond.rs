use std::sync::Arc;

use num_traits::Zero;
use perclab::diamond::*;
use perclab::field::{q, qf, ScalarField, Q};
use perclab::graph::ClusterGraph;
use perclab::lattice::{l1, site2, BoxRegion, Site};
use perclab::percolation::sample_percolation;
use perclab::LabError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full(n: i32) -> Arc<ClusterGraph> {
    Arc::new(sample_percolation(BoxRegion::new(2, n).unwrap(), 1.0, 0).unwrap().largest_cluster().unwrap())
}

fn random_in_diamond(g: &Arc<ClusterGraph>, k: i32, rng: &mut ChaCha8Rng) -> ScalarField {
    let vals: Vec<Q> = g.vertices().iter().map(|&x| if l1(x) <= k { q(rng.gen_range(-3..=3)) } else { Q::zero() }).collect();
    ScalarField::from_rational(g, vals).unwrap()
}

#[test]
fn trivial_fields() {
    let g = full(5);
    let zero = ScalarField::from_fn_rational(&g, |_| Q::zero());
    let v = diamond_peel(&zero).unwrap();
    assert!(v.integer_valued);
    assert_eq!((v.diamond, v.peeled), (None, 0));

    let delta = ScalarField::from_fn_rational(&g, |x| if x == site2(0, 0) { q(1) } else { Q::zero() });
    let v = diamond_peel(&delta).unwrap();
    assert!(v.integer_valued);
    assert_eq!(v.witness, None);
    assert_eq!(v.diamond, Some((site2(0, 0), 0)));
    assert_eq!(v.peeled, 1);
}

#[test]
fn enclosing_diamonds() {
    assert_eq!(enclosing_diamond(&[]), None);
    assert_eq!(enclosing_diamond(&[site2(2, 3)]), Some((site2(2, 3), 0)));
    assert_eq!(enclosing_diamond(&[site2(-1, 0), site2(1, 0)]), Some((site2(0, 0), 1)));
    let (c, k) = enclosing_diamond(&[site2(0, 0), site2(1, 1)]).unwrap();
    assert_eq!(k, 1);
    assert_eq!(c, site2(0, 1), "first of the two centres in lexicographic order");
    let (_, k) = enclosing_diamond(&[site2(0, 3), site2(0, -3), site2(3, 0)]).unwrap();
    assert_eq!(k, 3);
}

#[test]
fn random_integer_fields_are_certified() {
    let g = full(6);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let u = random_in_diamond(&g, 3, &mut rng);
        assert_eq!(first_non_integer_laplacian(&u).unwrap(), None);
        let v = diamond_peel(&u).unwrap();
        assert!(v.integer_valued);
        assert_eq!(v.witness, None);
        if let Some((c, k)) = v.diamond {
            assert!(k <= 3);
            assert!(l1(c) + k <= 6);
            assert_eq!(v.peeled, (2 * k * k + 2 * k + 1) as usize);
        }
    }
}

#[test]
fn perturbations_are_rejected_at_the_first_offender() {
    let g = full(6);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..25 {
        let u = random_in_diamond(&g, 3, &mut rng);
        let mut vals = u.values.rational().unwrap().to_vec();
        let i = loop {
            let i = rng.gen_range(0..g.vertex_count());
            if l1(g.site(i)) <= 3 {
                break i;
            }
        };
        vals[i] += qf(1, 2);
        let bad = ScalarField::from_rational(&g, vals).unwrap();
        let w = first_non_integer_laplacian(&bad).unwrap().expect("laplacian is no longer integral");
        assert!(l1(perclab::lattice::sub(w, g.site(i))) <= 1);
        match diamond_peel(&bad) {
            Err(LabError::Precondition(msg)) => assert!(msg.contains(&format!("{w:?}")), "{msg}"),
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }
}

#[test]
fn preconditions() {
    let g = full(4);
    // support on the box boundary
    let edge = ScalarField::from_fn_rational(&g, |x| if x == site2(4, 0) { q(1) } else { Q::zero() });
    assert!(matches!(diamond_peel(&edge), Err(LabError::Precondition(_))));
    // float values
    let f = ScalarField::from_fn_f64(&g, |_| 0.0);
    assert!(matches!(diamond_peel(&f), Err(LabError::Kind(_))));
    // a percolation cluster is not the full box
    let s = sample_percolation(BoxRegion::new(2, 4).unwrap(), 0.7, 2).unwrap();
    let c = Arc::new(s.largest_cluster().unwrap());
    let z = ScalarField::from_fn_rational(&c, |_| Q::zero());
    assert!(matches!(diamond_peel(&z), Err(LabError::Precondition(_))));
    // the lattice without a box
    let sites: Vec<Site> = vec![site2(0, 0), site2(1, 0)];
    let bare = Arc::new(ClusterGraph::new(2, None, sites.clone(), &[(sites[0], sites[1])]).unwrap());
    let z = ScalarField::from_fn_rational(&bare, |_| Q::zero());
    assert!(matches!(diamond_peel(&z), Err(LabError::Precondition(_))));
}

#[test]
fn large_support_and_offcentre_diamond() {
    let g = full(12);
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let c = site2(3, -2);
    let vals: Vec<Q> =
        g.vertices().iter().map(|&x| if l1(perclab::lattice::sub(x, c)) <= 6 { q(rng.gen_range(-50..=50)) } else { Q::zero() }).collect();
    let u = ScalarField::from_rational(&g, vals).unwrap();
    let v = diamond_peel(&u).unwrap();
    assert!(v.integer_valued);
    assert!(v.diamond.unwrap().1 <= 6);
}
