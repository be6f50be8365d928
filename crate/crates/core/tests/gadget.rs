use num_bigint::BigInt;
use num_integer::Integer;
use perclab::field::{q, qf};
use perclab::gadget::*;
use perclab::lattice::site2;

#[test]
fn build_small_gadgets() {
    let g = build_gadget(1).unwrap();
    let sites: Vec<_> = g.open_sites.iter().copied().collect();
    assert_eq!(sites, vec![site2(1, 1), site2(2, 1), site2(3, 1), site2(4, 1)]);
    assert_eq!(g.open_edges().len(), 3);
    let g2 = build_gadget(2).unwrap();
    let extra: Vec<_> = g2.open_sites.difference(&g.open_sites).copied().collect();
    assert_eq!(extra, vec![site2(2, 2), site2(3, 2)]);
    assert_eq!(g2.open_edges().len(), 6);
    for n in 1..=20 {
        let g = build_gadget(n).unwrap();
        for z in [g.s, g.a, g.b, g.t] {
            assert!(g.open_sites.contains(&z));
        }
        assert!(g.open_sites.is_disjoint(&g.closed_sites));
        assert!(g.graph().unwrap().is_connected());
    }
    assert!(build_gadget(0).is_err());
}

#[test]
fn recurrence_values() {
    assert_eq!(resistance_recurrence(1).unwrap(), q(3));
    assert_eq!(resistance_recurrence(2).unwrap(), qf(11, 4));
    assert_eq!(resistance_recurrence(4).unwrap(), qf(153, 56));
}

#[test]
fn sequences() {
    assert_eq!(sequence_ab(1), (BigInt::from(3), BigInt::from(1)));
    assert_eq!(sequence_ab(3), (BigInt::from(41), BigInt::from(15)));
    let a = a_sequence(52);
    let b = b_sequence(52);
    for n in 1..=50 {
        assert_eq!(&a[n] + &b[n - 1], b[n]);
        assert_eq!(BigInt::from(3) * &a[n] + BigInt::from(2) * &b[n - 1], a[n + 1]);
    }
    for n in 0..=50 {
        assert_eq!(b[n + 1].gcd(&b[n]), BigInt::from(1));
    }
}

#[test]
fn solve_matches_recurrence() {
    assert_eq!(resistance_by_solve(1).unwrap(), q(3));
    assert_eq!(resistance_by_solve(2).unwrap(), qf(11, 4));
    for n in 1..=12 {
        let (a, b) = sequence_ab(n);
        let r = resistance_by_solve(n).unwrap();
        assert_eq!(r, resistance_recurrence(n).unwrap());
        assert_eq!(r.numer(), &a);
        assert_eq!(r.denom(), &b);
        assert_eq!(a.gcd(&b), BigInt::from(1));
    }
}

#[test]
fn integer_gap() {
    assert_eq!(integer_harmonic_gap(1).unwrap(), BigInt::from(3));
    assert_eq!(integer_harmonic_gap(3).unwrap(), BigInt::from(41));
    // brute force over boundary gaps
    let ok: Vec<i64> = (1..=10).filter(|&k| admits_integer_extension(1, k).unwrap()).collect();
    assert_eq!(ok, vec![3, 6, 9]);
    for n in 1..=15 {
        assert!(integer_harmonic_gap(n).unwrap() > BigInt::from(3).pow(n as u32 - 1));
        assert_eq!(integer_harmonic_gap(n).unwrap(), sequence_ab(n).0);
    }
}

#[test]
fn convergents_of_limit() {
    let mut prev = f64::INFINITY;
    let conv = limit_convergents(60);
    for n in 1..=25 {
        let r = resistance_recurrence(n).unwrap();
        let d = distance_to_limit(&r, 200);
        assert!(d < prev, "n = {n}");
        prev = d;
        assert!(conv.contains(&r));
    }
    assert!(prev < 1e-9);
    assert_eq!(continued_fraction(&qf(11, 4)), vec![BigInt::from(2), BigInt::from(1), BigInt::from(3)]);
}

#[test]
fn table_csv() {
    let rows = gadget_table(4, 4).unwrap();
    let csv = gadget_table_csv(&rows);
    assert!(csv.starts_with("n,A_next,B_n,R_exact,R_decimal,distance\n"));
    assert!(csv.contains("2,11,4,11/4,2.750000000000000000000000000000,"));
}
