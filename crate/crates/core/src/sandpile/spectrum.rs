//! Eigenvalues of the sandpile chain indexed by toppling invariants and the L2 distance
//! to stationarity.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::algebra::{DualGroup, Frequency};
use crate::error::{LabError, Result};
use crate::field::Q;
use crate::graph::ClusterGraph;

pub const DEFAULT_CAP: u64 = 1_000_000;

/// `num / den` in `[0, 1)` as a float, accurate for arbitrarily large denominators.
fn phase(num: &BigInt, den: &BigInt) -> f64 {
    let scaled: BigInt = (num << 60u32) / den;
    scaled.to_f64().unwrap_or(0.0) / (1u64 << 60) as f64
}

/// `(1/m) Σ_x e^{2πi ξ(x)}`.
pub fn eigenvalue(g: &ClusterGraph, xi: &Frequency) -> Result<Complex64> {
    let m = g.vertex_count();
    if xi.num.len() != m {
        return Err(LabError::Parameter("frequency length does not match the graph".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for x in &xi.num {
        s += Complex64::from_polar(1.0, TAU * phase(x, &xi.den));
    }
    Ok(s / m as f64)
}

/// Exact eigenvalue `(re, im)` when every phase is a multiple of `1/4`.
pub fn eigenvalue_exact(xi: &Frequency) -> Option<(Q, Q)> {
    let (mut re, mut im) = (0i64, 0i64);
    let four = BigInt::from(4);
    for x in &xi.num {
        let q4 = x * &four;
        if !q4.mod_floor(&xi.den).is_zero() {
            return None;
        }
        match (q4 / &xi.den).to_i64()? {
            0 => re += 1,
            1 => im += 1,
            2 => re -= 1,
            3 => im -= 1,
            _ => return None,
        }
    }
    let m = BigInt::from(xi.num.len());
    Some((Q::new(re.into(), m.clone()), Q::new(im.into(), m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    Exact,
    /// Enumerate a subgroup of size at most the cap; the curve is then a lower bound.
    LowerBound,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub group_order: BigInt,
    pub enumerated: u64,
    pub exact: bool,
    /// Every enumerated eigenvalue, the trivial character first.
    pub eigenvalues: Vec<Complex64>,
    /// `(t, Σ_{h ≠ 1} |λ_h|^{2t})`.
    pub curve: Vec<(u64, f64)>,
}

impl SpectrumReport {
    pub fn first_below(&self, level: f64) -> Option<u64> {
        self.curve.iter().find(|(_, v)| *v < level).map(|(t, _)| *t)
    }
}

fn largest_divisor_at_most(d: &BigInt, budget: u64) -> u64 {
    if let Some(x) = d.to_u64() {
        if x <= budget {
            return x;
        }
    }
    (1..=budget).rev().find(|k| (d % BigInt::from(*k)).is_zero()).unwrap_or(1)
}

pub fn l2_mixing_curve(group: &DualGroup, g: &ClusterGraph, ts: &[u64], mode: CurveMode, cap: u64) -> Result<SpectrumReport> {
    let m = g.vertex_count();
    if group.generators.iter().any(|x| x.num.len() != m) {
        return Err(LabError::Parameter("group does not belong to this graph".into()));
    }
    let exact = group.order <= BigInt::from(cap);
    if !exact && mode == CurveMode::Exact {
        return Err(LabError::Capacity(format!("group order {} exceeds the enumeration cap {cap}", group.order)));
    }
    // subgroup orders k_j | d_j with Π k_j <= cap
    let mut budget = cap;
    let mut ks = Vec::new();
    for d in &group.invariant_factors {
        let k = largest_divisor_at_most(d, budget);
        ks.push(k);
        budget /= k;
    }
    let big_k = ks.iter().fold(1u64, |acc, &k| acc.lcm(&k));
    let steps: Vec<Vec<u64>> = group
        .generators
        .iter()
        .zip(&ks)
        .map(|(xi, &k)| {
            let kb = BigInt::from(k);
            xi.num.iter().map(|x| x.mod_floor(&kb).to_u64().expect("small") * (big_k / k) % big_k).collect()
        })
        .collect();
    let table: Vec<Complex64> = (0..big_k).map(|r| Complex64::from_polar(1.0, TAU * r as f64 / big_k as f64)).collect();
    let total: u64 = ks.iter().product();
    let mut phases = vec![0u64; m];
    let mut digits = vec![0u64; ks.len()];
    let mut eigenvalues = Vec::with_capacity(total as usize);
    for _ in 0..total {
        let s: Complex64 = phases.iter().map(|&r| table[r as usize]).sum();
        eigenvalues.push(s / m as f64);
        // mixed-radix increment; a wrapped digit contributes k_j c_j = 0 mod K
        for j in 0..ks.len() {
            digits[j] += 1;
            for (p, c) in phases.iter_mut().zip(&steps[j]) {
                *p = (*p + c) % big_k;
            }
            if digits[j] < ks[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    let mods: Vec<f64> = eigenvalues.iter().skip(1).map(|l| l.norm_sqr()).collect();
    let curve = ts.iter().map(|&t| (t, mods.iter().map(|a| a.powf(t as f64)).sum())).collect();
    Ok(SpectrumReport { group_order: group.order.clone(), enumerated: total, exact, eigenvalues, curve })
}

/// `re,im,absLambda,multiplicity` with eigenvalues merged at 1e-12 resolution.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let key = |z: &Complex64| ((z.re * 1e12).round() as i64, (z.im * 1e12).round() as i64);
    let mut groups: BTreeMap<(i64, i64), (Complex64, u64)> = BTreeMap::new();
    for z in &report.eigenvalues {
        groups.entry(key(z)).or_insert((*z, 0)).1 += 1;
    }
    let mut rows: Vec<(Complex64, u64)> = groups.into_values().collect();
    rows.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()).then(b.0.re.total_cmp(&a.0.re)).then(b.0.im.total_cmp(&a.0.im)));
    let mut out = String::from("re,im,absLambda,multiplicity\n");
    for (z, k) in rows {
        let clean = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        out.push_str(&format!("{},{},{},{}\n", clean(z.re), clean(z.im), z.norm(), k));
    }
    out
}

pub fn group_json(group: &DualGroup) -> String {
    let v = serde_json::json!({
        "order": group.order.to_string(),
        "invariant_factors": group.invariant_factors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "vertices": group.reduced_laplacian.len(),
        "cyclic": group.invariant_factors.len() <= 1,
        "trivial": group.order.is_one(),
    });
    serde_json::to_string_pretty(&v).expect("json")
}
