//! Exact solves of integer symmetric positive definite systems by fraction-free
//! row elimination (rows kept primitive by removing their content) followed by
//! rational back substitution. Several right-hand sides share one elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{LabError, Result};

pub(crate) struct SparseRow {
    pub cols: Vec<usize>,
    pub vals: Vec<BigInt>,
    pub rhs: Vec<BigInt>,
}

fn lcm_of_denominators(v: &[BigRational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Solves `M x = b_k` for each right-hand side. `rows[i]` holds the off-diagonal pattern
/// and values of row `i` (with the diagonal included) for a structurally symmetric matrix
/// whose leading principal minors are nonzero.
pub(crate) fn solve_exact(mut rows: Vec<(Vec<usize>, Vec<BigInt>)>, rhs: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let n = rows.len();
    let k = rhs.len();
    if n == 0 {
        return Ok(vec![vec![]; k]);
    }
    // scale each right-hand side to integers
    let scales: Vec<BigInt> = rhs.iter().map(|b| lcm_of_denominators(b)).collect();
    let mut mat: Vec<SparseRow> = Vec::with_capacity(n);
    for (i, (cols, vals)) in rows.drain(..).enumerate() {
        let mut pairs: Vec<(usize, BigInt)> = cols.into_iter().zip(vals).collect();
        pairs.sort_by_key(|p| p.0);
        let r: Vec<BigInt> = (0..k).map(|c| (&rhs[c][i] * BigRational::from_integer(scales[c].clone())).to_integer()).collect();
        mat.push(SparseRow { cols: pairs.iter().map(|p| p.0).collect(), vals: pairs.into_iter().map(|p| p.1).collect(), rhs: r });
    }
    for p in 0..n {
        let piv_pos = mat[p].cols.iter().position(|&c| c == p);
        let pv = match piv_pos {
            Some(pos) if !mat[p].vals[pos].is_zero() => mat[p].vals[pos].clone(),
            _ => return Err(LabError::Internal(format!("zero pivot at row {p}"))),
        };
        let targets: Vec<usize> = mat[p].cols.iter().copied().filter(|&c| c > p).collect();
        let (prow_cols, prow_vals, prow_rhs) = {
            let r = &mat[p];
            (r.cols.clone(), r.vals.clone(), r.rhs.clone())
        };
        for t in targets {
            let row = &mut mat[t];
            let pos = match row.cols.iter().position(|&c| c == p) {
                Some(pos) => pos,
                None => continue,
            };
            let a = row.vals[pos].clone();
            if a.is_zero() {
                continue;
            }
            let g = a.gcd(&pv);
            let (mr, mp) = (&pv / &g, &a / &g);
            // row <- mr*row - mp*prow, merging sparse patterns
            let mut cols = Vec::with_capacity(row.cols.len() + prow_cols.len());
            let mut vals = Vec::with_capacity(cols.capacity());
            let (mut i, mut j) = (0, 0);
            while i < row.cols.len() || j < prow_cols.len() {
                let ci = row.cols.get(i).copied().unwrap_or(usize::MAX);
                let cj = prow_cols.get(j).copied().unwrap_or(usize::MAX);
                let (c, v) = if ci < cj {
                    i += 1;
                    (ci, &mr * &row.vals[i - 1])
                } else if cj < ci {
                    j += 1;
                    (cj, -(&mp * &prow_vals[j - 1]))
                } else {
                    i += 1;
                    j += 1;
                    (ci, &mr * &row.vals[i - 1] - &mp * &prow_vals[j - 1])
                };
                if c <= p {
                    continue;
                }
                if !v.is_zero() || c == t {
                    cols.push(c);
                    vals.push(v);
                }
            }
            let mut r: Vec<BigInt> = row.rhs.iter().zip(&prow_rhs).map(|(x, y)| &mr * x - &mp * y).collect();
            let mut content = BigInt::zero();
            for v in vals.iter().chain(r.iter()) {
                if !v.is_zero() {
                    content = content.gcd(v);
                    if content.is_one() {
                        break;
                    }
                }
            }
            if !content.is_zero() && !content.is_one() {
                for v in vals.iter_mut() {
                    *v = &*v / &content;
                }
                for v in r.iter_mut() {
                    *v = &*v / &content;
                }
            }
            row.cols = cols;
            row.vals = vals;
            row.rhs = r;
        }
    }
    // back substitution
    let mut sol: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; k];
    for p in (0..n).rev() {
        let row = &mat[p];
        let pos = row.cols.iter().position(|&c| c == p).expect("pivot present");
        let pv = BigRational::from_integer(row.vals[pos].clone());
        for c in 0..k {
            let mut acc = BigRational::from_integer(row.rhs[c].clone());
            for (idx, &col) in row.cols.iter().enumerate() {
                if col > p {
                    acc -= &sol[c][col] * BigRational::from_integer(row.vals[idx].clone());
                }
            }
            sol[c][p] = acc / &pv;
        }
    }
    for c in 0..k {
        let s = BigRational::from_integer(scales[c].clone());
        for v in sol[c].iter_mut() {
            *v = &*v / &s;
        }
    }
    Ok(sol)
}

/// Integer determinant by Bareiss fraction-free elimination with row pivoting.
pub fn bareiss_determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}
