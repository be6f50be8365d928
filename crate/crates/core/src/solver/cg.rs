//! Preconditioned conjugate gradient for the interior block of a graph Laplacian.

use crate::error::{LabError, Result};

/// Symmetric positive definite matrix `D - A` restricted to interior unknowns, in CSR form.
pub(crate) struct InteriorOperator {
    pub diag: Vec<f64>,
    pub start: Vec<usize>,
    pub cols: Vec<usize>,
}

impl InteriorOperator {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut s = self.diag[i] * x[i];
            for &j in &self.cols[self.start[i]..self.start[i + 1]] {
                s -= x[j];
            }
            out[i] = s;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
}

pub(crate) fn conjugate_gradient(op: &InteriorOperator, b: &[f64], tol: f64, max_iter: usize, diagonal: bool) -> Result<CgOutcome> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x });
    }
    let inv: Vec<f64> = if diagonal { op.diag.iter().map(|d| 1.0 / d).collect() } else { vec![1.0; n] };
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut true_res = 1.0;
    for _restart in 0..4 {
        for i in 0..n {
            z[i] = inv[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            if dot(&r, &r).sqrt() <= tol * bnorm {
                break;
            }
            op.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = inv[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            iterations += 1;
        }
        op.apply(&x, &mut ap);
        for i in 0..n {
            r[i] = b[i] - ap[i];
        }
        true_res = dot(&r, &r).sqrt() / bnorm;
        if true_res <= tol || iterations >= max_iter {
            break;
        }
    }
    if true_res > tol {
        return Err(LabError::Convergence { iterations, residual: true_res });
    }
    Ok(CgOutcome { x })
}
