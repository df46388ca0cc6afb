//! Conjugate Gradient Squared (Sonneveld) for dense complex systems.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgsStop {
    Converged,
    MaxIterations,
    /// A recurrence inner product vanished; the best iterate so far is returned.
    Breakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgsOutcome {
    pub x: Vec<Complex64>,
    /// True relative residual `||b - A x|| / ||b||` of the returned iterate.
    pub residual: f64,
    pub iterations: usize,
    pub stop: CgsStop,
}

impl CgsOutcome {
    pub fn converged(&self) -> bool {
        self.stop == CgsStop::Converged
    }

    pub fn breakdown(&self) -> bool {
        self.stop == CgsStop::Breakdown
    }
}

/// `<a, b> = sum conj(a_i) b_i`
#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn matvec(a: &Array2<Complex64>, x: &[Complex64], out: &mut [Complex64]) {
    for (o, row) in out.iter_mut().zip(a.rows()) {
        *o = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
    }
}

/// Solves `A x = b` from `x0 = 0`, stopping once `||r|| / ||b|| <= tol`.
pub fn cgs_solve(
    a: &Array2<Complex64>,
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<CgsOutcome> {
    let n = b.len();
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "cgs needs a square matrix, got {} x {}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != n {
        return Err(Error::Shape(format!(
            "matrix is {n0} x {n0} but right-hand side has length {n}",
            n0 = a.nrows()
        )));
    }
    if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain("right-hand side has non-finite entries".into()));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Domain(format!(
            "need tol > 0 and max_iter >= 1, got tol = {tol}, max_iter = {max_iter}"
        )));
    }

    let zero = Complex64::new(0.0, 0.0);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgsOutcome {
            x: vec![zero; n],
            residual: 0.0,
            iterations: 0,
            stop: CgsStop::Converged,
        });
    }

    let mut x = vec![zero; n];
    let mut r = b.to_vec();
    let shadow = r.clone();
    let shadow_norm = norm(&shadow);
    let mut u = vec![zero; n];
    let mut p = vec![zero; n];
    let mut q = vec![zero; n];
    let mut v = vec![zero; n];
    let mut w = vec![zero; n];
    let mut aw = vec![zero; n];
    let mut rho_prev = zero;

    let mut best_x = x.clone();
    let mut best_res = 1.0;
    let mut stop = CgsStop::MaxIterations;
    let mut iterations = 0;

    for iter in 1..=max_iter {
        let rho = dot(&shadow, &r);
        if rho.norm() <= f64::EPSILON * shadow_norm * norm(&r) {
            stop = CgsStop::Breakdown;
            break;
        }
        if iter == 1 {
            u.copy_from_slice(&r);
            p.copy_from_slice(&r);
        } else {
            let beta = rho / rho_prev;
            for i in 0..n {
                u[i] = r[i] + beta * q[i];
                p[i] = u[i] + beta * (q[i] + beta * p[i]);
            }
        }
        matvec(a, &p, &mut v);
        let sigma = dot(&shadow, &v);
        if sigma.norm() <= f64::EPSILON * shadow_norm * norm(&v) {
            stop = CgsStop::Breakdown;
            break;
        }
        let alpha = rho / sigma;
        for i in 0..n {
            q[i] = u[i] - alpha * v[i];
            w[i] = u[i] + q[i];
            x[i] += alpha * w[i];
        }
        matvec(a, &w, &mut aw);
        for i in 0..n {
            r[i] -= alpha * aw[i];
        }
        iterations = iter;

        let res = norm(&r) / b_norm;
        if !res.is_finite() {
            stop = CgsStop::Breakdown;
            break;
        }
        if res < best_res {
            best_res = res;
            best_x.copy_from_slice(&x);
        }
        if res <= tol {
            stop = CgsStop::Converged;
            break;
        }
        rho_prev = rho;
    }

    let mut ax = vec![zero; n];
    matvec(a, &best_x, &mut ax);
    let residual = ax
        .iter()
        .zip(b)
        .map(|(y, bi)| (bi - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / b_norm;
    Ok(CgsOutcome {
        x: best_x,
        residual,
        iterations,
        stop,
    })
}
