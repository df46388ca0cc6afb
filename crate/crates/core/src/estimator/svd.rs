//! Singular values by one-sided (Hestenes) Jacobi rotations.

use ndarray::Array2;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 60;

/// All `min(m, n)` singular values, sorted descending.
pub fn singular_values(a: &Array2<Complex64>) -> Vec<f64> {
    let (m, n) = a.dim();
    // Orthogonalise the shorter dimension's vectors: columns of A, or of A^H when wide.
    let mut cols: Vec<Vec<Complex64>> = if m >= n {
        (0..n).map(|j| a.column(j).to_vec()).collect()
    } else {
        (0..m).map(|i| a.row(i).iter().map(|z| z.conj()).collect()).collect()
    };
    let k = cols.len();
    let mut norms: Vec<f64> = cols.iter().map(|c| sq_norm(c)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * cs - yq * sn;
                    *y = xp * sn + yq * cs;
                }
                norms[p] = sq_norm(cp);
                norms[q] = sq_norm(cq);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = norms.iter().map(|v| v.sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn sq_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
