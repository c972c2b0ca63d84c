//! Restarted, right-preconditioned GMRES.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VwsError};

#[derive(Clone, Copy, Debug)]
pub struct GmresOptions {
    /// Target for `‖b − A x‖₂ / ‖b‖₂`.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 40, max_iter: 800 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KrylovStats {
    pub iterations: usize,
    /// True relative residual at exit.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` with GMRES applied to `A M⁻¹` (pass the identity for an
/// unpreconditioned or left-preconditioned system), starting from the content
/// of `x`. On failure `x` still holds the best iterate found.
pub fn gmres(
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    apply_m_inv: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats { iterations: 0, residual: 0.0 });
    }
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = apply_a(x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let mut r = residual(x);
    let mut rel = norm(&r) / bnorm;
    let mut iterations = 0;
    let m = opts.restart.max(1);
    while rel > opts.tol && iterations < opts.max_iter {
        let beta = norm(&r);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut precond: Vec<Vec<f64>> = Vec::with_capacity(m);
        // Hessenberg columns after the Givens rotations (upper triangular part).
        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![beta];
        for j in 0..m {
            iterations += 1;
            let zj = apply_m_inv(&basis[j]);
            let mut w = apply_a(&zj);
            precond.push(zj);
            let mut h = vec![0.0; j + 2];
            // Modified Gram–Schmidt, repeated once for orthogonality.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[i] += c;
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= c * vk);
                }
            }
            let hn = norm(&w);
            h[j + 1] = hn;
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let d = h[j].hypot(h[j + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (h[j] / d, h[j + 1] / d) };
            cs.push(c);
            sn.push(s);
            h[j] = d;
            h[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            h.truncate(j + 1);
            hcols.push(h);
            let est = g[j + 1].abs() / bnorm;
            if est <= opts.tol * 0.5 || hn == 0.0 || iterations >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let k = hcols.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (l, yl) in y.iter().enumerate().take(k).skip(i + 1) {
                s -= hcols[l][i] * yl;
            }
            y[i] = s / hcols[i][i];
        }
        for (zi, yi) in precond.iter().zip(&y) {
            x.iter_mut().zip(zi).for_each(|(xk, zk)| *xk += yi * zk);
        }
        r = residual(x);
        let new_rel = norm(&r) / bnorm;
        // Stagnation at round-off level: stop rather than spin.
        if new_rel >= rel * 0.9 && k == m {
            rel = new_rel;
            break;
        }
        rel = new_rel;
    }
    debug_assert_eq!(x.len(), n);
    if rel > opts.tol {
        return Err(VwsError::KrylovNoConvergence { iterations, residual: rel });
    }
    Ok(KrylovStats { iterations, residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_nonsymmetric_system() {
        let n = 50;
        let a = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = (3.0 + i as f64 * 0.1) * v[i];
                    if i > 0 {
                        s += 0.7 * v[i - 1];
                    }
                    if i + 1 < n {
                        s -= 0.4 * v[i + 1];
                    }
                    s
                })
                .collect()
        };
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a(&xs);
        let mut x = vec![0.0; n];
        let stats = gmres(a, |v| v.to_vec(), &b, &mut x, &GmresOptions { tol: 1e-13, restart: 10, max_iter: 500 }).unwrap();
        assert!(stats.residual <= 1e-13);
        let err = x.iter().zip(&xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn reports_non_convergence() {
        let a = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(i, x)| (1.0 + i as f64) * x).collect() };
        let b = vec![1.0; 30];
        let mut x = vec![0.0; 30];
        let r = gmres(a, |v| v.to_vec(), &b, &mut x, &GmresOptions { tol: 1e-14, restart: 3, max_iter: 6 });
        assert!(matches!(r, Err(VwsError::KrylovNoConvergence { .. })));
    }
}
