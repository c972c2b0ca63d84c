//! Classical Zakharov–Craig–Sulem stepper written from scratch.
//!
//! The potential solves `μΦ_XX + Φ_ZZ = 0` in `{-1 < Z < εζ}`, `Φ = ψ` at the
//! surface and `Φ_Z = 0` at the bottom. It is discretized in strong form on
//! the straightened strip with dense Fourier (cotangent) and Chebyshev
//! differentiation matrices and solved by dense LU, with
//!
//! ```text
//! G  = (1/μ) Φ_Z − ε ζ_x Φ_X                         at the surface
//! ζ_t = G
//! ψ_t = −ζ − (ε/2) ψ_x² + (εμ/2) (G + ε ζ_x ψ_x)² / (1 + ε² μ ζ_x²)
//! ```
//!
//! No filtering is applied. The mean of `ψ_t` is removed, since only `∂xψ`
//! is physical.

#![allow(clippy::type_complexity, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

pub struct Zcs {
    pub nx: usize,
    pub nz: usize,
    pub eps: f64,
    pub mu: f64,
    dx: DMatrix<f64>,
    dz: DMatrix<f64>,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// Periodic first-derivative matrix on `[0, 2π)` with an even number of nodes.
fn fourier_matrix(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * d * h).tan()
        }
    })
}

/// Chebyshev differentiation matrix on `cos(jπ/N)`, `j = 0..N`.
fn chebyshev_matrix(n: usize) -> (DMatrix<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
        let row: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -row;
    }
    (d, x)
}

impl Zcs {
    pub fn new(nx: usize, nz: usize, eps: f64, mu: f64) -> Self {
        let (dxi, xi) = chebyshev_matrix(nz - 1);
        Self {
            nx,
            nz,
            eps,
            mu,
            dx: fourier_matrix(nx),
            dz: dxi * 2.0,
            x: (0..nx).map(|i| 2.0 * PI * i as f64 / nx as f64).collect(),
            z: xi.iter().map(|s| 0.5 * (s - 1.0)).collect(),
        }
    }

    fn deriv_x(&self, f: &[f64]) -> Vec<f64> {
        (&self.dx * DVector::from_column_slice(f)).iter().copied().collect()
    }

    /// Rows of `∂X = ∂x − a ∂z` and `∂Z = ∂z/h` as sparse lists, where
    /// `a = ε(1+z)ζ_x/h`.
    fn derivative_rows(&self, zeta: &[f64]) -> (Vec<Vec<(usize, f64)>>, Vec<Vec<(usize, f64)>>) {
        let (nx, nz, eps) = (self.nx, self.nz, self.eps);
        let zx = self.deriv_x(zeta);
        let mut rx = Vec::with_capacity(nx * nz);
        let mut rz = Vec::with_capacity(nx * nz);
        for i in 0..nx {
            let h = 1.0 + eps * zeta[i];
            for j in 0..nz {
                let a = eps * (1.0 + self.z[j]) * zx[i] / h;
                let mut row: Vec<(usize, f64)> = (0..nx).map(|m| (m * nz + j, self.dx[(i, m)])).collect();
                row.extend((0..nz).map(|m| (i * nz + m, -a * self.dz[(j, m)])));
                rx.push(row);
                rz.push((0..nz).map(|m| (i * nz + m, self.dz[(j, m)] / h)).collect());
            }
        }
        (rx, rz)
    }

    /// Returns `(G, Φ_X, Φ_Z)` at the surface.
    pub fn dirichlet_neumann(&self, zeta: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (nx, nz, eps, mu) = (self.nx, self.nz, self.eps, self.mu);
        let n = nx * nz;
        let (rx, rz) = self.derivative_rows(zeta);
        let mut lap = DMatrix::zeros(n, n);
        for r in 0..n {
            for &(k, v) in &rx[r] {
                for &(c, w) in &rx[k] {
                    lap[(r, c)] += mu * v * w;
                }
            }
            for &(k, v) in &rz[r] {
                for &(c, w) in &rz[k] {
                    lap[(r, c)] += v * w;
                }
            }
        }
        let mut rhs = DVector::zeros(n);
        for i in 0..nx {
            let (top, bottom) = (i * nz, i * nz + nz - 1);
            lap.row_mut(top).fill(0.0);
            lap[(top, top)] = 1.0;
            rhs[top] = psi[i];
            lap.row_mut(bottom).fill(0.0);
            for &(c, w) in &rz[bottom] {
                lap[(bottom, c)] = w;
            }
        }
        let phi = lap.lu().solve(&rhs).expect("nonsingular Laplace system");
        let apply = |rows: &Vec<Vec<(usize, f64)>>, r: usize| rows[r].iter().map(|&(c, w)| w * phi[c]).sum::<f64>();
        let zx = self.deriv_x(zeta);
        let px: Vec<f64> = (0..nx).map(|i| apply(&rx, i * nz)).collect();
        let pz: Vec<f64> = (0..nx).map(|i| apply(&rz, i * nz)).collect();
        let g = (0..nx).map(|i| pz[i] / mu - eps * zx[i] * px[i]).collect();
        (g, px, pz)
    }

    pub fn rhs(&self, zeta: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (eps, mu) = (self.eps, self.mu);
        let (g, _, _) = self.dirichlet_neumann(zeta, psi);
        let zx = self.deriv_x(zeta);
        let px = self.deriv_x(psi);
        let mut dpsi: Vec<f64> = (0..self.nx)
            .map(|i| {
                let b = g[i] + eps * zx[i] * px[i];
                -zeta[i] - 0.5 * eps * px[i] * px[i] + 0.5 * eps * mu * b * b / (1.0 + eps * eps * mu * zx[i] * zx[i])
            })
            .collect();
        let mean = dpsi.iter().sum::<f64>() / self.nx as f64;
        dpsi.iter_mut().for_each(|v| *v -= mean);
        (g, dpsi)
    }

    pub fn rk4(&self, zeta: &[f64], psi: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
        let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(a, b)| a + s * b).collect::<Vec<_>>();
        let (k1z, k1p) = self.rhs(zeta, psi);
        let (k2z, k2p) = self.rhs(&axpy(zeta, 0.5 * dt, &k1z), &axpy(psi, 0.5 * dt, &k1p));
        let (k3z, k3p) = self.rhs(&axpy(zeta, 0.5 * dt, &k2z), &axpy(psi, 0.5 * dt, &k2p));
        let (k4z, k4p) = self.rhs(&axpy(zeta, dt, &k3z), &axpy(psi, dt, &k3p));
        let comb = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| {
            (0..y.len()).map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect::<Vec<_>>()
        };
        (comb(zeta, &k1z, &k2z, &k3z, &k4z), comb(psi, &k1p, &k2p, &k3p, &k4p))
    }
}
