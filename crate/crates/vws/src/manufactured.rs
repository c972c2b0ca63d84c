//! Closed-form rotational flows used to verify the reconstruction.
//!
//! The fluid occupies `{-1 < Z < εζ(x)}` with `ζ = amp cos x`. In-plane motion
//! comes from a streamfunction `S = G(x) P(Z)` with `(V_x, w) = (∂Z S, −μ ∂x S)`
//! and the transverse velocity is `V_y = G(x) R(Z)`, where
//!
//! ```text
//! G = sin x / (a + cos x),   P = (Z + 1) sin(2Z + 1),   R = cos(3Z/2).
//! ```
//!
//! `G` is odd and `ζ` even, so the tangential x-velocity has zero mean and the
//! transverse momentum vanishes. The bottom condition `w = 0` holds because
//! `P(−1) = 0`. The exact vorticity is sampled alongside, so the reconstruction
//! error is measured against closed forms only.

use std::sync::Arc;

use crate::divcurl::DivCurlSolver;
use crate::error::{Result, VwsError};
use crate::geometry::GeometryCache;
use crate::spectral::{Grid, SurfaceField, VectorVolumeField, VolumeField};

/// `G` and its first two derivatives.
fn g_profile(a: f64, x: f64) -> (f64, f64, f64) {
    let (s, c) = x.sin_cos();
    let d = a + c;
    let g = s / d;
    let g1 = (a * c + 1.0) / (d * d);
    let g2 = s * (2.0 - a * a + a * c) / (d * d * d);
    (g, g1, g2)
}

fn p_profile(zz: f64) -> (f64, f64, f64) {
    let arg = 2.0 * zz + 1.0;
    let p = (zz + 1.0) * arg.sin();
    let p1 = arg.sin() + 2.0 * (zz + 1.0) * arg.cos();
    let p2 = 4.0 * arg.cos() - 4.0 * (zz + 1.0) * arg.sin();
    (p, p1, p2)
}

fn r_profile(zz: f64) -> (f64, f64) {
    ((1.5 * zz).cos(), -1.5 * (1.5 * zz).sin())
}

/// Parameters of the manufactured flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowSpec {
    pub eps: f64,
    pub mu: f64,
    /// Surface amplitude.
    pub amp: f64,
    /// Pole offset of `G`; must exceed 1. Smaller values give rougher flows.
    pub a: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        Self { eps: 1.0, mu: 0.5, amp: 0.1, a: 2.0 }
    }
}

/// The sampled flow on a grid.
pub struct Manufactured {
    pub geo: GeometryCache,
    pub psi: SurfaceField,
    pub velocity: VectorVolumeField,
    pub omega: VectorVolumeField,
}

/// Samples the flow on `grid`. The grid length must be `2π`.
pub fn build(grid: Arc<Grid>, spec: FlowSpec) -> Result<Manufactured> {
    let FlowSpec { eps, mu, amp, a } = spec;
    if (grid.lx() - std::f64::consts::TAU).abs() > 1e-12 {
        return Err(VwsError::InvalidGrid("the manufactured flow needs Lx = 2π".into()));
    }
    if !(a > 1.0) {
        return Err(VwsError::InvalidParams(format!("pole offset a = {a} must exceed 1")));
    }
    let zeta = SurfaceField::from_fn(&grid, |x| amp * x.cos());
    let geo = GeometryCache::new(grid.clone(), &zeta, eps, mu, 0.05)?;
    let sm = mu.sqrt();
    let phys = |x: f64, z: f64| z + eps * (1.0 + z) * amp * x.cos();
    let field = |f: &dyn Fn(f64, f64) -> f64| VolumeField::from_fn(&grid, |x, z| f(x, phys(x, z)));
    let vx = field(&|x, zz| g_profile(a, x).0 * p_profile(zz).1);
    let w = field(&|x, zz| -mu * g_profile(a, x).1 * p_profile(zz).0);
    let vy = field(&|x, zz| g_profile(a, x).0 * r_profile(zz).0);
    let o1 = field(&|x, zz| -g_profile(a, x).0 * r_profile(zz).1 / sm);
    let o2 = field(&|x, zz| {
        let (g, _, g2) = g_profile(a, x);
        let (p, _, p2) = p_profile(zz);
        (g * p2 + mu * g2 * p) / sm
    });
    let o3 = field(&|x, zz| g_profile(a, x).1 * r_profile(zz).0);
    let velocity = VectorVolumeField::new(vx, vy, w);
    let (upar_x, _) = geo.tangential_trace(&velocity);
    let psi = grid.inv_dx(&upar_x);
    Ok(Manufactured { geo, psi, velocity, omega: VectorVolumeField::new(o1, o2, o3) })
}

/// Absolute sup-norm error of the reconstructed velocity over all three
/// components.
pub fn reconstruction_error(solver: &DivCurlSolver, m: &Manufactured) -> Result<f64> {
    let sol = solver.reconstruct(&m.geo, &m.psi, &m.omega)?;
    Ok(sol.velocity.sub(&m.velocity).max_abs())
}
