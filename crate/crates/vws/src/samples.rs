//! Smooth pseudo-random fields and states.
//!
//! Everything here is driven by a seeded ChaCha8 generator, so a seed fully
//! determines the result on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Model, State};
use crate::error::Result;
use crate::spectral::{Grid, SurfaceField, VectorVolumeField, VolumeField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mean-free sum of the first `modes` Fourier modes. Mode `k` gets a random
/// amplitude in `[-amp/k, amp/k]` and a random phase.
pub fn surface(grid: &Grid, r: &mut ChaCha8Rng, amp: f64, modes: usize) -> SurfaceField {
    let terms: Vec<(f64, f64, f64)> = (1..=modes)
        .map(|k| (k as f64, amp * r.gen_range(-1.0..1.0) / k as f64, r.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let kappa = std::f64::consts::TAU / grid.lx();
    SurfaceField::from_fn(grid, |x| terms.iter().map(|(k, a, p)| a * (k * kappa * x + p).cos()).sum())
}

/// Low-mode field times a random cubic in z.
pub fn volume(grid: &Grid, r: &mut ChaCha8Rng, amp: f64, modes: usize) -> VolumeField {
    let s = surface(grid, r, amp, modes);
    let c: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
    let p = VolumeField::from_fn(grid, |_, z| c[0] + z * (c[1] + z * (c[2] + z * c[3])));
    VolumeField::from_surface(grid, &s)
        .mul(&p)
        .add(&VolumeField::from_fn(grid, |_, z| amp * c[3] * z * z))
}

/// Vorticity `curl^μ A / μ` of a random smooth vector potential; it is
/// divergence free for the geometry of `zeta`.
pub fn vorticity(
    model: &Model,
    zeta: &SurfaceField,
    r: &mut ChaCha8Rng,
    amp: f64,
    modes: usize,
) -> Result<VectorVolumeField> {
    let g = &model.grid;
    let geo = model.geometry(zeta)?;
    let a = VectorVolumeField::new(volume(g, r, amp, modes), volume(g, r, amp, modes), volume(g, r, amp, modes));
    Ok(geo.scaled_curl(&a).scale(1.0 / model.params.mu))
}

/// A prepared smooth state with elevation, potential and vorticity present.
pub fn state(model: &Model, seed: u64, amp: f64) -> Result<State> {
    let g = &model.grid;
    let mut r = rng(seed);
    let zeta = surface(g, &mut r, amp, 3);
    let psi = surface(g, &mut r, amp, 3);
    let omega = vorticity(model, &zeta, &mut r, amp, 2)?;
    model.prepare(&State { t: 0.0, zeta, psi, omega })
}
