//! The straightening map of the fluid domain onto the flat strip.
//!
//! The dimensionless fluid domain `{-1 < Z < εζ(x)}` is pulled back to the
//! strip `𝒮 = 𝕋 × (-1, 0)` through `Z = z + σ(x, z)` with `σ = ε(1+z)ζ(x)`.
//! Physical derivatives become the chain-rule operators
//!
//! ```text
//! ∂x^σ = ∂x − (∂xσ / J) ∂z,    ∂z^σ = ∂z / J,    J = 1 + ∂zσ = 1 + εζ,
//! ```
//!
//! and the shallow-water scaling enters through `∇^{σ,μ} = (√μ ∂x^σ, 0, ∂z^σ)`.
//! Vector fields handed to the `scaled_*` operators are taken as they are
//! (the "μ-convention"); a velocity stored as `(V_x, V_y, w)` must first be
//! converted with [`GeometryCache::velocity_to_mu`].

use std::sync::Arc;

use crate::error::{Result, VwsError};
use crate::spectral::{Grid, SurfaceField, VectorVolumeField, VolumeField};

#[derive(Clone, Debug)]
pub struct GeometryCache {
    pub grid: Arc<Grid>,
    pub eps: f64,
    pub mu: f64,
    pub sqrt_mu: f64,
    pub zeta: SurfaceField,
    pub zeta_x: SurfaceField,
    /// Water depth `1 + εζ`.
    pub h: SurfaceField,
    pub sigma: VolumeField,
    pub sigma_x: VolumeField,
    pub sigma_z: VolumeField,
    /// Jacobian `1 + ∂zσ`; equal to `h` on every level.
    pub jac: VolumeField,
    /// x-component `−ε√μ ∂xζ` of the scaled surface normal `N^μ`.
    pub normal_x: SurfaceField,
}

/// Which boundary of the strip a trace is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Surface,
    Bottom,
}

/// Direction of a σ-derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

pub fn trace(f: &VolumeField, where_: Boundary) -> SurfaceField {
    match where_ {
        Boundary::Surface => f.surface(),
        Boundary::Bottom => f.bottom(),
    }
}

/// Good unknown `∂x^α ψ − ε w̲ ∂x^α ζ`.
pub fn good_unknown(
    grid: &Grid,
    psi: &SurfaceField,
    zeta: &SurfaceField,
    w_surface: &SurfaceField,
    alpha: u32,
    eps: f64,
) -> SurfaceField {
    let dpsi = grid.dx_n(psi, alpha);
    let dzeta = grid.dx_n(zeta, alpha);
    dpsi.zip_map(&w_surface.mul(&dzeta), |a, b| a - eps * b)
}

impl GeometryCache {
    pub fn new(grid: Arc<Grid>, zeta: &SurfaceField, eps: f64, mu: f64, h_min: f64) -> Result<Self> {
        grid.check_surface(zeta)?;
        if !zeta.is_finite() {
            return Err(VwsError::NonFinite("surface elevation".into()));
        }
        if !(eps > 0.0 && mu > 0.0) {
            return Err(VwsError::InvalidParams(format!("eps = {eps} and mu = {mu} must be positive")));
        }
        let h = zeta.map(|v| 1.0 + eps * v);
        let min_depth = h.min();
        if min_depth < h_min {
            return Err(VwsError::DepthVanishes { min_depth, h_min });
        }
        let zeta_x = grid.dx(zeta);
        let nz = grid.nz();
        let z = grid.z().to_vec();
        let mut sigma = VolumeField::zeros(&grid);
        let mut sigma_x = VolumeField::zeros(&grid);
        for i in 0..grid.nx() {
            for j in 0..nz {
                sigma.set(i, j, eps * (1.0 + z[j]) * zeta.values[i]);
                sigma_x.set(i, j, eps * (1.0 + z[j]) * zeta_x.values[i]);
            }
        }
        let sigma_z = VolumeField::from_surface(&grid, &zeta.scale(eps));
        let jac = VolumeField::from_surface(&grid, &h);
        let normal_x = zeta_x.scale(-eps * mu.sqrt());
        Ok(Self {
            grid,
            eps,
            mu,
            sqrt_mu: mu.sqrt(),
            zeta: zeta.clone(),
            zeta_x,
            h,
            sigma,
            sigma_x,
            sigma_z,
            jac,
            normal_x,
        })
    }

    /// `∂x^σ F` given the flat derivatives `∂xF` and `∂zF`.
    pub fn combine_dx(&self, fx: &VolumeField, fz: &VolumeField) -> VolumeField {
        let mut out = fx.clone();
        for ((o, &s), (&j, &d)) in out
            .values
            .iter_mut()
            .zip(&self.sigma_x.values)
            .zip(self.jac.values.iter().zip(&fz.values))
        {
            *o -= s / j * d;
        }
        out
    }

    pub fn dx_sigma(&self, f: &VolumeField) -> VolumeField {
        self.combine_dx(&self.grid.dx_volume(f), &self.grid.dz_volume(f))
    }

    pub fn dz_sigma(&self, f: &VolumeField) -> VolumeField {
        self.grid.dz_volume(f).zip_map(&self.jac, |d, j| d / j)
    }

    pub fn sigma_derivative(&self, f: &VolumeField, axis: Axis) -> VolumeField {
        match axis {
            Axis::X => self.dx_sigma(f),
            Axis::Z => self.dz_sigma(f),
        }
    }

    /// `∂t^σ F = ∂tF − (∂tσ / J) ∂zF` for a caller-supplied `∂tσ`.
    pub fn dt_sigma(&self, dt_f: &VolumeField, f: &VolumeField, dt_sigma: &VolumeField) -> VolumeField {
        let fz = self.grid.dz_volume(f);
        let mut out = dt_f.clone();
        for (((o, &s), &j), &d) in out.values.iter_mut().zip(&dt_sigma.values).zip(&self.jac.values).zip(&fz.values) {
            *o -= s / j * d;
        }
        out
    }

    /// `∂tσ = ε(1+z)∂tζ`.
    pub fn sigma_rate(&self, dt_zeta: &SurfaceField) -> VolumeField {
        let one_plus_z = VolumeField::from_fn(&self.grid, |_, z| self.eps * (1.0 + z));
        one_plus_z.mul_surface(dt_zeta)
    }

    /// `∇^{σ,μ} F = (√μ ∂x^σ F, 0, ∂z^σ F)`.
    pub fn scaled_grad(&self, f: &VolumeField) -> VectorVolumeField {
        VectorVolumeField::new(
            self.dx_sigma(f).scale(self.sqrt_mu),
            VolumeField::zeros(&self.grid),
            self.dz_sigma(f),
        )
    }

    /// `√μ ∂x^σ A₁ + ∂z^σ A₃`.
    pub fn scaled_div(&self, a: &VectorVolumeField) -> VolumeField {
        self.dx_sigma(&a.x).scale(self.sqrt_mu).add(&self.dz_sigma(&a.z))
    }

    /// `(−∂z^σ A₂, ∂z^σ A₁ − √μ ∂x^σ A₃, √μ ∂x^σ A₂)`.
    pub fn scaled_curl(&self, a: &VectorVolumeField) -> VectorVolumeField {
        let dz2 = self.dz_sigma(&a.y);
        VectorVolumeField::new(
            dz2.scale(-1.0),
            self.dz_sigma(&a.x).sub(&self.dx_sigma(&a.z).scale(self.sqrt_mu)),
            self.dx_sigma(&a.y).scale(self.sqrt_mu),
        )
    }

    /// `J · div^{σ,μ} A` in conservation form,
    /// `√μ ∂x(J A₁) + ∂z(A₃ − √μ ∂xσ A₁)`.
    /// This is the discrete divergence that the elliptic solvers annihilate.
    pub fn piola_div(&self, a: &VectorVolumeField) -> VolumeField {
        let g = &self.grid;
        let flux_x = self.jac.mul(&a.x).scale(self.sqrt_mu);
        let flux_z = a.z.sub(&self.sigma_x.mul(&a.x).scale(self.sqrt_mu));
        g.dx_volume(&flux_x).add(&g.dz_volume(&flux_z))
    }

    /// `(V_x, V_y, w) ↦ (√μ V_x, √μ V_y, w)`.
    pub fn velocity_to_mu(&self, u: &VectorVolumeField) -> VectorVolumeField {
        VectorVolumeField::new(u.x.scale(self.sqrt_mu), u.y.scale(self.sqrt_mu), u.z.clone())
    }

    /// Integral over the fluid domain, i.e. over the strip with weight J.
    pub fn volume_integral(&self, f: &VolumeField) -> f64 {
        self.grid.strip_integral(&f.mul(&self.jac))
    }

    /// `∫_{-1}^0 J f dz` for every column.
    pub fn depth_integral(&self, f: &VolumeField) -> SurfaceField {
        self.grid.column_integral(f).mul(&self.h)
    }

    /// Surface value of `A·N^μ` for a μ-convention field.
    pub fn surface_normal_flux(&self, a: &VectorVolumeField) -> SurfaceField {
        a.x.surface().mul(&self.normal_x).add(&a.z.surface())
    }

    /// Interior pseudo-normal `Ñ^μ = (−√μ ∂xσ, 0, 1)` dotted with `A`.
    pub fn pseudo_normal_flux(&self, a: &VectorVolumeField) -> VolumeField {
        a.z.zip_map(&a.x.mul(&self.sigma_x), |w, s| w - self.sqrt_mu * s)
    }

    /// `U∥ = (V̲_x + ε w̲ ∂xζ, V̲_y)` for a velocity stored as `(V_x, V_y, w)`.
    pub fn tangential_trace(&self, u: &VectorVolumeField) -> (SurfaceField, SurfaceField) {
        let vx = u.x.surface();
        let w = u.z.surface();
        let ux = vx.zip_map(&w.mul(&self.zeta_x), |a, b| a + self.eps * b);
        (ux, u.y.surface())
    }

    /// Tangential trace of a μ-convention field, `A̲_h/√μ + ε A̲_v ∂xζ` (x-part).
    pub fn tangential_trace_mu(&self, a: &VectorVolumeField) -> (SurfaceField, SurfaceField) {
        let ax = a.x.surface().scale(1.0 / self.sqrt_mu);
        let az = a.z.surface();
        (ax.zip_map(&az.mul(&self.zeta_x), |p, q| p + self.eps * q), a.y.surface().scale(1.0 / self.sqrt_mu))
    }

    /// Physical vertical coordinate `Z = z + σ` on the grid.
    pub fn physical_z(&self) -> VolumeField {
        let z = VolumeField::from_fn(&self.grid, |_, z| z);
        z.add(&self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup(eps: f64, mu: f64) -> GeometryCache {
        let g = Arc::new(Grid::new(32, 20, 2.0 * PI).unwrap());
        let zeta = SurfaceField::from_fn(&g, |x| 0.1 * x.cos() + 0.05 * (2.0 * x).sin());
        GeometryCache::new(g, &zeta, eps, mu, 0.05).unwrap()
    }

    #[test]
    fn flat_surface_geometry() {
        let g = Arc::new(Grid::new(16, 9, 2.0 * PI).unwrap());
        let geo = GeometryCache::new(g.clone(), &SurfaceField::zeros(16), 1.0, 0.3, 0.05).unwrap();
        assert_eq!(geo.sigma.max_abs(), 0.0);
        assert!(geo.h.values.iter().all(|&v| v == 1.0));
        assert_eq!(geo.normal_x.max_abs(), 0.0);
        let f = VolumeField::from_fn(&g, |x, z| x.sin() * z * z);
        assert!(geo.dx_sigma(&f).sub(&g.dx_volume(&f)).max_abs() < 1e-13);
        assert!(geo.dz_sigma(&f).sub(&g.dz_volume(&f)).max_abs() < 1e-13);
    }

    #[test]
    fn sigma_boundary_values_and_depth_check() {
        let g = Arc::new(Grid::new(16, 9, 2.0 * PI).unwrap());
        let zeta = SurfaceField::from_fn(&g, |x| 0.1 * x.cos());
        let geo = GeometryCache::new(g.clone(), &zeta, 1.0, 1.0, 0.05).unwrap();
        assert_eq!(geo.sigma.bottom().max_abs(), 0.0);
        assert!(geo.sigma.surface().sub(&zeta).max_abs() < 1e-15);
        let deep = SurfaceField::constant(16, -1.01);
        let r = GeometryCache::new(g, &deep, 1.0, 1.0, 0.05);
        assert!(matches!(r, Err(VwsError::DepthVanishes { .. })));
    }

    #[test]
    fn physical_vertical_coordinate_derivatives() {
        let geo = setup(1.0, 0.5);
        let zphys = geo.physical_z();
        assert!(geo.dz_sigma(&zphys).map(|v| v - 1.0).max_abs() < 1e-10);
        assert!(geo.dx_sigma(&zphys).max_abs() < 1e-10);
    }

    #[test]
    fn curl_grad_and_div_curl_vanish() {
        let geo = setup(1.0, 0.5);
        let g = &geo.grid;
        let f = VolumeField::from_fn(g, |x, z| (x.sin() + 0.3 * (2.0 * x).cos()) * (z * z * z - z).exp());
        let cg = geo.scaled_curl(&geo.scaled_grad(&f));
        assert!(cg.max_abs() < 1e-9, "{}", cg.max_abs());
        let a = VectorVolumeField::new(
            VolumeField::from_fn(g, |x, z| x.cos() * z),
            VolumeField::from_fn(g, |x, z| (x + z).sin()),
            VolumeField::from_fn(g, |x, z| (2.0 * x).sin() * (1.0 + z).powi(3)),
        );
        let dc = geo.scaled_div(&geo.scaled_curl(&a));
        assert!(dc.max_abs() < 1e-9, "{}", dc.max_abs());
    }

    #[test]
    fn flat_divergence_free_example() {
        let g = Arc::new(Grid::new(16, 12, 2.0 * PI).unwrap());
        let geo = GeometryCache::new(g.clone(), &SurfaceField::zeros(16), 1.0, 1.0, 0.05).unwrap();
        // Vx = sin x (z+1)², w = -cos x ((z+1)³/3 - 1/3): √μ ∂xVx + ∂z w = 0 with μ = 1.
        let u = VectorVolumeField::new(
            VolumeField::from_fn(&g, |x, z| x.sin() * (z + 1.0).powi(2)),
            VolumeField::zeros(&g),
            VolumeField::from_fn(&g, |x, z| -x.cos() * ((z + 1.0).powi(3) / 3.0 - 1.0 / 3.0)),
        );
        assert!(geo.scaled_div(&u).max_abs() < 1e-10);
    }

    #[test]
    fn piola_divergence_matches_pointwise_divergence() {
        let geo = setup(1.0, 0.5);
        let g = &geo.grid;
        let a = VectorVolumeField::new(
            VolumeField::from_fn(g, |x, z| x.cos() * (1.0 + z) + 0.2),
            VolumeField::zeros(g),
            VolumeField::from_fn(g, |x, z| x.sin() * z * z),
        );
        let lhs = geo.piola_div(&a);
        let rhs = geo.scaled_div(&a).mul(&geo.jac);
        assert!(lhs.sub(&rhs).max_abs() < 1e-10);
    }

    #[test]
    fn integration_by_parts() {
        // ∫_𝒮 (∇F·G + F div G) J = ∫ F̲ G̲·N^μ − ∫ F_b G_{b,3}
        let geo = setup(1.0, 0.6);
        let g = &geo.grid;
        let f = VolumeField::from_fn(g, |x, z| (x.sin() + 2.0) * (0.5 * z).exp());
        let gv = VectorVolumeField::new(
            VolumeField::from_fn(g, |x, z| (2.0 * x).cos() * (1.0 + z * z)),
            VolumeField::zeros(g),
            VolumeField::from_fn(g, |x, z| x.sin() * z + 0.3),
        );
        let lhs = geo.volume_integral(&geo.scaled_grad(&f).dot(&gv)) + geo.volume_integral(&f.mul(&geo.scaled_div(&gv)));
        let top = g.surface_integral(&f.surface().mul(&geo.surface_normal_flux(&gv)));
        let bottom = g.surface_integral(&f.bottom().mul(&gv.z.bottom()));
        assert!((lhs - (top - bottom)).abs() < 1e-8, "{lhs} vs {}", top - bottom);
    }

    #[test]
    fn tangential_trace_examples() {
        let g = Arc::new(Grid::new(16, 9, 2.0 * PI).unwrap());
        let zeta = SurfaceField::from_fn(&g, f64::cos);
        let geo = GeometryCache::new(g.clone(), &zeta, 1.0, 1.0, 0.0).unwrap();
        let u = VectorVolumeField::new(VolumeField::zeros(&g), VolumeField::zeros(&g), VolumeField::constant(&g, 1.0));
        let (ux, uy) = geo.tangential_trace(&u);
        assert!(ux.sub(&SurfaceField::from_fn(&g, |x| -x.sin())).max_abs() < 1e-13);
        assert_eq!(uy.max_abs(), 0.0);
    }

    #[test]
    fn traces_and_good_unknowns() {
        let g = Arc::new(Grid::new(16, 9, 2.0 * PI).unwrap());
        let f = VolumeField::from_fn(&g, |x, z| x.cos() * z.exp());
        assert!(trace(&f, Boundary::Surface).sub(&SurfaceField::from_fn(&g, f64::cos)).max_abs() < 1e-15);
        assert!(trace(&f, Boundary::Bottom).sub(&SurfaceField::from_fn(&g, |x| x.cos() / 1f64.exp())).max_abs() < 1e-15);
        let lin = VolumeField::from_fn(&g, |_, z| 1.0 + z);
        assert_eq!(trace(&lin, Boundary::Surface).values[3], 1.0);
        assert_eq!(trace(&lin, Boundary::Bottom).values[3], 0.0);
        let psi = SurfaceField::from_fn(&g, f64::sin);
        let zeta = SurfaceField::from_fn(&g, f64::cos);
        let one = SurfaceField::constant(16, 1.0);
        let gu = good_unknown(&g, &psi, &zeta, &one, 1, 1.0);
        assert!(gu.sub(&SurfaceField::from_fn(&g, |x| x.cos() + x.sin())).max_abs() < 1e-13);
        let flat = good_unknown(&g, &psi, &SurfaceField::constant(16, 0.3), &one, 2, 1.0);
        assert!(flat.sub(&g.dx_n(&psi, 2)).max_abs() < 1e-13);
    }
}
