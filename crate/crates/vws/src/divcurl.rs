//! Reconstruction of the velocity from `(ζ, ψ, ω)`.
//!
//! With `∂y ≡ 0` the vector-potential problem splits exactly into three scalar
//! pieces:
//!
//! * a potential `φ` with `φ = ψ` at the surface and a vanishing conormal flux
//!   at the bottom,
//! * the transverse velocity `V_y`, recovered by integrating `ω₁` down from
//!   its surface value `∂xψ̃ + c`, where `∂x²ψ̃ = ω̲·N^μ`,
//! * an in-plane streamfunction `Ψ` driven by `ω₂`, vanishing at the bottom
//!   and carrying no tangential velocity at the surface.
//!
//! All elliptic problems share the divergence-form operator
//! `L u = ∂x(μ(J ∂xu − ∂xσ ∂zu)) + ∂z(−μ ∂xσ ∂xu + (1 + μ(∂xσ)²)/J ∂zu)`,
//! which is `J` times the scaled Laplacian. They are solved by GMRES
//! preconditioned with the exact flat-strip solve, one small dense system per
//! Fourier mode.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VwsError};
use crate::geometry::GeometryCache;
use crate::krylov::{gmres, GmresOptions, KrylovStats};
use crate::spectral::{matvec, Grid, SurfaceField, VectorVolumeField, VolumeField};

/// Tolerances shared by the reconstruction and the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative residual of the Krylov solves.
    pub krylov: f64,
    /// Divergence of ω relative to its sup norm.
    pub div: f64,
    /// Mean of fields that must be mean-zero, relative to their sup norm.
    pub mean: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { krylov: 1e-10, div: 1e-8, mean: 1e-12 }
    }
}

/// How the free constant in the transverse velocity is fixed.
///
/// The data `(ζ, ψ, ω)` determine `V_y` only up to an additive constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransverseGauge {
    /// Zero transverse momentum `∫∫ J V_y = 0`.
    #[default]
    ZeroMomentum,
    /// Zero mean of the surface value `V̲_y`.
    SurfaceMean,
}

/// Whether the input checks of a reconstruction are enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Checks {
    /// Fail on a divergent ω or on a surface flux with nonzero mean.
    Strict,
    /// Remove the flux mean silently and skip the divergence test. Used inside
    /// time stepping, where intermediate Runge–Kutta stages are not projected.
    Lenient,
}

/// Boundary row type of an elliptic problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bc {
    Dirichlet,
    Conormal,
}

/// Residuals of a reconstruction, all as sup norms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `μ ∂x^σ V_x + ∂z^σ w`.
    pub div: f64,
    /// `(1/μ) curl^{σ,μ} U^μ − ω`.
    pub curl: f64,
    /// Vertical velocity at the bottom.
    pub bottom_w: f64,
    /// `U∥·e_x − ∂xψ`.
    pub tangential_x: f64,
    /// `U∥·e_y − ∂xψ̃ − c`.
    pub tangential_y: f64,
    /// `ω̲·N^μ − ∂x(U∥·e_y)`.
    pub surface_identity: f64,
    /// `ω_b·e_z − ∂x V_{b,y}`.
    pub bottom_identity: f64,
    /// `∂x^σ V_y − ω₃` over the whole strip.
    pub transverse_consistency: f64,
    /// Mean of `ω̲·N^μ` that was removed before inverting `∂x²`.
    pub flux_mean: f64,
    /// Difference between the flux form and the direct form of the
    /// Dirichlet–Neumann output.
    pub dn_forms: f64,
    pub potential: KrylovStats,
    pub stream: KrylovStats,
}

/// Surface traces of a reconstructed velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceTraces {
    pub vx: SurfaceField,
    pub vy: SurfaceField,
    pub w: SurfaceField,
    /// `U∥ = (V̲_x + ε w̲ ∂xζ, V̲_y)`.
    pub tangential: (SurfaceField, SurfaceField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BottomTraces {
    pub vx: SurfaceField,
    pub vy: SurfaceField,
    pub w: SurfaceField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivCurlSolution {
    /// `(V_x, V_y, w)`.
    pub velocity: VectorVolumeField,
    pub potential: VolumeField,
    /// Rotational part; its x and z components come from the streamfunction
    /// and its y component is the full transverse velocity.
    pub rotational: VectorVolumeField,
    pub streamfunction: VolumeField,
    pub tilde_psi: SurfaceField,
    /// Constant added to `∂xψ̃` to obtain `V̲_y`.
    pub transverse_constant: f64,
    pub surface: SurfaceTraces,
    pub bottom: BottomTraces,
    /// Generalized Dirichlet–Neumann output in flux form, `−∂x ∫ J V_x dz`.
    pub dn: SurfaceField,
    pub report: Option<ResidualReport>,
}

/// Exact solver of the flat-strip problem `μ h̄ ∂x²u + h̄⁻¹ ∂z²u` with the
/// boundary rows of the variable-coefficient problem, one dense inverse per
/// wavenumber magnitude.
struct FlatPreconditioner {
    nx: usize,
    nz: usize,
    /// Row-major `nz × nz` inverses indexed by `min(m, nx − m)`.
    inverses: Vec<Vec<f64>>,
}

impl FlatPreconditioner {
    fn new(grid: &Grid, mu: f64, hbar: f64, top: Bc, bottom: Bc) -> Result<Self> {
        let (nx, nz) = (grid.nx(), grid.nz());
        let d = DMatrix::from_row_slice(nz, nz, grid.dz_matrix());
        let d2 = &d * &d;
        let mut inverses = Vec::with_capacity(nx / 2 + 1);
        for m in 0..=nx / 2 {
            // The spectral x-derivative annihilates the Nyquist mode.
            let k = if m == nx / 2 { 0.0 } else { grid.k()[m] };
            let mut a = d2.scale(1.0 / hbar);
            for j in 0..nz {
                a[(j, j)] -= mu * hbar * k * k;
            }
            for (row, bc) in [(0, top), (nz - 1, bottom)] {
                for c in 0..nz {
                    a[(row, c)] = match bc {
                        Bc::Dirichlet => f64::from(u8::from(c == row)),
                        Bc::Conormal => d[(row, c)] / hbar,
                    };
                }
            }
            let inv = a.try_inverse().ok_or_else(|| {
                VwsError::Numerical(format!("singular flat preconditioner at mode {m}"))
            })?;
            let mut row_major = Vec::with_capacity(nz * nz);
            for r in 0..nz {
                for c in 0..nz {
                    row_major.push(inv[(r, c)]);
                }
            }
            inverses.push(row_major);
        }
        Ok(Self { nx, nz, inverses })
    }

    fn apply(&self, grid: &Grid, r: &[f64]) -> Vec<f64> {
        let (nx, nz) = (self.nx, self.nz);
        let mut spec = vec![Complex64::new(0.0, 0.0); nx * nz];
        let mut level = vec![0.0; nx];
        for j in 0..nz {
            for i in 0..nx {
                level[i] = r[i * nz + j];
            }
            for (m, c) in grid.fft(&level).into_iter().enumerate() {
                spec[m * nz + j] = c;
            }
        }
        let mut re = vec![0.0; nz];
        let mut im = vec![0.0; nz];
        let mut ore = vec![0.0; nz];
        let mut oim = vec![0.0; nz];
        for m in 0..nx {
            let inv = &self.inverses[m.min(nx - m)];
            let col = &mut spec[m * nz..(m + 1) * nz];
            for (j, c) in col.iter().enumerate() {
                re[j] = c.re;
                im[j] = c.im;
            }
            matvec(inv, &re, &mut ore);
            matvec(inv, &im, &mut oim);
            for (j, c) in col.iter_mut().enumerate() {
                *c = Complex64::new(ore[j], oim[j]);
            }
        }
        let mut out = vec![0.0; nx * nz];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); nx];
        for j in 0..nz {
            for m in 0..nx {
                coeffs[m] = spec[m * nz + j];
            }
            for (i, v) in grid.ifft(&coeffs).into_iter().enumerate() {
                out[i * nz + j] = v;
            }
        }
        out
    }
}

/// Coefficients of the divergence-form operator for one geometry.
struct EllipticOperator<'a> {
    geo: &'a GeometryCache,
    axx: VolumeField,
    axz: VolumeField,
    azz: VolumeField,
}

impl<'a> EllipticOperator<'a> {
    fn new(geo: &'a GeometryCache) -> Self {
        let mu = geo.mu;
        let axx = geo.jac.scale(mu);
        let axz = geo.sigma_x.scale(-mu);
        let azz = geo.sigma_x.zip_map(&geo.jac, |s, j| (1.0 + mu * s * s) / j);
        Self { geo, axx, axz, azz }
    }

    /// Horizontal and vertical fluxes `(F_x, F_z)` of `u`.
    fn fluxes(&self, u: &VolumeField) -> (VolumeField, VolumeField) {
        let g = &self.geo.grid;
        let ux = g.dx_volume(u);
        let uz = g.dz_volume(u);
        let mut fx = VolumeField::zeros(g);
        let mut fz = VolumeField::zeros(g);
        for n in 0..u.values.len() {
            fx.values[n] = self.axx.values[n] * ux.values[n] + self.axz.values[n] * uz.values[n];
            fz.values[n] = self.axz.values[n] * ux.values[n] + self.azz.values[n] * uz.values[n];
        }
        (fx, fz)
    }

    fn apply(&self, u: &VolumeField, top: Bc, bottom: Bc) -> VolumeField {
        let g = &self.geo.grid;
        let nz = g.nz();
        let (fx, fz) = self.fluxes(u);
        let mut r = g.dx_volume(&fx).add(&g.dz_volume(&fz));
        for i in 0..g.nx() {
            for (row, bc) in [(0, top), (nz - 1, bottom)] {
                let n = i * nz + row;
                r.values[n] = match bc {
                    Bc::Dirichlet => u.values[n],
                    Bc::Conormal => fz.values[n],
                };
            }
        }
        r
    }
}

/// Reconstruction engine for one grid and one value of μ. The flat-strip
/// preconditioners are built once and reused for every geometry.
pub struct DivCurlSolver {
    grid: Arc<Grid>,
    mu: f64,
    pub tol: Tolerances,
    pub gauge: TransverseGauge,
    pub gmres: GmresOptions,
    /// Dirichlet top and conormal bottom (potential and projection).
    pre_dn: FlatPreconditioner,
    /// Conormal top and Dirichlet bottom (streamfunction).
    pre_nd: FlatPreconditioner,
}

impl std::fmt::Debug for DivCurlSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivCurlSolver")
            .field("nx", &self.grid.nx())
            .field("nz", &self.grid.nz())
            .field("mu", &self.mu)
            .field("tol", &self.tol)
            .field("gauge", &self.gauge)
            .finish()
    }
}

/// Sup norm of `∇^{σ,μ}·ω`, the quantity the divergence checks act on.
pub fn divergence_residual(geo: &GeometryCache, omega: &VectorVolumeField) -> f64 {
    geo.scaled_div(omega).max_abs()
}

impl DivCurlSolver {
    pub fn new(grid: Arc<Grid>, mu: f64, tol: Tolerances, gauge: TransverseGauge) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(VwsError::InvalidParams(format!("mu = {mu} must be positive")));
        }
        let pre_dn = FlatPreconditioner::new(&grid, mu, 1.0, Bc::Dirichlet, Bc::Conormal)?;
        let pre_nd = FlatPreconditioner::new(&grid, mu, 1.0, Bc::Conormal, Bc::Dirichlet)?;
        let gmres = GmresOptions { tol: tol.krylov, ..GmresOptions::default() };
        Ok(Self { grid, mu, tol, gauge, gmres, pre_dn, pre_nd })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn check_geometry(&self, geo: &GeometryCache) -> Result<()> {
        if !Arc::ptr_eq(&geo.grid, &self.grid) && (geo.grid.nx() != self.grid.nx() || geo.grid.nz() != self.grid.nz()) {
            return Err(VwsError::ShapeMismatch("geometry built on a different grid".into()));
        }
        if (geo.mu - self.mu).abs() > 1e-14 * self.mu {
            return Err(VwsError::InvalidParams(format!(
                "solver built for mu = {} but geometry has mu = {}",
                self.mu, geo.mu
            )));
        }
        Ok(())
    }

    /// Solves `L u = f` in the interior with the given boundary rows.
    #[allow(clippy::too_many_arguments)]
    fn solve_elliptic(
        &self,
        geo: &GeometryCache,
        top: Bc,
        bottom: Bc,
        interior: &VolumeField,
        top_value: &SurfaceField,
        bottom_value: &SurfaceField,
        guess: Option<&VolumeField>,
    ) -> Result<(VolumeField, KrylovStats)> {
        let g = &self.grid;
        let nz = g.nz();
        let op = EllipticOperator::new(geo);
        let pre = match (top, bottom) {
            (Bc::Dirichlet, Bc::Conormal) => &self.pre_dn,
            (Bc::Conormal, Bc::Dirichlet) => &self.pre_nd,
            _ => return Err(VwsError::Numerical("unsupported boundary combination".into())),
        };
        let mut b = interior.values.clone();
        for i in 0..g.nx() {
            b[i * nz] = top_value.values[i];
            b[i * nz + nz - 1] = bottom_value.values[i];
        }
        let mut x = guess.map_or_else(|| vec![0.0; b.len()], |u| u.values.clone());
        let to_field = |v: &[f64]| VolumeField { nx: g.nx(), nz, values: v.to_vec() };
        // Left preconditioning: the residual that is driven down is the
        // preconditioned one, a proxy for the error. The raw residual carries
        // rounding of order eps·nz⁴ from the Chebyshev second derivative and
        // cannot reach tight tolerances at high vertical resolution.
        let pb = pre.apply(g, &b);
        let stats = gmres(
            |v| pre.apply(g, &op.apply(&to_field(v), top, bottom).values),
            |v| v.to_vec(),
            &pb,
            &mut x,
            &self.gmres,
        )?;
        Ok((to_field(&x), stats))
    }

    /// Mean-zero `ψ̃` with `∂x²ψ̃ = ω̲·N^μ`. Returns the removed flux mean.
    pub fn solve_tilde_psi(
        &self,
        geo: &GeometryCache,
        omega: &VectorVolumeField,
        checks: Checks,
    ) -> Result<(SurfaceField, f64)> {
        let flux = geo.surface_normal_flux(omega);
        let mean = flux.mean();
        let tol = self.tol.mean * flux.max_abs().max(omega.max_abs()).max(1.0);
        if checks == Checks::Strict && mean.abs() > tol {
            return Err(VwsError::MeanNotZero { what: "surface flux of the vorticity".into(), mean, tol });
        }
        Ok((self.grid.inv_dxx(&flux), mean))
    }

    /// Potential with `φ = ψ` at the surface and zero conormal flux at the bottom.
    pub fn solve_potential(
        &self,
        geo: &GeometryCache,
        psi: &SurfaceField,
        guess: Option<&VolumeField>,
    ) -> Result<(VolumeField, KrylovStats)> {
        self.check_geometry(geo)?;
        let g = &self.grid;
        g.check_surface(psi)?;
        self.solve_elliptic(
            geo,
            Bc::Dirichlet,
            Bc::Conormal,
            &VolumeField::zeros(g),
            psi,
            &SurfaceField::zeros(g.nx()),
            guess,
        )
    }

    /// Streamfunction `Ψ` with `L Ψ = J √μ ω₂`, `Ψ = 0` at the bottom and zero
    /// conormal flux (no tangential velocity) at the surface.
    pub fn solve_streamfunction(
        &self,
        geo: &GeometryCache,
        omega2: &VolumeField,
        guess: Option<&VolumeField>,
    ) -> Result<(VolumeField, KrylovStats)> {
        let g = &self.grid;
        if omega2.max_abs() == 0.0 {
            return Ok((VolumeField::zeros(g), KrylovStats::default()));
        }
        let rhs = omega2.mul(&geo.jac).scale(geo.sqrt_mu);
        let zero = SurfaceField::zeros(g.nx());
        self.solve_elliptic(geo, Bc::Conormal, Bc::Dirichlet, &rhs, &zero, &zero, guess)
    }

    /// Transverse velocity `V_y = ∂xψ̃ + c + √μ ∫_z^0 J ω₁`, with `c` chosen by
    /// the gauge.
    pub fn transverse_velocity(
        &self,
        geo: &GeometryCache,
        omega1: &VolumeField,
        tilde_psi: &SurfaceField,
    ) -> (VolumeField, f64) {
        let g = &self.grid;
        let top = g.dx(tilde_psi);
        let vy0 = VolumeField::from_surface(g, &top)
            .add(&g.integrate_down(&omega1.mul(&geo.jac)).scale(geo.sqrt_mu));
        let c = match self.gauge {
            TransverseGauge::SurfaceMean => -top.mean(),
            TransverseGauge::ZeroMomentum => -geo.volume_integral(&vy0) / g.surface_integral(&geo.h),
        };
        (vy0.map(|v| v + c), c)
    }

    /// Rotational velocity: `(∂z^σΨ, V_y, −μ ∂x^σΨ)` together with `Ψ`.
    pub fn solve_rotational(
        &self,
        geo: &GeometryCache,
        omega: &VectorVolumeField,
        tilde_psi: &SurfaceField,
        checks: Checks,
    ) -> Result<(VectorVolumeField, VolumeField, f64, KrylovStats)> {
        self.check_geometry(geo)?;
        if checks == Checks::Strict {
            self.check_divergence(geo, omega)?;
        }
        let (vy, c) = self.transverse_velocity(geo, &omega.x, tilde_psi);
        let (stream, stats) = self.solve_streamfunction(geo, &omega.y, None)?;
        let vx = geo.dz_sigma(&stream);
        let w = geo.dx_sigma(&stream).scale(-geo.mu);
        Ok((VectorVolumeField::new(vx, vy, w), stream, c, stats))
    }

    pub fn check_divergence(&self, geo: &GeometryCache, omega: &VectorVolumeField) -> Result<()> {
        let residual = divergence_residual(geo, omega);
        let tol = self.tol.div * omega.max_abs().max(f64::MIN_POSITIVE);
        if residual > tol {
            return Err(VwsError::NotDivergenceFree { residual, tol });
        }
        Ok(())
    }

    /// Full reconstruction with input checks and a populated residual report.
    pub fn reconstruct(
        &self,
        geo: &GeometryCache,
        psi: &SurfaceField,
        omega: &VectorVolumeField,
    ) -> Result<DivCurlSolution> {
        let mut sol = self.reconstruct_with(geo, psi, omega, Checks::Strict)?;
        sol.report = Some(self.residual_report(geo, psi, omega, &sol));
        Ok(sol)
    }

    /// Reconstruction without the residual report.
    pub fn reconstruct_with(
        &self,
        geo: &GeometryCache,
        psi: &SurfaceField,
        omega: &VectorVolumeField,
        checks: Checks,
    ) -> Result<DivCurlSolution> {
        self.check_geometry(geo)?;
        let g = &self.grid;
        g.check_surface(psi)?;
        for c in omega.components() {
            g.check_volume(c)?;
        }
        if !psi.is_finite() || !omega.is_finite() {
            return Err(VwsError::NonFinite("reconstruction input".into()));
        }
        let (tilde_psi, _) = self.solve_tilde_psi(geo, omega, checks)?;
        let (potential, _) = self.solve_potential(geo, psi, None)?;
        let (rotational, streamfunction, c, _) = self.solve_rotational(geo, omega, &tilde_psi, checks)?;
        let velocity = VectorVolumeField::new(
            geo.dx_sigma(&potential).add(&rotational.x),
            rotational.y.clone(),
            geo.dz_sigma(&potential).add(&rotational.z),
        );
        Ok(self.assemble(geo, velocity, potential, rotational, streamfunction, tilde_psi, c))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        geo: &GeometryCache,
        velocity: VectorVolumeField,
        potential: VolumeField,
        rotational: VectorVolumeField,
        streamfunction: VolumeField,
        tilde_psi: SurfaceField,
        transverse_constant: f64,
    ) -> DivCurlSolution {
        let g = &self.grid;
        let surface = SurfaceTraces {
            vx: velocity.x.surface(),
            vy: velocity.y.surface(),
            w: velocity.z.surface(),
            tangential: geo.tangential_trace(&velocity),
        };
        let bottom = BottomTraces { vx: velocity.x.bottom(), vy: velocity.y.bottom(), w: velocity.z.bottom() };
        let dn = g.dx(&geo.depth_integral(&velocity.x)).scale(-1.0);
        DivCurlSolution {
            velocity,
            potential,
            rotational,
            streamfunction,
            tilde_psi,
            transverse_constant,
            surface,
            bottom,
            dn,
            report: None,
        }
    }

    /// Direct form `(1/μ) U̲^μ·N^μ = w̲/μ − ε ∂xζ V̲_x` of the Dirichlet–Neumann output.
    pub fn dn_direct(geo: &GeometryCache, sol: &DivCurlSolution) -> SurfaceField {
        sol.surface.w.scale(1.0 / geo.mu).zip_map(&sol.surface.vx.mul(&geo.zeta_x), |a, b| a - geo.eps * b)
    }

    pub fn residual_report(
        &self,
        geo: &GeometryCache,
        psi: &SurfaceField,
        omega: &VectorVolumeField,
        sol: &DivCurlSolution,
    ) -> ResidualReport {
        let g = &self.grid;
        let u = &sol.velocity;
        let umu = geo.velocity_to_mu(u);
        let div = geo.scaled_div(&umu).max_abs();
        let curl = geo.scaled_curl(&umu).scale(1.0 / geo.mu).sub(omega).max_abs();
        let (ux, uy) = &sol.surface.tangential;
        let tangential_x = ux.sub(&g.dx(psi)).max_abs();
        let tangential_y = uy.sub(&g.dx(&sol.tilde_psi).add_scalar(sol.transverse_constant)).max_abs();
        let flux = geo.surface_normal_flux(omega);
        let surface_identity = flux.sub(&g.dx(uy)).max_abs();
        let bottom_identity = omega.z.bottom().sub(&g.dx(&sol.bottom.vy)).max_abs();
        let transverse_consistency = geo.dx_sigma(&u.y).sub(&omega.z).max_abs();
        let dn_forms = sol.dn.sub(&Self::dn_direct(geo, sol)).max_abs();
        // Preconditioned relative residuals of the two elliptic solves,
        // evaluated afresh; the iteration counts are not kept.
        let op = EllipticOperator::new(geo);
        let nz = g.nz();
        let rel = |r: &VolumeField, b: &VolumeField, pre: &FlatPreconditioner| -> KrylovStats {
            let norm = |v: &VolumeField| pre.apply(g, &v.values).iter().map(|v| v * v).sum::<f64>().sqrt();
            let (rn, bn) = (norm(r), norm(b));
            KrylovStats { iterations: 0, residual: if bn == 0.0 { rn } else { rn / bn } }
        };
        let mut b_pot = VolumeField::zeros(g);
        for i in 0..g.nx() {
            b_pot.values[i * nz] = psi.values[i];
        }
        let r_pot = op.apply(&sol.potential, Bc::Dirichlet, Bc::Conormal).sub(&b_pot);
        let mut b_str = omega.y.mul(&geo.jac).scale(geo.sqrt_mu);
        for i in 0..g.nx() {
            b_str.values[i * nz] = 0.0;
            b_str.values[i * nz + nz - 1] = 0.0;
        }
        let r_str = op.apply(&sol.streamfunction, Bc::Conormal, Bc::Dirichlet).sub(&b_str);
        ResidualReport {
            div,
            curl,
            bottom_w: sol.bottom.w.max_abs(),
            tangential_x,
            tangential_y,
            surface_identity,
            bottom_identity,
            transverse_consistency,
            flux_mean: flux.mean(),
            dn_forms,
            potential: rel(&r_pot, &b_pot, &self.pre_dn),
            stream: rel(&r_str, &b_str, &self.pre_nd),
        }
    }

    /// Generalized Dirichlet–Neumann operator in flux form.
    pub fn generalized_dn(
        &self,
        geo: &GeometryCache,
        psi: &SurfaceField,
        omega: &VectorVolumeField,
    ) -> Result<SurfaceField> {
        Ok(self.reconstruct_with(geo, psi, omega, Checks::Strict)?.dn)
    }

    /// `π[ζ]ω = ω − ∇^{σ,μ}φ` where `L φ = J ∇^{σ,μ}·ω` (Piola form), `φ = 0`
    /// at the surface and zero conormal flux at the bottom.
    pub fn project_div_free(&self, geo: &GeometryCache, omega: &VectorVolumeField) -> Result<VectorVolumeField> {
        Ok(self.project_div_free_with_stats(geo, omega)?.0)
    }

    pub fn project_div_free_with_stats(
        &self,
        geo: &GeometryCache,
        omega: &VectorVolumeField,
    ) -> Result<(VectorVolumeField, KrylovStats)> {
        self.check_geometry(geo)?;
        let g = &self.grid;
        let rhs = geo.piola_div(omega);
        let zero = SurfaceField::zeros(g.nx());
        // Without this shortcut GMRES would chase a residual relative to a
        // right-hand side made only of round-off.
        let interior_scale = rhs.max_abs();
        if interior_scale <= 1e-15 * omega.max_abs().max(f64::MIN_POSITIVE) {
            return Ok((omega.clone(), KrylovStats::default()));
        }
        let (phi, stats) = self.solve_elliptic(geo, Bc::Dirichlet, Bc::Conormal, &rhs, &zero, &zero, None)?;
        let grad = geo.scaled_grad(&phi);
        Ok((VectorVolumeField::new(omega.x.sub(&grad.x), omega.y.clone(), omega.z.sub(&grad.z)), stats))
    }

    /// `B` with `(1/μ)`-free identity `curl^{σ,μ} B = C`, `B = 0` at the bottom
    /// and vanishing tangential x-trace at the surface.
    ///
    /// `C` must be divergence free, have no normal flux through the bottom and
    /// carry zero transverse flux `∫∫ J C₂`; the last condition is what makes a
    /// periodic `B₁` possible.
    pub fn curl_inverse(&self, geo: &GeometryCache, c: &VectorVolumeField) -> Result<VectorVolumeField> {
        self.curl_inverse_with(geo, c, Checks::Strict)
    }

    /// [`DivCurlSolver::curl_inverse`] with the admissibility checks optional.
    /// The lenient form serves fields such as a reconstructed velocity, whose
    /// pointwise divergence carries the rounding of the Chebyshev derivative.
    pub fn curl_inverse_with(&self, geo: &GeometryCache, c: &VectorVolumeField, checks: Checks) -> Result<VectorVolumeField> {
        self.check_geometry(geo)?;
        let g = &self.grid;
        let scale = c.max_abs();
        if scale == 0.0 {
            return Ok(VectorVolumeField::zeros(g));
        }
        if checks == Checks::Strict {
            self.check_divergence(geo, c)?;
            let flux = c.z.bottom().max_abs();
            let tol = self.tol.div * scale;
            if flux > tol {
                return Err(VwsError::BottomFluxNotZero { flux, tol });
            }
            let transverse = geo.volume_integral(&c.y);
            let ttol = self.tol.div * scale * g.lx();
            if transverse.abs() > ttol {
                return Err(VwsError::MeanNotZero {
                    what: "transverse flux of curl_inverse input".into(),
                    mean: transverse,
                    tol: ttol,
                });
            }
        }
        let jc1 = c.x.mul(&geo.jac);
        let jc2 = c.y.mul(&geo.jac);
        let sm = geo.sqrt_mu;
        // B₂ from C₁ = −∂z^σB₂ with B₂ = 0 at the bottom.
        let b2 = g.integrate_up(&jc1).scale(-1.0);
        // First guess B₁⁰ from C₂ = ∂z^σB₁ − √μ∂x^σB₃ with B₃⁰ = 0.
        let b1_0 = g.integrate_up(&jc2);
        // A gradient ∇^{σ,μ}f with f = 0 at the bottom and ∂zf = 0 there keeps
        // the curl and the bottom trace; it is used to cancel the surface
        // tangential x-trace of B₁⁰.
        let trace_x = b1_0.surface().scale(1.0 / sm);
        let f_top = g.inv_dx(&trace_x).scale(-1.0);
        let profile = VolumeField::from_fn(g, |_, z| (1.0 + z) * (1.0 + z));
        let f = profile.mul_surface(&f_top);
        let grad = geo.scaled_grad(&f);
        Ok(VectorVolumeField::new(b1_0.add(&grad.x), b2, grad.z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn solver(nx: usize, nz: usize, mu: f64) -> (Arc<Grid>, DivCurlSolver) {
        let g = Arc::new(Grid::new(nx, nz, 2.0 * PI).unwrap());
        let tol = Tolerances { krylov: 1e-12, ..Tolerances::default() };
        let s = DivCurlSolver::new(g.clone(), mu, tol, TransverseGauge::ZeroMomentum).unwrap();
        (g, s)
    }

    fn flat(g: &Arc<Grid>, mu: f64) -> GeometryCache {
        GeometryCache::new(g.clone(), &SurfaceField::zeros(g.nx()), 1.0, mu, 0.05).unwrap()
    }

    #[test]
    fn flat_potential_matches_cosh_profile() {
        let mu = 0.7;
        let (g, s) = solver(16, 17, mu);
        let geo = flat(&g, mu);
        let psi = SurfaceField::from_fn(&g, f64::cos);
        let (phi, _) = s.solve_potential(&geo, &psi, None).unwrap();
        let sm = mu.sqrt();
        let exact = VolumeField::from_fn(&g, |x, z| x.cos() * (sm * (z + 1.0)).cosh() / sm.cosh());
        assert!(phi.sub(&exact).max_abs() < 1e-11);
    }

    #[test]
    fn flat_dn_symbol() {
        let mu = 0.5;
        let (g, s) = solver(16, 17, mu);
        let geo = flat(&g, mu);
        let psi = SurfaceField::from_fn(&g, |x| x.cos() + 0.5 * (3.0 * x).sin());
        let omega = VectorVolumeField::zeros(&g);
        let sol = s.reconstruct(&geo, &psi, &omega).unwrap();
        let sm = mu.sqrt();
        let sym = |k: f64| k * (sm * k).tanh() / sm;
        let exact = SurfaceField::from_fn(&g, |x| sym(1.0) * x.cos() + 0.5 * sym(3.0) * (3.0 * x).sin());
        assert!(sol.dn.sub(&exact).max_abs() < 1e-10);
        assert!(sol.dn.mean().abs() < 1e-15);
        let rep = sol.report.unwrap();
        assert!(rep.dn_forms < 1e-10 && rep.div < 1e-9 && rep.curl < 1e-9);
        assert_eq!(sol.surface.vy.max_abs(), 0.0);
    }

    #[test]
    fn tilde_psi_examples() {
        let mu = 1.0;
        let (g, s) = solver(16, 9, mu);
        let geo = flat(&g, mu);
        for (m, scale) in [(1.0, 1.0), (2.0, 0.25)] {
            let omega = VectorVolumeField::new(
                VolumeField::zeros(&g),
                VolumeField::zeros(&g),
                VolumeField::from_fn(&g, |x, _| (m * x).cos()),
            );
            let (tp, mean) = s.solve_tilde_psi(&geo, &omega, Checks::Strict).unwrap();
            let exact = SurfaceField::from_fn(&g, |x| -scale * (m * x).cos());
            assert!(tp.sub(&exact).max_abs() < 1e-14);
            assert!(mean.abs() < 1e-15);
        }
        let bad = VectorVolumeField::new(VolumeField::zeros(&g), VolumeField::zeros(&g), VolumeField::constant(&g, 1.0));
        assert!(matches!(s.solve_tilde_psi(&geo, &bad, Checks::Strict), Err(VwsError::MeanNotZero { .. })));
    }

    #[test]
    fn constant_shear_gives_linear_transverse_profile() {
        let mu = 0.3;
        let (g, s) = solver(8, 9, mu);
        let s = DivCurlSolver { gauge: TransverseGauge::SurfaceMean, ..s };
        let geo = flat(&g, mu);
        let w1 = 0.8;
        let omega = VectorVolumeField::new(VolumeField::constant(&g, w1), VolumeField::zeros(&g), VolumeField::zeros(&g));
        let sol = s.reconstruct(&geo, &SurfaceField::zeros(8), &omega).unwrap();
        let exact = VolumeField::from_fn(&g, |_, z| -mu.sqrt() * w1 * z);
        assert!(sol.velocity.y.sub(&exact).max_abs() < 1e-13);
        assert!(sol.velocity.x.max_abs() < 1e-13 && sol.velocity.z.max_abs() < 1e-13);
        // (1/μ) curl U^μ recovers ω₁.
        assert!(sol.report.unwrap().curl < 1e-12);
    }

    #[test]
    fn projection_properties() {
        let mu = 0.5;
        let (g, s) = solver(64, 25, mu);
        let zeta = SurfaceField::from_fn(&g, |x| 0.2 * x.cos() + 0.1 * (2.0 * x).sin());
        let geo = GeometryCache::new(g.clone(), &zeta, 1.0, mu, 0.05).unwrap();
        let omega = VectorVolumeField::new(
            VolumeField::from_fn(&g, |x, z| (x + z).sin()),
            VolumeField::from_fn(&g, |x, z| x.cos() * z),
            VolumeField::from_fn(&g, |x, z| (2.0 * x).cos() * (1.0 + z * z)),
        );
        let p = s.project_div_free(&geo, &omega).unwrap();
        assert!(divergence_residual(&geo, &p) < 1e-8, "{}", divergence_residual(&geo, &p));
        let pp = s.project_div_free(&geo, &p).unwrap();
        assert!(pp.sub(&p).max_abs() < 1e-9);
        // A gradient with the complementary boundary conditions is annihilated.
        let phi = VolumeField::from_fn(&g, |x, z| x.sin() * z * (z + 2.0));
        let grad = geo.scaled_grad(&phi);
        let bottom_conormal = {
            let op = EllipticOperator::new(&geo);
            op.fluxes(&phi).1.bottom().max_abs()
        };
        assert!(bottom_conormal < 1e-12);
        let pg = s.project_div_free(&geo, &grad).unwrap();
        assert!(pg.max_abs() < 1e-9, "{}", pg.max_abs());
    }

    #[test]
    fn curl_inverse_recovers_field() {
        let mu = 0.4;
        let (g, s) = solver(32, 17, mu);
        let zeta = SurfaceField::from_fn(&g, |x| 0.15 * x.sin());
        let geo = GeometryCache::new(g.clone(), &zeta, 1.0, mu, 0.05).unwrap();
        let a = VectorVolumeField::new(
            VolumeField::from_fn(&g, |x, z| (1.0 + z) * (x.cos() + 0.3 * z)),
            VolumeField::from_fn(&g, |x, z| (1.0 + z) * (2.0 * x).sin() * z),
            VolumeField::from_fn(&g, |x, z| (1.0 + z).powi(2) * x.sin()),
        );
        let c = geo.scaled_curl(&a);
        let b = s.curl_inverse(&geo, &c).unwrap();
        assert!(geo.scaled_curl(&b).sub(&c).max_abs() < 1e-9);
        assert!(b.x.bottom().max_abs() < 1e-12 && b.y.bottom().max_abs() < 1e-12 && b.z.bottom().max_abs() < 1e-12);
    }
}
