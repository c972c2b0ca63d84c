//! Discrete function spaces on the periodic strip 𝕋 × [-1, 0].
//!
//! The horizontal direction is Fourier collocation on `nx` equispaced points of
//! a period `lx`; the vertical direction is Chebyshev–Gauss–Lobatto collocation
//! with `z[0] = 0` (the straightened free surface) and `z[nz-1] = -1` (the
//! bottom). Volume data are stored x-major, `values[i * nz + j]` holding the
//! value at `(x[i], z[j])`, so that every vertical column is contiguous.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VwsError};

/// Collocation grid and the operator tables shared by every field on it.
#[derive(Clone)]
pub struct Grid {
    nx: usize,
    nz: usize,
    lx: f64,
    x: Vec<f64>,
    z: Vec<f64>,
    k: Vec<f64>,
    /// Chebyshev differentiation matrix on [-1, 0], row-major nz × nz.
    dz: Vec<f64>,
    /// Clenshaw–Curtis weights on [-1, 0].
    cc: Vec<f64>,
    /// `(int_down · f)[j] = ∫_{z_j}^0 f dz` for the polynomial interpolant of f.
    int_down: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("nz", &self.nz)
            .field("lx", &self.lx)
            .finish()
    }
}

impl Grid {
    pub fn new(nx: usize, nz: usize, lx: f64) -> Result<Self> {
        if nx < 8 || !nx.is_multiple_of(2) {
            return Err(VwsError::InvalidGrid(format!("nx = {nx} must be even and at least 8")));
        }
        if nz < 5 {
            return Err(VwsError::InvalidGrid(format!("nz = {nz} must be at least 5")));
        }
        if !(lx.is_finite() && lx > 0.0) {
            return Err(VwsError::InvalidGrid(format!("lx = {lx} must be positive")));
        }
        let x = (0..nx).map(|i| lx * i as f64 / nx as f64).collect();
        let k = (0..nx).map(|j| 2.0 * PI * signed_index(j, nx) as f64 / lx).collect();
        let n = nz - 1;
        let xi: Vec<f64> = (0..nz).map(|j| (PI * j as f64 / n as f64).cos()).collect();
        let z = xi.iter().map(|&s| 0.5 * (s - 1.0)).collect();
        let dz = cheb_diff_matrix(&xi).into_iter().map(|d| 2.0 * d).collect();
        let cc = clenshaw_curtis(n).into_iter().map(|w| 0.5 * w).collect();
        let int_down = integration_matrix(nz);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nx);
        let inv = planner.plan_fft_inverse(nx);
        Ok(Self { nx, nz, lx, x, z, k, dz, cc, int_down, fwd, inv })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    /// Signed wavenumbers in FFT order.
    pub fn k(&self) -> &[f64] {
        &self.k
    }
    pub fn dx_spacing(&self) -> f64 {
        self.lx / self.nx as f64
    }
    /// Smallest vertical node spacing (next to the boundaries).
    pub fn dz_min(&self) -> f64 {
        self.z[0] - self.z[1]
    }
    /// Chebyshev differentiation matrix on [-1, 0] (row-major).
    pub fn dz_matrix(&self) -> &[f64] {
        &self.dz
    }
    pub fn cc_weights(&self) -> &[f64] {
        &self.cc
    }
    /// Matrix of `f ↦ ∫_z^0 f` (row-major).
    pub fn int_down_matrix(&self) -> &[f64] {
        &self.int_down
    }

    /// Forward transform normalized so that `cos(k x)` has coefficient 1/2 at ±k.
    pub fn fft(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.nx);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.nx as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    /// Inverse of [`Grid::fft`]; the imaginary part is discarded, which is the
    /// Hermitian projection and, in particular, drops odd symbols at Nyquist.
    pub fn ifft(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inv.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Applies a Fourier symbol without any mean check; the zero mode of the
    /// output is cleared whenever the symbol is not finite there.
    fn multiply(&self, values: &[f64], symbol: impl Fn(f64) -> Complex64) -> Vec<f64> {
        let mut c = self.fft(values);
        for (cj, &kj) in c.iter_mut().zip(&self.k) {
            let s = symbol(kj);
            *cj = if s.is_finite() { *cj * s } else { Complex64::new(0.0, 0.0) };
        }
        self.ifft(&c)
    }

    /// Fourier multiplier with the checks of the public contract: the symbol
    /// must be finite at every nonzero wavenumber, and a symbol that is singular
    /// at k = 0 may only act on a mean-zero field (relative tolerance `tol_mean`).
    pub fn apply_multiplier(
        &self,
        f: &SurfaceField,
        symbol: impl Fn(f64) -> Complex64,
        tol_mean: f64,
    ) -> Result<SurfaceField> {
        self.check_surface(f)?;
        for &kj in self.k.iter().skip(1) {
            if !symbol(kj).is_finite() {
                return Err(VwsError::NonFiniteSymbol { k: kj });
            }
        }
        if !symbol(0.0).is_finite() {
            let mean = f.mean();
            let tol = tol_mean * f.max_abs().max(1.0);
            if mean.abs() > tol {
                return Err(VwsError::MeanNotZero { what: "multiplier input".into(), mean, tol });
            }
        }
        Ok(SurfaceField::new(self.multiply(&f.values, symbol)))
    }

    pub fn dx(&self, f: &SurfaceField) -> SurfaceField {
        SurfaceField::new(self.multiply(&f.values, |k| Complex64::new(0.0, k)))
    }

    pub fn dx_n(&self, f: &SurfaceField, n: u32) -> SurfaceField {
        if n == 0 {
            return f.clone();
        }
        SurfaceField::new(self.multiply(&f.values, |k| Complex64::new(0.0, k).powu(n)))
    }

    /// ∂x⁻¹ with the zero mode of input and output dropped.
    pub fn inv_dx(&self, f: &SurfaceField) -> SurfaceField {
        SurfaceField::new(self.multiply(&f.values, |k| {
            if k == 0.0 { Complex64::new(f64::NAN, 0.0) } else { Complex64::new(0.0, -1.0 / k) }
        }))
    }

    /// ∂x⁻² with the zero mode of input and output dropped.
    pub fn inv_dxx(&self, f: &SurfaceField) -> SurfaceField {
        SurfaceField::new(self.multiply(&f.values, |k| {
            if k == 0.0 { Complex64::new(f64::NAN, 0.0) } else { Complex64::new(-1.0 / (k * k), 0.0) }
        }))
    }

    /// Real symbol applied level by level to a volume field.
    pub fn multiply_volume(&self, f: &VolumeField, symbol: impl Fn(f64) -> Complex64) -> VolumeField {
        let (nx, nz) = (self.nx, self.nz);
        let table: Vec<Complex64> = self.k.iter().map(|&k| symbol(k)).collect();
        let mut out = VolumeField::zeros(self);
        let mut level = vec![0.0; nx];
        for j in 0..nz {
            for i in 0..nx {
                level[i] = f.values[i * nz + j];
            }
            let mut c = self.fft(&level);
            for (cj, s) in c.iter_mut().zip(&table) {
                *cj = if s.is_finite() { *cj * s } else { Complex64::new(0.0, 0.0) };
            }
            let r = self.ifft(&c);
            for i in 0..nx {
                out.values[i * nz + j] = r[i];
            }
        }
        out
    }

    pub fn dx_volume(&self, f: &VolumeField) -> VolumeField {
        self.multiply_volume(f, |k| Complex64::new(0.0, k))
    }

    /// Chebyshev derivative in z of every column.
    pub fn dz_volume(&self, f: &VolumeField) -> VolumeField {
        let nz = self.nz;
        let mut out = VolumeField::zeros(self);
        for (col_in, col_out) in f.values.chunks_exact(nz).zip(out.values.chunks_exact_mut(nz)) {
            matvec(&self.dz, col_in, col_out);
        }
        out
    }

    /// `∫_z^0 f dz'` column by column.
    pub fn integrate_down(&self, f: &VolumeField) -> VolumeField {
        let nz = self.nz;
        let mut out = VolumeField::zeros(self);
        for (col_in, col_out) in f.values.chunks_exact(nz).zip(out.values.chunks_exact_mut(nz)) {
            matvec(&self.int_down, col_in, col_out);
        }
        out
    }

    /// `∫_{-1}^z f dz'` column by column.
    pub fn integrate_up(&self, f: &VolumeField) -> VolumeField {
        let down = self.integrate_down(f);
        let total = self.column_integral(f);
        let nz = self.nz;
        let mut out = down;
        for (i, col) in out.values.chunks_exact_mut(nz).enumerate() {
            for v in col.iter_mut() {
                *v = total.values[i] - *v;
            }
        }
        out
    }

    /// Clenshaw–Curtis integral over [-1, 0] of every column.
    pub fn column_integral(&self, f: &VolumeField) -> SurfaceField {
        SurfaceField::new(
            f.values.chunks_exact(self.nz).map(|col| dot(col, &self.cc)).collect(),
        )
    }

    /// Trapezoid rule over one period (exact for trigonometric polynomials).
    pub fn surface_integral(&self, f: &SurfaceField) -> f64 {
        f.values.iter().sum::<f64>() * self.dx_spacing()
    }

    /// Unweighted integral over the flat strip.
    pub fn strip_integral(&self, f: &VolumeField) -> f64 {
        self.surface_integral(&self.column_integral(f))
    }

    /// Discrete L² norm on the torus computed from Fourier coefficients.
    pub fn spectral_l2_norm(&self, f: &SurfaceField) -> f64 {
        let c = self.fft(&f.values);
        (self.lx * c.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn check_surface(&self, f: &SurfaceField) -> Result<()> {
        if f.values.len() != self.nx {
            return Err(VwsError::ShapeMismatch(format!(
                "surface field has {} values, grid has nx = {}",
                f.values.len(),
                self.nx
            )));
        }
        Ok(())
    }

    pub fn check_volume(&self, f: &VolumeField) -> Result<()> {
        if f.nx != self.nx || f.nz != self.nz || f.values.len() != self.nx * self.nz {
            return Err(VwsError::ShapeMismatch(format!(
                "volume field is {}x{}, grid is {}x{}",
                f.nx, f.nz, self.nx, self.nz
            )));
        }
        Ok(())
    }

    /// Projection of a horizontal vector field on gradients and orthogonal
    /// gradients. With ∂y = 0 the gradient part is the mean-free x-component
    /// and the orthogonal part the mean-free y-component; the means are the
    /// harmonic remainder of the torus.
    pub fn hodge_project(&self, fx: &SurfaceField, fy: &SurfaceField) -> HodgeParts {
        let (mx, my) = (fx.mean(), fy.mean());
        HodgeParts {
            gradient: (fx.add_scalar(-mx), SurfaceField::zeros(self.nx)),
            orthogonal: (SurfaceField::zeros(self.nx), fy.add_scalar(-my)),
            mean: (mx, my),
        }
    }

    /// Evaluates the vertical extension multipliers at every Chebyshev node.
    pub fn harmonic_extension(&self, v: &SurfaceField, kind: Extension, mu: f64) -> Result<VolumeField> {
        self.check_surface(v)?;
        if !(mu > 0.0) {
            return Err(VwsError::InvalidParams(format!("mu = {mu} must be positive")));
        }
        let c = self.fft(&v.values);
        if kind == Extension::SinhZeroBottom {
            let tol = 1e-12 * v.max_abs().max(1.0);
            if c[0].re.abs() > tol {
                return Err(VwsError::MeanNotZero {
                    what: "sinh extension input".into(),
                    mean: c[0].re,
                    tol,
                });
            }
        }
        let mut out = VolumeField::zeros(self);
        let sm = mu.sqrt();
        for (j, &z) in self.z.iter().enumerate() {
            let level: Vec<Complex64> = c
                .iter()
                .zip(&self.k)
                .map(|(&cj, &k)| cj * extension_symbol(kind, sm * k.abs(), z))
                .collect();
            let r = self.ifft(&level);
            for i in 0..self.nx {
                out.values[i * self.nz + j] = r[i];
            }
        }
        Ok(out)
    }

    pub fn filter_surface(&self, f: &SurfaceField, spec: &FilterSpec) -> SurfaceField {
        if spec.is_identity() {
            return f.clone();
        }
        let n = self.nx;
        SurfaceField::new(self.multiply(&f.values, |k| Complex64::new(spec.factor(k, self.k_max(), n), 0.0)))
    }

    pub fn filter_volume(&self, f: &VolumeField, spec: &FilterSpec) -> VolumeField {
        if spec.is_identity() {
            return f.clone();
        }
        let (kmax, n) = (self.k_max(), self.nx);
        self.multiply_volume(f, |k| Complex64::new(spec.factor(k, kmax, n), 0.0))
    }

    /// Largest representable wavenumber, π nx / lx.
    pub fn k_max(&self) -> f64 {
        PI * self.nx as f64 / self.lx
    }
}

fn signed_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 { j as i64 } else { j as i64 - n as i64 }
}

/// Vertical extension families of a surface function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// `cosh((z+1)√μ|D|)/cosh(√μ|D|)`: harmonic, zero normal derivative at the bottom.
    CoshNeumannBottom,
    /// `sinh((z+1)√μ|D|)/sinh(√μ|D|)`: harmonic, zero at the bottom.
    SinhZeroBottom,
}

fn extension_symbol(kind: Extension, a: f64, z: f64) -> f64 {
    // Written with decaying exponentials so that large √μ|k| cannot overflow.
    match kind {
        Extension::CoshNeumannBottom => {
            ((a * z).exp() + (-a * (z + 2.0)).exp()) / (1.0 + (-2.0 * a).exp())
        }
        Extension::SinhZeroBottom => {
            if a == 0.0 {
                0.0
            } else {
                ((a * z).exp() - (-a * (z + 2.0)).exp()) / (1.0 - (-2.0 * a).exp())
            }
        }
    }
}

/// Output of [`Grid::hodge_project`].
#[derive(Clone, Debug)]
pub struct HodgeParts {
    pub gradient: (SurfaceField, SurfaceField),
    pub orthogonal: (SurfaceField, SurfaceField),
    pub mean: (f64, f64),
}

/// Dealiasing in x: 2/3-rule truncation combined with the exponential filter
/// `exp(-alpha (|k|/k_max)^order)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSpec {
    pub alpha: f64,
    pub order: u32,
    pub two_thirds: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self { alpha: 36.0, order: 16, two_thirds: true }
    }
}

impl FilterSpec {
    pub fn none() -> Self {
        Self { alpha: 0.0, order: 16, two_thirds: false }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 0.0 && !self.two_thirds
    }

    /// Filter factor at wavenumber `k` on a grid of `nx` points whose largest
    /// wavenumber is `k_max`.
    pub fn factor(&self, k: f64, k_max: f64, nx: usize) -> f64 {
        let r = k.abs() / k_max;
        // Index-space 2/3 rule: keep |j| ≤ nx/3.
        if self.two_thirds && r * (nx as f64 / 2.0) > nx as f64 / 3.0 + 1e-9 {
            return 0.0;
        }
        (-self.alpha * r.powi(self.order as i32)).exp()
    }
}

/// Real field sampled on the x-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceField {
    pub values: Vec<f64>,
}

impl SurfaceField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }
    pub fn zeros(nx: usize) -> Self {
        Self { values: vec![0.0; nx] }
    }
    pub fn constant(nx: usize, c: f64) -> Self {
        Self { values: vec![c; nx] }
    }
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self { values: grid.x().iter().map(|&x| f(x)).collect() }
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    /// Zero Fourier mode (arithmetic mean of the samples).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect() }
    }
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() }
    }
    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }
    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }
    pub fn add_scalar(&self, s: f64) -> Self {
        self.map(|v| v + s)
    }
    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }
    pub fn remove_mean(&self) -> Self {
        self.add_scalar(-self.mean())
    }
}

/// Real field on the collocation points of the strip (x-major storage).
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeField {
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
}

impl VolumeField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { nx: grid.nx(), nz: grid.nz(), values: vec![0.0; grid.nx() * grid.nz()] }
    }
    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self { nx: grid.nx(), nz: grid.nz(), values: vec![c; grid.nx() * grid.nz()] }
    }
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx() * grid.nz());
        for &x in grid.x() {
            for &z in grid.z() {
                values.push(f(x, z));
            }
        }
        Self { nx: grid.nx(), nz: grid.nz(), values }
    }
    /// Value at `(x[i], z[j])`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nz + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.nz + j] = v;
    }
    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.nz..(i + 1) * self.nz]
    }
    /// Horizontal slice at vertical index `j`.
    pub fn level(&self, j: usize) -> SurfaceField {
        SurfaceField::new((0..self.nx).map(|i| self.at(i, j)).collect())
    }
    pub fn surface(&self) -> SurfaceField {
        self.level(0)
    }
    pub fn bottom(&self) -> SurfaceField {
        self.level(self.nz - 1)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { nx: self.nx, nz: self.nz, values: self.values.iter().map(|&v| f(v)).collect() }
    }
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            nx: self.nx,
            nz: self.nz,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }
    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }
    /// Multiplies column `i` by `f[i]`.
    pub fn mul_surface(&self, f: &SurfaceField) -> Self {
        let mut out = self.clone();
        for (i, col) in out.values.chunks_exact_mut(self.nz).enumerate() {
            col.iter_mut().for_each(|v| *v *= f.values[i]);
        }
        out
    }
    /// Broadcasts a surface field along z.
    pub fn from_surface(grid: &Grid, f: &SurfaceField) -> Self {
        let nz = grid.nz();
        let mut values = Vec::with_capacity(grid.nx() * nz);
        for &v in &f.values {
            values.extend(std::iter::repeat_n(v, nz));
        }
        Self { nx: grid.nx(), nz, values }
    }
}

/// Three components of a y-independent vector field. For velocities the
/// components are `(V_x, V_y, w)`; for vorticities `(ω₁, ω₂, ω₃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorVolumeField {
    pub x: VolumeField,
    pub y: VolumeField,
    pub z: VolumeField,
}

impl VectorVolumeField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { x: VolumeField::zeros(grid), y: VolumeField::zeros(grid), z: VolumeField::zeros(grid) }
    }
    pub fn new(x: VolumeField, y: VolumeField, z: VolumeField) -> Self {
        Self { x, y, z }
    }
    pub fn components(&self) -> [&VolumeField; 3] {
        [&self.x, &self.y, &self.z]
    }
    pub fn map_components(&self, f: impl Fn(&VolumeField) -> VolumeField) -> Self {
        Self { x: f(&self.x), y: f(&self.y), z: f(&self.z) }
    }
    pub fn add(&self, o: &Self) -> Self {
        Self { x: self.x.add(&o.x), y: self.y.add(&o.y), z: self.z.add(&o.z) }
    }
    pub fn sub(&self, o: &Self) -> Self {
        Self { x: self.x.sub(&o.x), y: self.y.sub(&o.y), z: self.z.sub(&o.z) }
    }
    pub fn scale(&self, s: f64) -> Self {
        self.map_components(|c| c.scale(s))
    }
    pub fn axpy(&self, s: f64, o: &Self) -> Self {
        Self { x: self.x.axpy(s, &o.x), y: self.y.axpy(s, &o.y), z: self.z.axpy(s, &o.z) }
    }
    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs()).max(self.z.max_abs())
    }
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
    /// Pointwise cross product.
    pub fn cross(&self, o: &Self) -> Self {
        Self {
            x: self.y.mul(&o.z).sub(&self.z.mul(&o.y)),
            y: self.z.mul(&o.x).sub(&self.x.mul(&o.z)),
            z: self.x.mul(&o.y).sub(&self.y.mul(&o.x)),
        }
    }
    /// Pointwise dot product.
    pub fn dot(&self, o: &Self) -> VolumeField {
        self.x.mul(&o.x).add(&self.y.mul(&o.y)).add(&self.z.mul(&o.z))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = m · v` for a square row-major matrix.
pub(crate) fn matvec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o = dot(&m[r * n..(r + 1) * n], v);
    }
}

/// Chebyshev differentiation matrix on the Gauss–Lobatto nodes `xi`
/// (descending from 1 to -1), with the negative-sum diagonal.
fn cheb_diff_matrix(xi: &[f64]) -> Vec<f64> {
    let n = xi.len();
    let c = |i: usize| -> f64 {
        let base = if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
        if i.is_multiple_of(2) { base } else { -base }
    };
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = c(i) / c(j) / (xi[i] - xi[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        d[i * n + i] = -row_sum;
    }
    d
}

/// Clenshaw–Curtis weights on [-1, 1] for the nodes cos(πj/n), j = 0..=n.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / n as f64).collect();
    let interior = 1..n;
    let nf = n as f64;
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for j in interior {
            let mut v = 1.0;
            for m in 1..n / 2 {
                v -= 2.0 * (2.0 * m as f64 * theta[j]).cos() / (4.0 * (m * m) as f64 - 1.0);
            }
            v -= (nf * theta[j]).cos() / (nf * nf - 1.0);
            w[j] = 2.0 * v / nf;
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for j in interior {
            let mut v = 1.0;
            for m in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * m as f64 * theta[j]).cos() / (4.0 * (m * m) as f64 - 1.0);
            }
            w[j] = 2.0 * v / nf;
        }
    }
    w
}

/// Matrix of `f ↦ ∫_{z_j}^0 p(z) dz` where p interpolates f at the nodes.
/// Built from the Chebyshev coefficients of p and the antiderivative
/// recurrence for T_n.
fn integration_matrix(nz: usize) -> Vec<f64> {
    let n = nz - 1;
    let nf = n as f64;
    let xi: Vec<f64> = (0..nz).map(|j| (PI * j as f64 / nf).cos()).collect();
    let cbar = |m: usize| if m == 0 || m == n { 2.0 } else { 1.0 };
    let mut q = vec![0.0; nz * nz];
    for col in 0..nz {
        // Chebyshev coefficients of the cardinal function of node `col`.
        let a: Vec<f64> = (0..nz)
            .map(|m| 2.0 / (nf * cbar(m) * cbar(col)) * (PI * (m * col) as f64 / nf).cos())
            .collect();
        // Antiderivative coefficients b (degree n+1).
        let mut b = vec![0.0; nz + 1];
        for (m, &am) in a.iter().enumerate() {
            match m {
                0 => b[1] += am,
                1 => b[2] += am / 4.0,
                _ => {
                    b[m + 1] += am / (2.0 * (m + 1) as f64);
                    b[m - 1] -= am / (2.0 * (m - 1) as f64);
                }
            }
        }
        let eval = |x: f64| -> f64 {
            // Clenshaw-free direct evaluation via cos(m acos x) is fine at the nodes.
            let t = x.clamp(-1.0, 1.0).acos();
            b.iter().enumerate().map(|(m, &bm)| bm * (m as f64 * t).cos()).sum()
        };
        let top = eval(1.0);
        for (row, &x) in xi.iter().enumerate() {
            // dz = dξ/2 on [-1, 0].
            q[row * nz + col] = 0.5 * (top - eval(x));
        }
    }
    q
}
