//! Hamiltonian structure: functionals, their gradients, the Poisson operator
//! and the bracket.
//!
//! Gradients follow the Eulerian convention: the vorticity part pairs with
//! variations of ω as a field on the physical domain, so a variation
//! `(δζ, δψ, δω)` of the stored (straightened) state is paired through
//! `δω_phys = δω − ε(1+z) δζ ∂zω / J`. The Poisson operator maps a gradient
//! back to a straightened tendency by the inverse correction.

use serde::{Deserialize, Serialize};

use crate::divcurl::Checks;
use crate::dynamics::{Evaluation, Model, State, Tendency};
use crate::error::{Result, VwsError};
use crate::geometry::GeometryCache;
use crate::spectral::{SurfaceField, VectorVolumeField, VolumeField};

/// Gradient `(δF/δζ, δF/δψ, δF/δω)` of a functional.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub zeta: SurfaceField,
    pub psi: SurfaceField,
    pub omega: VectorVolumeField,
}

/// A functional of the state `(ζ, ψ, ω)`.
pub trait Functional {
    fn name(&self) -> String;
    fn value(&self, model: &Model, s: &State, ev: &Evaluation) -> Result<f64>;
    fn gradient(&self, model: &Model, s: &State, ev: &Evaluation) -> Result<Gradient>;
    /// Whether the vorticity gradient is divergence free, vanishes at the
    /// bottom and is tied to the ψ-gradient by `∂x C̲₂ / √μ = δF/δψ`.
    fn admissible(&self) -> bool {
        true
    }
}

/// `∫ ζ`.
pub struct Mass;

/// Horizontal momentum `∫∫ J V_x`.
pub struct Momentum;

/// `∫ ζ φ` for a fixed weight φ.
pub struct LinearObservable {
    pub weight: SurfaceField,
}

/// The Hamiltonian `½∫ζ² + ½∫∫(V_x² + V_y² + w²/μ) J`.
pub struct Energy;

fn zero_gradient(model: &Model) -> Gradient {
    let g = &model.grid;
    Gradient {
        zeta: SurfaceField::zeros(g.nx()),
        psi: SurfaceField::zeros(g.nx()),
        omega: VectorVolumeField::zeros(g),
    }
}

impl Functional for Mass {
    fn name(&self) -> String {
        "mass".into()
    }
    fn value(&self, model: &Model, s: &State, _: &Evaluation) -> Result<f64> {
        Ok(model.grid.surface_integral(&s.zeta))
    }
    fn gradient(&self, model: &Model, _: &State, _: &Evaluation) -> Result<Gradient> {
        let mut g = zero_gradient(model);
        g.zeta = SurfaceField::constant(model.grid.nx(), 1.0);
        Ok(g)
    }
}

impl Functional for Momentum {
    fn name(&self) -> String {
        "momentum".into()
    }
    fn value(&self, _: &Model, _: &State, ev: &Evaluation) -> Result<f64> {
        Ok(ev.geo.volume_integral(&ev.sol.velocity.x))
    }
    fn gradient(&self, model: &Model, s: &State, ev: &Evaluation) -> Result<Gradient> {
        let g = &model.grid;
        let geo = &ev.geo;
        let eps = geo.eps;
        let sm = geo.sqrt_mu;
        // P = −ε∫ζ_x ψ − √μ ∫∫ J (1+z) h ω₂, because (1+z)h = Z + 1 is the
        // harmonic function dual to the streamfunction boundary conditions.
        let psi_x = g.dx(&s.psi);
        let w2 = s.omega.y.surface();
        let zeta = psi_x.scale(eps).sub(&geo.h.mul(&w2).scale(eps * sm));
        let profile = VolumeField::from_fn(g, |_, z| -sm * (1.0 + z)).mul_surface(&geo.h);
        Ok(Gradient {
            zeta,
            psi: geo.zeta_x.scale(-eps),
            omega: VectorVolumeField::new(VolumeField::zeros(g), profile, VolumeField::zeros(g)),
        })
    }
}

impl Functional for LinearObservable {
    fn name(&self) -> String {
        "linear".into()
    }
    fn value(&self, model: &Model, s: &State, _: &Evaluation) -> Result<f64> {
        model.grid.check_surface(&self.weight)?;
        Ok(model.grid.surface_integral(&s.zeta.mul(&self.weight)))
    }
    fn gradient(&self, model: &Model, _: &State, _: &Evaluation) -> Result<Gradient> {
        model.grid.check_surface(&self.weight)?;
        let mut g = zero_gradient(model);
        g.zeta = self.weight.clone();
        Ok(g)
    }
}

impl Functional for Energy {
    fn name(&self) -> String {
        "energy".into()
    }
    fn value(&self, model: &Model, s: &State, ev: &Evaluation) -> Result<f64> {
        Ok(total_energy(model, s, ev))
    }
    fn gradient(&self, model: &Model, s: &State, ev: &Evaluation) -> Result<Gradient> {
        grad_total_energy(model, s, ev)
    }
}

/// Value of the Hamiltonian at an evaluated state.
pub fn total_energy(model: &Model, s: &State, ev: &Evaluation) -> f64 {
    model.energy_parts(s, ev).total
}

/// `δH/δζ = ζ + (ε/2)|U∥|² − (ε/2μ)(1 + ε²μζ_x²) w̲² + ε√μ ω̲₂ ∂x⁻¹G`,
/// `δH/δψ = G` and `δH/δω = curl⁻¹ U^μ`.
///
/// The vorticity gradient exists only when `∫∫ J V_y = 0`, which is what the
/// zero-momentum transverse gauge enforces; the other gauge is rejected.
pub fn grad_total_energy(model: &Model, s: &State, ev: &Evaluation) -> Result<Gradient> {
    if model.params.gauge != crate::divcurl::TransverseGauge::ZeroMomentum {
        return Err(VwsError::InvalidParams(
            "the energy gradient needs the zero_momentum transverse gauge".into(),
        ));
    }
    let g = &model.grid;
    let (eps, mu) = (model.params.eps, model.params.mu);
    let k = &ev.surface;
    let zx = &ev.geo.zeta_x;
    let inv_g = g.inv_dx(&k.dn);
    let w2 = s.omega.y.surface();
    // Uniform flow induced by a shape change at zero surface circulation.
    let drift = ev.geo.volume_integral(&ev.sol.velocity.x) / g.lx();
    let mut zeta = SurfaceField::zeros(g.nx());
    for i in 0..g.nx() {
        let (px, vy, w, z) = (k.psi_x.values[i], k.vy.values[i], k.w.values[i], zx.values[i]);
        zeta.values[i] = s.zeta.values[i] + 0.5 * eps * (px * px + vy * vy)
            - 0.5 * eps / mu * (1.0 + eps * eps * mu * z * z) * w * w
            + eps * ev.geo.sqrt_mu * w2.values[i] * (inv_g.values[i] - drift);
    }
    let umu = ev.geo.velocity_to_mu(&ev.sol.velocity);
    let omega = model.solver.curl_inverse_with(&ev.geo, &umu, Checks::Lenient)?;
    Ok(Gradient { zeta, psi: k.dn.clone(), omega })
}

/// `ε (1+z) f ∂zω / J`: the change of the straightened vorticity produced by
/// a surface displacement rate `f` at fixed physical vorticity.
fn shape_term(geo: &GeometryCache, omega: &VectorVolumeField, f: &SurfaceField) -> VectorVolumeField {
    let g = &geo.grid;
    let mut coeff = VolumeField::from_fn(g, |_, z| geo.eps * (1.0 + z)).mul_surface(f);
    for (c, j) in coeff.values.iter_mut().zip(&geo.jac.values) {
        *c /= j;
    }
    omega.map_components(|w| g.dz_volume(w).mul(&coeff))
}

/// Straightened variation corresponding to a physical one: `δω = δω_phys +
/// ε(1+z) δζ ∂zω / J`. Admissible directions are built this way from a
/// divergence-free `δω_phys` with mean-free bottom flux.
pub fn straightened_direction(
    geo: &GeometryCache,
    s: &State,
    zeta: SurfaceField,
    psi: SurfaceField,
    omega_phys: &VectorVolumeField,
) -> Tendency {
    let omega = omega_phys.add(&shape_term(geo, &s.omega, &zeta));
    Tendency { zeta, psi, omega }
}

/// Pairing `⟨grad, δ⟩ = ∫a δζ + ∫b δψ + ∫∫ J C·δω_phys` of a gradient with a
/// variation of the stored state.
pub fn pairing(s: &State, ev: &Evaluation, grad: &Gradient, dir: &Tendency) -> f64 {
    let geo = &ev.geo;
    let g = &geo.grid;
    let phys = dir.omega.sub(&shape_term(geo, &s.omega, &dir.zeta));
    g.surface_integral(&grad.zeta.mul(&dir.zeta))
        + g.surface_integral(&grad.psi.mul(&dir.psi))
        + geo.volume_integral(&grad.omega.dot(&phys))
}

/// The ε, μ scaled Poisson operator applied to a gradient `(a, b, C)`:
///
/// ```text
/// ζ-row: b
/// ψ-row: −a + ε√μ (ω̲₂ ∂x⁻¹b + ∂x⁻¹(ω̲₂ b)) + ε ∂x⁻¹(F Y(C) − √μ ω̲₂ X(C))
/// ω-row: −(ε/μ) curl^μ(ω × curl^μ C) + ε(1+z) b ∂zω / J
/// ```
///
/// with `F = ω̲·N^μ`, `X(C) = ∂x C̲₂/√μ` and `Y(C) = (curl^μ C)̲₂/√μ`.
/// The result is a tendency of the stored variables.
pub fn apply_j(model: &Model, s: &State, ev: &Evaluation, grad: &Gradient) -> Tendency {
    let g = &model.grid;
    let geo = &ev.geo;
    let (eps, mu) = (model.params.eps, model.params.mu);
    let sm = geo.sqrt_mu;
    let w2 = s.omega.y.surface();
    let flux = &ev.surface.vorticity_flux;
    let b = &grad.psi;

    let curl_c = geo.scaled_curl(&grad.omega);
    let y_c = curl_c.y.surface().scale(1.0 / sm);
    let coupling = w2.mul(&grad.omega.y.surface()).add(&g.inv_dx(&flux.mul(&y_c))).scale(eps);
    let psi = grad.zeta.scale(-1.0).add(&coupling).remove_mean();

    let omega = geo
        .scaled_curl(&s.omega.cross(&curl_c))
        .scale(-eps / mu)
        .add(&shape_term(geo, &s.omega, b));
    Tendency { zeta: b.clone(), psi, omega }
}

/// `{F, G} = ∫(δζF δψG − δψF δζG) + ε ∫ ω̲₂ (δψF C̲₂G − δψG C̲₂F)
///  − (ε/μ) ∫∫ J curl^μ δωF · (ω × curl^μ δωG)` with `C = δω·`.
///
/// On the torus the surface trace `C̲₂/√μ` is the antiderivative of `δψ·`
/// including its constant, which carries the uniform-flow part of the
/// interaction; on the line it reduces to `∂x⁻¹ δψ·`.
pub fn bracket(model: &Model, s: &State, ev: &Evaluation, f: &Gradient, h: &Gradient) -> f64 {
    bracket_terms(model, s, ev, f, h).iter().sum()
}

/// The canonical, surface-vorticity and interior integrals of [`bracket`].
pub fn bracket_terms(model: &Model, s: &State, ev: &Evaluation, f: &Gradient, h: &Gradient) -> [f64; 3] {
    let g = &model.grid;
    let geo = &ev.geo;
    let (eps, mu) = (model.params.eps, model.params.mu);
    let canonical = g.surface_integral(&f.zeta.mul(&h.psi)) - g.surface_integral(&f.psi.mul(&h.zeta));
    let w2 = s.omega.y.surface();
    let (cf2, ch2) = (f.omega.y.surface(), h.omega.y.surface());
    let surface = eps * g.surface_integral(&w2.mul(&f.psi.mul(&ch2).sub(&h.psi.mul(&cf2))));
    let cf = geo.scaled_curl(&f.omega);
    let ch = geo.scaled_curl(&h.omega);
    let interior = -eps / mu * geo.volume_integral(&cf.dot(&s.omega.cross(&ch)));
    [canonical, surface, interior]
}

/// Poisson bracket of two functionals at a state.
pub fn poisson_bracket(model: &Model, f: &dyn Functional, g: &dyn Functional, s: &State) -> Result<f64> {
    let ev = model.evaluate(s, Checks::Lenient)?;
    let gf = f.gradient(model, s, &ev)?;
    let gg = g.gradient(model, s, &ev)?;
    Ok(bracket(model, s, &ev, &gf, &gg))
}

/// Outcome of a finite-difference gradient check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FdReport {
    pub functional: String,
    /// `⟨grad F, δ⟩`.
    pub predicted: f64,
    pub steps: Vec<f64>,
    /// Central differences `(F(s + hδ) − F(s − hδ)) / 2h`.
    pub differences: Vec<f64>,
    pub relative_errors: Vec<f64>,
    pub min_relative_error: f64,
    /// `log(e₀/e₁) / log(h₀/h₁)` from the first two steps; 2 for a smooth
    /// functional until round-off takes over.
    pub observed_order: f64,
}

/// Physical divergence-freeness and flux conditions a direction must meet.
pub fn check_direction(model: &Model, s: &State, ev: &Evaluation, dir: &Tendency, tol: f64) -> Result<()> {
    let g = &model.grid;
    let scale_s = dir.zeta.max_abs().max(dir.psi.max_abs()).max(dir.omega.max_abs()).max(f64::MIN_POSITIVE);
    for (name, f) in [("zeta", &dir.zeta), ("psi", &dir.psi)] {
        if f.mean().abs() > tol * scale_s {
            return Err(VwsError::InadmissibleDirection(format!("the {name} component has mean {:e}", f.mean())));
        }
    }
    let phys = dir.omega.sub(&shape_term(&ev.geo, &s.omega, &dir.zeta));
    let scale = phys.max_abs().max(f64::MIN_POSITIVE);
    let div = ev.geo.scaled_div(&phys).max_abs();
    if div > tol * scale * g.nz() as f64 {
        return Err(VwsError::InadmissibleDirection(format!(
            "the vorticity variation has divergence {div:e} relative to size {scale:e}"
        )));
    }
    let bottom = phys.z.bottom().mean();
    if bottom.abs() > tol * scale {
        return Err(VwsError::InadmissibleDirection(format!("the vorticity variation has bottom flux mean {bottom:e}")));
    }
    Ok(())
}

/// Compares `⟨grad F, δ⟩` with central differences along `δ` for each step.
///
/// States along the line are reconstructed leniently: the perturbed vorticity
/// is divergence free only to first order in the step.
pub fn fd_check(model: &Model, f: &dyn Functional, s: &State, dir: &Tendency, steps: &[f64]) -> Result<FdReport> {
    let ev = model.evaluate(s, Checks::Lenient)?;
    check_direction(model, s, &ev, dir, 1e-6)?;
    let grad = f.gradient(model, s, &ev)?;
    let predicted = pairing(s, &ev, &grad, dir);
    let value_at = |h: f64| -> Result<f64> {
        let p = s.axpy(h, dir);
        let e = model.evaluate(&p, Checks::Lenient)?;
        f.value(model, &p, &e)
    };
    let mut differences = Vec::with_capacity(steps.len());
    let mut relative_errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let d = (value_at(h)? - value_at(-h)?) / (2.0 * h);
        differences.push(d);
        relative_errors.push((d - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE));
    }
    let min_relative_error = relative_errors.iter().copied().fold(f64::INFINITY, f64::min);
    let observed_order = if steps.len() >= 2 {
        (relative_errors[0] / relative_errors[1]).ln() / (steps[0] / steps[1]).ln()
    } else {
        f64::NAN
    };
    Ok(FdReport {
        functional: f.name(),
        predicted,
        steps: steps.to_vec(),
        differences,
        relative_errors,
        min_relative_error,
        observed_order,
    })
}

/// Relative mismatch between the dynamics and `J · grad H`, row by row.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct StructureResidual {
    pub zeta: f64,
    pub psi: f64,
    pub omega: f64,
}

impl StructureResidual {
    pub fn max(&self) -> f64 {
        self.zeta.max(self.psi).max(self.omega)
    }
}

fn rel(a: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        a
    } else {
        a / scale
    }
}

/// Compares the unfiltered right-hand side with `J · grad H` at one state.
pub fn structure_residual(model: &Model, s: &State, ev: &Evaluation) -> Result<StructureResidual> {
    let grad = grad_total_energy(model, s, ev)?;
    let jg = apply_j(model, s, ev, &grad);
    let rhs = model.raw_rhs(s, ev);
    let d = rhs.sub(&jg);
    Ok(StructureResidual {
        zeta: rel(d.zeta.max_abs(), rhs.zeta.max_abs()),
        psi: rel(d.psi.max_abs(), rhs.psi.max_abs()),
        omega: rel(d.omega.max_abs(), rhs.omega.max_abs()),
    })
}

/// `|{F,G} + {G,F}|` relative to the size of the individual integrals, so
/// that pairs with a vanishing bracket (a conserved F) are measured fairly.
pub fn antisymmetry_residual(model: &Model, s: &State, ev: &Evaluation, f: &Gradient, g: &Gradient) -> f64 {
    let a = bracket_terms(model, s, ev, f, g);
    let b = bracket_terms(model, s, ev, g, f);
    let scale = a.iter().chain(&b).map(|t| t.abs()).fold(0.0, f64::max);
    rel((a.iter().sum::<f64>() + b.iter().sum::<f64>()).abs(), scale)
}

/// `max |∂x C̲₂/√μ − b − mean|`, relative to `max |b|`: how far a gradient is
/// from the cotangent relation between its ψ and ω parts.
pub fn cotangent_residual(model: &Model, ev: &Evaluation, grad: &Gradient) -> f64 {
    let g = &model.grid;
    let d = g.dx(&grad.omega.y.surface()).scale(1.0 / ev.geo.sqrt_mu).sub(&grad.psi);
    rel(d.remove_mean().max_abs(), grad.psi.max_abs())
}

/// One sample of a trajectory check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    /// Centred difference of F along the stored states.
    pub rate: f64,
    /// `{F, H}` at the middle state.
    pub bracket: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub functional: String,
    pub samples: Vec<RateSample>,
    pub max_mismatch: f64,
    /// `max_mismatch / max |{F,H}|`, or the absolute mismatch when the
    /// bracket vanishes identically (conserved functionals).
    pub relative_mismatch: f64,
}

/// Compares `dF/dt` measured by centred differences along a stored
/// trajectory with `{F, H}` at the middle states. Samples need not be
/// equally spaced.
pub fn hamiltonian_consistency(model: &Model, trajectory: &[State], f: &dyn Functional) -> Result<ConsistencyReport> {
    if trajectory.len() < 3 {
        return Err(VwsError::InvalidParams("a consistency check needs at least three states".into()));
    }
    let values = trajectory
        .iter()
        .map(|s| {
            let ev = model.evaluate(s, Checks::Lenient)?;
            f.value(model, s, &ev)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut samples = Vec::with_capacity(trajectory.len() - 2);
    for i in 1..trajectory.len() - 1 {
        let (a, s, b) = (&trajectory[i - 1], &trajectory[i], &trajectory[i + 1]);
        let rate = (values[i + 1] - values[i - 1]) / (b.t - a.t);
        let bracket = poisson_bracket(model, f, &Energy, s)?;
        samples.push(RateSample { t: s.t, rate, bracket });
    }
    let max_mismatch = samples.iter().map(|p| (p.rate - p.bracket).abs()).fold(0.0, f64::max);
    let scale = samples.iter().map(|p| p.bracket.abs()).fold(0.0, f64::max);
    let relative_mismatch = if scale > 1e-10 { max_mismatch / scale } else { max_mismatch };
    Ok(ConsistencyReport { functional: f.name(), samples, max_mismatch, relative_mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Params;

    fn model(eps: f64, mu: f64) -> Model {
        Model::new(Params { eps, mu, nx: 32, nz: 17, ..Params::default() }).unwrap()
    }

    #[test]
    fn rest_has_zero_energy_and_gradient() {
        let m = model(0.2, 0.3);
        let s = State::rest(&m.grid);
        let ev = m.evaluate(&s, Checks::Strict).unwrap();
        assert_eq!(total_energy(&m, &s, &ev), 0.0);
        let g = grad_total_energy(&m, &s, &ev).unwrap();
        assert_eq!(g.zeta.max_abs() + g.psi.max_abs() + g.omega.max_abs(), 0.0);
    }

    #[test]
    fn cosine_elevation_energy() {
        let m = model(0.2, 0.3);
        let mut s = State::rest(&m.grid);
        s.zeta = SurfaceField::from_fn(&m.grid, |x| 0.1 * x.cos());
        let ev = m.evaluate(&s, Checks::Strict).unwrap();
        assert!((total_energy(&m, &s, &ev) - 0.015707963267948967).abs() < 1e-14);
    }

    #[test]
    fn psi_gradient_is_the_dn_operator() {
        let m = model(0.2, 0.3);
        let mut s = State::rest(&m.grid);
        s.zeta = SurfaceField::from_fn(&m.grid, |x| 0.3 * x.cos());
        s.psi = SurfaceField::from_fn(&m.grid, |x| (2.0 * x).sin());
        let ev = m.evaluate(&s, Checks::Strict).unwrap();
        let g = grad_total_energy(&m, &s, &ev).unwrap();
        let dn = m.solver.generalized_dn(&ev.geo, &s.psi, &s.omega).unwrap();
        assert!(g.psi.sub(&dn).max_abs() < 1e-10);
    }

    #[test]
    fn irrotational_bracket_is_canonical() {
        let m = model(0.2, 0.3);
        let mut s = State::rest(&m.grid);
        s.zeta = SurfaceField::from_fn(&m.grid, |x| 0.3 * x.cos());
        s.psi = SurfaceField::from_fn(&m.grid, |x| (2.0 * x).sin());
        let ev = m.evaluate(&s, Checks::Strict).unwrap();
        let gh = grad_total_energy(&m, &s, &ev).unwrap();
        let gl = LinearObservable { weight: SurfaceField::from_fn(&m.grid, |x| (3.0 * x).cos()) }
            .gradient(&m, &s, &ev)
            .unwrap();
        let canonical = m.grid.surface_integral(&gl.zeta.mul(&gh.psi)) - m.grid.surface_integral(&gl.psi.mul(&gh.zeta));
        assert!((bracket(&m, &s, &ev, &gl, &gh) - canonical).abs() < 1e-13);
    }

    #[test]
    fn mass_commutes_with_energy() {
        let m = model(0.2, 0.3);
        let mut s = State::rest(&m.grid);
        s.zeta = SurfaceField::from_fn(&m.grid, |x| 0.3 * x.cos());
        s.psi = SurfaceField::from_fn(&m.grid, |x| (2.0 * x).sin() + 0.5 * x.cos());
        assert!(poisson_bracket(&m, &Mass, &Energy, &s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn mass_fd_check_is_exact() {
        let m = model(0.2, 0.3);
        let mut s = State::rest(&m.grid);
        s.zeta = SurfaceField::from_fn(&m.grid, |x| 0.3 * x.cos());
        let dir = Tendency {
            zeta: SurfaceField::from_fn(&m.grid, |x| x.sin()),
            psi: SurfaceField::zeros(m.grid.nx()),
            omega: VectorVolumeField::zeros(&m.grid),
        };
        let r = fd_check(&m, &Mass, &s, &dir, &[1e-2, 1e-4]).unwrap();
        for d in &r.differences {
            assert!((d - r.predicted).abs() < 1e-10);
        }
    }

    #[test]
    fn divergent_direction_is_rejected() {
        let m = model(0.2, 0.3);
        let s = State::rest(&m.grid);
        let dir = Tendency {
            zeta: SurfaceField::zeros(m.grid.nx()),
            psi: SurfaceField::zeros(m.grid.nx()),
            omega: VectorVolumeField::new(
                VolumeField::from_fn(&m.grid, |x, _| x.sin()),
                VolumeField::zeros(&m.grid),
                VolumeField::zeros(&m.grid),
            ),
        };
        assert!(matches!(
            fd_check(&m, &Energy, &s, &dir, &[1e-3]),
            Err(VwsError::InadmissibleDirection(_))
        ));
    }

    #[test]
    fn surface_mean_gauge_has_no_energy_gradient() {
        let m = Model::new(Params {
            gauge: crate::divcurl::TransverseGauge::SurfaceMean,
            nx: 16,
            nz: 9,
            ..Params::default()
        })
        .unwrap();
        let s = State::rest(&m.grid);
        let ev = m.evaluate(&s, Checks::Strict).unwrap();
        assert!(grad_total_energy(&m, &s, &ev).is_err());
    }
}
