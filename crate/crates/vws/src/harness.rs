//! Verification suites run by the command-line tool: the manufactured
//! reconstruction test, the linear dispersion measurement, the Hamiltonian
//! structure checks, and the pass/fail reading of the shallow-water sweep.
//!
//! Every suite returns a serializable report holding a list of [`Check`]s.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::divcurl::{Checks, DivCurlSolver, Tolerances, TransverseGauge};
use crate::dynamics::{Model, Params, State, TimeStep};
use crate::error::{Result, VwsError};
use crate::geometry::GeometryCache;
use crate::hamiltonian::{
    antisymmetry_residual, bracket, cotangent_residual, fd_check, grad_total_energy, hamiltonian_consistency,
    straightened_direction, structure_residual, Energy, Functional, Gradient, LinearObservable, Mass, Momentum,
};
use crate::manufactured::{self, FlowSpec};
use crate::samples;
use crate::spectral::{Grid, SurfaceField, VectorVolumeField, VolumeField};
use crate::swmodel::{JustifyRow, JustifySummary};

/// One named criterion with its measured value.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable condition, for example `"< 1e-7"`.
    pub condition: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, condition: format!("< {limit:e}"), passed: value < limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, condition: format!(">= {limit}"), passed: value >= limit }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, condition: format!("in [{lo}, {hi}]"), passed: (lo..=hi).contains(&value) }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {:.3e} ({})", self.name, self.value, self.condition)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn config_err(m: impl Into<String>) -> VwsError {
    VwsError::Config(m.into())
}

// ---------------------------------------------------------------------------
// Reconstruction

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DivCurlCheckConfig {
    /// `(nx, nz)` pairs, coarsest first.
    pub resolutions: Vec<(usize, usize)>,
    pub eps: f64,
    pub mu: f64,
    pub amplitude: f64,
    /// Pole offset of the manufactured flow's x-profile.
    pub pole: f64,
    pub krylov: f64,
    /// Number of random fields for the curl-inverse test.
    pub trials: usize,
    pub seed: u64,
}

impl Default for DivCurlCheckConfig {
    fn default() -> Self {
        Self {
            resolutions: vec![(64, 32), (128, 48)],
            eps: 1.0,
            mu: 0.5,
            amplitude: 0.1,
            pole: 1.3,
            krylov: 1e-12,
            trials: 10,
            seed: 0,
        }
    }
}

impl DivCurlCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolutions.is_empty() {
            return Err(config_err("divcurl_check.resolutions must not be empty"));
        }
        for &(nx, nz) in &self.resolutions {
            Params { nx, nz, eps: self.eps, mu: self.mu, ..Params::default() }.validate()?;
        }
        if !(self.pole > 1.0) || !(self.krylov > 0.0) || !self.amplitude.is_finite() {
            return Err(config_err("divcurl_check needs pole > 1, krylov > 0 and a finite amplitude"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolutionRow {
    pub nx: usize,
    pub nz: usize,
    pub error: f64,
    pub surface_identity: f64,
    pub bottom_identity: f64,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivCurlReport {
    pub rows: Vec<ResolutionRow>,
    /// Error of the flat single-mode potential flow against its closed form.
    pub flat_mode_error: f64,
    /// Size of the rotational part when ω = 0.
    pub irrotational_rotational_part: f64,
    /// Largest `‖curl B − C‖` and `‖B_b‖` over the random trials.
    pub curl_inverse_error: f64,
    pub curl_inverse_bottom: f64,
    pub checks: Vec<Check>,
}

fn solver(grid: Arc<Grid>, mu: f64, krylov: f64) -> Result<DivCurlSolver> {
    DivCurlSolver::new(grid, mu, Tolerances { krylov, ..Tolerances::default() }, TransverseGauge::ZeroMomentum)
}

/// Random divergence-free field with zero bottom flux and zero transverse
/// flux: the curl of a potential vanishing at the bottom, with the constant
/// part of `C₂` removed.
pub fn admissible_curl_field(geo: &GeometryCache, seed: u64, amp: f64) -> VectorVolumeField {
    let g = &geo.grid;
    let mut r = samples::rng(seed);
    let mut comp = || {
        samples::volume(g, &mut r, amp, 3).mul(&VolumeField::from_fn(g, |_, z| 1.0 + z))
    };
    let a = VectorVolumeField::new(comp(), comp(), comp());
    let mut c = geo.scaled_curl(&a);
    let ones = VolumeField::constant(g, 1.0);
    let shift = geo.volume_integral(&c.y) / geo.volume_integral(&ones);
    c.y = c.y.map(|v| v - shift);
    c
}

pub fn divcurl_check(cfg: &DivCurlCheckConfig) -> Result<DivCurlReport> {
    cfg.validate()?;
    let spec = FlowSpec { eps: cfg.eps, mu: cfg.mu, amp: cfg.amplitude, a: cfg.pole };
    let mut rows = Vec::new();
    for &(nx, nz) in &cfg.resolutions {
        let start = Instant::now();
        let grid = Arc::new(Grid::new(nx, nz, std::f64::consts::TAU)?);
        let s = solver(grid.clone(), cfg.mu, cfg.krylov)?;
        let m = manufactured::build(grid, spec)?;
        let sol = s.reconstruct(&m.geo, &m.psi, &m.omega)?;
        let report = sol.report.expect("strict reconstruction reports residuals");
        rows.push(ResolutionRow {
            nx,
            nz,
            error: sol.velocity.sub(&m.velocity).max_abs(),
            surface_identity: report.surface_identity,
            bottom_identity: report.bottom_identity,
            runtime_s: start.elapsed().as_secs_f64(),
        });
    }

    let (nx, nz) = cfg.resolutions[0];
    let grid = Arc::new(Grid::new(nx, nz, std::f64::consts::TAU)?);
    let s = solver(grid.clone(), cfg.mu, cfg.krylov)?;
    // Flat surface, ψ = cos x: φ = cos x cosh(√μ(1+z))/cosh √μ.
    let flat = GeometryCache::new(grid.clone(), &SurfaceField::zeros(nx), cfg.eps, cfg.mu, 0.05)?;
    let sm = cfg.mu.sqrt();
    let sol = s.reconstruct(&flat, &SurfaceField::from_fn(&grid, f64::cos), &VectorVolumeField::zeros(&grid))?;
    let exact_vx = VolumeField::from_fn(&grid, |x, z| -x.sin() * (sm * (1.0 + z)).cosh() / sm.cosh());
    let exact_w = VolumeField::from_fn(&grid, |x, z| sm * x.cos() * (sm * (1.0 + z)).sinh() / sm.cosh());
    let flat_mode_error = sol.velocity.x.sub(&exact_vx).max_abs().max(sol.velocity.z.sub(&exact_w).max_abs());

    let zeta = SurfaceField::from_fn(&grid, |x| cfg.amplitude * x.cos());
    let geo = GeometryCache::new(grid.clone(), &zeta, cfg.eps, cfg.mu, 0.05)?;
    let psi = samples::surface(&grid, &mut samples::rng(cfg.seed), 1.0, 4);
    let sol = s.reconstruct(&geo, &psi, &VectorVolumeField::zeros(&grid))?;
    let irrotational_rotational_part = sol.rotational.max_abs().max(sol.streamfunction.max_abs());
    let mut identities = rows.iter().map(|r| r.surface_identity.max(r.bottom_identity)).fold(0.0, f64::max);
    identities = identities.max(sol.report.map_or(0.0, |r| r.surface_identity.max(r.bottom_identity)));

    let mut curl_inverse_error: f64 = 0.0;
    let mut curl_inverse_bottom: f64 = 0.0;
    for trial in 0..cfg.trials {
        let z = samples::surface(&grid, &mut samples::rng(cfg.seed + 1000 + trial as u64), cfg.amplitude, 3);
        let geo = GeometryCache::new(grid.clone(), &z, cfg.eps, cfg.mu, 0.05)?;
        let c = admissible_curl_field(&geo, cfg.seed + trial as u64, 1.0);
        let b = s.curl_inverse(&geo, &c)?;
        curl_inverse_error = curl_inverse_error.max(geo.scaled_curl(&b).sub(&c).max_abs());
        let bb = [b.x.bottom().max_abs(), b.y.bottom().max_abs(), b.z.bottom().max_abs()];
        curl_inverse_bottom = curl_inverse_bottom.max(bb.into_iter().fold(0.0, f64::max));
    }

    let first = &rows[0];
    let last = rows.last().expect("non-empty");
    let mut checks = vec![Check::below("manufactured error at the base resolution", first.error, 1e-7)];
    if rows.len() > 1 {
        checks.push(Check::at_least("error reduction under refinement", first.error / last.error, 10.0));
    }
    let runtime: f64 = rows.iter().map(|r| r.runtime_s).sum();
    checks.extend([
        Check::below("manufactured suite runtime [s]", runtime, 10.0),
        Check::below("flat single-mode error", flat_mode_error, 1e-10),
        Check::below("rotational part for zero vorticity", irrotational_rotational_part, 1e-14),
        Check::below("surface and bottom identities", identities, 1e-8),
        Check::below("curl inverse residual", curl_inverse_error, 1e-8),
        Check::below("curl inverse bottom trace", curl_inverse_bottom, 1e-9),
    ]);
    Ok(DivCurlReport {
        rows,
        flat_mode_error,
        irrotational_rotational_part,
        curl_inverse_error,
        curl_inverse_bottom,
        checks,
    })
}

// ---------------------------------------------------------------------------
// Dispersion

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionCase {
    pub mu: f64,
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub cases: Vec<DispersionCase>,
    pub eps: f64,
    pub amplitude: f64,
    pub nx: usize,
    pub nz: usize,
    /// Number of periods the crossing times are fitted over.
    pub periods: f64,
    pub steps_per_period: usize,
    pub tolerance: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            cases: vec![
                DispersionCase { mu: 1.0, k: 1 },
                DispersionCase { mu: 0.25, k: 1 },
                DispersionCase { mu: 0.04, k: 2 },
            ],
            eps: 0.1,
            amplitude: 1e-6,
            nx: 16,
            nz: 17,
            periods: 6.0,
            steps_per_period: 96,
            tolerance: 1e-5,
        }
    }
}

impl DispersionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cases.is_empty() {
            return Err(config_err("dispersion.cases must not be empty"));
        }
        for c in &self.cases {
            self.params(c, 1.0).validate()?;
            if c.k == 0 || c.k as usize >= self.nx / 3 {
                return Err(config_err(format!("wavenumber {} is not resolved by nx = {}", c.k, self.nx)));
            }
        }
        if !(self.periods >= 5.0) || self.steps_per_period < 8 || !(self.amplitude > 0.0) {
            return Err(config_err("dispersion needs periods >= 5, steps_per_period >= 8 and amplitude > 0"));
        }
        Ok(())
    }

    fn params(&self, c: &DispersionCase, dt: f64) -> Params {
        Params {
            eps: self.eps,
            mu: c.mu,
            nx: self.nx,
            nz: self.nz,
            time_step: TimeStep::Fixed(dt),
            ..Params::default()
        }
    }
}

/// `ω = (|k| tanh(√μ|k|)/√μ)^{1/2}`.
pub fn linear_frequency(mu: f64, k: f64) -> f64 {
    let sm = mu.sqrt();
    (k.abs() * (sm * k.abs()).tanh() / sm).sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DispersionRow {
    pub mu: f64,
    pub k: u32,
    pub expected: f64,
    pub measured: f64,
    pub relative_error: f64,
    pub crossings: usize,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DispersionReport {
    pub rows: Vec<DispersionRow>,
    pub checks: Vec<Check>,
}

/// Root in `[t[1], t[2]]` of the cubic through four samples.
fn cubic_root(t: [f64; 4], y: [f64; 4]) -> f64 {
    let p = |s: f64| {
        (0..4)
            .map(|i| {
                let l: f64 = (0..4).filter(|&j| j != i).map(|j| (s - t[j]) / (t[i] - t[j])).product();
                y[i] * l
            })
            .sum::<f64>()
    };
    let (mut a, mut b) = (t[1], t[2]);
    let fa = p(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (p(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Interpolated zero crossings of a sampled signal.
pub fn zero_crossings(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for n in 1..y.len().saturating_sub(2) {
        if y[n] == 0.0 {
            out.push(t[n]);
        } else if (y[n] > 0.0) != (y[n + 1] > 0.0) && y[n + 1] != 0.0 {
            out.push(cubic_root([t[n - 1], t[n], t[n + 1], t[n + 2]], [y[n - 1], y[n], y[n + 1], y[n + 2]]));
        }
    }
    out
}

/// Measures the frequency of one small standing wave.
pub fn dispersion_case(cfg: &DispersionConfig, case: &DispersionCase) -> Result<DispersionRow> {
    let start = Instant::now();
    let expected = linear_frequency(case.mu, case.k as f64);
    let period = std::f64::consts::TAU / expected;
    let dt = period / cfg.steps_per_period as f64;
    let model = Model::new(cfg.params(case, dt))?;
    let g = model.grid.clone();
    let kk = case.k as f64;
    let mut s = State::rest(&g);
    s.zeta = SurfaceField::from_fn(&g, |x| cfg.amplitude * (kk * x).cos());
    let basis = SurfaceField::from_fn(&g, |x| (kk * x).cos());
    let coefficient = |z: &SurfaceField| 2.0 * z.mul(&basis).mean();
    let mut ts = vec![0.0];
    let mut ys = vec![coefficient(&s.zeta)];
    let steps = ((cfg.periods + 0.5) * cfg.steps_per_period as f64).ceil() as usize;
    for n in 1..=steps {
        let mut next = model.step(&s, dt, true)?;
        next.t = n as f64 * dt;
        ts.push(next.t);
        ys.push(coefficient(&next.zeta));
        s = next;
    }
    let crossings = zero_crossings(&ts, &ys);
    if crossings.len() < 3 {
        return Err(VwsError::Numerical(format!("only {} zero crossings were found", crossings.len())));
    }
    // Crossings are half a period apart: least-squares slope against index.
    let n = crossings.len() as f64;
    let mi = (n - 1.0) / 2.0;
    let mt = crossings.iter().sum::<f64>() / n;
    let sxy: f64 = crossings.iter().enumerate().map(|(i, t)| (i as f64 - mi) * (t - mt)).sum();
    let sxx: f64 = (0..crossings.len()).map(|i| (i as f64 - mi).powi(2)).sum();
    let half_period = sxy / sxx;
    let measured = std::f64::consts::PI / half_period;
    Ok(DispersionRow {
        mu: case.mu,
        k: case.k,
        expected,
        measured,
        relative_error: (measured - expected).abs() / expected,
        crossings: crossings.len(),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

pub fn dispersion_checks(cfg: &DispersionConfig, rows: &[DispersionRow]) -> Vec<Check> {
    rows.iter()
        .flat_map(|r| {
            let tag = format!("mu={} k={}", r.mu, r.k);
            [
                Check::below(&format!("frequency error {tag}"), r.relative_error, cfg.tolerance),
                Check::below(&format!("runtime {tag} [s]"), r.runtime_s, 30.0),
            ]
        })
        .collect()
}

/// All cases in order, one after another.
pub fn dispersion(cfg: &DispersionConfig) -> Result<DispersionReport> {
    cfg.validate()?;
    let rows = cfg.cases.iter().map(|c| dispersion_case(cfg, c)).collect::<Result<Vec<_>>>()?;
    let checks = dispersion_checks(cfg, &rows);
    Ok(DispersionReport { rows, checks })
}

// ---------------------------------------------------------------------------
// Hamiltonian structure

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HamiltonianCheckConfig {
    pub eps: f64,
    pub mu: f64,
    pub nx: usize,
    pub nz: usize,
    pub amplitude: f64,
    pub krylov: f64,
    /// Random states for the structure test.
    pub states: usize,
    /// Random states for the finite-difference test.
    pub fd_states: usize,
    pub fd_steps: Vec<f64>,
    /// Step of the trajectory check; a run at half the step is compared.
    pub trajectory_dt: f64,
    pub trajectory_steps: usize,
    pub seed: u64,
}

impl Default for HamiltonianCheckConfig {
    fn default() -> Self {
        Self {
            eps: 0.3,
            mu: 0.5,
            nx: 48,
            nz: 21,
            amplitude: 0.3,
            krylov: 1e-12,
            states: 10,
            fd_states: 3,
            fd_steps: vec![1e-3, 1e-4, 1e-5, 1e-6],
            trajectory_dt: 0.02,
            trajectory_steps: 4,
            seed: 0,
        }
    }
}

impl HamiltonianCheckConfig {
    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.states == 0 || self.fd_states == 0 || self.fd_steps.len() < 2 {
            return Err(config_err("hamiltonian needs states, fd_states >= 1 and at least two fd_steps"));
        }
        if !(self.trajectory_dt > 0.0) || self.trajectory_steps < 2 {
            return Err(config_err("hamiltonian needs trajectory_dt > 0 and trajectory_steps >= 2"));
        }
        Ok(())
    }

    fn params(&self) -> Params {
        let mut p = Params { eps: self.eps, mu: self.mu, nx: self.nx, nz: self.nz, ..Params::default() };
        p.tol.krylov = self.krylov;
        p
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianReport {
    pub fd_min_relative_error: f64,
    pub fd_observed_order: f64,
    pub antisymmetry: f64,
    pub structure: f64,
    pub cotangent: f64,
    pub trajectory_mismatch: f64,
    pub trajectory_refinement_ratio: f64,
    pub conserved_rates: f64,
    pub checks: Vec<Check>,
}

fn random_direction(model: &Model, s: &State, seed: u64) -> Result<crate::dynamics::Tendency> {
    let ev = model.evaluate(s, Checks::Lenient)?;
    let mut r = samples::rng(seed);
    let dz = samples::surface(&model.grid, &mut r, 1.0, 3);
    let dp = samples::surface(&model.grid, &mut r, 1.0, 3);
    let dw = samples::vorticity(model, &s.zeta, &mut r, 1.0, 2)?;
    Ok(straightened_direction(&ev.geo, s, dz, dp, &dw))
}

fn trajectory(model: &Model, s0: &State, dt: f64, steps: usize) -> Result<Vec<State>> {
    let mut out = vec![s0.clone()];
    for _ in 0..steps {
        let next = model.step(out.last().expect("non-empty"), dt, true)?;
        out.push(next);
    }
    Ok(out)
}

pub fn hamiltonian_check(cfg: &HamiltonianCheckConfig) -> Result<HamiltonianReport> {
    cfg.validate()?;
    let model = Model::new(cfg.params())?;
    let seed = cfg.seed;

    let mut fd_min_relative_error: f64 = 0.0;
    let mut fd_observed_order = f64::INFINITY;
    for i in 0..cfg.fd_states as u64 {
        let s = samples::state(&model, seed + i, cfg.amplitude)?;
        let dir = random_direction(&model, &s, seed + 100 + i)?;
        let r = fd_check(&model, &Energy, &s, &dir, &cfg.fd_steps)?;
        fd_min_relative_error = fd_min_relative_error.max(r.min_relative_error);
        fd_observed_order = fd_observed_order.min(r.observed_order);
    }

    let mut structure: f64 = 0.0;
    let mut cotangent: f64 = 0.0;
    let mut antisymmetry: f64 = 0.0;
    for i in 0..cfg.states as u64 {
        let s = samples::state(&model, seed + i, cfg.amplitude)?;
        let ev = model.evaluate(&s, Checks::Lenient)?;
        structure = structure.max(structure_residual(&model, &s, &ev)?.max());
        let gh = grad_total_energy(&model, &s, &ev)?;
        cotangent = cotangent.max(cotangent_residual(&model, &ev, &gh));
        let lin = LinearObservable { weight: samples::surface(&model.grid, &mut samples::rng(seed + 500 + i), 1.0, 4) };
        let fs: [&dyn Functional; 4] = [&Energy, &Momentum, &Mass, &lin];
        let grads = fs.iter().map(|f| f.gradient(&model, &s, &ev)).collect::<Result<Vec<Gradient>>>()?;
        for a in 0..grads.len() {
            for b in a + 1..grads.len() {
                antisymmetry = antisymmetry.max(antisymmetry_residual(&model, &s, &ev, &grads[a], &grads[b]));
            }
        }
    }

    let s0 = samples::state(&model, seed + 11, cfg.amplitude * 2.0 / 3.0)?;
    let weight = SurfaceField::from_fn(&model.grid, f64::cos);
    let lin = LinearObservable { weight };
    let (dt, n) = (cfg.trajectory_dt, cfg.trajectory_steps);
    let coarse = hamiltonian_consistency(&model, &trajectory(&model, &s0, dt, n)?, &lin)?;
    let fine = hamiltonian_consistency(&model, &trajectory(&model, &s0, dt / 2.0, 2 * n)?, &lin)?;
    let trajectory_refinement_ratio = coarse.relative_mismatch / fine.relative_mismatch;
    let mut conserved_rates: f64 = 0.0;
    let long = trajectory(&model, &s0, dt, n)?;
    for f in [&Energy as &dyn Functional, &Mass] {
        let r = hamiltonian_consistency(&model, &long, f)?;
        for p in &r.samples {
            conserved_rates = conserved_rates.max(p.bracket.abs());
        }
    }
    let ev = model.evaluate(&s0, Checks::Lenient)?;
    let gh = grad_total_energy(&model, &s0, &ev)?;
    let diag = bracket(&model, &s0, &ev, &gh, &gh).abs();
    conserved_rates = conserved_rates.max(diag);

    let checks = vec![
        Check::below("fd_check relative error of H", fd_min_relative_error, 1e-6),
        Check::within("fd_check observed order", fd_observed_order, 1.8, 2.2),
        Check::below("bracket antisymmetry (relative)", antisymmetry, 1e-11),
        Check::below("rhs - J grad H (relative)", structure, 1e-8),
        Check::below("cotangent relation of grad H", cotangent, 1e-8),
        Check::below("dF/dt - {F,H} (relative)", coarse.relative_mismatch, 1e-4),
        Check::at_least("trajectory mismatch reduction under dt/2", trajectory_refinement_ratio, 3.5),
        Check::below("{H,H} and {Mass,H}", conserved_rates, 1e-9),
    ];
    Ok(HamiltonianReport {
        fd_min_relative_error,
        fd_observed_order,
        antisymmetry,
        structure,
        cotangent,
        trajectory_mismatch: coarse.relative_mismatch,
        trajectory_refinement_ratio,
        conserved_rates,
        checks,
    })
}

// ---------------------------------------------------------------------------
// Shallow-water sweep

/// Pass/fail reading of a shallow-water justification sweep.
pub fn justify_checks(rows: &[JustifyRow], summary: &JustifySummary, runtime_s: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    for (i, r) in summary.ratio_zeta.iter().enumerate() {
        checks.push(Check::within(&format!("zeta error ratio {}", i + 1), *r, 3.0, 5.0));
    }
    for (i, r) in summary.ratio_uncorrected.iter().enumerate() {
        checks.push(Check::within(&format!("surface velocity vs Vbar ratio {}", i + 1), *r, 1.7, 2.3));
    }
    for (i, r) in summary.ratio_corrected.iter().enumerate() {
        checks.push(Check::within(&format!("surface velocity vs Vbar - sqrt(mu) Q ratio {}", i + 1), *r, 3.0, 5.0));
    }
    if let Some(f) = summary.self_error_fraction {
        checks.push(Check::below("self-discretization error / smallest model error", f, 0.01));
    }
    if rows.len() >= 2 {
        checks.push(Check::within("structure residual slope", summary.structure_slope, 1.3, 1.7));
    }
    checks.push(Check::below("sweep runtime [s]", runtime_s, 600.0));
    checks
}
