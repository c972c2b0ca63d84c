//! Browser bindings for the `vws` library.
//!
//! Three operations are exposed to the page in `www/`: the linear dispersion
//! relation, a small wave tank with optional shear vorticity that can be
//! stepped and plotted, and the manufactured-solution error of the velocity
//! reconstruction at a chosen resolution.

use std::sync::Arc;

use vws::divcurl::{DivCurlSolver, Tolerances, TransverseGauge};
use vws::dynamics::{Model, Params, State, Stepper, TimeStep};
use vws::harness::linear_frequency;
use vws::manufactured::{self, FlowSpec};
use vws::spectral::{Grid, SurfaceField, VolumeField};
use wasm_bindgen::prelude::*;

fn js_error(e: vws::VwsError) -> JsError {
    JsError::new(&e.to_string())
}

/// Angular frequency `(k tanh(√μ k)/√μ)^{1/2}` of a small standing wave.
#[wasm_bindgen]
pub fn dispersion_frequency(mu: f64, k: f64) -> f64 {
    linear_frequency(mu, k)
}

/// Sup-norm error of the reconstructed velocity for the closed-form
/// rotational flow over `ζ = 0.1 cos x` with `ε = 1`, `μ = 0.5`.
#[wasm_bindgen]
pub fn reconstruction_error(nx: usize, nz: usize) -> Result<f64, JsError> {
    let grid = Arc::new(Grid::new(nx, nz, std::f64::consts::TAU).map_err(js_error)?);
    let tol = Tolerances { krylov: 1e-12, ..Tolerances::default() };
    let solver = DivCurlSolver::new(grid.clone(), 0.5, tol, TransverseGauge::ZeroMomentum).map_err(js_error)?;
    let m = manufactured::build(grid, FlowSpec { eps: 1.0, mu: 0.5, amp: 0.1, a: 1.3 }).map_err(js_error)?;
    manufactured::reconstruction_error(&solver, &m).map_err(js_error)
}

/// A periodic tank started from `ζ = a cos x` over the shear `ω₂ = s(1+z)`.
#[wasm_bindgen]
pub struct WaveTank {
    stepper: Stepper,
    h0: f64,
}

#[wasm_bindgen]
impl WaveTank {
    #[wasm_bindgen(constructor)]
    pub fn new(eps: f64, mu: f64, amplitude: f64, shear: f64) -> Result<WaveTank, JsError> {
        let params = Params { eps, mu, nx: 64, nz: 13, time_step: TimeStep::Cfl(0.5), ..Params::default() };
        let model = Model::new(params).map_err(js_error)?;
        let g = model.grid.clone();
        let mut s = State::rest(&g);
        s.zeta = SurfaceField::from_fn(&g, |x| amplitude * x.cos());
        s.omega.y = VolumeField::from_fn(&g, |_, z| shear * (1.0 + z));
        let stepper = Stepper::new(model, &s).map_err(js_error)?;
        let h0 = stepper.model.energy_parts(stepper.state(), stepper.evaluation()).total;
        Ok(WaveTank { stepper, h0 })
    }

    /// Takes `steps` CFL-limited steps and returns the new time.
    pub fn advance(&mut self, steps: u32) -> Result<f64, JsError> {
        for _ in 0..steps {
            self.stepper.advance(None).map_err(js_error)?;
        }
        Ok(self.stepper.state().t)
    }

    pub fn time(&self) -> f64 {
        self.stepper.state().t
    }

    /// Grid abscissae in `[0, 2π)`.
    pub fn x(&self) -> Vec<f64> {
        self.stepper.model.grid.x().to_vec()
    }

    pub fn elevation(&self) -> Vec<f64> {
        self.stepper.state().zeta.values.clone()
    }

    /// Horizontal velocity at the surface.
    pub fn surface_velocity(&self) -> Vec<f64> {
        self.stepper.evaluation().surface.vx.values.clone()
    }

    /// `(H − H₀)/H₀`, or `H − H₀` when the initial energy vanishes.
    pub fn energy_drift(&self) -> f64 {
        let h = self.stepper.model.energy_parts(self.stepper.state(), self.stepper.evaluation()).total;
        if self.h0 == 0.0 {
            h - self.h0
        } else {
            (h - self.h0) / self.h0
        }
    }
}
