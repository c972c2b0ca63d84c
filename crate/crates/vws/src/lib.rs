//! Free-surface water waves with vorticity in a vertical slice.
//!
//! The flow is described by the surface elevation `ζ`, the trace `ψ` of the
//! potential part of the surface velocity and the vorticity `ω`, all on a
//! straightened strip (Fourier in `x`, Chebyshev in `z`).
//!
//! * [`spectral`] and [`geometry`]: grids, fields and the straightening map.
//! * [`divcurl`]: velocity reconstruction from `(ζ, ψ, ω)`.
//! * [`dynamics`]: the evolution equations and the RK4 stepper.
//! * [`swmodel`]: the shallow-water limit and its justification sweep.
//! * [`hamiltonian`]: energy, Poisson bracket and structure checks.
//! * [`io`] and [`harness`]: configuration, output files and the verification
//!   suites driven by the command-line tool.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected, and
// the numerical kernels index several arrays with one loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod divcurl;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod harness;
pub mod io;
pub mod krylov;
pub mod manufactured;
pub mod samples;
pub mod spectral;
pub mod swmodel;

pub use error::{Result, VwsError};
