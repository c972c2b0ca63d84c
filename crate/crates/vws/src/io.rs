//! Run configuration, binary snapshots and the diagnostics table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{rayleigh_taylor, Evaluation, Model, Params, State, Stepper};
use crate::error::{Result, VwsError};
use crate::harness::{DispersionConfig, DivCurlCheckConfig, HamiltonianCheckConfig};
use crate::manufactured::{self, FlowSpec};
use crate::samples;
use crate::spectral::{Grid, SurfaceField, VectorVolumeField, VolumeField};
use crate::swmodel::JustifyConfig;

/// Vertical shape of the in-plane shear vorticity `ω₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShearProfile {
    /// `ω₂ = s`.
    Uniform,
    /// `ω₂ = s (1 + z)`, strongest at the surface.
    Linear,
    /// `ω₂ = s (1 + z) cos(κx)`.
    Cosine,
}

/// Named families of initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Rest,
    /// `ζ = a cos(mode κx)`, `ψ = 0`, `ω = 0` with `κ = 2π/Lx`.
    StandingWave { amplitude: f64, mode: u32 },
    /// In-plane shear under a standing wave of the given amplitude.
    ShearVorticity {
        strength: f64,
        profile: ShearProfile,
        #[serde(default)]
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// A closed-form flow; `id` is `"rotational"` or `"flat_mode"`.
    Manufactured { id: String },
    /// Smooth pseudo-random state drawn from the run seed.
    Random { amplitude: f64 },
}

fn one() -> u32 {
    1
}

/// Output cadence, in steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// Snapshot interval; 0 writes only the initial and the final state.
    pub snapshot_every: usize,
    pub diag_every: usize,
}

impl Default for Output {
    fn default() -> Self {
        Self { snapshot_every: 0, diag_every: 1 }
    }
}

/// Everything a command needs, read from one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub params: Params,
    pub initial: InitialCondition,
    pub t_end: f64,
    pub output: Output,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub justify: Option<JustifyConfig>,
    pub dispersion: Option<DispersionConfig>,
    pub divcurl_check: Option<DivCurlCheckConfig>,
    pub hamiltonian: Option<HamiltonianCheckConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "run".into(),
            params: Params::default(),
            initial: InitialCondition::Rest,
            t_end: 1.0,
            output: Output::default(),
            out_dir: None,
            seed: 0,
            justify: None,
            dispersion: None,
            divcurl_check: None,
            hamiltonian: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| VwsError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| VwsError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every field without allocating any grid.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(VwsError::Config(format!("t_end = {} must be finite and non-negative", self.t_end)));
        }
        if self.output.diag_every == 0 {
            return Err(VwsError::Config("output.diag_every must be at least 1".into()));
        }
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(VwsError::Config(format!("{what} must be finite")))
            }
        };
        match &self.initial {
            InitialCondition::Rest => {}
            InitialCondition::StandingWave { amplitude, mode } => {
                finite(*amplitude, "amplitude")?;
                if *mode as usize > self.params.nx / 2 {
                    return Err(VwsError::Config(format!("mode {mode} is not resolved by nx = {}", self.params.nx)));
                }
            }
            InitialCondition::ShearVorticity { strength, amplitude, mode, .. } => {
                finite(*strength, "strength")?;
                finite(*amplitude, "amplitude")?;
                if *mode as usize > self.params.nx / 2 {
                    return Err(VwsError::Config(format!("mode {mode} is not resolved by nx = {}", self.params.nx)));
                }
            }
            InitialCondition::Manufactured { id } => {
                if id != "rotational" && id != "flat_mode" {
                    return Err(VwsError::Config(format!(
                        "unknown manufactured id {id:?} (expected \"rotational\" or \"flat_mode\")"
                    )));
                }
                if (self.params.lx - std::f64::consts::TAU).abs() > 1e-12 {
                    return Err(VwsError::Config("manufactured initial data need lx = 2π".into()));
                }
            }
            InitialCondition::Random { amplitude } => finite(*amplitude, "amplitude")?,
        }
        if let Some(j) = &self.justify {
            j.validate()?;
        }
        if let Some(d) = &self.dispersion {
            d.validate()?;
        }
        if let Some(d) = &self.divcurl_check {
            d.validate()?;
        }
        if let Some(h) = &self.hamiltonian {
            h.validate()?;
        }
        Ok(())
    }

    /// Samples the initial condition on the model grid (not yet projected).
    pub fn initial_state(&self, model: &Model) -> Result<State> {
        let g = &model.grid;
        let kappa = std::f64::consts::TAU / g.lx();
        let mut s = State::rest(g);
        match &self.initial {
            InitialCondition::Rest => {}
            InitialCondition::StandingWave { amplitude, mode } => {
                let k = *mode as f64 * kappa;
                s.zeta = SurfaceField::from_fn(g, |x| amplitude * (k * x).cos());
            }
            InitialCondition::ShearVorticity { strength, profile, amplitude, mode } => {
                let k = *mode as f64 * kappa;
                s.zeta = SurfaceField::from_fn(g, |x| amplitude * (k * x).cos());
                let st = *strength;
                s.omega.y = match profile {
                    ShearProfile::Uniform => VolumeField::constant(g, st),
                    ShearProfile::Linear => VolumeField::from_fn(g, |_, z| st * (1.0 + z)),
                    ShearProfile::Cosine => VolumeField::from_fn(g, |x, z| st * (1.0 + z) * (kappa * x).cos()),
                };
            }
            InitialCondition::Manufactured { id } if id == "flat_mode" => {
                s.psi = SurfaceField::from_fn(g, f64::cos);
            }
            InitialCondition::Manufactured { .. } => {
                let p = &model.params;
                let spec = FlowSpec { eps: p.eps, mu: p.mu, ..FlowSpec::default() };
                let m = manufactured::build(g.clone(), spec)?;
                s.zeta = m.geo.zeta.clone();
                s.psi = m.psi;
                s.omega = m.omega;
            }
            InitialCondition::Random { amplitude } => return samples::state(model, self.seed, *amplitude),
        }
        Ok(s)
    }
}

const MAGIC: &[u8; 4] = b"VWS1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 48;

/// One state in the binary snapshot format.
///
/// Layout, all little-endian: magic `VWS1`, version `u32`, `nx` and `nz` as
/// `u32`, then `t, ε, μ, Lx` as `f64`, then `ζ[nx]`, `ψ[nx]` and the three
/// vorticity components `[nx·nz]` each, x-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub nz: usize,
    pub t: f64,
    pub eps: f64,
    pub mu: f64,
    pub lx: f64,
    pub zeta: Vec<f64>,
    pub psi: Vec<f64>,
    pub omega: [Vec<f64>; 3],
}

impl Snapshot {
    pub fn from_state(s: &State, params: &Params) -> Self {
        Self {
            nx: params.nx,
            nz: params.nz,
            t: s.t,
            eps: params.eps,
            mu: params.mu,
            lx: params.lx,
            zeta: s.zeta.values.clone(),
            psi: s.psi.values.clone(),
            omega: [s.omega.x.values.clone(), s.omega.y.values.clone(), s.omega.z.values.clone()],
        }
    }

    pub fn to_state(&self, grid: &Grid) -> Result<State> {
        if grid.nx() != self.nx || grid.nz() != self.nz {
            return Err(VwsError::ShapeMismatch(format!(
                "snapshot is {}x{}, grid is {}x{}",
                self.nx,
                self.nz,
                grid.nx(),
                grid.nz()
            )));
        }
        let vol = |v: &Vec<f64>| {
            let mut f = VolumeField::zeros(grid);
            f.values.copy_from_slice(v);
            f
        };
        Ok(State {
            t: self.t,
            zeta: SurfaceField::new(self.zeta.clone()),
            psi: SurfaceField::new(self.psi.clone()),
            omega: VectorVolumeField::new(vol(&self.omega[0]), vol(&self.omega[1]), vol(&self.omega[2])),
        })
    }

    pub fn byte_len(nx: usize, nz: usize) -> usize {
        HEADER_LEN + 8 * (2 * nx + 3 * nx * nz)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::byte_len(self.nx, self.nz));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.nz as u32).to_le_bytes());
        for v in [self.t, self.eps, self.mu, self.lx] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let arrays = [&self.zeta, &self.psi, &self.omega[0], &self.omega[1], &self.omega[2]];
        for a in arrays {
            for v in a.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fmt = |m: String| VwsError::Format(m);
        if bytes.len() < HEADER_LEN || &bytes[0..4] != MAGIC {
            return Err(fmt("missing VWS1 header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != VERSION {
            return Err(fmt(format!("unsupported snapshot version {version}")));
        }
        let (nx, nz) = (u32_at(8) as usize, u32_at(12) as usize);
        let expected = Self::byte_len(nx, nz);
        if bytes.len() != expected {
            return Err(fmt(format!("length {} does not match {expected} for {nx}x{nz}", bytes.len())));
        }
        let mut offset = HEADER_LEN;
        let mut take = |n: usize| {
            let v: Vec<f64> = (0..n).map(|i| f64_at(offset + 8 * i)).collect();
            offset += 8 * n;
            v
        };
        let zeta = take(nx);
        let psi = take(nx);
        let omega = [take(nx * nz), take(nx * nz), take(nx * nz)];
        Ok(Self { nx, nz, t: f64_at(16), eps: f64_at(24), mu: f64_at(32), lx: f64_at(40), zeta, psi, omega })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// One row of `diagnostics.csv`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub h: f64,
    pub e_pot: f64,
    pub e_kin: f64,
    pub cal_e_n: f64,
    pub min_h: f64,
    pub min_a: f64,
    pub div_omega_max: f64,
    pub mass: f64,
    /// `(H − H₀)/|H₀|`, or `H − H₀` when `H₀ = 0`.
    pub h_drift: f64,
}

pub const CSV_HEADER: &str = "t,H,E_pot,E_kin,calE_N,min_h,min_a,div_omega_max,mass,H_drift";

impl DiagnosticsRow {
    /// Seventeen significant digits, enough to round-trip every value.
    pub fn to_csv(&self) -> String {
        [
            self.t,
            self.h,
            self.e_pot,
            self.e_kin,
            self.cal_e_n,
            self.min_h,
            self.min_a,
            self.div_omega_max,
            self.mass,
            self.h_drift,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Diagnostics of a state. `min_a` is supplied by the caller because it
/// needs the time derivative of the surface vertical velocity.
pub fn diagnostics(model: &Model, s: &State, ev: &Evaluation, min_a: f64, h0: Option<f64>) -> Result<DiagnosticsRow> {
    let e = model.energy_norm(s, ev)?;
    let h = e.hamiltonian.total;
    let h_drift = match h0 {
        Some(h0) if h0 != 0.0 => (h - h0) / h0.abs(),
        Some(h0) => h - h0,
        None => 0.0,
    };
    Ok(DiagnosticsRow {
        t: s.t,
        h,
        e_pot: e.hamiltonian.potential,
        e_kin: e.hamiltonian.kinetic,
        cal_e_n: e.total,
        min_h: e.min_h,
        min_a,
        div_omega_max: ev.geo.scaled_div(&s.omega).max_abs(),
        mass: model.grid.surface_integral(&s.zeta),
        h_drift,
    })
}

/// Summary of a completed simulation.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub scenario: String,
    pub steps: usize,
    pub t_final: f64,
    pub max_abs_h_drift: f64,
    pub max_div_omega: f64,
    pub snapshots: Vec<String>,
}

/// Failure of a simulation after output started. The last good state has
/// been written to `last_good` when it is set.
#[derive(Debug)]
pub struct SimulationFailure {
    pub error: VwsError,
    pub last_good: Option<PathBuf>,
}

fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.vws")
}

/// Runs a configured simulation and writes `diagnostics.csv` and snapshots
/// into `out`.
///
/// The row for the initial state is written after the first step, because
/// its Rayleigh–Taylor coefficient uses the forward difference of `w̲` over
/// that step. Output is identical from run to run for a given configuration.
pub fn simulate(cfg: &RunConfig, out: &Path) -> std::result::Result<SimulationSummary, SimulationFailure> {
    let plain = |error: VwsError| SimulationFailure { error, last_good: None };
    cfg.validate().map_err(plain)?;
    fs::create_dir_all(out).map_err(|e| plain(e.into()))?;
    let model = Model::new(cfg.params.clone()).map_err(plain)?;
    let initial = cfg.initial_state(&model).map_err(plain)?;
    let stepper = Stepper::new(model, &initial).map_err(plain)?;
    let mut run = SimulationRun::new(cfg, out, stepper).map_err(plain)?;
    match run.execute() {
        Ok(()) => Ok(run.summary),
        Err(error) => {
            let path = out.join("last_good.vws");
            let last_good = Snapshot::from_state(&run.last_good, &cfg.params).write(&path).ok().map(|_| path);
            Err(SimulationFailure { error, last_good })
        }
    }
}

struct SimulationRun<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    stepper: Stepper,
    csv: std::io::BufWriter<fs::File>,
    last_good: State,
    h0: f64,
    summary: SimulationSummary,
}

impl<'a> SimulationRun<'a> {
    fn new(cfg: &'a RunConfig, out: &'a Path, stepper: Stepper) -> Result<Self> {
        let mut csv = std::io::BufWriter::new(fs::File::create(out.join("diagnostics.csv"))?);
        writeln!(csv, "{CSV_HEADER}")?;
        let last_good = stepper.state().clone();
        let h0 = stepper.model.energy_parts(stepper.state(), stepper.evaluation()).total;
        let summary = SimulationSummary {
            scenario: cfg.scenario.clone(),
            steps: 0,
            t_final: 0.0,
            max_abs_h_drift: 0.0,
            max_div_omega: 0.0,
            snapshots: Vec::new(),
        };
        Ok(Self { cfg, out, stepper, csv, last_good, h0, summary })
    }

    fn snapshot(&mut self) -> Result<()> {
        let name = snapshot_name(self.stepper.steps());
        Snapshot::from_state(self.stepper.state(), &self.cfg.params).write(&self.out.join(&name))?;
        self.summary.snapshots.push(name);
        Ok(())
    }

    fn record(&mut self, row: &DiagnosticsRow) -> Result<()> {
        writeln!(self.csv, "{}", row.to_csv())?;
        self.summary.max_abs_h_drift = self.summary.max_abs_h_drift.max(row.h_drift.abs());
        self.summary.max_div_omega = self.summary.max_div_omega.max(row.div_omega_max);
        Ok(())
    }

    fn execute(&mut self) -> Result<()> {
        let t_end = self.cfg.t_end;
        let every = self.cfg.output;
        self.snapshot()?;
        let initial = self.stepper.state().clone();
        let initial_eval = self.stepper.evaluation().clone();
        let m = &self.stepper.model;
        let mut pending = Some(diagnostics(m, &initial, &initial_eval, f64::NAN, Some(self.h0))?);
        while self.stepper.state().t < t_end - 1e-12 * t_end.abs().max(1.0) {
            let dt = self.stepper.next_dt().min(t_end - self.stepper.state().t);
            let info = self.stepper.advance(Some(dt))?;
            if !self.stepper.state().is_finite() {
                return Err(VwsError::NonFinite(format!("state at t = {}", self.stepper.state().t)));
            }
            if let Some(mut row) = pending.take() {
                let ev = self.stepper.evaluation();
                let dw = ev.surface.w.sub(&initial_eval.surface.w).scale(1.0 / info.dt);
                let m = &self.stepper.model;
                row.min_a = rayleigh_taylor(&m.grid, m.params.eps, &initial_eval.surface.w, &initial_eval.surface.vx, &dw).min();
                self.record(&row)?;
            }
            self.last_good = self.stepper.state().clone();
            let n = self.stepper.steps();
            let last = self.stepper.state().t >= t_end - 1e-12 * t_end.abs().max(1.0);
            if n.is_multiple_of(every.diag_every) || last {
                let row = diagnostics(
                    &self.stepper.model,
                    self.stepper.state(),
                    self.stepper.evaluation(),
                    info.min_a,
                    Some(self.h0),
                )?;
                self.record(&row)?;
            }
            if (every.snapshot_every > 0 && n.is_multiple_of(every.snapshot_every)) || last {
                self.snapshot()?;
            }
        }
        if let Some(mut row) = pending.take() {
            // No step was taken: w̲ is frozen, so only the advective part remains.
            let ev = &initial_eval;
            let m = &self.stepper.model;
            let zero = SurfaceField::zeros(m.grid.nx());
            row.min_a = rayleigh_taylor(&m.grid, m.params.eps, &ev.surface.w, &ev.surface.vx, &zero).min();
            self.record(&row)?;
        }
        self.csv.flush()?;
        self.summary.steps = self.stepper.steps();
        self.summary.t_final = self.stepper.state().t;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_layout_and_round_trip() {
        let grid = Grid::new(8, 5, 2.0).unwrap();
        let mut s = State::rest(&grid);
        s.t = 0.25;
        s.zeta = SurfaceField::from_fn(&grid, |x| x.sin());
        s.omega.z = VolumeField::from_fn(&grid, |x, z| x * z + 1e-300);
        let p = Params { nx: 8, nz: 5, lx: 2.0, ..Params::default() };
        let snap = Snapshot::from_state(&s, &p);
        let bytes = snap.to_bytes();
        assert_eq!(bytes.len(), 48 + 8 * (2 * 8 + 3 * 8 * 5));
        assert_eq!(&bytes[0..4], b"VWS1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        let back = Snapshot::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.to_state(&grid).unwrap(), s);
        assert!(matches!(Snapshot::from_bytes(&bytes[..bytes.len() - 1]), Err(VwsError::Format(_))));
    }

    #[test]
    fn config_errors_are_reported_as_config() {
        for text in [
            "{",
            r#"{"params": {"nx": 7}}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"initial": {"kind": "manufactured", "id": "nope"}}"#,
            r#"{"t_end": -1}"#,
        ] {
            let e = RunConfig::from_json(text).unwrap_err();
            assert!(e.is_config(), "{text}: {e}");
        }
        let cfg = RunConfig::from_json(r#"{"initial": {"kind": "standing_wave", "amplitude": 0.1, "mode": 2}}"#).unwrap();
        assert_eq!(cfg.initial, InitialCondition::StandingWave { amplitude: 0.1, mode: 2 });
    }

    #[test]
    fn csv_rows_round_trip_exactly() {
        let row = DiagnosticsRow { t: 0.1, h: 1.0 / 3.0, min_a: f64::NAN, mass: -2.5e-17, ..Default::default() };
        let text = row.to_csv();
        let parsed: Vec<f64> = text.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed.len(), CSV_HEADER.split(',').count());
        assert_eq!(parsed[1].to_bits(), row.h.to_bits());
        assert_eq!(parsed[8].to_bits(), row.mass.to_bits());
    }
}
