//! Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs as a plain binary so the lines always reach the
//! console under `cargo test`.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use common::runs::{divergence_run, energy_drift, irrotational_mismatch};
use vws::dynamics::{Model, Params};
use vws::harness::{
    self, divcurl_check, hamiltonian_check, justify_checks, Check, DispersionConfig, DivCurlCheckConfig,
    HamiltonianCheckConfig,
};
use vws::io::{simulate, RunConfig, Snapshot};
use vws::samples;
use vws::swmodel::{justification_harness, JustifyConfig};

/// Outcome of one criterion: every sub-check must pass.
struct Criterion {
    number: u32,
    title: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn passed(&self) -> bool {
        harness::all_passed(&self.checks)
    }

    fn print(&self) {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let detail: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} = {:.3e} ({})", c.name, c.value, c.condition))
            .collect();
        println!("{status} criterion {:>2} {}: {}", self.number, self.title, detail.join("; "));
    }
}

fn reconstruction() -> (Criterion, Criterion, Criterion) {
    let report = divcurl_check(&DivCurlCheckConfig::default()).expect("reconstruction suite");
    let find = |name: &str| report.checks.iter().find(|c| c.name == name).expect(name).clone();

    // Identities over the suite's reconstructions and over random rotational ones.
    let mut identities = report.checks.iter().find(|c| c.name == "surface and bottom identities").unwrap().value;
    let mut p = Params { eps: 0.5, mu: 0.4, nx: 32, nz: 25, ..Params::default() };
    p.tol.krylov = 1e-12;
    let model = Model::new(p).unwrap();
    for seed in 0..8u64 {
        let s = samples::state(&model, 300 + seed, 0.15).unwrap();
        let geo = model.geometry(&s.zeta).unwrap();
        let r = model.solver.reconstruct(&geo, &s.psi, &s.omega).unwrap().report.unwrap();
        identities = identities.max(r.surface_identity).max(r.bottom_identity);
    }

    let c1 = Criterion {
        number: 1,
        title: "div-curl manufactured solution",
        checks: vec![
            find("manufactured error at the base resolution"),
            find("error reduction under refinement"),
            find("manufactured suite runtime [s]"),
        ],
    };
    let c2 = Criterion {
        number: 2,
        title: "surface and bottom identities",
        checks: vec![Check::below("max identity residual", identities, 1e-8)],
    };
    let c3 = Criterion {
        number: 3,
        title: "curl inverse",
        checks: vec![find("curl inverse residual"), find("curl inverse bottom trace")],
    };
    (c1, c2, c3)
}

fn dispersion() -> Criterion {
    let report = harness::dispersion(&DispersionConfig::default()).expect("dispersion runs");
    Criterion { number: 4, title: "standing-wave dispersion", checks: report.checks }
}

fn irrotational() -> Criterion {
    Criterion {
        number: 5,
        title: "irrotational reduction to the classical solver",
        checks: vec![Check::below("sup-norm trajectory difference", irrotational_mismatch(), 1e-10)],
    }
}

fn divergence() -> Criterion {
    let (worst, _) = divergence_run();
    Criterion {
        number: 6,
        title: "divergence-free propagation over 1000 steps",
        checks: vec![Check::below("max scaled divergence", worst, 1e-8)],
    }
}

fn energy() -> Criterion {
    let coarse = energy_drift(0.05, 1.0);
    let fine = energy_drift(0.025, 1.0);
    Criterion {
        number: 7,
        title: "energy conservation",
        checks: vec![
            Check::below("relative drift at dt = 0.05", coarse, 1e-6),
            // Halving dt must gain at least the fourth-order factor of 16,
            // with a margin for the round-off floor of the fine run.
            Check::at_least("drift ratio under dt/2", coarse / fine, 12.0),
        ],
    }
}

fn hamiltonian() -> Criterion {
    let report = hamiltonian_check(&HamiltonianCheckConfig::default()).expect("hamiltonian suite");
    Criterion { number: 8, title: "Hamiltonian structure", checks: report.checks }
}

fn justification() -> (Criterion, Criterion) {
    let start = Instant::now();
    let (rows, summary) = justification_harness(&JustifyConfig::default()).expect("justification sweep");
    let runtime = start.elapsed().as_secs_f64();
    let all = justify_checks(&rows, &summary, runtime);
    let (structure, rest): (Vec<Check>, Vec<Check>) = all.into_iter().partition(|c| c.name.starts_with("structure"));
    (
        Criterion { number: 9, title: "shallow-water justification", checks: rest },
        Criterion { number: 10, title: "velocity structure", checks: structure },
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Criterion {
    let cfg = RunConfig::from_json(
        r#"{
            "scenario": "acceptance",
            "params": { "nx": 32, "nz": 17, "eps": 0.2, "mu": 0.3, "time_step": { "cfl": 0.5 } },
            "initial": { "kind": "random", "amplitude": 0.1 },
            "t_end": 0.2,
            "seed": 11,
            "output": { "snapshot_every": 5 }
        }"#,
    )
    .unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(&cfg, a.path()).unwrap();
    simulate(&cfg, b.path()).unwrap();
    let (fa, fb) = (files(a.path()), files(b.path()));
    let identical = fa == fb && fa.len() > 2;

    let mut round_trip = true;
    for (name, bytes) in fa.iter().filter(|(n, _)| n.ends_with(".vws")) {
        let snap = Snapshot::from_bytes(bytes).unwrap();
        let copy = a.path().join(format!("copy_{name}"));
        snap.write(&copy).unwrap();
        round_trip &= fs::read(&copy).unwrap() == *bytes;
        round_trip &= Snapshot::read(&copy).unwrap() == snap;
    }
    let flag = |ok: bool| if ok { 0.0 } else { 1.0 };
    Criterion {
        number: 11,
        title: "determinism and IO",
        checks: vec![
            Check::below("rerun files differing", flag(identical), 0.5),
            Check::below("snapshot round-trip mismatches", flag(round_trip), 0.5),
        ],
    }
}

fn main() {
    let (c1, c2, c3) = reconstruction();
    let (c9, c10) = justification();
    let criteria = [c1, c2, c3, dispersion(), irrotational(), divergence(), energy(), hamiltonian(), c9, c10, determinism()];
    for c in &criteria {
        c.print();
    }
    let failed = criteria.iter().filter(|c| !c.passed()).count();
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
