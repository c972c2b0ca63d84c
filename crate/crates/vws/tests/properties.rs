//! Property tests over randomly drawn fields and parameters.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use vws::dynamics::{Model, Params, TimeStep};
use vws::geometry::GeometryCache;
use vws::harness::linear_frequency;
use vws::io::Snapshot;
use vws::samples;
use vws::spectral::{Extension, FilterSpec, Grid, SurfaceField, VectorVolumeField, VolumeField};
use vws::swmodel::{self, SWState};

fn grid(nx: usize, nz: usize) -> Arc<Grid> {
    Arc::new(Grid::new(nx, nz, std::f64::consts::TAU).unwrap())
}

fn nx_strategy() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 32, 64])
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn values(nx: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, nx)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_round_trip(v in nx_strategy().prop_flat_map(values)) {
        let g = grid(v.len(), 5);
        let back = g.ifft(&g.fft(&v));
        prop_assert!(rel(&back, &v) < 1e-13);
    }

    #[test]
    fn parseval(v in nx_strategy().prop_flat_map(values)) {
        let g = grid(v.len(), 5);
        let f = SurfaceField::new(v.clone());
        let physical = (g.dx_spacing() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let spectral = g.spectral_l2_norm(&f);
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn hodge_parts_are_orthogonal(
        (fx, fy) in nx_strategy().prop_flat_map(|n| (values(n), values(n)))
    ) {
        let g = grid(fx.len(), 5);
        let p = g.hodge_project(&SurfaceField::new(fx), &SurfaceField::new(fy));
        let dot = |a: &SurfaceField, b: &SurfaceField| g.surface_integral(&a.mul(b));
        let inner = dot(&p.gradient.0, &p.orthogonal.0) + dot(&p.gradient.1, &p.orthogonal.1);
        let norm = |u: &(SurfaceField, SurfaceField)| (dot(&u.0, &u.0) + dot(&u.1, &u.1)).sqrt();
        prop_assert!(inner.abs() <= 1e-12 * norm(&p.gradient) * norm(&p.orthogonal) + f64::MIN_POSITIVE);
    }

    #[test]
    fn multipliers_are_linear(
        (f, h) in nx_strategy().prop_flat_map(|n| (values(n), values(n))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        mu in 0.01f64..2.0,
    ) {
        let g = grid(f.len(), 5);
        let sm = mu.sqrt();
        let symbol = |k: f64| Complex64::new(0.0, k) * (sm * k).tanh() + (1.0 + k * k).sqrt();
        let (f, h) = (SurfaceField::new(f), SurfaceField::new(h));
        let m = |u: &SurfaceField| g.apply_multiplier(u, symbol, 1e-12).unwrap();
        let lhs = m(&f.scale(a).add(&h.scale(b)));
        let rhs = m(&f).scale(a).add(&m(&h).scale(b));
        prop_assert!(rel(&lhs.values, &rhs.values) < 1e-13 || lhs.sub(&rhs).max_abs() < 1e-13);
    }

    #[test]
    fn filters_damp_without_amplifying(alpha in 1.0f64..40.0, order in 2u32..20, k in 0.0f64..64.0) {
        let spec = FilterSpec { alpha, order: order * 2, two_thirds: false };
        let s = spec.factor(k, 32.0, 64);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(spec.factor(0.0, 32.0, 64), 1.0);
    }

    #[test]
    fn dispersion_relation_is_subcritical_and_increasing(mu in 1e-4f64..4.0, k in 0.1f64..20.0) {
        let w = linear_frequency(mu, k);
        prop_assert!(w > 0.0 && w <= k * (1.0 + 1e-15));
        prop_assert!(linear_frequency(mu, k * 1.1) > w);
        // Shallow-water limit: ω → k as √μ k → 0.
        let shallow = linear_frequency(mu * 1e-14, k);
        prop_assert!((shallow - k).abs() < 1e-6 * k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cosh_extension_is_discretely_harmonic(seed in 0u64..10_000, mu in 0.1f64..1.0) {
        let g = grid(32, 24);
        let v = samples::surface(&g, &mut samples::rng(seed), 1.0, 4);
        let phi = g.harmonic_extension(&v, Extension::CoshNeumannBottom, mu).unwrap();
        let lap = g.dx_volume(&g.dx_volume(&phi)).scale(mu).add(&g.dz_volume(&g.dz_volume(&phi)));
        prop_assert!(lap.max_abs() < 1e-8, "residual {:e}", lap.max_abs());
        prop_assert!(phi.surface().sub(&v).max_abs() < 1e-13);
    }

    #[test]
    fn flat_geometry_pulls_back_to_flat_operators(seed in 0u64..10_000, eps in 0.01f64..1.0, mu in 0.05f64..1.0) {
        let g = grid(16, 12);
        let geo = GeometryCache::new(g.clone(), &SurfaceField::zeros(16), eps, mu, 0.05).unwrap();
        let f = samples::volume(&g, &mut samples::rng(seed), 1.0, 4);
        prop_assert!(geo.dx_sigma(&f).sub(&g.dx_volume(&f)).max_abs() < 1e-13);
        prop_assert!(geo.dz_sigma(&f).sub(&g.dz_volume(&f)).max_abs() < 1e-13);
        prop_assert!(geo.jac.sub(&VolumeField::constant(&g, 1.0)).max_abs() == 0.0);
    }

    #[test]
    fn curl_grad_and_div_curl_vanish(seed in 0u64..10_000, eps in 0.1f64..1.0, mu in 0.1f64..1.0) {
        let g = grid(64, 20);
        let mut r = samples::rng(seed);
        let zeta = samples::surface(&g, &mut r, 0.2, 3);
        let geo = GeometryCache::new(g.clone(), &zeta, eps, mu, 0.05).unwrap();
        let f = samples::volume(&g, &mut r, 1.0, 3);
        let cg = geo.scaled_curl(&geo.scaled_grad(&f)).max_abs();
        let a = VectorVolumeField::new(
            samples::volume(&g, &mut r, 1.0, 3),
            samples::volume(&g, &mut r, 1.0, 3),
            samples::volume(&g, &mut r, 1.0, 3),
        );
        let dc = geo.scaled_div(&geo.scaled_curl(&a)).max_abs();
        prop_assert!(cg < 1e-9, "curl grad {cg:e}");
        prop_assert!(dc < 1e-9, "div curl {dc:e}");
    }

    #[test]
    fn integration_by_parts_holds(seed in 0u64..10_000, eps in 0.1f64..1.0, mu in 0.1f64..1.0) {
        let g = grid(64, 20);
        let mut r = samples::rng(seed);
        let zeta = samples::surface(&g, &mut r, 0.2, 3);
        let geo = GeometryCache::new(g.clone(), &zeta, eps, mu, 0.05).unwrap();
        let f = samples::volume(&g, &mut r, 1.0, 3);
        let gv = VectorVolumeField::new(
            samples::volume(&g, &mut r, 1.0, 3),
            VolumeField::zeros(&g),
            samples::volume(&g, &mut r, 1.0, 3),
        );
        let lhs = geo.volume_integral(&geo.scaled_grad(&f).dot(&gv))
            + geo.volume_integral(&f.mul(&geo.scaled_div(&gv)));
        let top = g.surface_integral(&f.surface().mul(&geo.surface_normal_flux(&gv)));
        let bottom = g.surface_integral(&f.bottom().mul(&gv.z.bottom()));
        prop_assert!((lhs - (top - bottom)).abs() < 1e-8);
    }

    #[test]
    fn snapshot_bytes_round_trip(
        (nx, nz) in (prop::sample::select(vec![4usize, 8, 16]), 3usize..12),
        t in -1e6f64..1e6,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut r = samples::rng(seed);
        let mut v = |n: usize| (0..n).map(|_| r.gen_range(-1e3..1e3)).collect::<Vec<f64>>();
        let snap = Snapshot {
            nx, nz, t, eps: 0.1, mu: 0.25, lx: std::f64::consts::TAU,
            zeta: v(nx), psi: v(nx), omega: [v(nx * nz), v(nx * nz), v(nx * nz)],
        };
        let bytes = snap.to_bytes();
        prop_assert_eq!(bytes.len(), Snapshot::byte_len(nx, nz));
        let back = Snapshot::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &snap);
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn truncated_snapshots_are_rejected(cut in 1usize..100) {
        let g = grid(8, 5);
        let p = Params { nx: 8, nz: 5, ..Params::default() };
        let bytes = Snapshot::from_state(&vws::dynamics::State::rest(&g), &p).to_bytes();
        let cut = cut.min(bytes.len());
        prop_assert!(Snapshot::from_bytes(&bytes[..bytes.len() - cut]).is_err());
    }

    #[test]
    fn shallow_water_conserves_mass(seed in 0u64..10_000) {
        let g = grid(32, 5);
        let p = Params { eps: 0.1, mu: 0.01, nx: 32, nz: 5, time_step: TimeStep::Fixed(0.01), ..Params::default() };
        let mut r = samples::rng(seed);
        let s = SWState {
            t: 0.0,
            zeta: samples::surface(&g, &mut r, 0.2, 3).add_scalar(0.05),
            vbar: (samples::surface(&g, &mut r, 0.2, 3), samples::surface(&g, &mut r, 0.2, 3)),
            q: (samples::surface(&g, &mut r, 0.2, 3), samples::surface(&g, &mut r, 0.2, 3)),
        };
        let end = swmodel::sw_run(&g, &s, &p, 0.2).unwrap();
        let (m0, m1) = (g.surface_integral(&s.zeta), g.surface_integral(&end.zeta));
        prop_assert!((m1 - m0).abs() < 1e-13, "{m0} -> {m1}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn full_model_conserves_mass(seed in 0u64..10_000) {
        let model = Model::new(Params { nx: 16, nz: 9, ..Params::default() }).unwrap();
        let s = samples::state(&model, seed, 0.1).unwrap();
        let rhs = model.rhs(&s).unwrap();
        let rate = model.grid.surface_integral(&rhs.zeta);
        prop_assert!(rate.abs() < 1e-12, "d/dt of the mass {rate:e}");
    }

    #[test]
    fn projection_is_idempotent(seed in 0u64..10_000) {
        let model = Model::new(Params { eps: 0.3, mu: 0.5, nx: 16, nz: 13, ..Params::default() }).unwrap();
        let mut r = samples::rng(seed);
        let zeta = samples::surface(&model.grid, &mut r, 0.1, 2);
        let geo = model.geometry(&zeta).unwrap();
        let raw = VectorVolumeField::new(
            samples::volume(&model.grid, &mut r, 1.0, 3),
            samples::volume(&model.grid, &mut r, 1.0, 3),
            samples::volume(&model.grid, &mut r, 1.0, 3),
        );
        let once = model.solver.project_div_free(&geo, &raw).unwrap();
        let twice = model.solver.project_div_free(&geo, &once).unwrap();
        prop_assert!(twice.sub(&once).max_abs() < 1e-9 * once.max_abs());
    }
}
