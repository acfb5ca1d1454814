//! Property tests over randomized states, fields and parameters.

use std::f64::consts::PI;

use khps_core::fft::FftPlan;
use khps_core::frame::FrameTransform;
use khps_core::laser::{cumulative_simpson, FieldCache, PulseParams};
use khps_core::observables::{expectation_x, half_line_masses, trapped_width};
use khps_core::phasespace::{wigner, WignerWindow};
use khps_core::potential::{kh_averaged_potential, PotentialModel};
use khps_core::propagator::{NoObserver, PropagationJob, Propagator};
use khps_core::tridiag::SymTridiagonal;
use khps_core::{Complex, Frame, SpatialGrid, Spectral, TimeGrid, WaveFunction};
use proptest::prelude::*;

fn grid() -> SpatialGrid {
    SpatialGrid::new(-100.0, 100.0, 1024).unwrap()
}

fn pulse() -> PulseParams {
    PulseParams::production()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fft_round_trip_and_parseval(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)) {
        let plan = FftPlan::new(64).unwrap();
        let orig: Vec<Complex> = seed.iter().map(|&(a, b)| Complex::new(a, b)).collect();
        let mut data = orig.clone();
        plan.forward(&mut data);
        let e_t: f64 = orig.iter().map(|z| z.norm_sqr()).sum();
        let e_f: f64 = data.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        prop_assert!((e_t - e_f).abs() < 1e-12 * e_t.max(1.0));
        plan.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn spectral_shifts_compose(x0 in -20.0f64..20.0, p0 in -1.0f64..1.0, a in -15.0f64..15.0, b in -15.0f64..15.0) {
        let g = grid();
        let sp = Spectral::new(g).unwrap();
        let psi = WaveFunction::gaussian(g, Frame::Lab, x0, 3.0, p0);
        let two = sp.shift(&sp.shift(&psi, a), b);
        let one = sp.shift(&psi, a + b);
        prop_assert!(two.max_abs_diff(&one) < 1e-10);
        prop_assert!((one.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!((expectation_x(&one) - (x0 + a + b)).abs() < 1e-6);
    }

    #[test]
    fn frame_round_trip_preserves_state(x0 in -10.0f64..10.0, p0 in -0.5f64..0.5, t in 0.0f64..1200.0) {
        let g = SpatialGrid::new(-200.0, 200.0, 2048).unwrap();
        let cache = FieldCache::build(pulse(), 0.025, pulse().t_final()).unwrap();
        let tr = FrameTransform::new(&cache, g).unwrap();
        let psi = WaveFunction::gaussian(g, Frame::Lab, x0, 2.5, p0);
        let kh = tr.lab_to_kh(&psi, t).unwrap();
        prop_assert!((kh.norm_sqr() - 1.0).abs() < 1e-10);
        let back = tr.kh_to_lab(&kh, t).unwrap();
        prop_assert!(back.max_abs_diff(&psi) < 1e-9);
    }

    #[test]
    fn absorber_free_steps_are_unitary(x0 in -5.0f64..5.0, p0 in -1.0f64..1.0, t0 in 0.0f64..1000.0) {
        let g = SpatialGrid::new(-150.0, 150.0, 1024).unwrap();
        let model = PotentialModel::default();
        let cache = FieldCache::build(pulse(), 0.025, pulse().t_final()).unwrap();
        let prop = Propagator::lab_full(g, model.sample(&g), cache, 0.05, None).unwrap();
        let job = PropagationJob::new(
            WaveFunction::gaussian(g, Frame::Lab, x0, 2.0, p0),
            TimeGrid::new(t0, 0.05, 200).unwrap(),
        );
        let out = prop.propagate(&job, &mut NoObserver).unwrap();
        prop_assert!(out.absorbed.abs() < 1e-12);
    }

    #[test]
    fn simpson_is_exact_for_quadratics(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, n in 3usize..60) {
        let h = 0.1;
        let f: Vec<f64> = (0..n).map(|k| { let t = k as f64 * h; c0 + c1 * t + c2 * t * t }).collect();
        let out = cumulative_simpson(&f, h);
        for (k, v) in out.iter().enumerate() {
            let t = k as f64 * h;
            let exact = c0 * t + c1 * t * t / 2.0 + c2 * t * t * t / 3.0;
            prop_assert!((v - exact).abs() < 1e-12 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn gaussian_wigner_matches_closed_form(x0 in -8.0f64..8.0, p0 in -0.3f64..0.3, sigma in 1.5f64..4.0) {
        let g = SpatialGrid::new(-100.0, 100.0, 2048).unwrap();
        let psi = WaveFunction::gaussian(g, Frame::Kh, x0, sigma, p0);
        let window = WignerWindow { x_min: -12.0, x_max: 12.0, n_x: 25, p_min: -0.6, p_max: 0.6, n_p: 25, xi_max: 60.0 };
        let w = wigner(&psi, &window, 0.0).unwrap();
        for i in 0..window.n_x {
            for j in 0..window.n_p {
                let (x, p) = (window.x(i), window.p(j));
                let exact = (-(x - x0).powi(2) / (2.0 * sigma * sigma) - 2.0 * sigma * sigma * (p - p0).powi(2)).exp() / PI;
                prop_assert!((w.at(i, j) - exact).abs() < 1e-8, "W({x}, {p}) = {} vs {exact}", w.at(i, j));
            }
        }
    }

    #[test]
    fn trapped_width_is_shift_invariant(x0 in -10.0f64..10.0, s in -20.0f64..20.0) {
        let g = grid();
        let a = WaveFunction::gaussian(g, Frame::Lab, x0, 2.0, 0.0);
        let b = WaveFunction::gaussian(g, Frame::Lab, x0 + s, 2.0, 0.0);
        let wa = trapped_width(&a, -60.0, 60.0).unwrap();
        let wb = trapped_width(&b, -60.0, 60.0).unwrap();
        prop_assert!((wa - wb).abs() < 1e-8);
        prop_assert!((wa - 2.0).abs() < 1e-6);
        let (l, r) = half_line_masses(&a, 60.0);
        prop_assert!(l + r <= 1.0 + 1e-12);
    }

    #[test]
    fn sturm_counts_match_bisection(d in proptest::collection::vec(-3.0f64..3.0, 12), e in proptest::collection::vec(0.1f64..2.0, 11)) {
        let m = SymTridiagonal::new(d, e);
        for k in 0..m.len() {
            let lam = m.eigenvalue(k);
            prop_assert_eq!(m.count_below(lam - 1e-9), k);
            let v = m.eigenvector(lam, &[]);
            prop_assert!(m.residual(lam, &v) < 1e-8);
        }
    }

    #[test]
    fn averaged_potential_is_even_and_bounded(alpha0 in 2.0f64..15.0) {
        let g = SpatialGrid::new(-64.0, 64.0, 512).unwrap();
        let model = PotentialModel::default();
        let avg = kh_averaged_potential(&model, &g, alpha0, 256).unwrap();
        prop_assert!(avg.evenness_defect() < 1e-14);
        let vmin = model.value(0.0);
        for &v in avg.samples() {
            prop_assert!(v <= 0.0 && v >= vmin);
        }
    }
}
