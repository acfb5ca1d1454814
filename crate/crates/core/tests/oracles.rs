//! Closed-form and independently computed references for the solvers.

use std::f64::consts::PI;

use khps_core::eigen::{bound_states_fd, imaginary_time_ground_state, kh_eigenpairs, FdDomain, ImaginaryTimeOptions};
use khps_core::laser::{eps0_from_intensity, FieldCache, PulseParams};
use khps_core::observables::{autocorrelation, expectation_x, population};
use khps_core::potential::{averaged_value, kh_averaged_potential, PotentialModel};
use khps_core::propagator::{time_evolution_phase, NoObserver, PropagationJob, Propagator};
use khps_core::{Complex, Frame, SpatialGrid, Spectral, TimeGrid, WaveFunction};

fn variance(psi: &WaveFunction) -> f64 {
    let g = psi.grid();
    let m = expectation_x(psi);
    g.points()
        .zip(psi.density())
        .map(|(x, d)| (x - m) * (x - m) * d)
        .sum::<f64>()
        * g.dx()
}

/// Plain trapezoid running integral, deliberately different from the
/// Simpson scheme the field cache uses.
fn running_trapezoid(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let h = t / n as f64;
    let mut s = 0.5 * (f(0.0) + f(t));
    for k in 1..n {
        s += f(k as f64 * h);
    }
    s * h
}

#[test]
fn free_gaussian_in_uniform_field_follows_ehrenfest_and_spreads() {
    let g = SpatialGrid::new(-400.0, 400.0, 4096).unwrap();
    let pulse = PulseParams::new(0.01, 0.0628, 2.0, 4.0, 6.0).unwrap();
    let cache = FieldCache::build(pulse, 0.025, pulse.t_final()).unwrap();
    let prop = Propagator::lab_full(g, vec![0.0; g.len()], cache, 0.05, None).unwrap();
    let (x0, sigma, p0) = (-5.0, 3.0, 0.2);
    let t_end = 300.0;
    let job = PropagationJob::new(
        WaveFunction::gaussian(g, Frame::Lab, x0, sigma, p0),
        TimeGrid::spanning(0.0, t_end, 0.05).unwrap(),
    );
    let out = prop.propagate(&job, &mut NoObserver).unwrap();
    let psi = out.final_state;

    // d<p>/dt = −ε, so <x>(t) = x0 + p0 t − ∫₀ᵗ (t − τ) ε(τ) dτ.
    let drift = running_trapezoid(|tau| (t_end - tau) * pulse.field(tau), t_end, 200_000);
    let expected_x = x0 + p0 * t_end - drift;
    assert!(
        (expectation_x(&psi) - expected_x).abs() < 1e-6,
        "{} vs {expected_x}",
        expectation_x(&psi)
    );

    let expected_var = sigma * sigma + (t_end / (2.0 * sigma)).powi(2);
    assert!((variance(&psi) - expected_var).abs() < 1e-6 * expected_var);
}

#[test]
fn field_cache_matches_independent_integrals() {
    let pulse = PulseParams::production();
    let cache = FieldCache::build(pulse, 0.0125, pulse.t_final()).unwrap();
    for &t in &[37.3, 200.05, 480.0, 1333.3, 2281.7] {
        let a = -running_trapezoid(|tau| pulse.field(tau), t, 400_000);
        // α(t) = ∫₀ᵗ A = −∫₀ᵗ (t − τ) ε(τ) dτ.
        let alpha = -running_trapezoid(|tau| (t - tau) * pulse.field(tau), t, 400_000);
        let s = cache.sample(t);
        assert!((s.a - a).abs() < 1e-8, "A({t}) = {} vs {a}", s.a);
        assert!((s.alpha - alpha).abs() < 1e-6, "α({t}) = {} vs {alpha}", s.alpha);
    }
}

#[test]
fn flat_top_quiver_matches_closed_form_amplitude() {
    let pulse = PulseParams::production();
    assert!((pulse.alpha0() - pulse.eps0 / (pulse.omega * pulse.omega)).abs() < 1e-12);
    assert!((pulse.alpha0() - 10.2188).abs() < 1e-3);
    let cache = FieldCache::build(pulse, 0.0125, pulse.t_final()).unwrap();
    // Ramp transients leave a constant offset in A and a linear drift in α;
    // the oscillating part on the flat top has the closed-form amplitude.
    let t_mid = 0.5 * (pulse.ramp_end() + pulse.flat_end());
    let period = pulse.period();
    let n = 4000;
    let (mut a_max, mut a_min) = (f64::MIN, f64::MAX);
    for k in 0..n {
        let a = cache.sample(t_mid + period * k as f64 / n as f64).a;
        a_max = a_max.max(a);
        a_min = a_min.min(a);
    }
    assert!((0.5 * (a_max - a_min) - pulse.eps0 / pulse.omega).abs() < 1e-6);
}

#[test]
fn peak_field_from_intensity() {
    assert!((eps0_from_intensity(5.7e13) - 0.040301).abs() < 5e-6);
    assert!((eps0_from_intensity(3.50944e16) - 1.0).abs() < 1e-4);
}

#[test]
fn fd_harmonic_levels() {
    let v = |x: f64| 0.5 * x * x - 10.0;
    let spec = bound_states_fd(
        v,
        &FdDomain {
            half_width: 15.0,
            dx: 0.01,
        },
    )
    .unwrap();
    assert!(spec.states.len() >= 8);
    let h = 0.01f64;
    for (n, s) in spec.states.iter().take(8).enumerate() {
        let m = n as f64;
        // Leading three-point stencil error: −h²(2n² + 2n + 1)/32.
        let exact = m + 0.5 - 10.0 - h * h * (2.0 * m * m + 2.0 * m + 1.0) / 32.0;
        assert!((s.energy - exact).abs() < 1e-7, "level {n}: {} vs {exact}", s.energy);
    }
}

#[test]
fn imaginary_time_harmonic_ground_state() {
    let g = SpatialGrid::new(-20.0, 20.0, 512).unwrap();
    let v: Vec<f64> = g.points().map(|x| 0.5 * x * x).collect();
    let gs = imaginary_time_ground_state(
        &v,
        &g,
        &ImaginaryTimeOptions {
            dt_imag: 0.01,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((gs.energy - 0.5).abs() < 1e-6, "{}", gs.energy);
    let exact = WaveFunction::from_fn(g, Frame::Lab, |x| {
        Complex::new((-x * x / 2.0).exp() / PI.powf(0.25), 0.0)
    });
    assert!(population(&gs.state, &exact).unwrap() > 1.0 - 1e-8);
}

#[test]
fn non_integer_shift_of_gaussian_is_exact() {
    let g = SpatialGrid::new(-50.0, 50.0, 512).unwrap();
    let sp = Spectral::new(g).unwrap();
    let psi = WaveFunction::gaussian(g, Frame::Lab, 1.0, 2.0, 0.3);
    let s = 7.0 * g.dx() + 0.37 * g.dx();
    let shifted = sp.shift(&psi, s);
    // ψ(x − s) for a Gaussian with momentum p0, sampled directly.
    let direct = WaveFunction::gaussian(g, Frame::Lab, 1.0 + s, 2.0, 0.3);
    let overlap = direct.inner(&shifted).unwrap();
    assert!((overlap.norm() - 1.0).abs() < 1e-12);
    // The shift translates momentum eigenstates by a phase only, so the
    // overlap phase is the constant −p0·s.
    let phase = overlap.arg() + 0.3 * s;
    let wrapped = (phase + PI).rem_euclid(2.0 * PI) - PI;
    assert!(wrapped.abs() < 1e-10, "{wrapped}");
}

#[test]
fn averaged_potential_matches_dense_quadrature() {
    let model = PotentialModel::default();
    let g = SpatialGrid::new(-64.0, 64.0, 256).unwrap();
    let alpha0 = 10.2188;
    let avg = kh_averaged_potential(&model, &g, alpha0, 2048).unwrap();
    for &x in &[0.0, 3.5, -8.6, 12.25, 40.0] {
        let dense = running_trapezoid(|u| model.value(x + alpha0 * u.sin()), 2.0 * PI, 100_000) / (2.0 * PI);
        assert!(
            (avg.value_at(x) - dense).abs() < 1e-10,
            "V0({x}) = {} vs {dense}",
            avg.value_at(x)
        );
        let sines: Vec<f64> = (0..2048).map(|k| (2.0 * PI * k as f64 / 2048.0).sin()).collect();
        assert!((averaged_value(&model, x, alpha0, &sines) - dense).abs() < 1e-10);
    }
}

#[test]
fn averaged_eigenstates_are_stationary_and_superpositions_beat() {
    let model = PotentialModel::default();
    let g = SpatialGrid::new(-200.0, 200.0, 2048).unwrap();
    let avg = kh_averaged_potential(&model, &g, 10.2188, 1024).unwrap();
    let (_, pairs) = kh_eigenpairs(
        &avg,
        &FdDomain {
            half_width: 200.0,
            dx: 0.1,
        },
    )
    .unwrap();
    assert!(pairs.len() >= 2);
    let prop = Propagator::kh_averaged(&avg, 0.05, None).unwrap();
    let (e0, e1) = (prop.energy(&pairs[0].state), prop.energy(&pairs[1].state));
    let t_end = 400.0;
    let time = TimeGrid::spanning(0.0, t_end, 0.05).unwrap();
    let out = prop
        .propagate(&PropagationJob::new(pairs[0].state.clone(), time), &mut NoObserver)
        .unwrap();
    let c = autocorrelation(&pairs[0].state, &out.final_state).unwrap();
    assert!(
        (c - time_evolution_phase(e0, t_end)).norm() < 1e-5,
        "{c} vs {}",
        time_evolution_phase(e0, t_end)
    );

    // Equal-weight superposition: |⟨ψ(0)|ψ(t)⟩|² = (1 + cos ω₁₀t)/2.
    let mut coh = pairs[0].state.clone();
    for (a, b) in coh.amplitudes_mut().iter_mut().zip(pairs[1].state.amplitudes()) {
        *a = (*a + *b) / 2f64.sqrt();
    }
    let out = prop
        .propagate(&PropagationJob::new(coh.clone(), time), &mut NoObserver)
        .unwrap();
    let c = autocorrelation(&coh, &out.final_state).unwrap();
    let expected = 0.5 * (1.0 + ((e1 - e0) * t_end).cos());
    assert!((c.norm_sqr() - expected).abs() < 1e-5, "{} vs {expected}", c.norm_sqr());
}
