//! Bound states: imaginary-time relaxation on the propagation grid and a
//! three-point finite-difference eigensolver on a separate Dirichlet domain,
//! with band-limited resampling between the two.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::potential::AveragedPotential;
use crate::tridiag::SymTridiagonal;
use crate::{Complex, Error, Frame, Result, SpatialGrid, Spectral, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }
}

/// Parity test threshold on `max|ψ(x) ∓ ψ(−x)|` for unit-norm states.
pub const PARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub energy: f64,
    pub state: WaveFunction,
    pub index: usize,
    pub parity: Parity,
}

/// Classifies a sampled function on a grid symmetric about 0 (`mirror(j)`
/// gives the index of `−x_j`).
fn classify(values: &[f64], mirror: impl Fn(usize) -> Option<usize>) -> Parity {
    let (mut even, mut odd) = (0.0f64, 0.0f64);
    for (j, &v) in values.iter().enumerate() {
        if let Some(m) = mirror(j) {
            even = even.max((v - values[m]).abs());
            odd = odd.max((v + values[m]).abs());
        }
    }
    if even < PARITY_TOL {
        Parity::Even
    } else if odd < PARITY_TOL {
        Parity::Odd
    } else {
        Parity::None
    }
}

fn grid_mirror(grid: &SpatialGrid) -> impl Fn(usize) -> Option<usize> + '_ {
    let n = grid.len();
    let centered = (grid.x_min() + grid.x_max()).abs() < 1e-9 * grid.dx();
    move |j| if !centered || j == 0 { None } else { Some(n - j) }
}

/// Parity of the real part of a state on a grid centred on `x = 0`.
pub fn parity_of(psi: &WaveFunction) -> Parity {
    let re: Vec<f64> = psi.amplitudes().iter().map(|z| z.re).collect();
    let imag = psi.amplitudes().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > PARITY_TOL {
        return Parity::None;
    }
    classify(&re, grid_mirror(psi.grid()))
}

/// Sign convention: the largest-magnitude sample with `x ≤ 0` is positive.
fn fix_sign(values: &mut [f64], xs: impl Iterator<Item = f64>) {
    let mut best = (0.0f64, 0.0f64);
    for (x, &v) in xs.zip(values.iter()) {
        if x <= 0.0 && v.abs() > best.0 {
            best = (v.abs(), v);
        }
    }
    if best.1 < 0.0 {
        for v in values.iter_mut() {
            *v = -*v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryTimeOptions {
    pub dt_imag: f64,
    pub tol: f64,
    pub max_steps: usize,
    /// Width of the even Gaussian seed.
    pub seed_sigma: f64,
}

impl Default for ImaginaryTimeOptions {
    fn default() -> Self {
        Self {
            dt_imag: 0.5,
            tol: 1e-10,
            max_steps: 1_000_000,
            seed_sigma: 4.0,
        }
    }
}

/// Relaxes an even Gaussian seed in imaginary time with a Strang split step,
/// renormalizing every step. The reported energy is the Rayleigh quotient;
/// an energy at or above the potential at the grid edges is not bound.
pub fn imaginary_time_ground_state(
    potential: &[f64],
    grid: &SpatialGrid,
    opts: &ImaginaryTimeOptions,
) -> Result<EigenPair> {
    if potential.len() != grid.len() {
        return Err(Error::param(
            "potential",
            format!("{} samples for a {}-point grid", potential.len(), grid.len()),
        ));
    }
    if !(opts.dt_imag > 0.0) {
        return Err(Error::param(
            "dt_imag",
            format!("must be positive, got {}", opts.dt_imag),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {}", opts.tol)));
    }
    let spectral = Spectral::new(*grid)?;
    let center = 0.5 * (grid.x_min() + grid.x_max());
    let mut psi = WaveFunction::gaussian(*grid, Frame::Lab, center, opts.seed_sigma, 0.0);
    let half_v: Vec<f64> = potential.iter().map(|v| (-0.5 * opts.dt_imag * v).exp()).collect();
    let kin: Vec<f64> = spectral
        .fft_momenta()
        .iter()
        .map(|p| (-0.5 * p * p * opts.dt_imag).exp())
        .collect();
    let mut energy = spectral.energy(&psi, potential);
    let mut trace: Vec<f64> = Vec::new();
    for step in 1..=opts.max_steps {
        {
            let data = psi.amplitudes_mut();
            for (z, f) in data.iter_mut().zip(&half_v) {
                *z *= *f;
            }
            spectral.forward(data);
            for (z, f) in data.iter_mut().zip(&kin) {
                *z *= *f;
            }
            spectral.inverse(data);
            for (z, f) in data.iter_mut().zip(&half_v) {
                *z *= *f;
            }
        }
        psi.normalize()?;
        let e = spectral.energy(&psi, potential);
        if !e.is_finite() {
            return Err(Error::NonFinite {
                step,
                t: step as f64 * opts.dt_imag,
            });
        }
        let delta = (e - energy).abs();
        energy = e;
        if trace.len() == 8 {
            trace.remove(0);
        }
        trace.push(e);
        if delta < opts.tol {
            if energy >= potential[0].min(potential[potential.len() - 1]) {
                return Err(Error::NoBoundState(energy));
            }
            // Strip the imaginary round-off, fix the sign convention.
            let mut re: Vec<f64> = psi.amplitudes().iter().map(|z| z.re).collect();
            fix_sign(&mut re, grid.points());
            let parity = classify(&re, grid_mirror(grid));
            let mut state = WaveFunction::new(
                *grid,
                re.into_iter().map(|v| Complex::new(v, 0.0)).collect(),
                Frame::Lab,
            )?;
            state.normalize()?;
            let energy = spectral.energy(&state, potential);
            return Ok(EigenPair {
                energy,
                state,
                index: 0,
                parity,
            });
        }
    }
    Err(Error::NotConverged {
        steps: opts.max_steps,
        trace,
    })
}

/// Dirichlet domain `(−half_width, half_width)` with interior nodes
/// `x_j = −half_width + j·dx`, `j = 1..n−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdDomain {
    pub half_width: f64,
    pub dx: f64,
}

impl Default for FdDomain {
    fn default() -> Self {
        Self {
            half_width: 300.0,
            dx: 0.05,
        }
    }
}

impl FdDomain {
    fn intervals(&self) -> Result<usize> {
        if !(self.half_width > 0.0 && self.dx > 0.0) {
            return Err(Error::param(
                "fd domain",
                format!("need positive half width and dx, got {self:?}"),
            ));
        }
        let n = (2.0 * self.half_width / self.dx).round() as usize;
        if n < 4 {
            return Err(Error::param("fd domain", format!("only {n} intervals")));
        }
        Ok(n)
    }

    pub fn interior_points(&self) -> Result<Vec<f64>> {
        let n = self.intervals()?;
        let h = 2.0 * self.half_width / n as f64;
        Ok((1..n).map(|j| -self.half_width + j as f64 * h).collect())
    }
}

/// Real finite-difference eigenvector on an [`FdDomain`], unit norm under
/// `dx·Σψ²`.
#[derive(Debug, Clone)]
pub struct FdState {
    pub energy: f64,
    pub index: usize,
    pub parity: Parity,
    /// First interior node.
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FdSpectrum {
    /// Bound states, ascending.
    pub states: Vec<FdState>,
    /// Negative eigenvalues within `near_zero` of 0 that were dropped.
    pub discarded: Vec<f64>,
}

/// Threshold under which a negative FD eigenvalue is treated as a
/// discretized continuum state.
pub const NEAR_ZERO: f64 = 1e-6;
/// Largest tolerated unit-norm amplitude next to a Dirichlet wall.
pub const EDGE_TOL: f64 = 1e-6;

/// All `E < 0` eigenpairs of `−½∂² + V` discretized with the three-point
/// stencil on `domain`.
pub fn bound_states_fd(potential: impl Fn(f64) -> f64, domain: &FdDomain) -> Result<FdSpectrum> {
    let xs = domain.interior_points()?;
    let h = 2.0 * domain.half_width / (xs.len() + 1) as f64;
    let diag: Vec<f64> = xs.iter().map(|&x| 1.0 / (h * h) + potential(x)).collect();
    let off = vec![-0.5 / (h * h); xs.len() - 1];
    let t = SymTridiagonal::new(diag, off);
    let count = t.count_below(0.0);
    let mut states = Vec::new();
    let mut discarded = Vec::new();
    let mut previous: Vec<Vec<f64>> = Vec::new();
    let n = xs.len();
    for k in 0..count {
        let lambda = t.eigenvalue(k);
        if lambda > -NEAR_ZERO {
            discarded.push(lambda);
            continue;
        }
        let v = t.eigenvector(lambda, &previous);
        previous.push(v.clone());
        let scale = 1.0 / h.sqrt();
        let mut values: Vec<f64> = v.iter().map(|a| a * scale).collect();
        let edge = values[0].abs().max(values[n - 1].abs());
        if edge > EDGE_TOL {
            return Err(Error::DomainTooNarrow {
                index: k,
                amplitude: edge,
            });
        }
        fix_sign(&mut values, xs.iter().copied());
        let parity = classify(&values, |j| Some(n - 1 - j));
        states.push(FdState {
            energy: lambda,
            index: k,
            parity,
            x0: xs[0],
            dx: h,
            values,
        });
    }
    Ok(FdSpectrum { states, discarded })
}

impl FdState {
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    /// Band-limited (Whittaker) interpolant of the samples at `x`; zero
    /// outside the Dirichlet domain.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.values.len();
        let u = (x - self.x0) / self.dx;
        if u < -1.0 || u > n as f64 {
            return 0.0;
        }
        let nearest = u.round();
        if (u - nearest).abs() < 1e-12 {
            let j = nearest as isize;
            return if j >= 0 && (j as usize) < n {
                self.values[j as usize]
            } else {
                0.0
            };
        }
        // Σ ψ_j sin(π(u−j))/(π(u−j)) with sin(π(u−j)) = (−1)^j sin(πu).
        let mut acc = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let term = v / (u - j as f64);
            acc += if j % 2 == 0 { term } else { -term };
        }
        acc * (PI * u).sin() / PI
    }

    /// Resamples onto `grid`, renormalizes and replaces the energy by the
    /// Rayleigh quotient for `potential` sampled on `grid`.
    pub fn resample(&self, grid: &SpatialGrid, potential: &[f64], frame: Frame) -> Result<EigenPair> {
        let spectral = Spectral::new(*grid)?;
        let lo = self.x0 - self.dx;
        let hi = self.x(self.values.len());
        let mut values: Vec<f64> = grid
            .points()
            .map(|x| if x <= lo || x >= hi { 0.0 } else { self.interpolate(x) })
            .collect();
        fix_sign(&mut values, grid.points());
        let mut state = WaveFunction::new(*grid, values.into_iter().map(|v| Complex::new(v, 0.0)).collect(), frame)?;
        state.normalize()?;
        let energy = spectral.energy(&state, potential);
        let parity = parity_of(&state);
        Ok(EigenPair {
            energy,
            state,
            index: self.index,
            parity,
        })
    }
}

/// KH eigenpairs of `p²/2 + V₀`: finite differences on `domain`, then
/// resampled onto the averaged potential's grid in the KH frame.
pub fn kh_eigenpairs(avg: &AveragedPotential, domain: &FdDomain) -> Result<(FdSpectrum, Vec<EigenPair>)> {
    let spectrum = bound_states_fd(|x| avg.value_at(x), domain)?;
    let pairs = spectrum
        .states
        .iter()
        .map(|s| s.resample(avg.grid(), avg.samples(), Frame::Kh))
        .collect::<Result<Vec<_>>>()?;
    Ok((spectrum, pairs))
}

/// `Σ w_i φ_i`, normalized. The states must share grid and frame.
pub fn coherent_superposition(a: &EigenPair, b: &EigenPair, weights: (Complex, Complex)) -> Result<WaveFunction> {
    a.state.check_compatible(&b.state)?;
    let amps = a
        .state
        .amplitudes()
        .iter()
        .zip(b.state.amplitudes())
        .map(|(x, y)| weights.0 * x + weights.1 * y)
        .collect();
    let mut psi = WaveFunction::new(*a.state.grid(), amps, a.state.frame())?;
    psi.normalize()?;
    Ok(psi)
}

/// `|ω₁₀| = |E₁ − E₀|` and `T₁₀ = 2π/ω₁₀`.
pub fn beat(e0: f64, e1: f64) -> (f64, f64) {
    let w = (e1 - e0).abs();
    (w, 2.0 * PI / w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{kh_averaged_potential, PotentialModel};

    #[test]
    fn harmonic_oscillator_self_test() {
        let grid = SpatialGrid::new(-20.0, 20.0, 512).unwrap();
        let v: Vec<f64> = grid.points().map(|x| 0.5 * x * x).collect();
        let opts = ImaginaryTimeOptions {
            dt_imag: 0.01,
            tol: 1e-13,
            max_steps: 100_000,
            seed_sigma: 2.0,
        };
        let gs = imaginary_time_ground_state(&v, &grid, &opts).unwrap();
        assert!((gs.energy - 0.5).abs() < 1e-6, "{}", gs.energy);
        assert_eq!(gs.parity, Parity::Even);
        let j = grid.nearest_index(0.0);
        let oracle = PI.powf(-0.25);
        assert!((gs.state.amplitudes()[j].re - oracle).abs() < 1e-4);
    }

    #[test]
    fn positive_potential_has_no_bound_state() {
        let grid = SpatialGrid::new(-50.0, 50.0, 256).unwrap();
        let v: Vec<f64> = grid.points().map(|x| 0.1 * (-x * x).exp()).collect();
        let opts = ImaginaryTimeOptions {
            max_steps: 200_000,
            ..Default::default()
        };
        let r = imaginary_time_ground_state(&v, &grid, &opts);
        assert!(matches!(
            r,
            Err(Error::NoBoundState(_)) | Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn non_convergence_reports_trace() {
        let grid = SpatialGrid::new(-20.0, 20.0, 256).unwrap();
        let v: Vec<f64> = grid.points().map(|x| 0.5 * x * x).collect();
        let opts = ImaginaryTimeOptions {
            max_steps: 3,
            tol: 1e-300,
            ..Default::default()
        };
        match imaginary_time_ground_state(&v, &grid, &opts) {
            Err(Error::NotConverged { steps, trace }) => {
                assert_eq!(steps, 3);
                assert_eq!(trace.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fd_shifted_oscillator_against_closed_form() {
        // x²/2 − 5 has E_n = n + ½ − 5, so exactly five negative levels.
        let domain = FdDomain {
            half_width: 10.0,
            dx: 0.01,
        };
        let spec = bound_states_fd(|x| 0.5 * x * x - 5.0, &domain).unwrap();
        assert_eq!(spec.states.len(), 5);
        for (n, s) in spec.states.iter().enumerate() {
            assert!(
                (s.energy - (n as f64 + 0.5 - 5.0)).abs() < 3e-4,
                "level {n}: {}",
                s.energy
            );
            let expected = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
            assert_eq!(s.parity, expected);
            let norm: f64 = s.values.iter().map(|v| v * v).sum::<f64>() * s.dx;
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fd_rejects_narrow_domain() {
        let domain = FdDomain {
            half_width: 6.0,
            dx: 0.05,
        };
        let model = PotentialModel::default();
        let r = bound_states_fd(|x| model.value(x), &domain);
        assert!(matches!(r, Err(Error::DomainTooNarrow { .. })));
    }

    #[test]
    fn sinc_interpolation_is_exact_at_nodes_and_band_limited() {
        let dx = 0.05;
        let values: Vec<f64> = (0..2001)
            .map(|j| (-((j as f64 - 1000.0) * dx).powi(2) / 8.0).exp())
            .collect();
        let s = FdState {
            energy: -1.0,
            index: 0,
            parity: Parity::Even,
            x0: -50.0,
            dx,
            values,
        };
        assert_eq!(s.interpolate(0.0), 1.0);
        for x in [0.013, 1.234, -3.3333] {
            let exact = (-(x * x) / 8.0).exp();
            assert!((s.interpolate(x) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn superposition_weights() {
        let grid = SpatialGrid::new(-40.0, 40.0, 512).unwrap();
        let mk = |x0: f64, idx| EigenPair {
            energy: -1.0,
            state: WaveFunction::gaussian(grid, Frame::Kh, x0, 1.0, 0.0),
            index: idx,
            parity: Parity::None,
        };
        let a = mk(-5.0, 0);
        let b = mk(5.0, 1);
        let only_a = coherent_superposition(&a, &b, (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0))).unwrap();
        assert!(only_a.max_abs_diff(&a.state) < 1e-15);
        let mut lab = b.clone();
        lab.state = lab.state.with_frame(Frame::Lab);
        assert!(coherent_superposition(&a, &lab, (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0))).is_err());
    }

    #[test]
    #[ignore = "slow; covered by the acceptance target"]
    fn kh_states_smoke() {
        let grid = SpatialGrid::production();
        let avg = kh_averaged_potential(&PotentialModel::default(), &grid, 10.23, 2048).unwrap();
        let (_, pairs) = kh_eigenpairs(&avg, &FdDomain::default()).unwrap();
        assert_eq!(pairs.len(), 2);
    }
}
