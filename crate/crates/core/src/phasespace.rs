//! Wigner quasiprobability distributions, their marginals, the analytic
//! two-state superposition Wigner function, and classical phase portraits
//! of the time-averaged KH Hamiltonian.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::eigen::EigenPair;
use crate::fft::FftPlan;
use crate::potential::AveragedPotential;
use crate::{Complex, Error, Frame, Result, Spectral, WaveFunction};

/// Output window and correlation range for a Wigner transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
    /// Correlations are summed over `|ξ| ≤ xi_max`.
    pub xi_max: f64,
}

impl Default for WignerWindow {
    fn default() -> Self {
        Self {
            x_min: -60.0,
            x_max: 60.0,
            n_x: 241,
            p_min: -0.6,
            p_max: 0.6,
            n_p: 201,
            xi_max: 240.0,
        }
    }
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

impl WignerWindow {
    pub fn x(&self, i: usize) -> f64 {
        axis(self.x_min, self.x_max, self.n_x, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        axis(self.p_min, self.p_max, self.n_p, j)
    }

    fn validate(&self, dxi: f64) -> Result<()> {
        if self.n_x == 0 || self.n_p == 0 || !(self.x_max >= self.x_min && self.p_max >= self.p_min) {
            return Err(Error::param(
                "wigner window",
                format!("empty or inverted window {self:?}"),
            ));
        }
        if !(self.xi_max > 0.0) {
            return Err(Error::param("xi_max", format!("must be positive, got {}", self.xi_max)));
        }
        let limit = PI / dxi;
        let requested = self.p_min.abs().max(self.p_max.abs());
        if requested > limit {
            return Err(Error::MomentumWindow { requested, limit });
        }
        Ok(())
    }
}

/// Real `W(x, p)` on a rectangular window, rows along `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub window: WignerWindow,
    pub values: Vec<f64>,
    pub t: f64,
    pub frame: Frame,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.window.n_p + j]
    }

    pub fn dx(&self) -> f64 {
        (self.window.x_max - self.window.x_min) / (self.window.n_x.max(2) - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.window.p_max - self.window.p_min) / (self.window.n_p.max(2) - 1) as f64
    }

    /// Trapezoid weights along an axis of `n` nodes.
    fn weight(i: usize, n: usize) -> f64 {
        if i == 0 || i + 1 == n {
            0.5
        } else {
            1.0
        }
    }

    /// `∬W dx dp` by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.weighted_sum(|w| w)
    }

    /// `∬|W| dx dp`.
    pub fn abs_integral(&self) -> f64 {
        self.weighted_sum(f64::abs)
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (nx, np) = (self.window.n_x, self.window.n_p);
        let mut acc = 0.0;
        for i in 0..nx {
            for j in 0..np {
                acc += Self::weight(i, nx) * Self::weight(j, np) * f(self.at(i, j));
            }
        }
        acc * self.dx() * self.dp()
    }

    /// `∫W dp` at every `x` node.
    pub fn position_marginal(&self) -> Vec<f64> {
        let np = self.window.n_p;
        (0..self.window.n_x)
            .map(|i| (0..np).map(|j| Self::weight(j, np) * self.at(i, j)).sum::<f64>() * self.dp())
            .collect()
    }

    /// `∫W dx` at every `p` node.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let nx = self.window.n_x;
        (0..self.window.n_p)
            .map(|j| (0..nx).map(|i| Self::weight(i, nx) * self.at(i, j)).sum::<f64>() * self.dx())
            .collect()
    }

    /// Fraction of `∬|W|` carried by `|p| > p_cut`.
    pub fn momentum_tail_fraction(&self, p_cut: f64) -> f64 {
        let (nx, np) = (self.window.n_x, self.window.n_p);
        let (mut tail, mut all) = (0.0, 0.0);
        for i in 0..nx {
            for j in 0..np {
                let w = Self::weight(i, nx) * Self::weight(j, np) * self.at(i, j).abs();
                all += w;
                if self.window.p(j).abs() > p_cut {
                    tail += w;
                }
            }
        }
        if all > 0.0 {
            tail / all
        } else {
            0.0
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm distance to another grid on the same window.
    pub fn max_abs_diff(&self, other: &WignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `ψ` on the half-step grid, ready for per-row sub-grid shifts.
struct HalfStepSpectrum {
    /// FFT of the 2N half-step samples.
    spectrum: Vec<Complex>,
    momenta: Vec<f64>,
    plan: FftPlan,
    y0: f64,
    h: f64,
}

impl HalfStepSpectrum {
    fn new(spectral: &Spectral, psi: &WaveFunction) -> Result<Self> {
        let mut samples = spectral.upsample2(psi);
        let n2 = samples.len();
        let plan = FftPlan::new(n2)?;
        plan.forward(&mut samples);
        let h = 0.5 * psi.grid().dx();
        let dp = 2.0 * PI / (n2 as f64 * h);
        let momenta = (0..n2)
            .map(|k| if k < n2 / 2 { k as f64 } else { k as f64 - n2 as f64 } * dp)
            .collect();
        Ok(Self {
            spectrum: samples,
            momenta,
            plan,
            y0: psi.grid().x_min(),
            h,
        })
    }

    /// Samples `ψ(x + m·h)` for all `m` such that `x + m·h` lies on the
    /// periodic half-step grid shifted by the sub-grid offset of `x`; the
    /// returned index `m0` satisfies `y0 + m0·h + δ = x`.
    fn row(&self, x: f64) -> (Vec<Complex>, isize) {
        let u = (x - self.y0) / self.h;
        let m0 = u.floor();
        let delta = (u - m0) * self.h;
        let mut data = self.spectrum.clone();
        if delta != 0.0 {
            for (z, p) in data.iter_mut().zip(&self.momenta) {
                *z *= Complex::from_polar(1.0, p * delta);
            }
        }
        self.plan.inverse(&mut data);
        (data, m0 as isize)
    }
}

/// Cross-Wigner function
/// `W_ab(x, p) = (1/2π)∫ a*(x + ξ/2) b(x − ξ/2) e^{ipξ} dξ` on `window`.
pub fn cross_wigner(a: &WaveFunction, b: &WaveFunction, window: &WignerWindow) -> Result<Vec<Complex>> {
    a.check_compatible(b)?;
    let grid = *a.grid();
    let dxi = grid.dx();
    window.validate(dxi)?;
    let spectral = Spectral::new(grid)?;
    let sa = HalfStepSpectrum::new(&spectral, a)?;
    let same = a == b;
    let sb = if same {
        None
    } else {
        Some(HalfStepSpectrum::new(&spectral, b)?)
    };
    let n2 = sa.spectrum.len() as isize;
    let k_max = (window.xi_max / dxi).floor() as isize;
    let ps: Vec<f64> = (0..window.n_p).map(|j| window.p(j)).collect();
    let mut out = vec![Complex::new(0.0, 0.0); window.n_x * window.n_p];
    let mut g = vec![Complex::new(0.0, 0.0); (2 * k_max + 1) as usize];
    for i in 0..window.n_x {
        let x = window.x(i);
        let (ra, m0) = sa.row(x);
        let rb = match &sb {
            Some(s) => s.row(x).0,
            None => ra.clone(),
        };
        for (idx, k) in (-k_max..=k_max).enumerate() {
            let (ip, im) = (m0 + k, m0 - k);
            g[idx] = if ip < 0 || ip >= n2 || im < 0 || im >= n2 {
                Complex::new(0.0, 0.0)
            } else {
                ra[ip as usize].conj() * rb[im as usize]
            };
        }
        for (j, &p) in ps.iter().enumerate() {
            // Σ_k g_k e^{ipkΔξ}, by a unit-modulus recurrence.
            let step = Complex::from_polar(1.0, p * dxi);
            let mut phase = Complex::from_polar(1.0, -p * dxi * k_max as f64);
            let mut acc = Complex::new(0.0, 0.0);
            for (idx, gk) in g.iter().enumerate() {
                if idx % 256 == 0 {
                    phase = Complex::from_polar(1.0, p * dxi * (idx as isize - k_max) as f64);
                }
                acc += gk * phase;
                phase *= step;
            }
            out[i * window.n_p + j] = acc * (dxi / (2.0 * PI));
        }
    }
    Ok(out)
}

/// Wigner function of `psi`; imaginary parts above `10⁻¹⁰` are an error.
pub fn wigner(psi: &WaveFunction, window: &WignerWindow, t: f64) -> Result<WignerGrid> {
    let c = cross_wigner(psi, psi, window)?;
    let max_imag = c.iter().fold(0.0, |m, z| m.max(z.im.abs()));
    if max_imag > 1e-10 {
        return Err(Error::param(
            "wigner",
            format!("imaginary residue {max_imag:e} exceeds 1e-10"),
        ));
    }
    Ok(WignerGrid {
        window: *window,
        values: c.iter().map(|z| z.re).collect(),
        t,
        frame: psi.frame(),
        max_imag,
    })
}

/// Sup-norm residuals of the two marginals against `|ψ(x)|²` and `|Φ(p)|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalResiduals {
    pub position: f64,
    pub momentum: f64,
}

/// Compares `∫W dp` with `|ψ(x)|²` (band-limited interpolation at the
/// window nodes) and `∫W dx` with `|Φ(p)|²`, `Φ(p) = (2π)^{-1/2}∫ψe^{−ipx}dx`.
pub fn wigner_marginals(w: &WignerGrid, psi: &WaveFunction) -> Result<MarginalResiduals> {
    let grid = *psi.grid();
    let spectral = Spectral::new(grid)?;
    let pos = w.position_marginal();
    let mut position = 0.0f64;
    let mut shifted = psi.clone();
    for (i, m) in pos.iter().enumerate() {
        let x = w.window.x(i);
        // ψ(x): shift so that x lands on the nearest node.
        let j = grid.nearest_index(x);
        let s = grid.x(j) - x;
        shifted.amplitudes_mut().copy_from_slice(psi.amplitudes());
        spectral.shift_in_place(&mut shifted, s);
        let d = shifted.amplitudes()[j].norm_sqr();
        position = position.max((m - d).abs());
    }
    let mom = w.momentum_marginal();
    let dx = grid.dx();
    let mut momentum = 0.0f64;
    for (j, m) in mom.iter().enumerate() {
        let p = w.window.p(j);
        let phi = grid
            .points()
            .zip(psi.amplitudes())
            .fold(Complex::new(0.0, 0.0), |acc, (x, z)| {
                acc + z * Complex::from_polar(1.0, -p * x)
            })
            * (dx / (2.0 * PI).sqrt());
        momentum = momentum.max((m - phi.norm_sqr()).abs());
    }
    Ok(MarginalResiduals { position, momentum })
}

/// Analytic Wigner function of `c₀φ₀e^{−iE₀t} + c₁φ₁e^{−iE₁t}`:
/// `|c₀|²W₀ + |c₁|²W₁ + 2Re[c₀*c₁ W₀₁ e^{−iω₁₀t}]`, `ω₁₀ = E₁ − E₀`.
#[derive(Debug, Clone)]
pub struct SuperpositionWigner {
    window: WignerWindow,
    w0: Vec<f64>,
    w1: Vec<f64>,
    w01: Vec<Complex>,
    weights: (Complex, Complex),
    omega10: f64,
    frame: Frame,
}

impl SuperpositionWigner {
    pub fn new(a: &EigenPair, b: &EigenPair, weights: (Complex, Complex), window: &WignerWindow) -> Result<Self> {
        let norm = (weights.0.norm_sqr() + weights.1.norm_sqr()).sqrt();
        if !(norm > 0.0) {
            return Err(Error::param("weights", "both weights vanish"));
        }
        let w0 = wigner(&a.state, window, 0.0)?.values;
        let w1 = wigner(&b.state, window, 0.0)?.values;
        let w01 = cross_wigner(&a.state, &b.state, window)?;
        Ok(Self {
            window: *window,
            w0,
            w1,
            w01,
            weights: (weights.0 / norm, weights.1 / norm),
            omega10: b.energy - a.energy,
            frame: a.state.frame(),
        })
    }

    pub fn omega10(&self) -> f64 {
        self.omega10
    }

    /// Cross-term kernel `W₀₁`.
    pub fn cross_term(&self) -> &[Complex] {
        &self.w01
    }

    pub fn at(&self, t: f64) -> WignerGrid {
        let (c0, c1) = self.weights;
        let rot = c0.conj() * c1 * Complex::from_polar(1.0, -self.omega10 * t);
        let values = self
            .w0
            .iter()
            .zip(&self.w1)
            .zip(&self.w01)
            .map(|((a, b), x)| c0.norm_sqr() * a + c1.norm_sqr() * b + 2.0 * (rot * x).re)
            .collect();
        WignerGrid {
            window: self.window,
            values,
            t,
            frame: self.frame,
            max_imag: 0.0,
        }
    }
}

/// Central barrier top `V₀(0)` of a double-well averaged potential.
pub fn separatrix_energy(avg: &AveragedPotential) -> Result<f64> {
    let minima = avg.local_minima();
    if minima.len() != 2 {
        return Err(Error::NotDichotomous(format!("{} local minima", minima.len())));
    }
    let dx = avg.grid().dx();
    let central = avg
        .local_maxima()
        .iter()
        .any(|m| m.x.abs() <= dx && minima[0].x < m.x && m.x < minima[1].x);
    if !central {
        return Err(Error::NotDichotomous("no barrier maximum at x = 0".into()));
    }
    Ok(avg.value_at(0.0))
}

/// Closed equienergy loops `p = ±√(2(E − V₀(x)))`, one per connected
/// classically allowed interval inside `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquienergyCurve {
    pub energy: f64,
    /// Each branch runs along the upper half left to right, then back
    /// along the lower half.
    pub branches: Vec<Vec<(f64, f64)>>,
}

impl EquienergyCurve {
    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// `max |p²/2 + V₀(x) − E|` over all points.
    pub fn energy_residual(&self, avg: &AveragedPotential) -> f64 {
        self.branches.iter().flatten().fold(0.0, |m, &(x, p)| {
            m.max((0.5 * p * p + avg.value_at(x) - self.energy).abs())
        })
    }
}

fn turning_point(avg: &AveragedPotential, e: f64, inside: f64, outside: f64) -> f64 {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if e - avg.value_at(m) >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

pub fn equienergy_curve(e: f64, avg: &AveragedPotential, x_min: f64, x_max: f64, n: usize) -> EquienergyCurve {
    let xs: Vec<f64> = (0..n).map(|i| axis(x_min, x_max, n, i)).collect();
    let allowed: Vec<bool> = xs.iter().map(|&x| e - avg.value_at(x) >= 0.0).collect();
    let mut branches = Vec::new();
    let mut i = 0;
    while i < n {
        if !allowed[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && allowed[i] {
            i += 1;
        }
        let end = i - 1;
        let mut run: Vec<f64> = Vec::new();
        if start > 0 {
            run.push(turning_point(avg, e, xs[start], xs[start - 1]));
        }
        run.extend_from_slice(&xs[start..=end]);
        if end + 1 < n {
            run.push(turning_point(avg, e, xs[end], xs[end + 1]));
        }
        let p = |x: f64| (2.0 * (e - avg.value_at(x))).max(0.0).sqrt();
        let mut loop_pts: Vec<(f64, f64)> = run.iter().map(|&x| (x, p(x))).collect();
        loop_pts.extend(run.iter().rev().map(|&x| (x, -p(x))));
        branches.push(loop_pts);
    }
    EquienergyCurve { energy: e, branches }
}

/// Equienergy loops for several levels plus the separatrix energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub levels: Vec<f64>,
    pub curves: Vec<EquienergyCurve>,
    pub e_sep: f64,
}

pub fn phase_portrait(
    avg: &AveragedPotential,
    levels: &[f64],
    x_min: f64,
    x_max: f64,
    n: usize,
) -> Result<PhasePortrait> {
    let e_sep = separatrix_energy(avg)?;
    Ok(PhasePortrait {
        levels: levels.to_vec(),
        curves: levels
            .iter()
            .map(|&e| equienergy_curve(e, avg, x_min, x_max, n))
            .collect(),
        e_sep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{kh_averaged_potential, PotentialModel};
    use crate::SpatialGrid;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(-64.0, 64.0, 512).unwrap()
    }

    fn small_window() -> WignerWindow {
        WignerWindow {
            x_min: -6.0,
            x_max: 6.0,
            n_x: 25,
            p_min: -3.0,
            p_max: 3.0,
            n_p: 61,
            xi_max: 40.0,
        }
    }

    #[test]
    fn gaussian_wigner_is_positive_gaussian() {
        // Oracle: W = (1/π) exp(−(x−x0)²/(2σ²) − 2σ²(p−p0)²).
        let g = grid();
        let (x0, sigma, p0) = (0.7, 1.0, 0.4);
        let psi = WaveFunction::gaussian(g, Frame::Kh, x0, sigma, p0);
        let w = wigner(&psi, &small_window(), 0.0).unwrap();
        let win = w.window;
        for i in 0..win.n_x {
            for j in 0..win.n_p {
                let (x, p) = (win.x(i), win.p(j));
                let exact =
                    (-(x - x0).powi(2) / (2.0 * sigma * sigma) - 2.0 * sigma * sigma * (p - p0).powi(2)).exp() / PI;
                assert!((w.at(i, j) - exact).abs() < 1e-10, "({x}, {p})");
            }
        }
        assert!(w.max_abs() <= 1.0 / PI + 1e-10);
    }

    #[test]
    fn rejects_unresolvable_momentum() {
        let g = grid();
        let psi = WaveFunction::gaussian(g, Frame::Kh, 0.0, 1.0, 0.0);
        let mut win = small_window();
        win.p_max = PI / g.dx() + 0.1;
        assert!(matches!(wigner(&psi, &win, 0.0), Err(Error::MomentumWindow { .. })));
    }

    #[test]
    fn marginals_of_gaussian() {
        let g = grid();
        let psi = WaveFunction::gaussian(g, Frame::Kh, 0.3, 1.2, 0.0);
        let mut win = small_window();
        win.x_min = -10.0;
        win.x_max = 10.0;
        win.n_x = 81;
        win.n_p = 121;
        let w = wigner(&psi, &win, 0.0).unwrap();
        let r = wigner_marginals(&w, &psi).unwrap();
        assert!(r.position < 1e-6 && r.momentum < 1e-6, "{r:?}");
        assert!((w.integral() - 1.0).abs() < 1e-3);
        let zero = WaveFunction::zeros(g, Frame::Kh);
        let wz = wigner(&zero, &win, 0.0).unwrap();
        let rz = wigner_marginals(&wz, &zero).unwrap();
        assert_eq!((rz.position, rz.momentum), (0.0, 0.0));
    }

    #[test]
    fn odd_state_has_negative_origin() {
        // First oscillator excited state: W(0, 0) = −1/π.
        let g = grid();
        let mut psi = WaveFunction::from_fn(g, Frame::Kh, |x| Complex::new(x * (-x * x / 2.0).exp(), 0.0));
        psi.normalize().unwrap();
        let win = WignerWindow {
            x_min: 0.0,
            x_max: 0.0,
            n_x: 1,
            p_min: 0.0,
            p_max: 0.0,
            n_p: 1,
            xi_max: 40.0,
        };
        let w = wigner(&psi, &win, 0.0).unwrap();
        assert!((w.at(0, 0) + 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn separatrix_and_curves() {
        let g = SpatialGrid::new(-128.0, 128.0, 2048).unwrap();
        let model = PotentialModel::default();
        let avg = kh_averaged_potential(&model, &g, 10.23, 512).unwrap();
        let e_sep = separatrix_energy(&avg).unwrap();
        assert!((e_sep - avg.value_at(0.0)).abs() < 1e-15);
        let c = equienergy_curve(0.0125, &avg, -60.0, 60.0, 241);
        assert_eq!(c.branches.len(), 1);
        assert!(c.energy_residual(&avg) < 1e-10);
        let pinch = equienergy_curve(e_sep, &avg, -60.0, 60.0, 241);
        assert!(pinch.branches.iter().flatten().any(|&(x, p)| x == 0.0 && p == 0.0));
        let below = equienergy_curve(avg.min_value() - 1e-3, &avg, -60.0, 60.0, 241);
        assert!(below.is_empty());
        let single = kh_averaged_potential(&model, &g, 1e-3, 256).unwrap();
        assert!(matches!(separatrix_energy(&single), Err(Error::NotDichotomous(_))));
    }
}
