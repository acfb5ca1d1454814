//! Wave functions on a [`SpatialGrid`] and the spectral (momentum-space)
//! operations shared by the propagator, the frame transform and the Wigner
//! transform.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_traits::Float;

use crate::fft::FftPlan;
use crate::{Complex, Error, Result, SpatialGrid};

/// Gauge/frame in which a set of amplitudes lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Kh,
}

impl Frame {
    pub fn as_str(&self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Kh => "kh",
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab" => Ok(Frame::Lab),
            "kh" => Ok(Frame::Kh),
            other => Err(Error::param("frame", alloc::format!("unknown frame `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: SpatialGrid,
    amplitudes: Vec<Complex>,
    frame: Frame,
}

impl WaveFunction {
    pub fn new(grid: SpatialGrid, amplitudes: Vec<Complex>, frame: Frame) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidGrid(alloc::format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            amplitudes,
            frame,
        })
    }

    pub fn from_fn(grid: SpatialGrid, frame: Frame, f: impl Fn(f64) -> Complex) -> Self {
        let amplitudes = grid.points().map(f).collect();
        Self {
            grid,
            amplitudes,
            frame,
        }
    }

    pub fn zeros(grid: SpatialGrid, frame: Frame) -> Self {
        Self {
            grid,
            amplitudes: vec![Complex::new(0.0, 0.0); grid.len()],
            frame,
        }
    }

    /// Normalized Gaussian `exp(−(x−x0)²/(4σ²) + i p0 x)`.
    pub fn gaussian(grid: SpatialGrid, frame: Frame, x0: f64, sigma: f64, p0: f64) -> Self {
        let mut psi = Self::from_fn(grid, frame, |x| {
            let u = x - x0;
            Complex::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), p0 * x)
        });
        psi.normalize().expect("Gaussian has nonzero norm");
        psi
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex> {
        self.amplitudes
    }

    /// Relabels the frame without touching the amplitudes.
    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn density(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|z| z.norm_sqr())
    }

    /// `dx·Σ|ψ_j|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.dx() * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::param(
                "wave function",
                "cannot normalize a zero or non-finite state",
            ));
        }
        let s = 1.0 / n.sqrt();
        for z in &mut self.amplitudes {
            *z *= s;
        }
        Ok(n)
    }

    pub fn scale(&mut self, c: Complex) {
        for z in &mut self.amplitudes {
            *z *= c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check_compatible(&self, other: &WaveFunction) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.frame != other.frame {
            return Err(Error::FrameMismatch {
                expected: self.frame,
                found: other.frame,
            });
        }
        Ok(())
    }

    pub(crate) fn expect_frame(&self, frame: Frame) -> Result<()> {
        if self.frame == frame {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected: frame,
                found: self.frame,
            })
        }
    }

    /// `⟨self|other⟩ = dx·Σ conj(self_j)·other_j`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex> {
        inner_product(self, other)
    }

    /// Largest pointwise amplitude difference.
    pub fn max_abs_diff(&self, other: &WaveFunction) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `dx·Σ_j conj(a_j)·b_j`; the operands must share grid and frame.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex> {
    a.check_compatible(b)?;
    let sum = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .fold(Complex::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y);
    Ok(sum * a.grid.dx())
}

/// Translates `psi` by `s` (the result is `ψ(x − s)`), see [`Spectral::shift`].
pub fn spectral_shift(psi: &WaveFunction, s: f64) -> Result<WaveFunction> {
    Ok(Spectral::new(*psi.grid())?.shift(psi, s))
}

/// FFT plan and momentum tables bound to one grid.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: SpatialGrid,
    plan: FftPlan,
    momenta: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: SpatialGrid) -> Result<Self> {
        let plan = FftPlan::new(grid.len())?;
        let momenta = (0..grid.len()).map(|k| grid.fft_momentum(k)).collect();
        Ok(Self { grid, plan, momenta })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Momenta of the FFT bins in natural FFT order.
    pub fn fft_momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    pub fn forward(&self, data: &mut [Complex]) {
        self.plan.forward(data);
    }

    pub fn inverse(&self, data: &mut [Complex]) {
        self.plan.inverse(data);
    }

    fn check(&self, psi: &WaveFunction) {
        assert!(
            self.grid.same_as(psi.grid()),
            "spectral context built for a different grid"
        );
    }

    /// Momentum-space amplitudes `Φ(p_k) = dx/√(2π)·Σ_j ψ_j e^{−i p_k x_j}` on the
    /// ascending grid `p_k = −π/dx + k·dp`; `Σ|Φ|²dp = Σ|ψ|²dx`.
    pub fn to_momentum(&self, psi: &WaveFunction) -> Vec<Complex> {
        self.check(psi);
        let n = self.grid.len();
        let mut data = psi.amplitudes().to_vec();
        self.plan.forward(&mut data);
        let pref = self.grid.dx() / (2.0 * PI).sqrt();
        let x0 = self.grid.x_min();
        (0..n)
            .map(|m| {
                let k = (m + n / 2) % n;
                let p = self.grid.momentum(m);
                data[k] * Complex::from_polar(pref, -p * x0)
            })
            .collect()
    }

    /// Inverse of [`Spectral::to_momentum`].
    pub fn from_momentum(&self, phi: &[Complex], frame: Frame) -> Result<WaveFunction> {
        let n = self.grid.len();
        if phi.len() != n {
            if !phi.len().is_power_of_two() {
                return Err(Error::NotPowerOfTwo(phi.len()));
            }
            return Err(Error::InvalidGrid(alloc::format!(
                "{} momentum amplitudes for a {n}-point grid",
                phi.len()
            )));
        }
        let inv = (2.0 * PI).sqrt() / self.grid.dx();
        let x0 = self.grid.x_min();
        let mut data = vec![Complex::new(0.0, 0.0); n];
        for (m, &v) in phi.iter().enumerate() {
            let k = (m + n / 2) % n;
            let p = self.grid.momentum(m);
            data[k] = v * Complex::from_polar(inv, p * x0);
        }
        self.plan.inverse(&mut data);
        WaveFunction::new(self.grid, data, frame)
    }

    /// Translation by `s` through the momentum-space phase `exp(−i p s)`;
    /// the result is `ψ(x − s)` with periodic wrap-around.
    pub fn shift(&self, psi: &WaveFunction, s: f64) -> WaveFunction {
        let mut out = psi.clone();
        self.shift_in_place(&mut out, s);
        out
    }

    pub fn shift_in_place(&self, psi: &mut WaveFunction, s: f64) {
        self.check(psi);
        if s == 0.0 {
            return;
        }
        let data = psi.amplitudes_mut();
        self.plan.forward(data);
        for (z, p) in data.iter_mut().zip(&self.momenta) {
            *z *= Complex::from_polar(1.0, -p * s);
        }
        self.plan.inverse(data);
    }

    /// `⟨ψ|p̂²/2|ψ⟩` evaluated spectrally.
    pub fn kinetic_expectation(&self, psi: &WaveFunction) -> f64 {
        self.check(psi);
        let mut data = psi.amplitudes().to_vec();
        self.plan.forward(&mut data);
        let n = self.grid.len() as f64;
        let sum: f64 = data
            .iter()
            .zip(&self.momenta)
            .map(|(z, p)| 0.5 * p * p * z.norm_sqr())
            .sum();
        // Parseval: dx·Σ|ψ|² = dx/N·Σ|F|².
        sum * self.grid.dx() / n
    }

    /// `⟨ψ|p̂²/2 + V|ψ⟩ / ⟨ψ|ψ⟩` for a potential sampled on the grid.
    pub fn energy(&self, psi: &WaveFunction, potential: &[f64]) -> f64 {
        let dx = self.grid.dx();
        let pot: f64 = psi
            .amplitudes()
            .iter()
            .zip(potential)
            .map(|(z, v)| v * z.norm_sqr())
            .sum::<f64>()
            * dx;
        (self.kinetic_expectation(psi) + pot) / psi.norm_sqr()
    }

    /// Band-limited samples of `psi` on the half-step grid `x_min + j·dx/2`,
    /// `j = 0..2N`, by zero-padding the spectrum.
    pub fn upsample2(&self, psi: &WaveFunction) -> Vec<Complex> {
        self.check(psi);
        let n = self.grid.len();
        let mut data = psi.amplitudes().to_vec();
        self.plan.forward(&mut data);
        let mut padded = vec![Complex::new(0.0, 0.0); 2 * n];
        padded[..n / 2].copy_from_slice(&data[..n / 2]);
        padded[n + n / 2 + 1..].copy_from_slice(&data[n / 2 + 1..]);
        let nyq = data[n / 2] * 0.5;
        padded[n / 2] = nyq;
        padded[n + n / 2] = nyq;
        let plan2 = FftPlan::new(2 * n).expect("2N is a power of two");
        plan2.inverse(&mut padded);
        for z in &mut padded {
            *z *= 2.0;
        }
        padded
    }
}
