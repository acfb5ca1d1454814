//! The short-range model binding potential, its Kramers-Henneberger time
//! average and the Fourier harmonics of the oscillating KH-frame potential.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::{Complex, Error, Result, SpatialGrid};

/// Smallest number of phase nodes accepted for the period average.
pub const MIN_QUADRATURE_NODES: usize = 256;
/// Default number of phase nodes for the period average.
pub const DEFAULT_QUADRATURE_NODES: usize = 2048;

/// `V(x) = depth·exp(−√(x² + core²)) / √(x² + width²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialModel {
    pub depth: f64,
    /// Constant under the square root in the exponent (16 for the production model).
    pub core_sq: f64,
    /// Soft width in the denominator.
    pub width: f64,
}

impl Default for PotentialModel {
    fn default() -> Self {
        Self {
            depth: -24.856,
            core_sq: 16.0,
            width: 6.27,
        }
    }
}

impl PotentialModel {
    pub fn value(&self, x: f64) -> f64 {
        let r2 = x * x;
        // exp(−745) underflows; skip the work far outside the well.
        if r2 > 745.0 * 745.0 {
            return 0.0;
        }
        self.depth * (-(r2 + self.core_sq).sqrt()).exp() / (r2 + self.width * self.width).sqrt()
    }

    pub fn sample(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.points().map(|x| self.value(x)).collect()
    }
}

/// Production atomic potential `V(x)` with the default model constants.
pub fn atomic_potential(x: f64) -> f64 {
    PotentialModel::default().value(x)
}

/// Phase nodes `sin θ_k`, `θ_k = 2πk/n`, for a uniform one-period quadrature.
fn phase_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).sin()).collect()
}

fn check_nodes(quadrature_n: usize) -> Result<()> {
    if quadrature_n < MIN_QUADRATURE_NODES {
        return Err(Error::param(
            "quadrature_n",
            format!("{quadrature_n} nodes; at least {MIN_QUADRATURE_NODES} required"),
        ));
    }
    Ok(())
}

/// Period average `(1/n)·Σ_k V(x + α₀ sin θ_k)` at a single point.
pub fn averaged_value(model: &PotentialModel, x: f64, alpha0: f64, sines: &[f64]) -> f64 {
    if x.abs() - alpha0.abs() > 745.0 {
        return 0.0;
    }
    let sum: f64 = sines.iter().map(|s| model.value(x + alpha0 * s)).sum();
    sum / sines.len() as f64
}

/// The KH time-averaged potential `V₀(x; α₀)` for the monochromatic quiver
/// `α(t) = α₀ sin ωt`, sampled on a spatial grid.
#[derive(Debug, Clone)]
pub struct AveragedPotential {
    model: PotentialModel,
    alpha0: f64,
    quadrature_n: usize,
    grid: SpatialGrid,
    samples: Vec<f64>,
    sines: Vec<f64>,
}

/// Builds `V₀(x; α₀)` on `grid` with `quadrature_n` uniform phase nodes.
pub fn kh_averaged_potential(
    model: &PotentialModel,
    grid: &SpatialGrid,
    alpha0: f64,
    quadrature_n: usize,
) -> Result<AveragedPotential> {
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(Error::param("alpha0", format!("must be positive, got {alpha0}")));
    }
    check_nodes(quadrature_n)?;
    let sines = phase_nodes(quadrature_n);
    let samples = grid
        .points()
        .map(|x| averaged_value(model, x, alpha0, &sines))
        .collect();
    Ok(AveragedPotential {
        model: *model,
        alpha0,
        quadrature_n,
        grid: *grid,
        samples,
        sines,
    })
}

/// Location and value of an extremum, refined by a parabola through the
/// three neighbouring samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub x: f64,
    pub value: f64,
}

impl AveragedPotential {
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn quadrature_n(&self) -> usize {
        self.quadrature_n
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn model(&self) -> &PotentialModel {
        &self.model
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `V₀` at an arbitrary point (same quadrature as the samples).
    pub fn value_at(&self, x: f64) -> f64 {
        averaged_value(&self.model, x, self.alpha0, &self.sines)
    }

    pub fn min_value(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn refine(&self, j: usize) -> Extremum {
        let dx = self.grid.dx();
        let (a, b, c) = (self.samples[j - 1], self.samples[j], self.samples[j + 1]);
        let denom = a - 2.0 * b + c;
        let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        Extremum {
            index: j,
            x: self.grid.x(j) + offset * dx,
            value: b - 0.25 * (a - c) * offset,
        }
    }

    /// Strict interior local minima, ascending in `x`.
    pub fn local_minima(&self) -> Vec<Extremum> {
        let v = &self.samples;
        (1..v.len() - 1)
            .filter(|&j| v[j] < v[j - 1] && v[j] < v[j + 1])
            .map(|j| self.refine(j))
            .collect()
    }

    /// Strict interior local maxima, ascending in `x`.
    pub fn local_maxima(&self) -> Vec<Extremum> {
        let v = &self.samples;
        (1..v.len() - 1)
            .filter(|&j| v[j] > v[j - 1] && v[j] > v[j + 1])
            .map(|j| self.refine(j))
            .collect()
    }

    /// `max_x |V₀(x) − V₀(−x)|` over mirrored grid pairs.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.samples.len();
        (1..n)
            .map(|j| (self.samples[j] - self.samples[n - j]).abs())
            .fold(0.0, f64::max)
    }
}

/// Largest `|n|` accepted by [`kh_fourier_harmonic`] for a given quadrature.
pub fn max_harmonic(quadrature_n: usize) -> usize {
    quadrature_n / 2 - 1
}

/// n-th Fourier coefficient `V_n(x; α₀) = (1/T)∫₀ᵀ V(x + α₀ sin ωt) e^{−inωt} dt`.
pub fn kh_fourier_harmonic(
    model: &PotentialModel,
    n: i64,
    grid: &SpatialGrid,
    alpha0: f64,
    quadrature_n: usize,
) -> Result<Vec<Complex>> {
    check_nodes(quadrature_n)?;
    let limit = max_harmonic(quadrature_n);
    if n.unsigned_abs() as usize > limit {
        return Err(Error::param(
            "n",
            format!("harmonic {n} exceeds the alias-free limit {limit} for {quadrature_n} nodes"),
        ));
    }
    let nodes: Vec<(f64, Complex)> = (0..quadrature_n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / quadrature_n as f64;
            (theta.sin(), Complex::from_polar(1.0, -(n as f64) * theta))
        })
        .collect();
    let inv = 1.0 / quadrature_n as f64;
    Ok(grid
        .points()
        .map(|x| {
            if x.abs() - alpha0.abs() > 745.0 {
                return Complex::new(0.0, 0.0);
            }
            nodes.iter().fold(Complex::new(0.0, 0.0), |acc, (s, w)| {
                acc + w * model.value(x + alpha0 * s)
            }) * inv
        })
        .collect())
}
