use alloc::format;
use core::f64::consts::PI;

use num_traits::Float;

use crate::{Error, Result};

/// Uniform periodic spatial grid `x_j = x_min + j·dx`, `j = 0..n_points`.
///
/// `x_max` is excluded; `dx = (x_max − x_min)/n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 2 {
            return Err(Error::NotPowerOfTwo(n_points));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max})"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// 2¹⁴ points on [−1500, 1500).
    pub fn production() -> Self {
        Self {
            x_min: -1500.0,
            x_max: 1500.0,
            n_points: 1 << 14,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |j| self.x_min + j as f64 * dx)
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.n_points - 1)
        }
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dx())
    }

    pub fn p_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Ascending momentum grid `p_k = −π/dx + k·dp`.
    pub fn momentum(&self, k: usize) -> f64 {
        -self.p_max() + k as f64 * self.dp()
    }

    /// Momentum of FFT bin `k` in natural (unshifted) FFT order.
    pub fn fft_momentum(&self, k: usize) -> f64 {
        let n = self.n_points;
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        signed * self.dp()
    }

    pub(crate) fn same_as(&self, other: &SpatialGrid) -> bool {
        self.n_points == other.n_points
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.dx()
            && (self.x_max - other.x_max).abs() <= 1e-12 * self.dx()
    }

    pub fn check_same(&self, other: &SpatialGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n_points,
                left_min: self.x_min,
                left_max: self.x_max,
                right: other.n_points,
                right_min: other.x_min,
                right_max: other.x_max,
            })
        }
    }
}

/// Uniform time grid `t_k = t0 + k·dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Steps of size `dt` covering `[t0, t_end]`, rounded to the nearest step.
    pub fn spanning(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if t_end < t0 {
            return Err(Error::param("t_end", format!("{t_end} precedes t0 = {t0}")));
        }
        let n = ((t_end - t0) / dt).round() as usize;
        Self::new(t0, dt, n)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn production_spacing_and_nyquist() {
        let g = SpatialGrid::production();
        assert!((g.dx() - 0.18310546875).abs() < 1e-15);
        assert!((g.p_max() - 17.157).abs() < 1e-3);
        assert!((g.momentum(g.len() / 2)).abs() < 1e-12);
        assert!((g.fft_momentum(g.len() - 1) + g.dp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpatialGrid::new(-1.0, 1.0, 1000).is_err());
        assert!(SpatialGrid::new(1.0, -1.0, 1024).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
    }

    #[test]
    fn time_grid_spanning() {
        let tg = TimeGrid::spanning(100.0, 200.0, 0.05).unwrap();
        assert_eq!(tg.n_steps, 2000);
        assert!((tg.t_end() - 200.0).abs() < 1e-9);
    }
}
