//! Trapezoidal laser pulse `ε(t) = ε₀ f(t) sin ωt` and the cached field
//! integrals `A(t) = −∫₀ᵗ ε`, `α(t) = ∫₀ᵗ A`, `S(t) = ∫₀ᵗ A²`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::{Error, Result};

/// Intensity corresponding to one atomic unit of field strength, W/cm².
pub const ATOMIC_INTENSITY_WCM2: f64 = 3.50945e16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub eps0: f64,
    pub omega: f64,
    pub ramp_cycles: f64,
    pub flat_end_cycles: f64,
    pub total_cycles: f64,
}

impl PulseParams {
    pub fn new(eps0: f64, omega: f64, ramp_cycles: f64, flat_end_cycles: f64, total_cycles: f64) -> Result<Self> {
        if !(eps0 >= 0.0 && eps0.is_finite()) {
            return Err(Error::param("eps0", format!("must be non-negative, got {eps0}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", format!("must be positive, got {omega}")));
        }
        if !(0.0 < ramp_cycles && ramp_cycles < flat_end_cycles && flat_end_cycles < total_cycles) {
            return Err(Error::param(
                "cycles",
                format!("need 0 < ramp ({ramp_cycles}) < flat end ({flat_end_cycles}) < total ({total_cycles})"),
            ));
        }
        Ok(Self {
            eps0,
            omega,
            ramp_cycles,
            flat_end_cycles,
            total_cycles,
        })
    }

    /// Peak field from a peak intensity in W/cm².
    pub fn from_intensity(
        intensity_wcm2: f64,
        omega: f64,
        ramp_cycles: f64,
        flat_end_cycles: f64,
        total_cycles: f64,
    ) -> Result<Self> {
        if !(intensity_wcm2 >= 0.0) {
            return Err(Error::param(
                "intensity",
                format!("must be non-negative, got {intensity_wcm2}"),
            ));
        }
        Self::new(
            eps0_from_intensity(intensity_wcm2),
            omega,
            ramp_cycles,
            flat_end_cycles,
            total_cycles,
        )
    }

    /// I = 5.7×10¹³ W/cm², ω = 0.0628, 2-cycle ramps, flat top to 10 cycles, 12 cycles total.
    pub fn production() -> Self {
        Self::from_intensity(5.7e13, 0.0628, 2.0, 10.0, 12.0).expect("valid production pulse")
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Quiver amplitude `α₀ = ε₀/ω²`.
    pub fn alpha0(&self) -> f64 {
        self.eps0 / (self.omega * self.omega)
    }

    /// Peak vector potential `ε₀/ω`.
    pub fn a0(&self) -> f64 {
        self.eps0 / self.omega
    }

    pub fn ramp_end(&self) -> f64 {
        self.ramp_cycles * self.period()
    }

    pub fn flat_end(&self) -> f64 {
        self.flat_end_cycles * self.period()
    }

    pub fn t_final(&self) -> f64 {
        self.total_cycles * self.period()
    }

    /// Piecewise-linear trapezoid: `t/T₁` on the ramp, 1 on the flat top and
    /// a linear turn-off to zero at `T_f`; 0 outside `[0, T_f]`.
    pub fn envelope(&self, t: f64) -> f64 {
        let (t1, t2, tf) = (self.ramp_end(), self.flat_end(), self.t_final());
        if !(0.0..=tf).contains(&t) {
            0.0
        } else if t <= t1 {
            t / t1
        } else if t <= t2 {
            1.0
        } else {
            (tf - t) / (tf - t2)
        }
    }

    pub fn field(&self, t: f64) -> f64 {
        self.eps0 * self.envelope(t) * (self.omega * t).sin()
    }

    /// Flat-top quiver `α₀ sin ωt` (no ramp transients).
    pub fn monochromatic_alpha(&self, t: f64) -> f64 {
        self.alpha0() * (self.omega * t).sin()
    }

    /// Flat-top vector potential `(ε₀/ω) cos ωt`.
    pub fn monochromatic_a(&self, t: f64) -> f64 {
        self.a0() * (self.omega * t).cos()
    }
}

pub fn eps0_from_intensity(intensity_wcm2: f64) -> f64 {
    (intensity_wcm2 / ATOMIC_INTENSITY_WCM2).sqrt()
}

/// Field quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub eps: f64,
    pub a: f64,
    pub alpha: f64,
    /// `∫₀ᵗ A² dτ`.
    pub s: f64,
}

/// Endpoint residuals measured at `T_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointResiduals {
    pub a_final: f64,
    pub alpha_final: f64,
    pub alpha_final_rel: f64,
}

impl EndpointResiduals {
    /// Zero net momentum and displacement transfer within `10⁻⁶` relative.
    pub fn within(&self, tol: f64) -> bool {
        self.a_final.abs() < tol && self.alpha_final_rel.abs() < tol
    }
}

/// Dense, immutable table of `ε, A, α, S` on `t_k = k·dt_field`.
#[derive(Debug, Clone)]
pub struct FieldCache {
    params: PulseParams,
    dt: f64,
    eps: Vec<f64>,
    a: Vec<f64>,
    alpha: Vec<f64>,
    s: Vec<f64>,
    residuals: EndpointResiduals,
}

/// Cumulative composite Simpson integral with `out[0] = 0`.
///
/// Even nodes use Simpson panels; odd nodes add the half-panel rule
/// `h/12·(5f₀ + 8f₁ − f₂)` to the preceding even node.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = alloc::vec![0.0; n];
    if n < 2 {
        return out;
    }
    let mut k = 0;
    while k + 2 < n {
        out[k + 1] = out[k] + h / 12.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
        out[k + 2] = out[k] + h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        k += 2;
    }
    if k + 1 < n {
        // Trailing odd node: mirrored half-panel over the last three samples.
        out[k + 1] = out[k] + h / 12.0 * (-f[k - 1] + 8.0 * f[k] + 5.0 * f[k + 1]);
    }
    out
}

impl FieldCache {
    /// Tabulates the pulse on `[0, t_end]` (at least up to `T_f`).
    pub fn build(params: PulseParams, dt_field: f64, t_end: f64) -> Result<Self> {
        if !(dt_field > 0.0 && dt_field.is_finite()) {
            return Err(Error::param("dt_field", format!("must be positive, got {dt_field}")));
        }
        let t_end = t_end.max(params.t_final());
        let n = (t_end / dt_field).ceil() as usize + 2;
        let eps: Vec<f64> = (0..n).map(|k| params.field(k as f64 * dt_field)).collect();
        let a: Vec<f64> = cumulative_simpson(&eps, dt_field).into_iter().map(|v| -v).collect();
        let alpha = cumulative_simpson(&a, dt_field);
        let a2: Vec<f64> = a.iter().map(|v| v * v).collect();
        let s = cumulative_simpson(&a2, dt_field);
        let mut cache = Self {
            params,
            dt: dt_field,
            eps,
            a,
            alpha,
            s,
            residuals: EndpointResiduals {
                a_final: 0.0,
                alpha_final: 0.0,
                alpha_final_rel: 0.0,
            },
        };
        let end = cache.sample(params.t_final());
        let alpha0 = params.alpha0();
        cache.residuals = EndpointResiduals {
            a_final: end.a,
            alpha_final: end.alpha,
            alpha_final_rel: if alpha0 > 0.0 { end.alpha / alpha0 } else { end.alpha },
        };
        Ok(cache)
    }

    pub fn params(&self) -> &PulseParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn residuals(&self) -> &EndpointResiduals {
        &self.residuals
    }

    pub fn node(&self, k: usize) -> (f64, FieldSample) {
        (
            k as f64 * self.dt,
            FieldSample {
                eps: self.eps[k],
                a: self.a[k],
                alpha: self.alpha[k],
                s: self.s[k],
            },
        )
    }

    /// Linear interpolation between cache nodes. `ε` comes from the closed
    /// form; before 0 everything vanishes and past the table the last node
    /// is held (field off).
    pub fn sample(&self, t: f64) -> FieldSample {
        if t <= 0.0 {
            return FieldSample::default();
        }
        let u = t / self.dt;
        let last = self.len() - 1;
        if u >= last as f64 {
            let mut s = self.node(last).1;
            s.eps = self.params.field(t);
            s.s += s.a * s.a * (t - self.t_end());
            s.alpha += s.a * (t - self.t_end());
            return s;
        }
        let k = u.floor() as usize;
        let w = u - k as f64;
        let lerp = |v: &[f64]| v[k] + w * (v[k + 1] - v[k]);
        FieldSample {
            eps: self.params.field(t),
            a: lerp(&self.a),
            alpha: lerp(&self.alpha),
            s: lerp(&self.s),
        }
    }
}
