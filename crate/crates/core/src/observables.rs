//! Scalar diagnostics of a wave function and the per-run series recorder.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::frame::FrameTransform;
use crate::propagator::Observer;
use crate::{Complex, Error, Frame, Result, WaveFunction};

/// Default trapped-window half width.
pub const WINDOW: f64 = 60.0;

/// `|⟨φ|ψ⟩|²`; grid and frame must agree.
pub fn population(psi: &WaveFunction, phi: &WaveFunction) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr())
}

/// `⟨ψ0|ψt⟩`.
pub fn autocorrelation(psi0: &WaveFunction, psit: &WaveFunction) -> Result<Complex> {
    psi0.inner(psit)
}

/// `∫x|ψ|²dx` over the whole grid.
pub fn expectation_x(psi: &WaveFunction) -> f64 {
    let dx = psi.grid().dx();
    psi.grid().points().zip(psi.density()).map(|(x, d)| x * d).sum::<f64>() * dx
}

/// Standard deviation of `|ψ|²` restricted to `[lo, hi]` and renormalized there.
pub fn trapped_width(psi: &WaveFunction, lo: f64, hi: f64) -> Result<f64> {
    let dx = psi.grid().dx();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (x, d) in psi.grid().points().zip(psi.density()) {
        if x >= lo && x <= hi {
            m0 += d;
            m1 += x * d;
            m2 += x * x * d;
        }
    }
    let norm = m0 * dx;
    if norm < 1e-8 {
        return Err(Error::EmptyWindow { lo, hi, norm });
    }
    let mean = m1 / m0;
    Ok((m2 / m0 - mean * mean).max(0.0).sqrt())
}

/// Probability in `[−w, 0)` and `(0, w]`.
pub fn half_line_masses(psi: &WaveFunction, w: f64) -> (f64, f64) {
    let dx = psi.grid().dx();
    let (mut left, mut right) = (0.0, 0.0);
    for (x, d) in psi.grid().points().zip(psi.density()) {
        if x >= -w && x < 0.0 {
            left += d;
        } else if x > 0.0 && x <= w {
            right += d;
        }
    }
    (left * dx, right * dx)
}

/// Time-stamped real values with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    records: Vec<(f64, f64)>,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if let Some(&(last, _)) = self.records.last() {
            if !(t > last) {
                return Err(Error::param(
                    "series",
                    alloc::format!("time {t} does not follow {last}"),
                ));
            }
        }
        self.records.push((t, value));
        Ok(())
    }

    pub fn records(&self) -> &[(f64, f64)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with `t` in `[a, b]`.
    pub fn between(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.records.iter().copied().filter(move |(t, _)| *t >= a && *t <= b)
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "t",
    "P_b",
    "P_KH_0",
    "P_KH_1",
    "P_KH_total",
    "sigma_x",
    "mean_x_lab",
    "mean_x_kh",
    "autocorr_re",
    "autocorr_im",
    "autocorr_abs2",
    "mass_left",
    "mass_right",
    "norm",
];

/// One row of the series file. Quantities that do not apply to a run are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRecord {
    pub t: f64,
    pub p_b: f64,
    pub p_kh: [f64; 2],
    pub p_kh_total: f64,
    pub sigma_x: f64,
    pub mean_x_lab: f64,
    pub mean_x_kh: f64,
    pub autocorr: Complex,
    pub mass_left: f64,
    pub mass_right: f64,
    pub norm: f64,
}

impl SeriesRecord {
    pub fn values(&self) -> [f64; 14] {
        [
            self.t,
            self.p_b,
            self.p_kh[0],
            self.p_kh[1],
            self.p_kh_total,
            self.sigma_x,
            self.mean_x_lab,
            self.mean_x_kh,
            self.autocorr.re,
            self.autocorr.im,
            self.autocorr.norm_sqr(),
            self.mass_left,
            self.mass_right,
            self.norm,
        ]
    }
}

/// Series recorder for propagation runs.
///
/// For lab-frame states the bound-state population and `σ_x` use the lab
/// state; KH populations, autocorrelation and half-line masses use the
/// state transformed to the KH frame. For KH-frame states everything is
/// evaluated on the KH state and the lab columns are NaN.
pub struct Recorder<'a> {
    transform: Option<FrameTransform<'a>>,
    atomic_ground: Option<WaveFunction>,
    kh_states: Vec<WaveFunction>,
    reference: Option<WaveFunction>,
    window: f64,
    records: Vec<SeriesRecord>,
}

impl<'a> Recorder<'a> {
    /// `kh_states` must be KH-frame; `atomic_ground` lab-frame. A lab
    /// recorder needs `transform`.
    pub fn new(
        transform: Option<FrameTransform<'a>>,
        atomic_ground: Option<WaveFunction>,
        kh_states: Vec<WaveFunction>,
    ) -> Result<Self> {
        if let Some(phi) = &atomic_ground {
            phi.expect_frame(Frame::Lab)?;
        }
        for phi in &kh_states {
            phi.expect_frame(Frame::Kh)?;
        }
        Ok(Self {
            transform,
            atomic_ground,
            kh_states,
            reference: None,
            window: WINDOW,
            records: Vec::new(),
        })
    }

    /// Autocorrelation reference (KH frame); defaults to the first observed state.
    pub fn with_reference(mut self, reference: WaveFunction) -> Result<Self> {
        reference.expect_frame(Frame::Kh)?;
        self.reference = Some(reference);
        Ok(self)
    }

    /// Half width of the trapped window used for `σ_x` and the half-line masses.
    pub fn with_window(mut self, window: f64) -> Result<Self> {
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::param("window", alloc::format!("must be positive, got {window}")));
        }
        self.window = window;
        Ok(self)
    }

    pub fn records(&self) -> &[SeriesRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SeriesRecord> {
        self.records
    }

    /// Computes one record for `psi` at `t`.
    pub fn record(&mut self, t: f64, psi: &WaveFunction) -> Result<SeriesRecord> {
        let nan = f64::NAN;
        let (kh, p_b, mean_x_lab) = match psi.frame() {
            Frame::Lab => {
                let tr = self.transform.as_ref().ok_or_else(|| {
                    Error::param(
                        "recorder",
                        "a lab-frame state needs the field cache for the KH transform",
                    )
                })?;
                let p_b = match &self.atomic_ground {
                    Some(phi) => population(psi, phi)?,
                    None => nan,
                };
                (tr.lab_to_kh(psi, t)?, p_b, expectation_x(psi))
            }
            Frame::Kh => (psi.clone(), nan, nan),
        };
        let mut p_kh = [nan; 2];
        let mut total = 0.0;
        for (i, phi) in self.kh_states.iter().enumerate() {
            let p = population(&kh, phi)?;
            if i < 2 {
                p_kh[i] = p;
            }
            total += p;
        }
        let p_kh_total = if self.kh_states.is_empty() { nan } else { total };
        let sigma_x = match trapped_width(psi, -self.window, self.window) {
            Ok(s) => s,
            Err(Error::EmptyWindow { .. }) => nan,
            Err(e) => return Err(e),
        };
        if self.reference.is_none() {
            self.reference = Some(kh.clone());
        }
        let autocorr = autocorrelation(self.reference.as_ref().expect("set above"), &kh)?;
        let (mass_left, mass_right) = half_line_masses(&kh, self.window);
        let rec = SeriesRecord {
            t,
            p_b,
            p_kh,
            p_kh_total,
            sigma_x,
            mean_x_lab,
            mean_x_kh: expectation_x(&kh),
            autocorr,
            mass_left,
            mass_right,
            norm: psi.norm_sqr(),
        };
        self.records.push(rec);
        Ok(rec)
    }

    /// Column `index` of [`CSV_COLUMNS`] as a series.
    pub fn series(&self, index: usize) -> ObservableSeries {
        let mut s = ObservableSeries::new(CSV_COLUMNS[index]);
        for r in &self.records {
            let _ = s.push(r.t, r.values()[index]);
        }
        s
    }
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, _step: usize, t: f64, psi: &WaveFunction) -> Result<()> {
        self.record(t, psi).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SpatialGrid;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(-200.0, 200.0, 4096).unwrap()
    }

    #[test]
    fn uniform_window_width() {
        let g = grid();
        let psi = WaveFunction::from_fn(g, Frame::Lab, |x| {
            Complex::new(if x.abs() <= 100.0 { 0.1 } else { 0.0 }, 0.0)
        });
        let s = trapped_width(&psi, -60.0, 60.0).unwrap();
        // Discrete uniform distribution on the grid nodes inside the window.
        let nodes: Vec<f64> = g.points().filter(|x| x.abs() <= 60.0).collect();
        let m = nodes.iter().sum::<f64>() / nodes.len() as f64;
        let var = nodes.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / nodes.len() as f64;
        assert!((s - var.sqrt()).abs() < 1e-9);
        assert!((s - 120.0 / 12f64.sqrt()).abs() < 0.1);
    }

    #[test]
    fn point_mass_and_empty_window() {
        let g = grid();
        let j = g.nearest_index(10.0);
        let mut amps = alloc::vec![Complex::new(0.0, 0.0); g.len()];
        amps[j] = Complex::new(1.0, 0.0);
        let psi = WaveFunction::new(g, amps, Frame::Lab).unwrap();
        assert!(trapped_width(&psi, -60.0, 60.0).unwrap() < g.dx());
        let far = WaveFunction::gaussian(g, Frame::Lab, 150.0, 2.0, 0.0);
        assert!(matches!(
            trapped_width(&far, -60.0, 60.0),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn symmetric_state_observables() {
        let g = grid();
        let psi = WaveFunction::gaussian(g, Frame::Kh, 0.0, 5.0, 0.0);
        assert!(expectation_x(&psi).abs() < 1e-8);
        let (l, r) = half_line_masses(&psi, 60.0);
        assert!((l - r).abs() < 1e-8);
        assert!(l + r <= 1.0);
        assert!((population(&psi, &psi).unwrap() - 1.0).abs() < 1e-10);
        assert!((autocorrelation(&psi, &psi).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-12);
        let lab = psi.clone().with_frame(Frame::Lab);
        assert!(population(&lab, &psi).is_err());
    }

    #[test]
    fn series_requires_increasing_time() {
        let mut s = ObservableSeries::new("x");
        s.push(0.0, 1.0).unwrap();
        s.push(1.0, 2.0).unwrap();
        assert!(s.push(1.0, 3.0).is_err());
        assert_eq!(s.between(0.5, 2.0).count(), 1);
    }

    #[test]
    fn kh_recorder_marks_lab_columns_nan() {
        let g = grid();
        let psi = WaveFunction::gaussian(g, Frame::Kh, -10.0, 3.0, 0.0);
        let mut rec = Recorder::new(None, None, alloc::vec![psi.clone()]).unwrap();
        let r = rec.record(0.0, &psi).unwrap();
        assert!(r.p_b.is_nan() && r.mean_x_lab.is_nan() && r.p_kh[1].is_nan());
        assert!((r.p_kh[0] - 1.0).abs() < 1e-12);
        assert!((r.autocorr.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(r.mass_left > 0.99);
        assert!(rec.record(1.0, &psi.clone().with_frame(Frame::Lab)).is_err());
    }
}
