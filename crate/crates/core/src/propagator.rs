//! Strang split-operator propagation for the length-gauge lab Hamiltonian
//! and for the time-averaged KH Hamiltonian, with a multiplicative absorber.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::laser::FieldCache;
use crate::potential::AveragedPotential;
use crate::{Complex, Error, Frame, Result, SpatialGrid, Spectral, TimeGrid, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `p²/2 + V(x) + x·ε(t)`, lab frame.
    LabFull,
    /// `p²/2 + V₀(x; α₀)`, KH frame.
    KhAveraged,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::LabFull => "lab_full",
            Mode::KhAveraged => "kh_averaged",
        }
    }

    pub fn frame(&self) -> Frame {
        match self {
            Mode::LabFull => Frame::Lab,
            Mode::KhAveraged => Frame::Kh,
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab_full" => Ok(Mode::LabFull),
            "kh_averaged" => Ok(Mode::KhAveraged),
            other => Err(Error::param("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// `M(x) = 1` for `|x| ≤ inner_half_width`, else
/// `cos^{exponent}(π(|x| − inner)/(2·width))`, the per-step factor at
/// `reference_dt`; a step of length `dt` applies `M^{dt/reference_dt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorberConfig {
    pub inner_half_width: f64,
    pub width: f64,
    pub exponent: f64,
    pub reference_dt: f64,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        Self {
            inner_half_width: 600.0,
            width: 900.0,
            exponent: 0.125,
            reference_dt: 0.05,
        }
    }
}

impl AbsorberConfig {
    pub fn value(&self, x: f64) -> f64 {
        let d = x.abs() - self.inner_half_width;
        if d <= 0.0 {
            return 1.0;
        }
        let arg = (0.5 * PI * d / self.width).min(0.5 * PI);
        arg.cos().max(f64::MIN_POSITIVE).powf(self.exponent)
    }

    pub fn mask(&self, grid: &SpatialGrid, dt: f64) -> Vec<f64> {
        let power = dt / self.reference_dt;
        grid.points().map(|x| self.value(x).powf(power)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner_half_width >= 0.0 && self.width > 0.0 && self.exponent > 0.0 && self.reference_dt > 0.0) {
            return Err(Error::param("absorber", format!("non-positive parameter in {self:?}")));
        }
        Ok(())
    }
}

/// One-step propagator bound to a grid, a Hamiltonian and a time step.
#[derive(Debug, Clone)]
pub struct Propagator {
    mode: Mode,
    spectral: Spectral,
    dt: f64,
    potential: Vec<f64>,
    half_potential: Vec<Complex>,
    kinetic: Vec<Complex>,
    mask: Option<Vec<f64>>,
    field: Option<FieldCache>,
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

impl Propagator {
    fn build(
        mode: Mode,
        grid: SpatialGrid,
        potential: Vec<f64>,
        dt: f64,
        absorber: Option<AbsorberConfig>,
        field: Option<FieldCache>,
    ) -> Result<Self> {
        check_dt(dt)?;
        if potential.len() != grid.len() {
            return Err(Error::param(
                "potential",
                format!("{} samples for a {}-point grid", potential.len(), grid.len()),
            ));
        }
        let spectral = Spectral::new(grid)?;
        let half_potential = potential
            .iter()
            .map(|v| Complex::from_polar(1.0, -0.5 * dt * v))
            .collect();
        let kinetic = spectral
            .fft_momenta()
            .iter()
            .map(|p| Complex::from_polar(1.0, -0.5 * p * p * dt))
            .collect();
        let mask = match absorber {
            Some(a) => {
                a.validate()?;
                Some(a.mask(&grid, dt))
            }
            None => None,
        };
        Ok(Self {
            mode,
            spectral,
            dt,
            potential,
            half_potential,
            kinetic,
            mask,
            field,
        })
    }

    /// Lab-frame propagation; `potential` holds `V(x)` on `grid`.
    pub fn lab_full(
        grid: SpatialGrid,
        potential: Vec<f64>,
        field: FieldCache,
        dt: f64,
        absorber: Option<AbsorberConfig>,
    ) -> Result<Self> {
        check_dt(dt)?;
        let ratio = dt / field.dt();
        if !(ratio >= 1.0 - 1e-9 && (ratio - ratio.round()).abs() < 1e-9) {
            return Err(Error::param(
                "dt_field",
                format!("field step {} does not divide dt = {dt}", field.dt()),
            ));
        }
        Self::build(Mode::LabFull, grid, potential, dt, absorber, Some(field))
    }

    /// Propagation under the time-averaged KH potential.
    pub fn kh_averaged(avg: &AveragedPotential, dt: f64, absorber: Option<AbsorberConfig>) -> Result<Self> {
        Self::build(
            Mode::KhAveraged,
            *avg.grid(),
            avg.samples().to_vec(),
            dt,
            absorber,
            None,
        )
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn field(&self) -> Option<&FieldCache> {
        self.field.as_ref()
    }

    /// Field-free energy `⟨p²/2 + V⟩` (the full Hamiltonian in `KhAveraged` mode).
    pub fn energy(&self, psi: &WaveFunction) -> f64 {
        self.spectral.energy(psi, &self.potential)
    }

    /// Half-step potential factors at time `t` (midpoint field for `LabFull`).
    fn half_kick(&self, t: f64) -> Vec<Complex> {
        let Some(field) = &self.field else {
            return self.half_potential.clone();
        };
        let eps = field.params().field(t + 0.5 * self.dt);
        if eps == 0.0 {
            return self.half_potential.clone();
        }
        let grid = self.spectral.grid();
        let c = 0.5 * self.dt * eps;
        let dx = grid.dx();
        let step = Complex::from_polar(1.0, -c * dx);
        let mut out = Vec::with_capacity(grid.len());
        let mut phase = Complex::new(1.0, 0.0);
        // Geometric recurrence for exp(−i c x_j), re-seeded exactly every 64 points.
        for (j, h) in self.half_potential.iter().enumerate() {
            if j % 64 == 0 {
                phase = Complex::from_polar(1.0, -c * grid.x(j));
            } else {
                phase *= step;
            }
            out.push(h * phase);
        }
        out
    }

    /// Advances `psi` from `t` to `t + dt`; `step` labels errors.
    pub fn step(&self, psi: &mut WaveFunction, t: f64, step: usize) -> Result<()> {
        let kick = self.half_kick(t);
        self.step_with(psi, &kick);
        if !psi.is_finite() {
            return Err(Error::NonFinite { step, t: t + self.dt });
        }
        Ok(())
    }

    fn step_with(&self, psi: &mut WaveFunction, kick: &[Complex]) {
        let data = psi.amplitudes_mut();
        for (z, k) in data.iter_mut().zip(kick) {
            *z *= k;
        }
        self.spectral.forward(data);
        for (z, k) in data.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.spectral.inverse(data);
        match &self.mask {
            Some(mask) => {
                for ((z, k), m) in data.iter_mut().zip(kick).zip(mask) {
                    *z *= k * m;
                }
            }
            None => {
                for (z, k) in data.iter_mut().zip(kick) {
                    *z *= k;
                }
            }
        }
    }

    /// Runs `job`, calling `observer` at step 0 and every `cadence` steps
    /// (always including the last step).
    pub fn propagate(&self, job: &PropagationJob, observer: &mut dyn Observer) -> Result<PropagationOutput> {
        job.initial.expect_frame(self.mode.frame())?;
        self.grid().check_same(job.initial.grid())?;
        if (job.time.dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::param(
                "dt",
                format!("job step {} differs from the propagator step {}", job.time.dt, self.dt),
            ));
        }
        if job.cadence == 0 {
            return Err(Error::param("cadence", "must be at least one step"));
        }
        let mut pending = job.snapshot_steps()?;
        pending.reverse();
        let mut snapshots = Vec::new();
        let mut psi = job.initial.clone();
        let initial_norm = psi.norm_sqr();
        let n = job.time.n_steps;
        for k in 0..=n {
            let t = job.time.time(k);
            if k > 0 {
                self.step(&mut psi, job.time.time(k - 1), k)?;
            }
            if k % job.cadence == 0 || k == n {
                observer.observe(k, t, &psi)?;
            }
            while let Some(&(requested, step)) = pending.last() {
                if step != k {
                    break;
                }
                snapshots.push(Snapshot {
                    requested,
                    t,
                    step: k,
                    state: psi.clone(),
                });
                pending.pop();
            }
        }
        let final_norm = psi.norm_sqr();
        Ok(PropagationOutput {
            snapshots,
            absorbed: initial_norm - final_norm,
            t_final: job.time.t_end(),
            final_state: psi,
        })
    }
}

/// Receives read-only views of the state during [`Propagator::propagate`].
pub trait Observer {
    fn observe(&mut self, step: usize, t: f64, psi: &WaveFunction) -> Result<()>;
}

/// Observer that records nothing.
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: usize, _: f64, _: &WaveFunction) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(usize, f64, &WaveFunction) -> Result<()>> Observer for F {
    fn observe(&mut self, step: usize, t: f64, psi: &WaveFunction) -> Result<()> {
        self(step, t, psi)
    }
}

#[derive(Debug, Clone)]
pub struct PropagationJob {
    pub initial: WaveFunction,
    pub time: TimeGrid,
    pub snapshot_times: Vec<f64>,
    pub cadence: usize,
}

impl PropagationJob {
    pub fn new(initial: WaveFunction, time: TimeGrid) -> Self {
        Self {
            initial,
            time,
            snapshot_times: Vec::new(),
            cadence: 20,
        }
    }

    /// `(requested time, step)` pairs sorted by step.
    fn snapshot_steps(&self) -> Result<Vec<(f64, usize)>> {
        let (start, end) = (self.time.t0, self.time.t_end());
        let mut out = Vec::with_capacity(self.snapshot_times.len());
        for &t in &self.snapshot_times {
            if !(t >= start - 0.5 * self.time.dt && t <= end + 0.5 * self.time.dt) {
                return Err(Error::TimeOutOfRange { t, start, end });
            }
            let k = ((t - start) / self.time.dt).round().max(0.0) as usize;
            out.push((t, k.min(self.time.n_steps)));
        }
        out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.total_cmp(&b.0)));
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested: f64,
    /// Actual time of the stored step.
    pub t: f64,
    pub step: usize,
    pub state: WaveFunction,
}

#[derive(Debug, Clone)]
pub struct PropagationOutput {
    pub snapshots: Vec<Snapshot>,
    pub final_state: WaveFunction,
    pub t_final: f64,
    /// `‖ψ(t0)‖² − ‖ψ(t_end)‖²`.
    pub absorbed: f64,
}

/// `exp(−iEt)`.
pub fn time_evolution_phase(energy: f64, t: f64) -> Complex {
    Complex::from_polar(1.0, -energy * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::PulseParams;
    use crate::potential::{kh_averaged_potential, PotentialModel};

    fn small_grid() -> SpatialGrid {
        SpatialGrid::new(-200.0, 200.0, 2048).unwrap()
    }

    #[test]
    fn absorber_shape() {
        let a = AbsorberConfig::default();
        assert_eq!(a.value(0.0), 1.0);
        assert_eq!(a.value(600.0), 1.0);
        assert!(a.value(1000.0) < 1.0 && a.value(1000.0) > a.value(1400.0));
        assert!(a.value(1500.0) > 0.0);
        let g = SpatialGrid::production();
        let m1 = a.mask(&g, 0.05);
        let m2 = a.mask(&g, 0.025);
        for (x, y) in m1.iter().zip(&m2) {
            assert!((y * y - x).abs() < 1e-14);
        }
    }

    #[test]
    fn free_gaussian_dispersion() {
        let g = small_grid();
        let v = alloc::vec![0.0; g.len()];
        let field = FieldCache::build(PulseParams::new(0.0, 0.0628, 2.0, 10.0, 12.0).unwrap(), 0.025, 10.0).unwrap();
        let prop = Propagator::lab_full(g, v, field, 0.05, None).unwrap();
        let sigma0 = 2.0;
        let mut psi = WaveFunction::gaussian(g, Frame::Lab, 0.0, sigma0, 0.0);
        for k in 0..1000 {
            prop.step(&mut psi, k as f64 * 0.05, k).unwrap();
        }
        let t: f64 = 50.0;
        let dx = g.dx();
        let (m1, m2) = g
            .points()
            .zip(psi.density())
            .fold((0.0, 0.0), |(a, b), (x, d)| (a + x * d * dx, b + x * x * d * dx));
        let width2 = m2 - m1 * m1;
        let oracle = sigma0 * sigma0 + t * t / (4.0 * sigma0 * sigma0);
        assert!(((width2 - oracle) / oracle).abs() < 1e-4, "{width2} vs {oracle}");
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn averaged_eigenfunction_is_stationary() {
        let g = small_grid();
        let avg = kh_averaged_potential(&PotentialModel::default(), &g, 10.23, 256).unwrap();
        let opts = crate::eigen::ImaginaryTimeOptions {
            dt_imag: 0.2,
            tol: 1e-14,
            ..Default::default()
        };
        let gs = crate::eigen::imaginary_time_ground_state(avg.samples(), &g, &opts).unwrap();
        let phi = gs.state.clone().with_frame(Frame::Kh);
        let prop = Propagator::kh_averaged(&avg, 0.05, None).unwrap();
        let mut psi = phi.clone();
        prop.step(&mut psi, 0.0, 1).unwrap();
        let c = phi.inner(&psi).unwrap();
        assert!((c.norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_wrong_frame_and_bad_snapshots() {
        let g = small_grid();
        let avg = kh_averaged_potential(&PotentialModel::default(), &g, 10.23, 256).unwrap();
        let prop = Propagator::kh_averaged(&avg, 0.05, None).unwrap();
        let lab = WaveFunction::gaussian(g, Frame::Lab, 0.0, 3.0, 0.0);
        let job = PropagationJob::new(lab, TimeGrid::new(0.0, 0.05, 10).unwrap());
        assert!(matches!(
            prop.propagate(&job, &mut NoObserver),
            Err(Error::FrameMismatch { .. })
        ));
        let kh = WaveFunction::gaussian(g, Frame::Kh, 0.0, 3.0, 0.0);
        let mut job = PropagationJob::new(kh, TimeGrid::new(0.0, 0.05, 10).unwrap());
        job.snapshot_times = alloc::vec![5.0];
        assert!(matches!(
            prop.propagate(&job, &mut NoObserver),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn snapshots_and_cadence() {
        let g = small_grid();
        let avg = kh_averaged_potential(&PotentialModel::default(), &g, 10.23, 256).unwrap();
        let prop = Propagator::kh_averaged(
            &avg,
            0.05,
            Some(AbsorberConfig {
                inner_half_width: 100.0,
                width: 100.0,
                ..Default::default()
            }),
        )
        .unwrap();
        let kh = WaveFunction::gaussian(g, Frame::Kh, 0.0, 3.0, 0.0);
        let mut job = PropagationJob::new(kh, TimeGrid::new(10.0, 0.05, 100).unwrap());
        job.snapshot_times = alloc::vec![12.51, 10.0];
        job.cadence = 30;
        let mut seen = Vec::new();
        let mut obs = |k: usize, _t: f64, _psi: &WaveFunction| {
            seen.push(k);
            Ok(())
        };
        let out = prop.propagate(&job, &mut obs).unwrap();
        assert_eq!(seen, alloc::vec![0, 30, 60, 90, 100]);
        assert_eq!(out.snapshots.len(), 2);
        assert_eq!(out.snapshots[0].step, 0);
        assert_eq!(out.snapshots[1].step, 50);
        assert!((out.snapshots[1].t - 12.5).abs() < 1e-12);
        assert!(out.absorbed > -1e-12);
    }

    #[test]
    fn phase_factor() {
        assert_eq!(time_evolution_phase(-0.3, 0.0), Complex::new(1.0, 0.0));
        assert!((time_evolution_phase(-0.01098, 1234.5).norm() - 1.0).abs() < 1e-15);
        let (e0, e1) = (-0.01098, -0.00282);
        let t10 = 2.0 * PI / (e1 - e0);
        let rel = time_evolution_phase(e0, t10) / time_evolution_phase(e1, t10);
        assert!((rel - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }
}
