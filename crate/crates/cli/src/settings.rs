//! Typed view of a [`Config`].

use std::path::PathBuf;

use khps_core::eigen::{FdDomain, ImaginaryTimeOptions};
use khps_core::laser::PulseParams;
use khps_core::phasespace::WignerWindow;
use khps_core::potential::PotentialModel;
use khps_core::propagator::{AbsorberConfig, Mode};
use khps_core::SpatialGrid;

use crate::config::Config;
use crate::error::{Failure, InModule, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Potential,
    Field,
    Eigen,
    /// Wigner functions of the eigenstates and the coherent state at t = 0.
    Wigner0,
    Portrait,
    Propagate,
}

impl Stage {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "potential" => Stage::Potential,
            "field" => Stage::Field,
            "eigen" => Stage::Eigen,
            "wigner0" => Stage::Wigner0,
            "portrait" => Stage::Portrait,
            "propagate" => Stage::Propagate,
            other => return Err(Failure::new("config", format!("unknown stage `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    /// Atomic ground state in the lab frame.
    AtomicGround,
    KhGround,
    KhExcited,
    /// `(φ₀ + s·φ₁)/√2` with `s = run.coherent_sign`.
    KhCoherent,
    Snapshot,
}

impl Initial {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "atomic_ground" => Initial::AtomicGround,
            "kh_ground" => Initial::KhGround,
            "kh_excited" => Initial::KhExcited,
            "kh_coherent" => Initial::KhCoherent,
            "snapshot" => Initial::Snapshot,
            other => return Err(Failure::new("config", format!("unknown initial state `{other}`"))),
        })
    }
}

/// Propagation leg: the main run or the restarted continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub mode: Mode,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub wigner_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub stages: Vec<Stage>,
    pub initial: Initial,
    pub initial_file: Option<PathBuf>,
    pub coherent_sign: f64,
    pub t0: f64,
    pub dt: f64,
    pub cadence: usize,
    pub main: Leg,
    pub restart_at: Option<f64>,
    pub restart: Leg,
    pub grid: SpatialGrid,
    pub pulse: PulseParams,
    pub dt_field: f64,
    pub field_stride: usize,
    pub model: PotentialModel,
    pub alpha0: f64,
    pub quadrature_n: usize,
    pub fd: FdDomain,
    pub imag: ImaginaryTimeOptions,
    pub absorber: Option<AbsorberConfig>,
    pub window: f64,
    pub dump_half_width: f64,
    pub wigner: WignerWindow,
    pub tail_cut: f64,
    pub levels: Vec<f64>,
    pub portrait_n: usize,
}

fn c<T>(r: std::result::Result<T, crate::config::ConfigError>) -> Result<T> {
    r.in_module("config")
}

impl Settings {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let stages = cfg
            .list("run.stages")
            .iter()
            .map(|s| Stage::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let grid = SpatialGrid::new(
            c(cfg.f64("grid.x_min"))?,
            c(cfg.f64("grid.x_max"))?,
            c(cfg.usize("grid.n_points"))?,
        )
        .in_module("config")?;
        let omega = c(cfg.f64("pulse.omega"))?;
        let cycles = (
            c(cfg.f64("pulse.ramp_cycles"))?,
            c(cfg.f64("pulse.flat_end_cycles"))?,
            c(cfg.f64("pulse.total_cycles"))?,
        );
        let pulse = match c(cfg.opt_f64("pulse.eps0"))? {
            Some(eps0) => PulseParams::new(eps0, omega, cycles.0, cycles.1, cycles.2),
            None => {
                PulseParams::from_intensity(c(cfg.f64("pulse.intensity_wcm2"))?, omega, cycles.0, cycles.1, cycles.2)
            }
        }
        .in_module("laser")?;
        let dt = c(cfg.f64("run.dt"))?;
        let dt_field = c(cfg.opt_f64("pulse.dt_field"))?.unwrap_or(0.5 * dt);
        let mode = |key: &str| -> Result<Mode> { cfg.raw(key).parse::<Mode>().in_module("config") };
        let t_final = pulse.t_final();
        let main = Leg {
            mode: mode("run.mode")?,
            t_end: c(cfg.opt_f64("run.t_end"))?.unwrap_or(t_final),
            snapshots: c(cfg.f64_list("run.snapshots"))?,
            wigner_times: c(cfg.f64_list("run.wigner_times"))?,
        };
        let restart = Leg {
            mode: mode("restart.mode")?,
            t_end: c(cfg.opt_f64("restart.t_end"))?.unwrap_or(t_final),
            snapshots: c(cfg.f64_list("restart.snapshots"))?,
            wigner_times: c(cfg.f64_list("restart.wigner_times"))?,
        };
        let absorber = if c(cfg.bool("absorber.enabled"))? {
            Some(AbsorberConfig {
                inner_half_width: c(cfg.f64("absorber.inner_half_width"))?,
                width: c(cfg.f64("absorber.width"))?,
                exponent: c(cfg.f64("absorber.exponent"))?,
                reference_dt: c(cfg.f64("absorber.reference_dt"))?,
            })
        } else {
            None
        };
        let initial_file = cfg
            .is_set("run.initial_file")
            .then(|| PathBuf::from(cfg.raw("run.initial_file")));
        let initial = Initial::parse(cfg.raw("run.initial"))?;
        if initial == Initial::Snapshot && initial_file.is_none() {
            return Err(Failure::new("config", "run.initial = snapshot needs run.initial_file"));
        }
        let cadence = c(cfg.usize("run.cadence"))?;
        if cadence == 0 {
            return Err(Failure::new("config", "run.cadence must be at least 1"));
        }
        Ok(Self {
            stages,
            initial,
            initial_file,
            coherent_sign: c(cfg.f64("run.coherent_sign"))?,
            t0: c(cfg.f64("run.t0"))?,
            dt,
            cadence,
            main,
            restart_at: c(cfg.opt_f64("run.restart_at"))?,
            restart,
            grid,
            pulse,
            dt_field,
            field_stride: c(cfg.usize("field.dump_stride"))?,
            model: PotentialModel {
                depth: c(cfg.f64("potential.depth"))?,
                core_sq: c(cfg.f64("potential.core_sq"))?,
                width: c(cfg.f64("potential.width"))?,
            },
            alpha0: c(cfg.opt_f64("kh.alpha0"))?.unwrap_or_else(|| pulse.alpha0()),
            quadrature_n: c(cfg.usize("kh.quadrature_n"))?,
            fd: FdDomain {
                half_width: c(cfg.f64("eigen.fd_half_width"))?,
                dx: c(cfg.f64("eigen.fd_dx"))?,
            },
            imag: ImaginaryTimeOptions {
                dt_imag: c(cfg.f64("eigen.dt_imag"))?,
                tol: c(cfg.f64("eigen.tol"))?,
                max_steps: c(cfg.usize("eigen.max_steps"))?,
                ..ImaginaryTimeOptions::default()
            },
            absorber,
            window: c(cfg.f64("observables.window"))?,
            dump_half_width: c(cfg.f64("output.half_width"))?,
            wigner: WignerWindow {
                x_min: c(cfg.f64("wigner.x_min"))?,
                x_max: c(cfg.f64("wigner.x_max"))?,
                n_x: c(cfg.usize("wigner.n_x"))?,
                p_min: c(cfg.f64("wigner.p_min"))?,
                p_max: c(cfg.f64("wigner.p_max"))?,
                n_p: c(cfg.usize("wigner.n_p"))?,
                xi_max: c(cfg.f64("wigner.xi_max"))?,
            },
            tail_cut: c(cfg.f64("wigner.tail_cut"))?,
            levels: c(cfg.f64_list("portrait.levels"))?,
            portrait_n: c(cfg.usize("portrait.n_x"))?,
        })
    }

    /// Last time any stage needs field values for.
    pub fn field_horizon(&self) -> f64 {
        [self.pulse.t_final(), self.main.t_end, self.restart.t_end]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let s = Settings::from_config(&Config::default()).unwrap();
        assert_eq!(s.stages, vec![Stage::Propagate]);
        assert_eq!(s.grid.len(), 16384);
        assert!((s.pulse.eps0 - 0.040301).abs() < 1e-5);
        assert!((s.alpha0 - s.pulse.alpha0()).abs() < 1e-15);
        assert_eq!(s.dt_field, 0.025);
        assert_eq!(s.main.t_end, s.pulse.t_final());
    }

    #[test]
    fn snapshot_initial_needs_file() {
        let c = Config::parse("run.initial = snapshot").unwrap();
        let e = Settings::from_config(&c).unwrap_err();
        assert_eq!(e.module, "config");
    }
}
