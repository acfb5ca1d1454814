//! Stage execution shared by every verb.

use std::cell::OnceCell;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use khps_core::eigen::{
    beat, coherent_superposition, imaginary_time_ground_state, kh_eigenpairs, EigenPair, FdSpectrum,
};
use khps_core::frame::FrameTransform;
use khps_core::laser::FieldCache;
use khps_core::observables::{Recorder, SeriesRecord};
use khps_core::phasespace::{
    phase_portrait, separatrix_energy, wigner, wigner_marginals, SuperpositionWigner, WignerGrid,
};
use khps_core::potential::{kh_averaged_potential, AveragedPotential};
use khps_core::propagator::{Mode, PropagationJob, Propagator};
use khps_core::{Complex, Frame, TimeGrid, WaveFunction};

use crate::config::Config;
use crate::error::{Failure, InModule, Result};
use crate::formats;
use crate::manifest::{sha256_hex, FailureRecord, FileEntry, Manifest, OutputDir, ParentLink, MANIFEST_NAME};
use crate::settings::{Initial, Leg, Settings, Stage};

/// Lazily computed shared quantities for one run.
pub struct Context {
    pub config: Config,
    pub settings: Settings,
    cache: OnceCell<FieldCache>,
    averaged: OnceCell<AveragedPotential>,
    kh: OnceCell<(FdSpectrum, Vec<EigenPair>)>,
    atomic: OnceCell<EigenPair>,
}

impl Context {
    pub fn new(config: Config) -> Result<Self> {
        let settings = Settings::from_config(&config)?;
        Ok(Self {
            config,
            settings,
            cache: OnceCell::new(),
            averaged: OnceCell::new(),
            kh: OnceCell::new(),
            atomic: OnceCell::new(),
        })
    }

    pub fn cache(&self) -> Result<&FieldCache> {
        if self.cache.get().is_none() {
            let s = &self.settings;
            let c = FieldCache::build(s.pulse, s.dt_field, s.field_horizon()).in_module("laser")?;
            let _ = self.cache.set(c);
        }
        Ok(self.cache.get().expect("initialized above"))
    }

    pub fn averaged(&self) -> Result<&AveragedPotential> {
        if self.averaged.get().is_none() {
            let s = &self.settings;
            let a = kh_averaged_potential(&s.model, &s.grid, s.alpha0, s.quadrature_n).in_module("potential")?;
            let _ = self.averaged.set(a);
        }
        Ok(self.averaged.get().expect("initialized above"))
    }

    /// FD spectrum and the resampled KH eigenpairs, ascending.
    pub fn kh(&self) -> Result<&(FdSpectrum, Vec<EigenPair>)> {
        if self.kh.get().is_none() {
            let pairs = kh_eigenpairs(self.averaged()?, &self.settings.fd).in_module("eigen")?;
            if pairs.1.len() < 2 {
                return Err(Failure::new(
                    "eigen",
                    format!(
                        "averaged potential holds {} bound state(s); two are needed",
                        pairs.1.len()
                    ),
                ));
            }
            let _ = self.kh.set(pairs);
        }
        Ok(self.kh.get().expect("initialized above"))
    }

    pub fn kh_states(&self) -> Result<&[EigenPair]> {
        Ok(&self.kh()?.1)
    }

    pub fn atomic(&self) -> Result<&EigenPair> {
        if self.atomic.get().is_none() {
            let s = &self.settings;
            let v = s.model.sample(&s.grid);
            let g = imaginary_time_ground_state(&v, &s.grid, &s.imag).in_module("eigen")?;
            let _ = self.atomic.set(g);
        }
        Ok(self.atomic.get().expect("initialized above"))
    }

    pub fn coherent(&self) -> Result<WaveFunction> {
        let k = self.kh_states()?;
        let w = (
            Complex::new(FRAC_1_SQRT_2, 0.0),
            Complex::new(self.settings.coherent_sign * FRAC_1_SQRT_2, 0.0),
        );
        coherent_superposition(&k[0], &k[1], w).in_module("eigen")
    }

    pub fn transform(&self) -> Result<FrameTransform<'_>> {
        FrameTransform::new(self.cache()?, self.settings.grid).in_module("frame")
    }

    /// Records every quantity computed so far.
    fn record_derived(&self, m: &mut Manifest) {
        let p = &self.settings.pulse;
        m.derive("pulse.eps0", p.eps0);
        m.derive("pulse.period", p.period());
        m.derive("pulse.alpha0", p.alpha0());
        m.derive("pulse.t_final", p.t_final());
        m.derive("kh.alpha0", self.settings.alpha0);
        m.derive("grid.dx", self.settings.grid.dx());
        if let Some(c) = self.cache.get() {
            let r = c.residuals();
            m.residual("field.a_final", r.a_final);
            m.residual("field.alpha_final", r.alpha_final);
            m.residual("field.alpha_final_rel", r.alpha_final_rel);
            m.residual("field.endpoint_within_1e-6", r.within(1e-6));
        }
        if let Some(a) = self.averaged.get() {
            m.derive("kh.v0_at_0", a.value_at(0.0));
            m.derive("kh.v0_min", a.min_value());
            m.derive(
                "kh.v0_minima_x",
                a.local_minima().iter().map(|e| e.x).collect::<Vec<_>>(),
            );
            m.derive(
                "kh.v0_maxima_x",
                a.local_maxima().iter().map(|e| e.x).collect::<Vec<_>>(),
            );
            m.residual("kh.v0_evenness_defect", a.evenness_defect());
            match separatrix_energy(a) {
                Ok(e) => m.derive("kh.e_sep", e),
                Err(e) => m.derive("kh.e_sep", Value::String(e.to_string())),
            }
        }
        if let Some(g) = self.atomic.get() {
            m.derive("eigen.atomic_energy", g.energy);
        }
        if let Some((spec, pairs)) = self.kh.get() {
            m.derive("eigen.kh_energies", pairs.iter().map(|p| p.energy).collect::<Vec<_>>());
            m.derive(
                "eigen.kh_fd_energies",
                spec.states.iter().map(|s| s.energy).collect::<Vec<_>>(),
            );
            m.derive(
                "eigen.kh_parities",
                pairs.iter().map(|p| p.parity.as_str()).collect::<Vec<_>>(),
            );
            m.derive("eigen.kh_discarded_near_zero", spec.discarded.clone());
            let (w, t) = beat(pairs[0].energy, pairs[1].energy);
            m.derive("eigen.omega10", w);
            m.derive("eigen.t10", t);
            let overlap = pairs[0]
                .state
                .inner(&pairs[1].state)
                .map(|z| z.norm())
                .unwrap_or(f64::NAN);
            m.residual("eigen.kh_overlap_01", overlap);
            let drift = spec
                .states
                .iter()
                .zip(pairs)
                .fold(0.0f64, |d, (s, p)| d.max((s.energy - p.energy).abs()));
            m.residual("eigen.kh_fd_vs_grid_energy", drift);
        }
    }
}

/// Formats a time for file names: `1900`, `0.5`.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

fn windowed<'a>(psi: &'a WaveFunction, half: f64) -> impl Iterator<Item = (f64, f64)> + 'a {
    psi.grid()
        .points()
        .zip(psi.density())
        .filter(move |(x, _)| x.abs() <= half)
}

fn write_state(out: &mut OutputDir, stem: &str, psi: &WaveFunction, t: f64, half: f64, real_part: bool) -> Result<()> {
    out.write(&format!("{stem}.khps"), &formats::encode_snapshot(psi, t))?;
    let table = if real_part {
        let rows = psi
            .grid()
            .points()
            .zip(psi.amplitudes())
            .filter(|(x, _)| x.abs() <= half)
            .map(|(x, z)| (x, z.re));
        formats::two_column(("x", "psi"), rows)
    } else {
        formats::two_column(("x", "density"), windowed(psi, half))
    };
    out.write(&format!("{stem}.txt"), table.as_bytes())
}

fn write_wigner(
    out: &mut OutputDir,
    m: &mut Manifest,
    name: &str,
    w: &WignerGrid,
    psi: &WaveFunction,
    tail_cut: f64,
) -> Result<()> {
    out.write(&format!("{name}.khpsw"), &formats::encode_wigner(w))?;
    let marg = wigner_marginals(w, psi).in_module("phasespace")?;
    m.residual(
        &format!("wigner.{name}"),
        json!({
            "integral": w.integral(),
            "max_imag": w.max_imag,
            "position_marginal": marg.position,
            "momentum_marginal": marg.momentum,
        }),
    );
    m.derive(
        &format!("wigner.{name}.tail_fraction"),
        w.momentum_tail_fraction(tail_cut),
    );
    Ok(())
}

fn stage_potential(ctx: &Context, out: &mut OutputDir, m: &mut Manifest) -> Result<()> {
    let s = &ctx.settings;
    let half = s.dump_half_width;
    let atomic = s
        .grid
        .points()
        .filter(|x| x.abs() <= half)
        .map(|x| (x, s.model.value(x)));
    out.write(
        "potential_atomic.txt",
        formats::two_column(("x", "V"), atomic).as_bytes(),
    )?;
    let avg = ctx.averaged()?;
    let kh = s
        .grid
        .points()
        .zip(avg.samples())
        .filter(|(x, _)| x.abs() <= half)
        .map(|(x, v)| (x, *v));
    out.write("potential_kh.txt", formats::two_column(("x", "V0"), kh).as_bytes())?;
    m.derive("potential.atomic_at_0", s.model.value(0.0));
    Ok(())
}

fn stage_field(ctx: &Context, out: &mut OutputDir, _m: &mut Manifest) -> Result<()> {
    let cache = ctx.cache()?;
    out.write(
        "field.txt",
        formats::field_table(cache, ctx.settings.field_stride).as_bytes(),
    )
}

fn stage_eigen(ctx: &Context, out: &mut OutputDir, _m: &mut Manifest) -> Result<()> {
    let half = ctx.settings.dump_half_width;
    let g = ctx.atomic()?;
    write_state(out, "eigen_atomic", &g.state, 0.0, half, true)?;
    for p in ctx.kh_states()? {
        write_state(out, &format!("eigen_kh_{}", p.index), &p.state, 0.0, half, true)?;
    }
    Ok(())
}

fn stage_wigner0(ctx: &Context, out: &mut OutputDir, m: &mut Manifest) -> Result<()> {
    let s = &ctx.settings;
    let k = ctx.kh_states()?;
    for p in &k[..2] {
        let w = wigner(&p.state, &s.wigner, 0.0).in_module("phasespace")?;
        write_wigner(out, m, &format!("wigner_kh_phi{}", p.index), &w, &p.state, s.tail_cut)?;
    }
    let coh = ctx.coherent()?;
    let direct = wigner(&coh, &s.wigner, 0.0).in_module("phasespace")?;
    write_wigner(out, m, "wigner_kh_coherent", &direct, &coh, s.tail_cut)?;
    let c = Complex::new(FRAC_1_SQRT_2, 0.0);
    let analytic =
        SuperpositionWigner::new(&k[0], &k[1], (c, c * s.coherent_sign), &s.wigner).in_module("phasespace")?;
    m.residual(
        "wigner.coherent_analytic_vs_direct",
        analytic.at(0.0).max_abs_diff(&direct),
    );
    Ok(())
}

fn stage_portrait(ctx: &Context, out: &mut OutputDir, m: &mut Manifest) -> Result<()> {
    let s = &ctx.settings;
    let avg = ctx.averaged()?;
    let e_sep = separatrix_energy(avg).in_module("phasespace")?;
    let mut levels = vec![e_sep];
    levels.extend(s.levels.iter().copied().filter(|&e| e != e_sep));
    let portrait =
        phase_portrait(avg, &levels, s.wigner.x_min, s.wigner.x_max, s.portrait_n).in_module("phasespace")?;
    out.write("portrait.txt", formats::portrait_table(&portrait).as_bytes())?;
    let worst = portrait
        .curves
        .iter()
        .fold(0.0f64, |r, c| r.max(c.energy_residual(avg)));
    m.residual("portrait.energy_residual", worst);
    m.derive("portrait.levels", levels);
    Ok(())
}

/// Builds the initial state in the frame the leg propagates in.
fn initial_state(ctx: &Context, mode: Mode, t0: f64) -> Result<WaveFunction> {
    let s = &ctx.settings;
    let psi = match s.initial {
        Initial::AtomicGround => ctx.atomic()?.state.clone(),
        Initial::KhGround => ctx.kh_states()?[0].state.clone(),
        Initial::KhExcited => ctx.kh_states()?[1].state.clone(),
        Initial::KhCoherent => ctx.coherent()?,
        Initial::Snapshot => {
            let path = s.initial_file.as_ref().expect("validated in settings");
            let snap = load_snapshot(path)?;
            return check_snapshot(snap, mode, t0, s, path);
        }
    };
    if psi.frame() == mode.frame() {
        return Ok(psi);
    }
    ctx.transform()?.to_frame(&psi, t0, mode.frame()).in_module("frame")
}

pub fn load_snapshot(path: &Path) -> Result<formats::SnapshotFile> {
    let bytes = std::fs::read(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    formats::decode_snapshot(&bytes)
}

fn check_snapshot(snap: formats::SnapshotFile, mode: Mode, t0: f64, s: &Settings, path: &Path) -> Result<WaveFunction> {
    if snap.state.frame() != mode.frame() {
        return Err(Failure::new(
            "frame",
            format!(
                "{} mode needs a {}-frame state but {} holds a {}-frame snapshot",
                mode.as_str(),
                mode.frame(),
                path.display(),
                snap.state.frame()
            ),
        ));
    }
    snap.state.grid().check_same(&s.grid).in_module("propagator")?;
    if (snap.t - t0).abs() > 1e-9 * t0.abs().max(1.0) {
        return Err(Failure::new(
            "propagator",
            format!("snapshot time {} differs from run.t0 = {t0}", snap.t),
        ));
    }
    Ok(snap.state)
}

/// Sign changes of the cycle-averaged `mass_left − mass_right`, linearly
/// interpolated, and local maxima of `|A(t)|²` above ½ over a one-period
/// neighbourhood.
pub fn localization_events(records: &[SeriesRecord], period: f64) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let d: Vec<f64> = records.iter().map(|r| r.mass_left - r.mass_right).collect();
    let avg = boxcar(&t, &d, period);
    let mut switches = Vec::new();
    for i in 1..avg.len() {
        let (a, b) = (avg[i - 1], avg[i]);
        if a.is_finite() && b.is_finite() && a * b < 0.0 {
            switches.push(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    let ac: Vec<f64> = records.iter().map(|r| r.autocorr.norm_sqr()).collect();
    let mut revivals = Vec::new();
    for i in 1..ac.len().saturating_sub(1) {
        if ac[i] < 0.5 {
            continue;
        }
        let is_peak = (0..ac.len())
            .filter(|&j| (t[j] - t[i]).abs() <= 0.5 * period)
            .all(|j| ac[j] <= ac[i]);
        if is_peak {
            revivals.push(t[i]);
        }
    }
    (switches, revivals)
}

/// Centered moving average over a window of width `w`.
pub fn boxcar(t: &[f64], y: &[f64], w: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let (mut lo, mut hi, mut sum) = (0usize, 0usize, 0.0f64);
    for &tc in t {
        while hi < t.len() && t[hi] <= tc + 0.5 * w {
            sum += y[hi];
            hi += 1;
        }
        while t[lo] < tc - 0.5 * w {
            sum -= y[lo];
            lo += 1;
        }
        out.push(sum / (hi - lo) as f64);
    }
    out
}

fn stage_propagate(ctx: &Context, leg: &Leg, t0: f64, out: &mut OutputDir, m: &mut Manifest) -> Result<()> {
    let s = &ctx.settings;
    let initial = initial_state(ctx, leg.mode, t0)?;
    let propagator = match leg.mode {
        Mode::LabFull => Propagator::lab_full(s.grid, s.model.sample(&s.grid), ctx.cache()?.clone(), s.dt, s.absorber),
        Mode::KhAveraged => Propagator::kh_averaged(ctx.averaged()?, s.dt, s.absorber),
    }
    .in_module("propagator")?;
    let time = TimeGrid::spanning(t0, leg.t_end, s.dt).in_module("propagator")?;
    let mut job = PropagationJob::new(initial, time);
    job.cadence = s.cadence;
    let mut wanted: Vec<f64> = leg.snapshots.iter().chain(&leg.wigner_times).copied().collect();
    if let Some(tr) = s.restart_at {
        wanted.push(tr);
    }
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    job.snapshot_times = wanted;

    let kh_states: Vec<WaveFunction> = ctx.kh_states()?.iter().map(|p| p.state.clone()).collect();
    let mut recorder = match leg.mode {
        Mode::LabFull => Recorder::new(Some(ctx.transform()?), Some(ctx.atomic()?.state.clone()), kh_states),
        Mode::KhAveraged => Recorder::new(None, None, kh_states),
    }
    .and_then(|r| r.with_window(s.window))
    .in_module("observables")?;
    let output = propagator.propagate(&job, &mut recorder).in_module("propagator")?;
    let records = recorder.into_records();
    out.write("series.csv", formats::series_csv(&records).as_bytes())?;

    let half = s.dump_half_width;
    let transform = match leg.mode {
        Mode::LabFull => Some(ctx.transform()?),
        Mode::KhAveraged => None,
    };
    for snap in &output.snapshots {
        let tag = time_tag(snap.requested);
        let native = snap.state.frame().as_str();
        write_state(out, &format!("snap_{native}_t{tag}"), &snap.state, snap.t, half, false)?;
        let kh = match &transform {
            Some(tr) => {
                let kh = tr.lab_to_kh(&snap.state, snap.t).in_module("frame")?;
                write_state(out, &format!("snap_kh_t{tag}"), &kh, snap.t, half, false)?;
                kh
            }
            None => snap.state.clone(),
        };
        if leg.wigner_times.contains(&snap.requested) {
            let w = wigner(&kh, &s.wigner, snap.t).in_module("phasespace")?;
            write_wigner(out, m, &format!("wigner_kh_t{tag}"), &w, &kh, s.tail_cut)?;
        }
    }
    let fin = &output.final_state;
    out.write(
        &format!("final_{}.khps", fin.frame().as_str()),
        &formats::encode_snapshot(fin, output.t_final),
    )?;

    m.derive("propagation.mode", leg.mode.as_str());
    m.derive("propagation.t0", t0);
    m.derive("propagation.t_end", output.t_final);
    m.derive("propagation.steps", time.n_steps as u64);
    m.residual("propagation.absorbed_norm", output.absorbed);
    m.residual("propagation.final_norm", fin.norm_sqr());
    let (switches, revivals) = localization_events(&records, s.pulse.period());
    m.derive("events.localization_switch_times", switches);
    m.derive("events.autocorrelation_revival_times", revivals);
    Ok(())
}

/// Maps `restart.*` onto the `run.*` keys of a continuation run.
pub fn continuation_config(parent: &Config, snapshot: &str, t0: f64) -> Result<Config> {
    let mut c = parent.clone();
    let set = |c: &mut Config, k: &str, v: &str| c.set(k, v).in_module("config");
    set(&mut c, "run.stages", "propagate")?;
    set(&mut c, "run.initial", "snapshot")?;
    set(&mut c, "run.initial_file", snapshot)?;
    set(&mut c, "run.t0", &format!("{t0}"))?;
    set(&mut c, "run.restart_at", "")?;
    for (from, to) in [
        ("restart.mode", "run.mode"),
        ("restart.t_end", "run.t_end"),
        ("restart.snapshots", "run.snapshots"),
        ("restart.wigner_times", "run.wigner_times"),
    ] {
        let v = c.raw(from).to_string();
        set(&mut c, to, &v)?;
    }
    Ok(c)
}

/// Runs `config`'s stages into `out_dir`; the manifest is written even
/// when a stage fails.
pub fn execute(command: &str, recipe: Option<&str>, config: Config, out_dir: &Path) -> Result<Manifest> {
    let echo = config.clone();
    run_command(command, recipe, echo, config, out_dir, None, run_stages)
}

/// Executes `body` against a context built from `config`, echoing `echo`
/// in the manifest. The manifest is written last, also on failure.
fn run_command(
    command: &str,
    recipe: Option<&str>,
    echo: Config,
    config: Config,
    out_dir: &Path,
    parent: Option<ParentLink>,
    body: impl FnOnce(&Context, &mut OutputDir, &mut Manifest) -> Result<()>,
) -> Result<Manifest> {
    let mut out = OutputDir::create(out_dir)?;
    let mut m = Manifest::new(command, recipe, &echo);
    m.parent = parent;
    let result = Context::new(config).and_then(|ctx| {
        let r = body(&ctx, &mut out, &mut m);
        ctx.record_derived(&mut m);
        r
    });
    match &result {
        Ok(()) => m.status = "complete".into(),
        Err(f) => {
            m.status = "failed".into();
            m.failure = Some(FailureRecord {
                module: f.module.into(),
                message: f.message.clone(),
            })
        }
    }
    out.finish(&mut m)?;
    result.map(|()| m)
}

fn run_stages(ctx: &Context, out: &mut OutputDir, m: &mut Manifest) -> Result<()> {
    let s = &ctx.settings;
    for stage in &s.stages {
        match stage {
            Stage::Potential => stage_potential(ctx, out, m)?,
            Stage::Field => stage_field(ctx, out, m)?,
            Stage::Eigen => stage_eigen(ctx, out, m)?,
            Stage::Wigner0 => stage_wigner0(ctx, out, m)?,
            Stage::Portrait => stage_portrait(ctx, out, m)?,
            Stage::Propagate => {
                stage_propagate(ctx, &s.main, s.t0, out, m)?;
                if let Some(tr) = s.restart_at {
                    run_internal_restart(ctx, tr, out, m)?;
                }
            }
        }
    }
    Ok(())
}

/// Continues from the main leg's snapshot at `t_restart` into
/// `<out>/restart`, with its own manifest linking back to this run.
fn run_internal_restart(ctx: &Context, t_restart: f64, out: &mut OutputDir, m: &mut Manifest) -> Result<()> {
    let frame = ctx.settings.restart.mode.frame();
    let name = format!("snap_{}_t{}.khps", frame.as_str(), time_tag(t_restart));
    let entry = out
        .entries()
        .into_iter()
        .find(|e| e.path == name)
        .ok_or_else(|| Failure::new("propagator", format!("main leg wrote no {name}")))?;
    let snap = load_snapshot(&out.path(&name))?;
    let child_dir = out.path("restart");
    // The echoed configuration names the snapshot relative to the child
    // directory; loading goes through the real path.
    let cfg = continuation_config(&ctx.config, &format!("../{name}"), snap.t)?;
    let load_cfg = continuation_config(&ctx.config, &out.path(&name).to_string_lossy(), snap.t)?;
    let link = ParentLink {
        directory: "..".into(),
        manifest_sha256: String::new(),
        snapshot: name.clone(),
        snapshot_sha256: entry.sha256.clone(),
        t: snap.t,
    };
    let child = run_command(
        "restart",
        m.recipe.as_deref(),
        cfg,
        load_cfg,
        &child_dir,
        Some(link),
        run_stages,
    )?;
    for f in child.files {
        out.adopt(FileEntry {
            path: format!("restart/{}", f.path),
            ..f
        });
    }
    let bytes = std::fs::read(child_dir.join(MANIFEST_NAME)).map_err(|e| Failure::new("io", e.to_string()))?;
    out.adopt(FileEntry {
        path: format!("restart/{MANIFEST_NAME}"),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    });
    Ok(())
}

/// Continues a finished run from one of its snapshot files.
pub fn restart(
    parent_dir: &Path,
    snapshot: &str,
    apply: impl FnOnce(&mut Config) -> Result<()>,
    out_dir: &Path,
) -> Result<Manifest> {
    let manifest_path = parent_dir.join(MANIFEST_NAME);
    let parent = Manifest::read(&manifest_path)?;
    if parent.status != "complete" {
        return Err(Failure::new(
            "io",
            format!("parent run {} is {}", parent_dir.display(), parent.status),
        ));
    }
    let entry = parent
        .file(snapshot)
        .ok_or_else(|| Failure::new("io", format!("{snapshot} is not in the parent inventory")))?
        .clone();
    let snap_path = parent_dir.join(snapshot);
    let bytes = std::fs::read(&snap_path).map_err(|e| Failure::new("io", format!("{}: {e}", snap_path.display())))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(Failure::new(
            "io",
            format!("{} no longer matches the parent checksum", snap_path.display()),
        ));
    }
    let snap = formats::decode_snapshot(&bytes)?;
    let mut base = Config::default();
    for (k, v) in &parent.config {
        base.set(k, v).in_module("config")?;
    }
    apply(&mut base)?;
    let shown = snap_path.to_string_lossy().into_owned();
    let cfg = continuation_config(&base, &shown, snap.t)?;
    let manifest_bytes = std::fs::read(&manifest_path).map_err(|e| Failure::new("io", e.to_string()))?;
    let link = ParentLink {
        directory: parent_dir.to_string_lossy().into_owned(),
        manifest_sha256: sha256_hex(&manifest_bytes),
        snapshot: snapshot.into(),
        snapshot_sha256: entry.sha256,
        t: snap.t,
    };
    run_command(
        "restart",
        parent.recipe.as_deref(),
        cfg.clone(),
        cfg,
        out_dir,
        Some(link),
        run_stages,
    )
}

/// Converts a snapshot between frames.
pub fn transform_file(cfg: Config, input: &Path, to: Option<Frame>, out_dir: &Path) -> Result<Manifest> {
    run_command("transform", None, cfg.clone(), cfg, out_dir, None, |ctx, out, m| {
        let snap = load_snapshot(input)?;
        let target = to.unwrap_or(match snap.state.frame() {
            Frame::Lab => Frame::Kh,
            Frame::Kh => Frame::Lab,
        });
        let psi = ctx
            .transform()?
            .to_frame(&snap.state, snap.t, target)
            .in_module("frame")?;
        let name = format!("{}_{}.khps", file_stem(input), target.as_str());
        out.write(&name, &formats::encode_snapshot(&psi, snap.t))?;
        m.derive("transform.t", snap.t);
        m.residual("transform.norm_change", psi.norm_sqr() - snap.state.norm_sqr());
        Ok(())
    })
}

/// Wigner function of a snapshot, optionally after a frame change.
pub fn wigner_file(cfg: Config, input: &Path, frame: Option<Frame>, out_dir: &Path) -> Result<Manifest> {
    run_command("wigner", None, cfg.clone(), cfg, out_dir, None, |ctx, out, m| {
        let snap = load_snapshot(input)?;
        let target = frame.unwrap_or(snap.state.frame());
        let psi = ctx
            .transform()?
            .to_frame(&snap.state, snap.t, target)
            .in_module("frame")?;
        let w = wigner(&psi, &ctx.settings.wigner, snap.t).in_module("phasespace")?;
        let name = format!("wigner_{}_{}", target.as_str(), file_stem(input));
        write_wigner(out, m, &name, &w, &psi, ctx.settings.tail_cut)
    })
}

/// One series row per snapshot; the first file is the autocorrelation
/// reference.
pub fn observables_files(cfg: Config, inputs: &[PathBuf], out_dir: &Path) -> Result<Manifest> {
    run_command("observables", None, cfg.clone(), cfg, out_dir, None, |ctx, out, _m| {
        let kh_states: Vec<WaveFunction> = ctx.kh_states()?.iter().map(|p| p.state.clone()).collect();
        let snaps = inputs.iter().map(|p| load_snapshot(p)).collect::<Result<Vec<_>>>()?;
        let needs_lab = snaps.iter().any(|s| s.state.frame() == Frame::Lab);
        let (tr, atomic) = if needs_lab {
            (Some(ctx.transform()?), Some(ctx.atomic()?.state.clone()))
        } else {
            (None, None)
        };
        let mut rec = Recorder::new(tr, atomic, kh_states)
            .and_then(|r| r.with_window(ctx.settings.window))
            .in_module("observables")?;
        for s in &snaps {
            rec.record(s.t, &s.state).in_module("observables")?;
        }
        out.write("observables.csv", formats::series_csv(rec.records()).as_bytes())
    })
}

fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}
