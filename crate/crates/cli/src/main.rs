use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use khps::config::Config;
use khps::error::{Failure, InModule, Result};
use khps::manifest::Manifest;
use khps::{pipeline, recipes};
use khps_core::Frame;

#[derive(Parser)]
#[command(name = "khps", version, about = "Kramers-Henneberger phase-space runs")]
struct Cli {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// `key=value`, applied after the configuration file; repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Lab,
    Kh,
}

impl From<FrameArg> for Frame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Kh => Frame::Kh,
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Atomic ground state and KH eigenstates.
    Eigen,
    /// Atomic and time-averaged KH potentials.
    Potential,
    /// Pulse table `t ε A α` and endpoint residuals.
    Field,
    /// Time propagation (`run.mode`, `run.initial`, ...).
    Propagate,
    /// Converts a snapshot between the lab and KH frames.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// Target frame; defaults to the other frame.
        #[arg(long, value_enum)]
        to: Option<FrameArg>,
    },
    /// Series observables of one or more snapshots.
    Observables {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Wigner function of a snapshot.
    Wigner {
        #[arg(long)]
        input: PathBuf,
        /// Frame to evaluate in; defaults to the snapshot's own.
        #[arg(long, value_enum)]
        frame: Option<FrameArg>,
    },
    /// Separatrix and equienergy curves of the averaged potential.
    Portrait,
    /// Runs a committed recipe (`fig1`, `fig2ab`, ...) or a recipe file.
    Run { recipe: String },
    /// Continues a finished run from one of its snapshots; `restart.*`
    /// keys control the continuation.
    Restart {
        /// Output directory of the parent run.
        #[arg(long)]
        parent: PathBuf,
        /// Snapshot file name inside the parent directory.
        #[arg(long)]
        snapshot: String,
    },
    /// Lists the committed recipes.
    Recipes,
}

fn apply_user(cfg: &mut Config, file: Option<&Path>, overrides: &[String]) -> Result<()> {
    if let Some(path) = file {
        let text =
            std::fs::read_to_string(path).map_err(|e| Failure::new("config", format!("{}: {e}", path.display())))?;
        cfg.merge_text(&text, &path.display().to_string()).in_module("config")?;
    }
    for o in overrides {
        cfg.apply_override(o).in_module("config")?;
    }
    Ok(())
}

fn with_stage(stage: &str, file: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut cfg = Config::default();
    cfg.set("run.stages", stage).in_module("config")?;
    apply_user(&mut cfg, file, overrides)?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<Option<Manifest>> {
    let file = cli.config.as_deref();
    let ov = &cli.overrides;
    let out = &cli.out;
    let m = match cli.verb {
        Verb::Eigen => pipeline::execute("eigen", None, with_stage("eigen", file, ov)?, out)?,
        Verb::Potential => pipeline::execute("potential", None, with_stage("potential", file, ov)?, out)?,
        Verb::Field => pipeline::execute("field", None, with_stage("field", file, ov)?, out)?,
        Verb::Propagate => pipeline::execute("propagate", None, with_stage("propagate", file, ov)?, out)?,
        Verb::Portrait => pipeline::execute("portrait", None, with_stage("portrait", file, ov)?, out)?,
        Verb::Transform { input, to } => {
            pipeline::transform_file(with_stage("", file, ov)?, &input, to.map(Into::into), out)?
        }
        Verb::Observables { input } => pipeline::observables_files(with_stage("", file, ov)?, &input, out)?,
        Verb::Wigner { input, frame } => {
            pipeline::wigner_file(with_stage("", file, ov)?, &input, frame.map(Into::into), out)?
        }
        Verb::Run { recipe } => {
            let (name, text) = match recipes::find(&recipe) {
                Some(text) => (recipe.clone(), text.to_string()),
                None => {
                    let path = Path::new(&recipe);
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Failure::new(
                            "config",
                            format!("`{recipe}` is neither a committed recipe nor a readable file: {e}"),
                        )
                    })?;
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or(recipe.clone());
                    (stem, text)
                }
            };
            let mut cfg = Config::default();
            cfg.merge_text(&text, &name).in_module("config")?;
            apply_user(&mut cfg, file, ov)?;
            pipeline::execute("run", Some(&name), cfg, out)?
        }
        Verb::Restart { parent, snapshot } => {
            pipeline::restart(&parent, &snapshot, |cfg| apply_user(cfg, file, ov), out)?
        }
        Verb::Recipes => {
            for (name, text) in recipes::RECIPES {
                let summary = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:8} {summary}");
            }
            return Ok(None);
        }
    };
    Ok(Some(m))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match dispatch(cli) {
        Ok(Some(m)) => {
            eprintln!(
                "khps: {} complete, {} files in {}",
                m.command,
                m.files.len(),
                out.display()
            );
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("khps: error in module {}: {}", e.module, e.message);
            ExitCode::FAILURE
        }
    }
}
