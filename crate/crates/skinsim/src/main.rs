use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skinsim::commands::{self, CalibrateOptions};
use skinsim::config::RunConfig;
use skinsim::error::{Error, Result};
use skinsim::io::write_file;

/// Hybrid robot skin generation, sensing simulation and analysis.
#[derive(Parser, Debug)]
#[command(name = "skinsim", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Treat geometry warnings and calibration misfit as errors.
    #[arg(long, global = true)]
    strict: bool,
    /// Override a configuration value, e.g. `--set tof.rows=4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build skin meshes and a site manifest around a shell mesh.
    Generate {
        /// Shell mesh (STL or OBJ) or builtin:cube / builtin:arm_links.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, value_enum)]
        units: Option<UnitsArg>,
        #[arg(long)]
        sites: Option<usize>,
    },
    /// Simulate SC and ToF sampling along a trajectory.
    Simulate {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Imagers off: no frames and no interference on the rings.
        #[arg(long)]
        no_tof: bool,
    },
    /// Turn the ToF frames of a log into a world-frame point cloud.
    Reconstruct {
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Contact SNR per ring and configuration from labeled logs.
    Snr {
        /// Log of one configuration, e.g. `no_tof:rest=logs/no_tof_rest.jsonl`.
        #[arg(long = "log", value_name = "CONFIG=PATH")]
        logs: Vec<String>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Fit the noise model and covering to the target SNR table.
    Calibrate {
        /// Replay every configuration over several seeds.
        #[arg(long)]
        verify: bool,
        /// Write the six protocol logs and their labels.
        #[arg(long)]
        emit_logs: bool,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum UnitsArg {
    M,
    Mm,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Ascii,
    Binary,
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn path_set(key: &str, p: &Path, cwd: &Path) -> String {
    format!("{key}={}", quoted(&cwd.join(p).to_string_lossy()))
}

/// Command-line flags become overrides so the resolved config records them.
fn overrides(cli: &Cli, cwd: &Path) -> Result<Vec<String>> {
    let mut sets = cli.sets.clone();
    if let Some(s) = cli.seed {
        sets.push(format!("seed={s}"));
    }
    if let Some(o) = &cli.out {
        sets.push(path_set("output", o, cwd));
    }
    let mut opt_path = |key: &str, p: &Option<PathBuf>| {
        if let Some(p) = p {
            sets.push(path_set(key, p, cwd));
        }
    };
    match &cli.command {
        Command::Generate { input, units, sites } => {
            if let Some(i) = input {
                let v = if i.starts_with(skinsim::config::BUILTIN) { i.clone() } else { cwd.join(i).to_string_lossy().into_owned() };
                sets.push(format!("generate.input={}", quoted(&v)));
            }
            if let Some(u) = units {
                sets.push(format!("generate.units={}", quoted(if matches!(u, UnitsArg::M) { "m" } else { "mm" })));
            }
            if let Some(n) = sites {
                sets.push(format!("generate.skin.site_count={n}"));
            }
        }
        Command::Simulate { manifest, chain, trajectory, scene, duration, no_tof } => {
            opt_path("simulate.manifest", manifest);
            opt_path("simulate.chain", chain);
            opt_path("simulate.trajectory", trajectory);
            opt_path("simulate.scene", scene);
            if let Some(d) = duration {
                sets.push(format!("simulate.duration={d:?}"));
            }
            if *no_tof {
                sets.push("simulate.tof_enabled=false".into());
            }
        }
        Command::Reconstruct { log, chain, trajectory, manifest, format } => {
            opt_path("reconstruct.log", log);
            opt_path("reconstruct.chain", chain);
            opt_path("reconstruct.trajectory", trajectory);
            opt_path("reconstruct.manifest", manifest);
            if let Some(f) = format {
                sets.push(format!("reconstruct.format={}", quoted(if matches!(f, FormatArg::Ascii) { "ascii" } else { "binary" })));
            }
        }
        Command::Snr { logs, labels } => {
            opt_path("snr.labels", labels);
            for l in logs {
                let (cell, p) = l.split_once('=').ok_or_else(|| Error::validation(format!("--log '{l}': expected CONFIG=PATH")))?;
                sets.push(path_set(&format!("snr.logs.{cell}"), Path::new(p), cwd));
            }
        }
        Command::Calibrate { .. } => {}
    }
    Ok(sets)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cwd = std::env::current_dir().map_err(|e| Error::io(Path::new("."), e))?;
    let sets = overrides(cli, &cwd)?;
    let cfg = RunConfig::load(cli.config.as_deref().map(|p| cwd.join(p)).as_deref(), &sets, &cwd)?;
    write_file(&cfg.output.join("config.resolved.toml"), cfg.to_toml()?)?;
    match &cli.command {
        Command::Generate { .. } => commands::generate(&cfg, cli.strict),
        Command::Simulate { .. } => commands::simulate(&cfg, cli.strict),
        Command::Reconstruct { .. } => commands::reconstruct(&cfg),
        Command::Snr { .. } => {
            let (written, _) = commands::snr(&cfg)?;
            print!("{}", std::fs::read_to_string(&written[1]).unwrap_or_default());
            Ok(written)
        }
        Command::Calibrate { verify, emit_logs } => {
            let (written, v) = commands::calibrate_cmd(&cfg, cli.strict, CalibrateOptions { verify: *verify, emit_logs: *emit_logs })?;
            if let Some(v) = v {
                println!(
                    "verification: worst mean relative error {:.4}, orderings held in {}/{} seeds",
                    v.worst_relative_error(),
                    v.orderings_held,
                    v.seeds
                );
            }
            Ok(written)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
