mod config;
mod pipeline;

use clap::{Parser, Subcommand};
use config::RunConfig;
use pipeline::Flags;
use std::path::PathBuf;
use std::process::ExitCode;
use thinplate::error::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "thinplate", version, about = "Thin anisotropic plate with a small clamped support")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of mesh levels; overrides `mesh.levels`.
    #[arg(long, global = true)]
    mesh_levels: Option<usize>,
    /// Seed of the random checks in `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Dimension reduction: reduced stiffness, plate coefficients, load.
    Reduce,
    /// Fundamental solutions and their logarithmic matrices.
    Fundamental,
    /// Full run: Green functions, regular solution, model solutions, field samples.
    Solve,
    /// Coefficient asymptotics over the configured list of h.
    Sweep,
    /// Solve plus stationarity and Green-formula checks.
    Verify,
    /// Finest mesh and sampled displacement fields only.
    Export,
}

fn run(cli: &Cli) -> Result<Flags> {
    let path = cli.config.as_ref().ok_or_else(|| Error::InvalidInput("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(n) = cli.mesh_levels {
        if n == 0 {
            return Err(Error::InvalidInput("--mesh-levels must be at least 1".into()));
        }
        cfg.mesh.levels = n;
    }
    let out: PathBuf = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let mut flags = Flags::default();
    match cli.command {
        Command::Reduce => {
            let (_, v) = pipeline::reduce(&cfg, &mut flags)?;
            let mut m = serde_json::Map::new();
            m.insert("material".into(), v);
            pipeline::write_json(&out, "reduce.json", &pipeline::finish(m, &flags))?;
        }
        Command::Fundamental => {
            let (reduced, material) = pipeline::reduce(&cfg, &mut flags)?;
            let (basis, v) = pipeline::fundamental(&reduced, &mut flags)?;
            std::fs::create_dir_all(&out)?;
            basis.write_profiles_csv(&out.join("fundamental_profiles.csv"), 360)?;
            let mut m = serde_json::Map::new();
            m.insert("material".into(), material);
            m.insert("fundamental".into(), v);
            pipeline::write_json(&out, "fundamental.json", &pipeline::finish(m, &flags))?;
        }
        Command::Solve | Command::Verify => {
            let mut s = pipeline::solve_stages(&cfg, &mut flags)?;
            if let Some((sols, ext)) = pipeline::extension_stage(&s, &mut flags)? {
                s.report.insert("extension".into(), ext);
                if cli.command == Command::Solve && !cfg.output.fields.is_empty() {
                    let rec = pipeline::reconstruction_stage(&cfg, &s, &sols, &out)?;
                    s.report.insert("reconstruction".into(), rec);
                }
            }
            if cli.command == Command::Verify {
                let v = pipeline::verify_stage(&cfg, &s, cli.seed, &mut flags)?;
                s.report.insert("verification".into(), v);
            }
            let name = if cli.command == Command::Solve { "report.json" } else { "verify.json" };
            let report = std::mem::take(&mut s.report);
            pipeline::write_json(&out, name, &pipeline::finish(report, &flags))?;
        }
        Command::Sweep => {
            let mut s = pipeline::solve_stages(&cfg, &mut flags)?;
            let v = pipeline::sweep_stage(&s, &mut flags, &out)?;
            s.report.insert("sweep".into(), v);
            let report = std::mem::take(&mut s.report);
            pipeline::write_json(&out, "sweep.json", &pipeline::finish(report, &flags))?;
        }
        Command::Export => {
            let s = pipeline::solve_stages(&cfg, &mut flags)?;
            std::fs::create_dir_all(&out)?;
            s.finest_system().mesh.save(&out.join("mesh.txt"))?;
            match pipeline::extension_stage(&s, &mut flags)? {
                Some((sols, _)) => {
                    pipeline::reconstruction_stage(&cfg, &s, &sols, &out)?;
                }
                None => return Err(Error::InvalidInput("export needs at least one value of h".into())),
            }
        }
    }
    Ok(flags)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(flags) if flags.0.is_empty() => ExitCode::SUCCESS,
        Ok(flags) => {
            eprintln!("finished with {} accuracy flag(s):", flags.0.len());
            for f in &flags.0 {
                eprintln!("  {f}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
