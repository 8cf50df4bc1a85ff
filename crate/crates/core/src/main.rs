use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lasertherm::sim::probe::{compare, read_csv};
use lasertherm::sim::{load_config, preset, Simulation, Tissue};
use lasertherm::Result;

#[derive(Debug, Parser)]
#[command(name = "lasertherm", version, about = "Laser tissue heating simulator")]
struct Cli {
    /// error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation and write probe series (and snapshots if enabled).
    Run {
        config: PathBuf,
        /// Overrides `output.dir` from the config file.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Dotted-path override, e.g. `--set laser.power=0.8`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check a configuration without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// RMSE between the probe columns of two CSV files.
    Compare { a: PathBuf, b: PathBuf },
    /// Print the parameters of a tissue preset.
    Preset { tissue: String },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            overrides,
        } => {
            let mut cfg = load_config(&config, &overrides)?;
            if output_dir.is_some() {
                cfg.output.dir = output_dir;
            }
            let out = Simulation::new(cfg)?.run()?;
            for path in &out.files {
                if path.extension().is_some_and(|e| e == "csv") {
                    println!("{}", path.display());
                }
            }
            for s in &out.probes {
                if let Some((t, u)) = s.peak() {
                    log::info!("{}: peak {u:.3} °C at t={t:.2} s", s.id);
                }
            }
        }
        Command::Validate { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            println!(
                "ok: {} steps of {} s on a {:?} element mesh",
                cfg.step_count(),
                cfg.solver.dt,
                cfg.mesh.dims
            );
        }
        Command::Compare { a, b } => {
            let sa = read_csv(&a)?;
            let sb = read_csv(&b)?;
            for (id, e) in compare(&sa, &sb)? {
                println!("{id}_C rmse = {e:.6} °C");
            }
        }
        Command::Preset { tissue } => {
            let tissue: Tissue = tissue.parse()?;
            let m = preset(tissue);
            println!("# {tissue}");
            println!("mu_a = {}    # 1/cm", m.mu_a);
            println!("c_v = {}    # J/(cm^3 °C)", m.c_v);
            println!("kappa = {}    # W/(cm °C)", m.kappa);
            println!("h = {}    # W/(cm^2 °C)", m.h);
            println!("t_inf = {}    # °C", m.t_inf);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
