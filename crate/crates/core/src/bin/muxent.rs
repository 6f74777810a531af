use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use muxent::cli::{analyze_file, exit_code, simulate_run, RunConfig, EXIT_FAILURE, EXIT_NOT_CONVERGED};
use muxent::config::Overrides;
use muxent::report::Report;
use muxent::reproduce::{reproduce, ReproduceOptions, Target};

#[derive(Parser)]
#[command(
    name = "muxent",
    version,
    about = "Multiplexed entangled photon-pair source simulator",
    after_help = "Preset names are also looked up in $MUXENT_PRESET_DIR."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in preset name, preset file, or name in $MUXENT_PRESET_DIR.
    #[arg(long)]
    preset: Option<String>,
    /// Extra TOML file merged over the preset (repeatable, later wins).
    #[arg(long = "config")]
    configs: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Integration time per setting, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Pump power (average for pulsed pumps), mW.
    #[arg(long)]
    power: Option<f64>,
    /// Coincidence window, ps.
    #[arg(long)]
    window: Option<u64>,
    #[arg(long = "channel-pair")]
    channel_pair: Option<u8>,
    #[arg(long, default_value = "muxent-out")]
    out: PathBuf,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            duration_s: self.duration,
            power_mw: self.power,
            window_ps: self.window,
            channel_pair: self.channel_pair,
        }
    }

    fn run_config(&self, default_preset: &str) -> RunConfig {
        RunConfig {
            preset: self.preset.clone().unwrap_or_else(|| default_preset.to_string()),
            layer_files: self.configs.clone(),
            overrides: self.overrides(),
            output_dir: self.out.display().to_string(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario into time tags or counts.
    Simulate {
        /// Also write time tags as CSV.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze a time-tag file (.bin) or counts record (.json).
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce a figure or table (or `all`).
    Reproduce {
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn emit(report: &Report, out: &std::path::Path) -> muxent::Result<bool> {
    let paths = report.write(out)?;
    print!("{}", report.summary_text());
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(report.converged)
}

fn run(cli: Cli) -> muxent::Result<i32> {
    let mut converged = true;
    match cli.command {
        Command::Simulate { csv, common } => {
            let cfg = common.run_config("cw_energy_time");
            converged &= emit(&simulate_run(&cfg, csv)?, &common.out)?;
        }
        Command::Analyze { input, common } => {
            let cfg = common.run_config("cw_energy_time");
            converged &= emit(&analyze_file(&cfg, &input)?, &common.out)?;
        }
        Command::Reproduce { target, common } => {
            let targets = if target == "all" { Target::ALL.to_vec() } else { vec![target.parse()?] };
            for t in targets {
                let opts = ReproduceOptions {
                    preset: common.preset.clone(),
                    layers: common.run_config(t.default_preset()).layers()?,
                    overrides: common.overrides(),
                    output_dir: common.out.display().to_string(),
                };
                converged &= emit(&reproduce(t, &opts)?, &common.out)?;
            }
        }
        Command::Selftest => {
            let r = muxent::selftest::run();
            for c in &r.checks {
                println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(if r.passed() { 0 } else { EXIT_FAILURE });
        }
    }
    Ok(if converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
