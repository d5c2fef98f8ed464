//! `hamfam`: exact certificates and numerical runs for polynomial
//! Hamiltonian families.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on usage or configuration errors.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hamfam_core::verify::Mutation;

use crate::commands::{Status, SymmetryArgs};
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "hamfam", version, about = "Verify and integrate polynomial Hamiltonian families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact certificate suite for a family.
    Verify(CommonArgs),
    /// Integrate Hamilton's equations and write a trajectory CSV.
    Integrate(CommonArgs),
    /// Apply a symmetry to a numerical point.
    Symmetry {
        #[command(flatten)]
        common: CommonArgs,
        /// Apply the map this many times.
        #[arg(long, default_value_t = 1)]
        power: u32,
        /// Also integrate and check the mapped trajectory.
        #[arg(long)]
        check_trajectory: bool,
    },
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// autonomous5, general, general:<n> or nonautonomous3.
    #[arg(long)]
    family: Option<String>,
    /// Order or range of orders for the general family, e.g. 5 or 2..8.
    #[arg(long)]
    n: Option<String>,
    /// Parameter values, e.g. alpha=1,eta1=0.5-1i. Unlisted ones are 1.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// s-auto, s-auto:<n>, s-auto5, s-nonauto or id.
    #[arg(long)]
    map: Option<String>,
    /// Fourth root of -1: z, z^3, z^5, z^7, or k for z^(2k+1).
    #[arg(long)]
    branch: Option<String>,
    /// Time rule of the non-autonomous map: root or neg-cube.
    #[arg(long)]
    time_rule: Option<String>,
    /// rk4 or rk45.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    /// Complex literal such as 0.5i or 1-2i.
    #[arg(long, allow_hyphen_values = true)]
    q0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    /// Step sizes for a convergence sweep, e.g. h=1e-2,5e-3,2.5e-3.
    #[arg(long)]
    sweep: Option<String>,
    /// Output path (JSON report for verify, CSV for integrate).
    #[arg(long)]
    out: Option<PathBuf>,
    /// text or json.
    #[arg(long)]
    format: Option<String>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long, hide = true)]
    inject_mutation: Option<String>,
}

impl CommonArgs {
    fn to_config(&self, command: &str) -> RunConfig {
        let mut c = RunConfig {
            command: Some(command.to_string()),
            ..RunConfig::default()
        };
        c.system.family = self.family.clone();
        c.system.n = self.n.clone();
        c.system.params = self.params.clone();
        c.map.name = self.map.clone();
        c.map.branch = self.branch.clone();
        c.map.time_rule = self.time_rule.clone();
        c.integration.method = self.method.clone();
        c.integration.h = self.h;
        c.integration.tol = self.tol;
        c.integration.t0 = self.t0;
        c.integration.t1 = self.t1;
        c.integration.q0 = self.q0.clone();
        c.integration.p0 = self.p0.clone();
        c.integration.sweep = self.sweep.clone();
        c.output.out = self.out.as_ref().map(|p| p.display().to_string());
        c.output.format = self.format.clone();
        c
    }
}

fn load(common: &CommonArgs, command: &str) -> Result<RunConfig, CliError> {
    let base = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    Ok(base.overlay(common.to_config(command)))
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let (common, name) = match &cli.command {
        Command::Verify(c) => (c, "verify"),
        Command::Integrate(c) => (c, "integrate"),
        Command::Symmetry { common, .. } => (common, "symmetry"),
    };
    let cfg = load(common, name)?;
    if common.print_config {
        print!("{}", cfg.canonical()?);
        return Ok(Status::Pass);
    }
    let mut settings = cfg.resolve()?;
    settings.mutation = common
        .inject_mutation
        .as_deref()
        .map(str::parse::<Mutation>)
        .transpose()?;
    log::debug!("settings: {settings:?}");
    match &cli.command {
        Command::Verify(_) => commands::verify(&settings),
        Command::Integrate(_) => commands::integrate_cmd(&settings),
        Command::Symmetry {
            power,
            check_trajectory,
            ..
        } => commands::symmetry(
            &settings,
            &SymmetryArgs {
                power: *power,
                check_trajectory: *check_trajectory,
            },
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
