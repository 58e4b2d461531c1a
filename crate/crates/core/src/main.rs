use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use holevo_core::cli::{self, ExperimentConfig, Mode, RunError};

#[derive(Parser)]
#[command(name = "holevo", version, about = "Holevo quantity of a thermal qubit driven by an oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config (default: chi)
    Run(Common),
    /// χ(τ) on the τ grid
    Chi(Common),
    /// χ(τ) next to its asymptotic form χ∞(τ)
    ChiVsChiInfinity(Common),
    /// χ on (0, tau_cut] with a quadratic fit against Λ
    ShortTime(Common),
    /// χ(τ) for each value in phi_values
    PhiScan(Common),
    /// χ(τ) for each value in beta_values
    BetaScan(Common),
    /// Late-window χ with Ω solved for ψ = π, per phi_values
    MaxCondition(Common),
    /// Oracle suite; exit 3 if any check fails
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Flat JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key (repeatable), e.g. --set phi=pi/4
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path (stdout if absent)
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv, json or svg
    #[arg(long)]
    format: Option<String>,
    /// Omit the metadata comment line
    #[arg(long)]
    no_header: bool,
}

fn build(mode: Option<Mode>, common: &Common) -> Result<ExperimentConfig, RunError> {
    let mut config = cli::load_config(common.config.as_deref(), &common.set)?;
    if let Some(mode) = mode {
        config.mode = mode;
    }
    if let Some(path) = &common.output {
        config.output = Some(path.clone());
    }
    if let Some(format) = &common.format {
        config.format = format.parse()?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, common) = match &cli.command {
        Command::Run(c) => (None, c),
        Command::Chi(c) => (Some(Mode::Chi), c),
        Command::ChiVsChiInfinity(c) => (Some(Mode::ChiVsChiInfinity), c),
        Command::ShortTime(c) => (Some(Mode::ShortTime), c),
        Command::PhiScan(c) => (Some(Mode::PhiScan), c),
        Command::BetaScan(c) => (Some(Mode::BetaScan), c),
        Command::MaxCondition(c) => (Some(Mode::MaxCondition), c),
        Command::Validate(c) => (Some(Mode::Validate), c),
    };
    let result = build(mode, common).and_then(|config| cli::execute(&config, !common.no_header));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            let (record, code) = cli::error_record(&err);
            eprintln!("{record}");
            ExitCode::from(code as u8)
        }
    }
}
