//! `wnoma`: link-level wavelet vs FFT-OFDM NOMA simulator front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wnoma_cli::config::{build_sim_config, ConfigMap};
use wnoma_cli::output::{emit_csv, ensure_out_dir, write_manifest};
use wnoma_cli::presets::{preset, ArmCommand};
use wnoma_cli::CliError;
use wnoma_core::sim::{run_papr_experiment, run_psd_experiment, run_ser_sweep, run_sumrate_sweep};
use wnoma_core::wavelet::{wavelet_filters, WaveletFamily};

#[derive(Parser)]
#[command(
    name = "wnoma",
    version,
    about = "Monte Carlo link simulator comparing wavelet and FFT-OFDM pulse shaping \
             for downlink power-domain NOMA under zero-forcing massive-MIMO beamforming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key=value config file (a run manifest also works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial-count override.
    #[arg(long)]
    trials: Option<usize>,
    /// Back-end override: fft, wavelet or wavelet:<family>.
    #[arg(long)]
    backend: Option<String>,
    /// Output directory for CSV results and manifests.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Extra key=value overrides (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Near/far symbol error rate over the SNR grid.
    Ser(CommonArgs),
    /// PAPR CCDF of the selected back-end.
    Papr {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of random blocks (>= 1000).
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Welch PSD of the partially loaded transmit signal.
    Psd {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of blocks to concatenate (>= 100).
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Analytic NOMA sum rate over the SNR grid.
    Sumrate(CommonArgs),
    /// Dump the wavelet coefficient tables as CSV.
    Filters {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a whole result panel (fig3a..fig3f) with its documented arms.
    Preset {
        /// One of fig3a, fig3b, fig3c, fig3d, fig3e, fig3f.
        name: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn build_map(common: &CommonArgs, command: &str) -> Result<ConfigMap, CliError> {
    let mut map = match &common.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::default(),
    };
    if let Some(recorded) = map.get("command") {
        if !command.is_empty() && recorded != command {
            return Err(CliError::Config(format!(
                "key 'command': manifest records '{recorded}', invoked as '{command}'"
            )));
        }
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set '{kv}': expected KEY=VALUE")))?;
        map.set(k.trim(), v.trim());
    }
    if let Some(seed) = common.seed {
        map.set("seed", &seed.to_string());
    }
    if let Some(trials) = common.trials {
        map.set("sim.trials", &trials.to_string());
    }
    if let Some(backend) = &common.backend {
        map.set("backend", backend);
    }
    Ok(map)
}

fn run_single(
    command: ArmCommand,
    common: &CommonArgs,
    blocks: Option<usize>,
) -> Result<(), CliError> {
    let map = build_map(common, command.name())?;
    let (cfg, mut extras) = build_sim_config(&map)?;
    match command {
        ArmCommand::Papr => extras.papr_blocks = blocks.unwrap_or(extras.papr_blocks),
        ArmCommand::Psd => extras.psd_blocks = blocks.unwrap_or(extras.psd_blocks),
        _ => {}
    }
    let records = match command {
        ArmCommand::Ser => run_ser_sweep(&cfg)?,
        ArmCommand::Papr => run_papr_experiment(&cfg, extras.papr_blocks)?,
        ArmCommand::Psd => run_psd_experiment(&cfg, extras.psd_blocks)?,
        ArmCommand::SumRate => run_sumrate_sweep(&cfg)?,
    };
    let dir = ensure_out_dir(&common.out)?;
    let csv_name = format!("{}.csv", command.name());
    emit_csv(&records, &dir.join(&csv_name))?;
    write_manifest(
        &dir.join(format!("{}.manifest", command.name())),
        command.name(),
        &cfg,
        &extras,
        &csv_name,
        None,
    )?;
    println!("wrote {}", dir.join(&csv_name).display());
    Ok(())
}

fn run_preset(name: &str, common: &CommonArgs) -> Result<(), CliError> {
    let map = build_map(common, "")?;
    let scenario = preset(name, &map)?;
    let dir = ensure_out_dir(&common.out)?;
    for arm in &scenario.arms {
        let records = match arm.command {
            ArmCommand::Ser => run_ser_sweep(&arm.cfg)?,
            ArmCommand::Papr => run_papr_experiment(&arm.cfg, arm.extras.papr_blocks)?,
            ArmCommand::Psd => run_psd_experiment(&arm.cfg, arm.extras.psd_blocks)?,
            ArmCommand::SumRate => run_sumrate_sweep(&arm.cfg)?,
        };
        let csv_name = format!("{}_{}.csv", scenario.name, arm.label);
        emit_csv(&records, &dir.join(&csv_name))?;
        write_manifest(
            &dir.join(format!("{}_{}.manifest", scenario.name, arm.label)),
            arm.command.name(),
            &arm.cfg,
            &arm.extras,
            &csv_name,
            Some((scenario.name, &arm.label)),
        )?;
        println!("wrote {}", dir.join(&csv_name).display());
    }
    Ok(())
}

fn run_filters(out: &PathBuf) -> Result<(), CliError> {
    let dir = ensure_out_dir(out)?;
    let mut text = String::from("family,n,g,h\n");
    for family in WaveletFamily::ALL {
        let (g, h) = wavelet_filters(family);
        for (n, (gv, hv)) in g.iter().zip(&h).enumerate() {
            text.push_str(&format!("{},{n},{gv:.16e},{hv:.16e}\n", family.name()));
        }
    }
    let path = dir.join("filters.csv");
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("write filters.csv: {e}")))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Ser(common) => run_single(ArmCommand::Ser, common, None),
        Command::Papr { common, blocks } => run_single(ArmCommand::Papr, common, *blocks),
        Command::Psd { common, blocks } => run_single(ArmCommand::Psd, common, *blocks),
        Command::Sumrate(common) => run_single(ArmCommand::SumRate, common, None),
        Command::Filters { out } => run_filters(out),
        Command::Preset { name, common } => run_preset(name, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wnoma: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
