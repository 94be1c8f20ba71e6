//! Subcommand dispatch for the dpsim binary. All output is deterministic in
//! (config, master_seed): no timestamps, no machine identifiers.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dpsim::analysis::{benchmark_table, summarize_campaign};
use dpsim::apparatus::run_campaign;
use dpsim::config::parse_config;
use dpsim::constants::GAMMA_PENROSE;
use dpsim::io;
use dpsim::rng::derive_seed;
use dpsim::selfenergy::{self, MassBody, OverlapCoefficientVariant, SuperpositionGeometry};
use dpsim::{CampaignSummary, Error, Mode, PhysicalConstants, Result, RunConfig};

const SCHEMA_VERSION_TEXT: &str = "config-schema 1";

#[derive(Parser)]
#[command(
    name = "dpsim",
    version = SCHEMA_VERSION_TEXT,
    about = "Collapse-time tables and a tabletop interferometer simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the collapse-time benchmark table and write its text/CSV files
    Table(TableArgs),
    /// Self-energy and collapse times for one sphere, straight to stdout
    Selfenergy(SelfenergyArgs),
    /// Run a campaign and write trace/metadata files
    Simulate(SimulateArgs),
    /// Re-run the analysis over an existing campaign directory
    Estimate(EstimateArgs),
    /// Repeat simulate+estimate over a parameter grid
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file of key = value lines
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Trials per campaign arm
    #[arg(long)]
    n_trials: Option<u64>,
    /// Root seed; every trial seed derives from it
    #[arg(long)]
    master_seed: Option<u64>,
    /// Where campaign files land
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// superposed, control, or both
    #[arg(long)]
    mode: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut overrides = Vec::new();
        for pair in &self.set {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::Parse(format!("--set expects KEY=VALUE, got {pair:?}"))
            })?;
            overrides.push((key.trim().to_string(), value.trim().to_string()));
        }
        if let Some(n) = self.n_trials {
            overrides.push(("n_trials".into(), n.to_string()));
        }
        if let Some(seed) = self.master_seed {
            overrides.push(("master_seed".into(), seed.to_string()));
        }
        if let Some(dir) = &self.output_dir {
            overrides.push(("output_dir".into(), dir.display().to_string()));
        }
        if let Some(mode) = &self.mode {
            overrides.push(("mode".into(), mode.clone()));
        }
        parse_config(self.config.as_deref(), &overrides)
    }
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SelfenergyArgs {
    /// Sphere mass in kg
    #[arg(long)]
    mass: f64,
    /// Sphere radius in m
    #[arg(long)]
    radius: f64,
    /// Center separation of the two branches in m
    #[arg(long)]
    displacement: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Worker threads; 0 means all available cores
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Record which branch survived each trial
    #[arg(long)]
    debug: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// Campaign directory written by simulate
    #[arg(value_name = "DIR")]
    dir: Option<PathBuf>,
    /// Let debug fields (surviving branch) into the analysis
    #[arg(long)]
    debug: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Config key to vary
    #[arg(long)]
    param: String,
    /// Comma-separated values for the swept key
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Worker threads; 0 means all available cores
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Record which branch survived each trial
    #[arg(long)]
    debug: bool,
}

pub fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Table(args) => cmd_table(args),
        Command::Selfenergy(args) => cmd_selfenergy(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_table(args: TableArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let rows = benchmark_table(&PhysicalConstants::default(), config.apparatus.variant)?;
    let text = io::benchmark_table_text(&rows);
    print!("{text}");
    std::fs::create_dir_all(&config.output_dir)?;
    std::fs::write(config.output_dir.join("benchmark.txt"), &text)?;
    std::fs::write(
        config.output_dir.join("benchmark.csv"),
        io::benchmark_table_csv(&rows),
    )?;
    Ok(())
}

fn cmd_selfenergy(args: SelfenergyArgs) -> Result<()> {
    let constants = PhysicalConstants::default();
    let body = MassBody::new("sphere", args.mass, args.radius)?;
    let geometry = SuperpositionGeometry::new(body, args.displacement)?;
    let e_g = selfenergy::self_energy(
        &geometry,
        OverlapCoefficientVariant::default(),
        &constants,
    )?;
    println!("lambda            {:.4e}", geometry.lambda());
    println!("E_g               {:.4e} J", e_g);
    println!(
        "t (gamma=1)       {:.4e} s",
        selfenergy::collapse_time(e_g, 1.0, &constants)?
    );
    println!(
        "t (gamma=1/(8pi)) {:.4e} s",
        selfenergy::collapse_time(e_g, GAMMA_PENROSE, &constants)?
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = args.config.resolve()?;
    run_simulate(&config, args.parallelism, args.debug)?;
    Ok(())
}

/// Runs the arms the mode asks for. The control arm is the same bench with
/// the photon source blocked, so every control trigger is a dark count and
/// every control trace shows the bare piezo ramp.
fn run_simulate(
    config: &RunConfig,
    parallelism: usize,
    debug: bool,
) -> Result<Option<CampaignSummary>> {
    std::fs::create_dir_all(&config.output_dir)?;
    io::write_resolved_config(&config.output_dir.join("resolved_config.json"), config)?;

    let mut superposed = None;
    if matches!(config.mode, Mode::Superposed | Mode::Both) {
        let trials = run_campaign(
            &config.apparatus,
            config.n_trials,
            derive_seed(config.master_seed, &[0]),
            parallelism,
        )?;
        io::write_campaign_arm(&config.output_dir, "superposed", &trials, debug)?;
        println!(
            "superposed: {} trials -> {}",
            trials.len(),
            config.output_dir.join("superposed_traces.csv").display()
        );
        superposed = Some(trials);
    }
    let mut control = None;
    if matches!(config.mode, Mode::Control | Mode::Both) {
        let mut apparatus = config.apparatus.clone();
        apparatus.photon_rate = 0.0;
        let trials = run_campaign(
            &apparatus,
            config.n_trials,
            derive_seed(config.master_seed, &[1]),
            parallelism,
        )?;
        io::write_campaign_arm(&config.output_dir, "control", &trials, debug)?;
        println!(
            "control: {} trials -> {}",
            trials.len(),
            config.output_dir.join("control_traces.csv").display()
        );
        control = Some(trials);
    }

    if let (Some(superposed), Some(control)) = (&superposed, &control) {
        let summary = summarize_campaign(superposed, control, &config.apparatus)?;
        io::write_summary_json(&config.output_dir.join("summary.json"), &summary)?;
        print_summary(&summary);
        Ok(Some(summary))
    } else {
        Ok(None)
    }
}

fn print_summary(summary: &CampaignSummary) {
    println!("superposed photon trials {}", summary.n_superposed);
    println!("control trials           {}", summary.n_control);
    println!("mean onset superposed    {:.4e} s", summary.mean_onset_superposed);
    println!("mean onset control       {:.4e} s", summary.mean_onset_control);
    println!("mean excess delay        {:.4e} s", summary.mean_excess_delay);
    println!("predicted mean delay     {:.4e} s", summary.predicted_mean_delay);
    println!(
        "ks onset distributions   D={:.4} p={:.4e}",
        summary.ks_statistic, summary.ks_p_value
    );
    let degenerate = if summary.gamma_degenerate {
        " (at bracket edge)"
    } else {
        ""
    };
    println!(
        "gamma estimate           {:.4e} [{:.4e}, {:.4e}]{degenerate}",
        summary.gamma_estimate, summary.gamma_ci_low, summary.gamma_ci_high
    );
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Input(format!(
            "missing campaign file {}",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let dir = args
        .dir
        .or_else(|| {
            std::env::var("DPSIM_OUTPUT_DIR")
                .ok()
                .filter(|d| !d.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("dpsim_output"));
    if !dir.is_dir() {
        return Err(Error::Input(format!(
            "campaign directory {} does not exist",
            dir.display()
        )));
    }
    let resolved = dir.join("resolved_config.json");
    require_file(&resolved)?;
    for arm in ["superposed", "control"] {
        let (traces, metadata) = io::arm_paths(&dir, arm);
        require_file(&traces)?;
        require_file(&metadata)?;
    }

    let config = io::read_resolved_config(&resolved)?;
    let mut superposed = io::read_campaign_arm(&dir, "superposed")?;
    let mut control = io::read_campaign_arm(&dir, "control")?;
    if !args.debug {
        // The analysis side of the bench only ever sees the summing
        // junction; drop branch labels even if the files carry them.
        for trial in superposed.iter_mut().chain(control.iter_mut()) {
            trial.surviving_branch = None;
        }
    }
    let summary = summarize_campaign(&superposed, &control, &config.apparatus)?;
    io::write_summary_json(&dir.join("summary.json"), &summary)?;
    print_summary(&summary);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let base = args.config.resolve()?;
    std::fs::create_dir_all(&base.output_dir)?;
    let mut rows = vec![io::SWEEP_HEADER.to_string()];
    for value in &args.values {
        let mut point = base.clone();
        point.apply(&args.param, value)?;
        // Estimation needs both arms whatever the base mode says.
        point.mode = Mode::Both;
        point.output_dir = base.output_dir.join(format!("{}_{}", args.param, value));
        point.validate()?;
        println!("sweep point {} = {}", args.param, value);
        let summary = run_simulate(&point, args.parallelism, args.debug)?
            .ok_or_else(|| Error::State("sweep point produced no summary".into()))?;
        rows.push(io::sweep_csv_row(&args.param, value, &summary));
    }
    let path = base.output_dir.join("sweep.csv");
    std::fs::write(&path, rows.join("\n") + "\n")?;
    println!("sweep: {} points -> {}", args.values.len(), path.display());
    Ok(())
}
