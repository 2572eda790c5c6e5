//! Command-line front end: threshold queries, parameter sweeps, oracle
//! cross-checks, and figure data series.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use middleman_core::{CostFamily, CostModel, MarketParams};

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;

use config::{resolve, resolve_required, FileConfig};
use sweep::{parse_outputs, Spacing, SweepMode, SweepSpec, SweepVar};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Engine(#[from] middleman_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for verification failures, 2 for usage/config/engine errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "middleman",
    version,
    about = "Equilibrium engine for a supplier/intermediary/consumer content market"
)]
pub struct Cli {
    /// Emit machine-readable JSON where the command supports it.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the primary output to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the production-cost thresholds bounding intermediation.
    Thresholds(ModelArgs),
    /// Sweep a parameter and emit metric columns as CSV.
    Sweep(SweepArgs),
    /// Cross-check the analytic solver against the brute-force oracle.
    OracleCheck(OracleArgs),
    /// Emit the data series behind a standard figure.
    Figures(FiguresArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct ModelArgs {
    /// Cost family: power | power-exp-sqrt | power-log | power-exp.
    #[arg(long)]
    pub family: Option<String>,
    /// Primary exponent (> 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Second exponent for the power-log family (> 1).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Per-consumer fee (> 0).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of consumers (>= 2).
    #[arg(long)]
    pub consumers: Option<u32>,
    /// Number of suppliers (>= 1; 1 selects the monopolist analysis).
    #[arg(long)]
    pub suppliers: Option<u32>,
    /// Supplier marginal cost factor (> 0).
    #[arg(long)]
    pub supply_cost: Option<f64>,
    /// Human-labor cost factor stacked on supplier prices (>= 0).
    #[arg(long)]
    pub human_cost: Option<f64>,
    /// Manual-production cost factor (> 0, `inf` to disable the route).
    #[arg(long)]
    pub manual_cost: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sweep variable: nu | alpha | consumers | gamma | supply-cost.
    #[arg(long)]
    pub var: Option<String>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// linear | log.
    #[arg(long)]
    pub spacing: Option<String>,
    /// baseline | monopolist | marginal | linear-fee.
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma-separated output columns.
    #[arg(long, value_delimiter = ',')]
    pub outputs: Vec<String>,
    /// Marginal-cost factor for `--mode marginal` sweeps over nu.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct OracleArgs {
    /// Quality-grid resolution per subgame (default 10001).
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Figure id: one of 2a, 2b, 4a, 4b, 5a, 5b, 6a, 6b, 7a, 7b, 8a, 8b.
    #[arg(long)]
    pub id: String,
    /// Directory receiving `fig_<id>.csv` and `fig_<id>.meta.json`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn parse_family(s: &str) -> Result<CostFamily, CliError> {
    match s.to_lowercase().replace(['-', '_'], "").as_str() {
        "power" => Ok(CostFamily::Power),
        "powerexpsqrt" => Ok(CostFamily::PowerExpSqrt),
        "powerlog" => Ok(CostFamily::PowerLog),
        "powerexp" => Ok(CostFamily::PowerExp),
        other => Err(CliError::Usage(format!("unknown cost family `{other}`"))),
    }
}

pub fn build_model(args: &ModelArgs, cfg: &FileConfig) -> Result<CostModel, CliError> {
    let family = parse_family(&resolve(
        args.family.clone(),
        cfg,
        "family",
        "power".into(),
    )?)?;
    let beta = resolve(args.beta, cfg, "beta", 2.0)?;
    if args.eta.is_some() && family != CostFamily::PowerLog {
        return Err(CliError::Usage(
            "--eta applies to the power-log family only".into(),
        ));
    }
    let model = match family {
        CostFamily::PowerLog => {
            let eta = resolve(args.eta, cfg, "eta", 2.0)?;
            CostModel::power_log(beta, eta)?
        }
        CostFamily::Power => CostModel::power(beta)?,
        CostFamily::PowerExpSqrt => CostModel::power_exp_sqrt(beta)?,
        CostFamily::PowerExp => CostModel::power_exp(beta)?,
    };
    Ok(model)
}

pub fn build_market(args: &ModelArgs, cfg: &FileConfig) -> Result<MarketParams, CliError> {
    let alpha = resolve(args.alpha, cfg, "alpha", 1.0)?;
    let consumers = resolve(args.consumers, cfg, "consumers", 4)?;
    let suppliers = resolve(args.suppliers, cfg, "suppliers", 2)?;
    let supply_cost = resolve(args.supply_cost, cfg, "supply-cost", 1.0)?;
    let human_cost = resolve(args.human_cost, cfg, "human-cost", 0.0)?;
    let manual_cost = resolve(args.manual_cost, cfg, "manual-cost", f64::INFINITY)?;
    Ok(MarketParams::new(
        alpha,
        consumers,
        suppliers,
        supply_cost,
        human_cost,
        manual_cost,
    )?)
}

pub fn build_sweep_spec(args: &SweepArgs, cfg: &FileConfig) -> Result<SweepSpec, CliError> {
    let model = build_model(&args.model, cfg)?;
    let params = build_market(&args.model, cfg)?;
    let var: String = resolve_required(args.var.clone(), cfg, "var")?;
    let mode: String = resolve(args.mode.clone(), cfg, "mode", "baseline".into())?;
    let spacing: String = resolve(args.spacing.clone(), cfg, "spacing", "log".into())?;
    let outputs = if args.outputs.is_empty() {
        match cfg.get::<String>("outputs")? {
            Some(s) => parse_outputs(&[s])?,
            None => parse_outputs(&["quality".to_string()])?,
        }
    } else {
        parse_outputs(&args.outputs)?
    };
    let spec = SweepSpec {
        model,
        params,
        var: var.parse::<SweepVar>().map_err(CliError::Usage)?,
        lo: resolve_required(args.lo, cfg, "lo")?,
        hi: resolve_required(args.hi, cfg, "hi")?,
        points: resolve(args.points, cfg, "points", 100)?,
        spacing: spacing.parse::<Spacing>().map_err(CliError::Usage)?,
        mode: mode.parse::<SweepMode>().map_err(CliError::Usage)?,
        gamma: resolve(args.gamma, cfg, "gamma", 0.0)?,
        outputs,
    };
    spec.validate()?;
    Ok(spec)
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

/// Dispatch a parsed command line. Errors propagate with their exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli.config)?;
    match &cli.command {
        Command::Thresholds(args) => {
            let model = build_model(args, &cfg)?;
            let params = build_market(args, &cfg)?;
            let text = commands::run_thresholds(&model, &params, cli.json)?;
            emit(&cli.out, &text)
        }
        Command::Sweep(args) => {
            let spec = build_sweep_spec(args, &cfg)?;
            let rows = spec.rows()?;
            let csv_text = output::csv(&spec.header(), &rows);
            if cli.json {
                let out = cli.out.as_ref().ok_or_else(|| {
                    CliError::Usage("sweep --json writes a metadata sidecar and needs --out".into())
                })?;
                let meta = serde_json::json!({
                    "spec": spec,
                    "engine": commands::engine_metadata(),
                });
                let meta_path = out.with_extension("meta.json");
                std::fs::write(
                    &meta_path,
                    format!("{}\n", serde_json::to_string_pretty(&meta)?),
                )?;
            }
            emit(&cli.out, &csv_text)
        }
        Command::OracleCheck(args) => {
            let grid_points = resolve(args.grid_points, &cfg, "grid-points", 10_001)?;
            let (report, ok) = commands::run_oracle_check(grid_points, cli.json)?;
            emit(&cli.out, &report)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Verification(
                    "oracle disagreed with the analytic solver".into(),
                ))
            }
        }
        Command::Figures(args) => {
            let written = figures::write_figure(&args.id, &args.out_dir)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}
