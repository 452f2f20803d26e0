//! Command-line front end: `fit`, `score`, `explain`, `benchmark`, `scoremap`
//! and `gen-data`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 dimension
//! mismatch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::benchmark::{self, BenchmarkGrid};
use crate::config::{DepthSetting, RunConfig};
use crate::data::{Dataset, SyntheticKind};
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::importance::{Explainer, Partition};
use crate::metrics::{self, ScoredLabels};
use crate::persist;
use crate::scoremap;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_DIMENSION: u8 = 4;

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => EXIT_CONFIG,
            Error::DimensionMismatch { .. } | Error::ScoremapDimension(_) => EXIT_DIMENSION,
            _ => EXIT_DATA,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fubif", version, about = "Function-based isolation forests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a forest on a CSV and write a FUBIF1 model file.
    Fit(FitArgs),
    /// Score every row of a CSV.
    Score(ScoreArgs),
    /// Local or global feature importance.
    Explain(ExplainArgs),
    /// Run a dataset × family grid and write the report CSV.
    Benchmark(BenchmarkArgs),
    /// Score a regular grid over a 2-d model's plane.
    Scoremap(ScoremapArgs),
    /// Write a synthetic dataset as CSV.
    GenData(GenDataArgs),
}

/// Run configuration: a TOML file plus per-key flags, flags winning.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with flat run-configuration keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub quad_lambda: Option<f64>,
    /// Comma-separated hidden widths for the network family.
    #[arg(long, value_delimiter = ',')]
    pub nn_hidden_widths: Option<Vec<usize>>,
    #[arg(long = "threshold")]
    pub threshold_kind: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Positive integer or `auto`.
    #[arg(long)]
    pub max_depth: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `I` (all data) or `II` (inliers only).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub contamination: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
}

impl ConfigArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            family: self.family.clone(),
            quad_lambda: self.quad_lambda,
            nn_hidden_widths: self.nn_hidden_widths.clone(),
            threshold_kind: self.threshold_kind.clone(),
            eta: self.eta,
            n_trees: self.n_trees,
            subsample: self.subsample,
            max_depth: self.max_depth.clone().map(DepthSetting::Named),
            seed: self.seed,
            scenario: self.scenario.clone(),
            contamination: self.contamination,
            runs: self.runs,
        };
        Ok(file.merge(flags))
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Training CSV; a `label` column is excluded from the features.
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the model.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also report average precision, ROC AUC and precision at contamination.
    #[arg(long)]
    pub metrics: bool,
    /// Fraction used for precision at contamination; defaults to the label prevalence.
    #[arg(long)]
    pub contamination: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExplainMode {
    Local,
    Global,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ExplainMode,
    #[arg(long)]
    pub out: PathBuf,
    /// Top fraction of scores treated as outliers when the data have no labels.
    #[arg(long)]
    pub contamination: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// Directory of labeled CSV files.
    #[arg(long)]
    pub datasets: Option<PathBuf>,
    /// Grid file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScoremapArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Data whose bounding box, padded 10% per side, spans the grid.
    #[arg(long, conflicts_with = "bounds", required_unless_present = "bounds")]
    pub data: Option<PathBuf>,
    /// Explicit `x_min,x_max,y_min,y_max`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bounds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub grid_size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    /// `xaxis` or `bisect3d`.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated offset added to every point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub translate: Option<Vec<f64>>,
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    crate::atomic::write(path, text.as_bytes())
}

/// Fits a model; returns the fit wall time in milliseconds.
pub fn cmd_fit(args: &FitArgs) -> Result<f64> {
    let run = args.config.run_config()?;
    // reject bad values before touching the data
    run.resolve(None)?;
    let data = Dataset::load_csv_auto(&args.data)?;
    let settings = run.resolve(Some(data.dim()))?;
    let (train, _) = data.scenario_split(settings.scenario)?;
    let start = Instant::now();
    let forest = Forest::fit(&train.points, &settings.forest)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    persist::save(&forest, &args.out)?;
    Ok(ms)
}

/// Scores a dataset; returns the metrics text when requested.
pub fn cmd_score(args: &ScoreArgs) -> Result<Option<String>> {
    let forest = persist::load(&args.model)?;
    let data = Dataset::load_csv_auto(&args.data)?;
    Error::check_dim(forest.dim, data.dim())?;
    if args.metrics && data.labels.is_none() {
        return Err(Error::LabelsRequired);
    }
    let scores = forest.score_all(&data.points)?;
    let mut out = String::from("row_index,score\n");
    for (i, s) in scores.iter().enumerate() {
        let _ = writeln!(out, "{i},{s}");
    }
    let report = match (&data.labels, args.metrics) {
        (Some(labels), true) => {
            let sl = ScoredLabels::new(&scores, labels)?;
            let p = args.contamination.or(data.contamination()).unwrap_or(0.0);
            let mut text = String::from("metric,value\n");
            let _ = writeln!(text, "avg_prec,{}", metrics::average_precision(sl)?);
            let _ = writeln!(text, "roc_auc,{}", metrics::roc_auc(sl)?);
            let _ = writeln!(text, "prec_at_p,{}", metrics::precision_at_contamination(sl, p)?);
            Some(text)
        }
        _ => None,
    };
    write_out(&args.out, &out)?;
    Ok(report)
}

/// Writes local importances (one row per point) or the global importance
/// vector with a `<out>.meta` sidecar naming the partition and seed.
pub fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let forest = persist::load(&args.model)?;
    let data = Dataset::load_csv_auto(&args.data)?;
    Error::check_dim(forest.dim, data.dim())?;
    let explainer = Explainer::new(&forest);
    match args.mode {
        ExplainMode::Local => {
            let local = explainer.local_importance_all(&data.points)?;
            let mut out = String::from("row_index");
            for name in &data.feature_names {
                let _ = write!(out, ",{name}");
            }
            out.push('\n');
            for (i, v) in local.iter().enumerate() {
                let _ = write!(out, "{i}");
                for x in v.values() {
                    let _ = write!(out, ",{x}");
                }
                out.push('\n');
            }
            write_out(&args.out, &out)
        }
        ExplainMode::Global => {
            let (partition, mode) = match (&data.labels, args.contamination) {
                (Some(labels), _) => (Partition::Labels(labels), "labels".to_string()),
                (None, Some(p)) => (Partition::Contamination(p), format!("contamination={p}")),
                (None, None) => {
                    return Err(Error::config(
                        "global importance needs a label column or --contamination",
                    ))
                }
            };
            let global = explainer.global_importance(&data.points, partition)?;
            let mut out = String::from("feature_index,score\n");
            for (j, v) in global.gfi.values().iter().enumerate() {
                let _ = writeln!(out, "{j},{v}");
            }
            write_out(&args.out, &out)?;
            let meta = format!("partition={mode} seed={}\n", forest.config.seed);
            write_out(&sidecar(&args.out), &meta)
        }
    }
}

/// `<path>.meta`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<Vec<benchmark::BenchmarkRow>> {
    let grid = BenchmarkGrid::from_file(&args.config)?;
    let rows = benchmark::run(&grid, args.datasets.as_deref())?;
    write_out(&args.out, &benchmark::report_csv(&rows))?;
    Ok(rows)
}

pub fn cmd_scoremap(args: &ScoremapArgs) -> Result<()> {
    let forest = persist::load(&args.model)?;
    if forest.dim != 2 {
        return Err(Error::ScoremapDimension(forest.dim));
    }
    let bounds = match (&args.bounds, &args.data) {
        (Some(b), _) => {
            let [x0, x1, y0, y1] = b[..] else {
                return Err(Error::config("--bounds takes four values"));
            };
            [x0, x1, y0, y1]
        }
        (None, Some(path)) => {
            let data = Dataset::load_csv_auto(path)?;
            Error::check_dim(2, data.dim())?;
            scoremap::padded_bounds(&data.points)?
        }
        (None, None) => return Err(Error::config("scoremap needs --data or --bounds")),
    };
    let rows = scoremap::score_grid(&forest, bounds, args.grid_size)?;
    write_out(&args.out, &scoremap::to_csv(&rows))
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<()> {
    let kind: SyntheticKind = args.kind.parse()?;
    let mut data = kind.generate(args.seed);
    if let Some(offset) = &args.translate {
        data = data.translate(offset)?;
    }
    data.save_csv(&args.out)
}

/// Runs a parsed command, printing results to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let ms = cmd_fit(&a)?;
            println!("fit_ms,{ms:.3}");
        }
        Command::Score(a) => {
            if let Some(report) = cmd_score(&a)? {
                print!("{report}");
            }
        }
        Command::Explain(a) => cmd_explain(&a)?,
        Command::Benchmark(a) => {
            for row in cmd_benchmark(&a)? {
                if let Some(e) = &row.error {
                    eprintln!("{} / {}: {e}", row.dataset, row.model);
                }
            }
        }
        Command::Scoremap(a) => cmd_scoremap(&a)?,
        Command::GenData(a) => cmd_gen_data(&a)?,
    }
    Ok(())
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
