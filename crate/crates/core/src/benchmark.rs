//! Dataset × family grid runs producing the benchmark report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use crate::config::RunConfig;
use crate::data::{Dataset, Scenario, SyntheticKind};
use crate::error::{Error, Result};
use crate::forest::{tree_seed, Forest, ForestConfig};
use crate::importance::{Explainer, Partition};
use crate::metrics::{self, AucFsOptions, ScoredLabels};
use crate::splitting::{FamilyKind, SplitFamily};
use crate::threshold::ThresholdKind;

pub const REPORT_HEADER: &str =
    "dataset,model,scenario,threshold_kind,avg_prec,roc_auc,prec_at_p,auc_fs,fit_ms,score_ms,runs";

/// Grid description, read from TOML.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkGrid {
    /// Built-in generators (`xaxis`, `bisect3d`) or names of `<name>.csv`
    /// files in the datasets directory. Unset means every CSV in the directory.
    pub datasets: Option<Vec<String>>,
    #[serde(default)]
    pub families: Vec<String>,
    #[serde(default)]
    pub threshold_kinds: Vec<String>,
    #[serde(default)]
    pub scenarios: Vec<String>,
    /// Also compute the feature-selection score (one extra refit per feature
    /// count, direction and run).
    #[serde(default)]
    pub auc_fs: bool,
    /// Shared forest settings; `family`, `threshold_kind` and `scenario` here
    /// are ignored in favour of the lists above.
    #[serde(default)]
    pub base: RunConfig,
}

impl BenchmarkGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub model: String,
    pub scenario: String,
    pub threshold_kind: String,
    /// `None` when the cell failed or the metric was not requested.
    pub avg_prec: Option<f64>,
    pub roc_auc: Option<f64>,
    pub prec_at_p: Option<f64>,
    pub auc_fs: Option<f64>,
    pub fit_ms: Option<f64>,
    pub score_ms: Option<f64>,
    pub runs: usize,
    pub error: Option<String>,
}

impl BenchmarkRow {
    pub fn to_csv_line(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.dataset,
            self.model,
            self.scenario,
            self.threshold_kind,
            f(self.avg_prec),
            f(self.roc_auc),
            f(self.prec_at_p),
            f(self.auc_fs),
            f(self.fit_ms),
            f(self.score_ms),
            self.runs
        )
    }
}

pub fn report_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

enum Source {
    Synthetic(SyntheticKind),
    File(PathBuf),
}

impl Source {
    fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            Source::Synthetic(kind) => Ok(kind.generate(seed)),
            Source::File(path) => Dataset::load_csv_auto(path),
        }
    }
}

fn resolve_sources(grid: &BenchmarkGrid, dir: Option<&Path>) -> Result<Vec<(String, Source)>> {
    let csv_in_dir = |name: &str| -> Result<PathBuf> {
        let dir = dir.ok_or_else(|| Error::config(format!("dataset `{name}` needs a datasets directory")))?;
        Ok(dir.join(format!("{name}.csv")))
    };
    match &grid.datasets {
        Some(names) => names
            .iter()
            .map(|name| {
                let source = match name.parse::<SyntheticKind>() {
                    Ok(kind) => Source::Synthetic(kind),
                    Err(_) => Source::File(csv_in_dir(name)?),
                };
                Ok((name.clone(), source))
            })
            .collect(),
        None => {
            let Some(dir) = dir else { return Ok(Vec::new()) };
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .collect();
            files.sort();
            Ok(files
                .into_iter()
                .map(|p| {
                    let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    (name, Source::File(p))
                })
                .collect())
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Cell<'a> {
    source: &'a Source,
    family: SplitFamily,
    threshold: ThresholdKind,
    scenario: Scenario,
}

fn run_cell(cell: &Cell<'_>, base: &ForestConfig, runs: usize, with_auc_fs: bool) -> Result<[f64; 6]> {
    let (mut ap, mut auc, mut prec) = (0.0, 0.0, 0.0);
    let mut fit_ms = Vec::with_capacity(runs);
    let mut score_ms = Vec::with_capacity(runs);
    let mut auc_fs = f64::NAN;
    for run in 0..runs {
        let run_seed = tree_seed(base.seed, run as u64);
        let data = cell.source.load(run as u64)?;
        let labels = data.labels.clone().ok_or(Error::LabelsRequired)?;
        let (train, test) = data.scenario_split(cell.scenario)?;
        let config = ForestConfig {
            family: cell.family.clone(),
            threshold: cell.threshold,
            seed: run_seed,
            ..base.clone()
        };

        let t0 = Instant::now();
        let forest = Forest::fit(&train.points, &config)?;
        fit_ms.push(t0.elapsed().as_secs_f64() * 1e3);
        let t1 = Instant::now();
        let scores = forest.score_all(&test.points)?;
        score_ms.push(t1.elapsed().as_secs_f64() * 1e3);

        let sl = ScoredLabels::new(&scores, &labels)?;
        ap += metrics::average_precision(sl)?;
        auc += metrics::roc_auc(sl)?;
        let p = data.contamination().unwrap_or(0.0);
        prec += if p > 0.0 && p < 1.0 {
            metrics::precision_at_contamination(sl, p)?
        } else {
            f64::NAN
        };

        if with_auc_fs && run == 0 && data.dim() >= 2 {
            let gfi = Explainer::new(&forest)
                .global_importance(&test.points, Partition::Labels(&labels))?
                .gfi;
            let options = AucFsOptions {
                forest: config.clone(),
                scenario: cell.scenario,
                runs,
            };
            auc_fs = metrics::auc_fs(&data, &gfi, &options)?.value;
        }
    }
    let n = runs as f64;
    Ok([ap / n, auc / n, prec / n, auc_fs, median(fit_ms), median(score_ms)])
}

/// Runs every cell of the grid. Failures are recorded in the row and the run continues.
pub fn run(grid: &BenchmarkGrid, datasets_dir: Option<&Path>) -> Result<Vec<BenchmarkRow>> {
    let settings = grid.base.resolve(None)?;
    let families = grid
        .families
        .iter()
        .map(|f| {
            let kind: FamilyKind = f.parse()?;
            Ok(SplitFamily {
                kind,
                ..settings.forest.family.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let thresholds = if grid.threshold_kinds.is_empty() {
        vec![settings.forest.threshold]
    } else {
        grid.threshold_kinds.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    let scenarios = if grid.scenarios.is_empty() {
        vec![Scenario::InliersOnly]
    } else {
        grid.scenarios.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    let sources = resolve_sources(grid, datasets_dir)?;

    let mut rows = Vec::new();
    for (name, source) in &sources {
        for family in &families {
            for &threshold in &thresholds {
                for &scenario in &scenarios {
                    let cell = Cell {
                        source,
                        family: family.clone(),
                        threshold,
                        scenario,
                    };
                    let mut row = BenchmarkRow {
                        dataset: name.clone(),
                        model: family.to_string(),
                        scenario: scenario.to_string(),
                        threshold_kind: threshold.to_string(),
                        avg_prec: None,
                        roc_auc: None,
                        prec_at_p: None,
                        auc_fs: None,
                        fit_ms: None,
                        score_ms: None,
                        runs: settings.runs,
                        error: None,
                    };
                    match run_cell(&cell, &settings.forest, settings.runs, grid.auc_fs) {
                        Ok([ap, auc, prec, fs, fit, score]) => {
                            let finite = |v: f64| v.is_finite().then_some(v);
                            row.avg_prec = Some(ap);
                            row.roc_auc = Some(auc);
                            row.prec_at_p = finite(prec);
                            row.auc_fs = finite(fs);
                            row.fit_ms = Some(fit);
                            row.score_ms = Some(score);
                        }
                        Err(e) => row.error = Some(e.to_string()),
                    }
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}
