//! Run a benchmark grid from TOML, the same way `fubif benchmark` does, and
//! print the report. Pass a directory of labeled CSV files to include them.
//!
//! ```bash
//! cargo run --release -p fubif --example benchmark_grid -- path/to/csvs
//! ```

use std::path::PathBuf;

use fubif::benchmark::{report_csv, run, BenchmarkGrid};

const GRID: &str = r#"
datasets = ["xaxis", "bisect3d"]
families = ["if", "eif", "hif", "quad"]
threshold_kinds = ["uniform", "normal"]
scenarios = ["II"]
auc_fs = true

[base]
runs = 3
n_trees = 100
"#;

fn main() -> fubif::Result<()> {
    let mut grid = BenchmarkGrid::from_toml(GRID)?;
    let dir = std::env::args().nth(1).map(PathBuf::from);
    if let (Some(dir), Some(names)) = (&dir, grid.datasets.as_mut()) {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "csv") {
                names.push(path.file_stem().unwrap().to_string_lossy().into_owned());
            }
        }
    }
    let rows = run(&grid, dir.as_deref())?;
    print!("{}", report_csv(&rows));
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} / {}: {}", row.dataset, row.model, row.error.as_deref().unwrap_or_default());
    }
    Ok(())
}
