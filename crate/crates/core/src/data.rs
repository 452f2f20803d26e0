//! Datasets: synthetic generators, CSV ingestion and the transforms used by the
//! experiments.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::points::Points;
use crate::splitting::{norm, sample_unit_vector};

pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub points: Points,
    /// `true` marks an anomaly.
    pub labels: Option<Vec<bool>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, points: Points, labels: Option<Vec<bool>>) -> Result<Self> {
        if let Some(l) = &labels {
            Error::check_dim(points.len(), l.len())?;
        }
        let feature_names = (1..=points.dim()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            name: name.into(),
            feature_names,
            points,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn n_anomalies(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().filter(|&&a| a).count())
    }

    pub fn contamination(&self) -> Option<f64> {
        self.n_anomalies().map(|a| a as f64 / self.len() as f64)
    }

    fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            points: self.points.select_rows(rows),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Training and test sets for a scenario. The test set is always the full dataset.
    pub fn scenario_split(&self, scenario: Scenario) -> Result<(Dataset, Dataset)> {
        match scenario {
            Scenario::Contaminated => Ok((self.clone(), self.clone())),
            Scenario::InliersOnly => {
                let labels = self.labels.as_ref().ok_or(Error::LabelsRequired)?;
                let rows: Vec<usize> = (0..self.len()).filter(|&i| !labels[i]).collect();
                Ok((self.subset(&rows), self.clone()))
            }
        }
    }

    /// Shifts every point by `offset`.
    pub fn translate(&self, offset: &[f64]) -> Result<Dataset> {
        Error::check_dim(self.dim(), offset.len())?;
        Ok(Dataset {
            points: self.points.map_rows(|row| {
                for (v, o) in row.iter_mut().zip(offset) {
                    *v += o;
                }
            }),
            ..self.clone()
        })
    }

    /// Reads a CSV with a header row. `label_column`, when given, must exist
    /// and hold 0/1 values; every other column is a numeric feature.
    pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let label_idx = match label_column {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
                path: path.to_path_buf(),
                row: 0,
                column: name.to_string(),
                message: "unknown label column".into(),
            })?),
            None => None,
        };
        let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| Some(c) != label_idx).collect();
        if feature_cols.is_empty() {
            return Err(Error::Data {
                path: path.to_path_buf(),
                message: "no feature columns".into(),
            });
        }

        let mut points = Points::with_dim(feature_cols.len());
        let mut labels = label_idx.map(|_| Vec::new());
        let mut row_buf = Vec::with_capacity(feature_cols.len());
        for (r, record) in reader.records().enumerate() {
            let row = r + 1;
            let record = record.map_err(|e| csv_error(path, e))?;
            if record.len() != headers.len() {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    row,
                    column: format!("{} fields", record.len()),
                    message: format!("expected {} fields", headers.len()),
                });
            }
            row_buf.clear();
            for &c in &feature_cols {
                row_buf.push(parse_cell(path, row, &headers[c], &record[c])?);
            }
            points.push(&row_buf)?;
            if let (Some(ci), Some(labels)) = (label_idx, labels.as_mut()) {
                let v = parse_cell(path, row, &headers[ci], &record[ci])?;
                labels.push(match v {
                    0.0 => false,
                    1.0 => true,
                    _ => {
                        return Err(Error::Csv {
                            path: path.to_path_buf(),
                            row,
                            column: headers[ci].clone(),
                            message: format!("label must be 0 or 1, got `{}`", &record[ci]),
                        })
                    }
                });
            }
        }
        if points.is_empty() {
            return Err(Error::Data {
                path: path.to_path_buf(),
                message: "no data rows".into(),
            });
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Dataset {
            name,
            feature_names: feature_cols.iter().map(|&c| headers[c].clone()).collect(),
            points,
            labels,
        })
    }

    /// Like [`Dataset::load_csv`], using a column named `label` when present.
    pub fn load_csv_auto(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let has_label = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .any(|h| h.trim() == LABEL_COLUMN);
        Self::load_csv(path, has_label.then_some(LABEL_COLUMN))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = self.feature_names.clone();
        if self.labels.is_some() {
            header.push(LABEL_COLUMN.to_string());
        }
        writer.write_record(&header).map_err(std::io::Error::from)?;
        for (i, row) in self.points.rows().enumerate() {
            let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if let Some(labels) = &self.labels {
                fields.push(if labels[i] { "1" } else { "0" }.to_string());
            }
            writer.write_record(&fields).map_err(std::io::Error::from)?;
        }
        writer
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::atomic::write(path.as_ref(), &self.to_csv_bytes()?)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map(|p| p.record() as usize).unwrap_or(0);
    Error::Csv {
        path: path.to_path_buf(),
        row,
        column: String::new(),
        message: e.to_string(),
    }
}

fn parse_cell(path: &Path, row: usize, column: &str, cell: &str) -> Result<f64> {
    let bad = |message: String| Error::Csv {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message,
    };
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| bad(format!("not a number: `{cell}`")))?;
    if !v.is_finite() {
        return Err(bad(format!("non-finite value `{cell}`")));
    }
    Ok(v)
}

/// Training scenario: contaminated data, or inliers only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Scenario I: train on everything, anomalies included.
    Contaminated,
    /// Scenario II: train on inliers only.
    InliersOnly,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Contaminated => "I",
            Scenario::InliersOnly => "II",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Scenario::Contaminated),
            "ii" | "2" => Ok(Scenario::InliersOnly),
            other => Err(Error::config(format!("unknown scenario `{other}` (expected I or II)"))),
        }
    }
}

/// Parameters of the hypersphere-with-directional-anomalies generators.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_inliers: usize,
    pub n_anomalies: usize,
    pub dim: usize,
    /// Inliers are uniform in the ball of this radius centred at the origin.
    pub inlier_radius: f64,
    /// Anomaly distance from the origin, uniform in `[min, max]`.
    pub anomaly_distance: (f64, f64),
    /// Isotropic Gaussian noise added to each anomaly.
    pub anomaly_noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_inliers: 1000,
            n_anomalies: 100,
            dim: 6,
            inlier_radius: 1.0,
            anomaly_distance: (2.0, 3.0),
            anomaly_noise: 0.05,
        }
    }
}

impl SyntheticSpec {
    /// Inliers first, then anomalies at `±r·direction + noise`.
    pub fn generate(&self, name: &str, direction: &[f64], seed: u64) -> Result<Dataset> {
        Error::check_dim(self.dim, direction.len())?;
        let dn = norm(direction);
        if dn == 0.0 {
            return Err(Error::config("anomaly direction must be nonzero"));
        }
        let unit: Vec<f64> = direction.iter().map(|v| v / dn).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n_inliers + self.n_anomalies;
        let mut points = Points::with_dim(self.dim);
        for _ in 0..self.n_inliers {
            let dir = sample_unit_vector(self.dim, &mut rng);
            let r = self.inlier_radius * rng.random::<f64>().powf(1.0 / self.dim as f64);
            let row: Vec<f64> = dir.iter().map(|v| v * r).collect();
            points.push(&row)?;
        }
        let (rmin, rmax) = self.anomaly_distance;
        for _ in 0..self.n_anomalies {
            let r = rng.random_range(rmin..=rmax);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let row: Vec<f64> = unit
                .iter()
                .map(|u| sign * r * u + self.anomaly_noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            points.push(&row)?;
        }
        let labels = (0..n).map(|i| i >= self.n_inliers).collect();
        Dataset::new(name, points, Some(labels))
    }
}

/// Unit 6-ball inliers with anomalies along the first feature.
pub fn generate_xaxis(seed: u64) -> Dataset {
    let spec = SyntheticSpec::default();
    let mut dir = vec![0.0; spec.dim];
    dir[0] = 1.0;
    spec.generate("xaxis", &dir, seed).expect("default spec is valid")
}

/// Unit 6-ball inliers with anomalies along the bisector of the first three features.
pub fn generate_bisect3d(seed: u64) -> Dataset {
    let spec = SyntheticSpec::default();
    let mut dir = vec![0.0; spec.dim];
    dir[..3].fill(1.0);
    spec.generate("bisect3d", &dir, seed).expect("default spec is valid")
}

/// Unlabeled standard Gaussian cloud, useful for 2-d score maps.
pub fn generate_gaussian(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
    Dataset::new("gaussian", Points::new(data, dim.max(1)).expect("rectangular"), None)
        .expect("unlabeled")
}

/// Synthetic generators addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Xaxis,
    Bisect3d,
}

impl SyntheticKind {
    pub fn generate(self, seed: u64) -> Dataset {
        match self {
            SyntheticKind::Xaxis => generate_xaxis(seed),
            SyntheticKind::Bisect3d => generate_bisect3d(seed),
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xaxis" => Ok(SyntheticKind::Xaxis),
            "bisect3d" | "bisect_3d" => Ok(SyntheticKind::Bisect3d),
            other => Err(Error::config(format!("unknown dataset kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn anomaly_rows(ds: &Dataset) -> Vec<&[f64]> {
        let labels = ds.labels.as_ref().unwrap();
        ds.points.rows().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).collect()
    }

    fn column_mean(rows: &[&[f64]], j: usize) -> f64 {
        rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64
    }

    #[test]
    fn xaxis_shape() {
        let ds = generate_xaxis(0);
        assert_eq!(ds.len(), 1100);
        assert_eq!(ds.dim(), 6);
        assert_eq!(ds.n_anomalies(), Some(100));
        assert!((ds.contamination().unwrap() - 100.0 / 1100.0).abs() < 1e-15);
        let labels = ds.labels.as_ref().unwrap();
        for (row, &l) in ds.points.rows().zip(labels) {
            if !l {
                assert!(norm(row) <= 1.0 + 3.0 * 0.05);
            }
        }
        let anomalies = anomaly_rows(&ds);
        for j in 1..6 {
            assert!(column_mean(&anomalies, j).abs() < 0.05);
        }
    }

    #[test]
    fn bisect_shape() {
        let ds = generate_bisect3d(4);
        assert_eq!(ds.len(), 1100);
        assert_eq!(ds.n_anomalies(), Some(100));
        let anomalies = anomaly_rows(&ds);
        for j in 3..6 {
            assert!(column_mean(&anomalies, j).abs() < 0.05);
        }
        for row in &anomalies {
            for a in 0..3 {
                for b in 0..3 {
                    assert!((row[a] - row[b]).abs() <= 6.0 * 0.05);
                }
            }
        }
    }

    #[test]
    fn generators_are_seed_deterministic() {
        assert_eq!(generate_xaxis(9), generate_xaxis(9));
        assert_ne!(generate_xaxis(9), generate_xaxis(10));
        assert_eq!(generate_bisect3d(3), generate_bisect3d(3));
    }

    #[test]
    fn scenarios() {
        let ds = generate_xaxis(1);
        let (train, test) = ds.scenario_split(Scenario::Contaminated).unwrap();
        assert_eq!(train.len(), 1100);
        assert_eq!(test.len(), 1100);
        let (train, test) = ds.scenario_split(Scenario::InliersOnly).unwrap();
        assert_eq!(train.len(), 1000);
        assert_eq!(test, ds);

        let clean = Dataset::new("c", Points::from_rows(&[[0.0], [1.0]]).unwrap(), Some(vec![false; 2])).unwrap();
        assert_eq!(clean.scenario_split(Scenario::InliersOnly).unwrap().0.len(), 2);

        let unlabeled = generate_gaussian(10, 2, 0);
        assert!(matches!(
            unlabeled.scenario_split(Scenario::InliersOnly),
            Err(Error::LabelsRequired)
        ));
    }

    #[test]
    fn translation() {
        let ds = generate_xaxis(2);
        assert_eq!(ds.translate(&[0.0; 6]).unwrap(), ds);
        let mut off = [0.0; 6];
        off[0] = -10.0;
        let twice = ds.translate(&off).unwrap().translate(&off).unwrap();
        off[0] = -20.0;
        let once = ds.translate(&off).unwrap();
        assert_eq!(twice.labels, once.labels);
        for (a, b) in twice.points.as_slice().iter().zip(once.points.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ds.translate(&[1.0]).is_err());

        let r0 = crate::splitting::compute_range(ds.points.rows()).unwrap();
        let r1 = crate::splitting::compute_range(ds.translate(&off).unwrap().points.rows()).unwrap();
        assert_eq!(r1.lower[0], r0.lower[0] - 20.0);
        assert_eq!(r1.upper[1], r0.upper[1]);
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_plain_and_labeled() {
        let f = write_tmp("a,b\n1,2\n3,4\n5,6\n");
        let ds = Dataset::load_csv(f.path(), None).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 2));
        assert!(ds.labels.is_none());
        assert_eq!(ds.points.row(2), &[5.0, 6.0]);

        let f = write_tmp("a,label,b\n1,0,2\n3,1,4\n");
        let ds = Dataset::load_csv(f.path(), Some("label")).unwrap();
        assert_eq!(ds.labels, Some(vec![false, true]));
        assert_eq!(ds.feature_names, vec!["a", "b"]);
        assert_eq!(ds.points.row(1), &[3.0, 4.0]);
        assert_eq!(Dataset::load_csv_auto(f.path()).unwrap(), ds);
    }

    #[test]
    fn load_errors_name_their_location() {
        let f = write_tmp("a,b\n1,2\n3,NaN\n");
        match Dataset::load_csv(f.path(), None) {
            Err(Error::Csv { row, column, .. }) => assert_eq!((row, column.as_str()), (2, "b")),
            other => panic!("{other:?}"),
        }
        let f = write_tmp("a,b\n1,2\n3\n");
        assert!(matches!(Dataset::load_csv(f.path(), None), Err(Error::Csv { row: 2, .. })));
        let f = write_tmp("a,b\n1,x\n");
        assert!(matches!(Dataset::load_csv(f.path(), None), Err(Error::Csv { row: 1, .. })));
        let f = write_tmp("a,b\n1,2\n");
        assert!(matches!(Dataset::load_csv(f.path(), Some("label")), Err(Error::Csv { .. })));
        let f = write_tmp("a,label\n1,2\n");
        assert!(Dataset::load_csv(f.path(), Some("label")).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = generate_bisect3d(5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bisect3d.csv");
        ds.save_csv(&path).unwrap();
        let back = Dataset::load_csv(&path, Some(LABEL_COLUMN)).unwrap();
        assert_eq!(back, ds);
    }
}
