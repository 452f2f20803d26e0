//! Dense row-major storage for point sets.

use crate::error::{Error, Result};

/// An `n × d` matrix of `f64` stored row-major. Rows are points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("points must have at least one feature"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        Ok(Self { data, dim })
    }

    /// An empty point set of the given dimension.
    pub fn with_dim(dim: usize) -> Self {
        Self {
            data: Vec::new(),
            dim,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Self::with_dim(dim.max(1));
        if rows.is_empty() {
            return Ok(points);
        }
        points.dim = dim;
        for row in rows {
            points.push(row.as_ref())?;
        }
        Ok(points)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        Error::check_dim(self.dim, row.len())?;
        self.data.extend_from_slice(row);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copies the listed rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Points {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Points {
            data,
            dim: self.dim,
        }
    }

    /// Copies the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Points> {
        if columns.is_empty() {
            return Err(Error::config("at least one column must be selected"));
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: bad + 1,
            });
        }
        let mut data = Vec::with_capacity(self.len() * columns.len());
        for row in self.rows() {
            data.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Points {
            data,
            dim: columns.len(),
        })
    }

    pub fn map_rows(&self, mut f: impl FnMut(&mut [f64])) -> Points {
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            f(row);
        }
        out
    }
}
