//! Flat storage for sets of points in `R^d` and their CSV form.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// `len()` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InvalidParameter("empty point list".into()))?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    /// Applies `f` to every point, producing a point set of the same dimension.
    pub fn map_points(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut coords = vec![0.0; self.coords.len()];
        for (src, dst) in self.iter().zip(coords.chunks_exact_mut(self.dim)) {
            f(src, dst);
        }
        Self {
            dim: self.dim,
            coords,
        }
    }
}

/// Reads one point per row. A header row is detected (and skipped) when its
/// first field does not parse as a number.
pub fn read_csv<R: Read>(reader: R) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut dim = None;
    let mut coords = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if line == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let row: Vec<f64> = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: '{f}' is not a number", line + 1)))
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                })
            }
            _ => {}
        }
        coords.extend(row);
    }
    let dim = dim.ok_or_else(|| Error::Parse("no data rows".into()))?;
    PointSet::new(dim, coords)
}

pub fn write_csv<W: Write>(writer: W, points: &PointSet) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for p in points.iter() {
        wtr.write_record(p.iter().map(|v| format!("{v:e}")))?;
    }
    wtr.flush()?;
    Ok(())
}
