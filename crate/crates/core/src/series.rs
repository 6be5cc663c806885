//! Time-series containers, trajectory CSV ingestion and sliding windows.
//!
//! Time steps are 1-based everywhere a time step is shown to a user
//! (timelines, intervals, CSV output). Windows and network blocks are stored
//! as 0-based half-open offsets `[start, end)` into the series, so the window
//! `[4, 24)` covers time steps 5 through 24.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One individual's equal-dimension trajectory, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: String,
    dim: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from a flat buffer of `len * dim` coordinates.
    pub fn new(id: impl Into<String>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if values.len() % dim != 0 {
            return Err(Error::Malformed(format!(
                "{} coordinates do not divide into {dim}-dimensional points",
                values.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            dim,
            values,
        })
    }

    pub fn from_points(id: impl Into<String>, points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptySeries)?;
        let mut values = Vec::with_capacity(points.len() * dim);
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::RaggedDimension {
                    row,
                    expected: dim,
                    found: p.len(),
                });
            }
            values.extend_from_slice(p);
        }
        Self::new(id, dim, values)
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(id: impl Into<String>, values: &[f64]) -> Result<Self> {
        Self::new(id, 1, values.to_vec())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Point at 0-based offset `t`.
    pub fn point(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Per-step displacement vectors; the first step has zero displacement.
    pub fn displacements(&self) -> TimeSeries {
        let mut out = vec![0.0; self.values.len()];
        for t in 1..self.len() {
            for k in 0..self.dim {
                out[t * self.dim + k] =
                    self.values[t * self.dim + k] - self.values[(t - 1) * self.dim + k];
            }
        }
        TimeSeries {
            id: self.id.clone(),
            dim: self.dim,
            values: out,
        }
    }

    fn restrict(&self, start: usize, end: usize) -> TimeSeries {
        TimeSeries {
            id: self.id.clone(),
            dim: self.dim,
            values: self.values[start * self.dim..end * self.dim].to_vec(),
        }
    }
}

/// Orders identifiers numerically when both parse as integers, else lexically.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// A collection of `n` series sharing length and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Vec<TimeSeries>,
    len: usize,
    dim: usize,
}

impl Dataset {
    /// Validates the series and orders them by id.
    pub fn new(mut series: Vec<TimeSeries>) -> Result<Self> {
        let first = series.first().ok_or(Error::EmptySeries)?;
        let (len, dim) = (first.len(), first.dim());
        for s in &series {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: s.dim(),
                });
            }
            if s.len() != len {
                return Err(Error::Malformed(format!(
                    "series {} has length {}, expected {len}",
                    s.id(),
                    s.len()
                )));
            }
        }
        series.sort_by(|a, b| compare_ids(a.id(), b.id()));
        if let Some(w) = series.windows(2).find(|w| w[0].id() == w[1].id()) {
            return Err(Error::Malformed(format!("duplicate id {}", w[0].id())));
        }
        Ok(Self { series, len, dim })
    }

    /// Number of individuals.
    pub fn n(&self) -> usize {
        self.series.len()
    }

    /// Common series length `t*`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn get(&self, index: usize) -> &TimeSeries {
        &self.series[index]
    }

    pub fn ids(&self) -> Vec<String> {
        self.series.iter().map(|s| s.id().to_owned()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.series.iter().position(|s| s.id() == id)
    }

    /// Restricts every series to `window`, preserving order.
    pub fn slice(&self, window: &Window) -> Result<Dataset> {
        if window.start >= window.end || window.end > self.len {
            return Err(Error::WindowOutOfRange {
                start: window.start,
                end: window.end,
                len: self.len,
            });
        }
        Ok(Dataset {
            series: self
                .series
                .iter()
                .map(|s| s.restrict(window.start, window.end))
                .collect(),
            len: window.len(),
            dim: self.dim,
        })
    }

    pub fn full_window(&self) -> Window {
        Window {
            index: 1,
            start: 0,
            end: self.len,
        }
    }

    pub fn displacements(&self) -> Dataset {
        Dataset {
            series: self.series.iter().map(TimeSeries::displacements).collect(),
            len: self.len,
            dim: self.dim,
        }
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }

    /// Parses `id,t,x0[,x1,...]` rows, re-basing times to start at 1.
    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 3 || &header[0] != "id" || &header[1] != "t" {
            return Err(Error::Malformed(
                "expected header `id,t,x0[,x1,...]`".into(),
            ));
        }
        let dim = header.len() - 2;

        let mut rows: HashMap<String, BTreeMap<i64, Vec<f64>>> = HashMap::new();
        let mut times = BTreeMap::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::RaggedDimension {
                    row: row + 1,
                    expected: dim,
                    found: record.len().saturating_sub(2),
                });
            }
            let id = record[0].to_owned();
            let t: i64 = record[1]
                .parse()
                .map_err(|_| Error::Malformed(format!("row {}: bad time `{}`", row + 1, &record[1])))?;
            let coords = record
                .iter()
                .skip(2)
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::Malformed(format!("row {}: bad coordinate `{v}`", row + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            times.insert(t, ());
            if rows.entry(id.clone()).or_default().insert(t, coords).is_some() {
                return Err(Error::DuplicateRow { id, t });
            }
        }
        let (Some((&t_min, _)), Some((&t_max, _))) = (times.first_key_value(), times.last_key_value())
        else {
            return Err(Error::EmptySeries);
        };

        let mut ids: Vec<String> = rows.keys().cloned().collect();
        ids.sort_by(|a, b| compare_ids(a, b));
        let mut series = Vec::with_capacity(ids.len());
        for id in ids {
            let by_time = &rows[&id];
            let mut values = Vec::with_capacity(((t_max - t_min + 1) as usize) * dim);
            for t in t_min..=t_max {
                let p = by_time.get(&t).ok_or_else(|| Error::Gap {
                    id: id.clone(),
                    t: t - t_min + 1,
                })?;
                values.extend_from_slice(p);
            }
            series.push(TimeSeries::new(id, dim, values)?);
        }
        Dataset::new(series)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes the trajectory CSV with 1-based time steps.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_owned(), "t".to_owned()];
        header.extend((0..self.dim).map(|k| format!("x{k}")));
        wtr.write_record(&header)?;
        let mut record = Vec::with_capacity(self.dim + 2);
        for s in &self.series {
            for (t, p) in s.points().enumerate() {
                record.clear();
                record.push(s.id().to_owned());
                record.push((t + 1).to_string());
                // `{}` on f64 prints the shortest representation that parses back exactly.
                record.extend(p.iter().map(|x| format!("{x}")));
                wtr.write_record(&record)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// The `index`-th sliding window, as 0-based half-open offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Whether the 1-based time step `t` falls inside the window.
    pub fn contains_step(&self, t: usize) -> bool {
        t > self.start && t <= self.end
    }
}

/// Default shift for a window length: a tenth of `omega`, rounded half up,
/// and never below one step.
pub fn default_shift(omega: usize) -> usize {
    ((omega + 5) / 10).max(1)
}

/// `K = floor((t* - omega) / delta)` regular windows starting at multiples of
/// `delta`, followed by one tail window `[K * delta, t*)`.
pub fn sliding_windows(t_star: usize, omega: usize, delta: usize) -> Result<Vec<Window>> {
    if omega == 0 || omega > t_star {
        return Err(Error::InvalidParameter(format!(
            "window length {omega} must lie in [1, {t_star}]"
        )));
    }
    if delta == 0 || delta > omega {
        return Err(Error::InvalidParameter(format!(
            "shift {delta} must lie in [1, {omega}]"
        )));
    }
    let k = (t_star - omega) / delta;
    let mut windows: Vec<Window> = (0..k)
        .map(|i| Window {
            index: i + 1,
            start: i * delta,
            end: i * delta + omega,
        })
        .collect();
    windows.push(Window {
        index: k + 1,
        start: k * delta,
        end: t_star,
    });
    Ok(windows)
}
