//! Observation storage, CSV ingestion and the stratified train/test split.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// `n x d` matrix of finite observations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "{} values cannot form rows of width {d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ParseError {
                row: pos / d,
                col: pos % d,
                msg: "non-finite value".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            n: values.len() / d,
            d,
            values,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: d,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(name, d, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-dimension `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.d];
        for row in self.rows() {
            for (i, v) in row.iter().enumerate() {
                b[i].0 = b[i].0.min(*v);
                b[i].1 = b[i].1.max(*v);
            }
        }
        b
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(rows.len() * self.d);
        for &j in rows {
            values.extend_from_slice(self.row(j));
        }
        Dataset {
            name: self.name.clone(),
            n: rows.len(),
            d: self.d,
            values,
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.d).map(|i| format!("y{i}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in self.rows() {
            push_row(&mut out, row);
        }
        write_file(path, out.as_bytes())
    }
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&v.to_string());
    }
    out.push('\n');
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Observations with positive class or cluster ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    data: Dataset,
    labels: Vec<usize>,
}

impl LabeledDataset {
    /// Labels must be positive. Ids need not be contiguous: a sampled
    /// component with zero draws leaves a gap.
    pub fn new(data: Dataset, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != data.n() {
            return Err(Error::LengthMismatch {
                left: data.n(),
                right: labels.len(),
            });
        }
        if labels.contains(&0) {
            return Err(Error::InvalidArgument("labels must be positive".into()));
        }
        Ok(Self { data, labels })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_parts(self) -> (Dataset, Vec<usize>) {
        (self.data, self.labels)
    }

    /// Distinct label ids, ascending.
    pub fn classes(&self) -> Vec<usize> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Rows belonging to class `s`, as a dataset of their own.
    pub fn class_subset(&self, s: usize) -> Dataset {
        let rows: Vec<usize> = (0..self.labels.len()).filter(|&j| self.labels[j] == s).collect();
        self.data.select(&rows)
    }

    /// Writes the labels as the first column followed by the features.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("class");
        for i in 1..=self.data.d() {
            out.push_str(&format!(",y{i}"));
        }
        out.push('\n');
        for (row, l) in self.data.rows().zip(&self.labels) {
            out.push_str(&format!("{l},"));
            push_row(&mut out, row);
        }
        write_file(path, out.as_bytes())
    }
}

/// Stratified partition of a labeled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    /// One chunk; multi-chunk grouping is not supported.
    pub train: Vec<LabeledDataset>,
    pub test: Dataset,
    pub test_labels: Vec<usize>,
    pub p: f64,
}

pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Splits every class into `round(p n_s)` train rows and the remainder as
/// test rows. Rows keep their original relative order within each output.
pub fn split<R: Rng + ?Sized>(data: &LabeledDataset, p: f64, rng: &mut R) -> Result<SplitResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, &l) in data.labels.iter().enumerate() {
        by_class.entry(l).or_default().push(j);
    }
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (&s, rows) in &by_class {
        if rows.len() < 2 {
            return Err(Error::ClassTooSmall(s));
        }
        let take = round_half_up(p * rows.len() as f64).min(rows.len());
        if take == 0 {
            return Err(Error::ClassTooSmall(s));
        }
        let mut shuffled = rows.clone();
        shuffled.shuffle(rng);
        train_rows.extend_from_slice(&shuffled[..take]);
        test_rows.extend_from_slice(&shuffled[take..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    let train = LabeledDataset::new(
        data.data.select(&train_rows),
        train_rows.iter().map(|&j| data.labels[j]).collect(),
    )?;
    Ok(SplitResult {
        train: vec![train],
        test: data.data.select(&test_rows),
        test_labels: test_rows.iter().map(|&j| data.labels[j]).collect(),
        p,
    })
}

fn read_records(path: &Path, has_header: bool) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::ParseError {
            row: i,
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            row: 0,
            col: 0,
            msg: "no data rows".into(),
        });
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::RaggedRows {
                row: i,
                expected: width,
                got: r.len(),
            });
        }
    }
    Ok(rows)
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::ParseError {
        row,
        col,
        msg: format!("not a number: {cell:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::ParseError {
            row,
            col,
            msg: "non-finite value".into(),
        });
    }
    Ok(v)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// True when the first line of the file has a non-numeric field.
pub fn sniff_header(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let Some(first) = text.lines().find(|l| !l.trim().is_empty()) else {
        return Ok(false);
    };
    Ok(first.split(',').any(|c| c.trim().parse::<f64>().is_err()))
}

/// Reads a comma-separated numeric matrix.
pub fn load_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let rows = read_records(path, has_header)?;
    let d = rows[0].len();
    let mut values = Vec::with_capacity(rows.len() * d);
    for (i, r) in rows.iter().enumerate() {
        for (k, cell) in r.iter().enumerate() {
            values.push(parse_cell(cell, i, k)?);
        }
    }
    Dataset::new(dataset_name(path), d, values)
}

fn parse_label(cell: &str, row: usize, col: usize) -> Result<usize> {
    let v = parse_cell(cell, row, col)?;
    if v < 1.0 || v.fract() != 0.0 {
        return Err(Error::ParseError {
            row,
            col,
            msg: format!("label must be a positive integer, got {cell:?}"),
        });
    }
    Ok(v as usize)
}

/// Reads a single column of positive integer labels.
pub fn load_labels(path: &Path, has_header: bool) -> Result<Vec<usize>> {
    let rows = read_records(path, has_header)?;
    rows.iter().enumerate().map(|(i, r)| parse_label(&r[0], i, 0)).collect()
}

/// Reads a CSV where column `class_col` (1-based) holds the labels; the
/// remaining columns become the features.
pub fn load_labeled_csv(path: &Path, has_header: bool, class_col: usize) -> Result<LabeledDataset> {
    let rows = read_records(path, has_header)?;
    let width = rows[0].len();
    if class_col == 0 || class_col > width || width < 2 {
        return Err(Error::InvalidArgument(format!(
            "class column {class_col} outside 1..={width} or no feature columns left"
        )));
    }
    let c = class_col - 1;
    let mut values = Vec::with_capacity(rows.len() * (width - 1));
    let mut labels = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        for (k, cell) in r.iter().enumerate() {
            if k == c {
                labels.push(parse_label(cell, i, k)?);
            } else {
                values.push(parse_cell(cell, i, k)?);
            }
        }
    }
    LabeledDataset::new(Dataset::new(dataset_name(path), width - 1, values)?, labels)
}

pub fn write_labels(path: &Path, header: &str, labels: &[usize]) -> Result<()> {
    let mut out = format!("{header}\n");
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    write_file(path, out.as_bytes())
}
