//! Synthetic data, delimited-text ingestion and k-fold splitting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::problems::Dataset;
use crate::rng::seeded;

/// Rows uniform on `[0, 1]^d`, labeled by a hidden `theta` uniform on
/// `[-1, 1]^d` through `z = 1` iff `theta' x > 0`. Returns `theta` too.
pub fn synth_generate(n: usize, d: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    let mut rng = seeded(seed);
    let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let ds = synth_rows(n, d, &theta, &mut rng)?;
    Ok((ds, theta))
}

/// [`synth_generate`] with a caller-chosen labeling vector.
pub fn synth_generate_with_theta(n: usize, theta: &[f64], seed: u64) -> Result<Dataset> {
    synth_rows(n, theta.len(), theta, &mut seeded(seed))
}

fn synth_rows<R: Rng>(n: usize, d: usize, theta: &[f64], rng: &mut R) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("synthetic data needs N, d >= 1 (got {n}, {d})")));
    }
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let start = features.len();
        features.extend((0..d).map(|_| rng.random::<f64>()));
        labels.push(u8::from(dot(theta, &features[start..]) > 0.0));
    }
    Dataset::new("synthetic", d, features, labels)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub label_column: LabelColumn,
    /// Label text mapped to 1; the single other label value maps to 0.
    pub positive_label: String,
    pub delimiter: u8,
    pub header: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            positive_label: "1".into(),
            delimiter: b',',
            header: false,
        }
    }
}

fn labels_match(cell: &str, positive: &str) -> bool {
    match (cell.parse::<f64>(), positive.parse::<f64>()) {
        (Ok(a), Ok(b)) => a == b,
        _ => cell == positive,
    }
}

/// Reads a delimited file into a [`Dataset`]. Every column except the label
/// column must be numeric.
pub fn load_delimited(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(0, format!("{other:?}")),
        })?;

    let header_label = match &opts.label_column {
        LabelColumn::Name(name) => {
            if !opts.header {
                return Err(Error::MissingColumn(format!("'{name}' (file read without a header)")));
            }
            let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
            Some(
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingColumn(format!("'{name}'")))?,
            )
        }
        _ => None,
    };

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut negative_text: Option<String> = None;
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cols = record.len();
        let label_idx = match (&opts.label_column, header_label) {
            (_, Some(i)) => i,
            (LabelColumn::Last, None) => cols - 1,
            (LabelColumn::Index(i), None) => *i,
            (LabelColumn::Name(_), None) => unreachable!("resolved from the header"),
        };
        if label_idx >= cols {
            return Err(Error::MissingColumn(format!("column {label_idx} on line {line} with {cols} fields")));
        }
        if cols < 2 {
            return Err(parse_err(line, "need at least one feature column".into()));
        }
        width.get_or_insert(cols);
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("non-numeric feature '{cell}' in column {j}")))?;
            features.push(v);
        }
        let cell = &record[label_idx];
        if labels_match(cell, &opts.positive_label) {
            labels.push(1);
        } else {
            match &negative_text {
                Some(neg) if labels_match(cell, neg) => {}
                Some(neg) => {
                    return Err(Error::NonBinaryLabels(format!(
                        "line {line}: label '{cell}' is neither '{}' nor '{neg}'",
                        opts.positive_label
                    )))
                }
                None => negative_text = Some(cell.to_string()),
            }
            labels.push(0);
        }
    }
    let width = width.ok_or_else(|| parse_err(0, "no data rows".into()))?;
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, width - 1, features, labels)
}

/// Writes features followed by the 0/1 label, one row per line, with
/// shortest round-trip number formatting.
pub fn write_delimited(ds: &Dataset, path: &Path, delimiter: u8) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let sep = char::from(delimiter);
    for (row, z) in ds.rows() {
        for v in row {
            write!(w, "{v}{sep}")?;
        }
        writeln!(w, "{z}")?;
    }
    w.flush()?;
    Ok(())
}

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    /// `(train, test)` subsets for `fold`.
    pub fn train_test(&self, ds: &Dataset, fold: usize) -> (Dataset, Dataset) {
        (ds.subset(&self.train_indices(fold)), ds.subset(&self.test_indices(fold)))
    }
}

/// Random permutation followed by round-robin fold assignment.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || n < k {
        return Err(Error::InvalidArgument(format!("cannot split {n} rows into {k} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded(seed));
    let mut assignments = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        assignments[i] = pos % k;
    }
    Ok(FoldPlan { k, assignments })
}
