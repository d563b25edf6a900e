//! Dataset loading, feature scaling, k-fold splitting and stream scheduling.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::LabelMatrix;
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Matrix,
    pub labels: LabelMatrix,
    pub feature_names: Option<Vec<String>>,
    pub label_names: Option<Vec<String>>,
    pub domain_tag: Option<String>,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: LabelMatrix) -> Result<Self> {
        if features.rows() != labels.rows() {
            return Err(Error::shape("dataset", features.shape(), labels.shape()));
        }
        Ok(Self {
            features,
            labels,
            feature_names: None,
            label_names: None,
            domain_tag: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    pub fn label_count(&self) -> usize {
        self.labels.labels()
    }

    /// Rows `idx`, in that order, with metadata carried over.
    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(idx),
            labels: self.labels.select_rows(idx),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            domain_tag: self.domain_tag.clone(),
        }
    }
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_feature(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("'{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value '{field}'")));
    }
    Ok(v)
}

/// Dense CSV: the first `D` columns are features, the last `label_count`
/// columns are `0`/`1` labels. With `has_header`, the first line names the
/// columns.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_count: usize,
    has_header: bool,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    if label_count == 0 {
        return Err(Error::Config("label count must be at least 1".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;

    let header = if has_header {
        let h = reader
            .headers()
            .map_err(|e| parse_err(path, 1, e.to_string()))?;
        Some(h.iter().map(|s| s.trim().to_string()).collect::<Vec<_>>())
    } else {
        None
    };

    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                path,
                line,
                format!("ragged row: {} fields, expected {w}", record.len()),
            ));
        }
        if w <= label_count {
            return Err(parse_err(
                path,
                line,
                format!("{w} fields leaves no feature columns for {label_count} labels"),
            ));
        }
        let d = w - label_count;
        for field in record.iter().take(d) {
            features.push(parse_feature(path, line, field)?);
        }
        for field in record.iter().skip(d) {
            labels.push(match field.trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::LabelDomain(format!(
                        "{}:{line}: label field '{other}' is not 0 or 1",
                        path.display()
                    )))
                }
            });
        }
        rows += 1;
    }
    let Some(w) = width else {
        return Err(parse_err(path, 1, "no data rows"));
    };
    let d = w - label_count;
    let mut ds = LabeledDataset::new(
        Matrix::new(rows, d, features)?,
        LabelMatrix::new(rows, label_count, labels)?,
    )?;
    if let Some(h) = header {
        if h.len() == w {
            ds.feature_names = Some(h[..d].to_vec());
            ds.label_names = Some(h[d..].to_vec());
        }
    }
    Ok(ds)
}

pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    if let (Some(f), Some(l)) = (&ds.feature_names, &ds.label_names) {
        let _ = writeln!(
            s,
            "{}",
            f.iter().chain(l).cloned().collect::<Vec<_>>().join(",")
        );
    }
    for i in 0..ds.len() {
        let fields: Vec<String> = ds
            .features
            .row(i)
            .iter()
            .map(|v| v.to_string())
            .chain(ds.labels.row(i).iter().map(|v| v.to_string()))
            .collect();
        let _ = writeln!(s, "{}", fields.join(","));
    }
    fs::write(path, s)?;
    Ok(())
}

/// Sparse text format, one sample per line:
/// `<label,label,...> <idx>:<val> <idx>:<val> ...` with 1-based indices.
/// A line whose first token contains `:` has no labels. `#` starts a
/// comment.
pub fn load_sparse(
    path: impl AsRef<Path>,
    feature_count: usize,
    label_count: usize,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    if feature_count == 0 || label_count == 0 {
        return Err(Error::Config(
            "sparse format needs feature and label counts >= 1".into(),
        ));
    }
    let text = fs::read_to_string(path)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (n, raw_line) in text.lines().enumerate() {
        let line_no = n as u64 + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut frow = vec![0.0; feature_count];
        let mut lrow = vec![0u8; label_count];
        let mut tokens = line.split_whitespace().peekable();
        if let Some(first) = tokens.peek() {
            if !first.contains(':') {
                let first = tokens.next().unwrap_or_default();
                for idx in first.split(',').filter(|s| !s.is_empty()) {
                    let j = parse_index(path, line_no, idx, label_count, "label")?;
                    if lrow[j] == 1 {
                        return Err(parse_err(
                            path,
                            line_no,
                            format!("duplicate label index {idx}"),
                        ));
                    }
                    lrow[j] = 1;
                }
            }
        }
        let mut seen = BTreeSet::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| {
                parse_err(path, line_no, format!("expected index:value, got '{tok}'"))
            })?;
            let j = parse_index(path, line_no, idx, feature_count, "feature")?;
            if !seen.insert(j) {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("duplicate feature index {idx}"),
                ));
            }
            frow[j] = parse_feature(path, line_no, val)?;
        }
        features.extend(frow);
        labels.extend(lrow);
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(path, 1, "no data rows"));
    }
    LabeledDataset::new(
        Matrix::new(rows, feature_count, features)?,
        LabelMatrix::new(rows, label_count, labels)?,
    )
}

fn parse_index(path: &Path, line: u64, s: &str, bound: usize, what: &str) -> Result<usize> {
    let i: usize = s
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad {what} index '{s}'")))?;
    if i == 0 || i > bound {
        return Err(parse_err(
            path,
            line,
            format!("{what} index {i} out of range 1..={bound}"),
        ));
    }
    Ok(i - 1)
}

pub fn to_sparse_string(ds: &LabeledDataset) -> String {
    let mut s = String::new();
    for i in 0..ds.len() {
        let labels: Vec<String> = ds
            .labels
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(|(j, _)| (j + 1).to_string())
            .collect();
        let mut feats: Vec<String> = ds
            .features
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, v)| format!("{}:{}", j + 1, v))
            .collect();
        if labels.is_empty() && feats.is_empty() {
            // keep the row from reading back as a blank line
            feats.push("1:0".into());
        }
        let mut line = labels.join(",");
        for f in feats {
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&f);
        }
        let _ = writeln!(s, "{line}");
    }
    s
}

pub fn save_sparse(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_sparse_string(ds))?;
    Ok(())
}

/// Per-feature affine map sending the fitted `[min, max]` onto `[-1, 1]`.
/// Constant features map to 0. Values outside the fitted range are not
/// clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Normalizer {
    pub fn fit(features: &Matrix, rows: Range<usize>) -> Result<Self> {
        if rows.is_empty() || rows.end > features.rows() {
            return Err(Error::InvalidDimension(format!(
                "normalizer fit range {rows:?} invalid for {} rows",
                features.rows()
            )));
        }
        let d = features.cols();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for i in rows {
            for (j, &v) in features.row(i).iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn feature_count(&self) -> usize {
        self.mins.len()
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.mins.len() {
            return Err(Error::shape(
                "normalizer",
                features.shape(),
                (features.rows(), self.mins.len()),
            ));
        }
        let mut out = features.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let (lo, hi) = (self.mins[j], self.maxs[j]);
                *v = if hi > lo {
                    2.0 * (*v - lo) / (hi - lo) - 1.0
                } else {
                    0.0
                };
            }
        }
        out.check_finite("normalizer")?;
        Ok(out)
    }
}

pub fn fit_normalizer(ds: &LabeledDataset, rows: Range<usize>) -> Result<Normalizer> {
    Normalizer::fit(&ds.features, rows)
}

pub fn apply_normalizer(ds: &LabeledDataset, norm: &Normalizer) -> Result<LabeledDataset> {
    Ok(LabeledDataset {
        features: norm.apply(&ds.features)?,
        ..ds.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded random partition of `0..n` into `k` test folds whose sizes differ
/// by at most one; each train set is the complement of its test set.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 || k > n {
        return Err(Error::Config(format!(
            "fold count {k} out of range 2..={n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut start = 0;
    let mut tests = Vec::with_capacity(k);
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut test = perm[start..start + size].to_vec();
        test.sort_unstable();
        tests.push(test);
        start += size;
    }
    Ok(tests
        .into_iter()
        .map(|test| complement_fold(n, test))
        .collect())
}

fn complement_fold(n: usize, test: Vec<usize>) -> Fold {
    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..n).filter(|&i| !in_test[i]).collect();
    Fold { train, test }
}

/// Reads folds from a file with one line of space-separated 0-based test
/// indices per fold.
pub fn read_fold_file(path: impl AsRef<Path>, n: usize) -> Result<Vec<Fold>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut used = vec![false; n];
    let mut folds = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut test = Vec::new();
        for tok in line.split_whitespace() {
            let i: usize = tok
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("bad index '{tok}'")))?;
            if i >= n {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("index {i} out of range for {n} rows"),
                ));
            }
            if used[i] {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("index {i} appears in more than one fold"),
                ));
            }
            used[i] = true;
            test.push(i);
        }
        test.sort_unstable();
        folds.push(complement_fold(n, test));
    }
    if folds.len() < 2 {
        return Err(parse_err(path, 1, "fold file needs at least two folds"));
    }
    Ok(folds)
}

pub fn write_fold_file(folds: &[Fold], path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    for f in folds {
        let idx: Vec<String> = f.test.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", idx.join(" "));
    }
    fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamPlan {
    pub init_block_size: usize,
    pub block_size: usize,
    pub shuffle_seed: Option<u64>,
}

impl StreamPlan {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.init_block_size == 0 || self.block_size == 0 {
            return Err(Error::InfeasiblePlan(
                "block sizes must be at least 1".into(),
            ));
        }
        if self.init_block_size > n {
            return Err(Error::InfeasiblePlan(format!(
                "initial block of {} rows exceeds the {n} available",
                self.init_block_size
            )));
        }
        Ok(())
    }
}

/// Row order plus block boundaries: one initial block followed by stream
/// blocks of `block_size` rows (the last may be shorter).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSchedule {
    pub order: Vec<usize>,
    pub init: Range<usize>,
    pub blocks: Vec<Range<usize>>,
}

impl StreamSchedule {
    pub fn init_rows(&self) -> &[usize] {
        &self.order[self.init.clone()]
    }

    pub fn stream(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.blocks.iter().map(move |r| &self.order[r.clone()])
    }

    /// Initial block included.
    pub fn block_count(&self) -> usize {
        1 + self.blocks.len()
    }
}

pub fn stream_blocks(n: usize, plan: &StreamPlan) -> Result<StreamSchedule> {
    plan.validate(n)?;
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = plan.shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let init = 0..plan.init_block_size;
    let blocks = (plan.init_block_size..n)
        .step_by(plan.block_size)
        .map(|s| s..(s + plan.block_size).min(n))
        .collect();
    Ok(StreamSchedule {
        order,
        init,
        blocks,
    })
}
