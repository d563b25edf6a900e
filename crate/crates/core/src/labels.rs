//! Label-space encoding and decoding.
//!
//! Targets are trained in bipolar form (`0 → -1`, `1 → +1`). Predictions
//! are decoded with one global scalar threshold: label `j` of sample `i` is
//! relevant iff `raw[i][j] > threshold`, which fixes both how many labels a
//! sample gets and which ones.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Binary relevance matrix, one row per sample and one column per label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    rows: usize,
    labels: usize,
    data: Vec<u8>,
}

impl LabelMatrix {
    pub fn new(rows: usize, labels: usize, data: Vec<u8>) -> Result<Self> {
        if rows == 0 || labels == 0 {
            return Err(Error::InvalidDimension(format!(
                "label matrix needs at least one row and one label (got {rows}x{labels})"
            )));
        }
        if data.len() != rows * labels {
            return Err(Error::InvalidDimension(format!(
                "{rows}x{labels} label matrix needs {} entries, got {}",
                rows * labels,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| v > 1) {
            return Err(Error::LabelDomain(format!(
                "label entries must be 0 or 1, found {v}"
            )));
        }
        Ok(Self { rows, labels, data })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let labels = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * labels);
        for r in rows {
            let r = r.as_ref();
            if r.len() != labels {
                return Err(Error::InvalidDimension("ragged label rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), labels, data)
    }

    pub(crate) fn from_parts_unchecked(rows: usize, labels: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), rows * labels);
        Self { rows, labels, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.labels)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.labels..(i + 1) * self.labels]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.labels + j] == 1
    }

    /// Number of relevant labels in row `i`.
    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&v| v == 1).count()
    }

    pub fn select_rows(&self, idx: &[usize]) -> LabelMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.labels);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        LabelMatrix::from_parts_unchecked(idx.len(), self.labels, data)
    }

    pub fn complement(&self) -> LabelMatrix {
        LabelMatrix::from_parts_unchecked(
            self.rows,
            self.labels,
            self.data.iter().map(|v| 1 - v).collect(),
        )
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

pub fn to_bipolar(y: &LabelMatrix) -> Matrix {
    let data = y
        .data
        .iter()
        .map(|&v| if v == 1 { 1.0 } else { -1.0 })
        .collect();
    Matrix::new(y.rows, y.labels, data).expect("shape preserved")
}

/// Inverse of [`to_bipolar`]; entries must be exactly `±1`.
pub fn from_bipolar(y: &Matrix) -> Result<LabelMatrix> {
    crate::model::check_bipolar(y, "bipolar matrix")?;
    LabelMatrix::new(
        y.rows(),
        y.cols(),
        y.as_slice().iter().map(|&v| u8::from(v > 0.0)).collect(),
    )
}

/// Entry is 1 iff `raw > threshold`.
pub fn decode(raw: &Matrix, threshold: f64) -> LabelMatrix {
    let data = raw
        .as_slice()
        .iter()
        .map(|&v| u8::from(v > threshold))
        .collect();
    LabelMatrix::from_parts_unchecked(raw.rows(), raw.cols(), data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCalibration {
    pub threshold: f64,
    /// Hamming loss of `decode(raw, threshold)` on the calibration data.
    pub training_hamming: f64,
    pub candidates_evaluated: usize,
}

/// Candidate thresholds for `raw`: one below the minimum, the midpoints
/// between consecutive distinct values, and one above the maximum.
pub fn threshold_candidates(raw: &Matrix) -> Vec<f64> {
    let mut values = raw.as_slice().to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    candidates_from_sorted(&values)
}

fn candidates_from_sorted(distinct: &[f64]) -> Vec<f64> {
    let (Some(&lo), Some(&hi)) = (distinct.first(), distinct.last()) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(lo - 1.0);
    for w in distinct.windows(2) {
        out.push(midpoint(w[0], w[1]));
    }
    out.push(hi + 1.0);
    out
}

/// A threshold `t` with `a <= t < b`, so `v > t` splits exactly at `b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Picks the global threshold minimizing Hamming loss of `decode(raw, t)`
/// against `truth` over [`threshold_candidates`]. Ties go to the candidate
/// closest to zero, then to the smaller one.
///
/// Runs as one sweep over the sorted raw values.
pub fn calibrate_threshold(raw: &Matrix, truth: &LabelMatrix) -> Result<ThresholdCalibration> {
    if raw.shape() != truth.shape() {
        return Err(Error::shape(
            "calibrate_threshold",
            raw.shape(),
            truth.shape(),
        ));
    }
    if raw.rows() == 0 {
        return Err(Error::InvalidDimension(
            "calibration needs at least one sample".into(),
        ));
    }
    if !raw.is_finite() {
        return Err(Error::NonFinite("calibration raw outputs"));
    }
    let mut pairs: Vec<(f64, u8)> = raw
        .as_slice()
        .iter()
        .copied()
        .zip(truth.as_slice().iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let total = pairs.len();
    // Below every value all entries decode to 1: the negatives are wrong.
    let errors_below = pairs.iter().filter(|p| p.1 == 0).count();
    let mut errors = errors_below;
    let mut distinct = Vec::new();
    let mut errors_after = Vec::new();
    let mut i = 0;
    while i < total {
        let v = pairs[i].0;
        while i < total && pairs[i].0 == v {
            if pairs[i].1 == 1 {
                errors += 1;
            } else {
                errors -= 1;
            }
            i += 1;
        }
        distinct.push(v);
        errors_after.push(errors);
    }
    let candidates = candidates_from_sorted(&distinct);
    let candidate_errors = std::iter::once(errors_below).chain(errors_after.iter().copied());

    let mut best: Option<(f64, usize)> = None;
    for (c, e) in candidates.iter().copied().zip(candidate_errors) {
        best = match best {
            None => Some((c, e)),
            Some((bc, be)) => {
                if better(c, e, bc, be) {
                    Some((c, e))
                } else {
                    Some((bc, be))
                }
            }
        };
    }
    let (threshold, e) = best.expect("at least two candidates");
    Ok(ThresholdCalibration {
        threshold,
        training_hamming: e as f64 / total as f64,
        candidates_evaluated: candidates.len(),
    })
}

fn better(c: f64, e: usize, bc: f64, be: usize) -> bool {
    match e.cmp(&be) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match c.abs().total_cmp(&bc.abs()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => c < bc,
        },
    }
}
