//! Example-based multi-label metrics and dataset multi-labelness statistics.
//!
//! Per-example set metrics follow one convention for empty sets: a term
//! whose denominator is zero scores 1 when prediction and truth are both
//! empty and 0 otherwise.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::labels::LabelMatrix;

/// Neumaier-compensated sum; order-insensitive to well below 1e-12 for the
/// sizes used here.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn check_shapes(op: &'static str, pred: &LabelMatrix, truth: &LabelMatrix) -> Result<()> {
    if pred.shape() != truth.shape() {
        return Err(Error::shape(op, pred.shape(), truth.shape()));
    }
    Ok(())
}

/// Per-row intersection, |pred|, |truth|.
fn row_counts(pred: &[u8], truth: &[u8]) -> (usize, usize, usize) {
    pred.iter()
        .zip(truth)
        .fold((0, 0, 0), |(i, p, t), (&a, &b)| {
            (
                i + usize::from(a & b),
                p + usize::from(a),
                t + usize::from(b),
            )
        })
}

fn ratio_or_empty(num: usize, den: usize, both_empty: bool) -> f64 {
    if den == 0 {
        if both_empty {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

pub fn hamming_loss(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<f64> {
    check_shapes("hamming_loss", pred, truth)?;
    let wrong = pred
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / (pred.rows() * pred.labels()) as f64)
}

/// Mean Jaccard similarity `|Y∩Z| / |Y∪Z|` over examples.
pub fn example_accuracy(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<f64> {
    check_shapes("example_accuracy", pred, truth)?;
    let terms = (0..pred.rows()).map(|i| {
        let (inter, p, t) = row_counts(pred.row(i), truth.row(i));
        ratio_or_empty(inter, p + t - inter, p == 0 && t == 0)
    });
    Ok(compensated_sum(terms) / pred.rows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Example-based precision, recall and F1.
pub fn example_prf(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<Prf> {
    check_shapes("example_prf", pred, truth)?;
    let mut p_terms = Vec::with_capacity(pred.rows());
    let mut r_terms = Vec::with_capacity(pred.rows());
    let mut f_terms = Vec::with_capacity(pred.rows());
    for i in 0..pred.rows() {
        let (inter, p, t) = row_counts(pred.row(i), truth.row(i));
        let both_empty = p == 0 && t == 0;
        p_terms.push(ratio_or_empty(inter, p, both_empty));
        r_terms.push(ratio_or_empty(inter, t, both_empty));
        f_terms.push(ratio_or_empty(2 * inter, p + t, both_empty));
    }
    let n = pred.rows() as f64;
    Ok(Prf {
        precision: compensated_sum(p_terms) / n,
        recall: compensated_sum(r_terms) / n,
        f1: compensated_sum(f_terms) / n,
    })
}

/// Mean number of relevant labels per sample.
pub fn label_cardinality(y: &LabelMatrix) -> f64 {
    let total: usize = (0..y.rows()).map(|i| y.row_count(i)).sum();
    total as f64 / y.rows() as f64
}

pub fn label_density(y: &LabelMatrix) -> f64 {
    label_cardinality(y) / y.labels() as f64
}

/// Fraction of samples with no predicted label.
pub fn empty_prediction_rate(pred: &LabelMatrix) -> f64 {
    let empty = (0..pred.rows()).filter(|&i| pred.row_count(i) == 0).count();
    empty as f64 / pred.rows() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub hamming_loss: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub empty_prediction_rate: f64,
    /// Seconds; absent when the model was trained in another process.
    pub train_time: Option<f64>,
    pub test_time: Option<f64>,
}

impl MetricsReport {
    pub fn evaluate(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<Self> {
        let prf = example_prf(pred, truth)?;
        Ok(Self {
            hamming_loss: hamming_loss(pred, truth)?,
            accuracy: example_accuracy(pred, truth)?,
            precision: prf.precision,
            recall: prf.recall,
            f1: prf.f1,
            empty_prediction_rate: empty_prediction_rate(pred),
            train_time: None,
            test_time: None,
        })
    }

    pub fn with_times(mut self, train_time: Option<f64>, test_time: Option<f64>) -> Self {
        self.train_time = train_time;
        self.test_time = test_time;
        self
    }

    /// Metric name/value pairs in report order; absent timings are skipped.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("hamming_loss", self.hamming_loss),
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("empty_prediction_rate", self.empty_prediction_rate),
        ];
        if let Some(t) = self.train_time {
            out.push(("train_time", t));
        }
        if let Some(t) = self.test_time {
            out.push(("test_time", t));
        }
        out
    }

    /// `name<TAB>value` lines, six decimals.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (name, value) in self.entries() {
            let _ = writeln!(s, "{name}\t{value:.6}");
        }
        s
    }

    /// Parses the output of [`MetricsReport::to_kv`].
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut r = MetricsReport {
            hamming_loss: f64::NAN,
            accuracy: f64::NAN,
            precision: f64::NAN,
            recall: f64::NAN,
            f1: f64::NAN,
            empty_prediction_rate: f64::NAN,
            train_time: None,
            test_time: None,
        };
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse {
                path: "<metrics>".into(),
                line: n as u64 + 1,
                msg,
            };
            let (name, value) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected name<TAB>value".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad value: {e}")))?;
            match name {
                "hamming_loss" => r.hamming_loss = value,
                "accuracy" => r.accuracy = value,
                "precision" => r.precision = value,
                "recall" => r.recall = value,
                "f1" => r.f1 = value,
                "empty_prediction_rate" => r.empty_prediction_rate = value,
                "train_time" => r.train_time = Some(value),
                "test_time" => r.test_time = Some(value),
                other => return Err(bad(format!("unknown metric '{other}'"))),
            }
        }
        Ok(r)
    }

    /// Aligned two-column text table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (name, value) in self.entries() {
            let unit = if name.ends_with("_time") { " s" } else { "" };
            let _ = writeln!(s, "{name:<22} {value:>10.6}{unit}");
        }
        s
    }
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (n - 1.0)).sqrt())
}
