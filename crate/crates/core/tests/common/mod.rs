#![allow(dead_code, clippy::needless_range_loop)]

use osml_elm::{LabelMatrix, LabeledDataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn random_labels(rows: usize, labels: usize, seed: u64) -> LabelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LabelMatrix::new(
        rows,
        labels,
        (0..rows * labels).map(|_| rng.gen_range(0..2)).collect(),
    )
    .unwrap()
}

/// Labels from a random linear teacher with per-label offsets, plus a
/// little label noise. Learnable but not trivially so.
pub fn teacher_dataset(n: usize, d: usize, m: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = uniform(n, d, seed.wrapping_add(1));
    let w: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut y = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let s: f64 = x.row(i).iter().zip(&w[j]).map(|(a, c)| a * c).sum::<f64>() + b[j];
            let flip = rng.gen_bool(0.05);
            y.push(u8::from((s > 0.0) != flip));
        }
    }
    LabeledDataset::new(x, LabelMatrix::new(n, m, y).unwrap()).unwrap()
}

/// Least squares `argmin ‖A·X − B‖` via Householder QR, columnwise.
pub fn lstsq_qr(a: &Matrix, b: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    assert!(m >= n);
    let k = b.cols();
    let mut r: Vec<Vec<f64>> = a.to_rows();
    let mut q: Vec<Vec<f64>> = b.to_rows();
    for j in 0..n {
        let norm = (j..m).map(|i| r[i][j] * r[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| r[i][j]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for c in j..n {
            let dot: f64 = (j..m).map(|i| v[i - j] * r[i][c]).sum();
            let f = 2.0 * dot / vv;
            for i in j..m {
                r[i][c] -= f * v[i - j];
            }
        }
        for c in 0..k {
            let dot: f64 = (j..m).map(|i| v[i - j] * q[i][c]).sum();
            let f = 2.0 * dot / vv;
            for i in j..m {
                q[i][c] -= f * v[i - j];
            }
        }
    }
    let mut x = vec![vec![0.0; k]; n];
    for c in 0..k {
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|t| r[i][t] * x[t][c]).sum();
            x[i][c] = (q[i][c] - s) / r[i][i];
        }
    }
    Matrix::from_rows(&x).unwrap()
}

pub fn bipolar(y: &LabelMatrix) -> Matrix {
    let data = y
        .as_slice()
        .iter()
        .map(|&v| if v == 1 { 1.0 } else { -1.0 })
        .collect();
    Matrix::new(y.rows(), y.labels(), data).unwrap()
}

pub fn rows(m: &Matrix, range: std::ops::Range<usize>) -> Matrix {
    m.select_rows(&range.collect::<Vec<_>>())
}
