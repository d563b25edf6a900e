//! The online sequential learner.
//!
//! A [`HiddenLayer`] of random, frozen neurons maps inputs to features `H`.
//! The output weights `β` are fitted by least squares: once in batch on the
//! initial block ([`OselmModel::init_phase`]) and then recursively, one
//! sample or one block at a time ([`OselmModel::update`]), keeping
//! `M = (HᵀH)⁻¹` current via Sherman–Morrison / Woodbury.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{matmul, normal_matrix, Cholesky, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Sigmoid,
    Sine,
    #[serde(rename = "hardlim")]
    HardLimit,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Sine => z.sin(),
            Activation::HardLimit => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Sine => "sine",
            Activation::HardLimit => "hardlim",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "sine" | "sin" => Ok(Activation::Sine),
            "hardlim" | "hard-limit" => Ok(Activation::HardLimit),
            other => Err(Error::Config(format!(
                "unknown activation '{other}' (expected sigmoid, sine or hardlim)"
            ))),
        }
    }
}

/// Random input weights (`hidden_count × input_dim`) and biases. Never
/// modified after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer {
    weights: Matrix,
    biases: Vec<f64>,
    activation: Activation,
}

impl HiddenLayer {
    /// Draws weights from U[-1, 1] and biases from U[0, 1] with a ChaCha8
    /// stream seeded by `seed`.
    pub fn random(
        input_dim: usize,
        hidden_count: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_count == 0 {
            return Err(Error::InvalidDimension(format!(
                "hidden layer needs input_dim >= 1 and hidden_count >= 1 (got {input_dim}, {hidden_count})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = Matrix::from_fn(hidden_count, input_dim, |_, _| rng.gen_range(-1.0..=1.0));
        let biases = (0..hidden_count)
            .map(|_| rng.gen_range(0.0..=1.0))
            .collect();
        Ok(Self {
            weights,
            biases,
            activation,
        })
    }

    /// Assembles a layer from explicit parameters.
    pub fn from_parts(weights: Matrix, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::InvalidDimension(
                "hidden layer weights must be non-empty".into(),
            ));
        }
        if biases.len() != weights.rows() {
            return Err(Error::InvalidDimension(format!(
                "{} biases for {} hidden neurons",
                biases.len(),
                weights.rows()
            )));
        }
        if biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("hidden layer biases"));
        }
        Ok(Self {
            weights,
            biases,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn hidden_count(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Hidden-layer output matrix: entry `(j, i) = g(wᵢ·xⱼ + bᵢ)`.
    pub fn output(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape(
                "hidden_output",
                x.shape(),
                self.weights.shape(),
            ));
        }
        let mut h = matmul(x, &self.weights.transpose())?;
        for j in 0..h.rows() {
            for (v, b) in h.row_mut(j).iter_mut().zip(&self.biases) {
                *v = self.activation.apply(*v + b);
            }
        }
        h.check_finite("hidden_output")?;
        Ok(h)
    }
}

pub fn init_hidden(
    input_dim: usize,
    hidden_count: usize,
    activation: Activation,
    seed: u64,
) -> Result<HiddenLayer> {
    HiddenLayer::random(input_dim, hidden_count, activation, seed)
}

pub fn hidden_output(layer: &HiddenLayer, x: &Matrix) -> Result<Matrix> {
    layer.output(x)
}

pub(crate) fn check_bipolar(y: &Matrix, what: &str) -> Result<()> {
    if let Some(v) = y.as_slice().iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::LabelDomain(format!(
            "{what} must be bipolar (+1/-1), found {v}"
        )));
    }
    Ok(())
}

/// Trained state of the online multi-label learner.
#[derive(Debug, Clone, PartialEq)]
pub struct OselmModel {
    hidden: HiddenLayer,
    /// Inverse of the (regularized) normal matrix, `hidden_count × hidden_count`.
    m: Matrix,
    /// Output weights, `hidden_count × label_count`.
    beta: Matrix,
    threshold: f64,
    ridge: f64,
    samples_seen: usize,
    blocks_seen: usize,
}

impl OselmModel {
    /// Batch fit on the initial block: `M₀ = (H₀ᵀH₀ + ridge·I)⁻¹`,
    /// `β₀ = M₀·H₀ᵀ·Y₀`. `y0` must be bipolar.
    pub fn init_phase(hidden: HiddenLayer, x0: &Matrix, y0: &Matrix, ridge: f64) -> Result<Self> {
        if x0.rows() != y0.rows() {
            return Err(Error::shape("init_phase", x0.shape(), y0.shape()));
        }
        if y0.cols() == 0 || x0.rows() == 0 {
            return Err(Error::InvalidDimension(
                "initial block needs at least one sample and one label".into(),
            ));
        }
        check_bipolar(y0, "initial targets")?;
        let h0 = hidden.output(x0)?;
        let g = normal_matrix(&h0, ridge)?;
        let n = g.rows();
        let m = Cholesky::factor(&g)?.solve(&Matrix::identity(n))?;
        let m = symmetrize(m);
        let beta = matmul(&m, &h0.t_matmul(y0)?)?;
        Ok(Self {
            hidden,
            m,
            beta,
            threshold: 0.0,
            ridge,
            samples_seen: x0.rows(),
            blocks_seen: 1,
        })
    }

    /// Assembles a model from stored state (used when loading model files).
    pub fn from_parts(
        hidden: HiddenLayer,
        m: Matrix,
        beta: Matrix,
        threshold: f64,
        ridge: f64,
        samples_seen: usize,
        blocks_seen: usize,
    ) -> Result<Self> {
        let n = hidden.hidden_count();
        if m.shape() != (n, n) {
            return Err(Error::shape("model M", m.shape(), (n, n)));
        }
        if beta.rows() != n || beta.cols() == 0 {
            return Err(Error::shape("model beta", beta.shape(), (n, beta.cols())));
        }
        if !threshold.is_finite() {
            return Err(Error::NonFinite("threshold"));
        }
        Ok(Self {
            hidden,
            m,
            beta,
            threshold,
            ridge,
            samples_seen,
            blocks_seen,
        })
    }

    /// Folds a new sample (`x` with one row) or block into the model.
    /// A single row uses the rank-one Sherman–Morrison step; larger blocks
    /// use the Woodbury form. On error the model is left untouched.
    pub fn update(&mut self, x: &Matrix, y: &Matrix) -> Result<()> {
        if x.rows() != y.rows() {
            return Err(Error::shape("update", x.shape(), y.shape()));
        }
        if x.rows() == 0 {
            return Err(Error::InvalidDimension("update block is empty".into()));
        }
        if y.cols() != self.label_count() {
            return Err(Error::shape(
                "update targets",
                y.shape(),
                (y.rows(), self.label_count()),
            ));
        }
        check_bipolar(y, "update targets")?;
        let h = self.hidden.output(x)?;
        let (m, beta) = if h.rows() == 1 {
            self.rank_one_step(h.row(0), y.row(0))?
        } else {
            self.block_step(&h, y)?
        };
        self.m = m;
        self.beta = beta;
        self.samples_seen += x.rows();
        self.blocks_seen += 1;
        Ok(())
    }

    fn rank_one_step(&self, h: &[f64], y: &[f64]) -> Result<(Matrix, Matrix)> {
        let n = self.m.rows();
        // u = M·h; M symmetric so hᵀM = uᵀ.
        let u: Vec<f64> = (0..n)
            .map(|i| self.m.row(i).iter().zip(h).map(|(a, b)| a * b).sum())
            .collect();
        let denom = 1.0 + h.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        if !denom.is_finite() || denom <= 0.0 {
            return Err(Error::NumericalBreakdown(format!(
                "1 + hᵀMh = {denom}; M has lost positive definiteness"
            )));
        }
        let mut m = self.m.clone();
        for i in 0..n {
            let ui = u[i];
            for (mij, uj) in m.row_mut(i).iter_mut().zip(&u) {
                *mij -= ui * uj / denom;
            }
        }
        let g: Vec<f64> = (0..n)
            .map(|i| m.row(i).iter().zip(h).map(|(a, b)| a * b).sum())
            .collect();
        let labels = self.beta.cols();
        let residual: Vec<f64> = (0..labels)
            .map(|j| y[j] - (0..n).map(|i| h[i] * self.beta[(i, j)]).sum::<f64>())
            .collect();
        let mut beta = self.beta.clone();
        for (i, gi) in g.iter().enumerate() {
            for (b, r) in beta.row_mut(i).iter_mut().zip(&residual) {
                *b += gi * r;
            }
        }
        m.check_finite("rank-one update")?;
        beta.check_finite("rank-one update")?;
        Ok((m, beta))
    }

    fn block_step(&self, h: &Matrix, y: &Matrix) -> Result<(Matrix, Matrix)> {
        // HM = (M·Hᵀ)ᵀ since M is symmetric.
        let hm = matmul(h, &self.m)?;
        let mut s = matmul(&hm, &h.transpose())?;
        for i in 0..s.rows() {
            s[(i, i)] += 1.0;
        }
        let s = symmetrize(s);
        let chol = Cholesky::factor(&s).map_err(|e| {
            Error::NumericalBreakdown(format!("I + H·M·Hᵀ is not positive definite ({e})"))
        })?;
        // M - M·Hᵀ·S⁻¹·H·M = M - WᵀW with W = L⁻¹·H·M.
        let w = chol.forward_substitute(&hm)?;
        let m = self.m.sub(&w.gram()?)?;
        let residual = y.sub(&matmul(h, &self.beta)?)?;
        let beta = self.beta.add(&matmul(&m, &h.t_matmul(&residual)?)?)?;
        Ok((m, beta))
    }

    /// Raw regression outputs `H·β`.
    pub fn predict_raw(&self, x: &Matrix) -> Result<Matrix> {
        matmul(&self.hidden.output(x)?, &self.beta)
    }

    pub fn hidden(&self) -> &HiddenLayer {
        &self.hidden
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn beta(&self) -> &Matrix {
        &self.beta
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.input_dim()
    }

    pub fn label_count(&self) -> usize {
        self.beta.cols()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: f64) -> Result<()> {
        if !threshold.is_finite() {
            return Err(Error::NonFinite("threshold"));
        }
        self.threshold = threshold;
        Ok(())
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn samples_seen(&self) -> usize {
        self.samples_seen
    }

    pub fn blocks_seen(&self) -> usize {
        self.blocks_seen
    }
}

fn symmetrize(mut a: Matrix) -> Matrix {
    let n = a.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}
