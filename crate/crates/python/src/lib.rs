//! Python bindings. Matrices cross the boundary as lists of rows (any
//! sequence of sequences works, including 2-D numpy arrays); label
//! matrices are rows of 0/1 integers.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use osml_elm::cli::{train_stream as rs_train_stream, NormalizerFit, RunConfig};
use osml_elm::labels::{self, to_bipolar};
use osml_elm::{
    data, metrics, numerics, Activation, Error, HiddenLayer, LabelMatrix, Matrix, OselmModel,
    SavedModel,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        e if e.exit_code() == 3 => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// Features and labels as row lists.
type Table = (Vec<Vec<f64>>, Vec<Vec<u8>>);

pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Matrix, Error> {
    Matrix::from_rows(&rows)
}

pub fn label_matrix(rows: Vec<Vec<u8>>) -> Result<LabelMatrix, Error> {
    LabelMatrix::from_rows(&rows)
}

/// A trained learner plus optional feature scaling.
#[pyclass(name = "Model", module = "osml_elm_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: SavedModel,
}

impl PyModel {
    fn scaled(&self, x: Vec<Vec<f64>>) -> Result<Matrix, Error> {
        let x = matrix(x)?;
        match &self.inner.normalizer {
            Some(n) => n.apply(&x),
            None => Ok(x),
        }
    }
}

#[pymethods]
impl PyModel {
    /// Batch initialization on one block. `y` holds 0/1 labels. Inputs are
    /// used as given (no scaling).
    #[staticmethod]
    #[pyo3(signature = (x, y, hidden, activation = "sigmoid", seed = 0, ridge = 0.0))]
    fn fit_initial(
        x: Vec<Vec<f64>>,
        y: Vec<Vec<u8>>,
        hidden: usize,
        activation: &str,
        seed: u64,
        ridge: f64,
    ) -> PyResult<Self> {
        let run = || -> Result<Self, Error> {
            let x = matrix(x)?;
            let y = label_matrix(y)?;
            let layer =
                HiddenLayer::random(x.cols(), hidden, activation.parse::<Activation>()?, seed)?;
            let model = OselmModel::init_phase(layer, &x, &to_bipolar(&y), ridge)?;
            Ok(Self {
                inner: SavedModel {
                    model,
                    normalizer: None,
                },
            })
        };
        run().map_err(to_py)
    }

    /// Full streaming run: normalizer fitted on the initial block, threshold
    /// calibrated on it, then block updates over the rest.
    #[staticmethod]
    #[pyo3(signature = (x, y, hidden, init_block = None, block = 30, activation = "sigmoid", seed = 0, ridge = 0.0, recalibrate = false))]
    #[allow(clippy::too_many_arguments)]
    fn fit_stream(
        x: Vec<Vec<f64>>,
        y: Vec<Vec<u8>>,
        hidden: usize,
        init_block: Option<usize>,
        block: usize,
        activation: &str,
        seed: u64,
        ridge: f64,
        recalibrate: bool,
    ) -> PyResult<Self> {
        let run = || -> Result<Self, Error> {
            let ds = data::LabeledDataset::new(matrix(x)?, label_matrix(y)?)?;
            let mut cfg = RunConfig::new(hidden, ds.label_count());
            cfg.init_block_size = init_block;
            cfg.block_size = block;
            cfg.activation = activation.parse()?;
            cfg.seed = seed;
            cfg.ridge = ridge;
            cfg.recalibrate_threshold = recalibrate;
            let run = rs_train_stream(&ds, &cfg, NormalizerFit::InitBlock)?;
            Ok(Self { inner: run.saved })
        };
        run().map_err(to_py)
    }

    /// Recursive least-squares update with one sample or a block.
    fn update(&mut self, x: Vec<Vec<f64>>, y: Vec<Vec<u8>>) -> PyResult<()> {
        let run = || -> Result<(), Error> {
            let x = self.scaled(x)?;
            let y = to_bipolar(&label_matrix(y)?);
            self.inner.model.update(&x, &y)
        };
        run().map_err(to_py)
    }

    fn predict_raw(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let x = self.scaled(x).map_err(to_py)?;
        Ok(self.inner.model.predict_raw(&x).map_err(to_py)?.to_rows())
    }

    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<u8>>> {
        let x = self.scaled(x).map_err(to_py)?;
        let raw = self.inner.model.predict_raw(&x).map_err(to_py)?;
        Ok(labels::decode(&raw, self.inner.model.threshold()).to_rows())
    }

    /// Calibrates and stores the decision threshold on `(x, y)`; returns
    /// `(threshold, training_hamming)`.
    fn calibrate(&mut self, x: Vec<Vec<f64>>, y: Vec<Vec<u8>>) -> PyResult<(f64, f64)> {
        let run = || -> Result<(f64, f64), Error> {
            let raw = self.inner.model.predict_raw(&self.scaled(x)?)?;
            let cal = labels::calibrate_threshold(&raw, &label_matrix(y)?)?;
            self.inner.model.set_threshold(cal.threshold)?;
            Ok((cal.threshold, cal.training_hamming))
        };
        run().map_err(to_py)
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.model.threshold()
    }

    #[setter]
    fn set_threshold(&mut self, t: f64) -> PyResult<()> {
        self.inner.model.set_threshold(t).map_err(to_py)
    }

    #[getter]
    fn samples_seen(&self) -> usize {
        self.inner.model.samples_seen()
    }

    #[getter]
    fn blocks_seen(&self) -> usize {
        self.inner.model.blocks_seen()
    }

    #[getter]
    fn hidden_count(&self) -> usize {
        self.inner.model.hidden().hidden_count()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.model.input_dim()
    }

    #[getter]
    fn label_count(&self) -> usize {
        self.inner.model.label_count()
    }

    fn beta(&self) -> Vec<Vec<f64>> {
        self.inner.model.beta().to_rows()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: SavedModel::load(path).map_err(to_py)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        let m = &self.inner.model;
        format!(
            "Model(input_dim={}, hidden={}, labels={}, samples_seen={}, blocks_seen={}, threshold={})",
            m.input_dim(),
            m.hidden().hidden_count(),
            m.label_count(),
            m.samples_seen(),
            m.blocks_seen(),
            m.threshold()
        )
    }
}

#[pyfunction]
fn hamming_loss(pred: Vec<Vec<u8>>, truth: Vec<Vec<u8>>) -> PyResult<f64> {
    metrics::hamming_loss(
        &label_matrix(pred).map_err(to_py)?,
        &label_matrix(truth).map_err(to_py)?,
    )
    .map_err(to_py)
}

#[pyfunction]
fn example_accuracy(pred: Vec<Vec<u8>>, truth: Vec<Vec<u8>>) -> PyResult<f64> {
    metrics::example_accuracy(
        &label_matrix(pred).map_err(to_py)?,
        &label_matrix(truth).map_err(to_py)?,
    )
    .map_err(to_py)
}

/// `(precision, recall, f1)`, example-based.
#[pyfunction]
fn example_prf(pred: Vec<Vec<u8>>, truth: Vec<Vec<u8>>) -> PyResult<(f64, f64, f64)> {
    let p = metrics::example_prf(
        &label_matrix(pred).map_err(to_py)?,
        &label_matrix(truth).map_err(to_py)?,
    )
    .map_err(to_py)?;
    Ok((p.precision, p.recall, p.f1))
}

#[pyfunction]
fn label_cardinality(y: Vec<Vec<u8>>) -> PyResult<f64> {
    Ok(metrics::label_cardinality(&label_matrix(y).map_err(to_py)?))
}

#[pyfunction]
fn label_density(y: Vec<Vec<u8>>) -> PyResult<f64> {
    Ok(metrics::label_density(&label_matrix(y).map_err(to_py)?))
}

/// `(threshold, training_hamming, candidates_evaluated)`.
#[pyfunction]
fn calibrate_threshold(raw: Vec<Vec<f64>>, truth: Vec<Vec<u8>>) -> PyResult<(f64, f64, usize)> {
    let cal = labels::calibrate_threshold(
        &matrix(raw).map_err(to_py)?,
        &label_matrix(truth).map_err(to_py)?,
    )
    .map_err(to_py)?;
    Ok((
        cal.threshold,
        cal.training_hamming,
        cal.candidates_evaluated,
    ))
}

#[pyfunction]
fn decode(raw: Vec<Vec<f64>>, threshold: f64) -> PyResult<Vec<Vec<u8>>> {
    Ok(labels::decode(&matrix(raw).map_err(to_py)?, threshold).to_rows())
}

#[pyfunction]
fn to_bipolar_rows(y: Vec<Vec<u8>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(to_bipolar(&label_matrix(y).map_err(to_py)?).to_rows())
}

#[pyfunction]
fn pinv_normal(h: Vec<Vec<f64>>, ridge: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(numerics::pinv_normal(&matrix(h).map_err(to_py)?, ridge)
        .map_err(to_py)?
        .to_rows())
}

/// List of `(train_indices, test_indices)` pairs.
#[pyfunction]
fn kfold(n: usize, k: usize, seed: u64) -> PyResult<Vec<(Vec<usize>, Vec<usize>)>> {
    Ok(data::kfold(n, k, seed)
        .map_err(to_py)?
        .into_iter()
        .map(|f| (f.train, f.test))
        .collect())
}

/// `(features, labels)` from a dense CSV file.
#[pyfunction]
#[pyo3(signature = (path, label_count, has_header = false))]
fn load_csv(path: &str, label_count: usize, has_header: bool) -> PyResult<Table> {
    let ds = data::load_csv(path, label_count, has_header).map_err(to_py)?;
    Ok((ds.features.to_rows(), ds.labels.to_rows()))
}

/// `(features, labels)` from a sparse `labels idx:val ...` file.
#[pyfunction]
fn load_sparse(path: &str, feature_count: usize, label_count: usize) -> PyResult<Table> {
    let ds = data::load_sparse(path, feature_count, label_count).map_err(to_py)?;
    Ok((ds.features.to_rows(), ds.labels.to_rows()))
}

#[pymodule]
fn osml_elm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(hamming_loss, m)?)?;
    m.add_function(wrap_pyfunction!(example_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(example_prf, m)?)?;
    m.add_function(wrap_pyfunction!(label_cardinality, m)?)?;
    m.add_function(wrap_pyfunction!(label_density, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(to_bipolar_rows, m)?)?;
    m.add_function(wrap_pyfunction!(pinv_normal, m)?)?;
    m.add_function(wrap_pyfunction!(kfold, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(load_sparse, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_conversions_validate() {
        assert_eq!(matrix(vec![vec![1.0, 2.0]]).unwrap().shape(), (1, 2));
        assert!(matrix(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(label_matrix(vec![vec![0, 2]]).is_err());
        assert_eq!(
            label_matrix(vec![vec![0, 1], vec![1, 1]]).unwrap().shape(),
            (2, 2)
        );
    }
}
