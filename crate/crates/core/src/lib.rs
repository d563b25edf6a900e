//! Online sequential multi-label extreme learning machine.
//!
//! A single-hidden-layer network with random, frozen input weights whose
//! output weights are fitted by least squares, first in batch on an initial
//! block and then by recursive least-squares updates as samples or blocks
//! arrive. Multi-label predictions come from thresholding the raw outputs
//! with one calibrated scalar.
//!
//! ```no_run
//! use osml_elm::{cli::{train_stream, evaluate, NormalizerFit, RunConfig}, data::load_csv};
//!
//! let train = load_csv("yeast-train.csv", 14, false)?;
//! let test = load_csv("yeast-test.csv", 14, false)?;
//! let run = train_stream(&train, &RunConfig::new(120, 14), NormalizerFit::TrainingSet)?;
//! println!("{}", evaluate(&run.saved, &test)?.to_table());
//! # Ok::<(), osml_elm::Error>(())
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod labels;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod persist;

pub use data::{LabeledDataset, Normalizer, StreamPlan};
pub use error::{Error, Result};
pub use labels::{LabelMatrix, ThresholdCalibration};
pub use metrics::MetricsReport;
pub use model::{Activation, HiddenLayer, OselmModel};
pub use numerics::Matrix;
pub use persist::SavedModel;
