//! Command implementations behind the `osml-elm` binary: `train`, `eval`,
//! `cv` and `bench`. Argument parsing lives in `main.rs`; everything here
//! takes a resolved [`RunConfig`] and returns structured results.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Deserialize;

use crate::data::{self, Fold, LabeledDataset, Normalizer, StreamPlan};
use crate::error::{Error, Result};
use crate::labels::{calibrate_threshold, decode, to_bipolar, ThresholdCalibration};
use crate::metrics::{mean_std, MetricsReport};
use crate::model::{init_hidden, Activation, OselmModel};
use crate::numerics::Matrix;
use crate::persist::SavedModel;

/// Block size used when none is configured.
pub const DEFAULT_BLOCK_SIZE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Csv,
    Sparse,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DataFormat::Csv),
            "sparse" => Ok(DataFormat::Sparse),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or sparse)"
            ))),
        }
    }
}

/// Which rows the feature normalizer is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerFit {
    /// Initial block only (online contract).
    InitBlock,
    /// Entire training set (batch evaluation).
    TrainingSet,
    Off,
}

impl FromStr for NormalizerFit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "init" | "init-block" => Ok(NormalizerFit::InitBlock),
            "train" | "training-set" => Ok(NormalizerFit::TrainingSet),
            "off" | "none" => Ok(NormalizerFit::Off),
            other => Err(Error::Config(format!(
                "unknown normalizer fit '{other}' (expected init, train or off)"
            ))),
        }
    }
}

/// Every knob a run can take. Used both for the flat `key = value` config
/// file and for command-line overrides; unset fields fall through.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub folds: Option<usize>,
    pub fold_file: Option<PathBuf>,
    pub hidden_count: Option<usize>,
    pub activation: Option<String>,
    pub seed: Option<u64>,
    pub ridge: Option<f64>,
    pub init_block_size: Option<usize>,
    pub block_size: Option<usize>,
    pub shuffle_seed: Option<u64>,
    pub recalibrate_threshold: Option<bool>,
    pub label_count: Option<usize>,
    pub feature_count: Option<usize>,
    pub format: Option<String>,
    pub has_header: Option<bool>,
    pub normalizer_fit: Option<String>,
    pub output: Option<PathBuf>,
    pub arrival_interval: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            train,
            test,
            data,
            model,
            folds,
            fold_file,
            hidden_count,
            activation,
            seed,
            ridge,
            init_block_size,
            block_size,
            shuffle_seed,
            recalibrate_threshold,
            label_count,
            feature_count,
            format,
            has_header,
            normalizer_fit,
            output,
            arrival_interval
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    Eval,
    Cv,
    Bench,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub folds: Option<usize>,
    pub fold_file: Option<PathBuf>,
    pub hidden_count: usize,
    pub activation: Activation,
    pub seed: u64,
    pub ridge: f64,
    /// Defaults to twice the hidden count, capped at the training size.
    pub init_block_size: Option<usize>,
    pub block_size: usize,
    pub shuffle_seed: Option<u64>,
    pub recalibrate_threshold: bool,
    pub label_count: usize,
    pub feature_count: Option<usize>,
    pub format: DataFormat,
    pub has_header: bool,
    /// `None` picks the per-command default: init block for train/bench,
    /// training set for cv.
    pub normalizer_fit: Option<NormalizerFit>,
    pub output: Option<PathBuf>,
    pub arrival_interval: Option<f64>,
}

impl RunConfig {
    /// A config with the required fields set and everything else defaulted.
    pub fn new(hidden_count: usize, label_count: usize) -> Self {
        Self {
            train: None,
            test: None,
            data: None,
            model: None,
            folds: None,
            fold_file: None,
            hidden_count,
            activation: Activation::Sigmoid,
            seed: 0,
            ridge: 0.0,
            init_block_size: None,
            block_size: DEFAULT_BLOCK_SIZE,
            shuffle_seed: None,
            recalibrate_threshold: false,
            label_count,
            feature_count: None,
            format: DataFormat::Csv,
            has_header: false,
            normalizer_fit: None,
            output: None,
            arrival_interval: None,
        }
    }

    /// Resolves a merged config file into a validated run config for `command`.
    pub fn resolve(cfg: ConfigFile, command: Command) -> Result<Self> {
        let label_count = cfg
            .label_count
            .ok_or_else(|| Error::Config("label count is required (--labels M)".into()))?;
        let hidden_count = match (command, cfg.hidden_count) {
            (_, Some(h)) => h,
            (Command::Eval, None) => 0,
            (_, None) => {
                return Err(Error::Config(
                    "hidden neuron count is required (--hidden N)".into(),
                ))
            }
        };
        let out = RunConfig {
            train: cfg.train,
            test: cfg.test,
            data: cfg.data,
            model: cfg.model,
            folds: cfg.folds,
            fold_file: cfg.fold_file,
            hidden_count,
            activation: cfg
                .activation
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
            seed: cfg.seed.unwrap_or(0),
            ridge: cfg.ridge.unwrap_or(0.0),
            init_block_size: cfg.init_block_size,
            block_size: cfg.block_size.unwrap_or(DEFAULT_BLOCK_SIZE),
            shuffle_seed: cfg.shuffle_seed,
            recalibrate_threshold: cfg.recalibrate_threshold.unwrap_or(false),
            label_count,
            feature_count: cfg.feature_count,
            format: cfg
                .format
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
            has_header: cfg.has_header.unwrap_or(false),
            normalizer_fit: cfg.normalizer_fit.as_deref().map(str::parse).transpose()?,
            output: cfg.output,
            arrival_interval: cfg.arrival_interval,
        };
        out.validate(command)?;
        Ok(out)
    }

    pub fn validate(&self, command: Command) -> Result<()> {
        if command != Command::Eval && self.hidden_count == 0 {
            return Err(Error::Config("hidden count must be at least 1".into()));
        }
        if self.label_count == 0 {
            return Err(Error::Config("label count must be at least 1".into()));
        }
        if self.block_size == 0 {
            return Err(Error::Config("block size must be at least 1".into()));
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(Error::Config(format!(
                "ridge must be finite and >= 0, got {}",
                self.ridge
            )));
        }
        if self.format == DataFormat::Sparse && self.feature_count.is_none() {
            return Err(Error::Config(
                "sparse format needs the feature count (--features D)".into(),
            ));
        }
        let holdout = self.train.is_some();
        let single = self.data.is_some();
        match command {
            Command::Train | Command::Bench => {
                if holdout == single {
                    return Err(Error::Config("give exactly one training dataset".into()));
                }
            }
            Command::Cv => {
                if !single || holdout || self.test.is_some() {
                    return Err(Error::Config(
                        "cv takes a single dataset plus --folds K or a fold file".into(),
                    ));
                }
                if self.folds.is_some() == self.fold_file.is_some() {
                    return Err(Error::Config(
                        "cv needs exactly one of --folds K or --fold-file".into(),
                    ));
                }
            }
            Command::Eval => {
                if self.model.is_none() || (self.test.is_none() && self.data.is_none()) {
                    return Err(Error::Config(
                        "eval needs a model file and a dataset".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn load_dataset(&self, path: &Path) -> Result<LabeledDataset> {
        match self.format {
            DataFormat::Csv => data::load_csv(path, self.label_count, self.has_header),
            DataFormat::Sparse => {
                let d = self
                    .feature_count
                    .ok_or_else(|| Error::Config("sparse format needs the feature count".into()))?;
                data::load_sparse(path, d, self.label_count)
            }
        }
    }

    pub fn stream_plan(&self, n: usize) -> StreamPlan {
        StreamPlan {
            init_block_size: self
                .init_block_size
                .unwrap_or((2 * self.hidden_count).min(n)),
            block_size: self.block_size,
            shuffle_seed: self.shuffle_seed,
        }
    }

    fn training_path(&self) -> Result<&Path> {
        self.train
            .as_deref()
            .or(self.data.as_deref())
            .ok_or_else(|| Error::Config("no training dataset given".into()))
    }
}

/// Output of one sequential training pass.
#[derive(Debug, Clone)]
pub struct StreamRun {
    pub saved: SavedModel,
    /// Wall time of the whole pass, seconds.
    pub train_time: f64,
    /// Wall time per block (initial block first), seconds.
    pub block_times: Vec<f64>,
    pub calibration: ThresholdCalibration,
}

impl StreamRun {
    pub fn blocks(&self) -> usize {
        self.block_times.len()
    }
}

/// Trains on `ds` as a stream: batch initialization on the first block,
/// threshold calibration on its raw outputs, then one recursive update per
/// block. Timing covers the learner only, not I/O or scaling.
pub fn train_stream(ds: &LabeledDataset, cfg: &RunConfig, fit: NormalizerFit) -> Result<StreamRun> {
    let plan = cfg.stream_plan(ds.len());
    let schedule = data::stream_blocks(ds.len(), &plan)?;
    let normalizer = match fit {
        NormalizerFit::InitBlock => {
            let init = ds.features.select_rows(schedule.init_rows());
            Some(Normalizer::fit(&init, 0..init.rows())?)
        }
        NormalizerFit::TrainingSet => Some(Normalizer::fit(&ds.features, 0..ds.len())?),
        NormalizerFit::Off => None,
    };
    let features = match &normalizer {
        Some(n) => n.apply(&ds.features)?,
        None => ds.features.clone(),
    };
    let targets = to_bipolar(&ds.labels);

    let x0 = features.select_rows(schedule.init_rows());
    let y0 = targets.select_rows(schedule.init_rows());
    let truth0 = ds.labels.select_rows(schedule.init_rows());
    let blocks: Vec<_> = schedule
        .stream()
        .map(|rows| {
            (
                features.select_rows(rows),
                targets.select_rows(rows),
                ds.labels.select_rows(rows),
            )
        })
        .collect();

    let mut block_times = Vec::with_capacity(blocks.len() + 1);
    let total = Instant::now();

    let t = Instant::now();
    let layer = init_hidden(
        ds.feature_count(),
        cfg.hidden_count,
        cfg.activation,
        cfg.seed,
    )?;
    let mut model = OselmModel::init_phase(layer, &x0, &y0, cfg.ridge)?;
    let mut calibration = calibrate_threshold(&model.predict_raw(&x0)?, &truth0)?;
    model.set_threshold(calibration.threshold)?;
    block_times.push(t.elapsed().as_secs_f64());

    for (x, y, truth) in &blocks {
        let t = Instant::now();
        model.update(x, y)?;
        if cfg.recalibrate_threshold {
            calibration = calibrate_threshold(&model.predict_raw(x)?, truth)?;
            model.set_threshold(calibration.threshold)?;
        }
        block_times.push(t.elapsed().as_secs_f64());
    }
    let train_time = total.elapsed().as_secs_f64();

    Ok(StreamRun {
        saved: SavedModel { model, normalizer },
        train_time,
        block_times,
        calibration,
    })
}

/// Scales, predicts, decodes and scores `ds`; `test_time` covers the
/// prediction and decoding only.
pub fn evaluate(saved: &SavedModel, ds: &LabeledDataset) -> Result<MetricsReport> {
    let model = &saved.model;
    if ds.feature_count() != model.input_dim() {
        return Err(Error::shape(
            "eval features",
            (ds.len(), ds.feature_count()),
            (ds.len(), model.input_dim()),
        ));
    }
    if ds.label_count() != model.label_count() {
        return Err(Error::shape(
            "eval labels",
            (ds.len(), ds.label_count()),
            (ds.len(), model.label_count()),
        ));
    }
    let features: Matrix = match &saved.normalizer {
        Some(n) => n.apply(&ds.features)?,
        None => ds.features.clone(),
    };
    let t = Instant::now();
    let raw = model.predict_raw(&features)?;
    let pred = decode(&raw, model.threshold());
    let test_time = t.elapsed().as_secs_f64();
    Ok(MetricsReport::evaluate(&pred, &ds.labels)?.with_times(None, Some(test_time)))
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub samples: usize,
    pub blocks: usize,
    pub train_time: f64,
    pub threshold: f64,
    pub training_hamming: f64,
    pub model_path: Option<PathBuf>,
    /// Present when a test set was given.
    pub test: Option<MetricsReport>,
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "blocks processed: {}", self.blocks)?;
        writeln!(f, "training time: {:.3} s", self.train_time)?;
        writeln!(
            f,
            "threshold: {:.6} (training hamming loss {:.6})",
            self.threshold, self.training_hamming
        )?;
        if let Some(p) = &self.model_path {
            writeln!(f, "model written to {}", p.display())?;
        }
        if let Some(r) = &self.test {
            write!(f, "{}", r.to_table())?;
        }
        Ok(())
    }
}

pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport> {
    cfg.validate(Command::Train)?;
    let ds = cfg.load_dataset(cfg.training_path()?)?;
    let run = train_stream(
        &ds,
        cfg,
        cfg.normalizer_fit.unwrap_or(NormalizerFit::InitBlock),
    )?;
    if let Some(out) = &cfg.output {
        run.saved.save(out)?;
    }
    let test = match &cfg.test {
        Some(path) => {
            let test_ds = cfg.load_dataset(path)?;
            let mut report = evaluate(&run.saved, &test_ds)?;
            report.train_time = Some(run.train_time);
            Some(report)
        }
        None => None,
    };
    Ok(TrainReport {
        samples: ds.len(),
        blocks: run.blocks(),
        train_time: run.train_time,
        threshold: run.saved.model.threshold(),
        training_hamming: run.calibration.training_hamming,
        model_path: cfg.output.clone(),
        test,
    })
}

/// Evaluates a stored model; writes the `name<TAB>value` metrics file when
/// `cfg.output` is set.
pub fn cmd_eval(cfg: &RunConfig) -> Result<MetricsReport> {
    cfg.validate(Command::Eval)?;
    let model_path = cfg.model.as_deref().expect("validated");
    let saved = SavedModel::load(model_path)?;
    let path = cfg
        .test
        .as_deref()
        .or(cfg.data.as_deref())
        .expect("validated");
    let ds = cfg.load_dataset(path)?;
    let report = evaluate(&saved, &ds)?;
    if let Some(out) = &cfg.output {
        fs::write(out, report.to_kv())?;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
}

impl CvReport {
    /// `(metric, mean, sample std)` for every metric present in all folds.
    pub fn summary(&self) -> Vec<(&'static str, f64, f64)> {
        let Some(first) = self.folds.first() else {
            return Vec::new();
        };
        first
            .entries()
            .iter()
            .map(|&(name, _)| {
                let values: Vec<f64> = self
                    .folds
                    .iter()
                    .filter_map(|r| {
                        r.entries()
                            .into_iter()
                            .find(|(n, _)| *n == name)
                            .map(|(_, v)| v)
                    })
                    .collect();
                let (m, s) = mean_std(&values);
                (name, m, s)
            })
            .collect()
    }

    pub fn metric(&self, name: &str) -> Option<(f64, f64)> {
        self.summary()
            .into_iter()
            .find(|(n, _, _)| *n == name)
            .map(|(_, m, s)| (m, s))
    }
}

impl fmt::Display for CvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut header = format!("{:<6}", "fold");
        let names: Vec<&str> = self
            .folds
            .first()
            .map(|r| r.entries().iter().map(|e| e.0).collect())
            .unwrap_or_default();
        for n in &names {
            let _ = write!(header, " {n:>12.12}");
        }
        writeln!(f, "{header}")?;
        for (i, r) in self.folds.iter().enumerate() {
            let mut line = format!("{:<6}", i + 1);
            for (_, v) in r.entries() {
                let _ = write!(line, " {v:>12.6}");
            }
            writeln!(f, "{line}")?;
        }
        writeln!(f)?;
        for (name, m, s) in self.summary() {
            writeln!(f, "{name:<22} {m:.3} ± {s:.3}")?;
        }
        Ok(())
    }
}

/// k-fold cross-validation. Fold `i` trains a fresh model with hidden-layer
/// seed `seed + i` and its own normalizer.
pub fn cmd_cv(cfg: &RunConfig) -> Result<CvReport> {
    cfg.validate(Command::Cv)?;
    let ds = cfg.load_dataset(cfg.data.as_deref().expect("validated"))?;
    let folds = match (&cfg.fold_file, cfg.folds) {
        (Some(path), _) => data::read_fold_file(path, ds.len())?,
        (None, Some(k)) => data::kfold(ds.len(), k, cfg.seed)?,
        (None, None) => unreachable!("validated"),
    };
    cross_validate(&ds, &folds, cfg)
}

pub fn cross_validate(ds: &LabeledDataset, folds: &[Fold], cfg: &RunConfig) -> Result<CvReport> {
    let fit = cfg.normalizer_fit.unwrap_or(NormalizerFit::TrainingSet);
    let mut reports = Vec::with_capacity(folds.len());
    for (i, fold) in folds.iter().enumerate() {
        let mut fold_cfg = cfg.clone();
        fold_cfg.seed = cfg.seed.wrapping_add(i as u64);
        let train = ds.subset(&fold.train);
        let test = ds.subset(&fold.test);
        let run = train_stream(&train, &fold_cfg, fit)?;
        let report = evaluate(&run.saved, &test)?;
        reports.push(report.with_times(Some(run.train_time), report.test_time));
    }
    Ok(CvReport { folds: reports })
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub samples: usize,
    pub blocks: usize,
    pub train_time: f64,
    /// `train_time / blocks`.
    pub avg_block_time: f64,
    /// Mean of the individually timed blocks.
    pub mean_block_time: f64,
    pub max_block_time: f64,
    pub arrival_interval: Option<f64>,
}

impl BenchReport {
    /// Whether blocks are processed faster than they arrive.
    pub fn real_time(&self) -> Option<bool> {
        self.arrival_interval.map(|a| self.avg_block_time < a)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>18} {:>17} {:>22} {:>20}",
            "training time (s)", "number of blocks", "average time(s)/block", "max block time (s)"
        )?;
        writeln!(
            f,
            "{:>18.3} {:>17} {:>22.8} {:>20.8}",
            self.train_time, self.blocks, self.avg_block_time, self.max_block_time
        )?;
        if let (Some(a), Some(ok)) = (self.arrival_interval, self.real_time()) {
            writeln!(
                f,
                "real-time: {} (average block time {:.6} s vs arrival interval {:.6} s)",
                if ok { "yes" } else { "no" },
                self.avg_block_time,
                a
            )?;
        }
        Ok(())
    }
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<BenchReport> {
    cfg.validate(Command::Bench)?;
    let ds = cfg.load_dataset(cfg.training_path()?)?;
    bench_dataset(&ds, cfg)
}

pub fn bench_dataset(ds: &LabeledDataset, cfg: &RunConfig) -> Result<BenchReport> {
    let run = train_stream(
        ds,
        cfg,
        cfg.normalizer_fit.unwrap_or(NormalizerFit::InitBlock),
    )?;
    let blocks = run.blocks();
    let mean_block_time = run.block_times.iter().sum::<f64>() / blocks as f64;
    let max_block_time = run.block_times.iter().copied().fold(0.0, f64::max);
    Ok(BenchReport {
        samples: ds.len(),
        blocks,
        train_time: run.train_time,
        avg_block_time: run.train_time / blocks as f64,
        mean_block_time,
        max_block_time,
        arrival_interval: cfg.arrival_interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::LabelMatrix;

    fn toy() -> LabeledDataset {
        // Two well separated clusters with complementary label sets.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            let t = i as f64;
            x.push(vec![
                s + 0.3 * (t * 0.37).sin(),
                -s + 0.3 * (t * 1.91).cos(),
                0.5 * s + 0.3 * (t * 2.73).sin(),
            ]);
            y.push(if i % 2 == 0 {
                vec![1u8, 0, 1]
            } else {
                vec![0, 1, 0]
            });
        }
        LabeledDataset::new(
            Matrix::from_rows(&x).unwrap(),
            LabelMatrix::from_rows(&y).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn config_file_overrides() {
        let file: ConfigFile =
            toml::from_str("hidden_count = 10\nlabel_count = 3\nseed = 4\nactivation = \"sine\"")
                .unwrap();
        let flags = ConfigFile {
            seed: Some(9),
            data: Some("x.csv".into()),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags.over(file), Command::Train).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.hidden_count, 10);
        assert_eq!(cfg.activation, Activation::Sine);
        assert!(toml::from_str::<ConfigFile>("bogus = 1").is_err());
    }

    #[test]
    fn config_validation() {
        let base = ConfigFile {
            hidden_count: Some(5),
            label_count: Some(2),
            ..Default::default()
        };
        assert!(RunConfig::resolve(base.clone(), Command::Train).is_err());
        let both = ConfigFile {
            train: Some("a".into()),
            data: Some("b".into()),
            ..base.clone()
        };
        assert!(RunConfig::resolve(both, Command::Train).is_err());
        let cv = ConfigFile {
            data: Some("b".into()),
            ..base.clone()
        };
        assert!(RunConfig::resolve(cv.clone(), Command::Cv).is_err());
        let cv = ConfigFile {
            folds: Some(5),
            ..cv
        };
        assert!(RunConfig::resolve(cv, Command::Cv).is_ok());
        let no_hidden = ConfigFile {
            hidden_count: None,
            data: Some("b".into()),
            ..base
        };
        let err = RunConfig::resolve(no_hidden, Command::Train).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn train_stream_counts_blocks_and_fits_toy() {
        let ds = toy();
        let mut cfg = RunConfig::new(6, 3);
        cfg.init_block_size = Some(12);
        cfg.block_size = 5;
        let run = train_stream(&ds, &cfg, NormalizerFit::InitBlock).unwrap();
        assert_eq!(run.blocks(), 1 + 6);
        assert_eq!(run.saved.model.samples_seen(), 40);
        assert_eq!(run.saved.model.blocks_seen(), 7);
        let report = evaluate(&run.saved, &ds).unwrap();
        assert_eq!(report.hamming_loss, 0.0);
    }

    #[test]
    fn train_stream_reports_singularity() {
        let ds = toy();
        let mut cfg = RunConfig::new(20, 3);
        cfg.init_block_size = Some(10);
        let err = train_stream(&ds, &cfg, NormalizerFit::InitBlock).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn cv_on_minimal_set() {
        let ds = toy().subset(&[0, 1, 2, 3]);
        let mut cfg = RunConfig::new(1, 3);
        cfg.init_block_size = Some(1);
        cfg.ridge = 1e-6;
        let folds = data::kfold(4, 2, 0).unwrap();
        let r = cross_validate(&ds, &folds, &cfg).unwrap();
        assert_eq!(r.folds.len(), 2);
        let again = cross_validate(&ds, &folds, &cfg).unwrap();
        for (a, b) in r.folds.iter().zip(&again.folds) {
            assert_eq!(a.hamming_loss, b.hamming_loss);
            assert_eq!(a.f1, b.f1);
        }
    }

    #[test]
    fn bench_single_block() {
        let ds = toy();
        let mut cfg = RunConfig::new(5, 3);
        cfg.init_block_size = Some(40);
        let r = bench_dataset(&ds, &cfg).unwrap();
        assert_eq!(r.blocks, 1);
        assert_eq!(r.avg_block_time, r.train_time);
    }
}
