//! Text model files.
//!
//! ```text
//! osml-elm model v1
//! input_dim <D>
//! hidden_count <Ñ>
//! label_count <M>
//! activation sigmoid|sine|hardlim
//! ridge <f64>
//! threshold <f64>
//! samples_seen <n>
//! blocks_seen <n>
//! normalizer 0|1
//! norm_min <D values>        (only when normalizer is 1)
//! norm_max <D values>
//! weights                    (Ñ lines of D values)
//! biases                     (1 line of Ñ values)
//! m                          (Ñ lines of Ñ values)
//! beta                       (Ñ lines of M values)
//! end
//! ```
//!
//! Reals are written with 17 significant digits so a load reproduces every
//! value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::Normalizer;
use crate::error::{Error, Result};
use crate::model::{Activation, HiddenLayer, OselmModel};
use crate::numerics::Matrix;

const MAGIC: &str = "osml-elm model v1";

/// A trained model plus the feature scaling it expects its inputs to go
/// through.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: OselmModel,
    pub normalizer: Option<Normalizer>,
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|&v| real(v)).collect();
    let _ = writeln!(out, "{}", row.join(" "));
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix) {
    let _ = writeln!(out, "{name}");
    for i in 0..m.rows() {
        write_row(out, m.row(i));
    }
}

impl SavedModel {
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "input_dim {}", m.input_dim());
        let _ = writeln!(s, "hidden_count {}", m.hidden().hidden_count());
        let _ = writeln!(s, "label_count {}", m.label_count());
        let _ = writeln!(s, "activation {}", m.hidden().activation());
        let _ = writeln!(s, "ridge {}", real(m.ridge()));
        let _ = writeln!(s, "threshold {}", real(m.threshold()));
        let _ = writeln!(s, "samples_seen {}", m.samples_seen());
        let _ = writeln!(s, "blocks_seen {}", m.blocks_seen());
        match &self.normalizer {
            Some(n) => {
                let _ = writeln!(s, "normalizer 1");
                s.push_str("norm_min ");
                write_row(&mut s, &n.mins);
                s.push_str("norm_max ");
                write_row(&mut s, &n.maxs);
            }
            None => {
                let _ = writeln!(s, "normalizer 0");
            }
        }
        write_matrix(&mut s, "weights", m.hidden().weights());
        let _ = writeln!(s, "biases");
        write_row(&mut s, m.hidden().biases());
        write_matrix(&mut s, "m", m.m());
        write_matrix(&mut s, "beta", m.beta());
        let _ = writeln!(s, "end");
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut r = Reader {
            lines: text.lines().enumerate(),
            path: path.to_path_buf(),
            line: 0,
        };
        let magic = r.next_line()?;
        if magic != MAGIC {
            return Err(r.err(format!("expected header '{MAGIC}', got '{magic}'")));
        }
        let d: usize = r.keyed("input_dim")?;
        let n: usize = r.keyed("hidden_count")?;
        let labels: usize = r.keyed("label_count")?;
        let activation: Activation = r
            .keyed::<String>("activation")?
            .parse()
            .map_err(|e: Error| r.err(e.to_string()))?;
        let ridge: f64 = r.keyed("ridge")?;
        let threshold: f64 = r.keyed("threshold")?;
        let samples_seen: usize = r.keyed("samples_seen")?;
        let blocks_seen: usize = r.keyed("blocks_seen")?;
        let has_norm: u8 = r.keyed("normalizer")?;
        let normalizer = match has_norm {
            0 => None,
            1 => {
                let mins = r.keyed_row("norm_min", d)?;
                let maxs = r.keyed_row("norm_max", d)?;
                Some(Normalizer { mins, maxs })
            }
            other => return Err(r.err(format!("normalizer flag must be 0 or 1, got {other}"))),
        };
        let weights = r.matrix("weights", n, d)?;
        r.section("biases")?;
        let biases = r.row(n)?;
        let m = r.matrix("m", n, n)?;
        let beta = r.matrix("beta", n, labels)?;
        r.section("end")?;

        let wrap = |e: Error| Error::ModelFormat {
            path: path.to_path_buf(),
            msg: e.to_string(),
        };
        let hidden = HiddenLayer::from_parts(weights, biases, activation).map_err(wrap)?;
        let model =
            OselmModel::from_parts(hidden, m, beta, threshold, ridge, samples_seen, blocks_seen)
                .map_err(wrap)?;
        Ok(Self { model, normalizer })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_text(&text, path)
    }
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    path: PathBuf,
    line: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: String) -> Error {
        Error::ModelFormat {
            path: self.path.clone(),
            msg: format!("line {}: {msg}", self.line),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim_end())
            }
            None => Err(self.err("unexpected end of file".into())),
        }
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.next_line()?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected '{key} <value>', got '{line}'")))?;
        value
            .trim()
            .parse()
            .map_err(|_| self.err(format!("bad value for {key}: '{value}'")))
    }

    fn section(&mut self, name: &str) -> Result<()> {
        let line = self.next_line()?;
        if line != name {
            return Err(self.err(format!("expected section '{name}', got '{line}'")));
        }
        Ok(())
    }

    fn parse_values(&self, text: &str, count: usize) -> Result<Vec<f64>> {
        let values = text
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| self.err(format!("bad number '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(self.err(format!("expected {count} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(self.err("non-finite value".into()));
        }
        Ok(values)
    }

    fn row(&mut self, count: usize) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        self.parse_values(line, count)
    }

    fn keyed_row(&mut self, key: &str, count: usize) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| self.err(format!("expected '{key}' row")))?;
        self.parse_values(rest, count)
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<Matrix> {
        self.section(name)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.row(cols)?);
        }
        Matrix::new(rows, cols, data).map_err(|e| self.err(e.to_string()))
    }
}
