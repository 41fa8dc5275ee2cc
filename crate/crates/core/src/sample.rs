//! Paired observations and their CSV representation.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{KappaError, Result};

/// `n >= 2` finite `(x, y)` pairs. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample")]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TryFrom<RawSample> for PairedSample {
    type Error = KappaError;

    fn try_from(raw: RawSample) -> Result<Self> {
        PairedSample::new(raw.xs, raw.ys)
    }
}

impl PairedSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(KappaError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(KappaError::TooFewRows { n: xs.len() });
        }
        if let Some(index) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(KappaError::NonFinite { index });
        }
        Ok(Self { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// Always false; a sample holds at least two pairs.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// The sample with both coordinates equal to `xs`.
    pub fn x_with_itself(&self) -> Self {
        Self {
            xs: self.xs.clone(),
            ys: self.xs.clone(),
        }
    }

    /// The sample with both coordinates equal to `ys`.
    pub fn y_with_itself(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.ys.clone(),
        }
    }

    /// Coordinates exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    /// `ys` reordered by `perm` with `xs` held fixed: pair `i` becomes `(x_i, y_{perm[i]})`.
    pub fn with_permuted_ys(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len(), "permutation length mismatch");
        Self {
            xs: self.xs.clone(),
            ys: perm.iter().map(|&j| self.ys[j]).collect(),
        }
    }

    /// Apply `f` to every x and `g` to every y. Fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.xs.iter().map(|&x| f(x)).collect(),
            self.ys.iter().map(|&y| g(y)).collect(),
        )
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Serialize as two-column CSV with an `x,y` header and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y")?;
        for (x, y) in self.pairs() {
            writeln!(out, "{x:.16e},{y:.16e}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parse CSV text. A single leading header row is skipped when any of its
    /// fields fails to parse as a number.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut data_row = 0usize;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| KappaError::Parse {
                row: data_row + 1,
                message: e.to_string(),
            })?;
            if record.len() == 1 && record.get(0).is_some_and(str::is_empty) {
                continue;
            }
            let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
            if line == 0 && parsed.iter().any(Option::is_none) {
                continue;
            }
            data_row += 1;
            if record.len() != 2 {
                return Err(KappaError::Parse {
                    row: data_row,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            match (parsed[0], parsed[1]) {
                (Some(x), Some(y)) => {
                    if !x.is_finite() || !y.is_finite() {
                        return Err(KappaError::Parse {
                            row: data_row,
                            message: "non-finite value".into(),
                        });
                    }
                    xs.push(x);
                    ys.push(y);
                }
                _ => {
                    return Err(KappaError::Parse {
                        row: data_row,
                        message: format!("non-numeric field in {:?}", record.iter().collect::<Vec<_>>()),
                    })
                }
            }
        }
        Self::new(xs, ys)
    }
}

/// Load a two-column CSV file.
pub fn load_sample(path: impl AsRef<Path>) -> Result<PairedSample> {
    let path = path.as_ref();
    let io_err = |source| KappaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(io_err)?;
    PairedSample::from_csv_str(&text)
}

/// Write a sample as CSV; [`load_sample`] reads it back exactly.
pub fn write_sample(sample: &PairedSample, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| KappaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    sample.write_csv(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}
