//! Observation matrices: CSV ingestion, writing, and seeded row permutation.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// An `n × d` matrix of observations with `d ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations {
    Univariate(Vec<f64>),
    Bivariate(Vec<[f64; 2]>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Univariate(v) => v.len(),
            Observations::Bivariate(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Observations::Univariate(_) => 1,
            Observations::Bivariate(_) => 2,
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            Observations::Univariate(v) => v.iter().map(|&x| vec![x]).collect(),
            Observations::Bivariate(v) => v.iter().map(|p| p.to_vec()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(out);
        match self {
            Observations::Univariate(v) => {
                writeln!(w, "y")?;
                for x in v {
                    writeln!(w, "{x}")?;
                }
            }
            Observations::Bivariate(v) => {
                writeln!(w, "y1,y2")?;
                for [a, b] in v {
                    writeln!(w, "{a},{b}")?;
                }
            }
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let file = File::create(path).map_err(CliError::io(path))?;
        self.write_csv(file).map_err(CliError::io(path))
    }
}

/// Read a headerless or single-header CSV of one or two numeric columns.
pub fn load_data(path: &Path) -> CliResult<Observations> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(CliError::io(path))?;
    parse_data(&text, path)
}

pub fn parse_data(text: &str, path: &Path) -> CliResult<Observations> {
    let fail = |line: u64, msg: String| CliError::Ingest {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(idx as u64 + 1, e.to_string()))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            // a non-numeric first row is a header
            Err(_) if rows.is_empty() && dim.is_none() => {
                dim = Some(record.len());
                continue;
            }
            Err(_) => {
                let bad = record.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or_default();
                return Err(fail(line, format!("non-numeric cell {bad:?}")));
            }
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(fail(line, format!("non-finite value {bad}")));
        }
        let d = *dim.get_or_insert(values.len());
        if d != values.len() {
            return Err(fail(line, format!("expected {d} columns, found {}", values.len())));
        }
        if !(1..=2).contains(&d) {
            return Err(fail(line, format!("observations must have 1 or 2 columns, found {d}")));
        }
        rows.push(values);
    }
    match (dim, rows.is_empty()) {
        (_, true) => Err(fail(1, "no observations".into())),
        (Some(1), false) => Ok(Observations::Univariate(rows.into_iter().map(|r| r[0]).collect())),
        (Some(2), false) => Ok(Observations::Bivariate(rows.into_iter().map(|r| [r[0], r[1]]).collect())),
        (d, false) => Err(fail(1, format!("unsupported column count {d:?}"))),
    }
}

/// Seeded row permutation. Seed 0 is the identity.
pub fn permute_data(data: &Observations, seed: u64) -> Observations {
    let mut order: Vec<usize> = (0..data.len()).collect();
    if seed != 0 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    match data {
        Observations::Univariate(v) => Observations::Univariate(order.iter().map(|&i| v[i]).collect()),
        Observations::Bivariate(v) => Observations::Bivariate(order.iter().map(|&i| v[i]).collect()),
    }
}
