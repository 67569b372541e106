//! Trace CSV format.
//!
//! A few `# key=value` comment lines carry the sampler, prior and seed. The
//! body has one row per kept iteration with columns
//! `iteration,k,m,deviance,weights,atoms,counts,labels`. Variable-length
//! fields are quoted cells of `j:value` pairs separated by `;`, with `j`
//! 1-based in order of appearance. Atom vectors join their coordinates with
//! `|`. Labels are the zero-based allocation joined by `.`. Floats use the
//! shortest representation that parses back to the same value.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use oas_core::{ChainTrace, MixingPrior, Support, TraceRecord};

use crate::error::{CliError, CliResult};

const COLUMNS: [&str; 8] = ["iteration", "k", "m", "deviance", "weights", "atoms", "counts", "labels"];

/// Shortest round-trip text, in exponent form for very small or large values.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn sparse<T>(values: &[T], cell: impl Fn(&T) -> String) -> String {
    values
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{}:{}", j + 1, cell(v)))
        .collect::<Vec<_>>()
        .join(";")
}

fn join<T: ToString>(values: &[T], sep: &str) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

pub fn write_trace<W: Write>(trace: &ChainTrace, out: W) -> CliResult<()> {
    let mut out = BufWriter::new(out);
    let io = |e: std::io::Error| CliError::Trace(e.to_string());
    writeln!(out, "# sampler={}", trace.sampler).map_err(io)?;
    writeln!(out, "# prior={}", trace.prior).map_err(io)?;
    writeln!(out, "# seed={}", trace.seed).map_err(io)?;
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_writer(out);
    let csv_err = |e: csv::Error| CliError::Trace(e.to_string());
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            fmt_f64(r.deviance),
            sparse(&r.weights, |w| fmt_f64(*w)),
            sparse(&r.atoms, |a| a.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join("|")),
            sparse(&r.counts, usize::to_string),
            join(&r.labels, "."),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

pub fn save_trace(trace: &ChainTrace, path: &Path) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    write_trace(trace, file)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, row: usize) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Trace(format!("row {row}: bad {what} {s:?}")))
}

fn parse_sparse<T>(cell: &str, row: usize, value: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    if cell.is_empty() {
        return Ok(Vec::new());
    }
    cell.split(';')
        .enumerate()
        .map(|(idx, pair)| {
            let (j, v) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Trace(format!("row {row}: expected j:value, got {pair:?}")))?;
            let j: usize = parse_num(j, "component index", row)?;
            if j != idx + 1 {
                return Err(CliError::Trace(format!("row {row}: component {j} out of order")));
            }
            value(v)
        })
        .collect()
}

pub fn read_trace<R: Read>(mut input: R) -> CliResult<ChainTrace> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| CliError::Trace(e.to_string()))?;
    let mut sampler = None;
    let mut prior = None;
    let mut seed = None;
    let mut body_start = 0;
    for line in text.lines() {
        let Some(meta) = line.strip_prefix('#') else { break };
        body_start += line.len() + 1;
        let (key, value) = meta
            .trim()
            .split_once('=')
            .ok_or_else(|| CliError::Trace(format!("bad header line {line:?}")))?;
        match key {
            "sampler" => sampler = Some(value.to_string()),
            "prior" => {
                prior = Some(
                    value
                        .parse::<MixingPrior>()
                        .map_err(|e| CliError::Trace(e.to_string()))?,
                )
            }
            "seed" => seed = Some(parse_num::<u64>(value, "seed", 0)?),
            _ => return Err(CliError::Trace(format!("unknown header key {key:?}"))),
        }
    }
    let (Some(sampler), Some(prior), Some(seed)) = (sampler, prior, seed) else {
        return Err(CliError::Trace("missing sampler, prior or seed header".into()));
    };
    let mut trace = ChainTrace::new(sampler, prior, seed);
    let mut reader = csv::Reader::from_reader(text[body_start.min(text.len())..].as_bytes());
    let header = reader.headers().map_err(|e| CliError::Trace(e.to_string()))?;
    if header.iter().ne(COLUMNS) {
        return Err(CliError::Trace(format!("unexpected columns {header:?}")));
    }
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Trace(e.to_string()))?;
        let row = row + 1;
        let m: Support = rec[2]
            .parse()
            .map_err(|_| CliError::Trace(format!("row {row}: bad m {:?}", &rec[2])))?;
        let labels = if rec[7].is_empty() {
            Vec::new()
        } else {
            rec[7]
                .split('.')
                .map(|l| parse_num(l, "label", row))
                .collect::<CliResult<_>>()?
        };
        trace.records.push(TraceRecord {
            iteration: parse_num(&rec[0], "iteration", row)?,
            k: parse_num(&rec[1], "k", row)?,
            m,
            deviance: parse_num(&rec[3], "deviance", row)?,
            weights: parse_sparse(&rec[4], row, |v| parse_num(v, "weight", row))?,
            atoms: parse_sparse(&rec[5], row, |v| {
                v.split('|').map(|x| parse_num(x, "atom coordinate", row)).collect()
            })?,
            counts: parse_sparse(&rec[6], row, |v| parse_num(v, "count", row))?,
            labels,
        });
    }
    Ok(trace)
}

pub fn load_trace(path: &Path) -> CliResult<ChainTrace> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_trace(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace() -> ChainTrace {
        let mut t = ChainTrace::new("ordered", MixingPrior::gnedin(0.5).unwrap(), 42);
        t.records.push(TraceRecord {
            iteration: 1,
            k: 2,
            m: Support::Finite(3),
            deviance: 12.345678901234567,
            weights: vec![0.1 + 0.2, 1e-300],
            atoms: vec![vec![-0.5, 1.25], vec![3.0, 0.1]],
            counts: vec![2, 1],
            labels: vec![0, 1, 0],
        });
        t.records.push(TraceRecord {
            iteration: 2,
            k: 1,
            m: Support::Infinite,
            deviance: -1.0,
            weights: vec![],
            atoms: vec![vec![0.0, 1.0]],
            counts: vec![3],
            labels: vec![0, 0, 0],
        });
        t
    }

    #[test]
    fn round_trip() {
        let t = sample_trace();
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        assert_eq!(read_trace(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn sparse_cells_are_quoted() {
        let mut buf = Vec::new();
        write_trace(&sample_trace(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"1:0.30000000000000004;2:1e-300\""), "{text}");
        assert!(text.contains("\"1:-0.5|1.25;2:3|0.1\""), "{text}");
    }

    #[test]
    fn malformed_cells_are_rejected() {
        let mut buf = Vec::new();
        write_trace(&sample_trace(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("1:2;2:1", "2:2;1:1");
        assert!(read_trace(text.as_bytes()).is_err());
        assert!(read_trace("iteration,k\n".as_bytes()).is_err());
    }
}
