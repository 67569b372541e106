//! Tables of mixing diagnostics for saved traces.

use std::fmt::Write;
use std::path::PathBuf;

use oas_core::diagnostics::iat;

use crate::error::CliResult;
use crate::trace_io::load_trace;

fn fmt_iat(series: &[f64]) -> String {
    match iat(series) {
        Ok(r) if r.degenerate => "const".into(),
        Ok(r) => format!("{:.3}", r.tau),
        Err(_) => "n/a".into(),
    }
}

/// One row per trace: IAT of `k` and of the deviance, with their means.
pub fn report(paths: &[PathBuf]) -> CliResult<String> {
    let mut out = String::new();
    let _ = writeln!(out, "trace\tsampler\tkept\tiat_k\tiat_deviance\tmean_k\tmean_deviance");
    for path in paths {
        let trace = load_trace(path)?;
        let ks = trace.k_series();
        let ds = trace.deviance_series();
        let n = ks.len().max(1) as f64;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.3}\t{:.3}",
            path.display(),
            trace.sampler,
            trace.len(),
            fmt_iat(&ks),
            fmt_iat(&ds),
            ks.iter().sum::<f64>() / n,
            ds.iter().sum::<f64>() / n,
        );
    }
    Ok(out)
}
