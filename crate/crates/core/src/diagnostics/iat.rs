use crate::error::{domain, Result};

/// Shortest series accepted by [`iat`].
pub const MIN_IAT_LEN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iat {
    pub tau: f64,
    /// The series had zero variance; `tau` is reported as 1.
    pub degenerate: bool,
    /// Largest autocorrelation lag entering the estimate.
    pub lags_used: usize,
}

fn autocovariance(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Integrated autocorrelation time `τ = 1 + 2 Σ_{l≥1} ρ_l`, estimated with
/// Geyer's initial positive sequence: pair sums `ρ_{2k} + ρ_{2k+1}` are added
/// until the first non-positive pair. The result is floored at 1.
pub fn iat(series: &[f64]) -> Result<Iat> {
    let n = series.len();
    if n < MIN_IAT_LEN {
        return domain(format!("IAT needs at least {MIN_IAT_LEN} values, got {n}"));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return domain("IAT input contains non-finite values");
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = autocovariance(&centered, 0);
    if series.iter().all(|&x| x == series[0]) || c0 == 0.0 {
        return Ok(Iat {
            tau: 1.0,
            degenerate: true,
            lags_used: 0,
        });
    }
    let mut sum = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocovariance(&centered, lag) + autocovariance(&centered, lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        lag += 2;
    }
    Ok(Iat {
        tau: (2.0 * sum - 1.0).max(1.0),
        degenerate: false,
        lags_used: lag.saturating_sub(1),
    })
}
