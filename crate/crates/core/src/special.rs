//! Numerical helpers shared by the priors, kernels and samplers.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

pub use statrs::function::gamma::ln_gamma;

const STIRLING_CUTOFF: f64 = 50.0;

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
}

/// `ln Γ(x + a) − ln Γ(x)`, stable when `x` is large and `a` is moderate.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let y = x + a;
    if x.min(y) >= STIRLING_CUTOFF && a.abs() < x {
        (x - 0.5) * (a / x).ln_1p() + a * y.ln() - a + stirling_tail(y) - stirling_tail(x)
    } else {
        ln_gamma(y) - ln_gamma(x)
    }
}

/// Log rising factorial `ln (x)_r = ln Γ(x + r) − ln Γ(x)` for `x > 0`.
pub fn ln_poch(x: f64, r: usize) -> f64 {
    match r {
        0 => 0.0,
        1 => x.ln(),
        r if r <= 16 => (0..r).map(|i| (x + i as f64).ln()).sum(),
        r => ln_gamma_ratio(x, r as f64),
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Beta draw with the convention `Be(a, 0) = δ_1`.
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b >= 0.0, "beta parameters ({a}, {b})");
    if b == 0.0 {
        return 1.0;
    }
    match Beta::new(a, b) {
        Ok(beta) => beta.sample(rng),
        // Parameters too extreme for the direct algorithm; fall back on gamma ratios.
        Err(_) => {
            let x = Gamma::new(a, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0);
            let y = Gamma::new(b, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0);
            if x + y > 0.0 {
                x / (x + y)
            } else {
                (a / (a + b)).clamp(0.0, 1.0)
            }
        }
    }
}

/// Gamma draw with shape `shape` and rate `rate`.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("gamma parameters must be positive and finite")
        .sample(rng)
}

/// Inverse-cdf draw from unnormalized log weights. `None` when every weight is zero.
pub fn sample_log_categorical<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> Option<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut cumulative = Vec::with_capacity(log_weights.len());
    let mut total = 0.0;
    for &lw in log_weights {
        total += (lw - max).exp();
        cumulative.push(total);
    }
    let u = rng.random::<f64>() * total;
    let idx = cumulative.iter().position(|&c| u < c);
    // u == total can only happen through rounding; give it to the last positive weight.
    idx.or_else(|| log_weights.iter().rposition(|lw| lw.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_ratio_matches_direct_route() {
        for &(x, a) in &[(60.0, 0.5), (75.5, -0.3), (1e4, 3.0), (123.0, 17.0), (2.0, 5.0)] {
            let direct = ln_gamma(x + a) - ln_gamma(x);
            let ratio = ln_gamma_ratio(x, a);
            assert!((direct - ratio).abs() < 1e-10 * direct.abs().max(1.0), "{x} {a}");
        }
    }

    #[test]
    fn gamma_ratio_far_tail_is_power_law() {
        // Γ(x + a)/Γ(x) ~ x^a for huge x.
        let x = 1e15;
        assert!((ln_gamma_ratio(x, -0.5) + 0.5 * x.ln()).abs() < 1e-12);
    }

    #[test]
    fn poch_agrees_with_products() {
        let direct: f64 = (0..40).map(|i| (0.7 + i as f64).ln()).sum();
        assert!((ln_poch(0.7, 40) - direct).abs() < 1e-10);
        assert_eq!(ln_poch(3.0, 0), 0.0);
    }

    #[test]
    fn log_sum_exp_handles_empty_mass() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn neumaier_recovers_lost_bits() {
        let mut s = NeumaierSum::default();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-10)).abs() < 1e-18);
    }

    #[test]
    fn beta_zero_second_parameter_is_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_beta(&mut rng, 2.0, 0.0), 1.0);
    }

    #[test]
    fn beta_extreme_parameters_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let v = sample_beta(&mut rng, 2.0, 1e15);
            assert!((0.0..1e-12).contains(&v));
            let w = sample_beta(&mut rng, 0.01, 0.01);
            assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn categorical_respects_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let k = sample_log_categorical(&mut rng, &[f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY]);
            assert_eq!(k, Some(1));
        }
        assert_eq!(sample_log_categorical(&mut rng, &[f64::NEG_INFINITY]), None);
    }
}
