//! Exchangeable partition probability functions.
//!
//! Every closed form here has the Gibbs-type product structure
//! `π(n_1, …, n_k) = V(n, k) ∏_j (1 − σ)_{n_j − 1}` and is evaluated in log space.
//! Block sizes are sorted before the product is accumulated, so permuting the
//! arguments gives bit-identical results.

use super::{BlockCounts, GammaRule, MixingPrior};
use crate::error::{domain, Error, Result};
use crate::special::{ln_gamma, ln_poch, NeumaierSum};

/// Largest number of index tuples the brute-force oracle will visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VForm {
    TwoParam { sigma: f64, theta: f64 },
    Finite { gamma: f64, m: u64 },
    Gnedin { gamma_hat: f64 },
}

/// A Gibbs-type EPPF: the weight sequence `V(n, k)` together with the discount `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsEppf {
    sigma: f64,
    form: VForm,
}

impl GibbsEppf {
    pub(crate) fn from_prior(prior: &MixingPrior) -> Result<Self> {
        prior.validate()?;
        match *prior {
            MixingPrior::PitmanYor { sigma, theta } => Ok(GibbsEppf {
                sigma,
                form: VForm::TwoParam { sigma, theta },
            }),
            MixingPrior::FiniteDirichlet { gamma, m } => Ok(GibbsEppf {
                sigma: -gamma,
                form: VForm::Finite { gamma, m },
            }),
            MixingPrior::GnedinMfm { gamma_hat, gamma_rule } if gamma_rule.is_unit_constant() => Ok(GibbsEppf {
                sigma: -1.0,
                form: VForm::Gnedin { gamma_hat },
            }),
            MixingPrior::GnedinMfm { gamma_rule, .. } => Err(Error::UnsupportedPrior(format!(
                "no closed-form marginal EPPF for the Gnedin prior with gamma rule {gamma_rule:?}"
            ))),
        }
    }

    /// The discount `σ` in the block factors `(1 − σ)_{n_j − 1}`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ln V(n, k)`; `−∞` when `k` exceeds a finite number of components.
    pub fn log_v(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k >= 1 && k <= n);
        match self.form {
            VForm::TwoParam { sigma, theta } => {
                let head: f64 = (1..k).map(|j| (theta + j as f64 * sigma).ln()).sum();
                head - ln_poch(theta + 1.0, n - 1)
            }
            VForm::Finite { gamma, m } => {
                if k as u64 > m {
                    return f64::NEG_INFINITY;
                }
                let head: f64 = (1..k).map(|j| ((m - j as u64) as f64 * gamma).ln()).sum();
                head - ln_poch(m as f64 * gamma + 1.0, n - 1)
            }
            VForm::Gnedin { gamma_hat } => {
                ln_gamma(k as f64) + ln_poch(1.0 - gamma_hat, k - 1) + ln_poch(gamma_hat, n - k)
                    - ln_gamma(n as f64)
                    - ln_poch(1.0 + gamma_hat, n - 1)
            }
        }
    }

    pub fn log_eppf(&self, counts: &BlockCounts) -> f64 {
        let v = self.log_v(counts.n(), counts.k());
        if v == f64::NEG_INFINITY {
            return v;
        }
        let one_minus_sigma = 1.0 - self.sigma;
        v + counts
            .sorted()
            .into_iter()
            .map(|nj| ln_poch(one_minus_sigma, nj - 1))
            .sum::<f64>()
    }
}

fn finite_regime_m(sigma: f64, theta: f64) -> Result<u64> {
    let m = theta / -sigma;
    let rounded = m.round();
    if rounded < 1.0 || (m - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return domain(format!(
            "sigma < 0 requires theta = m * (-sigma) for a positive integer m, got ({sigma}, {theta})"
        ));
    }
    Ok(rounded as u64)
}

/// Log of the two-parameter EPPF. `σ ∈ [0, 1)` gives the Pitman-Yor regime;
/// `σ < 0` requires `θ = m|σ|` and gives symmetric Dirichlet weights.
pub fn log_eppf_two_param(counts: &BlockCounts, sigma: f64, theta: f64) -> Result<f64> {
    let prior = if sigma < 0.0 {
        MixingPrior::finite_dirichlet(-sigma, finite_regime_m(sigma, theta)?)?
    } else {
        MixingPrior::pitman_yor(sigma, theta)?
    };
    prior.log_eppf(counts)
}

pub fn eppf_two_param(counts: &BlockCounts, sigma: f64, theta: f64) -> Result<f64> {
    log_eppf_two_param(counts, sigma, theta).map(f64::exp)
}

/// Log EPPF of `m` symmetric `Dir(γ, …, γ)` weights. Zero probability when `k > m`.
pub fn log_eppf_mfm_given_m(counts: &BlockCounts, gamma: f64, m: u64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    MixingPrior::finite_dirichlet(gamma, m)?.log_eppf(counts)
}

pub fn eppf_mfm_given_m(counts: &BlockCounts, gamma: f64, m: u64) -> Result<f64> {
    log_eppf_mfm_given_m(counts, gamma, m).map(f64::exp)
}

/// Log marginal EPPF of the Gnedin mixture of finite mixtures with `γ = 1`.
pub fn log_eppf_gnedin_marginal(counts: &BlockCounts, gamma_hat: f64) -> Result<f64> {
    MixingPrior::gnedin_with_rule(gamma_hat, GammaRule::Constant(1.0))?.log_eppf(counts)
}

pub fn eppf_gnedin_marginal(counts: &BlockCounts, gamma_hat: f64) -> Result<f64> {
    log_eppf_gnedin_marginal(counts, gamma_hat).map(f64::exp)
}

/// Brute-force EPPF of symmetric Dirichlet weights: the sum over all ordered
/// `k`-tuples of distinct component indices of the Dirichlet moment
/// `E ∏_i p_{j_i}^{n_i}`, each evaluated from the full parameter vector.
pub fn eppf_bruteforce_finite_dirichlet(counts: &BlockCounts, gamma: f64, m: u64) -> Result<f64> {
    bruteforce_with_cap(counts, gamma, m, DEFAULT_ENUMERATION_CAP)
}

pub(crate) fn bruteforce_with_cap(counts: &BlockCounts, gamma: f64, m: u64, cap: u64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() || m == 0 {
        return domain(format!("need gamma > 0 and m >= 1, got ({gamma}, {m})"));
    }
    let k = counts.k() as u64;
    if k > m {
        return Ok(0.0);
    }
    // m! / (m − k)! tuples
    let mut tuples: u64 = 1;
    for i in 0..k {
        tuples = tuples.saturating_mul(m - i);
    }
    if tuples > cap {
        return Err(Error::ResourceLimit(format!(
            "{tuples} index tuples exceed the enumeration cap {cap}"
        )));
    }
    let m = m as usize;
    let alpha = vec![gamma; m];
    let mut exponents = vec![0usize; m];
    let mut total = NeumaierSum::default();
    visit_tuples(counts.as_slice(), 0, &alpha, &mut exponents, &mut total);
    Ok(total.value())
}

fn visit_tuples(counts: &[usize], depth: usize, alpha: &[f64], exponents: &mut [usize], total: &mut NeumaierSum) {
    if depth == counts.len() {
        total.add(dirichlet_moment(alpha, exponents).exp());
        return;
    }
    for j in 0..alpha.len() {
        if exponents[j] == 0 {
            exponents[j] = counts[depth];
            visit_tuples(counts, depth + 1, alpha, exponents, total);
            exponents[j] = 0;
        }
    }
}

/// `ln E ∏_j p_j^{r_j}` for `p ~ Dir(α)`.
fn dirichlet_moment(alpha: &[f64], r: &[usize]) -> f64 {
    let a0: f64 = alpha.iter().sum();
    let r0: usize = r.iter().sum();
    let mut out = ln_gamma(a0) - ln_gamma(a0 + r0 as f64);
    for (&a, &rj) in alpha.iter().zip(r) {
        if rj > 0 {
            out += ln_gamma(a + rj as f64) - ln_gamma(a);
        }
    }
    out
}
