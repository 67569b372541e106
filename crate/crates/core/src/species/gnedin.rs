//! Gnedin's prior on the number of components and the conditional law of `m`
//! given the block sizes of the current partition.

use rand::Rng;

use super::{BlockCounts, GammaRule, MixingPrior};
use crate::error::{domain, Error, Result};
use crate::special::{ln_gamma, ln_gamma_ratio, ln_poch, log_sum_exp, NeumaierSum};

/// Truncation target for the explicit part of the `m` posterior.
pub const M_POSTERIOR_TAIL_TOL: f64 = 1e-12;
/// Hard cap on explicitly enumerated `m` values.
pub const M_POSTERIOR_MAX_TERMS: usize = 1_000_000;
/// Cap used when each term needs a full EPPF evaluation (general γ rules).
const GENERAL_MAX_TERMS: usize = 100_000;
const GENERAL_MIN_TERMS: usize = 1_000;

fn check_gamma_hat(gamma_hat: f64) -> Result<()> {
    if gamma_hat > 0.0 && gamma_hat < 1.0 {
        Ok(())
    } else {
        domain(format!("gamma_hat must lie in (0, 1), got {gamma_hat}"))
    }
}

fn ln_prior_pmf(m: u64, gamma_hat: f64) -> f64 {
    gamma_hat.ln() + ln_poch(1.0 - gamma_hat, (m - 1) as usize) - ln_gamma(m as f64 + 1.0)
}

/// `p(m) = γ̂ (1 − γ̂)_{m−1} / m!`.
pub fn gnedin_prior_pmf(m: u64, gamma_hat: f64) -> Result<f64> {
    check_gamma_hat(gamma_hat)?;
    if m == 0 {
        return domain("m must be at least 1");
    }
    Ok(ln_prior_pmf(m, gamma_hat).exp())
}

/// `ln P(m > r) = ln Γ(r + 1 − γ̂) − ln Γ(r + 1) − ln Γ(1 − γ̂)`.
fn ln_survival(r: u64, gamma_hat: f64) -> f64 {
    if r == 0 {
        return 0.0;
    }
    ln_gamma_ratio(r as f64 + 1.0, -gamma_hat) - ln_gamma(1.0 - gamma_hat)
}

/// `P(m > r)` under the Gnedin prior.
pub fn gnedin_prior_survival(r: u64, gamma_hat: f64) -> Result<f64> {
    check_gamma_hat(gamma_hat)?;
    Ok(ln_survival(r, gamma_hat).exp())
}

/// Smallest `r > floor` with `ln S(r) < ln_u`, assuming `ln S(floor) >= ln_u`.
/// Saturates at `u64::MAX` for the (astronomically unlikely) draws beyond it.
fn invert_survival(gamma_hat: f64, ln_u: f64, floor: u64) -> u64 {
    let mut lo = floor;
    let mut hi = floor.saturating_add(1);
    let mut step: u64 = 1;
    while ln_survival(hi, gamma_hat) >= ln_u {
        if hi == u64::MAX {
            return u64::MAX;
        }
        lo = hi;
        step = step.saturating_mul(2);
        hi = hi.saturating_add(step);
    }
    // invariant: S(lo) >= u > S(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ln_survival(mid, gamma_hat) >= ln_u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Exact draw from the Gnedin prior by inverting its closed-form survival function.
pub fn sample_gnedin_prior<R: Rng + ?Sized>(rng: &mut R, gamma_hat: f64) -> u64 {
    sample_gnedin_prior_above(rng, gamma_hat, 0)
}

/// Draw from the Gnedin prior conditioned on `m > floor`.
pub fn sample_gnedin_prior_above<R: Rng + ?Sized>(rng: &mut R, gamma_hat: f64, floor: u64) -> u64 {
    // u ∈ (0, 1], scaled into (0, S(floor)]
    let u: f64 = 1.0 - rng.random::<f64>();
    invert_survival(gamma_hat, u.ln() + ln_survival(floor, gamma_hat), floor)
}

/// Closed-form tail mass `Σ_{r ≥ from} q_r` of the `m` posterior when `k_n = 1`.
///
/// The posterior terms are hypergeometric with a telescoping antidifference:
/// `Σ_{r ≥ M} q_r = q_M (aM + b)` with `a = 1/(n − 1 + γ̂)` and
/// `b = (n − γ̂ a)/(n + γ̂)`.
pub fn gnedin_k1_tail_mass(n: usize, gamma_hat: f64, from: u64) -> Result<f64> {
    let post = gnedin_m_posterior(1, n, gamma_hat)?;
    let from = from.max(1);
    let a = 1.0 / (n as f64 - 1.0 + gamma_hat);
    let b = (n as f64 - gamma_hat * a) / (n as f64 + gamma_hat);
    Ok(post.pmf(from) * (a * from as f64 + b))
}

/// Conditional law of `m` given `k_n` occupied blocks out of `n`, for the Gnedin
/// prior with `Dir(1, …, 1)` weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnedinMPosterior {
    k: usize,
    n: usize,
    gamma_hat: f64,
    q_first: f64,
    ln_norm: f64,
}

/// An explicitly enumerated pmf on `first, first + 1, …` plus the mass beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPmf {
    pub first: u64,
    pub probs: Vec<f64>,
    pub tail_mass: f64,
}

impl TruncatedPmf {
    pub fn explicit_mass(&self) -> f64 {
        let mut s = NeumaierSum::default();
        self.probs.iter().for_each(|&p| s.add(p));
        s.value()
    }
}

pub fn gnedin_m_posterior(k_n: usize, n: usize, gamma_hat: f64) -> Result<GnedinMPosterior> {
    check_gamma_hat(gamma_hat)?;
    if k_n == 0 || k_n > n {
        return domain(format!("need 1 <= k_n <= n, got k_n = {k_n}, n = {n}"));
    }
    // q_{k_n} = ∏_{j=1}^{k_n} (γ̂ + n − j) / (n − 1 + j)
    let q_first = (1..=k_n)
        .map(|j| (gamma_hat + (n - j) as f64) / ((n - 1 + j) as f64))
        .product();
    // normalizer of the closed form (n−1)!(1+γ̂)_{n−1} / ((k−1)!(1−γ̂)_{k−1}(γ̂)_{n−k})
    let ln_norm = ln_gamma(n as f64) + ln_poch(1.0 + gamma_hat, n - 1)
        - ln_gamma(k_n as f64)
        - ln_poch(1.0 - gamma_hat, k_n - 1)
        - ln_poch(gamma_hat, n - k_n);
    Ok(GnedinMPosterior {
        k: k_n,
        n,
        gamma_hat,
        q_first,
        ln_norm,
    })
}

impl GnedinMPosterior {
    pub fn support_start(&self) -> u64 {
        self.k as u64
    }

    pub fn q_first(&self) -> f64 {
        self.q_first
    }

    /// `q_r` from the explicit closed form; zero below `k_n`.
    pub fn pmf(&self, r: u64) -> f64 {
        if r < self.k as u64 {
            return 0.0;
        }
        let rf = r as f64;
        let head: f64 = (1..self.k).map(|j| (rf - j as f64).ln()).sum();
        (self.gamma_hat.ln() + ln_poch(1.0 - self.gamma_hat, (r - 1) as usize) + head
            - ln_gamma(rf + self.n as f64)
            + self.ln_norm)
            .exp()
    }

    fn ratio(&self, r: u64) -> f64 {
        let r = r as f64;
        r * (r - self.gamma_hat) / ((r - self.k as f64 + 1.0) * (r + self.n as f64))
    }

    /// `(r, q_r)` for `r = k_n, k_n + 1, …` through the one-step recursion.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let mut r = self.k as u64;
        let mut q = self.q_first;
        std::iter::from_fn(move || {
            let out = (r, q);
            q *= self.ratio(r);
            r += 1;
            Some(out)
        })
    }

    /// Enumerate until the cumulative mass reaches `1 − tol` or `max_terms` values.
    pub fn truncated(&self, tol: f64, max_terms: usize) -> TruncatedPmf {
        let mut probs = Vec::new();
        let mut cum = NeumaierSum::default();
        for (_, q) in self.iter().take(max_terms) {
            probs.push(q);
            cum.add(q);
            if cum.value() >= 1.0 - tol {
                break;
            }
        }
        TruncatedPmf {
            first: self.k as u64,
            probs,
            tail_mass: (1.0 - cum.value()).max(0.0),
        }
    }

    /// Inverse-cdf draw. Values beyond the explicit cap come from an exact
    /// rejection sampler on the prior tail.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.random::<f64>();
        let mut cum = NeumaierSum::default();
        let mut last = self.k as u64;
        for (r, q) in self.iter().take(M_POSTERIOR_MAX_TERMS) {
            cum.add(q);
            last = r;
            if u < cum.value() {
                return r;
            }
        }
        self.sample_tail(rng, last)
    }

    /// Draw from the posterior restricted to `m > floor`. The posterior is the
    /// prior tilted by `h(r) = ∏_{j<k}(r − j)/(r + 1)_{n−1} ≤ r^{k−n}`.
    fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R, floor: u64) -> u64 {
        let (k, n) = (self.k, self.n);
        let ln_bound = (k as f64 - n as f64) * (floor as f64 + 1.0).ln();
        loop {
            let r = sample_gnedin_prior_above(rng, self.gamma_hat, floor);
            let rf = r as f64;
            let ln_h = (1..k).map(|j| (rf - j as f64).ln()).sum::<f64>() - ln_gamma_ratio(rf + 1.0, (n - 1) as f64);
            if rng.random::<f64>().ln() < ln_h - ln_bound {
                return r;
            }
        }
    }
}

/// Conditional law of `m` given the current block sizes, for any Gnedin prior.
#[derive(Debug, Clone)]
pub enum MPosterior {
    /// `γ = 1`: closed form and recursion.
    Closed(GnedinMPosterior),
    /// Other γ rules: normalized table of `π(counts | m) p(m)` with an exact
    /// envelope sampler for the region beyond it.
    General(GeneralMPosterior),
}

impl MPosterior {
    pub fn new(prior: &MixingPrior, counts: &BlockCounts) -> Result<Self> {
        match *prior {
            MixingPrior::GnedinMfm { gamma_hat, gamma_rule } if gamma_rule.is_unit_constant() => {
                Ok(MPosterior::Closed(gnedin_m_posterior(counts.k(), counts.n(), gamma_hat)?))
            }
            MixingPrior::GnedinMfm { gamma_hat, gamma_rule } => {
                GeneralMPosterior::new(counts, gamma_hat, gamma_rule).map(MPosterior::General)
            }
            _ => Err(Error::UnsupportedPrior(format!("{prior} has a fixed number of components"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            MPosterior::Closed(p) => p.sample(rng),
            MPosterior::General(p) => p.sample(rng),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneralMPosterior {
    counts: BlockCounts,
    gamma_hat: f64,
    rule: GammaRule,
    first: u64,
    ln_weights: Vec<f64>,
    ln_table_mass: f64,
    ln_envelope_mass: f64,
    ln_h_bound: f64,
}

impl GeneralMPosterior {
    fn new(counts: &BlockCounts, gamma_hat: f64, rule: GammaRule) -> Result<Self> {
        Self::with_min_terms(counts, gamma_hat, rule, GENERAL_MIN_TERMS)
    }

    fn with_min_terms(counts: &BlockCounts, gamma_hat: f64, rule: GammaRule, min_terms: usize) -> Result<Self> {
        check_gamma_hat(gamma_hat)?;
        let first = counts.k() as u64;
        let mut ln_weights = Vec::new();
        let mut running = f64::NEG_INFINITY;
        let mut r = first;
        let (ln_h_bound, ln_envelope_mass) = loop {
            let ln_t = ln_tilt(counts, rule, r);
            let lw = ln_t + ln_prior_pmf(r, gamma_hat);
            ln_weights.push(lw);
            running = log_sum_exp(&[running, lw]);
            let ln_h = ln_tilt_bound(counts, rule, r);
            let ln_env = ln_survival(r, gamma_hat) + ln_h;
            // Once the bound is within a factor of two of the tilt, tail
            // rejection accepts at least half the time and the table can stop.
            let tight = ln_weights.len() >= min_terms && ln_h - ln_t < std::f64::consts::LN_2;
            if ln_env - running <= M_POSTERIOR_TAIL_TOL.ln() || tight || ln_weights.len() >= GENERAL_MAX_TERMS {
                break (ln_h, ln_env);
            }
            r += 1;
        };
        Ok(GeneralMPosterior {
            counts: counts.clone(),
            gamma_hat,
            rule,
            first,
            ln_table_mass: log_sum_exp(&ln_weights),
            ln_weights,
            ln_envelope_mass,
            ln_h_bound,
        })
    }

    /// Table probabilities normalized over the enumerated range.
    pub fn table_pmf(&self) -> (u64, Vec<f64>) {
        let probs = self
            .ln_weights
            .iter()
            .map(|lw| (lw - self.ln_table_mass).exp())
            .collect();
        (self.first, probs)
    }

    fn last(&self) -> u64 {
        self.first + self.ln_weights.len() as u64 - 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let p_table = 1.0 / (1.0 + (self.ln_envelope_mass - self.ln_table_mass).exp());
        loop {
            if rng.random::<f64>() < p_table {
                let u = rng.random::<f64>();
                let mut cum = 0.0;
                for (offset, lw) in self.ln_weights.iter().enumerate() {
                    cum += (lw - self.ln_table_mass).exp();
                    if u < cum {
                        return self.first + offset as u64;
                    }
                }
                return self.last();
            }
            let r = sample_gnedin_prior_above(rng, self.gamma_hat, self.last());
            if rng.random::<f64>().ln() < ln_tilt(&self.counts, self.rule, r) - self.ln_h_bound {
                return r;
            }
        }
    }
}

/// `ln π(counts | m = r)` under `Dir(γ(r), …, γ(r))` weights.
fn ln_tilt(counts: &BlockCounts, rule: GammaRule, r: u64) -> f64 {
    let gamma = rule.gamma(r);
    MixingPrior::FiniteDirichlet { gamma, m: r }
        .log_eppf(counts)
        .unwrap_or(f64::NEG_INFINITY)
}

/// An upper bound on `ln π(counts | m)` over all `m > r`.
fn ln_tilt_bound(counts: &BlockCounts, rule: GammaRule, r: u64) -> f64 {
    let (n, k) = (counts.n() as f64, counts.k() as f64);
    let r1 = r as f64 + 1.0;
    match rule {
        // ∏_{j<k}(m − j)γ / (mγ + 1)_{n−1} ≤ (mγ)^{k−n}, non-increasing in m
        GammaRule::Constant(gamma) => {
            let blocks: f64 = counts.as_slice().iter().map(|&c| ln_poch(1.0 + gamma, c - 1)).sum();
            (k - n) * (r1 * gamma).ln() + blocks
        }
        // mγ(m) = θ: ∏_{j<k}(1 − j/m)θ ≤ θ^{k−1}, and (1 + θ/m)_{c−1} decreases in m
        GammaRule::ThetaOverM(theta) => {
            let blocks: f64 = counts
                .as_slice()
                .iter()
                .map(|&c| ln_poch(1.0 + theta / r1, c - 1))
                .sum();
            (k - 1.0) * theta.ln() - ln_poch(theta + 1.0, counts.n() - 1) + blocks
        }
    }
}
