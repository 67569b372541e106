//! Prior-side machinery: mixing priors, partition probabilities, stick-breaking
//! weights and the prior on the number of components.

mod eppf;
mod gnedin;
mod sticks;

pub use eppf::{
    eppf_bruteforce_finite_dirichlet, eppf_gnedin_marginal, eppf_mfm_given_m, eppf_two_param,
    log_eppf_gnedin_marginal, log_eppf_mfm_given_m, log_eppf_two_param, GibbsEppf,
    DEFAULT_ENUMERATION_CAP,
};
pub use gnedin::{
    gnedin_k1_tail_mass, gnedin_m_posterior, gnedin_prior_pmf, gnedin_prior_survival,
    sample_gnedin_prior, sample_gnedin_prior_above, GnedinMPosterior, MPosterior,
    M_POSTERIOR_MAX_TERMS, M_POSTERIOR_TAIL_TOL,
};
pub use sticks::{prediction_rule_simulate, size_biased_pick, sticks_prior_draw, StickWeights};

use std::fmt;

use rand::Rng;

use crate::error::{domain, Error, Result};

/// Number of mixture components: a finite count or the infinite marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Support {
    Finite(u64),
    Infinite,
}

impl Support {
    pub fn admits(&self, k: usize) -> bool {
        match *self {
            Support::Finite(m) => k as u64 <= m,
            Support::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<u64> {
        match *self {
            Support::Finite(m) => Some(m),
            Support::Infinite => None,
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Finite(m) => write!(f, "{m}"),
            Support::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Support {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" => Ok(Support::Infinite),
            s => s
                .parse::<u64>()
                .map(Support::Finite)
                .map_err(|_| Error::Domain(format!("not a component count: {s:?}"))),
        }
    }
}

/// Per-`m` symmetric Dirichlet parameter for the mixture of finite mixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    Constant(f64),
    /// `γ(m) = θ / m`, the sparse finite mixture.
    ThetaOverM(f64),
}

impl GammaRule {
    pub fn gamma(&self, m: u64) -> f64 {
        match *self {
            GammaRule::Constant(g) => g,
            GammaRule::ThetaOverM(theta) => theta / m as f64,
        }
    }

    pub fn is_unit_constant(&self) -> bool {
        matches!(self, GammaRule::Constant(g) if *g == 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingPrior {
    PitmanYor { sigma: f64, theta: f64 },
    FiniteDirichlet { gamma: f64, m: u64 },
    GnedinMfm { gamma_hat: f64, gamma_rule: GammaRule },
}

impl MixingPrior {
    pub fn pitman_yor(sigma: f64, theta: f64) -> Result<Self> {
        let prior = MixingPrior::PitmanYor { sigma, theta };
        prior.validate()?;
        Ok(prior)
    }

    pub fn dirichlet_process(theta: f64) -> Result<Self> {
        Self::pitman_yor(0.0, theta)
    }

    pub fn finite_dirichlet(gamma: f64, m: u64) -> Result<Self> {
        let prior = MixingPrior::FiniteDirichlet { gamma, m };
        prior.validate()?;
        Ok(prior)
    }

    /// Gnedin prior on `m` with `Dir(1, …, 1)` weights.
    pub fn gnedin(gamma_hat: f64) -> Result<Self> {
        Self::gnedin_with_rule(gamma_hat, GammaRule::Constant(1.0))
    }

    pub fn gnedin_with_rule(gamma_hat: f64, gamma_rule: GammaRule) -> Result<Self> {
        let prior = MixingPrior::GnedinMfm { gamma_hat, gamma_rule };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MixingPrior::PitmanYor { sigma, theta } => {
                if !(0.0..1.0).contains(&sigma) || !(theta > -sigma) || !theta.is_finite() {
                    return domain(format!(
                        "Pitman-Yor needs 0 <= sigma < 1 and theta > -sigma, got ({sigma}, {theta})"
                    ));
                }
            }
            MixingPrior::FiniteDirichlet { gamma, m } => {
                if !(gamma > 0.0) || !gamma.is_finite() || m == 0 {
                    return domain(format!("finite Dirichlet needs gamma > 0 and m >= 1, got ({gamma}, {m})"));
                }
            }
            MixingPrior::GnedinMfm { gamma_hat, gamma_rule } => {
                if !(gamma_hat > 0.0 && gamma_hat < 1.0) {
                    return domain(format!("Gnedin prior needs 0 < gamma_hat < 1, got {gamma_hat}"));
                }
                let value = match gamma_rule {
                    GammaRule::Constant(g) => g,
                    GammaRule::ThetaOverM(t) => t,
                };
                if !(value > 0.0) || !value.is_finite() {
                    return domain(format!("gamma rule parameter must be positive, got {value}"));
                }
            }
        }
        Ok(())
    }

    /// The number of components when it is not random.
    pub fn fixed_support(&self) -> Option<Support> {
        match *self {
            MixingPrior::PitmanYor { .. } => Some(Support::Infinite),
            MixingPrior::FiniteDirichlet { m, .. } => Some(Support::Finite(m)),
            MixingPrior::GnedinMfm { .. } => None,
        }
    }

    pub fn has_random_m(&self) -> bool {
        self.fixed_support().is_none()
    }

    /// Symmetric Dirichlet parameter given `m` (finite priors only).
    fn dirichlet_gamma(&self, m: u64) -> f64 {
        match *self {
            MixingPrior::FiniteDirichlet { gamma, .. } => gamma,
            MixingPrior::GnedinMfm { gamma_rule, .. } => gamma_rule.gamma(m),
            MixingPrior::PitmanYor { .. } => unreachable!("Pitman-Yor has no Dirichlet parameter"),
        }
    }

    /// Beta parameters of the stick `v_j` (1-based `j`) given `m`, after observing
    /// `n_j` members in block `j` and `tail` members in later blocks. With
    /// `n_j = 0, tail = 0` this is the prior `Be(1 − σ, θ + jσ)`.
    pub fn stick_beta(&self, m: Support, j: usize, n_j: usize, tail: usize) -> Result<(f64, f64)> {
        match (*self, m) {
            (MixingPrior::PitmanYor { sigma, theta }, Support::Infinite) => Ok((
                n_j.max(1) as f64 - sigma,
                theta + j as f64 * sigma + tail as f64,
            )),
            (MixingPrior::PitmanYor { .. }, Support::Finite(_)) => {
                domain("Pitman-Yor weights have infinite support")
            }
            (_, Support::Finite(m)) => {
                if j as u64 > m || j == 0 {
                    return domain(format!("stick index {j} outside 1..={m}"));
                }
                let gamma = self.dirichlet_gamma(m);
                // (m − j)γ is computed from the integer difference so that v_m is exactly 1.
                Ok((n_j.max(1) as f64 + gamma, (m - j as u64) as f64 * gamma + tail as f64))
            }
            (_, Support::Infinite) => domain("finite mixtures need a finite m"),
        }
    }

    /// Draw `m` from its prior (random-`m` priors) or return the fixed support.
    pub fn sample_m<R: Rng + ?Sized>(&self, rng: &mut R) -> Support {
        match *self {
            MixingPrior::GnedinMfm { gamma_hat, .. } => Support::Finite(sample_gnedin_prior(rng, gamma_hat)),
            _ => self.fixed_support().expect("fixed support"),
        }
    }

    /// Log EPPF of the marginal partition law, for priors with a closed form.
    pub fn log_eppf(&self, counts: &BlockCounts) -> Result<f64> {
        Ok(self.gibbs_form()?.log_eppf(counts))
    }

    /// Gibbs-type product form `V(n, k) ∏ (1 − σ)_{n_j − 1}` of the marginal EPPF.
    pub fn gibbs_form(&self) -> Result<GibbsEppf> {
        GibbsEppf::from_prior(self)
    }
}

impl fmt::Display for MixingPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MixingPrior::PitmanYor { sigma, theta } => write!(f, "pitman-yor(sigma={sigma},theta={theta})"),
            MixingPrior::FiniteDirichlet { gamma, m } => write!(f, "finite-dirichlet(gamma={gamma},m={m})"),
            MixingPrior::GnedinMfm { gamma_hat, gamma_rule } => match gamma_rule {
                GammaRule::Constant(g) => write!(f, "gnedin(gamma_hat={gamma_hat},gamma={g})"),
                GammaRule::ThetaOverM(t) => write!(f, "gnedin(gamma_hat={gamma_hat},gamma=theta/m,theta={t})"),
            },
        }
    }
}

impl std::str::FromStr for MixingPrior {
    type Err = Error;

    /// Parses the text produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("not a prior description: {s:?}"));
        let (name, rest) = s.trim().split_once('(').ok_or_else(bad)?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        let mut fields = std::collections::HashMap::new();
        for pair in body.split(',') {
            let (k, v) = pair.split_once('=').ok_or_else(bad)?;
            fields.insert(k.trim(), v.trim());
        }
        let num = |key: &str| -> Result<f64> { fields.get(key).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad()) };
        match name.trim() {
            "pitman-yor" => Self::pitman_yor(num("sigma")?, num("theta")?),
            "finite-dirichlet" => {
                let m = fields.get("m").ok_or_else(bad)?.parse::<u64>().map_err(|_| bad())?;
                Self::finite_dirichlet(num("gamma")?, m)
            }
            "gnedin" => match fields.get("gamma") {
                Some(&"theta/m") => Self::gnedin_with_rule(num("gamma_hat")?, GammaRule::ThetaOverM(num("theta")?)),
                Some(_) => Self::gnedin_with_rule(num("gamma_hat")?, GammaRule::Constant(num("gamma")?)),
                None => Self::gnedin(num("gamma_hat")?),
            },
            _ => Err(bad()),
        }
    }
}

/// Block sizes `(n_1, …, n_k)` of a partition, every entry at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockCounts(Vec<usize>);

impl BlockCounts {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return domain("a partition has at least one block");
        }
        if counts.contains(&0) {
            return domain(format!("block sizes must be positive: {counts:?}"));
        }
        Ok(BlockCounts(counts))
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Counts in non-decreasing order; symmetric functions are evaluated on this.
    pub fn sorted(&self) -> Vec<usize> {
        let mut s = self.0.clone();
        s.sort_unstable();
        s
    }

    pub fn with_increment(&self, j: usize) -> BlockCounts {
        let mut c = self.0.clone();
        c[j] += 1;
        BlockCounts(c)
    }

    pub fn with_new_block(&self) -> BlockCounts {
        let mut c = self.0.clone();
        c.push(1);
        BlockCounts(c)
    }
}

impl TryFrom<&[usize]> for BlockCounts {
    type Error = Error;

    fn try_from(value: &[usize]) -> Result<Self> {
        BlockCounts::new(value.to_vec())
    }
}
