//! Exact partition posteriors by enumeration, and a Monte Carlo EPPF estimate
//! from size-biased sticks. Both serve as references for the samplers.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;

use crate::components::ComponentFamily;
use crate::error::{domain, Error, Result};
use crate::partition::{enumerate_partitions, rgs_string, OrderedPartition};
use crate::special::log_sum_exp;
use crate::species::{BlockCounts, MixingPrior, StickWeights};

/// Largest data set accepted by [`exact_partition_posterior`].
pub const MAX_ORACLE_N: usize = 8;

/// Normalized log probabilities of every set partition of `[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    partitions: Vec<Vec<usize>>,
    log_prob: Vec<f64>,
}

impl PartitionTable {
    fn from_log_weights(partitions: Vec<Vec<usize>>, log_w: Vec<f64>) -> Result<Self> {
        let z = log_sum_exp(&log_w);
        if !z.is_finite() {
            return Err(Error::Domain("every partition has zero weight".into()));
        }
        Ok(PartitionTable {
            partitions,
            log_prob: log_w.iter().map(|w| w - z).collect(),
        })
    }

    /// Restricted-growth strings in enumeration order.
    pub fn partitions(&self) -> &[Vec<usize>] {
        &self.partitions
    }

    pub fn log_probabilities(&self) -> &[f64] {
        &self.log_prob
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_prob.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn probability_of(&self, labels: &[usize]) -> Option<f64> {
        self.partitions.iter().position(|p| p == labels).map(|i| self.log_prob[i].exp())
    }

    pub fn as_map(&self) -> HashMap<Vec<usize>, f64> {
        self.partitions.iter().cloned().zip(self.probabilities()).collect()
    }

    /// Posterior pmf of the number of blocks.
    pub fn k_pmf(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<f64> = Vec::new();
        for (p, lp) in self.partitions.iter().zip(&self.log_prob) {
            let k = p.iter().max().map_or(0, |m| m + 1);
            if out.len() < k + 1 {
                out.resize(k + 1, 0.0);
            }
            out[k] += lp.exp();
        }
        out.into_iter().enumerate().filter(|(k, _)| *k > 0).collect()
    }

    /// `partition,probability` lines with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "partition,probability")?;
        for (p, lp) in self.partitions.iter().zip(&self.log_prob) {
            writeln!(out, "{},{}", rgs_string(p), lp.exp())?;
        }
        Ok(())
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return domain("no observations");
    }
    if n > MAX_ORACLE_N {
        return Err(Error::ResourceLimit(format!(
            "exact posterior limited to n <= {MAX_ORACLE_N}, got {n}"
        )));
    }
    Ok(())
}

/// `p(partition | y) ∝ π(counts) ∏_blocks ∫ ∏_{i∈B} g(y_i | x) ν(dx)`.
pub fn exact_partition_posterior<F: ComponentFamily>(
    data: &[F::Obs],
    prior: &MixingPrior,
    family: &F,
) -> Result<PartitionTable> {
    check_size(data.len())?;
    let eppf = prior.gibbs_form()?;
    let partitions = enumerate_partitions(data.len())?;
    let log_w = partitions
        .iter()
        .map(|labels| {
            let part = OrderedPartition::from_rgs(labels.clone())?;
            let evidence: f64 = part
                .blocks()
                .iter()
                .map(|b| family.log_evidence(&family.stats_of(b.iter().map(|&i| &data[i]))))
                .sum();
            Ok(eppf.log_eppf(&part.counts()) + evidence)
        })
        .collect::<Result<Vec<f64>>>()?;
    PartitionTable::from_log_weights(partitions, log_w)
}

/// The prior over partitions of `[n]` (likelihood set to one).
pub fn exact_partition_prior(n: usize, prior: &MixingPrior) -> Result<PartitionTable> {
    check_size(n)?;
    let eppf = prior.gibbs_form()?;
    let partitions = enumerate_partitions(n)?;
    let log_w = partitions
        .iter()
        .map(|labels| Ok(eppf.log_eppf(&OrderedPartition::from_rgs(labels.clone())?.counts())))
        .collect::<Result<Vec<f64>>>()?;
    PartitionTable::from_log_weights(partitions, log_w)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// `π(n_1, …, n_k) = E[∏_j p̃_j^{n_j − 1} ∏_{j<k} (1 − Σ_{l≤j} p̃_l)]` averaged
/// over independent draws of the size-biased sticks.
pub fn eppf_monte_carlo<R: Rng + ?Sized>(
    prior: &MixingPrior,
    counts: &BlockCounts,
    samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    prior.validate()?;
    if samples < 2 {
        return domain("need at least two samples");
    }
    let k = counts.k();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let m = prior.sample_m(rng);
        let value = if m.admits(k) {
            let mut sticks = StickWeights::new(m);
            sticks.extend_prior(prior, k, rng)?;
            let ln: f64 = counts
                .as_slice()
                .iter()
                .enumerate()
                .map(|(j, &nj)| {
                    let weight = if nj > 1 { (nj - 1) as f64 * sticks.ln_p_tilde(j) } else { 0.0 };
                    let rest = if j + 1 < k { sticks.ln_remainder(j + 1) } else { 0.0 };
                    weight + rest
                })
                .sum();
            ln.exp()
        } else {
            0.0
        };
        sum += value;
        sum_sq += value * value;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
    })
}
