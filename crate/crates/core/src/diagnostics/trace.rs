use crate::species::{MixingPrior, Support};

/// One kept iteration of a chain.
///
/// Components are listed in order of appearance. `weights` and `atoms` cover
/// every realized component (`weights` is empty for collapsed samplers, which
/// carry no weights); `counts` covers the occupied ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub k: usize,
    pub m: Support,
    pub deviance: f64,
    pub weights: Vec<f64>,
    pub atoms: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
    /// Allocation of each observation as a restricted-growth string.
    pub labels: Vec<usize>,
}

impl TraceRecord {
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub sampler: String,
    pub prior: MixingPrior,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
}

impl ChainTrace {
    pub fn new(sampler: impl Into<String>, prior: MixingPrior, seed: u64) -> Self {
        ChainTrace {
            sampler: sampler.into(),
            prior,
            seed,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn k_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.k as f64).collect()
    }

    pub fn deviance_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.deviance).collect()
    }
}
