use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::diagnostics::{ChainTrace, TraceRecord};
use crate::error::{domain, Error, Result};
use crate::species::MixingPrior;

/// Common interface of the three samplers.
pub trait MixtureChain {
    fn name(&self) -> &'static str;

    /// One full Gibbs iteration.
    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<TraceRecord>;

    /// Current allocation as a restricted-growth string.
    fn labels(&self) -> Vec<usize>;

    fn check_invariants(&self) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Ordered,
    Marginal,
    Slice,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [SamplerKind::Ordered, SamplerKind::Marginal, SamplerKind::Slice];

    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Ordered => "ordered",
            SamplerKind::Marginal => "marginal",
            SamplerKind::Slice => "slice",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown sampler {s:?}")))
    }
}

/// Iteration schedule: `iterations` sweeps in total, the first `burn_in`
/// discarded, every `thin`-th kept afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Schedule {
    pub fn new(iterations: usize, burn_in: usize, thin: usize) -> Result<Self> {
        if iterations <= burn_in {
            return domain(format!("iterations ({iterations}) must exceed burn_in ({burn_in})"));
        }
        if thin == 0 {
            return domain("thin must be at least 1");
        }
        Ok(Schedule {
            iterations,
            burn_in,
            thin,
        })
    }

    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

/// Run a chain and collect the kept records.
pub fn run_chain<C: MixtureChain, R: Rng + ?Sized>(
    chain: &mut C,
    rng: &mut R,
    schedule: Schedule,
    prior: MixingPrior,
    seed: u64,
    check: bool,
) -> Result<ChainTrace> {
    let mut trace = ChainTrace::new(chain.name(), prior, seed);
    trace.records.reserve(schedule.kept());
    for t in 0..schedule.iterations {
        let record = chain.sweep(rng)?;
        if check {
            chain.check_invariants()?;
        }
        if t >= schedule.burn_in && (t - schedule.burn_in) % schedule.thin == 0 {
            trace.records.push(record);
        }
    }
    Ok(trace)
}
