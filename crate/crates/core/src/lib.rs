//! Gibbs samplers for species-sampling mixture models.
//!
//! The main sampler works on ordered allocation variables: components are
//! labelled in order of appearance and carry size-biased stick-breaking weights,
//! so no truncation of the mixing measure is needed. Pitman-Yor, finite
//! Dirichlet and Gnedin mixture-of-finite-mixtures priors are supported, with
//! normal-inverse-gamma (univariate) and normal-inverse-Wishart (bivariate)
//! Gaussian components. A collapsed sampler and a slice sampler are provided
//! for comparison, together with an exact partition posterior for small data
//! sets and the usual chain diagnostics.

pub mod baseline;
pub mod chain;
pub mod components;
pub mod diagnostics;
pub mod error;
pub mod oracle;
pub mod ordered;
pub mod partition;
pub mod special;
pub mod species;

pub use baseline::{MarginalSampler, SliceSampler};
pub use chain::{run_chain, MixtureChain, SamplerKind, Schedule};
pub use components::{ComponentFamily, NormalInverseGamma, NormalInverseWishart};
pub use diagnostics::{ChainTrace, TraceRecord};
pub use error::{Error, Result};
pub use ordered::{InitMode, OrderedSampler, OrderedState};
pub use partition::OrderedPartition;
pub use species::{BlockCounts, GammaRule, MixingPrior, StickWeights, Support};
