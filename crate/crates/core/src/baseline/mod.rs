//! Reference samplers: the collapsed (marginal) sampler and the slice sampler.

mod marginal;
mod slice;

pub use marginal::MarginalSampler;
pub use slice::{SliceSampler, DEFAULT_SLICE_CAP};
