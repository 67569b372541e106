//! Conjugate Gaussian component families.
//!
//! A family value doubles as its own hyperparameter set: the posterior given a
//! block of observations is another value of the same type.

mod bivariate;
pub mod linalg;
mod univariate;

pub use bivariate::{BivariateParams, BivariateStats, NormalInverseWishart};
pub use univariate::{NormalInverseGamma, UnivariateParams, UnivariateStats};

use std::fmt::Debug;

use rand::Rng;

use crate::error::Result;

/// Running sufficient statistics of a block of observations.
pub trait SufficientStats<Obs>: Clone + Debug + Default {
    fn push(&mut self, y: &Obs);
    fn count(&self) -> usize;
}

pub trait ComponentFamily: Clone + Debug + Send + Sync {
    type Obs: Copy + Debug + Send + Sync;
    type Params: Clone + Debug + PartialEq + Send + Sync;
    type Stats: SufficientStats<Self::Obs>;

    /// Observation dimension.
    fn dim(&self) -> usize;

    /// Conjugate update given block statistics; empty statistics return `self`.
    fn posterior_from_stats(&self, stats: &Self::Stats) -> Self;

    fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Params;

    /// `ln g(y | x)`.
    fn log_kernel(&self, params: &Self::Params, y: &Self::Obs) -> f64;

    /// `ln ∫ g(y | x) ν(dx)`.
    fn log_predictive(&self, y: &Self::Obs) -> f64;

    /// `ln ∫ ∏_i g(y_i | x) ν(dx)` for a whole block.
    fn log_evidence(&self, stats: &Self::Stats) -> f64;

    /// Flat numeric form of the parameters, used by trace files.
    fn encode(&self, params: &Self::Params) -> Vec<f64>;
    fn decode(&self, values: &[f64]) -> Result<Self::Params>;

    /// Component mean as a flat vector.
    fn location(&self, params: &Self::Params) -> Vec<f64>;

    fn stats_of<'a, I>(&self, obs: I) -> Self::Stats
    where
        I: IntoIterator<Item = &'a Self::Obs>,
        Self::Obs: 'a,
    {
        let mut s = Self::Stats::default();
        obs.into_iter().for_each(|y| s.push(y));
        s
    }

    fn posterior<'a, I>(&self, obs: I) -> Self
    where
        I: IntoIterator<Item = &'a Self::Obs>,
        Self::Obs: 'a,
    {
        self.posterior_from_stats(&self.stats_of(obs))
    }
}
