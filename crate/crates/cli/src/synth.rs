//! Seeded synthetic data sets.
//!
//! Both generators draw a fixed number of points from each Gaussian component
//! and then shuffle the rows. The constants below are versioned: changing any
//! of them changes every downstream regression value.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Observations;
use crate::error::CliError;

/// `(count, mean, sd)` of the four univariate components. The last one is the
/// small component on the right.
pub const UNIV4_COMPONENTS: [(usize, f64, f64); 4] = [(44, -3.0, 0.7), (43, 0.0, 0.5), (43, 3.0, 0.8), (14, 7.0, 0.4)];

/// `(count, mean, covariance [xx, xy, yy])` of the six bivariate components:
/// four toes on an arc above a two-component pad.
pub const PAW_COMPONENTS: [(usize, [f64; 2], [f64; 3]); 6] = [
    (40, [-3.0, 4.0], [0.1225, 0.0, 0.1225]),
    (40, [-1.0, 5.3], [0.1225, 0.0, 0.1225]),
    (40, [1.0, 5.3], [0.1225, 0.0, 0.1225]),
    (40, [3.0, 4.0], [0.1225, 0.0, 0.1225]),
    (150, [-1.3, 0.8], [0.5, 0.2, 0.4]),
    (155, [1.3, 0.8], [0.5, -0.2, 0.4]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthName {
    PawLike,
    Univ4Like,
}

impl SynthName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SynthName::PawLike => "paw_like",
            SynthName::Univ4Like => "univ4_like",
        }
    }
}

impl fmt::Display for SynthName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynthName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "paw_like" => Ok(SynthName::PawLike),
            "univ4_like" => Ok(SynthName::Univ4Like),
            _ => Err(CliError::Config(format!(
                "unknown synthetic data set {s:?} (expected paw_like or univ4_like)"
            ))),
        }
    }
}

pub fn generate_synthetic(name: SynthName, seed: u64) -> Observations {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match name {
        SynthName::Univ4Like => {
            let mut v = Vec::with_capacity(144);
            for (count, mean, sd) in UNIV4_COMPONENTS {
                for _ in 0..count {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v.push(mean + sd * z);
                }
            }
            v.shuffle(&mut rng);
            Observations::Univariate(v)
        }
        SynthName::PawLike => {
            let mut v = Vec::with_capacity(465);
            for (count, mean, [xx, xy, yy]) in PAW_COMPONENTS {
                let l11 = xx.sqrt();
                let l21 = xy / l11;
                let l22 = (yy - l21 * l21).sqrt();
                for _ in 0..count {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    v.push([mean[0] + l11 * z1, mean[1] + l21 * z1 + l22 * z2]);
                }
            }
            v.shuffle(&mut rng);
            Observations::Bivariate(v)
        }
    }
}
