use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ComponentFamily, SufficientStats};
use crate::error::{domain, Result};
use crate::special::{ln_gamma, sample_gamma};

/// Normal kernel with a normal-inverse-gamma base measure:
/// `μ | σ² ~ N(φ, σ²/λ)`, `σ² ~ IG(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalInverseGamma {
    phi: f64,
    lambda: f64,
    a: f64,
    b: f64,
    // predictive Student-t: 2a dof, squared scale b(λ+1)/(aλ)
    pred_scale2: f64,
    pred_const: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateParams {
    pub mu: f64,
    pub var: f64,
    ln_var: f64,
}

impl UnivariateParams {
    pub fn new(mu: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() || !mu.is_finite() {
            return domain(format!("invalid normal parameters (mu = {mu}, var = {var})"));
        }
        Ok(UnivariateParams { mu, var, ln_var: var.ln() })
    }
}

/// Count, mean and centered sum of squares, accumulated with Welford's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UnivariateStats {
    pub n: usize,
    pub mean: f64,
    pub ss: f64,
}

impl SufficientStats<f64> for UnivariateStats {
    fn push(&mut self, y: &f64) {
        self.n += 1;
        let delta = y - self.mean;
        self.mean += delta / self.n as f64;
        self.ss += delta * (y - self.mean);
    }

    fn count(&self) -> usize {
        self.n
    }
}

impl NormalInverseGamma {
    pub fn new(phi: f64, lambda: f64, a: f64, b: f64) -> Result<Self> {
        if !phi.is_finite() || !(lambda > 0.0) || !(a > 0.0) || !(b > 0.0) {
            return domain(format!(
                "normal-inverse-gamma needs finite phi and positive lambda, a, b; got ({phi}, {lambda}, {a}, {b})"
            ));
        }
        if !lambda.is_finite() || !a.is_finite() || !b.is_finite() {
            return domain("normal-inverse-gamma hyperparameters must be finite");
        }
        let nu = 2.0 * a;
        let pred_scale2 = b * (lambda + 1.0) / (a * lambda);
        let pred_const = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI * pred_scale2).ln();
        Ok(NormalInverseGamma {
            phi,
            lambda,
            a,
            b,
            pred_scale2,
            pred_const,
        })
    }

    /// Centered at the data mean with `λ = 1/100`, `a = b = 1/2`.
    pub fn default_for(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return domain("empty data set");
        }
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        Self::new(mean, 0.01, 0.5, 0.5)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

impl ComponentFamily for NormalInverseGamma {
    type Obs = f64;
    type Params = UnivariateParams;
    type Stats = UnivariateStats;

    fn dim(&self) -> usize {
        1
    }

    fn posterior_from_stats(&self, s: &UnivariateStats) -> Self {
        if s.n == 0 {
            return *self;
        }
        let n = s.n as f64;
        let lambda = self.lambda + n;
        let phi = (self.lambda * self.phi + n * s.mean) / lambda;
        let dev = s.mean - self.phi;
        let a = self.a + n / 2.0;
        let b = self.b + 0.5 * s.ss + 0.5 * self.lambda * n * dev * dev / lambda;
        NormalInverseGamma::new(phi, lambda, a, b).expect("conjugate update preserves the domain")
    }

    fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> UnivariateParams {
        let var = 1.0 / sample_gamma(rng, self.a, self.b);
        let z: f64 = StandardNormal.sample(rng);
        let mu = self.phi + (var / self.lambda).sqrt() * z;
        UnivariateParams::new(mu, var).expect("inverse-gamma draws are positive")
    }

    fn log_kernel(&self, p: &UnivariateParams, y: &f64) -> f64 {
        let d = y - p.mu;
        -0.5 * ((2.0 * PI).ln() + p.ln_var + d * d / p.var)
    }

    fn log_predictive(&self, y: &f64) -> f64 {
        let nu = 2.0 * self.a;
        let d = y - self.phi;
        self.pred_const - 0.5 * (nu + 1.0) * (d * d / (nu * self.pred_scale2)).ln_1p()
    }

    fn log_evidence(&self, s: &UnivariateStats) -> f64 {
        if s.n == 0 {
            return 0.0;
        }
        let post = self.posterior_from_stats(s);
        let n = s.n as f64;
        ln_gamma(post.a) - ln_gamma(self.a) + self.a * self.b.ln() - post.a * post.b.ln()
            + 0.5 * (self.lambda / post.lambda).ln()
            - 0.5 * n * (2.0 * PI).ln()
    }

    fn encode(&self, p: &UnivariateParams) -> Vec<f64> {
        vec![p.mu, p.var]
    }

    fn decode(&self, v: &[f64]) -> Result<UnivariateParams> {
        match v {
            [mu, var] => UnivariateParams::new(*mu, *var),
            _ => domain(format!("expected 2 values for a univariate atom, got {}", v.len())),
        }
    }

    fn location(&self, p: &UnivariateParams) -> Vec<f64> {
        vec![p.mu]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_observation_update() {
        let h = NormalInverseGamma::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let p = h.posterior(&[2.0]);
        assert_eq!((p.phi(), p.lambda(), p.a(), p.b()), (1.0, 2.0, 1.5, 2.0));
        assert_eq!(h.posterior(&[]), h);
    }

    #[test]
    fn predictive_matches_one_point_evidence() {
        let h = NormalInverseGamma::new(0.3, 0.7, 1.3, 2.1).unwrap();
        for y in [-3.0, 0.0, 0.3, 5.5] {
            let s = h.stats_of(&[y]);
            assert!((h.log_predictive(&y) - h.log_evidence(&s)).abs() < 1e-12);
        }
    }

    #[test]
    fn evidence_chain_rule() {
        // ln p(y1, y2) = ln p(y1) + ln p(y2 | y1)
        let h = NormalInverseGamma::new(0.0, 0.5, 2.0, 1.0).unwrap();
        let joint = h.log_evidence(&h.stats_of(&[1.0, -0.4]));
        let seq = h.log_predictive(&1.0) + h.posterior(&[1.0]).log_predictive(&-0.4);
        assert!((joint - seq).abs() < 1e-12);
    }

    #[test]
    fn standard_normal_kernel() {
        let h = NormalInverseGamma::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let p = UnivariateParams::new(0.0, 1.0).unwrap();
        assert!((h.log_kernel(&p, &0.0) + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_prior_draws_concentrate() {
        let h = NormalInverseGamma::new(0.0, 1e12, 1e12, 1e12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = h.sample_params(&mut rng);
        assert!(p.mu.abs() < 1e-4 && (p.var - 1.0).abs() < 1e-4);
    }

    #[test]
    fn variance_draws_have_inverse_gamma_mean() {
        let h = NormalInverseGamma::new(0.0, 1.0, 3.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws: Vec<f64> = (0..100_000).map(|_| h.sample_params(&mut rng).var).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        // IG(3, 2): mean 1, variance 1
        assert!((mean - 1.0).abs() < 3.0 * (1.0 / draws.len() as f64).sqrt());
    }

    #[test]
    fn codec_round_trip() {
        let h = NormalInverseGamma::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let p = UnivariateParams::new(-1.25, 0.3).unwrap();
        assert_eq!(h.decode(&h.encode(&p)).unwrap(), p);
        assert!(h.decode(&[1.0]).is_err());
        assert!(h.decode(&[1.0, -1.0]).is_err());
    }
}
