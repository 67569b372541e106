use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::Sym2;
use super::{ComponentFamily, SufficientStats};
use crate::error::{domain, Result};
use crate::special::{ln_gamma, sample_gamma};

/// Bivariate normal kernel with a normal-inverse-Wishart base measure:
/// `μ | Σ ~ N₂(φ, Σ/λ)`, `Σ ~ IW(Ψ, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalInverseWishart {
    phi: [f64; 2],
    lambda: f64,
    psi: Sym2,
    tau: f64,
    ln_det_psi: f64,
    // Wishart scale Ψ⁻¹ in factored form, for sampling
    psi_inv: Sym2,
    // predictive t: τ − 1 dof, scale Ψ(λ+1)/(λ(τ−1))
    pred_inv_scale: Sym2,
    pred_const: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateParams {
    pub mu: [f64; 2],
    pub cov: Sym2,
    prec: Sym2,
    ln_det: f64,
}

impl BivariateParams {
    pub fn new(mu: [f64; 2], cov: Sym2) -> Result<Self> {
        if !mu.iter().all(|x| x.is_finite()) {
            return domain(format!("non-finite mean {mu:?}"));
        }
        let chol = cov.cholesky()?;
        Ok(BivariateParams {
            mu,
            cov,
            prec: cov.inverse()?,
            ln_det: chol.ln_det(),
        })
    }
}

/// Count, mean and centered scatter matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateStats {
    pub n: usize,
    pub mean: [f64; 2],
    pub scatter: Sym2,
}

impl Default for BivariateStats {
    fn default() -> Self {
        BivariateStats {
            n: 0,
            mean: [0.0; 2],
            scatter: Sym2::ZERO,
        }
    }
}

impl SufficientStats<[f64; 2]> for BivariateStats {
    fn push(&mut self, y: &[f64; 2]) {
        self.n += 1;
        let n = self.n as f64;
        let d0 = [y[0] - self.mean[0], y[1] - self.mean[1]];
        self.mean[0] += d0[0] / n;
        self.mean[1] += d0[1] / n;
        let d1 = [y[0] - self.mean[0], y[1] - self.mean[1]];
        self.scatter.xx += d0[0] * d1[0];
        self.scatter.xy += 0.5 * (d0[0] * d1[1] + d0[1] * d1[0]);
        self.scatter.yy += d0[1] * d1[1];
    }

    fn count(&self) -> usize {
        self.n
    }
}

/// `ln Γ₂(x) = ½ ln π + ln Γ(x) + ln Γ(x − ½)`.
fn ln_mv_gamma2(x: f64) -> f64 {
    0.5 * PI.ln() + ln_gamma(x) + ln_gamma(x - 0.5)
}

impl NormalInverseWishart {
    pub fn new(phi: [f64; 2], lambda: f64, psi: Sym2, tau: f64) -> Result<Self> {
        if !phi.iter().all(|x| x.is_finite()) || !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("normal-inverse-Wishart needs finite phi and lambda > 0, got {phi:?}, {lambda}"));
        }
        if !(tau > 1.0) || !tau.is_finite() {
            return domain(format!("inverse-Wishart degrees of freedom must exceed 1, got {tau}"));
        }
        let chol = psi.cholesky()?;
        let nu = tau - 1.0;
        let pred_scale = psi.scale((lambda + 1.0) / (lambda * nu));
        let pred_const = ln_gamma((nu + 2.0) / 2.0) - ln_gamma(nu / 2.0) - (nu * PI).ln() - 0.5 * pred_scale.det().ln();
        Ok(NormalInverseWishart {
            phi,
            lambda,
            psi,
            tau,
            ln_det_psi: chol.ln_det(),
            psi_inv: psi.inverse()?,
            pred_inv_scale: pred_scale.inverse()?,
            pred_const,
        })
    }

    /// Centered at the data mean with `λ = 1/100`, `τ = 2`, `Ψ = I`.
    pub fn default_for(data: &[[f64; 2]]) -> Result<Self> {
        if data.is_empty() {
            return domain("empty data set");
        }
        let n = data.len() as f64;
        let mean = [
            data.iter().map(|y| y[0]).sum::<f64>() / n,
            data.iter().map(|y| y[1]).sum::<f64>() / n,
        ];
        Self::new(mean, 0.01, Sym2::IDENTITY, 2.0)
    }

    pub fn phi(&self) -> [f64; 2] {
        self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn psi(&self) -> Sym2 {
        self.psi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `Σ ~ IW(Ψ, τ)` as the inverse of a Bartlett-decomposed `W(Ψ⁻¹, τ)` draw.
    fn sample_cov<R: Rng + ?Sized>(&self, rng: &mut R) -> Sym2 {
        let l = self.psi_inv.cholesky().expect("Ψ⁻¹ is positive definite");
        let c1 = sample_gamma(rng, self.tau / 2.0, 0.5);
        let c2 = sample_gamma(rng, (self.tau - 1.0) / 2.0, 0.5);
        let z: f64 = StandardNormal.sample(rng);
        let w = l.sandwich_lower(c1.sqrt(), z, c2.sqrt());
        w.inverse().expect("Wishart draws are positive definite")
    }
}

impl ComponentFamily for NormalInverseWishart {
    type Obs = [f64; 2];
    type Params = BivariateParams;
    type Stats = BivariateStats;

    fn dim(&self) -> usize {
        2
    }

    fn posterior_from_stats(&self, s: &BivariateStats) -> Self {
        if s.n == 0 {
            return *self;
        }
        let n = s.n as f64;
        let lambda = self.lambda + n;
        let phi = [
            (self.lambda * self.phi[0] + n * s.mean[0]) / lambda,
            (self.lambda * self.phi[1] + n * s.mean[1]) / lambda,
        ];
        let dev = [s.mean[0] - self.phi[0], s.mean[1] - self.phi[1]];
        let psi = self.psi + s.scatter + Sym2::outer(dev).scale(self.lambda * n / lambda);
        NormalInverseWishart::new(phi, lambda, psi, self.tau + n).expect("conjugate update preserves the domain")
    }

    fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> BivariateParams {
        loop {
            let cov = self.sample_cov(rng);
            let Ok(chol) = cov.scale(1.0 / self.lambda).cholesky() else {
                continue;
            };
            let z = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
            let shift = chol.apply(z);
            let mu = [self.phi[0] + shift[0], self.phi[1] + shift[1]];
            // numerically singular draws are vanishingly rare; redraw them
            if let Ok(p) = BivariateParams::new(mu, cov) {
                return p;
            }
        }
    }

    fn log_kernel(&self, p: &BivariateParams, y: &[f64; 2]) -> f64 {
        let d = [y[0] - p.mu[0], y[1] - p.mu[1]];
        -(2.0 * PI).ln() - 0.5 * p.ln_det - 0.5 * p.prec.quad(d)
    }

    fn log_predictive(&self, y: &[f64; 2]) -> f64 {
        let nu = self.tau - 1.0;
        let d = [y[0] - self.phi[0], y[1] - self.phi[1]];
        self.pred_const - 0.5 * (nu + 2.0) * (self.pred_inv_scale.quad(d) / nu).ln_1p()
    }

    fn log_evidence(&self, s: &BivariateStats) -> f64 {
        if s.n == 0 {
            return 0.0;
        }
        let post = self.posterior_from_stats(s);
        let n = s.n as f64;
        -n * PI.ln() + ln_mv_gamma2(post.tau / 2.0) - ln_mv_gamma2(self.tau / 2.0) + 0.5 * self.tau * self.ln_det_psi
            - 0.5 * post.tau * post.ln_det_psi
            + (self.lambda / post.lambda).ln()
    }

    fn encode(&self, p: &BivariateParams) -> Vec<f64> {
        vec![p.mu[0], p.mu[1], p.cov.xx, p.cov.xy, p.cov.yy]
    }

    fn decode(&self, v: &[f64]) -> Result<BivariateParams> {
        match v {
            [m0, m1, xx, xy, yy] => BivariateParams::new([*m0, *m1], Sym2::new(*xx, *xy, *yy)),
            _ => domain(format!("expected 5 values for a bivariate atom, got {}", v.len())),
        }
    }

    fn location(&self, p: &BivariateParams) -> Vec<f64> {
        p.mu.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hyper() -> NormalInverseWishart {
        NormalInverseWishart::new([0.5, -0.2], 0.8, Sym2::new(1.5, 0.3, 0.9), 4.5).unwrap()
    }

    #[test]
    fn standard_kernel_at_mode() {
        let h = hyper();
        let p = BivariateParams::new([0.0, 0.0], Sym2::IDENTITY).unwrap();
        assert!((h.log_kernel(&p, &[0.0, 0.0]) + (2.0 * PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn predictive_matches_one_point_evidence() {
        let h = hyper();
        for y in [[0.0, 0.0], [0.5, -0.2], [3.0, 1.0]] {
            assert!((h.log_predictive(&y) - h.log_evidence(&h.stats_of(&[y]))).abs() < 1e-12);
        }
    }

    #[test]
    fn evidence_chain_rule() {
        let h = hyper();
        let (a, b) = ([1.0, 0.4], [-0.3, 2.0]);
        let joint = h.log_evidence(&h.stats_of(&[a, b]));
        let seq = h.log_predictive(&a) + h.posterior(&[a]).log_predictive(&b);
        assert!((joint - seq).abs() < 1e-12);
    }

    #[test]
    fn batch_updates_compose() {
        let h = hyper();
        let data = [[1.0, 0.4], [-0.3, 2.0], [0.7, 0.7], [2.2, -1.0]];
        let once = h.posterior(&data);
        let twice = h.posterior(&data[..2]).posterior(&data[2..]);
        assert!((once.psi.xx - twice.psi.xx).abs() < 1e-12 * once.psi.xx);
        assert!((once.psi.xy - twice.psi.xy).abs() < 1e-12 * once.psi.xx);
        assert!((once.phi[0] - twice.phi[0]).abs() < 1e-12);
        assert_eq!(once.tau, twice.tau);
    }

    #[test]
    fn inverse_wishart_mean() {
        let h = NormalInverseWishart::new([0.0, 0.0], 1.0, Sym2::IDENTITY, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let mut acc = Sym2::ZERO;
        for _ in 0..draws {
            acc = acc + h.sample_params(&mut rng).cov;
        }
        let mean = acc.scale(1.0 / draws as f64);
        // E[Σ] = Ψ/(τ − 3) = I/3
        assert!((mean.xx - 1.0 / 3.0).abs() < 0.01);
        assert!((mean.yy - 1.0 / 3.0).abs() < 0.01);
        assert!(mean.xy.abs() < 0.01);
    }

    #[test]
    fn codec_round_trip() {
        let h = hyper();
        let p = BivariateParams::new([1.0, -2.0], Sym2::new(2.0, 0.5, 1.0)).unwrap();
        assert_eq!(h.decode(&h.encode(&p)).unwrap(), p);
        assert!(h.decode(&[1.0, 2.0, 1.0, 3.0, 1.0]).is_err());
    }
}
