use rand::Rng;

use super::{MixingPrior, Support};
use crate::error::{domain, Result};
use crate::special::sample_beta;

/// Realized prefix of the stick-breaking construction in order of appearance.
///
/// `rem[j]` holds `∏_{l≤j}(1 − v_l)`, i.e. the mass not yet assigned to the first
/// `j` weights; `rem[0] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickWeights {
    m: Support,
    v: Vec<f64>,
    p_tilde: Vec<f64>,
    rem: Vec<f64>,
    ln_p: Vec<f64>,
    ln_rem: Vec<f64>,
}

impl StickWeights {
    pub fn new(m: Support) -> Self {
        StickWeights {
            m,
            v: Vec::new(),
            p_tilde: Vec::new(),
            rem: vec![1.0],
            ln_p: Vec::new(),
            ln_rem: vec![0.0],
        }
    }

    pub fn from_sticks(m: Support, v: &[f64]) -> Result<Self> {
        let mut s = StickWeights::new(m);
        for &x in v {
            s.push(x)?;
        }
        Ok(s)
    }

    pub fn support(&self) -> Support {
        self.m
    }

    /// Changing `m` keeps the realized sticks; callers redraw them afterwards.
    pub fn set_support(&mut self, m: Support) {
        self.m = m;
        if let Some(m) = m.finite() {
            self.truncate(m as usize);
        }
    }

    pub fn push(&mut self, v: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&v) {
            return domain(format!("stick variable {v} outside [0, 1]"));
        }
        if !self.m.admits(self.v.len() + 1) {
            return domain(format!("cannot realize more than {} sticks", self.m));
        }
        let r = *self.rem.last().expect("rem is never empty");
        let lr = *self.ln_rem.last().expect("ln_rem is never empty");
        self.v.push(v);
        self.p_tilde.push(v * r);
        self.rem.push(r * (1.0 - v));
        self.ln_p.push(v.ln() + lr);
        self.ln_rem.push(lr + (-v).ln_1p());
        Ok(())
    }

    /// Replace stick `j` (0-based) and recompute every weight after it.
    pub fn set(&mut self, j: usize, v: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&v) {
            return domain(format!("stick variable {v} outside [0, 1]"));
        }
        self.v[j] = v;
        for l in j..self.v.len() {
            self.p_tilde[l] = self.v[l] * self.rem[l];
            self.rem[l + 1] = self.rem[l] * (1.0 - self.v[l]);
            self.ln_p[l] = self.v[l].ln() + self.ln_rem[l];
            self.ln_rem[l + 1] = self.ln_rem[l] + (-self.v[l]).ln_1p();
        }
        Ok(())
    }

    pub fn truncate(&mut self, len: usize) {
        self.v.truncate(len);
        self.p_tilde.truncate(len);
        self.rem.truncate(len + 1);
        self.ln_p.truncate(len);
        self.ln_rem.truncate(len + 1);
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn p_tilde(&self) -> &[f64] {
        &self.p_tilde
    }

    /// `∏_{l≤j}(1 − v_l) = 1 − Σ_{l≤j} p̃_l` for `j ≤ len`.
    pub fn remainder(&self, j: usize) -> f64 {
        self.rem[j]
    }

    /// `ln p̃_{j+1}` for 0-based `j`, accurate when the weight underflows.
    pub fn ln_p_tilde(&self, j: usize) -> f64 {
        self.ln_p[j]
    }

    pub fn ln_remainder(&self, j: usize) -> f64 {
        self.ln_rem[j]
    }

    /// Whether another stick may still be realized.
    pub fn can_extend(&self) -> bool {
        self.m.admits(self.v.len() + 1)
    }

    /// Draw sticks from the prior until `len` are realized.
    pub fn extend_prior<R: Rng + ?Sized>(&mut self, prior: &MixingPrior, len: usize, rng: &mut R) -> Result<()> {
        while self.v.len() < len {
            let v = sticks_prior_draw(prior, self.m, self.v.len() + 1, rng)?;
            self.push(v)?;
        }
        Ok(())
    }
}

/// Prior draw of the `j`-th (1-based) stick given the support size `m`.
pub fn sticks_prior_draw<R: Rng + ?Sized>(prior: &MixingPrior, m: Support, j: usize, rng: &mut R) -> Result<f64> {
    let (a, b) = prior.stick_beta(m, j, 0, 0)?;
    Ok(sample_beta(rng, a, b))
}

/// Successive weighted sampling without replacement; returns a 1-based permutation.
pub fn size_biased_pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return domain("size-biased pick needs at least one weight");
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return domain("weights must be positive and finite");
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return domain(format!("weights sum to {total}, not 1"));
    }
    let mut left: Vec<usize> = (0..weights.len()).collect();
    let mut out = Vec::with_capacity(weights.len());
    while !left.is_empty() {
        let mass: f64 = left.iter().map(|&i| weights[i]).sum();
        let u = rng.random::<f64>() * mass;
        let mut cum = 0.0;
        let mut pick = left.len() - 1;
        for (pos, &i) in left.iter().enumerate() {
            cum += weights[i];
            if u < cum {
                pick = pos;
                break;
            }
        }
        out.push(left.remove(pick) + 1);
    }
    Ok(out)
}

/// Simulate `(d_1, …, d_n)` (1-based) from the prior prediction rule, realizing
/// sticks only as new components appear.
pub fn prediction_rule_simulate<R: Rng + ?Sized>(prior: &MixingPrior, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    prior.validate()?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let m = prior.sample_m(rng);
    let mut sticks = StickWeights::new(m);
    sticks.extend_prior(prior, 1, rng)?;
    let mut d = Vec::with_capacity(n);
    d.push(1);
    let mut k = 1;
    for _ in 1..n {
        let fresh = if sticks.can_extend() { sticks.remainder(k) } else { 0.0 };
        let u = rng.random::<f64>() * (1.0 - sticks.remainder(k) + fresh);
        let mut cum = 0.0;
        let mut pick = k + 1;
        for (j, &p) in sticks.p_tilde().iter().enumerate() {
            cum += p;
            if u < cum {
                pick = j + 1;
                break;
            }
        }
        if pick > k && fresh == 0.0 {
            // rounding at the end of the cdf with no room for a new block
            pick = sticks.p_tilde().iter().rposition(|&p| p > 0.0).unwrap_or(0) + 1;
        }
        if pick > k {
            k += 1;
            sticks.extend_prior(prior, k, rng)?;
        }
        d.push(pick);
    }
    Ok(d)
}
