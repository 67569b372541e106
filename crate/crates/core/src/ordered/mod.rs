//! Gibbs sampler on ordered allocation variables.
//!
//! Components are indexed in order of appearance, so the allocation vector is
//! always a restricted-growth string and the weights are size-biased sticks.
//! Only the sticks and atoms of occupied components, plus one spare when a new
//! component is proposed, are ever realized.

mod moves;

pub use moves::admissible_moves;

use rand::Rng;

use crate::chain::MixtureChain;
use crate::components::{ComponentFamily, SufficientStats};
use crate::diagnostics::{deviance, TraceRecord};
use crate::error::{domain, Error, Result};
use crate::partition::is_restricted_growth;
use crate::special::{sample_beta, sample_log_categorical};
use crate::species::{BlockCounts, MPosterior, MixingPrior, StickWeights, Support};
use moves::{BlockIndex, Moves};

/// Starting allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Every observation in one component.
    #[default]
    SingleBlock,
    /// A draw of the allocations from the prior prediction rule.
    PredictionRule,
    /// The first `k` observations open `k` components; the rest join one of them
    /// with probability proportional to prior weight times kernel. Requires `k < n`.
    KBlocks(usize),
}

/// Full sampler state. `d` holds zero-based labels.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedState<P> {
    m: Support,
    sticks: StickWeights,
    atoms: Vec<P>,
    d: Vec<usize>,
    blocks: BlockIndex,
}

impl<P> OrderedState<P> {
    pub fn m(&self) -> Support {
        self.m
    }

    pub fn sticks(&self) -> &StickWeights {
        &self.sticks
    }

    pub fn atoms(&self) -> &[P] {
        &self.atoms
    }

    /// Zero-based ordered allocation variables.
    pub fn labels(&self) -> &[usize] {
        &self.d
    }

    pub fn k(&self) -> usize {
        self.blocks.k()
    }

    pub fn counts(&self) -> &[usize] {
        &self.blocks.counts
    }
}

#[derive(Debug, Clone)]
pub struct OrderedSampler<'a, F: ComponentFamily> {
    data: &'a [F::Obs],
    family: F,
    prior: MixingPrior,
    state: OrderedState<F::Params>,
    iteration: usize,
}

impl<'a, F: ComponentFamily> OrderedSampler<'a, F> {
    pub fn new<R: Rng + ?Sized>(
        data: &'a [F::Obs],
        family: F,
        prior: MixingPrior,
        init: InitMode,
        rng: &mut R,
    ) -> Result<Self> {
        prior.validate()?;
        let n = data.len();
        if n == 0 {
            return domain("no observations");
        }
        let m0 = prior.fixed_support().unwrap_or(Support::Infinite);
        let d = match init {
            InitMode::SingleBlock => vec![0; n],
            InitMode::PredictionRule => crate::species::prediction_rule_simulate(&prior, n, rng)?
                .into_iter()
                .map(|x| x - 1)
                .collect(),
            InitMode::KBlocks(k) => {
                if k == 0 || k >= n {
                    return domain(format!("k-block start needs 1 <= k < n, got k = {k}, n = {n}"));
                }
                if !m0.admits(k) {
                    return domain(format!("{k} components exceed m = {m0}"));
                }
                Self::greedy_start(data, &family, &prior, k, rng)?
            }
        };
        Self::from_labels(data, family, prior, d, rng)
    }

    fn greedy_start<R: Rng + ?Sized>(
        data: &[F::Obs],
        family: &F,
        prior: &MixingPrior,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        let m = match prior.fixed_support() {
            Some(m) => m,
            None => Support::Infinite,
        };
        let mut sticks = StickWeights::new(m);
        if let MixingPrior::GnedinMfm { .. } = prior {
            // any m >= k will do for a starting point
            sticks = StickWeights::new(Support::Finite(k as u64));
        }
        sticks.extend_prior(prior, k, rng)?;
        let atoms: Vec<F::Params> = (0..k).map(|j| family.posterior([&data[j]]).sample_params(rng)).collect();
        let mut d: Vec<usize> = (0..k).collect();
        let mut lw = vec![0.0; k];
        for y in &data[k..] {
            for (j, w) in lw.iter_mut().enumerate() {
                *w = sticks.ln_p_tilde(j) + family.log_kernel(&atoms[j], y);
            }
            let pick = sample_log_categorical(rng, &lw).unwrap_or(0);
            d.push(pick);
        }
        Ok(d)
    }

    /// Start from given zero-based labels: `m`, sticks and atoms are drawn from
    /// their conditionals in sweep order.
    pub fn from_labels<R: Rng + ?Sized>(
        data: &'a [F::Obs],
        family: F,
        prior: MixingPrior,
        d: Vec<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        prior.validate()?;
        if d.len() != data.len() || d.is_empty() {
            return domain(format!("{} labels for {} observations", d.len(), data.len()));
        }
        if !is_restricted_growth(&d) {
            return Err(Error::Invariant(format!("labels {d:?} break least-element order")));
        }
        let blocks = BlockIndex::from_labels(&d);
        let m = match prior.fixed_support() {
            Some(m) => m,
            None => Support::Finite(blocks.k() as u64),
        };
        if !m.admits(blocks.k()) {
            return domain(format!("{} components exceed m = {m}", blocks.k()));
        }
        let mut sampler = OrderedSampler {
            data,
            family,
            prior,
            state: OrderedState {
                m,
                sticks: StickWeights::new(m),
                atoms: Vec::new(),
                d,
                blocks,
            },
            iteration: 0,
        };
        sampler.update_m(rng)?;
        sampler.update_sticks(rng)?;
        sampler.state.atoms = (0..sampler.state.k())
            .map(|_| sampler.family.sample_params(rng))
            .collect();
        sampler.update_atoms(rng);
        sampler.check_invariants()?;
        Ok(sampler)
    }

    /// Replace the whole state, e.g. to start from a prescribed configuration.
    pub fn with_state(
        data: &'a [F::Obs],
        family: F,
        prior: MixingPrior,
        d: Vec<usize>,
        sticks: StickWeights,
        atoms: Vec<F::Params>,
    ) -> Result<Self> {
        prior.validate()?;
        let sampler = OrderedSampler {
            data,
            family,
            prior,
            state: OrderedState {
                m: sticks.support(),
                blocks: BlockIndex::from_labels(&d),
                sticks,
                atoms,
                d,
            },
            iteration: 0,
        };
        if sampler.state.d.len() != data.len() {
            return domain("label vector and data differ in length");
        }
        if sampler.state.atoms.len() != sampler.state.sticks.len() {
            return domain("one atom per realized stick is required");
        }
        sampler.check_invariants()?;
        Ok(sampler)
    }

    pub fn state(&self) -> &OrderedState<F::Params> {
        &self.state
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn prior(&self) -> &MixingPrior {
        &self.prior
    }

    /// Redraw each occupied atom from its conjugate posterior.
    pub fn update_atoms<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let k = self.state.k();
        let mut stats = vec![F::Stats::default(); k];
        for (y, &c) in self.data.iter().zip(&self.state.d) {
            stats[c].push(y);
        }
        for (j, s) in stats.iter().enumerate() {
            self.state.atoms[j] = self.family.posterior_from_stats(s).sample_params(rng);
        }
    }

    /// Redraw `m` given the block sizes; identity for deterministic `m`.
    pub fn update_m<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        if !self.prior.has_random_m() {
            return Ok(());
        }
        let counts = BlockCounts::new(self.state.blocks.counts.clone())?;
        let m = MPosterior::new(&self.prior, &counts)?.sample(rng);
        self.state.m = Support::Finite(m);
        Ok(())
    }

    /// Redraw the sticks of occupied components from their Beta conditionals.
    /// Sticks and atoms beyond `k_n` are discarded and later redrawn from the
    /// prior on demand.
    pub fn update_sticks<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let counts = &self.state.blocks.counts;
        let mut tail: usize = counts.iter().sum();
        let mut sticks = StickWeights::new(self.state.m);
        for (j, &c) in counts.iter().enumerate() {
            tail -= c;
            let (a, b) = self.prior.stick_beta(self.state.m, j + 1, c, tail)?;
            sticks.push(sample_beta(rng, a, b))?;
        }
        self.state.sticks = sticks;
        self.state.atoms.truncate(counts.len());
        Ok(())
    }

    fn realize<R: Rng + ?Sized>(&mut self, len: usize, rng: &mut R) -> Result<()> {
        self.state.sticks.extend_prior(&self.prior, len, rng)?;
        while self.state.atoms.len() < len {
            self.state.atoms.push(self.family.sample_params(rng));
        }
        Ok(())
    }

    /// One ascending scan over the allocation variables.
    pub fn update_allocations<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let mut lw = Vec::with_capacity(8);
        for i in 0..self.data.len() {
            let can_open = self.state.m.admits(self.state.k() + 1);
            let mv = self.state.blocks.moves(&self.state.d, i, can_open);
            let Moves::UpTo { top, k_star, .. } = mv else {
                continue;
            };
            if top == 0 {
                continue;
            }
            if top == k_star {
                self.realize(k_star + 1, rng)?;
            }
            let y = &self.data[i];
            let sticks = &self.state.sticks;
            lw.clear();
            for v in 0..=top {
                let ln_w = if v == k_star {
                    sticks.ln_remainder(k_star)
                } else {
                    sticks.ln_p_tilde(v)
                };
                lw.push(ln_w + self.family.log_kernel(&self.state.atoms[v], y));
            }
            let v = sample_log_categorical(rng, &lw)
                .ok_or_else(|| Error::Invariant(format!("no admissible move has positive weight at i = {i}")))?;
            self.state.blocks.apply(&mut self.state.d, i, v, mv);
        }
        Ok(())
    }

    pub fn check_invariants(&self) -> Result<()> {
        let s = &self.state;
        let fail = |msg: String| Err(Error::Invariant(msg));
        if s.d.first() != Some(&0) {
            return fail("the first observation must sit in the first component".into());
        }
        if !is_restricted_growth(&s.d) {
            return fail(format!("labels {:?} break least-element order", s.d));
        }
        if s.blocks != BlockIndex::from_labels(&s.d) {
            return fail("block index out of sync with labels".into());
        }
        let k = s.k();
        if k > s.d.len() || !s.m.admits(k) {
            return fail(format!("k_n = {k} exceeds min(n, m) with m = {}", s.m));
        }
        if s.sticks.support() != s.m {
            return fail("stick support differs from m".into());
        }
        if s.sticks.len() < k || s.atoms.len() != s.sticks.len() {
            return fail(format!(
                "{} sticks and {} atoms for {k} components",
                s.sticks.len(),
                s.atoms.len()
            ));
        }
        let total: f64 = s.sticks.p_tilde().iter().sum();
        if total > 1.0 + 1e-12 {
            return fail(format!("realized weights sum to {total}"));
        }
        Ok(())
    }

    fn record(&self) -> Result<TraceRecord> {
        let s = &self.state;
        let k = s.k();
        Ok(TraceRecord {
            iteration: self.iteration,
            k,
            m: s.m,
            deviance: deviance(&self.family, self.data, &s.blocks.counts, &s.atoms[..k])?,
            weights: s.sticks.p_tilde().to_vec(),
            atoms: s.atoms.iter().map(|a| self.family.encode(a)).collect(),
            counts: s.blocks.counts.clone(),
            labels: s.d.clone(),
        })
    }
}

impl<F: ComponentFamily> MixtureChain for OrderedSampler<'_, F> {
    fn name(&self) -> &'static str {
        "ordered"
    }

    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<TraceRecord> {
        self.update_atoms(rng);
        self.update_m(rng)?;
        self.update_sticks(rng)?;
        self.update_allocations(rng)?;
        self.iteration += 1;
        self.record()
    }

    fn labels(&self) -> Vec<usize> {
        self.state.d.clone()
    }

    fn check_invariants(&self) -> Result<()> {
        OrderedSampler::check_invariants(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::NormalInverseGamma;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn family() -> NormalInverseGamma {
        NormalInverseGamma::new(0.0, 0.5, 2.0, 1.0).unwrap()
    }

    #[test]
    fn single_block_start() {
        let data = [0.1, -0.4, 2.0, 1.7, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prior = MixingPrior::dirichlet_process(1.0).unwrap();
        let s = OrderedSampler::new(&data, family(), prior, InitMode::SingleBlock, &mut rng).unwrap();
        assert_eq!(s.state().labels(), &[0, 0, 0, 0, 0]);
        assert_eq!(s.state().k(), 1);
    }

    #[test]
    fn all_distinct_start_rejected() {
        let data = [0.1, -0.4, 2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let prior = MixingPrior::dirichlet_process(1.0).unwrap();
        assert!(OrderedSampler::new(&data, family(), prior, InitMode::KBlocks(3), &mut rng).is_err());
        let s = OrderedSampler::new(&data, family(), prior, InitMode::KBlocks(2), &mut rng).unwrap();
        assert_eq!(&s.state().labels()[..2], &[0, 1]);
    }

    #[test]
    fn single_observation_is_absorbing() {
        let data = [0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let prior = MixingPrior::gnedin(0.5).unwrap();
        let mut s = OrderedSampler::new(&data, family(), prior, InitMode::SingleBlock, &mut rng).unwrap();
        for _ in 0..200 {
            let r = s.sweep(&mut rng).unwrap();
            assert_eq!((r.k, r.labels.as_slice()), (1, &[0][..]));
        }
    }

    #[test]
    fn terminal_stick_fills_the_simplex() {
        let data = [0.1, -0.4, 2.0, 1.7];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prior = MixingPrior::finite_dirichlet(1.0, 2).unwrap();
        let mut s = OrderedSampler::from_labels(&data, family(), prior, vec![0, 0, 1, 1], &mut rng).unwrap();
        s.update_sticks(&mut rng).unwrap();
        let st = s.state().sticks();
        assert_eq!(st.v()[1], 1.0);
        assert_eq!(st.remainder(2), 0.0);
    }

    #[test]
    fn invariants_hold_over_many_sweeps() {
        let data = [0.1, -0.4, 2.0, 1.7, 0.0, 5.0, 5.2, -3.0];
        for (seed, prior) in [
            MixingPrior::pitman_yor(0.5, 0.2).unwrap(),
            MixingPrior::finite_dirichlet(0.5, 3).unwrap(),
            MixingPrior::gnedin(0.5).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let mut s = OrderedSampler::new(&data, family(), prior, InitMode::PredictionRule, &mut rng).unwrap();
            for _ in 0..2000 {
                s.sweep(&mut rng).unwrap();
                s.check_invariants().unwrap();
            }
        }
    }
}
