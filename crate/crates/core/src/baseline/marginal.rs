//! Collapsed Gibbs sampler on partitions, with weights integrated out through
//! the product form of the EPPF.

use rand::Rng;

use crate::chain::MixtureChain;
use crate::components::{ComponentFamily, SufficientStats};
use crate::diagnostics::{deviance, TraceRecord};
use crate::error::{domain, Error, Result};
use crate::partition::canonical_labels;
use crate::special::sample_log_categorical;
use crate::species::{GibbsEppf, MPosterior, MixingPrior, Support};

#[derive(Debug, Clone)]
pub struct MarginalSampler<'a, F: ComponentFamily> {
    data: &'a [F::Obs],
    family: F,
    prior: MixingPrior,
    eppf: GibbsEppf,
    /// Block of each observation; blocks are numbered in order of appearance
    /// at the end of every sweep.
    labels: Vec<usize>,
    counts: Vec<usize>,
    atoms: Vec<F::Params>,
    iteration: usize,
}

impl<'a, F: ComponentFamily> MarginalSampler<'a, F> {
    /// Start from the given labels (any labelling; renumbered internally).
    pub fn new<R: Rng + ?Sized>(
        data: &'a [F::Obs],
        family: F,
        prior: MixingPrior,
        labels: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        prior.validate()?;
        let eppf = GibbsEppf::from_prior(&prior)?;
        if data.is_empty() || labels.len() != data.len() {
            return domain(format!("{} labels for {} observations", labels.len(), data.len()));
        }
        let labels = canonical_labels(labels);
        let k = labels.iter().max().map_or(0, |m| m + 1);
        if let Some(m) = prior.fixed_support().and_then(|s| s.finite()) {
            if k as u64 > m {
                return domain(format!("{k} blocks exceed m = {m}"));
            }
        }
        let mut counts = vec![0; k];
        labels.iter().for_each(|&c| counts[c] += 1);
        let mut s = MarginalSampler {
            data,
            family,
            prior,
            eppf,
            labels,
            counts,
            atoms: Vec::new(),
            iteration: 0,
        };
        s.atoms = (0..k).map(|_| s.family.sample_params(rng)).collect();
        s.update_atoms(rng);
        Ok(s)
    }

    pub fn single_block<R: Rng + ?Sized>(data: &'a [F::Obs], family: F, prior: MixingPrior, rng: &mut R) -> Result<Self> {
        Self::new(data, family, prior, &vec![0; data.len()], rng)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn atoms(&self) -> &[F::Params] {
        &self.atoms
    }

    fn update_atoms<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut stats = vec![F::Stats::default(); self.counts.len()];
        for (y, &c) in self.data.iter().zip(&self.labels) {
            stats[c].push(y);
        }
        for (j, s) in stats.iter().enumerate() {
            self.atoms[j] = self.family.posterior_from_stats(s).sample_params(rng);
        }
    }

    fn remove_block(&mut self, b: usize) {
        let last = self.counts.len() - 1;
        self.counts.swap_remove(b);
        self.atoms.swap_remove(b);
        if b != last {
            self.labels.iter_mut().filter(|c| **c == last).for_each(|c| *c = b);
        }
    }

    /// Sequential reallocation of every observation.
    pub fn update_allocations<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let n = self.data.len();
        let sigma = self.eppf.sigma();
        let mut lw = Vec::new();
        for i in 0..n {
            let c = self.labels[i];
            self.counts[c] -= 1;
            if self.counts[c] == 0 {
                // the atom of a vacated singleton is integrated out again
                self.remove_block(c);
            }
            let k = self.counts.len();
            let y = &self.data[i];
            let ln_old = if k > 0 { self.eppf.log_v(n, k) } else { 0.0 };
            let ln_new = self.eppf.log_v(n, k + 1);
            lw.clear();
            for j in 0..k {
                lw.push(ln_old + (self.counts[j] as f64 - sigma).ln() + self.family.log_kernel(&self.atoms[j], y));
            }
            lw.push(ln_new + self.family.log_predictive(y));
            let pick = sample_log_categorical(rng, &lw)
                .ok_or_else(|| Error::Invariant(format!("all reallocation weights vanish at i = {i}")))?;
            if pick == k {
                self.counts.push(1);
                self.atoms.push(self.family.posterior([y]).sample_params(rng));
            } else {
                self.counts[pick] += 1;
            }
            self.labels[i] = pick;
        }
        Ok(())
    }

    /// Renumber blocks by order of appearance.
    fn relabel(&mut self) {
        let mut order = Vec::with_capacity(self.counts.len());
        let mut seen = vec![usize::MAX; self.counts.len()];
        for c in self.labels.iter_mut() {
            if seen[*c] == usize::MAX {
                seen[*c] = order.len();
                order.push(*c);
            }
            *c = seen[*c];
        }
        self.counts = order.iter().map(|&b| self.counts[b]).collect();
        self.atoms = order.iter().map(|&b| self.atoms[b].clone()).collect();
    }

    /// Reports a draw of `m` given the partition for random-`m` priors.
    fn current_m<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Support> {
        match self.prior.fixed_support() {
            Some(m) => Ok(m),
            None => {
                let counts = crate::species::BlockCounts::new(self.counts.clone())?;
                Ok(Support::Finite(MPosterior::new(&self.prior, &counts)?.sample(rng)))
            }
        }
    }
}

impl<F: ComponentFamily> MixtureChain for MarginalSampler<'_, F> {
    fn name(&self) -> &'static str {
        "marginal"
    }

    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<TraceRecord> {
        self.update_allocations(rng)?;
        self.update_atoms(rng);
        self.relabel();
        self.iteration += 1;
        let m = self.current_m(rng)?;
        Ok(TraceRecord {
            iteration: self.iteration,
            k: self.counts.len(),
            m,
            deviance: deviance(&self.family, self.data, &self.counts, &self.atoms)?,
            weights: Vec::new(),
            atoms: self.atoms.iter().map(|a| self.family.encode(a)).collect(),
            counts: self.counts.clone(),
            labels: self.labels.clone(),
        })
    }

    fn labels(&self) -> Vec<usize> {
        canonical_labels(&self.labels)
    }

    fn check_invariants(&self) -> Result<()> {
        let k = self.counts.len();
        if k == 0 || k > self.data.len() || self.atoms.len() != k {
            return Err(Error::Invariant(format!("{k} blocks with {} atoms", self.atoms.len())));
        }
        let mut counts = vec![0; k];
        for &c in &self.labels {
            if c >= k {
                return Err(Error::Invariant(format!("label {c} without a block")));
            }
            counts[c] += 1;
        }
        if counts != self.counts || counts.contains(&0) {
            return Err(Error::Invariant("block counts out of sync with labels".into()));
        }
        Ok(())
    }
}
