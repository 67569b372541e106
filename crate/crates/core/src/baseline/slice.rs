//! Slice sampler for Pitman-Yor mixtures with stick-breaking weights in their
//! natural (not size-biased) order.
//!
//! Each sweep draws the weights given the allocation counts, slice variables
//! `u_i ~ U(0, p_{c_i})`, and then reallocates every observation among the
//! components with `p_j > u_i`. Sticks and atoms past the last occupied
//! component are drawn from the prior only when some slice reaches them.

use std::collections::HashMap;

use rand::Rng;

use crate::chain::MixtureChain;
use crate::components::{ComponentFamily, SufficientStats};
use crate::diagnostics::{deviance, TraceRecord};
use crate::error::{domain, Error, Result};
use crate::partition::canonical_labels;
use crate::special::{sample_beta, sample_log_categorical};
use crate::species::{MixingPrior, Support};

/// Default cap on the number of sticks realized within one sweep.
pub const DEFAULT_SLICE_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct SliceSampler<'a, F: ComponentFamily> {
    data: &'a [F::Obs],
    family: F,
    prior: MixingPrior,
    cap: usize,
    /// Component index of each observation.
    c: Vec<usize>,
    /// Weights above the smallest slice in the last sweep, by component index.
    p: HashMap<usize, f64>,
    /// Total weight realized in the last sweep.
    realized_mass: f64,
    u: Vec<f64>,
    atoms: HashMap<usize, F::Params>,
    /// Sticks realized in the last sweep.
    last_len: usize,
    iteration: usize,
}

impl<'a, F: ComponentFamily> SliceSampler<'a, F> {
    pub fn new<R: Rng + ?Sized>(
        data: &'a [F::Obs],
        family: F,
        prior: MixingPrior,
        labels: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        prior.validate()?;
        if !matches!(prior, MixingPrior::PitmanYor { .. }) {
            return Err(Error::UnsupportedPrior(format!("the slice sampler needs Pitman-Yor weights, got {prior}")));
        }
        if data.is_empty() || labels.len() != data.len() {
            return domain(format!("{} labels for {} observations", labels.len(), data.len()));
        }
        let mut s = SliceSampler {
            data,
            family,
            prior,
            cap: DEFAULT_SLICE_CAP,
            c: labels.to_vec(),
            p: HashMap::new(),
            realized_mass: 0.0,
            u: vec![0.0; data.len()],
            atoms: HashMap::new(),
            last_len: 0,
            iteration: 0,
        };
        s.update_atoms(rng);
        Ok(s)
    }

    pub fn single_block<R: Rng + ?Sized>(data: &'a [F::Obs], family: F, prior: MixingPrior, rng: &mut R) -> Result<Self> {
        Self::new(data, family, prior, &vec![0; data.len()], rng)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Number of sticks realized during the last sweep.
    pub fn realized_len(&self) -> usize {
        self.last_len
    }

    fn occupied_counts(&self) -> Vec<usize> {
        let len = self.c.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0; len];
        self.c.iter().for_each(|&j| counts[j] += 1);
        counts
    }

    /// Occupied atoms from their posteriors; every other atom is forgotten.
    fn update_atoms<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut stats: HashMap<usize, F::Stats> = HashMap::new();
        for (y, &j) in self.data.iter().zip(&self.c) {
            stats.entry(j).or_default().push(y);
        }
        let mut keys: Vec<usize> = stats.keys().copied().collect();
        keys.sort_unstable();
        self.atoms.clear();
        for j in keys {
            let atom = self.family.posterior_from_stats(&stats[&j]).sample_params(rng);
            self.atoms.insert(j, atom);
        }
    }

    fn sweep_inner<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let (sigma, theta) = match self.prior {
            MixingPrior::PitmanYor { sigma, theta } => (sigma, theta),
            _ => unreachable!("checked at construction"),
        };
        // weights given counts, with u integrated out
        let counts = self.occupied_counts();
        let mut tail: usize = counts.iter().sum();
        let mut p = Vec::with_capacity(counts.len());
        let mut rem = 1.0;
        for (j, &nj) in counts.iter().enumerate() {
            tail -= nj;
            let (a, b) = self.prior.stick_beta(Support::Infinite, j + 1, nj + 1, tail)?;
            let v = sample_beta(rng, a, b);
            p.push(v * rem);
            rem *= 1.0 - v;
        }
        // slices
        let mut u_min = f64::INFINITY;
        for (u, &j) in self.u.iter_mut().zip(&self.c) {
            *u = rng.random::<f64>() * p[j];
            u_min = u_min.min(*u);
        }
        // Realize sticks until the leftover mass drops below every slice. Only
        // weights above the smallest slice can receive anyone, so the others
        // are drawn and dropped.
        let mut weights: Vec<(usize, f64)> = p.iter().copied().enumerate().filter(|&(_, w)| w > u_min).collect();
        let mut len = p.len();
        while rem >= u_min {
            if len >= self.cap {
                return Err(Error::TruncationOverflow { cap: self.cap });
            }
            len += 1;
            let v = sample_beta(rng, 1.0 - sigma, theta + len as f64 * sigma);
            let w = v * rem;
            if w > u_min {
                weights.push((len - 1, w));
            }
            rem *= 1.0 - v;
        }
        self.last_len = len;
        self.realized_mass = 1.0 - rem;
        // heaviest first, so each slice set is a prefix
        weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut lw = Vec::new();
        for i in 0..self.data.len() {
            lw.clear();
            let set = weights.partition_point(|&(_, w)| w > self.u[i]);
            for &(j, _) in &weights[..set] {
                let atom = match self.atoms.get(&j) {
                    Some(a) => a,
                    None => {
                        let fresh = self.family.sample_params(rng);
                        self.atoms.entry(j).or_insert(fresh)
                    }
                };
                lw.push(self.family.log_kernel(atom, &self.data[i]));
            }
            if set == 0 {
                return Err(Error::Invariant(format!("empty slice set for observation {i}")));
            }
            let pick = sample_log_categorical(rng, &lw)
                .ok_or_else(|| Error::Invariant(format!("all slice weights vanish at i = {i}")))?;
            self.c[i] = weights[pick].0;
        }
        self.p = weights.into_iter().collect();
        self.update_atoms(rng);
        Ok(())
    }

    /// Slice-set and weight consistency of the current state.
    pub fn check_slices(&self) -> Result<()> {
        for (i, (&u, &j)) in self.u.iter().zip(&self.c).enumerate() {
            if !self.p.get(&j).is_some_and(|&w| u < w) {
                return Err(Error::Invariant(format!("observation {i} sits outside its slice")));
            }
        }
        let total = self.realized_mass;
        let kept: f64 = self.p.values().sum();
        if total > 1.0 + 1e-12 || kept > total * (1.0 + 1e-12) {
            return Err(Error::Invariant(format!("weights sum to {total}")));
        }
        Ok(())
    }
}

impl<F: ComponentFamily> MixtureChain for SliceSampler<'_, F> {
    fn name(&self) -> &'static str {
        "slice"
    }

    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<TraceRecord> {
        self.sweep_inner(rng)?;
        self.iteration += 1;
        // report occupied components in order of appearance
        let mut order = Vec::new();
        let mut seen = HashMap::new();
        let labels: Vec<usize> = self
            .c
            .iter()
            .map(|&j| {
                *seen.entry(j).or_insert_with(|| {
                    order.push(j);
                    order.len() - 1
                })
            })
            .collect();
        let mut counts = vec![0; order.len()];
        labels.iter().for_each(|&l| counts[l] += 1);
        let atoms: Vec<F::Params> = order.iter().map(|j| self.atoms[j].clone()).collect();
        Ok(TraceRecord {
            iteration: self.iteration,
            k: order.len(),
            m: Support::Infinite,
            deviance: deviance(&self.family, self.data, &counts, &atoms)?,
            weights: order.iter().map(|&j| self.p[&j]).collect(),
            atoms: atoms.iter().map(|a| self.family.encode(a)).collect(),
            counts,
            labels,
        })
    }

    fn labels(&self) -> Vec<usize> {
        canonical_labels(&self.c)
    }

    fn check_invariants(&self) -> Result<()> {
        if self.iteration > 0 {
            self.check_slices()?;
        }
        for &j in &self.c {
            if !self.atoms.contains_key(&j) {
                return Err(Error::Invariant(format!("occupied component {j} has no atom")));
            }
        }
        Ok(())
    }
}
