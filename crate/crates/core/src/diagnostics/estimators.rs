//! Posterior summaries computed from chain traces.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use super::trace::{ChainTrace, TraceRecord};
use crate::components::ComponentFamily;
use crate::error::{domain, Error, Result};
use crate::special::log_sum_exp;
use crate::species::Support;

/// `D_v = −2 Σ_i ln Σ_j (n_j/n) g(y_i | x_j)` over occupied components.
pub fn deviance<F: ComponentFamily>(family: &F, data: &[F::Obs], counts: &[usize], atoms: &[F::Params]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return domain("deviance needs at least one occupied component");
    }
    if atoms.len() < counts.len() {
        return domain(format!("{} atoms for {} components", atoms.len(), counts.len()));
    }
    let ln_w: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
    let mut terms = vec![0.0; counts.len()];
    let mut total = 0.0;
    for y in data {
        for (j, t) in terms.iter_mut().enumerate() {
            *t = if counts[j] == 0 {
                f64::NEG_INFINITY
            } else {
                ln_w[j] + family.log_kernel(&atoms[j], y)
            };
        }
        total += log_sum_exp(&terms);
    }
    Ok(-2.0 * total)
}

/// Density estimators: `Full` mixes over realized weights and adds the remaining
/// mass times the prior predictive; `Empirical` weights occupied components by
/// their share of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    Full,
    Empirical,
}

/// Per-component estimators: `Weight` uses the component weight, `Empirical`
/// its share of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentMode {
    Weight,
    Empirical,
}

fn decode_atoms<F: ComponentFamily>(family: &F, record: &TraceRecord) -> Result<Vec<F::Params>> {
    record.atoms.iter().map(|a| family.decode(a)).collect()
}

/// Mixture weights used by the full estimator. Collapsed samplers carry no
/// weights, so their predictive weights come from the prior's product form.
fn full_weights(trace: &ChainTrace, record: &TraceRecord) -> Result<(Vec<f64>, f64)> {
    if !record.weights.is_empty() {
        let sum: f64 = record.weights.iter().sum();
        return Ok((record.weights.clone(), (1.0 - sum).max(0.0)));
    }
    let gibbs = trace.prior.gibbs_form()?;
    let (n, k) = (record.n(), record.k);
    let ln_v = gibbs.log_v(n, k);
    let old = (gibbs.log_v(n + 1, k) - ln_v).exp();
    let w = record.counts.iter().map(|&c| (c as f64 - gibbs.sigma()) * old).collect();
    Ok((w, (gibbs.log_v(n + 1, k + 1) - ln_v).exp()))
}

pub fn density_estimate<F: ComponentFamily>(
    family: &F,
    trace: &ChainTrace,
    grid: &[F::Obs],
    mode: DensityMode,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return domain("empty evaluation grid");
    }
    if trace.is_empty() {
        return domain("empty trace");
    }
    let predictive: Vec<f64> = match mode {
        DensityMode::Full => grid.iter().map(|y| family.log_predictive(y).exp()).collect(),
        DensityMode::Empirical => Vec::new(),
    };
    let mut out = vec![0.0; grid.len()];
    for record in &trace.records {
        let atoms = decode_atoms(family, record)?;
        let (weights, rest) = match mode {
            DensityMode::Full => full_weights(trace, record)?,
            DensityMode::Empirical => {
                let n = record.n() as f64;
                (record.counts.iter().map(|&c| c as f64 / n).collect(), 0.0)
            }
        };
        for (g, y) in grid.iter().enumerate() {
            let mut f: f64 = weights
                .iter()
                .zip(&atoms)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, x)| w * family.log_kernel(x, y).exp())
                .sum();
            if rest > 0.0 {
                f += rest * predictive[g];
            }
            out[g] += f;
        }
    }
    let t = trace.len() as f64;
    out.iter_mut().for_each(|v| *v /= t);
    Ok(out)
}

/// Weighted density of the `j`-th component (1-based, order of appearance).
/// Components not realized in an iteration contribute zero.
pub fn component_density_estimate<F: ComponentFamily>(
    family: &F,
    trace: &ChainTrace,
    grid: &[F::Obs],
    j: usize,
    mode: ComponentMode,
) -> Result<Vec<f64>> {
    if j == 0 {
        return domain("components are numbered from 1");
    }
    let mut out = vec![0.0; grid.len()];
    if trace.is_empty() {
        return Ok(out);
    }
    for record in &trace.records {
        let w = match mode {
            ComponentMode::Weight => record.weights.get(j - 1).copied(),
            ComponentMode::Empirical => record.counts.get(j - 1).map(|&c| c as f64 / record.n() as f64),
        };
        let (Some(w), Some(atom)) = (w, record.atoms.get(j - 1)) else {
            continue;
        };
        if w <= 0.0 {
            continue;
        }
        let x = family.decode(atom)?;
        for (o, y) in out.iter_mut().zip(grid) {
            *o += w * family.log_kernel(&x, y).exp();
        }
    }
    let t = trace.len() as f64;
    out.iter_mut().for_each(|v| *v /= t);
    Ok(out)
}

fn frequencies<K: Ord + Copy>(values: impl Iterator<Item = K>) -> BTreeMap<K, f64> {
    let mut counts = BTreeMap::new();
    let mut total = 0usize;
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
        total += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
}

/// Posterior pmf of the number of occupied components.
pub fn occupancy_posterior(trace: &ChainTrace) -> Result<BTreeMap<usize, f64>> {
    if trace.is_empty() {
        return domain("empty trace");
    }
    Ok(frequencies(trace.records.iter().map(|r| r.k)))
}

/// Posterior pmf of the number of components, for priors with random `m`.
pub fn m_posterior(trace: &ChainTrace) -> Result<BTreeMap<u64, f64>> {
    if !trace.prior.has_random_m() {
        return Err(Error::UnsupportedPrior(format!("{} has a fixed number of components", trace.prior)));
    }
    if trace.is_empty() {
        return domain("empty trace");
    }
    let ms = trace.records.iter().map(|r| match r.m {
        Support::Finite(m) => Ok(m),
        Support::Infinite => Err(Error::Invariant("infinite m in a random-m trace".into())),
    });
    let ms: Vec<u64> = ms.collect::<Result<_>>()?;
    Ok(frequencies(ms.into_iter()))
}

/// Empirical distribution of the sampled partitions.
pub fn partition_frequencies(trace: &ChainTrace) -> HashMap<Vec<usize>, f64> {
    let mut out = HashMap::new();
    let w = 1.0 / trace.len() as f64;
    for r in &trace.records {
        *out.entry(r.labels.clone()).or_insert(0.0) += w;
    }
    out
}

/// `½ Σ |p − q|` over the union of supports.
pub fn total_variation<K: Eq + Hash + Clone>(
    p: impl IntoIterator<Item = (K, f64)>,
    q: impl IntoIterator<Item = (K, f64)>,
) -> f64 {
    let mut diff: HashMap<K, f64> = p.into_iter().collect();
    for (k, v) in q {
        *diff.entry(k).or_insert(0.0) -= v;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

/// Fraction of consecutive iteration pairs in which some occupied component `j`
/// is no longer closest (by mean) to component `j` of the next iteration.
pub fn label_change_rate<F: ComponentFamily>(family: &F, trace: &ChainTrace) -> Result<f64> {
    if trace.len() < 2 {
        return Ok(0.0);
    }
    let locations = |r: &TraceRecord| -> Result<Vec<Vec<f64>>> {
        r.atoms[..r.k.min(r.atoms.len())]
            .iter()
            .map(|a| family.decode(a).map(|x| family.location(&x)))
            .collect()
    };
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut prev = locations(&trace.records[0])?;
    let mut changes = 0usize;
    for r in &trace.records[1..] {
        let next = locations(r)?;
        let shared = prev.len().min(next.len());
        let changed = (0..shared).any(|j| {
            let nearest = next
                .iter()
                .enumerate()
                .min_by(|a, b| dist2(&prev[j], a.1).total_cmp(&dist2(&prev[j], b.1)))
                .map(|(i, _)| i);
            nearest != Some(j)
        });
        changes += changed as usize;
        prev = next;
    }
    Ok(changes as f64 / (trace.len() - 1) as f64)
}
