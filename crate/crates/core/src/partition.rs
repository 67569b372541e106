//! Set partitions of `{0, …, n−1}` stored as restricted-growth strings: label
//! `i` is the index of the block containing `i`, blocks numbered by their least
//! element. This is the same encoding as zero-based ordered allocation variables.

use crate::error::{Error, Result};
use crate::species::BlockCounts;

/// Largest `n` accepted by [`enumerate_partitions`] (B_12 = 4 213 597).
pub const MAX_ENUMERATION_N: usize = 12;

/// All set partitions of an `n`-set in lexicographic restricted-growth order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::ResourceLimit(format!(
            "enumerating partitions of {n} elements exceeds the limit of {MAX_ENUMERATION_N}"
        )));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    // max label used in rgs[..i]
    let mut maxes = vec![0usize; n];
    loop {
        out.push(rgs.clone());
        // rightmost position that can still grow
        let Some(i) = (1..n).rev().find(|&i| rgs[i] <= maxes[i - 1]) else {
            return Ok(out);
        };
        rgs[i] += 1;
        maxes[i] = maxes[i - 1].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            maxes[j] = maxes[i];
        }
    }
}

/// Relabel arbitrary labels by order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

pub fn is_restricted_growth(labels: &[usize]) -> bool {
    let mut next = 0;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    true
}

/// Compact text form: one base-36 digit per element.
pub fn rgs_string(labels: &[usize]) -> String {
    labels
        .iter()
        .map(|&l| char::from_digit(l as u32, 36).unwrap_or('?'))
        .collect()
}

pub fn parse_rgs(s: &str) -> Result<Vec<usize>> {
    let labels = s
        .chars()
        .map(|c| c.to_digit(36).map(|d| d as usize))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Domain(format!("not a partition string: {s:?}")))?;
    if labels.is_empty() || !is_restricted_growth(&labels) {
        return Err(Error::Domain(format!("not a restricted-growth string: {s:?}")));
    }
    Ok(labels)
}

/// Blocks of `[n]` in least-element order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn from_rgs(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Domain("a partition needs at least one element".into()));
        }
        if !is_restricted_growth(&labels) {
            return Err(Error::Invariant(format!("labels {labels:?} break least-element order")));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            blocks[l].push(i);
        }
        Ok(OrderedPartition { labels, blocks })
    }

    /// Any labelling; blocks are renumbered by their least element.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        Self::from_rgs(canonical_labels(labels))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn counts(&self) -> BlockCounts {
        BlockCounts::new(self.blocks.iter().map(Vec::len).collect()).expect("blocks are non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in (1..=8).zip(&bell) {
            let parts = enumerate_partitions(n).unwrap();
            assert_eq!(parts.len(), b);
            assert!(parts.iter().all(|p| is_restricted_growth(p)));
            let unique: std::collections::HashSet<_> = parts.iter().collect();
            assert_eq!(unique.len(), b);
        }
        assert_eq!(enumerate_partitions(1).unwrap(), vec![vec![0]]);
        assert!(matches!(enumerate_partitions(13), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn canonical_relabelling() {
        assert_eq!(canonical_labels(&[4, 4, 2, 7, 2]), vec![0, 0, 1, 2, 1]);
        let p = OrderedPartition::from_labels(&[1, 0, 1, 0, 2]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3], vec![4]]);
        assert!(OrderedPartition::from_rgs(vec![0, 2, 1]).is_err());
    }

    #[test]
    fn string_round_trip() {
        let l = vec![0, 1, 0, 2, 1];
        assert_eq!(parse_rgs(&rgs_string(&l)).unwrap(), l);
        assert!(parse_rgs("021").is_err());
    }
}
