//! Admissible values of a single ordered allocation variable.
//!
//! Labels are zero-based. Removing `i` from its block `c` and reinserting it
//! must leave every block non-empty with block minima still increasing. With
//! `t` the number of blocks whose minimum is below `i`, three situations arise:
//!
//! * `i` is not the minimum of `c`: any of `0..=t` (label `t` joins the block
//!   whose minimum is the first one above `i`, or opens a new block).
//! * `i` is the minimum of `c` and `c` has other members: `0..=c` provided the
//!   next member of `c` still precedes the minimum of block `c + 1`, else `{c}`.
//! * `i` is a singleton: `0..=c` when `c` is the last block (label `c` then plays
//!   the role of a new block), else `{c}`.

use crate::error::{Error, Result};
use crate::partition::is_restricted_growth;

/// Admissible labels for position `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Moves {
    /// Only the current label.
    Stay(usize),
    /// Labels `0..=top`; `top == k_star` means `top` opens a new component.
    UpTo {
        top: usize,
        k_star: usize,
        /// For a block minimum leaving its block: the next member, which becomes
        /// the block's new minimum.
        successor: Option<usize>,
    },
}

impl Moves {
    pub(crate) fn to_vec(self) -> Vec<usize> {
        match self {
            Moves::Stay(c) => vec![c],
            Moves::UpTo { top, .. } => (0..=top).collect(),
        }
    }
}

/// Block counts and minima kept alongside the labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BlockIndex {
    pub counts: Vec<usize>,
    pub mins: Vec<usize>,
}

impl BlockIndex {
    pub(crate) fn from_labels(d: &[usize]) -> Self {
        let k = d.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0; k];
        let mut mins = vec![usize::MAX; k];
        for (i, &c) in d.iter().enumerate() {
            counts[c] += 1;
            mins[c] = mins[c].min(i);
        }
        BlockIndex { counts, mins }
    }

    pub(crate) fn k(&self) -> usize {
        self.counts.len()
    }

    /// `can_open` says whether one more component than currently occupied is allowed.
    pub(crate) fn moves(&self, d: &[usize], i: usize, can_open: bool) -> Moves {
        let c = d[i];
        let k = self.k();
        if self.mins[c] != i {
            let t = self.mins.partition_point(|&m| m < i);
            let top = if t == k && !can_open { t - 1 } else { t };
            return Moves::UpTo {
                top,
                k_star: k,
                successor: None,
            };
        }
        if self.counts[c] == 1 {
            return if c + 1 == k {
                Moves::UpTo {
                    top: c,
                    k_star: c,
                    successor: None,
                }
            } else {
                Moves::Stay(c)
            };
        }
        let limit = self.mins.get(c + 1).copied().unwrap_or(d.len());
        match (i + 1..limit).find(|&j| d[j] == c) {
            Some(s) => Moves::UpTo {
                top: c,
                k_star: k,
                successor: Some(s),
            },
            None => Moves::Stay(c),
        }
    }

    /// Apply `d[i] = v` for an admissible `v` drawn from `moves`.
    pub(crate) fn apply(&mut self, d: &mut [usize], i: usize, v: usize, moves: Moves) {
        let c = d[i];
        if v == c {
            return;
        }
        let Moves::UpTo { k_star, successor, .. } = moves else {
            unreachable!("a fixed label cannot move");
        };
        self.counts[c] -= 1;
        if self.counts[c] == 0 {
            // singleton in the last block
            self.counts.pop();
            self.mins.pop();
        } else if let Some(s) = successor {
            self.mins[c] = s;
        }
        if v == k_star && v == self.counts.len() {
            self.counts.push(1);
            self.mins.push(i);
        } else {
            self.counts[v] += 1;
            if i < self.mins[v] {
                self.mins[v] = i;
            }
        }
        d[i] = v;
    }
}

/// Admissible values of `d_i` for zero-based restricted-growth labels `d`,
/// allowing a new component. Value `k` (the number of blocks) denotes a new one.
pub fn admissible_moves(d: &[usize], i: usize) -> Result<Vec<usize>> {
    if d.is_empty() || !is_restricted_growth(d) {
        return Err(Error::Invariant(format!("labels {d:?} break least-element order")));
    }
    if i >= d.len() {
        return Err(Error::Domain(format!("position {i} outside 0..{}", d.len())));
    }
    Ok(BlockIndex::from_labels(d).moves(d, i, true).to_vec())
}
