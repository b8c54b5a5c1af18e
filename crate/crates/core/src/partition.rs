//! Integer partitions and single-box moves between them.
//!
//! A partition is a non-increasing sequence of positive parts. Partitions of
//! `n` label the level-`n` states of the staircase lattice: part `k` is the
//! number of up-spins in column `k`. Moving one box (adding or removing a
//! single unit while keeping the sequence non-increasing) connects a partition
//! to its `children` and `parents`, which is the adjacency used everywhere
//! else in the crate.
//!
//! The canonical order on partitions is reverse lexicographic, e.g. for n = 3:
//! `3 > 2+1 > 1+1+1` enumerates as `(3), (2,1), (1,1,1)`. Missing parts
//! compare as zero, which extends the order across different `n`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest `n` for which whole-level enumeration is supported.
///
/// Bounds memory for [`partitions_of`] and the level builders in
/// [`crate::young`]; p(50) = 204226 partitions.
pub const MAX_PARTITION_N: u32 = 50;

/// A non-increasing sequence of positive integer parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition, rejecting sequences that are not non-increasing or
    /// contain zero parts.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        for pair in parts.windows(2) {
            if pair[0] < pair[1] {
                return Err(Error::InvalidInput(format!(
                    "parts must be non-increasing, got {:?}",
                    parts
                )));
            }
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidInput("parts must be positive".into()));
        }
        Ok(Partition { parts })
    }

    /// The empty partition of 0.
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// The unique partition of 1.
    pub fn single() -> Self {
        Partition { parts: vec![1] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Sum of parts.
    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// All partitions reachable by removing one unit. Empty only for the
    /// empty partition.
    pub fn parents(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        for i in 0..self.parts.len() {
            let next = self.parts.get(i + 1).copied().unwrap_or(0);
            if self.parts[i] > next.max(1) || (self.parts[i] == 1 && i + 1 == self.parts.len()) {
                // Removable corner: decrementing keeps the sequence valid.
                let mut parts = self.parts.clone();
                parts[i] -= 1;
                if parts[i] == 0 {
                    parts.pop();
                }
                out.push(Partition { parts });
            }
        }
        out
    }

    /// All partitions reachable by adding one unit.
    pub fn children(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        for i in 0..self.parts.len() {
            let prev = if i == 0 { u32::MAX } else { self.parts[i - 1] };
            if self.parts[i] < prev {
                let mut parts = self.parts.clone();
                parts[i] += 1;
                out.push(Partition { parts });
            }
        }
        let mut parts = self.parts.clone();
        parts.push(1);
        out.push(Partition { parts });
        out
    }
}

impl Ord for Partition {
    /// Reverse-lexicographic: larger leading parts order first; absent parts
    /// count as zero.
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.parts.len().max(other.parts.len());
        for i in 0..len {
            let a = self.parts.get(i).copied().unwrap_or(0);
            let b = other.parts.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

/// All partitions of `n` in canonical (reverse-lexicographic) order.
///
/// `n = 0` yields the empty partition. Errors with [`Error::SizeLimit`] above
/// [`MAX_PARTITION_N`].
pub fn partitions_of(n: u32) -> Result<Vec<Partition>> {
    if n > MAX_PARTITION_N {
        return Err(Error::SizeLimit(format!(
            "partition enumeration capped at n = {MAX_PARTITION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    descend(n, n, &mut prefix, &mut out);
    Ok(out)
}

fn descend(remaining: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition {
            parts: prefix.clone(),
        });
        return;
    }
    let top = remaining.min(max_part);
    for part in (1..=top).rev() {
        prefix.push(part);
        descend(remaining - part, part, prefix, out);
        prefix.pop();
    }
}
