//! Subsets of a ground set of at most 64 elements, stored as bitmasks.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest ground set a [`SubsetMask`] can index.
pub const MAX_GROUND_SIZE: usize = 64;

/// A subset of `{0, .., ground_size - 1}`.
///
/// Ordering between masks of the same ground set is the numeric order of
/// the underlying bitmask, which is what "lexicographically smallest"
/// tie-breaking refers to throughout the crate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u64,
    ground_size: u8,
}

impl SubsetMask {
    pub fn new(ground_size: usize, indices: &[usize]) -> Result<Self> {
        check_ground(ground_size)?;
        let mut bits = 0u64;
        for &i in indices {
            if i >= ground_size {
                return Err(Error::Argument(format!(
                    "index {i} out of range for ground set of size {ground_size}"
                )));
            }
            bits |= 1 << i;
        }
        Ok(Self {
            bits,
            ground_size: ground_size as u8,
        })
    }

    pub fn from_bits(ground_size: usize, bits: u64) -> Result<Self> {
        check_ground(ground_size)?;
        if bits & !full_bits(ground_size) != 0 {
            return Err(Error::Argument(format!(
                "bitmask {bits:#x} has bits outside a ground set of size {ground_size}"
            )));
        }
        Ok(Self {
            bits,
            ground_size: ground_size as u8,
        })
    }

    /// Caller guarantees `bits` fits in `ground_size`.
    pub(crate) fn from_bits_unchecked(ground_size: usize, bits: u64) -> Self {
        debug_assert!(ground_size <= MAX_GROUND_SIZE);
        debug_assert_eq!(bits & !full_bits(ground_size), 0);
        Self {
            bits,
            ground_size: ground_size as u8,
        }
    }

    pub fn empty(ground_size: usize) -> Result<Self> {
        Self::from_bits(ground_size, 0)
    }

    pub fn full(ground_size: usize) -> Result<Self> {
        Self::from_bits(ground_size, full_bits(ground_size))
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn ground_size(&self) -> usize {
        self.ground_size as usize
    }

    /// Cardinality of the subset (the α of a failure set).
    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.ground_size() && self.bits & (1 << i) != 0
    }

    #[inline]
    pub fn complement(&self) -> Self {
        Self {
            bits: !self.bits & full_bits(self.ground_size()),
            ground_size: self.ground_size,
        }
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn intersection(&self, other: &SubsetMask) -> Self {
        Self {
            bits: self.bits & other.bits,
            ground_size: self.ground_size,
        }
    }

    pub fn with(&self, i: usize) -> Self {
        debug_assert!(i < self.ground_size());
        Self {
            bits: self.bits | (1 << i),
            ground_size: self.ground_size,
        }
    }

    pub fn without(&self, i: usize) -> Self {
        Self {
            bits: self.bits & !(1 << i),
            ground_size: self.ground_size,
        }
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.indices().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}/{}", self.ground_size)
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.indices())
    }
}

#[inline]
pub(crate) fn full_bits(ground_size: usize) -> u64 {
    if ground_size >= 64 {
        u64::MAX
    } else {
        (1u64 << ground_size) - 1
    }
}

fn check_ground(ground_size: usize) -> Result<()> {
    if ground_size > MAX_GROUND_SIZE {
        return Err(Error::TooLarge {
            what: "subset masks",
            size: ground_size,
            limit: MAX_GROUND_SIZE,
        });
    }
    Ok(())
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Iterates all size-`k` subsets of an `n`-element ground set in
/// increasing bitmask order (Gosper's hack).
pub struct FixedSizeSubsets {
    next: Option<u64>,
    ground_size: usize,
}

impl FixedSizeSubsets {
    pub fn new(ground_size: usize, k: usize) -> Self {
        let next = if k > ground_size || ground_size > MAX_GROUND_SIZE {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some(full_bits(k))
        };
        Self { next, ground_size }
    }
}

impl Iterator for FixedSizeSubsets {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        let limit = full_bits(self.ground_size);
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let (r, overflow) = cur.overflowing_add(c);
            if overflow || r == 0 {
                None
            } else {
                let nxt = (((r ^ cur) >> 2) / c) | r;
                if nxt & !limit != 0 {
                    None
                } else {
                    Some(nxt)
                }
            }
        };
        Some(SubsetMask::from_bits_unchecked(self.ground_size, cur))
    }
}
