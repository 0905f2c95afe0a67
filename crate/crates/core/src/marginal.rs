//! Marginal probabilities of sub-states, memoized per kept-variable mask.
//!
//! A backbone sweep touches every subset of variables for every support
//! state, so each marginal table is built once and then shared by all
//! per-state evaluations.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::distribution::{JointDistribution, StateVector};
use crate::error::{Error, Result};
use crate::subset::SubsetMask;

/// Anything that can report `P(x restricted to keep)` for a full state `x`.
pub trait MarginalSource: Sync {
    fn num_vars(&self) -> usize;

    /// Marginal probability of the sub-state of `state` on the variables
    /// in `keep`. The empty keep-set has probability 1.
    fn marginal_prob(&self, state: &[u32], keep: SubsetMask) -> f64;

    fn prob(&self, state: &[u32]) -> f64 {
        let full = SubsetMask::full(self.num_vars()).expect("ground size validated on construction");
        self.marginal_prob(state, full)
    }
}

/// Dense storage is used while the kept alphabet product stays below this.
const DENSE_LIMIT: u64 = 1 << 20;
/// Up to this many variables every mask gets a preallocated slot.
const SLOT_LIMIT: usize = 16;

struct MarginalTable {
    kept: Vec<usize>,
    strides: Vec<u64>,
    storage: Storage,
}

enum Storage {
    Dense(Vec<f64>),
    Sparse(HashMap<u64, f64>),
}

impl MarginalTable {
    fn build(dist: &JointDistribution, keep: SubsetMask) -> Self {
        let kept = keep.to_vec();
        let sizes: Vec<u32> = kept.iter().map(|&i| dist.alphabet_sizes()[i]).collect();
        let mut strides = vec![1u64; kept.len()];
        let mut total: u64 = 1;
        for i in (0..kept.len()).rev() {
            strides[i] = total;
            // cannot overflow: the full product already fits in 64 bits
            total *= sizes[i] as u64;
        }
        let mut table = Self {
            kept,
            strides,
            storage: if total <= DENSE_LIMIT {
                Storage::Dense(vec![0.0; total as usize])
            } else {
                Storage::Sparse(HashMap::new())
            },
        };
        for (state, p) in dist.support() {
            let code = table.code(state);
            match &mut table.storage {
                Storage::Dense(v) => v[code as usize] += p,
                Storage::Sparse(m) => *m.entry(code).or_insert(0.0) += p,
            }
        }
        table
    }

    #[inline]
    fn code(&self, state: &[u32]) -> u64 {
        self.kept
            .iter()
            .zip(&self.strides)
            .map(|(&i, &s)| state[i] as u64 * s)
            .sum()
    }

    #[inline]
    fn lookup(&self, state: &[u32]) -> f64 {
        let code = self.code(state);
        match &self.storage {
            Storage::Dense(v) => v[code as usize],
            Storage::Sparse(m) => m.get(&code).copied().unwrap_or(0.0),
        }
    }
}

/// Lazily memoized marginals of one explicit distribution.
pub struct MarginalCache {
    dist: Arc<JointDistribution>,
    slots: Vec<OnceLock<MarginalTable>>,
    overflow: RwLock<HashMap<u64, Arc<MarginalTable>>>,
}

impl MarginalCache {
    pub fn new(dist: JointDistribution) -> Self {
        Self::shared(Arc::new(dist))
    }

    pub fn shared(dist: Arc<JointDistribution>) -> Self {
        let k = dist.num_vars();
        let slots = if k <= SLOT_LIMIT {
            (0..1usize << k).map(|_| OnceLock::new()).collect()
        } else {
            Vec::new()
        };
        Self {
            dist,
            slots,
            overflow: RwLock::new(HashMap::new()),
        }
    }

    pub fn distribution(&self) -> &JointDistribution {
        &self.dist
    }

    fn lookup(&self, state: &[u32], keep: SubsetMask) -> f64 {
        if !self.slots.is_empty() {
            return self.slots[keep.bits() as usize]
                .get_or_init(|| MarginalTable::build(&self.dist, keep))
                .lookup(state);
        }
        if let Some(t) = self.overflow.read().expect("marginal cache poisoned").get(&keep.bits()) {
            return t.lookup(state);
        }
        let table = Arc::new(MarginalTable::build(&self.dist, keep));
        let p = table.lookup(state);
        self.overflow
            .write()
            .expect("marginal cache poisoned")
            .entry(keep.bits())
            .or_insert(table);
        p
    }
}

impl MarginalSource for MarginalCache {
    fn num_vars(&self) -> usize {
        self.dist.num_vars()
    }

    fn marginal_prob(&self, state: &[u32], keep: SubsetMask) -> f64 {
        if keep.is_empty() {
            1.0
        } else if keep.len() == self.dist.num_vars() {
            self.dist.prob(state)
        } else {
            self.lookup(state, keep)
        }
    }
}

enum Factor {
    Single { var: usize, probs: Vec<f64> },
    Block { vars: Vec<usize>, cache: MarginalCache },
}

/// A reference distribution that factorizes over disjoint blocks of
/// variables: the uniform distribution, the product of first-order
/// marginals, or `P(X) P(Y)` for mutual information.
pub struct ProductReference {
    num_vars: usize,
    alphabet_sizes: Vec<u32>,
    factors: Vec<Factor>,
}

impl ProductReference {
    /// Uniform over the full alphabet product.
    pub fn uniform(alphabet_sizes: &[u32]) -> Self {
        let factors = alphabet_sizes
            .iter()
            .enumerate()
            .map(|(var, &a)| Factor::Single {
                var,
                probs: vec![1.0 / a as f64; a as usize],
            })
            .collect();
        Self {
            num_vars: alphabet_sizes.len(),
            alphabet_sizes: alphabet_sizes.to_vec(),
            factors,
        }
    }

    /// Product of the first-order marginals of `dist`.
    pub fn independent(dist: &JointDistribution) -> Self {
        let factors = dist
            .first_order_marginals()
            .into_iter()
            .enumerate()
            .map(|(var, probs)| Factor::Single { var, probs })
            .collect();
        Self {
            num_vars: dist.num_vars(),
            alphabet_sizes: dist.alphabet_sizes().to_vec(),
            factors,
        }
    }

    /// Product of the marginals of `dist` over the given disjoint blocks,
    /// which must cover every variable.
    pub fn blocks(dist: &JointDistribution, blocks: &[Vec<usize>]) -> Result<Self> {
        let k = dist.num_vars();
        let mut seen = vec![false; k];
        let mut factors = Vec::with_capacity(blocks.len());
        for block in blocks {
            for &v in block {
                if v >= k || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Argument(format!(
                        "block variable {v} is out of range or repeated"
                    )));
                }
            }
            if block.len() == 1 {
                let var = block[0];
                factors.push(Factor::Single {
                    var,
                    probs: dist.first_order_marginals().swap_remove(var),
                });
            } else {
                let mut sorted = block.clone();
                sorted.sort_unstable();
                let keep = SubsetMask::new(k, &sorted)?;
                factors.push(Factor::Block {
                    vars: sorted,
                    cache: MarginalCache::new(dist.marginalize(keep)?),
                });
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Argument("blocks do not cover every variable".into()));
        }
        Ok(Self {
            num_vars: k,
            alphabet_sizes: dist.alphabet_sizes().to_vec(),
            factors,
        })
    }

    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }
}

impl MarginalSource for ProductReference {
    fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn marginal_prob(&self, state: &[u32], keep: SubsetMask) -> f64 {
        let mut p = 1.0;
        for factor in &self.factors {
            match factor {
                Factor::Single { var, probs } => {
                    if keep.contains(*var) {
                        p *= probs[state[*var] as usize];
                    }
                }
                Factor::Block { vars, cache } => {
                    let mut bits = 0u64;
                    for (j, &v) in vars.iter().enumerate() {
                        if keep.contains(v) {
                            bits |= 1 << j;
                        }
                    }
                    if bits != 0 {
                        let sub: StateVector = vars.iter().map(|&v| state[v]).collect();
                        let sub_keep = SubsetMask::from_bits_unchecked(vars.len(), bits);
                        p *= cache.marginal_prob(&sub, sub_keep);
                    }
                }
            }
            if p == 0.0 {
                break;
            }
        }
        p
    }
}
