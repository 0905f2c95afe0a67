//! Finite discrete joint distributions and exact local entropy primitives.
//!
//! All discrete quantities are in bits. A state is a slice of symbols, one
//! per variable; symbol `i` must lie in `[0, alphabet_sizes[i])`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::subset::SubsetMask;

/// Tolerance on the total probability mass.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// One realization of every variable of a distribution.
pub type StateVector = Vec<u32>;

/// A probability mass function over `k` finite-alphabet variables.
///
/// Only the support is stored; states absent from it have probability 0.
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    names: Vec<String>,
    alphabet_sizes: Vec<u32>,
    strides: Vec<u64>,
    states: Vec<StateVector>,
    probs: Vec<f64>,
    index: HashMap<u64, usize>,
}

impl JointDistribution {
    /// Builds a distribution from `(state, probability)` entries. Entries
    /// with probability exactly 0 are dropped; duplicates are rejected.
    pub fn new(
        names: Vec<String>,
        alphabet_sizes: Vec<u32>,
        entries: impl IntoIterator<Item = (StateVector, f64)>,
    ) -> Result<Self> {
        let k = alphabet_sizes.len();
        if names.len() != k {
            return Err(Error::InvalidDistribution(format!(
                "{} variable names for {} alphabets",
                names.len(),
                k
            )));
        }
        if k > crate::subset::MAX_GROUND_SIZE {
            return Err(Error::TooLarge {
                what: "distribution variables",
                size: k,
                limit: crate::subset::MAX_GROUND_SIZE,
            });
        }
        if let Some(i) = alphabet_sizes.iter().position(|&a| a == 0) {
            return Err(Error::InvalidDistribution(format!(
                "variable {i} has an empty alphabet"
            )));
        }
        let strides = strides_for(&alphabet_sizes)?;

        let mut rows: Vec<(u64, StateVector, f64)> = Vec::new();
        let mut total = 0.0;
        for (state, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} of state {state:?} is not a finite non-negative number"
                )));
            }
            check_state(&alphabet_sizes, &state)?;
            total += p;
            if p > 0.0 {
                rows.push((encode(&strides, &state), state, p));
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, deficit {}",
                1.0 - total
            )));
        }
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution(format!(
                "state {:?} listed more than once",
                w[0].1
            )));
        }

        let index = rows.iter().enumerate().map(|(i, r)| (r.0, i)).collect();
        let (states, probs) = rows.into_iter().map(|(_, s, p)| (s, p)).unzip();
        Ok(Self {
            names,
            alphabet_sizes,
            strides,
            states,
            probs,
            index,
        })
    }

    /// Same as [`JointDistribution::new`] with names `X0, X1, ..`.
    pub fn unnamed(
        alphabet_sizes: Vec<u32>,
        entries: impl IntoIterator<Item = (StateVector, f64)>,
    ) -> Result<Self> {
        let names = (0..alphabet_sizes.len()).map(|i| format!("X{i}")).collect();
        Self::new(names, alphabet_sizes, entries)
    }

    /// Uniform distribution over the full alphabet product.
    pub fn uniform(alphabet_sizes: Vec<u32>) -> Result<Self> {
        let total: u64 = alphabet_sizes.iter().map(|&a| a as u64).product();
        if total > 1 << 24 {
            return Err(Error::TooLarge {
                what: "explicit uniform distributions (states)",
                size: total as usize,
                limit: 1 << 24,
            });
        }
        let p = 1.0 / total as f64;
        let sizes = alphabet_sizes.clone();
        let entries = (0..total).map(move |code| (decode(&sizes, code), p));
        Self::unnamed(alphabet_sizes, entries)
    }

    /// Distribution over zero variables: the empty tuple with probability 1.
    pub fn trivial() -> Self {
        Self::unnamed(Vec::new(), [(Vec::new(), 1.0)]).expect("trivial distribution is valid")
    }

    pub fn num_vars(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }

    pub fn support_size(&self) -> usize {
        self.states.len()
    }

    /// Support states and their probabilities, in lexicographic state order.
    pub fn support(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.states
            .iter()
            .map(Vec::as_slice)
            .zip(self.probs.iter().copied())
    }

    /// Probability of a full state; 0 outside the support.
    pub fn prob(&self, state: &[u32]) -> f64 {
        if check_state(&self.alphabet_sizes, state).is_err() {
            return 0.0;
        }
        self.index
            .get(&encode(&self.strides, state))
            .map_or(0.0, |&i| self.probs[i])
    }

    fn validate_state(&self, state: &[u32]) -> Result<()> {
        check_state(&self.alphabet_sizes, state)
    }

    fn require_support(&self, state: &[u32]) -> Result<f64> {
        self.validate_state(state)?;
        match self.prob(state) {
            p if p > 0.0 => Ok(p),
            _ => Err(Error::OutsideSupport(state.to_vec())),
        }
    }

    /// Marginal over the variables in `keep`, in increasing index order.
    pub fn marginalize(&self, keep: SubsetMask) -> Result<JointDistribution> {
        if keep.ground_size() != self.num_vars() {
            return Err(Error::Argument(format!(
                "keep-set over {} elements for a distribution of {} variables",
                keep.ground_size(),
                self.num_vars()
            )));
        }
        let kept: Vec<usize> = keep.to_vec();
        let mut acc: HashMap<StateVector, f64> = HashMap::new();
        for (state, p) in self.support() {
            let sub: StateVector = kept.iter().map(|&i| state[i]).collect();
            *acc.entry(sub).or_insert(0.0) += p;
        }
        let entries: Vec<(StateVector, f64)> = acc.into_iter().collect();
        Self::new(
            kept.iter().map(|&i| self.names[i].clone()).collect(),
            kept.iter().map(|&i| self.alphabet_sizes[i]).collect(),
            entries,
        )
    }

    /// Distribution of the remaining variables given `var = value`.
    pub fn condition(&self, var: usize, value: u32) -> Result<JointDistribution> {
        if var >= self.num_vars() {
            return Err(Error::Argument(format!("variable index {var} out of range")));
        }
        let mass: f64 = self
            .support()
            .filter(|(s, _)| s[var] == value)
            .map(|(_, p)| p)
            .sum();
        if mass <= 0.0 {
            return Err(Error::Domain(format!(
                "cannot condition on zero-probability event {}={value}",
                self.names[var]
            )));
        }
        let rest = |v: &[u32]| -> Vec<u32> {
            v.iter()
                .enumerate()
                .filter(|&(i, _)| i != var)
                .map(|(_, &x)| x)
                .collect()
        };
        let names = self
            .names
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != var)
            .map(|(_, n)| n.clone())
            .collect();
        let entries: Vec<_> = self
            .support()
            .filter(|(s, _)| s[var] == value)
            .map(|(s, p)| (rest(s), p / mass))
            .collect();
        let renorm: f64 = entries.iter().map(|e| e.1).sum();
        Self::new(
            names,
            rest(&self.alphabet_sizes),
            entries.into_iter().map(|(s, p)| (s, p / renorm)),
        )
    }

    /// Per-variable marginal pmfs, each indexed by symbol.
    pub fn first_order_marginals(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self
            .alphabet_sizes
            .iter()
            .map(|&a| vec![0.0; a as usize])
            .collect();
        for (state, p) in self.support() {
            for (i, &x) in state.iter().enumerate() {
                out[i][x as usize] += p;
            }
        }
        out
    }

    /// `-log2 P(state)`.
    pub fn local_entropy(&self, state: &[u32]) -> Result<f64> {
        Ok(-self.require_support(state)?.log2())
    }

    /// `h(x) - h(x restricted to the survivors of `failed`)`, i.e.
    /// `-log2 P(x_failed | x_rest)`.
    pub fn local_conditional_entropy(&self, state: &[u32], failed: SubsetMask) -> Result<f64> {
        let p = self.require_support(state)?;
        if failed.ground_size() != self.num_vars() {
            return Err(Error::Argument(format!(
                "failure set over {} elements for a distribution of {} variables",
                failed.ground_size(),
                self.num_vars()
            )));
        }
        let keep = failed.complement();
        let p_rest: f64 = self
            .support()
            .filter(|(s, _)| keep.indices().all(|i| s[i] == state[i]))
            .map(|(_, q)| q)
            .sum();
        Ok((p_rest / p).log2().max(0.0))
    }

    /// Shannon entropy in bits.
    pub fn expected_entropy(&self) -> f64 {
        self.support().map(|(_, p)| -p * p.log2()).sum()
    }
}

pub(crate) fn check_state(alphabet_sizes: &[u32], state: &[u32]) -> Result<()> {
    if state.len() != alphabet_sizes.len() {
        return Err(Error::InvalidDistribution(format!(
            "state {state:?} has length {}, expected {}",
            state.len(),
            alphabet_sizes.len()
        )));
    }
    if let Some(i) = (0..state.len()).find(|&i| state[i] >= alphabet_sizes[i]) {
        return Err(Error::InvalidDistribution(format!(
            "symbol {} of variable {i} in state {state:?} exceeds alphabet size {}",
            state[i], alphabet_sizes[i]
        )));
    }
    Ok(())
}

/// Mixed-radix strides with variable 0 most significant, so code order is
/// lexicographic state order.
pub(crate) fn strides_for(alphabet_sizes: &[u32]) -> Result<Vec<u64>> {
    let mut strides = vec![1u64; alphabet_sizes.len()];
    let mut acc: u64 = 1;
    for i in (0..alphabet_sizes.len()).rev() {
        strides[i] = acc;
        acc = acc.checked_mul(alphabet_sizes[i] as u64).ok_or_else(|| {
            Error::InvalidDistribution("alphabet product overflows 64-bit state codes".into())
        })?;
    }
    Ok(strides)
}

#[inline]
pub(crate) fn encode(strides: &[u64], state: &[u32]) -> u64 {
    state
        .iter()
        .zip(strides)
        .map(|(&x, &s)| x as u64 * s)
        .sum()
}

fn decode(alphabet_sizes: &[u32], mut code: u64) -> StateVector {
    let mut out = vec![0u32; alphabet_sizes.len()];
    for i in (0..alphabet_sizes.len()).rev() {
        let a = alphabet_sizes[i] as u64;
        out[i] = (code % a) as u32;
        code /= a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn xor() -> JointDistribution {
        JointDistribution::unnamed(
            vec![2, 2, 2],
            [
                (vec![0, 0, 0], 0.25),
                (vec![0, 1, 1], 0.25),
                (vec![1, 0, 1], 0.25),
                (vec![1, 1, 0], 0.25),
            ],
        )
        .unwrap()
    }

    fn and() -> JointDistribution {
        JointDistribution::unnamed(
            vec![2, 2, 2],
            [
                (vec![0, 0, 0], 0.25),
                (vec![0, 1, 0], 0.25),
                (vec![1, 0, 0], 0.25),
                (vec![1, 1, 1], 0.25),
            ],
        )
        .unwrap()
    }

    #[test]
    fn xor_pair_marginal_is_uniform() {
        let m = xor().marginalize(SubsetMask::new(3, &[0, 1]).unwrap()).unwrap();
        assert_eq!(m.support_size(), 4);
        for (_, p) in m.support() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn and_output_marginal() {
        let m = and().marginalize(SubsetMask::new(3, &[2]).unwrap()).unwrap();
        assert_abs_diff_eq!(m.prob(&[0]), 0.75);
        assert_abs_diff_eq!(m.prob(&[1]), 0.25);
    }

    #[test]
    fn full_and_empty_keep() {
        let d = and();
        let full = d.marginalize(SubsetMask::full(3).unwrap()).unwrap();
        assert_eq!(full.support().collect::<Vec<_>>(), d.support().collect::<Vec<_>>());
        let empty = d.marginalize(SubsetMask::empty(3).unwrap()).unwrap();
        assert_eq!(empty.num_vars(), 0);
        assert_eq!(empty.prob(&[]), 1.0);
        assert_eq!(empty.expected_entropy(), 0.0);
    }

    #[test]
    fn local_entropy_values() {
        assert_abs_diff_eq!(xor().local_entropy(&[0, 0, 0]).unwrap(), 2.0);
        let point = JointDistribution::unnamed(vec![3], [(vec![1], 1.0)]).unwrap();
        assert_eq!(point.local_entropy(&[1]).unwrap(), 0.0);
        let indep = JointDistribution::uniform(vec![2, 2, 2]).unwrap();
        assert_abs_diff_eq!(indep.local_entropy(&[1, 0, 1]).unwrap(), 3.0);
        assert!(matches!(
            xor().local_entropy(&[0, 0, 1]),
            Err(Error::OutsideSupport(_))
        ));
    }

    #[test]
    fn local_conditional_entropy_values() {
        let failed = SubsetMask::new(3, &[0, 1]).unwrap();
        assert_abs_diff_eq!(and().local_conditional_entropy(&[1, 1, 1], failed).unwrap(), 0.0);
        let none = SubsetMask::empty(3).unwrap();
        assert_eq!(xor().local_conditional_entropy(&[0, 1, 1], none).unwrap(), 0.0);
        let indep = JointDistribution::uniform(vec![2, 2, 2]).unwrap();
        for pair in [[0, 1], [0, 2], [1, 2]] {
            let f = SubsetMask::new(3, &pair).unwrap();
            assert_abs_diff_eq!(indep.local_conditional_entropy(&[0, 1, 0], f).unwrap(), 2.0);
        }
    }

    #[test]
    fn expected_entropy_values() {
        assert_abs_diff_eq!(JointDistribution::uniform(vec![4]).unwrap().expected_entropy(), 2.0);
        assert_abs_diff_eq!(xor().expected_entropy(), 2.0);
        let point = JointDistribution::unnamed(vec![2, 2], [(vec![1, 0], 1.0)]).unwrap();
        assert_eq!(point.expected_entropy(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let bad_sum = JointDistribution::unnamed(vec![2], [(vec![0], 0.5), (vec![1], 0.499)]);
        assert!(matches!(bad_sum, Err(Error::InvalidDistribution(_))));
        let neg = JointDistribution::unnamed(vec![2], [(vec![0], 1.5), (vec![1], -0.5)]);
        assert!(neg.is_err());
        let range = JointDistribution::unnamed(vec![2], [(vec![2], 1.0)]);
        assert!(range.is_err());
        let dup = JointDistribution::unnamed(vec![2], [(vec![0], 0.5), (vec![0], 0.5)]);
        assert!(dup.is_err());
        let len = JointDistribution::unnamed(vec![2, 2], [(vec![0], 1.0)]);
        assert!(len.is_err());
    }

    #[test]
    fn conditioning_removes_variable() {
        let c = xor().condition(2, 0).unwrap();
        assert_eq!(c.num_vars(), 2);
        assert_abs_diff_eq!(c.prob(&[0, 0]), 0.5);
        assert_abs_diff_eq!(c.prob(&[1, 1]), 0.5);
        assert_eq!(c.prob(&[0, 1]), 0.0);
        assert!(xor().condition(2, 1).is_ok());
    }
}
