//! Heuristic search for the optimal failure set at one scale, plus the
//! monotonicity diagnostics those heuristics need.
//!
//! Random sampling and simulated annealing only ever return losses they
//! actually evaluated, so for MIN they can miss the optimum upward but
//! never undershoot it. Missing it at some scale can make the α-synergy
//! decrease in α; [`monotonicity_check`] reports this and
//! [`enforce_monotone`] repairs it on request.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{
    best_of, checked_loss, mean_of, partial_atoms, BackboneSpectrum, Direction, SetFunction,
};
use crate::error::{Error, Result};
use crate::subset::{binomial, FixedSizeSubsets, SubsetMask};

/// Distinct-subset tracking is used up to this many samples.
pub const DISTINCT_SAMPLE_LIMIT: usize = 1 << 20;
/// Annealing stops once the temperature falls below this fraction of its
/// starting value.
pub const FREEZE_RATIO: f64 = 1e-3;
/// Random failure sets drawn to set the starting temperature.
pub const AUTO_TEMP_PROBES: usize = 32;
/// Temperature used when the probes show no spread.
const MIN_TEMP: f64 = 1e-12;
const CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnealSchedule {
    /// `None` derives the temperature from the spread of random losses.
    pub initial_temp: Option<f64>,
    pub cooling: f64,
    pub steps_per_temp: usize,
    pub restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temp: None,
            cooling: 0.95,
            steps_per_temp: 50,
            restarts: 4,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.initial_temp {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Argument(format!(
                    "initial temperature must be positive, got {t}"
                )));
            }
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Argument(format!(
                "cooling must lie strictly inside (0, 1), got {}",
                self.cooling
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Argument("annealing needs at least one restart".into()));
        }
        Ok(())
    }

    /// Number of temperature levels per restart.
    pub fn levels(&self) -> usize {
        if self.steps_per_temp == 0 {
            0
        } else {
            (FREEZE_RATIO.ln() / self.cooling.ln()).ceil().max(1.0) as usize
        }
    }
}

/// SplitMix64 finalizer over a base seed and a path of stream ids.
pub fn mix_seed(seed: u64, path: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(splitmix(seed), |acc, &id| splitmix(acc ^ splitmix(id)))
}

fn rng_for(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, path))
}

fn random_mask<R: Rng>(rng: &mut R, k: usize, alpha: usize) -> SubsetMask {
    let bits = index::sample(rng, k, alpha)
        .into_iter()
        .fold(0u64, |b, i| b | 1 << i);
    SubsetMask::from_bits_unchecked(k, bits)
}

fn nth_set_bit(mut bits: u64, n: usize) -> usize {
    for _ in 0..n {
        bits &= bits - 1;
    }
    bits.trailing_zeros() as usize
}

fn check_args(k: usize, alpha: usize) -> Result<()> {
    if alpha == 0 || alpha > k {
        return Err(Error::Argument(format!(
            "alpha must lie in 1..={k}, got {alpha}"
        )));
    }
    Ok(())
}

/// Draws `n` failure sets of size α: distinct while `n` fits the tracking
/// budget, with replacement beyond it. Calls `sink` once per chunk.
fn draw_masks(
    k: usize,
    alpha: usize,
    n: usize,
    seed: u64,
    mut sink: impl FnMut(&[SubsetMask]) -> Result<()>,
) -> Result<()> {
    let mut rng = rng_for(seed, &[0xd2a3]);
    if n <= DISTINCT_SAMPLE_LIMIT {
        let mut seen = HashSet::with_capacity(n);
        let mut masks = Vec::with_capacity(n);
        while masks.len() < n {
            let m = random_mask(&mut rng, k, alpha);
            if seen.insert(m.bits()) {
                masks.push(m);
            }
        }
        return sink(&masks);
    }
    let mut left = n;
    let mut chunk = Vec::with_capacity(CHUNK);
    while left > 0 {
        chunk.clear();
        let take = left.min(CHUNK);
        chunk.extend((0..take).map(|_| random_mask(&mut rng, k, alpha)));
        sink(&chunk)?;
        left -= take;
    }
    Ok(())
}

pub(crate) fn sample_extreme<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    num_samples: usize,
    seed: u64,
    dir: Direction,
) -> Result<(f64, SubsetMask)> {
    let k = f.ground_size();
    check_args(k, alpha)?;
    if num_samples == 0 {
        return Err(Error::Argument("num_samples must be at least 1".into()));
    }
    if binomial(k, alpha) <= num_samples as u128 {
        let masks: Vec<SubsetMask> = FixedSizeSubsets::new(k, alpha).collect();
        return Ok(best_of(f, &masks, dir)?.expect("non-empty enumeration"));
    }
    let mut best: Option<(f64, SubsetMask)> = None;
    draw_masks(k, alpha, num_samples, seed, |chunk| {
        if let Some(c) = best_of(f, chunk, dir)? {
            best = Some(best.map_or(c, |b| dir.pick(b, c)));
        }
        Ok(())
    })?;
    best.ok_or_else(|| Error::Domain("sampling produced no admissible subset".into()))
}

pub(crate) fn sample_mean<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    let k = f.ground_size();
    check_args(k, alpha)?;
    let mut total = 0.0;
    let mut count = 0usize;
    draw_masks(k, alpha, num_samples, seed, |chunk| {
        total += mean_of(f, chunk)? * chunk.len() as f64;
        count += chunk.len();
        Ok(())
    })?;
    Ok(total / count as f64)
}

/// Minimum loss over randomly sampled failure sets of size α, with the
/// smallest winning mask among ties. Exhaustive when `C(k, α) <= num_samples`.
pub fn sample_min_bipartition<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    num_samples: usize,
    seed: u64,
) -> Result<(f64, SubsetMask)> {
    sample_extreme(f, alpha, num_samples, seed, Direction::Min)
}

/// Minimum loss found by simulated annealing over failure sets of size α.
///
/// A move swaps one failed element with one survivor, so the cardinality
/// never changes. Acceptance is Metropolis; the best loss seen over all
/// restarts is returned.
pub fn anneal_min_bipartition<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<(f64, SubsetMask)> {
    anneal_extreme(f, alpha, schedule, seed, Direction::Min)
}

pub(crate) fn anneal_extreme<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    schedule: &AnnealSchedule,
    seed: u64,
    dir: Direction,
) -> Result<(f64, SubsetMask)> {
    let k = f.ground_size();
    check_args(k, alpha)?;
    schedule.validate()?;
    if alpha == k {
        let full = SubsetMask::full(k)?;
        return Ok((checked_loss(f, full)?, full));
    }
    let t0 = match schedule.initial_temp {
        Some(t) => t,
        None => auto_temperature(f, alpha, seed)?,
    };
    let runs: Vec<(f64, SubsetMask)> = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| anneal_once(f, alpha, schedule, t0, seed, r as u64, dir))
        .collect::<Result<_>>()?;
    Ok(runs
        .into_iter()
        .reduce(|a, b| dir.pick(a, b))
        .expect("at least one restart"))
}

/// Sample standard deviation of the losses of random failure sets.
fn auto_temperature<F: SetFunction + ?Sized>(f: &F, alpha: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_for(seed, &[0x7e47]);
    let k = f.ground_size();
    let losses: Vec<f64> = (0..AUTO_TEMP_PROBES)
        .map(|_| checked_loss(f, random_mask(&mut rng, k, alpha)))
        .collect::<Result<_>>()?;
    let n = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / n;
    let var = losses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    Ok(if sd.is_finite() && sd > MIN_TEMP { sd } else { MIN_TEMP })
}

fn anneal_once<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    schedule: &AnnealSchedule,
    t0: f64,
    seed: u64,
    restart: u64,
    dir: Direction,
) -> Result<(f64, SubsetMask)> {
    let k = f.ground_size();
    let mut rng = rng_for(seed, &[0xa77e, restart]);
    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut eval = |m: SubsetMask| -> Result<f64> {
        if let Some(&v) = memo.get(&m.bits()) {
            return Ok(v);
        }
        let v = checked_loss(f, m)?;
        memo.insert(m.bits(), v);
        Ok(v)
    };

    let mut cur = random_mask(&mut rng, k, alpha);
    let mut cur_v = eval(cur)?;
    let mut best = (cur_v, cur);
    let mut temp = t0;
    for _ in 0..schedule.levels() {
        for _ in 0..schedule.steps_per_temp {
            let out = nth_set_bit(cur.bits(), rng.random_range(0..alpha));
            let inn = nth_set_bit(cur.complement().bits(), rng.random_range(0..k - alpha));
            let cand = cur.without(out).with(inn);
            let v = eval(cand)?;
            let d = dir.delta(cur_v, v);
            if d <= 0.0 || rng.random::<f64>() < (-d / temp).exp() {
                cur = cand;
                cur_v = v;
                best = dir.pick(best, (v, cand));
            }
        }
        temp *= schedule.cooling;
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub alpha: usize,
    pub value: f64,
    pub previous: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    /// Running maximum of the α-synergies, present when there were violations.
    pub repaired: Option<Vec<f64>>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Slack below which a decrease in α-synergy is treated as rounding.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Flags every α ≥ 2 whose α-synergy is below the previous scale's.
pub fn monotonicity_check(spectrum: &BackboneSpectrum) -> ViolationReport {
    let violations: Vec<Violation> = spectrum
        .alpha_synergy
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] < w[0] - MONOTONE_SLACK)
        .map(|(i, w)| Violation {
            alpha: i + 2,
            value: w[1],
            previous: w[0],
        })
        .collect();
    let repaired = (!violations.is_empty()).then(|| running_max(&spectrum.alpha_synergy));
    ViolationReport {
        violations,
        repaired,
    }
}

fn running_max(values: &[f64]) -> Vec<f64> {
    let mut acc = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            acc = acc.max(v);
            acc
        })
        .collect()
}

/// Replaces the α-synergies by their running maximum and recomputes the
/// partial atoms. Violations of the raw series stay recorded.
pub fn enforce_monotone(spectrum: &BackboneSpectrum) -> BackboneSpectrum {
    let repaired = running_max(&spectrum.alpha_synergy);
    if repaired == spectrum.alpha_synergy {
        return spectrum.clone();
    }
    let mut out = spectrum.clone();
    out.monotone_violations = monotonicity_check(spectrum)
        .violations
        .iter()
        .map(|v| v.alpha)
        .collect();
    out.partial_atoms = partial_atoms(&repaired);
    out.alpha_synergy = repaired;
    out.repaired = true;
    out
}
