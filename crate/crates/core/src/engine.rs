//! Generic α-synergy decomposition of a monotone set function.
//!
//! For a set function `f` on a ground set of `k` elements, the α-synergy is
//! the loss `f(full) - f(survivors)` aggregated (min, max or mean) over all
//! failure sets of size α. Partial atoms are the successive differences of
//! the α-synergies and sum to `f(full) - f(∅)`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::search::{self, AnnealSchedule};
use crate::subset::{binomial, FixedSizeSubsets, SubsetMask};

/// Largest ground set the exhaustive backbone sweep accepts (2^24 subsets).
pub const EXACT_GROUND_LIMIT: usize = 24;
/// Largest number of size-α subsets a single exhaustive α evaluation accepts.
pub const EXACT_SUBSET_LIMIT: u128 = 1 << 24;
/// MEAN is computed by full enumeration up to this many subsets.
pub const MEAN_EXACT_LIMIT: u128 = 1_000_000;
/// Largest ground set [`verify_desiderata`] will check exhaustively.
pub const DESIDERATA_LIMIT: usize = 20;

const PAR_THRESHOLD: usize = 2048;

/// A set function over a ground set of `ground_size` elements.
///
/// Implementors must be pure: the same subset always evaluates to the same
/// value, independent of call order or thread.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;

    fn label(&self) -> String {
        "f".to_string()
    }

    /// `f` evaluated on the surviving elements.
    fn value(&self, survivors: SubsetMask) -> Result<f64>;

    /// `f(full) - f(ground \ failed)`.
    fn loss(&self, failed: SubsetMask) -> Result<f64> {
        let full = SubsetMask::full(self.ground_size())?;
        Ok(self.value(full)? - self.value(failed.complement())?)
    }
}

/// How a closure passed to [`ClosureSetFunction`] is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetFunctionMode {
    /// The closure returns `f(survivors)`.
    RawF,
    /// The closure returns the loss for a failure set. The raw function is
    /// taken to be anchored at `f(∅) = 0`.
    Loss,
}

/// Adapts a plain closure into a [`SetFunction`].
pub struct ClosureSetFunction<E> {
    ground_size: usize,
    label: String,
    mode: SetFunctionMode,
    eval: E,
    // f(full) for RawF, loss(ground) for Loss
    anchor: f64,
}

impl<E> ClosureSetFunction<E>
where
    E: Fn(SubsetMask) -> f64 + Sync,
{
    pub fn new(ground_size: usize, label: &str, mode: SetFunctionMode, eval: E) -> Result<Self> {
        let full = SubsetMask::full(ground_size)?;
        let anchor = eval(full);
        Ok(Self {
            ground_size,
            label: label.to_string(),
            mode,
            eval,
            anchor,
        })
    }

    pub fn raw(ground_size: usize, label: &str, eval: E) -> Result<Self> {
        Self::new(ground_size, label, SetFunctionMode::RawF, eval)
    }

    pub fn loss(ground_size: usize, label: &str, eval: E) -> Result<Self> {
        Self::new(ground_size, label, SetFunctionMode::Loss, eval)
    }
}

impl<E> SetFunction for ClosureSetFunction<E>
where
    E: Fn(SubsetMask) -> f64 + Sync,
{
    fn ground_size(&self) -> usize {
        self.ground_size
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn value(&self, survivors: SubsetMask) -> Result<f64> {
        Ok(match self.mode {
            SetFunctionMode::RawF => (self.eval)(survivors),
            SetFunctionMode::Loss => self.anchor - (self.eval)(survivors.complement()),
        })
    }

    fn loss(&self, failed: SubsetMask) -> Result<f64> {
        Ok(match self.mode {
            SetFunctionMode::RawF => self.anchor - (self.eval)(failed.complement()),
            SetFunctionMode::Loss => (self.eval)(failed),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregatorKind {
    /// Information guaranteed lost whichever α elements fail.
    Min,
    /// Worst-case loss over failure sets of size α.
    Max,
    /// Expected loss over uniformly chosen failure sets of size α.
    Mean,
}

impl fmt::Display for AggregatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregatorKind::Min => "min",
            AggregatorKind::Max => "max",
            AggregatorKind::Mean => "mean",
        })
    }
}

impl std::str::FromStr for AggregatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(AggregatorKind::Min),
            "max" => Ok(AggregatorKind::Max),
            "mean" => Ok(AggregatorKind::Mean),
            other => Err(Error::Argument(format!(
                "unknown aggregator '{other}' (expected min, max or mean)"
            ))),
        }
    }
}

/// How the optimum over size-α failure sets is found.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchStrategy {
    Exact,
    Sampled { num_samples: usize },
    Annealed(AnnealSchedule),
}

impl SearchStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            SearchStrategy::Exact => Ok(()),
            SearchStrategy::Sampled { num_samples } if *num_samples == 0 => Err(
                Error::Argument("sampled strategy needs at least one sample".into()),
            ),
            SearchStrategy::Sampled { .. } => Ok(()),
            SearchStrategy::Annealed(s) => s.validate(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SearchStrategy::Exact)
    }

    fn tag(&self, seed: u64) -> String {
        match self {
            SearchStrategy::Exact => "EXACT".to_string(),
            SearchStrategy::Sampled { num_samples } => {
                format!("SAMPLED(n={num_samples},seed={seed})")
            }
            SearchStrategy::Annealed(s) => {
                let temp = s
                    .initial_temp
                    .map_or_else(|| "auto".to_string(), |t| format!("{t}"));
                format!(
                    "ANNEALED(temp={temp},cooling={},steps={},restarts={},seed={seed})",
                    s.cooling, s.steps_per_temp, s.restarts
                )
            }
        }
    }
}

/// Everything that controls a decomposition besides the function itself.
#[derive(Clone, Debug, PartialEq)]
pub struct BackboneConfig {
    pub aggregator: AggregatorKind,
    pub strategy: SearchStrategy,
    pub seed: u64,
    /// Sample size for MEAN when full enumeration exceeds [`MEAN_EXACT_LIMIT`].
    pub mean_sample_size: usize,
    /// Replace every spectrum by its running maximum before use.
    pub enforce_monotone: bool,
}

impl BackboneConfig {
    pub fn new(aggregator: AggregatorKind, strategy: SearchStrategy) -> Self {
        Self {
            aggregator,
            strategy,
            seed: 0,
            mean_sample_size: 100_000,
            enforce_monotone: false,
        }
    }

    pub fn exact(aggregator: AggregatorKind) -> Self {
        Self::new(aggregator, SearchStrategy::Exact)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same configuration with an independent seed stream, used for the
    /// per-state decompositions inside an expectation.
    pub fn stream(&self, id: u64) -> Self {
        let mut c = self.clone();
        c.seed = search::mix_seed(self.seed, &[0x5eed, id]);
        c
    }

    pub fn strategy_tag(&self) -> String {
        self.strategy.tag(self.seed)
    }
}

/// The per-scale output of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackboneSpectrum {
    /// α-synergy for α = 1..k (index 0 holds α = 1).
    pub alpha_synergy: Vec<f64>,
    pub partial_atoms: Vec<f64>,
    /// Winning failure set per α; absent for MEAN and for averaged spectra.
    pub winning_subsets: Vec<Option<SubsetMask>>,
    pub aggregator: AggregatorKind,
    pub strategy: String,
    /// α values (1-based) where the raw α-synergy decreased.
    pub monotone_violations: Vec<usize>,
    /// True when the values were replaced by their running maximum.
    pub repaired: bool,
}

impl BackboneSpectrum {
    pub fn from_values(
        alpha_synergy: Vec<f64>,
        winning_subsets: Vec<Option<SubsetMask>>,
        aggregator: AggregatorKind,
        strategy: String,
    ) -> Self {
        let partial_atoms = partial_atoms(&alpha_synergy);
        let mut s = Self {
            alpha_synergy,
            partial_atoms,
            winning_subsets,
            aggregator,
            strategy,
            monotone_violations: Vec::new(),
            repaired: false,
        };
        s.monotone_violations = search::monotonicity_check(&s)
            .violations
            .iter()
            .map(|v| v.alpha)
            .collect();
        s
    }

    pub fn len(&self) -> usize {
        self.alpha_synergy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_synergy.is_empty()
    }

    /// Σ partial atoms, which equals the top-scale synergy.
    pub fn total(&self) -> f64 {
        self.partial_atoms.iter().sum()
    }
}

/// Result of a single-scale evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaSynergy {
    pub value: f64,
    pub winner: Option<SubsetMask>,
    /// Set when a MEAN value came from a sample of this size.
    pub mean_sampled: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Min,
    Max,
}

impl Direction {
    /// Orders `(value, mask)` candidates: better value wins, ties go to the
    /// smaller mask.
    #[inline]
    pub(crate) fn pick(self, a: (f64, SubsetMask), b: (f64, SubsetMask)) -> (f64, SubsetMask) {
        let b_better = match self {
            Direction::Min => b.0 < a.0,
            Direction::Max => b.0 > a.0,
        };
        if b_better || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    }

    /// Signed change used by the annealer: negative means improvement.
    #[inline]
    pub(crate) fn delta(self, from: f64, to: f64) -> f64 {
        match self {
            Direction::Min => to - from,
            Direction::Max => from - to,
        }
    }
}

pub(crate) fn checked_loss<F: SetFunction + ?Sized>(f: &F, failed: SubsetMask) -> Result<f64> {
    let v = f.loss(failed)?;
    if v.is_nan() {
        return Err(Error::Domain(format!(
            "{} evaluated to NaN on failure set {failed:?}",
            f.label()
        )));
    }
    Ok(v)
}

/// Best `(loss, mask)` over the given masks; deterministic for any worker count.
pub(crate) fn best_of<F: SetFunction + ?Sized>(
    f: &F,
    masks: &[SubsetMask],
    dir: Direction,
) -> Result<Option<(f64, SubsetMask)>> {
    let eval = |m: &SubsetMask| checked_loss(f, *m).map(|v| (v, *m));
    if masks.len() < PAR_THRESHOLD {
        let mut best: Option<(f64, SubsetMask)> = None;
        for m in masks {
            let c = eval(m)?;
            best = Some(best.map_or(c, |b| dir.pick(b, c)));
        }
        return Ok(best);
    }
    masks
        .par_iter()
        .map(eval)
        .try_fold(
            || None,
            |acc: Option<(f64, SubsetMask)>, c| c.map(|c| Some(acc.map_or(c, |b| dir.pick(b, c)))),
        )
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(dir.pick(a, b)),
                    (a, None) => a,
                    (None, b) => b,
                })
            },
        )
}

/// Mean loss over the given masks, summed in mask order.
pub(crate) fn mean_of<F: SetFunction + ?Sized>(f: &F, masks: &[SubsetMask]) -> Result<f64> {
    let values: Vec<f64> = if masks.len() < PAR_THRESHOLD {
        masks.iter().map(|m| checked_loss(f, *m)).collect::<Result<_>>()?
    } else {
        masks
            .par_iter()
            .map(|m| checked_loss(f, *m))
            .collect::<Result<_>>()?
    };
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn check_alpha(k: usize, alpha: usize) -> Result<()> {
    if alpha == 0 || alpha > k {
        return Err(Error::Argument(format!(
            "alpha must lie in 1..={k}, got {alpha}"
        )));
    }
    Ok(())
}

/// α-synergy of `f` at one scale.
pub fn alpha_synergy<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    config: &BackboneConfig,
) -> Result<AlphaSynergy> {
    let k = f.ground_size();
    check_alpha(k, alpha)?;
    config.strategy.validate()?;
    let count = binomial(k, alpha);
    let seed = search::mix_seed(config.seed, &[alpha as u64]);

    let dir = match config.aggregator {
        AggregatorKind::Min => Direction::Min,
        AggregatorKind::Max => Direction::Max,
        AggregatorKind::Mean => return mean_synergy(f, alpha, count, seed, config),
    };

    let (value, winner) = match &config.strategy {
        SearchStrategy::Exact => {
            if count > EXACT_SUBSET_LIMIT {
                return Err(Error::TooLarge {
                    what: "exhaustive search (subsets of one size)",
                    size: count.min(usize::MAX as u128) as usize,
                    limit: EXACT_SUBSET_LIMIT as usize,
                });
            }
            let masks: Vec<SubsetMask> = FixedSizeSubsets::new(k, alpha).collect();
            best_of(f, &masks, dir)?.expect("at least one subset of an admissible size")
        }
        SearchStrategy::Sampled { num_samples } => {
            search::sample_extreme(f, alpha, *num_samples, seed, dir)?
        }
        SearchStrategy::Annealed(schedule) => search::anneal_extreme(f, alpha, schedule, seed, dir)?,
    };
    Ok(AlphaSynergy {
        value,
        winner: Some(winner),
        mean_sampled: None,
    })
}

fn mean_synergy<F: SetFunction + ?Sized>(
    f: &F,
    alpha: usize,
    count: u128,
    seed: u64,
    config: &BackboneConfig,
) -> Result<AlphaSynergy> {
    let k = f.ground_size();
    let budget = match config.strategy {
        SearchStrategy::Sampled { num_samples } => num_samples as u128,
        _ => MEAN_EXACT_LIMIT,
    };
    let (value, mean_sampled) = if count <= budget {
        let masks: Vec<SubsetMask> = FixedSizeSubsets::new(k, alpha).collect();
        (mean_of(f, &masks)?, None)
    } else {
        let n = match config.strategy {
            SearchStrategy::Sampled { num_samples } => num_samples,
            _ => config.mean_sample_size.max(1),
        };
        (search::sample_mean(f, alpha, n, seed)?, Some(n))
    };
    Ok(AlphaSynergy {
        value,
        winner: None,
        mean_sampled,
    })
}

/// Full backbone spectrum of `f` for α = 1..k.
pub fn backbone<F: SetFunction + ?Sized>(f: &F, config: &BackboneConfig) -> Result<BackboneSpectrum> {
    let k = f.ground_size();
    config.strategy.validate()?;
    if config.strategy.is_exact() && k > EXACT_GROUND_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive backbone sweeps",
            size: k,
            limit: EXACT_GROUND_LIMIT,
        });
    }
    let mut values = Vec::with_capacity(k);
    let mut winners = Vec::with_capacity(k);
    let mut sampled_mean = None;
    for alpha in 1..=k {
        let a = alpha_synergy(f, alpha, config)?;
        values.push(a.value);
        winners.push(a.winner);
        sampled_mean = sampled_mean.or(a.mean_sampled);
    }
    let mut tag = config.strategy_tag();
    if let Some(n) = sampled_mean {
        tag.push_str(&format!("+MEAN_SAMPLED(n={n})"));
    }
    let spectrum = BackboneSpectrum::from_values(values, winners, config.aggregator, tag);
    Ok(if config.enforce_monotone {
        search::enforce_monotone(&spectrum)
    } else {
        spectrum
    })
}

/// Telescoping differences with `syn[0] = 0`.
pub fn partial_atoms(alpha_synergy: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    alpha_synergy
        .iter()
        .map(|&s| {
            let atom = s - prev;
            prev = s;
            atom
        })
        .collect()
}

/// `f(full)` minus the exact minimum 1-synergy: the part of `f` that
/// survives any single failure.
pub fn robustness<F: SetFunction + ?Sized>(f: &F) -> Result<f64> {
    let k = f.ground_size();
    if k == 0 {
        return Err(Error::Argument("robustness needs a non-empty ground set".into()));
    }
    let full = f.value(SubsetMask::full(k)?)?;
    let syn1 = alpha_synergy(f, 1, &BackboneConfig::exact(AggregatorKind::Min))?;
    Ok(full - syn1.value)
}

/// Violations found by [`verify_desiderata`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DesiderataReport {
    /// `(S, S ∪ {i})` pairs with `f(S) > f(S ∪ {i})`.
    pub monotonicity: Vec<(SubsetMask, SubsetMask)>,
    /// Subsets with `f(S) < 0`.
    pub non_negativity: Vec<SubsetMask>,
}

impl DesiderataReport {
    pub fn is_admissible(&self) -> bool {
        self.monotonicity.is_empty() && self.non_negativity.is_empty()
    }
}

/// Exhaustively checks non-negativity and monotonicity of the raw function.
///
/// Monotonicity is checked on covering pairs `S ⊂ S ∪ {i}`; any violating
/// subset/superset pair implies a violating covering pair on a chain
/// between them.
pub fn verify_desiderata<F: SetFunction + ?Sized>(f: &F) -> Result<DesiderataReport> {
    let k = f.ground_size();
    if k > DESIDERATA_LIMIT {
        return Err(Error::TooLarge {
            what: "desiderata verification",
            size: k,
            limit: DESIDERATA_LIMIT,
        });
    }
    let values: Vec<f64> = (0..1u64 << k)
        .into_par_iter()
        .map(|bits| f.value(SubsetMask::from_bits_unchecked(k, bits)))
        .collect::<Result<_>>()?;
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;

    let mut report = DesiderataReport::default();
    for (bits, &v) in values.iter().enumerate() {
        let s = SubsetMask::from_bits_unchecked(k, bits as u64);
        if v < -tol || v.is_nan() {
            report.non_negativity.push(s);
        }
        for i in s.complement().indices() {
            let sup = s.with(i);
            if v > values[sup.bits() as usize] + tol {
                report.monotonicity.push((s, sup));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cardinality(k: usize) -> impl SetFunction {
        ClosureSetFunction::raw(k, "|S|", |s: SubsetMask| s.len() as f64).unwrap()
    }

    #[test]
    fn partial_atoms_telescope() {
        assert_eq!(partial_atoms(&[1.0, 2.0, 3.0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(partial_atoms(&[0.0, 0.0, 1.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(partial_atoms(&[1.0, 1.0, 1.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn top_scale_is_full_minus_empty() {
        let f = ClosureSetFunction::raw(4, "w", |s: SubsetMask| {
            s.indices().map(|i| (i + 1) as f64).sum::<f64>() + 0.5
        })
        .unwrap();
        for agg in [AggregatorKind::Min, AggregatorKind::Max, AggregatorKind::Mean] {
            let a = alpha_synergy(&f, 4, &BackboneConfig::exact(agg)).unwrap();
            assert_abs_diff_eq!(a.value, 10.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn alpha_out_of_range() {
        let f = cardinality(3);
        let c = BackboneConfig::exact(AggregatorKind::Min);
        assert!(matches!(alpha_synergy(&f, 0, &c), Err(Error::Argument(_))));
        assert!(matches!(alpha_synergy(&f, 4, &c), Err(Error::Argument(_))));
    }

    #[test]
    fn additive_function_spectrum() {
        let f = cardinality(3);
        let s = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
        assert_eq!(s.alpha_synergy, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.partial_atoms, vec![1.0, 1.0, 1.0]);
        assert!(s.monotone_violations.is_empty());
        assert_eq!(robustness(&f).unwrap(), 2.0);
    }

    #[test]
    fn winner_ties_break_to_smallest_mask() {
        let f = cardinality(5);
        let a = alpha_synergy(&f, 2, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
        assert_eq!(a.winner.unwrap().bits(), 0b00011);
        let a = alpha_synergy(&f, 2, &BackboneConfig::exact(AggregatorKind::Max)).unwrap();
        assert_eq!(a.winner.unwrap().bits(), 0b00011);
        let a = alpha_synergy(&f, 2, &BackboneConfig::exact(AggregatorKind::Mean)).unwrap();
        assert!(a.winner.is_none());
    }

    #[test]
    fn min_max_mean_order() {
        // weights make single failures unequal
        let f = ClosureSetFunction::raw(3, "w", |s: SubsetMask| {
            [1.0, 2.0, 4.0].iter().enumerate().filter(|(i, _)| s.contains(*i)).map(|(_, w)| w).sum()
        })
        .unwrap();
        let get = |agg| alpha_synergy(&f, 1, &BackboneConfig::exact(agg)).unwrap().value;
        assert_eq!(get(AggregatorKind::Min), 1.0);
        assert_eq!(get(AggregatorKind::Max), 4.0);
        assert_abs_diff_eq!(get(AggregatorKind::Mean), 7.0 / 3.0);
    }

    #[test]
    fn loss_mode_wrapper() {
        let f = ClosureSetFunction::loss(3, "loss", |failed: SubsetMask| 2.0 * failed.len() as f64)
            .unwrap();
        let full = SubsetMask::full(3).unwrap();
        assert_eq!(f.value(full).unwrap(), 6.0);
        assert_eq!(f.value(SubsetMask::empty(3).unwrap()).unwrap(), 0.0);
        assert_eq!(f.loss(SubsetMask::new(3, &[1]).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn desiderata_detects_negative_function() {
        let f = ClosureSetFunction::raw(3, "-|S|", |s: SubsetMask| -(s.len() as f64)).unwrap();
        let r = verify_desiderata(&f).unwrap();
        assert_eq!(r.non_negativity.len(), 7);
        assert!(!r.monotonicity.is_empty());
        assert!(verify_desiderata(&cardinality(4)).unwrap().is_admissible());
        assert!(matches!(verify_desiderata(&cardinality(21)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn exact_refuses_large_ground_sets() {
        let f = cardinality(30);
        let r = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min));
        assert!(matches!(r, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn mean_falls_back_to_sampling() {
        let f = cardinality(40);
        let mut c = BackboneConfig::exact(AggregatorKind::Mean);
        c.mean_sample_size = 500;
        let a = alpha_synergy(&f, 20, &c).unwrap();
        assert_eq!(a.mean_sampled, Some(500));
        assert_abs_diff_eq!(a.value, 20.0, epsilon = 1e-12);
        let a = alpha_synergy(&f, 2, &c).unwrap();
        assert_eq!(a.mean_sampled, None);
    }
}
