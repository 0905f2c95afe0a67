//! Backbone decompositions of entropy and of the measures built from
//! Kullback-Leibler divergences: negentropy, total correlation and
//! single-target mutual information.
//!
//! Every divergence `D(P||Q)` is decomposed per posterior-support state as
//! the difference between the partial atoms of the local entropy under the
//! prior and under the posterior, then averaged under the posterior.

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::JointDistribution;
use crate::engine::{backbone, BackboneConfig, BackboneSpectrum, SetFunction};
use crate::error::{Error, Result};
use crate::marginal::{MarginalCache, MarginalSource, ProductReference};
use crate::subset::SubsetMask;

/// Local entropy `h(x_S) = -log2 P(x_S)` of one fixed state as a function
/// of the surviving variables `S`.
pub struct LocalEntropy<'a, M: MarginalSource + ?Sized> {
    source: &'a M,
    state: &'a [u32],
    full: f64,
}

impl<'a, M: MarginalSource + ?Sized> LocalEntropy<'a, M> {
    pub fn new(source: &'a M, state: &'a [u32]) -> Result<Self> {
        if state.len() != source.num_vars() {
            return Err(Error::Argument(format!(
                "state {state:?} has length {}, expected {}",
                state.len(),
                source.num_vars()
            )));
        }
        let p = source.prob(state);
        if p <= 0.0 {
            return Err(Error::OutsideSupport(state.to_vec()));
        }
        Ok(Self {
            source,
            state,
            full: -p.log2(),
        })
    }

    pub fn full_value(&self) -> f64 {
        self.full
    }
}

impl<M: MarginalSource + ?Sized> SetFunction for LocalEntropy<'_, M> {
    fn ground_size(&self) -> usize {
        self.source.num_vars()
    }

    fn label(&self) -> String {
        format!("h({:?})", self.state)
    }

    fn value(&self, survivors: SubsetMask) -> Result<f64> {
        if survivors.is_empty() {
            return Ok(0.0);
        }
        Ok(-self.source.marginal_prob(self.state, survivors).log2())
    }

    fn loss(&self, failed: SubsetMask) -> Result<f64> {
        Ok(self.full - self.value(failed.complement())?)
    }
}

/// Probability-weighted average of spectra over the same ground set.
pub(crate) fn average_spectra(
    weighted: &[(f64, BackboneSpectrum)],
    config: &BackboneConfig,
    k: usize,
) -> BackboneSpectrum {
    let mut syn = vec![0.0; k];
    let mut atoms = vec![0.0; k];
    let mut violations = Vec::new();
    let mut repaired = false;
    let mut tag = None;
    for (w, s) in weighted {
        for a in 0..k {
            syn[a] += w * s.alpha_synergy[a];
            atoms[a] += w * s.partial_atoms[a];
        }
        violations.extend_from_slice(&s.monotone_violations);
        repaired |= s.repaired;
        tag.get_or_insert_with(|| s.strategy.clone());
    }
    violations.sort_unstable();
    violations.dedup();
    BackboneSpectrum {
        alpha_synergy: syn,
        partial_atoms: atoms,
        winning_subsets: vec![None; k],
        aggregator: config.aggregator,
        strategy: tag.unwrap_or_else(|| config.strategy_tag()),
        monotone_violations: violations,
        repaired,
    }
}

fn local_spectrum<M: MarginalSource + ?Sized>(
    source: &M,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<BackboneSpectrum> {
    backbone(&LocalEntropy::new(source, state)?, config)
}

/// Backbone of the local entropy of one state; atoms sum to `h(state)`.
pub fn entropy_backbone_local(
    dist: &JointDistribution,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<BackboneSpectrum> {
    dist.local_entropy(state)?;
    local_spectrum(&MarginalCache::new(dist.clone()), state, config)
}

/// Expected entropy backbone: local spectra averaged under the pmf.
pub fn entropy_backbone_expected(
    dist: &JointDistribution,
    config: &BackboneConfig,
) -> Result<BackboneSpectrum> {
    let cache = MarginalCache::new(dist.clone());
    expected_spectrum(&cache, config)
}

fn expected_spectrum(cache: &MarginalCache, config: &BackboneConfig) -> Result<BackboneSpectrum> {
    let dist = cache.distribution();
    let support: Vec<(&[u32], f64)> = dist.support().collect();
    let weighted: Vec<(f64, BackboneSpectrum)> = support
        .par_iter()
        .enumerate()
        .map(|(i, (state, p))| Ok((*p, local_spectrum(cache, state, &config.stream(i as u64))?)))
        .collect::<Result<_>>()?;
    Ok(average_spectra(&weighted, config, dist.num_vars()))
}

/// Decomposition of a divergence into per-scale atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceSpectrum {
    /// Prior atom minus posterior atom per scale; may be negative.
    pub atoms: Vec<f64>,
    pub prior_spectrum: BackboneSpectrum,
    pub posterior_spectrum: BackboneSpectrum,
    /// The divergence computed directly from the two distributions.
    pub total: f64,
    pub warnings: Vec<String>,
}

impl DivergenceSpectrum {
    fn from_parts(prior: BackboneSpectrum, posterior: BackboneSpectrum, total: f64) -> Self {
        let atoms = prior
            .partial_atoms
            .iter()
            .zip(&posterior.partial_atoms)
            .map(|(q, p)| q - p)
            .collect();
        Self {
            atoms,
            prior_spectrum: prior,
            posterior_spectrum: posterior,
            total,
            warnings: Vec::new(),
        }
    }

    pub fn atom_sum(&self) -> f64 {
        self.atoms.iter().sum()
    }

    /// Cumulative α-synergistic divergence, `Σ_{β ≤ α} atoms[β]`.
    pub fn synergy(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.atoms
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect()
    }
}

fn local_divergence<Q: MarginalSource + ?Sized>(
    posterior: &MarginalCache,
    prior: &Q,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<(BackboneSpectrum, BackboneSpectrum)> {
    if prior.prob(state) <= 0.0 {
        return Err(Error::KlUndefined(state.to_vec()));
    }
    let q = local_spectrum(prior, state, &config.stream(0))?;
    let p = local_spectrum(posterior, state, &config.stream(1))?;
    Ok((q, p))
}

fn divergence_backbone<Q: MarginalSource + ?Sized>(
    posterior: &MarginalCache,
    prior: &Q,
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let dist = posterior.distribution();
    let k = dist.num_vars();
    if prior.num_vars() != k {
        return Err(Error::Argument(format!(
            "prior over {} variables, posterior over {k}",
            prior.num_vars()
        )));
    }
    let support: Vec<(&[u32], f64)> = dist.support().collect();
    let mut total = 0.0;
    for (state, p) in &support {
        let q = prior.prob(state);
        if q <= 0.0 {
            return Err(Error::KlUndefined(state.to_vec()));
        }
        total += p * (p / q).log2();
    }
    let pairs: Vec<(f64, BackboneSpectrum, BackboneSpectrum)> = support
        .par_iter()
        .enumerate()
        .map(|(i, (state, p))| {
            let (q, ps) = local_divergence(posterior, prior, state, &config.stream(i as u64))?;
            Ok((*p, q, ps))
        })
        .collect::<Result<_>>()?;
    let (prior_w, post_w): (Vec<_>, Vec<_>) = pairs
        .into_iter()
        .map(|(w, q, p)| ((w, q), (w, p)))
        .unzip();
    Ok(DivergenceSpectrum::from_parts(
        average_spectra(&prior_w, config, k),
        average_spectra(&post_w, config, k),
        total,
    ))
}

fn local_divergence_backbone<Q: MarginalSource + ?Sized>(
    posterior: &MarginalCache,
    prior: &Q,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let p = posterior.distribution().local_entropy(state)?;
    let (qs, ps) = local_divergence(posterior, prior, state, config)?;
    let total = -prior.prob(state).log2() - p;
    Ok(DivergenceSpectrum::from_parts(qs, ps, total))
}

fn check_compatible(posterior: &JointDistribution, prior: &JointDistribution) -> Result<()> {
    if posterior.alphabet_sizes() != prior.alphabet_sizes() || posterior.names() != prior.names() {
        return Err(Error::Argument(format!(
            "posterior variables {:?} with alphabets {:?} do not match prior {:?} with {:?}",
            posterior.names(),
            posterior.alphabet_sizes(),
            prior.names(),
            prior.alphabet_sizes()
        )));
    }
    Ok(())
}

/// Expected backbone of `D(posterior || prior)`.
pub fn kl_backbone(
    posterior: &JointDistribution,
    prior: &JointDistribution,
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    check_compatible(posterior, prior)?;
    divergence_backbone(
        &MarginalCache::new(posterior.clone()),
        &MarginalCache::new(prior.clone()),
        config,
    )
}

/// State-resolved backbone of `log2 P(x)/Q(x)`.
pub fn kl_backbone_local(
    posterior: &JointDistribution,
    prior: &JointDistribution,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    check_compatible(posterior, prior)?;
    local_divergence_backbone(
        &MarginalCache::new(posterior.clone()),
        &MarginalCache::new(prior.clone()),
        state,
        config,
    )
}

/// Divergence from the uniform distribution over the alphabet product.
pub fn negentropy_backbone(
    dist: &JointDistribution,
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let prior = ProductReference::uniform(dist.alphabet_sizes());
    divergence_backbone(&MarginalCache::new(dist.clone()), &prior, config)
}

pub fn negentropy_backbone_local(
    dist: &JointDistribution,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let prior = ProductReference::uniform(dist.alphabet_sizes());
    local_divergence_backbone(&MarginalCache::new(dist.clone()), &prior, state, config)
}

/// Divergence from the product of first-order marginals.
pub fn total_correlation_backbone(
    dist: &JointDistribution,
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let prior = ProductReference::independent(dist);
    divergence_backbone(&MarginalCache::new(dist.clone()), &prior, config)
}

pub fn total_correlation_backbone_local(
    dist: &JointDistribution,
    state: &[u32],
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let prior = ProductReference::independent(dist);
    local_divergence_backbone(&MarginalCache::new(dist.clone()), &prior, state, config)
}

/// Which KL form of `I(X;Y)` is decomposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MiFormulation {
    /// `E_y[D(P(X|y) || P(X))]`: one atom per source.
    Conditional,
    /// `D(P(X,Y) || P(X)P(Y))`: one atom per source plus one for the target.
    Joint,
}

/// Backbone of the mutual information between the sources (all variables
/// except `target`) and the target variable.
pub fn mi_backbone(
    joint: &JointDistribution,
    target: usize,
    form: MiFormulation,
    config: &BackboneConfig,
) -> Result<DivergenceSpectrum> {
    let k = joint.num_vars();
    if target >= k {
        return Err(Error::Argument(format!(
            "target index {target} out of range for {k} variables"
        )));
    }
    if k < 2 {
        return Err(Error::Argument(
            "mutual information needs at least one source besides the target".into(),
        ));
    }
    let sources: Vec<usize> = (0..k).filter(|&i| i != target).collect();
    let target_marginal = &joint.first_order_marginals()[target];
    let slices: Vec<(u32, f64)> = target_marginal
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(y, &p)| (y as u32, p))
        .collect();

    if slices.len() == 1 {
        let (spectrum_dist, n) = match form {
            MiFormulation::Conditional => {
                (joint.marginalize(SubsetMask::new(k, &sources)?)?, k - 1)
            }
            MiFormulation::Joint => (joint.clone(), k),
        };
        let spectrum = entropy_backbone_expected(&spectrum_dist, config)?;
        let mut out = DivergenceSpectrum::from_parts(spectrum.clone(), spectrum, 0.0);
        out.atoms = vec![0.0; n];
        out.warnings
            .push(format!("target {target} is degenerate (single value); all atoms are zero"));
        return Ok(out);
    }

    match form {
        MiFormulation::Joint => {
            let prior = ProductReference::blocks(joint, &[sources, vec![target]])?;
            divergence_backbone(&MarginalCache::new(joint.clone()), &prior, config)
        }
        MiFormulation::Conditional => {
            let px = MarginalCache::new(joint.marginalize(SubsetMask::new(k, &sources)?)?);
            let mut prior_w = Vec::with_capacity(slices.len());
            let mut post_w = Vec::with_capacity(slices.len());
            let mut total = 0.0;
            for &(y, py) in &slices {
                let post = MarginalCache::new(joint.condition(target, y)?);
                let slice_config = config.stream(0x5_1ce0_0000 + y as u64);
                let d = divergence_backbone(&post, &px, &slice_config)?;
                total += py * d.total;
                prior_w.push((py, d.prior_spectrum));
                post_w.push((py, d.posterior_spectrum));
            }
            Ok(DivergenceSpectrum::from_parts(
                average_spectra(&prior_w, config, k - 1),
                average_spectra(&post_w, config, k - 1),
                total,
            ))
        }
    }
}

/// `D(P||Q)` in bits.
pub fn kl_divergence(posterior: &JointDistribution, prior: &JointDistribution) -> Result<f64> {
    check_compatible(posterior, prior)?;
    posterior.support().try_fold(0.0, |acc, (s, p)| {
        let q = prior.prob(s);
        if q <= 0.0 {
            Err(Error::KlUndefined(s.to_vec()))
        } else {
            Ok(acc + p * (p / q).log2())
        }
    })
}

/// `Σ log2|A_i| - H(X)` in bits.
pub fn negentropy(dist: &JointDistribution) -> f64 {
    let max: f64 = dist.alphabet_sizes().iter().map(|&a| (a as f64).log2()).sum();
    max - dist.expected_entropy()
}

/// `Σ H(X_i) - H(X)` in bits.
pub fn total_correlation(dist: &JointDistribution) -> f64 {
    let marginal_sum: f64 = dist
        .first_order_marginals()
        .iter()
        .map(|m| m.iter().filter(|&&p| p > 0.0).map(|p| -p * p.log2()).sum::<f64>())
        .sum();
    marginal_sum - dist.expected_entropy()
}

/// `H(X) + H(Y) - H(X,Y)` in bits, with `Y` the target variable.
pub fn mutual_information(joint: &JointDistribution, target: usize) -> Result<f64> {
    let k = joint.num_vars();
    let y = SubsetMask::new(k, &[target])?;
    let hx = joint.marginalize(y.complement())?.expected_entropy();
    let hy = joint.marginalize(y)?.expected_entropy();
    Ok(hx + hy - joint.expected_entropy())
}
