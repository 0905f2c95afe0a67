//! C ABI over `backbone-core`.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns a
//! [`BbStatus`]; on failure a description is available from
//! [`bb_last_error_message`] on the same thread. Output pointers are written
//! only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use backbone_core::graph::structural_synergy_backbone;
use backbone_core::measures::{self, DivergenceSpectrum, MiFormulation};
use backbone_core::{
    AggregatorKind, AnnealSchedule, BackboneConfig, BackboneSpectrum, Edge, Error,
    JointDistribution, SearchStrategy, WeightedGraph,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDistribution = 3,
    InvalidGraph = 4,
    Domain = 5,
    OutsideSupport = 6,
    KlUndefined = 7,
    TooLarge = 8,
    Parse = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BbAggregator {
    Min = 0,
    Max = 1,
    Mean = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BbStrategy {
    Exact = 0,
    Sampled = 1,
    Annealed = 2,
}

/// Decomposition settings. Fill with [`bb_config_default`] before editing.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BbConfig {
    pub aggregator: BbAggregator,
    pub strategy: BbStrategy,
    /// Failure sets drawn per scale under `BB_STRATEGY_SAMPLED`.
    pub num_samples: usize,
    /// Initial annealing temperature; non-positive selects it automatically.
    pub initial_temp: f64,
    pub cooling: f64,
    pub steps_per_temp: usize,
    pub restarts: usize,
    pub seed: u64,
    pub enforce_monotone: bool,
}

pub struct BbDistribution {
    inner: JointDistribution,
}

pub struct BbGraph {
    inner: WeightedGraph,
}

/// Result of a decomposition: per-scale synergy, partial atoms and, where
/// defined, the winning failure set of each scale.
pub struct BbSpectrum {
    synergy: Vec<f64>,
    atoms: Vec<f64>,
    winners: Vec<Option<u64>>,
    total: f64,
    violations: Vec<usize>,
    repaired: bool,
}

impl From<BackboneSpectrum> for BbSpectrum {
    fn from(s: BackboneSpectrum) -> Self {
        Self {
            total: s.total(),
            winners: s.winning_subsets.iter().map(|w| w.map(|m| m.bits())).collect(),
            synergy: s.alpha_synergy,
            atoms: s.partial_atoms,
            violations: s.monotone_violations,
            repaired: s.repaired,
        }
    }
}

impl From<DivergenceSpectrum> for BbSpectrum {
    fn from(d: DivergenceSpectrum) -> Self {
        let mut violations = d.prior_spectrum.monotone_violations.clone();
        violations.extend(&d.posterior_spectrum.monotone_violations);
        violations.sort_unstable();
        violations.dedup();
        Self {
            synergy: d.synergy(),
            winners: vec![None; d.atoms.len()],
            total: d.total,
            repaired: d.prior_spectrum.repaired || d.posterior_spectrum.repaired,
            atoms: d.atoms,
            violations,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BbStatus {
    match err {
        Error::InvalidDistribution(_) => BbStatus::InvalidDistribution,
        Error::OutsideSupport(_) => BbStatus::OutsideSupport,
        Error::KlUndefined(_) => BbStatus::KlUndefined,
        Error::Argument(_) => BbStatus::InvalidArgument,
        Error::Domain(_) => BbStatus::Domain,
        Error::InvalidGraph(_) => BbStatus::InvalidGraph,
        Error::TooLarge { .. } => BbStatus::TooLarge,
        Error::Parse(_) => BbStatus::Parse,
        Error::Io(_) => BbStatus::Io,
    }
}

struct Failure(BbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BbStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BbStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {message}"));
            BbStatus::Panic
        }
    }
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BbStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_config(c: &BbConfig) -> BackboneConfig {
    let aggregator = match c.aggregator {
        BbAggregator::Min => AggregatorKind::Min,
        BbAggregator::Max => AggregatorKind::Max,
        BbAggregator::Mean => AggregatorKind::Mean,
    };
    let strategy = match c.strategy {
        BbStrategy::Exact => SearchStrategy::Exact,
        BbStrategy::Sampled => SearchStrategy::Sampled {
            num_samples: c.num_samples,
        },
        BbStrategy::Annealed => SearchStrategy::Annealed(AnnealSchedule {
            initial_temp: (c.initial_temp > 0.0).then_some(c.initial_temp),
            cooling: c.cooling,
            steps_per_temp: c.steps_per_temp,
            restarts: c.restarts,
        }),
    };
    let mut out = BackboneConfig::new(aggregator, strategy).with_seed(c.seed);
    out.enforce_monotone = c.enforce_monotone;
    out
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// EXACT, MIN aggregator, seed 0 and the default annealing schedule.
///
/// # Safety
/// `out` must be NULL or point to writable memory for a `BbConfig`.
#[no_mangle]
pub unsafe extern "C" fn bb_config_default(out: *mut BbConfig) -> BbStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = AnnealSchedule::default();
        *out = BbConfig {
            aggregator: BbAggregator::Min,
            strategy: BbStrategy::Exact,
            num_samples: 1000,
            initial_temp: 0.0,
            cooling: s.cooling,
            steps_per_temp: s.steps_per_temp,
            restarts: s.restarts,
            seed: 0,
            enforce_monotone: false,
        };
        Ok(())
    })
}

/// Builds a distribution from `num_states` rows of `num_vars` symbols
/// (row-major in `states`) and their probabilities.
///
/// # Safety
/// `alphabet_sizes` must hold `num_vars` values, `states` `num_states *
/// num_vars` values and `probs` `num_states` values. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_distribution_new(
    num_vars: usize,
    alphabet_sizes: *const u32,
    num_states: usize,
    states: *const u32,
    probs: *const f64,
    out: *mut *mut BbDistribution,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sizes = slice_arg(alphabet_sizes, num_vars, "alphabet_sizes")?;
        let cells = num_states
            .checked_mul(num_vars)
            .ok_or_else(|| Failure(BbStatus::InvalidArgument, "state table too large".into()))?;
        let states = slice_arg(states, cells, "states")?;
        let probs = slice_arg(probs, num_states, "probs")?;
        let rows = (0..num_states).map(|i| (states[i * num_vars..(i + 1) * num_vars].to_vec(), probs[i]));
        let inner = JointDistribution::unnamed(sizes.to_vec(), rows)?;
        write_handle(out, BbDistribution { inner });
        Ok(())
    })
}

/// Parses the JSON distribution format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_distribution_from_json(
    json: *const c_char,
    out: *mut *mut BbDistribution,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = backbone_core::io::parse_distribution(str_arg(json, "json")?)?;
        write_handle(out, BbDistribution { inner });
        Ok(())
    })
}

/// # Safety
/// `d` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bb_distribution_free(d: *mut BbDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of variables, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_distribution_num_vars(d: *const BbDistribution) -> usize {
    d.as_ref().map_or(0, |d| d.inner.num_vars())
}

/// Number of states with positive probability, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_distribution_support_size(d: *const BbDistribution) -> usize {
    d.as_ref().map_or(0, |d| d.inner.support_size())
}

/// Builds a graph from parallel edge arrays.
///
/// # Safety
/// `u`, `v` and `w` must each hold `num_edges` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_graph_new(
    num_nodes: usize,
    num_edges: usize,
    u: *const usize,
    v: *const usize,
    w: *const f64,
    directed: bool,
    out: *mut *mut BbGraph,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (u, v, w) = (
            slice_arg(u, num_edges, "u")?,
            slice_arg(v, num_edges, "v")?,
            slice_arg(w, num_edges, "w")?,
        );
        let edges = (0..num_edges)
            .map(|i| Edge {
                u: u[i],
                v: v[i],
                w: w[i],
            })
            .collect();
        let inner = WeightedGraph::new(num_nodes, edges, directed)?;
        write_handle(out, BbGraph { inner });
        Ok(())
    })
}

/// Parses a `u,v,w` edge list. `num_nodes` of 0 infers the node count.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_graph_from_csv(
    csv: *const c_char,
    num_nodes: usize,
    directed: bool,
    out: *mut *mut BbGraph,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let nodes = (num_nodes > 0).then_some(num_nodes);
        let inner = backbone_core::io::parse_graph(str_arg(csv, "csv")?, nodes, directed)?;
        write_handle(out, BbGraph { inner });
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bb_graph_free(g: *mut BbGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Mean off-diagonal communicability of the whole graph.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_communicability(g: *const BbGraph, out: *mut f64) -> BbStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = backbone_core::communicability(&g.inner)?.mean_offdiagonal;
        Ok(())
    })
}

unsafe fn state_arg(d: &BbDistribution, state: *const u32) -> Option<&[u32]> {
    (!state.is_null()).then(|| slice::from_raw_parts(state, d.inner.num_vars()))
}

unsafe fn decompose(
    out: *mut *mut BbSpectrum,
    config: *const BbConfig,
    body: impl FnOnce(&BackboneConfig) -> Result<BbSpectrum, Failure>,
) -> BbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = to_config(ref_arg(config, "config")?);
        let spectrum = body(&cfg)?;
        write_handle(out, spectrum);
        Ok(())
    })
}

/// Entropy backbone of one state, or the expected backbone when `state` is
/// NULL.
///
/// # Safety
/// `d` and `config` must be live; `state` NULL or `num_vars` symbols; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bb_entropy_backbone(
    d: *const BbDistribution,
    state: *const u32,
    config: *const BbConfig,
    out: *mut *mut BbSpectrum,
) -> BbStatus {
    decompose(out, config, |cfg| {
        let d = ref_arg(d, "distribution")?;
        Ok(match state_arg(d, state) {
            Some(s) => measures::entropy_backbone_local(&d.inner, s, cfg)?.into(),
            None => measures::entropy_backbone_expected(&d.inner, cfg)?.into(),
        })
    })
}

/// Negentropy backbone of one state, or in expectation when `state` is NULL.
///
/// # Safety
/// As for [`bb_entropy_backbone`].
#[no_mangle]
pub unsafe extern "C" fn bb_negentropy_backbone(
    d: *const BbDistribution,
    state: *const u32,
    config: *const BbConfig,
    out: *mut *mut BbSpectrum,
) -> BbStatus {
    decompose(out, config, |cfg| {
        let d = ref_arg(d, "distribution")?;
        Ok(match state_arg(d, state) {
            Some(s) => measures::negentropy_backbone_local(&d.inner, s, cfg)?.into(),
            None => measures::negentropy_backbone(&d.inner, cfg)?.into(),
        })
    })
}

/// Total-correlation backbone of one state, or in expectation when `state`
/// is NULL.
///
/// # Safety
/// As for [`bb_entropy_backbone`].
#[no_mangle]
pub unsafe extern "C" fn bb_total_correlation_backbone(
    d: *const BbDistribution,
    state: *const u32,
    config: *const BbConfig,
    out: *mut *mut BbSpectrum,
) -> BbStatus {
    decompose(out, config, |cfg| {
        let d = ref_arg(d, "distribution")?;
        Ok(match state_arg(d, state) {
            Some(s) => measures::total_correlation_backbone_local(&d.inner, s, cfg)?.into(),
            None => measures::total_correlation_backbone(&d.inner, cfg)?.into(),
        })
    })
}

/// Backbone of `KL(posterior || prior)`, per state when `state` is non-NULL.
///
/// # Safety
/// As for [`bb_entropy_backbone`], with both distributions live.
#[no_mangle]
pub unsafe extern "C" fn bb_kl_backbone(
    posterior: *const BbDistribution,
    prior: *const BbDistribution,
    state: *const u32,
    config: *const BbConfig,
    out: *mut *mut BbSpectrum,
) -> BbStatus {
    decompose(out, config, |cfg| {
        let p = ref_arg(posterior, "posterior")?;
        let q = ref_arg(prior, "prior")?;
        Ok(match state_arg(p, state) {
            Some(s) => measures::kl_backbone_local(&p.inner, &q.inner, s, cfg)?.into(),
            None => measures::kl_backbone(&p.inner, &q.inner, cfg)?.into(),
        })
    })
}

/// Mutual-information backbone between variable `target` and the rest:
/// `k` atoms when `joint` is true, `k - 1` otherwise.
///
/// # Safety
/// `d`, `config` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_mi_backbone(
    d: *const BbDistribution,
    target: usize,
    joint: bool,
    config: *const BbConfig,
    out: *mut *mut BbSpectrum,
) -> BbStatus {
    decompose(out, config, |cfg| {
        let d = ref_arg(d, "distribution")?;
        let form = if joint { MiFormulation::Joint } else { MiFormulation::Conditional };
        Ok(measures::mi_backbone(&d.inner, target, form, cfg)?.into())
    })
}

/// Communicability backbone under edge failures.
///
/// # Safety
/// `g`, `config` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_structural_backbone(
    g: *const BbGraph,
    config: *const BbConfig,
    out: *mut *mut BbSpectrum,
) -> BbStatus {
    decompose(out, config, |cfg| {
        let g = ref_arg(g, "graph")?;
        Ok(structural_synergy_backbone(&g.inner, cfg)?.into())
    })
}

/// Number of scales, or 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_len(s: *const BbSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.atoms.len())
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if len < values.len() {
        return Err(Failure(
            BbStatus::InvalidArgument,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

/// Copies the α-synergy values (α = 1..len) into `buf`.
///
/// # Safety
/// `s` live; `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_synergy(s: *const BbSpectrum, buf: *mut f64, len: usize) -> BbStatus {
    guard(|| copy_out(&ref_arg(s, "spectrum")?.synergy, buf, len))
}

/// Copies the partial atoms into `buf`.
///
/// # Safety
/// `s` live; `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_atoms(s: *const BbSpectrum, buf: *mut f64, len: usize) -> BbStatus {
    guard(|| copy_out(&ref_arg(s, "spectrum")?.atoms, buf, len))
}

/// Total of the decomposed measure: the sum of atoms for set-function
/// backbones, the directly computed divergence for divergence backbones.
///
/// # Safety
/// `s` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_total(s: *const BbSpectrum, out: *mut f64) -> BbStatus {
    guard(|| {
        let s = ref_arg(s, "spectrum")?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.total;
        Ok(())
    })
}

/// Bitmask of the failure set that realised scale `alpha` (1-based). Fails
/// with `BB_STATUS_INVALID_ARGUMENT` when no single winner exists (MEAN
/// aggregator, averaged or divergence spectra).
///
/// # Safety
/// `s` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_winner(s: *const BbSpectrum, alpha: usize, out: *mut u64) -> BbStatus {
    guard(|| {
        let s = ref_arg(s, "spectrum")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let w = alpha
            .checked_sub(1)
            .and_then(|i| s.winners.get(i))
            .ok_or_else(|| Failure(BbStatus::InvalidArgument, format!("alpha {alpha} out of range")))?;
        *out = w.ok_or_else(|| {
            Failure(BbStatus::InvalidArgument, format!("no winning subset recorded at alpha {alpha}"))
        })?;
        Ok(())
    })
}

/// Number of scales flagged by the monotonicity check.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_violation_count(s: *const BbSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.violations.len())
}

/// Whether a running-maximum repair changed the spectrum.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_repaired(s: *const BbSpectrum) -> bool {
    s.as_ref().is_some_and(|s| s.repaired)
}

/// # Safety
/// `s` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bb_spectrum_free(s: *mut BbSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
