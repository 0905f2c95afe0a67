//! Backbone decompositions of set functions over failure sets.
//!
//! A set function `f` on a ground set of `k` elements is probed by removing
//! `α` elements and aggregating the loss `f(full) - f(full \ a)` over every
//! (or a sampled or annealed selection of) failure set `a` of size `α`. The
//! resulting α-synergy curve is differenced into partial atoms that sum to
//! `f(full) - f(∅)`.
//!
//! Built-in set functions cover discrete entropy and divergences, Gaussian
//! local differential entropy and graph communicability under edge failure.

pub mod cli;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod expm;
pub mod gaussian;
pub mod graph;
pub mod io;
pub mod marginal;
pub mod measures;
pub mod search;
pub mod subset;

pub use distribution::JointDistribution;
pub use engine::{
    alpha_synergy, backbone, partial_atoms, robustness, verify_desiderata, AggregatorKind,
    AlphaSynergy, BackboneConfig, BackboneSpectrum, ClosureSetFunction, DesiderataReport,
    SearchStrategy, SetFunction, SetFunctionMode,
};
pub use error::{Error, Result};
pub use gaussian::GaussianModel;
pub use graph::{communicability, structural_synergy_backbone, Edge, WeightedGraph};
pub use marginal::{MarginalCache, MarginalSource, ProductReference};
pub use measures::{
    entropy_backbone_expected, entropy_backbone_local, kl_backbone, mi_backbone,
    negentropy_backbone, total_correlation_backbone, DivergenceSpectrum, MiFormulation,
};
pub use search::AnnealSchedule;
pub use subset::SubsetMask;

/// Crate version string.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
