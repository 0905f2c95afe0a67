//! Library side of the `backbone` binary: configuration, dispatch to the
//! measure operations, report rendering and input diagnostics.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::distribution::{JointDistribution, NORMALIZATION_TOLERANCE};
use crate::engine::{AggregatorKind, BackboneConfig, BackboneSpectrum, SearchStrategy};
use crate::error::{Error, Result};
use crate::gaussian::{gaussian_entropy_backbone_expected, gaussian_entropy_backbone_local, GaussianModel};
use crate::graph::{communicability, structural_synergy_backbone, WeightedGraph};
use crate::io::{self, SpectrumRecord};
use crate::measures::{self, DivergenceSpectrum, MiFormulation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Tolerance on `total == Σ atoms` before a report is flagged.
pub const SUM_TOLERANCE: f64 = 1e-9;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_infeasible() {
        EXIT_INFEASIBLE
    } else {
        EXIT_INPUT
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Entropy,
    Negentropy,
    TotalCorrelation,
    Kl,
    MiConditional,
    MiJoint,
    GaussianEntropy,
    Communicability,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::Entropy,
        Measure::Negentropy,
        Measure::TotalCorrelation,
        Measure::Kl,
        Measure::MiConditional,
        Measure::MiJoint,
        Measure::GaussianEntropy,
        Measure::Communicability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::Negentropy => "negentropy",
            Measure::TotalCorrelation => "total-correlation",
            Measure::Kl => "kl",
            Measure::MiConditional => "mi-conditional",
            Measure::MiJoint => "mi-joint",
            Measure::GaussianEntropy => "gaussian-entropy",
            Measure::Communicability => "communicability",
        }
    }

    pub fn is_mi(self) -> bool {
        matches!(self, Measure::MiConditional | Measure::MiJoint)
    }

    fn is_discrete(self) -> bool {
        !matches!(self, Measure::GaussianEntropy | Measure::Communicability)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Measure::ALL.iter().map(|m| m.name()).collect();
                Error::Argument(format!("unknown measure '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Two => "bits",
            LogBase::E => "nats",
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(Error::Argument(format!("unknown log base '{other}' (expected 2 or e)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Argument(format!("unknown format '{other}' (expected json or csv)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub measure: Measure,
    pub input_path: PathBuf,
    /// Reference distribution for `kl`.
    pub prior_path: Option<PathBuf>,
    pub aggregator: AggregatorKind,
    pub strategy: SearchStrategy,
    pub target_index: Option<usize>,
    pub log_base: LogBase,
    pub output_format: OutputFormat,
    pub seed: u64,
    pub enforce_monotone: bool,
    /// Per-state decomposition; integer states for discrete measures,
    /// a real point for `gaussian-entropy`.
    pub local_state: Option<Vec<f64>>,
    pub threads: Option<usize>,
    pub nodes: Option<usize>,
    pub directed: bool,
}

impl RunConfig {
    pub fn new(measure: Measure, input_path: impl Into<PathBuf>) -> Self {
        Self {
            measure,
            input_path: input_path.into(),
            prior_path: None,
            aggregator: AggregatorKind::Min,
            strategy: SearchStrategy::Exact,
            target_index: None,
            log_base: LogBase::Two,
            output_format: OutputFormat::Json,
            seed: 0,
            enforce_monotone: false,
            local_state: None,
            threads: None,
            nodes: None,
            directed: false,
        }
    }

    /// Checks that measure-specific fields are present exactly when needed.
    pub fn validate(&self) -> Result<()> {
        let m = self.measure;
        if m.is_mi() != self.target_index.is_some() {
            return Err(Error::Argument(if m.is_mi() {
                format!("--measure {m} requires --target IDX")
            } else {
                format!("--target only applies to mi-conditional and mi-joint, not {m}")
            }));
        }
        if (m == Measure::Kl) != self.prior_path.is_some() {
            return Err(Error::Argument(if m == Measure::Kl {
                "--measure kl requires --prior PATH".to_string()
            } else {
                format!("--prior only applies to kl, not {m}")
            }));
        }
        if self.local_state.is_some() && (m.is_mi() || m == Measure::Communicability) {
            return Err(Error::Argument(format!("--local is not supported for {m}")));
        }
        if (self.nodes.is_some() || self.directed) && m != Measure::Communicability {
            return Err(Error::Argument(format!(
                "--nodes and --directed only apply to communicability, not {m}"
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Argument("--threads must be at least 1".into()));
        }
        self.strategy.validate()
    }

    fn backbone_config(&self) -> BackboneConfig {
        let mut c = BackboneConfig::new(self.aggregator, self.strategy.clone()).with_seed(self.seed);
        c.enforce_monotone = self.enforce_monotone;
        c
    }

    fn discrete_state(&self, dist: &JointDistribution) -> Result<Option<Vec<u32>>> {
        let Some(raw) = &self.local_state else {
            return Ok(None);
        };
        if raw.len() != dist.num_vars() {
            return Err(Error::Argument(format!(
                "--local has {} values, the distribution has {} variables",
                raw.len(),
                dist.num_vars()
            )));
        }
        raw.iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as u32)
                } else {
                    Err(Error::Argument(format!("--local value {v} is not a symbol index")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Configuration as echoed in the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub measure: Measure,
    pub input: String,
    pub prior: Option<String>,
    pub aggregator: AggregatorKind,
    pub strategy: String,
    pub seed: u64,
    pub target: Option<usize>,
    pub log_base: LogBase,
    pub local: Option<Vec<f64>>,
    pub enforce_monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: ConfigEcho,
    /// `bits`, `nats`, or absent for non-information measures.
    pub unit: Option<String>,
    /// Primary spectrum.
    pub spectrum: SpectrumRecord,
    /// Prior and posterior local-entropy spectra of a divergence.
    pub components: Vec<SpectrumRecord>,
    /// Directly computed value of the measure.
    pub total: f64,
    pub atom_sum: f64,
    /// Set when `|total - atom_sum|` exceeds the tolerance.
    pub sum_mismatch: bool,
    pub violations: Vec<usize>,
    pub repaired: bool,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report always serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        self.spectrum.to_csv()
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

enum Outcome {
    Backbone(BackboneSpectrum),
    Divergence(DivergenceSpectrum),
}

fn scale_backbone(s: &mut BackboneSpectrum, factor: f64) {
    s.alpha_synergy.iter_mut().for_each(|v| *v *= factor);
    s.partial_atoms.iter_mut().for_each(|v| *v *= factor);
}

fn scale_divergence(d: &mut DivergenceSpectrum, factor: f64) {
    d.atoms.iter_mut().for_each(|v| *v *= factor);
    d.total *= factor;
    scale_backbone(&mut d.prior_spectrum, factor);
    scale_backbone(&mut d.posterior_spectrum, factor);
}

/// Runs one decomposition. With `threads` set, work runs on a dedicated
/// pool of that size.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Argument(format!("cannot build thread pool: {e}")))?
            .install(|| run_inner(config)),
        None => run_inner(config),
    }
}

fn run_inner(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let cfg = config.backbone_config();
    let measure = config.measure;
    let ln2 = std::f64::consts::LN_2;
    let (outcome, total, unit_factor) = match measure {
        Measure::Communicability => {
            let g = io::read_graph(&config.input_path, config.nodes, config.directed)?;
            let total = communicability(&g)?.mean_offdiagonal;
            (communicability_outcome(&g, &cfg)?, total, None)
        }
        Measure::GaussianEntropy => {
            let (model, points) = io::read_gaussian(&config.input_path)?;
            let (spectrum, total) = gaussian_outcome(&model, &points, config, &cfg)?;
            let factor = match config.log_base {
                LogBase::Two => 1.0 / ln2,
                LogBase::E => 1.0,
            };
            (Outcome::Backbone(spectrum), total, Some(factor))
        }
        _ => {
            let dist = io::read_distribution(&config.input_path)?;
            let state = config.discrete_state(&dist)?;
            let (outcome, total) = discrete_outcome(&dist, state.as_deref(), config, &cfg)?;
            let factor = match config.log_base {
                LogBase::Two => 1.0,
                LogBase::E => ln2,
            };
            (outcome, total, Some(factor))
        }
    };
    debug_assert!(measure.is_discrete() || matches!(outcome, Outcome::Backbone(_)));

    let factor = unit_factor.unwrap_or(1.0);
    let total = total * factor;
    let name = measure.name();
    let (spectrum, components, violations, repaired, warnings) = match outcome {
        Outcome::Backbone(mut s) => {
            scale_backbone(&mut s, factor);
            let record = SpectrumRecord::from_backbone(&s, config.seed, name);
            (record, vec![], s.monotone_violations.clone(), s.repaired, vec![])
        }
        Outcome::Divergence(mut d) => {
            scale_divergence(&mut d, factor);
            let record = SpectrumRecord::from_divergence(&d, config.seed, name);
            let components = vec![
                SpectrumRecord::from_backbone(&d.prior_spectrum, config.seed, &format!("{name}:prior")),
                SpectrumRecord::from_backbone(
                    &d.posterior_spectrum,
                    config.seed,
                    &format!("{name}:posterior"),
                ),
            ];
            let mut v = d.prior_spectrum.monotone_violations.clone();
            v.extend(&d.posterior_spectrum.monotone_violations);
            v.sort_unstable();
            v.dedup();
            let repaired = d.prior_spectrum.repaired || d.posterior_spectrum.repaired;
            (record, components, v, repaired, d.warnings)
        }
    };
    let atom_sum = spectrum.rows.iter().fold(0.0, |acc, r| acc + r.partial);
    Ok(RunReport {
        version: crate::VERSION.to_string(),
        config: ConfigEcho {
            measure,
            input: config.input_path.display().to_string(),
            prior: config.prior_path.as_ref().map(|p| p.display().to_string()),
            aggregator: config.aggregator,
            strategy: spectrum.header.strategy.clone(),
            seed: config.seed,
            target: config.target_index,
            log_base: config.log_base,
            local: config.local_state.clone(),
            enforce_monotone: config.enforce_monotone,
        },
        unit: unit_factor.map(|_| config.log_base.unit().to_string()),
        sum_mismatch: (total - atom_sum).abs() > SUM_TOLERANCE * total.abs().max(1.0),
        spectrum,
        components,
        total,
        atom_sum,
        violations,
        repaired,
        warnings,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

fn communicability_outcome(g: &WeightedGraph, cfg: &BackboneConfig) -> Result<Outcome> {
    if g.edges().is_empty() {
        return Ok(Outcome::Backbone(BackboneSpectrum::from_values(
            vec![],
            vec![],
            cfg.aggregator,
            cfg.strategy_tag(),
        )));
    }
    Ok(Outcome::Backbone(structural_synergy_backbone(g, cfg)?))
}

fn gaussian_outcome(
    model: &GaussianModel,
    points: &[Vec<f64>],
    config: &RunConfig,
    cfg: &BackboneConfig,
) -> Result<(BackboneSpectrum, f64)> {
    if let Some(point) = &config.local_state {
        let s = gaussian_entropy_backbone_local(model, point, cfg)?;
        return Ok((s, model.local_entropy(point)?));
    }
    if points.is_empty() {
        return Err(Error::Argument(
            "gaussian-entropy needs --local or a non-empty \"points\" list in the input".into(),
        ));
    }
    let s = gaussian_entropy_backbone_expected(model, points, cfg)?;
    let mut total = 0.0;
    for p in points {
        total += model.local_entropy(p)?;
    }
    Ok((s, total / points.len() as f64))
}

fn discrete_outcome(
    dist: &JointDistribution,
    state: Option<&[u32]>,
    config: &RunConfig,
    cfg: &BackboneConfig,
) -> Result<(Outcome, f64)> {
    Ok(match (config.measure, state) {
        (Measure::Entropy, Some(s)) => (
            Outcome::Backbone(measures::entropy_backbone_local(dist, s, cfg)?),
            dist.local_entropy(s)?,
        ),
        (Measure::Entropy, None) => (
            Outcome::Backbone(measures::entropy_backbone_expected(dist, cfg)?),
            dist.expected_entropy(),
        ),
        (Measure::Negentropy, Some(s)) => divergence(measures::negentropy_backbone_local(dist, s, cfg)?),
        (Measure::Negentropy, None) => divergence(measures::negentropy_backbone(dist, cfg)?),
        (Measure::TotalCorrelation, Some(s)) => {
            divergence(measures::total_correlation_backbone_local(dist, s, cfg)?)
        }
        (Measure::TotalCorrelation, None) => divergence(measures::total_correlation_backbone(dist, cfg)?),
        (Measure::Kl, s) => {
            let path = config.prior_path.as_ref().expect("validated");
            let prior = io::read_distribution(path)?;
            match s {
                Some(s) => divergence(measures::kl_backbone_local(dist, &prior, s, cfg)?),
                None => divergence(measures::kl_backbone(dist, &prior, cfg)?),
            }
        }
        (Measure::MiConditional | Measure::MiJoint, _) => {
            let form = if config.measure == Measure::MiJoint {
                MiFormulation::Joint
            } else {
                MiFormulation::Conditional
            };
            let target = config.target_index.expect("validated");
            divergence(measures::mi_backbone(dist, target, form, cfg)?)
        }
        (Measure::GaussianEntropy | Measure::Communicability, _) => unreachable!("not discrete"),
    })
}

fn divergence(d: DivergenceSpectrum) -> (Outcome, f64) {
    let total = d.total;
    (Outcome::Divergence(d), total)
}

/// Writes `contents` to `path` through a sibling temporary file so a failed
/// write never leaves a partial file behind.
pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Argument(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `alpha,synergy,partial,violation` rows of the primary spectrum.
pub fn emit_plot_data(report: &RunReport, path: &Path) -> Result<()> {
    write_output(path, &report.spectrum.to_plot_csv())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub kind: String,
    pub problems: Vec<Diagnostic>,
    /// Present when the input is usable.
    pub summary: Option<String>,
}

impl Diagnostics {
    fn warn(&mut self, message: String) {
        self.problems.push(Diagnostic {
            severity: Severity::Warning,
            message,
        });
    }

    fn error(&mut self, message: String) {
        self.problems.push(Diagnostic {
            severity: Severity::Error,
            message,
        });
    }

    pub fn is_ok(&self) -> bool {
        self.problems.iter().all(|p| p.severity != Severity::Error)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.problems {
            let tag = match p.severity {
                Severity::Warning => "warning",
                Severity::Error => "error",
            };
            out.push_str(&format!("{tag}: {}\n", p.message));
        }
        match &self.summary {
            Some(s) if self.problems.is_empty() => out.push_str(&format!("ok: {s}\n")),
            Some(s) => out.push_str(&format!("usable: {s}\n")),
            None => out.push_str(&format!("invalid {} input\n", self.kind)),
        }
        out
    }
}

/// Reports every problem found in an input file. Never fails: unreadable
/// files become diagnostics too.
pub fn validate_input(path: &Path) -> Diagnostics {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let mut d = Diagnostics {
                kind: "unknown".into(),
                ..Default::default()
            };
            d.error(format!("cannot read {}: {e}", path.display()));
            return d;
        }
    };
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        return diagnose_graph(&text);
    }
    match serde_json::from_str::<Value>(&text) {
        Err(e) => {
            let mut d = Diagnostics {
                kind: "json".into(),
                ..Default::default()
            };
            d.error(format!("malformed JSON: {e}"));
            d
        }
        Ok(v) if v.get("covariance").is_some() => diagnose_gaussian(&text),
        Ok(v) => diagnose_distribution(&v),
    }
}

fn diagnose_distribution(v: &Value) -> Diagnostics {
    let mut d = Diagnostics {
        kind: "distribution".into(),
        ..Default::default()
    };
    let names = v.get("variables").and_then(Value::as_array);
    let sizes: Option<Vec<Option<u64>>> = v
        .get("alphabet_sizes")
        .and_then(Value::as_array)
        .map(|a| a.iter().map(Value::as_u64).collect());
    let pmf = v.get("pmf").and_then(Value::as_array);
    if names.is_none() {
        d.error("missing \"variables\" list".into());
    }
    if pmf.is_none() {
        d.error("missing \"pmf\" list".into());
    }
    let Some(sizes) = sizes else {
        d.error("missing \"alphabet_sizes\" list".into());
        return d;
    };
    for (i, s) in sizes.iter().enumerate() {
        if !matches!(s, Some(n) if *n >= 1 && *n <= u32::MAX as u64) {
            d.error(format!("alphabet size {i} must be a positive integer"));
        }
    }
    if let Some(names) = names {
        if names.len() != sizes.len() {
            d.error(format!(
                "{} variable names but {} alphabet sizes",
                names.len(),
                sizes.len()
            ));
        }
    }
    let mut total = 0.0;
    let mut seen = std::collections::HashSet::new();
    for (i, entry) in pmf.into_iter().flatten().enumerate() {
        let state: Option<Vec<Option<u64>>> = entry
            .get("state")
            .and_then(Value::as_array)
            .map(|a| a.iter().map(Value::as_u64).collect());
        match entry.get("p").and_then(Value::as_f64) {
            Some(p) if p.is_finite() && p >= 0.0 => total += p,
            Some(p) => d.error(format!("pmf entry {i} has invalid probability {p}")),
            None => d.error(format!("pmf entry {i} has no numeric \"p\"")),
        }
        let Some(state) = state else {
            d.error(format!("pmf entry {i} has no \"state\" list"));
            continue;
        };
        if state.len() != sizes.len() {
            d.error(format!(
                "pmf entry {i} has {} values, expected {}",
                state.len(),
                sizes.len()
            ));
            continue;
        }
        for (j, (s, a)) in state.iter().zip(&sizes).enumerate() {
            match (s, a) {
                (Some(s), Some(a)) if s < a => {}
                (Some(s), Some(a)) => d.error(format!(
                    "pmf entry {i}: value {s} of variable {j} exceeds alphabet size {a}"
                )),
                (None, _) => d.error(format!("pmf entry {i}: value of variable {j} is not a non-negative integer")),
                _ => {}
            }
        }
        if !seen.insert(state.clone()) {
            d.error(format!("pmf entry {i} repeats an earlier state"));
        }
    }
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        d.error(format!(
            "pmf sums to {total} (deficit {:.3e}); it must sum to 1 within {NORMALIZATION_TOLERANCE:e}",
            1.0 - total
        ));
    }
    if d.is_ok() {
        match serde_json::from_value::<io::DistributionFile>(v.clone())
            .map_err(Error::from)
            .and_then(io::DistributionFile::into_distribution)
        {
            Ok(dist) => {
                d.summary = Some(format!(
                    "k={}, support={}, entropy={} bits",
                    dist.num_vars(),
                    dist.support_size(),
                    io::format_sig(dist.expected_entropy())
                ))
            }
            Err(e) => d.error(e.to_string()),
        }
    }
    d
}

fn diagnose_gaussian(text: &str) -> Diagnostics {
    let mut d = Diagnostics {
        kind: "gaussian".into(),
        ..Default::default()
    };
    match io::parse_gaussian(text) {
        Ok((model, points)) => {
            if points.is_empty() {
                d.warn("no \"points\"; the expected backbone will need --local".into());
            }
            d.summary = Some(format!("dimension={}, points={}", model.dim(), points.len()));
        }
        Err(e) => d.error(e.to_string()),
    }
    d
}

fn diagnose_graph(text: &str) -> Diagnostics {
    let mut d = Diagnostics {
        kind: "graph".into(),
        ..Default::default()
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    match reader.headers() {
        Ok(h) if h.iter().collect::<Vec<_>>() == ["u", "v", "w"] => {}
        Ok(h) => d.error(format!(
            "header must be 'u,v,w', found '{}'",
            h.iter().collect::<Vec<_>>().join(",")
        )),
        Err(e) => {
            d.error(format!("unreadable CSV: {e}"));
            return d;
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut edges = 0usize;
    let mut max_node = None;
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                d.error(format!("row {row}: {e}"));
                continue;
            }
        };
        if rec.len() != 3 {
            d.error(format!("row {row} has {} fields, expected 3", rec.len()));
            continue;
        }
        let u = rec[0].parse::<usize>();
        let v = rec[1].parse::<usize>();
        let w = rec[2].parse::<f64>();
        let (Ok(u), Ok(v), Ok(w)) = (u, v, w) else {
            d.error(format!("row {row} ({}) is not 'node,node,weight'", rec.iter().collect::<Vec<_>>().join(",")));
            continue;
        };
        edges += 1;
        max_node = max_node.max(Some(u.max(v)));
        if u == v {
            d.error(format!("row {row}: edge ({u},{v}) is a self-loop"));
        }
        if !w.is_finite() {
            d.error(format!("row {row}: edge ({u},{v}) has non-finite weight {w}"));
        } else if w < 0.0 {
            d.error(format!(
                "row {row}: edge ({u},{v}) has negative weight {w}; this violates the monotonicity desideratum"
            ));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            d.error(format!("row {row}: edge ({u},{v}) duplicates an earlier edge"));
        }
    }
    if d.is_ok() {
        d.summary = Some(format!(
            "nodes={}, edges={edges}",
            max_node.map_or(1, |m| m + 1)
        ));
    }
    d
}
