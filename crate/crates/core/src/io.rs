//! File formats: distribution and Gaussian JSON, graph edge-list CSV and
//! the spectrum record shared by the CLI and the plotting output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distribution::JointDistribution;
use crate::engine::BackboneSpectrum;
use crate::error::{Error, Result};
use crate::gaussian::GaussianModel;
use crate::graph::{Edge, WeightedGraph};
use crate::measures::DivergenceSpectrum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub state: Vec<u32>,
    pub p: f64,
}

/// On-disk distribution. States absent from `pmf` have probability 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub variables: Vec<String>,
    pub alphabet_sizes: Vec<u32>,
    pub pmf: Vec<PmfEntry>,
}

impl DistributionFile {
    pub fn into_distribution(self) -> Result<JointDistribution> {
        JointDistribution::new(
            self.variables,
            self.alphabet_sizes,
            self.pmf.into_iter().map(|e| (e.state, e.p)),
        )
    }

    pub fn from_distribution(dist: &JointDistribution) -> Self {
        Self {
            variables: dist.names().to_vec(),
            alphabet_sizes: dist.alphabet_sizes().to_vec(),
            pmf: dist
                .support()
                .map(|(s, p)| PmfEntry {
                    state: s.to_vec(),
                    p,
                })
                .collect(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_distribution(text: &str) -> Result<JointDistribution> {
    let file: DistributionFile = serde_json::from_str(text)?;
    file.into_distribution()
}

pub fn read_distribution(path: &Path) -> Result<JointDistribution> {
    parse_distribution(&read_text(path)?)
        .map_err(|e| with_path(e, path))
}

pub fn distribution_to_json(dist: &JointDistribution) -> String {
    serde_json::to_string_pretty(&DistributionFile::from_distribution(dist))
        .expect("distribution file always serializes")
}

/// On-disk Gaussian model. `points` are the evaluation points used for the
/// expected backbone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianFile {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
}

pub fn parse_gaussian(text: &str) -> Result<(GaussianModel, Vec<Vec<f64>>)> {
    let file: GaussianFile = serde_json::from_str(text)?;
    let model = GaussianModel::new(file.mean, file.covariance)?;
    for (i, p) in file.points.iter().enumerate() {
        if p.len() != model.dim() {
            return Err(Error::Parse(format!(
                "point {i} has dimension {}, model has {}",
                p.len(),
                model.dim()
            )));
        }
    }
    Ok((model, file.points))
}

pub fn read_gaussian(path: &Path) -> Result<(GaussianModel, Vec<Vec<f64>>)> {
    parse_gaussian(&read_text(path)?).map_err(|e| with_path(e, path))
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    u: usize,
    v: usize,
    w: f64,
}

/// Parses a `u,v,w` edge list. Node count defaults to the largest index
/// plus one (at least one node).
pub fn parse_graph(text: &str, nodes: Option<usize>, directed: bool) -> Result<WeightedGraph> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["u", "v", "w"] {
        return Err(Error::Parse(format!(
            "graph CSV header must be 'u,v,w', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut edges = Vec::new();
    for (i, row) in reader.deserialize::<EdgeRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("edge row {}: {e}", i + 1)))?;
        edges.push(Edge {
            u: row.u,
            v: row.v,
            w: row.w,
        });
    }
    let inferred = edges.iter().map(|e| e.u.max(e.v) + 1).max().unwrap_or(1);
    WeightedGraph::new(nodes.unwrap_or(inferred), edges, directed)
}

pub fn read_graph(path: &Path, nodes: Option<usize>, directed: bool) -> Result<WeightedGraph> {
    parse_graph(&read_text(path)?, nodes, directed).map_err(|e| with_path(e, path))
}

pub fn graph_to_csv(g: &WeightedGraph) -> String {
    let mut out = String::from("u,v,w\n");
    for e in g.edges() {
        out.push_str(&format!("{},{},{}\n", e.u, e.v, e.w));
    }
    out
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumHeader {
    pub aggregator: String,
    pub strategy: String,
    pub seed: u64,
    pub ground_size: usize,
    pub measure: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub alpha: usize,
    pub synergy: f64,
    pub partial: f64,
    pub winner: Option<Vec<usize>>,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub header: SpectrumHeader,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumRecord {
    /// `violation` marks scales flagged by the monotonicity check, including
    /// scales that were repaired.
    pub fn from_backbone(s: &BackboneSpectrum, seed: u64, measure: &str) -> Self {
        let rows = (0..s.len())
            .map(|i| SpectrumRow {
                alpha: i + 1,
                synergy: s.alpha_synergy[i],
                partial: s.partial_atoms[i],
                winner: s.winning_subsets[i].map(|m| m.to_vec()),
                violation: s.monotone_violations.contains(&(i + 1)),
            })
            .collect();
        Self {
            header: SpectrumHeader {
                aggregator: s.aggregator.to_string(),
                strategy: s.strategy.clone(),
                seed,
                ground_size: s.len(),
                measure: measure.to_string(),
            },
            rows,
        }
    }

    /// Rows carry the divergence atoms and their running sums. A scale is
    /// flagged when either constituent spectrum flags it.
    pub fn from_divergence(d: &DivergenceSpectrum, seed: u64, measure: &str) -> Self {
        let synergy = d.synergy();
        let flagged = |a: usize| {
            d.prior_spectrum.monotone_violations.contains(&a)
                || d.posterior_spectrum.monotone_violations.contains(&a)
        };
        let rows = (0..d.atoms.len())
            .map(|i| SpectrumRow {
                alpha: i + 1,
                synergy: synergy[i],
                partial: d.atoms[i],
                winner: None,
                violation: flagged(i + 1),
            })
            .collect();
        Self {
            header: SpectrumHeader {
                aggregator: d.prior_spectrum.aggregator.to_string(),
                strategy: d.prior_spectrum.strategy.clone(),
                seed,
                ground_size: d.atoms.len(),
                measure: measure.to_string(),
            },
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,synergy,partial,winner,violation\n");
        for r in &self.rows {
            let winner = r
                .winner
                .as_ref()
                .map(|w| w.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.alpha,
                format_sig(r.synergy),
                format_sig(r.partial),
                winner,
                r.violation
            ));
        }
        out
    }

    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from("alpha,synergy,partial,violation\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.alpha,
                format_sig(r.synergy),
                format_sig(r.partial),
                u8::from(r.violation)
            ));
        }
        out
    }
}

/// Twelve significant digits, trailing zeros trimmed. Values in (-1e-9, 0]
/// print as `0`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 || (x < 0.0 && x > -1e-9) {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        format!("{}e{e}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{backbone, AggregatorKind, BackboneConfig, ClosureSetFunction};

    const XOR: &str = r#"{"variables":["X1","X2","Y"],"alphabet_sizes":[2,2,2],
        "pmf":[{"state":[0,0,0],"p":0.25},{"state":[0,1,1],"p":0.25},
               {"state":[1,0,1],"p":0.25},{"state":[1,1,0],"p":0.25}]}"#;

    #[test]
    fn distribution_round_trip() {
        let d = parse_distribution(XOR).unwrap();
        assert_eq!(d.support_size(), 4);
        assert_eq!(d.names()[2], "Y");
        let again = parse_distribution(&distribution_to_json(&d)).unwrap();
        assert_eq!(again.support().count(), 4);
        assert_eq!(again.prob(&[1, 1, 0]), 0.25);
    }

    #[test]
    fn distribution_errors_are_typed() {
        assert!(matches!(parse_distribution("{"), Err(Error::Parse(_))));
        let bad = XOR.replace("0.25}]", "0.2}]");
        assert!(matches!(parse_distribution(&bad), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn graph_csv() {
        let g = parse_graph("u,v,w\n0,1,1.5\n1, 2, 0.5\n", None, false).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges()[1].w, 0.5);
        assert_eq!(parse_graph("u,v,w\n0,1,1\n", Some(5), false).unwrap().num_nodes(), 5);
        let round = parse_graph(&graph_to_csv(&g), None, false).unwrap();
        assert_eq!(round, g);
        assert_eq!(parse_graph("u,v,w\n", None, false).unwrap().edges().len(), 0);
        assert!(matches!(parse_graph("a,b,c\n0,1,1\n", None, false), Err(Error::Parse(_))));
        assert!(matches!(
            parse_graph("u,v,w\n0,1,-1\n", None, false),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(parse_graph("u,v,w\n0,x,1\n", None, false), Err(Error::Parse(_))));
    }

    #[test]
    fn gaussian_file() {
        let (m, pts) =
            parse_gaussian(r#"{"mean":[0,0],"covariance":[[1,0.5],[0.5,1]],"points":[[0,1]]}"#)
                .unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(pts.len(), 1);
        assert!(parse_gaussian(r#"{"mean":[0],"covariance":[[1]],"points":[[0,1]]}"#).is_err());
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-1.0), "-1");
        assert_eq!(format_sig(0.25), "0.25");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(-1e-12), "0");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(123456789.123_457), "123456789.123");
        let x = std::f64::consts::E;
        assert!((format_sig(x).parse::<f64>().unwrap() - x).abs() < 1e-11);
    }

    #[test]
    fn record_rows() {
        let f = ClosureSetFunction::loss(3, "count", |m| m.len() as f64).unwrap();
        let s = backbone(&f, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
        let r = SpectrumRecord::from_backbone(&s, 7, "count");
        assert_eq!(r.header.ground_size, 3);
        assert_eq!(r.rows[0].winner, Some(vec![0]));
        assert_eq!(r.to_plot_csv(), "alpha,synergy,partial,violation\n1,1,1,0\n2,2,1,0\n3,3,1,0\n");
        assert!(r.to_csv().starts_with("alpha,synergy,partial,winner,violation\n1,1,1,0,false\n"));
    }
}
