use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};

use backbone_core::cli::{self, LogBase, Measure, OutputFormat, RunConfig};
use backbone_core::{AggregatorKind, AnnealSchedule, Error, SearchStrategy};

/// Backbone decomposition of information measures and graph communicability.
#[derive(Debug, Parser)]
#[command(name = "backbone", version)]
#[command(group(ArgGroup::new("strategy").args(["exact", "sample", "anneal"])))]
struct Args {
    /// entropy, negentropy, total-correlation, kl, mi-conditional, mi-joint,
    /// gaussian-entropy or communicability
    #[arg(long, required_unless_present = "validate")]
    measure: Option<String>,

    /// Distribution or Gaussian JSON, or graph CSV.
    #[arg(long)]
    input: PathBuf,

    /// Reference distribution for `kl`.
    #[arg(long)]
    prior: Option<PathBuf>,

    #[arg(long, default_value = "min")]
    aggregator: String,

    /// Exhaustive enumeration (default).
    #[arg(long)]
    exact: bool,

    /// Random failure sets per scale.
    #[arg(long, value_name = "N")]
    sample: Option<usize>,

    /// Simulated annealing.
    #[arg(long)]
    anneal: bool,

    /// Initial annealing temperature; automatic when omitted.
    #[arg(long, requires = "anneal")]
    temp: Option<f64>,

    #[arg(long, requires = "anneal")]
    cooling: Option<f64>,

    /// Moves per temperature level.
    #[arg(long, requires = "anneal")]
    steps: Option<usize>,

    #[arg(long, requires = "anneal")]
    restarts: Option<usize>,

    #[arg(long, conflicts_with = "entropy_seed")]
    seed: Option<u64>,

    /// Draw the seed from the operating system; the report records it.
    #[arg(long)]
    entropy_seed: bool,

    #[arg(long, env = "BACKBONE_THREADS")]
    threads: Option<usize>,

    #[arg(long, default_value = "2")]
    base: String,

    /// Target variable index for mutual information.
    #[arg(long, value_name = "IDX")]
    target: Option<usize>,

    /// Decompose a single state, e.g. `1,1,1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    local: Option<Vec<f64>>,

    /// Repair monotonicity violations with a running maximum.
    #[arg(long)]
    enforce_monotone: bool,

    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    #[arg(long, default_value = "json")]
    format: String,

    /// Also write `alpha,synergy,partial,violation` CSV.
    #[arg(long, value_name = "PATH")]
    plot_data: Option<PathBuf>,

    /// Check the input file and report every problem found.
    #[arg(long)]
    validate: bool,

    /// Node count for graph input; inferred from the edge list otherwise.
    #[arg(long)]
    nodes: Option<usize>,

    #[arg(long)]
    directed: bool,
}

fn build_config(args: &Args) -> Result<RunConfig, Error> {
    let measure: Measure = args
        .measure
        .as_deref()
        .ok_or_else(|| Error::Argument("--measure is required".into()))?
        .parse()?;
    let strategy = if let Some(n) = args.sample {
        SearchStrategy::Sampled { num_samples: n }
    } else if args.anneal {
        let d = AnnealSchedule::default();
        SearchStrategy::Annealed(AnnealSchedule {
            initial_temp: args.temp,
            cooling: args.cooling.unwrap_or(d.cooling),
            steps_per_temp: args.steps.unwrap_or(d.steps_per_temp),
            restarts: args.restarts.unwrap_or(d.restarts),
        })
    } else {
        SearchStrategy::Exact
    };
    let seed = if args.entropy_seed {
        rand::random::<u64>()
    } else {
        args.seed.unwrap_or(0)
    };
    let mut c = RunConfig::new(measure, &args.input);
    c.prior_path = args.prior.clone();
    c.aggregator = args.aggregator.parse::<AggregatorKind>()?;
    c.strategy = strategy;
    c.target_index = args.target;
    c.log_base = args.base.parse::<LogBase>()?;
    c.output_format = args.format.parse::<OutputFormat>()?;
    c.seed = seed;
    c.enforce_monotone = args.enforce_monotone;
    c.local_state = args.local.clone();
    c.threads = args.threads;
    c.nodes = args.nodes;
    c.directed = args.directed;
    Ok(c)
}

fn execute(args: &Args) -> Result<(), Error> {
    let config = build_config(args)?;
    let report = cli::run(&config)?;
    let rendered = report.render(config.output_format);
    let plot = args.plot_data.as_ref().map(|_| report.spectrum.to_plot_csv());
    match &args.output {
        Some(path) => cli::write_output(path, &rendered)?,
        None => print!("{rendered}"),
    }
    if let (Some(path), Some(plot)) = (&args.plot_data, plot) {
        cli::write_output(path, &plot)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.sum_mismatch {
        eprintln!(
            "warning: atoms sum to {} but the measure is {}",
            report.atom_sum, report.total
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.validate {
        print!("{}", cli::validate_input(&args.input).render());
        return ExitCode::SUCCESS;
    }
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
