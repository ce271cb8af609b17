use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use catgraph::estimators::{bootstrap_variance, estimate_category_graph};
use catgraph::io::{export_dot, export_json, load_graph, save_graph};
use catgraph::{
    exact_category_graph, run_experiment, run_plan, synthetic_graph, CategoryGraphEstimate, Design,
    EstimateOptions, EstimatorKind, ExperimentConfig, ObservationLog, ObservationMode, Population,
    Result, SampleTrace, SamplerKind, SamplingPlan, SyntheticParams,
};

#[derive(Parser)]
#[command(name = "catgraph", version, about = "Estimate category graphs from graph samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphFiles {
    /// Edge list, one `u<TAB>v` per line
    #[arg(long)]
    edges: PathBuf,
    /// Category file, one `node<TAB>category` per line
    #[arg(long)]
    categories: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph with k-regular categories
    Generate {
        /// Comma-separated category sizes
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        k: usize,
        /// Inter-category edges; defaults to N*k/10
        #[arg(long)]
        inter: Option<usize>,
        /// Fraction of labels to shuffle
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: GraphFiles,
    },
    /// Compute the exact category graph
    Exact {
        #[command(flatten)]
        graph: GraphFiles,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a sample trace
    Sample {
        #[command(flatten)]
        graph: GraphFiles,
        #[arg(long)]
        sampler: SamplerKind,
        /// Draws per walk before thinning
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        walks: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start node for walks; uniform over non-isolated nodes otherwise
        #[arg(long)]
        start: Option<usize>,
        /// WRW category weights, comma-separated in category id order
        #[arg(long, value_delimiter = ',')]
        category_weights: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a trace into an observation log
    Observe {
        #[command(flatten)]
        graph: GraphFiles,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        mode: ObservationMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the category graph from an observation log
    Estimate {
        #[arg(long)]
        log: PathBuf,
        #[arg(long = "size-est", default_value = "induced")]
        size_est: EstimatorKind,
        #[arg(long = "weight-est", default_value = "induced")]
        weight_est: EstimatorKind,
        /// `exact:N` or `proportional`; defaults to the N recorded in the log
        #[arg(long)]
        population: Option<Population>,
        /// Use the overall mean degree in place of per-category mean degrees
        #[arg(long)]
        homogeneous_degree: bool,
        /// Bootstrap resamples for variance estimates
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment grid from a TOML config
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Summary CSV; stdout when absent
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Full JSON report
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn write_estimate(est: &CategoryGraphEstimate, format: Format, out: &Option<PathBuf>) -> Result<()> {
    let w = output(out)?;
    match format {
        Format::Json => export_json(est, w),
        Format::Dot => export_dot(est, w),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            sizes,
            k,
            inter,
            alpha,
            seed,
            out,
        } => {
            let params = SyntheticParams {
                category_sizes: sizes,
                k,
                inter_edge_count: inter,
                alpha,
                seed,
            };
            let (g, part) = synthetic_graph(&params)?;
            save_graph(&g, &part, &out.edges, &out.categories)
        }
        Command::Exact { graph, format, out } => {
            let (g, part) = load_graph(&graph.edges, &graph.categories)?;
            let exact = exact_category_graph(&g, &part)?;
            write_estimate(&CategoryGraphEstimate::from_exact(&exact), format, &out)
        }
        Command::Sample {
            graph,
            sampler,
            n,
            walks,
            burn_in,
            thin,
            seed,
            start,
            category_weights,
            out,
        } => {
            let (g, part) = load_graph(&graph.edges, &graph.categories)?;
            let design = match (sampler, category_weights) {
                (SamplerKind::Wrw, Some(w)) => Design::Wrw { category_weights: w },
                (kind, _) => Design::default_for(kind, &g, &part),
            };
            let mut plan = SamplingPlan::new(design, n, seed);
            plan.walks = walks;
            plan.burn_in = burn_in;
            plan.thin = thin;
            plan.start = start;
            run_plan(&g, &part, &plan)?.write_jsonl(output(&out)?)
        }
        Command::Observe {
            graph,
            trace,
            mode,
            out,
        } => {
            let (g, part) = load_graph(&graph.edges, &graph.categories)?;
            let trace = SampleTrace::read_jsonl(open(&trace)?)?;
            catgraph::observe(&g, &part, &trace, mode)?.write_jsonl(output(&out)?)
        }
        Command::Estimate {
            log,
            size_est,
            weight_est,
            population,
            homogeneous_degree,
            bootstrap,
            seed,
            format,
            out,
        } => {
            let log = ObservationLog::read_jsonl(open(&log)?)?;
            let population = population.unwrap_or(match log.population_hint {
                Some(n) => Population::Exact(n),
                None => Population::Proportional,
            });
            let mut opts = EstimateOptions::new(size_est, weight_est);
            opts.assume_homogeneous_degree = homogeneous_degree;
            let mut est = estimate_category_graph(&log, population, opts)?;
            if let Some(b) = bootstrap {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let var = bootstrap_variance(&log, population, opts, b, &mut rng)?;
                est.size_variances = Some(var.sizes);
                est.weight_variances = Some(var.weights);
            }
            write_estimate(&est, format, &out)
        }
        Command::Evaluate { config, csv, json } => {
            let cfg = ExperimentConfig::from_toml(&fs::read_to_string(config)?)?;
            let report = run_experiment(&cfg)?;
            report.write_csv(output(&csv)?)?;
            if let Some(path) = json {
                report.write_json(File::create(path)?)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
