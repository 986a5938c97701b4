//! Command-line front end: design generation, property verification,
//! single-replication simulation and Monte Carlo experiments.
//!
//! Exit codes: 0 success, 1 validation error, 2 work budget exceeded,
//! 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use poolscreen_core::bp::{run_bp, BpSettings};
use poolscreen_core::config::ConfigFile;
use poolscreen_core::design::{build_design, PoolingDesign};
use poolscreen_core::error::Error;
use poolscreen_core::experiment::{
    default_grid_axes, run_experiment, run_grid, DesignSource, ExperimentConfig, Planting,
    DEFAULT_PRIOR, DEFAULT_SENSITIVITY, DEFAULT_SPECIFICITY,
};
use poolscreen_core::properties::{
    is_disjunct, is_separable, is_two_type_separable, unique_collinearity_violation, WorkBudget,
};
use poolscreen_core::report::{
    emit_results, grid_table, summary_text, OutputFormat, SimulationDump,
};
use poolscreen_core::sim::{observe, plant_bernoulli, plant_fixed, NoiseModel, Priors};

#[derive(Parser)]
#[command(name = "poolscreen", version, about = "Two-type group testing designs and screening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pooling design from affine-geometry planes and write it out
    Design(DesignArgs),
    /// Check combinatorial properties of a design file
    Verify(VerifyArgs),
    /// Run one planted replication and dump the decoded marginals
    Simulate(SimulateArgs),
    /// Run a Monte Carlo screening experiment (or the full design sweep)
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Field order (prime)
    #[arg(long, default_value_t = 7)]
    q: u32,
    /// Plane indices for the A pools, comma separated
    #[arg(long, default_value = "0,1,2")]
    ka: String,
    /// Plane indices for the B pools
    #[arg(long, default_value = "0,1,2")]
    kb: String,
    /// Plane indices for the AB pools (may be empty)
    #[arg(long, default_value = "3,4,5,6")]
    kab: String,
    /// Output design file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Design file to check
    design: PathBuf,
    /// Check the unique collinearity condition of all three matrices
    #[arg(long)]
    collinearity: bool,
    /// Check d-disjunctness of M_A and M_B for this d
    #[arg(long)]
    disjunct: Option<usize>,
    /// Check d̄-separability of the stacked [M_A; M_AB] and [M_B; M_AB]
    #[arg(long)]
    separable: Option<usize>,
    /// Check the combined (2, d̄)-separability for this d
    #[arg(long)]
    two_type: Option<usize>,
    /// Work budget in units for the exhaustive checks
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Design file to simulate on
    design: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Planted type-A defectives
    #[arg(long, default_value_t = 6)]
    count_a: usize,
    /// Planted type-B defectives
    #[arg(long, default_value_t = 6)]
    count_b: usize,
    /// Plant Bernoulli indicators at the prior rates instead of fixed counts
    #[arg(long)]
    bernoulli: bool,
    #[arg(long, default_value_t = DEFAULT_SENSITIVITY)]
    sensitivity: f64,
    #[arg(long, default_value_t = DEFAULT_SPECIFICITY)]
    specificity: f64,
    #[arg(long, default_value_t = DEFAULT_PRIOR)]
    prior_a: f64,
    #[arg(long, default_value_t = DEFAULT_PRIOR)]
    prior_b: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: u32,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// Config file with key=value twins of every flag (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Load the design from a file instead of building it
    #[arg(long)]
    design_file: Option<PathBuf>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    ka: Option<String>,
    #[arg(long)]
    kb: Option<String>,
    #[arg(long)]
    kab: Option<String>,
    #[arg(long)]
    count_a: Option<usize>,
    #[arg(long)]
    count_b: Option<usize>,
    /// Plant Bernoulli indicators at the prior rates
    #[arg(long)]
    bernoulli: bool,
    #[arg(long)]
    sensitivity: Option<f64>,
    #[arg(long)]
    specificity: Option<f64>,
    #[arg(long)]
    prior_a: Option<f64>,
    #[arg(long)]
    prior_b: Option<f64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u32>,
    /// table, csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep designs k = 1..q−1 against the default defective counts
    #[arg(long)]
    grid: bool,
}

fn parse_plane_list(raw: &str) -> Result<Vec<u32>, Error> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidParameter(format!("bad plane index {tok:?}")))
        })
        .collect()
}

fn cmd_design(args: &DesignArgs) -> Result<(), Error> {
    let design = build_design(
        args.q,
        &parse_plane_list(&args.ka)?,
        &parse_plane_list(&args.kb)?,
        &parse_plane_list(&args.kab)?,
    )?;
    design.write_file(&args.out)?;
    println!(
        "wrote {} ({} items, pools A={} B={} AB={})",
        args.out.display(),
        design.n_items(),
        design.m_a().n_rows(),
        design.m_b().n_rows(),
        design.m_ab().n_rows()
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Error> {
    let design = PoolingDesign::read_file(&args.design)?;
    let budget = args.budget.map_or_else(WorkBudget::default, WorkBudget::new);
    println!(
        "design {}: {} items, pools A={} B={} AB={}",
        args.design.display(),
        design.n_items(),
        design.m_a().n_rows(),
        design.m_b().n_rows(),
        design.m_ab().n_rows()
    );
    match design.provenance() {
        Some(p) => println!(
            "provenance: q={} K_A={:?} K_B={:?} K_AB={:?}",
            p.q, p.k_a, p.k_b, p.k_ab
        ),
        None => println!("provenance: absent (plane-set disjointness not verified)"),
    }
    if args.collinearity {
        for (name, m) in [("M_A", design.m_a()), ("M_B", design.m_b()), ("M_AB", design.m_ab())] {
            match unique_collinearity_violation(m) {
                None => println!("collinearity {name}: ok"),
                Some((i, j)) => println!("collinearity {name}: violated by pools ({i}, {j})"),
            }
        }
    }
    if let Some(d) = args.disjunct {
        for (name, m) in [("M_A", design.m_a()), ("M_B", design.m_b())] {
            println!("disjunct({d}) {name}: {}", is_disjunct(m, d, budget)?);
        }
    }
    if let Some(d) = args.separable {
        let stacked_a = design.stacked_a()?;
        let stacked_b = design.stacked_b()?;
        println!(
            "separable({d}) [M_A; M_AB]: {}",
            is_separable(&stacked_a, d, budget)?
        );
        println!(
            "separable({d}) [M_B; M_AB]: {}",
            is_separable(&stacked_b, d, budget)?
        );
    }
    if let Some(d) = args.two_type {
        println!(
            "two-type separable({d}): {}",
            is_two_type_separable(&design, d, budget)?
        );
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let design = PoolingDesign::read_file(&args.design)?;
    let noise = NoiseModel::new(args.sensitivity, args.specificity)?;
    let priors = Priors::new(args.prior_a, args.prior_b)?;
    let settings = BpSettings {
        epsilon: args.epsilon,
        max_iterations: args.max_iterations,
        ..BpSettings::default()
    };
    let mut rng = poolscreen_core::experiment::replication_rng(args.seed, 0);
    let truth = if args.bernoulli {
        plant_bernoulli(design.n_items(), priors.p_a(), priors.p_b(), &mut rng)?
    } else {
        plant_fixed(design.n_items(), args.count_a, args.count_b, &mut rng)?
    };
    let observations = observe(&design, &truth, noise, &mut rng)?;
    let outcome = run_bp(&design, &observations, priors, noise, settings)?;
    eprintln!(
        "converged={} iterations={}",
        outcome.converged, outcome.iterations
    );
    let dump = SimulationDump::new(
        args.seed,
        outcome.converged,
        outcome.iterations,
        &truth,
        &outcome.marginals,
    );
    let text = match args.format.parse::<OutputFormat>()? {
        OutputFormat::Csv => dump.to_csv(&truth),
        OutputFormat::Json => dump.to_json()?,
        OutputFormat::Table => {
            return Err(Error::InvalidParameter(
                "simulate supports csv or json output".into(),
            ))
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

const EXPERIMENT_CONFIG_KEYS: &[&str] = &[
    "q",
    "ka",
    "kb",
    "kab",
    "design_file",
    "count_a",
    "count_b",
    "bernoulli",
    "sensitivity",
    "specificity",
    "prior_a",
    "prior_b",
    "replications",
    "seed",
    "epsilon",
    "max_iterations",
    "format",
    "out",
    "grid",
];

/// Flag value if present, else the config value, else `None`.
fn merged<T>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>, Error>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get_parsed(key),
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), Error> {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    for key in cfg.keys() {
        if !EXPERIMENT_CONFIG_KEYS.contains(&key) {
            return Err(Error::InvalidParameter(format!(
                "unknown config key {key:?} (expected one of {EXPERIMENT_CONFIG_KEYS:?})"
            )));
        }
    }

    let q = merged(args.q, &cfg, "q")?.unwrap_or(7);
    let ka = merged(args.ka.clone(), &cfg, "ka")?.unwrap_or_else(|| "0,1,2".to_string());
    let kb = merged(args.kb.clone(), &cfg, "kb")?.unwrap_or_else(|| "0,1,2".to_string());
    let kab = merged(args.kab.clone(), &cfg, "kab")?.unwrap_or_else(|| "3,4,5,6".to_string());
    let design_file = match &args.design_file {
        Some(p) => Some(p.clone()),
        None => cfg.get("design_file").map(PathBuf::from),
    };
    let count_a = merged(args.count_a, &cfg, "count_a")?.unwrap_or(6);
    let count_b = merged(args.count_b, &cfg, "count_b")?.unwrap_or(6);
    let bernoulli = args.bernoulli || cfg.get_parsed::<bool>("bernoulli")?.unwrap_or(false);
    let sensitivity =
        merged(args.sensitivity, &cfg, "sensitivity")?.unwrap_or(DEFAULT_SENSITIVITY);
    let specificity =
        merged(args.specificity, &cfg, "specificity")?.unwrap_or(DEFAULT_SPECIFICITY);
    let prior_a = merged(args.prior_a, &cfg, "prior_a")?.unwrap_or(DEFAULT_PRIOR);
    let prior_b = merged(args.prior_b, &cfg, "prior_b")?.unwrap_or(DEFAULT_PRIOR);
    let replications = merged(args.replications, &cfg, "replications")?.unwrap_or(1000);
    let seed = merged(args.seed, &cfg, "seed")?.unwrap_or(1);
    let epsilon = merged(args.epsilon, &cfg, "epsilon")?.unwrap_or(1e-6);
    let max_iterations = merged(args.max_iterations, &cfg, "max_iterations")?.unwrap_or(200);
    let format: OutputFormat = merged(args.format.clone(), &cfg, "format")?
        .unwrap_or_else(|| "table".to_string())
        .parse()?;
    let out = match &args.out {
        Some(p) => p.clone(),
        None => PathBuf::from(cfg.get("out").unwrap_or("results")),
    };
    let grid = args.grid || cfg.get_parsed::<bool>("grid")?.unwrap_or(false);

    let noise = NoiseModel::new(sensitivity, specificity)?;
    let priors = Priors::new(prior_a, prior_b)?;
    let settings = BpSettings {
        epsilon,
        max_iterations,
        ..BpSettings::default()
    };

    if grid {
        return run_grid_command(q, noise, priors, replications, seed, settings, &out);
    }

    let design = match design_file {
        Some(path) => DesignSource::File(path),
        None => DesignSource::Planes {
            q,
            k_a: parse_plane_list(&ka)?,
            k_b: parse_plane_list(&kb)?,
            k_ab: parse_plane_list(&kab)?,
        },
    };
    let planting = if bernoulli {
        Planting::Bernoulli
    } else {
        Planting::Fixed { count_a, count_b }
    };
    let config = ExperimentConfig {
        design,
        planting,
        noise,
        priors,
        replications,
        seed,
        settings,
    };
    let result = run_experiment(&config)?;
    print!("{}", summary_text(&result.summary));
    let written = emit_results(&result, format, &out)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_grid_command(
    q: u32,
    noise: NoiseModel,
    priors: Priors,
    replications: usize,
    seed: u64,
    settings: BpSettings,
    out: &Path,
) -> Result<(), Error> {
    let (ks, counts) = default_grid_axes();
    let ks: Vec<u32> = ks.into_iter().filter(|&k| k < q).collect();
    let cells = run_grid(q, &ks, &counts, noise, priors, replications, seed, settings)?;
    let table = grid_table(q, &cells);
    print!("{table}");
    std::fs::create_dir_all(out)?;
    let table_path = out.join("grid.txt");
    std::fs::write(&table_path, &table)?;
    println!("wrote {}", table_path.display());
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BudgetExceeded { .. } => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Design(args) => cmd_design(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
