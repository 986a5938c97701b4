//! Monte Carlo screening experiments and worst-rank statistics.
//!
//! One replication plants a ground truth, evaluates and perturbs the pool
//! states, decodes, sorts the items of each type by posterior defect
//! probability and records the *worst rank*: the lowest position at which a
//! true defective still appears. The experiment repeats this with
//! independent per-replication RNG streams (same seed ⇒ byte-identical
//! records, at any thread count) and summarizes the worst-rank distribution
//! by its 95% and 99% quantiles, taken as the ceil(α·R)-th order statistic.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bp::{BpSettings, Decoder, FactorGraph, Marginals};
use crate::design::{build_design, PoolingDesign};
use crate::error::{Error, Result};
use crate::par;
use crate::sim::{observe, plant_bernoulli, plant_fixed, GroundTruth, NoiseModel, Priors};

/// Which defect type a ranking refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemType {
    A,
    B,
}

/// Items sorted by P(defective for `ty`) descending; ties broken by
/// ascending item index, so the order is deterministic.
pub fn rank_items(marginals: &Marginals, ty: ItemType) -> Vec<u32> {
    let p = |c: usize| match ty {
        ItemType::A => marginals.p_defective_a(c),
        ItemType::B => marginals.p_defective_b(c),
    };
    let mut order: Vec<u32> = (0..marginals.n_items() as u32).collect();
    order.sort_by(|&i, &j| {
        p(j as usize)
            .total_cmp(&p(i as usize))
            .then(i.cmp(&j))
    });
    order
}

/// The largest 1-based position of any true defective of `ty` in `ranking`,
/// or 0 when no defective of that type was planted.
pub fn worst_rank(ranking: &[u32], truth: &GroundTruth, ty: ItemType) -> usize {
    let x = match ty {
        ItemType::A => &truth.x_a,
        ItemType::B => &truth.x_b,
    };
    ranking
        .iter()
        .enumerate()
        .filter(|(_, &item)| x[item as usize])
        .map(|(pos, _)| pos + 1)
        .max()
        .unwrap_or(0)
}

/// The ceil(α·R)-th order statistic of an ascending slice.
pub fn quantile_ceil(sorted: &[usize], alpha: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let x = alpha * sorted.len() as f64;
    // tolerate rounding in α·R when it is meant to be an integer
    let k = if (x - x.round()).abs() < 1e-9 {
        x.round() as usize
    } else {
        x.ceil() as usize
    };
    Some(sorted[k.clamp(1, sorted.len()) - 1])
}

/// The independent RNG stream of one replication: a fixed key from the
/// experiment seed, with the replication index as the stream number.
pub fn replication_rng(seed: u64, replication: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Where the design comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignSource {
    Planes {
        q: u32,
        k_a: Vec<u32>,
        k_b: Vec<u32>,
        k_ab: Vec<u32>,
    },
    File(PathBuf),
}

impl DesignSource {
    pub fn load(&self) -> Result<PoolingDesign> {
        match self {
            DesignSource::Planes { q, k_a, k_b, k_ab } => build_design(*q, k_a, k_b, k_ab),
            DesignSource::File(path) => PoolingDesign::read_file(path),
        }
    }
}

/// How ground truths are planted per replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Planting {
    /// Exactly this many defectives of each type, uniformly placed.
    Fixed { count_a: usize, count_b: usize },
    /// Independent Bernoulli indicators at the decoder's prior rates.
    Bernoulli,
}

/// Everything one experiment needs. All fields have config-file twins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub design: DesignSource,
    pub planting: Planting,
    pub noise: NoiseModel,
    pub priors: Priors,
    pub replications: usize,
    pub seed: u64,
    pub settings: BpSettings,
}

/// Paper defaults: sensitivity 0.97, specificity 0.99, priors 0.002.
pub const DEFAULT_SENSITIVITY: f64 = 0.97;
pub const DEFAULT_SPECIFICITY: f64 = 0.99;
pub const DEFAULT_PRIOR: f64 = 0.002;

/// One replication's outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRecord {
    pub replication: u32,
    pub worst_rank_a: usize,
    pub worst_rank_b: usize,
    pub converged: bool,
    pub iterations: u32,
}

/// A replication that aborted instead of producing ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepFailure {
    pub replication: u32,
    pub message: String,
}

/// Worst-rank quantiles for one defect type. `counted` is the number of
/// replications that planted at least one defective of the type; quantiles
/// are `None` when nothing could be counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSummary {
    pub counted: usize,
    pub q95: Option<usize>,
    pub q99: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub replications: usize,
    pub failed: usize,
    pub converged: usize,
    /// Fraction of successful replications whose decoder converged.
    pub convergence_rate: f64,
    pub type_a: TypeSummary,
    pub type_b: TypeSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub summary: RankSummary,
    pub records: Vec<RankRecord>,
    pub failures: Vec<RepFailure>,
}

fn type_summary(mut ranks: Vec<usize>) -> TypeSummary {
    ranks.sort_unstable();
    TypeSummary {
        counted: ranks.len(),
        q95: quantile_ceil(&ranks, 0.95),
        q99: quantile_ceil(&ranks, 0.99),
    }
}

/// Summarizes records (quantiles per type, convergence) plus failure counts.
/// Replications that planted no defective of a type (worst rank 0) are
/// excluded from that type's quantiles.
pub fn summarize(records: &[RankRecord], failures: usize) -> RankSummary {
    let converged = records.iter().filter(|r| r.converged).count();
    let ranks_a: Vec<usize> = records
        .iter()
        .map(|r| r.worst_rank_a)
        .filter(|&w| w > 0)
        .collect();
    let ranks_b: Vec<usize> = records
        .iter()
        .map(|r| r.worst_rank_b)
        .filter(|&w| w > 0)
        .collect();
    RankSummary {
        replications: records.len() + failures,
        failed: failures,
        converged,
        convergence_rate: if records.is_empty() {
            0.0
        } else {
            converged as f64 / records.len() as f64
        },
        type_a: type_summary(ranks_a),
        type_b: type_summary(ranks_b),
    }
}

/// Runs one replication against a prebuilt graph.
fn run_replication(
    design: &PoolingDesign,
    graph: &FactorGraph,
    config: &ExperimentConfig,
    replication: u32,
) -> Result<RankRecord> {
    let mut rng = replication_rng(config.seed, replication);
    let n = design.n_items();
    let truth = match config.planting {
        Planting::Fixed { count_a, count_b } => plant_fixed(n, count_a, count_b, &mut rng)?,
        Planting::Bernoulli => {
            plant_bernoulli(n, config.priors.p_a(), config.priors.p_b(), &mut rng)?
        }
    };
    let observations = observe(design, &truth, config.noise, &mut rng)?;
    let outcome = Decoder::new(graph, &observations, config.priors, config.noise, config.settings)?
        .run()?;
    let ranking_a = rank_items(&outcome.marginals, ItemType::A);
    let ranking_b = rank_items(&outcome.marginals, ItemType::B);
    Ok(RankRecord {
        replication,
        worst_rank_a: worst_rank(&ranking_a, &truth, ItemType::A),
        worst_rank_b: worst_rank(&ranking_b, &truth, ItemType::B),
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}

/// Runs the full Monte Carlo experiment. Replications execute in parallel
/// (with the `parallel` feature) on independent RNG streams and are
/// collected in replication order; failed replications are reported, not
/// dropped.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.replications == 0 {
        return Err(Error::InvalidParameter(
            "replications must be at least 1".into(),
        ));
    }
    let design = config.design.load()?;
    if let Planting::Fixed { count_a, count_b } = config.planting {
        if count_a > design.n_items() || count_b > design.n_items() {
            return Err(Error::InvalidParameter(format!(
                "cannot plant {count_a}/{count_b} defectives among {} items",
                design.n_items()
            )));
        }
    }
    let graph = FactorGraph::new(&design);

    let outcomes: Vec<std::result::Result<RankRecord, String>> =
        par::map_indexed(config.replications, |rep| {
            run_replication(&design, &graph, config, rep as u32).map_err(|e| e.to_string())
        });

    let mut records = Vec::with_capacity(config.replications);
    let mut failures = Vec::new();
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(record) => records.push(record),
            Err(message) => failures.push(RepFailure {
                replication: rep as u32,
                message,
            }),
        }
    }
    let summary = summarize(&records, failures.len());
    Ok(ExperimentResult {
        summary,
        records,
        failures,
    })
}

/// One cell of the design/count sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub k: u32,
    pub count: usize,
    pub summary: RankSummary,
}

/// The sweep axes matching the reference simulation protocol: designs
/// k = 1..6 and 2, 4, …, 12 defectives per type.
pub fn default_grid_axes() -> (Vec<u32>, Vec<usize>) {
    ((1..=6).collect(), vec![2, 4, 6, 8, 10, 12])
}

/// Runs the design/count sweep over the split designs of a fixed q. Each
/// cell runs a full experiment with a cell-specific seed derived from
/// `base_seed`.
#[allow(clippy::too_many_arguments)]
pub fn run_grid(
    q: u32,
    ks: &[u32],
    counts: &[usize],
    noise: NoiseModel,
    priors: Priors,
    replications: usize,
    base_seed: u64,
    settings: BpSettings,
) -> Result<Vec<GridCell>> {
    let mut cells = Vec::with_capacity(ks.len() * counts.len());
    for &k in ks {
        let k_a: Vec<u32> = (0..k).collect();
        let k_ab: Vec<u32> = (k..q).collect();
        for &count in counts {
            let seed = base_seed
                .wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
                .wrapping_add(count as u64);
            let config = ExperimentConfig {
                design: DesignSource::Planes {
                    q,
                    k_a: k_a.clone(),
                    k_b: k_a.clone(),
                    k_ab: k_ab.clone(),
                },
                planting: Planting::Fixed {
                    count_a: count,
                    count_b: count,
                },
                noise,
                priors,
                replications,
                seed,
                settings,
            };
            let result = run_experiment(&config)?;
            cells.push(GridCell {
                k,
                count,
                summary: result.summary,
            });
        }
    }
    Ok(cells)
}
