//! Seed-reproducible ensembles of collapse runs.
//!
//! Every run draws from its own stream derived from `(master_seed,
//! run_index)`, and tallies merge by plain integer addition, so the result
//! is a pure function of the configuration no matter how many workers
//! execute it. Detection efficiency is modeled as i.i.d. Bernoulli
//! registration per run, drawn from the run's own stream.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse_walk::{run_collapse, SimplexPoint, WalkConfig};
use crate::error::{Error, Result};
use crate::rng::run_rng;
use crate::special::chi_square_survival;

/// Environment variable capping ensemble parallelism.
pub const THREADS_ENV_VAR: &str = "COLLAPSE_WALK_THREADS";

/// Ensemble size, seeding, walk parameters, and detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub runs: u64,
    pub master_seed: u64,
    pub walk: WalkConfig,
    /// Probability that a run registers in the tallies, in (0, 1].
    pub efficiency: f64,
}

impl EnsembleConfig {
    pub fn new(runs: u64, master_seed: u64, walk: WalkConfig) -> Result<Self> {
        if runs == 0 {
            return Err(Error::InvalidConfig {
                reason: "ensemble needs at least one run".into(),
            });
        }
        Ok(EnsembleConfig {
            runs,
            master_seed,
            walk,
            efficiency: 1.0,
        })
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::InvalidConfig {
                reason: format!("efficiency must lie in (0, 1], got {efficiency}"),
            });
        }
        self.efficiency = efficiency;
        Ok(self)
    }
}

/// Everything needed to reproduce an ensemble byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub p: Vec<f64>,
    pub runs: u64,
    pub master_seed: u64,
    #[serde(rename = "M")]
    pub resolution: u64,
    pub efficiency: f64,
    pub version: String,
}

/// Path lengths bucketed geometrically: bucket 0 holds zero-step runs,
/// bucket `k >= 1` holds steps in `[2^(k-1), 2^k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepHistogram {
    /// Lower bound of each bucket.
    pub edges: Vec<u64>,
    pub counts: Vec<u64>,
}

impl StepHistogram {
    fn edges_for(max_steps: u64) -> Vec<u64> {
        let mut edges = vec![0u64, 1];
        let mut hi = 2u64;
        while hi <= max_steps {
            edges.push(hi);
            match hi.checked_mul(2) {
                Some(next) => hi = next,
                None => break,
            }
        }
        edges
    }

    fn bucket(edges: &[u64], steps: u64) -> usize {
        match edges.binary_search(&steps) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }
}

/// Pearson statistic, degrees of freedom, and tail probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Aggregated results of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub manifest: Manifest,
    /// Absorption tally per vertex, over registered runs only.
    pub counts: Vec<u64>,
    pub runs: u64,
    /// Runs surviving efficiency thinning.
    pub registered: u64,
    /// `counts / registered`.
    pub frequencies: Vec<f64>,
    pub step_histogram: StepHistogram,
    /// Present when every vertex has expected count >= 5.
    pub chi_square: Option<ChiSquare>,
}

#[derive(Clone)]
struct Tally {
    counts: Vec<u64>,
    registered: u64,
    hist: Vec<u64>,
}

impl Tally {
    fn zero(d: usize, buckets: usize) -> Self {
        Tally {
            counts: vec![0; d],
            registered: 0,
            hist: vec![0; buckets],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.registered += other.registered;
        self
    }
}

/// Run the ensemble, reading the thread cap from [`THREADS_ENV_VAR`].
pub fn run_ensemble(p: &SimplexPoint, config: &EnsembleConfig) -> Result<EnsembleStats> {
    let threads = std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0);
    run_ensemble_with_threads(p, config, threads)
}

/// Run the ensemble on an explicit number of worker threads (`None` uses the
/// global pool). Results are identical for every choice.
pub fn run_ensemble_with_threads(
    p: &SimplexPoint,
    config: &EnsembleConfig,
    threads: Option<usize>,
) -> Result<EnsembleStats> {
    let d = p.dim();
    let edges = StepHistogram::edges_for(config.walk.max_steps);
    let buckets = edges.len();

    let body = || -> Result<Tally> {
        (0..config.runs)
            .into_par_iter()
            .map(|run| -> Result<Tally> {
                let mut rng = run_rng(config.master_seed, run);
                let registers = rng.random::<f64>() < config.efficiency;
                let outcome = run_collapse(p, &config.walk, &mut rng)?;
                let mut tally = Tally::zero(d, buckets);
                if registers {
                    tally.counts[outcome.vertex] = 1;
                    tally.registered = 1;
                    tally.hist[StepHistogram::bucket(&edges, outcome.steps)] = 1;
                }
                Ok(tally)
            })
            .try_reduce(|| Tally::zero(d, buckets), |a, b| Ok(a.merge(b)))
    };

    let tally = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig {
                reason: format!("thread pool: {e}"),
            })?
            .install(body),
        None => body(),
    }?;

    if tally.registered == 0 {
        return Err(Error::DegenerateEnsemble {
            runs: config.runs,
            efficiency: config.efficiency,
        });
    }

    let frequencies = tally
        .counts
        .iter()
        .map(|&c| c as f64 / tally.registered as f64)
        .collect();
    let manifest = Manifest {
        p: p.coords().to_vec(),
        runs: config.runs,
        master_seed: config.master_seed,
        resolution: config.walk.resolution,
        efficiency: config.efficiency,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut stats = EnsembleStats {
        manifest,
        counts: tally.counts,
        runs: config.runs,
        registered: tally.registered,
        frequencies,
        step_histogram: StepHistogram {
            edges,
            counts: tally.hist,
        },
        chi_square: None,
    };
    if let Ok(chi) = chi_square_gof(&stats, p) {
        stats.chi_square = Some(chi);
    }
    Ok(stats)
}

/// Pearson goodness-of-fit of the registered tallies against expected
/// frequencies `p`, with `d - 1` degrees of freedom.
///
/// Requires every expected count to reach 5; the tail probability comes from
/// the regularized upper incomplete gamma function.
pub fn chi_square_gof(stats: &EnsembleStats, p: &SimplexPoint) -> Result<ChiSquare> {
    let registered = stats.registered as f64;
    let mut statistic = 0.0;
    for (vertex, (&obs, &prob)) in stats.counts.iter().zip(p.coords()).enumerate() {
        let expected = registered * prob;
        if expected < 5.0 {
            return Err(Error::InsufficientSample { vertex, expected });
        }
        let diff = obs as f64 - expected;
        statistic += diff * diff / expected;
    }
    let dof = p.dim() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_survival(statistic, dof),
    })
}

/// Output encoding for [`export`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

/// Write the stats to disk.
///
/// JSON carries the full stats including the manifest and round-trips
/// losslessly. CSV holds one `vertex,count,frequency,expected` row per
/// vertex; the manifest goes to a `.manifest.json` sidecar since the row
/// format has no room for it.
pub fn export(stats: &EnsembleStats, format: ExportFormat, path: &Path) -> Result<()> {
    let write = |p: &Path, body: String| -> Result<()> {
        std::fs::write(p, body).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    match format {
        ExportFormat::Json => {
            let mut body = serde_json::to_string_pretty(stats)?;
            body.push('\n');
            write(path, body)
        }
        ExportFormat::Csv => {
            let mut body = String::from("vertex,count,frequency,expected\n");
            for (vertex, (&count, &freq)) in
                stats.counts.iter().zip(&stats.frequencies).enumerate()
            {
                let expected = stats.registered as f64 * stats.manifest.p[vertex];
                body.push_str(&format!("{vertex},{count},{freq},{expected}\n"));
            }
            write(path, body)?;
            let mut manifest = serde_json::to_string_pretty(&stats.manifest)?;
            manifest.push('\n');
            write(&path.with_extension("manifest.json"), manifest)
        }
    }
}
