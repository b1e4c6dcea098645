//! Source-placement sweeps with order-randomized averaging.
//!
//! For every WSS loss, every source placement and every configured strategy
//! the sweep routes all node pairs, builds the allocation instance and runs
//! the strategy. Order-sensitive strategies run `runs` times, each run with
//! its own shuffled pair order; the rest run once.
//!
//! Per-run randomness: run `r` takes the `r`-th output of a SplitMix64
//! stream started at the master seed. That value seeds a ChaCha8 generator
//! which first shuffles the pair order and then draws the seed handed to
//! the `random` strategy. Run `r` therefore sees the same pair order for
//! every strategy, placement and loss.

mod csv_out;
mod plot;

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{exact_maxmin, run_strategy, AllocationInstance, ExactLimits, ExactStatus, Strategy};
use crate::error::{Error, Result};
use crate::metrics::{jain_index, normalization_reference, normalized_min_rate};
use crate::netgraph::{GraphOptions, LossParams, RoutingGraph};
use crate::routing::all_pair_routes;
use crate::spectrum::{generation_rates, ChannelGrid, SpectrumProfile};
use crate::topology::{PhysicalTopology, BUNDLED};

pub use csv_out::{emit_csv, format_float, format_significant, read_csv, write_csv, CSV_COLUMNS};
pub use plot::{emit_plot, render_svg};

/// Recorded in every emitted CSV so a file names its own generator.
pub const RNG_DESCRIPTION: &str =
    "rng=ChaCha8 (rand_chacha); run r seeded by the r-th SplitMix64 output from the master seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSweepLimits {
    /// The exact solver runs only when `channels · pairs` is at most this.
    #[serde(default = "default_max_problem_size")]
    pub max_problem_size: usize,
    #[serde(default = "default_max_nodes")]
    pub max_nodes: u64,
    #[serde(default = "default_relative_gap")]
    pub relative_gap: f64,
}

fn default_max_problem_size() -> usize {
    4000
}

fn default_max_nodes() -> u64 {
    2_000_000
}

fn default_relative_gap() -> f64 {
    1e-4
}

impl Default for ExactSweepLimits {
    fn default() -> Self {
        Self {
            max_problem_size: default_max_problem_size(),
            max_nodes: default_max_nodes(),
            relative_gap: default_relative_gap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Topology file, or the name of a bundled topology.
    pub topology_path: String,
    #[serde(default = "default_losses")]
    pub wss_losses: Vec<f64>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: ChannelGrid,
    #[serde(default)]
    pub profile: SpectrumProfile,
    #[serde(default = "default_fiber")]
    pub fiber_db_per_km: f64,
    #[serde(default = "default_true")]
    pub allow_u_turns: bool,
    #[serde(default)]
    pub exact: ExactSweepLimits,
    #[serde(default = "default_output")]
    pub output_path: PathBuf,
    #[serde(default)]
    pub plot_path: Option<PathBuf>,
}

fn default_losses() -> Vec<f64> {
    vec![4.0, 8.0]
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

fn default_runs() -> usize {
    1000
}

fn default_fiber() -> f64 {
    LossParams::default().fiber_db_per_km
}

fn default_true() -> bool {
    true
}

fn default_output() -> PathBuf {
    PathBuf::from("sweep.csv")
}

impl ExperimentConfig {
    /// Defaults for everything except the topology.
    pub fn new(topology_path: impl Into<String>) -> Self {
        Self {
            topology_path: topology_path.into(),
            wss_losses: default_losses(),
            strategies: default_strategies(),
            runs: default_runs(),
            seed: 0,
            grid: ChannelGrid::default(),
            profile: SpectrumProfile::default(),
            fiber_db_per_km: default_fiber(),
            allow_u_turns: true,
            exact: ExactSweepLimits::default(),
            output_path: default_output(),
            plot_path: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<config>".into(),
            source: e,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file. Relative file paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if !BUNDLED.iter().any(|(name, _)| *name == config.topology_path) {
            config.topology_path = base.join(&config.topology_path).to_string_lossy().into_owned();
        }
        config.output_path = base.join(&config.output_path);
        config.plot_path = config.plot_path.map(|p| base.join(p));
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies must not be empty".into()));
        }
        if self.wss_losses.is_empty() {
            return Err(Error::Config("wss_losses must not be empty".into()));
        }
        for &loss in &self.wss_losses {
            LossParams::new(self.fiber_db_per_km, loss)
                .map_err(|e| Error::Config(format!("wss loss {loss}: {e}")))?;
        }
        if !(self.exact.relative_gap >= 0.0) {
            return Err(Error::Config("exact.relative_gap must be >= 0".into()));
        }
        self.grid.validate()?;
        self.profile.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    /// Every run completed.
    Ok,
    /// Exact search stopped at its relative gap in at least one run.
    Gap,
    /// Exact search hit its node budget in at least one run.
    Budget,
    /// Not run: unroutable placement, instance over the exact size limit,
    /// or too few channels for the strategy.
    Skipped,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Gap => "gap",
            RowStatus::Budget => "budget",
            RowStatus::Skipped => "skipped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [RowStatus::Ok, RowStatus::Gap, RowStatus::Budget, RowStatus::Skipped]
            .into_iter()
            .find(|st| st.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub topology: String,
    pub wss_loss_db: f64,
    pub source_node: String,
    pub strategy: Strategy,
    /// NaN on skipped rows.
    pub mean_min_rate: f64,
    pub mean_min_rate_normalized: f64,
    pub mean_jain: f64,
    /// Executions aggregated; 0 on skipped rows.
    pub runs: usize,
    pub seed: u64,
    pub status: RowStatus,
    /// Sample standard deviations over runs; 0 for a single run.
    pub sd_min_rate: f64,
    pub sd_jain: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// Normalization constant per WSS loss, in sweep order.
    pub references: Vec<(f64, f64)>,
}

impl ExperimentReport {
    pub fn reference(&self, wss_loss_db: f64) -> Option<f64> {
        self.references
            .iter()
            .find(|(loss, _)| *loss == wss_loss_db)
            .map(|&(_, r)| r)
    }
}

/// SplitMix64 output mixer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run` (0-based): the `run`-th output of SplitMix64 started
/// at `master`.
pub fn run_seed(master: u64, run: usize) -> u64 {
    splitmix64(master.wrapping_add((run as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Pair order and `random`-strategy seed for one run.
pub fn run_inputs(master: u64, run: usize, pairs: usize) -> (Vec<usize>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(master, run));
    let mut order: Vec<usize> = (0..pairs).collect();
    order.shuffle(&mut rng);
    (order, rng.gen())
}

struct RunResult {
    min_rate: f64,
    jain: f64,
    status: RowStatus,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn execute(
    strategy: Strategy,
    instance: &AllocationInstance,
    order: &[usize],
    seed: u64,
    limits: &ExactLimits,
) -> Result<RunResult> {
    let (allocation, status) = if strategy == Strategy::Exact {
        let sol = exact_maxmin(instance, order, limits)?;
        let status = match sol.status {
            ExactStatus::Optimal => RowStatus::Ok,
            ExactStatus::WithinGap => RowStatus::Gap,
            ExactStatus::BudgetExceeded => RowStatus::Budget,
        };
        (sol.allocation, status)
    } else {
        (run_strategy(strategy, instance, order, seed, limits)?.allocation, RowStatus::Ok)
    };
    Ok(RunResult {
        min_rate: allocation.min_rate(),
        jain: jain_index(&allocation.received),
        status,
    })
}

struct Cell<'a> {
    loss: f64,
    reference: f64,
    source: usize,
    instance: Option<&'a AllocationInstance>,
    strategy: Strategy,
}

/// Runs the full (loss, source, strategy) sweep. Results are identical to a
/// sequential evaluation regardless of thread count.
pub fn run_placement_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let topology = PhysicalTopology::open(&config.topology_path)?;
    let rates = generation_rates(&config.grid, &config.profile);
    let options = GraphOptions {
        allow_u_turns: config.allow_u_turns,
    };
    let exact_limits = ExactLimits {
        max_nodes: config.exact.max_nodes,
        relative_gap: config.exact.relative_gap,
    };

    let mut references = Vec::with_capacity(config.wss_losses.len());
    let mut instances: Vec<Vec<Option<AllocationInstance>>> = Vec::new();
    for &loss_db in &config.wss_losses {
        let loss = LossParams::new(config.fiber_db_per_km, loss_db)?;
        let reference = normalization_reference(&topology, &loss, &config.grid, &config.profile, &options)?;
        references.push((loss_db, reference.value));
        let per_source = (0..topology.node_count())
            .into_par_iter()
            .map(|s| -> Result<Option<AllocationInstance>> {
                let graph = RoutingGraph::build(&topology, s, &loss, &options)?;
                let routes = all_pair_routes(&graph)?;
                if !routes.is_feasible() {
                    return Ok(None);
                }
                AllocationInstance::new(routes.etas(), rates.clone()).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        instances.push(per_source);
    }

    let mut cells = Vec::new();
    for (li, &(loss, reference)) in references.iter().enumerate() {
        for (source, instance) in instances[li].iter().enumerate() {
            for &strategy in &config.strategies {
                cells.push(Cell {
                    loss,
                    reference,
                    source,
                    instance: instance.as_ref(),
                    strategy,
                });
            }
        }
    }

    let rows = cells
        .par_iter()
        .map(|cell| -> Result<ReportRow> {
            let skipped = || ReportRow {
                topology: topology.name().to_string(),
                wss_loss_db: cell.loss,
                source_node: topology.node_id(cell.source).to_string(),
                strategy: cell.strategy,
                mean_min_rate: f64::NAN,
                mean_min_rate_normalized: f64::NAN,
                mean_jain: f64::NAN,
                runs: 0,
                seed: config.seed,
                status: RowStatus::Skipped,
                sd_min_rate: f64::NAN,
                sd_jain: f64::NAN,
            };
            let Some(instance) = cell.instance else {
                return Ok(skipped());
            };
            let k = instance.pair_count();
            let m = instance.channel_count();
            let too_big = cell.strategy == Strategy::Exact
                && m.saturating_mul(k) > config.exact.max_problem_size;
            let too_few = cell.strategy == Strategy::BdMatching && m < k;
            if too_big || too_few {
                return Ok(skipped());
            }
            let runs = if cell.strategy.order_sensitive() { config.runs } else { 1 };
            let results = (0..runs)
                .into_par_iter()
                .map(|r| {
                    let (order, seed) = run_inputs(config.seed, r, k);
                    execute(cell.strategy, instance, &order, seed, &exact_limits)
                })
                .collect::<Result<Vec<_>>>()?;
            let mins: Vec<f64> = results.iter().map(|r| r.min_rate).collect();
            let jains: Vec<f64> = results.iter().map(|r| r.jain).collect();
            let (mean_min_rate, sd_min_rate) = mean_sd(&mins);
            let (mean_jain, sd_jain) = mean_sd(&jains);
            let status = results
                .iter()
                .map(|r| r.status)
                .max_by_key(|s| match s {
                    RowStatus::Ok => 0,
                    RowStatus::Gap => 1,
                    RowStatus::Budget => 2,
                    RowStatus::Skipped => 3,
                })
                .unwrap_or(RowStatus::Ok);
            Ok(ReportRow {
                mean_min_rate_normalized: normalized_min_rate(mean_min_rate, cell.reference)?,
                mean_min_rate,
                mean_jain,
                runs,
                status,
                sd_min_rate,
                sd_jain,
                ..skipped()
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport { rows, references })
}
