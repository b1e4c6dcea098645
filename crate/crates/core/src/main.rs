use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use eprdist::allocation::{run_strategy, AllocationInstance, ExactLimits, Strategy};
use eprdist::harness::{emit_csv, emit_plot, format_float, run_inputs, run_placement_sweep, ExperimentConfig};
use eprdist::metrics::{jain_index, normalization_reference, normalized_min_rate};
use eprdist::netgraph::{GraphOptions, LossParams, RoutingGraph};
use eprdist::routing::{all_pair_routes, pair_route, RoutePlan};
use eprdist::spectrum::{generation_rates, ChannelGrid, SpectrumProfile};
use eprdist::topology::PhysicalTopology;

/// Entanglement distribution from a single broadband source: spectrum,
/// routing, channel allocation and placement sweeps.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the channel grid and per-channel generation rates.
    Rates {
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Minimum-loss disjoint routes from the source to node pairs.
    Route {
        #[command(flatten)]
        network: NetworkArgs,
        /// Only this pair, as `i,j` node ids.
        #[arg(long)]
        pair: Option<String>,
    },
    /// Allocate channels to all node pairs with one strategy.
    Allocate {
        #[command(flatten)]
        network: NetworkArgs,
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(long, default_value = "bd-matching")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Randomized pair orders to average over (order-sensitive
        /// strategies only).
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Node budget for the exact strategy.
        #[arg(long, default_value_t = ExactLimits::default().max_nodes)]
        exact_max_nodes: u64,
        /// Relative gap at which the exact strategy stops.
        #[arg(long, default_value_t = 0.0)]
        exact_gap: f64,
    },
    /// Sweep every source placement and write a CSV report.
    Sweep {
        /// JSON experiment config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed for all randomized runs.
        #[arg(long)]
        seed: u64,
        /// Topology file or bundled name, when no config is given.
        #[arg(long)]
        topology: Option<String>,
        #[arg(long)]
        runs: Option<usize>,
        /// Comma-separated WSS losses in dB.
        #[arg(long, value_delimiter = ',')]
        wss_db: Option<Vec<f64>>,
        /// Comma-separated strategy names.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<Strategy>>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write an SVG bar chart here.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    fwhm_nm: Option<f64>,
    #[arg(long)]
    pitch_nm: Option<f64>,
}

impl SpectrumArgs {
    fn apply(&self, grid: &mut ChannelGrid, profile: &mut SpectrumProfile) {
        if let Some(m) = self.channels {
            grid.channel_count = m;
        }
        if let Some(p) = self.pitch_nm {
            grid.channel_pitch_nm = p;
        }
        if let Some(f) = self.fwhm_nm {
            profile.fwhm_nm = f;
        }
    }

    fn resolve(&self) -> Result<(ChannelGrid, SpectrumProfile)> {
        let mut grid = ChannelGrid::default();
        let mut profile = SpectrumProfile::default();
        self.apply(&mut grid, &mut profile);
        grid.validate()?;
        profile.validate()?;
        Ok((grid, profile))
    }
}

#[derive(Args)]
struct NetworkArgs {
    /// Topology file or bundled name (`simple6`, `ilec17`).
    #[arg(long)]
    topology: String,
    /// Node id hosting the source.
    #[arg(long)]
    source: String,
    #[arg(long, default_value_t = 8.0)]
    wss_db: f64,
    #[arg(long, default_value_t = LossParams::default().fiber_db_per_km)]
    fiber_db_per_km: f64,
    /// Forbid leaving a node through the port a path entered by.
    #[arg(long)]
    no_u_turns: bool,
}

impl NetworkArgs {
    fn load(&self) -> Result<(PhysicalTopology, LossParams, GraphOptions, RoutingGraph)> {
        let topology = PhysicalTopology::open(&self.topology)?;
        let source = topology.node_index(&self.source)?;
        let loss = LossParams::new(self.fiber_db_per_km, self.wss_db)?;
        let options = GraphOptions {
            allow_u_turns: !self.no_u_turns,
        };
        let graph = RoutingGraph::build(&topology, source, &loss, &options)?;
        Ok((topology, loss, options, graph))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rates { spectrum } => rates(&spectrum),
        Command::Route { network, pair } => route(&network, pair.as_deref()),
        Command::Allocate {
            network,
            spectrum,
            strategy,
            seed,
            runs,
            exact_max_nodes,
            exact_gap,
        } => {
            let limits = ExactLimits {
                max_nodes: exact_max_nodes,
                relative_gap: exact_gap,
            };
            allocate(&network, &spectrum, strategy, seed, runs, &limits)
        }
        Command::Sweep {
            config,
            seed,
            topology,
            runs,
            wss_db,
            strategies,
            output,
            plot,
            spectrum,
        } => {
            let mut config = match (config, topology) {
                (Some(path), over) => {
                    let mut c = ExperimentConfig::load(&path)
                        .with_context(|| format!("loading config {}", path.display()))?;
                    if let Some(t) = over {
                        c.topology_path = t;
                    }
                    c
                }
                (None, Some(t)) => ExperimentConfig::new(t),
                (None, None) => bail!("sweep needs --config or --topology"),
            };
            config.seed = seed;
            if let Some(r) = runs {
                config.runs = r;
            }
            if let Some(l) = wss_db {
                config.wss_losses = l;
            }
            if let Some(s) = strategies {
                config.strategies = s;
            }
            if let Some(o) = output {
                config.output_path = o;
            }
            if plot.is_some() {
                config.plot_path = plot;
            }
            spectrum.apply(&mut config.grid, &mut config.profile);
            sweep(&config)
        }
    }
}

fn rates(args: &SpectrumArgs) -> Result<()> {
    let (grid, profile) = args.resolve()?;
    let rates = generation_rates(&grid, &profile);
    println!("channel,wavelength_nm,frequency_thz,bandwidth_ghz,rate");
    for x in 1..=grid.channel_count {
        println!(
            "{x},{},{},{},{}",
            format_float(grid.center_wavelength(x)?),
            format_float(grid.center_frequency(x)?),
            format_float(grid.bandwidth(x)?),
            format_float(rates[x - 1])
        );
    }
    Ok(())
}

fn print_plan(graph: &RoutingGraph, plan: &RoutePlan) {
    let (i, j) = plan.pair;
    println!(
        "{}-{}\t{:.4}\t{:.6e}\t{}\t{}",
        graph.node_id(i),
        graph.node_id(j),
        plan.total_loss,
        plan.eta,
        plan.hops(graph, &plan.path_i).join(" "),
        plan.hops(graph, &plan.path_j).join(" ")
    );
}

fn route(args: &NetworkArgs, pair: Option<&str>) -> Result<()> {
    let (topology, _, _, graph) = args.load()?;
    println!("pair\tloss_db\teta\tpath_i\tpath_j");
    if let Some(pair) = pair {
        let (a, b) = pair
            .split_once(',')
            .with_context(|| format!("--pair expects `i,j`, got `{pair}`"))?;
        let (i, j) = (topology.node_index(a.trim())?, topology.node_index(b.trim())?);
        match pair_route(&graph, i, j)? {
            Some(plan) => print_plan(&graph, &plan),
            None => bail!("no edge-disjoint route pair for {a},{b}"),
        }
        return Ok(());
    }
    let routes = all_pair_routes(&graph)?;
    for plan in &routes.plans {
        print_plan(&graph, plan);
    }
    for &(i, j) in &routes.infeasible {
        println!("{}-{}\tinfeasible", graph.node_id(i), graph.node_id(j));
    }
    Ok(())
}

fn allocate(
    network: &NetworkArgs,
    spectrum: &SpectrumArgs,
    strategy: Strategy,
    seed: u64,
    runs: usize,
    limits: &ExactLimits,
) -> Result<()> {
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let (topology, loss, options, graph) = network.load()?;
    let (grid, profile) = spectrum.resolve()?;
    let routes = all_pair_routes(&graph)?;
    if !routes.is_feasible() {
        bail!(
            "{} pair(s) have no edge-disjoint route pair from source {}",
            routes.infeasible.len(),
            network.source
        );
    }
    let instance = AllocationInstance::new(routes.etas(), generation_rates(&grid, &profile))?;
    let reference = normalization_reference(&topology, &loss, &grid, &profile, &options)?.value;
    let k = instance.pair_count();
    let runs = if strategy.order_sensitive() { runs } else { 1 };

    let mut mean_received = vec![0.0; k];
    let (mut min_sum, mut jain_sum, mut incomplete) = (0.0, 0.0, 0);
    for r in 0..runs {
        let (order, run_seed) = run_inputs(seed, r, k);
        let outcome = run_strategy(strategy, &instance, &order, run_seed, limits)?;
        if !outcome.complete {
            incomplete += 1;
        }
        for (m, v) in mean_received.iter_mut().zip(&outcome.allocation.received) {
            *m += v / runs as f64;
        }
        min_sum += outcome.allocation.min_rate();
        jain_sum += jain_index(&outcome.allocation.received);
    }

    println!("pair\teta\tmean_received");
    for (plan, rate) in routes.plans.iter().zip(&mean_received) {
        let (i, j) = plan.pair;
        println!("{}-{}\t{:.6e}\t{}", graph.node_id(i), graph.node_id(j), plan.eta, format_float(*rate));
    }
    let mean_min = min_sum / runs as f64;
    println!("strategy\t{strategy}");
    println!("runs\t{runs}");
    println!("mean_min_rate\t{}", format_float(mean_min));
    println!("mean_min_rate_normalized\t{}", format_float(normalized_min_rate(mean_min, reference)?));
    println!("mean_jain\t{}", format_float(jain_sum / runs as f64));
    println!("normalization_reference\t{}", format_float(reference));
    if incomplete > 0 {
        println!("budget_exceeded_runs\t{incomplete}");
    }
    Ok(())
}

fn sweep(config: &ExperimentConfig) -> Result<()> {
    let report = run_placement_sweep(config)?;
    emit_csv(&report, &config.output_path)?;
    eprintln!("wrote {} rows to {}", report.rows.len(), config.output_path.display());
    if let Some(plot) = &config.plot_path {
        emit_plot(&report, plot)?;
        eprintln!("wrote plot to {}", plot.display());
    }
    Ok(())
}
