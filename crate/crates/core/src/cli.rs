//! Command-line harness: builds a [`SimConfig`] from flags (or from a saved
//! manifest), runs it, and writes the output set into a directory.
//!
//! Output files:
//! - `convergence.csv`: `round,colony,dst,hop_length,status`, one row per ant
//! - `summary.csv`: `dst,min_hop_length,bfs_shortest,match`
//! - `rounds.csv`: per-round counts, link count and overlay cost
//! - `overlay.txt`: final overlay links with a cost footer
//! - `demand.txt`: the demand table the footer cost was priced with
//! - `state.txt`: final per-node state
//! - `graph.txt`: the physical network
//! - `manifest.json`: everything needed to reproduce the run
//! - `selections.csv`: exploiter edge choices, only with `--instrument`

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ants::AntParams;
use crate::colony::{ColonyParams, EtaDenominator};
use crate::cost::{total_cost, CostParams};
use crate::engine::{
    estimated_demand, ColonySchedule, ConfigError, GraphSource, Metrics, SimConfig, SimError,
    Simulation,
};
use crate::topology::{shortest_hops, NodeId, OverlayNetwork, PhysicalNetwork, TopologyError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("graph file {path}: {source}")]
    Graph {
        path: PathBuf,
        source: TopologyError,
    },
    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },
    #[error("bad --colony value {0:?}: expected name=count")]
    ColonySpec(String),
    #[error("--paper-defaults cannot be combined with --{0}")]
    PaperDefaultsOverride(&'static str),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Three-colony ant routing simulator.
#[derive(Debug, Parser)]
#[command(name = "dps", version)]
struct Args {
    /// Run the reference experiment: 10 nodes, mean degree 4, default parameters.
    /// Only --seed, --rounds and --out may be combined with it.
    #[arg(long = "paper-defaults")]
    reference: bool,
    /// Re-run a saved manifest.json; only --out may be combined with it.
    #[arg(long, value_name = "FILE", conflicts_with = "reference")]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Generated graph size [default: 10]
    #[arg(long)]
    nodes: Option<usize>,
    /// Mean degree of the generated graph; must give a whole edge count [default: 4]
    #[arg(long)]
    avg_degree: Option<f64>,
    /// Edge-list file (`n N` header, then `u v` lines) instead of a generated graph.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["nodes", "avg_degree"])]
    graph: Option<PathBuf>,
    /// Seeds both graph generation and the run [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// [default: 1000]
    #[arg(long)]
    rounds: Option<u64>,
    /// Source node [default: 0]
    #[arg(long)]
    src: Option<usize>,
    /// Comma-separated destinations; default is every node but the source.
    #[arg(long, value_delimiter = ',')]
    dsts: Option<Vec<usize>>,
    /// Volume carried by each forward ant [default: 1]
    #[arg(long)]
    volume: Option<f64>,
    /// `name=count`, repeatable; replaces the default one-of-each schedule.
    #[arg(long = "colony", value_name = "NAME=COUNT")]
    colonies: Vec<String>,

    /// Pheromone exponent [default: 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Desirability exponent [default: 3]
    #[arg(long)]
    beta: Option<f64>,
    /// Local evaporation and smoothing rate [default: 0.05]
    #[arg(long)]
    rho: Option<f64>,
    /// Global evaporation rate [default: 0.02]
    #[arg(long)]
    rho_g: Option<f64>,
    /// Negative marking rate [default: 0.02]
    #[arg(long)]
    rho_n: Option<f64>,
    /// Initial pheromone and magnitude bound [default: 0.1]
    #[arg(long)]
    tau0: Option<f64>,
    /// No-entry threshold for exploiters; <= -tau0 disables it [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    tau_min: Option<f64>,
    /// Overlay value scale [default: 100]
    #[arg(long)]
    q: Option<f64>,
    /// Overlay value floor [default: 0.1]
    #[arg(long)]
    sigma0: Option<f64>,
    /// Cost per physical hop of a logical link [default: 2]
    #[arg(long)]
    c_h: Option<f64>,
    /// Cost per unit demand per virtual link crossed [default: 1]
    #[arg(long)]
    c_t: Option<f64>,

    /// Logical link lifetime in rounds [default: 50]
    #[arg(long)]
    ttl: Option<u64>,
    /// A trail longer than gamma x the best known is bad [default: 1.5]
    #[arg(long)]
    gamma: Option<f64>,
    /// Hop estimate behind desirability: `to-dst` or `to-src` [default: to-dst]
    #[arg(long)]
    eta_denominator: Option<EtaDenominator>,
    /// Rounds between expiry/evaporation passes [default: 1]
    #[arg(long)]
    evaporation_period: Option<u64>,
    /// Log every exploiter edge choice to selections.csv.
    #[arg(long)]
    instrument: bool,
}

impl Args {
    /// Flags that change the experiment itself, by name.
    fn overrides(&self) -> Vec<&'static str> {
        let set = [
            ("nodes", self.nodes.is_some()),
            ("avg-degree", self.avg_degree.is_some()),
            ("graph", self.graph.is_some()),
            ("src", self.src.is_some()),
            ("dsts", self.dsts.is_some()),
            ("volume", self.volume.is_some()),
            ("colony", !self.colonies.is_empty()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("rho", self.rho.is_some()),
            ("rho-g", self.rho_g.is_some()),
            ("rho-n", self.rho_n.is_some()),
            ("tau0", self.tau0.is_some()),
            ("tau-min", self.tau_min.is_some()),
            ("q", self.q.is_some()),
            ("sigma0", self.sigma0.is_some()),
            ("c-h", self.c_h.is_some()),
            ("c-t", self.c_t.is_some()),
            ("ttl", self.ttl.is_some()),
            ("gamma", self.gamma.is_some()),
            ("eta-denominator", self.eta_denominator.is_some()),
            ("evaporation-period", self.evaporation_period.is_some()),
            ("instrument", self.instrument),
        ];
        set.into_iter()
            .filter(|(_, on)| *on)
            .map(|(name, _)| name)
            .collect()
    }
}

/// How the graph was obtained, as recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSpec {
    Generate { nodes: usize, avg_degree: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColonySpec {
    pub name: String,
    pub count: usize,
}

/// Fully resolved run description. Re-running it reproduces every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub graph: GraphSpec,
    /// SHA-256 of the canonical edge list.
    pub graph_fingerprint: String,
    pub rounds: u64,
    pub src: usize,
    pub dsts: Vec<usize>,
    pub volume: f64,
    pub colonies: Vec<ColonySpec>,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub rho_g: f64,
    pub rho_n: f64,
    pub tau0: f64,
    pub tau_min: f64,
    pub q: f64,
    pub sigma0: f64,
    pub c_h: f64,
    pub c_t: f64,
    pub ttl: u64,
    pub gamma: f64,
    pub eta_denominator: String,
    pub evaporation_period: u64,
    pub instrument: bool,
}

impl RunManifest {
    fn describe(
        config: &SimConfig,
        graph: GraphSpec,
        net: &PhysicalNetwork,
        dsts: &[NodeId],
    ) -> Self {
        let c = &config.ant.colony;
        RunManifest {
            version: VERSION.to_string(),
            seed: config.seed,
            graph,
            graph_fingerprint: net.fingerprint(),
            rounds: config.rounds,
            src: config.src.index(),
            dsts: dsts.iter().map(|d| d.index()).collect(),
            volume: config.volume,
            colonies: config
                .colonies
                .iter()
                .map(|s| ColonySpec {
                    name: s.name.clone(),
                    count: s.count,
                })
                .collect(),
            alpha: c.alpha,
            beta: c.beta,
            rho: c.rho,
            rho_g: c.rho_g,
            rho_n: c.rho_n,
            tau0: c.tau0,
            tau_min: c.tau_min,
            q: c.q,
            sigma0: c.sigma0,
            c_h: config.ant.cost.c_h,
            c_t: config.ant.cost.c_t,
            ttl: config.ttl,
            gamma: config.ant.gamma,
            eta_denominator: config.ant.eta_denominator.to_string(),
            evaporation_period: config.evaporation_period,
            instrument: config.instrument,
        }
    }

    fn to_config(&self, origin: &Path) -> Result<SimConfig, CliError> {
        let bad = |msg: String| CliError::Manifest {
            path: origin.to_path_buf(),
            msg,
        };
        let graph = match &self.graph {
            GraphSpec::Generate { nodes, avg_degree } => GraphSource::Generate {
                nodes: *nodes,
                avg_degree: *avg_degree,
            },
            GraphSpec::File { path } => GraphSource::Network(load_graph(path)?),
        };
        let eta_denominator = self
            .eta_denominator
            .parse()
            .map_err(|e| bad(format!("{e}")))?;
        let config = SimConfig {
            graph,
            seed: self.seed,
            rounds: self.rounds,
            src: NodeId(self.src),
            destinations: Some(self.dsts.iter().copied().map(NodeId).collect()),
            volume: self.volume,
            colonies: self
                .colonies
                .iter()
                .map(|s| ColonySchedule::new(s.name.clone(), s.count))
                .collect(),
            ant: AntParams {
                colony: ColonyParams {
                    alpha: self.alpha,
                    beta: self.beta,
                    rho: self.rho,
                    rho_g: self.rho_g,
                    rho_n: self.rho_n,
                    tau0: self.tau0,
                    tau_min: self.tau_min,
                    q: self.q,
                    sigma0: self.sigma0,
                },
                cost: CostParams {
                    c_h: self.c_h,
                    c_t: self.c_t,
                },
                eta_denominator,
                gamma: self.gamma,
            },
            ttl: self.ttl,
            evaporation_period: self.evaporation_period,
            instrument: self.instrument,
        };
        let fingerprint = config.build_network()?.fingerprint();
        if fingerprint != self.graph_fingerprint {
            return Err(bad(format!(
                "graph fingerprint {fingerprint} does not match recorded {}",
                self.graph_fingerprint
            )));
        }
        Ok(config)
    }
}

fn load_graph(path: &Path) -> Result<PhysicalNetwork, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    PhysicalNetwork::from_text(&text).map_err(|source| CliError::Graph {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_colony(spec: &str) -> Result<ColonySchedule, CliError> {
    let (name, count) = spec
        .split_once('=')
        .ok_or_else(|| CliError::ColonySpec(spec.to_string()))?;
    let count = count
        .trim()
        .parse()
        .map_err(|_| CliError::ColonySpec(spec.to_string()))?;
    if name.trim().is_empty() {
        return Err(CliError::ColonySpec(spec.to_string()));
    }
    Ok(ColonySchedule::new(name.trim(), count))
}

fn config_from_args(args: &Args) -> Result<(SimConfig, GraphSpec), CliError> {
    let seed = args.seed.unwrap_or(0);
    let mut config = SimConfig::reference_defaults(seed);
    if args.reference {
        if let Some(flag) = args.overrides().first() {
            return Err(CliError::PaperDefaultsOverride(flag));
        }
    }
    if let Some(rounds) = args.rounds {
        config.rounds = rounds;
    }

    let spec = match &args.graph {
        Some(path) => {
            config.graph = GraphSource::Network(load_graph(path)?);
            GraphSpec::File { path: path.clone() }
        }
        None => {
            let GraphSource::Generate { nodes, avg_degree } = &mut config.graph else {
                unreachable!("defaults generate their graph")
            };
            *nodes = args.nodes.unwrap_or(*nodes);
            *avg_degree = args.avg_degree.unwrap_or(*avg_degree);
            GraphSpec::Generate {
                nodes: *nodes,
                avg_degree: *avg_degree,
            }
        }
    };

    if let Some(src) = args.src {
        config.src = NodeId(src);
    }
    if let Some(dsts) = &args.dsts {
        config.destinations = Some(dsts.iter().copied().map(NodeId).collect());
    }
    if let Some(v) = args.volume {
        config.volume = v;
    }
    if !args.colonies.is_empty() {
        config.colonies = args
            .colonies
            .iter()
            .map(|s| parse_colony(s))
            .collect::<Result<_, _>>()?;
    }

    let c = &mut config.ant.colony;
    for (slot, flag) in [
        (&mut c.alpha, args.alpha),
        (&mut c.beta, args.beta),
        (&mut c.rho, args.rho),
        (&mut c.rho_g, args.rho_g),
        (&mut c.rho_n, args.rho_n),
        (&mut c.tau0, args.tau0),
        (&mut c.tau_min, args.tau_min),
        (&mut c.q, args.q),
        (&mut c.sigma0, args.sigma0),
        (&mut config.ant.cost.c_h, args.c_h),
        (&mut config.ant.cost.c_t, args.c_t),
        (&mut config.ant.gamma, args.gamma),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(t) = args.ttl {
        config.ttl = t;
    }
    if let Some(e) = args.eta_denominator {
        config.ant.eta_denominator = e;
    }
    if let Some(p) = args.evaporation_period {
        config.evaporation_period = p;
    }
    config.instrument = args.instrument;
    Ok((config, spec))
}

/// `round,colony,dst,hop_length,status`, one row per dispatched ant.
pub fn convergence_csv(metrics: &Metrics) -> String {
    let mut out = String::from("round,colony,dst,hop_length,status\n");
    for r in &metrics.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.round,
            r.colony,
            r.dst,
            r.hop_count,
            r.status.name()
        );
    }
    out
}

/// `dst,min_hop_length,bfs_shortest,match`. A destination no ant reached has a
/// blank minimum and `match = false`.
pub fn summary_csv(
    metrics: &Metrics,
    net: &PhysicalNetwork,
    src: NodeId,
    dsts: &[NodeId],
) -> String {
    let bfs = shortest_hops(net, src);
    let mut out = String::from("dst,min_hop_length,bfs_shortest,match\n");
    for &dst in dsts {
        let best = metrics.min_hops.get(&dst).copied();
        let shortest = bfs[dst.index()];
        let min = best.map(|h| h.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{dst},{min},{shortest},{}", best == Some(shortest));
    }
    out
}

pub fn rounds_csv(metrics: &Metrics) -> String {
    let mut out =
        String::from("round,dispatched,arrived,dead_end,blocked,links,cost_estimated,unreachable,cost_injected\n");
    for r in &metrics.rounds {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.round,
            r.dispatched,
            r.arrived,
            r.dead_end,
            r.blocked,
            r.links,
            r.cost.estimated,
            r.cost.unreachable,
            r.cost.injected
        );
    }
    out
}

/// Snapshot body lines between a header comment and a footer comment carrying
/// the overlay cost `total` and the number of unreachable demand pairs.
pub fn overlay_snapshot(
    overlay: &OverlayNetwork,
    round: u64,
    total: f64,
    unreachable: usize,
) -> String {
    let mut out = format!(
        "# overlay after round {round}: owner endpoint serves_dst hop_length expires_round\n"
    );
    for line in overlay.snapshot_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    let _ = writeln!(out, "# total_cost {total} unreachable {unreachable}");
    out
}

fn selections_csv(metrics: &Metrics) -> String {
    let mut out = String::from("round,dst,from,to,tau\n");
    for s in &metrics.exploiter_selections {
        let _ = writeln!(out, "{},{},{},{},{}", s.round, s.dst, s.from, s.to, s.tau);
    }
    out
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path, source })
}

/// Writes `convergence.csv` and `summary.csv` into `dir`.
pub fn emit_convergence_csv(
    metrics: &Metrics,
    net: &PhysicalNetwork,
    src: NodeId,
    dsts: &[NodeId],
    dir: &Path,
) -> Result<(), CliError> {
    write(dir, "convergence.csv", &convergence_csv(metrics))?;
    write(dir, "summary.csv", &summary_csv(metrics, net, src, dsts))
}

/// Writes `overlay.txt` and the `demand.txt` its footer cost was priced with.
pub fn emit_overlay_snapshot(sim: &Simulation, dir: &Path) -> Result<(), CliError> {
    let cfg = sim.config();
    let demand = estimated_demand(sim.states(), cfg.src, sim.destinations());
    let eval = total_cost(sim.overlay(), sim.network(), &demand, &cfg.ant.cost);
    write(
        dir,
        "overlay.txt",
        &overlay_snapshot(
            sim.overlay(),
            sim.round(),
            eval.finite,
            eval.unreachable.len(),
        ),
    )?;
    write(dir, "demand.txt", &demand.to_text())
}

/// Runs the configured simulation and writes the full output set into `dir`.
pub fn run_to_dir(config: SimConfig, graph: GraphSpec, dir: &Path) -> Result<Simulation, CliError> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end()?;
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let (cfg, net, dsts) = (sim.config(), sim.network(), sim.destinations());
    let manifest = RunManifest::describe(cfg, graph, net, dsts);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");

    emit_convergence_csv(sim.metrics(), net, cfg.src, dsts, dir)?;
    emit_overlay_snapshot(&sim, dir)?;
    write(dir, "rounds.csv", &rounds_csv(sim.metrics()))?;
    write(dir, "state.txt", &sim.states().snapshot())?;
    write(dir, "graph.txt", &net.to_text())?;
    write(dir, "manifest.json", &(json + "\n"))?;
    if cfg.instrument {
        write(dir, "selections.csv", &selections_csv(sim.metrics()))?;
    }
    Ok(sim)
}

fn execute(args: Args) -> Result<Simulation, CliError> {
    let (config, spec) = match &args.manifest {
        Some(path) => {
            if let Some(flag) = args
                .overrides()
                .first()
                .copied()
                .or(args.seed.map(|_| "seed"))
                .or(args.rounds.map(|_| "rounds"))
            {
                return Err(CliError::Manifest {
                    path: path.clone(),
                    msg: format!("--{flag} cannot be combined with --manifest"),
                });
            }
            let text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            let manifest: RunManifest =
                serde_json::from_str(&text).map_err(|e| CliError::Manifest {
                    path: path.clone(),
                    msg: e.to_string(),
                })?;
            (manifest.to_config(path)?, manifest.graph)
        }
        None => config_from_args(&args)?,
    };
    run_to_dir(config, spec, &args.out)
}

/// Entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = args.out.clone();
    match execute(args) {
        Ok(sim) => {
            let m = sim.metrics();
            let bfs = shortest_hops(sim.network(), sim.config().src);
            let matched = sim
                .destinations()
                .iter()
                .filter(|d| m.min_hops.get(d) == Some(&bfs[d.index()]))
                .count();
            println!(
                "{} rounds, {} ants, {}/{} destinations reached at shortest length; outputs in {}",
                sim.round(),
                m.dispatched(),
                matched,
                sim.destinations().len(),
                out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("dps: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colony_spec_parses() {
        assert_eq!(
            parse_colony("exploiter=3").unwrap(),
            ColonySchedule::new("exploiter", 3)
        );
        assert!(parse_colony("exploiter").is_err());
        assert!(parse_colony("=2").is_err());
        assert!(parse_colony("positive=-1").is_err());
    }

    #[test]
    fn flags_override_defaults() {
        let args = Args::try_parse_from([
            "dps",
            "--nodes",
            "8",
            "--tau-min",
            "-1",
            "--rho",
            "0.1",
            "--colony",
            "positive=2",
            "--dsts",
            "3,5",
        ])
        .unwrap();
        let (cfg, spec) = config_from_args(&args).unwrap();
        assert_eq!(
            spec,
            GraphSpec::Generate {
                nodes: 8,
                avg_degree: 4.0
            }
        );
        assert_eq!(cfg.ant.colony.tau_min, -1.0);
        assert_eq!(cfg.ant.colony.rho, 0.1);
        assert_eq!(cfg.colonies, vec![ColonySchedule::new("positive", 2)]);
        assert_eq!(cfg.destinations, Some(vec![NodeId(3), NodeId(5)]));
        assert_eq!(cfg.ant.colony.beta, 3.0);
    }

    #[test]
    fn reference_defaults_are_the_reference_setup() {
        let args = Args::try_parse_from(["dps", "--paper-defaults", "--seed", "7"]).unwrap();
        let (cfg, _) = config_from_args(&args).unwrap();
        assert_eq!(cfg, SimConfig::reference_defaults(7));
        let args = Args::try_parse_from(["dps", "--paper-defaults", "--beta", "2"]).unwrap();
        assert!(matches!(
            config_from_args(&args),
            Err(CliError::PaperDefaultsOverride("beta"))
        ));
    }

    #[test]
    fn empty_overlay_snapshot_is_header_and_footer() {
        let text = overlay_snapshot(&OverlayNetwork::new(), 4, 0.0, 2);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "# total_cost 0 unreachable 2");
    }

    #[test]
    fn summary_marks_unreached_destinations() {
        let net = PhysicalNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut m = Metrics::default();
        m.min_hops.insert(NodeId(1), 1);
        let text = summary_csv(&m, &net, NodeId(0), &[NodeId(1), NodeId(2)]);
        assert_eq!(
            text,
            "dst,min_hop_length,bfs_shortest,match\n1,1,1,true\n2,,2,false\n"
        );
    }
}
