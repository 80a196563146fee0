use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pcnet::config::NetworkConfig;
use pcnet::harness::{
    emit_rows, load_sweep, run_experiment, scenario_config, write_outputs, ControllerSpec, ExperimentConfig,
    MANIFEST_FILE,
};
use pcnet::policy::PolicySpec;
use pcnet::tucrl::{
    exact_transition_table, oracle_average_cost, JointActionSpace, TruncatedStateSpace, TucrlConfig,
    ORACLE_TOLERANCE,
};

#[derive(Parser)]
#[command(name = "pcnet", version, about = "Simulate and control partially-controllable queueing networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metrics.
    Simulate(SimulateArgs),
    /// Run a grid of loads and controllers and write one summary table.
    Sweep(SweepArgs),
    /// Solve the truncated model exactly and report its optimal average backlog.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct NetworkArgs {
    /// Network file (TOML).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Bundled network: fig2, scenario1 or scenario2.
    #[arg(long)]
    scenario: Option<String>,
}

impl NetworkArgs {
    fn load(&self) -> Result<NetworkConfig> {
        match (&self.config, &self.scenario) {
            (Some(path), _) => Ok(NetworkConfig::load(path)?),
            (None, Some(name)) => Ok(scenario_config(name)?),
            (None, None) => bail!("either --config or --scenario is required"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Maxweight,
    Tmw,
    Tucrl,
}

#[derive(Args)]
struct LearnerArgs {
    /// Truncation threshold V for tucrl.
    #[arg(long, default_value_t = 30)]
    truncation: u32,
    /// Iteration cap of each planning round.
    #[arg(long, default_value_t = 100_000)]
    evi_cap: usize,
    /// Multiplier of the confidence constant.
    #[arg(long, default_value_t = 1.0)]
    confidence_scale: f64,
}

impl LearnerArgs {
    fn controller(&self, algo: Algo) -> ControllerSpec {
        match algo {
            Algo::Maxweight => ControllerSpec::MaxWeight,
            Algo::Tmw => ControllerSpec::Tmw,
            Algo::Tucrl => ControllerSpec::Tucrl(TucrlConfig {
                truncation: self.truncation,
                max_evi_iterations: self.evi_cap,
                confidence_scale: self.confidence_scale,
            }),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1.0)]
    load: f64,
    #[arg(long, default_value_t = 100_000)]
    slots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: u32,
    /// Record metrics every this many slots.
    #[arg(long, default_value_t = 1)]
    stride: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Rerun a saved experiment (for example a run manifest); other run
    /// options are ignored.
    #[arg(long)]
    experiment: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tmw")]
    algo: Algo,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    loads: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "maxweight,tmw")]
    algos: Vec<Algo>,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, default_value_t = 1.0)]
    load: f64,
    #[arg(long, default_value_t = 30)]
    truncation: u32,
    #[arg(long, default_value_t = 1_000_000)]
    max_iterations: usize,
    /// Write the optimal policy, one row per state.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = match &args.experiment {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let mut cfg = ExperimentConfig::new(
                args.network.load()?,
                args.learner.controller(args.algo),
                args.run.load,
                args.run.slots,
                args.run.seed,
            );
            cfg.replications = args.run.replications;
            cfg.stride = args.run.stride;
            cfg
        }
    };
    let result = run_experiment(&cfg)?;
    let files = write_outputs(&args.out, &command_line(), &cfg, &result)?;
    for run in &result.runs {
        let s = &run.summary;
        println!(
            "replication {}: arrivals {} delivered {} dropped {} backlog {} (drop fraction {:.4}, slope {:.4})",
            s.replication, s.arrivals, s.delivered, s.dropped, s.backlog, s.drop_fraction, s.queue_slope
        );
        if !s.conserved {
            bail!("replication {} lost packets", s.replication);
        }
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let network = args.network.load()?;
    let controllers: Vec<_> = args.algos.iter().map(|&a| args.learner.controller(a)).collect();
    let mut base = ExperimentConfig::new(network, controllers[0], args.loads[0], args.run.slots, args.run.seed);
    base.replications = args.run.replications;
    base.stride = args.run.stride.max(args.run.slots);
    let points = load_sweep(&base, &args.loads, &controllers)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let table = args.out.join("sweep.csv");
    emit_rows(&points, &table)?;
    std::fs::write(args.out.join(MANIFEST_FILE), sweep_manifest(&base, &args.loads, &controllers))
        .with_context(|| format!("writing manifest in {}", args.out.display()))?;
    for p in &points {
        println!("{:>6} {:>9} final queue {:>12.1} slope {:>9.4}", p.load, p.controller, p.final_queue, p.queue_slope);
    }
    println!("wrote {}", table.display());
    Ok(())
}

fn sweep_manifest(base: &ExperimentConfig, loads: &[f64], controllers: &[ControllerSpec]) -> String {
    let names: Vec<_> = controllers.iter().map(|c| c.name()).collect();
    format!(
        "# pcnet {}\n# command: {}\n# loads: {:?}\n# controllers: {}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        command_line(),
        loads,
        names.join(","),
        base.to_toml()
    )
}

fn oracle(args: OracleArgs) -> Result<()> {
    let cfg = args.network.load()?;
    let net = cfg.build(args.load)?;
    let policy = cfg.policy.build(&net, 0)?;
    let space = TruncatedStateSpace::new(&net, args.truncation)?;
    let actions = JointActionSpace::new(&net)?;
    let table = exact_transition_table(&net, policy.as_ref(), &space, &actions)?;
    let solution = oracle_average_cost(&table, &space.costs(), ORACLE_TOLERANCE, args.max_iterations)?;
    println!(
        "states {} actions {} optimal average backlog {:.6} ({} iterations)",
        space.len(),
        actions.len(),
        solution.gain,
        solution.iterations
    );
    if let Some(dir) = &args.out {
        write_policy(dir, &space, &solution.policy, &cfg.policy)?;
    }
    Ok(())
}

fn write_policy(dir: &Path, space: &TruncatedStateSpace, policy: &[usize], spec: &PolicySpec) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("oracle_policy.csv");
    let mut text = String::new();
    let header: Vec<String> = space
        .queues()
        .iter()
        .map(|(i, k)| format!("q_{}_{}", i.label(), k.label()))
        .chain(["action".to_string()])
        .collect();
    text.push_str(&header.join(","));
    text.push('\n');
    for (s, a) in policy.iter().enumerate() {
        let row: Vec<String> = space.coords(s).iter().map(|c| c.to_string()).chain([a.to_string()]).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} (underlay {:?})", path.display(), spec);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::Oracle(args) => oracle(args),
    }
}
