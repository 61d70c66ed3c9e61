use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use opinion_core::edge_process::census;
use opinion_core::experiments::{
    coexistence_experiment, consensus_experiment, degree_bound_check, sweep_experiment,
    write_snapshot, ExperimentReport, ExperimentSpec,
};
use opinion_core::graph::parse_edge_list;
use opinion_core::statics::index_bounds;
use opinion_core::urn::{play_random, play_strategy_s, trajectory_csv, UrnState};
use opinion_core::{
    count_opinions, random_initial, simulate, weights_from_opinions, Error, Graph, GraphSpec,
    SimParams, StopCondition,
};

/// Confidence-threshold voter model: simulation, opinion-index bounds,
/// Monte Carlo experiments and the box-and-ball game.
#[derive(Parser, Debug)]
#[command(name = "opinion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One seeded run; prints the report as JSON.
    Simulate(SimulateArgs),
    /// Lower, upper and (small graphs) exact opinion-index values with witnesses.
    Index(IndexArgs),
    /// Extremist/consensus frequencies for thresholds above 1/2.
    Consensus(ExperimentArgs),
    /// Surviving opinion counts on a path (`--graph path:N`).
    Coexistence(ExperimentArgs),
    /// Threshold sweep on a torus (`--graph torus:WxH`) to a fixed time.
    Sweep(ExperimentArgs),
    /// Non-absorbing initial states against the union bound, and final opinion fractions.
    Degree(ExperimentArgs),
    /// Play the box-and-ball game.
    Urn(UrnArgs),
    /// Print a named graph as an edge list.
    Graph(GraphOnly),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// path:N, cycle:N, complete:N or torus:WxH.
    #[arg(long)]
    graph: Option<GraphSpec>,
    /// Edge-list file: "N M" then one "i j" per line.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

impl GraphSource {
    fn load(&self) -> Result<(Graph, String), Error> {
        match (&self.graph, &self.graph_file) {
            (Some(spec), _) => Ok((spec.build()?, spec.to_string())),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)?;
                Ok((parse_edge_list(&text)?, path.display().to_string()))
            }
            (None, None) => unreachable!("clap requires one graph source"),
        }
    }
}

#[derive(Args, Debug)]
struct GraphOnly {
    #[arg(long)]
    graph: GraphSpec,
}

#[derive(Args, Debug)]
struct StopArgs {
    /// Stop at this model time.
    #[arg(long, conflicts_with = "to_absorption")]
    t_max: Option<f64>,
    /// Stop after this many executed copies.
    #[arg(long)]
    max_events: Option<u64>,
    /// Run until no edge can interact (the default without --t-max).
    #[arg(long)]
    to_absorption: bool,
}

impl StopArgs {
    fn stop(&self, default_t_max: Option<f64>) -> StopCondition {
        let t_max = if self.to_absorption {
            None
        } else {
            self.t_max.or(default_t_max)
        };
        let stop = match t_max {
            Some(t) => StopCondition::until(t),
            None => StopCondition::to_absorption(),
        };
        match self.max_events {
            Some(m) => stop.with_max_events(m),
            None => stop,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_parser = parse_epsilon)]
    eps: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    stop: StopArgs,
    /// Also write report.json and the final edge census (census.json) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_parser = parse_epsilon)]
    eps: f64,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    source: GraphSource,
    /// A single threshold.
    #[arg(long, value_parser = parse_epsilon, conflicts_with = "eps_grid", required_unless_present = "eps_grid")]
    eps: Option<f64>,
    /// Comma-separated thresholds; fractions such as 1/3 are accepted.
    #[arg(long, value_parser = parse_epsilon, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    stop: StopArgs,
    /// Directory for report.json, records.csv and snapshots.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write snapshot_<eps>.pgm of replicate 0 (sweep only).
    #[arg(long)]
    snapshot: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    #[value(name = "S", alias = "s")]
    S,
    Random,
}

#[derive(Args, Debug)]
struct UrnArgs {
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Balls in each of boxes 1..=J at the start.
    #[arg(long)]
    balls: u64,
    /// J, the highest box.
    #[arg(long)]
    boxes: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random games (random strategy).
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// Directory for trajectory.csv (strategy S).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("not a number: {s}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("not a number: {s}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("not a number: {s}"))?,
    };
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::EpsilonOutOfRange(value).to_string())
    }
}

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        use std::hash::{BuildHasher, RandomState};
        let seed = RandomState::new().hash_one(std::time::SystemTime::now());
        eprintln!("seed={seed}");
        seed
    })
}

/// Writes to standard output; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<(), Error> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn run_simulate(a: &SimulateArgs) -> Result<(), Error> {
    let (g, _) = a.source.load()?;
    let seed = seed_or_fresh(a.seed);
    let init = random_initial(&g, seed);
    let report = simulate(&g, &init, &SimParams::new(a.eps, a.stop.stop(None), seed))?;
    let json = report.to_json();
    emit(&format!("{json}\n"))?;
    if let Some(dir) = &a.out {
        write_file(dir, "report.json", format!("{json}\n"))?;
        if a.eps > 0.0 {
            let c = census(&weights_from_opinions(&g, &report.final_opinions), a.eps)?;
            write_file(
                dir,
                "census.json",
                serde_json::to_string_pretty(&c).expect("census serializes") + "\n",
            )?;
        }
    }
    Ok(())
}

fn run_index(a: &IndexArgs) -> Result<(), Error> {
    let (g, name) = a.source.load()?;
    let b = index_bounds(&g, a.eps)?;
    let out = json!({
        "graph": name,
        "epsilon": b.epsilon,
        "lower": b.lower,
        "lower_source": b.lower_source,
        "lower_witness": b.lower_witness,
        "lower_witness_opinions": count_opinions(&b.lower_witness),
        "upper": b.upper,
        "upper_choice": b.upper_choice,
        "exact": b.exact,
        "exact_witness": b.exact_witness,
    });
    emit(&(serde_json::to_string_pretty(&out).expect("json") + "\n"))
}

fn experiment_spec(a: &ExperimentArgs, name: String, default_t_max: Option<f64>) -> ExperimentSpec {
    let grid = match (&a.eps_grid, a.eps) {
        (Some(grid), _) => grid.clone(),
        (None, Some(e)) => vec![e],
        (None, None) => unreachable!("clap requires a threshold"),
    };
    ExperimentSpec::new(name, grid, a.reps, seed_or_fresh(a.seed))
        .with_stop(a.stop.stop(default_t_max))
        .with_workers(a.workers)
}

fn summary(report: &ExperimentReport) -> String {
    let mut text = String::new();
    for agg in &report.aggregates {
        let mut line = format!(
            "eps={} reps={} nu={:.3}±{:.3} nu_min={} consensus={:.4}±{:.4}",
            agg.epsilon,
            agg.replicates,
            agg.nu.mean,
            agg.nu.radius,
            agg.nu_min,
            agg.consensus.mean,
            agg.consensus.radius
        );
        if let Some(t) = agg.theta_inf_zero {
            line.push_str(&format!(" theta_inf_zero={:.4}±{:.4}", t.mean, t.radius));
        }
        text.push_str(&line);
        text.push('\n');
    }
    for c in &report.checks {
        let verdict = if c.holds { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "{verdict} eps={} {}: observed {} vs {}\n",
            c.epsilon, c.name, c.observed, c.bound
        ));
    }
    text
}

fn save_report(report: &ExperimentReport, out: Option<&Path>) -> Result<(), Error> {
    if let Some(dir) = out {
        write_file(dir, "report.json", report.to_json() + "\n")?;
        write_file(dir, "records.csv", report.records_csv())?;
    }
    Ok(())
}

fn run_experiment(kind: &Command, a: &ExperimentArgs) -> Result<(), Error> {
    let report = match kind {
        Command::Consensus(_) => {
            let (g, name) = a.source.load()?;
            consensus_experiment(&g, &experiment_spec(a, name, None))?
        }
        Command::Coexistence(_) => {
            let Some(GraphSpec::Path(n)) = a.source.graph else {
                return Err(Error::InvalidArgument(
                    "coexistence needs --graph path:N".into(),
                ));
            };
            coexistence_experiment(n, &experiment_spec(a, format!("path:{n}"), None))?
        }
        Command::Sweep(_) => {
            let Some(GraphSpec::Torus(w, h)) = a.source.graph else {
                return Err(Error::InvalidArgument(
                    "sweep needs --graph torus:WxH".into(),
                ));
            };
            let out = sweep_experiment(
                w,
                h,
                &experiment_spec(a, format!("torus:{w}x{h}"), Some(1000.0)),
            )?;
            if let (true, Some(dir)) = (a.snapshot, &a.out) {
                fs::create_dir_all(dir)?;
                for (eps, c) in &out.snapshots {
                    write_snapshot(c, w, h, &dir.join(format!("snapshot_{eps}.pgm")))?;
                }
            }
            out.report
        }
        Command::Degree(_) => {
            let (g, name) = a.source.load()?;
            degree_bound_check(&g, &experiment_spec(a, name, None))?
        }
        _ => unreachable!(),
    };
    emit(&summary(&report))?;
    save_report(&report, a.out.as_deref())
}

fn run_urn(a: &UrnArgs) -> Result<(), Error> {
    match a.strategy {
        Strategy::S => {
            let (steps, trajectory) = play_strategy_s(a.balls, a.boxes)?;
            emit(&format!("steps={steps}\n"))?;
            if let Some(dir) = &a.out {
                write_file(dir, "trajectory.csv", trajectory_csv(&trajectory))?;
            }
        }
        Strategy::Random => {
            let start = UrnState::uniform(a.balls, a.boxes)?;
            let seed = seed_or_fresh(a.seed);
            for r in 0..a.reps {
                let (end, steps) = play_random(&start, opinion_core::seed::replicate_seed(seed, r));
                let counts: Vec<String> = end.counts.iter().map(u64::to_string).collect();
                emit(&format!(
                    "steps={steps} bound={} final={}\n",
                    3 * a.balls,
                    counts.join(",")
                ))?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Index(a) => run_index(a),
        c @ (Command::Consensus(a)
        | Command::Coexistence(a)
        | Command::Sweep(a)
        | Command::Degree(a)) => run_experiment(c, a),
        Command::Urn(a) => run_urn(a),
        Command::Graph(a) => emit(&a.graph.build()?.to_edge_list()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
