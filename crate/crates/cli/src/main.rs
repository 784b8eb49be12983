use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use offload_core::cost::{CostModel, Weights};
use offload_core::harness::{
    emit_csv, emit_json, run_scenario, topology, verify_instance, write_csv, Method, MethodEntry, OutputFormat,
    RunRecord, Scenario,
};
use offload_core::network::{generate_network, GenParams, NetworkGraph};
use offload_core::{build_sink_tree, units};

/// Task partitioning and offloading experiments on multi-hop edge networks
#[derive(Parser, Debug)]
#[command(name = "offload", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a random connected network and write it as a network file
    Generate(GenerateArgs),
    /// Print the sink tree of a network
    Tree(InstanceArgs),
    /// Run one method on the scenario's instance
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Method label (cmo, pmo, ga, pmo-ga, local, partial, master-worker,
        /// multi-hop); defaults to the scenario's first method
        #[arg(long)]
        method: Option<String>,
    },
    /// Run every method of the scenario on its instance
    Compare(RunArgs),
    /// Run the scenario's parameter sweep
    Sweep(RunArgs),
    /// Check solver invariants on one instance
    Verify(InstanceArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Generator parameters as JSON; flags below override its fields
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output network file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Scenario file whose network (and cost model) to use
    #[arg(long, conflicts_with_all = ["network", "topology"])]
    scenario: Option<PathBuf>,
    /// Network file
    #[arg(long, conflicts_with = "topology")]
    network: Option<PathBuf>,
    /// Shipped topology name
    #[arg(long)]
    topology: Option<String>,
    /// Task size in Gbit when no scenario is given
    #[arg(long, default_value_t = 1.0)]
    task_size_gbit: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Replaces the generator seed and every GA seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; records go to stdout when neither this nor the
    /// scenario names one
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Timed repetitions per method and point
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(a) => generate(a).map(|_| ExitCode::SUCCESS),
        Command::Tree(a) => tree(a).map(|_| ExitCode::SUCCESS),
        Command::Solve { run, method } => {
            let mut s = load_scenario(&run)?;
            let m = match method {
                Some(label) => {
                    Method::from_label(&label).with_context(|| format!("unknown or parameterized method {label:?}"))?
                }
                None => s.resolved_methods().remove(0),
            };
            s.methods = vec![MethodEntry::Full(m)];
            s.sweep = None;
            execute(&s).map(|_| ExitCode::SUCCESS)
        }
        Command::Compare(run) => {
            let mut s = load_scenario(&run)?;
            s.sweep = None;
            execute(&s).map(|_| ExitCode::SUCCESS)
        }
        Command::Sweep(run) => {
            let s = load_scenario(&run)?;
            if s.sweep.is_none() {
                bail!("scenario {:?} has no sweep", s.id);
            }
            execute(&s).map(|_| ExitCode::SUCCESS)
        }
        Command::Verify(a) => verify(a),
    }
}

fn load_scenario(a: &RunArgs) -> Result<Scenario> {
    let mut s = Scenario::load(&a.scenario).with_context(|| format!("loading {}", a.scenario.display()))?;
    if a.seed.is_some() {
        s.seed = a.seed;
    }
    if let Some(r) = a.reps {
        s.repetitions = r;
    }
    if let Some(f) = a.format {
        s.output.format = f.into();
    }
    if let Some(d) = &a.out {
        s.output.dir = Some(d.clone());
    }
    s.validate()?;
    Ok(s)
}

fn execute(s: &Scenario) -> Result<()> {
    let records = run_scenario(s)?;
    match &s.output.dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = write_records(&records, dir, &s.id, s.output.format)?;
            for r in &records {
                println!("{}", summary(r));
            }
            println!("wrote {} records to {}", records.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            match s.output.format {
                OutputFormat::Csv => write_csv(&records, stdout.lock())?,
                OutputFormat::Json => {
                    let mut out = stdout.lock();
                    serde_json::to_writer_pretty(&mut out, &records)?;
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

fn write_records(records: &[RunRecord], dir: &Path, id: &str, format: OutputFormat) -> Result<PathBuf> {
    let path = match format {
        OutputFormat::Csv => dir.join(format!("{id}.csv")),
        OutputFormat::Json => dir.join(format!("{id}.json")),
    };
    match format {
        OutputFormat::Csv => emit_csv(records, &path)?,
        OutputFormat::Json => emit_json(records, &path)?,
    }
    Ok(path)
}

fn summary(r: &RunRecord) -> String {
    let point = match (&r.sweep_param, r.sweep_value) {
        (Some(p), Some(v)) => format!(" {p}={v}"),
        _ => String::new(),
    };
    format!(
        "{:<16}{point} J={:.6e} T={:.6e}s E={:.6e}J t_exe={:.3e}s",
        r.method, r.cost_j, r.max_t_total_s, r.max_e_total_j, r.t_exe_s
    )
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut g: GenParams = match &a.params {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => GenParams::default(),
    };
    if let Some(n) = a.nodes {
        g.node_count = n;
    }
    if let Some(p) = a.edge_prob {
        g.edge_prob = p;
    }
    if let Some(s) = a.seed {
        g.seed = s;
    }
    let net = generate_network(&g)?;
    match a.out {
        Some(p) => net.save(&p)?,
        None => println!("{}", net.to_json()),
    }
    Ok(())
}

/// Network, cost model and task size (bits) of an instance.
fn instance(a: &InstanceArgs) -> Result<(NetworkGraph, CostModel, f64)> {
    if let Some(path) = &a.scenario {
        let mut s = Scenario::load(path)?;
        if a.seed.is_some() {
            s.seed = a.seed;
        }
        return Ok((s.network()?, s.model()?, s.task_size_bits()));
    }
    let net = match (&a.network, &a.topology) {
        (Some(p), _) => NetworkGraph::load(p)?,
        (None, Some(name)) => topology(name)?,
        (None, None) => bail!("one of --scenario, --network or --topology is required"),
    };
    let model = CostModel::with_weights(Weights { time: 0.5, energy: 0.05 });
    Ok((net, model, units::gbit_to_bit(a.task_size_gbit)))
}

fn tree(a: InstanceArgs) -> Result<()> {
    let (net, _, _) = instance(&a)?;
    let t = build_sink_tree(&net)?;
    println!("nodes {} height {} subtrees {}", t.len(), t.height(), t.subtree_roots().len());
    println!("{:>4} {:>6} {:>6} {:>5} {:>12} {:>8}", "id", "graph", "parent", "depth", "rate_gbps", "subtree");
    for i in 0..t.len() {
        let parent = t.parent(i).map_or("-".to_string(), |p| t.original(p).to_string());
        let rate = t.edge_rate(i).map_or("-".to_string(), |r| format!("{:.4}", r / units::GIGA));
        let sub = t.subtree_of(i).map_or("-".to_string(), |k| k.to_string());
        let relay = if t.relay_only().contains(&i) { " relay-only" } else { "" };
        println!(
            "{i:>4} {:>6} {parent:>6} {:>5} {rate:>12} {sub:>8}{relay}",
            t.original(i),
            t.depth(i)
        );
    }
    Ok(())
}

fn verify(a: InstanceArgs) -> Result<ExitCode> {
    let (net, model, y) = instance(&a)?;
    let t = build_sink_tree(&net)?;
    let checks = verify_instance(&t, y, &model)?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
