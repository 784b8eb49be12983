use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::topologies::{topology, TOPOLOGY_NAMES};
use crate::cost::{CostModel, Weights};
use crate::error::{Error, Result};
use crate::heuristics::GaParams;
use crate::network::{generate_network, GenParams, NetworkFile, NetworkGraph};
use crate::units;

/// Where the network of a scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkSource {
    /// One of the shipped topologies.
    Topology(String),
    /// A network file; relative paths resolve against the scenario file.
    File(PathBuf),
    Inline(NetworkFile),
    Generate(GenParams),
}

/// A solver, heuristic or baseline to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Cmo,
    Pmo,
    Ga {
        #[serde(default)]
        params: GaParams,
    },
    /// PMO with the genetic search on every subtree.
    PmoGa {
        #[serde(default)]
        params: GaParams,
    },
    /// Node pruning, then `solver` on the pruned tree.
    Np { theta_p: f64, solver: Box<Method> },
    /// Level pruning, then `solver` on the pruned tree.
    Lp { xi: usize, solver: Box<Method> },
    Local,
    Partial,
    MasterWorker,
    MultiHop,
}

impl Method {
    /// Name used in records, e.g. `np+pmo`.
    pub fn label(&self) -> String {
        match self {
            Method::Cmo => "cmo".into(),
            Method::Pmo => "pmo".into(),
            Method::Ga { .. } => "ga".into(),
            Method::PmoGa { .. } => "pmo-ga".into(),
            Method::Np { solver, .. } => format!("np+{}", solver.label()),
            Method::Lp { solver, .. } => format!("lp+{}", solver.label()),
            Method::Local => "local".into(),
            Method::Partial => "partial".into(),
            Method::MasterWorker => "master-worker".into(),
            Method::MultiHop => "multi-hop".into(),
        }
    }

    /// Parameterless methods by label; `np+X` and `lp+X` need an object.
    pub fn from_label(s: &str) -> Option<Method> {
        Some(match s {
            "cmo" => Method::Cmo,
            "pmo" => Method::Pmo,
            "ga" => Method::Ga { params: GaParams::default() },
            "pmo-ga" => Method::PmoGa { params: GaParams::default() },
            "local" => Method::Local,
            "partial" => Method::Partial,
            "master-worker" => Method::MasterWorker,
            "multi-hop" => Method::MultiHop,
            _ => return None,
        })
    }

    fn problems(&self, at: &str, out: &mut Vec<String>) {
        match self {
            Method::Ga { params } | Method::PmoGa { params } => {
                if let Err(e) = params.validate() {
                    out.push(format!("{at}: {e}"));
                }
            }
            Method::Np { theta_p, solver } => {
                if !(0.0..=1.0).contains(theta_p) {
                    out.push(format!("{at}.theta_p: must lie in [0, 1], got {theta_p}"));
                }
                solver.inner_problems(&format!("{at}.solver"), out);
            }
            Method::Lp { solver, .. } => solver.inner_problems(&format!("{at}.solver"), out),
            _ => {}
        }
    }

    fn inner_problems(&self, at: &str, out: &mut Vec<String>) {
        match self {
            Method::Cmo | Method::Pmo | Method::Ga { .. } | Method::PmoGa { .. } => self.problems(at, out),
            other => out.push(format!(
                "{at}: pruning feeds cmo, pmo, ga or pmo-ga, not {}",
                other.label()
            )),
        }
    }

    fn with_seed(&mut self, seed: u64) {
        match self {
            Method::Ga { params } | Method::PmoGa { params } => params.seed = seed,
            Method::Np { solver, .. } | Method::Lp { solver, .. } => solver.with_seed(seed),
            _ => {}
        }
    }
}

/// Accepts either a full method object or a bare label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodEntry {
    Label(String),
    Full(Method),
}

impl MethodEntry {
    pub fn resolve(&self) -> Option<Method> {
        match self {
            MethodEntry::Label(s) => Method::from_label(s),
            MethodEntry::Full(m) => Some(m.clone()),
        }
    }
}

/// Parameter varied by a sweep. Values use the scenario units: Gbit for
/// task size, Gbps for link rates, GHz for frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "parameter", rename_all = "snake_case")]
pub enum SweepParam {
    TaskSize,
    /// Overrides `theta_p` of every node-pruning method.
    ThetaP,
    /// Overrides `xi` of every level-pruning method.
    Xi,
    /// Both directions of the link between graph nodes `i` and `j`.
    LinkRate { i: usize, j: usize },
    /// CPU frequency of graph node `node`.
    CpuFreq { node: usize },
    /// Keeps only the first `k` subtrees of the master.
    Subtrees,
}

impl SweepParam {
    pub fn name(&self) -> String {
        match self {
            SweepParam::TaskSize => "task_size".into(),
            SweepParam::ThetaP => "theta_p".into(),
            SweepParam::Xi => "xi".into(),
            SweepParam::LinkRate { i, j } => format!("link_rate({i},{j})"),
            SweepParam::CpuFreq { node } => format!("cpu_freq({node})"),
            SweepParam::Subtrees => "subtrees".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    #[serde(flatten)]
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_weights() -> Weights {
    Weights { time: 0.5, energy: 0.05 }
}

fn default_task_size() -> f64 {
    1.0
}

fn default_cycles() -> f64 {
    1e6
}

fn default_reps() -> usize {
    20
}

fn default_true() -> bool {
    true
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub network: NetworkSource,
    #[serde(default = "default_task_size")]
    pub task_size_gbit: f64,
    #[serde(default = "default_weights")]
    pub weights: Weights,
    #[serde(default = "default_cycles")]
    pub cycles_per_gbit: f64,
    pub methods: Vec<MethodEntry>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Timed runs per method and point; the mean is reported.
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    /// When set, replaces the generator seed and every GA seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// With timing off, `T_exe` is reported as 0 and reruns are
    /// byte-identical.
    #[serde(default = "default_true")]
    pub record_timing: bool,
    #[serde(default)]
    pub output: OutputSpec,
    /// Answer cmo and pmo from a cached baseline, rescaled, while the tree
    /// and cost model are unchanged; the baseline is re-solved whenever the
    /// tree hash changes.
    #[serde(default)]
    pub offline_online: bool,
    /// With `offline_online`, also re-solve after this many cached answers.
    #[serde(default)]
    pub baseline_refresh: Option<usize>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut s = Self::from_json(&std::fs::read_to_string(path)?)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    /// Every method resolved; validation guarantees success.
    pub fn resolved_methods(&self) -> Vec<Method> {
        self.methods
            .iter()
            .filter_map(MethodEntry::resolve)
            .map(|mut m| {
                if let Some(seed) = self.seed {
                    m.with_seed(seed);
                }
                m
            })
            .collect()
    }

    pub fn model(&self) -> Result<CostModel> {
        CostModel::new(self.weights, units::cycles_per_gbit_to_per_bit(self.cycles_per_gbit))
    }

    pub fn task_size_bits(&self) -> f64 {
        units::gbit_to_bit(self.task_size_gbit)
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.id.is_empty() {
            p.push("id: must not be empty".to_string());
        }
        if !(self.task_size_gbit >= 0.0 && self.task_size_gbit.is_finite()) {
            p.push(format!("task_size_gbit: must be non-negative, got {}", self.task_size_gbit));
        }
        if let Err(e) = self.weights.validate() {
            p.push(format!("weights: {e}"));
        }
        if !(self.cycles_per_gbit > 0.0 && self.cycles_per_gbit.is_finite()) {
            p.push(format!("cycles_per_gbit: must be positive, got {}", self.cycles_per_gbit));
        }
        if self.methods.is_empty() {
            p.push("methods: at least one method is required".into());
        }
        for (k, m) in self.methods.iter().enumerate() {
            match m.resolve() {
                Some(m) => m.problems(&format!("methods[{k}]"), &mut p),
                None => p.push(format!("methods[{k}]: unknown method {m:?}")),
            }
        }
        if self.repetitions == 0 {
            p.push("repetitions: must be at least 1".into());
        }
        if self.baseline_refresh == Some(0) {
            p.push("baseline_refresh: must be at least 1".into());
        }
        match &self.network {
            NetworkSource::Topology(name) if !TOPOLOGY_NAMES.contains(&name.as_str()) => p.push(format!(
                "network.topology: unknown name {name:?}; known: {}",
                TOPOLOGY_NAMES.join(", ")
            )),
            NetworkSource::Generate(g) => {
                if let Err(e) = g.validate() {
                    p.push(format!("network.generate: {e}"));
                }
            }
            _ => {}
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                p.push("sweep.values: must not be empty".into());
            }
            let resolved: Vec<Method> = self.methods.iter().filter_map(MethodEntry::resolve).collect();
            let ok = |v: &f64| v.is_finite();
            match &sw.parameter {
                SweepParam::TaskSize => {
                    if sw.values.iter().any(|v| !(ok(v) && *v >= 0.0)) {
                        p.push("sweep.values: task sizes must be non-negative".into());
                    }
                }
                SweepParam::ThetaP => {
                    if !resolved.iter().any(|m| matches!(m, Method::Np { .. })) {
                        p.push("sweep.parameter: theta_p needs an np method".into());
                    }
                    if sw.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                        p.push("sweep.values: theta_p must lie in [0, 1]".into());
                    }
                }
                SweepParam::Xi => {
                    if !resolved.iter().any(|m| matches!(m, Method::Lp { .. })) {
                        p.push("sweep.parameter: xi needs an lp method".into());
                    }
                    if sw.values.iter().any(|v| !(*v >= 0.0 && v.fract() == 0.0)) {
                        p.push("sweep.values: xi must be a non-negative integer".into());
                    }
                }
                SweepParam::LinkRate { .. } | SweepParam::CpuFreq { .. } => {
                    if sw.values.iter().any(|v| !(ok(v) && *v > 0.0)) {
                        p.push("sweep.values: rates and frequencies must be positive".into());
                    }
                }
                SweepParam::Subtrees => {
                    if sw.values.iter().any(|v| !(*v >= 1.0 && v.fract() == 0.0)) {
                        p.push("sweep.values: subtree counts must be positive integers".into());
                    }
                }
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Scenario(p))
        }
    }

    /// Loads, generates or looks up the network.
    pub fn network(&self) -> Result<NetworkGraph> {
        match &self.network {
            NetworkSource::Topology(name) => topology(name),
            NetworkSource::File(path) => {
                let full = match &self.base_dir {
                    Some(d) if path.is_relative() => d.join(path),
                    _ => path.clone(),
                };
                NetworkGraph::load(full)
            }
            NetworkSource::Inline(doc) => doc.to_graph(),
            NetworkSource::Generate(g) => {
                let mut g = g.clone();
                if let Some(seed) = self.seed {
                    g.seed = seed;
                }
                generate_network(&g)
            }
        }
    }
}
