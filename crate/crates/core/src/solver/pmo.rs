use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cmo::{exhaustive_search, OrderSearch};
use super::{check_task_size, tag, OrderProblem, SolveStats, Solution};
use crate::cost::{Allocation, CostModel, Schedule};
use crate::error::{Error, Result};
use crate::lp;
use crate::network::{ServerParams, SinkTree};

/// Order search used on each subtree by [`pmo_with`].
pub trait SubtreeSearch: Sync {
    /// Short method name used in solver tags.
    fn name(&self) -> &str;

    /// Best order for `p`, which holds the `subtree`-th subtree of the full
    /// tree behind a workload-free master.
    fn search(&self, p: &OrderProblem, subtree: usize) -> Result<OrderSearch>;
}

/// Exhaustive enumeration, as in CMO.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl SubtreeSearch for Exhaustive {
    fn name(&self) -> &str {
        "pmo"
    }

    fn search(&self, p: &OrderProblem, _subtree: usize) -> Result<OrderSearch> {
        exhaustive_search(p)
    }
}

/// Optimum of one subtree for a probe workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtreeSolution {
    /// Index of the subtree among the master's children.
    pub subtree: usize,
    /// `Y'_t`, the workload the subtree was solved for.
    pub probe_size: f64,
    /// `z̄_t`, the subtree's optimal cost at the probe size.
    pub cost: f64,
    /// Tree ids of the subtree's nodes.
    pub nodes: Vec<usize>,
    /// Probe allocation, aligned with `nodes`.
    pub loads: Vec<f64>,
    /// Transmission order in tree ids.
    pub order: Vec<usize>,
    pub free_node: bool,
    pub stats: SolveStats,
}

/// Optimal split of the task between the master and whole subtrees.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSplit {
    pub master_load: f64,
    /// Aligned with the probes passed in.
    pub subtree_loads: Vec<f64>,
    /// Optimal objective of the split problem.
    pub cost: f64,
    pub free_node: bool,
}

/// Splits `task_size` between the master (compute plus forwarding energy to
/// each subtree root) and the subtrees, each costing `Y_t · z̄_t / Y'_t`.
/// `link_rates[k]` is the rate of the master's edge into the subtree of
/// `probes[k]`.
pub fn solve_master_split(
    probes: &[SubtreeSolution],
    master: &ServerParams,
    link_rates: &[f64],
    task_size: f64,
    model: &CostModel,
) -> Result<MasterSplit> {
    check_task_size(task_size)?;
    if link_rates.len() != probes.len() {
        return Err(Error::Contract("one link rate per subtree probe".into()));
    }
    if let Some(p) = probes.iter().find(|p| !(p.probe_size > 0.0)) {
        return Err(Error::Contract(format!(
            "subtree {} was probed with a non-positive workload",
            p.subtree
        )));
    }
    let k = probes.len();
    if task_size == 0.0 {
        return Ok(MasterSplit {
            master_load: 0.0,
            subtree_loads: vec![0.0; k],
            cost: 0.0,
            free_node: false,
        });
    }
    let w = model.weights;
    let b = model.cycles_per_bit;
    let f0 = master.cpu_freq;
    let alpha = w.time * b / f0 + w.energy * master.switched_cap * b * f0 * f0;

    let mut a = vec![vec![0.0; k + 1]; k + 1];
    a[0][0] = alpha;
    for (t, r) in link_rates.iter().enumerate() {
        a[0][t + 1] = w.energy * master.tx_power / r;
    }
    for (t, p) in probes.iter().enumerate() {
        a[t + 1][t + 1] = p.cost / p.probe_size;
    }
    let r = lp::min_max(&a)?;
    Ok(MasterSplit {
        master_load: r.x[0] * task_size,
        subtree_loads: r.x[1..].iter().map(|v| v * task_size).collect(),
        cost: r.z * task_size,
        free_node: r.free_column,
    })
}

/// Exact decomposition: every subtree is solved on its own (in parallel),
/// then the master split recombines them.
pub fn pmo(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Solution> {
    pmo_with(t, task_size, model, &Exhaustive)
}

/// [`pmo`] with a custom per-subtree order search.
pub fn pmo_with<S: SubtreeSearch>(
    t: &SinkTree,
    task_size: f64,
    model: &CostModel,
    search: &S,
) -> Result<Solution> {
    check_task_size(task_size)?;
    let name = search.name().to_string();
    if t.relay_only().contains(&0) {
        return Err(Error::Contract("the master cannot be relay-only".into()));
    }
    if task_size == 0.0 {
        return Solution::zero(t, Schedule::identity(t), model, &name);
    }
    let probes: Vec<Option<SubtreeSolution>> = (0..t.subtree_roots().len())
        .into_par_iter()
        .map(|k| probe_subtree(t, k, task_size, model, search))
        .collect::<Result<_>>()?;

    let used: Vec<SubtreeSolution> = probes.into_iter().flatten().collect();
    let rates: Vec<f64> = used
        .iter()
        .map(|p| t.edge_rate(t.subtree_roots()[p.subtree]).unwrap())
        .collect();
    let split = solve_master_split(&used, t.server(0), &rates, task_size, model)?;

    let mut y = vec![0.0; t.len()];
    y[0] = split.master_load;
    let mut orders: Vec<Vec<usize>> = t.subtrees().to_vec();
    let mut stats = SolveStats::default();
    let mut free = split.free_node;
    for (p, &load) in used.iter().zip(&split.subtree_loads) {
        let c = load / p.probe_size;
        for (&i, &v) in p.nodes.iter().zip(&p.loads) {
            y[i] = c * v;
        }
        orders[p.subtree] = p.order.clone();
        stats = stats.merge(p.stats);
        free |= p.free_node;
    }
    stats.lp_solves += 1;
    Solution::evaluate(
        t,
        Schedule::new(orders),
        Allocation::new(y, task_size)?,
        model,
        tag(&name, free),
        stats,
    )
}

fn probe_subtree<S: SubtreeSearch>(
    t: &SinkTree,
    k: usize,
    probe: f64,
    model: &CostModel,
    search: &S,
) -> Result<Option<SubtreeSolution>> {
    let view = t.with_single_subtree(k);
    let p = OrderProblem::subtree_only(&view.tree, *model);
    if !p.has_free_variable() {
        return Ok(None);
    }
    let r = search.search(&p, k)?;
    let ids = &view.source_ids;
    let nodes: Vec<usize> = (1..view.tree.len()).map(|v| ids[v]).collect();
    let loads: Vec<f64> = (1..view.tree.len()).map(|v| r.solve.x[v] * probe).collect();
    let order = r.schedule.orders()[0].iter().map(|&v| ids[v]).collect();
    Ok(Some(SubtreeSolution {
        subtree: k,
        probe_size: loads.iter().sum(),
        cost: r.solve.z * probe,
        nodes,
        loads,
        order,
        free_node: r.solve.free_node,
        stats: r.stats,
    }))
}
