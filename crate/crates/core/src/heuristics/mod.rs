//! Approximate solving for larger trees: node pruning by partial-offload
//! benefit, level pruning by depth, and a genetic search over schedules.
//! Also the four comparison baselines.

mod baselines;
mod ga;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baselines::{baseline_local, baseline_master_worker, baseline_multi_hop, baseline_partial};
pub use ga::{ga, ga_run, ordered_crossover, GaParams, GaRun, GaSubtree, Mutation};

use crate::cost::{CostModel, Schedule};
use crate::error::{Error, Result};
use crate::network::{prune_tree, PruneMode, Pruned, SinkTree};
use crate::solver::solve_fixed_order;

/// Node-pruning threshold on the relative cost reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpParams {
    pub theta_p: f64,
}

impl NpParams {
    pub fn new(theta_p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta_p) {
            return Err(Error::Parameter(format!("theta_p must lie in [0, 1], got {theta_p}")));
        }
        Ok(Self { theta_p })
    }
}

/// Number of tree levels kept below the master.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpParams {
    pub xi: usize,
}

/// Cost of computing everything on the master.
pub fn local_cost(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<f64> {
    let master = level_prune(t, LpParams { xi: 0 })?;
    let s = solve_fixed_order(
        &master.tree,
        &Schedule::identity(&master.tree),
        task_size,
        model,
        &BTreeSet::new(),
    )?;
    Ok(s.cost)
}

/// Optimal cost when only the master and node `i` may take workload.
pub fn partial_offload_cost(t: &SinkTree, i: usize, task_size: f64, model: &CostModel) -> Result<f64> {
    if i == 0 || i >= t.len() {
        return Err(Error::Parameter(format!("partial offloading needs a non-master node, got {i}")));
    }
    let forced: BTreeSet<usize> = (1..t.len()).filter(|&k| k != i).collect();
    Ok(solve_fixed_order(t, &Schedule::identity(t), task_size, model, &forced)?.cost)
}

/// Relative reduction `(z⁽⁰⁾ − z^p_i) / z⁽⁰⁾` for every node (0 for the
/// master, and for everyone when `z⁽⁰⁾ = 0`).
pub fn node_reductions(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Vec<f64>> {
    let z0 = local_cost(t, task_size, model)?;
    let mut out: Vec<f64> = (1..t.len())
        .into_par_iter()
        .map(|i| {
            let zp = partial_offload_cost(t, i, task_size, model)?;
            Ok(if z0 > 0.0 { (z0 - zp) / z0 } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    out.insert(0, 0.0);
    Ok(out)
}

/// Keeps the nodes whose partial-offload benefit exceeds `theta_p`;
/// unselected nodes that lead to selected ones stay as relays.
pub fn node_prune(t: &SinkTree, p: NpParams, task_size: f64, model: &CostModel) -> Result<Pruned> {
    NpParams::new(p.theta_p)?;
    let red = node_reductions(t, task_size, model)?;
    let remove: BTreeSet<usize> = (1..t.len()).filter(|&i| !(red[i] > p.theta_p)).collect();
    prune_tree(t, &remove, PruneMode::KeepRelays)
}

/// Keeps the master and levels `1..=xi`.
pub fn level_prune(t: &SinkTree, p: LpParams) -> Result<Pruned> {
    if p.xi > t.height() {
        return Err(Error::Parameter(format!(
            "xi = {} exceeds the tree height {}",
            p.xi,
            t.height()
        )));
    }
    let remove: BTreeSet<usize> = (1..t.len()).filter(|&i| t.depth(i) > p.xi).collect();
    prune_tree(t, &remove, PruneMode::DropSubtrees)
}
