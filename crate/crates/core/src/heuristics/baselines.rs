use std::collections::BTreeSet;

use crate::cost::{Allocation, CostModel, Schedule, Weights};
use crate::error::Result;
use crate::network::SinkTree;
use crate::solver::{solve_fixed_order, SolveStats, Solution};

fn time_only(model: &CostModel) -> CostModel {
    CostModel {
        weights: Weights::TIME_ONLY,
        ..*model
    }
}

/// Everything computed on the master.
pub fn baseline_local(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Solution> {
    let mut y = vec![0.0; t.len()];
    y[0] = task_size;
    let a = Allocation::new(y, task_size)?;
    Solution::evaluate(t, Schedule::identity(t), a, model, "local", SolveStats::default())
}

/// Completion-time-optimal split with the single best one-hop neighbor,
/// reported under `model`'s weights.
pub fn baseline_partial(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Solution> {
    let tm = time_only(model);
    let mut best: Option<Solution> = None;
    for &j in t.children(0) {
        let forced: BTreeSet<usize> = (1..t.len()).filter(|&k| k != j).collect();
        let s = solve_fixed_order(t, &Schedule::identity(t), task_size, &tm, &forced)?;
        if best.as_ref().map_or(true, |b| s.cost < b.cost) {
            best = Some(s);
        }
    }
    let allocation = match best {
        Some(s) => s.allocation,
        None => Allocation::local(t.len(), task_size),
    };
    Solution::evaluate(t, Schedule::identity(t), allocation, model, "partial", SolveStats::default())
}

/// Completion-time-optimal split over the master and all one-hop
/// neighbors, reported under `model`'s weights.
pub fn baseline_master_worker(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Solution> {
    let forced: BTreeSet<usize> = (1..t.len()).filter(|&k| t.depth(k) >= 2).collect();
    let s = solve_fixed_order(t, &Schedule::identity(t), task_size, &time_only(model), &forced)?;
    Solution::evaluate(t, s.schedule, s.allocation, model, "master-worker", SolveStats::default())
}

/// The whole task sent to the one non-master node with the lowest cost
/// for receiving and computing it; ties go to the smaller tree id.
pub fn baseline_multi_hop(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Solution> {
    let mut best: Option<Solution> = None;
    for i in 1..t.len() {
        if t.relay_only().contains(&i) {
            continue;
        }
        let mut y = vec![0.0; t.len()];
        y[i] = task_size;
        let s = Solution::evaluate(
            t,
            Schedule::identity(t),
            Allocation::new(y, task_size)?,
            model,
            "multi-hop",
            SolveStats::default(),
        )?;
        if best.as_ref().map_or(true, |b| s.cost < b.cost) {
            best = Some(s);
        }
    }
    match best {
        Some(s) => Ok(s),
        None => {
            let mut s = baseline_local(t, task_size, model)?;
            s.solver_tag = "multi-hop".into();
            Ok(s)
        }
    }
}
