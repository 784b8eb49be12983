use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::scenario::{Method, Scenario, SweepParam};
use crate::cost::{cost_coefficients, Allocation, CostModel, Schedule};
use crate::error::{Error, Result};
use crate::heuristics::{
    baseline_local, baseline_master_worker, baseline_multi_hop, baseline_partial, ga, level_prune, node_prune,
    GaSubtree, LpParams, NpParams,
};
use crate::network::{build_sink_tree, prune_tree, NetworkGraph, PruneMode, Pruned, SinkTree};
use crate::solver::{cmo, pmo, pmo_with, BaselineCache, Solution};
use crate::units;

/// Relative tolerance for the independent recomputation of every emitted
/// cost.
pub const VERIFY_RTOL: f64 = 1e-9;

/// One method at one scenario point. Node ids are graph ids; allocations
/// are in bits, times in seconds, energies in joules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    pub method: String,
    pub sweep_param: Option<String>,
    pub sweep_value: Option<f64>,
    pub task_size_bits: f64,
    pub cost_j: f64,
    pub max_t_total_s: f64,
    pub max_e_total_j: f64,
    /// Mean wall-clock time per method call.
    pub t_exe_s: f64,
    /// Workload per graph node; nodes outside the solved tree hold 0.
    pub allocation: Vec<f64>,
    /// Transmission order per subtree of the master.
    pub schedule: Vec<Vec<usize>>,
    /// Total workload per subtree of the master, in subtree order.
    pub subtree_loads: Vec<f64>,
    pub solver_tag: String,
}

impl RunRecord {
    fn new(
        s: &Scenario,
        method: &Method,
        point: Option<(&SweepParam, f64)>,
        graph_nodes: usize,
        t: &SinkTree,
        sol: &Solution,
        t_exe_s: f64,
    ) -> Self {
        let mut allocation = vec![0.0; graph_nodes];
        for i in 0..t.len() {
            allocation[t.original(i)] = sol.allocation.get(i);
        }
        let schedule = sol
            .schedule
            .orders()
            .iter()
            .map(|o| o.iter().map(|&i| t.original(i)).collect())
            .collect();
        let subtree_loads = t
            .subtrees()
            .iter()
            .map(|nodes| nodes.iter().map(|&i| sol.allocation.get(i)).sum())
            .collect();
        Self {
            scenario_id: s.id.clone(),
            method: method.label(),
            sweep_param: point.map(|(p, _)| p.name()),
            sweep_value: point.map(|(_, v)| v),
            task_size_bits: sol.allocation.total(),
            cost_j: sol.cost,
            max_t_total_s: sol.breakdown.completion_time(),
            max_e_total_j: sol.breakdown.max_energy(),
            t_exe_s,
            allocation,
            schedule,
            subtree_loads,
            solver_tag: sol.solver_tag.clone(),
        }
    }
}

/// Carries a solution of a pruned tree back to the tree it was pruned
/// from. Removed nodes get zero workload and go first in their subtree's
/// order, where they delay nobody and wait for nobody.
pub fn lift_solution(full: &SinkTree, pruned: &Pruned, sol: &Solution, model: &CostModel) -> Result<Solution> {
    let mut y = vec![0.0; full.len()];
    let mut kept = vec![false; full.len()];
    for (v, &i) in pruned.source_ids.iter().enumerate() {
        y[i] = sol.allocation.get(v);
        kept[i] = true;
    }
    let mut orders: Vec<Vec<usize>> = full
        .subtrees()
        .iter()
        .map(|nodes| nodes.iter().copied().filter(|&i| !kept[i]).collect())
        .collect();
    for o in sol.schedule.orders() {
        let Some(&first) = o.first() else { continue };
        let k = full
            .subtree_of(pruned.source_ids[first])
            .ok_or_else(|| Error::Contract("pruned node outside every subtree".into()))?;
        orders[k].extend(o.iter().map(|&v| pruned.source_ids[v]));
    }
    Solution::evaluate(
        full,
        Schedule::checked(orders, full)?,
        Allocation::new(y, sol.allocation.total())?,
        model,
        sol.solver_tag.clone(),
        sol.stats,
    )
}

/// Runs one method on one tree.
pub fn solve_method(t: &SinkTree, method: &Method, task_size: f64, model: &CostModel) -> Result<Solution> {
    match method {
        Method::Cmo => cmo(t, task_size, model),
        Method::Pmo => pmo(t, task_size, model),
        Method::Ga { params } => ga(t, task_size, model, params),
        Method::PmoGa { params } => pmo_with(t, task_size, model, &GaSubtree(*params)),
        Method::Np { theta_p, solver } => {
            let pruned = node_prune(t, NpParams::new(*theta_p)?, task_size, model)?;
            solve_pruned(t, &pruned, solver, task_size, model, &format!("np({theta_p})"))
        }
        Method::Lp { xi, solver } => {
            let pruned = level_prune(t, LpParams { xi: *xi })?;
            solve_pruned(t, &pruned, solver, task_size, model, &format!("lp({xi})"))
        }
        Method::Local => baseline_local(t, task_size, model),
        Method::Partial => baseline_partial(t, task_size, model),
        Method::MasterWorker => baseline_master_worker(t, task_size, model),
        Method::MultiHop => baseline_multi_hop(t, task_size, model),
    }
}

fn solve_pruned(
    t: &SinkTree,
    pruned: &Pruned,
    solver: &Method,
    task_size: f64,
    model: &CostModel,
    prefix: &str,
) -> Result<Solution> {
    let inner = solve_method(&pruned.tree, solver, task_size, model)?;
    let mut s = lift_solution(t, pruned, &inner, model)?;
    s.solver_tag = format!("{prefix}+{}", inner.solver_tag);
    Ok(s)
}

/// Recomputes the cost of `sol` from its coefficient form, independently of
/// the per-term evaluation that produced `sol.cost`.
pub fn verify_cost(t: &SinkTree, sol: &Solution, model: &CostModel) -> Result<()> {
    sol.allocation.check_against(t)?;
    let again = cost_coefficients(t, &sol.schedule, model)?.max_cost(sol.allocation.y());
    let scale = sol.cost.abs().max(again.abs());
    if (sol.cost - again).abs() > VERIFY_RTOL * scale {
        return Err(Error::Contract(format!(
            "{}: reported cost {} disagrees with recomputed {}",
            sol.solver_tag, sol.cost, again
        )));
    }
    Ok(())
}

/// Scenario state at one sweep point.
struct Point {
    graph: NetworkGraph,
    tree: SinkTree,
    task_size: f64,
    methods: Vec<Method>,
}

fn apply_sweep(s: &Scenario, base: &NetworkGraph, methods: &[Method], p: &SweepParam, v: f64) -> Result<Point> {
    let mut graph = base.clone();
    let mut task_size = s.task_size_bits();
    let mut methods = methods.to_vec();
    let mut keep_subtrees = None;
    match p {
        SweepParam::TaskSize => task_size = units::gbit_to_bit(v),
        SweepParam::ThetaP => {
            for m in &mut methods {
                if let Method::Np { theta_p, .. } = m {
                    *theta_p = v;
                }
            }
        }
        SweepParam::Xi => {
            for m in &mut methods {
                if let Method::Lp { xi, .. } = m {
                    *xi = v as usize;
                }
            }
        }
        &SweepParam::LinkRate { i, j } => {
            if graph.rate(i, j).is_none() && graph.rate(j, i).is_none() {
                return Err(Error::Scenario(vec![format!("sweep.parameter: no link between {i} and {j}")]));
            }
            let r = units::gbps_to_bps(v);
            graph.set_rate(i, j, r)?;
            graph.set_rate(j, i, r)?;
        }
        &SweepParam::CpuFreq { node } => {
            let srv = graph
                .server_mut(node)
                .ok_or_else(|| Error::Scenario(vec![format!("sweep.parameter: no node {node}")]))?;
            srv.cpu_freq = units::ghz_to_hz(v);
        }
        SweepParam::Subtrees => keep_subtrees = Some(v as usize),
    }
    let mut tree = build_sink_tree(&graph)?;
    if let Some(k) = keep_subtrees {
        let roots = tree.subtree_roots();
        let remove: BTreeSet<usize> = roots.iter().skip(k).copied().collect();
        tree = prune_tree(&tree, &remove, PruneMode::DropSubtrees)?.tree;
    }
    Ok(Point {
        graph,
        tree,
        task_size,
        methods,
    })
}

/// Baseline caches for the offline-online scheme, one per method slot,
/// with the number of answers served since the last solve.
struct Caches {
    slots: Vec<Option<(BaselineCache, usize)>>,
}

impl Caches {
    fn usable(&self, slot: usize, s: &Scenario, t: &SinkTree, model: &CostModel) -> Option<&BaselineCache> {
        let (cache, served) = self.slots[slot].as_ref()?;
        let fresh = s.baseline_refresh.map_or(true, |n| *served < n);
        (fresh && cache.matches(t, model)).then_some(cache)
    }

    fn store(&mut self, slot: usize, t: &SinkTree, model: &CostModel, sol: &Solution) {
        if sol.base_task_size > 0.0 {
            self.slots[slot] = Some((BaselineCache::new(t, model, sol.clone()), 0));
        }
    }
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let first = f()?;
    for _ in 1..reps {
        f()?;
    }
    Ok((first, start.elapsed().as_secs_f64() / reps as f64))
}

/// Runs every method at every sweep point, in scenario order.
pub fn run_scenario(s: &Scenario) -> Result<Vec<RunRecord>> {
    s.validate()?;
    let model = s.model()?;
    let base = s.network()?;
    let methods = s.resolved_methods();
    let points: Vec<Option<(&SweepParam, f64)>> = match &s.sweep {
        Some(sw) => sw.values.iter().map(|&v| Some((&sw.parameter, v))).collect(),
        None => vec![None],
    };
    let reps = if s.record_timing { s.repetitions } else { 1 };
    let mut caches = Caches {
        slots: vec![None; methods.len()],
    };
    let mut out = Vec::new();
    for point in points {
        let pt = match point {
            Some((p, v)) => apply_sweep(s, &base, &methods, p, v)?,
            None => Point {
                tree: build_sink_tree(&base)?,
                graph: base.clone(),
                task_size: s.task_size_bits(),
                methods: methods.clone(),
            },
        };
        for (slot, m) in pt.methods.iter().enumerate() {
            let exact = s.offline_online && matches!(m, Method::Cmo | Method::Pmo);
            let cache = if exact { caches.usable(slot, s, &pt.tree, &model) } else { None };
            let (sol, t_exe) = match cache {
                Some(c) => {
                    let (mut sol, t) = timed(reps, || c.answer_unchecked(pt.task_size))?;
                    sol.solver_tag = format!("{}+cached", sol.solver_tag);
                    if let Some((_, served)) = caches.slots[slot].as_mut() {
                        *served += 1;
                    }
                    (sol, t)
                }
                None => {
                    let (sol, t) = timed(reps, || solve_method(&pt.tree, m, pt.task_size, &model))?;
                    if exact {
                        caches.store(slot, &pt.tree, &model, &sol);
                    }
                    (sol, t)
                }
            };
            verify_cost(&pt.tree, &sol, &model)?;
            let t_exe = if s.record_timing { t_exe } else { 0.0 };
            out.push(RunRecord::new(s, m, point, pt.graph.node_count(), &pt.tree, &sol, t_exe));
        }
    }
    Ok(out)
}
