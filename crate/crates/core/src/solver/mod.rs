//! Exact solvers: the fixed-order allocation LP, exhaustive order search
//! (CMO), subtree-parallel decomposition (PMO), and proportional rescaling of
//! a solved baseline.

mod cache;
mod cmo;
mod enumerate;
mod pmo;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use cache::{tree_hash, BaselineCache};
pub use cmo::{cmo, exhaustive_search, OrderSearch};
pub use enumerate::{enumerate_schedules, schedule_count, unrank_schedule};
pub use pmo::{pmo, pmo_with, solve_master_split, Exhaustive, MasterSplit, SubtreeSearch, SubtreeSolution};

use crate::cost::{cost_coefficients, system_cost, Allocation, CostBreakdown, CostModel, Schedule};
use crate::error::{Error, Result};
use crate::lp;
use crate::network::SinkTree;

pub const FREE_NODE_TAG: &str = "+free-node";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub schedules_evaluated: u64,
    pub lp_solves: u64,
}

impl SolveStats {
    pub fn merge(self, o: SolveStats) -> SolveStats {
        SolveStats {
            schedules_evaluated: self.schedules_evaluated + o.schedules_evaluated,
            lp_solves: self.lp_solves + o.lp_solves,
        }
    }
}

/// An allocation with its schedule and verified cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub allocation: Allocation,
    pub schedule: Schedule,
    /// `max_i J_i`, recomputed from the allocation.
    pub cost: f64,
    pub breakdown: CostBreakdown,
    pub solver_tag: String,
    pub base_task_size: f64,
    #[serde(default)]
    pub stats: SolveStats,
}

impl Solution {
    /// Evaluates `allocation` under `schedule` and packages the result.
    pub fn evaluate(
        t: &SinkTree,
        schedule: Schedule,
        allocation: Allocation,
        model: &CostModel,
        solver_tag: impl Into<String>,
        stats: SolveStats,
    ) -> Result<Self> {
        let breakdown = system_cost(t, &schedule, &allocation, model)?;
        Ok(Self {
            base_task_size: allocation.total(),
            cost: breakdown.cost,
            breakdown,
            allocation,
            schedule,
            solver_tag: solver_tag.into(),
            stats,
        })
    }

    fn from_shares(
        t: &SinkTree,
        schedule: Schedule,
        x: &[f64],
        task_size: f64,
        model: &CostModel,
        tag: String,
        stats: SolveStats,
    ) -> Result<Self> {
        let y = x.iter().map(|v| v * task_size).collect();
        Self::evaluate(t, schedule, Allocation::new(y, task_size)?, model, tag, stats)
    }

    fn zero(t: &SinkTree, schedule: Schedule, model: &CostModel, tag: &str) -> Result<Self> {
        Self::evaluate(t, schedule, Allocation::zeros(t.len()), model, tag, SolveStats::default())
    }

    pub fn used_free_node(&self) -> bool {
        self.solver_tag.contains(FREE_NODE_TAG)
    }
}

/// The fixed-order LP for one tree, over a chosen set of objective rows.
#[derive(Debug, Clone)]
pub struct OrderProblem<'a> {
    pub tree: &'a SinkTree,
    pub model: CostModel,
    forced: BTreeSet<usize>,
    rows: Vec<usize>,
}

/// Fixed-order optimum per unit of task: `x` sums to one, `z` is the
/// optimal cost per bit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSolve {
    pub x: Vec<f64>,
    pub z: f64,
    pub free_node: bool,
}

impl<'a> OrderProblem<'a> {
    /// Objective over every node; relay-only nodes of the tree are always
    /// forced to zero in addition to `forced`.
    pub fn new(tree: &'a SinkTree, model: CostModel, forced: &BTreeSet<usize>) -> Self {
        let mut f = forced.clone();
        f.extend(tree.relay_only().iter().copied());
        Self {
            tree,
            model,
            forced: f,
            rows: (0..tree.len()).collect(),
        }
    }

    /// Subtree-only problem on a master-plus-one-subtree view: the master
    /// takes no workload and its own cost is left out of the objective.
    pub fn subtree_only(tree: &'a SinkTree, model: CostModel) -> Self {
        let mut p = Self::new(tree, model, &BTreeSet::from([0]));
        p.rows = (1..tree.len()).collect();
        p
    }

    pub fn forced(&self) -> &BTreeSet<usize> {
        &self.forced
    }

    pub fn has_free_variable(&self) -> bool {
        (0..self.tree.len()).any(|i| !self.forced.contains(&i))
    }

    pub fn solve(&self, s: &Schedule) -> Result<OrderSolve> {
        let n = self.tree.len();
        let coeffs = cost_coefficients(self.tree, s, &self.model)?;
        let cols: Vec<usize> = (0..n).filter(|i| !self.forced.contains(i)).collect();
        if cols.is_empty() {
            return Err(Error::Infeasible("every node is forced to zero".into()));
        }
        let a: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|&i| cols.iter().map(|&k| coeffs.a[i][k]).collect())
            .collect();
        let r = lp::min_max(&a)?;
        let mut x = vec![0.0; n];
        for (&k, v) in cols.iter().zip(&r.x) {
            x[k] = *v;
        }
        Ok(OrderSolve {
            x,
            z: r.z,
            free_node: r.free_column,
        })
    }
}

fn check_task_size(y: f64) -> Result<()> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::Parameter(format!("task size must be non-negative, got {y}")));
    }
    Ok(())
}

fn tag(base: &str, free: bool) -> String {
    if free {
        format!("{base}{FREE_NODE_TAG}")
    } else {
        base.to_string()
    }
}

/// Optimal allocation of `task_size` bits for a fixed schedule with the
/// nodes in `forced_zero` (and the tree's relay-only nodes) held at zero.
pub fn solve_fixed_order(
    t: &SinkTree,
    s: &Schedule,
    task_size: f64,
    model: &CostModel,
    forced_zero: &BTreeSet<usize>,
) -> Result<Solution> {
    check_task_size(task_size)?;
    s.validate(t)?;
    if let Some(&bad) = forced_zero.iter().find(|&&i| i >= t.len()) {
        return Err(Error::Parameter(format!("forced-zero node {bad} is not in the tree")));
    }
    let p = OrderProblem::new(t, *model, forced_zero);
    if task_size == 0.0 {
        return Solution::zero(t, s.clone(), model, "fixed-order");
    }
    let r = p.solve(s)?;
    Solution::from_shares(
        t,
        s.clone(),
        &r.x,
        task_size,
        model,
        tag("fixed-order", r.free_node),
        SolveStats {
            schedules_evaluated: 1,
            lp_solves: 1,
        },
    )
}

/// Same schedule and proportionally rescaled allocation and cost for a new
/// task size.
pub fn scale_solution(base: &Solution, task_size: f64) -> Result<Solution> {
    check_task_size(task_size)?;
    if !(base.base_task_size > 0.0) {
        return Err(Error::Parameter("baseline task size must be positive".into()));
    }
    let c = task_size / base.base_task_size;
    Ok(Solution {
        allocation: base.allocation.scaled_to(task_size),
        schedule: base.schedule.clone(),
        cost: base.cost * c,
        breakdown: base.breakdown.scaled(c),
        solver_tag: base.solver_tag.clone(),
        base_task_size: task_size,
        stats: SolveStats::default(),
    })
}
