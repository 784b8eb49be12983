use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::enumerate::{schedule_count, unrank_schedule};
use super::{check_task_size, tag, OrderProblem, OrderSolve, SolveStats, Solution};
use crate::cost::{CostModel, Schedule};
use crate::error::{Error, Result};
use crate::network::SinkTree;

/// Best schedule found by an order search, with its per-unit optimum.
#[derive(Debug, Clone)]
pub struct OrderSearch {
    pub schedule: Schedule,
    pub solve: OrderSolve,
    pub stats: SolveStats,
}

/// Solves the fixed-order LP for every schedule and keeps the cheapest,
/// the earliest in enumeration order on exact ties.
pub fn exhaustive_search(p: &OrderProblem) -> Result<OrderSearch> {
    let count = schedule_count(p.tree)
        .ok_or_else(|| Error::Parameter("schedule count overflows u64".into()))?;
    let evaluated = AtomicU64::new(0);
    let best = (0..count)
        .into_par_iter()
        .map(|idx| {
            let s = unrank_schedule(p.tree, idx);
            let r = p.solve(&s)?;
            evaluated.fetch_add(1, Ordering::Relaxed);
            Ok::<_, Error>((idx, s, r))
        })
        .try_reduce_with(|a, b| {
            let a_first = a.2.z.total_cmp(&b.2.z).then(a.0.cmp(&b.0)).is_le();
            Ok(if a_first { a } else { b })
        })
        .expect("at least one schedule")?;
    let n = evaluated.load(Ordering::Relaxed);
    Ok(OrderSearch {
        schedule: best.1,
        solve: best.2,
        stats: SolveStats {
            schedules_evaluated: n,
            lp_solves: n,
        },
    })
}

/// Exhaustive optimum over all schedules and allocations.
pub fn cmo(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Solution> {
    cmo_forced(t, task_size, model, &BTreeSet::new())
}

pub(crate) fn cmo_forced(
    t: &SinkTree,
    task_size: f64,
    model: &CostModel,
    forced: &BTreeSet<usize>,
) -> Result<Solution> {
    check_task_size(task_size)?;
    if task_size == 0.0 {
        return Solution::zero(t, Schedule::identity(t), model, "cmo");
    }
    let p = OrderProblem::new(t, *model, forced);
    let r = exhaustive_search(&p)?;
    Solution::from_shares(
        t,
        r.schedule,
        &r.solve.x,
        task_size,
        model,
        tag("cmo", r.solve.free_node),
        r.stats,
    )
}
