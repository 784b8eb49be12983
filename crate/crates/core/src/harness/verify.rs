use serde::{Deserialize, Serialize};

use super::run::{solve_method, verify_cost};
use super::scenario::Method;
use crate::cost::CostModel;
use crate::error::Result;
use crate::heuristics::local_cost;
use crate::network::SinkTree;
use crate::solver::{cmo, pmo, scale_solution, schedule_count};

/// CMO is skipped above this many schedules.
pub const VERIFY_MAX_SCHEDULES: u64 = 100_000;

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Runs the solver invariants on one instance.
pub fn verify_instance(t: &SinkTree, task_size: f64, model: &CostModel) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p = pmo(t, task_size, model)?;
    out.push(match verify_cost(t, &p, model) {
        Ok(()) => check("cost-routes-agree", true, format!("J = {:e}", p.cost)),
        Err(e) => check("cost-routes-agree", false, e.to_string()),
    });

    match schedule_count(t).filter(|&n| n <= VERIFY_MAX_SCHEDULES) {
        Some(n) => {
            let c = cmo(t, task_size, model)?;
            let gap = rel_gap(p.cost, c.cost);
            out.push(check("pmo-equals-cmo", gap <= 1e-7, format!("relative gap {gap:e}")));
            out.push(check(
                "schedule-count",
                c.stats.schedules_evaluated == n,
                format!("evaluated {} of {n}", c.stats.schedules_evaluated),
            ));
        }
        None => out.push(check("pmo-equals-cmo", true, "skipped: too many schedules".into())),
    }

    if task_size > 0.0 {
        let mut worst: f64 = 0.0;
        for c in [0.5, 2.0, 10.0] {
            let fresh = pmo(t, c * task_size, model)?;
            worst = worst.max(rel_gap(scale_solution(&p, c * task_size)?.cost, fresh.cost));
        }
        out.push(check("rescaling", worst <= 1e-7, format!("worst relative gap {worst:e}")));
    }

    let slack = 1e-9 * p.cost.abs().max(f64::MIN_POSITIVE);
    let mut beaten = Vec::new();
    for m in [Method::Local, Method::Partial, Method::MasterWorker, Method::MultiHop] {
        let b = solve_method(t, &m, task_size, model)?;
        if p.cost > b.cost + slack {
            beaten.push(format!("{} ({:e})", m.label(), b.cost));
        }
    }
    out.push(check(
        "baseline-dominance",
        beaten.is_empty(),
        if beaten.is_empty() {
            "optimum at or below every baseline".into()
        } else {
            format!("below optimum: {}", beaten.join(", "))
        },
    ));

    let z0 = local_cost(t, task_size, model)?;
    let lp = |xi| {
        solve_method(
            t,
            &Method::Lp {
                xi,
                solver: Box::new(Method::Pmo),
            },
            task_size,
            model,
        )
        .map(|s| s.cost)
    };
    let costs: Vec<f64> = (0..=t.height()).map(lp).collect::<Result<_>>()?;
    let ends = rel_gap(costs[0], z0) <= 1e-9 && rel_gap(*costs.last().unwrap(), p.cost) <= 1e-7;
    let mono = costs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    out.push(check("level-pruning", ends && mono, format!("costs by level {costs:?}")));

    let np1 = solve_method(
        t,
        &Method::Np {
            theta_p: 1.0,
            solver: Box::new(Method::Pmo),
        },
        task_size,
        model,
    )?;
    out.push(check(
        "node-pruning-endpoint",
        rel_gap(np1.cost, z0) <= 1e-9,
        format!("theta_p = 1 gives {:e}, local {z0:e}", np1.cost),
    ));
    Ok(out)
}
