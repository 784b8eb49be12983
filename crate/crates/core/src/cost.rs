//! Per-node time and energy costs of an allocation under a schedule.
//!
//! A subtask for node `i` crosses every edge of the root path store-and-forward
//! (`y_i / R` per hop), waits behind the subtasks scheduled before it in the
//! same subtree for the part of their path it shares, and is then computed
//! (`y_i b / f_i`). Energy is compute energy `γ y b f²` plus the radio energy a
//! relay spends forwarding whole child-subtree workloads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ServerParams, SinkTree};
use crate::units;

/// Relative tolerance on `Σ y = Y`.
pub const ALLOCATION_SUM_RTOL: f64 = 1e-6;

/// Relative weights of completion time and energy in a node's cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// Weight per second.
    #[serde(rename = "w1")]
    pub time: f64,
    /// Weight per joule.
    #[serde(rename = "w2")]
    pub energy: f64,
}

impl Weights {
    pub const TIME_ONLY: Weights = Weights { time: 1.0, energy: 0.0 };

    pub fn new(time: f64, energy: f64) -> Result<Self> {
        let w = Self { time, energy };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time >= 0.0 && self.energy >= 0.0 && self.time + self.energy > 0.0)
            || !(self.time.is_finite() && self.energy.is_finite())
        {
            return Err(Error::Parameter(format!(
                "weights must be non-negative with a positive sum, got ({}, {})",
                self.time, self.energy
            )));
        }
        Ok(())
    }
}

/// Scenario-wide constants of the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub weights: Weights,
    /// CPU cycles needed per bit of task.
    pub cycles_per_bit: f64,
}

impl CostModel {
    pub fn new(weights: Weights, cycles_per_bit: f64) -> Result<Self> {
        weights.validate()?;
        if !(cycles_per_bit > 0.0 && cycles_per_bit.is_finite()) {
            return Err(Error::Parameter(format!(
                "cycles_per_bit must be positive, got {cycles_per_bit}"
            )));
        }
        Ok(Self {
            weights,
            cycles_per_bit,
        })
    }

    /// Default density of 10^6 cycles per Gbit.
    pub fn with_weights(weights: Weights) -> Self {
        Self {
            weights,
            cycles_per_bit: units::DEFAULT_CYCLES_PER_BIT,
        }
    }
}

/// Workload per tree node, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    y: Vec<f64>,
    total: f64,
}

impl Allocation {
    pub fn new(y: Vec<f64>, total: f64) -> Result<Self> {
        if !(total >= 0.0 && total.is_finite()) {
            return Err(Error::Parameter(format!("task size must be non-negative, got {total}")));
        }
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Contract(format!("y[{i}] = {v} is not a non-negative workload")));
        }
        let sum: f64 = y.iter().sum();
        if (sum - total).abs() > ALLOCATION_SUM_RTOL * total {
            return Err(Error::Contract(format!(
                "allocation sums to {sum}, expected {total}"
            )));
        }
        Ok(Self { y, total })
    }

    /// Everything on the master.
    pub fn local(n: usize, total: f64) -> Self {
        let mut y = vec![0.0; n];
        if n > 0 {
            y[0] = total;
        }
        Self { y, total }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            y: vec![0.0; n],
            total: 0.0,
        }
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn get(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Every entry and the total multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            y: self.y.iter().map(|v| v * factor).collect(),
            total: self.total * factor,
        }
    }

    /// Proportional copy whose entries sum to `total`. Requires a positive
    /// current total.
    pub fn scaled_to(&self, total: f64) -> Self {
        let c = total / self.total;
        Self {
            y: self.y.iter().map(|v| v * c).collect(),
            total,
        }
    }

    /// Checks length and that forced-zero nodes carry nothing.
    pub fn check_against(&self, t: &SinkTree) -> Result<()> {
        if self.y.len() != t.len() {
            return Err(Error::Contract(format!(
                "allocation has {} entries, tree has {} nodes",
                self.y.len(),
                t.len()
            )));
        }
        if let Some(&i) = t.relay_only().iter().find(|&&i| self.y[i] != 0.0) {
            return Err(Error::Contract(format!("relay-only node {i} carries workload")));
        }
        Ok(())
    }
}

/// Transmission order inside every subtree, earliest first. `orders[t]` is a
/// permutation of `A_t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    orders: Vec<Vec<usize>>,
}

impl Schedule {
    pub fn new(orders: Vec<Vec<usize>>) -> Self {
        Self { orders }
    }

    pub fn checked(orders: Vec<Vec<usize>>, t: &SinkTree) -> Result<Self> {
        let s = Self { orders };
        s.validate(t)?;
        Ok(s)
    }

    /// Ascending tree ids within every subtree.
    pub fn identity(t: &SinkTree) -> Self {
        Self {
            orders: t.subtrees().to_vec(),
        }
    }

    pub fn orders(&self) -> &[Vec<usize>] {
        &self.orders
    }

    pub fn into_orders(self) -> Vec<Vec<usize>> {
        self.orders
    }

    pub fn validate(&self, t: &SinkTree) -> Result<()> {
        if self.orders.len() != t.subtrees().len() {
            return Err(Error::Contract(format!(
                "schedule covers {} subtrees, tree has {}",
                self.orders.len(),
                t.subtrees().len()
            )));
        }
        for (k, (order, members)) in self.orders.iter().zip(t.subtrees()).enumerate() {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if &sorted != members {
                return Err(Error::Contract(format!(
                    "sequence for subtree {k} is not a permutation of its nodes"
                )));
            }
        }
        Ok(())
    }

    /// Position of every node inside its subtree sequence (root: 0).
    pub fn ranks(&self, n: usize) -> Vec<usize> {
        let mut r = vec![0; n];
        for order in &self.orders {
            for (pos, &i) in order.iter().enumerate() {
                r[i] = pos;
            }
        }
        r
    }
}

/// Cost terms of a single node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeCost {
    pub t_tran: f64,
    pub t_wait: f64,
    pub t_comp: f64,
    pub t_total: f64,
    pub e_comp: f64,
    pub e_comm: f64,
    pub e_total: f64,
    pub cost: f64,
}

impl NodeCost {
    fn scaled(&self, c: f64) -> Self {
        Self {
            t_tran: self.t_tran * c,
            t_wait: self.t_wait * c,
            t_comp: self.t_comp * c,
            t_total: self.t_total * c,
            e_comp: self.e_comp * c,
            e_comm: self.e_comm * c,
            e_total: self.e_total * c,
            cost: self.cost * c,
        }
    }
}

/// Every node's cost terms and the system cost `J = max_i J_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub nodes: Vec<NodeCost>,
    pub cost: f64,
}

impl CostBreakdown {
    /// Task completion time, `max_i T_i`.
    pub fn completion_time(&self) -> f64 {
        self.nodes.iter().map(|c| c.t_total).fold(0.0, f64::max)
    }

    /// Largest per-node energy.
    pub fn max_energy(&self) -> f64 {
        self.nodes.iter().map(|c| c.e_total).fold(0.0, f64::max)
    }

    /// All terms multiplied by `c`; every term is linear in the allocation.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|n| n.scaled(c)).collect(),
            cost: self.cost * c,
        }
    }
}

/// `J_i = Σ_k a[i][k] y_k` for a fixed tree and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    pub a: Vec<Vec<f64>>,
    pub cycles_per_bit: f64,
}

impl CostCoefficients {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn node_cost(&self, i: usize, y: &[f64]) -> f64 {
        self.a[i].iter().zip(y).map(|(a, y)| a * y).sum()
    }

    pub fn evaluate(&self, y: &[f64]) -> Vec<f64> {
        (0..self.a.len()).map(|i| self.node_cost(i, y)).collect()
    }

    pub fn max_cost(&self, y: &[f64]) -> f64 {
        self.evaluate(y).into_iter().fold(0.0, f64::max)
    }
}

pub fn transmission_time(t: &SinkTree, i: usize, y_i: f64) -> f64 {
    if i == 0 {
        0.0
    } else {
        y_i * t.path_inv_rate(i)
    }
}

/// Queueing delay of node `i`'s subtask behind earlier subtasks of its
/// subtree over the shared part of their paths.
pub fn waiting_time(t: &SinkTree, s: &Schedule, a: &Allocation, i: usize) -> Result<f64> {
    let Some(sub) = t.subtree_of(i) else {
        return Ok(0.0);
    };
    let order = s
        .orders()
        .get(sub)
        .ok_or_else(|| Error::Contract(format!("schedule has no sequence for subtree {sub}")))?;
    let pos = order
        .iter()
        .position(|&k| k == i)
        .ok_or_else(|| Error::Contract(format!("node {i} missing from its subtree sequence")))?;
    Ok(order[..pos]
        .iter()
        .map(|&j| a.get(j) * t.path_inv_rate(t.lca(i, j)))
        .sum())
}

pub fn compute_time(srv: &ServerParams, y: f64, cycles_per_bit: f64) -> f64 {
    y * cycles_per_bit / srv.cpu_freq
}

pub fn compute_energy(srv: &ServerParams, y: f64, cycles_per_bit: f64) -> f64 {
    srv.switched_cap * y * cycles_per_bit * srv.cpu_freq * srv.cpu_freq
}

/// Bits that node `i` forwards to its child `j`: the whole workload of
/// `j`'s subtree.
pub fn relay_load(t: &SinkTree, a: &Allocation, i: usize, j: usize) -> Result<f64> {
    if t.parent(j) != Some(i) {
        return Err(Error::Contract(format!("{j} is not a child of {i}")));
    }
    Ok(t.descendants(j).iter().map(|&k| a.get(k)).sum())
}

/// Compute plus forwarding energy of node `i`, in joules.
pub fn node_energy(t: &SinkTree, a: &Allocation, i: usize, cycles_per_bit: f64) -> f64 {
    let srv = t.server(i);
    let relay: f64 = t
        .children(i)
        .iter()
        .map(|&j| {
            let load = relay_load(t, a, i, j).expect("child by construction");
            srv.tx_power * load / t.edge_rate(j).expect("child has an edge")
        })
        .sum();
    compute_energy(srv, a.get(i), cycles_per_bit) + relay
}

pub fn node_cost(t: &SinkTree, s: &Schedule, a: &Allocation, m: &CostModel, i: usize) -> Result<f64> {
    let srv = t.server(i);
    let time = transmission_time(t, i, a.get(i))
        + waiting_time(t, s, a, i)?
        + compute_time(srv, a.get(i), m.cycles_per_bit);
    let energy = node_energy(t, a, i, m.cycles_per_bit);
    Ok(m.weights.time * time + m.weights.energy * energy)
}

/// Evaluates every cost term directly from the allocation.
pub fn system_cost(t: &SinkTree, s: &Schedule, a: &Allocation, m: &CostModel) -> Result<CostBreakdown> {
    s.validate(t)?;
    a.check_against(t)?;
    let n = t.len();
    let b = m.cycles_per_bit;

    // Subtree workloads, children before parents.
    let mut load = a.y().to_vec();
    for i in (1..n).rev() {
        let p = t.parent(i).unwrap();
        load[p] += load[i];
    }

    let mut wait = vec![0.0; n];
    for order in s.orders() {
        for (pos, &i) in order.iter().enumerate() {
            wait[i] = order[..pos]
                .iter()
                .map(|&j| a.get(j) * t.path_inv_rate(t.lca(i, j)))
                .sum();
        }
    }

    let mut nodes = Vec::with_capacity(n);
    let mut cost = 0.0f64;
    for i in 0..n {
        let srv = t.server(i);
        let y = a.get(i);
        let t_tran = transmission_time(t, i, y);
        let t_wait = wait[i];
        let t_comp = compute_time(srv, y, b);
        let t_total = t_tran + t_wait + t_comp;
        let e_comp = compute_energy(srv, y, b);
        let e_comm: f64 = t
            .children(i)
            .iter()
            .map(|&j| srv.tx_power * load[j] / t.edge_rate(j).unwrap())
            .sum();
        let e_total = e_comp + e_comm;
        let c = m.weights.time * t_total + m.weights.energy * e_total;
        cost = cost.max(c);
        nodes.push(NodeCost {
            t_tran,
            t_wait,
            t_comp,
            t_total,
            e_comp,
            e_comm,
            e_total,
            cost: c,
        });
    }
    Ok(CostBreakdown { nodes, cost })
}

/// Linear coefficients of every node cost in the allocation.
pub fn cost_coefficients(t: &SinkTree, s: &Schedule, m: &CostModel) -> Result<CostCoefficients> {
    s.validate(t)?;
    let n = t.len();
    let b = m.cycles_per_bit;
    let w = m.weights;
    let mut a = vec![vec![0.0; n]; n];

    for (i, row) in a.iter_mut().enumerate() {
        let srv = t.server(i);
        row[i] += w.time * (t.path_inv_rate(i) + b / srv.cpu_freq)
            + w.energy * srv.switched_cap * b * srv.cpu_freq * srv.cpu_freq;
        for &c in t.children(i) {
            let per_bit = w.energy * srv.tx_power / t.edge_rate(c).unwrap();
            for k in t.descendants(c) {
                row[k] += per_bit;
            }
        }
    }
    for order in s.orders() {
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[..pos] {
                a[i][j] += w.time * t.path_inv_rate(t.lca(i, j));
            }
        }
    }
    Ok(CostCoefficients {
        a,
        cycles_per_bit: b,
    })
}
