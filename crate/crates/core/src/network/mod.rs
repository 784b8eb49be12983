//! Server/link data model, random network generation and the sink-tree
//! transform that every solver works on.

mod generate;
mod io;
mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_network, GenParams, MAX_GENERATION_ATTEMPTS};
pub use io::{FreqUnit, LinkEntry, NetworkFile, PowerUnit, RateUnit, ServerEntry, Units};
pub use tree::{build_sink_tree, prune_tree, PruneMode, Pruned, SinkTree};

/// Compute and radio parameters of one server, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerParams {
    pub id: usize,
    /// CPU frequency in cycles per second.
    pub cpu_freq: f64,
    /// Transmission power in watts.
    pub tx_power: f64,
    /// Effective switched capacitance; compute energy is `gamma * cycles * f^2`.
    pub switched_cap: f64,
}

impl ServerParams {
    pub fn new(id: usize, cpu_freq: f64, tx_power: f64, switched_cap: f64) -> Self {
        Self {
            id,
            cpu_freq,
            tx_power,
            switched_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cpu_freq > 0.0 && self.cpu_freq.is_finite()) {
            return Err(Error::Parameter(format!(
                "server {}: cpu_freq must be positive, got {}",
                self.id, self.cpu_freq
            )));
        }
        if !(self.tx_power >= 0.0 && self.tx_power.is_finite()) {
            return Err(Error::Parameter(format!(
                "server {}: tx_power must be non-negative, got {}",
                self.id, self.tx_power
            )));
        }
        if !(self.switched_cap >= 0.0 && self.switched_cap.is_finite()) {
            return Err(Error::Parameter(format!(
                "server {}: switched_cap must be non-negative, got {}",
                self.id, self.switched_cap
            )));
        }
        Ok(())
    }
}

/// Directed network of servers. Node 0 is the master.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    servers: Vec<ServerParams>,
    links: BTreeMap<(usize, usize), f64>,
}

impl NetworkGraph {
    pub const MASTER: usize = 0;

    /// Builds a graph; server `k` must carry id `k` and every link rate must
    /// be positive.
    pub fn new(servers: Vec<ServerParams>, links: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        if servers.is_empty() {
            return Err(Error::Parameter("network needs at least the master".into()));
        }
        for (k, s) in servers.iter().enumerate() {
            if s.id != k {
                return Err(Error::Parameter(format!(
                    "server at position {k} has id {}; ids must be 0..N in order",
                    s.id
                )));
            }
            s.validate()?;
        }
        let n = servers.len();
        for (&(i, j), &rate) in &links {
            if i >= n || j >= n {
                return Err(Error::Parameter(format!("link ({i},{j}) names an unknown node")));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-link on node {i}")));
            }
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::Parameter(format!(
                    "link ({i},{j}) rate must be positive, got {rate}"
                )));
            }
        }
        Ok(Self { servers, links })
    }

    /// Graph with bidirectional links of equal rate in both directions.
    pub fn symmetric(servers: Vec<ServerParams>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut links = BTreeMap::new();
        for &(i, j, r) in edges {
            links.insert((i, j), r);
            links.insert((j, i), r);
        }
        Self::new(servers, links)
    }

    pub fn node_count(&self) -> usize {
        self.servers.len()
    }

    pub fn servers(&self) -> &[ServerParams] {
        &self.servers
    }

    pub fn server(&self, i: usize) -> &ServerParams {
        &self.servers[i]
    }

    pub fn links(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.links
    }

    pub fn rate(&self, i: usize, j: usize) -> Option<f64> {
        self.links.get(&(i, j)).copied()
    }

    /// Outgoing neighbours of `i` with their rates, ascending by id.
    pub fn out_links(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.links
            .range((i, 0)..(i + 1, 0))
            .map(|(&(_, j), &r)| (j, r))
    }

    pub fn set_rate(&mut self, i: usize, j: usize, rate: f64) -> Result<()> {
        if i >= self.node_count() || j >= self.node_count() || i == j {
            return Err(Error::Parameter(format!("invalid link ({i},{j})")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Parameter(format!("link rate must be positive, got {rate}")));
        }
        self.links.insert((i, j), rate);
        Ok(())
    }

    pub fn server_mut(&mut self, i: usize) -> Option<&mut ServerParams> {
        self.servers.get_mut(i)
    }

    /// Nodes that cannot be reached from the master, ascending.
    pub fn unreachable_from_master(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![Self::MASTER];
        seen[Self::MASTER] = true;
        while let Some(u) = stack.pop() {
            for (v, _) in self.out_links(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        (0..n).filter(|&v| !seen[v]).collect()
    }
}

/// Inputs of the Shannon capacity approximation of a link rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShannonParams {
    /// Channel bandwidth in Hz.
    pub bandwidth: f64,
    /// Received signal power in watts.
    pub signal_power: f64,
    /// Noise power in watts.
    pub noise_power: f64,
}

/// Link rate in bits/s: `B * log2(1 + s/n)`.
pub fn shannon_rate(p: &ShannonParams) -> Result<f64> {
    if !(p.bandwidth > 0.0) {
        return Err(Error::Parameter(format!(
            "bandwidth must be positive, got {}",
            p.bandwidth
        )));
    }
    if !(p.noise_power > 0.0) {
        return Err(Error::Parameter(format!(
            "noise power must be positive, got {}",
            p.noise_power
        )));
    }
    if !(p.signal_power >= 0.0) {
        return Err(Error::Parameter(format!(
            "signal power must be non-negative, got {}",
            p.signal_power
        )));
    }
    Ok(p.bandwidth * (1.0 + p.signal_power / p.noise_power).log2())
}
