use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NetworkGraph, ServerParams};
use crate::error::{Error, Result};
use crate::units;

/// Resamples allowed per seed before giving up on connectivity.
pub const MAX_GENERATION_ATTEMPTS: usize = 100;

/// Parameters of the Erdős–Rényi network generator. Ranges are given in
/// engineering units (GHz, Gbps, dBm) and converted to SI on generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    /// Total number of servers including the master.
    pub node_count: usize,
    pub edge_prob: f64,
    pub freq_range_ghz: (f64, f64),
    pub rate_range_gbps: (f64, f64),
    pub gamma: f64,
    pub tx_power_dbm: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            node_count: 10,
            edge_prob: 0.3,
            freq_range_ghz: (1.0, 10.0),
            rate_range_gbps: (10.0, 100.0),
            gamma: 1e-2,
            tx_power_dbm: 30.0,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.node_count == 0 {
            problems.push("node_count must be at least 1".to_string());
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            problems.push(format!("edge_prob must be in (0,1], got {}", self.edge_prob));
        }
        for (name, (lo, hi)) in [
            ("freq_range_ghz", self.freq_range_ghz),
            ("rate_range_gbps", self.rate_range_gbps),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                problems.push(format!("{name} must be a nonempty positive range, got [{lo}, {hi}]"));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            problems.push(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if !self.tx_power_dbm.is_finite() {
            problems.push("tx_power_dbm must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Parameter(problems.join("; ")))
        }
    }
}

/// Samples a connected network. The result is a pure function of `g`: the
/// same parameters always yield the same graph. Unconnected samples are
/// redrawn from the continuing random stream.
pub fn generate_network(g: &GenParams) -> Result<NetworkGraph> {
    g.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let tx_power = units::dbm_to_watts(g.tx_power_dbm);
    let (f_lo, f_hi) = g.freq_range_ghz;
    let (r_lo, r_hi) = g.rate_range_gbps;

    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let servers: Vec<ServerParams> = (0..g.node_count)
            .map(|id| {
                let f = units::ghz_to_hz(rng.gen_range(f_lo..=f_hi));
                ServerParams::new(id, f, tx_power, g.gamma)
            })
            .collect();
        let mut links = BTreeMap::new();
        for i in 0..g.node_count {
            for j in (i + 1)..g.node_count {
                if rng.gen::<f64>() < g.edge_prob {
                    let r = units::gbps_to_bps(rng.gen_range(r_lo..=r_hi));
                    links.insert((i, j), r);
                    links.insert((j, i), r);
                }
            }
        }
        let graph = NetworkGraph::new(servers, links)?;
        if graph.unreachable_from_master().is_empty() {
            return Ok(graph);
        }
    }
    Err(Error::Generation {
        seed: g.seed,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solo_master() {
        let g = generate_network(&GenParams {
            node_count: 1,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(g.node_count(), 1);
        assert!(g.links().is_empty());
    }

    #[test]
    fn same_seed_same_graph() {
        let p = GenParams {
            node_count: 5,
            seed: 42,
            ..Default::default()
        };
        assert_eq!(generate_network(&p).unwrap(), generate_network(&p).unwrap());
    }

    #[test]
    fn ranges_respected_and_connected() {
        let p = GenParams {
            node_count: 20,
            edge_prob: 0.3,
            seed: 7,
            ..Default::default()
        };
        let g = generate_network(&p).unwrap();
        assert!(g.unreachable_from_master().is_empty());
        for s in g.servers() {
            assert!((1e9..=10e9).contains(&s.cpu_freq), "{}", s.cpu_freq);
            assert_eq!(s.tx_power, 1.0);
            assert_eq!(s.switched_cap, 1e-2);
        }
        for (&(i, j), &r) in g.links() {
            assert!((10e9..=100e9).contains(&r));
            assert_eq!(g.rate(j, i), Some(r));
        }
    }

    #[test]
    fn hopeless_connectivity_names_seed() {
        let p = GenParams {
            node_count: 40,
            edge_prob: 1e-9,
            seed: 99,
            ..Default::default()
        };
        match generate_network(&p) {
            Err(Error::Generation { seed, attempts }) => {
                assert_eq!(seed, 99);
                assert_eq!(attempts, MAX_GENERATION_ATTEMPTS);
            }
            other => panic!("expected generation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_params() {
        let bad = GenParams {
            edge_prob: 0.0,
            ..Default::default()
        };
        assert!(generate_network(&bad).is_err());
        let bad = GenParams {
            freq_range_ghz: (5.0, 1.0),
            ..Default::default()
        };
        assert!(generate_network(&bad).is_err());
    }
}
