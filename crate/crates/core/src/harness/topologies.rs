//! Small named networks used by the experiments and acceptance checks.
//!
//! Each one exercises a different tree shape: a single deep chain, a wide
//! and shallow star of short branches, one three-hop branch beside two
//! single-node subtrees, and two subtrees of unequal size.

use crate::error::{Error, Result};
use crate::network::{NetworkGraph, ServerParams};
use crate::units::{dbm_to_watts, gbps_to_bps, ghz_to_hz};

/// Switched capacitance shared by all shipped topologies.
pub const SHIPPED_GAMMA: f64 = 1e-28;

pub const TOPOLOGY_NAMES: [&str; 4] = ["deep-chain", "wide-shallow", "mixed", "two-subtree"];

/// `(cpu GHz, tx dBm)` per server and `(i, j, Gbps)` per symmetric link.
struct Table {
    servers: &'static [(f64, f64)],
    links: &'static [(usize, usize, f64)],
}

const DEEP_CHAIN: Table = Table {
    servers: &[(2.0, 7.0), (4.0, 10.0), (6.0, 10.0), (3.0, 10.0), (8.0, 10.0)],
    links: &[(0, 1, 20.0), (1, 2, 15.0), (2, 3, 10.0), (3, 4, 8.0)],
};

const WIDE_SHALLOW: Table = Table {
    servers: &[
        (2.0, 7.0),
        (3.0, 10.0),
        (5.0, 10.0),
        (2.5, 10.0),
        (4.0, 10.0),
        (6.0, 10.0),
        (3.5, 10.0),
    ],
    links: &[
        (0, 1, 10.0),
        (0, 2, 25.0),
        (0, 3, 15.0),
        (0, 4, 30.0),
        (1, 5, 12.0),
        (2, 6, 20.0),
    ],
};

const MIXED: Table = Table {
    servers: &[
        (2.0, 7.0),
        (5.0, 10.0),
        (3.0, 10.0),
        (6.0, 10.0),
        (4.0, 10.0),
        (8.0, 10.0),
        (2.5, 10.0),
    ],
    links: &[
        (0, 1, 20.0),
        (0, 2, 12.0),
        (0, 3, 15.0),
        (1, 4, 18.0),
        (4, 6, 10.0),
        (1, 5, 9.0),
        // Slower than the three-hop route through nodes 1 and 4; never on a
        // sink path.
        (0, 6, 2.0),
    ],
};

/// Node 1 roots the larger subtree; the sweeps vary the rate of (0, 1) and
/// the frequency of node 1.
const TWO_SUBTREE: Table = Table {
    servers: &[
        (2.0, 7.0),
        (4.0, 45.0),
        (6.0, 10.0),
        (5.0, 10.0),
        (3.0, 10.0),
        (7.0, 10.0),
    ],
    links: &[(0, 1, 10.0), (1, 2, 10.0), (1, 3, 10.0), (0, 4, 10.0), (4, 5, 10.0)],
};

fn build(t: &Table) -> NetworkGraph {
    let servers = t
        .servers
        .iter()
        .enumerate()
        .map(|(i, &(ghz, dbm))| ServerParams::new(i, ghz_to_hz(ghz), dbm_to_watts(dbm), SHIPPED_GAMMA))
        .collect();
    let links: Vec<_> = t.links.iter().map(|&(i, j, r)| (i, j, gbps_to_bps(r))).collect();
    NetworkGraph::symmetric(servers, &links).expect("shipped topology is valid")
}

/// The named topology, or a parameter error listing the known names.
pub fn topology(name: &str) -> Result<NetworkGraph> {
    let table = match name {
        "deep-chain" => &DEEP_CHAIN,
        "wide-shallow" => &WIDE_SHALLOW,
        "mixed" => &MIXED,
        "two-subtree" => &TWO_SUBTREE,
        _ => {
            return Err(Error::Parameter(format!(
                "unknown topology {name:?}; known: {}",
                TOPOLOGY_NAMES.join(", ")
            )))
        }
    };
    Ok(build(table))
}
