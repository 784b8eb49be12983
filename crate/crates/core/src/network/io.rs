use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetworkGraph, ServerParams};
use crate::error::Result;
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FreqUnit {
    #[default]
    GHz,
    MHz,
    Hz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PowerUnit {
    #[default]
    #[serde(rename = "dBm")]
    Dbm,
    #[serde(rename = "mW")]
    MilliWatt,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RateUnit {
    #[default]
    Gbps,
    Mbps,
    #[serde(rename = "bps")]
    Bps,
}

/// Units of the numeric fields of a network file. The field names carry the
/// default units (`cpu_freq_ghz`, `tx_power_dbm`, `rate_gbps`); a `units`
/// block reinterprets them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Units {
    pub frequency: FreqUnit,
    pub power: PowerUnit,
    pub rate: RateUnit,
}

impl Units {
    /// SI base units; files written this way reload bit-exactly.
    pub const SI: Units = Units {
        frequency: FreqUnit::Hz,
        power: PowerUnit::W,
        rate: RateUnit::Bps,
    };

    fn freq_to_hz(&self, v: f64) -> f64 {
        match self.frequency {
            FreqUnit::GHz => units::ghz_to_hz(v),
            FreqUnit::MHz => v * 1e6,
            FreqUnit::Hz => v,
        }
    }

    fn hz_to_freq(&self, v: f64) -> f64 {
        match self.frequency {
            FreqUnit::GHz => v / units::GIGA,
            FreqUnit::MHz => v / 1e6,
            FreqUnit::Hz => v,
        }
    }

    fn power_to_watts(&self, v: f64) -> f64 {
        match self.power {
            PowerUnit::Dbm => units::dbm_to_watts(v),
            PowerUnit::MilliWatt => v * 1e-3,
            PowerUnit::W => v,
        }
    }

    fn watts_to_power(&self, v: f64) -> f64 {
        match self.power {
            PowerUnit::Dbm => units::watts_to_dbm(v),
            PowerUnit::MilliWatt => v * 1e3,
            PowerUnit::W => v,
        }
    }

    fn rate_to_bps(&self, v: f64) -> f64 {
        match self.rate {
            RateUnit::Gbps => units::gbps_to_bps(v),
            RateUnit::Mbps => v * 1e6,
            RateUnit::Bps => v,
        }
    }

    fn bps_to_rate(&self, v: f64) -> f64 {
        match self.rate {
            RateUnit::Gbps => v / units::GIGA,
            RateUnit::Mbps => v / 1e6,
            RateUnit::Bps => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerEntry {
    pub id: usize,
    pub cpu_freq_ghz: f64,
    pub tx_power_dbm: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEntry {
    pub i: usize,
    pub j: usize,
    pub rate_gbps: f64,
}

/// On-disk network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    pub servers: Vec<ServerEntry>,
    pub links: Vec<LinkEntry>,
}

impl NetworkFile {
    pub fn to_graph(&self) -> Result<NetworkGraph> {
        let u = self.units.unwrap_or_default();
        let mut servers: Vec<ServerParams> = self
            .servers
            .iter()
            .map(|s| {
                ServerParams::new(
                    s.id,
                    u.freq_to_hz(s.cpu_freq_ghz),
                    u.power_to_watts(s.tx_power_dbm),
                    s.gamma,
                )
            })
            .collect();
        servers.sort_by_key(|s| s.id);
        let links: BTreeMap<(usize, usize), f64> = self
            .links
            .iter()
            .map(|l| ((l.i, l.j), u.rate_to_bps(l.rate_gbps)))
            .collect();
        NetworkGraph::new(servers, links)
    }

    /// Document in the given units. Only [`Units::SI`] is guaranteed to
    /// reload to a bit-identical graph.
    pub fn from_graph(g: &NetworkGraph, u: Units) -> Self {
        Self {
            units: Some(u),
            servers: g
                .servers()
                .iter()
                .map(|s| ServerEntry {
                    id: s.id,
                    cpu_freq_ghz: u.hz_to_freq(s.cpu_freq),
                    tx_power_dbm: u.watts_to_power(s.tx_power),
                    gamma: s.switched_cap,
                })
                .collect(),
            links: g
                .links()
                .iter()
                .map(|(&(i, j), &r)| LinkEntry {
                    i,
                    j,
                    rate_gbps: u.bps_to_rate(r),
                })
                .collect(),
        }
    }
}

impl NetworkGraph {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkFile = serde_json::from_str(text)?;
        doc.to_graph()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkFile::from_graph(self, Units::SI))
            .expect("network document serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
