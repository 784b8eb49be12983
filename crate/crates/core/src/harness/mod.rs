//! Scenario-driven experiments: load or generate a network, run methods
//! over a parameter sweep, verify and emit the results.

mod emit;
mod run;
mod scenario;
mod topologies;
mod verify;

pub use emit::{emit_csv, emit_json, read_json, write_csv, CSV_FIXED_COLUMNS};
pub use run::{lift_solution, run_scenario, solve_method, verify_cost, RunRecord, VERIFY_RTOL};
pub use scenario::{Method, MethodEntry, NetworkSource, OutputFormat, OutputSpec, Scenario, Sweep, SweepParam};
pub use topologies::{topology, SHIPPED_GAMMA, TOPOLOGY_NAMES};
pub use verify::{verify_instance, Check};
