use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{scale_solution, Solution};
use crate::cost::{CostModel, Weights};
use crate::error::Result;
use crate::network::SinkTree;

/// SHA-256 of the tree's canonical JSON form.
pub fn tree_hash(t: &SinkTree) -> String {
    let json = serde_json::to_vec(t).expect("tree serializes");
    hex::encode(Sha256::digest(&json))
}

/// A solved baseline for one tree and cost model, answered for other task
/// sizes by proportional rescaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineCache {
    pub tree_hash: String,
    pub task_size: f64,
    pub weights: Weights,
    pub cycles_per_bit: f64,
    pub solution: Solution,
}

impl BaselineCache {
    pub fn new(t: &SinkTree, model: &CostModel, solution: Solution) -> Self {
        Self {
            tree_hash: tree_hash(t),
            task_size: solution.base_task_size,
            weights: model.weights,
            cycles_per_bit: model.cycles_per_bit,
            solution,
        }
    }

    /// True when the baseline was solved for this tree and model.
    pub fn matches(&self, t: &SinkTree, model: &CostModel) -> bool {
        self.weights == model.weights
            && self.cycles_per_bit == model.cycles_per_bit
            && self.tree_hash == tree_hash(t)
    }

    /// Rescaled baseline, or `None` when the tree or model changed and the
    /// caller has to re-solve.
    pub fn answer(&self, t: &SinkTree, model: &CostModel, task_size: f64) -> Option<Result<Solution>> {
        self.matches(t, model)
            .then(|| scale_solution(&self.solution, task_size))
    }

    /// Rescaled baseline without re-hashing the tree.
    pub fn answer_unchecked(&self, task_size: f64) -> Result<Solution> {
        scale_solution(&self.solution, task_size)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
