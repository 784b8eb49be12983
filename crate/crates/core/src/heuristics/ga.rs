use std::collections::{BTreeSet, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostModel, Schedule};
use crate::error::{Error, Result};
use crate::network::SinkTree;
use crate::solver::{OrderProblem, OrderSearch, OrderSolve, SolveStats, Solution, SubtreeSearch};

/// How an offspring's schedule is perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Swap two positions of one subtree sequence.
    #[default]
    Swap,
    /// Reshuffle one whole subtree sequence.
    Shuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub elite_frac: f64,
    pub mutation_prob: f64,
    pub seed: u64,
    pub mutation: Mutation,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 4,
            generations: 100,
            elite_frac: 0.2,
            mutation_prob: 0.05,
            seed: 0,
            mutation: Mutation::Swap,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.population < 2 {
            bad.push("population must be at least 2");
        }
        if self.generations < 1 {
            bad.push("generations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.elite_frac) {
            bad.push("elite_frac must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            bad.push("mutation_prob must lie in [0, 1]");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Parameter(bad.join("; ")))
        }
    }

    pub fn elite_count(&self) -> usize {
        ((self.elite_frac * self.population as f64).ceil() as usize).clamp(1, self.population)
    }
}

/// Best solution of a GA run and the best-so-far cost after every
/// generation (entry 0 is the initial population).
#[derive(Debug, Clone)]
pub struct GaRun {
    pub solution: Solution,
    pub history: Vec<f64>,
}

type Chromosome = Vec<Vec<usize>>;

/// The initial population avoids duplicates; after this many draws per
/// member on average, duplicates are accepted (the schedule space may be
/// smaller than the population).
const INITIAL_DRAWS_PER_SLOT: usize = 20;

/// Ordered crossover of two permutations of the same set: the child keeps
/// `a[lo..=hi]` in place and fills the other positions, starting after
/// `hi` and wrapping, with the missing genes in the order they appear in
/// `b` from position `hi + 1`.
pub fn ordered_crossover(a: &[usize], b: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let n = a.len();
    assert!(lo <= hi && hi < n && b.len() == n);
    let kept: BTreeSet<usize> = a[lo..=hi].iter().copied().collect();
    let mut child = vec![usize::MAX; n];
    child[lo..=hi].copy_from_slice(&a[lo..=hi]);
    let mut fill = (1..=n).map(|k| (hi + k) % n).filter(|&p| p < lo || p > hi);
    for k in 1..=n {
        let g = b[(hi + k) % n];
        if !kept.contains(&g) {
            child[fill.next().unwrap()] = g;
        }
    }
    child
}

struct Search<'p, 'a> {
    problem: &'p OrderProblem<'a>,
    params: GaParams,
    rng: ChaCha8Rng,
    cache: HashMap<Chromosome, OrderSolve>,
}

impl Search<'_, '_> {
    fn random_chromosome(&mut self) -> Chromosome {
        let mut c = self.problem.tree.subtrees().to_vec();
        for seq in c.iter_mut() {
            seq.shuffle(&mut self.rng);
        }
        c
    }

    fn evaluate(&mut self, pop: &[Chromosome]) -> Result<Vec<f64>> {
        let mut fresh: Vec<&Chromosome> = Vec::new();
        for c in pop {
            if !self.cache.contains_key(c) && !fresh.contains(&c) {
                fresh.push(c);
            }
        }
        let p = self.problem;
        let solved: Vec<(Chromosome, OrderSolve)> = fresh
            .into_par_iter()
            .map(|c| Ok((c.clone(), p.solve(&Schedule::new(c.clone()))?)))
            .collect::<Result<_>>()?;
        self.cache.extend(solved);
        Ok(pop.iter().map(|c| self.cache[c].z).collect())
    }

    fn select(&mut self, fitness: &[f64]) -> usize {
        if let Some(i) = fitness.iter().position(|&z| z == 0.0) {
            return i;
        }
        let w: Vec<f64> = fitness.iter().map(|z| 1.0 / z).collect();
        WeightedIndex::new(&w).expect("positive weights").sample(&mut self.rng)
    }

    fn crossover(&mut self, a: &Chromosome, b: &Chromosome) -> Chromosome {
        a.iter()
            .zip(b)
            .map(|(sa, sb)| {
                if sa.len() < 2 {
                    return sa.clone();
                }
                let mut lo = self.rng.gen_range(0..sa.len());
                let mut hi = self.rng.gen_range(0..sa.len());
                if lo > hi {
                    std::mem::swap(&mut lo, &mut hi);
                }
                ordered_crossover(sa, sb, lo, hi)
            })
            .collect()
    }

    fn mutate(&mut self, c: &mut Chromosome) {
        if !self.rng.gen_bool(self.params.mutation_prob) {
            return;
        }
        let movable: Vec<usize> = (0..c.len()).filter(|&k| c[k].len() >= 2).collect();
        let Some(&k) = movable.choose(&mut self.rng) else {
            return;
        };
        let seq = &mut c[k];
        match self.params.mutation {
            Mutation::Swap => {
                let i = self.rng.gen_range(0..seq.len());
                let mut j = self.rng.gen_range(0..seq.len() - 1);
                if j >= i {
                    j += 1;
                }
                seq.swap(i, j);
            }
            Mutation::Shuffle => seq.shuffle(&mut self.rng),
        }
    }

    fn run(mut self) -> Result<(OrderSearch, Vec<f64>)> {
        let p = self.params;
        let mut pop: Vec<Chromosome> = Vec::with_capacity(p.population);
        let mut draws = 0;
        while pop.len() < p.population {
            let c = self.random_chromosome();
            draws += 1;
            if !pop.contains(&c) || draws > INITIAL_DRAWS_PER_SLOT * p.population {
                pop.push(c);
            }
        }
        let mut fit = self.evaluate(&pop)?;
        let mut best = argmin(&fit);
        let mut best_c = pop[best].clone();
        let mut best_z = fit[best];
        let mut history = vec![best_z];

        for _ in 0..p.generations {
            let mut rank: Vec<usize> = (0..pop.len()).collect();
            rank.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
            let mut next: Vec<Chromosome> = rank[..p.elite_count()].iter().map(|&i| pop[i].clone()).collect();
            while next.len() < p.population {
                let a = self.select(&fit);
                let b = self.select(&fit);
                let mut child = self.crossover(&pop[a], &pop[b]);
                self.mutate(&mut child);
                next.push(child);
            }
            pop = next;
            fit = self.evaluate(&pop)?;
            best = argmin(&fit);
            if fit[best] < best_z {
                best_z = fit[best];
                best_c = pop[best].clone();
            }
            history.push(best_z);
        }

        let solve = self.cache[&best_c].clone();
        let n = self.cache.len() as u64;
        Ok((
            OrderSearch {
                schedule: Schedule::new(best_c),
                solve,
                stats: SolveStats {
                    schedules_evaluated: n,
                    lp_solves: n,
                },
            },
            history,
        ))
    }
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b))).unwrap()
}

fn search(problem: &OrderProblem, params: GaParams) -> Result<(OrderSearch, Vec<f64>)> {
    params.validate()?;
    Search {
        problem,
        params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        cache: HashMap::new(),
    }
    .run()
}

/// Genetic search over schedules with the fixed-order LP as fitness.
pub fn ga_run(t: &SinkTree, task_size: f64, model: &CostModel, params: &GaParams) -> Result<GaRun> {
    params.validate()?;
    if !(task_size >= 0.0 && task_size.is_finite()) {
        return Err(Error::Parameter(format!("task size must be non-negative, got {task_size}")));
    }
    let problem = OrderProblem::new(t, *model, &BTreeSet::new());
    let (r, history) = search(&problem, *params)?;
    let y = r.solve.x.iter().map(|v| v * task_size).collect();
    let tag = if r.solve.free_node { "ga+free-node" } else { "ga" };
    let solution = Solution::evaluate(
        t,
        r.schedule,
        crate::cost::Allocation::new(y, task_size)?,
        model,
        tag,
        r.stats,
    )?;
    Ok(GaRun { solution, history })
}

pub fn ga(t: &SinkTree, task_size: f64, model: &CostModel, params: &GaParams) -> Result<Solution> {
    Ok(ga_run(t, task_size, model, params)?.solution)
}

/// GA as the per-subtree search of PMO; subtree `k` runs with its own
/// seed derived from `params.seed`.
#[derive(Debug, Clone, Copy)]
pub struct GaSubtree(pub GaParams);

impl SubtreeSearch for GaSubtree {
    fn name(&self) -> &str {
        "pmo-ga"
    }

    fn search(&self, p: &OrderProblem, subtree: usize) -> Result<OrderSearch> {
        let seed = self.0.seed ^ (subtree as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Ok(search(p, GaParams { seed, ..self.0 })?.0)
    }
}
