mod common;

use std::collections::BTreeSet;

use common::*;
use offload_core::cost::{system_cost, CostModel, Schedule, Weights};
use offload_core::network::{build_sink_tree, NetworkGraph, ServerParams};
use offload_core::solver::{
    cmo, enumerate_schedules, pmo, scale_solution, schedule_count, solve_fixed_order, solve_master_split,
    tree_hash, unrank_schedule, BaselineCache, SolveStats, SubtreeSolution,
};
use rand::Rng;

fn model(w: (f64, f64)) -> CostModel {
    CostModel::new(Weights::new(w.0, w.1).unwrap(), B).unwrap()
}

const WEIGHTS: [(f64, f64); 2] = [(1.0, 0.0), (0.5, 0.05)];

#[test]
fn fixed_order_matches_vertex_oracle() {
    let mut r = rng(21);
    for k in 0..120 {
        let n = r.gen_range(1..=6);
        let ranges = if k % 3 == 0 { ParamRanges::HIGH_GAMMA } else { ParamRanges::PHYSICAL };
        let t = random_instance(&mut r, n, ranges);
        let w = WEIGHTS[k % 2];
        let orders = all_orders(&t);
        let o = orders[r.gen_range(0..orders.len())].clone();
        let forced: BTreeSet<usize> = if n > 2 && k % 4 == 1 { BTreeSet::from([n - 1]) } else { BTreeSet::new() };
        let sol = solve_fixed_order(&t, &Schedule::new(o.clone()), GBIT, &model(w), &forced).unwrap();
        let (z, _) = vertex_oracle(&raw_matrix(&t, &o, w, B), &forced);
        assert!(rel_close(sol.cost, z * GBIT, 1e-9), "case {k}: {} vs {}", sol.cost, z * GBIT);
        for &f in &forced {
            assert_eq!(sol.allocation.get(f), 0.0);
        }
    }
}

#[test]
fn cmo_is_the_best_order() {
    let mut r = rng(22);
    for k in 0..40 {
        let n = r.gen_range(2..=6);
        let t = random_instance(&mut r, n, ParamRanges::PHYSICAL);
        let w = WEIGHTS[k % 2];
        let sol = cmo(&t, GBIT, &model(w)).unwrap();
        let best = all_orders(&t)
            .iter()
            .map(|o| vertex_oracle(&raw_matrix(&t, o, w, B), &BTreeSet::new()).0)
            .fold(f64::INFINITY, f64::min);
        assert!(rel_close(sol.cost, best * GBIT, 1e-9));
        let direct = system_cost(&t, &sol.schedule, &sol.allocation, &model(w)).unwrap();
        assert_eq!(direct.cost, sol.cost);
        // Epigraph tightness: some node attains the optimum.
        assert!(sol.breakdown.nodes.iter().any(|c| c.cost == sol.cost));
    }
}

#[test]
fn cmo_master_plus_chain_against_grid() {
    let mut r = rng(23);
    let t = random_tree(&mut r, &[0, 0, 1, 2], ParamRanges::PHYSICAL);
    let w = (1.0, 0.0);
    let sol = cmo(&t, GBIT, &model(w)).unwrap();
    let mut best = f64::INFINITY;
    for o in all_orders(&t) {
        let a = raw_matrix(&t, &o, w, B);
        let g = grid_oracle(&a, &BTreeSet::new(), 1e-4, |z| {
            assert!(sol.cost <= z * GBIT * (1.0 + 1e-12));
        });
        best = best.min(g.best);
    }
    assert_eq!(all_orders(&t).len(), 6);
    assert!((best * GBIT - sol.cost) <= 1e-4 * sol.cost);
}

#[test]
fn zero_task() {
    let mut r = rng(24);
    let t = random_instance(&mut r, 5, ParamRanges::PHYSICAL);
    for s in [cmo(&t, 0.0, &model((1.0, 0.0))).unwrap(), pmo(&t, 0.0, &model((1.0, 0.0))).unwrap()] {
        assert_eq!(s.cost, 0.0);
        assert!(s.allocation.y().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn star_has_one_schedule() {
    let mut r = rng(25);
    let t = random_tree(&mut r, &[0, 0, 0], ParamRanges::PHYSICAL);
    let m = model((1.0, 0.0));
    let c = cmo(&t, GBIT, &m).unwrap();
    let f = solve_fixed_order(&t, &Schedule::identity(&t), GBIT, &m, &BTreeSet::new()).unwrap();
    assert_eq!(c.stats.schedules_evaluated, 1);
    assert_eq!(c.cost, f.cost);
}

#[test]
fn schedule_enumeration() {
    let mut r = rng(26);
    // Two singleton subtrees.
    let t = random_tree(&mut r, &[0, 0, 0], ParamRanges::PHYSICAL);
    assert_eq!(enumerate_schedules(&t).count(), 1);
    // One subtree of three.
    let t = random_tree(&mut r, &[0, 0, 1, 1], ParamRanges::PHYSICAL);
    assert_eq!(enumerate_schedules(&t).count(), 6);
    // Sizes {3, 2}.
    let t = random_tree(&mut r, &[0, 0, 0, 1, 1, 2], ParamRanges::PHYSICAL);
    let all: Vec<Schedule> = enumerate_schedules(&t).collect();
    assert_eq!(all.len(), 12);
    assert_eq!(schedule_count(&t), Some(12));
    let distinct: BTreeSet<Vec<Vec<usize>>> = all.iter().map(|s| s.orders().to_vec()).collect();
    assert_eq!(distinct.len(), 12);
    for (k, s) in all.iter().enumerate() {
        s.validate(&t).unwrap();
        assert_eq!(&unrank_schedule(&t, k as u64), s);
    }
    assert_eq!(all[0], Schedule::identity(&t));
    // Solo master.
    let solo = random_tree(&mut r, &[0], ParamRanges::PHYSICAL);
    assert_eq!(enumerate_schedules(&solo).count(), 1);
}

#[test]
fn cmo_counts_every_schedule() {
    let mut r = rng(27);
    for _ in 0..10 {
        let n = r.gen_range(2..=8);
        let t = random_instance(&mut r, n, ParamRanges::PHYSICAL);
        let expected: u64 = t.subtrees().iter().map(|s| (1..=s.len() as u64).product::<u64>()).product();
        let sol = cmo(&t, GBIT, &model((1.0, 0.0))).unwrap();
        assert_eq!(sol.stats.schedules_evaluated, expected);
    }
}

#[test]
fn pmo_matches_cmo() {
    let mut r = rng(28);
    for k in 0..50 {
        let n = r.gen_range(3..=8);
        let roots = r.gen_range(2..=3.min(n - 1));
        let ranges = if k % 5 == 0 { ParamRanges::HIGH_GAMMA } else { ParamRanges::PHYSICAL };
        let t = random_rooted(&mut r, n, roots, ranges);
        let m = model(WEIGHTS[k % 2]);
        let c = cmo(&t, GBIT, &m).unwrap();
        let p = pmo(&t, GBIT, &m).unwrap();
        assert!(rel_close(p.cost, c.cost, 1e-7), "case {k}: pmo {} cmo {}", p.cost, c.cost);
        p.schedule.validate(&t).unwrap();
        assert!(rel_close(p.allocation.y().iter().sum::<f64>(), GBIT, 1e-12));
    }
}

#[test]
fn pmo_single_subtree_equals_cmo() {
    let mut r = rng(29);
    for _ in 0..10 {
        let t = random_rooted(&mut r, 6, 1, ParamRanges::PHYSICAL);
        let m = model((0.5, 0.05));
        let c = cmo(&t, GBIT, &m).unwrap();
        let p = pmo(&t, GBIT, &m).unwrap();
        assert!(rel_close(p.cost, c.cost, 1e-9));
    }
}

fn probe(subtree: usize, size: f64, cost: f64) -> SubtreeSolution {
    SubtreeSolution {
        subtree,
        probe_size: size,
        cost,
        nodes: vec![subtree + 1],
        loads: vec![size],
        order: vec![subtree + 1],
        free_node: false,
        stats: SolveStats::default(),
    }
}

#[test]
fn master_split_examples() {
    let m = model((1.0, 0.0));
    let master = ServerParams::new(0, 1e9, 1.0, 0.0);
    // Master costs 1e-12 per bit; the subtree 1e-15 per bit.
    let s = solve_master_split(&[probe(0, GBIT, 1e-6)], &master, &[1e10], GBIT, &m).unwrap();
    let share = s.subtree_loads[0] / GBIT;
    assert!(rel_close(share, 1e-12 / (1e-12 + 1e-15), 1e-12));
    assert!(share > 0.99);

    let s = solve_master_split(&[probe(0, GBIT, 1e-3), probe(1, GBIT, 1e-3)], &master, &[1e10, 1e10], GBIT, &m).unwrap();
    assert!(rel_close(s.subtree_loads[0], s.subtree_loads[1], 1e-12));

    let s = solve_master_split(&[probe(0, GBIT, 1e-3)], &master, &[1e10], 0.0, &m).unwrap();
    assert_eq!((s.master_load, s.subtree_loads[0], s.cost), (0.0, 0.0, 0.0));
    assert!(solve_master_split(&[probe(0, GBIT, 1e-3)], &master, &[1e10], -1.0, &m).is_err());
}

#[test]
fn master_split_all_local_is_local_cost() {
    // A subtree far more expensive than the master gets nothing.
    let m = model((0.5, 0.05));
    let master = ServerParams::new(0, 2e9, 0.5, 1e-28);
    let s = solve_master_split(&[probe(0, GBIT, 1e9)], &master, &[1e9], GBIT, &m).unwrap();
    let b = B;
    let local = 0.5 * GBIT * b / 2e9 + 0.05 * 1e-28 * GBIT * b * 4e18;
    assert!(s.subtree_loads[0] / GBIT < 1e-9);
    assert!(rel_close(s.cost, local, 1e-6));
}

#[test]
fn pmo_cost_matches_split_objective() {
    let mut r = rng(30);
    for k in 0..10 {
        let t = random_rooted(&mut r, 7, 3, ParamRanges::PHYSICAL);
        let m = model(WEIGHTS[k % 2]);
        let p = pmo(&t, GBIT, &m).unwrap();
        let c = cmo(&t, GBIT, &m).unwrap();
        assert!(rel_close(p.cost, c.cost, 1e-7));
    }
}

#[test]
fn proportional_rescaling() {
    let mut r = rng(31);
    for k in 0..20 {
        let n = r.gen_range(2..=7);
        let t = random_instance(&mut r, n, ParamRanges::PHYSICAL);
        let m = model(WEIGHTS[k % 2]);
        let base = pmo(&t, GBIT, &m).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let fresh = pmo(&t, c * GBIT, &m).unwrap();
            let scaled = scale_solution(&base, c * GBIT).unwrap();
            assert!(rel_close(scaled.cost, fresh.cost, 1e-7));
            for i in 0..n {
                assert!((scaled.allocation.get(i) - fresh.allocation.get(i)).abs() <= 1e-6 * c * GBIT);
            }
            let check = system_cost(&t, &scaled.schedule, &scaled.allocation, &m).unwrap();
            assert!(rel_close(check.cost, scaled.cost, 1e-12));
        }
    }
}

#[test]
fn scaling_doubles_exactly() {
    let mut r = rng(32);
    let t = random_instance(&mut r, 5, ParamRanges::PHYSICAL);
    let base = cmo(&t, GBIT, &model((1.0, 0.0))).unwrap();
    let d = scale_solution(&base, 2.0 * GBIT).unwrap();
    assert_eq!(d.cost, 2.0 * base.cost);
    for i in 0..5 {
        assert_eq!(d.allocation.get(i), 2.0 * base.allocation.get(i));
    }
    assert_eq!(d.schedule, base.schedule);
}

#[test]
fn baseline_cache_round_trip() {
    let mut r = rng(33);
    let g = tree_graph(&mut r, &[0, 0, 1, 1, 0], ParamRanges::PHYSICAL);
    let t = build_sink_tree(&g).unwrap();
    let m = model((0.5, 0.05));
    let base = pmo(&t, GBIT, &m).unwrap();
    let cache = BaselineCache::new(&t, &m, base.clone());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("baseline.json");
    cache.save(&path).unwrap();
    let back = BaselineCache::load(&path).unwrap();
    assert_eq!(back, cache);
    let ans = back.answer(&t, &m, 3.0 * GBIT).unwrap().unwrap();
    assert!(rel_close(ans.cost, 3.0 * base.cost, 1e-15));

    // A changed link invalidates the baseline.
    let mut g2 = g.clone();
    g2.set_rate(0, 1, 1.0).unwrap();
    g2.set_rate(1, 0, 1.0).unwrap();
    let t2 = build_sink_tree(&g2).unwrap();
    assert_ne!(tree_hash(&t2), tree_hash(&t));
    assert!(back.answer(&t2, &m, GBIT).is_none());
    assert!(back.answer(&t, &model((1.0, 0.0)), GBIT).is_none());
}

#[test]
fn solvers_are_deterministic() {
    let mut r = rng(34);
    let t = random_rooted(&mut r, 8, 2, ParamRanges::PHYSICAL);
    let m = model((0.5, 0.05));
    let a = cmo(&t, GBIT, &m).unwrap();
    let p = pmo(&t, GBIT, &m).unwrap();
    for _ in 0..5 {
        assert_eq!(cmo(&t, GBIT, &m).unwrap(), a);
        assert_eq!(pmo(&t, GBIT, &m).unwrap(), p);
    }
}

#[test]
fn two_node_network_example() {
    let s = vec![ServerParams::new(0, 1e9, 1.0, 1e-2), ServerParams::new(1, 1e9, 1.0, 1e-2)];
    let t = build_sink_tree(&NetworkGraph::symmetric(s, &[(0, 1, 1e10)]).unwrap()).unwrap();
    let sol = cmo(&t, GBIT, &model((1.0, 0.0))).unwrap();
    assert!(rel_close(sol.allocation.get(0), 0.990196078431 * GBIT, 1e-11));
    assert!(rel_close(sol.cost, 9.90196078431e-4, 1e-11));
    // Independent check with a fine grid over y₁.
    let a = raw_matrix(&t, &[vec![1]], (1.0, 0.0), B);
    let mut best = f64::INFINITY;
    for k in 0..=100_000 {
        let x1 = k as f64 * 1e-5;
        let z = (a[0][0] * (1.0 - x1) + a[0][1] * x1).max(a[1][0] * (1.0 - x1) + a[1][1] * x1);
        best = best.min(z);
    }
    assert!(sol.cost <= best * GBIT * (1.0 + 1e-12));
    assert!(rel_close(sol.cost, best * GBIT, 1e-4));
}
