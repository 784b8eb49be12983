//! Independent oracles and instance builders shared by the integration
//! tests. Nothing here calls the library's cost model or solvers; trees are
//! only read through their parent/rate/server accessors.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use offload_core::network::{build_sink_tree, NetworkGraph, ServerParams, SinkTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GBIT: f64 = 1e9;
pub const B: f64 = 1e-3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()) || a == b
}

// ---------------------------------------------------------------- shapes

/// Every rooted unlabeled tree with `n` nodes, as parent arrays with
/// `parent[i] < i`.
pub fn rooted_shapes(n: usize) -> Vec<Vec<usize>> {
    fn canon(children: &[Vec<usize>], v: usize) -> String {
        let mut parts: Vec<String> = children[v].iter().map(|&c| canon(children, c)).collect();
        parts.sort();
        format!("({})", parts.concat())
    }
    let mut seen = BTreeMap::new();
    let mut parent = vec![0usize; n];
    fn rec(i: usize, n: usize, parent: &mut Vec<usize>, seen: &mut BTreeMap<String, Vec<usize>>) {
        if i == n {
            let mut ch = vec![Vec::new(); n];
            for k in 1..n {
                ch[parent[k]].push(k);
            }
            seen.entry(canon(&ch, 0)).or_insert_with(|| parent.clone());
            return;
        }
        for p in 0..i {
            parent[i] = p;
            rec(i + 1, n, parent, seen);
        }
    }
    if n == 1 {
        return vec![vec![0]];
    }
    rec(1, n, &mut parent, &mut seen);
    seen.into_values().collect()
}

/// Random parent array with `roots` level-1 nodes.
pub fn random_parents(rng: &mut impl Rng, n: usize, roots: usize) -> Vec<usize> {
    let mut p = vec![0; n];
    for (i, v) in p.iter_mut().enumerate().skip(roots + 1) {
        *v = rng.gen_range(1..i);
    }
    p
}

#[derive(Debug, Clone, Copy)]
pub struct ParamRanges {
    pub freq_ghz: (f64, f64),
    pub rate_gbps: (f64, f64),
    pub tx_w: (f64, f64),
    pub gamma: f64,
}

impl ParamRanges {
    pub const PHYSICAL: ParamRanges = ParamRanges {
        freq_ghz: (1.0, 10.0),
        rate_gbps: (0.5, 50.0),
        tx_w: (1e-3, 1.0),
        gamma: 1e-28,
    };
    pub const HIGH_GAMMA: ParamRanges = ParamRanges {
        gamma: 1e-2,
        ..ParamRanges::PHYSICAL
    };
}

/// Graph whose only links are the tree edges of `parent`, so its sink tree
/// has exactly that shape.
pub fn tree_graph(rng: &mut impl Rng, parent: &[usize], r: ParamRanges) -> NetworkGraph {
    let n = parent.len();
    let servers = (0..n)
        .map(|i| {
            ServerParams::new(
                i,
                rng.gen_range(r.freq_ghz.0..=r.freq_ghz.1) * 1e9,
                rng.gen_range(r.tx_w.0..=r.tx_w.1),
                r.gamma,
            )
        })
        .collect();
    let edges: Vec<_> = (1..n)
        .map(|i| (parent[i], i, rng.gen_range(r.rate_gbps.0..=r.rate_gbps.1) * 1e9))
        .collect();
    NetworkGraph::symmetric(servers, &edges).unwrap()
}

pub fn random_tree(rng: &mut impl Rng, parent: &[usize], r: ParamRanges) -> SinkTree {
    build_sink_tree(&tree_graph(rng, parent, r)).unwrap()
}

/// Random tree with `n` nodes, `roots` of them one hop from the master.
pub fn random_rooted(rng: &mut impl Rng, n: usize, roots: usize, r: ParamRanges) -> SinkTree {
    let parents = random_parents(rng, n, roots);
    random_tree(rng, &parents, r)
}

/// Random tree with `n` nodes and a random number of subtrees.
pub fn random_instance(rng: &mut impl Rng, n: usize, r: ParamRanges) -> SinkTree {
    let roots = if n == 1 { 0 } else { rng.gen_range(1..n) };
    random_rooted(rng, n, roots, r)
}

// ---------------------------------------------------------------- costs

/// Edges (by child node) from the root down to `i`.
fn root_path_edges(t: &SinkTree, i: usize) -> Vec<usize> {
    let mut e = Vec::new();
    let mut cur = i;
    while let Some(p) = t.parent(cur) {
        e.push(cur);
        cur = p;
    }
    e.reverse();
    e
}

fn level1_ancestor(t: &SinkTree, mut i: usize) -> Option<usize> {
    t.parent(i)?;
    while t.parent(i) != Some(0) {
        i = t.parent(i).unwrap();
    }
    Some(i)
}

fn inv_sum(t: &SinkTree, edges: &[usize]) -> f64 {
    edges.iter().map(|&c| 1.0 / t.edge_rate(c).unwrap()).sum()
}

/// Per-node (time, energy) computed directly from the definitions.
pub fn raw_time_energy(t: &SinkTree, orders: &[Vec<usize>], y: &[f64], b: f64) -> Vec<(f64, f64)> {
    let n = t.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = t.server(i);
        let path = root_path_edges(t, i);
        let mut time = y[i] * inv_sum(t, &path) + y[i] * b / s.cpu_freq;
        if let Some(root) = level1_ancestor(t, i) {
            let order = orders.iter().find(|o| o.contains(&root)).expect("subtree sequence");
            for &j in order.iter().take_while(|&&j| j != i) {
                let pj = root_path_edges(t, j);
                let shared: Vec<usize> = path.iter().zip(&pj).take_while(|(a, b)| a == b).map(|(a, _)| *a).collect();
                time += y[j] * inv_sum(t, &shared);
            }
        }
        let mut energy = s.switched_cap * y[i] * b * s.cpu_freq * s.cpu_freq;
        for k in 0..n {
            if k == i {
                continue;
            }
            // Child of i on the way to k, if i is an ancestor of k.
            let mut cur = k;
            while let Some(p) = t.parent(cur) {
                if p == i {
                    energy += s.tx_power * y[k] / t.edge_rate(cur).unwrap();
                    break;
                }
                cur = p;
            }
        }
        out.push((time, energy));
    }
    out
}

pub fn raw_costs(t: &SinkTree, orders: &[Vec<usize>], y: &[f64], w: (f64, f64), b: f64) -> Vec<f64> {
    raw_time_energy(t, orders, y, b)
        .into_iter()
        .map(|(tm, e)| w.0 * tm + w.1 * e)
        .collect()
}

/// Coefficient matrix `A[i][k] = J_i(e_k)`.
pub fn raw_matrix(t: &SinkTree, orders: &[Vec<usize>], w: (f64, f64), b: f64) -> Vec<Vec<f64>> {
    let n = t.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut y = vec![0.0; n];
            y[k] = 1.0;
            raw_costs(t, orders, &y, w, b)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|k| cols[k][i]).collect()).collect()
}

pub fn all_orders(t: &SinkTree) -> Vec<Vec<Vec<usize>>> {
    fn perms(v: &[usize]) -> Vec<Vec<usize>> {
        if v.len() <= 1 {
            return vec![v.to_vec()];
        }
        let mut out = Vec::new();
        for k in 0..v.len() {
            let mut rest = v.to_vec();
            let x = rest.remove(k);
            for mut p in perms(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }
    let roots: Vec<usize> = t.children(0).to_vec();
    let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for r in roots {
        let mut members: Vec<usize> = (1..t.len()).filter(|&i| level1_ancestor(t, i) == Some(r)).collect();
        members.sort_unstable();
        let ps = perms(&members);
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                ps.iter().map(move |p| {
                    let mut q = prefix.clone();
                    q.push(p.clone());
                    q
                })
            })
            .collect();
    }
    acc
}

// ---------------------------------------------------------------- DES

#[derive(Debug, PartialEq)]
struct Event {
    time: f64,
    seq: u64,
    job: usize,
    hop: usize,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, o: &Self) -> Ordering {
        o.time.total_cmp(&self.time).then(o.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Store-and-forward arrival time of node `i`'s subtask.
///
/// Every subtask scheduled before `i` in its subtree occupies the links it
/// shares with `i`'s path, hop by hop and one subtask at a time, before
/// `i`'s own subtask leaves the master. A hop of `bits` over an edge of
/// rate `R` takes `bits / R`; the subtask is forwarded only after it has
/// been fully received.
pub fn des_arrival(t: &SinkTree, orders: &[Vec<usize>], y: &[f64], i: usize) -> f64 {
    if i == 0 {
        return 0.0;
    }
    let root = level1_ancestor(t, i).unwrap();
    let order = orders.iter().find(|o| o.contains(&root)).unwrap();
    let my_path = root_path_edges(t, i);

    // Jobs: (bits, edges to traverse).
    let mut jobs: Vec<(f64, Vec<usize>)> = Vec::new();
    for &j in order.iter().take_while(|&&j| j != i) {
        let pj = root_path_edges(t, j);
        let shared: Vec<usize> = my_path.iter().zip(&pj).take_while(|(a, b)| a == b).map(|(a, _)| *a).collect();
        jobs.push((y[j], shared));
    }
    jobs.push((y[i], my_path));

    let mut q = BinaryHeap::new();
    let mut seq = 0u64;
    let mut link_free_at: BTreeMap<usize, f64> = BTreeMap::new();
    let mut arrival = 0.0;
    // The master releases one job at a time; the next is released when the
    // previous one has finished its last hop.
    q.push(Event { time: 0.0, seq, job: 0, hop: 0 });
    seq += 1;
    while let Some(ev) = q.pop() {
        let (bits, edges) = &jobs[ev.job];
        if ev.hop == edges.len() {
            if ev.job == jobs.len() - 1 {
                arrival = ev.time;
                break;
            }
            q.push(Event { time: ev.time, seq, job: ev.job + 1, hop: 0 });
            seq += 1;
            continue;
        }
        let edge = edges[ev.hop];
        let start = ev.time.max(*link_free_at.get(&edge).unwrap_or(&0.0));
        let end = start + bits / t.edge_rate(edge).unwrap();
        link_free_at.insert(edge, end);
        q.push(Event { time: end, seq, job: ev.job, hop: ev.hop + 1 });
        seq += 1;
    }
    arrival
}

// ---------------------------------------------------------------- LP oracles

/// Exact min-max over the simplex of the columns not in `forced`, by
/// enumerating every vertex of the epigraph (support `S`, active rows `R`,
/// `|R| = |S|`).
pub fn vertex_oracle(a: &[Vec<f64>], forced: &BTreeSet<usize>) -> (f64, Vec<f64>) {
    let m = a.len();
    let n = a[0].len();
    let free: Vec<usize> = (0..n).filter(|k| !forced.contains(k)).collect();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let f = free.len();
    for smask in 1u32..(1 << f) {
        let s: Vec<usize> = (0..f).filter(|b| smask >> b & 1 == 1).map(|b| free[b]).collect();
        for rmask in 0u32..(1 << m) {
            if rmask.count_ones() as usize != s.len() {
                continue;
            }
            let r: Vec<usize> = (0..m).filter(|b| rmask >> b & 1 == 1).collect();
            // Unknowns: x_s..., z. Equations: Σx = 1; a_r·x − z = 0.
            let d = s.len() + 1;
            let mut mat = vec![vec![0.0; d]; d];
            let mut rhs = vec![0.0; d];
            for c in 0..s.len() {
                mat[0][c] = 1.0;
            }
            rhs[0] = 1.0;
            for (row, &ri) in r.iter().enumerate() {
                for (c, &k) in s.iter().enumerate() {
                    mat[row + 1][c] = a[ri][k];
                }
                mat[row + 1][s.len()] = -1.0;
            }
            let Some(sol) = solve_dense(mat, rhs) else { continue };
            if sol[..s.len()].iter().any(|&v| v < -1e-12) {
                continue;
            }
            let total: f64 = sol[..s.len()].iter().map(|v| v.max(0.0)).sum();
            if (total - 1.0).abs() > 1e-9 {
                continue;
            }
            let mut x = vec![0.0; n];
            for (c, &k) in s.iter().enumerate() {
                x[k] = sol[c].max(0.0) / total;
            }
            let z = (0..m)
                .map(|i| (0..n).map(|k| a[i][k] * x[k]).sum::<f64>())
                .fold(0.0f64, f64::max);
            if z < best.0 {
                best = (z, x);
            }
        }
    }
    best
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let col = (0..n).map(|r| m[r][c].abs()).fold(0.0f64, f64::max);
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() <= 1e-14 * col || m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / m[i][i]).collect())
}

fn worst_row(a: &[Vec<f64>], x: &[f64]) -> f64 {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(c, v)| c * v).sum::<f64>())
        .fold(0.0f64, f64::max)
}

pub struct GridResult {
    pub best: f64,
    pub points: usize,
}

/// Grid search over the simplex of the free columns, refined around the
/// incumbent until the step is `final_step`. `visit` sees the objective at
/// every evaluated point; each is feasible, so none is below the optimum.
pub fn grid_oracle(a: &[Vec<f64>], forced: &BTreeSet<usize>, final_step: f64, mut visit: impl FnMut(f64)) -> GridResult {
    let n = a[0].len();
    let free: Vec<usize> = (0..n).filter(|k| !forced.contains(k)).collect();
    let f = free.len();
    let mut points = 0usize;
    let embed = |u: &[f64]| {
        let mut x = vec![0.0; n];
        for (c, &k) in free.iter().enumerate() {
            x[k] = u[c];
        }
        x
    };

    // Coarse pass over all compositions of `parts` into f pieces.
    let parts = 20usize;
    let mut best = (f64::INFINITY, vec![0.0; f]);
    let mut comp = vec![0usize; f];
    fn compositions(k: usize, left: usize, comp: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
        if k + 1 == comp.len() {
            comp[k] = left;
            out(comp);
            return;
        }
        for v in 0..=left {
            comp[k] = v;
            compositions(k + 1, left - v, comp, out);
        }
    }
    compositions(0, parts, &mut comp, &mut |c: &[usize]| {
        let u: Vec<f64> = c.iter().map(|&v| v as f64 / parts as f64).collect();
        let z = worst_row(a, &embed(&u));
        points += 1;
        visit(z);
        if z < best.0 {
            best = (z, u);
        }
    });

    // Local refinement: offsets d with Σd = 0, |d_k| ≤ span.
    let span = 5i64;
    let mut step = 1.0 / parts as f64;
    while step > final_step * (1.0 + 1e-9) {
        step = (step / span as f64).max(final_step);
        let center = best.1.clone();
        let mut d = vec![0i64; f];
        fn offsets(k: usize, d: &mut Vec<i64>, span: i64, out: &mut dyn FnMut(&[i64])) {
            if k + 1 == d.len() {
                let s: i64 = d[..k].iter().sum();
                if -s >= -span && -s <= span {
                    d[k] = -s;
                    out(d);
                }
                return;
            }
            for v in -span..=span {
                d[k] = v;
                offsets(k + 1, d, span, out);
            }
        }
        if f == 1 {
            continue;
        }
        offsets(0, &mut d, span, &mut |d: &[i64]| {
            let u: Vec<f64> = center.iter().zip(d).map(|(c, &o)| c + o as f64 * step).collect();
            if u.iter().any(|&v| v < -1e-15) {
                return;
            }
            let u: Vec<f64> = u.into_iter().map(|v| v.max(0.0)).collect();
            let z = worst_row(a, &embed(&u));
            points += 1;
            visit(z);
            if z < best.0 {
                best = (z, u);
            }
        });
    }
    GridResult { best: best.0, points }
}

// ---------------------------------------------------------------- two-party

/// Exact `min_s max_k J_k(s)` over `s ∈ [0, Y]` when every `J_k` is affine in
/// `s`: the optimum is an endpoint or a crossing of two lines.
pub fn segment_oracle(total: f64, costs_at: impl Fn(f64) -> Vec<f64>) -> (f64, f64) {
    let lo = costs_at(0.0);
    let hi = costs_at(total);
    let mut cands = vec![0.0, total];
    for a in 0..lo.len() {
        for b in a + 1..lo.len() {
            let (sa, sb) = ((hi[a] - lo[a]) / total, (hi[b] - lo[b]) / total);
            if sa != sb {
                let s = (lo[b] - lo[a]) / (sa - sb);
                if s > 0.0 && s < total {
                    cands.push(s);
                }
            }
        }
    }
    cands
        .into_iter()
        .map(|s| (costs_at(s).into_iter().fold(f64::MIN, f64::max), s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
}
