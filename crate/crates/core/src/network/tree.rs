use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{NetworkGraph, ServerParams};
use crate::error::{Error, Result};

/// Relative tolerance under which two path costs count as a tie.
const PATH_TIE_RTOL: f64 = 1e-12;

/// Rooted tree of communication-optimal paths from the master.
///
/// Nodes carry tree ids assigned level by level, left to right, so the root
/// is 0 and every node at depth `l` has a smaller id than every node at depth
/// `l + 1`. `original(i)` maps a tree id back to the graph id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkTree {
    servers: Vec<ServerParams>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    edge_rate: Vec<f64>,
    depth: Vec<usize>,
    path_inv_rate: Vec<f64>,
    levels: Vec<Vec<usize>>,
    subtrees: Vec<Vec<usize>>,
    subtree_of: Vec<Option<usize>>,
    original: Vec<usize>,
    relay_only: BTreeSet<usize>,
}

/// How `prune_tree` treats removed interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    /// A removed node with surviving descendants stays as a relay with a
    /// forced-zero workload.
    KeepRelays,
    /// Removing a node removes its whole subtree.
    DropSubtrees,
}

/// Result of pruning: the new tree and, for each of its nodes, the id the
/// node had in the source tree.
#[derive(Debug, Clone)]
pub struct Pruned {
    pub tree: SinkTree,
    pub source_ids: Vec<usize>,
}

impl Pruned {
    /// Nodes of the pruned tree that may only relay.
    pub fn relay_only(&self) -> &BTreeSet<usize> {
        self.tree.relay_only()
    }
}

impl SinkTree {
    /// Lays out a tree from local indices where local 0 is the root and
    /// children are visited in ascending local index.
    fn assemble(
        parent_local: &[Option<usize>],
        rate_local: &[f64],
        servers_local: Vec<ServerParams>,
        original_local: &[usize],
        relay_local: &BTreeSet<usize>,
    ) -> (Self, Vec<usize>) {
        let m = parent_local.len();
        let mut kids_local = vec![Vec::new(); m];
        for (v, p) in parent_local.iter().enumerate() {
            if let Some(p) = p {
                kids_local[*p].push(v);
            }
        }
        // BFS from the root yields level-by-level, left-to-right ids.
        let mut order = Vec::with_capacity(m);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            queue.extend(kids_local[u].iter().copied());
        }
        debug_assert_eq!(order.len(), m);
        let mut new_id = vec![0usize; m];
        for (id, &local) in order.iter().enumerate() {
            new_id[local] = id;
        }

        let mut servers_local: Vec<Option<ServerParams>> = servers_local.into_iter().map(Some).collect();
        let mut servers = Vec::with_capacity(m);
        let mut parent = vec![None; m];
        let mut edge_rate = vec![0.0; m];
        let mut original = vec![0; m];
        let mut children = vec![Vec::new(); m];
        for (id, &local) in order.iter().enumerate() {
            servers.push(servers_local[local].take().expect("each node visited once"));
            parent[id] = parent_local[local].map(|p| new_id[p]);
            edge_rate[id] = rate_local[local];
            original[id] = original_local[local];
            children[id] = kids_local[local].iter().map(|&c| new_id[c]).collect();
        }

        let mut depth = vec![0usize; m];
        let mut path_inv_rate = vec![0.0; m];
        for id in 1..m {
            let p = parent[id].expect("non-root has parent");
            depth[id] = depth[p] + 1;
            path_inv_rate[id] = path_inv_rate[p] + 1.0 / edge_rate[id];
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        let mut levels = vec![Vec::new(); height + 1];
        for id in 0..m {
            levels[depth[id]].push(id);
        }

        let mut subtree_of = vec![None; m];
        let mut subtrees: Vec<Vec<usize>> = vec![Vec::new(); children[0].len()];
        for id in 1..m {
            let t = if depth[id] == 1 {
                children[0].iter().position(|&c| c == id).expect("level-1 node is a root child")
            } else {
                subtree_of[parent[id].unwrap()].expect("parent visited first")
            };
            subtree_of[id] = Some(t);
            subtrees[t].push(id);
        }

        let relay_only = relay_local.iter().map(|&l| new_id[l]).collect();

        let tree = Self {
            servers,
            parent,
            children,
            edge_rate,
            depth,
            path_inv_rate,
            levels,
            subtrees,
            subtree_of,
            original,
            relay_only,
        };
        (tree, order)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn server(&self, i: usize) -> &ServerParams {
        &self.servers[i]
    }

    pub fn servers(&self) -> &[ServerParams] {
        &self.servers
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Rate of the tree edge `(parent(i), i)`; `None` for the root.
    pub fn edge_rate(&self, i: usize) -> Option<f64> {
        self.parent[i].map(|_| self.edge_rate[i])
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    /// `I_l`: tree ids at depth `l`.
    pub fn level(&self, l: usize) -> &[usize] {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// Level-1 nodes, one per subtree, in subtree order.
    pub fn subtree_roots(&self) -> &[usize] {
        &self.children[0]
    }

    /// `A_t` for every subtree, ascending tree ids.
    pub fn subtrees(&self) -> &[Vec<usize>] {
        &self.subtrees
    }

    /// Index of the subtree holding `i`; `None` for the root.
    pub fn subtree_of(&self, i: usize) -> Option<usize> {
        self.subtree_of[i]
    }

    /// Graph id of tree node `i`.
    pub fn original(&self, i: usize) -> usize {
        self.original[i]
    }

    pub fn originals(&self) -> &[usize] {
        &self.original
    }

    /// Tree id of graph node `orig`, if present.
    pub fn tree_id(&self, orig: usize) -> Option<usize> {
        self.original.iter().position(|&o| o == orig)
    }

    /// Nodes whose workload is forced to zero.
    pub fn relay_only(&self) -> &BTreeSet<usize> {
        &self.relay_only
    }

    /// Sum of `1/R` over the edges from the root to `i`.
    pub fn path_inv_rate(&self, i: usize) -> f64 {
        self.path_inv_rate[i]
    }

    /// Tree ids on the path from the root to `i`, both included.
    pub fn path(&self, i: usize) -> Vec<usize> {
        let mut p = vec![i];
        let mut cur = i;
        while let Some(up) = self.parent[cur] {
            p.push(up);
            cur = up;
        }
        p.reverse();
        p
    }

    /// Deepest common node of the root paths of `i` and `j`.
    pub fn lca(&self, mut i: usize, mut j: usize) -> usize {
        while self.depth[i] > self.depth[j] {
            i = self.parent[i].unwrap();
        }
        while self.depth[j] > self.depth[i] {
            j = self.parent[j].unwrap();
        }
        while i != j {
            i = self.parent[i].unwrap();
            j = self.parent[j].unwrap();
        }
        i
    }

    pub fn is_ancestor(&self, anc: usize, mut node: usize) -> bool {
        loop {
            if node == anc {
                return true;
            }
            match self.parent[node] {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    /// Every node in the subtree rooted at `i`, `i` first, ascending.
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.children[out[k]].iter().copied());
            k += 1;
        }
        out.sort_unstable();
        out
    }

    /// Master plus the `t`-th subtree only.
    pub fn with_single_subtree(&self, t: usize) -> Pruned {
        let drop: BTreeSet<usize> = self
            .subtree_roots()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != t)
            .map(|(_, &r)| r)
            .collect();
        prune_tree(self, &drop, PruneMode::DropSubtrees).expect("root never removed")
    }

    /// Same tree with a different forced-zero set.
    pub fn with_relay_only(&self, relay_only: BTreeSet<usize>) -> Result<Self> {
        if relay_only.iter().any(|&i| i >= self.len()) {
            return Err(Error::Parameter("relay-only node outside the tree".into()));
        }
        let mut t = self.clone();
        t.relay_only = relay_only;
        Ok(t)
    }
}

#[derive(Clone, Copy)]
struct Label {
    cost: f64,
    hops: usize,
    pred: usize,
}

/// `true` if `a` beats `b`: lower cost, then fewer hops, then smaller
/// predecessor graph id.
fn label_better(a: &Label, b: &Label) -> bool {
    let tol = PATH_TIE_RTOL * a.cost.abs().max(b.cost.abs());
    if a.cost < b.cost - tol {
        return true;
    }
    if a.cost > b.cost + tol {
        return false;
    }
    (a.hops, a.pred) < (b.hops, b.pred)
}

/// Shortest-path tree from the master with edge weight `1/R`.
pub fn build_sink_tree(g: &NetworkGraph) -> Result<SinkTree> {
    let n = g.node_count();
    let mut label: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    label[0] = Some(Label {
        cost: 0.0,
        hops: 0,
        pred: usize::MAX,
    });

    loop {
        let mut next: Option<usize> = None;
        for v in 0..n {
            if done[v] {
                continue;
            }
            if let Some(lv) = &label[v] {
                match next {
                    None => next = Some(v),
                    Some(u) => {
                        if label_better(lv, label[u].as_ref().unwrap()) {
                            next = Some(v);
                        }
                    }
                }
            }
        }
        let Some(u) = next else { break };
        done[u] = true;
        let lu = label[u].unwrap();
        for (v, rate) in g.out_links(u) {
            if done[v] {
                continue;
            }
            let cand = Label {
                cost: lu.cost + 1.0 / rate,
                hops: lu.hops + 1,
                pred: u,
            };
            let replace = match &label[v] {
                None => true,
                Some(old) => label_better(&cand, old),
            };
            if replace {
                label[v] = Some(cand);
            }
        }
    }

    let unreachable: Vec<usize> = (0..n).filter(|&v| !done[v]).collect();
    if !unreachable.is_empty() {
        return Err(Error::Unreachable(unreachable));
    }

    let parent: Vec<Option<usize>> = (0..n)
        .map(|v| if v == 0 { None } else { Some(label[v].unwrap().pred) })
        .collect();
    let rate: Vec<f64> = (0..n)
        .map(|v| match parent[v] {
            None => 0.0,
            Some(p) => g.rate(p, v).expect("tree edge exists in graph"),
        })
        .collect();
    let original: Vec<usize> = (0..n).collect();
    let (tree, _) = SinkTree::assemble(
        &parent,
        &rate,
        g.servers().to_vec(),
        &original,
        &BTreeSet::new(),
    );
    Ok(tree)
}

/// Removes `remove` from the tree. With [`PruneMode::KeepRelays`], removed
/// nodes that still have surviving descendants stay as forced-zero relays;
/// previously relay-only nodes keep that mark. Ids are reassigned level by
/// level in the result.
pub fn prune_tree(t: &SinkTree, remove: &BTreeSet<usize>, mode: PruneMode) -> Result<Pruned> {
    if remove.contains(&0) {
        return Err(Error::Parameter("the root cannot be pruned".into()));
    }
    if let Some(&bad) = remove.iter().find(|&&i| i >= t.len()) {
        return Err(Error::Parameter(format!("node {bad} is not in the tree")));
    }
    let n = t.len();
    let mut keep = vec![true; n];
    let mut relay = t.relay_only.clone();
    match mode {
        PruneMode::DropSubtrees => {
            // Parents precede children in id order.
            for i in 1..n {
                let p = t.parent[i].unwrap();
                if remove.contains(&i) || !keep[p] {
                    keep[i] = false;
                }
            }
        }
        PruneMode::KeepRelays => {
            for i in (1..n).rev() {
                let has_kept_child = t.children[i].iter().any(|&c| keep[c]);
                if remove.contains(&i) {
                    keep[i] = has_kept_child;
                    if has_kept_child {
                        relay.insert(i);
                    }
                }
            }
        }
    }

    let source_ids: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let mut local_of = vec![usize::MAX; n];
    for (l, &i) in source_ids.iter().enumerate() {
        local_of[i] = l;
    }
    let parent_local: Vec<Option<usize>> = source_ids
        .iter()
        .map(|&i| t.parent[i].map(|p| local_of[p]))
        .collect();
    let rate_local: Vec<f64> = source_ids.iter().map(|&i| t.edge_rate[i]).collect();
    let servers_local: Vec<ServerParams> = source_ids.iter().map(|&i| t.servers[i].clone()).collect();
    let original_local: Vec<usize> = source_ids.iter().map(|&i| t.original[i]).collect();
    let relay_local: BTreeSet<usize> = relay
        .iter()
        .filter(|&&i| keep[i])
        .map(|&i| local_of[i])
        .collect();

    let (tree, order) = SinkTree::assemble(
        &parent_local,
        &rate_local,
        servers_local,
        &original_local,
        &relay_local,
    );
    let source_ids = order.iter().map(|&l| source_ids[l]).collect();
    Ok(Pruned { tree, source_ids })
}
