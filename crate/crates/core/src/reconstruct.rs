//! Hierarchy reconstruction from communication graphs and evaluation
//! against the true tree.
//!
//! Four methods:
//! * minimum / maximum spanning tree on the symmetrized weights,
//! * rank assignment minimizing total agony
//!   `sum over directed edges (u, v) of max(rank(v) - rank(u) + 1, 0)`
//!   (exactly, via the max-eulerian-subgraph dual),
//! * greedy likelihood placement under exponential distance decay.
//!
//! Ranks are level-like: smaller numbers sit higher in the hierarchy.
//! Estimates are compared to the truth with the Frobenius edge
//! distance, a betweenness-centrality distance, manager-classification
//! agreement, and (for tree-shaped estimates) cumulative level
//! mean-squared error.

use std::collections::BTreeMap;

use crate::error::ReconstructError;
use crate::measures::Csr;
use crate::org::{CommGraph, Dataset, EmployeeId, OrgTree};
use crate::par;

/// Reconstruction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    MinSt,
    MaxSt,
    Agony,
    Distance,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MinSt => "minst",
            Method::MaxSt => "maxst",
            Method::Agony => "agony",
            Method::Distance => "distance",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.to_ascii_lowercase().as_str() {
            "minst" | "min-st" | "min_st" => Some(Method::MinSt),
            "maxst" | "max-st" | "max_st" => Some(Method::MaxSt),
            "agony" => Some(Method::Agony),
            "distance" => Some(Method::Distance),
            _ => None,
        }
    }

    pub fn all() -> Vec<Method> {
        vec![Method::MinSt, Method::MaxSt, Method::Agony, Method::Distance]
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of a reconstruction output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// Unoriented spanning tree; `edges` hold unordered pairs `(a, b)`.
    Tree,
    /// Integer ranks plus the converted reports-to graph used for
    /// evaluation.
    Ranking,
    /// Directed placement graph; `edges` hold reports-to pairs
    /// `(child, parent)`. Children of the unobserved virtual root carry
    /// no edge.
    Graph,
}

/// A reconstructed hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyEstimate {
    pub method: Method,
    pub kind: EstimateKind,
    /// Full node universe of the estimate, ascending.
    pub nodes: Vec<EmployeeId>,
    pub edges: Vec<(EmployeeId, EmployeeId)>,
    /// Ranking kind: node ranks, smaller = higher in the hierarchy.
    pub ranks: Option<BTreeMap<EmployeeId, i64>>,
    /// Ranking kind: the achieved total agony.
    pub objective: Option<u64>,
}

/// Spanning-tree objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Min,
    Max,
}

/// Minimum or maximum spanning tree over the symmetrized weights
/// `A + A^T`, with deterministic lexicographic tie-breaking.
pub fn spanning_tree(
    comm: &CommGraph,
    objective: Objective,
) -> Result<HierarchyEstimate, ReconstructError> {
    let n = comm.len();
    let mut pair_w: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (u, v, w) in comm.edges_ix() {
        *pair_w.entry((u.min(v), u.max(v))).or_insert(0) += w;
    }
    let mut edges: Vec<(u64, u32, u32)> = pair_w.into_iter().map(|((u, v), w)| (w, u, v)).collect();
    match objective {
        Objective::Min => edges.sort_unstable_by_key(|&(w, u, v)| (w, u, v)),
        Objective::Max => edges.sort_unstable_by_key(|&(w, u, v)| (std::cmp::Reverse(w), u, v)),
    }

    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    for (_, u, v) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru as usize] = rv;
            chosen.push((comm.id(u).clone(), comm.id(v).clone()));
        }
    }
    if chosen.len() + 1 != n {
        return Err(ReconstructError::Disconnected(n - chosen.len()));
    }
    Ok(HierarchyEstimate {
        method: match objective {
            Objective::Min => Method::MinSt,
            Objective::Max => Method::MaxSt,
        },
        kind: EstimateKind::Tree,
        nodes: comm.ids().to_vec(),
        edges: chosen,
        ranks: None,
        objective: None,
    })
}

/// Unit-capacity arc network for the successive-shortest-path flow.
struct FlowNet {
    head: Vec<i32>,
    next: Vec<i32>,
    to: Vec<u32>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl FlowNet {
    fn new(n: usize) -> FlowNet {
        FlowNet {
            head: vec![-1; n],
            next: Vec::new(),
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64) {
        for (src, dst, c, w) in [(from, to, cap, cost), (to, from, 0, -cost)] {
            let arc = self.to.len();
            self.to.push(dst as u32);
            self.cap.push(c);
            self.cost.push(w);
            self.next.push(self.head[src]);
            self.head[src] = arc as i32;
        }
    }
}

/// Marks the edges of a maximum eulerian subgraph: a unit-cost flow
/// removes the fewest edges needed to balance every node's in/out
/// degree; the survivors are the certificate. Successive shortest paths
/// with Johnson potentials keep reduced costs non-negative.
fn max_eulerian_subgraph(n: usize, edges: &[(u32, u32)]) -> Vec<bool> {
    let m = edges.len();
    let nn = n + 2;
    let (s, t) = (n, n + 1);
    let mut net = FlowNet::new(nn);
    for &(u, v) in edges {
        net.add(u as usize, v as usize, 1, 1);
    }
    let mut excess = vec![0i64; n]; // out minus in
    for &(u, v) in edges {
        excess[u as usize] += 1;
        excess[v as usize] -= 1;
    }
    let mut remaining = 0i64;
    for (w, &e) in excess.iter().enumerate() {
        if e > 0 {
            net.add(s, w, e, 0);
            remaining += e;
        } else if e < 0 {
            net.add(w, t, -e, 0);
        }
    }

    let mut potential = vec![0i64; nn];
    while remaining > 0 {
        let mut dist = vec![i64::MAX; nn];
        let mut prev_arc = vec![-1i32; nn];
        dist[s] = 0;
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(std::cmp::Reverse((0i64, s as u32)));
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            let ui = u as usize;
            if d > dist[ui] {
                continue;
            }
            let mut a = net.head[ui];
            while a >= 0 {
                let ai = a as usize;
                if net.cap[ai] > 0 {
                    let vi = net.to[ai] as usize;
                    let nd = d + net.cost[ai] + potential[ui] - potential[vi];
                    if nd < dist[vi] {
                        dist[vi] = nd;
                        prev_arc[vi] = a;
                        heap.push(std::cmp::Reverse((nd, net.to[ai])));
                    }
                }
                a = net.next[ai];
            }
        }
        assert!(
            dist[t] < i64::MAX,
            "imbalances are always routable through the saturated edges"
        );
        for w in 0..nn {
            if dist[w] < i64::MAX {
                potential[w] += dist[w];
            }
        }
        let mut bottleneck = i64::MAX;
        let mut w = t;
        while w != s {
            let a = prev_arc[w] as usize;
            bottleneck = bottleneck.min(net.cap[a]);
            w = net.to[a ^ 1] as usize;
        }
        let mut w = t;
        while w != s {
            let a = prev_arc[w] as usize;
            net.cap[a] -= bottleneck;
            net.cap[a ^ 1] += bottleneck;
            w = net.to[a ^ 1] as usize;
        }
        remaining -= bottleneck;
    }

    // Edge arcs were added first, as pairs (2i, 2i+1); an edge left with
    // forward capacity carries no removal flow and stays eulerian.
    (0..m).map(|i| net.cap[2 * i] > 0).collect()
}

/// Feasible ranks for an optimal eulerian certificate via difference
/// constraints: non-certificate edges demand a strict step up the
/// hierarchy (smaller rank), certificate edges allow at most one step
/// down.
fn ranks_from_certificate(n: usize, edges: &[(u32, u32)], in_eulerian: &[bool]) -> Vec<i64> {
    // Arcs (from, to, w) meaning rank[to] <= rank[from] + w.
    let mut arcs: Vec<(u32, u32, i64)> = Vec::with_capacity(edges.len());
    for (i, &(u, v)) in edges.iter().enumerate() {
        if in_eulerian[i] {
            arcs.push((v, u, 1));
        } else {
            arcs.push((u, v, -1));
        }
    }
    // Bellman-Ford from an implicit zero source attached to every node.
    let mut rank = vec![0i64; n];
    for round in 0..=n {
        let mut changed = false;
        for &(from, to, w) in &arcs {
            let cand = rank[from as usize] + w;
            if cand < rank[to as usize] {
                rank[to as usize] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        assert!(round < n, "certificate admits no negative cycle");
    }
    rank
}

/// Exact minimum-agony ranking of the binary directed graph (weights
/// are ignored). Duality drives the computation: the minimum total
/// agony equals the maximum edge count over eulerian subgraphs.
pub fn agony_ranking(comm: &CommGraph) -> HierarchyEstimate {
    let n = comm.len();
    let mut edges: Vec<(u32, u32)> = comm.edges_ix().map(|(u, v, _)| (u, v)).collect();
    edges.sort_unstable();
    edges.dedup();

    let in_eulerian = max_eulerian_subgraph(n, &edges);
    let ranks_raw = ranks_from_certificate(n, &edges, &in_eulerian);

    let objective: u64 = edges
        .iter()
        .map(|&(u, v)| (ranks_raw[v as usize] - ranks_raw[u as usize] + 1).max(0) as u64)
        .sum();
    debug_assert_eq!(
        objective,
        in_eulerian.iter().filter(|&&b| b).count() as u64,
        "achieved agony must match the eulerian certificate"
    );

    let min = ranks_raw.iter().copied().min().unwrap_or(0);
    let ranks: BTreeMap<EmployeeId, i64> = (0..n)
        .map(|u| (comm.id(u as u32).clone(), ranks_raw[u] - min))
        .collect();

    // Conversion for evaluation: each communicating pair becomes a
    // reports-to edge from its larger-rank endpoint (lower in the
    // hierarchy) to its smaller-rank one; equal ranks convert to
    // nothing.
    let mut converted: Vec<(EmployeeId, EmployeeId)> = Vec::new();
    let mut seen: std::collections::HashSet<(u32, u32)> = Default::default();
    for &(u, v) in &edges {
        if !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        match ranks_raw[u as usize].cmp(&ranks_raw[v as usize]) {
            std::cmp::Ordering::Greater => converted.push((comm.id(u).clone(), comm.id(v).clone())),
            std::cmp::Ordering::Less => converted.push((comm.id(v).clone(), comm.id(u).clone())),
            std::cmp::Ordering::Equal => {}
        }
    }
    converted.sort();
    converted.dedup();

    HierarchyEstimate {
        method: Method::Agony,
        kind: EstimateKind::Ranking,
        nodes: comm.ids().to_vec(),
        edges: converted,
        ranks: Some(ranks),
        objective: Some(objective),
    }
}

/// Total agony of an arbitrary rank assignment on the binary edges.
pub fn total_agony(comm: &CommGraph, ranks: &BTreeMap<EmployeeId, i64>) -> u64 {
    let mut edges: Vec<(u32, u32)> = comm.edges_ix().map(|(u, v, _)| (u, v)).collect();
    edges.sort_unstable();
    edges.dedup();
    edges
        .iter()
        .map(|&(u, v)| {
            let ru = ranks[comm.id(u)];
            let rv = ranks[comm.id(v)];
            (rv - ru + 1).max(0) as u64
        })
        .sum()
}

/// Greedy maximum-likelihood placement under exponential decay
/// `p(edge at tree distance d) = min(exp(-decay * d), 1 - 1e-9)`.
///
/// Seeds with the highest-degree node, then repeatedly takes the
/// unplaced node with the most links to placed nodes and attaches it
/// below whichever placed node (or the unobserved virtual root)
/// maximizes the Bernoulli likelihood against all placed nodes.
/// Distances across different virtual-root branches are infinite, so
/// the virtual root wins exactly when the candidate has no links into
/// the placed set. Ties break lexicographically.
pub fn distance_hierarchy(comm: &CommGraph, decay: f64) -> HierarchyEstimate {
    assert!(decay > 0.0, "decay must be positive");
    let n = comm.len();
    let mut estimate = HierarchyEstimate {
        method: Method::Distance,
        kind: EstimateKind::Graph,
        nodes: comm.ids().to_vec(),
        edges: Vec::new(),
        ranks: None,
        objective: None,
    };
    if n == 0 {
        return estimate;
    }

    // Binary undirected adjacency.
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (u, v, _) in comm.edges_ix() {
        neighbors[u as usize].push(v);
        neighbors[v as usize].push(u);
    }
    for list in neighbors.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }

    const INF: u16 = u16::MAX;
    let cap = 1.0 - 1e-9;
    let mut ln_edge = vec![0.0_f64; n + 2];
    let mut ln_gap = vec![0.0_f64; n + 2];
    for d in 0..ln_edge.len() {
        let p = (-decay * d as f64).exp().min(cap);
        ln_edge[d] = p.ln();
        ln_gap[d] = (1.0 - p).ln();
    }

    let seed = (0..n as u32)
        .max_by_key(|&u| (neighbors[u as usize].len(), std::cmp::Reverse(u)))
        .unwrap();

    let mut dist = vec![INF; n * n];
    let mut placed: Vec<u32> = Vec::with_capacity(n); // kept sorted by id
    let mut is_placed = vec![false; n];
    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut links_to_placed = vec![0u32; n];

    // Placement bookkeeping: set distances of `node` through `par`,
    // insert into the sorted placed list, bump neighbor link counts.
    macro_rules! place {
        ($node:expr, $par:expr) => {{
            let node: u32 = $node;
            let par: Option<u32> = $par;
            let ni = node as usize;
            if let Some(p) = par {
                for &w in placed.iter() {
                    let dw = if w == p { 0 } else { dist[p as usize * n + w as usize] };
                    let nd = if dw == INF { INF } else { dw + 1 };
                    dist[ni * n + w as usize] = nd;
                    dist[w as usize * n + ni] = nd;
                }
            }
            let pos = placed.partition_point(|&x| x < node);
            placed.insert(pos, node);
            is_placed[ni] = true;
            for &nb in &neighbors[ni] {
                if !is_placed[nb as usize] {
                    links_to_placed[nb as usize] += 1;
                }
            }
        }};
    }

    place!(seed, None);

    while placed.len() < n {
        let next = (0..n as u32)
            .filter(|&u| !is_placed[u as usize])
            .max_by_key(|&u| (links_to_placed[u as usize], std::cmp::Reverse(u)))
            .unwrap();
        let ni = next as usize;
        let mut has_edge = vec![false; n];
        for &nb in &neighbors[ni] {
            has_edge[nb as usize] = true;
        }

        // Candidates in id order, the virtual root last; strict
        // improvement keeps the earliest winner.
        let mut best_score = f64::NEG_INFINITY;
        let mut best_parent: Option<u32> = None;
        let mut any = false;
        for &p in placed.iter() {
            let pi = p as usize;
            let mut score = 0.0;
            for &w in placed.iter() {
                let dw = if w == p { 0 } else { dist[pi * n + w as usize] };
                score += if dw == INF {
                    if has_edge[w as usize] {
                        f64::NEG_INFINITY
                    } else {
                        0.0
                    }
                } else {
                    let d = dw as usize + 1;
                    if has_edge[w as usize] {
                        ln_edge[d]
                    } else {
                        ln_gap[d]
                    }
                };
            }
            if !any || score > best_score {
                any = true;
                best_score = score;
                best_parent = Some(p);
            }
        }
        let virtual_score: f64 = placed
            .iter()
            .map(|&w| {
                if has_edge[w as usize] {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            })
            .sum();
        if virtual_score > best_score {
            best_parent = None;
        }

        parent[ni] = best_parent;
        place!(next, best_parent);
    }

    for u in 0..n as u32 {
        if let Some(p) = parent[u as usize] {
            estimate.edges.push((comm.id(u).clone(), comm.id(p).clone()));
        }
    }
    estimate
}

/// Directs a tree-kind estimate away from `root` and returns it as an
/// [`OrgTree`] whose levels are the predicted hop distances from the
/// root.
pub fn orient_from_root(
    estimate: &HierarchyEstimate,
    root: &str,
) -> Result<OrgTree, ReconstructError> {
    if !estimate.nodes.iter().any(|id| id.as_str() == root) {
        return Err(ReconstructError::RootAbsent(root.to_owned()));
    }
    let n = estimate.nodes.len();
    if estimate.edges.len() + 1 != n {
        return Err(ReconstructError::NotATree(format!(
            "{} edges over {} nodes",
            estimate.edges.len(),
            n
        )));
    }
    if n == 1 {
        return Ok(OrgTree::singleton(estimate.nodes[0].clone()));
    }
    let index: std::collections::HashMap<&str, u32> = estimate
        .nodes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (a, b) in &estimate.edges {
        let ai = *index
            .get(a.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(a.as_str().to_owned()))?;
        let bi = *index
            .get(b.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(b.as_str().to_owned()))?;
        adj[ai as usize].push(bi);
        adj[bi as usize].push(ai);
    }
    let root_ix = index[root];
    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[root_ix as usize] = true;
    let mut queue = std::collections::VecDeque::from([root_ix]);
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                parent[v as usize] = Some(u);
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    if reached != n {
        return Err(ReconstructError::NotATree("estimate is disconnected".into()));
    }
    let edges: Vec<(EmployeeId, EmployeeId)> = (0..n)
        .filter_map(|u| {
            parent[u].map(|p| (estimate.nodes[u].clone(), estimate.nodes[p as usize].clone()))
        })
        .collect();
    OrgTree::from_edges_rooted(&edges, root).map_err(|e| ReconstructError::NotATree(e.to_string()))
}

fn check_same_nodes(truth: &OrgTree, nodes: &[EmployeeId]) -> Result<(), ReconstructError> {
    if truth.ids() != nodes {
        let missing = truth
            .ids()
            .iter()
            .find(|id| !nodes.contains(id))
            .or_else(|| nodes.iter().find(|id| !truth.contains(id.as_str())))
            .map(|id| id.as_str().to_owned())
            .unwrap_or_default();
        return Err(ReconstructError::NodeSetMismatch(missing));
    }
    Ok(())
}

/// Frobenius distance between directed reports-to adjacencies:
/// `sqrt(sum_uv (T_uv - E_uv)^2) / (n - 1)`.
pub fn edge_set_frobenius(
    truth: &OrgTree,
    est_edges: &[(EmployeeId, EmployeeId)],
) -> Result<f64, ReconstructError> {
    let n = truth.len();
    let truth_edges: std::collections::HashSet<(u32, u32)> = (0..n as u32)
        .filter_map(|u| truth.parent_ix(u).map(|p| (u, p)))
        .collect();
    let mut est: std::collections::HashSet<(u32, u32)> = Default::default();
    for (c, p) in est_edges {
        let ci = truth
            .index_of(c.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(c.as_str().to_owned()))?;
        let pi = truth
            .index_of(p.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(p.as_str().to_owned()))?;
        est.insert((ci, pi));
    }
    if n <= 1 {
        return Ok(0.0);
    }
    let mismatches = truth_edges.symmetric_difference(&est).count();
    Ok((mismatches as f64).sqrt() / (n - 1) as f64)
}

/// Frobenius distance between two directed trees over one node set.
pub fn tree_frobenius(truth: &OrgTree, estimate: &OrgTree) -> Result<f64, ReconstructError> {
    check_same_nodes(truth, estimate.ids())?;
    let est_edges: Vec<(EmployeeId, EmployeeId)> = estimate
        .edges()
        .map(|(c, p)| (c.clone(), p.clone()))
        .collect();
    edge_set_frobenius(truth, &est_edges)
}

/// Unnormalized betweenness on the undirected unweighted view of an
/// edge list.
fn undirected_betweenness(n: usize, edges: &[(u32, u32)]) -> Vec<f64> {
    let mut both: Vec<(u32, u32, u64)> = Vec::with_capacity(edges.len() * 2);
    for &(a, b) in edges {
        both.push((a, b, 1));
        both.push((b, a, 1));
    }
    both.sort_unstable();
    both.dedup();
    // The directed accumulation visits each unordered pair twice.
    crate::measures::betweenness_of(&Csr::from_edges(n, both))
        .into_iter()
        .map(|b| b / 2.0)
        .collect()
}

/// Centrality distance `sqrt(sum_u (c_u - chat_u)^2) / (n - 1)` with
/// betweenness computed on the undirected view of each structure.
pub fn centrality_distance(
    truth: &OrgTree,
    est_nodes: &[EmployeeId],
    est_edges: &[(EmployeeId, EmployeeId)],
) -> Result<f64, ReconstructError> {
    check_same_nodes(truth, est_nodes)?;
    let n = truth.len();
    if n <= 1 {
        return Ok(0.0);
    }
    let truth_edges: Vec<(u32, u32)> = (0..n as u32)
        .filter_map(|u| truth.parent_ix(u).map(|p| (u, p)))
        .collect();
    let mut est: Vec<(u32, u32)> = Vec::with_capacity(est_edges.len());
    for (a, b) in est_edges {
        let ai = truth
            .index_of(a.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(a.as_str().to_owned()))?;
        let bi = truth
            .index_of(b.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(b.as_str().to_owned()))?;
        est.push((ai, bi));
    }
    let c_true = undirected_betweenness(n, &truth_edges);
    let c_est = undirected_betweenness(n, &est);
    let sum: f64 = c_true
        .iter()
        .zip(&c_est)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum.sqrt() / (n - 1) as f64)
}

/// Centrality distance between two directed trees over one node set.
pub fn tree_centrality_distance(
    truth: &OrgTree,
    estimate: &OrgTree,
) -> Result<f64, ReconstructError> {
    let est_edges: Vec<(EmployeeId, EmployeeId)> = estimate
        .edges()
        .map(|(c, p)| (c.clone(), p.clone()))
        .collect();
    centrality_distance(truth, estimate.ids(), &est_edges)
}

/// Manager status per truth node implied by an estimate: a node manages
/// when someone reports to it. Tree-kind estimates are oriented at the
/// truth root first.
fn estimate_managers(
    truth: &OrgTree,
    estimate: &HierarchyEstimate,
) -> Result<Vec<bool>, ReconstructError> {
    let reports_to: Vec<(EmployeeId, EmployeeId)> = match estimate.kind {
        EstimateKind::Tree => {
            let oriented = orient_from_root(estimate, truth.root_id().as_str())?;
            oriented.edges().map(|(c, p)| (c.clone(), p.clone())).collect()
        }
        EstimateKind::Ranking | EstimateKind::Graph => estimate.edges.clone(),
    };
    let mut managers = vec![false; truth.len()];
    for (_, p) in &reports_to {
        let pi = truth
            .index_of(p.as_str())
            .ok_or_else(|| ReconstructError::NodeSetMismatch(p.as_str().to_owned()))?;
        managers[pi as usize] = true;
    }
    Ok(managers)
}

/// Fraction of nodes whose manager-or-leaf status matches the truth.
pub fn manager_classification(
    truth: &OrgTree,
    estimate: &HierarchyEstimate,
) -> Result<f64, ReconstructError> {
    check_same_nodes(truth, &estimate.nodes)?;
    let est = estimate_managers(truth, estimate)?;
    let agree = (0..truth.len() as u32)
        .filter(|&u| !truth.children_ix(u).is_empty() == est[u as usize])
        .count();
    Ok(agree as f64 / truth.len() as f64)
}

/// Cumulative level mean-squared error: for each level `k`, the mean of
/// `(z(u) - zhat(u))^2` over nodes with true level at most `k`.
pub fn level_mse(
    truth: &OrgTree,
    oriented: &OrgTree,
) -> Result<BTreeMap<u32, f64>, ReconstructError> {
    check_same_nodes(truth, oriented.ids())?;
    let mut sums: BTreeMap<u32, (f64, u64)> = BTreeMap::new();
    for u in 0..truth.len() as u32 {
        let z = truth.level_ix(u);
        let zhat = oriented
            .level(truth.id(u).as_str())
            .map_err(|_| ReconstructError::NodeSetMismatch(truth.id(u).as_str().to_owned()))?;
        let err = (z as f64 - zhat as f64).powi(2);
        let entry = sums.entry(z).or_insert((0.0, 0));
        entry.0 += err;
        entry.1 += 1;
    }
    let mut out = BTreeMap::new();
    let mut acc = 0.0;
    let mut count = 0u64;
    for (k, (err, c)) in sums {
        acc += err;
        count += c;
        out.insert(k, acc / count as f64);
    }
    Ok(out)
}

/// One team-method evaluation row.
#[derive(Debug, Clone)]
pub struct TeamEvaluation {
    pub team: EmployeeId,
    pub method: Method,
    pub frobenius: f64,
    pub centrality: f64,
    pub classification: f64,
    /// Relative to the across-team MinST median (when MinST ran).
    pub frobenius_rel: Option<f64>,
    pub centrality_rel: Option<f64>,
    pub classification_rel: Option<f64>,
    /// Cumulative level MSE for tree-shaped estimates, empty otherwise.
    pub level_mse: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, Default)]
pub struct EvaluationReport {
    pub rows: Vec<TeamEvaluation>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub methods: Vec<Method>,
    pub size_cap: usize,
    pub decay: f64,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            methods: Method::all(),
            size_cap: 3000,
            decay: 1.0,
        }
    }
}

/// Induced team communication graph as a standalone [`CommGraph`].
pub fn team_comm_graph(dataset: &Dataset, team: &crate::org::Team) -> CommGraph {
    let nodes: Vec<EmployeeId> = team
        .members
        .iter()
        .map(|&m| dataset.comm.id(m).clone())
        .collect();
    let mut local = vec![u32::MAX; dataset.comm.len()];
    for (i, &m) in team.members.iter().enumerate() {
        local[m as usize] = i as u32;
    }
    let mut edges = Vec::new();
    for (i, &m) in team.members.iter().enumerate() {
        for (v, w) in dataset.comm.out_edges(m) {
            if local[v as usize] != u32::MAX {
                edges.push((i as u32, local[v as usize], w));
            }
        }
    }
    let lookup = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    CommGraph::from_indexed(nodes, lookup, edges)
}

/// Runs every requested method on every team at or below the size cap
/// and evaluates the estimates against the true team subtrees.
/// Frobenius, centrality, and classification are also reported relative
/// to the across-team median of MinST.
pub fn evaluate_all(
    dataset: &Dataset,
    opts: &EvaluateOptions,
) -> Result<EvaluationReport, ReconstructError> {
    let mut report = EvaluationReport::default();
    let mut eligible = Vec::new();
    for team in dataset.teams.teams() {
        if team.size() > opts.size_cap {
            report.warnings.push(format!(
                "team {} skipped: {} members over the cap of {}",
                team.id,
                team.size(),
                opts.size_cap
            ));
        } else {
            eligible.push(team);
        }
    }
    if eligible.is_empty() {
        report.warnings.push("no team under the size cap".into());
        return Ok(report);
    }

    let per_team = par::map_slice(
        &eligible,
        |team| -> Result<Vec<TeamEvaluation>, ReconstructError> {
            let truth = dataset
                .tree
                .subtree(team.id.as_str())
                .expect("team roots are tree nodes");
            let comm = team_comm_graph(dataset, team);
            let mut rows = Vec::new();
            for &method in &opts.methods {
                let estimate = match method {
                    Method::MinSt => spanning_tree(&comm, Objective::Min)?,
                    Method::MaxSt => spanning_tree(&comm, Objective::Max)?,
                    Method::Agony => agony_ranking(&comm),
                    Method::Distance => distance_hierarchy(&comm, opts.decay),
                };
                let (reports_to, mse) = match estimate.kind {
                    EstimateKind::Tree => {
                        let oriented = orient_from_root(&estimate, truth.root_id().as_str())?;
                        let edges: Vec<(EmployeeId, EmployeeId)> = oriented
                            .edges()
                            .map(|(c, p)| (c.clone(), p.clone()))
                            .collect();
                        (edges, level_mse(&truth, &oriented)?)
                    }
                    _ => (estimate.edges.clone(), BTreeMap::new()),
                };
                rows.push(TeamEvaluation {
                    team: team.id.clone(),
                    method,
                    frobenius: edge_set_frobenius(&truth, &reports_to)?,
                    centrality: centrality_distance(&truth, &estimate.nodes, &reports_to)?,
                    classification: manager_classification(&truth, &estimate)?,
                    frobenius_rel: None,
                    centrality_rel: None,
                    classification_rel: None,
                    level_mse: mse,
                });
            }
            Ok(rows)
        },
    );
    for team_rows in per_team {
        report.rows.extend(team_rows?);
    }

    let minst: Vec<(f64, f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.method == Method::MinSt)
        .map(|r| (r.frobenius, r.centrality, r.classification))
        .collect();
    if !minst.is_empty() {
        let median = |mut vals: Vec<f64>| -> f64 {
            vals.sort_by(f64::total_cmp);
            let mid = vals.len() / 2;
            if vals.len() % 2 == 1 {
                vals[mid]
            } else {
                0.5 * (vals[mid - 1] + vals[mid])
            }
        };
        let mf = median(minst.iter().map(|r| r.0).collect());
        let mc = median(minst.iter().map(|r| r.1).collect());
        let mk = median(minst.iter().map(|r| r.2).collect());
        for row in report.rows.iter_mut() {
            row.frobenius_rel = Some(row.frobenius - mf);
            row.centrality_rel = Some(row.centrality - mc);
            row.classification_rel = Some(row.classification - mk);
        }
    }
    Ok(report)
}
