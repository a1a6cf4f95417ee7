//! Synthetic organizations with distance-decay communication traffic.
//!
//! Trees are random recursive trees whose attachment rule is calibrated
//! to a target mean branching factor. Message counts between pairs are
//! Poisson with mean `lambda(d) = alpha * f(beta * |d|)` where `d` is a
//! reporting distance in the tree, so generated datasets carry a known
//! ground-truth hierarchy for the reconstruction benchmarks.
//!
//! All generators are deterministic in their seed for any thread count:
//! random streams are derived per source node and merged in node order.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::DistanceKind;
use crate::org::{CommGraph, Dataset, EmployeeId, NodeIx, OrgTree, Provenance, TeamPartition};
use crate::par;

/// Functional form of the decay in the pair-rate model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayForm {
    /// `alpha * exp(-beta * |d|)`
    Exponential,
    /// `alpha / (1 + beta * |d|)^2`
    Power,
}

/// Distance-decay model for expected pair message counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CommModel {
    pub distance_kind: DistanceKind,
    pub alpha: f64,
    pub beta: f64,
    pub form: DecayForm,
    /// Optional separate decay for negative (downward) distances, for
    /// asymmetric traffic under the signed kinds.
    pub beta_down: Option<f64>,
}

impl CommModel {
    pub fn exponential(distance_kind: DistanceKind, alpha: f64, beta: f64) -> CommModel {
        CommModel {
            distance_kind,
            alpha,
            beta,
            form: DecayForm::Exponential,
            beta_down: None,
        }
    }

    /// Expected message count at signed distance `d`.
    pub fn rate(&self, d: i64) -> f64 {
        let beta = if d < 0 {
            self.beta_down.unwrap_or(self.beta)
        } else {
            self.beta
        };
        let x = beta * d.unsigned_abs() as f64;
        match self.form {
            DecayForm::Exponential => self.alpha * (-x).exp(),
            DecayForm::Power => self.alpha / ((1.0 + x) * (1.0 + x)),
        }
    }
}

/// Poisson sample by Knuth inversion; splits large rates so the running
/// product never underflows.
pub(crate) fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda > 500.0 {
        return poisson(rng, lambda / 2.0) + poisson(rng, lambda / 2.0);
    }
    let threshold = (-lambda).exp();
    let mut k = 0u64;
    let mut p = 1.0_f64;
    loop {
        p *= rng.gen::<f64>();
        if p < threshold {
            return k;
        }
        k += 1;
    }
}

/// Parent index per node (node 0 is the root) for a random recursive
/// tree. Each new node attaches to a uniformly random leaf with
/// probability `1 / mean_branching`, otherwise to a uniformly random
/// internal node; children thus concentrate on roughly `n / b`
/// internals, making their mean child count approach the target.
fn random_parent_vec(n: usize, mean_branching: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let p_leaf = if mean_branching <= 1.0 {
        1.0
    } else {
        1.0 / mean_branching
    };
    let mut parent = Vec::with_capacity(n);
    parent.push(0);
    let mut leaves: Vec<usize> = vec![0];
    let mut leaf_pos: Vec<usize> = vec![0];
    let mut internals: Vec<usize> = Vec::new();
    for node in 1..n {
        let use_leaf = internals.is_empty() || rng.gen::<f64>() < p_leaf;
        let chosen = if use_leaf {
            let pos = rng.gen_range(0..leaves.len());
            let chosen = leaves[pos];
            let last = *leaves.last().unwrap();
            leaves[pos] = last;
            leaf_pos[last] = pos;
            leaves.pop();
            leaf_pos[chosen] = usize::MAX;
            internals.push(chosen);
            chosen
        } else {
            internals[rng.gen_range(0..internals.len())]
        };
        parent.push(chosen);
        leaf_pos.push(leaves.len());
        leaves.push(node);
    }
    parent
}

/// Random recursive tree with ids `n0000...`, calibrated so internal
/// nodes average about `mean_branching` children. Deterministic in the
/// seed.
pub fn random_org_tree(n: usize, mean_branching: f64, seed: u64) -> OrgTree {
    assert!(n >= 1);
    let width = (n.max(2) - 1).to_string().len();
    let id = |i: usize| EmployeeId::from(format!("n{i:0width$}"));
    if n == 1 {
        return OrgTree::singleton(id(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parent = random_parent_vec(n, mean_branching, &mut rng);
    let edges: Vec<(EmployeeId, EmployeeId)> = (1..n).map(|i| (id(i), id(parent[i]))).collect();
    OrgTree::from_edges(&edges).expect("generated edges form a tree")
}

/// Per-source traffic sampler over an explicit member set of the tree.
/// Stream ids are the members' global node indices and results are
/// concatenated in member order, so output is independent of the
/// parallel schedule.
fn sample_member_traffic(
    tree: &OrgTree,
    members: &[NodeIx],
    model: &CommModel,
    seed: u64,
) -> Vec<(u32, u32, u64)> {
    let k = members.len();
    if k < 2 || model.alpha <= 0.0 {
        return Vec::new();
    }
    let mut local = vec![u32::MAX; tree.len()];
    for (i, &m) in members.iter().enumerate() {
        local[m as usize] = i as u32;
    }
    // Local undirected adjacency along tree edges inside the member set.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (i, &m) in members.iter().enumerate() {
        if let Some(p) = tree.parent_ix(m) {
            let lp = local[p as usize];
            if lp != u32::MAX {
                adj[i].push(lp);
                adj[lp as usize].push(i as u32);
            }
        }
    }
    // Rates depend only on the small integer distance; precompute.
    let max_d = 2 * members.iter().map(|&m| tree.level_ix(m)).max().unwrap_or(0) as i64 + 2;
    let rate_table: Vec<(f64, f64)> = (-max_d..=max_d)
        .map(|d| {
            let lambda = model.rate(d);
            (lambda, (-lambda).exp())
        })
        .collect();

    let per_source = par::map_indexed(k, |si| {
        let src = members[si];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(src as u64);
        // BFS tree distances from the source within the member set.
        let mut rd = vec![u32::MAX; k];
        rd[si] = 0;
        let mut queue = std::collections::VecDeque::from([si as u32]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u as usize] {
                if rd[v as usize] == u32::MAX {
                    rd[v as usize] = rd[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        let src_level = tree.level_ix(src) as i64;
        let mut edges = Vec::new();
        for (ti, &dst) in members.iter().enumerate() {
            if ti == si || rd[ti] == u32::MAX {
                continue;
            }
            let srd = src_level - tree.level_ix(dst) as i64;
            let d = match model.distance_kind {
                DistanceKind::Rd => rd[ti] as i64,
                DistanceKind::Srd => srd,
                DistanceKind::Drd => rd[ti] as i64 * srd.signum(),
            };
            let (lambda, p0) = rate_table[(d + max_d) as usize];
            let count = if lambda > 500.0 {
                poisson(&mut rng, lambda)
            } else {
                // Inlined Knuth inversion with a one-draw zero path.
                let u = rng.gen::<f64>();
                if u < p0 {
                    0
                } else {
                    let mut c = 1u64;
                    let mut p = u;
                    loop {
                        p *= rng.gen::<f64>();
                        if p < p0 {
                            break;
                        }
                        c += 1;
                    }
                    c
                }
            };
            if count > 0 {
                edges.push((src, dst, count));
            }
        }
        edges
    });
    per_source.into_iter().flatten().collect()
}

/// Samples a communication graph over all ordered pairs of the tree:
/// counts are Poisson with mean `model.rate(d(u, v))`. Zero counts are
/// omitted; deterministic in the seed.
pub fn sample_comm(tree: &OrgTree, model: &CommModel, seed: u64) -> CommGraph {
    let members: Vec<NodeIx> = (0..tree.len() as u32).collect();
    let edges = sample_member_traffic(tree, &members, model, seed);
    let ids: Vec<EmployeeId> = tree.ids().to_vec();
    let lookup: HashMap<String, u32> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    CommGraph::from_indexed(ids, lookup, edges)
}

/// Configuration of a planted organization: a root, a division layer,
/// team subtrees below it, model traffic within teams, and sparse
/// cross-team traffic.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    /// One entry per team.
    pub team_sizes: Vec<usize>,
    pub mean_branching: f64,
    pub model: CommModel,
    /// Expected cross-team edges per node (spread uniformly over
    /// non-same-team ordered pairs, weight 1 each).
    pub cross_edges_per_node: f64,
    pub min_team_size: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            team_sizes: vec![100, 100],
            mean_branching: 4.0,
            model: CommModel::exponential(DistanceKind::Rd, 20.0, 2.0),
            cross_edges_per_node: 2.0,
            min_team_size: 1,
            seed: 0,
        }
    }
}

impl PlantedConfig {
    /// Builds the dataset. Team roots sit at level 2 (root, divisions,
    /// team roots), matching the default extraction level. Every tree
    /// edge is guaranteed at least one message, so generated data passes
    /// the cleaning pipeline unchanged and each team's communication
    /// graph is connected.
    pub fn build(&self) -> Dataset {
        let n_teams = self.team_sizes.len();
        assert!(n_teams >= 1, "need at least one team");
        let n_divisions = n_teams.div_ceil(7);

        let root = EmployeeId::from("n-root");
        let div_id = |d: usize| EmployeeId::from(format!("div-{d:02}"));
        let team_root_id = |t: usize| EmployeeId::from(format!("team-{t:03}"));
        let member_id = |t: usize, j: usize| EmployeeId::from(format!("team-{t:03}-m{j:05}"));

        let mut edges: Vec<(EmployeeId, EmployeeId)> = Vec::new();
        for d in 0..n_divisions {
            edges.push((div_id(d), root.clone()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for (t, &size) in self.team_sizes.iter().enumerate() {
            assert!(size >= 1, "team size must be positive");
            edges.push((team_root_id(t), div_id(t % n_divisions)));
            rng.set_stream(t as u64 + 1);
            let parent = random_parent_vec(size, self.mean_branching, &mut rng);
            for (j, &p) in parent.iter().enumerate().skip(1) {
                let p = if p == 0 { team_root_id(t) } else { member_id(t, p) };
                edges.push((member_id(t, j), p));
            }
        }
        edges.sort_unstable();
        let tree = OrgTree::from_edges(&edges).expect("planted tree is valid");
        let teams = TeamPartition::extract(&tree, 2, self.min_team_size);

        // Within-team model traffic.
        let mut comm_edges: Vec<(u32, u32, u64)> = Vec::new();
        for team in teams.teams() {
            comm_edges.extend(sample_member_traffic(
                &tree,
                &team.members,
                &self.model,
                self.seed,
            ));
        }

        // Sparse cross-team traffic on a dedicated stream.
        let n = tree.len() as u32;
        let target = (self.cross_edges_per_node * n as f64).round() as usize;
        let mut cross_rng = ChaCha8Rng::seed_from_u64(self.seed);
        cross_rng.set_stream(u64::MAX);
        for _ in 0..target {
            let u = cross_rng.gen_range(0..n);
            let v = cross_rng.gen_range(0..n);
            if u == v {
                continue;
            }
            if let (Some(tu), Some(tv)) = (teams.team_of(u), teams.team_of(v)) {
                if tu == tv {
                    continue;
                }
            }
            comm_edges.push((u, v, 1));
        }

        // Guarantee every reporting pair communicates: silent tree edges
        // get one parent-to-child message.
        let mut edge_seen = vec![false; tree.len()];
        for &(u, v, _) in &comm_edges {
            if tree.parent_ix(u) == Some(v) {
                edge_seen[u as usize] = true;
            } else if tree.parent_ix(v) == Some(u) {
                edge_seen[v as usize] = true;
            }
        }
        for ix in 0..n {
            if !edge_seen[ix as usize] {
                if let Some(p) = tree.parent_ix(ix) {
                    comm_edges.push((p, ix, 1));
                }
            }
        }

        let ids: Vec<EmployeeId> = tree.ids().to_vec();
        let lookup: HashMap<String, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str().to_owned(), i as u32))
            .collect();
        let comm = CommGraph::from_indexed(ids, lookup, comm_edges);
        let provenance = Provenance {
            team_level: 2,
            min_team_size: self.min_team_size,
            ..Provenance::default()
        };
        Dataset::new(tree, comm, teams, provenance).expect("planted dataset is consistent")
    }
}

/// Planted dataset with `n_teams` equal-size teams.
pub fn planted_suite(n_teams: usize, team_size: usize, model: &CommModel, seed: u64) -> Dataset {
    PlantedConfig {
        team_sizes: vec![team_size; n_teams],
        model: model.clone(),
        seed,
        ..PlantedConfig::default()
    }
    .build()
}

/// Exact sampler for the discrete power law `P(X = k) ~ k^-alpha`,
/// `k >= x_min`, by inversion on a tabulated CDF (tail truncated beyond
/// one million, negligible mass for alpha > 1.5).
pub fn sample_discrete_power_law(alpha: f64, x_min: u64, n: usize, seed: u64) -> Vec<u64> {
    assert!(alpha > 1.0 && x_min >= 1);
    const CAP: u64 = 1_000_000;
    let mut cdf = Vec::with_capacity((CAP - x_min + 1) as usize);
    let mut acc = 0.0_f64;
    for k in x_min..=CAP {
        acc += (k as f64).powf(-alpha);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            let pos = cdf.partition_point(|&c| c < u);
            x_min + (pos as u64).min(CAP - x_min)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest;
    use crate::measures;

    #[test]
    fn singleton_tree() {
        let t = random_org_tree(1, 5.0, 3);
        assert_eq!(t.len(), 1);
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn same_seed_same_tree() {
        let a = random_org_tree(500, 4.0, 11);
        let b = random_org_tree(500, 4.0, 11);
        assert_eq!(a, b);
        let c = random_org_tree(500, 4.0, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn mean_branching_calibration() {
        for seed in [1, 2, 3] {
            let t = random_org_tree(10_000, 5.0, seed);
            let internal = (0..t.len() as u32)
                .filter(|&ix| !t.children_ix(ix).is_empty())
                .count();
            let mean = (t.len() - 1) as f64 / internal as f64;
            assert!((4.0..=6.0).contains(&mean), "seed {seed}: mean {mean}");
        }
    }

    #[test]
    fn sample_comm_zero_alpha_is_empty() {
        let t = random_org_tree(50, 3.0, 1);
        let model = CommModel::exponential(DistanceKind::Rd, 0.0, 1.0);
        let c = sample_comm(&t, &model, 9);
        assert_eq!(c.edge_count(), 0);
        assert_eq!(c.len(), t.len());
    }

    #[test]
    fn sample_comm_beta_zero_grand_mean() {
        let t = random_org_tree(200, 4.0, 2);
        let alpha = 3.0;
        let model = CommModel::exponential(DistanceKind::Rd, alpha, 0.0);
        let c = sample_comm(&t, &model, 5);
        let pairs = (t.len() * (t.len() - 1)) as f64;
        let mean = c.total_weight() as f64 / pairs;
        assert!((mean - alpha).abs() < 0.05 * alpha, "mean {mean}");
    }

    #[test]
    fn sample_comm_decays_with_distance() {
        let t = random_org_tree(200, 4.0, 3);
        let model = CommModel::exponential(DistanceKind::Rd, 20.0, 1.5);
        let mut sums: std::collections::BTreeMap<u32, (u64, u64)> = Default::default();
        for seed in 0..10u64 {
            let c = sample_comm(&t, &model, seed);
            for u in 0..t.len() as u32 {
                for v in 0..t.len() as u32 {
                    if u == v {
                        continue;
                    }
                    let d = crate::distance::decompose_path_ix(&t, u, v);
                    let entry = sums.entry(d.n_up + d.n_down).or_insert((0, 0));
                    entry.0 += c.weight_ix(u, v);
                    entry.1 += 1;
                }
            }
        }
        let m1 = sums[&1].0 as f64 / sums[&1].1 as f64;
        let m4 = sums[&4].0 as f64 / sums[&4].1 as f64;
        assert!(m1 > m4, "RD=1 mean {m1} should exceed RD=4 mean {m4}");
    }

    #[test]
    fn sample_comm_deterministic() {
        let t = random_org_tree(120, 4.0, 8);
        let model = CommModel::exponential(DistanceKind::Srd, 5.0, 1.0);
        assert_eq!(sample_comm(&t, &model, 4), sample_comm(&t, &model, 4));
    }

    #[test]
    fn planted_has_cross_team_edges() {
        let model = CommModel::exponential(DistanceKind::Rd, 10.0, 2.0);
        let ds = planted_suite(2, 50, &model, 7);
        assert_eq!(ds.teams.teams().len(), 2);
        let mixing = measures::team_mixing_matrix(&ds);
        assert!(mixing.get(0, 1) > 0.0, "expected cross-team traffic");
    }

    #[test]
    fn planted_zero_cross_rate_isolates_teams() {
        let ds = PlantedConfig {
            team_sizes: vec![40, 40],
            cross_edges_per_node: 0.0,
            seed: 3,
            ..PlantedConfig::default()
        }
        .build();
        let mixing = measures::team_mixing_matrix(&ds);
        assert_eq!(mixing.get(0, 1), 0.0);
        assert!(mixing.get(0, 0) > 0.0);
    }

    #[test]
    fn planted_strong_decay_is_modular() {
        let model = CommModel::exponential(DistanceKind::Rd, 20.0, 2.0);
        let ds = planted_suite(4, 60, &model, 11);
        let q = measures::weighted_modularity(&ds.comm, &measures::team_labels(&ds));
        assert!(q > 0.3, "modularity {q}");
    }

    #[test]
    fn planted_passes_pipeline_unchanged() {
        let model = CommModel::exponential(DistanceKind::Rd, 8.0, 1.5);
        let ds = planted_suite(3, 30, &model, 13);
        let opts = ingest::AssembleOptions {
            team_level: 2,
            min_team_size: 1,
            root: None,
        };
        let cleaned = ingest::assemble_from_parts(ds.tree.clone(), ds.comm.clone(), &opts).unwrap();
        assert_eq!(cleaned.tree, ds.tree);
        assert_eq!(cleaned.comm, ds.comm);
        assert_eq!(cleaned.teams, ds.teams);
        assert_eq!(cleaned.provenance.cleaning, Default::default());
    }

    #[test]
    fn planted_no_silent_nodes() {
        let ds = PlantedConfig {
            team_sizes: vec![25, 25, 25],
            model: CommModel::exponential(DistanceKind::Rd, 0.5, 2.0),
            cross_edges_per_node: 0.1,
            seed: 21,
            ..PlantedConfig::default()
        }
        .build();
        for ix in 0..ds.comm.len() as u32 {
            assert!(
                ds.comm.out_strength(ix) + ds.comm.in_strength(ix) > 0,
                "node {} silent",
                ds.comm.id(ix)
            );
        }
    }

    #[test]
    fn poisson_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 20_000;
        let draws: Vec<u64> = (0..n).map(|_| poisson(&mut rng, 3.0)).collect();
        let mean = draws.iter().sum::<u64>() as f64 / n as f64;
        let var = draws
            .iter()
            .map(|&d| (d as f64 - mean) * (d as f64 - mean))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 3.0).abs() < 0.1, "mean {mean}");
        assert!((var - 3.0).abs() < 0.2, "var {var}");
    }

    #[test]
    fn power_law_sampler_head_mass() {
        let samples = sample_discrete_power_law(2.5, 1, 40_000, 23);
        let ones = samples.iter().filter(|&&v| v == 1).count() as f64 / samples.len() as f64;
        // P(X = 1) = 1 / zeta(2.5) ~ 0.7454.
        assert!((ones - 0.7454).abs() < 0.01, "mass at 1: {ones}");
        assert!(samples.iter().any(|&v| v > 100));
    }
}
