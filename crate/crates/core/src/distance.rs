//! Tree path decompositions and the three reporting distances.
//!
//! For employees `u`, `v` the unique tree path climbs `n_up` steps from
//! `u` to their lowest common ancestor and descends `n_down` steps to
//! `v`. The derived distances are
//!
//! * `RD  = n_up + n_down` (plain path length),
//! * `SRD = n_up - n_down` (positive when `u` sits below `v`),
//! * `DRD = RD * sgn(SRD)`.
//!
//! Two independent routes compute the decomposition: directly from
//! levels and the LCA, and via Dijkstra on the doubled tree with prime
//! edge weights (`p` down, `q` up) decoded from the shortest-path value.
//! The prime route is kept as a cross-check oracle; the LCA route is the
//! production path.

use std::collections::BTreeMap;

use crate::error::DistanceError;
use crate::org::{Dataset, NodeIx, OrgTree, Team};
use crate::par;

/// Steps up from the source to the LCA and down from the LCA to the
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathDecomposition {
    pub n_up: u32,
    pub n_down: u32,
}

/// The three reporting distances between an ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportingDistances {
    pub rd: u32,
    pub srd: i64,
    pub drd: i64,
}

impl From<PathDecomposition> for ReportingDistances {
    fn from(d: PathDecomposition) -> Self {
        let rd = d.n_up + d.n_down;
        let srd = d.n_up as i64 - d.n_down as i64;
        ReportingDistances {
            rd,
            srd,
            drd: rd as i64 * srd.signum(),
        }
    }
}

/// Which reporting distance to use where a choice is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DistanceKind {
    Rd,
    Srd,
    Drd,
}

impl DistanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistanceKind::Rd => "RD",
            DistanceKind::Srd => "SRD",
            DistanceKind::Drd => "DRD",
        }
    }

    pub fn parse(s: &str) -> Option<DistanceKind> {
        match s.to_ascii_lowercase().as_str() {
            "rd" => Some(DistanceKind::Rd),
            "srd" => Some(DistanceKind::Srd),
            "drd" => Some(DistanceKind::Drd),
            _ => None,
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn require(tree: &OrgTree, id: &str) -> Result<NodeIx, DistanceError> {
    tree.index_of(id)
        .ok_or_else(|| DistanceError::UnknownNode(id.to_owned()))
}

/// `(n_up, n_down)` for the ordered pair `(u, v)`.
pub fn decompose_path(tree: &OrgTree, u: &str, v: &str) -> Result<PathDecomposition, DistanceError> {
    let (ui, vi) = (require(tree, u)?, require(tree, v)?);
    Ok(decompose_path_ix(tree, ui, vi))
}

pub fn decompose_path_ix(tree: &OrgTree, u: NodeIx, v: NodeIx) -> PathDecomposition {
    let l = tree.lca_ix(u, v);
    PathDecomposition {
        n_up: tree.level_ix(u) - tree.level_ix(l),
        n_down: tree.level_ix(v) - tree.level_ix(l),
    }
}

/// RD, SRD, and DRD for the ordered pair `(u, v)`.
pub fn reporting_distances(
    tree: &OrgTree,
    u: &str,
    v: &str,
) -> Result<ReportingDistances, DistanceError> {
    Ok(decompose_path(tree, u, v)?.into())
}

/// Agony of a message from `u` to `v`: `max(SRD(v, u) + 1, 0)`. Zero for
/// messages directed up the hierarchy, positive going down.
pub fn edge_agony(tree: &OrgTree, u: &str, v: &str) -> Result<u64, DistanceError> {
    let d = reporting_distances(tree, v, u)?;
    Ok((d.srd + 1).max(0) as u64)
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    fn is_prime(x: u64) -> bool {
        if x < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= x {
            if x.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Like [`all_pairs_decomposition_dijkstra`] but with dynamic prime
/// selection: picks the smallest prime `p > q * depth` so any tree
/// depth can be encoded. Returns the chosen `p` with the result.
pub fn all_pairs_decomposition_dijkstra_auto(
    tree: &OrgTree,
    q: u64,
) -> Result<(u64, Vec<PathDecomposition>), DistanceError> {
    let p = next_prime(q * tree.depth() as u64);
    Ok((p, all_pairs_decomposition_dijkstra(tree, p, q)?))
}

/// All-pairs path decompositions via Dijkstra on the doubled tree.
///
/// Each reporting edge is traversable downward at cost `p` and upward at
/// cost `q`; the shortest-path value `d` then decodes as
/// `n_up = (d mod p) / q`, `n_down = (d - q * n_up) / p`, valid whenever
/// `q * depth < p`.
///
/// Returns a dense row-major matrix indexed by `(source, target)` node
/// indices.
pub fn all_pairs_decomposition_dijkstra(
    tree: &OrgTree,
    p: u64,
    q: u64,
) -> Result<Vec<PathDecomposition>, DistanceError> {
    let depth = tree.depth() as u64;
    if q * depth >= p {
        return Err(DistanceError::PrimeCapacityExceeded { p, q, depth });
    }
    let n = tree.len();

    // Undirected adjacency with direction-dependent cost.
    let mut adj: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
    for ix in 0..n as u32 {
        if let Some(par) = tree.parent_ix(ix) {
            adj[ix as usize].push((par, q)); // climbing
            adj[par as usize].push((ix, p)); // descending
        }
    }

    let rows = par::map_indexed(n, |src| {
        let mut dist = vec![u64::MAX; n];
        dist[src] = 0;
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(std::cmp::Reverse((0u64, src as u32)));
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            for &(v, w) in &adj[u as usize] {
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(std::cmp::Reverse((nd, v)));
                }
            }
        }
        dist.into_iter()
            .map(|d| {
                let n_up = (d % p) / q;
                let n_down = (d - q * n_up) / p;
                PathDecomposition {
                    n_up: n_up as u32,
                    n_down: n_down as u32,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(rows.into_iter().flatten().collect())
}

/// Statistics for one realized distance value in a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBin {
    /// Ordered pairs for SRD/DRD, unordered pairs for RD.
    pub pair_count: u64,
    /// Mean messages per pair at this distance (both directions summed
    /// for RD).
    pub mean_emails: f64,
    /// Fraction of pairs with any message.
    pub frac_communicating: f64,
}

/// Per-distance communication profile of one team.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub kind: DistanceKind,
    pub bins: BTreeMap<i64, DistanceBin>,
}

impl DistanceProfile {
    /// CSV rendering with header
    /// `kind,distance,pair_count,mean_emails,frac_communicating`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,distance,pair_count,mean_emails,frac_communicating\n");
        for (d, bin) in &self.bins {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.kind, d, bin.pair_count, bin.mean_emails, bin.frac_communicating
            ));
        }
        out
    }
}

/// Raw per-team distance aggregates shared by the profile export and the
/// permutation test: exact ordered/unordered pair counts per distance
/// value (computed combinatorially, without enumerating pairs) plus
/// per-edge weight and communication tallies.
#[derive(Debug, Clone)]
pub struct TeamDistanceTally {
    /// Unordered pair count at each RD value >= 1.
    pub rd_pairs: Vec<u64>,
    /// Of those, pairs whose endpoints share a level.
    rd_equal_level_pairs: Vec<u64>,
    /// Node count per team-relative level.
    level_counts: Vec<u64>,
    /// weight sums / communicating-pair counts keyed by distance value.
    rd_weight: BTreeMap<i64, u64>,
    rd_comm: BTreeMap<i64, u64>,
    srd_weight: BTreeMap<i64, u64>,
    srd_comm: BTreeMap<i64, u64>,
    drd_weight: BTreeMap<i64, u64>,
    drd_comm: BTreeMap<i64, u64>,
}

impl TeamDistanceTally {
    /// Builds the tally for one team of `dataset`.
    pub fn new(dataset: &Dataset, team: &Team) -> TeamDistanceTally {
        let tree = &dataset.tree;
        let comm = &dataset.comm;
        let base = tree.level_ix(team.root_ix());

        let mut level_counts = vec![0u64; team.depth as usize + 1];
        for &m in &team.members {
            level_counts[(tree.level_ix(m) - base) as usize] += 1;
        }

        let (rd_pairs, rd_equal_level_pairs) = rd_pair_counts(tree, team);

        let mut in_team = vec![false; tree.len()];
        for &m in &team.members {
            in_team[m as usize] = true;
        }

        let mut srd_weight = BTreeMap::new();
        let mut srd_comm = BTreeMap::new();
        let mut drd_weight = BTreeMap::new();
        let mut drd_comm = BTreeMap::new();
        let mut rd_weight = BTreeMap::new();
        let mut rd_comm = BTreeMap::new();
        for &u in &team.members {
            for (v, w) in comm.out_edges(u) {
                if !in_team[v as usize] {
                    continue;
                }
                let d = decompose_path_ix(tree, u, v);
                let rd = (d.n_up + d.n_down) as i64;
                let srd = d.n_up as i64 - d.n_down as i64;
                let drd = rd * srd.signum();
                *srd_weight.entry(srd).or_insert(0) += w;
                *srd_comm.entry(srd).or_insert(0) += 1;
                *drd_weight.entry(drd).or_insert(0) += w;
                *drd_comm.entry(drd).or_insert(0) += 1;
                // RD works on unordered pairs; count each once.
                if v > u || comm.weight_ix(v, u) == 0 {
                    *rd_weight.entry(rd).or_insert(0) += w + comm.weight_ix(v, u);
                    *rd_comm.entry(rd).or_insert(0) += 1;
                }
            }
        }

        TeamDistanceTally {
            rd_pairs,
            rd_equal_level_pairs,
            level_counts,
            rd_weight,
            rd_comm,
            srd_weight,
            srd_comm,
            drd_weight,
            drd_comm,
        }
    }

    /// Ordered pair count at a signed SRD value (level-difference
    /// convolution; excludes self-pairs at zero).
    pub fn srd_pair_count(&self, srd: i64) -> u64 {
        let mut total = 0;
        for (l, &c) in self.level_counts.iter().enumerate() {
            let other = l as i64 - srd;
            if other < 0 || other as usize >= self.level_counts.len() {
                continue;
            }
            total += c * self.level_counts[other as usize];
        }
        if srd == 0 {
            total -= self.level_counts.iter().sum::<u64>();
        }
        total
    }

    /// Ordered pair count at a signed DRD value.
    pub fn drd_pair_count(&self, drd: i64) -> u64 {
        if drd == 0 {
            // Equal-level pairs at any positive RD, both orders.
            return 2 * self.rd_equal_level_pairs.iter().sum::<u64>();
        }
        let d = drd.unsigned_abs() as usize;
        if d >= self.rd_pairs.len() {
            return 0;
        }
        // Each unequal-level unordered pair contributes one ordered pair
        // at +RD and one at -RD.
        self.rd_pairs[d] - self.rd_equal_level_pairs[d]
    }

    /// All realized distance values and their ordered (SRD/DRD) or
    /// unordered (RD) pair counts.
    pub fn pair_counts(&self, kind: DistanceKind) -> BTreeMap<i64, u64> {
        let mut out = BTreeMap::new();
        match kind {
            DistanceKind::Rd => {
                for (d, &c) in self.rd_pairs.iter().enumerate().skip(1) {
                    if c > 0 {
                        out.insert(d as i64, c);
                    }
                }
            }
            DistanceKind::Srd => {
                let depth = self.level_counts.len() as i64 - 1;
                for srd in -depth..=depth {
                    let c = self.srd_pair_count(srd);
                    if c > 0 {
                        out.insert(srd, c);
                    }
                }
            }
            DistanceKind::Drd => {
                let max_rd = self.rd_pairs.len() as i64 - 1;
                for drd in -max_rd..=max_rd {
                    let c = self.drd_pair_count(drd);
                    if c > 0 {
                        out.insert(drd, c);
                    }
                }
            }
        }
        out
    }

    /// Observed weight sum over pairs at each distance value.
    pub fn weight_sums(&self, kind: DistanceKind) -> &BTreeMap<i64, u64> {
        match kind {
            DistanceKind::Rd => &self.rd_weight,
            DistanceKind::Srd => &self.srd_weight,
            DistanceKind::Drd => &self.drd_weight,
        }
    }

    fn comm_counts(&self, kind: DistanceKind) -> &BTreeMap<i64, u64> {
        match kind {
            DistanceKind::Rd => &self.rd_comm,
            DistanceKind::Srd => &self.srd_comm,
            DistanceKind::Drd => &self.drd_comm,
        }
    }

    pub fn profile(&self, kind: DistanceKind) -> DistanceProfile {
        let weights = self.weight_sums(kind);
        let comms = self.comm_counts(kind);
        let bins = self
            .pair_counts(kind)
            .into_iter()
            .map(|(d, pairs)| {
                let w = weights.get(&d).copied().unwrap_or(0);
                let c = comms.get(&d).copied().unwrap_or(0);
                (
                    d,
                    DistanceBin {
                        pair_count: pairs,
                        mean_emails: w as f64 / pairs as f64,
                        frac_communicating: c as f64 / pairs as f64,
                    },
                )
            })
            .collect();
        DistanceProfile { kind, bins }
    }
}

/// Unordered pair counts by tree distance, split by whether the
/// endpoints share a level. Index = RD value; `[0]` unused.
///
/// Runs the classic LCA-merge: for each node, cross-correlate the depth
/// profiles of its child subtrees (plus the node itself), so each
/// unordered pair is counted exactly once at its true path length.
fn rd_pair_counts(tree: &OrgTree, team: &Team) -> (Vec<u64>, Vec<u64>) {
    let max_rd = 2 * team.depth as usize;
    let mut total = vec![0u64; max_rd + 1];
    let mut equal = vec![0u64; max_rd + 1];
    if team.depth == 0 {
        return (total, equal);
    }

    // Post-order over the team subtree; profiles[i] = node counts by
    // depth below the member, starting with the member itself.
    let order = &team.members; // ascending index; children after parents is
                               // not guaranteed, so do an explicit DFS.
    let mut in_team = vec![false; tree.len()];
    for &m in order {
        in_team[m as usize] = true;
    }
    let mut stack = vec![(team.root_ix(), false)];
    let mut profiles: Vec<Vec<u64>> = Vec::new();
    let mut profile_of: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    while let Some((u, processed)) = stack.pop() {
        if !processed {
            stack.push((u, true));
            for &c in tree.children_ix(u) {
                if in_team[c as usize] {
                    stack.push((c, false));
                }
            }
            continue;
        }
        let mut acc = vec![1u64]; // the node itself, depth 0
        for &c in tree.children_ix(u) {
            if !in_team[c as usize] {
                continue;
            }
            let child = profiles[profile_of[&c]].clone();
            // Pairs whose LCA is u: one endpoint in the accumulated
            // profile, the other in this child's subtree (shifted by 1).
            for (d1, &c1) in acc.iter().enumerate() {
                if c1 == 0 {
                    continue;
                }
                for (d2, &c2) in child.iter().enumerate() {
                    if c2 == 0 {
                        continue;
                    }
                    let rd = d1 + d2 + 1;
                    total[rd] += c1 * c2;
                    if d1 == d2 + 1 {
                        equal[rd] += c1 * c2;
                    }
                }
            }
            if acc.len() < child.len() + 1 {
                acc.resize(child.len() + 1, 0);
            }
            for (d2, &c2) in child.iter().enumerate() {
                acc[d2 + 1] += c2;
            }
        }
        profile_of.insert(u, profiles.len());
        profiles.push(acc);
    }
    (total, equal)
}

/// Distance profile of one team for the requested distance kind.
pub fn distance_profile(
    dataset: &Dataset,
    team_id: &str,
    kind: DistanceKind,
) -> Result<DistanceProfile, DistanceError> {
    let team = dataset
        .teams
        .team(team_id)
        .ok_or_else(|| DistanceError::UnknownTeam(team_id.to_owned()))?;
    Ok(TeamDistanceTally::new(dataset, team).profile(kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::org::testutil::{fixture_dataset, fixture_tree};

    #[test]
    fn decompose_fixture_pairs() {
        let t = fixture_tree();
        let d = decompose_path(&t, "c1", "R").unwrap();
        assert_eq!((d.n_up, d.n_down), (3, 0));
        let d = decompose_path(&t, "a1", "b1").unwrap();
        assert_eq!((d.n_up, d.n_down), (2, 2));
        let d = decompose_path(&t, "a2", "a2").unwrap();
        assert_eq!((d.n_up, d.n_down), (0, 0));
    }

    #[test]
    fn reporting_distance_fixture_values() {
        let t = fixture_tree();
        let d = reporting_distances(&t, "c1", "R").unwrap();
        assert_eq!((d.rd, d.srd, d.drd), (3, 3, 3));
        let d = reporting_distances(&t, "R", "c1").unwrap();
        assert_eq!((d.rd, d.srd, d.drd), (3, -3, -3));
        let d = reporting_distances(&t, "a1", "b1").unwrap();
        assert_eq!((d.rd, d.srd, d.drd), (4, 0, 0));
    }

    #[test]
    fn agony_fixture_values() {
        let t = fixture_tree();
        assert_eq!(edge_agony(&t, "R", "c1").unwrap(), 4);
        assert_eq!(edge_agony(&t, "c1", "R").unwrap(), 0);
        assert_eq!(edge_agony(&t, "a1", "b1").unwrap(), 1);
    }

    #[test]
    fn dijkstra_matches_lca_on_fixture() {
        let t = fixture_tree();
        let mat = all_pairs_decomposition_dijkstra(&t, 101, 3).unwrap();
        let n = t.len();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                let lca = decompose_path_ix(&t, u, v);
                assert_eq!(mat[u as usize * n + v as usize], lca, "pair {u},{v}");
            }
        }
    }

    #[test]
    fn dijkstra_encoding_example() {
        // (c1, R): three steps up, none down; encoded cost 3 * q = 9.
        let t = fixture_tree();
        let mat = all_pairs_decomposition_dijkstra(&t, 101, 3).unwrap();
        let u = t.index_of("c1").unwrap() as usize;
        let v = t.index_of("R").unwrap() as usize;
        assert_eq!(mat[u * t.len() + v], PathDecomposition { n_up: 3, n_down: 0 });
    }

    #[test]
    fn dijkstra_prime_capacity() {
        // A path tree of depth 40 exceeds q * depth < p for (101, 3).
        let edges: Vec<(crate::org::EmployeeId, crate::org::EmployeeId)> = (1..=40)
            .map(|i| (format!("n{i:02}").into(), format!("n{:02}", i - 1).into()))
            .collect();
        let t = OrgTree::from_edges(&edges).unwrap();
        assert_eq!(t.depth(), 40);
        match all_pairs_decomposition_dijkstra(&t, 101, 3) {
            Err(DistanceError::PrimeCapacityExceeded { p: 101, q: 3, depth: 40 }) => {}
            other => panic!("expected PrimeCapacityExceeded, got {other:?}"),
        }
    }

    #[test]
    fn next_prime_values() {
        assert_eq!(next_prime(1), 2);
        assert_eq!(next_prime(100), 101);
        assert_eq!(next_prime(120), 127);
    }

    #[test]
    fn dijkstra_auto_primes_handle_deep_trees() {
        // Depth 40 fails with the defaults but works with auto primes.
        let edges: Vec<(crate::org::EmployeeId, crate::org::EmployeeId)> = (1..=40)
            .map(|i| (format!("n{i:02}").into(), format!("n{:02}", i - 1).into()))
            .collect();
        let t = OrgTree::from_edges(&edges).unwrap();
        let (p, mat) = all_pairs_decomposition_dijkstra_auto(&t, 3).unwrap();
        assert_eq!(p, 127);
        let n = t.len();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                assert_eq!(mat[u as usize * n + v as usize], decompose_path_ix(&t, u, v));
            }
        }
    }

    #[test]
    fn srd_equals_level_difference_on_fixture() {
        let t = fixture_tree();
        for u in 0..t.len() as u32 {
            for v in 0..t.len() as u32 {
                let d: ReportingDistances = decompose_path_ix(&t, u, v).into();
                assert_eq!(d.srd, t.level_ix(u) as i64 - t.level_ix(v) as i64);
            }
        }
    }

    #[test]
    fn drd_triangle_counterexample() {
        // w reports to v; u and v both report to a fourth node r.
        let edges: Vec<(crate::org::EmployeeId, crate::org::EmployeeId)> =
            [("u", "r"), ("v", "r"), ("w", "v")]
                .iter()
                .map(|&(c, p)| (c.into(), p.into()))
                .collect();
        let t = OrgTree::from_edges(&edges).unwrap();
        assert_eq!(reporting_distances(&t, "u", "v").unwrap().drd, 0);
        assert_eq!(reporting_distances(&t, "u", "w").unwrap().drd, -3);
        assert_eq!(reporting_distances(&t, "w", "v").unwrap().drd, 1);
    }

    #[test]
    fn profile_rd_fixture() {
        let ds = fixture_dataset();
        let p = distance_profile(&ds, "A", DistanceKind::Rd).unwrap();
        // Distance 1: pairs {A,a1}, {A,a2}, {a1,c1}; messages 7 + 0 + 0.
        let bin = p.bins[&1];
        assert_eq!(bin.pair_count, 3);
        assert!((bin.mean_emails - 7.0 / 3.0).abs() < 1e-15);
        assert!((bin.frac_communicating - 1.0 / 3.0).abs() < 1e-15);
        // Distance 2: pairs {a1,a2}, {A,c1}; messages 8 + 1.
        let bin = p.bins[&2];
        assert_eq!(bin.pair_count, 2);
        assert!((bin.mean_emails - 4.5).abs() < 1e-15);
        assert_eq!(bin.frac_communicating, 1.0);
        // Distance 3: pairs {a2,c1}; no messages.
        let bin = p.bins[&3];
        assert_eq!(bin.pair_count, 1);
        assert_eq!(bin.mean_emails, 0.0);
    }

    #[test]
    fn profile_srd_fixture() {
        let ds = fixture_dataset();
        let p = distance_profile(&ds, "A", DistanceKind::Srd).unwrap();
        // SRD 0: ordered level-mate pairs (a1,a2), (a2,a1).
        let bin = p.bins[&0];
        assert_eq!(bin.pair_count, 2);
        assert!((bin.mean_emails - 4.0).abs() < 1e-15);
        assert_eq!(bin.frac_communicating, 1.0);
        // SRD -1: ordered pairs one level down:
        // (A,a1), (A,a2), (a1,c1), (a2,c1).
        let bin = p.bins[&-1];
        assert_eq!(bin.pair_count, 4);
        assert!((bin.mean_emails - 7.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn profile_counts_cover_all_pairs() {
        let ds = fixture_dataset();
        for team in ds.teams.teams() {
            let n = team.size() as u64;
            let tally = TeamDistanceTally::new(&ds, team);
            let rd_total: u64 = tally.pair_counts(DistanceKind::Rd).values().sum();
            assert_eq!(rd_total, n * (n - 1) / 2);
            for kind in [DistanceKind::Srd, DistanceKind::Drd] {
                let total: u64 = tally.pair_counts(kind).values().sum();
                assert_eq!(total, n * (n - 1), "{kind}");
            }
        }
    }

    #[test]
    fn profile_all_zero_comm() {
        use crate::org::{CommGraph, Dataset, EmployeeId, Provenance, TeamPartition};
        let tree = fixture_tree();
        let nodes: Vec<EmployeeId> = tree.ids().to_vec();
        let comm = CommGraph::with_nodes(nodes, &[]).unwrap();
        let teams = TeamPartition::extract(&tree, 1, 1);
        let ds = Dataset::new(tree, comm, teams, Provenance::default()).unwrap();
        let p = distance_profile(&ds, "A", DistanceKind::Rd).unwrap();
        assert!(p.bins.values().all(|b| b.mean_emails == 0.0 && b.frac_communicating == 0.0));
    }

    #[test]
    fn unknown_team_is_reported() {
        let ds = fixture_dataset();
        assert!(matches!(
            distance_profile(&ds, "nope", DistanceKind::Rd),
            Err(DistanceError::UnknownTeam(_))
        ));
    }
}
