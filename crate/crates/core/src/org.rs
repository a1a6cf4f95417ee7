//! Core data model: organizational trees, communication graphs, team
//! partitions, and the harmonized [`Dataset`] bundling them.
//!
//! All types are immutable after construction and safe to share across
//! threads. Node identifiers are opaque strings; internally every
//! structure stores nodes in lexicographic id order, so the dense index
//! of a node is deterministic and, inside a [`Dataset`], identical
//! between the tree and the communication graph.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::OrgError;

/// Dense node index into an [`OrgTree`] or [`CommGraph`] (lexicographic
/// rank of the node id).
pub type NodeIx = u32;

const NO_PARENT: u32 = u32::MAX;

/// Opaque anonymized employee identifier. Non-empty, unique per dataset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmployeeId(String);

impl EmployeeId {
    pub fn new(id: impl Into<String>) -> Self {
        EmployeeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EmployeeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EmployeeId {
    fn from(s: &str) -> Self {
        EmployeeId(s.to_owned())
    }
}

impl From<String> for EmployeeId {
    fn from(s: String) -> Self {
        EmployeeId(s)
    }
}

impl std::borrow::Borrow<str> for EmployeeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Rooted directed tree of reporting relationships.
///
/// Exactly one root (the head of the organization), every other node has
/// exactly one parent, and `level` counts steps below the root.
#[derive(Debug, Clone, PartialEq)]
pub struct OrgTree {
    ids: Vec<EmployeeId>,
    lookup: HashMap<String, u32>,
    parent: Vec<u32>,
    level: Vec<u32>,
    children_off: Vec<u32>,
    children: Vec<u32>,
    root: u32,
    depth: u32,
}

impl OrgTree {
    /// Builds a tree from `(child, parent)` edges, inferring the root as
    /// the unique node that never appears as a child.
    pub fn from_edges(edges: &[(EmployeeId, EmployeeId)]) -> Result<Self, OrgError> {
        Self::build(edges, None)
    }

    /// Builds a tree from `(child, parent)` edges with an explicit root.
    /// Any other parentless node is reported as disconnected.
    pub fn from_edges_rooted(
        edges: &[(EmployeeId, EmployeeId)],
        root: &str,
    ) -> Result<Self, OrgError> {
        Self::build(edges, Some(root))
    }

    /// Single-node tree.
    pub fn singleton(root: EmployeeId) -> Self {
        let mut lookup = HashMap::new();
        lookup.insert(root.as_str().to_owned(), 0);
        OrgTree {
            ids: vec![root],
            lookup,
            parent: vec![NO_PARENT],
            level: vec![0],
            children_off: vec![0, 0],
            children: Vec::new(),
            root: 0,
            depth: 0,
        }
    }

    fn build(edges: &[(EmployeeId, EmployeeId)], declared_root: Option<&str>) -> Result<Self, OrgError> {
        if edges.is_empty() {
            return match declared_root {
                Some(r) => Ok(Self::singleton(EmployeeId::from(r))),
                None => Err(OrgError::EmptyTree),
            };
        }

        // Collect and sort the node universe so indices are canonical.
        let mut ids: Vec<&str> = Vec::with_capacity(edges.len() * 2);
        for (c, p) in edges {
            ids.push(c.as_str());
            ids.push(p.as_str());
        }
        if let Some(r) = declared_root {
            ids.push(r);
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.iter().any(|s| s.is_empty()) {
            return Err(OrgError::UnknownNode(String::new()));
        }
        let lookup: HashMap<String, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| ((*s).to_owned(), i as u32))
            .collect();
        let n = ids.len();

        let mut parent = vec![NO_PARENT; n];
        for (c, p) in edges {
            if c == p {
                return Err(OrgError::CycleDetected(vec![c.as_str().to_owned()]));
            }
            let ci = lookup[c.as_str()] as usize;
            let pi = lookup[p.as_str()];
            if parent[ci] != NO_PARENT && parent[ci] != pi {
                return Err(OrgError::DuplicateParent {
                    child: c.as_str().to_owned(),
                    first: ids[parent[ci] as usize].to_owned(),
                    second: p.as_str().to_owned(),
                });
            }
            parent[ci] = pi;
        }

        let candidates: Vec<u32> = (0..n as u32).filter(|&i| parent[i as usize] == NO_PARENT).collect();
        let root = match declared_root {
            Some(r) => {
                let ri = *lookup
                    .get(r)
                    .ok_or_else(|| OrgError::UnknownNode(r.to_owned()))?;
                if parent[ri as usize] != NO_PARENT {
                    // The declared root reports to someone: treat its
                    // parent edge as erroneous rather than silently
                    // cutting it.
                    return Err(OrgError::MultipleRoots(vec![r.to_owned()]));
                }
                if let Some(&other) = candidates.iter().find(|&&c| c != ri) {
                    return Err(OrgError::DisconnectedNode(ids[other as usize].to_owned()));
                }
                ri
            }
            None => match candidates.as_slice() {
                [] => return Err(OrgError::CycleDetected(Self::find_cycle(&parent, 0, &ids))),
                [r] => *r,
                many => {
                    return Err(OrgError::MultipleRoots(
                        many.iter().map(|&i| ids[i as usize].to_owned()).collect(),
                    ))
                }
            },
        };

        let (children_off, children) = children_csr(&parent, n, root);

        // BFS from the root assigns levels; anything unreached sits on a
        // cycle (every unreached node has a parent).
        let mut level = vec![u32::MAX; n];
        level[root as usize] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut reached = 1usize;
        let mut depth = 0;
        while let Some(u) = queue.pop_front() {
            let lv = level[u as usize];
            depth = depth.max(lv);
            let (a, b) = (children_off[u as usize] as usize, children_off[u as usize + 1] as usize);
            for &c in &children[a..b] {
                level[c as usize] = lv + 1;
                reached += 1;
                queue.push_back(c);
            }
        }
        if reached != n {
            let start = (0..n).find(|&i| level[i] == u32::MAX).unwrap();
            return Err(OrgError::CycleDetected(Self::find_cycle(&parent, start, &ids)));
        }

        Ok(OrgTree {
            ids: ids.into_iter().map(EmployeeId::from).collect(),
            lookup,
            parent,
            level,
            children_off,
            children,
            root,
            depth,
        })
    }

    fn find_cycle(parent: &[u32], start: usize, ids: &[&str]) -> Vec<String> {
        // Walk parent pointers until a node repeats, then cut the tail.
        let mut seen = HashMap::new();
        let mut path = Vec::new();
        let mut u = start;
        loop {
            if let Some(&pos) = seen.get(&u) {
                return path[pos..].iter().map(|&i: &usize| ids[i].to_owned()).collect();
            }
            seen.insert(u, path.len());
            path.push(u);
            let p = parent[u];
            if p == NO_PARENT {
                // Not actually on a cycle; follow any other unvisited node.
                return vec![ids[start].to_owned()];
            }
            u = p as usize;
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Maximum level in the tree.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn root_ix(&self) -> NodeIx {
        self.root
    }

    pub fn root_id(&self) -> &EmployeeId {
        &self.ids[self.root as usize]
    }

    /// Node ids in index (lexicographic) order.
    pub fn ids(&self) -> &[EmployeeId] {
        &self.ids
    }

    pub fn id(&self, ix: NodeIx) -> &EmployeeId {
        &self.ids[ix as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<NodeIx> {
        self.lookup.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<NodeIx, OrgError> {
        self.index_of(id)
            .ok_or_else(|| OrgError::UnknownNode(id.to_owned()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }

    pub fn level_ix(&self, ix: NodeIx) -> u32 {
        self.level[ix as usize]
    }

    pub fn level(&self, id: &str) -> Result<u32, OrgError> {
        Ok(self.level_ix(self.require(id)?))
    }

    pub fn parent_ix(&self, ix: NodeIx) -> Option<NodeIx> {
        match self.parent[ix as usize] {
            NO_PARENT => None,
            p => Some(p),
        }
    }

    pub fn parent(&self, id: &str) -> Result<Option<&EmployeeId>, OrgError> {
        Ok(self.parent_ix(self.require(id)?).map(|p| self.id(p)))
    }

    pub fn children_ix(&self, ix: NodeIx) -> &[NodeIx] {
        let (a, b) = (
            self.children_off[ix as usize] as usize,
            self.children_off[ix as usize + 1] as usize,
        );
        &self.children[a..b]
    }

    /// Lowest common ancestor of `u` and `v`.
    pub fn lca(&self, u: &str, v: &str) -> Result<&EmployeeId, OrgError> {
        let (ui, vi) = (self.require(u)?, self.require(v)?);
        Ok(self.id(self.lca_ix(ui, vi)))
    }

    pub fn lca_ix(&self, mut u: NodeIx, mut v: NodeIx) -> NodeIx {
        while self.level[u as usize] > self.level[v as usize] {
            u = self.parent[u as usize];
        }
        while self.level[v as usize] > self.level[u as usize] {
            v = self.parent[v as usize];
        }
        while u != v {
            u = self.parent[u as usize];
            v = self.parent[v as usize];
        }
        u
    }

    /// The subtree rooted at `new_root`, with levels re-based to zero.
    pub fn subtree(&self, new_root: &str) -> Result<OrgTree, OrgError> {
        let r = self.require(new_root)?;
        let members = self.descendants_ix(r);
        let base = self.level[r as usize];

        // A sorted subset of a sorted id list stays sorted.
        let ids: Vec<EmployeeId> = members.iter().map(|&m| self.ids[m as usize].clone()).collect();
        let lookup: HashMap<String, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str().to_owned(), i as u32))
            .collect();
        let remap: HashMap<u32, u32> = members.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();

        let n = members.len();
        let mut parent = vec![NO_PARENT; n];
        let mut level = vec![0u32; n];
        let mut depth = 0;
        for (i, &m) in members.iter().enumerate() {
            level[i] = self.level[m as usize] - base;
            depth = depth.max(level[i]);
            if m != r {
                parent[i] = remap[&self.parent[m as usize]];
            }
        }
        let root = remap[&r];
        let (children_off, children) = children_csr(&parent, n, root);
        Ok(OrgTree {
            ids,
            lookup,
            parent,
            level,
            children_off,
            children,
            root,
            depth,
        })
    }

    /// Indices of `root` and all its descendants, in ascending order.
    pub fn descendants_ix(&self, root: NodeIx) -> Vec<NodeIx> {
        let mut out = vec![root];
        let mut head = 0;
        while head < out.len() {
            let u = out[head];
            head += 1;
            out.extend_from_slice(self.children_ix(u));
        }
        out.sort_unstable();
        out
    }

    /// Ancestor of `ix` at the given level, if the node is at or below it.
    pub fn ancestor_at_level(&self, mut ix: NodeIx, target_level: u32) -> Option<NodeIx> {
        if self.level[ix as usize] < target_level {
            return None;
        }
        while self.level[ix as usize] > target_level {
            ix = self.parent[ix as usize];
        }
        Some(ix)
    }

    /// Child/parent pairs in canonical (child id) order.
    pub fn edges(&self) -> impl Iterator<Item = (&EmployeeId, &EmployeeId)> + '_ {
        (0..self.ids.len()).filter_map(move |i| {
            self.parent_ix(i as u32)
                .map(|p| (&self.ids[i], &self.ids[p as usize]))
        })
    }
}

fn children_csr(parent: &[u32], n: usize, root: u32) -> (Vec<u32>, Vec<u32>) {
    let mut counts = vec![0u32; n + 1];
    for (i, &p) in parent.iter().enumerate() {
        if p != NO_PARENT {
            debug_assert!(i as u32 != root);
            counts[p as usize + 1] += 1;
        }
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let off = counts.clone();
    let mut fill = counts;
    let mut children = vec![0u32; off[n] as usize];
    for (i, &p) in parent.iter().enumerate() {
        if p != NO_PARENT {
            children[fill[p as usize] as usize] = i as u32;
            fill[p as usize] += 1;
        }
    }
    (off, children)
}

/// Weighted directed communication graph: sparse positive message counts
/// between ordered pairs of distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    ids: Vec<EmployeeId>,
    lookup: HashMap<String, u32>,
    out_off: Vec<u32>,
    out_dst: Vec<u32>,
    out_w: Vec<u64>,
    in_off: Vec<u32>,
    in_src: Vec<u32>,
    in_w: Vec<u64>,
    total_weight: u64,
}

impl CommGraph {
    /// Builds a graph whose node set is exactly the edge endpoints.
    pub fn from_edges(edges: &[(EmployeeId, EmployeeId, u64)]) -> Result<Self, OrgError> {
        let mut ids: Vec<&str> = edges
            .iter()
            .flat_map(|(s, d, _)| [s.as_str(), d.as_str()])
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let owned: Vec<EmployeeId> = ids.into_iter().map(EmployeeId::from).collect();
        Self::with_nodes(owned, edges)
    }

    /// Builds a graph over an explicit node set (which may include silent
    /// nodes). Every edge endpoint must be declared.
    pub fn with_nodes(
        mut nodes: Vec<EmployeeId>,
        edges: &[(EmployeeId, EmployeeId, u64)],
    ) -> Result<Self, OrgError> {
        nodes.sort_unstable();
        nodes.dedup();
        let lookup: HashMap<String, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str().to_owned(), i as u32))
            .collect();
        let mut indexed = Vec::with_capacity(edges.len());
        for (s, d, w) in edges {
            let si = *lookup
                .get(s.as_str())
                .ok_or_else(|| OrgError::NodeSetMismatch(s.as_str().to_owned()))?;
            let di = *lookup
                .get(d.as_str())
                .ok_or_else(|| OrgError::NodeSetMismatch(d.as_str().to_owned()))?;
            if si == di {
                return Err(OrgError::SelfLoop(s.as_str().to_owned()));
            }
            if *w == 0 {
                return Err(OrgError::NonPositiveCount {
                    src: s.as_str().to_owned(),
                    dst: d.as_str().to_owned(),
                });
            }
            indexed.push((si, di, *w));
        }
        Ok(Self::from_indexed(nodes, lookup, indexed))
    }

    /// Fast path for callers that already hold canonical indices; merges
    /// duplicate `(src, dst)` entries by summing.
    pub(crate) fn from_indexed(
        ids: Vec<EmployeeId>,
        lookup: HashMap<String, u32>,
        mut edges: Vec<(u32, u32, u64)>,
    ) -> Self {
        edges.sort_unstable_by_key(|&(s, d, _)| (s, d));
        edges.dedup_by(|cur, acc| {
            if cur.0 == acc.0 && cur.1 == acc.1 {
                acc.2 += cur.2;
                true
            } else {
                false
            }
        });
        let n = ids.len();
        let m = edges.len();

        let mut out_off = vec![0u32; n + 1];
        for &(s, _, _) in &edges {
            out_off[s as usize + 1] += 1;
        }
        for i in 0..n {
            out_off[i + 1] += out_off[i];
        }
        let mut out_dst = Vec::with_capacity(m);
        let mut out_w = Vec::with_capacity(m);
        let mut total = 0u64;
        for &(_, d, w) in &edges {
            out_dst.push(d);
            out_w.push(w);
            total += w;
        }

        let mut in_off = vec![0u32; n + 1];
        for &(_, d, _) in &edges {
            in_off[d as usize + 1] += 1;
        }
        for i in 0..n {
            in_off[i + 1] += in_off[i];
        }
        let mut fill = in_off.clone();
        let mut in_src = vec![0u32; m];
        let mut in_w = vec![0u64; m];
        // Second pass sorted by (dst, src) because the source order is
        // already ascending within each destination bucket.
        for &(s, d, w) in &edges {
            let slot = fill[d as usize] as usize;
            in_src[slot] = s;
            in_w[slot] = w;
            fill[d as usize] += 1;
        }

        CommGraph {
            ids,
            lookup,
            out_off,
            out_dst,
            out_w,
            in_off,
            in_src,
            in_w,
            total_weight: total,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.out_dst.len()
    }

    /// Total message volume over all edges.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn ids(&self) -> &[EmployeeId] {
        &self.ids
    }

    pub fn id(&self, ix: NodeIx) -> &EmployeeId {
        &self.ids[ix as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<NodeIx> {
        self.lookup.get(id).copied()
    }

    /// Outgoing `(dst, weight)` pairs of `ix`, ascending by destination.
    pub fn out_edges(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, u64)> + '_ {
        let (a, b) = (self.out_off[ix as usize] as usize, self.out_off[ix as usize + 1] as usize);
        self.out_dst[a..b].iter().copied().zip(self.out_w[a..b].iter().copied())
    }

    /// Incoming `(src, weight)` pairs of `ix`, ascending by source.
    pub fn in_edges(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, u64)> + '_ {
        let (a, b) = (self.in_off[ix as usize] as usize, self.in_off[ix as usize + 1] as usize);
        self.in_src[a..b].iter().copied().zip(self.in_w[a..b].iter().copied())
    }

    pub fn out_degree(&self, ix: NodeIx) -> usize {
        (self.out_off[ix as usize + 1] - self.out_off[ix as usize]) as usize
    }

    pub fn in_degree(&self, ix: NodeIx) -> usize {
        (self.in_off[ix as usize + 1] - self.in_off[ix as usize]) as usize
    }

    /// Message count from `u` to `v` (zero when no edge).
    pub fn weight_ix(&self, u: NodeIx, v: NodeIx) -> u64 {
        let (a, b) = (self.out_off[u as usize] as usize, self.out_off[u as usize + 1] as usize);
        match self.out_dst[a..b].binary_search(&v) {
            Ok(pos) => self.out_w[a + pos],
            Err(_) => 0,
        }
    }

    pub fn weight(&self, src: &str, dst: &str) -> u64 {
        match (self.index_of(src), self.index_of(dst)) {
            (Some(u), Some(v)) => self.weight_ix(u, v),
            _ => 0,
        }
    }

    pub fn out_strength(&self, ix: NodeIx) -> u64 {
        let (a, b) = (self.out_off[ix as usize] as usize, self.out_off[ix as usize + 1] as usize);
        self.out_w[a..b].iter().sum()
    }

    pub fn in_strength(&self, ix: NodeIx) -> u64 {
        let (a, b) = (self.in_off[ix as usize] as usize, self.in_off[ix as usize + 1] as usize);
        self.in_w[a..b].iter().sum()
    }

    /// All edges as `(src, dst, weight)` index triples in canonical order.
    pub fn edges_ix(&self) -> impl Iterator<Item = (NodeIx, NodeIx, u64)> + '_ {
        (0..self.len() as u32).flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }
}

/// Node label within a [`TeamPartition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    /// Member of the kept team with this index.
    Member(u32),
    /// Above the team level (head of organization, division leads).
    Leadership,
    /// Member of a team below the minimum size.
    Excluded,
}

/// One kept team: the full subtree under a node at the team level.
#[derive(Debug, Clone, PartialEq)]
pub struct Team {
    /// Team id: the id of the team root.
    pub id: EmployeeId,
    /// Division id: the team root's ancestor one level up.
    pub division: EmployeeId,
    root_ix: u32,
    /// Member indices into the owning tree, ascending.
    pub members: Vec<NodeIx>,
    /// Maximum level within the team, relative to the team root.
    pub depth: u32,
}

impl Team {
    pub fn root_ix(&self) -> NodeIx {
        self.root_ix
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Assignment of tree nodes to teams and divisions.
///
/// Indices refer to the tree the partition was extracted from; a
/// [`Dataset`] keeps the pair consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamPartition {
    pub team_level: u32,
    pub min_size: usize,
    teams: Vec<Team>,
    labels: Vec<NodeLabel>,
    /// Roots and sizes of teams dropped by the size filter.
    pub excluded_teams: Vec<(EmployeeId, usize)>,
}

impl TeamPartition {
    /// One team per node at `team_level`, holding that node's full
    /// subtree. Teams smaller than `min_size` are excluded (their members
    /// keep an `Excluded` label); nodes above the team level are labeled
    /// `Leadership`.
    pub fn extract(tree: &OrgTree, team_level: u32, min_size: usize) -> TeamPartition {
        assert!(team_level >= 1, "team_level must be at least 1");
        let n = tree.len();
        let mut labels = vec![NodeLabel::Excluded; n];
        let mut teams = Vec::new();
        let mut excluded_teams = Vec::new();
        for ix in 0..n as u32 {
            let lv = tree.level_ix(ix);
            if lv < team_level {
                labels[ix as usize] = NodeLabel::Leadership;
                continue;
            }
            if lv != team_level {
                continue;
            }
            let members = tree.descendants_ix(ix);
            if members.len() < min_size {
                excluded_teams.push((tree.id(ix).clone(), members.len()));
                continue;
            }
            let division = tree
                .ancestor_at_level(ix, team_level - 1)
                .expect("team root has an ancestor one level up");
            let depth = members
                .iter()
                .map(|&m| tree.level_ix(m) - team_level)
                .max()
                .unwrap_or(0);
            let team_ix = teams.len() as u32;
            for &m in &members {
                labels[m as usize] = NodeLabel::Member(team_ix);
            }
            teams.push(Team {
                id: tree.id(ix).clone(),
                division: tree.id(division).clone(),
                root_ix: ix,
                members,
                depth,
            });
        }
        TeamPartition {
            team_level,
            min_size,
            teams,
            labels,
            excluded_teams,
        }
    }

    pub fn teams(&self) -> &[Team] {
        &self.teams
    }

    pub fn team(&self, id: &str) -> Option<&Team> {
        self.teams.iter().find(|t| t.id.as_str() == id)
    }

    pub fn label(&self, ix: NodeIx) -> NodeLabel {
        self.labels[ix as usize]
    }

    /// Team index of a node, if it belongs to a kept team.
    pub fn team_of(&self, ix: NodeIx) -> Option<u32> {
        match self.labels[ix as usize] {
            NodeLabel::Member(t) => Some(t),
            _ => None,
        }
    }

    /// Division id of a node (members only).
    pub fn division_of(&self, ix: NodeIx) -> Option<&EmployeeId> {
        self.team_of(ix).map(|t| &self.teams[t as usize].division)
    }

    /// Rebuilds a partition from explicit memberships (deserialization
    /// path). `members` maps team id to `(division id, member indices)`;
    /// team ids double as team-root ids. Anything not listed as a member
    /// or leadership node is labeled excluded.
    pub fn from_memberships(
        tree: &OrgTree,
        team_level: u32,
        min_size: usize,
        members: std::collections::BTreeMap<EmployeeId, (EmployeeId, Vec<NodeIx>)>,
        leadership: &[NodeIx],
    ) -> TeamPartition {
        let mut labels = vec![NodeLabel::Excluded; tree.len()];
        for &ix in leadership {
            labels[ix as usize] = NodeLabel::Leadership;
        }
        let mut teams = Vec::new();
        for (id, (division, mut team_members)) in members {
            team_members.sort_unstable();
            let root_ix = tree
                .index_of(id.as_str())
                .expect("team root listed among tree nodes");
            let base = tree.level_ix(root_ix);
            let depth = team_members
                .iter()
                .map(|&m| tree.level_ix(m) - base)
                .max()
                .unwrap_or(0);
            let team_ix = teams.len() as u32;
            for &m in &team_members {
                labels[m as usize] = NodeLabel::Member(team_ix);
            }
            teams.push(Team {
                id,
                division,
                root_ix,
                members: team_members,
                depth,
            });
        }
        TeamPartition {
            team_level,
            min_size,
            teams,
            labels,
            excluded_teams: Vec::new(),
        }
    }

    /// Re-expresses the partition over a tree whose node set is a subset
    /// of the original (after leaf pruning). Team membership carries over
    /// by id; depths are recomputed; teams emptied by the restriction are
    /// dropped.
    pub fn restrict_to(&self, old_tree: &OrgTree, new_tree: &OrgTree) -> TeamPartition {
        let mut teams = Vec::new();
        let mut labels = vec![NodeLabel::Excluded; new_tree.len()];
        for ix in 0..new_tree.len() as u32 {
            let old_ix = old_tree
                .index_of(new_tree.id(ix).as_str())
                .expect("restricted tree nodes exist in the original");
            if matches!(self.labels[old_ix as usize], NodeLabel::Leadership) {
                labels[ix as usize] = NodeLabel::Leadership;
            }
        }
        for team in &self.teams {
            let members: Vec<NodeIx> = team
                .members
                .iter()
                .filter_map(|&m| new_tree.index_of(old_tree.id(m).as_str()))
                .collect();
            if members.is_empty() {
                continue;
            }
            let root_ix = match new_tree.index_of(team.id.as_str()) {
                Some(r) => r,
                None => continue,
            };
            let base = new_tree.level_ix(root_ix);
            let depth = members.iter().map(|&m| new_tree.level_ix(m) - base).max().unwrap_or(0);
            let team_ix = teams.len() as u32;
            for &m in &members {
                labels[m as usize] = NodeLabel::Member(team_ix);
            }
            teams.push(Team {
                id: team.id.clone(),
                division: team.division.clone(),
                root_ix,
                members,
                depth,
            });
        }
        TeamPartition {
            team_level: self.team_level,
            min_size: self.min_size,
            teams,
            labels,
            excluded_teams: self.excluded_teams.clone(),
        }
    }
}

/// Record of the cleaning steps applied while assembling a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningReport {
    /// Nodes present only in the communication data, dropped.
    pub n_comm_only: usize,
    /// Nodes present only in the tree, dropped.
    pub n_tree_only: usize,
    /// Subtrees re-attached to their nearest surviving ancestor.
    pub n_reattached: usize,
    /// Silent terminal nodes removed (over all fixpoint passes).
    pub n_pruned_leaves: usize,
    /// Edges added to connect silent internal nodes.
    pub n_hub_edges_added: usize,
    /// The added `(src, dst)` pairs.
    pub hub_edges: Vec<(EmployeeId, EmployeeId)>,
}

/// Configuration and bookkeeping carried alongside a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub team_level: u32,
    pub min_team_size: usize,
    pub cleaning: CleaningReport,
}

/// A harmonized organizational dataset: tree, communication graph, and
/// team partition over one shared node set.
///
/// The tree and graph hold identical id vectors, so a [`NodeIx`] is valid
/// in both.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub tree: OrgTree,
    pub comm: CommGraph,
    pub teams: TeamPartition,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(
        tree: OrgTree,
        comm: CommGraph,
        teams: TeamPartition,
        provenance: Provenance,
    ) -> Result<Self, OrgError> {
        if tree.ids() != comm.ids() {
            let example = tree
                .ids()
                .iter()
                .find(|id| comm.index_of(id.as_str()).is_none())
                .or_else(|| comm.ids().iter().find(|id| !tree.contains(id.as_str())))
                .map(|id| id.as_str().to_owned())
                .unwrap_or_default();
            return Err(OrgError::NodeSetMismatch(example));
        }
        Ok(Dataset {
            tree,
            comm,
            teams,
            provenance,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.tree.len()
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// The shared tree fixture: child -> parent edges
    /// `a1->A, a2->A, b1->B, c1->a1, A->R, B->R`.
    pub(crate) fn fixture_tree() -> OrgTree {
        let edges: Vec<(EmployeeId, EmployeeId)> = [
            ("A", "R"),
            ("B", "R"),
            ("a1", "A"),
            ("a2", "A"),
            ("b1", "B"),
            ("c1", "a1"),
        ]
        .iter()
        .map(|&(c, p)| (EmployeeId::from(c), EmployeeId::from(p)))
        .collect();
        OrgTree::from_edges(&edges).unwrap()
    }

    /// The shared communication fixture over the tree's node set:
    /// `a1->a2:5, a2->a1:3, a1->b1:2, A->a1:7, c1->A:1`.
    pub(crate) fn fixture_comm() -> CommGraph {
        let nodes: Vec<EmployeeId> = ["A", "B", "R", "a1", "a2", "b1", "c1"]
            .iter()
            .map(|&s| EmployeeId::from(s))
            .collect();
        let edges: Vec<(EmployeeId, EmployeeId, u64)> = [
            ("a1", "a2", 5),
            ("a2", "a1", 3),
            ("a1", "b1", 2),
            ("A", "a1", 7),
            ("c1", "A", 1),
        ]
        .iter()
        .map(|&(s, d, w)| (EmployeeId::from(s), EmployeeId::from(d), w))
        .collect();
        CommGraph::with_nodes(nodes, &edges).unwrap()
    }

    /// Fixture dataset with `team_level = 1`, `min_size = 1`:
    /// teams `A = {A, a1, a2, c1}` and `B = {B, b1}`, leadership `{R}`.
    pub(crate) fn fixture_dataset() -> Dataset {
        let tree = fixture_tree();
        let comm = fixture_comm();
        let teams = TeamPartition::extract(&tree, 1, 1);
        Dataset::new(
            tree,
            comm,
            teams,
            Provenance {
                team_level: 1,
                min_team_size: 1,
                ..Provenance::default()
            },
        )
        .unwrap()
    }
}
