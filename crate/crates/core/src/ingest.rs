//! CSV parsing and the cleaning pipeline that turns raw reporting and
//! communication edge lists into a harmonized [`Dataset`].
//!
//! Pipeline order (fixed, recorded in provenance): parse both files,
//! build the tree, restrict both structures to the shared id set
//! (re-attaching orphaned subtrees to their nearest surviving ancestor),
//! extract teams, prune silent terminal nodes to a fixpoint, then attach
//! one hub edge to every remaining silent node so the graph stays
//! connected.
//!
//! File formats (UTF-8, comma-separated, exact headers):
//! * `org.csv` — `child_id,parent_id`
//! * `comm.csv` — `src_id,dst_id,count` with positive integer counts;
//!   duplicate `(src, dst)` rows are summed
//! * a serialized dataset directory additionally holds `teams.csv`
//!   (`node_id,team_id,division_id,label`) and `provenance.json`.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::IngestError;
use crate::org::{
    CleaningReport, CommGraph, Dataset, EmployeeId, NodeLabel, OrgTree, Provenance, TeamPartition,
};

fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Options for [`assemble_dataset`]. Defaults: team level 2, minimum
/// team size 100, root inferred.
#[derive(Debug, Clone)]
pub struct AssembleOptions {
    pub team_level: u32,
    pub min_team_size: usize,
    /// Explicit root id; when absent the root is inferred as the unique
    /// node that never appears as a child.
    pub root: Option<String>,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            team_level: 2,
            min_team_size: 100,
            root: None,
        }
    }
}

/// Parses a reporting-edge CSV into `(child, parent)` pairs.
pub fn parse_org_csv(path: &Path) -> Result<Vec<(EmployeeId, EmployeeId)>, IngestError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    expect_header(&mut reader, path, "child_id,parent_id")?;
    let mut edges = Vec::new();
    let mut line = String::new();
    let mut lineno = 1;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
            break;
        }
        lineno += 1;
        let row = line.trim_end_matches(['\n', '\r']);
        if row.trim().is_empty() {
            continue;
        }
        let (child, parent) = split2(row).ok_or(IngestError::MalformedRow {
            path: path.display().to_string(),
            line: lineno,
        })?;
        if child.is_empty() || parent.is_empty() {
            return Err(IngestError::MalformedRow {
                path: path.display().to_string(),
                line: lineno,
            });
        }
        edges.push((EmployeeId::from(child), EmployeeId::from(parent)));
    }
    Ok(edges)
}

/// Parses a communication CSV into a [`CommGraph`] whose node set is the
/// set of edge endpoints. Duplicate `(src, dst)` rows are summed.
pub fn parse_comm_csv(path: &Path) -> Result<CommGraph, IngestError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    expect_header(&mut reader, path, "src_id,dst_id,count")?;

    let mut lookup: HashMap<String, u32> = HashMap::new();
    let mut ids: Vec<EmployeeId> = Vec::new();
    let mut intern = |s: &str, ids: &mut Vec<EmployeeId>| -> u32 {
        if let Some(&i) = lookup.get(s) {
            return i;
        }
        let i = ids.len() as u32;
        ids.push(EmployeeId::from(s));
        lookup.insert(s.to_owned(), i);
        i
    };

    let mut edges: Vec<(u32, u32, u64)> = Vec::new();
    let mut line = String::new();
    let mut lineno = 1;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
            break;
        }
        lineno += 1;
        let row = line.trim_end_matches(['\n', '\r']);
        if row.trim().is_empty() {
            continue;
        }
        let malformed = || IngestError::MalformedRow {
            path: path.display().to_string(),
            line: lineno,
        };
        let (src, rest) = row.split_once(',').ok_or_else(malformed)?;
        let (dst, count) = rest.split_once(',').ok_or_else(malformed)?;
        let (src, dst, count) = (src.trim(), dst.trim(), count.trim());
        if src.is_empty() || dst.is_empty() || count.contains(',') {
            return Err(malformed());
        }
        let count: i64 = count.parse().map_err(|_| malformed())?;
        if count <= 0 {
            return Err(IngestError::NegativeCount {
                path: path.display().to_string(),
                line: lineno,
            });
        }
        if src == dst {
            return Err(IngestError::SelfLoop {
                path: path.display().to_string(),
                line: lineno,
                id: src.to_owned(),
            });
        }
        let s = intern(src, &mut ids);
        let d = intern(dst, &mut ids);
        edges.push((s, d, count as u64));
    }

    // Re-index into canonical (lexicographic) order.
    let mut perm: Vec<u32> = (0..ids.len() as u32).collect();
    perm.sort_unstable_by(|&a, &b| ids[a as usize].cmp(&ids[b as usize]));
    let mut rank = vec![0u32; ids.len()];
    for (new, &old) in perm.iter().enumerate() {
        rank[old as usize] = new as u32;
    }
    let mut sorted_ids: Vec<EmployeeId> = Vec::with_capacity(ids.len());
    for &old in &perm {
        sorted_ids.push(ids[old as usize].clone());
    }
    for e in &mut edges {
        e.0 = rank[e.0 as usize];
        e.1 = rank[e.1 as usize];
    }
    let lookup = sorted_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    Ok(CommGraph::from_indexed(sorted_ids, lookup, edges))
}

fn expect_header(
    reader: &mut impl BufRead,
    path: &Path,
    expected: &str,
) -> Result<(), IngestError> {
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|e| io_err(path, e))?;
    if header.trim_end_matches(['\n', '\r']).trim() != expected {
        return Err(IngestError::MissingHeader {
            path: path.display().to_string(),
            expected: expected.to_owned(),
        });
    }
    Ok(())
}

fn split2(row: &str) -> Option<(&str, &str)> {
    let (a, b) = row.split_once(',')?;
    if b.contains(',') {
        return None;
    }
    Some((a.trim(), b.trim()))
}

/// Restricts both structures to the shared id set. Orphaned subtrees
/// (kept nodes whose parent was dropped) are re-attached to their
/// nearest surviving ancestor; if no ancestor survives they are attached
/// under the surviving node of minimal level (ties by id), which becomes
/// the new root.
pub fn harmonize(
    tree: &OrgTree,
    comm: &CommGraph,
) -> Result<(OrgTree, CommGraph, CleaningReport), IngestError> {
    let shared: Vec<u32> = (0..tree.len() as u32)
        .filter(|&ix| comm.index_of(tree.id(ix).as_str()).is_some())
        .collect();
    if shared.is_empty() {
        return Err(IngestError::EmptyIntersection);
    }
    let n_tree_only = tree.len() - shared.len();
    let n_comm_only = comm.len() - shared.len();

    let mut kept = vec![false; tree.len()];
    for &ix in &shared {
        kept[ix as usize] = true;
    }
    // New root: minimal original level, then lexicographically first
    // (index order is id order).
    let new_root = *shared
        .iter()
        .min_by_key(|&&ix| tree.level_ix(ix))
        .expect("non-empty intersection");

    let mut n_reattached = 0;
    let mut edges: Vec<(EmployeeId, EmployeeId)> = Vec::with_capacity(shared.len());
    for &ix in &shared {
        if ix == new_root {
            continue;
        }
        let mut anc = tree.parent_ix(ix);
        while let Some(a) = anc {
            if kept[a as usize] {
                break;
            }
            anc = tree.parent_ix(a);
        }
        let parent = anc.filter(|&a| kept[a as usize]).unwrap_or(new_root);
        if Some(parent) != tree.parent_ix(ix) {
            n_reattached += 1;
        }
        edges.push((tree.id(ix).clone(), tree.id(parent).clone()));
    }
    let new_tree = if edges.is_empty() {
        OrgTree::singleton(tree.id(new_root).clone())
    } else {
        OrgTree::from_edges_rooted(&edges, tree.id(new_root).as_str())?
    };

    let nodes: Vec<EmployeeId> = new_tree.ids().to_vec();
    let lookup: HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    let mut comm_edges = Vec::new();
    for (u, v, w) in comm.edges_ix() {
        if let (Some(&nu), Some(&nv)) = (
            lookup.get(comm.id(u).as_str()),
            lookup.get(comm.id(v).as_str()),
        ) {
            comm_edges.push((nu, nv, w));
        }
    }
    let new_comm = CommGraph::from_indexed(nodes, lookup, comm_edges);

    Ok((
        new_tree,
        new_comm,
        CleaningReport {
            n_comm_only,
            n_tree_only,
            n_reattached,
            ..CleaningReport::default()
        },
    ))
}

/// Repeatedly removes terminal nodes with zero total communication until
/// none remain. The root is never removed.
pub fn prune_silent_leaves(tree: &OrgTree, comm: &CommGraph) -> (OrgTree, CommGraph, usize) {
    debug_assert_eq!(tree.ids(), comm.ids());
    let n = tree.len();
    let mut child_count: Vec<u32> = (0..n as u32).map(|ix| tree.children_ix(ix).len() as u32).collect();
    let silent: Vec<bool> = (0..n as u32)
        .map(|ix| comm.out_strength(ix) + comm.in_strength(ix) == 0)
        .collect();

    let mut removed = vec![false; n];
    let mut queue: Vec<u32> = (0..n as u32)
        .filter(|&ix| child_count[ix as usize] == 0 && silent[ix as usize] && ix != tree.root_ix())
        .collect();
    let mut n_pruned = 0;
    while let Some(ix) = queue.pop() {
        if removed[ix as usize] {
            continue;
        }
        removed[ix as usize] = true;
        n_pruned += 1;
        if let Some(p) = tree.parent_ix(ix) {
            child_count[p as usize] -= 1;
            if child_count[p as usize] == 0 && silent[p as usize] && p != tree.root_ix() {
                queue.push(p);
            }
        }
    }
    if n_pruned == 0 {
        return (tree.clone(), comm.clone(), 0);
    }

    let mut edges = Vec::new();
    let mut nodes = Vec::new();
    for ix in 0..n as u32 {
        if removed[ix as usize] {
            continue;
        }
        nodes.push(tree.id(ix).clone());
        if let Some(p) = tree.parent_ix(ix) {
            edges.push((tree.id(ix).clone(), tree.id(p).clone()));
        }
    }
    let new_tree = if edges.is_empty() {
        OrgTree::singleton(tree.root_id().clone())
    } else {
        OrgTree::from_edges(&edges).expect("pruning a tree leaves a tree")
    };
    // Removed nodes are silent, so no edges touched them.
    let lookup: HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    let comm_edges: Vec<(u32, u32, u64)> = comm
        .edges_ix()
        .map(|(u, v, w)| (lookup[comm.id(u).as_str()], lookup[comm.id(v).as_str()], w))
        .collect();
    let new_comm = CommGraph::from_indexed(nodes, lookup, comm_edges);
    (new_tree, new_comm, n_pruned)
}

/// Adds one weight-1 edge from a hub to every node with zero total
/// communication. The hub is the highest out-degree member of the silent
/// node's team (ties broken by id); silent nodes without a team
/// (leadership, excluded) use the whole-graph hub. Returns the new graph
/// and the added edges.
pub fn attach_silent_internal(
    comm: &CommGraph,
    tree: &OrgTree,
    teams: &TeamPartition,
) -> (CommGraph, Vec<(EmployeeId, EmployeeId)>) {
    debug_assert_eq!(tree.ids(), comm.ids());
    let n = comm.len();
    let silent: Vec<u32> = (0..n as u32)
        .filter(|&ix| comm.out_strength(ix) + comm.in_strength(ix) == 0)
        .collect();
    if silent.is_empty() {
        return (comm.clone(), Vec::new());
    }

    // Hub = argmax out-degree; ascending index scan with strict `>`
    // keeps the lexicographically first id on ties.
    let hub_of = |members: &mut dyn Iterator<Item = u32>, skip: u32| -> Option<u32> {
        let mut best: Option<(usize, u32)> = None;
        for m in members {
            if m == skip {
                continue;
            }
            let d = comm.out_degree(m);
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, m));
            }
        }
        best.map(|(_, m)| m)
    };

    let mut added = Vec::new();
    let mut extra = Vec::new();
    for &ix in &silent {
        let team_hub = teams
            .team_of(ix)
            .and_then(|t| hub_of(&mut teams.teams()[t as usize].members.iter().copied(), ix));
        let hub = match team_hub {
            Some(h) if comm.out_degree(h) > 0 => Some(h),
            _ => hub_of(&mut (0..n as u32), ix),
        };
        if let Some(h) = hub {
            extra.push((h, ix, 1u64));
            added.push((comm.id(h).clone(), comm.id(ix).clone()));
        }
    }
    if extra.is_empty() {
        return (comm.clone(), Vec::new());
    }

    let nodes: Vec<EmployeeId> = comm.ids().to_vec();
    let lookup: HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    let mut edges: Vec<(u32, u32, u64)> = comm.edges_ix().collect();
    edges.extend(extra);
    (CommGraph::from_indexed(nodes, lookup, edges), added)
}

/// Runs the full pipeline on two CSV files.
///
/// The communication file can only name employees that appear on an
/// edge, so tree nodes without any email record are treated as present
/// but silent, provided the two files share at least one id. Files with
/// no overlap at all fail with `EmptyIntersection`.
pub fn assemble_dataset(
    org_path: &Path,
    comm_path: &Path,
    opts: &AssembleOptions,
) -> Result<Dataset, IngestError> {
    let edges = parse_org_csv(org_path)?;
    let comm = parse_comm_csv(comm_path)?;
    let tree = match &opts.root {
        Some(r) => OrgTree::from_edges_rooted(&edges, r)?,
        None => OrgTree::from_edges(&edges)?,
    };
    if !tree.ids().iter().any(|id| comm.index_of(id.as_str()).is_some()) {
        return Err(IngestError::EmptyIntersection);
    }
    let comm = augment_comm_nodes(&comm, tree.ids());
    assemble_from_parts(tree, comm, opts)
}

/// Extends the node set of `comm` with `extra` ids (as silent nodes).
fn augment_comm_nodes(comm: &CommGraph, extra: &[EmployeeId]) -> CommGraph {
    let mut nodes: Vec<EmployeeId> = comm.ids().to_vec();
    nodes.extend(extra.iter().cloned());
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.len() == comm.len() {
        return comm.clone();
    }
    let lookup: HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    let edges: Vec<(u32, u32, u64)> = comm
        .edges_ix()
        .map(|(u, v, w)| (lookup[comm.id(u).as_str()], lookup[comm.id(v).as_str()], w))
        .collect();
    CommGraph::from_indexed(nodes, lookup, edges)
}

/// Pipeline stages after parsing; also used to re-clean in-memory data.
pub fn assemble_from_parts(
    tree: OrgTree,
    comm: CommGraph,
    opts: &AssembleOptions,
) -> Result<Dataset, IngestError> {
    let (tree, comm, mut report) = harmonize(&tree, &comm)?;
    let teams = TeamPartition::extract(&tree, opts.team_level, opts.min_team_size);
    let (pruned_tree, pruned_comm, n_pruned) = prune_silent_leaves(&tree, &comm);
    report.n_pruned_leaves = n_pruned;
    let teams = teams.restrict_to(&tree, &pruned_tree);
    let (final_comm, hub_edges) = attach_silent_internal(&pruned_comm, &pruned_tree, &teams);
    report.n_hub_edges_added = hub_edges.len();
    report.hub_edges = hub_edges;
    let provenance = Provenance {
        team_level: opts.team_level,
        min_team_size: opts.min_team_size,
        cleaning: report,
    };
    Ok(Dataset::new(pruned_tree, final_comm, teams, provenance)?)
}

/// Writes a dataset as a directory: `org.csv`, `comm.csv`, `teams.csv`,
/// `provenance.json`. Rows are emitted in canonical id order, so
/// identical datasets serialize byte-identically.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), IngestError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_atomic(&dir.join("org.csv"), org_csv_string(&dataset.tree).as_bytes())?;
    write_atomic(&dir.join("comm.csv"), comm_csv_string(&dataset.comm).as_bytes())?;
    write_atomic(&dir.join("teams.csv"), teams_csv_string(dataset).as_bytes())?;
    let prov = serde_json::to_string_pretty(&dataset.provenance).expect("provenance serializes");
    write_atomic(&dir.join("provenance.json"), prov.as_bytes())?;
    Ok(())
}

/// Writes `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn org_csv_string(tree: &OrgTree) -> String {
    let mut out = String::from("child_id,parent_id\n");
    for (child, parent) in tree.edges() {
        out.push_str(child.as_str());
        out.push(',');
        out.push_str(parent.as_str());
        out.push('\n');
    }
    out
}

pub fn comm_csv_string(comm: &CommGraph) -> String {
    let mut out = String::from("src_id,dst_id,count\n");
    for (u, v, w) in comm.edges_ix() {
        out.push_str(comm.id(u).as_str());
        out.push(',');
        out.push_str(comm.id(v).as_str());
        out.push(',');
        out.push_str(&w.to_string());
        out.push('\n');
    }
    out
}

pub fn teams_csv_string(dataset: &Dataset) -> String {
    let mut out = String::from("node_id,team_id,division_id,label\n");
    let teams = &dataset.teams;
    for ix in 0..dataset.tree.len() as u32 {
        let (team, division, label) = match teams.label(ix) {
            NodeLabel::Member(t) => {
                let team = &teams.teams()[t as usize];
                (team.id.as_str(), team.division.as_str(), "member")
            }
            NodeLabel::Leadership => ("", "", "leadership"),
            NodeLabel::Excluded => ("", "", "excluded"),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            dataset.tree.id(ix).as_str(),
            team,
            division,
            label
        ));
    }
    out
}

/// Reads a dataset directory written by [`write_dataset`]. The team
/// partition is restored from `teams.csv` verbatim rather than
/// re-extracted, so post-pruning memberships survive the round trip.
pub fn read_dataset(dir: &Path) -> Result<Dataset, IngestError> {
    let edges = parse_org_csv(&dir.join("org.csv"))?;
    let comm = parse_comm_csv(&dir.join("comm.csv"))?;
    let prov_path = dir.join("provenance.json");
    let prov_bytes = fs::read(&prov_path).map_err(|e| io_err(&prov_path, e))?;
    let provenance: Provenance = serde_json::from_slice(&prov_bytes).map_err(|e| {
        io_err(
            &prov_path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        )
    })?;

    let tree = if edges.is_empty() {
        // Singleton dataset: the sole node is in comm.csv.
        OrgTree::singleton(
            comm.ids()
                .first()
                .cloned()
                .ok_or(IngestError::EmptyIntersection)?,
        )
    } else {
        OrgTree::from_edges(&edges)?
    };

    // comm.csv only lists edge endpoints; silent nodes are implied by
    // the tree. Rebuild over the tree's node set.
    let nodes: Vec<EmployeeId> = tree.ids().to_vec();
    let lookup: HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    let mut comm_edges = Vec::with_capacity(comm.edge_count());
    for (u, v, w) in comm.edges_ix() {
        let nu = *lookup
            .get(comm.id(u).as_str())
            .ok_or_else(|| crate::error::OrgError::NodeSetMismatch(comm.id(u).as_str().to_owned()))
            .map_err(IngestError::Org)?;
        let nv = lookup[comm.id(v).as_str()];
        comm_edges.push((nu, nv, w));
    }
    let comm = CommGraph::from_indexed(nodes, lookup, comm_edges);

    let teams = read_teams_csv(&dir.join("teams.csv"), &tree, &provenance)?;
    Ok(Dataset::new(tree, comm, teams, provenance)?)
}

fn read_teams_csv(
    path: &Path,
    tree: &OrgTree,
    prov: &Provenance,
) -> Result<TeamPartition, IngestError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    expect_header(&mut reader, path, "node_id,team_id,division_id,label")?;
    // (team id -> (division, members)) keyed in id order via BTreeMap.
    let mut members: std::collections::BTreeMap<EmployeeId, (EmployeeId, Vec<u32>)> =
        std::collections::BTreeMap::new();
    let mut leadership = Vec::new();
    let mut line = String::new();
    let mut lineno = 1;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
            break;
        }
        lineno += 1;
        let row = line.trim_end_matches(['\n', '\r']);
        if row.trim().is_empty() {
            continue;
        }
        let malformed = || IngestError::MalformedRow {
            path: path.display().to_string(),
            line: lineno,
        };
        let mut fields = row.split(',');
        let node = fields.next().ok_or_else(malformed)?.trim();
        let team = fields.next().ok_or_else(malformed)?.trim();
        let division = fields.next().ok_or_else(malformed)?.trim();
        let label = fields.next().ok_or_else(malformed)?.trim();
        if fields.next().is_some() {
            return Err(malformed());
        }
        let ix = tree
            .index_of(node)
            .ok_or_else(|| crate::error::OrgError::UnknownNode(node.to_owned()))
            .map_err(IngestError::Org)?;
        match label {
            "member" => {
                members
                    .entry(EmployeeId::from(team))
                    .or_insert_with(|| (EmployeeId::from(division), Vec::new()))
                    .1
                    .push(ix);
            }
            "leadership" => leadership.push(ix),
            "excluded" => {}
            _ => return Err(malformed()),
        }
    }
    Ok(TeamPartition::from_memberships(
        tree,
        prov.team_level,
        prov.min_team_size,
        members,
        &leadership,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::org::testutil::{fixture_comm, fixture_tree};

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parse_org_rows() {
        let f = write_tmp("child_id,parent_id\na1,A\n");
        let edges = parse_org_csv(f.path()).unwrap();
        assert_eq!(edges, vec![("a1".into(), "A".into())]);
    }

    #[test]
    fn parse_org_empty_data() {
        let f = write_tmp("child_id,parent_id\n");
        assert!(parse_org_csv(f.path()).unwrap().is_empty());
    }

    #[test]
    fn parse_org_one_field_row() {
        let f = write_tmp("child_id,parent_id\na1\n");
        assert!(matches!(
            parse_org_csv(f.path()),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn parse_org_bad_header() {
        let f = write_tmp("kid,boss\na1,A\n");
        assert!(matches!(parse_org_csv(f.path()), Err(IngestError::MissingHeader { .. })));
    }

    #[test]
    fn parse_comm_sums_duplicates() {
        let f = write_tmp("src_id,dst_id,count\nu,v,3\nu,v,2\n");
        let g = parse_comm_csv(f.path()).unwrap();
        assert_eq!(g.weight("u", "v"), 5);
    }

    #[test]
    fn parse_comm_rejects_self_loop_and_zero() {
        let f = write_tmp("src_id,dst_id,count\nu,u,1\n");
        assert!(matches!(parse_comm_csv(f.path()), Err(IngestError::SelfLoop { .. })));
        let f = write_tmp("src_id,dst_id,count\nu,v,0\n");
        assert!(matches!(parse_comm_csv(f.path()), Err(IngestError::NegativeCount { .. })));
        let f = write_tmp("src_id,dst_id,count\nu,v,-2\n");
        assert!(matches!(parse_comm_csv(f.path()), Err(IngestError::NegativeCount { .. })));
        let f = write_tmp("src_id,dst_id,count\nu,v,x\n");
        assert!(matches!(parse_comm_csv(f.path()), Err(IngestError::MalformedRow { .. })));
    }

    #[test]
    fn harmonize_drops_comm_only_nodes() {
        let tree = fixture_tree();
        let mut edges: Vec<(EmployeeId, EmployeeId, u64)> = vec![
            ("a1".into(), "a2".into(), 5),
            ("a2".into(), "a1".into(), 3),
            ("a1".into(), "b1".into(), 2),
            ("A".into(), "a1".into(), 7),
            ("c1".into(), "A".into(), 1),
        ];
        edges.push(("a1".into(), "x".into(), 9));
        let comm = CommGraph::from_edges(&edges).unwrap();
        let (t2, c2, report) = harmonize(&tree, &comm).unwrap();
        assert!(!c2.ids().iter().any(|i| i.as_str() == "x"));
        assert_eq!(report.n_comm_only, 1);
        // R and B never communicate, so they are tree-only.
        assert_eq!(report.n_tree_only, 2);
        assert_eq!(t2.len(), c2.len());
    }

    #[test]
    fn harmonize_identity() {
        let tree = fixture_tree();
        let comm = fixture_comm();
        let (t2, c2, report) = harmonize(&tree, &comm).unwrap();
        assert_eq!(t2, tree);
        assert_eq!(c2, comm);
        assert_eq!(report, CleaningReport::default());
    }

    #[test]
    fn harmonize_reattaches_orphans() {
        // Drop A from the comm node set: a1 and a2 re-attach under R.
        let tree = fixture_tree();
        let nodes: Vec<EmployeeId> = ["B", "R", "a1", "a2", "b1", "c1"]
            .iter()
            .map(|&s| EmployeeId::from(s))
            .collect();
        let edges: Vec<(EmployeeId, EmployeeId, u64)> = vec![
            ("a1".into(), "a2".into(), 5),
            ("b1".into(), "R".into(), 1),
            ("c1".into(), "B".into(), 1),
        ];
        let comm = CommGraph::with_nodes(nodes, &edges).unwrap();
        let (t2, _, report) = harmonize(&tree, &comm).unwrap();
        assert_eq!(report.n_tree_only, 1);
        assert_eq!(report.n_reattached, 2);
        assert_eq!(t2.parent("a1").unwrap().unwrap().as_str(), "R");
        assert_eq!(t2.parent("a2").unwrap().unwrap().as_str(), "R");
        assert_eq!(t2.parent("c1").unwrap().unwrap().as_str(), "a1");
        assert_eq!(t2.level("c1").unwrap(), 2);
    }

    #[test]
    fn harmonize_empty_intersection() {
        let tree = fixture_tree();
        let comm = CommGraph::from_edges(&[("x".into(), "y".into(), 1)]).unwrap();
        assert!(matches!(harmonize(&tree, &comm), Err(IngestError::EmptyIntersection)));
    }

    #[test]
    fn prune_removes_silent_leaf() {
        // Extra silent leaf z under B.
        let mut edges: Vec<(EmployeeId, EmployeeId)> = fixture_tree()
            .edges()
            .map(|(c, p)| (c.clone(), p.clone()))
            .collect();
        edges.push(("z".into(), "B".into()));
        let tree = OrgTree::from_edges(&edges).unwrap();
        let mut nodes: Vec<EmployeeId> = tree.ids().to_vec();
        nodes.sort();
        let comm_edges: Vec<(EmployeeId, EmployeeId, u64)> = vec![
            ("a1".into(), "a2".into(), 5),
            ("a2".into(), "a1".into(), 3),
            ("a1".into(), "b1".into(), 2),
            ("A".into(), "a1".into(), 7),
            ("c1".into(), "A".into(), 1),
        ];
        let comm = CommGraph::with_nodes(nodes, &comm_edges).unwrap();
        let (t2, c2, n) = prune_silent_leaves(&tree, &comm);
        assert_eq!(n, 1);
        assert!(!t2.contains("z"));
        assert_eq!(t2.ids(), c2.ids());
    }

    #[test]
    fn prune_cascades_to_fixpoint() {
        // Silent chain y -> z under B: z is a leaf under y.
        let mut edges: Vec<(EmployeeId, EmployeeId)> = fixture_tree()
            .edges()
            .map(|(c, p)| (c.clone(), p.clone()))
            .collect();
        edges.push(("y".into(), "B".into()));
        edges.push(("z".into(), "y".into()));
        let tree = OrgTree::from_edges(&edges).unwrap();
        let nodes: Vec<EmployeeId> = tree.ids().to_vec();
        let comm_edges: Vec<(EmployeeId, EmployeeId, u64)> = vec![
            ("a1".into(), "a2".into(), 5),
            ("a1".into(), "b1".into(), 2),
            ("A".into(), "a1".into(), 7),
            ("c1".into(), "A".into(), 1),
        ];
        let comm = CommGraph::with_nodes(nodes, &comm_edges).unwrap();
        let (t2, _, n) = prune_silent_leaves(&tree, &comm);
        assert_eq!(n, 2);
        assert!(!t2.contains("y") && !t2.contains("z"));
    }

    #[test]
    fn prune_is_idempotent_and_keeps_talkative_leaves() {
        let tree = fixture_tree();
        let comm = fixture_comm();
        let (t1, c1, n1) = prune_silent_leaves(&tree, &comm);
        // b1 receives and c1 sends; only nothing is silent terminal here
        // (R and B are internal).
        assert_eq!(n1, 0);
        let (_, _, n2) = prune_silent_leaves(&t1, &c1);
        assert_eq!(n2, 0);
    }

    #[test]
    fn attach_silent_uses_team_hub_then_global() {
        // B is internal and fully silent; TB's only other member b1 has
        // out-degree 0, so the whole-graph hub a1 (out-degree 2) is used.
        let tree = fixture_tree();
        let comm = fixture_comm();
        let teams = TeamPartition::extract(&tree, 1, 1);
        let (c2, added) = attach_silent_internal(&comm, &tree, &teams);
        assert_eq!(added.len(), 2); // B and R are silent
        assert!(added.iter().all(|(src, _)| src.as_str() == "a1"));
        for (src, dst) in &added {
            assert_eq!(c2.weight(src.as_str(), dst.as_str()), 1);
        }
        let b = c2.index_of("B").unwrap();
        assert_eq!(c2.in_strength(b), 1);
    }

    #[test]
    fn attach_noop_without_silent_nodes() {
        let tree = fixture_tree();
        let comm = fixture_comm();
        let teams = TeamPartition::extract(&tree, 1, 1);
        let (c1, _) = attach_silent_internal(&comm, &tree, &teams);
        let (c2, added) = attach_silent_internal(&c1, &tree, &teams);
        assert!(added.is_empty());
        assert_eq!(c1, c2);
    }

    #[test]
    fn assemble_fixture_files() {
        let org = write_tmp("child_id,parent_id\nA,R\nB,R\na1,A\na2,A\nb1,B\nc1,a1\n");
        let comm = write_tmp("src_id,dst_id,count\na1,a2,5\na2,a1,3\na1,b1,2\nA,a1,7\nc1,A,1\n");
        let opts = AssembleOptions {
            team_level: 1,
            min_team_size: 1,
            root: None,
        };
        let ds = assemble_dataset(org.path(), comm.path(), &opts).unwrap();
        assert_eq!(ds.n_nodes(), 7);
        // 5 original edges plus hub edges for silent B and R.
        assert_eq!(ds.comm.edge_count(), 7);
        assert_eq!(ds.teams.teams().len(), 2);
        assert_eq!(ds.provenance.cleaning.n_hub_edges_added, 2);
    }

    #[test]
    fn assemble_empty_intersection() {
        let org = write_tmp("child_id,parent_id\na,r\n");
        let comm = write_tmp("src_id,dst_id,count\nx,y,1\n");
        assert!(matches!(
            assemble_dataset(org.path(), comm.path(), &AssembleOptions::default()),
            Err(IngestError::EmptyIntersection)
        ));
    }

    #[test]
    fn dataset_round_trip() {
        let org = write_tmp("child_id,parent_id\nA,R\nB,R\na1,A\na2,A\nb1,B\nc1,a1\n");
        let comm = write_tmp("src_id,dst_id,count\na1,a2,5\na2,a1,3\na1,b1,2\nA,a1,7\nc1,A,1\n");
        let opts = AssembleOptions {
            team_level: 1,
            min_team_size: 1,
            root: None,
        };
        let ds = assemble_dataset(org.path(), comm.path(), &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(ds, back);

        // Serialization is deterministic byte for byte.
        let dir2 = tempfile::tempdir().unwrap();
        write_dataset(&back, dir2.path()).unwrap();
        for name in ["org.csv", "comm.csv", "teams.csv", "provenance.json"] {
            let a = fs::read(dir.path().join(name)).unwrap();
            let b = fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }
}
