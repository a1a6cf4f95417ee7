//! Communication-structure measures: degrees and strengths, power-law
//! fits, weighted modularity, team mixing, EI indices, reciprocity,
//! positional statistics, centralities, group communication rates, and
//! small statistical helpers (OLS, Pearson, binned summaries).
//!
//! Everything is a pure function of an immutable [`Dataset`] or
//! [`CommGraph`]. Per-team and per-node loops are parallelized, with all
//! floating-point reductions in a fixed order so results are identical
//! for any thread count.

use std::collections::BTreeMap;

use crate::error::MeasureError;
use crate::org::{CommGraph, Dataset, EmployeeId, NodeIx, OrgTree, Team};
use crate::par;

// ---------------------------------------------------------------------
// Degrees and strengths

/// Partner counts and message volumes of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DegreeRecord {
    /// Distinct senders to the node.
    pub in_degree: usize,
    /// Distinct recipients of the node.
    pub out_degree: usize,
    /// Distinct partners with any message in either direction.
    pub total_degree: usize,
    pub in_strength: u64,
    pub out_strength: u64,
    pub total_strength: u64,
}

/// Per-node degree and strength records, indexed like the graph.
pub fn degree_strength(comm: &CommGraph) -> Vec<DegreeRecord> {
    par::map_indexed(comm.len(), |u| {
        let u = u as NodeIx;
        let mut rec = DegreeRecord {
            in_degree: comm.in_degree(u),
            out_degree: comm.out_degree(u),
            ..DegreeRecord::default()
        };
        // Merge the two sorted partner lists to count distinct partners.
        let mut outs = comm.out_edges(u).peekable();
        let mut ins = comm.in_edges(u).peekable();
        loop {
            match (outs.peek().copied(), ins.peek().copied()) {
                (Some((a, w)), Some((b, _))) if a < b => {
                    rec.total_degree += 1;
                    rec.out_strength += w;
                    outs.next();
                }
                (Some((a, _)), Some((b, w))) if b < a => {
                    rec.total_degree += 1;
                    rec.in_strength += w;
                    ins.next();
                }
                (Some((_, wo)), Some((_, wi))) => {
                    rec.total_degree += 1;
                    rec.out_strength += wo;
                    rec.in_strength += wi;
                    outs.next();
                    ins.next();
                }
                (Some((_, w)), None) => {
                    rec.total_degree += 1;
                    rec.out_strength += w;
                    outs.next();
                }
                (None, Some((_, w))) => {
                    rec.total_degree += 1;
                    rec.in_strength += w;
                    ins.next();
                }
                (None, None) => break,
            }
        }
        rec.total_strength = rec.in_strength + rec.out_strength;
        rec
    })
}

// ---------------------------------------------------------------------
// Discrete power-law fit

/// Result of a discrete power-law tail fit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: u64,
    pub ks: f64,
    /// Number of observations at or above `x_min`.
    pub n_tail: usize,
}

/// Hurwitz zeta `sum_{k>=q} k^-alpha` by direct summation with an
/// Euler-Maclaurin tail.
fn hurwitz_zeta(alpha: f64, q: u64) -> f64 {
    debug_assert!(alpha > 1.0 && q >= 1);
    let cutoff = q + 512;
    let mut sum = 0.0;
    for k in q..cutoff {
        sum += (k as f64).powf(-alpha);
    }
    let m = cutoff as f64;
    sum += m.powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * m.powf(-alpha)
        + alpha * m.powf(-alpha - 1.0) / 12.0;
    sum
}

/// Discrete maximum-likelihood exponent for a tail at `x_min` with the
/// given log-sum, by golden-section search on the likelihood.
fn power_law_mle(tail_log_sum: f64, n_tail: usize, x_min: u64) -> f64 {
    let neg_loglik = |a: f64| n_tail as f64 * hurwitz_zeta(a, x_min).ln() + a * tail_log_sum;
    let (mut lo, mut hi) = (1.000_001_f64, 25.0_f64);
    let phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (neg_loglik(x1), neg_loglik(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = neg_loglik(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = neg_loglik(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Fits a discrete power law `P(x) ~ x^-alpha` for `x >= x_min`,
/// choosing `x_min` among the distinct values to minimize the
/// Kolmogorov-Smirnov distance between fitted and empirical tails.
/// Zero values are ignored; needs at least 50 positive, not-all-equal
/// observations.
pub fn fit_power_law(values: &[u64]) -> Result<PowerLawFit, MeasureError> {
    let mut sorted: Vec<u64> = values.iter().copied().filter(|&v| v > 0).collect();
    if sorted.len() < 50 {
        return Err(MeasureError::DegenerateSample(format!(
            "need at least 50 positive values, got {}",
            sorted.len()
        )));
    }
    sorted.sort_unstable();
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(MeasureError::DegenerateSample("all values equal".into()));
    }

    let mut distinct: Vec<(u64, usize)> = Vec::new();
    for &v in &sorted {
        match distinct.last_mut() {
            Some((dv, c)) if *dv == v => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }

    // Candidate x_min values: every distinct value except the largest
    // (a single-point tail cannot be fit).
    let fits = par::map_indexed(distinct.len() - 1, |ci| {
        let x_min = distinct[ci].0;
        let tail = &distinct[ci..];
        let n_tail: usize = tail.iter().map(|&(_, c)| c).sum();
        let log_sum: f64 = tail.iter().map(|&(v, c)| c as f64 * (v as f64).ln()).sum();
        let alpha = power_law_mle(log_sum, n_tail, x_min);

        // zeta(alpha, v + 1) at every distinct tail value, accumulated
        // from the top so the whole sweep costs one zeta evaluation.
        let v_max = tail.last().unwrap().0;
        let mut zeta_above = vec![0.0_f64; tail.len()];
        let mut acc = hurwitz_zeta(alpha, v_max + 1);
        zeta_above[tail.len() - 1] = acc;
        for i in (0..tail.len() - 1).rev() {
            for k in (tail[i].0 + 1)..=tail[i + 1].0 {
                acc += (k as f64).powf(-alpha);
            }
            zeta_above[i] = acc;
        }
        let z = zeta_above[0] + (x_min as f64).powf(-alpha);

        let mut ks = 0.0_f64;
        let mut cum = 0usize;
        for (i, &(_, c)) in tail.iter().enumerate() {
            cum += c;
            let emp = cum as f64 / n_tail as f64;
            let fit = 1.0 - zeta_above[i] / z;
            ks = ks.max((emp - fit).abs());
        }
        (ks, x_min, alpha, n_tail)
    });

    let best = fits
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one candidate");
    Ok(PowerLawFit {
        alpha: best.2,
        x_min: best.1,
        ks: best.0,
        n_tail: best.3,
    })
}

// ---------------------------------------------------------------------
// Modularity

/// Newman weighted modularity of a node partition on the symmetrized
/// graph `W = A + A^T`. Empty graphs score 0 by convention.
pub fn weighted_modularity(comm: &CommGraph, labels: &[u32]) -> f64 {
    assert_eq!(labels.len(), comm.len(), "partition must cover all nodes");
    let two_m = (2 * comm.total_weight()) as f64;
    if two_m == 0.0 {
        return 0.0;
    }
    let n_comm = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut internal = vec![0u64; n_comm];
    let mut strength = vec![0u64; n_comm];
    for (u, v, w) in comm.edges_ix() {
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        // Each directed edge contributes w to both W_uv and W_vu.
        strength[cu] += w;
        strength[cv] += w;
        if cu == cv {
            internal[cu] += 2 * w;
        }
    }
    let mut q = 0.0;
    for c in 0..n_comm {
        let s = strength[c] as f64 / two_m;
        q += internal[c] as f64 / two_m - s * s;
    }
    q
}

/// Partition labels for modularity: one community per kept team, plus a
/// singleton community for every node outside the kept teams.
pub fn team_labels(dataset: &Dataset) -> Vec<u32> {
    let n_teams = dataset.teams.teams().len() as u32;
    let mut next = n_teams;
    (0..dataset.tree.len() as u32)
        .map(|ix| match dataset.teams.team_of(ix) {
            Some(t) => t,
            None => {
                let l = next;
                next += 1;
                l
            }
        })
        .collect()
}

/// Partition labels by division, with singleton communities for nodes
/// outside the kept teams.
pub fn division_labels(dataset: &Dataset) -> Vec<u32> {
    let mut divisions: Vec<&EmployeeId> =
        dataset.teams.teams().iter().map(|t| &t.division).collect();
    divisions.sort_unstable();
    divisions.dedup();
    let index: std::collections::HashMap<&EmployeeId, u32> = divisions
        .iter()
        .enumerate()
        .map(|(i, d)| (*d, i as u32))
        .collect();
    let mut next = divisions.len() as u32;
    (0..dataset.tree.len() as u32)
        .map(|ix| match dataset.teams.division_of(ix) {
            Some(d) => index[d],
            None => {
                let l = next;
                next += 1;
                l
            }
        })
        .collect()
}

// ---------------------------------------------------------------------
// Team mixing matrix

/// Symmetric matrix of the fraction of employee pairs that exchanged any
/// message: within-team entries normalize by `C(n_i, 2)`, between-team
/// entries by `n_i * n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    pub teams: Vec<EmployeeId>,
    /// Row-major `teams.len() x teams.len()` proportions.
    pub values: Vec<f64>,
}

impl MixingMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.teams.len() + j]
    }
}

/// Iterates unordered communicating pairs `(u, v, w_uv + w_vu)` with
/// `u < v`, each exactly once.
fn communicating_pairs(comm: &CommGraph) -> impl Iterator<Item = (NodeIx, NodeIx, u64)> + '_ {
    comm.edges_ix().filter_map(move |(u, v, w)| {
        if u < v {
            Some((u, v, w + comm.weight_ix(v, u)))
        } else if comm.weight_ix(v, u) == 0 {
            Some((v, u, w))
        } else {
            None // counted when scanning the reverse edge
        }
    })
}

pub fn team_mixing_matrix(dataset: &Dataset) -> MixingMatrix {
    let teams = dataset.teams.teams();
    let k = teams.len();
    let mut counts = vec![0u64; k * k];
    for (u, v, _) in communicating_pairs(&dataset.comm) {
        if let (Some(tu), Some(tv)) = (dataset.teams.team_of(u), dataset.teams.team_of(v)) {
            let (a, b) = (tu.min(tv) as usize, tu.max(tv) as usize);
            counts[a * k + b] += 1;
        }
    }
    let mut values = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let pairs = if i == j {
                let n = teams[i].size() as u64;
                n * (n - 1) / 2
            } else {
                teams[i].size() as u64 * teams[j].size() as u64
            };
            let p = if pairs == 0 {
                0.0
            } else {
                counts[i * k + j] as f64 / pairs as f64
            };
            values[i * k + j] = p;
            values[j * k + i] = p;
        }
    }
    MixingMatrix {
        teams: teams.iter().map(|t| t.id.clone()).collect(),
        values,
    }
}

// ---------------------------------------------------------------------
// EI index

/// Link counts and EI values of one team; `ei` is absent when the team
/// has no links at all.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamEi {
    pub team: EmployeeId,
    pub external: u64,
    pub internal: u64,
    pub ei: Option<f64>,
    pub external_weight: u64,
    pub internal_weight: u64,
    pub ei_weighted: Option<f64>,
}

/// Per-team and organization-level EI indices, unweighted and weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct EiRecord {
    pub per_team: Vec<TeamEi>,
    pub org: Option<f64>,
    pub org_weighted: Option<f64>,
}

fn ei_value(external: u64, internal: u64) -> Option<f64> {
    let denom = external + internal;
    if denom == 0 {
        None
    } else {
        Some((external as f64 - internal as f64) / denom as f64)
    }
}

/// EI index per team and for the organization. A link is an unordered
/// pair with any message; external links count partners outside the
/// team, including leadership and excluded nodes.
pub fn ei_index(dataset: &Dataset) -> EiRecord {
    let teams = dataset.teams.teams();
    let mut el = vec![0u64; teams.len()];
    let mut il = vec![0u64; teams.len()];
    let mut el_w = vec![0u64; teams.len()];
    let mut il_w = vec![0u64; teams.len()];
    for (u, v, w) in communicating_pairs(&dataset.comm) {
        let (tu, tv) = (dataset.teams.team_of(u), dataset.teams.team_of(v));
        match (tu, tv) {
            (Some(a), Some(b)) if a == b => {
                il[a as usize] += 1;
                il_w[a as usize] += w;
            }
            _ => {
                if let Some(a) = tu {
                    el[a as usize] += 1;
                    el_w[a as usize] += w;
                }
                if let Some(b) = tv {
                    el[b as usize] += 1;
                    el_w[b as usize] += w;
                }
            }
        }
    }
    let per_team: Vec<TeamEi> = teams
        .iter()
        .enumerate()
        .map(|(i, t)| TeamEi {
            team: t.id.clone(),
            external: el[i],
            internal: il[i],
            ei: ei_value(el[i], il[i]),
            external_weight: el_w[i],
            internal_weight: il_w[i],
            ei_weighted: ei_value(el_w[i], il_w[i]),
        })
        .collect();
    let (se, si): (u64, u64) = (el.iter().sum(), il.iter().sum());
    let (sew, siw): (u64, u64) = (el_w.iter().sum(), il_w.iter().sum());
    EiRecord {
        per_team,
        org: ei_value(se, si),
        org_weighted: ei_value(sew, siw),
    }
}

// ---------------------------------------------------------------------
// Reciprocity

/// Graph-level reciprocity: unweighted, the fraction of directed links
/// whose reverse link exists; weighted, `sum min(w_uv, w_vu) / sum w_uv`.
pub fn network_reciprocity(comm: &CommGraph, weighted: bool) -> Result<f64, MeasureError> {
    if comm.edge_count() == 0 {
        return Err(MeasureError::EmptyGraph);
    }
    if weighted {
        let mut overlap = 0u64;
        for (u, v, w) in comm.edges_ix() {
            overlap += w.min(comm.weight_ix(v, u));
        }
        Ok(overlap as f64 / comm.total_weight() as f64)
    } else {
        let reciprocated = comm
            .edges_ix()
            .filter(|&(u, v, _)| comm.weight_ix(v, u) > 0)
            .count();
        Ok(reciprocated as f64 / comm.edge_count() as f64)
    }
}

/// Bootstrap standard deviation of reciprocity under edge resampling
/// with replacement. The resampling scheme is implementation-defined; it
/// exists to attach an uncertainty to the point estimate.
pub fn reciprocity_bootstrap_sd(
    comm: &CommGraph,
    weighted: bool,
    n_boot: usize,
    seed: u64,
) -> Result<f64, MeasureError> {
    use rand::{Rng, SeedableRng};
    if comm.edge_count() == 0 || n_boot == 0 {
        return Err(MeasureError::EmptyGraph);
    }
    let edges: Vec<(NodeIx, NodeIx, u64)> = comm.edges_ix().collect();
    let nodes: Vec<EmployeeId> = comm.ids().to_vec();
    let lookup: std::collections::HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str().to_owned(), i as u32))
        .collect();
    let reps = par::map_indexed(n_boot, |rep| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep as u64 + 1);
        let resampled: Vec<(u32, u32, u64)> = (0..edges.len())
            .map(|_| edges[rng.gen_range(0..edges.len())])
            .collect();
        let g = CommGraph::from_indexed(nodes.clone(), lookup.clone(), resampled);
        network_reciprocity(&g, weighted).unwrap_or(0.0)
    });
    let mean = reps.iter().sum::<f64>() / reps.len() as f64;
    let var = reps.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / reps.len() as f64;
    Ok(var.sqrt())
}

/// Sent and received reciprocation of one node; absent when the node has
/// no recipients (resp. senders).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeReciprocity {
    pub sent: Option<f64>,
    pub received: Option<f64>,
}

pub fn node_reciprocity(comm: &CommGraph) -> Vec<NodeReciprocity> {
    par::map_indexed(comm.len(), |u| {
        let u = u as NodeIx;
        let out_deg = comm.out_degree(u);
        let in_deg = comm.in_degree(u);
        let sent = (out_deg > 0).then(|| {
            let rec = comm
                .out_edges(u)
                .filter(|&(v, _)| comm.weight_ix(v, u) > 0)
                .count();
            rec as f64 / out_deg as f64
        });
        let received = (in_deg > 0).then(|| {
            let rec = comm
                .in_edges(u)
                .filter(|&(v, _)| comm.weight_ix(u, v) > 0)
                .count();
            rec as f64 / in_deg as f64
        });
        NodeReciprocity { sent, received }
    })
}

// ---------------------------------------------------------------------
// Positional statistics

/// Team-relative position statistics of one node. All fields are absent
/// for nodes outside the kept teams; individual fields are absent when
/// their denominator is empty.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PositionRecord {
    /// Mean higher/lower indicator over team peers, in [-1, 1].
    pub hp: Option<f64>,
    /// Mean signed reporting distance over team peers.
    pub srd_hp: Option<f64>,
    /// Mean indicator over in-team recipients, in [-1, 1].
    pub sp: Option<f64>,
    /// Mean indicator over in-team senders, in [-1, 1].
    pub rp: Option<f64>,
    pub srd_sp: Option<f64>,
    pub srd_rp: Option<f64>,
    /// Level within the team divided by team depth, in [0, 1].
    pub relative_level: Option<f64>,
}

/// Positional statistics for every node (indexed like the dataset).
pub fn positions(dataset: &Dataset) -> Vec<PositionRecord> {
    let tree = &dataset.tree;
    let comm = &dataset.comm;
    let mut records = vec![PositionRecord::default(); tree.len()];

    let per_team = par::map_slice(dataset.teams.teams(), |team| {
        let base = tree.level_ix(team.root_ix());
        let n = team.size();
        let mut in_team = vec![false; tree.len()];
        for &m in &team.members {
            in_team[m as usize] = true;
        }
        let mut level_counts = vec![0u64; team.depth as usize + 1];
        let mut level_sum = 0i64;
        for &m in &team.members {
            let l = tree.level_ix(m) - base;
            level_counts[l as usize] += 1;
            level_sum += l as i64;
        }
        // above[l] = members strictly above (smaller level than) l.
        let mut above = vec![0u64; level_counts.len() + 1];
        for l in 1..=level_counts.len() {
            above[l] = above[l - 1] + level_counts[l - 1];
        }

        let mut out = Vec::with_capacity(n);
        for &m in &team.members {
            let l = (tree.level_ix(m) - base) as usize;
            let mut rec = PositionRecord::default();
            if n > 1 {
                let higher = above[l];
                let lower = n as u64 - level_counts[l] - higher;
                // D_uv = +1 when u is higher (smaller level) than v.
                rec.hp = Some((lower as f64 - higher as f64) / (n - 1) as f64);
                let srd_sum = n as i64 * l as i64 - level_sum;
                rec.srd_hp = Some(srd_sum as f64 / (n - 1) as f64);
            }
            rec.relative_level = Some(if team.depth > 0 {
                l as f64 / team.depth as f64
            } else {
                0.0
            });

            let (mut d_sum, mut srd_sum, mut cnt) = (0i64, 0i64, 0u64);
            for (v, _) in comm.out_edges(m) {
                if !in_team[v as usize] {
                    continue;
                }
                let lv = (tree.level_ix(v) - base) as i64;
                d_sum += (lv - l as i64).signum(); // D_uv
                srd_sum += l as i64 - lv; // SRD(u, v)
                cnt += 1;
            }
            if cnt > 0 {
                rec.sp = Some(d_sum as f64 / cnt as f64);
                rec.srd_sp = Some(srd_sum as f64 / cnt as f64);
            }
            let (mut d_sum, mut srd_sum, mut cnt) = (0i64, 0i64, 0u64);
            for (v, _) in comm.in_edges(m) {
                if !in_team[v as usize] {
                    continue;
                }
                let lv = (tree.level_ix(v) - base) as i64;
                // D_vu = +1 when the sender v is higher than u.
                d_sum += (l as i64 - lv).signum();
                // The SRD variant of received position keeps SRD(u, v).
                srd_sum += l as i64 - lv;
                cnt += 1;
            }
            if cnt > 0 {
                rec.rp = Some(d_sum as f64 / cnt as f64);
                rec.srd_rp = Some(srd_sum as f64 / cnt as f64);
            }
            out.push((m, rec));
        }
        out
    });
    for team_records in per_team {
        for (m, rec) in team_records {
            records[m as usize] = rec;
        }
    }
    records
}

// ---------------------------------------------------------------------
// Centralities

/// Betweenness, closeness, eigenvector, and authority of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CentralityRecord {
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
    pub authority: f64,
}

/// Compressed directed weighted graph used by the centrality kernels.
pub(crate) struct Csr {
    pub n: usize,
    pub out_off: Vec<u32>,
    pub out_dst: Vec<u32>,
    pub out_w: Vec<u64>,
    pub in_off: Vec<u32>,
    pub in_src: Vec<u32>,
    pub in_w: Vec<u64>,
}

impl Csr {
    pub fn from_comm(comm: &CommGraph) -> Csr {
        Self::from_edges(comm.len(), comm.edges_ix().collect())
    }

    pub fn from_edges(n: usize, mut edges: Vec<(u32, u32, u64)>) -> Csr {
        edges.sort_unstable_by_key(|&(s, d, _)| (s, d));
        let mut out_off = vec![0u32; n + 1];
        let mut in_off = vec![0u32; n + 1];
        for &(s, d, _) in &edges {
            out_off[s as usize + 1] += 1;
            in_off[d as usize + 1] += 1;
        }
        for i in 0..n {
            out_off[i + 1] += out_off[i];
            in_off[i + 1] += in_off[i];
        }
        let mut out_dst = vec![0u32; edges.len()];
        let mut out_w = vec![0u64; edges.len()];
        let mut in_src = vec![0u32; edges.len()];
        let mut in_w = vec![0u64; edges.len()];
        let mut ofill = out_off.clone();
        let mut ifill = in_off.clone();
        for &(s, d, w) in &edges {
            let o = ofill[s as usize] as usize;
            out_dst[o] = d;
            out_w[o] = w;
            ofill[s as usize] += 1;
            let i = ifill[d as usize] as usize;
            in_src[i] = s;
            in_w[i] = w;
            ifill[d as usize] += 1;
        }
        Csr {
            n,
            out_off,
            out_dst,
            out_w,
            in_off,
            in_src,
            in_w,
        }
    }

    fn out(&self, u: usize) -> impl Iterator<Item = (u32, u64)> + '_ {
        let (a, b) = (self.out_off[u] as usize, self.out_off[u + 1] as usize);
        self.out_dst[a..b]
            .iter()
            .copied()
            .zip(self.out_w[a..b].iter().copied())
    }

    fn incoming(&self, u: usize) -> impl Iterator<Item = (u32, u64)> + '_ {
        let (a, b) = (self.in_off[u] as usize, self.in_off[u + 1] as usize);
        self.in_src[a..b]
            .iter()
            .copied()
            .zip(self.in_w[a..b].iter().copied())
    }
}

/// Single-source shortest paths treating weights as traversal costs.
/// Uses Dial buckets when the distance range is small, a binary heap
/// otherwise. Returns distances (`u64::MAX` = unreachable), the settle
/// order, and shortest-path counts.
fn shortest_paths(g: &Csr, src: usize, max_w: u64) -> (Vec<u64>, Vec<u32>, Vec<f64>) {
    let n = g.n;
    let mut dist = vec![u64::MAX; n];
    let mut sigma = vec![0.0_f64; n];
    let mut order = Vec::with_capacity(n);
    dist[src] = 0;
    sigma[src] = 1.0;
    let mut settled = vec![false; n];

    let bound = (n as u64).saturating_sub(1).saturating_mul(max_w);
    if max_w > 0 && bound <= 8_000_000 {
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); bound as usize + 1];
        buckets[0].push(src as u32);
        let mut pending = 1usize;
        let mut d = 0usize;
        while pending > 0 {
            while buckets[d].is_empty() {
                d += 1;
            }
            let u = buckets[d].pop().unwrap();
            pending -= 1;
            let ui = u as usize;
            if settled[ui] {
                continue;
            }
            debug_assert_eq!(dist[ui], d as u64);
            settled[ui] = true;
            order.push(u);
            for (v, w) in g.out(ui) {
                let nd = d as u64 + w;
                let vi = v as usize;
                if nd < dist[vi] {
                    dist[vi] = nd;
                    sigma[vi] = sigma[ui];
                    buckets[nd as usize].push(v);
                    pending += 1;
                } else if nd == dist[vi] && !settled[vi] {
                    sigma[vi] += sigma[ui];
                }
            }
        }
    } else {
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(std::cmp::Reverse((0u64, src as u32)));
        while let Some(std::cmp::Reverse((du, u))) = heap.pop() {
            let ui = u as usize;
            if settled[ui] || du > dist[ui] {
                continue;
            }
            settled[ui] = true;
            order.push(u);
            for (v, w) in g.out(ui) {
                let nd = du + w;
                let vi = v as usize;
                if nd < dist[vi] {
                    dist[vi] = nd;
                    sigma[vi] = sigma[ui];
                    heap.push(std::cmp::Reverse((nd, v)));
                } else if nd == dist[vi] && !settled[vi] {
                    sigma[vi] += sigma[ui];
                }
            }
        }
    }
    (dist, order, sigma)
}

/// Directed weighted betweenness (Brandes) and out-closeness
/// (Wasserman-Faust corrected) for every node.
fn betweenness_closeness(g: &Csr) -> (Vec<f64>, Vec<f64>) {
    let n = g.n;
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let max_w = g.out_w.iter().copied().max().unwrap_or(0);
    let mut closeness = vec![0.0; n];

    let betweenness = par::chunked_fold(
        n,
        32,
        vec![0.0_f64; n],
        |src| {
            let (dist, order, sigma) = shortest_paths(g, src, max_w);
            let mut delta = vec![0.0_f64; n];
            for &w in order.iter().rev() {
                let wi = w as usize;
                for (v, wt) in g.incoming(wi) {
                    let vi = v as usize;
                    if dist[vi] != u64::MAX && dist[vi] + wt == dist[wi] {
                        delta[vi] += sigma[vi] / sigma[wi] * (1.0 + delta[wi]);
                    }
                }
            }
            delta[src] = 0.0;
            let reached = order.len() as f64;
            let total: u64 = order.iter().map(|&u| dist[u as usize]).sum();
            let close = if reached > 1.0 && total > 0 {
                let r1 = reached - 1.0;
                (r1 / (n as f64 - 1.0)) * (r1 / total as f64)
            } else {
                0.0
            };
            (src, close, delta)
        },
        |acc: &mut Vec<f64>, (src, close, delta): (usize, f64, Vec<f64>)| {
            closeness[src] = close;
            for (b, c) in acc.iter_mut().zip(delta) {
                *b += c;
            }
        },
    );
    (betweenness, closeness)
}

/// Power iteration to the leading eigenvector of a non-negative operator
/// `apply`. Returns a unit vector, or all zeros for a zero operator, or
/// an error if the change has not dropped to 1e-10 in 10,000 iterations.
fn power_iteration(
    n: usize,
    apply: impl Fn(&[f64], &mut [f64]),
) -> Result<Vec<f64>, MeasureError> {
    const MAX_ITER: usize = 10_000;
    const TOL: f64 = 1e-10;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_ITER {
        apply(&x, &mut next);
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        for v in next.iter_mut() {
            *v /= norm;
        }
        let diff = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut x, &mut next);
        if diff <= TOL {
            return Ok(x);
        }
    }
    Err(MeasureError::NotConverged(MAX_ITER))
}

/// All four centralities on one graph. Betweenness and closeness treat
/// weights as traversal costs on the directed graph; eigenvector
/// centrality runs on the symmetrized weights; authority is the HITS
/// authority vector. Graphs with no edges score zero everywhere.
pub(crate) fn centralities_csr(g: &Csr) -> Result<Vec<CentralityRecord>, MeasureError> {
    let n = g.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    if g.out_dst.is_empty() {
        return Ok(vec![CentralityRecord::default(); n]);
    }
    let (betweenness, closeness) = betweenness_closeness(g);

    // Diagonal shift: keeps the eigenvectors, breaks the +/- eigenvalue
    // tie of bipartite graphs that would make power iteration oscillate.
    let shift = 0.5
        * (0..n)
            .map(|u| {
                g.out(u).map(|(_, w)| w).sum::<u64>() + g.incoming(u).map(|(_, w)| w).sum::<u64>()
            })
            .max()
            .unwrap_or(0) as f64;
    let eigen = power_iteration(n, |x, out| {
        let fresh = par::map_indexed(n, |u| {
            let mut s = shift * x[u];
            for (v, w) in g.out(u) {
                s += w as f64 * x[v as usize];
            }
            for (v, w) in g.incoming(u) {
                s += w as f64 * x[v as usize];
            }
            s
        });
        out.copy_from_slice(&fresh);
    })?;

    // HITS with the hub update inlined: authority <- A^T (A authority).
    let authority = power_iteration(n, |x, out| {
        let hub = par::map_indexed(n, |u| {
            let mut s = 0.0;
            for (v, w) in g.out(u) {
                s += w as f64 * x[v as usize];
            }
            s
        });
        let fresh = par::map_indexed(n, |u| {
            let mut s = 0.0;
            for (v, w) in g.incoming(u) {
                s += w as f64 * hub[v as usize];
            }
            s
        });
        out.copy_from_slice(&fresh);
    })?;

    Ok((0..n)
        .map(|u| CentralityRecord {
            betweenness: betweenness[u],
            closeness: closeness[u],
            eigenvector: eigen[u],
            authority: authority[u],
        })
        .collect())
}

/// Centralities of every node of one communication graph.
pub fn centralities(comm: &CommGraph) -> Result<Vec<CentralityRecord>, MeasureError> {
    centralities_csr(&Csr::from_comm(comm))
}

/// Betweenness alone, for callers that compare centrality profiles.
pub(crate) fn betweenness_of(g: &Csr) -> Vec<f64> {
    betweenness_closeness(g).0
}

/// Per-team centralities from each team's induced communication
/// subgraph. Nodes outside the kept teams get `None`.
pub fn team_centralities(dataset: &Dataset) -> Result<Vec<Option<CentralityRecord>>, MeasureError> {
    let mut out = vec![None; dataset.tree.len()];
    for team in dataset.teams.teams() {
        let (csr, members) = team_csr(dataset, team);
        let recs = centralities_csr(&csr)?;
        for (local, rec) in recs.into_iter().enumerate() {
            out[members[local] as usize] = Some(rec);
        }
    }
    Ok(out)
}

/// Induced communication subgraph of a team in local indices; returns
/// the CSR and the local-to-global member mapping.
pub(crate) fn team_csr(dataset: &Dataset, team: &Team) -> (Csr, Vec<NodeIx>) {
    let mut local = vec![u32::MAX; dataset.comm.len()];
    for (i, &m) in team.members.iter().enumerate() {
        local[m as usize] = i as u32;
    }
    let mut edges = Vec::new();
    for &m in &team.members {
        for (v, w) in dataset.comm.out_edges(m) {
            if local[v as usize] != u32::MAX {
                edges.push((local[m as usize], local[v as usize], w));
            }
        }
    }
    (Csr::from_edges(team.size(), edges), team.members.clone())
}

// ---------------------------------------------------------------------
// Group communication rates

/// Fraction of unordered pairs in a relation that exchanged any message.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct GroupRate {
    pub pairs: u64,
    pub communicating: u64,
    pub rate: f64,
}

impl GroupRate {
    fn finish(pairs: u64, communicating: u64) -> GroupRate {
        GroupRate {
            pairs,
            communicating,
            rate: if pairs == 0 {
                0.0
            } else {
                communicating as f64 / pairs as f64
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct GroupRates {
    pub all_pairs: GroupRate,
    pub same_level: GroupRate,
    pub same_division: GroupRate,
    pub same_team: GroupRate,
    pub same_supervisor: GroupRate,
}

fn pairs_of(count: u64) -> u64 {
    count * count.saturating_sub(1) / 2
}

pub fn group_comm_rates(dataset: &Dataset) -> GroupRates {
    let tree = &dataset.tree;
    let teams = &dataset.teams;
    let n = tree.len() as u64;

    let mut level_counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut division_counts: BTreeMap<&EmployeeId, u64> = BTreeMap::new();
    let mut supervisor_counts: BTreeMap<NodeIx, u64> = BTreeMap::new();
    for ix in 0..tree.len() as u32 {
        *level_counts.entry(tree.level_ix(ix)).or_insert(0) += 1;
        if let Some(d) = teams.division_of(ix) {
            *division_counts.entry(d).or_insert(0) += 1;
        }
        if let Some(p) = tree.parent_ix(ix) {
            *supervisor_counts.entry(p).or_insert(0) += 1;
        }
    }
    let all = pairs_of(n);
    let level_pairs: u64 = level_counts.values().map(|&c| pairs_of(c)).sum();
    let division_pairs: u64 = division_counts.values().map(|&c| pairs_of(c)).sum();
    let team_pairs: u64 = teams.teams().iter().map(|t| pairs_of(t.size() as u64)).sum();
    let supervisor_pairs: u64 = supervisor_counts.values().map(|&c| pairs_of(c)).sum();

    let (mut c_all, mut c_level, mut c_div, mut c_team, mut c_sup) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for (u, v, _) in communicating_pairs(&dataset.comm) {
        c_all += 1;
        if tree.level_ix(u) == tree.level_ix(v) {
            c_level += 1;
        }
        if let (Some(du), Some(dv)) = (teams.division_of(u), teams.division_of(v)) {
            if du == dv {
                c_div += 1;
            }
        }
        if let (Some(tu), Some(tv)) = (teams.team_of(u), teams.team_of(v)) {
            if tu == tv {
                c_team += 1;
            }
        }
        if let (Some(pu), Some(pv)) = (tree.parent_ix(u), tree.parent_ix(v)) {
            if pu == pv {
                c_sup += 1;
            }
        }
    }

    GroupRates {
        all_pairs: GroupRate::finish(all, c_all),
        same_level: GroupRate::finish(level_pairs, c_level),
        same_division: GroupRate::finish(division_pairs, c_div),
        same_team: GroupRate::finish(team_pairs, c_team),
        same_supervisor: GroupRate::finish(supervisor_pairs, c_sup),
    }
}

// ---------------------------------------------------------------------
// OLS, Pearson, binned curves

/// Simple linear regression `y = beta0 + beta1 x` with classical
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OlsFit {
    pub beta0: f64,
    pub beta1: f64,
    pub se0: f64,
    pub se1: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit, MeasureError> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(MeasureError::DegenerateDesign(format!(
            "need at least 3 paired points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mean_x) * (v - mean_x)).sum();
    if sxx == 0.0 {
        return Err(MeasureError::DegenerateDesign("constant regressor".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mean_x) * (b - mean_y)).sum();
    let beta1 = sxy / sxx;
    let beta0 = mean_y - beta1 * mean_x;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - beta0 - beta1 * a;
            r * r
        })
        .sum();
    let sigma2 = rss / (nf - 2.0);
    let se1 = (sigma2 / sxx).sqrt();
    let se0 = (sigma2 * (1.0 / nf + mean_x * mean_x / sxx)).sqrt();
    Ok(OlsFit {
        beta0,
        beta1,
        se0,
        se1,
    })
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>, MeasureError> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(MeasureError::DegenerateSample(format!(
            "need at least 2 paired points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(Some(sxy / (sxx * syy).sqrt()))
}

/// Five-number summary plus mean of the `y` values in one equal-width
/// bin of `x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BinSummary {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between order statistics (R type 7).
    let h = (sorted.len() as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bins `x` into `bins` equal-width groups over its range and summarizes
/// the `y` values of each occupied bin.
pub fn binned_curve(x: &[f64], y: &[f64], bins: usize) -> Vec<BinSummary> {
    assert!(bins >= 1, "need at least one bin");
    assert_eq!(x.len(), y.len());
    if x.is_empty() {
        return Vec::new();
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for (&xv, &yv) in x.iter().zip(y) {
        let b = if width == 0.0 {
            0
        } else {
            (((xv - lo) / width) as usize).min(bins - 1)
        };
        buckets[b].push(yv);
    }
    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, vs)| !vs.is_empty())
        .map(|(b, mut vs)| {
            vs.sort_by(f64::total_cmp);
            let count = vs.len();
            BinSummary {
                bin: b,
                lo: lo + b as f64 * width,
                hi: if b == bins - 1 {
                    hi
                } else {
                    lo + (b + 1) as f64 * width
                },
                count,
                mean: vs.iter().sum::<f64>() / count as f64,
                min: vs[0],
                q1: quantile(&vs, 0.25),
                median: quantile(&vs, 0.5),
                q3: quantile(&vs, 0.75),
                max: vs[count - 1],
            }
        })
        .collect()
}

// ---------------------------------------------------------------------
// Team summary statistics and correlations

/// Statistics computable per team on the tree or the communication
/// subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeamStat {
    Size,
    Depth,
    MeanDegree,
    Density,
    MeanStrength,
    MeanBranching,
}

impl TeamStat {
    pub fn parse(name: &str) -> Result<TeamStat, MeasureError> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "size" => Ok(TeamStat::Size),
            "depth" => Ok(TeamStat::Depth),
            "mean_degree" => Ok(TeamStat::MeanDegree),
            "density" => Ok(TeamStat::Density),
            "mean_strength" => Ok(TeamStat::MeanStrength),
            "mean_branching" => Ok(TeamStat::MeanBranching),
            other => Err(MeasureError::UnknownStatistic(other.to_owned())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TeamStat::Size => "size",
            TeamStat::Depth => "depth",
            TeamStat::MeanDegree => "mean_degree",
            TeamStat::Density => "density",
            TeamStat::MeanStrength => "mean_strength",
            TeamStat::MeanBranching => "mean_branching",
        }
    }

    /// Value on the team's reporting tree. The tree is unweighted, so
    /// mean strength coincides with mean degree.
    pub fn tree_value(&self, tree: &OrgTree, team: &Team) -> Result<f64, MeasureError> {
        let n = team.size() as f64;
        Ok(match self {
            TeamStat::Size => n,
            TeamStat::Depth => team.depth as f64,
            TeamStat::MeanDegree | TeamStat::MeanStrength => {
                if n > 0.0 {
                    2.0 * (n - 1.0) / n
                } else {
                    0.0
                }
            }
            TeamStat::Density => {
                if n >= 2.0 {
                    2.0 / n // (n-1) edges over C(n,2) pairs
                } else {
                    0.0
                }
            }
            TeamStat::MeanBranching => {
                let internal = team
                    .members
                    .iter()
                    .filter(|&&m| {
                        tree.children_ix(m)
                            .iter()
                            .any(|c| team.members.binary_search(c).is_ok())
                    })
                    .count();
                if internal == 0 {
                    0.0
                } else {
                    (team.size() - 1) as f64 / internal as f64
                }
            }
        })
    }

    /// Value on the team's induced communication subgraph. Depth and
    /// branching are tree notions and unavailable here.
    pub fn comm_value(&self, dataset: &Dataset, team: &Team) -> Result<f64, MeasureError> {
        let n = team.size() as f64;
        match self {
            TeamStat::Size => Ok(n),
            TeamStat::Depth | TeamStat::MeanBranching => Err(MeasureError::UnknownStatistic(
                format!("{} is undefined on a communication graph", self.name()),
            )),
            TeamStat::MeanDegree | TeamStat::Density | TeamStat::MeanStrength => {
                let mut in_team = vec![false; dataset.comm.len()];
                for &m in &team.members {
                    in_team[m as usize] = true;
                }
                let mut edges = 0u64;
                let mut volume = 0u64;
                let mut partner_pairs = 0u64;
                for &m in &team.members {
                    for (v, w) in dataset.comm.out_edges(m) {
                        if in_team[v as usize] {
                            edges += 1;
                            volume += w;
                            if v > m || dataset.comm.weight_ix(v, m) == 0 {
                                partner_pairs += 1;
                            }
                        }
                    }
                }
                Ok(match self {
                    // Each unordered communicating pair contributes two
                    // endpoint slots.
                    TeamStat::MeanDegree => {
                        if n > 0.0 {
                            2.0 * partner_pairs as f64 / n
                        } else {
                            0.0
                        }
                    }
                    TeamStat::Density => {
                        if n >= 2.0 {
                            edges as f64 / (n * (n - 1.0))
                        } else {
                            0.0
                        }
                    }
                    TeamStat::MeanStrength => {
                        if n > 0.0 {
                            2.0 * volume as f64 / n
                        } else {
                            0.0
                        }
                    }
                    _ => unreachable!(),
                })
            }
        }
    }
}

/// Pearson correlation across teams between a tree statistic and a
/// communication statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct StatCorrelation {
    pub tree_stat: TeamStat,
    pub comm_stat: TeamStat,
    pub rho: Option<f64>,
}

pub fn team_stat_correlation(
    dataset: &Dataset,
    pairs: &[(TeamStat, TeamStat)],
) -> Result<Vec<StatCorrelation>, MeasureError> {
    let teams = dataset.teams.teams();
    if teams.len() < 3 {
        return Err(MeasureError::DegenerateSample(format!(
            "need at least 3 teams, got {}",
            teams.len()
        )));
    }
    pairs
        .iter()
        .map(|&(ts, cs)| {
            let x: Vec<f64> = teams
                .iter()
                .map(|t| ts.tree_value(&dataset.tree, t))
                .collect::<Result<_, _>>()?;
            let y: Vec<f64> = teams
                .iter()
                .map(|t| cs.comm_value(dataset, t))
                .collect::<Result<_, _>>()?;
            Ok(StatCorrelation {
                tree_stat: ts,
                comm_stat: cs,
                rho: pearson(&x, &y)?,
            })
        })
        .collect()
}

/// The default tree/comm statistic pairs exported by the CLI.
pub fn default_stat_pairs() -> Vec<(TeamStat, TeamStat)> {
    vec![
        (TeamStat::Size, TeamStat::Size),
        (TeamStat::Size, TeamStat::MeanDegree),
        (TeamStat::Depth, TeamStat::Density),
        (TeamStat::MeanBranching, TeamStat::MeanStrength),
    ]
}
