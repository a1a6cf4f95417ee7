//! Deterministic, plot-ready CSV and JSON renderings of every result
//! table. Rows always follow canonical (id or team) order and floats
//! print via the shortest round-trip formatter, so identical inputs
//! yield byte-identical files for any thread count.

use std::collections::BTreeMap;

use crate::distance::{DistanceKind, TeamDistanceTally};
use crate::error::MeasureError;
use crate::measures::{self, TeamStat};
use crate::org::Dataset;
use crate::par;
use crate::permtest::SymmetryTestResult;
use crate::reconstruct::{EvaluationReport, HierarchyEstimate};

/// Canonical float rendering: shortest round-trip, negative zero
/// normalized.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Measures selectable by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureName {
    Degrees,
    Reciprocity,
    Ei,
    Mixing,
    Positions,
    Centralities,
    GroupRates,
    Curves,
    TeamStats,
}

impl MeasureName {
    pub fn all() -> Vec<MeasureName> {
        use MeasureName::*;
        vec![
            Degrees,
            Reciprocity,
            Ei,
            Mixing,
            Positions,
            Centralities,
            GroupRates,
            Curves,
            TeamStats,
        ]
    }

    pub fn parse(s: &str) -> Result<MeasureName, MeasureError> {
        use MeasureName::*;
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "degrees" => Ok(Degrees),
            "reciprocity" => Ok(Reciprocity),
            "ei" => Ok(Ei),
            "mixing" => Ok(Mixing),
            "positions" => Ok(Positions),
            "centralities" => Ok(Centralities),
            "group_rates" => Ok(GroupRates),
            "curves" => Ok(Curves),
            "team_stats" => Ok(TeamStats),
            other => Err(MeasureError::UnknownStatistic(other.to_owned())),
        }
    }
}

/// Options for the measure suite.
#[derive(Debug, Clone)]
pub struct MeasureOptions {
    pub selection: Vec<MeasureName>,
    pub bins: usize,
    pub stat_pairs: Vec<(TeamStat, TeamStat)>,
    /// Compute centralities on the whole graph instead of per team.
    pub full_graph_centralities: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            selection: MeasureName::all(),
            bins: 10,
            stat_pairs: measures::default_stat_pairs(),
            full_graph_centralities: false,
        }
    }
}

pub fn degrees_csv(dataset: &Dataset) -> String {
    let recs = measures::degree_strength(&dataset.comm);
    let mut out = String::from(
        "node_id,in_degree,out_degree,total_degree,in_strength,out_strength,total_strength\n",
    );
    for (ix, rec) in recs.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            dataset.comm.id(ix as u32),
            rec.in_degree,
            rec.out_degree,
            rec.total_degree,
            rec.in_strength,
            rec.out_strength,
            rec.total_strength
        ));
    }
    out
}

pub fn node_reciprocity_csv(dataset: &Dataset) -> String {
    let recs = measures::node_reciprocity(&dataset.comm);
    let mut out = String::from("node_id,sent_reciprocation,received_reciprocation\n");
    for (ix, rec) in recs.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            dataset.comm.id(ix as u32),
            fmt_opt(rec.sent),
            fmt_opt(rec.received)
        ));
    }
    out
}

pub fn ei_csv(dataset: &Dataset) -> String {
    let rec = measures::ei_index(dataset);
    let mut out = String::from(
        "team_id,external_links,internal_links,ei,external_weight,internal_weight,ei_weighted\n",
    );
    for t in &rec.per_team {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t.team,
            t.external,
            t.internal,
            fmt_opt(t.ei),
            t.external_weight,
            t.internal_weight,
            fmt_opt(t.ei_weighted)
        ));
    }
    out
}

pub fn mixing_csv(dataset: &Dataset) -> String {
    let m = measures::team_mixing_matrix(dataset);
    let mut out = String::from("team_i,team_j,proportion\n");
    for (i, ti) in m.teams.iter().enumerate() {
        for (j, tj) in m.teams.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", ti, tj, fmt_f64(m.get(i, j))));
        }
    }
    out
}

pub fn positions_csv(dataset: &Dataset) -> String {
    let recs = measures::positions(dataset);
    let mut out =
        String::from("node_id,team_id,hp,srd_hp,sp,rp,srd_sp,srd_rp,relative_level\n");
    for (ix, rec) in recs.iter().enumerate() {
        let team = dataset
            .teams
            .team_of(ix as u32)
            .map(|t| dataset.teams.teams()[t as usize].id.as_str())
            .unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            dataset.comm.id(ix as u32),
            team,
            fmt_opt(rec.hp),
            fmt_opt(rec.srd_hp),
            fmt_opt(rec.sp),
            fmt_opt(rec.rp),
            fmt_opt(rec.srd_sp),
            fmt_opt(rec.srd_rp),
            fmt_opt(rec.relative_level)
        ));
    }
    out
}

pub fn centralities_csv(dataset: &Dataset, full_graph: bool) -> Result<String, MeasureError> {
    let mut out = String::from("node_id,team_id,betweenness,closeness,eigenvector,authority\n");
    if full_graph {
        let recs = measures::centralities(&dataset.comm)?;
        for (ix, rec) in recs.iter().enumerate() {
            out.push_str(&format!(
                "{},,{},{},{},{}\n",
                dataset.comm.id(ix as u32),
                fmt_f64(rec.betweenness),
                fmt_f64(rec.closeness),
                fmt_f64(rec.eigenvector),
                fmt_f64(rec.authority)
            ));
        }
    } else {
        let recs = measures::team_centralities(dataset)?;
        for (ix, rec) in recs.iter().enumerate() {
            if let Some(rec) = rec {
                let team = dataset
                    .teams
                    .team_of(ix as u32)
                    .map(|t| dataset.teams.teams()[t as usize].id.as_str())
                    .unwrap_or("");
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    dataset.comm.id(ix as u32),
                    team,
                    fmt_f64(rec.betweenness),
                    fmt_f64(rec.closeness),
                    fmt_f64(rec.eigenvector),
                    fmt_f64(rec.authority)
                ));
            }
        }
    }
    Ok(out)
}

pub fn group_rates_csv(dataset: &Dataset) -> String {
    let rates = measures::group_comm_rates(dataset);
    let mut out = String::from("group,pairs,communicating,rate\n");
    for (name, rate) in [
        ("all_pairs", rates.all_pairs),
        ("same_level", rates.same_level),
        ("same_division", rates.same_division),
        ("same_team", rates.same_team),
        ("same_supervisor", rates.same_supervisor),
    ] {
        out.push_str(&format!(
            "{},{},{},{}\n",
            name,
            rate.pairs,
            rate.communicating,
            fmt_f64(rate.rate)
        ));
    }
    out
}

/// Binned Fig-style curves of communication statistics against
/// organizational position.
pub fn position_curves_csv(dataset: &Dataset, bins: usize) -> String {
    let degrees = measures::degree_strength(&dataset.comm);
    let reciprocity = measures::node_reciprocity(&dataset.comm);
    let positions = measures::positions(dataset);

    let mut out = String::from("curve,bin,lo,hi,count,mean,min,q1,median,q3,max\n");
    let mut emit = |name: &str, x: &[f64], y: &[f64]| {
        if x.is_empty() {
            return;
        }
        for b in measures::binned_curve(x, y, bins) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                name,
                b.bin,
                fmt_f64(b.lo),
                fmt_f64(b.hi),
                b.count,
                fmt_f64(b.mean),
                fmt_f64(b.min),
                fmt_f64(b.q1),
                fmt_f64(b.median),
                fmt_f64(b.q3),
                fmt_f64(b.max)
            ));
        }
    };

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (ix, rec) in positions.iter().enumerate() {
        if let Some(level) = rec.relative_level {
            x.push(level);
            y.push(degrees[ix].total_degree as f64);
        }
    }
    emit("total_degree_by_relative_level", &x, &y);

    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (ix, rec) in positions.iter().enumerate() {
        if let Some(level) = rec.relative_level {
            x.push(level);
            y.push(degrees[ix].total_strength as f64);
        }
    }
    emit("total_strength_by_relative_level", &x, &y);

    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (ix, rec) in positions.iter().enumerate() {
        if let (Some(level), Some(sr), Some(rr)) =
            (rec.relative_level, reciprocity[ix].sent, reciprocity[ix].received)
        {
            x.push(level);
            y.push(sr - rr);
        }
    }
    emit("reciprocation_gap_by_relative_level", &x, &y);

    let (mut x, mut y) = (Vec::new(), Vec::new());
    for rec in positions.iter() {
        if let (Some(hp), Some(sp), Some(rp)) = (rec.hp, rec.sp, rec.rp) {
            x.push(hp);
            y.push(sp - rp);
        }
    }
    emit("position_gap_by_hp", &x, &y);

    out
}

pub fn team_summary_csv(dataset: &Dataset) -> Result<String, MeasureError> {
    let mut out = String::from(
        "team_id,division_id,size,depth,tree_mean_degree,tree_density,tree_mean_branching,\
         comm_mean_degree,comm_density,comm_mean_strength\n",
    );
    for team in dataset.teams.teams() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            team.id,
            team.division,
            team.size(),
            team.depth,
            fmt_f64(TeamStat::MeanDegree.tree_value(&dataset.tree, team)?),
            fmt_f64(TeamStat::Density.tree_value(&dataset.tree, team)?),
            fmt_f64(TeamStat::MeanBranching.tree_value(&dataset.tree, team)?),
            fmt_f64(TeamStat::MeanDegree.comm_value(dataset, team)?),
            fmt_f64(TeamStat::Density.comm_value(dataset, team)?),
            fmt_f64(TeamStat::MeanStrength.comm_value(dataset, team)?),
        ));
    }
    Ok(out)
}

pub fn stat_correlations_csv(
    dataset: &Dataset,
    pairs: &[(TeamStat, TeamStat)],
) -> Result<String, MeasureError> {
    let mut out = String::from("tree_stat,comm_stat,pearson\n");
    if dataset.teams.teams().len() < 3 {
        // Correlations across teams need at least three points.
        return Ok(out);
    }
    for c in measures::team_stat_correlation(dataset, pairs)? {
        out.push_str(&format!(
            "{},{},{}\n",
            c.tree_stat.name(),
            c.comm_stat.name(),
            fmt_opt(c.rho)
        ));
    }
    Ok(out)
}

#[derive(serde::Serialize)]
struct DistributionSummary {
    mean: f64,
    sd: f64,
    median: f64,
    p95_in: f64,
    p95_out: f64,
}

#[derive(serde::Serialize)]
#[serde(untagged)]
enum PowerLawSummary {
    Fit(measures::PowerLawFit),
    Unavailable { error: String },
}

#[derive(serde::Serialize)]
struct TeamsSummary {
    count: usize,
    excluded: usize,
    min_size: Option<usize>,
    max_size: Option<usize>,
    mean_size: Option<f64>,
    min_depth: Option<u32>,
    max_depth: Option<u32>,
}

#[derive(serde::Serialize)]
struct SummaryDoc {
    n_nodes: usize,
    n_edges: usize,
    total_emails: u64,
    degree: DistributionSummary,
    strength: DistributionSummary,
    reciprocity_unweighted: Option<f64>,
    reciprocity_weighted: Option<f64>,
    modularity_teams: f64,
    modularity_divisions: f64,
    ei_org: Option<f64>,
    ei_org_weighted: Option<f64>,
    power_law_total_degree: PowerLawSummary,
    group_rates: measures::GroupRates,
    teams: TeamsSummary,
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let h = (sorted.len() as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn distribution(total: &[f64], ins: &[f64], outs: &[f64]) -> DistributionSummary {
    let n = total.len() as f64;
    let mean = total.iter().sum::<f64>() / n.max(1.0);
    let var = total.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n.max(1.0);
    let mut sorted_total = total.to_vec();
    sorted_total.sort_by(f64::total_cmp);
    let mut sorted_in = ins.to_vec();
    sorted_in.sort_by(f64::total_cmp);
    let mut sorted_out = outs.to_vec();
    sorted_out.sort_by(f64::total_cmp);
    DistributionSummary {
        mean,
        sd: var.sqrt(),
        median: percentile(&sorted_total, 0.5),
        p95_in: percentile(&sorted_in, 0.95),
        p95_out: percentile(&sorted_out, 0.95),
    }
}

/// Organization-level scalar summary as pretty JSON.
pub fn summary_json(dataset: &Dataset) -> String {
    let degrees = measures::degree_strength(&dataset.comm);
    let degree = distribution(
        &degrees.iter().map(|d| d.total_degree as f64).collect::<Vec<_>>(),
        &degrees.iter().map(|d| d.in_degree as f64).collect::<Vec<_>>(),
        &degrees.iter().map(|d| d.out_degree as f64).collect::<Vec<_>>(),
    );
    let strength = distribution(
        &degrees.iter().map(|d| d.total_strength as f64).collect::<Vec<_>>(),
        &degrees.iter().map(|d| d.in_strength as f64).collect::<Vec<_>>(),
        &degrees.iter().map(|d| d.out_strength as f64).collect::<Vec<_>>(),
    );
    let ei = measures::ei_index(dataset);
    let power_law = match measures::fit_power_law(
        &degrees.iter().map(|d| d.total_degree as u64).collect::<Vec<_>>(),
    ) {
        Ok(fit) => PowerLawSummary::Fit(fit),
        Err(e) => PowerLawSummary::Unavailable { error: e.to_string() },
    };
    let teams = dataset.teams.teams();
    let doc = SummaryDoc {
        n_nodes: dataset.n_nodes(),
        n_edges: dataset.comm.edge_count(),
        total_emails: dataset.comm.total_weight(),
        degree,
        strength,
        reciprocity_unweighted: measures::network_reciprocity(&dataset.comm, false).ok(),
        reciprocity_weighted: measures::network_reciprocity(&dataset.comm, true).ok(),
        modularity_teams: measures::weighted_modularity(
            &dataset.comm,
            &measures::team_labels(dataset),
        ),
        modularity_divisions: measures::weighted_modularity(
            &dataset.comm,
            &measures::division_labels(dataset),
        ),
        ei_org: ei.org,
        ei_org_weighted: ei.org_weighted,
        power_law_total_degree: power_law,
        group_rates: measures::group_comm_rates(dataset),
        teams: TeamsSummary {
            count: teams.len(),
            excluded: dataset.teams.excluded_teams.len(),
            min_size: teams.iter().map(|t| t.size()).min(),
            max_size: teams.iter().map(|t| t.size()).max(),
            mean_size: if teams.is_empty() {
                None
            } else {
                Some(teams.iter().map(|t| t.size()).sum::<usize>() as f64 / teams.len() as f64)
            },
            min_depth: teams.iter().map(|t| t.depth).min(),
            max_depth: teams.iter().map(|t| t.depth).max(),
        },
    };
    serde_json::to_string_pretty(&doc).expect("summary serializes") + "\n"
}

/// Runs the selected measures, returning `(file name, content)` pairs in
/// a fixed order. `summary.json` is always produced.
pub fn run_measures(
    dataset: &Dataset,
    opts: &MeasureOptions,
) -> Result<Vec<(String, String)>, MeasureError> {
    let mut files = Vec::new();
    for name in &opts.selection {
        match name {
            MeasureName::Degrees => files.push(("degrees.csv".into(), degrees_csv(dataset))),
            MeasureName::Reciprocity => {
                files.push(("node_reciprocity.csv".into(), node_reciprocity_csv(dataset)))
            }
            MeasureName::Ei => files.push(("ei.csv".into(), ei_csv(dataset))),
            MeasureName::Mixing => files.push(("mixing.csv".into(), mixing_csv(dataset))),
            MeasureName::Positions => files.push(("positions.csv".into(), positions_csv(dataset))),
            MeasureName::Centralities => files.push((
                "centralities.csv".into(),
                centralities_csv(dataset, opts.full_graph_centralities)?,
            )),
            MeasureName::GroupRates => {
                files.push(("group_rates.csv".into(), group_rates_csv(dataset)))
            }
            MeasureName::Curves => files.push((
                "position_curves.csv".into(),
                position_curves_csv(dataset, opts.bins),
            )),
            MeasureName::TeamStats => {
                files.push(("team_summary.csv".into(), team_summary_csv(dataset)?));
                files.push((
                    "stat_correlations.csv".into(),
                    stat_correlations_csv(dataset, &opts.stat_pairs)?,
                ));
            }
        }
    }
    files.push(("summary.json".into(), summary_json(dataset)));
    Ok(files)
}

/// Long-format distance profiles for every team and kind:
/// `team_id,kind,distance,pair_count,mean_emails,frac_communicating`.
pub fn distance_csv(dataset: &Dataset, kinds: &[DistanceKind]) -> String {
    let blocks = par::map_slice(dataset.teams.teams(), |team| {
        let tally = TeamDistanceTally::new(dataset, team);
        let mut block = String::new();
        for &kind in kinds {
            let profile = tally.profile(kind);
            for (d, bin) in &profile.bins {
                block.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    team.id,
                    kind,
                    d,
                    bin.pair_count,
                    fmt_f64(bin.mean_emails),
                    fmt_f64(bin.frac_communicating)
                ));
            }
        }
        block
    });
    let mut out =
        String::from("team_id,kind,distance,pair_count,mean_emails,frac_communicating\n");
    for block in blocks {
        out.push_str(&block);
    }
    out
}

/// Per-team symmetry-test outcomes as a JSON array.
pub fn permtest_json(results: &[(String, SymmetryTestResult)]) -> String {
    #[derive(serde::Serialize)]
    struct Row<'a> {
        team: &'a str,
        distance_kind: DistanceKind,
        observed_t: f64,
        p_value: f64,
        n_permutations: usize,
    }
    let rows: Vec<Row> = results
        .iter()
        .map(|(team, r)| Row {
            team,
            distance_kind: r.distance_kind,
            observed_t: r.observed_t,
            p_value: r.p_value,
            n_permutations: r.n_permutations,
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
}

/// Null replicate values for plotting: `team,kind,replicate,t`.
pub fn permtest_nulls_csv(results: &[(String, SymmetryTestResult)]) -> String {
    let mut out = String::from("team_id,kind,replicate,t\n");
    for (team, r) in results {
        for (i, t) in r.null_samples.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", team, r.distance_kind, i, fmt_f64(*t)));
        }
    }
    out
}

/// Reconstructed structures: `team,method,node,parent,rank`. Tree
/// estimates are exported oriented at the team root; ranking estimates
/// list their converted reports-to edges plus ranks; placement graphs
/// leave virtual-root children with an empty parent.
pub fn estimates_csv(per_team: &[(String, Vec<HierarchyEstimate>)]) -> String {
    let mut out = String::from("team_id,method,node,parent,rank\n");
    for (team, estimates) in per_team {
        for est in estimates {
            let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
            for (c, p) in &est.edges {
                parent.insert(c.as_str(), p.as_str());
            }
            for node in &est.nodes {
                let rank = est
                    .ranks
                    .as_ref()
                    .and_then(|r| r.get(node))
                    .map(|r| r.to_string())
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    team,
                    est.method,
                    node,
                    parent.get(node.as_str()).copied().unwrap_or(""),
                    rank
                ));
            }
        }
    }
    out
}

/// Evaluation table:
/// `team,method,frobenius,centrality,classification` plus the
/// MinST-relative columns.
pub fn evaluation_csv(report: &EvaluationReport) -> String {
    let mut out = String::from(
        "team_id,method,frobenius,centrality,classification,\
         frobenius_rel,centrality_rel,classification_rel\n",
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.team,
            row.method,
            fmt_f64(row.frobenius),
            fmt_f64(row.centrality),
            fmt_f64(row.classification),
            fmt_opt(row.frobenius_rel),
            fmt_opt(row.centrality_rel),
            fmt_opt(row.classification_rel)
        ));
    }
    out
}

/// Long-format cumulative level-MSE curves: `team,method,k,mse`.
pub fn level_mse_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("team_id,method,k,mse\n");
    for row in &report.rows {
        for (k, mse) in &row.level_mse {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.team,
                row.method,
                k,
                fmt_f64(*mse)
            ));
        }
    }
    out
}

/// Per-method medians of the evaluation metrics as pretty JSON.
pub fn evaluation_json(report: &EvaluationReport) -> String {
    #[derive(serde::Serialize)]
    struct MethodSummary {
        method: String,
        teams: usize,
        median_frobenius: f64,
        median_centrality: f64,
        median_classification: f64,
    }
    let median = |mut vals: Vec<f64>| -> f64 {
        vals.sort_by(f64::total_cmp);
        let mid = vals.len() / 2;
        if vals.len() % 2 == 1 {
            vals[mid]
        } else {
            0.5 * (vals[mid - 1] + vals[mid])
        }
    };
    let mut methods: Vec<&crate::reconstruct::Method> = Vec::new();
    for row in &report.rows {
        if !methods.contains(&&row.method) {
            methods.push(&row.method);
        }
    }
    let summaries: Vec<MethodSummary> = methods
        .into_iter()
        .map(|m| {
            let rows: Vec<&crate::reconstruct::TeamEvaluation> =
                report.rows.iter().filter(|r| r.method == *m).collect();
            MethodSummary {
                method: m.name().to_owned(),
                teams: rows.len(),
                median_frobenius: median(rows.iter().map(|r| r.frobenius).collect()),
                median_centrality: median(rows.iter().map(|r| r.centrality).collect()),
                median_classification: median(rows.iter().map(|r| r.classification).collect()),
            }
        })
        .collect();
    #[derive(serde::Serialize)]
    struct Doc {
        methods: Vec<MethodSummary>,
        warnings: Vec<String>,
    }
    serde_json::to_string_pretty(&Doc {
        methods: summaries,
        warnings: report.warnings.clone(),
    })
    .expect("document serializes")
        + "\n"
}
