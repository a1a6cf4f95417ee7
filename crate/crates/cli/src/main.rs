//! `orgnet`: couple an organizational tree with a communication graph,
//! compute hierarchy-aware measures and reporting-distance profiles,
//! run permutation tests, reconstruct hierarchies, and generate
//! synthetic organizations.
//!
//! Every subcommand writes plot-ready CSV/JSON files plus a
//! `manifest.json` recording the configuration, seed, version, and
//! content hashes of all inputs and outputs. Outputs are written
//! atomically and are byte-identical for identical inputs, seeds, and
//! configuration, regardless of worker count.
//!
//! Exit codes: 0 success, 2 usage error, 3 input/format error,
//! 4 computational error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use orgnet_core::distance::DistanceKind;
use orgnet_core::ingest::{self, AssembleOptions};
use orgnet_core::measures::TeamStat;
use orgnet_core::permtest;
use orgnet_core::reconstruct::{self, EvaluateOptions, Method};
use orgnet_core::report::{self, MeasureName, MeasureOptions};
use orgnet_core::synth::{CommModel, DecayForm, PlantedConfig};
use orgnet_core::{
    DistanceError, IngestError, MeasureError, OrgError, ReconstructError, TeamPartition,
};

#[derive(Parser)]
#[command(
    name = "orgnet",
    version,
    about = "Organizational tree and communication network analysis"
)]
struct Cli {
    /// Worker threads (the ORGNET_THREADS environment variable takes
    /// precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean raw edge files into a dataset directory.
    Ingest(IngestArgs),
    /// Extract the team partition of a reporting tree.
    Teams(TeamsArgs),
    /// Compute communication measures of a dataset.
    Measure(MeasureArgs),
    /// Per-team reporting-distance profiles.
    Distance(DistanceArgs),
    /// Permutation tests of communication symmetry.
    Permtest(PermtestArgs),
    /// Reconstruct hierarchies from communication graphs.
    Reconstruct(ReconstructArgs),
    /// Reconstruct and score against the true tree.
    Evaluate(ReconstructArgs),
    /// Generate a synthetic organization with distance-decay traffic.
    Synth(SynthArgs),
}

#[derive(Args, Serialize)]
struct IngestArgs {
    /// Reporting edges CSV with header `child_id,parent_id`.
    #[arg(long)]
    org: PathBuf,
    /// Communication CSV with header `src_id,dst_id,count`.
    #[arg(long)]
    comm: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Level below the root whose nodes become team roots.
    #[arg(long, default_value_t = 2)]
    team_level: u32,
    /// Teams below this size are excluded.
    #[arg(long, default_value_t = 100)]
    min_team_size: usize,
    /// Explicit root id (inferred when absent).
    #[arg(long)]
    root: Option<String>,
}

#[derive(Args, Serialize)]
struct TeamsArgs {
    #[arg(long)]
    org: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    team_level: u32,
    #[arg(long, default_value_t = 100)]
    min_team_size: usize,
    #[arg(long)]
    root: Option<String>,
}

#[derive(Args, Serialize)]
struct MeasureArgs {
    /// Dataset directory written by `ingest` or `synth`.
    dataset: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Comma-separated measure names (default: all). Available:
    /// degrees, reciprocity, ei, mixing, positions, centralities,
    /// group-rates, curves, team-stats.
    #[arg(long, value_delimiter = ',')]
    measures: Vec<String>,
    /// Equal-width bins for the position curves.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Tree/comm statistic pairs to correlate, as `tree:comm`.
    #[arg(long, value_delimiter = ',')]
    stat_pairs: Vec<String>,
    /// Centralities on the whole graph instead of per team.
    #[arg(long)]
    full_graph_centralities: bool,
}

#[derive(Args, Serialize)]
struct DistanceArgs {
    dataset: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Distance kinds to profile.
    #[arg(long, value_delimiter = ',', default_values_t = ["rd".to_string(), "srd".to_string(), "drd".to_string()])]
    kinds: Vec<String>,
}

#[derive(Args, Serialize)]
struct PermtestArgs {
    dataset: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Signed distance kinds to test.
    #[arg(long, value_delimiter = ',', default_values_t = ["srd".to_string(), "drd".to_string()])]
    kinds: Vec<String>,
    #[arg(long, default_value_t = 500)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Teams above this size are skipped.
    #[arg(long, default_value_t = 10_000)]
    max_team_size: usize,
}

#[derive(Args, Serialize)]
struct ReconstructArgs {
    dataset: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Methods: minst, maxst, agony, distance.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Teams above this size are skipped.
    #[arg(long, default_value_t = 3000)]
    size_cap: usize,
    /// Decay rate of the distance method.
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    teams: usize,
    #[arg(long)]
    team_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rate scale of the pair model.
    #[arg(long, default_value_t = 20.0)]
    alpha: f64,
    /// Decay rate of the pair model.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Separate decay for downward distances (signed kinds).
    #[arg(long)]
    beta_down: Option<f64>,
    /// Distance kind driving the model: rd, srd, drd.
    #[arg(long, default_value = "rd")]
    kind: String,
    /// Decay form: exponential or power.
    #[arg(long, default_value = "exponential")]
    form: String,
    /// Target mean children per internal node.
    #[arg(long, default_value_t = 4.0)]
    branching: f64,
    /// Expected cross-team edges per node.
    #[arg(long, default_value_t = 2.0)]
    cross_rate: f64,
    #[arg(long, default_value_t = 1)]
    min_team_size: usize,
}

/// Errors classified by exit code.
enum CliError {
    /// Exit 2: bad flag combinations or values clap cannot catch.
    Usage(String),
    /// Exit 3: unreadable or malformed inputs.
    Input(String),
    /// Exit 4: computation failed.
    Compute(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Compute(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Compute(m) => m,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OrgError> for CliError {
    fn from(e: OrgError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<DistanceError> for CliError {
    fn from(e: DistanceError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<ReconstructError> for CliError {
    fn from(e: ReconstructError) -> Self {
        CliError::Compute(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = std::env::var("ORGNET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads);
    orgnet_core::configure_threads(threads);

    let result = match cli.command {
        Command::Ingest(args) => run_ingest(&args),
        Command::Teams(args) => run_teams(&args),
        Command::Measure(args) => run_measure(&args),
        Command::Distance(args) => run_distance(&args),
        Command::Permtest(args) => run_permtest(&args),
        Command::Reconstruct(args) => run_reconstruct(&args),
        Command::Evaluate(args) => run_evaluate(&args),
        Command::Synth(args) => run_synth(&args),
    };
    if let Err(e) = result {
        eprintln!("orgnet: {}", e.message());
        std::process::exit(e.code());
    }
}

/// Sha-256 content hash, hex encoded.
fn hash_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

fn hash_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(hash_bytes(&bytes))
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    version: &'static str,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

/// Writes output files atomically into `out`, then a manifest listing
/// every file with its content hash.
fn write_outputs(
    command: &'static str,
    config: serde_json::Value,
    inputs: &[&Path],
    out_dir: &Path,
    files: &[(String, String)],
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        inputs: BTreeMap::new(),
        outputs: BTreeMap::new(),
    };
    for input in inputs {
        manifest
            .inputs
            .insert(input.display().to_string(), hash_file(input)?);
    }
    for (name, content) in files {
        ingest::write_atomic(&out_dir.join(name), content.as_bytes())?;
        manifest.outputs.insert(name.clone(), hash_bytes(content.as_bytes()));
    }
    let manifest_json =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    ingest::write_atomic(&out_dir.join("manifest.json"), manifest_json.as_bytes())?;
    Ok(())
}

fn config_value(args: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

/// The four files of a dataset directory, for input hashing.
fn dataset_files(dir: &Path) -> [PathBuf; 4] {
    [
        dir.join("org.csv"),
        dir.join("comm.csv"),
        dir.join("teams.csv"),
        dir.join("provenance.json"),
    ]
}

fn run_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let opts = AssembleOptions {
        team_level: args.team_level,
        min_team_size: args.min_team_size,
        root: args.root.clone(),
    };
    let dataset = ingest::assemble_dataset(&args.org, &args.comm, &opts)?;
    let files = vec![
        ("org.csv".to_owned(), ingest::org_csv_string(&dataset.tree)),
        ("comm.csv".to_owned(), ingest::comm_csv_string(&dataset.comm)),
        ("teams.csv".to_owned(), ingest::teams_csv_string(&dataset)),
        (
            "provenance.json".to_owned(),
            serde_json::to_string_pretty(&dataset.provenance).expect("provenance serializes"),
        ),
    ];
    write_outputs(
        "ingest",
        config_value(args),
        &[&args.org, &args.comm],
        &args.out,
        &files,
    )
}

fn run_teams(args: &TeamsArgs) -> Result<(), CliError> {
    let edges = ingest::parse_org_csv(&args.org)?;
    let tree = match &args.root {
        Some(r) => orgnet_core::OrgTree::from_edges_rooted(&edges, r)?,
        None => orgnet_core::OrgTree::from_edges(&edges)?,
    };
    let teams = TeamPartition::extract(&tree, args.team_level, args.min_team_size);

    let mut teams_csv = String::from("node_id,team_id,division_id,label\n");
    for ix in 0..tree.len() as u32 {
        let (team, division, label) = match teams.label(ix) {
            orgnet_core::org::NodeLabel::Member(t) => {
                let team = &teams.teams()[t as usize];
                (team.id.as_str(), team.division.as_str(), "member")
            }
            orgnet_core::org::NodeLabel::Leadership => ("", "", "leadership"),
            orgnet_core::org::NodeLabel::Excluded => ("", "", "excluded"),
        };
        teams_csv.push_str(&format!("{},{},{},{}\n", tree.id(ix), team, division, label));
    }
    let mut summary = String::from("team_id,division_id,size,depth\n");
    for team in teams.teams() {
        summary.push_str(&format!(
            "{},{},{},{}\n",
            team.id,
            team.division,
            team.size(),
            team.depth
        ));
    }
    write_outputs(
        "teams",
        config_value(args),
        &[&args.org],
        &args.out,
        &[
            ("teams.csv".to_owned(), teams_csv),
            ("team_summary.csv".to_owned(), summary),
        ],
    )
}

fn run_measure(args: &MeasureArgs) -> Result<(), CliError> {
    let dataset = ingest::read_dataset(&args.dataset)?;
    let selection = if args.measures.is_empty()
        || args.measures.iter().any(|m| m.eq_ignore_ascii_case("all"))
    {
        MeasureName::all()
    } else {
        args.measures
            .iter()
            .map(|m| MeasureName::parse(m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?
    };
    let stat_pairs = if args.stat_pairs.is_empty() {
        orgnet_core::measures::default_stat_pairs()
    } else {
        args.stat_pairs
            .iter()
            .map(|pair| {
                let (a, b) = pair
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("bad stat pair {pair}, use tree:comm")))?;
                Ok((
                    TeamStat::parse(a).map_err(|e| CliError::Usage(e.to_string()))?,
                    TeamStat::parse(b).map_err(|e| CliError::Usage(e.to_string()))?,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?
    };
    let opts = MeasureOptions {
        selection,
        bins: args.bins,
        stat_pairs,
        full_graph_centralities: args.full_graph_centralities,
    };
    let files = report::run_measures(&dataset, &opts)?;
    let inputs = dataset_files(&args.dataset);
    write_outputs(
        "measure",
        config_value(args),
        &inputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        &args.out,
        &files,
    )
}

fn parse_kinds(kinds: &[String]) -> Result<Vec<DistanceKind>, CliError> {
    kinds
        .iter()
        .map(|k| {
            DistanceKind::parse(k).ok_or_else(|| CliError::Usage(format!("unknown distance kind {k}")))
        })
        .collect()
}

fn run_distance(args: &DistanceArgs) -> Result<(), CliError> {
    let dataset = ingest::read_dataset(&args.dataset)?;
    let kinds = parse_kinds(&args.kinds)?;
    let csv = report::distance_csv(&dataset, &kinds);
    let inputs = dataset_files(&args.dataset);
    write_outputs(
        "distance",
        config_value(args),
        &inputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        &args.out,
        &[("distances.csv".to_owned(), csv)],
    )
}

fn run_permtest(args: &PermtestArgs) -> Result<(), CliError> {
    let dataset = ingest::read_dataset(&args.dataset)?;
    let kinds = parse_kinds(&args.kinds)?;
    if kinds.contains(&DistanceKind::Rd) {
        return Err(CliError::Usage(
            "the symmetry test applies to the signed kinds (srd, drd)".into(),
        ));
    }
    let mut results = Vec::new();
    for kind in kinds {
        results.extend(permtest::team_symmetry_tests(
            &dataset,
            kind,
            args.permutations,
            args.seed,
            args.max_team_size,
        ));
    }
    let files = vec![
        ("permtest.json".to_owned(), report::permtest_json(&results)),
        (
            "permtest_nulls.csv".to_owned(),
            report::permtest_nulls_csv(&results),
        ),
    ];
    let inputs = dataset_files(&args.dataset);
    write_outputs(
        "permtest",
        config_value(args),
        &inputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        &args.out,
        &files,
    )
}

fn parse_methods(methods: &[String]) -> Result<Vec<Method>, CliError> {
    if methods.is_empty() {
        return Ok(Method::all());
    }
    methods
        .iter()
        .map(|m| Method::parse(m).ok_or_else(|| CliError::Usage(format!("unknown method {m}"))))
        .collect()
}

fn run_reconstruct(args: &ReconstructArgs) -> Result<(), CliError> {
    let dataset = ingest::read_dataset(&args.dataset)?;
    let methods = parse_methods(&args.methods)?;
    if args.decay <= 0.0 {
        return Err(CliError::Usage("decay must be positive".into()));
    }
    let mut per_team = Vec::new();
    for team in dataset.teams.teams() {
        if team.size() > args.size_cap {
            continue;
        }
        let comm = reconstruct::team_comm_graph(&dataset, team);
        let mut estimates = Vec::new();
        for &method in &methods {
            let estimate = match method {
                Method::MinSt => reconstruct::spanning_tree(&comm, reconstruct::Objective::Min)?,
                Method::MaxSt => reconstruct::spanning_tree(&comm, reconstruct::Objective::Max)?,
                Method::Agony => reconstruct::agony_ranking(&comm),
                Method::Distance => reconstruct::distance_hierarchy(&comm, args.decay),
            };
            // Export tree estimates oriented at the true team root.
            let estimate = match estimate.kind {
                reconstruct::EstimateKind::Tree => {
                    let oriented =
                        reconstruct::orient_from_root(&estimate, team.id.as_str())?;
                    reconstruct::HierarchyEstimate {
                        edges: oriented
                            .edges()
                            .map(|(c, p)| (c.clone(), p.clone()))
                            .collect(),
                        ..estimate
                    }
                }
                _ => estimate,
            };
            estimates.push(estimate);
        }
        per_team.push((team.id.as_str().to_owned(), estimates));
    }
    let csv = report::estimates_csv(&per_team);
    let inputs = dataset_files(&args.dataset);
    write_outputs(
        "reconstruct",
        config_value(args),
        &inputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        &args.out,
        &[("estimates.csv".to_owned(), csv)],
    )
}

fn run_evaluate(args: &ReconstructArgs) -> Result<(), CliError> {
    let dataset = ingest::read_dataset(&args.dataset)?;
    let methods = parse_methods(&args.methods)?;
    if args.decay <= 0.0 {
        return Err(CliError::Usage("decay must be positive".into()));
    }
    let opts = EvaluateOptions {
        methods,
        size_cap: args.size_cap,
        decay: args.decay,
    };
    let evaluation = reconstruct::evaluate_all(&dataset, &opts)?;
    for warning in &evaluation.warnings {
        eprintln!("orgnet: warning: {warning}");
    }
    let files = vec![
        ("evaluation.csv".to_owned(), report::evaluation_csv(&evaluation)),
        ("level_mse.csv".to_owned(), report::level_mse_csv(&evaluation)),
        ("evaluation.json".to_owned(), report::evaluation_json(&evaluation)),
    ];
    let inputs = dataset_files(&args.dataset);
    write_outputs(
        "evaluate",
        config_value(args),
        &inputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        &args.out,
        &files,
    )
}

fn run_synth(args: &SynthArgs) -> Result<(), CliError> {
    if args.teams == 0 || args.team_size == 0 {
        return Err(CliError::Usage("need at least one team and one member".into()));
    }
    let kind = DistanceKind::parse(&args.kind)
        .ok_or_else(|| CliError::Usage(format!("unknown distance kind {}", args.kind)))?;
    let form = match args.form.to_ascii_lowercase().as_str() {
        "exponential" | "exp" => DecayForm::Exponential,
        "power" => DecayForm::Power,
        other => return Err(CliError::Usage(format!("unknown decay form {other}"))),
    };
    if args.alpha < 0.0 || args.beta < 0.0 {
        return Err(CliError::Usage("alpha and beta must be non-negative".into()));
    }
    let config = PlantedConfig {
        team_sizes: vec![args.team_size; args.teams],
        mean_branching: args.branching,
        model: CommModel {
            distance_kind: kind,
            alpha: args.alpha,
            beta: args.beta,
            form,
            beta_down: args.beta_down,
        },
        cross_edges_per_node: args.cross_rate,
        min_team_size: args.min_team_size,
        seed: args.seed,
    };
    let dataset = config.build();
    let files = vec![
        ("org.csv".to_owned(), ingest::org_csv_string(&dataset.tree)),
        ("comm.csv".to_owned(), ingest::comm_csv_string(&dataset.comm)),
        ("teams.csv".to_owned(), ingest::teams_csv_string(&dataset)),
        (
            "provenance.json".to_owned(),
            serde_json::to_string_pretty(&dataset.provenance).expect("provenance serializes"),
        ),
    ];
    write_outputs("synth", config_value(args), &[], &args.out, &files)
}
