//! Acceptance suite: eleven criteria covering exact identities,
//! algorithm-vs-oracle equivalence, statistical calibration, planted
//! recovery, scale determinism, and the golden fixture pipeline.
//!
//! The criteria run sequentially inside one test so their timing is not
//! polluted by parallel test scheduling; one pass/fail line prints per
//! criterion (visible with `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orgnet_core::distance::{
    all_pairs_decomposition_dijkstra, decompose_path_ix, distance_profile, DistanceKind,
};
use orgnet_core::measures;
use orgnet_core::org::{CommGraph, Dataset, EmployeeId, OrgTree, Provenance, TeamPartition};
use orgnet_core::permtest;
use orgnet_core::reconstruct::{self, Method, Objective};
use orgnet_core::report;
use orgnet_core::synth::{self, CommModel, PlantedConfig};
use orgnet_core::DistanceError;

fn e(s: &str) -> EmployeeId {
    EmployeeId::from(s)
}

fn fixture_dataset() -> Dataset {
    let edges: Vec<(EmployeeId, EmployeeId)> = [
        ("A", "R"),
        ("B", "R"),
        ("a1", "A"),
        ("a2", "A"),
        ("b1", "B"),
        ("c1", "a1"),
    ]
    .iter()
    .map(|&(c, p)| (e(c), e(p)))
    .collect();
    let tree = OrgTree::from_edges(&edges).unwrap();
    let comm_edges: Vec<(EmployeeId, EmployeeId, u64)> = [
        ("a1", "a2", 5),
        ("a2", "a1", 3),
        ("a1", "b1", 2),
        ("A", "a1", 7),
        ("c1", "A", 1),
    ]
    .iter()
    .map(|&(s, d, w)| (e(s), e(d), w))
    .collect();
    let comm = CommGraph::with_nodes(tree.ids().to_vec(), &comm_edges).unwrap();
    let teams = TeamPartition::extract(&tree, 1, 1);
    Dataset::new(tree, comm, teams, Provenance::default()).unwrap()
}

fn check(cond: bool, message: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message.into())
    }
}

// --------------------------------------------------------------------
// 1. SRD level identity and triangle equality

fn criterion_1_srd_identity() -> Result<(), String> {
    let sizes = [3usize, 8, 15, 25, 40, 60, 90, 140, 220, 500];
    for i in 0..100u64 {
        let n = sizes[(i % 10) as usize];
        let branching = 1.5 + (i % 4) as f64;
        let tree = synth::random_org_tree(n, branching, 9000 + i);
        let n = tree.len();
        let mut srd = vec![0i64; n * n];
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                let d = decompose_path_ix(&tree, u, v);
                let s = d.n_up as i64 - d.n_down as i64;
                let level_diff = tree.level_ix(u) as i64 - tree.level_ix(v) as i64;
                check(s == level_diff, format!("tree {i}: srd({u},{v}) != level diff"))?;
                // Symmetry bridge: steps up one way are steps down back.
                let back = decompose_path_ix(&tree, v, u);
                check(d.n_up == back.n_down, format!("tree {i}: n_up/n_down bridge"))?;
                srd[u as usize * n + v as usize] = s;
            }
        }
        if n <= 60 {
            for u in 0..n {
                for v in 0..n {
                    for w in 0..n {
                        check(
                            srd[u * n + v] == srd[u * n + w] + srd[w * n + v],
                            format!("tree {i}: triangle equality fails at ({u},{v},{w})"),
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

// --------------------------------------------------------------------
// 2. Prime-weight Dijkstra equals the LCA decomposition

fn criterion_2_dijkstra_oracle() -> Result<(), String> {
    let mut produced = 0;
    let mut seed = 0u64;
    while produced < 50 {
        seed += 1;
        let n = 10 + ((seed as usize * 13) % 111);
        let tree = synth::random_org_tree(n, 1.8 + (seed % 3) as f64, 70_000 + seed);
        if tree.depth() > 33 {
            continue;
        }
        produced += 1;
        let mat = all_pairs_decomposition_dijkstra(&tree, 101, 3)
            .map_err(|err| format!("tree {seed}: {err}"))?;
        let n = tree.len();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                let direct = decompose_path_ix(&tree, u, v);
                check(
                    mat[u as usize * n + v as usize] == direct,
                    format!("tree {seed}: decomposition mismatch at ({u},{v})"),
                )?;
            }
        }
    }

    // A path tree of depth 40 exceeds the (101, 3) capacity.
    let chain: Vec<(EmployeeId, EmployeeId)> = (1..=40)
        .map(|i| (e(&format!("p{i:02}")), e(&format!("p{:02}", i - 1))))
        .collect();
    let path_tree = OrgTree::from_edges(&chain).unwrap();
    match all_pairs_decomposition_dijkstra(&path_tree, 101, 3) {
        Err(DistanceError::PrimeCapacityExceeded { p: 101, q: 3, depth: 40 }) => Ok(()),
        other => Err(format!("expected PrimeCapacityExceeded, got {other:?}")),
    }
}

// --------------------------------------------------------------------
// 3. Agony exactness

fn brute_force_agony(n: usize, edges: &[(u32, u32)]) -> u64 {
    let mut best = u64::MAX;
    let mut ranks = vec![0i64; n];
    loop {
        let agony: u64 = edges
            .iter()
            .map(|&(u, v)| (ranks[v as usize] - ranks[u as usize] + 1).max(0) as u64)
            .sum();
        best = best.min(agony);
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            ranks[i] += 1;
            if ranks[i] < n as i64 {
                break;
            }
            ranks[i] = 0;
            i += 1;
        }
    }
}

fn criterion_3_agony_exactness() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let mut produced = 0;
    while produced < 500 {
        let n = rng.gen_range(2..=5usize);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                if u != v && rng.gen_bool(0.4) {
                    edges.push((u, v));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        produced += 1;
        let named: Vec<(EmployeeId, EmployeeId, u64)> = edges
            .iter()
            .map(|&(u, v)| (e(&format!("n{u}")), e(&format!("n{v}")), 1))
            .collect();
        let comm = CommGraph::from_edges(&named).unwrap();
        let canon: Vec<(u32, u32)> = comm.edges_ix().map(|(u, v, _)| (u, v)).collect();
        let est = reconstruct::agony_ranking(&comm);
        let brute = brute_force_agony(comm.len(), &canon);
        check(
            est.objective == Some(brute),
            format!("digraph {produced}: got {:?}, brute force {brute}", est.objective),
        )?;
    }

    // Random DAGs achieve zero agony.
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + i);
        let n = 10 + (i as usize % 21);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.gen_bool(0.15) {
                    edges.push((e(&format!("n{u:02}")), e(&format!("n{v:02}")), 1u64));
                }
            }
        }
        if edges.is_empty() {
            edges.push((e("n00"), e("n01"), 1));
        }
        let comm = CommGraph::from_edges(&edges).unwrap();
        let est = reconstruct::agony_ranking(&comm);
        check(est.objective == Some(0), format!("DAG {i}: agony {:?}", est.objective))?;
    }
    Ok(())
}

// --------------------------------------------------------------------
// 4. Spanning-tree optimality

fn best_spanning_weight(n: usize, edges: &[(u32, u32, u64)], maximize: bool) -> u64 {
    let m = edges.len();
    let mut best: Option<u64> = None;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                x = p[x as usize];
            }
            x
        }
        let mut ok = true;
        let mut weight = 0;
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru == rv {
                    ok = false;
                    break;
                }
                parent[ru as usize] = rv;
                weight += w;
            }
        }
        if ok {
            best = Some(match best {
                None => weight,
                Some(b) if maximize => b.max(weight),
                Some(b) => b.min(weight),
            });
        }
    }
    best.expect("connected input")
}

fn criterion_4_spanning_optimality() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for case in 0..100 {
        let n = rng.gen_range(3..=8usize);
        let mut pairs: Vec<(u32, u32)> = (1..n as u32).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..rng.gen_range(0..=4) {
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            if a != b && !pairs.contains(&(a.min(b), a.max(b))) {
                pairs.push((a.min(b), a.max(b)));
            }
        }
        let weighted: Vec<(u32, u32, u64)> = pairs
            .iter()
            .map(|&(a, b)| (a, b, rng.gen_range(1..=9)))
            .collect();
        let edges: Vec<(EmployeeId, EmployeeId, u64)> = weighted
            .iter()
            .map(|&(a, b, w)| (e(&format!("n{a}")), e(&format!("n{b}")), w))
            .collect();
        let comm = CommGraph::from_edges(&edges).unwrap();
        for (obj, maximize) in [(Objective::Min, false), (Objective::Max, true)] {
            let est = reconstruct::spanning_tree(&comm, obj)
                .map_err(|err| format!("case {case}: {err}"))?;
            let total: u64 = est
                .edges
                .iter()
                .map(|(a, b)| {
                    comm.weight(a.as_str(), b.as_str()) + comm.weight(b.as_str(), a.as_str())
                })
                .sum();
            let brute = best_spanning_weight(n, &weighted, maximize);
            check(
                total == brute,
                format!("case {case} {obj:?}: weight {total} vs brute {brute}"),
            )?;
        }
    }
    Ok(())
}

// --------------------------------------------------------------------
// 5. Measures vs oracles and fixture hand values

fn modularity_oracle(comm: &CommGraph, labels: &[u32]) -> f64 {
    let n = comm.len();
    let mut w = vec![0.0_f64; n * n];
    for (u, v, wt) in comm.edges_ix() {
        w[u as usize * n + v as usize] += wt as f64;
        w[v as usize * n + u as usize] += wt as f64;
    }
    let two_m: f64 = w.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let s: Vec<f64> = (0..n).map(|u| w[u * n..(u + 1) * n].iter().sum()).collect();
    let mut q = 0.0;
    for u in 0..n {
        for v in 0..n {
            if labels[u] == labels[v] {
                q += w[u * n + v] - s[u] * s[v] / two_m;
            }
        }
    }
    q / two_m
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn criterion_5_measure_oracles() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for case in 0..200 {
        // Modularity against the brute-force double sum.
        let n = rng.gen_range(2..=30usize);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(0.2) {
                    edges.push((
                        e(&format!("n{u:02}")),
                        e(&format!("n{v:02}")),
                        rng.gen_range(1..=9u64),
                    ));
                }
            }
        }
        if !edges.is_empty() {
            let comm = CommGraph::from_edges(&edges).unwrap();
            let labels: Vec<u32> = (0..comm.len()).map(|_| rng.gen_range(0..4)).collect();
            let q = measures::weighted_modularity(&comm, &labels);
            let oracle = modularity_oracle(&comm, &labels);
            check(rel_close(q, oracle, 1e-10), format!("case {case}: Q {q} vs {oracle}"))?;
        }

        // Pearson against the textbook formula.
        let m = rng.gen_range(3..50);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if let Some(r) = measures::pearson(&x, &y).unwrap() {
            let mf = m as f64;
            let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let sxx: f64 = x.iter().map(|v| v * v).sum();
            let syy: f64 = y.iter().map(|v| v * v).sum();
            let textbook = (mf * sxy - sx * sy)
                / ((mf * sxx - sx * sx).sqrt() * (mf * syy - sy * sy).sqrt());
            check(rel_close(r, textbook, 1e-10), format!("case {case}: pearson"))?;
        }

        // OLS against the normal equations.
        let xs: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|v| 0.8 + 1.9 * v + rng.gen_range(-0.7..0.7))
            .collect();
        let fit = measures::ols(&xs, &ys).unwrap();
        let mf = m as f64;
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|v| v * v).sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let det = mf * sxx - sx * sx;
        let b1 = (mf * sxy - sx * sy) / det;
        let b0 = (sy - b1 * sx) / mf;
        check(
            rel_close(fit.beta0, b0, 1e-10) && rel_close(fit.beta1, b1, 1e-10),
            format!("case {case}: ols"),
        )?;
    }

    // Fixture hand computations, exact.
    let ds = fixture_dataset();
    let ei = measures::ei_index(&ds);
    check(ei.per_team[0].ei == Some((1.0 - 3.0) / 4.0), "EI(A)")?;
    check(ei.per_team[0].ei_weighted == Some((2.0 - 16.0) / 18.0), "EI_W(A)")?;
    check(ei.per_team[1].ei == Some(1.0), "EI(B)")?;
    check(ei.org == Some(-0.2), "org EI")?;

    check(measures::network_reciprocity(&ds.comm, false).unwrap() == 0.4, "r")?;
    check(
        measures::network_reciprocity(&ds.comm, true).unwrap() == 6.0 / 18.0,
        "weighted r",
    )?;

    let nr = measures::node_reciprocity(&ds.comm);
    let ix = |id: &str| ds.comm.index_of(id).unwrap() as usize;
    check(nr[ix("a1")].sent == Some(0.5) && nr[ix("a1")].received == Some(0.5), "SR/RR(a1)")?;
    check(nr[ix("A")].sent == Some(0.0) && nr[ix("A")].received == Some(0.0), "SR/RR(A)")?;

    let pos = measures::positions(&ds);
    check(pos[ix("A")].hp == Some(1.0), "HP(A)")?;
    check(pos[ix("c1")].hp == Some(-1.0), "HP(c1)")?;
    check(pos[ix("a1")].hp == Some(0.0), "HP(a1)")?;
    check(pos[ix("a1")].sp == Some(0.0), "SP(a1)")?;
    check(pos[ix("a1")].rp == Some(0.5), "RP(a1)")?;
    check(pos[ix("a1")].srd_hp == Some(0.0), "SRD HP(a1)")?;

    let mixing = measures::team_mixing_matrix(&ds);
    check(mixing.get(0, 0) == 0.5, "P(A,A)")?;
    check(mixing.get(0, 1) == 0.125, "P(A,B)")?;
    check(mixing.get(1, 0) == mixing.get(0, 1), "mixing symmetry")?;

    let deg = measures::degree_strength(&ds.comm);
    let a1 = &deg[ix("a1")];
    check(
        a1.in_degree == 2
            && a1.out_degree == 2
            && a1.total_degree == 3
            && a1.in_strength == 10
            && a1.out_strength == 7,
        "degree record a1",
    )?;
    Ok(())
}

// --------------------------------------------------------------------
// 6. Permutation-test calibration

fn criterion_6_permutation_calibration() -> Result<(), String> {
    let n_runs = 200;
    let mut rejections = 0;
    for run in 0..n_runs as u64 {
        let tree = synth::random_org_tree(60, 3.0, 60_000 + run);
        let mut rng = ChaCha8Rng::seed_from_u64(run);
        let n = tree.len() as u32;
        let mut pairs = Vec::with_capacity((n * (n - 1)) as usize);
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let srd = tree.level_ix(u) as i64 - tree.level_ix(v) as i64;
                // Independent identical weights per ordered pair.
                pairs.push((srd, rng.gen_range(0..6u64)));
            }
        }
        let result = permtest::permutation_symmetry_test(&pairs, DistanceKind::Srd, 500, run);
        if result.p_value <= 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / n_runs as f64;
    check(
        (0.02..=0.09).contains(&rate),
        format!("null rejection rate {rate} outside [0.02, 0.09]"),
    )?;

    // The constructed extreme separates completely.
    let mut pairs = Vec::new();
    for k in 1..=3i64 {
        for _ in 0..10 {
            pairs.push((k, 10u64));
            pairs.push((-k, 0u64));
        }
    }
    let result = permtest::permutation_symmetry_test(&pairs, DistanceKind::Srd, 500, 7);
    check(
        result.p_value <= 0.01,
        format!("extreme asymmetry p = {}", result.p_value),
    )
}

// --------------------------------------------------------------------
// 7. Power-law recovery

fn criterion_7_power_law() -> Result<(), String> {
    for seed in 0..10u64 {
        let samples = synth::sample_discrete_power_law(2.5, 1, 50_000, 700 + seed);
        let fit = measures::fit_power_law(&samples).map_err(|err| err.to_string())?;
        check(
            (fit.alpha - 2.5).abs() <= 0.2,
            format!("seed {seed}: alpha {} (x_min {})", fit.alpha, fit.x_min),
        )?;
    }
    Ok(())
}

// --------------------------------------------------------------------
// 8. Planted reconstruction ordering

fn criterion_8_planted_reconstruction() -> Result<(), String> {
    let mut frob: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut class_maxst = Vec::new();
    for i in 0..20u64 {
        let ds = PlantedConfig {
            team_sizes: vec![100 + 10 * i as usize; 2],
            model: CommModel::exponential(DistanceKind::Rd, 20.0, 2.0),
            seed: 800 + i,
            ..PlantedConfig::default()
        }
        .build();
        let report = reconstruct::evaluate_all(&ds, &Default::default())
            .map_err(|err| format!("dataset {i}: {err}"))?;
        for row in &report.rows {
            frob.entry(row.method.name()).or_default().push(row.frobenius);
            if row.method == Method::MaxSt {
                class_maxst.push(row.classification);
            }
        }
    }
    let median = |vals: &mut Vec<f64>| -> f64 {
        vals.sort_by(f64::total_cmp);
        let mid = vals.len() / 2;
        if vals.len() % 2 == 1 {
            vals[mid]
        } else {
            0.5 * (vals[mid - 1] + vals[mid])
        }
    };
    let max_median = median(frob.get_mut("maxst").ok_or("maxst rows missing")?);
    let min_median = median(frob.get_mut("minst").ok_or("minst rows missing")?);
    check(
        max_median < min_median,
        format!("MaxST median Frobenius {max_median} !< MinST {min_median}"),
    )?;
    let class_median = median(&mut class_maxst);
    check(
        class_median > 0.7,
        format!("MaxST median classification {class_median} <= 0.7"),
    )
}

// --------------------------------------------------------------------
// 9. Distance-profile shape

fn criterion_9_profile_shape() -> Result<(), String> {
    let mut sums: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
    for seed in 0..10u64 {
        let model = CommModel::exponential(DistanceKind::Rd, 20.0, 1.5);
        let ds = synth::planted_suite(2, 150, &model, 900 + seed);
        for team in ds.teams.teams() {
            let profile = distance_profile(&ds, team.id.as_str(), DistanceKind::Rd)
                .map_err(|err| err.to_string())?;
            for (d, bin) in &profile.bins {
                let entry = sums.entry(*d).or_insert((0.0, 0));
                entry.0 += bin.mean_emails * bin.pair_count as f64;
                entry.1 += bin.pair_count;
            }
        }
    }
    let mean_at = |d: i64| -> Result<f64, String> {
        let (w, c) = sums.get(&d).ok_or(format!("no pairs at RD {d}"))?;
        Ok(w / *c as f64)
    };
    let means = [mean_at(1)?, mean_at(2)?, mean_at(3)?, mean_at(4)?];
    for window in means.windows(2) {
        check(
            window[0] > window[1],
            format!("profile means not strictly decreasing: {means:?}"),
        )?;
    }
    Ok(())
}

// --------------------------------------------------------------------
// 10. Scale and thread determinism

fn scale_outputs(dataset: &Dataset) -> Vec<(String, String)> {
    let mut files = report::run_measures(dataset, &Default::default()).expect("measure suite");
    files.push((
        "distances.csv".to_owned(),
        report::distance_csv(
            dataset,
            &[DistanceKind::Rd, DistanceKind::Srd, DistanceKind::Drd],
        ),
    ));
    files
}

fn criterion_10_scale_determinism() -> Result<(), String> {
    let config = PlantedConfig {
        team_sizes: vec![2272; 88],
        mean_branching: 4.0,
        model: CommModel::exponential(DistanceKind::Rd, 180.0, 2.0),
        cross_edges_per_node: 2.0,
        min_team_size: 1,
        seed: 42,
    };
    let dataset = config.build();
    let n = dataset.n_nodes();
    let edges = dataset.comm.edge_count();
    check(
        (190_000..210_000).contains(&n),
        format!("organization size {n} not around 200k"),
    )?;
    check(
        (4_000_000..6_500_000).contains(&edges),
        format!("edge count {edges} not around 5M"),
    )?;

    let run = |threads: usize| -> (Vec<(String, String)>, f64) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        let start = Instant::now();
        let files = pool.install(|| scale_outputs(&dataset));
        (files, start.elapsed().as_secs_f64())
    };

    let (files_8, secs_8) = run(8);
    check(
        secs_8 < 600.0,
        format!("8-thread measure suite took {secs_8:.1}s (limit 600s)"),
    )?;
    let (files_1, _) = run(1);
    check(files_1.len() == files_8.len(), "file lists differ in length")?;
    for ((name_1, body_1), (name_8, body_8)) in files_1.iter().zip(&files_8) {
        check(name_1 == name_8, format!("file order differs: {name_1} vs {name_8}"))?;
        check(
            body_1 == body_8,
            format!("{name_1} differs between 1-thread and 8-thread runs"),
        )?;
    }
    println!(
        "    [scale: {n} nodes, {edges} edges, 8-thread suite {secs_8:.1}s]"
    );
    Ok(())
}

// --------------------------------------------------------------------
// 11. Golden fixture pipeline

fn run_golden_command(cwd: &Path, args: &[&str]) -> Result<(), String> {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_orgnet"))
        .current_dir(cwd)
        .args(args)
        .status()
        .map_err(|err| err.to_string())?;
    check(status.success(), format!("orgnet {args:?} failed: {status}"))
}

fn compare_tree(actual_root: &Path, golden_root: &Path, rel: &str) -> Result<(), String> {
    let golden_dir = golden_root.join(rel);
    let actual_dir = actual_root.join(rel);
    let mut names: Vec<String> = std::fs::read_dir(&golden_dir)
        .map_err(|err| format!("{}: {err}", golden_dir.display()))?
        .map(|entry| entry.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut actual_names: Vec<String> = std::fs::read_dir(&actual_dir)
        .map_err(|err| format!("{}: {err}", actual_dir.display()))?
        .map(|entry| entry.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    actual_names.sort();
    check(
        names == actual_names,
        format!("{rel}: file sets differ: golden {names:?} vs actual {actual_names:?}"),
    )?;
    for name in names {
        let golden = std::fs::read(golden_dir.join(&name)).map_err(|err| err.to_string())?;
        let actual = std::fs::read(actual_dir.join(&name)).map_err(|err| err.to_string())?;
        check(golden == actual, format!("{rel}/{name} differs from the golden copy"))?;
    }
    Ok(())
}

fn criterion_11_golden_fixture() -> Result<(), String> {
    let manifest_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let golden_root = manifest_dir.join("tests/golden");
    let tmp = tempfile::tempdir().map_err(|err| err.to_string())?;
    for name in ["f1_org.csv", "c1_comm.csv"] {
        std::fs::copy(manifest_dir.join("tests/fixtures").join(name), tmp.path().join(name))
            .map_err(|err| err.to_string())?;
    }
    run_golden_command(
        tmp.path(),
        &[
            "ingest",
            "--org",
            "f1_org.csv",
            "--comm",
            "c1_comm.csv",
            "--team-level",
            "1",
            "--min-team-size",
            "1",
            "-o",
            "ds",
        ],
    )?;
    run_golden_command(tmp.path(), &["measure", "ds", "-o", "measure", "--measures", "all"])?;
    run_golden_command(tmp.path(), &["distance", "ds", "-o", "distance"])?;

    for rel in ["ds", "measure", "distance"] {
        compare_tree(tmp.path(), &golden_root, rel)?;
    }
    Ok(())
}

// --------------------------------------------------------------------

type CriterionFn = fn() -> Result<(), String>;

#[test]
fn acceptance() {
    let criteria: Vec<(u32, &str, CriterionFn)> = vec![
        (1, "srd-level-identity-and-triangle-equality", criterion_1_srd_identity),
        (2, "prime-weight-dijkstra-oracle", criterion_2_dijkstra_oracle),
        (3, "agony-exactness", criterion_3_agony_exactness),
        (4, "spanning-tree-optimality", criterion_4_spanning_optimality),
        (5, "measures-vs-oracles-and-fixture", criterion_5_measure_oracles),
        (6, "permutation-test-calibration", criterion_6_permutation_calibration),
        (7, "power-law-recovery", criterion_7_power_law),
        (8, "planted-reconstruction-ordering", criterion_8_planted_reconstruction),
        (9, "distance-profile-shape", criterion_9_profile_shape),
        (10, "scale-and-thread-determinism", criterion_10_scale_determinism),
        (11, "golden-fixture-pipeline", criterion_11_golden_fixture),
    ];

    let mut failures = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("ACCEPTANCE {id:>2} {name:<44} PASS ({secs:.1}s)"),
            Err(message) => {
                println!("ACCEPTANCE {id:>2} {name:<44} FAIL ({secs:.1}s): {message}");
                failures.push(format!("criterion {id} ({name}): {message}"));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
