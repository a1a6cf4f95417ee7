//! Permutation test of communication symmetry about zero signed (or
//! directed) reporting distance.
//!
//! For a signed distance `d` over ordered in-team pairs, let
//! `S_k = {(u, v) : d(u, v) = k}`. The statistic
//!
//! `t(A) = sum_{k >= 1} (mean A over S_k - mean A over S_-k)^2`
//!
//! is compared against a null built by shuffling the multiset of pair
//! weights within each class `S_k U S_-k`, which preserves the weight
//! multiset per |k| and the total volume exactly. Replicates run on
//! independent random streams keyed by replicate index, so results are
//! identical for any thread count.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::{DistanceKind, TeamDistanceTally};
use crate::error::DistanceError;
use crate::org::Dataset;
use crate::par;

/// One |k| class: slot counts and weight sums on each side, plus the
/// nonzero weights scattered anywhere in `S_k U S_-k`.
#[derive(Debug, Clone, Default)]
struct SymmetryClass {
    n_pos: u64,
    n_neg: u64,
    pos_sum: u64,
    neg_sum: u64,
    nonzero: Vec<u64>,
}

/// Prepared per-class data for the symmetry statistic and its
/// permutation null.
#[derive(Debug, Clone)]
pub struct SymmetryClasses {
    classes: Vec<SymmetryClass>,
}

/// Test outcome. The p-value uses the add-one rule
/// `(1 + #{null >= observed}) / (1 + n_permutations)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SymmetryTestResult {
    pub distance_kind: DistanceKind,
    pub observed_t: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub null_samples: Vec<f64>,
}

impl SymmetryClasses {
    /// Builds classes from an explicit enumeration of ordered pairs as
    /// `(distance, weight)`. Suited to small inputs and tests; the
    /// dataset path below avoids materializing pairs.
    pub fn from_weighted_pairs(pairs: &[(i64, u64)]) -> SymmetryClasses {
        let mut map: BTreeMap<i64, SymmetryClass> = BTreeMap::new();
        for &(d, w) in pairs {
            if d == 0 {
                continue;
            }
            let class = map.entry(d.abs()).or_default();
            if d > 0 {
                class.n_pos += 1;
                class.pos_sum += w;
            } else {
                class.n_neg += 1;
                class.neg_sum += w;
            }
            if w > 0 {
                class.nonzero.push(w);
            }
        }
        SymmetryClasses {
            classes: map.into_values().collect(),
        }
    }

    /// Builds classes for one team of a dataset without enumerating
    /// pairs: class sizes come from the tree's level structure, weights
    /// from the team's edges.
    pub fn for_team(
        dataset: &Dataset,
        team_id: &str,
        kind: DistanceKind,
    ) -> Result<SymmetryClasses, DistanceError> {
        assert!(
            matches!(kind, DistanceKind::Srd | DistanceKind::Drd),
            "the symmetry test applies to the signed kinds"
        );
        let team = dataset
            .teams
            .team(team_id)
            .ok_or_else(|| DistanceError::UnknownTeam(team_id.to_owned()))?;
        let tally = TeamDistanceTally::new(dataset, team);
        let pair_counts = tally.pair_counts(kind);
        let weight_sums = tally.weight_sums(kind);

        let mut map: BTreeMap<i64, SymmetryClass> = BTreeMap::new();
        for (&d, &count) in &pair_counts {
            if d == 0 {
                continue;
            }
            let class = map.entry(d.abs()).or_default();
            let sum = weight_sums.get(&d).copied().unwrap_or(0);
            if d > 0 {
                class.n_pos += count;
                class.pos_sum += sum;
            } else {
                class.n_neg += count;
                class.neg_sum += sum;
            }
        }

        // Nonzero weights per class, in canonical edge order.
        let tree = &dataset.tree;
        let mut in_team = vec![false; tree.len()];
        for &m in &team.members {
            in_team[m as usize] = true;
        }
        for &u in &team.members {
            for (v, w) in dataset.comm.out_edges(u) {
                if !in_team[v as usize] {
                    continue;
                }
                let dec = crate::distance::decompose_path_ix(tree, u, v);
                let rd = (dec.n_up + dec.n_down) as i64;
                let srd = dec.n_up as i64 - dec.n_down as i64;
                let d = match kind {
                    DistanceKind::Srd => srd,
                    DistanceKind::Drd => rd * srd.signum(),
                    DistanceKind::Rd => unreachable!(),
                };
                if d != 0 {
                    map.get_mut(&d.abs())
                        .expect("every edge distance has a pair class")
                        .nonzero
                        .push(w);
                }
            }
        }
        Ok(SymmetryClasses {
            classes: map.into_values().collect(),
        })
    }

    /// The observed statistic. Classes with an empty side are skipped
    /// (the difference of means is undefined there).
    pub fn statistic(&self) -> f64 {
        self.classes
            .iter()
            .filter(|c| c.n_pos > 0 && c.n_neg > 0)
            .map(|c| {
                let diff = c.pos_sum as f64 / c.n_pos as f64 - c.neg_sum as f64 / c.n_neg as f64;
                diff * diff
            })
            .sum()
    }

    /// One null draw: within each class, scatter the nonzero weights
    /// over distinct slots chosen uniformly among the `n_pos + n_neg`
    /// pair slots, then recompute the statistic. Only the positive-side
    /// sum needs sampling (sequential without-replacement allocation).
    fn null_statistic(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut t = 0.0;
        for c in &self.classes {
            if c.n_pos == 0 || c.n_neg == 0 {
                continue;
            }
            let mut pos_slots = c.n_pos;
            let mut total_slots = c.n_pos + c.n_neg;
            let mut pos_sum = 0u64;
            for &w in &c.nonzero {
                if rng.gen_range(0..total_slots) < pos_slots {
                    pos_sum += w;
                    pos_slots -= 1;
                }
                total_slots -= 1;
            }
            let neg_sum = c.pos_sum + c.neg_sum - pos_sum;
            let diff = pos_sum as f64 / c.n_pos as f64 - neg_sum as f64 / c.n_neg as f64;
            t += diff * diff;
        }
        t
    }

    /// Seeded permutation test with `n_perm` replicates on independent
    /// streams.
    pub fn permutation_test(
        &self,
        kind: DistanceKind,
        n_perm: usize,
        seed: u64,
    ) -> SymmetryTestResult {
        assert!(n_perm >= 1, "need at least one permutation");
        let observed = self.statistic();
        let null_samples = par::map_indexed(n_perm, |rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64 + 1);
            self.null_statistic(&mut rng)
        });
        let exceed = null_samples.iter().filter(|&&t| t >= observed).count();
        SymmetryTestResult {
            distance_kind: kind,
            observed_t: observed,
            p_value: (1 + exceed) as f64 / (1 + n_perm) as f64,
            n_permutations: n_perm,
            null_samples,
        }
    }
}

/// Symmetry statistic for explicit `(distance, weight)` ordered pairs.
pub fn symmetry_statistic(pairs: &[(i64, u64)]) -> f64 {
    SymmetryClasses::from_weighted_pairs(pairs).statistic()
}

/// Seeded test over explicit `(distance, weight)` ordered pairs.
pub fn permutation_symmetry_test(
    pairs: &[(i64, u64)],
    kind: DistanceKind,
    n_perm: usize,
    seed: u64,
) -> SymmetryTestResult {
    SymmetryClasses::from_weighted_pairs(pairs).permutation_test(kind, n_perm, seed)
}

/// Runs the test for every team at or below the size cutoff; returns
/// `(team id, result)` in team order.
pub fn team_symmetry_tests(
    dataset: &Dataset,
    kind: DistanceKind,
    n_perm: usize,
    seed: u64,
    max_team_size: usize,
) -> Vec<(String, SymmetryTestResult)> {
    dataset
        .teams
        .teams()
        .iter()
        .filter(|t| t.size() <= max_team_size)
        .map(|t| {
            let classes = SymmetryClasses::for_team(dataset, t.id.as_str(), kind)
                .expect("team ids come from the partition");
            (
                t.id.as_str().to_owned(),
                classes.permutation_test(kind, n_perm, seed),
            )
        })
        .collect()
}
