//! Two-level clustering of the SOM codebook: seeded k-means++ over node
//! weights, automatic cluster-count selection by mean silhouette, user
//! assignment through the best-matching unit, and per-feature significance
//! as the scaled correlation ratio.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::som::{best_matching_unit, derive_seed, SomGrid};

const MAX_LLOYD_ITERATIONS: usize = 300;
const KMEANS_RESTARTS: u64 = 10;

/// Partition of SOM nodes into k clusters. Cluster ids are canonical:
/// cluster 0 has the largest centroid first component (the message-count
/// feature), descending thereafter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// Cluster id per node linear index.
    pub node_to_cluster: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// K-means over the node weight vectors: seeded k-means++ initialization,
/// Lloyd iterations to an assignment fixed point, empty clusters repaired by
/// reseeding to the farthest point. Ten restarts with derived seeds; the run
/// with the lowest final WCSS wins, ties going to the earliest restart.
pub fn kmeans_codebook(grid: &SomGrid, k: usize, seed: u64) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::Numeric("k must be positive".into()));
    }
    if k > grid.node_count() {
        return Err(Error::Numeric(format!(
            "k = {k} exceeds node count {}",
            grid.node_count()
        )));
    }
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let (assignments, centroids, history) =
            kmeans_points(&grid.weights, k, derive_seed(seed, restart));
        let wcss = history.last().copied().unwrap_or(f64::INFINITY);
        if best.as_ref().is_none_or(|(w, _, _)| wcss < *w) {
            best = Some((wcss, assignments, centroids));
        }
    }
    let (_, assignments, centroids) = best.unwrap();
    Ok(canonical_relabel(assignments, centroids))
}

/// Lloyd's algorithm. Returns `(assignments, centroids, wcss per iteration)`.
fn kmeans_points(points: &[Vec<f64>], k: usize, seed: u64) -> (Vec<usize>, Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut assignments = vec![0usize; points.len()];
    let mut history = Vec::new();

    for _ in 0..MAX_LLOYD_ITERATIONS {
        let new_assignments: Vec<usize> = points
            .iter()
            .map(|p| nearest_centroid(p, &centroids))
            .collect();
        let mut counts = vec![0usize; k];
        for &c in &new_assignments {
            counts[c] += 1;
        }
        let mut assignments_now = new_assignments;
        // Reseed each empty cluster to the point farthest from its centroid.
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let mut far_idx = None;
            let mut far_d = -1.0;
            for (i, p) in points.iter().enumerate() {
                let c = assignments_now[i];
                if counts[c] <= 1 {
                    continue;
                }
                let d = dist_sq(p, &centroids[c]);
                if d > far_d {
                    far_d = d;
                    far_idx = Some(i);
                }
            }
            if let Some(i) = far_idx {
                counts[assignments_now[i]] -= 1;
                assignments_now[i] = empty;
                counts[empty] = 1;
            }
        }

        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &c) in points.iter().zip(&assignments_now) {
            for (s, &v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for (c, sum) in sums.iter_mut().enumerate() {
            if counts[c] > 0 {
                for v in sum.iter_mut() {
                    *v /= counts[c] as f64;
                }
            } else {
                *sum = centroids[c].clone();
            }
        }
        centroids = sums;

        let wcss: f64 = points
            .iter()
            .zip(&assignments_now)
            .map(|(p, &c)| dist_sq(p, &centroids[c]))
            .sum();
        history.push(wcss);

        if assignments_now == assignments {
            break;
        }
        assignments = assignments_now;
    }
    (assignments, centroids, history)
}

fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = dist_sq(p, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let first = rng.gen_range(0..points.len());
    centers.push(points[first].clone());
    chosen.push(first);

    let mut dists: Vec<f64> = points.iter().map(|p| dist_sq(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dists.iter().sum();
        let idx = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &d) in dists.iter().enumerate() {
                if r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            // All remaining distances zero: take the first unchosen index.
            (0..points.len())
                .find(|i| !chosen.contains(i))
                .unwrap_or(0)
        };
        chosen.push(idx);
        centers.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            let d = dist_sq(p, centers.last().unwrap());
            if d < dists[i] {
                dists[i] = d;
            }
        }
    }
    centers
}

/// Relabels clusters so that ids descend by centroid first component.
/// A pure permutation of ids: memberships are unchanged.
fn canonical_relabel(assignments: Vec<usize>, centroids: Vec<Vec<f64>>) -> ClusterModel {
    let k = centroids.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        centroids[b][0]
            .partial_cmp(&centroids[a][0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut relabel = vec![0usize; k];
    for (new_id, &old_id) in order.iter().enumerate() {
        relabel[old_id] = new_id;
    }
    let node_to_cluster = assignments.into_iter().map(|c| relabel[c]).collect();
    let centroids = order.into_iter().map(|old| centroids[old].clone()).collect();
    ClusterModel {
        k,
        node_to_cluster,
        centroids,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoClusterOutcome {
    pub model: ClusterModel,
    pub silhouette: f64,
    /// Set when all node weights are identical and k_min was returned.
    pub degenerate: bool,
}

/// Selects k in `[k_min, k_max]` maximizing the mean silhouette of the node
/// weights; ties break toward smaller k.
pub fn auto_cluster_count(
    grid: &SomGrid,
    k_min: usize,
    k_max: usize,
    seed: u64,
) -> Result<AutoClusterOutcome> {
    if k_min < 2 {
        return Err(Error::Numeric("k_min must be at least 2".into()));
    }
    let k_max = k_max.min(grid.node_count());
    if k_min > k_max {
        return Err(Error::Numeric(format!(
            "empty k range [{k_min}, {k_max}] for {} nodes",
            grid.node_count()
        )));
    }

    let first = &grid.weights[0];
    if grid.weights.iter().all(|w| w == first) {
        // Degenerate codebook: any split is arbitrary; return k_min.
        let node_to_cluster: Vec<usize> = (0..grid.node_count()).map(|n| n % k_min).collect();
        let centroids = vec![first.clone(); k_min];
        return Ok(AutoClusterOutcome {
            model: ClusterModel {
                k: k_min,
                node_to_cluster,
                centroids,
            },
            silhouette: 0.0,
            degenerate: true,
        });
    }

    let mut best: Option<(f64, ClusterModel)> = None;
    for k in k_min..=k_max {
        let model = kmeans_codebook(grid, k, derive_seed(seed, k as u64))?;
        let score = mean_silhouette(&grid.weights, &model.node_to_cluster, k);
        let better = match &best {
            Some((best_score, _)) => score > *best_score,
            None => true,
        };
        if better {
            best = Some((score, model));
        }
    }
    let (silhouette, model) = best.expect("k range is non-empty");
    Ok(AutoClusterOutcome {
        model,
        silhouette,
        degenerate: false,
    })
}

/// Mean silhouette coefficient over all points. Points in singleton clusters
/// score 0, as do points where both mean distances vanish.
pub fn mean_silhouette(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let mut cluster_sizes = vec![0usize; k];
    for &l in labels {
        cluster_sizes[l] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        if cluster_sizes[own] <= 1 {
            continue; // silhouette 0
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            sums[labels[j]] += dist_sq(&points[i], &points[j]).sqrt();
        }
        let a = sums[own] / (cluster_sizes[own] - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != own && cluster_sizes[c] > 0 {
                b = b.min(sums[c] / cluster_sizes[c] as f64);
            }
        }
        let denom = a.max(b);
        if denom > 0.0 && b.is_finite() {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Maps each user row to the cluster of its best-matching unit.
pub fn assign_users(
    grid: &SomGrid,
    model: &ClusterModel,
    matrix: &FeatureMatrix,
) -> BTreeMap<String, usize> {
    matrix
        .user_ids
        .iter()
        .zip(&matrix.rows)
        .map(|(user_id, row)| {
            let bmu = best_matching_unit(grid, row);
            (user_id.clone(), model.node_to_cluster[bmu])
        })
        .collect()
}

/// Per-feature significance scores in [0, 100], aligned with the feature
/// order of the matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub scores: Vec<f64>,
}

/// Correlation ratio (between-cluster variance over total variance) per
/// feature, scaled so the maximum feature scores 100. Constant features
/// score 0.
pub fn field_significance(
    matrix: &FeatureMatrix,
    assignments: &BTreeMap<String, usize>,
) -> Result<SignificanceReport> {
    let labels: Vec<usize> = matrix
        .user_ids
        .iter()
        .map(|id| {
            assignments
                .get(id)
                .copied()
                .ok_or_else(|| Error::Schema(format!("user `{id}` missing from assignments")))
        })
        .collect::<Result<_>>()?;
    let distinct: BTreeSet<usize> = labels.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::Numeric(
            "significance is undefined for a single cluster; provide at least two".into(),
        ));
    }

    let etas: Vec<f64> = (0..matrix.n_features())
        .map(|j| {
            let values: Vec<f64> = matrix.rows.iter().map(|r| r[j]).collect();
            eta_squared(&values, &labels)
        })
        .collect();
    let max = etas.iter().cloned().fold(0.0f64, f64::max);
    let scores = if max > 0.0 {
        etas.iter().map(|&e| e / max * 100.0).collect()
    } else {
        vec![0.0; etas.len()]
    };
    Ok(SignificanceReport { scores })
}

/// Between-cluster variance divided by total variance; 0 for constant data.
pub fn eta_squared(values: &[f64], labels: &[usize]) -> f64 {
    let n = values.len() as f64;
    let grand = values.iter().sum::<f64>() / n;
    let total: f64 = values.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>() / n;
    if total == 0.0 {
        return 0.0;
    }
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (&v, &l) in values.iter().zip(labels) {
        let e = sums.entry(l).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let between: f64 = sums
        .values()
        .map(|&(sum, count)| {
            let mean = sum / count as f64;
            count as f64 * (mean - grand) * (mean - grand)
        })
        .sum::<f64>()
        / n;
    between / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn grid_of(weights: Vec<Vec<f64>>, width: usize) -> SomGrid {
        let height = weights.len() / width;
        let dim = weights[0].len();
        SomGrid {
            width,
            height,
            dim,
            weights,
        }
    }

    fn blob_grid(centers: &[Vec<f64>], per_blob: usize, spread: f64, seed: u64) -> SomGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        for c in centers {
            for _ in 0..per_blob {
                weights.push(
                    c.iter()
                        .map(|&v| v + (rng.gen::<f64>() - 0.5) * 2.0 * spread)
                        .collect(),
                );
            }
        }
        let n = weights.len();
        grid_of(weights, n)
    }

    #[test]
    fn k_equals_node_count() {
        let grid = grid_of(
            (0..6).map(|i| vec![i as f64, 0.0]).collect(),
            3,
        );
        let model = kmeans_codebook(&grid, 6, 1).unwrap();
        let distinct: BTreeSet<usize> = model.node_to_cluster.iter().copied().collect();
        assert_eq!(distinct.len(), 6);
        // Zero within-cluster variance: each centroid equals its node.
        for (n, &c) in model.node_to_cluster.iter().enumerate() {
            assert_eq!(model.centroids[c], grid.weights[n]);
        }
    }

    #[test]
    fn k_one_gives_global_mean() {
        let grid = grid_of(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0]], 3);
        let model = kmeans_codebook(&grid, 1, 1).unwrap();
        assert_eq!(model.centroids[0], vec![1.0, 2.0]);
        assert!(model.node_to_cluster.iter().all(|&c| c == 0));
    }

    #[test]
    fn k_exceeding_nodes_is_error() {
        let grid = grid_of(vec![vec![0.0], vec![1.0]], 2);
        assert!(kmeans_codebook(&grid, 3, 1).is_err());
    }

    #[test]
    fn two_blobs_match_exhaustive_optimum() {
        let grid = blob_grid(&[vec![0.0, 0.0], vec![5.0, 5.0]], 5, 0.2, 3);
        let model = kmeans_codebook(&grid, 2, 7).unwrap();

        // Exhaustive search over all 2-partitions of 10 points.
        let points = &grid.weights;
        let n = points.len();
        let mut best_mask = 0usize;
        let mut best_wcss = f64::INFINITY;
        for mask in 1..(1usize << n) - 1 {
            let mut wcss = 0.0;
            for side in 0..2 {
                let members: Vec<&Vec<f64>> = (0..n)
                    .filter(|&i| ((mask >> i) & 1) == side)
                    .map(|i| &points[i])
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let dim = members[0].len();
                let mut mean = vec![0.0; dim];
                for m in &members {
                    for (j, &v) in m.iter().enumerate() {
                        mean[j] += v / members.len() as f64;
                    }
                }
                for m in &members {
                    wcss += dist_sq(m, &mean);
                }
            }
            if wcss < best_wcss {
                best_wcss = wcss;
                best_mask = mask;
            }
        }
        let optimal: Vec<usize> = (0..n).map(|i| (best_mask >> i) & 1).collect();
        // Compare as partitions (labels may be swapped).
        let same: bool = (0..n).all(|i| {
            (0..n).all(|j| {
                (optimal[i] == optimal[j])
                    == (model.node_to_cluster[i] == model.node_to_cluster[j])
            })
        });
        assert!(same, "k-means did not find the optimal 2-partition");
    }

    #[test]
    fn wcss_non_increasing() {
        let grid = blob_grid(
            &[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]],
            8,
            0.8,
            4,
        );
        let (_, _, history) = kmeans_points(&grid.weights, 3, 5);
        for pair in history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn canonical_relabel_orders_by_first_component() {
        let grid = blob_grid(&[vec![0.1, 0.0], vec![0.9, 0.0]], 4, 0.01, 6);
        let model = kmeans_codebook(&grid, 2, 9).unwrap();
        assert!(model.centroids[0][0] > model.centroids[1][0]);
    }

    #[test]
    fn relabeling_is_pure_permutation() {
        let assignments = vec![0, 0, 1, 1, 2];
        let centroids = vec![vec![0.2], vec![0.9], vec![0.5]];
        let model = canonical_relabel(assignments.clone(), centroids);
        // Memberships preserved.
        for i in 0..assignments.len() {
            for j in 0..assignments.len() {
                assert_eq!(
                    assignments[i] == assignments[j],
                    model.node_to_cluster[i] == model.node_to_cluster[j]
                );
            }
        }
        assert_eq!(model.centroids, vec![vec![0.9], vec![0.5], vec![0.2]]);
    }

    #[test]
    fn auto_count_recovers_three_blobs() {
        let grid = blob_grid(
            &[vec![0.0, 0.0, 0.0], vec![5.0, 0.0, 0.0], vec![0.0, 5.0, 0.0]],
            10,
            0.2,
            12,
        );
        let outcome = auto_cluster_count(&grid, 2, 8, 99).unwrap();
        assert_eq!(outcome.model.k, 3);
        assert!(!outcome.degenerate);
    }

    #[test]
    fn degenerate_grid_returns_k_min() {
        let grid = grid_of(vec![vec![0.3, 0.3]; 8], 4);
        let outcome = auto_cluster_count(&grid, 2, 5, 1).unwrap();
        assert!(outcome.degenerate);
        assert_eq!(outcome.model.k, 2);
        let mut counts = vec![0; 2];
        for &c in &outcome.model.node_to_cluster {
            counts[c] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn two_blob_silhouette_beats_any_three_way() {
        let grid = blob_grid(&[vec![0.0, 0.0], vec![6.0, 6.0]], 6, 0.3, 8);
        let two = kmeans_codebook(&grid, 2, 3).unwrap();
        let s2 = mean_silhouette(&grid.weights, &two.node_to_cluster, 2);
        for seed in 0..5 {
            let three = kmeans_codebook(&grid, 3, seed).unwrap();
            let s3 = mean_silhouette(&grid.weights, &three.node_to_cluster, 3);
            assert!(s2 > s3);
        }
    }

    #[test]
    fn silhouette_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let labels: Vec<usize> = (0..40).map(|_| rng.gen_range(0..3)).collect();
        let got = mean_silhouette(&points, &labels, 3);

        // Direct pairwise-distance implementation.
        let n = points.len();
        let mut total = 0.0;
        for i in 0..n {
            let same: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
            if same.is_empty() {
                continue;
            }
            let a: f64 = same
                .iter()
                .map(|&j| dist_sq(&points[i], &points[j]).sqrt())
                .sum::<f64>()
                / same.len() as f64;
            let mut b = f64::INFINITY;
            for c in 0..3 {
                if c == labels[i] {
                    continue;
                }
                let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                if other.is_empty() {
                    continue;
                }
                let mean = other
                    .iter()
                    .map(|&j| dist_sq(&points[i], &points[j]).sqrt())
                    .sum::<f64>()
                    / other.len() as f64;
                b = b.min(mean);
            }
            let s = (b - a) / a.max(b);
            total += s;
            assert!((-1.0..=1.0).contains(&s));
        }
        let expected = total / n as f64;
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn assign_users_is_total_and_consistent() {
        let grid = blob_grid(&[vec![0.0, 0.0], vec![1.0, 1.0]], 3, 0.05, 20);
        let model = kmeans_codebook(&grid, 2, 2).unwrap();
        let matrix = FeatureMatrix::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            vec![grid.weights[0].clone(), grid.weights[4].clone(), grid.weights[0].clone()],
        )
        .unwrap();
        let assigned = assign_users(&grid, &model, &matrix);
        assert_eq!(assigned.len(), 3);
        assert_eq!(assigned["a"], model.node_to_cluster[0]);
        assert_eq!(assigned["b"], model.node_to_cluster[4]);
        assert_eq!(assigned["a"], assigned["c"]);
    }

    fn simple_assignments(labels: &[usize]) -> (FeatureMatrix, BTreeMap<String, usize>) {
        let ids: Vec<String> = (0..labels.len()).map(|i| format!("u{i}")).collect();
        let assignments = ids
            .iter()
            .cloned()
            .zip(labels.iter().copied())
            .collect();
        (
            FeatureMatrix {
                user_ids: ids,
                rows: Vec::new(),
            },
            assignments,
        )
    }

    #[test]
    fn significance_boundary_cases() {
        let labels = vec![0, 0, 1, 1];
        let (mut matrix, assignments) = simple_assignments(&labels);
        matrix.rows = vec![
            vec![1.0, 0.5, 0.3],
            vec![1.0, 0.5, 0.4],
            vec![9.0, 0.5, 0.35],
            vec![9.0, 0.5, 0.45],
        ];
        let report = field_significance(&matrix, &assignments).unwrap();
        assert_eq!(report.scores[0], 100.0); // perfect separator
        assert_eq!(report.scores[1], 0.0); // constant
        assert!(report.scores[2] < 100.0);
    }

    #[test]
    fn eta_squared_hand_computed() {
        // Clusters {0,0} and {1,1} on values [0,0,1,1]: perfect separation.
        assert!((eta_squared(&[0.0, 0.0, 1.0, 1.0], &[0, 0, 1, 1]) - 1.0).abs() < 1e-12);
        // Second feature: values [1,3,2,4], clusters {1,3} and {2,4}.
        // grand = 2.5; total var = (2.25+0.25+0.25+2.25)/4 = 1.25
        // means 2 and 3; between = (2*0.25 + 2*0.25)/4 = 0.25; eta2 = 0.2
        let eta = eta_squared(&[1.0, 3.0, 2.0, 4.0], &[0, 0, 1, 1]);
        assert!((eta - 0.2).abs() < 1e-9);
    }

    #[test]
    fn single_cluster_is_error() {
        let labels = vec![0, 0, 0];
        let (mut matrix, assignments) = simple_assignments(&labels);
        matrix.rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert!(field_significance(&matrix, &assignments).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn significance_invariant_under_affine_rescaling(
            scale in 0.01f64..50.0,
            shift in -10.0f64..10.0,
        ) {
            let labels = vec![0, 0, 1, 1, 1, 0];
            let (mut matrix, assignments) = simple_assignments(&labels);
            matrix.rows = vec![
                vec![1.0, 0.1], vec![2.0, 0.4], vec![8.0, 0.2],
                vec![9.0, 0.5], vec![7.5, 0.3], vec![1.5, 0.6],
            ];
            let base = field_significance(&matrix, &assignments).unwrap();
            for row in &mut matrix.rows {
                row[1] = row[1] * scale + shift;
            }
            let rescaled = field_significance(&matrix, &assignments).unwrap();
            for (a, b) in base.scores.iter().zip(&rescaled.scores) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }
}
