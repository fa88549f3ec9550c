//! Cluster interpretation: which clusters look like troll clusters, and the
//! final per-user report.
//!
//! A cluster is flagged when its centroid message count (in raw units) sits
//! more than `z_threshold` standard deviations above the per-user mean AND
//! the cluster is small (at most `max_cluster_fraction` of all users). Both
//! thresholds are configurable and the report always carries the full
//! per-cluster centroid table so a human can override the call.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterModel, SignificanceReport};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, NormalizationParams, FEATURE_NAMES};
use crate::som::SomConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    pub z_threshold: f64,
    pub max_cluster_fraction: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            z_threshold: 2.0,
            max_cluster_fraction: 0.2,
        }
    }
}

/// Flags clusters with an extreme message-count centroid. May return the
/// empty set (a discussion without trolls).
pub fn identify_troll_clusters(
    model: &ClusterModel,
    raw_matrix: &FeatureMatrix,
    assignments: &BTreeMap<String, usize>,
    norm: &NormalizationParams,
    params: &DetectParams,
) -> BTreeSet<usize> {
    let n = raw_matrix.n_rows();
    if n == 0 {
        return BTreeSet::new();
    }
    let m_values: Vec<f64> = raw_matrix.rows.iter().map(|r| r[0]).collect();
    let mean = m_values.iter().sum::<f64>() / n as f64;
    let var = m_values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let threshold = mean + params.z_threshold * std;

    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in assignments.values() {
        *sizes.entry(c).or_default() += 1;
    }

    let max_size = params.max_cluster_fraction * n as f64;
    let mut flagged = BTreeSet::new();
    for (c, centroid) in model.centroids.iter().enumerate() {
        let centroid_m = norm.denormalize_value(0, centroid[0]);
        let size = sizes.get(&c).copied().unwrap_or(0);
        if centroid_m > threshold && (size as f64) <= max_size {
            flagged.insert(c);
        }
    }
    flagged
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub cluster: usize,
    /// Raw (denormalized) feature vector, frozen column order.
    pub features: Vec<f64>,
    pub troll: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub id: usize,
    /// Number of users assigned to the cluster.
    pub size: usize,
    /// Centroid in raw feature units.
    pub centroid: Vec<f64>,
    pub troll: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    /// Percent, rounded to one decimal.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub grid_width: usize,
    pub grid_height: usize,
    pub k: usize,
    pub som: SomConfig,
    pub detect: DetectParams,
}

/// Final pipeline output: one record per user, one per cluster, the feature
/// significance table, and the model metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrollReport {
    pub users: Vec<UserRecord>,
    pub clusters: Vec<ClusterRecord>,
    pub significance: Vec<FeatureScore>,
    pub meta: ReportMeta,
}

impl TrollReport {
    pub fn flagged_users(&self) -> Vec<&str> {
        self.users
            .iter()
            .filter(|u| u.troll)
            .map(|u| u.user_id.as_str())
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_report(
    raw_matrix: &FeatureMatrix,
    norm: &NormalizationParams,
    model: &ClusterModel,
    assignments: &BTreeMap<String, usize>,
    significance: &SignificanceReport,
    troll_clusters: &BTreeSet<usize>,
    som_config: &SomConfig,
    detect_params: &DetectParams,
) -> Result<TrollReport> {
    if assignments.len() != raw_matrix.n_rows() {
        return Err(Error::Schema(format!(
            "assignments cover {} users but matrix has {} rows",
            assignments.len(),
            raw_matrix.n_rows()
        )));
    }

    let mut users = Vec::with_capacity(raw_matrix.n_rows());
    for (user_id, row) in raw_matrix.user_ids.iter().zip(&raw_matrix.rows) {
        let cluster = *assignments
            .get(user_id)
            .ok_or_else(|| Error::Schema(format!("user `{user_id}` missing from assignments")))?;
        users.push(UserRecord {
            user_id: user_id.clone(),
            cluster,
            features: row.clone(),
            troll: troll_clusters.contains(&cluster),
        });
    }
    users.sort_by(|a, b| a.user_id.cmp(&b.user_id));

    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in assignments.values() {
        *sizes.entry(c).or_default() += 1;
    }
    let clusters: Vec<ClusterRecord> = model
        .centroids
        .iter()
        .enumerate()
        .map(|(id, centroid)| ClusterRecord {
            id,
            size: sizes.get(&id).copied().unwrap_or(0),
            centroid: norm.denormalize_row(centroid),
            troll: troll_clusters.contains(&id),
        })
        .collect();

    if significance.scores.len() != FEATURE_NAMES.len() {
        return Err(Error::Schema("significance length mismatch".into()));
    }
    let significance = FEATURE_NAMES
        .iter()
        .zip(&significance.scores)
        .map(|(name, &score)| FeatureScore {
            feature: name.to_string(),
            score: (score * 10.0).round() / 10.0,
        })
        .collect();

    Ok(TrollReport {
        users,
        clusters,
        significance,
        meta: ReportMeta {
            seed: som_config.seed,
            grid_width: som_config.grid_width,
            grid_height: som_config.grid_height,
            k: model.k,
            som: som_config.clone(),
            detect: *detect_params,
        },
    })
}
