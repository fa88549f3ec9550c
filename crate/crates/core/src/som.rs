//! Kohonen self-organizing map: rectangular grid, Gaussian neighborhood,
//! linearly decaying learning rate and radius, seeded epoch-shuffled online
//! training. Training is fully deterministic given the configuration and
//! data; the generator is ChaCha8, so seeds reproduce across platforms.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Splits one master seed into independent per-stage streams (splitmix64).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_INIT: u64 = 0;
const STREAM_SHUFFLE: u64 = 1;
/// Stream used by codebook clustering; exported so a saved model can be
/// re-clustered identically.
pub const STREAM_CLUSTER: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// Each weight component uniform in the per-dimension data range.
    RandomUniformInDataBox,
    /// Nodes spread over the first two principal axes of the data.
    PcaPlane,
}

impl std::str::FromStr for InitMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" | "random_uniform_in_data_box" => Ok(InitMethod::RandomUniformInDataBox),
            "pca" | "pca_plane" => Ok(InitMethod::PcaPlane),
            other => Err(format!("unknown init method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub radius_start: f64,
    pub radius_end: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub init: InitMethod,
    /// Stop when epoch-over-epoch quantization error improves by less than
    /// 1e-6 for 20 consecutive epochs. Off by default.
    pub early_stop: bool,
}

impl Default for SomConfig {
    fn default() -> Self {
        SomConfig {
            grid_width: 10,
            grid_height: 10,
            lr_start: 0.3,
            lr_end: 0.005,
            radius_start: 4.0,
            radius_end: 0.1,
            max_epochs: 1000,
            seed: 42,
            init: InitMethod::RandomUniformInDataBox,
            early_stop: false,
        }
    }
}

impl SomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_width == 0 || self.grid_height == 0 {
            return Err(Error::Numeric("grid dimensions must be positive".into()));
        }
        if !(self.lr_end > 0.0 && self.lr_end <= self.lr_start && self.lr_start <= 1.0) {
            return Err(Error::Numeric(
                "learning rate must satisfy 0 < lr_end <= lr_start <= 1".into(),
            ));
        }
        if !(self.radius_end > 0.0 && self.radius_end <= self.radius_start) {
            return Err(Error::Numeric(
                "radius must satisfy 0 < radius_end <= radius_start".into(),
            ));
        }
        if self.max_epochs == 0 {
            return Err(Error::Numeric("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rectangular codebook. Node `n` sits at `(row, col) = (n / width, n % width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomGrid {
    pub width: usize,
    pub height: usize,
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
}

impl SomGrid {
    pub fn node_count(&self) -> usize {
        self.width * self.height
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node / self.width, node % self.width)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Squared Euclidean distance between two node positions on the grid.
    pub fn grid_dist_sq(&self, a: usize, b: usize) -> f64 {
        let (ar, ac) = self.coords(a);
        let (br, bc) = self.coords(b);
        let dr = ar as f64 - br as f64;
        let dc = ac as f64 - bc as f64;
        dr * dr + dc * dc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSom {
    pub grid: SomGrid,
    pub qe_history: Vec<f64>,
    pub config: SomConfig,
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

/// Builds the initial codebook. Deterministic given `(config, data)`.
pub fn init_grid(config: &SomConfig, data: &FeatureMatrix) -> Result<SomGrid> {
    config.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::Numeric("cannot initialize grid on empty data".into()));
    }
    let dim = data.n_features();
    let nodes = config.grid_width * config.grid_height;
    let weights = match config.init {
        InitMethod::RandomUniformInDataBox => {
            let mut mins = vec![f64::INFINITY; dim];
            let mut maxs = vec![f64::NEG_INFINITY; dim];
            for row in &data.rows {
                for (j, &v) in row.iter().enumerate() {
                    mins[j] = mins[j].min(v);
                    maxs[j] = maxs[j].max(v);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_INIT));
            (0..nodes)
                .map(|_| {
                    (0..dim)
                        .map(|j| mins[j] + rng.gen::<f64>() * (maxs[j] - mins[j]))
                        .collect()
                })
                .collect()
        }
        InitMethod::PcaPlane => pca_plane_weights(config, data, dim),
    };
    Ok(SomGrid {
        width: config.grid_width,
        height: config.grid_height,
        dim,
        weights,
    })
}

fn pca_plane_weights(config: &SomConfig, data: &FeatureMatrix, dim: usize) -> Vec<Vec<f64>> {
    let n = data.n_rows() as f64;
    let mut mean = vec![0.0; dim];
    for row in &data.rows {
        for (j, &v) in row.iter().enumerate() {
            mean[j] += v / n;
        }
    }
    let centered: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let pc1 = power_iteration(&centered, None);
    let pc2 = power_iteration(&centered, pc1.as_deref());

    let extent = |axis: &Option<Vec<f64>>| -> (f64, f64) {
        match axis {
            Some(a) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for row in &centered {
                    let p: f64 = row.iter().zip(a).map(|(v, w)| v * w).sum();
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
                (lo, hi)
            }
            None => (0.0, 0.0),
        }
    };
    let (lo1, hi1) = extent(&pc1);
    let (lo2, hi2) = extent(&pc2);

    let frac = |i: usize, n: usize| -> f64 {
        if n <= 1 {
            0.5
        } else {
            i as f64 / (n - 1) as f64
        }
    };

    let mut weights = Vec::with_capacity(config.grid_width * config.grid_height);
    for row in 0..config.grid_height {
        for col in 0..config.grid_width {
            let a = lo1 + frac(col, config.grid_width) * (hi1 - lo1);
            let b = lo2 + frac(row, config.grid_height) * (hi2 - lo2);
            let w: Vec<f64> = (0..dim)
                .map(|j| {
                    let mut v = mean[j];
                    if let Some(p) = &pc1 {
                        v += a * p[j];
                    }
                    if let Some(p) = &pc2 {
                        v += b * p[j];
                    }
                    v
                })
                .collect();
            weights.push(w);
        }
    }
    weights
}

/// Leading eigenvector of the sample covariance by power iteration, with the
/// optional `deflate` direction projected out. Returns None for zero-variance
/// data. Deterministic: the start vector is fixed.
fn power_iteration(centered: &[Vec<f64>], deflate: Option<&[f64]>) -> Option<Vec<f64>> {
    let dim = centered.first().map(|r| r.len()).unwrap_or(0);
    if dim == 0 {
        return None;
    }
    let project_out = |v: &mut Vec<f64>| {
        if let Some(d) = deflate {
            let dot: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(d) {
                *x -= dot * y;
            }
        }
    };
    let mut v: Vec<f64> = (0..dim).map(|j| 1.0 / (j as f64 + 1.0)).collect();
    project_out(&mut v);
    for _ in 0..100 {
        // w = C v without materializing C: C v = X^T (X v) / n
        let mut xv = vec![0.0; centered.len()];
        for (i, row) in centered.iter().enumerate() {
            xv[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let mut w = vec![0.0; dim];
        for (i, row) in centered.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                w[j] += x * xv[i];
            }
        }
        project_out(&mut w);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        for x in &mut w {
            *x /= norm;
        }
        v = w;
    }
    Some(v)
}

/// Index of the node nearest to `sample`; ties break to the smallest index.
pub fn best_matching_unit(grid: &SomGrid, sample: &[f64]) -> usize {
    debug_assert_eq!(sample.len(), grid.dim);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (n, w) in grid.weights.iter().enumerate() {
        let d = dist_sq(w, sample);
        if d < best_d {
            best_d = d;
            best = n;
        }
    }
    best
}

/// Linear interpolation between `start` (epoch 0) and `end` (last epoch).
/// Endpoints are exact.
pub fn schedule_value(start: f64, end: f64, epoch: usize, max_epochs: usize) -> f64 {
    if max_epochs <= 1 {
        return start;
    }
    let t = epoch as f64 / (max_epochs - 1) as f64;
    start * (1.0 - t) + end * t
}

/// Gaussian kernel on squared grid distance.
pub fn neighborhood_weight(grid_dist_sq: f64, radius: f64) -> f64 {
    (-grid_dist_sq / (2.0 * radius * radius)).exp()
}

/// Grid coordinates of the best-matching unit.
pub fn project(grid: &SomGrid, sample: &[f64]) -> (usize, usize) {
    grid.coords(best_matching_unit(grid, sample))
}

/// Mean Euclidean distance from each row to its best-matching unit.
pub fn quantization_error(grid: &SomGrid, data: &FeatureMatrix) -> f64 {
    if data.n_rows() == 0 {
        return 0.0;
    }
    let total: f64 = data
        .rows
        .iter()
        .map(|row| dist_sq(&grid.weights[best_matching_unit(grid, row)], row).sqrt())
        .sum();
    total / data.n_rows() as f64
}

pub fn train(config: &SomConfig, data: &FeatureMatrix) -> Result<TrainedSom> {
    train_with_observer(config, data, |_, _| {})
}

/// Training loop with a per-epoch observer (called after each epoch's
/// updates, before the quantization error is recorded).
pub fn train_with_observer(
    config: &SomConfig,
    data: &FeatureMatrix,
    mut observer: impl FnMut(usize, &SomGrid),
) -> Result<TrainedSom> {
    config.validate()?;
    if data.rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("training data contains non-finite values".into()));
    }
    let mut grid = init_grid(config, data)?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_SHUFFLE));
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut qe_history = Vec::with_capacity(config.max_epochs);
    let mut stall = 0usize;

    for epoch in 0..config.max_epochs {
        let lr = schedule_value(config.lr_start, config.lr_end, epoch, config.max_epochs);
        let radius = schedule_value(
            config.radius_start,
            config.radius_end,
            epoch,
            config.max_epochs,
        );
        order.shuffle(&mut shuffle_rng);
        for &i in &order {
            let sample = &data.rows[i];
            let bmu = best_matching_unit(&grid, sample);
            for n in 0..grid.node_count() {
                let h = neighborhood_weight(grid.grid_dist_sq(bmu, n), radius);
                let step = lr * h;
                let w = &mut grid.weights[n];
                for (wj, &xj) in w.iter_mut().zip(sample) {
                    *wj += step * (xj - *wj);
                }
            }
        }
        observer(epoch, &grid);
        let qe = quantization_error(&grid, data);
        let improved = qe_history
            .last()
            .map(|&prev: &f64| prev - qe >= 1e-6)
            .unwrap_or(true);
        qe_history.push(qe);
        if config.early_stop {
            stall = if improved { 0 } else { stall + 1 };
            if stall >= 20 {
                break;
            }
        }
    }

    Ok(TrainedSom {
        grid,
        qe_history,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let ids = (0..rows.len()).map(|i| format!("u{i}")).collect();
        FeatureMatrix::from_rows(ids, rows).unwrap()
    }

    fn random_matrix(n: usize, dim: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        matrix((0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect())
    }

    #[test]
    fn init_is_deterministic() {
        let config = SomConfig {
            grid_width: 4,
            grid_height: 3,
            seed: 7,
            ..Default::default()
        };
        let data = random_matrix(20, 12, 1);
        let a = init_grid(&config, &data).unwrap();
        let b = init_grid(&config, &data).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_stays_in_data_box() {
        let config = SomConfig::default();
        let data = random_matrix(30, 12, 2);
        let grid = init_grid(&config, &data).unwrap();
        for w in grid.weights.iter().flatten() {
            assert!((0.0..=1.0).contains(w));
        }
    }

    #[test]
    fn grid_dimensions() {
        let config = SomConfig::default();
        let data = random_matrix(5, 12, 3);
        let grid = init_grid(&config, &data).unwrap();
        assert_eq!(grid.node_count(), 100);
        assert!(grid.weights.iter().all(|w| w.len() == 12));
    }

    #[test]
    fn pca_init_is_deterministic_and_finite() {
        let config = SomConfig {
            init: InitMethod::PcaPlane,
            grid_width: 5,
            grid_height: 4,
            ..Default::default()
        };
        let data = random_matrix(40, 12, 4);
        let a = init_grid(&config, &data).unwrap();
        let b = init_grid(&config, &data).unwrap();
        assert_eq!(a, b);
        assert!(a.weights.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn bmu_exact_match() {
        let data = random_matrix(10, 4, 5);
        let grid = SomGrid {
            width: 5,
            height: 2,
            dim: 4,
            weights: data.rows.clone(),
        };
        assert_eq!(best_matching_unit(&grid, &data.rows[7]), 7);
    }

    #[test]
    fn bmu_tie_breaks_to_smallest_index() {
        let mut weights: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 + 10.0; 3]).collect();
        weights[3] = vec![1.0, 0.0, 0.0];
        weights[9] = vec![-1.0, 0.0, 0.0];
        let grid = SomGrid {
            width: 5,
            height: 2,
            dim: 3,
            weights,
        };
        assert_eq!(best_matching_unit(&grid, &[0.0, 0.0, 0.0]), 3);
    }

    #[test]
    fn schedule_endpoints() {
        assert_eq!(schedule_value(0.3, 0.005, 0, 1000), 0.3);
        assert_eq!(schedule_value(0.3, 0.005, 999, 1000), 0.005);
        assert_eq!(schedule_value(4.0, 0.1, 0, 1000), 4.0);
        assert_eq!(schedule_value(4.0, 0.1, 999, 1000), 0.1);
        assert_eq!(schedule_value(0.3, 0.005, 0, 1), 0.3);
        let mid = schedule_value(4.0, 0.1, 499, 1000);
        assert!((mid - (4.0 + (0.1 - 4.0) * 499.0 / 999.0)).abs() < 1e-12);
        assert!((mid - 2.052).abs() < 1e-2);
    }

    #[test]
    fn neighborhood_kernel_shape() {
        assert_eq!(neighborhood_weight(0.0, 3.0), 1.0);
        let r: f64 = 2.5;
        let w = neighborhood_weight(2.0 * r * r, r);
        assert!((w - (-1.0f64).exp()).abs() < 1e-12);
        assert!(neighborhood_weight(5.0, 2.0) > neighborhood_weight(6.0, 2.0));
    }

    #[test]
    fn single_node_full_pull() {
        let config = SomConfig {
            grid_width: 1,
            grid_height: 1,
            lr_start: 1.0,
            lr_end: 1.0,
            max_epochs: 1,
            ..Default::default()
        };
        let data = matrix(vec![vec![0.2, 0.8, 0.5]]);
        let trained = train(&config, &data).unwrap();
        assert_eq!(trained.grid.weights[0], vec![0.2, 0.8, 0.5]);
        assert_eq!(trained.qe_history, vec![0.0]);
    }

    #[test]
    fn training_is_deterministic() {
        let config = SomConfig {
            grid_width: 6,
            grid_height: 6,
            max_epochs: 30,
            seed: 11,
            ..Default::default()
        };
        let data = random_matrix(40, 12, 6);
        let a = train(&config, &data).unwrap();
        let b = train(&config, &data).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_input_rejected() {
        let config = SomConfig::default();
        let data = FeatureMatrix {
            user_ids: vec!["u".into()],
            rows: vec![vec![f64::NAN; 12]],
        };
        assert!(train(&config, &data).is_err());
    }

    #[test]
    fn quantization_error_examples() {
        let data = matrix(vec![vec![0.1, 0.2], vec![0.9, 0.4]]);
        let grid = SomGrid {
            width: 2,
            height: 1,
            dim: 2,
            weights: data.rows.clone(),
        };
        assert_eq!(quantization_error(&grid, &data), 0.0);

        let origin = SomGrid {
            width: 1,
            height: 1,
            dim: 2,
            weights: vec![vec![0.0, 0.0]],
        };
        let unit = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((quantization_error(&origin, &unit) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantization_error_matches_brute_force() {
        let data = random_matrix(20, 12, 8);
        let config = SomConfig {
            grid_width: 4,
            grid_height: 4,
            max_epochs: 5,
            ..Default::default()
        };
        let trained = train(&config, &data).unwrap();
        // Straightforward reimplementation.
        let mut total = 0.0;
        for row in &data.rows {
            let mut best = f64::INFINITY;
            for w in &trained.grid.weights {
                let d: f64 = w
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
            total += best;
        }
        let expected = total / data.n_rows() as f64;
        assert!((quantization_error(&trained.grid, &data) - expected).abs() < 1e-12);
    }

    #[test]
    fn project_is_bmu_decomposition() {
        let data = random_matrix(9, 3, 9);
        let grid = SomGrid {
            width: 3,
            height: 3,
            dim: 3,
            weights: data.rows.clone(),
        };
        assert_eq!(project(&grid, &data.rows[0]), (0, 0));
        for (i, row) in data.rows.iter().enumerate() {
            let n = best_matching_unit(&grid, row);
            assert_eq!(project(&grid, row), grid.coords(n));
            assert_eq!(n, i);
        }
    }

    #[test]
    fn early_stop_truncates_history() {
        // Constant schedules so training settles instead of improving by
        // hair-widths every epoch as the radius shrinks.
        let config = SomConfig {
            grid_width: 2,
            grid_height: 2,
            max_epochs: 500,
            lr_start: 0.1,
            lr_end: 0.1,
            radius_start: 0.5,
            radius_end: 0.5,
            early_stop: true,
            ..Default::default()
        };
        let data = matrix(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let trained = train(&config, &data).unwrap();
        assert!(trained.qe_history.len() < 500);
    }

    #[test]
    fn box_containment_through_training() {
        let config = SomConfig {
            grid_width: 5,
            grid_height: 5,
            max_epochs: 50,
            ..Default::default()
        };
        let data = random_matrix(30, 6, 10);
        let mut mins = vec![f64::INFINITY; 6];
        let mut maxs = vec![f64::NEG_INFINITY; 6];
        for row in &data.rows {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        train_with_observer(&config, &data, |_, grid| {
            for w in &grid.weights {
                for (j, &v) in w.iter().enumerate() {
                    assert!(v >= mins[j] - 1e-9 && v <= maxs[j] + 1e-9);
                }
            }
        })
        .unwrap();
    }

    #[test]
    fn update_moves_bmu_closer() {
        let sample = vec![0.9, 0.1, 0.4];
        let mut weight = vec![0.1, 0.5, 0.2];
        let before = dist_sq(&weight, &sample);
        let step = 0.3 * neighborhood_weight(0.0, 2.0);
        for (w, &x) in weight.iter_mut().zip(&sample) {
            *w += step * (x - *w);
        }
        assert!(dist_sq(&weight, &sample) < before);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bmu_matches_brute_force(
            seed in 0u64..1000,
            w in 2usize..6,
            h in 2usize..5,
            plant_tie in proptest::bool::ANY,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = 4;
            let mut weights: Vec<Vec<f64>> =
                (0..w * h).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
            let sample: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            if plant_tie {
                let i = rng.gen_range(0..w * h);
                let j = rng.gen_range(0..w * h);
                weights[j] = weights[i].clone();
            }
            let grid = SomGrid { width: w, height: h, dim, weights: weights.clone() };
            let got = best_matching_unit(&grid, &sample);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (n, node) in weights.iter().enumerate() {
                let d: f64 = node.iter().zip(&sample).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best_d = d;
                    best = n;
                }
            }
            prop_assert_eq!(got, best);
        }
    }
}
