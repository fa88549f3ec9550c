//! Component-plane export as plain-text netpbm images: one P2 graymap per
//! feature (per-plane linear scale, minimum value rendered white) and one P3
//! pixmap coloring nodes by cluster id.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::clustering::ClusterModel;
use crate::error::{Error, Result};
use crate::som::SomGrid;

/// Fixed categorical palette; cluster ids beyond its length wrap around.
const PALETTE: [(u8, u8, u8); 16] = [
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (250, 190, 190),
    (0, 128, 128),
    (170, 110, 40),
    (255, 250, 200),
    (128, 0, 0),
    (170, 255, 195),
    (128, 128, 128),
];

pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, gray: &[u8]) -> Result<()> {
    debug_assert_eq!(gray.len(), width * height);
    writeln!(w, "P2")?;
    writeln!(w, "{width} {height}")?;
    writeln!(w, "255")?;
    for row in gray.chunks(width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_ppm<W: Write>(
    mut w: W,
    width: usize,
    height: usize,
    rgb: &[(u8, u8, u8)],
) -> Result<()> {
    debug_assert_eq!(rgb.len(), width * height);
    writeln!(w, "P3")?;
    writeln!(w, "{width} {height}")?;
    writeln!(w, "255")?;
    for row in rgb.chunks(width) {
        let line: Vec<String> = row
            .iter()
            .map(|(r, g, b)| format!("{r} {g} {b}"))
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Grayscale pixels of one feature across the grid. The plane minimum maps
/// to white (255), the maximum to black (0); a constant plane is all white.
pub fn plane_pixels(grid: &SomGrid, feature: usize) -> Vec<u8> {
    let values: Vec<f64> = grid.weights.iter().map(|w| w[feature]).collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if max == min {
                255
            } else {
                let t = (v - min) / (max - min);
                (255.0 - t * 255.0).round() as u8
            }
        })
        .collect()
}

pub fn cluster_pixels(model: &ClusterModel) -> Vec<(u8, u8, u8)> {
    model
        .node_to_cluster
        .iter()
        .map(|&c| PALETTE[c % PALETTE.len()])
        .collect()
}

/// Writes one graymap per feature (filenames carry the feature name) plus,
/// when a cluster model is given, `cluster_map.ppm`. Returns the paths
/// written, in order.
pub fn export_planes(
    grid: &SomGrid,
    clusters: Option<&ClusterModel>,
    feature_names: &[&str],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if feature_names.len() != grid.dim {
        return Err(Error::Schema(format!(
            "{} feature names for grid of dim {}",
            feature_names.len(),
            grid.dim
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for (j, name) in feature_names.iter().enumerate() {
        let path = out_dir.join(format!("plane_{name}.pgm"));
        let file = std::fs::File::create(&path)?;
        write_pgm(file, grid.width, grid.height, &plane_pixels(grid, j))?;
        paths.push(path);
    }
    if let Some(model) = clusters {
        let path = out_dir.join("cluster_map.ppm");
        let file = std::fs::File::create(&path)?;
        write_ppm(file, grid.width, grid.height, &cluster_pixels(model))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SomGrid {
        SomGrid {
            width: 2,
            height: 2,
            dim: 2,
            weights: vec![
                vec![0.0, 0.7],
                vec![0.5, 0.7],
                vec![1.0, 0.7],
                vec![0.25, 0.7],
            ],
        }
    }

    #[test]
    fn pgm_min_is_white_max_is_black() {
        let pixels = plane_pixels(&grid(), 0);
        assert_eq!(pixels[0], 255);
        assert_eq!(pixels[2], 0);
        assert_eq!(pixels[1], 128); // 255 - 0.5*255 rounded
    }

    #[test]
    fn constant_plane_is_uniform_white() {
        let pixels = plane_pixels(&grid(), 1);
        assert!(pixels.iter().all(|&p| p == 255));
    }

    #[test]
    fn pgm_text_format() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 2, 2, &[255, 128, 0, 64]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "P2\n2 2\n255\n255 128\n0 64\n");
    }

    #[test]
    fn export_writes_one_file_per_feature_plus_cluster_map() {
        let dir = tempfile::tempdir().unwrap();
        let model = ClusterModel {
            k: 2,
            node_to_cluster: vec![0, 1, 0, 1],
            centroids: vec![vec![0.5, 0.7], vec![0.25, 0.7]],
        };
        let paths = export_planes(&grid(), Some(&model), &["M", "L"], dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths[0].file_name().unwrap().to_str().unwrap().contains("M"));
        assert!(paths[2].ends_with("cluster_map.ppm"));
        for p in &paths {
            assert!(p.exists());
        }
    }
}
