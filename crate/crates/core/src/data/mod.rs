//! Datasets, perturbations, pose standardization, and every on-disk format:
//! the Tetris generator, a synthetic anchored-cloud generator, line-oriented
//! dataset files, and bitwise-faithful model checkpoints.

mod checkpoint;
mod format;
mod synthetic;
mod tetris;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint,
    AncestorCheckpoint, Checkpoint, SteerableCheckpoint,
};
pub use format::{
    dataset_from_str, dataset_to_string, load_dataset, load_run_config, run_config_to_string,
    save_dataset, save_run_config, RunConfig, DEFAULT_SPLIT,
};
pub use synthetic::{synthetic_dataset, SyntheticConfig};
pub use tetris::tetris_dataset;

use crate::error::{Error, Result};
use crate::geom::{geodesic_rotation, rotate_cloud, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One labeled point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub id: String,
    pub label: usize,
    pub points: Vec<Vec3>,
}

/// A collection of clouds with a shared point count and class list.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub class_names: Vec<String>,
    pub points_per_cloud: usize,
    pub units: String,
    pub clouds: Vec<LabeledCloud>,
}

impl Dataset {
    /// Validates labels, point counts, and non-emptiness.
    pub fn new(
        class_names: Vec<String>,
        points_per_cloud: usize,
        units: impl Into<String>,
        clouds: Vec<LabeledCloud>,
    ) -> Result<Self> {
        if clouds.is_empty() {
            return Err(Error::InvalidArgument("dataset has no clouds".into()));
        }
        for cloud in &clouds {
            if cloud.points.len() != points_per_cloud {
                return Err(Error::ShapeMismatch {
                    what: "points in cloud",
                    expected: points_per_cloud,
                    got: cloud.points.len(),
                });
            }
            if cloud.label >= class_names.len() {
                return Err(Error::BadLabel {
                    label: cloud.label,
                    classes: class_names.len(),
                });
            }
            if !cloud.points.iter().all(|p| p.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "cloud {} has non-finite coordinates",
                    cloud.id
                )));
            }
        }
        Ok(Self {
            class_names,
            points_per_cloud,
            units: units.into(),
            clouds,
        })
    }

    /// Seeded shuffle split into (train, validation, test). The first two
    /// fractions set the train and validation sizes; the remainder is test.
    pub fn split(&self, fractions: [f64; 3], seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
        let sum: f64 = fractions.iter().sum();
        if fractions.iter().any(|&f| f < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split fractions must be non-negative and sum to 1, got {fractions:?}"
            )));
        }
        let mut order: Vec<usize> = (0..self.clouds.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Fisher-Yates with a fixed draw order.
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let n = order.len();
        let n_train = (fractions[0] * n as f64).round() as usize;
        let n_val = (fractions[1] * n as f64).round() as usize;
        let n_train = n_train.min(n);
        let n_val = n_val.min(n - n_train);
        let pick = |range: std::ops::Range<usize>| -> Vec<LabeledCloud> {
            order[range].iter().map(|&i| self.clouds[i].clone()).collect()
        };
        let make = |clouds: Vec<LabeledCloud>| {
            Dataset::new(
                self.class_names.clone(),
                self.points_per_cloud,
                self.units.clone(),
                clouds,
            )
        };
        Ok((
            make(pick(0..n_train))?,
            make(pick(n_train..n_train + n_val))?,
            make(pick(n_train + n_val..n))?,
        ))
    }
}

/// Perturbs every coordinate independently by `U(-a, a)`. Zero amplitude is
/// the exact identity and consumes no randomness.
pub fn add_uniform_noise<R: Rng + ?Sized>(points: &[Vec3], a: f64, rng: &mut R) -> Result<Vec<Vec3>> {
    if a < 0.0 {
        return Err(Error::NegativeAmplitude(a));
    }
    if a == 0.0 {
        return Ok(points.to_vec());
    }
    Ok(points
        .iter()
        .map(|p| {
            Vec3::new(
                p.x + rng.random_range(-a..=a),
                p.y + rng.random_range(-a..=a),
                p.z + rng.random_range(-a..=a),
            )
        })
        .collect())
}

/// Pose standardization: centers the cloud at the origin, then rotates the
/// normal of the triangle spanned by the three anchor points onto +z via the
/// geodesic rotation. Idempotent; the in-plane orientation is left free.
pub fn canonicalize_pose(points: &[Vec3], anchors: [usize; 3]) -> Result<Vec<Vec3>> {
    if anchors[0] == anchors[1] || anchors[0] == anchors[2] || anchors[1] == anchors[2] {
        return Err(Error::InvalidArgument(format!(
            "anchor indices must be distinct, got {anchors:?}"
        )));
    }
    for &a in &anchors {
        if a >= points.len() {
            return Err(Error::InvalidArgument(format!(
                "anchor index {a} out of range for {} points",
                points.len()
            )));
        }
    }
    let centroid = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / points.len() as f64;
    let centered: Vec<Vec3> = points.iter().map(|&p| p - centroid).collect();

    let p0 = centered[anchors[0]];
    let normal = (centered[anchors[1]] - p0).cross(centered[anchors[2]] - p0);
    let area = 0.5 * normal.norm();
    if area < crate::geom::DIRECTION_EPS {
        return Err(Error::DegenerateAnchors {
            area,
            eps: crate::geom::DIRECTION_EPS,
        });
    }
    let derotation = geodesic_rotation(normal, Vec3::new(0.0, 0.0, 1.0))?;
    Ok(rotate_cloud(&derotation, &centered))
}
