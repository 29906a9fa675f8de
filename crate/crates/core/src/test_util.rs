//! Random fixtures shared by the unit tests.

use crate::conformal::{sphere_from_geometry, Sphere};
use crate::geom::Vec3;
use crate::mlgp::{GeometricNeuron, MlgpParams};
use rand::Rng;

pub(crate) fn random_cloud<R: Rng>(rng: &mut R, k: usize) -> Vec<Vec3> {
    (0..k)
        .map(|_| {
            Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            )
        })
        .collect()
}

/// Unconstrained raw parameters, the way initialization produces them.
pub(crate) fn random_params<R: Rng>(rng: &mut R, k: usize, h: usize, c: usize) -> MlgpParams {
    MlgpParams {
        hidden: (0..h)
            .map(|_| GeometricNeuron {
                spheres: (0..k)
                    .map(|_| Sphere::new(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
                    .collect(),
            })
            .collect(),
        output: (0..c)
            .map(|_| (0..h + 2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        units: "abstract".to_string(),
    }
}

/// A raw sphere with a well-conditioned scale, as a trained model holds.
pub(crate) fn random_raw_sphere<R: Rng>(rng: &mut R) -> Sphere {
    let c = Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    let r = rng.random_range(-1.5..1.5);
    let gamma = rng.random_range(0.3..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    Sphere::new(sphere_from_geometry(c, r).as_array().map(|v| v * gamma))
}

/// Parameters whose spheres all normalize cleanly, like a trained ancestor.
pub(crate) fn random_bankable_params<R: Rng>(rng: &mut R, k: usize, h: usize, c: usize) -> MlgpParams {
    MlgpParams {
        hidden: (0..h)
            .map(|_| GeometricNeuron {
                spheres: (0..k).map(|_| random_raw_sphere(rng)).collect(),
            })
            .collect(),
        output: (0..c)
            .map(|_| (0..h + 2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        units: "abstract".to_string(),
    }
}
