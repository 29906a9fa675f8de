//! Spherical neurons over a conformal embedding of R^3.
//!
//! The crate trains a small point-cloud classifier whose units have spherical
//! decision surfaces, then rebuilds its frozen first layer as
//! rotation-equivariant filter banks over a tetrahedron basis. Given the
//! rotation of an input, interpolation coefficients steer the banks so the
//! hidden activations — and therefore the predictions — match the original
//! classifier on canonically oriented data.
//!
//! Modules:
//! - [`geom`]: SO(3) construction, Haar sampling, geodesic rotations, lifts.
//! - [`conformal`]: point/sphere embedding and the scalar-product activation.
//! - [`mlgp`]: forward pass of the two-layer geometric perceptron.
//! - [`train`]: cross-entropy, analytic gradients, Adam, training loop.
//! - [`steer`]: filter banks, rotation representations, steerable models.
//! - [`data`]: datasets, noise, pose standardization, file formats.
//! - [`experiment`]: the known-rotation experiment and its reports.
//! - [`verify`]: the randomized property suite behind `sphn verify`.

pub mod conformal;
pub mod data;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod mlgp;
pub mod steer;
pub mod train;
pub mod verify;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{Error, Result};
pub use geom::{Rotation3, Vec3};
