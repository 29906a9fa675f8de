//! Conformal embedding of points and spheres into R^5 and the scalar-product
//! activation both neuron types build on.
//!
//! A point `x` embeds as `(x1, x2, x3, -1, -||x||^2 / 2)`; a sphere with
//! center `c` and radius `r` embeds as `(c1, c2, c3, (||c||^2 - r^2)/2, 1)`.
//! Their dot product equals `-||x - c||^2 / 2 + r^2 / 2`: the signed squared
//! distance of the point to the sphere surface. Classifiers learn spheres in
//! non-normalized (scaled) form; the representation is homogeneous.

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// A 3D point embedded in the conformal model of R^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedPoint {
    v: [f64; 5],
}

impl EmbeddedPoint {
    pub fn as_array(&self) -> [f64; 5] {
        self.v
    }

    /// Wraps a raw 5-vector. Intended for rotated embeddings, which keep the
    /// invariant `v[3] = -1`, `v[4] = -||v[0..3]||^2 / 2` because rotations
    /// preserve the norm.
    pub fn from_array(v: [f64; 5]) -> Self {
        Self { v }
    }
}

/// Raw (possibly non-normalized) spherical-classifier parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    v: [f64; 5],
}

impl Sphere {
    pub fn new(v: [f64; 5]) -> Self {
        Self { v }
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.v
    }

    /// Normalization threshold, relative to the magnitude of the remaining
    /// components: below it the classifier represents a plane.
    pub fn scale_threshold(&self) -> f64 {
        let head = self.v[0] * self.v[0]
            + self.v[1] * self.v[1]
            + self.v[2] * self.v[2]
            + self.v[3] * self.v[3];
        1e-9 * head.sqrt().max(1.0)
    }
}

/// Center/radius form of a normalized sphere. `radius_sq` may be negative
/// (an imaginary sphere); the activation is sign-agnostic and training can
/// produce such classifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGeometry {
    pub center: Vec3,
    pub radius_sq: f64,
}

/// Embeds a 3D point as `(x1, x2, x3, -1, -||x||^2 / 2)`.
pub fn embed_point(x: Vec3) -> EmbeddedPoint {
    EmbeddedPoint {
        v: [x.x, x.y, x.z, -1.0, -0.5 * x.norm_sq()],
    }
}

/// Builds the normalized sphere vector `(c1, c2, c3, (||c||^2 - r^2)/2, 1)`.
pub fn sphere_from_geometry(center: Vec3, radius: f64) -> Sphere {
    Sphere {
        v: [
            center.x,
            center.y,
            center.z,
            0.5 * (center.norm_sq() - radius * radius),
            1.0,
        ],
    }
}

/// The 5D dot product of an embedded point with a sphere vector. For a
/// normalized sphere this equals `-||x - c||^2 / 2 + r^2 / 2`.
pub fn activation(x: &EmbeddedPoint, s: &Sphere) -> f64 {
    let a = &x.v;
    let b = &s.v;
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] + a[4] * b[4]
}

/// Splits a raw sphere into its scale factor `gamma = s5` and the normalized
/// sphere `S / gamma` (last component exactly 1).
pub fn normalize_sphere(s: &Sphere) -> Result<(f64, Sphere)> {
    let gamma = s.v[4];
    let threshold = s.scale_threshold();
    if gamma.abs() <= threshold {
        return Err(Error::DegenerateScale {
            scale: gamma.abs(),
            threshold,
            location: "sphere".to_string(),
        });
    }
    let mut v = [0.0; 5];
    for (out, raw) in v.iter_mut().zip(s.v.iter()) {
        *out = raw / gamma;
    }
    v[4] = 1.0;
    Ok((gamma, Sphere { v }))
}

impl Sphere {
    /// Center and squared radius of the normalized form.
    pub fn geometry(&self) -> Result<SphereGeometry> {
        let (_, n) = normalize_sphere(self)?;
        let center = Vec3::new(n.v[0], n.v[1], n.v[2]);
        Ok(SphereGeometry {
            center,
            radius_sq: center.norm_sq() - 2.0 * n.v[3],
        })
    }
}
