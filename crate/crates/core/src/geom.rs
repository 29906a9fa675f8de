//! SO(3) machinery: rotation construction, Haar sampling, geodesic rotations
//! between directions, and lifts into the 4x4 projective and 5x5 conformal
//! representations.
//!
//! All operations are pure functions on immutable values. RNG state is owned
//! by the caller.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Directions shorter than this are considered degenerate.
pub const DIRECTION_EPS: f64 = 1e-9;

/// A 3D vector, also used for points of a cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction, or an error below [`DIRECTION_EPS`].
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n <= DIRECTION_EPS {
            return Err(Error::DegenerateDirection {
                norm: n,
                eps: DIRECTION_EPS,
            });
        }
        Ok(self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl std::ops::Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Div<f64> for Vec3 {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

/// A 3x3 special-orthogonal matrix, row-major, applied as `y = R x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub const IDENTITY: Self = Self {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Wraps raw rows. The caller is responsible for orthogonality and
    /// det = +1; see [`Rotation3::is_special_orthogonal`].
    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    /// Rotation about a unit axis by `angle` (Rodrigues formula).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self> {
        let n = axis.normalized()?;
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (n.x, n.y, n.z);
        Ok(Self {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        })
    }

    /// Rotation about the z axis; used by tests and small fixtures.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m }
    }

    /// The inverse rotation.
    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Checks `R^T R = I` and `det R = +1` within `tol`.
    pub fn is_special_orthogonal(&self, tol: f64) -> bool {
        let rtr = self.transpose().compose(self);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (rtr.m[i][j] - expect).abs() > tol {
                    return false;
                }
            }
        }
        (self.det() - 1.0).abs() <= tol
    }

    /// Lift to the homogeneous (projective) 4x4 representation `diag(R, 1)`.
    pub fn lift4(&self) -> Rotation4 {
        let mut m = Mat4::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                m.m[i][j] = self.m[i][j];
            }
        }
        Rotation4 { m }
    }

    /// Lift to the conformal 5x5 representation `diag(R, 1, 1)`.
    pub fn lift5(&self) -> Rotation5 {
        Rotation5 { r: *self }
    }
}

/// A plain 4x4 matrix, row-major. Used for the tetrahedron basis and for
/// rotation representations in filter-bank output space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4 {
    pub m: [[f64; 4]; 4],
}

impl Mat4 {
    pub const IDENTITY: Self = Self {
        m: [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    };

    pub const fn from_rows(m: [[f64; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[j][i];
            }
        }
        Self { m }
    }

    pub fn apply(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.m[i][k] * v[k]).sum();
        }
        out
    }

    pub fn column(&self, j: usize) -> [f64; 4] {
        [self.m[0][j], self.m[1][j], self.m[2][j], self.m[3][j]]
    }

    pub fn det(&self) -> f64 {
        // Cofactor expansion along the first row.
        let m = &self.m;
        let minor = |r: [usize; 3], c: [usize; 3]| {
            m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
                - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
                + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
        };
        m[0][0] * minor([1, 2, 3], [1, 2, 3]) - m[0][1] * minor([1, 2, 3], [0, 2, 3])
            + m[0][2] * minor([1, 2, 3], [0, 1, 3])
            - m[0][3] * minor([1, 2, 3], [0, 1, 2])
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let p = self.transpose().mul(self);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (p.m[i][j] - expect).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// The projective lift `diag(R, 1)` of a 3D rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation4 {
    m: Mat4,
}

impl Rotation4 {
    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn apply(&self, v: [f64; 4]) -> [f64; 4] {
        self.m.apply(v)
    }
}

/// The conformal lift `diag(R, 1, 1)` of a 3D rotation. Stored as the 3D
/// rotation itself so the block structure holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation5 {
    r: Rotation3,
}

impl Rotation5 {
    /// Applies `diag(R, 1, 1)`: rotates the first three components, passes
    /// the last two through untouched.
    pub fn apply(&self, v: [f64; 5]) -> [f64; 5] {
        let p = self.r.apply(Vec3::new(v[0], v[1], v[2]));
        [p.x, p.y, p.z, v[3], v[4]]
    }

    pub fn transpose(&self) -> Self {
        Self {
            r: self.r.transpose(),
        }
    }

    /// Materializes the full 5x5 matrix.
    pub fn matrix(&self) -> [[f64; 5]; 5] {
        let mut m = [[0.0; 5]; 5];
        for (i, row) in self.r.rows().iter().enumerate() {
            m[i][..3].copy_from_slice(row);
        }
        m[3][3] = 1.0;
        m[4][4] = 1.0;
        m
    }
}

/// Minimal-angle rotation taking the direction of `from` to the direction of
/// `to` (Rodrigues formula; axis is the normalized cross product, angle is
/// `atan2(|a x b|, a.b)`).
///
/// For antiparallel inputs the axis is undefined; we rotate by pi about the
/// normalized cross product of `from` with the standard basis vector least
/// aligned with it, which is deterministic and well conditioned.
pub fn geodesic_rotation(from: Vec3, to: Vec3) -> Result<Rotation3> {
    let a = from.normalized()?;
    let b = to.normalized()?;
    let cross = a.cross(b);
    let sin = cross.norm();
    let cos = a.dot(b);
    if sin <= DIRECTION_EPS {
        if cos >= 0.0 {
            return Ok(Rotation3::IDENTITY);
        }
        // Antiparallel: pi turn about any axis perpendicular to `a`.
        let abs = [a.x.abs(), a.y.abs(), a.z.abs()];
        let mut least = 0;
        for i in 1..3 {
            if abs[i] < abs[least] {
                least = i;
            }
        }
        let mut e = [0.0; 3];
        e[least] = 1.0;
        let axis = a.cross(Vec3::from_array(e)).normalized()?;
        return Rotation3::from_axis_angle(axis, std::f64::consts::PI);
    }
    // Re-orthogonalize the axis against `a`; keeps the image of `a` accurate
    // even when the cross product is tiny.
    let n = cross / sin;
    let n = (n - a * n.dot(a)).normalized()?;
    Rotation3::from_axis_angle(n, sin.atan2(cos))
}

/// Haar-uniform random rotation via a uniformly distributed unit quaternion.
/// Deterministic given the RNG state.
pub fn sample_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3 {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-6 {
            continue;
        }
        let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
        return Rotation3::from_rows([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]);
    }
}

/// Rotates every point of a cloud.
pub fn rotate_cloud(r: &Rotation3, points: &[Vec3]) -> Vec<Vec3> {
    points.iter().map(|&p| r.apply(p)).collect()
}
