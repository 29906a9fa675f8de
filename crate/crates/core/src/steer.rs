//! Tetrahedron basis, spherical filter banks, the rotation representation in
//! filter-bank output space, interpolation coefficients, and steerable-model
//! construction from a frozen ancestor.
//!
//! A filter bank holds four copies of one normalized sphere, conjugate-rotated
//! so their centers sit at regular-tetrahedron vertex directions around the
//! original center direction. The bank output is equivariant to 3D rotations
//! of the input point, and a rotated input's original activation is recovered
//! as a fixed linear interpolation of the four bank responses.

use crate::conformal::{normalize_sphere, EmbeddedPoint, Sphere};
use crate::error::{Error, Result};
use crate::geom::{geodesic_rotation, Mat4, Rotation3, Vec3, DIRECTION_EPS};
use crate::mlgp::{argmax, output_forward, ForwardTrace, MlgpParams};
use std::sync::{Arc, OnceLock};

/// The tetrahedron vertex direction every sphere center is first rotated to.
const PIVOT: Vec3 = Vec3::new(1.0, 1.0, 1.0);

/// The four regular-tetrahedron vertices used as basis directions.
pub const TETRA_VERTICES: [Vec3; 4] = [
    Vec3::new(1.0, 1.0, 1.0),
    Vec3::new(1.0, -1.0, -1.0),
    Vec3::new(-1.0, 1.0, -1.0),
    Vec3::new(-1.0, -1.0, 1.0),
];

/// The orthogonal 4x4 basis matrix whose columns are half the homogeneous
/// tetrahedron vertex coordinates, together with its first column.
#[derive(Debug, Clone, PartialEq)]
pub struct TetraBasis {
    m: Mat4,
}

impl TetraBasis {
    /// The standard basis built from [`TETRA_VERTICES`].
    pub fn standard() -> &'static TetraBasis {
        static BASIS: OnceLock<TetraBasis> = OnceLock::new();
        BASIS.get_or_init(|| {
            let mut m = [[0.0; 4]; 4];
            for (j, v) in TETRA_VERTICES.iter().enumerate() {
                m[0][j] = 0.5 * v.x;
                m[1][j] = 0.5 * v.y;
                m[2][j] = 0.5 * v.z;
                m[3][j] = 0.5;
            }
            TetraBasis { m: Mat4::from_rows(m) }
        })
    }

    /// A basis with an arbitrary matrix; used by the verification suite to
    /// prove that its properties actually reject corrupted constructions.
    pub fn with_matrix(m: Mat4) -> TetraBasis {
        TetraBasis { m }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    /// First column: half the homogeneous coordinates of vertex 1.
    pub fn m1(&self) -> [f64; 4] {
        self.m.column(0)
    }

    /// The representation of a 3D rotation in the output space of a bank
    /// whose origin rotation is `ro`: `M^T lift4(ro) lift4(r) lift4(ro)^T M`.
    pub fn rotation_rep(&self, ro: &Rotation3, r: &Rotation3) -> Mat4 {
        let conj = ro.compose(r).compose(&ro.transpose());
        self.m.transpose().mul(conj.lift4().matrix()).mul(&self.m)
    }

    /// Interpolation coefficients `M^T (lift4(ro) lift4(r) lift4(ro)^T m1)`:
    /// the first column of [`TetraBasis::rotation_rep`].
    pub fn interp_coeffs(&self, ro: &Rotation3, r: &Rotation3) -> [f64; 4] {
        let conj = ro.compose(r).compose(&ro.transpose());
        let rotated_m1 = conj.lift4().apply(self.m1());
        self.m.transpose().apply(rotated_m1)
    }

    /// Inverts [`TetraBasis::rotation_rep`]: recovers the 3D rotation from
    /// its bank-space representation.
    pub fn rotation_from_rep(&self, ro: &Rotation3, v: &Mat4) -> Rotation3 {
        let lifted = ro
            .transpose()
            .lift4()
            .matrix()
            .mul(&self.m)
            .mul(v)
            .mul(&self.m.transpose())
            .mul(ro.lift4().matrix());
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            row.copy_from_slice(&lifted.m[i][..3]);
        }
        Rotation3::from_rows(rows)
    }
}

/// Rotation taking tetrahedron vertex 1 to vertex `i + 1`; index 0 is the
/// identity.
pub fn tetra_rotation(i: usize) -> Rotation3 {
    static ROTATIONS: OnceLock<[Rotation3; 4]> = OnceLock::new();
    ROTATIONS.get_or_init(|| {
        std::array::from_fn(|j| {
            if j == 0 {
                Rotation3::IDENTITY
            } else {
                geodesic_rotation(TETRA_VERTICES[0], TETRA_VERTICES[j])
                    .expect("tetrahedron vertices are non-degenerate")
            }
        })
    })[i]
}

/// Four tetrahedron-rotated copies of one normalized sphere; the
/// rotation-equivariant unit the steerable model is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    /// Row i is `lift5(ro^T t_i ro)` applied to the normalized sphere.
    rows: [[f64; 5]; 4],
    origin_rotation: Rotation3,
    gamma: f64,
}

impl FilterBank {
    /// The 4x5 bank matrix.
    pub fn rows(&self) -> &[[f64; 5]; 4] {
        &self.rows
    }

    /// Geodesic rotation taking the source sphere's center direction to the
    /// pivot vertex direction (identity for an origin-centered sphere).
    pub fn origin_rotation(&self) -> &Rotation3 {
        &self.origin_rotation
    }

    /// The scale split off the raw sphere before banking.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The tetrahedron rotations shared by every bank.
    pub fn tetra_rotations() -> [Rotation3; 4] {
        std::array::from_fn(tetra_rotation)
    }

    pub(crate) fn from_parts(rows: [[f64; 5]; 4], origin_rotation: Rotation3, gamma: f64) -> Self {
        Self {
            rows,
            origin_rotation,
            gamma,
        }
    }
}

/// Builds the filter bank of a raw sphere: normalizes it, rotates its center
/// direction onto the pivot vertex, orbits it over the tetrahedron, and
/// rotates back.
///
/// For a center within [`DIRECTION_EPS`] of the origin the rotation acts
/// trivially on the sphere, so the bank degenerates to four copies of it and
/// the origin rotation is the identity; the steering identity still holds
/// because the interpolation coefficients of any rotation sum to one.
pub fn build_filter_bank(raw: &Sphere) -> Result<FilterBank> {
    let (gamma, normalized) = normalize_sphere(raw)?;
    let center = Vec3::new(
        normalized.as_array()[0],
        normalized.as_array()[1],
        normalized.as_array()[2],
    );
    let origin_rotation = if center.norm() <= DIRECTION_EPS {
        Rotation3::IDENTITY
    } else {
        geodesic_rotation(center, PIVOT)?
    };
    let mut rows = [[0.0; 5]; 4];
    for (i, row) in rows.iter_mut().enumerate() {
        let conj = origin_rotation
            .transpose()
            .compose(&tetra_rotation(i))
            .compose(&origin_rotation);
        *row = conj.lift5().apply(normalized.as_array());
    }
    Ok(FilterBank {
        rows,
        origin_rotation,
        gamma,
    })
}

/// The bank response `B X` for one embedded point.
pub fn bank_forward(bank: &FilterBank, x: &EmbeddedPoint) -> [f64; 4] {
    let xv = x.as_array();
    std::array::from_fn(|i| {
        bank.rows[i]
            .iter()
            .zip(xv.iter())
            .map(|(b, v)| b * v)
            .sum()
    })
}

/// The representation of `r` in this bank's output space (orthogonal,
/// determinant +1).
pub fn rotation_rep_v(bank: &FilterBank, r: &Rotation3) -> Mat4 {
    TetraBasis::standard().rotation_rep(&bank.origin_rotation, r)
}

/// Interpolation coefficients for steering this bank by `r`; the first
/// column of [`rotation_rep_v`], hence always unit norm.
pub fn interp_coeffs(bank: &FilterBank, r: &Rotation3) -> [f64; 4] {
    TetraBasis::standard().interp_coeffs(&bank.origin_rotation, r)
}

/// Steered response `gamma * v . (B X_rot)`: with `v = interp_coeffs(b, r)`
/// and `X_rot` the embedding of the r-rotated point, this equals the raw
/// sphere's activation on the unrotated point.
pub fn steer_activation(bank: &FilterBank, v: &[f64; 4], x_rot: &EmbeddedPoint) -> f64 {
    let y = bank_forward(bank, x_rot);
    bank.gamma * (v[0] * y[0] + v[1] * y[1] + v[2] * y[2] + v[3] * y[3])
}

/// Identity coefficients: select bank row 0.
pub const IDENTITY_COEFFS: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

/// Immutable part of a steerable model: one bank per (hidden unit, point
/// slot) plus the ancestor's output layer, copied verbatim.
#[derive(Debug, PartialEq)]
pub struct SteerableCore {
    /// Banks in row-major (h, k) order.
    banks: Vec<FilterBank>,
    output: Vec<Vec<f64>>,
    k: usize,
    h: usize,
    units: String,
}

/// A steerable model: frozen filter banks plus per-bank interpolation
/// coefficients, its only free parameters.
///
/// The banks are shared and immutable; [`SteerableModel::set_rotation`]
/// returns a new model with fresh coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerableModel {
    core: Arc<SteerableCore>,
    coeffs: Vec<[f64; 4]>,
}

impl SteerableModel {
    pub fn k(&self) -> usize {
        self.core.k
    }

    pub fn h(&self) -> usize {
        self.core.h
    }

    pub fn c(&self) -> usize {
        self.core.output.len()
    }

    pub fn units(&self) -> &str {
        &self.core.units
    }

    pub fn bank(&self, h: usize, k: usize) -> &FilterBank {
        &self.core.banks[h * self.core.k + k]
    }

    pub fn coeff(&self, h: usize, k: usize) -> &[f64; 4] {
        &self.coeffs[h * self.core.k + k]
    }

    pub fn output(&self) -> &[Vec<f64>] {
        &self.core.output
    }

    /// Reassembles a model from checkpoint parts.
    pub fn from_parts(
        banks: Vec<FilterBank>,
        coeffs: Vec<[f64; 4]>,
        output: Vec<Vec<f64>>,
        k: usize,
        units: String,
    ) -> Result<Self> {
        if k == 0 || !banks.len().is_multiple_of(k) {
            return Err(Error::ShapeMismatch {
                what: "banks per hidden unit",
                expected: k.max(1),
                got: banks.len(),
            });
        }
        if coeffs.len() != banks.len() {
            return Err(Error::ShapeMismatch {
                what: "coefficient vectors",
                expected: banks.len(),
                got: coeffs.len(),
            });
        }
        let h = banks.len() / k;
        Ok(Self {
            core: Arc::new(SteerableCore {
                banks,
                output,
                k,
                h,
                units,
            }),
            coeffs,
        })
    }

    /// Computes the interpolation coefficients of every bank for a known
    /// input rotation, returning the re-parameterized model.
    pub fn set_rotation(&self, r: &Rotation3) -> SteerableModel {
        let coeffs = self
            .core
            .banks
            .iter()
            .map(|b| interp_coeffs(b, r))
            .collect();
        SteerableModel {
            core: Arc::clone(&self.core),
            coeffs,
        }
    }

    /// Hidden activations alone: steered per-point responses summed over
    /// each hidden unit's K banks.
    pub fn hidden_forward(&self, cloud: &[Vec3]) -> Result<Vec<f64>> {
        if cloud.len() != self.core.k {
            return Err(Error::ShapeMismatch {
                what: "cloud points",
                expected: self.core.k,
                got: cloud.len(),
            });
        }
        let embedded: Vec<EmbeddedPoint> = cloud
            .iter()
            .map(|&p| crate::conformal::embed_point(p))
            .collect();
        let mut hidden = vec![0.0; self.core.h];
        for (hi, out) in hidden.iter_mut().enumerate() {
            let base = hi * self.core.k;
            *out = (0..self.core.k)
                .map(|ki| {
                    steer_activation(&self.core.banks[base + ki], &self.coeffs[base + ki], &embedded[ki])
                })
                .sum();
        }
        Ok(hidden)
    }

    /// Full forward pass; the output layer is identical to the ancestor's.
    pub fn forward(&self, cloud: &[Vec3]) -> Result<ForwardTrace> {
        let hidden = self.hidden_forward(cloud)?;
        Ok(output_forward(&self.core.output, hidden))
    }

    pub fn predict(&self, cloud: &[Vec3]) -> Result<usize> {
        Ok(argmax(&self.forward(cloud)?.logits))
    }
}

/// Builds the steerable model from a frozen ancestor: one filter bank per
/// hidden sphere, the output layer copied verbatim, and identity
/// coefficients everywhere.
pub fn build_steerable(params: &MlgpParams) -> Result<SteerableModel> {
    params.validate()?;
    let k = params.k();
    let mut banks = Vec::with_capacity(params.h() * k);
    for (hi, neuron) in params.hidden.iter().enumerate() {
        for (ki, sphere) in neuron.spheres.iter().enumerate() {
            let bank = build_filter_bank(sphere).map_err(|e| match e {
                Error::DegenerateScale {
                    scale, threshold, ..
                } => Error::DegenerateScale {
                    scale,
                    threshold,
                    location: format!("hidden sphere (h={hi}, k={ki})"),
                },
                other => other,
            })?;
            banks.push(bank);
        }
    }
    let coeffs = vec![IDENTITY_COEFFS; banks.len()];
    SteerableModel::from_parts(banks, coeffs, params.output.clone(), k, params.units.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{activation, embed_point, sphere_from_geometry};
    use crate::geom::sample_rotation;
    use crate::test_util::{random_bankable_params, random_cloud, random_raw_sphere};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_matrix_is_orthogonal_with_unit_determinant() {
        let basis = TetraBasis::standard();
        assert!(basis.matrix().is_orthogonal(1e-15));
        assert_abs_diff_eq!(basis.matrix().det(), 1.0, epsilon = 1e-15);
        assert_eq!(basis.m1(), [0.5, 0.5, 0.5, 0.5]);
        // Vertices sum to zero.
        let sum = TETRA_VERTICES.iter().fold(Vec3::ZERO, |a, &v| a + v);
        assert_eq!(sum, Vec3::ZERO);
    }

    #[test]
    fn tetra_rotation_examples() {
        let r0 = tetra_rotation(0);
        assert_eq!(r0.rows(), Rotation3::IDENTITY.rows());

        let r1 = tetra_rotation(1);
        let img = r1.apply(TETRA_VERTICES[0].normalized().unwrap());
        let target = TETRA_VERTICES[1].normalized().unwrap();
        assert!((img - target).norm() < 1e-12);
        // Minimal angle between tetrahedron vertices: arccos(-1/3).
        let angle = ((r1.trace() - 1.0) / 2.0).acos();
        assert_abs_diff_eq!(angle, (-1.0f64 / 3.0).acos(), epsilon = 1e-12);

        for i in 0..4 {
            assert!(tetra_rotation(i).is_special_orthogonal(1e-12));
        }
    }

    #[test]
    fn bank_of_pivot_centered_sphere_hits_all_vertices() {
        // Center already at (1,1,1): origin rotation is the identity and the
        // row centers are exactly the tetrahedron vertices, radii unchanged.
        let s = sphere_from_geometry(Vec3::new(1.0, 1.0, 1.0), 1.0);
        let bank = build_filter_bank(&s).unwrap();
        assert!((bank.origin_rotation().trace() - 3.0).abs() < 1e-12);
        for (i, row) in bank.rows().iter().enumerate() {
            let g = Sphere::new(*row).geometry().unwrap();
            assert!((g.center - TETRA_VERTICES[i]).norm() < 1e-12);
            assert_abs_diff_eq!(g.radius_sq, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bank_row_zero_is_the_normalized_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let raw = random_raw_sphere(&mut rng);
            let (_, normalized) = normalize_sphere(&raw).unwrap();
            let bank = build_filter_bank(&raw).unwrap();
            for (a, b) in bank.rows()[0].iter().zip(normalized.as_array().iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bank_of_origin_centered_sphere_has_equal_rows() {
        let raw = Sphere::new(sphere_from_geometry(Vec3::ZERO, 1.3).as_array().map(|v| v * 2.0));
        let bank = build_filter_bank(&raw).unwrap();
        for i in 1..4 {
            assert_eq!(bank.rows()[i], bank.rows()[0]);
        }
        // Steering still holds on the degenerate bank.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let r = sample_rotation(&mut rng);
        let x = Vec3::new(0.3, -1.1, 0.7);
        let v = interp_coeffs(&bank, &r);
        let steered = steer_activation(&bank, &v, &embed_point(r.apply(x)));
        assert_abs_diff_eq!(steered, activation(&embed_point(x), &raw), epsilon = 1e-12);
    }

    #[test]
    fn bank_b2_rows_are_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let bank = build_filter_bank(&random_raw_sphere(&mut rng)).unwrap();
        for i in 1..4 {
            assert_eq!(bank.rows()[i][3], bank.rows()[0][3]);
            assert_eq!(bank.rows()[i][4], bank.rows()[0][4]);
        }
    }

    #[test]
    fn degenerate_scale_is_propagated() {
        let raw = Sphere::new([0.0, 0.0, 1.0, 0.0, 1e-12]);
        assert!(matches!(
            build_filter_bank(&raw),
            Err(Error::DegenerateScale { .. })
        ));
    }

    #[test]
    fn bank_center_activation_example() {
        let s = sphere_from_geometry(Vec3::new(1.0, 1.0, 1.0), 1.0);
        let bank = build_filter_bank(&s).unwrap();
        let y = bank_forward(&bank, &embed_point(Vec3::new(1.0, 1.0, 1.0)));
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn bank_output_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..100 {
            let bank = build_filter_bank(&random_raw_sphere(&mut rng)).unwrap();
            let r = sample_rotation(&mut rng);
            let x = embed_point(Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ));
            let lhs = rotation_rep_v(&bank, &r).apply(bank_forward(&bank, &x));
            let rhs = bank_forward(&bank, &EmbeddedPoint::from_array(r.lift5().apply(x.as_array())));
            for (a, b) in lhs.iter().zip(rhs.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn rotation_rep_identity_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let bank = build_filter_bank(&random_raw_sphere(&mut rng)).unwrap();

        let v_id = rotation_rep_v(&bank, &Rotation3::IDENTITY);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(v_id.m[i][j], expect, epsilon = 1e-12);
            }
        }

        for _ in 0..100 {
            let r = sample_rotation(&mut rng);
            let v = rotation_rep_v(&bank, &r);
            assert!(v.is_orthogonal(1e-12));
            assert_abs_diff_eq!(v.det(), 1.0, epsilon = 1e-10);
            let recovered = TetraBasis::standard().rotation_from_rep(bank.origin_rotation(), &v);
            let mut frob = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let d = recovered.rows()[i][j] - r.rows()[i][j];
                    frob += d * d;
                }
            }
            assert!(frob.sqrt() < 1e-10);
        }
    }

    #[test]
    fn rotation_rep_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let bank = build_filter_bank(&random_raw_sphere(&mut rng)).unwrap();
        for _ in 0..50 {
            let r1 = sample_rotation(&mut rng);
            let r2 = sample_rotation(&mut rng);
            let lhs = rotation_rep_v(&bank, &r1.compose(&r2));
            let rhs = rotation_rep_v(&bank, &r1).mul(&rotation_rep_v(&bank, &r2));
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(lhs.m[i][j], rhs.m[i][j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn interp_coeff_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let bank = build_filter_bank(&random_raw_sphere(&mut rng)).unwrap();

        let id = interp_coeffs(&bank, &Rotation3::IDENTITY);
        for (a, b) in id.iter().zip(IDENTITY_COEFFS.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }

        // The conjugated first tetra rotation selects the second filter.
        let ro = bank.origin_rotation();
        let r = ro.transpose().compose(&tetra_rotation(1)).compose(ro);
        let v = interp_coeffs(&bank, &r);
        let expect = [0.0, 1.0, 0.0, 0.0];
        for (a, b) in v.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        for _ in 0..100 {
            let v = interp_coeffs(&bank, &sample_rotation(&mut rng));
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    proptest::proptest! {
        // The steered response on a rotated point equals the raw sphere's
        // activation on the unrotated point, for any sphere and rotation.
        #[test]
        fn steering_identity_holds(
            px in -2.0f64..2.0, py in -2.0f64..2.0, pz in -2.0f64..2.0,
            cx in -2.0f64..2.0, cy in -2.0f64..2.0, cz in -2.0f64..2.0,
            radius in -1.5f64..1.5, gamma in 0.2f64..3.0, flip: bool,
            rot_seed in 0u64..1_000_000,
        ) {
            let scale = if flip { -gamma } else { gamma };
            let raw = Sphere::new(
                sphere_from_geometry(Vec3::new(cx, cy, cz), radius)
                    .as_array()
                    .map(|v| v * scale),
            );
            let bank = build_filter_bank(&raw).unwrap();
            let x = Vec3::new(px, py, pz);
            let r = sample_rotation(&mut ChaCha8Rng::seed_from_u64(rot_seed));
            let v = interp_coeffs(&bank, &r);
            let steered = steer_activation(&bank, &v, &embed_point(r.apply(x)));
            let original = activation(&embed_point(x), &raw);
            proptest::prop_assert!((steered - original).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_coeffs_select_row_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let raw = random_raw_sphere(&mut rng);
        let bank = build_filter_bank(&raw).unwrap();
        let x = embed_point(Vec3::new(0.4, 0.2, -0.9));
        let selected = steer_activation(&bank, &IDENTITY_COEFFS, &x);
        assert_abs_diff_eq!(selected, activation(&x, &raw), epsilon = 1e-12);
    }

    #[test]
    fn selector_coeffs_match_direct_row_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let raw = random_raw_sphere(&mut rng);
        let bank = build_filter_bank(&raw).unwrap();
        let x = Vec3::new(-0.7, 1.2, 0.5);
        let ro = bank.origin_rotation();
        let r = ro.transpose().compose(&tetra_rotation(1)).compose(ro);
        let x_rot = embed_point(r.apply(x));
        let via_selector = steer_activation(&bank, &[0.0, 1.0, 0.0, 0.0], &x_rot);
        let direct = bank.gamma() * bank_forward(&bank, &x_rot)[1];
        assert_eq!(via_selector, direct);
    }

    #[test]
    fn default_steerable_model_matches_ancestor_on_canonical_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let params = random_bankable_params(&mut rng, 4, 5, 8);
        let model = build_steerable(&params).unwrap();
        assert_eq!(model.h() * model.k(), 20);

        let cloud = random_cloud(&mut rng, 4);
        let ancestor = crate::mlgp::mlgp_forward(&params, &cloud).unwrap();
        let steered = model.forward(&cloud).unwrap();
        for (a, b) in ancestor.logits.iter().zip(&steered.logits) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn construction_is_bitwise_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let params = random_bankable_params(&mut rng, 3, 2, 3);
        let a = build_steerable(&params).unwrap();
        let b = build_steerable(&params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn build_steerable_reports_degenerate_sphere_location() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut params = random_bankable_params(&mut rng, 3, 2, 3);
        params.hidden[1].spheres[2] = Sphere::new([0.1, 0.2, 0.3, 0.4, 0.0]);
        match build_steerable(&params) {
            Err(Error::DegenerateScale { location, .. }) => {
                assert!(location.contains("h=1") && location.contains("k=2"), "{location}");
            }
            other => panic!("expected DegenerateScale, got {other:?}"),
        }
    }

    #[test]
    fn set_rotation_recovers_ancestor_hidden_on_rotated_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..50 {
            let params = random_bankable_params(&mut rng, 4, 3, 3);
            let model = build_steerable(&params).unwrap();
            let cloud = random_cloud(&mut rng, 4);
            let r = sample_rotation(&mut rng);

            let steered = model.set_rotation(&r);
            let rotated: Vec<Vec3> = cloud.iter().map(|&p| r.apply(p)).collect();
            let hidden = steered.hidden_forward(&rotated).unwrap();
            let reference = crate::mlgp::mlgp_forward(&params, &cloud).unwrap().hidden_pre;
            for (a, b) in hidden.iter().zip(&reference) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }

            // Identity rotation restores identity coefficients.
            let id = model.set_rotation(&Rotation3::IDENTITY);
            for hi in 0..model.h() {
                for ki in 0..model.k() {
                    let v = id.coeff(hi, ki);
                    for (a, b) in v.iter().zip(IDENTITY_COEFFS.iter()) {
                        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_rotation_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let params = random_bankable_params(&mut rng, 4, 3, 3);
        let model = build_steerable(&params).unwrap();
        let cloud = random_cloud(&mut rng, 4);
        let r = sample_rotation(&mut rng);
        let wrong = sample_rotation(&mut rng);

        let rotated: Vec<Vec3> = cloud.iter().map(|&p| r.apply(p)).collect();
        let hidden = model.set_rotation(&wrong).hidden_forward(&rotated).unwrap();
        let reference = crate::mlgp::mlgp_forward(&params, &cloud).unwrap().hidden_pre;
        let max_diff = hidden
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_diff > 1e-6, "wrong rotation went unnoticed: {max_diff}");
    }
}
