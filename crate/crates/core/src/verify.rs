//! Randomized verification of every numerical claim the construction rests
//! on, runnable outside the test harness: each property draws its own seeded
//! trials, records the worst observed error, and dumps the worst-case inputs
//! when it fails.

use crate::conformal::{activation, embed_point, normalize_sphere, sphere_from_geometry, EmbeddedPoint, Sphere};
use crate::experiment::derive_seed;
use crate::geom::{geodesic_rotation, sample_rotation, Rotation3, Vec3};
use crate::mlgp::{mlgp_forward, GeometricNeuron, MlgpParams};
use crate::steer::{build_filter_bank, build_steerable, steer_activation, tetra_rotation, FilterBank, TetraBasis};
use crate::train::{backward, cross_entropy_loss};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Outcome of one randomized property.
#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: &'static str,
    pub trials: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Inputs of the worst trial, present when the property failed.
    pub counterexample: Option<String>,
}

/// All property results for one suite run.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    /// One line per property; counterexamples for failures.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status} {:<28} trials={:<5} max_error={:<12.3e} tolerance={:.0e}",
                r.name, r.trials, r.max_error, r.tolerance
            );
            if !r.passed {
                if let Some(cx) = &r.counterexample {
                    let _ = writeln!(out, "     counterexample: {cx}");
                }
            }
        }
        let _ = writeln!(
            out,
            "{} of {} properties passed (seed {})",
            self.results.iter().filter(|r| r.passed).count(),
            self.results.len(),
            self.seed
        );
        out
    }
}

/// Model dimensions used by the network-level properties.
#[derive(Debug, Clone, Copy)]
pub struct ModelDims {
    pub k: usize,
    pub h: usize,
    pub c: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self { k: 4, h: 5, c: 8 }
    }
}

struct Trial {
    error: f64,
    detail: String,
}

fn run_property<F>(name: &'static str, seed: u64, trials: usize, tolerance: f64, mut trial: F) -> PropertyResult
where
    F: FnMut(&mut ChaCha8Rng) -> Trial,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = f64::NEG_INFINITY;
    let mut worst = String::new();
    for _ in 0..trials {
        let outcome = trial(&mut rng);
        if outcome.error > max_error {
            max_error = outcome.error;
            worst = outcome.detail;
        }
    }
    let passed = max_error <= tolerance;
    PropertyResult {
        name,
        trials,
        max_error,
        tolerance,
        passed,
        counterexample: if passed { None } else { Some(worst) },
    }
}

fn random_point<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

fn random_raw_sphere<R: Rng>(rng: &mut R) -> Sphere {
    let center = random_point(rng);
    let radius = rng.random_range(-1.5..1.5);
    let gamma = rng.random_range(0.3..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    Sphere::new(sphere_from_geometry(center, radius).as_array().map(|v| v * gamma))
}

fn random_bankable_params<R: Rng>(rng: &mut R, dims: ModelDims) -> MlgpParams {
    MlgpParams {
        hidden: (0..dims.h)
            .map(|_| GeometricNeuron {
                spheres: (0..dims.k).map(|_| random_raw_sphere(rng)).collect(),
            })
            .collect(),
        output: (0..dims.c)
            .map(|_| (0..dims.h + 2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        units: "abstract".to_string(),
    }
}

fn fmt_rotation(r: &Rotation3) -> String {
    format!("{:?}", r.rows())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max)
}

/// Relative discrete-Fourier energy outside frequencies {-1, 0, 1} of a
/// uniformly sampled periodic signal. Plain O(n^2) DFT; the grids are tiny.
pub fn high_frequency_energy_ratio(samples: &[f64]) -> f64 {
    let n = samples.len();
    let mut total = 0.0;
    let mut low = 0.0;
    for k in 0..n {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &g) in samples.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
            re += g * phase.cos();
            im += g * phase.sin();
        }
        let energy = re * re + im * im;
        total += energy;
        if k == 0 || k == 1 || k == n - 1 {
            low += energy;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (total - low) / total
    }
}

/// Singular values of the left 4x3 block, via the closed-form eigenvalues of
/// the symmetric 3x3 Gram matrix.
fn b3_singular_values(bank: &FilterBank) -> [f64; 3] {
    let mut gram = [[0.0; 3]; 3];
    for row in bank.rows() {
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    let eig = sym3_eigenvalues(&gram);
    eig.map(|l| l.max(0.0).sqrt())
}

/// Eigenvalues of a symmetric 3x3 matrix (trigonometric method), ascending.
fn sym3_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return d;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let eig1 = q + 2.0 * p * phi.cos();
    let eig3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let eig2 = 3.0 * q - eig1 - eig3;
    let mut out = [eig1, eig2, eig3];
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Runs the whole suite with the standard tetrahedron basis.
pub fn run_all(seed: u64, trials: usize, dims: ModelDims) -> VerifyReport {
    run_all_with_basis(TetraBasis::standard(), seed, trials, dims)
}

/// Runs the whole suite against an arbitrary basis matrix; the bank-space
/// properties must fail for a corrupted basis.
pub fn run_all_with_basis(
    basis: &TetraBasis,
    seed: u64,
    trials: usize,
    dims: ModelDims,
) -> VerifyReport {
    let mut results = Vec::new();
    let mut index = 0u64;
    let mut next_seed = || {
        index += 1;
        derive_seed(seed, index)
    };

    results.push(run_property(
        "geodesic_maps_direction",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let a = random_point(rng);
            let b = random_point(rng);
            if a.norm() <= 1e-3 || b.norm() <= 1e-3 {
                return Trial { error: 0.0, detail: String::new() };
            }
            let r = geodesic_rotation(a, b).unwrap();
            let error = (r.apply(a.normalized().unwrap()) - b.normalized().unwrap()).norm();
            Trial {
                error,
                detail: format!("from={a:?} to={b:?}"),
            }
        },
    ));

    results.push(run_property(
        "geodesic_is_special_orthogonal",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let a = random_point(rng);
            let b = random_point(rng);
            if a.norm() <= 1e-3 || b.norm() <= 1e-3 {
                return Trial { error: 0.0, detail: String::new() };
            }
            let r = geodesic_rotation(a, b).unwrap();
            let rtr = r.transpose().compose(&r);
            let mut error = (r.det() - 1.0).abs();
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    error = error.max((rtr.rows()[i][j] - expect).abs());
                }
            }
            Trial {
                error,
                detail: format!("from={a:?} to={b:?}"),
            }
        },
    ));

    results.push(run_property(
        "lift_homomorphism",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let r1 = sample_rotation(rng);
            let r2 = sample_rotation(rng);
            let composed = r1.compose(&r2).lift4();
            let product = r1.lift4().matrix().mul(r2.lift4().matrix());
            let mut error = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    error = error.max((composed.matrix().m[i][j] - product.m[i][j]).abs());
                }
            }
            Trial {
                error,
                detail: format!("r1={} r2={}", fmt_rotation(&r1), fmt_rotation(&r2)),
            }
        },
    ));

    results.push(run_property(
        "haar_sample_validity",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let r = sample_rotation(rng);
            let rtr = r.transpose().compose(&r);
            let mut error = (r.det() - 1.0).abs();
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    error = error.max((rtr.rows()[i][j] - expect).abs());
                }
            }
            Trial {
                error,
                detail: fmt_rotation(&r),
            }
        },
    ));

    results.push(run_property(
        "conformal_isometry",
        next_seed(),
        trials,
        1e-10,
        |rng| {
            let x = random_point(rng);
            let s = random_raw_sphere(rng);
            let r = sample_rotation(rng);
            let rotated = activation(
                &embed_point(r.apply(x)),
                &Sphere::new(r.lift5().apply(s.as_array())),
            );
            let base = activation(&embed_point(x), &s);
            Trial {
                error: (rotated - base).abs(),
                detail: format!("x={x:?} s={:?} r={}", s.as_array(), fmt_rotation(&r)),
            }
        },
    ));

    results.push(run_property(
        "activation_homogeneity",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let x = embed_point(random_point(rng));
            let s = random_raw_sphere(rng);
            let gamma = rng.random_range(-3.0..3.0);
            let scaled = Sphere::new(s.as_array().map(|v| v * gamma));
            let lhs = activation(&x, &scaled);
            let rhs = gamma * activation(&x, &s);
            Trial {
                error: (lhs - rhs).abs() / rhs.abs().max(1.0),
                detail: format!("x={:?} s={:?} gamma={gamma}", x.as_array(), s.as_array()),
            }
        },
    ));

    results.push(run_property(
        "first_degree_spectrum",
        next_seed(),
        trials,
        1e-9,
        |rng| {
            let x = embed_point(random_point(rng));
            let s = random_raw_sphere(rng);
            let axis = loop {
                let a = random_point(rng);
                if a.norm() > 0.1 {
                    break a;
                }
            };
            let n = 64;
            let samples: Vec<f64> = (0..n)
                .map(|t| {
                    let theta = 2.0 * std::f64::consts::PI * t as f64 / n as f64;
                    let rot = Rotation3::from_axis_angle(axis, theta).unwrap();
                    activation(&x, &Sphere::new(rot.lift5().apply(s.as_array())))
                })
                .collect();
            Trial {
                error: high_frequency_energy_ratio(&samples),
                detail: format!("x={:?} s={:?} axis={axis:?}", x.as_array(), s.as_array()),
            }
        },
    ));

    results.push(run_property(
        "bank_row0_is_source",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let s = random_raw_sphere(rng);
            let (_, normalized) = normalize_sphere(&s).unwrap();
            let bank = build_filter_bank(&s).unwrap();
            Trial {
                error: max_abs_diff(&bank.rows()[0], &normalized.as_array()),
                detail: format!("s={:?}", s.as_array()),
            }
        },
    ));

    results.push(run_property(
        "bank_constant_tail",
        next_seed(),
        trials,
        0.0,
        |rng| {
            let bank = build_filter_bank(&random_raw_sphere(rng)).unwrap();
            let x = embed_point(random_point(rng)).as_array();
            let tail0 = bank.rows()[0][3] * x[3] + bank.rows()[0][4] * x[4];
            let error = (1..4)
                .map(|i| {
                    let tail = bank.rows()[i][3] * x[3] + bank.rows()[i][4] * x[4];
                    (tail - tail0).abs()
                })
                .fold(0.0f64, f64::max);
            Trial {
                error,
                detail: format!("bank rows {:?}", bank.rows()),
            }
        },
    ));

    results.push(run_property(
        "bank_left_block_rank",
        next_seed(),
        trials,
        0.0,
        |rng| {
            let s = random_raw_sphere(rng);
            let center_norm = s.geometry().map(|g| g.center.norm()).unwrap_or(0.0);
            if center_norm <= crate::geom::DIRECTION_EPS {
                return Trial { error: -1.0, detail: String::new() };
            }
            let bank = build_filter_bank(&s).unwrap();
            let sv = b3_singular_values(&bank);
            // Negative while the smallest singular value clears the
            // rank threshold relative to the largest.
            Trial {
                error: 1e-8 - sv[0] / sv[2],
                detail: format!("s={:?} singular_values={sv:?}", s.as_array()),
            }
        },
    ));

    results.push(run_property(
        "filter_bank_equivariance",
        next_seed(),
        trials,
        1e-10,
        |rng| {
            let s = random_raw_sphere(rng);
            let bank = build_filter_bank(&s).unwrap();
            let r = sample_rotation(rng);
            let x = embed_point(random_point(rng));
            let y = bank_forward_raw(&bank, &x);
            let lhs = basis.rotation_rep(bank.origin_rotation(), &r).apply(y);
            let rhs = bank_forward_raw(
                &bank,
                &EmbeddedPoint::from_array(r.lift5().apply(x.as_array())),
            );
            Trial {
                error: max_abs_diff(&lhs, &rhs),
                detail: format!(
                    "s={:?} x={:?} r={}",
                    s.as_array(),
                    x.as_array(),
                    fmt_rotation(&r)
                ),
            }
        },
    ));

    results.push(run_property(
        "rotation_rep_roundtrip",
        next_seed(),
        trials,
        1e-10,
        |rng| {
            let bank = build_filter_bank(&random_raw_sphere(rng)).unwrap();
            let r = sample_rotation(rng);
            let v = basis.rotation_rep(bank.origin_rotation(), &r);
            let recovered = basis.rotation_from_rep(bank.origin_rotation(), &v);
            let mut frob = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let d = recovered.rows()[i][j] - r.rows()[i][j];
                    frob += d * d;
                }
            }
            Trial {
                error: frob.sqrt(),
                detail: fmt_rotation(&r),
            }
        },
    ));

    results.push(run_property(
        "rotation_rep_homomorphism",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let bank = build_filter_bank(&random_raw_sphere(rng)).unwrap();
            let r1 = sample_rotation(rng);
            let r2 = sample_rotation(rng);
            let lhs = basis.rotation_rep(bank.origin_rotation(), &r1.compose(&r2));
            let rhs = basis
                .rotation_rep(bank.origin_rotation(), &r1)
                .mul(&basis.rotation_rep(bank.origin_rotation(), &r2));
            let mut error = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    error = error.max((lhs.m[i][j] - rhs.m[i][j]).abs());
                }
            }
            Trial {
                error,
                detail: format!("r1={} r2={}", fmt_rotation(&r1), fmt_rotation(&r2)),
            }
        },
    ));

    results.push(run_property(
        "interp_coeffs_unit_norm",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let bank = build_filter_bank(&random_raw_sphere(rng)).unwrap();
            let r = sample_rotation(rng);
            let v = basis.interp_coeffs(bank.origin_rotation(), &r);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Trial {
                error: (norm - 1.0).abs(),
                detail: fmt_rotation(&r),
            }
        },
    ));

    results.push(run_property(
        "interp_second_filter_exact",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let s = random_raw_sphere(rng);
            let bank = build_filter_bank(&s).unwrap();
            let ro = bank.origin_rotation();
            let r = ro.transpose().compose(&tetra_rotation(1)).compose(ro);
            let v = basis.interp_coeffs(ro, &r);
            Trial {
                error: max_abs_diff(&v, &[0.0, 1.0, 0.0, 0.0]),
                detail: format!("s={:?} v={v:?}", s.as_array()),
            }
        },
    ));

    results.push(run_property(
        "interp_coeffs_equivariance",
        next_seed(),
        trials,
        1e-12,
        |rng| {
            let bank = build_filter_bank(&random_raw_sphere(rng)).unwrap();
            let ro = bank.origin_rotation();
            let r1 = sample_rotation(rng);
            let r2 = sample_rotation(rng);
            let lhs = basis.interp_coeffs(ro, &r2.compose(&r1));
            let rhs = basis.rotation_rep(ro, &r2).apply(basis.interp_coeffs(ro, &r1));
            Trial {
                error: max_abs_diff(&lhs, &rhs),
                detail: format!("r1={} r2={}", fmt_rotation(&r1), fmt_rotation(&r2)),
            }
        },
    ));

    results.push(run_property(
        "steering_identity",
        next_seed(),
        trials,
        1e-9,
        |rng| {
            let s = random_raw_sphere(rng);
            let bank = build_filter_bank(&s).unwrap();
            let x = random_point(rng);
            let r = sample_rotation(rng);
            let v = basis.interp_coeffs(bank.origin_rotation(), &r);
            let steered = steer_activation(&bank, &v, &embed_point(r.apply(x)));
            let original = activation(&embed_point(x), &s);
            Trial {
                error: (steered - original).abs(),
                detail: format!(
                    "s={:?} x={x:?} r={}",
                    s.as_array(),
                    fmt_rotation(&r)
                ),
            }
        },
    ));

    results.push(run_property(
        "steered_hidden_matches_ancestor",
        next_seed(),
        trials,
        1e-9,
        |rng| {
            let params = random_bankable_params(rng, dims);
            let model = build_steerable(&params).unwrap();
            let cloud: Vec<Vec3> = (0..dims.k).map(|_| random_point(rng)).collect();
            let r = sample_rotation(rng);
            let rotated: Vec<Vec3> = cloud.iter().map(|&p| r.apply(p)).collect();
            let hidden = model.set_rotation(&r).hidden_forward(&rotated).unwrap();
            let reference = mlgp_forward(&params, &cloud).unwrap().hidden_pre;
            Trial {
                error: max_abs_diff(&hidden, &reference),
                detail: format!("r={}", fmt_rotation(&r)),
            }
        },
    ));

    results.push(run_property(
        "model_logit_invariance",
        next_seed(),
        trials,
        1e-9,
        |rng| {
            let params = random_bankable_params(rng, dims);
            let model = build_steerable(&params).unwrap();
            let cloud: Vec<Vec3> = (0..dims.k).map(|_| random_point(rng)).collect();
            let r = sample_rotation(rng);
            let rotated: Vec<Vec3> = cloud.iter().map(|&p| r.apply(p)).collect();
            let steered_logits = model.set_rotation(&r).forward(&rotated).unwrap().logits;
            let base_logits = mlgp_forward(&params, &cloud).unwrap().logits;
            Trial {
                error: max_abs_diff(&steered_logits, &base_logits),
                detail: format!("r={}", fmt_rotation(&r)),
            }
        },
    ));

    results.push(run_property(
        "gradient_finite_difference",
        next_seed(),
        trials,
        1e-5,
        |rng| {
            // Parameters drawn with the training initialization (fan-in
            // scaled), the regime where the central finite-difference
            // oracle at step 1e-5 resolves 1e-5 relative.
            let params = crate::train::init_params(rng, dims.k, dims.h, dims.c, "abstract");
            let cloud: Vec<Vec3> = (0..dims.k).map(|_| random_point(rng)).collect();
            let label = rng.random_range(0..dims.c);
            let error = gradient_check_worst_error(&params, &cloud, label);
            Trial {
                error,
                detail: format!("dims={dims:?} label={label}"),
            }
        },
    ));

    VerifyReport { seed, results }
}

fn bank_forward_raw(bank: &FilterBank, x: &EmbeddedPoint) -> [f64; 4] {
    crate::steer::bank_forward(bank, x)
}

/// Worst relative coordinate error between the analytic gradient and central
/// finite differences (step 1e-5).
///
/// The loss is evaluated through intermediates of logit magnitude, so the
/// difference quotient carries rounding noise of about
/// `ulp(logit) / step`; coordinates whose deviation sits below that floor
/// are measurement noise, not gradient error, and are skipped.
fn gradient_check_worst_error(params: &MlgpParams, cloud: &[Vec3], label: usize) -> f64 {
    let step = 1e-5;
    let (_, analytic) = backward(params, cloud, label).unwrap();
    let logit_scale = mlgp_forward(params, cloud)
        .unwrap()
        .logits
        .iter()
        .fold(1.0f64, |m, l| m.max(l.abs()));
    let noise_floor = (3e-10 * logit_scale).max(1e-9);
    let loss_at = |p: &MlgpParams| {
        cross_entropy_loss(&mlgp_forward(p, cloud).unwrap().logits, label).unwrap()
    };
    let mut worst = 0.0f64;
    let mut check = |a: f64, plus: f64, minus: f64| {
        let numeric = (plus - minus) / (2.0 * step);
        let diff = (a - numeric).abs();
        if diff > noise_floor {
            worst = worst.max(diff / a.abs().max(numeric.abs()).max(1e-4));
        }
    };
    for hi in 0..params.h() {
        for ki in 0..params.k() {
            for j in 0..5 {
                let mut plus = params.clone();
                let mut minus = params.clone();
                let mut vp = plus.hidden[hi].spheres[ki].as_array();
                let mut vm = minus.hidden[hi].spheres[ki].as_array();
                vp[j] += step;
                vm[j] -= step;
                plus.hidden[hi].spheres[ki] = Sphere::new(vp);
                minus.hidden[hi].spheres[ki] = Sphere::new(vm);
                check(analytic.hidden[hi][ki][j], loss_at(&plus), loss_at(&minus));
            }
        }
    }
    for ci in 0..params.c() {
        for j in 0..params.h() + 2 {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.output[ci][j] += step;
            minus.output[ci][j] -= step;
            check(analytic.output[ci][j], loss_at(&plus), loss_at(&minus));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Mat4;

    #[test]
    fn full_suite_passes_with_standard_basis() {
        let report = run_all(2024, 40, ModelDims::default());
        assert!(report.all_passed(), "{}", report.format());
        for result in &report.results {
            assert_eq!(result.trials, 40);
        }
    }

    #[test]
    fn corrupted_basis_is_caught_with_counterexample() {
        // Flip one sign in the basis matrix; the bank-space properties must
        // fail and report the offending inputs.
        let mut m = TetraBasis::standard().matrix().m;
        m[0][1] = -m[0][1];
        let broken = TetraBasis::with_matrix(Mat4::from_rows(m));
        let report = run_all_with_basis(&broken, 2024, 20, ModelDims::default());
        assert!(!report.all_passed());
        let equivariance = report
            .results
            .iter()
            .find(|r| r.name == "filter_bank_equivariance")
            .unwrap();
        assert!(!equivariance.passed);
        assert!(equivariance.counterexample.is_some());
        assert!(equivariance.max_error > 1e-3);
    }

    #[test]
    fn report_lists_trials_and_errors() {
        let report = run_all(7, 10, ModelDims { k: 2, h: 2, c: 3 });
        let text = report.format();
        assert!(text.contains("trials=10"));
        assert!(text.contains("max_error="));
        assert!(text.contains("properties passed"));
    }

    #[test]
    fn dft_ratio_on_pure_tones() {
        let n = 64;
        let first: Vec<f64> = (0..n)
            .map(|t| 1.0 + (2.0 * std::f64::consts::PI * t as f64 / n as f64).cos())
            .collect();
        assert!(high_frequency_energy_ratio(&first) < 1e-28);

        let second: Vec<f64> = (0..n)
            .map(|t| (4.0 * std::f64::consts::PI * t as f64 / n as f64).sin())
            .collect();
        assert!(high_frequency_energy_ratio(&second) > 0.99);

        assert_eq!(high_frequency_energy_ratio(&vec![0.0; 64]), 0.0);
    }

    #[test]
    fn sym3_eigenvalues_of_diagonal_and_known_matrix() {
        let eig = sym3_eigenvalues(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(eig, [1.0, 2.0, 3.0]);

        // Rank-deficient Gram matrix has a zero eigenvalue.
        let eig = sym3_eigenvalues(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(eig[0].abs() < 1e-12);
        assert!((eig[2] - 2.0).abs() < 1e-12);
    }
}
