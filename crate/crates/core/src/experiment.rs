//! The known-rotation experiment: rotate the dataset by a sampled rotation,
//! perturb it, compute the steerable model's interpolation coefficients from
//! the ground-truth rotation, and compare against the ancestor on the
//! canonical-orientation data.
//!
//! Noise is applied to the rotated points; the ancestor reference sees the
//! same noise de-rotated into the canonical frame. This paired protocol
//! isolates steering error from noise sampling, which is what makes the two
//! accuracy columns track each other run by run.

use crate::data::{add_uniform_noise, Dataset};
use crate::error::{Error, Result};
use crate::geom::{rotate_cloud, sample_rotation};
use crate::mlgp::{argmax, mlgp_forward, MlgpParams};
use crate::steer::{build_steerable, SteerableModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

/// Aggregates for one noise level. Accuracies are percentages; the L1
/// distance is the mean over shapes of the L1 norm over the hidden units,
/// against the ancestor's clean canonical activations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub noise: f64,
    pub steerable_acc_mean: f64,
    pub steerable_acc_std: f64,
    pub ancestor_acc_mean: f64,
    pub ancestor_acc_std: f64,
    pub steerable_l1_mean: f64,
    pub steerable_l1_std: f64,
    pub ancestor_l1_mean: f64,
    pub ancestor_l1_std: f64,
    /// Largest per-run gap between the two accuracy columns, in percentage
    /// points; zero when the paired protocol holds exactly.
    pub max_run_acc_gap: f64,
}

/// Full experiment output; one row per noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub runs: usize,
    pub seed: u64,
    pub rows: Vec<NoiseRow>,
}

impl ExperimentReport {
    /// Stable, documented column order; one line per noise level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "noise,steerable_acc_mean,steerable_acc_std,ancestor_acc_mean,ancestor_acc_std,\
             steerable_l1_mean,steerable_l1_std,ancestor_l1_mean,ancestor_l1_std,\
             max_run_acc_gap,runs,seed\n",
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
                row.noise,
                row.steerable_acc_mean,
                row.steerable_acc_std,
                row.ancestor_acc_mean,
                row.ancestor_acc_std,
                row.steerable_l1_mean,
                row.steerable_l1_std,
                row.ancestor_l1_mean,
                row.ancestor_l1_std,
                row.max_run_acc_gap,
                self.runs,
                self.seed,
            );
        }
        out
    }

    /// The same data as [`ExperimentReport::to_csv`], losslessly, as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable summary table (accuracy to one decimal).
    pub fn to_table(&self) -> String {
        let mut out = String::from("noise     steerable        ancestor         l1 (steer)       l1 (anc)\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<9} {:>5.1} ± {:<7.1} {:>5.1} ± {:<7.1} {:>6.2} ± {:<6.2} {:>6.2} ± {:<6.2}",
                r.noise,
                r.steerable_acc_mean,
                r.steerable_acc_std,
                r.ancestor_acc_mean,
                r.ancestor_acc_std,
                r.steerable_l1_mean,
                r.steerable_l1_std,
                r.ancestor_l1_mean,
                r.ancestor_l1_std,
            );
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// SplitMix64 step; derives independent per-run RNG seeds.
pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Runs the experiment: `runs` sampled rotations, each evaluated at every
/// noise level on every cloud. Deterministic given the seed; runs use
/// independently derived RNG streams, so aggregation order is fixed by run
/// index regardless of evaluation order.
pub fn run_known_rotation(
    ancestor: &MlgpParams,
    steerable: &SteerableModel,
    dataset: &Dataset,
    noise_levels: &[f64],
    runs: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    if noise_levels.is_empty() {
        return Err(Error::InvalidArgument("need at least one noise level".into()));
    }
    for &a in noise_levels {
        if a < 0.0 {
            return Err(Error::NegativeAmplitude(a));
        }
    }
    check_derived_from(ancestor, steerable)?;
    if dataset.points_per_cloud != ancestor.k() {
        return Err(Error::ShapeMismatch {
            what: "points per cloud",
            expected: ancestor.k(),
            got: dataset.points_per_cloud,
        });
    }

    // Ground-truth hidden activations: the ancestor on the clean canonical data.
    let reference: Vec<Vec<f64>> = dataset
        .clouds
        .iter()
        .map(|c| mlgp_forward(ancestor, &c.points).map(|t| t.hidden_pre))
        .collect::<Result<_>>()?;

    let n_levels = noise_levels.len();
    let n_shapes = dataset.clouds.len() as f64;
    let mut steer_acc = vec![Vec::with_capacity(runs); n_levels];
    let mut anc_acc = vec![Vec::with_capacity(runs); n_levels];
    let mut steer_l1 = vec![Vec::with_capacity(runs); n_levels];
    let mut anc_l1 = vec![Vec::with_capacity(runs); n_levels];

    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, run as u64));
        let rotation = sample_rotation(&mut rng);
        let inverse = rotation.transpose();
        let steered = steerable.set_rotation(&rotation);

        for (li, &amplitude) in noise_levels.iter().enumerate() {
            let mut steer_correct = 0usize;
            let mut anc_correct = 0usize;
            let mut steer_dist = 0.0;
            let mut anc_dist = 0.0;

            for (cloud, truth) in dataset.clouds.iter().zip(&reference) {
                let rotated = rotate_cloud(&rotation, &cloud.points);
                let rotated_noisy = add_uniform_noise(&rotated, amplitude, &mut rng)?;
                // The paired canonical view: same noise, de-rotated.
                let canonical_noisy = rotate_cloud(&inverse, &rotated_noisy);

                let steer_trace = steered.forward(&rotated_noisy)?;
                let anc_trace = mlgp_forward(ancestor, &canonical_noisy)?;

                if argmax(&steer_trace.logits) == cloud.label {
                    steer_correct += 1;
                }
                if argmax(&anc_trace.logits) == cloud.label {
                    anc_correct += 1;
                }
                steer_dist += l1(&steer_trace.hidden_pre, truth);
                anc_dist += l1(&anc_trace.hidden_pre, truth);
            }

            steer_acc[li].push(100.0 * steer_correct as f64 / n_shapes);
            anc_acc[li].push(100.0 * anc_correct as f64 / n_shapes);
            steer_l1[li].push(steer_dist / n_shapes);
            anc_l1[li].push(anc_dist / n_shapes);
        }
    }

    let rows = (0..n_levels)
        .map(|li| {
            let (sa_m, sa_s) = mean_std(&steer_acc[li]);
            let (aa_m, aa_s) = mean_std(&anc_acc[li]);
            let (sl_m, sl_s) = mean_std(&steer_l1[li]);
            let (al_m, al_s) = mean_std(&anc_l1[li]);
            let gap = steer_acc[li]
                .iter()
                .zip(&anc_acc[li])
                .map(|(s, a)| (s - a).abs())
                .fold(0.0f64, f64::max);
            NoiseRow {
                noise: noise_levels[li],
                steerable_acc_mean: sa_m,
                steerable_acc_std: sa_s,
                ancestor_acc_mean: aa_m,
                ancestor_acc_std: aa_s,
                steerable_l1_mean: sl_m,
                steerable_l1_std: sl_s,
                ancestor_l1_mean: al_m,
                ancestor_l1_std: al_s,
                max_run_acc_gap: gap,
            }
        })
        .collect();

    Ok(ExperimentReport { runs, seed, rows })
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// The steerable model must be the deterministic construction of this
/// ancestor: rebuilding and comparing bitwise catches mixed checkpoints.
pub fn check_derived_from(ancestor: &MlgpParams, steerable: &SteerableModel) -> Result<()> {
    let rebuilt = build_steerable(ancestor)?;
    let mismatch = steerable.h() != rebuilt.h()
        || steerable.k() != rebuilt.k()
        || steerable.output() != rebuilt.output()
        || (0..steerable.h() * steerable.k()).any(|i| {
            let (hi, ki) = (i / steerable.k(), i % steerable.k());
            steerable.bank(hi, ki) != rebuilt.bank(hi, ki)
        });
    if mismatch {
        return Err(Error::InvalidArgument(
            "steerable checkpoint was not built from this ancestor".into(),
        ));
    }
    Ok(())
}
