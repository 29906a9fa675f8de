//! Supervised training of the ancestor model: softmax cross-entropy,
//! closed-form gradients through the quadratic hidden embedding, Adam with
//! the usual defaults, and a deterministic full-batch loop.

use crate::conformal::Sphere;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mlgp::{mlgp_forward, predict, GeometricNeuron, MlgpParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Training hyperparameters. Batch mode is always full batch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden_units: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_units: 5,
            epochs: 2000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.hidden_units < 1 {
            return Err(Error::InvalidArgument("hidden units must be >= 1".into()));
        }
        Ok(())
    }
}

/// Gradients mirroring [`MlgpParams`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub hidden: Vec<Vec<[f64; 5]>>,
    pub output: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(k: usize, h: usize, c: usize) -> Self {
        Self {
            hidden: vec![vec![[0.0; 5]; k]; h],
            output: vec![vec![0.0; h + 2]; c],
        }
    }

    fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.hidden.iter_mut().zip(&other.hidden) {
            for (x, y) in a.iter_mut().zip(b) {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += v;
                }
            }
        }
        for (a, b) in self.output.iter_mut().zip(&other.output) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, s: f64) {
        for n in self.hidden.iter_mut() {
            for sphere in n.iter_mut() {
                for v in sphere.iter_mut() {
                    *v *= s;
                }
            }
        }
        for o in self.output.iter_mut() {
            for v in o.iter_mut() {
                *v *= s;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        let h = self
            .hidden
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        self.output
            .iter()
            .flatten()
            .fold(h, |m, v| m.max(v.abs()))
    }
}

/// Numerically stabilized softmax probabilities.
fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-log softmax(logits)[label]`, stabilized by max subtraction.
pub fn cross_entropy_loss(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::BadLabel {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok(log_sum - (logits[label] - max))
}

/// Exact analytic gradient of `cross_entropy_loss . mlgp_forward` with
/// respect to every parameter.
///
/// The chain splits at the embedded hidden vector: component `i` of the
/// hidden vector reaches the logits both directly and through the quadratic
/// tail, so `dL/dh_i = g_i - h_i * g_{H+1}` where `g` is the output layer's
/// pullback of the softmax error.
pub fn backward(params: &MlgpParams, cloud: &[Vec3], label: usize) -> Result<(f64, Gradients)> {
    let trace = mlgp_forward(params, cloud)?;
    let loss = cross_entropy_loss(&trace.logits, label)?;
    let c = params.c();
    let h = params.h();

    let mut err = softmax(&trace.logits);
    err[label] -= 1.0;

    let mut grads = Gradients::zeros(params.k(), h, c);

    // Output layer: dL/dW_c = err_c * embedded_hidden.
    for (g_out, &e) in grads.output.iter_mut().zip(&err) {
        for (g, &eh) in g_out.iter_mut().zip(&trace.embedded_hidden) {
            *g = e * eh;
        }
    }

    // Pull the error back to the embedded hidden vector.
    let mut g_embedded = vec![0.0; h + 2];
    for (o, &e) in params.output.iter().zip(&err) {
        for (g, &w) in g_embedded.iter_mut().zip(o) {
            *g += e * w;
        }
    }

    // Through the embedding: dL/dh_i = g_i - h_i * g_last.
    let g_last = g_embedded[h + 1];
    let g_hidden: Vec<f64> = (0..h)
        .map(|i| g_embedded[i] - trace.hidden_pre[i] * g_last)
        .collect();

    // Hidden layer: dL/dS_{i,k} = dL/dh_i * X_k.
    let embedded: Vec<[f64; 5]> = cloud
        .iter()
        .map(|&x| crate::conformal::embed_point(x).as_array())
        .collect();
    for (g_neuron, &gh) in grads.hidden.iter_mut().zip(&g_hidden) {
        for (g_sphere, x) in g_neuron.iter_mut().zip(&embedded) {
            for (g, &xv) in g_sphere.iter_mut().zip(x) {
                *g = gh * xv;
            }
        }
    }

    Ok((loss, grads))
}

/// Per-parameter Adam state.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    m: Gradients,
    v: Gradients,
    step: usize,
}

impl OptimizerState {
    pub fn new(k: usize, h: usize, c: usize) -> Self {
        Self {
            m: Gradients::zeros(k, h, c),
            v: Gradients::zeros(k, h, c),
            step: 0,
        }
    }

    /// One Adam update with bias-corrected moment estimates.
    pub fn apply(&mut self, params: &mut MlgpParams, grads: &Gradients, cfg: &TrainConfig) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);

        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        };

        for (hi, neuron) in params.hidden.iter_mut().enumerate() {
            for (ki, sphere) in neuron.spheres.iter_mut().enumerate() {
                let mut vals = sphere.as_array();
                for (j, val) in vals.iter_mut().enumerate() {
                    update(
                        val,
                        grads.hidden[hi][ki][j],
                        &mut self.m.hidden[hi][ki][j],
                        &mut self.v.hidden[hi][ki][j],
                    );
                }
                *sphere = Sphere::new(vals);
            }
        }
        for (ci, out) in params.output.iter_mut().enumerate() {
            for (j, val) in out.iter_mut().enumerate() {
                update(
                    val,
                    grads.output[ci][j],
                    &mut self.m.output[ci][j],
                    &mut self.v.output[ci][j],
                );
            }
        }
    }
}

/// Uniform initialization on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`; fan-in is
/// 5K for hidden spheres and H + 2 for output spheres.
pub fn init_params<R: Rng>(rng: &mut R, k: usize, h: usize, c: usize, units: &str) -> MlgpParams {
    let hidden_bound = 1.0 / ((5 * k) as f64).sqrt();
    let output_bound = 1.0 / ((h + 2) as f64).sqrt();
    let hidden = (0..h)
        .map(|_| GeometricNeuron {
            spheres: (0..k)
                .map(|_| {
                    Sphere::new(std::array::from_fn(|_| {
                        rng.random_range(-hidden_bound..=hidden_bound)
                    }))
                })
                .collect(),
        })
        .collect();
    let output = (0..c)
        .map(|_| {
            (0..h + 2)
                .map(|_| rng.random_range(-output_bound..=output_bound))
                .collect()
        })
        .collect();
    MlgpParams {
        hidden,
        output,
        units: units.to_string(),
    }
}

/// Outcome of a training run.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: MlgpParams,
    /// Mean cross-entropy per epoch.
    pub loss_history: Vec<f64>,
    /// Training accuracy (fraction in [0, 1]) per epoch.
    pub accuracy_history: Vec<f64>,
    /// First epoch (1-based) at which training accuracy reached 1.0.
    pub first_perfect_epoch: Option<usize>,
}

/// Full-batch training loop. Deterministic given the seed: parameters are
/// initialized from a ChaCha stream, clouds are visited in dataset order,
/// and gradients are reduced in that fixed order.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainResult> {
    train_with_progress(dataset, cfg, |_, _, _| {})
}

/// Same as [`train`], invoking `progress(epoch, loss, accuracy)` after every
/// epoch.
pub fn train_with_progress<F>(dataset: &Dataset, cfg: &TrainConfig, mut progress: F) -> Result<TrainResult>
where
    F: FnMut(usize, f64, f64),
{
    cfg.validate()?;
    if dataset.clouds.is_empty() {
        return Err(Error::InvalidArgument("dataset is empty".into()));
    }
    let k = dataset.points_per_cloud;
    let h = cfg.hidden_units;
    let c = dataset.class_names.len();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init_params(&mut rng, k, h, c, &dataset.units);
    let mut opt = OptimizerState::new(k, h, c);
    let n = dataset.clouds.len() as f64;

    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut accuracy_history = Vec::with_capacity(cfg.epochs);
    let mut first_perfect_epoch = None;

    for epoch in 1..=cfg.epochs {
        let mut batch = Gradients::zeros(k, h, c);
        let mut loss_sum = 0.0;
        for cloud in &dataset.clouds {
            let (loss, grads) = backward(&params, &cloud.points, cloud.label)?;
            loss_sum += loss;
            batch.accumulate(&grads);
        }
        let mean_loss = loss_sum / n;
        if !mean_loss.is_finite() {
            return Err(Error::NonFinite {
                epoch,
                loss: mean_loss,
            });
        }
        batch.scale(1.0 / n);
        opt.apply(&mut params, &batch, cfg);

        let correct = dataset
            .clouds
            .iter()
            .filter(|cl| predict(&params, &cl.points).is_ok_and(|p| p == cl.label))
            .count();
        let accuracy = correct as f64 / n;
        if accuracy == 1.0 && first_perfect_epoch.is_none() {
            first_perfect_epoch = Some(epoch);
        }
        loss_history.push(mean_loss);
        accuracy_history.push(accuracy);
        progress(epoch, mean_loss, accuracy);
    }

    Ok(TrainResult {
        params,
        loss_history,
        accuracy_history,
        first_perfect_epoch,
    })
}

/// Training accuracy of `params` on `dataset`, as a fraction in [0, 1].
pub fn accuracy(params: &MlgpParams, dataset: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for cloud in &dataset.clouds {
        if predict(params, &cloud.points)? == cloud.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.clouds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tetris_dataset;
    use crate::geom::Vec3;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cross_entropy_examples() {
        // Uniform softmax over two classes.
        assert_abs_diff_eq!(
            cross_entropy_loss(&[0.0, 0.0], 0).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        // Huge logit gap must not overflow.
        let v = cross_entropy_loss(&[1e6, 0.0], 0).unwrap();
        assert!(v.is_finite() && v.abs() < 1e-12);
        // Frozen with an independent high-precision evaluation of
        // -log(e^3 / (e^1 + e^2 + e^3)).
        assert_abs_diff_eq!(
            cross_entropy_loss(&[1.0, 2.0, 3.0], 2).unwrap(),
            0.407_605_964_444_380_3,
            epsilon = 1e-15
        );
        assert!(matches!(
            cross_entropy_loss(&[0.0, 0.0], 5),
            Err(Error::BadLabel { .. })
        ));
    }

    /// Central finite differences over every parameter coordinate.
    fn fd_gradients(params: &MlgpParams, cloud: &[Vec3], label: usize, step: f64) -> Gradients {
        let mut grads = Gradients::zeros(params.k(), params.h(), params.c());
        let loss_at = |p: &MlgpParams| {
            cross_entropy_loss(&mlgp_forward(p, cloud).unwrap().logits, label).unwrap()
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
                    grads.hidden[hi][ki][j] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
                }
            }
        }
        for ci in 0..params.c() {
            for j in 0..params.h() + 2 {
                let mut plus = params.clone();
                let mut minus = params.clone();
                plus.output[ci][j] += step;
                minus.output[ci][j] -= step;
                grads.output[ci][j] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
            }
        }
        grads
    }

    fn assert_close(analytic: f64, numeric: f64) {
        let scale = analytic.abs().max(numeric.abs());
        let diff = (analytic - numeric).abs();
        assert!(
            diff <= (1e-5 * scale).max(1e-9),
            "gradient mismatch: analytic {analytic} vs fd {numeric}"
        );
    }

    #[test]
    fn gradients_match_finite_differences() {
        use crate::test_util::{random_cloud, random_params};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for trial in 0..100 {
            let k = 1 + trial % 4;
            let h = 1 + (trial / 4) % 3;
            let c = 2 + trial % 3;
            let params = random_params(&mut rng, k, h, c);
            let cloud = random_cloud(&mut rng, k);
            let label = trial % c;
            let (_, analytic) = backward(&params, &cloud, label).unwrap();
            let numeric = fd_gradients(&params, &cloud, label, 1e-5);
            for hi in 0..h {
                for ki in 0..k {
                    for j in 0..5 {
                        assert_close(analytic.hidden[hi][ki][j], numeric.hidden[hi][ki][j]);
                    }
                }
            }
            for ci in 0..c {
                for j in 0..h + 2 {
                    assert_close(analytic.output[ci][j], numeric.output[ci][j]);
                }
            }
        }
    }

    #[test]
    fn selector_output_gradient_is_softmax_error_times_embedding() {
        // H = 1, output sphere c = (1, 0, 0): hand chain rule gives
        // dL/dW_c = err_c * embedded_hidden.
        let params = MlgpParams {
            hidden: vec![GeometricNeuron {
                spheres: vec![Sphere::new([0.3, -0.2, 0.1, 0.4, 0.9])],
            }],
            output: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
            units: "abstract".into(),
        };
        let cloud = vec![Vec3::new(0.5, -1.0, 0.25)];
        let trace = mlgp_forward(&params, &cloud).unwrap();
        let p0 = {
            let e0 = trace.logits[0].exp();
            let e1 = trace.logits[1].exp();
            e0 / (e0 + e1)
        };
        let (_, grads) = backward(&params, &cloud, 0).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(
                grads.output[0][j],
                (p0 - 1.0) * trace.embedded_hidden[j],
                epsilon = 1e-12
            );
        }
        let numeric = fd_gradients(&params, &cloud, 0, 1e-5);
        for j in 0..3 {
            assert_close(grads.output[0][j], numeric.output[0][j]);
        }
    }

    #[test]
    fn saturated_logits_give_vanishing_gradient() {
        let params = MlgpParams {
            hidden: vec![GeometricNeuron {
                spheres: vec![Sphere::new([0.0, 0.0, 0.0, -40.0, 0.0])],
            }],
            output: vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]],
            units: "abstract".into(),
        };
        let cloud = vec![Vec3::new(0.0, 0.0, 0.0)];
        let (loss, grads) = backward(&params, &cloud, 0).unwrap();
        assert!(loss < 1e-12);
        assert!(grads.max_abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_is_rejected_and_one_epoch_runs() {
        let data = tetris_dataset();
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(train(&data, &bad).is_err());

        // Tiny learning rate, one epoch: parameters barely move but the loop
        // must complete and report one history entry.
        let cfg = TrainConfig {
            epochs: 1,
            learning_rate: 1e-300,
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init = init_params(&mut rng, 4, cfg.hidden_units, 8, "abstract");
        let result = train(&data, &cfg).unwrap();
        assert_eq!(result.loss_history.len(), 1);
        for (a, b) in result.params.hidden.iter().zip(&init.hidden) {
            for (sa, sb) in a.spheres.iter().zip(&b.spheres) {
                for (x, y) in sa.as_array().iter().zip(sb.as_array().iter()) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-290);
                }
            }
        }
    }

    #[test]
    fn diverging_training_aborts_with_diagnostic() {
        // An absurd learning rate blows the parameters up; the next epoch's
        // loss is non-finite and the loop must stop with the epoch number.
        let data = tetris_dataset();
        let cfg = TrainConfig {
            epochs: 10,
            learning_rate: 1e308,
            ..TrainConfig::default()
        };
        match train(&data, &cfg) {
            Err(Error::NonFinite { epoch, .. }) => assert!(epoch >= 2),
            other => panic!("expected NonFinite abort, got {other:?}"),
        }
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let data = tetris_dataset();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_history, b.loss_history);
    }

    #[test]
    fn tetris_loss_decreases() {
        let data = tetris_dataset();
        let cfg = TrainConfig {
            epochs: 200,
            ..TrainConfig::default()
        };
        let result = train(&data, &cfg).unwrap();
        assert!(result.loss_history.last().unwrap() < result.loss_history.first().unwrap());
    }
}
