//! Forward pass of the two-layer multilayer geometric perceptron: a
//! geometric-neuron hidden layer over embedded input points and a
//! hypersphere-neuron output layer over the embedded hidden vector.
//!
//! There is no bias and no activation function anywhere; the conformal
//! embedding supplies the nonlinearity, and softmax lives in the loss.

use crate::conformal::{activation, embed_point, Sphere};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// One hidden unit: a learned raw sphere per input point. Its output is the
/// sum of the per-point signed distances.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricNeuron {
    pub spheres: Vec<Sphere>,
}

impl GeometricNeuron {
    pub fn k(&self) -> usize {
        self.spheres.len()
    }
}

/// Trained (or initialized) parameters of the two-layer model.
///
/// `hidden` holds H geometric neurons of K spheres each; `output` holds C
/// raw hypersphere vectors of length H + 2, acting on the embedded hidden
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MlgpParams {
    pub hidden: Vec<GeometricNeuron>,
    pub output: Vec<Vec<f64>>,
    pub units: String,
}

impl MlgpParams {
    pub fn k(&self) -> usize {
        self.hidden.first().map_or(0, |n| n.k())
    }

    pub fn h(&self) -> usize {
        self.hidden.len()
    }

    pub fn c(&self) -> usize {
        self.output.len()
    }

    /// Checks internal shape consistency (H >= 1, C >= 2, equal K across
    /// hidden units, output vectors of length H + 2).
    pub fn validate(&self) -> Result<()> {
        if self.h() < 1 {
            return Err(Error::InvalidArgument("H must be >= 1".into()));
        }
        if self.c() < 2 {
            return Err(Error::InvalidArgument("C must be >= 2".into()));
        }
        let k = self.k();
        for n in &self.hidden {
            if n.k() != k {
                return Err(Error::ShapeMismatch {
                    what: "spheres per hidden unit",
                    expected: k,
                    got: n.k(),
                });
            }
        }
        for o in &self.output {
            if o.len() != self.h() + 2 {
                return Err(Error::ShapeMismatch {
                    what: "output sphere components",
                    expected: self.h() + 2,
                    got: o.len(),
                });
            }
        }
        Ok(())
    }
}

/// All intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Raw hidden-layer outputs `h`, invariant under correctly steered input.
    pub hidden_pre: Vec<f64>,
    /// `(h, -1, -||h||^2 / 2)`, the conformal pattern over the hidden vector.
    pub embedded_hidden: Vec<f64>,
    pub logits: Vec<f64>,
}

/// Embeds a real vector with the conformal pattern `(v, -1, -||v||^2 / 2)`.
pub(crate) fn embed_slice(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 2);
    out.extend_from_slice(v);
    out.push(-1.0);
    out.push(-0.5 * v.iter().map(|x| x * x).sum::<f64>());
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// First index of the maximum value; ties break to the lowest index.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// Sum over input points of the embedded point dotted with the unit's raw
/// sphere for that slot. Not permutation invariant: each point has its own
/// sphere.
pub fn geometric_forward(neuron: &GeometricNeuron, cloud: &[Vec3]) -> Result<f64> {
    if cloud.len() != neuron.k() {
        return Err(Error::ShapeMismatch {
            what: "cloud points",
            expected: neuron.k(),
            got: cloud.len(),
        });
    }
    Ok(neuron
        .spheres
        .iter()
        .zip(cloud)
        .map(|(s, &x)| activation(&embed_point(x), s))
        .sum())
}

/// Full forward pass; see [`ForwardTrace`].
pub fn mlgp_forward(params: &MlgpParams, cloud: &[Vec3]) -> Result<ForwardTrace> {
    let hidden_pre: Vec<f64> = params
        .hidden
        .iter()
        .map(|n| geometric_forward(n, cloud))
        .collect::<Result<_>>()?;
    Ok(output_forward(&params.output, hidden_pre))
}

/// The output layer alone, shared verbatim by the steerable model.
pub(crate) fn output_forward(output: &[Vec<f64>], hidden_pre: Vec<f64>) -> ForwardTrace {
    let embedded_hidden = embed_slice(&hidden_pre);
    let logits = output.iter().map(|s| dot(&embedded_hidden, s)).collect();
    ForwardTrace {
        hidden_pre,
        embedded_hidden,
        logits,
    }
}

/// Predicted class index: argmax of the logits, ties to the lowest index.
pub fn predict(params: &MlgpParams, cloud: &[Vec3]) -> Result<usize> {
    Ok(argmax(&mlgp_forward(params, cloud)?.logits))
}
