use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::rng;

/// A feature vector the SVM trainer can consume.
pub trait Features {
    fn dot(&self, w: &[f64]) -> f64;
    /// `w += scale * self`
    fn add_scaled_to(&self, scale: f64, w: &mut [f64]);
    fn squared_norm(&self) -> f64;
    /// One past the largest index this vector touches.
    fn min_dim(&self) -> usize;
}

impl Features for SparseVector {
    fn dot(&self, w: &[f64]) -> f64 {
        self.dot_dense(w)
    }

    fn add_scaled_to(&self, scale: f64, w: &mut [f64]) {
        for &(i, x) in self.entries() {
            w[i] += scale * x;
        }
    }

    fn squared_norm(&self) -> f64 {
        self.entries().iter().map(|(_, x)| x * x).sum()
    }

    fn min_dim(&self) -> usize {
        self.entries().last().map_or(0, |&(i, _)| i + 1)
    }
}

impl Features for Vec<f64> {
    fn dot(&self, w: &[f64]) -> f64 {
        self.iter().zip(w).map(|(x, y)| x * y).sum()
    }

    fn add_scaled_to(&self, scale: f64, w: &mut [f64]) {
        for (wi, x) in w.iter_mut().zip(self) {
            *wi += scale * x;
        }
    }

    fn squared_norm(&self) -> f64 {
        self.iter().map(|x| x * x).sum()
    }

    fn min_dim(&self) -> usize {
        self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-4,
            epochs: 20,
        }
    }
}

/// One linear scorer per label: `margin(c, x) = w_c . x + b_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub labels: Vec<String>,
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl LinearModel {
    pub fn margins<F: Features + ?Sized>(&self, x: &F) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.dot(w) + b)
            .collect()
    }

    /// Label with the largest margin; ties go to the earlier label.
    pub fn predict<F: Features + ?Sized>(&self, x: &F) -> &str {
        &self.labels[first_argmax(&self.margins(x))]
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.labels.len() || self.bias.len() != self.labels.len() {
            return Err(Error::validation(
                "linear model has mismatched label/weight rows",
            ));
        }
        if self.weights.iter().any(|w| w.len() != self.dim) {
            return Err(Error::validation(
                "linear model weight row has wrong dimension",
            ));
        }
        let finite = self
            .weights
            .iter()
            .flatten()
            .chain(&self.bias)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::validation("linear model has non-finite weights"));
        }
        Ok(())
    }
}

pub(crate) fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Train one binary hinge-loss SVM per label with Pegasos SGD.
///
/// Step size is `1 / (lambda * t)`; the bias is treated as a weight on a
/// constant feature and regularized with the rest. Each epoch visits the
/// samples in a fresh shuffle drawn from a per-label stream of `seed`, so the
/// result is reproducible. Labels are sorted lexicographically.
pub fn train_ovr_svm<F: Features + Sync>(
    vectors: &[F],
    labels: &[String],
    dim: usize,
    params: &SvmParams,
    seed: u64,
) -> Result<LinearModel> {
    if vectors.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(Error::validation(format!(
            "lambda must be positive, got {}",
            params.lambda
        )));
    }
    if params.epochs < 1 {
        return Err(Error::validation("epochs must be at least 1"));
    }
    let classes: Vec<String> = labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::validation(format!(
            "need at least 2 distinct labels, got {}",
            classes.len()
        )));
    }
    if let Some(v) = vectors.iter().find(|v| v.min_dim() > dim) {
        return Err(Error::validation(format!(
            "feature vector needs dimension {} but model has {dim}",
            v.min_dim()
        )));
    }

    let mut weights = Vec::with_capacity(classes.len());
    let mut bias = Vec::with_capacity(classes.len());
    for class in &classes {
        let targets: Vec<f64> = labels
            .iter()
            .map(|l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = pegasos(
            vectors,
            &targets,
            dim,
            params,
            rng::derive_seed(seed, class),
        );
        weights.push(w);
        bias.push(b);
    }
    Ok(LinearModel {
        labels: classes,
        dim,
        weights,
        bias,
        lambda: params.lambda,
        epochs: params.epochs,
        seed,
    })
}

/// Binary Pegasos with projection. The weight vector is kept as `scale * v`
/// so the `(1 - 1/t)` shrink is O(1) per step.
fn pegasos<F: Features>(
    xs: &[F],
    ys: &[f64],
    dim: usize,
    params: &SvmParams,
    seed: u64,
) -> (Vec<f64>, f64) {
    let lambda = params.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut v = vec![0.0; dim];
    let mut vb = 0.0;
    let mut scale = 1.0;
    // ||v||^2 + vb^2
    let mut sq = 0.0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = rng::seeded(seed);
    let mut t = 0u64;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let (x, y) = (&xs[i], ys[i]);
            let vx = x.dot(&v) + vb;
            let margin = scale * vx;

            scale *= 1.0 - eta * lambda;
            if scale == 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                vb = 0.0;
                sq = 0.0;
                scale = 1.0;
            }
            if y * margin < 1.0 {
                let c = eta * y / scale;
                // vx is stale if v was just reset, so recompute.
                let vx = x.dot(&v) + vb;
                sq += 2.0 * c * vx + c * c * (x.squared_norm() + 1.0);
                x.add_scaled_to(c, &mut v);
                vb += c;
            }
            let norm = scale * sq.max(0.0).sqrt();
            if norm > radius {
                scale *= radius / norm;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                vb *= scale;
                sq *= scale * scale;
                scale = 1.0;
            }
        }
    }
    v.iter_mut().for_each(|w| *w *= scale);
    (v, vb * scale)
}

/// Probability vector over domains, aligned with a classifier's labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDistribution {
    pub probs: Vec<f64>,
}

impl DomainDistribution {
    /// Index of the largest probability; ties go to the lower index, which is
    /// the lexicographically smaller label.
    pub fn argmax(&self) -> usize {
        first_argmax(&self.probs)
    }

    pub fn max(&self) -> f64 {
        self.probs[self.argmax()]
    }

    /// Element-wise mean of two distributions over the same labels.
    pub fn average(&self, other: &DomainDistribution) -> DomainDistribution {
        DomainDistribution {
            probs: self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| 0.5 * a + 0.5 * b)
                .collect(),
        }
    }
}

/// Softmax with max-subtraction.
pub fn margins_to_distribution(margins: &[f64]) -> Result<DomainDistribution> {
    if margins.is_empty() {
        return Err(Error::validation("cannot normalize an empty margin vector"));
    }
    if let Some(m) = margins.iter().find(|m| !m.is_finite()) {
        return Err(Error::validation(format!("non-finite margin {m}")));
    }
    let max = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = margins.iter().map(|m| (m - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(DomainDistribution {
        probs: exps.into_iter().map(|e| e / total).collect(),
    })
}
