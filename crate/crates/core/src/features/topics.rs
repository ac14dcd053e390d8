//! Latent topic model fitted by collapsed Gibbs sampling.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Vocabulary;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicParams {
    pub n_topics: usize,
    /// Document-topic prior. `None` means `50 / n_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub train_iters: usize,
    pub infer_iters: usize,
}

impl Default for TopicParams {
    fn default() -> Self {
        TopicParams {
            n_topics: 50,
            alpha: None,
            beta: 0.01,
            train_iters: 200,
            infer_iters: 50,
        }
    }
}

impl TopicParams {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.n_topics as f64)
    }
}

/// Fitted topic-word distributions. `phi` is `n_topics x n_terms`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub n_topics: usize,
    pub n_terms: usize,
    pub phi: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub seed: u64,
}

impl TopicModel {
    pub fn phi_row(&self, topic: usize) -> &[f64] {
        &self.phi[topic * self.n_terms..(topic + 1) * self.n_terms]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_topics < 2 {
            return Err(Error::validation("topic model needs at least 2 topics"));
        }
        if self.phi.len() != self.n_topics * self.n_terms {
            return Err(Error::validation(format!(
                "phi has {} entries, expected {} x {}",
                self.phi.len(),
                self.n_topics,
                self.n_terms
            )));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::validation("alpha and beta must be positive"));
        }
        for k in 0..self.n_topics {
            let row = self.phi_row(k);
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::validation(format!(
                    "phi row {k} has invalid entries"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::validation(format!("phi row {k} sums to {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub theta: Vec<f64>,
}

impl TopicDistribution {
    pub fn uniform(k: usize) -> Self {
        TopicDistribution {
            theta: vec![1.0 / k as f64; k],
        }
    }

    pub fn dominant(&self) -> usize {
        argmax(&self.theta)
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Draw an index proportionally to `weights[..]` given their total.
fn sample_index(weights: &[f64], total: f64, rng: &mut rng::Rng) -> usize {
    let mut u = rng.gen::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return k;
        }
    }
    weights.len() - 1
}

/// Fit topic-word distributions with collapsed Gibbs sampling.
///
/// Sweeps visit documents in order and token positions in order within each
/// document. Tokens outside `vocab` are dropped.
pub fn fit_topic_model<S: AsRef<str>>(
    docs: &[Vec<S>],
    vocab: &Vocabulary,
    params: &TopicParams,
    seed: u64,
) -> Result<TopicModel> {
    let k_topics = params.n_topics;
    if k_topics < 2 {
        return Err(Error::validation(format!(
            "topic model needs at least 2 topics, got {k_topics}"
        )));
    }
    if params.train_iters < 1 {
        return Err(Error::validation(
            "topic model needs at least one iteration",
        ));
    }
    let alpha = params.alpha();
    let beta = params.beta;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::validation("alpha and beta must be positive"));
    }
    let n_terms = vocab.len();
    let docs: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(d)).collect();
    if docs.iter().all(|d| d.is_empty()) {
        return Err(Error::validation(
            "no in-vocabulary tokens in any document; cannot fit a topic model",
        ));
    }

    let mut rng = rng::seeded(seed);
    // word-major topic counts: n_wk[w * K + k]
    let mut n_wk = vec![0u32; n_terms * k_topics];
    let mut n_k = vec![0u32; k_topics];
    let mut n_dk = vec![vec![0u32; k_topics]; docs.len()];
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    for (d, doc) in docs.iter().enumerate() {
        let zd: Vec<usize> = doc.iter().map(|_| rng.gen_range(0..k_topics)).collect();
        for (&w, &k) in doc.iter().zip(&zd) {
            n_wk[w * k_topics + k] += 1;
            n_k[k] += 1;
            n_dk[d][k] += 1;
        }
        z.push(zd);
    }

    let v_beta = n_terms as f64 * beta;
    let mut p = vec![0.0; k_topics];
    for _ in 0..params.train_iters {
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                n_wk[w * k_topics + old] -= 1;
                n_k[old] -= 1;
                n_dk[d][old] -= 1;

                let row = &n_wk[w * k_topics..(w + 1) * k_topics];
                let mut total = 0.0;
                for k in 0..k_topics {
                    let pk = (f64::from(n_dk[d][k]) + alpha) * (f64::from(row[k]) + beta)
                        / (f64::from(n_k[k]) + v_beta);
                    p[k] = pk;
                    total += pk;
                }
                let new = sample_index(&p, total, &mut rng);

                z[d][i] = new;
                n_wk[w * k_topics + new] += 1;
                n_k[new] += 1;
                n_dk[d][new] += 1;
            }
        }
    }

    let mut phi = vec![0.0; k_topics * n_terms];
    for k in 0..k_topics {
        let denom = f64::from(n_k[k]) + v_beta;
        for w in 0..n_terms {
            phi[k * n_terms + w] = (f64::from(n_wk[w * k_topics + k]) + beta) / denom;
        }
    }
    Ok(TopicModel {
        n_topics: k_topics,
        n_terms,
        phi,
        alpha,
        beta,
        iters: params.train_iters,
        seed,
    })
}

/// Infer topic proportions for one document by Gibbs sampling with `phi` held
/// fixed.
///
/// The document is treated as a bag of words: in-vocabulary token ids are
/// sorted before sampling, so the result does not depend on token order.
/// Documents with no in-vocabulary tokens get the uniform distribution.
pub fn infer_topics<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    model: &TopicModel,
    iters: usize,
    seed: u64,
) -> TopicDistribution {
    let k_topics = model.n_topics;
    let mut ids = vocab.encode(tokens);
    if ids.is_empty() {
        return TopicDistribution::uniform(k_topics);
    }
    ids.sort_unstable();

    let mut rng = rng::seeded(seed);
    let mut n_k = vec![0u32; k_topics];
    let mut z: Vec<usize> = ids
        .iter()
        .map(|_| {
            let k = rng.gen_range(0..k_topics);
            n_k[k] += 1;
            k
        })
        .collect();

    let mut p = vec![0.0; k_topics];
    for _ in 0..iters {
        for (i, &w) in ids.iter().enumerate() {
            let old = z[i];
            n_k[old] -= 1;
            let mut total = 0.0;
            for k in 0..k_topics {
                let pk = (f64::from(n_k[k]) + model.alpha) * model.phi[k * model.n_terms + w];
                p[k] = pk;
                total += pk;
            }
            let new = sample_index(&p, total, &mut rng);
            z[i] = new;
            n_k[new] += 1;
        }
    }

    let denom = ids.len() as f64 + k_topics as f64 * model.alpha;
    TopicDistribution {
        theta: n_k
            .iter()
            .map(|&c| (f64::from(c) + model.alpha) / denom)
            .collect(),
    }
}
