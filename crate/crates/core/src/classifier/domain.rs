use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{
    margins_to_distribution, train_ovr_svm, DomainDistribution, LinearModel, SvmParams,
};
use crate::corpus::{label_set, NewsArticle};
use crate::error::{Error, Result};
use crate::features::{
    build_vocabulary, fit_topic_model, infer_topics, tfidf_vector, tokenize, SparseVector,
    TopicModel, TopicParams, Vocabulary,
};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub topics: TopicParams,
    pub svm: SvmParams,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            min_df: 2,
            max_df_ratio: 0.5,
            topics: TopicParams::default(),
            svm: SvmParams::default(),
            seed: 42,
        }
    }
}

/// Bag-of-words and topic-feature SVMs sharing one label list, plus the
/// feature artifacts both depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainClassifier {
    pub labels: Vec<String>,
    pub vocab: Vocabulary,
    pub topic_model: TopicModel,
    pub bow_model: LinearModel,
    pub topic_clf: LinearModel,
    pub infer_iters: usize,
    pub infer_seed: u64,
}

impl DomainClassifier {
    pub fn validate(&self) -> Result<()> {
        if self.bow_model.labels != self.labels || self.topic_clf.labels != self.labels {
            return Err(Error::validation("classifier models disagree on labels"));
        }
        if self.bow_model.dim != self.vocab.len() {
            return Err(Error::validation(
                "bag-of-words model dimension does not match the vocabulary",
            ));
        }
        if self.topic_model.n_terms != self.vocab.len() {
            return Err(Error::validation(
                "topic model does not match the vocabulary",
            ));
        }
        if self.topic_clf.dim != self.topic_model.n_topics {
            return Err(Error::validation(
                "topic classifier dimension does not match the topic count",
            ));
        }
        self.bow_model.validate()?;
        self.topic_clf.validate()?;
        self.topic_model.validate()
    }

    pub fn bow_features<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        tfidf_vector(tokens, &self.vocab)
    }

    pub fn topic_features<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        infer_topics(
            tokens,
            &self.vocab,
            &self.topic_model,
            self.infer_iters,
            self.infer_seed,
        )
        .theta
    }

    /// Distributions from the bag-of-words and topic models separately.
    pub fn component_distributions<S: AsRef<str>>(
        &self,
        tokens: &[S],
    ) -> (DomainDistribution, DomainDistribution) {
        let bow = margins_to_distribution(&self.bow_model.margins(&self.bow_features(tokens)))
            .expect("trained model margins are finite");
        let topic = margins_to_distribution(&self.topic_clf.margins(&self.topic_features(tokens)))
            .expect("trained model margins are finite");
        (bow, topic)
    }

    /// Average of the two models' softmax distributions.
    pub fn classify_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> DomainDistribution {
        let (bow, topic) = self.component_distributions(tokens);
        bow.average(&topic)
    }

    pub fn classify_text(&self, text: &str) -> DomainDistribution {
        self.classify_tokens(&tokenize(text))
    }

    pub fn label(&self, dist: &DomainDistribution) -> &str {
        &self.labels[dist.argmax()]
    }
}

/// Train both feature extractors and both SVMs from labeled news.
pub fn train_domain_classifier(
    news: &[NewsArticle],
    cfg: &TrainConfig,
) -> Result<DomainClassifier> {
    let labels = label_set(news);
    if labels.len() < 2 {
        return Err(Error::validation(format!(
            "training needs at least 2 categories, found {}",
            labels.len()
        )));
    }
    let docs: Vec<Vec<String>> = news.par_iter().map(|a| tokenize(&a.text)).collect();
    let vocab = build_vocabulary(&docs, cfg.min_df, cfg.max_df_ratio)?;
    if vocab.is_empty() {
        return Err(Error::validation(
            "vocabulary is empty after document-frequency filtering",
        ));
    }
    info!(
        "vocabulary: {} terms from {} documents",
        vocab.len(),
        docs.len()
    );

    let topic_model = fit_topic_model(
        &docs,
        &vocab,
        &cfg.topics,
        rng::derive_seed(cfg.seed, "topics"),
    )?;
    info!("topic model: {} topics", topic_model.n_topics);

    let infer_seed = rng::derive_seed(cfg.seed, "infer");
    let targets: Vec<String> = news.iter().map(|a| a.category.clone()).collect();
    let bow_x: Vec<SparseVector> = docs.par_iter().map(|d| tfidf_vector(d, &vocab)).collect();
    let topic_x: Vec<Vec<f64>> = docs
        .par_iter()
        .map(|d| infer_topics(d, &vocab, &topic_model, cfg.topics.infer_iters, infer_seed).theta)
        .collect();

    let (bow_model, topic_clf) = rayon::join(
        || {
            train_ovr_svm(
                &bow_x,
                &targets,
                vocab.len(),
                &cfg.svm,
                rng::derive_seed(cfg.seed, "svm-bow"),
            )
        },
        || {
            train_ovr_svm(
                &topic_x,
                &targets,
                topic_model.n_topics,
                &cfg.svm,
                rng::derive_seed(cfg.seed, "svm-topic"),
            )
        },
    );

    Ok(DomainClassifier {
        labels,
        vocab,
        topic_model,
        bow_model: bow_model?,
        topic_clf: topic_clf?,
        infer_iters: cfg.topics.infer_iters,
        infer_seed,
    })
}
