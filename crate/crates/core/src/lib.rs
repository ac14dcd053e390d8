//! Hashtag domain classification and domain-sensitive popularity ranking.
//!
//! The pipeline trains two linear classifiers on a labeled news corpus (one
//! over TF-IDF bag-of-words vectors, one over latent topic proportions) and
//! averages their probabilities. Each hashtag's posts are filtered by
//! threshold clustering so only the dominant cluster is classified, and
//! hashtags are ranked within their domain by an exponentially decayed
//! post count weighted by the domain probability.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod persist;
pub mod pipeline;
pub mod ranking;
pub mod rng;
pub mod semantic;
pub mod synth;

pub use classifier::{DomainClassifier, DomainDistribution, LinearModel};
pub use corpus::{HashtagGroup, HashtagStyle, Microblog, NewsArticle};
pub use error::{Error, Result};
pub use features::{SparseVector, TopicDistribution, TopicModel, Vocabulary};
pub use ranking::{DecayParams, RankedHashtag};
pub use semantic::{ClassifiedHashtag, ClusterResult};
