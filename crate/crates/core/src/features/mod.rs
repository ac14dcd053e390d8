//! Text features: tokenization, TF-IDF bag-of-words vectors and latent topic
//! proportions.

mod tfidf;
mod tokenize;
mod topics;

pub use tfidf::{build_vocabulary, tfidf_vector, SparseVector, Vocabulary};
pub use tokenize::{is_han, tokenize};
pub use topics::{fit_topic_model, infer_topics, TopicDistribution, TopicModel, TopicParams};
