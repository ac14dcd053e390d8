//! Domain classification: one-vs-rest linear SVMs over two feature spaces,
//! softmax-calibrated and averaged.

mod domain;
mod svm;

pub use domain::{train_domain_classifier, DomainClassifier, TrainConfig};
pub use svm::{
    margins_to_distribution, train_ovr_svm, DomainDistribution, Features, LinearModel, SvmParams,
};
