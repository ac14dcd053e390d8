//! JSON persistence for the vocabulary, topic model and classifier.
//!
//! A model directory holds three documents, each carrying a
//! `format_version`:
//!
//! - `vocabulary.json`: terms, document frequencies, document count
//! - `topic_model.json`: hyperparameters and the row-major `phi` matrix
//! - `classifier.json`: both linear models plus the file names of the two
//!   feature artifacts

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classifier::{DomainClassifier, LinearModel};
use crate::error::{Error, Result};
use crate::features::{TopicModel, Vocabulary};

pub const FORMAT_VERSION: u32 = 1;
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const TOPIC_MODEL_FILE: &str = "topic_model.json";
pub const CLASSIFIER_FILE: &str = "classifier.json";

#[derive(Debug, Serialize, Deserialize)]
struct VocabularyDoc {
    format_version: u32,
    n_docs: usize,
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TopicModelDoc {
    format_version: u32,
    n_topics: usize,
    n_terms: usize,
    alpha: f64,
    beta: f64,
    iters: usize,
    seed: u64,
    phi: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifierDoc {
    format_version: u32,
    labels: Vec<String>,
    vocabulary: String,
    topic_model: String,
    infer_iters: usize,
    infer_seed: u64,
    bow_model: LinearModel,
    topic_model_clf: LinearModel,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn check_version(path: &Path, found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::validation(format!(
            "{}: unsupported format_version {found} (expected {FORMAT_VERSION})",
            path.display()
        )));
    }
    Ok(())
}

pub fn save_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    write_json(
        path,
        &VocabularyDoc {
            format_version: FORMAT_VERSION,
            n_docs: vocab.n_docs(),
            terms: vocab.terms().to_vec(),
            doc_freq: vocab.doc_freq().to_vec(),
        },
    )
}

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    let doc: VocabularyDoc = read_json(path)?;
    check_version(path, doc.format_version)?;
    Vocabulary::from_parts(doc.terms, doc.doc_freq, doc.n_docs)
}

pub fn save_topic_model(path: &Path, model: &TopicModel) -> Result<()> {
    write_json(
        path,
        &TopicModelDoc {
            format_version: FORMAT_VERSION,
            n_topics: model.n_topics,
            n_terms: model.n_terms,
            alpha: model.alpha,
            beta: model.beta,
            iters: model.iters,
            seed: model.seed,
            phi: model.phi.clone(),
        },
    )
}

pub fn load_topic_model(path: &Path) -> Result<TopicModel> {
    let doc: TopicModelDoc = read_json(path)?;
    check_version(path, doc.format_version)?;
    let model = TopicModel {
        n_topics: doc.n_topics,
        n_terms: doc.n_terms,
        phi: doc.phi,
        alpha: doc.alpha,
        beta: doc.beta,
        iters: doc.iters,
        seed: doc.seed,
    };
    model.validate()?;
    Ok(model)
}

/// Write all three artifacts into `dir`, creating it if needed.
pub fn save_classifier(dir: &Path, clf: &DomainClassifier) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_vocabulary(&dir.join(VOCABULARY_FILE), &clf.vocab)?;
    save_topic_model(&dir.join(TOPIC_MODEL_FILE), &clf.topic_model)?;
    write_json(
        &dir.join(CLASSIFIER_FILE),
        &ClassifierDoc {
            format_version: FORMAT_VERSION,
            labels: clf.labels.clone(),
            vocabulary: VOCABULARY_FILE.to_string(),
            topic_model: TOPIC_MODEL_FILE.to_string(),
            infer_iters: clf.infer_iters,
            infer_seed: clf.infer_seed,
            bow_model: clf.bow_model.clone(),
            topic_model_clf: clf.topic_clf.clone(),
        },
    )
}

pub fn load_classifier(dir: &Path) -> Result<DomainClassifier> {
    let path = dir.join(CLASSIFIER_FILE);
    let doc: ClassifierDoc = read_json(&path)?;
    check_version(&path, doc.format_version)?;
    let clf = DomainClassifier {
        labels: doc.labels,
        vocab: load_vocabulary(&dir.join(&doc.vocabulary))?,
        topic_model: load_topic_model(&dir.join(&doc.topic_model))?,
        bow_model: doc.bow_model,
        topic_clf: doc.topic_model_clf,
        infer_iters: doc.infer_iters,
        infer_seed: doc.infer_seed,
    };
    clf.validate()?;
    Ok(clf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_vocabulary;

    #[test]
    fn vocabulary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.json");
        let v = build_vocabulary(&[vec!["a", "b"], vec!["b", "c"]], 1, 1.0).unwrap();
        save_vocabulary(&p, &v).unwrap();
        assert_eq!(load_vocabulary(&p).unwrap(), v);
    }

    #[test]
    fn rejects_unknown_version() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.json");
        fs::write(
            &p,
            r#"{"format_version":99,"n_docs":1,"terms":[],"doc_freq":[]}"#,
        )
        .unwrap();
        assert!(matches!(load_vocabulary(&p), Err(Error::Validation(_))));
    }

    #[test]
    fn missing_model_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_classifier(dir.path()), Err(Error::Io { .. })));
    }
}
