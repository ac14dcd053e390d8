use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Term list with document frequencies, indexed by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Rebuild a vocabulary from stored parts, checking its invariants.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::validation(format!(
                "vocabulary has {} terms but {} document frequencies",
                terms.len(),
                doc_freq.len()
            )));
        }
        if let Some((t, df)) = terms
            .iter()
            .zip(&doc_freq)
            .find(|(_, &df)| df == 0 || df > n_docs)
        {
            return Err(Error::validation(format!(
                "term {t:?} has document frequency {df} outside 1..={n_docs}"
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::validation(format!(
                    "duplicate vocabulary term {t:?}"
                )));
            }
        }
        Ok(Vocabulary {
            terms,
            doc_freq,
            n_docs,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Smoothed inverse document frequency: `ln((1 + n) / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.doc_freq[index] as f64)).ln() + 1.0
    }

    /// Map tokens to term indices, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .filter_map(|t| self.index_of(t.as_ref()))
            .collect()
    }
}

/// Keep terms whose document frequency lies in `[min_df, max_df_ratio * n_docs]`.
/// Terms are sorted lexicographically.
pub fn build_vocabulary<S: AsRef<str>>(
    docs: &[Vec<S>],
    min_df: usize,
    max_df_ratio: f64,
) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::validation(
            "cannot build a vocabulary from zero documents",
        ));
    }
    if min_df < 1 {
        return Err(Error::validation("min_df must be at least 1"));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(Error::validation(format!(
            "max_df_ratio must be in (0, 1], got {max_df_ratio}"
        )));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.iter().map(|t| t.as_ref()).collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let max_df = max_df_ratio * docs.len() as f64;
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, d)| d >= min_df && d as f64 <= max_df)
        .map(|(t, d)| (t.to_string(), d))
        .unzip();
    Vocabulary::from_parts(terms, doc_freq, docs.len())
}

/// Sparse vector with entries sorted by index and no repeated indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Build from arbitrary `(index, weight)` pairs; repeated indices are summed
    /// and zero weights dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, w) in pairs {
            *acc.entry(i).or_insert(0.0) += w;
        }
        SparseVector {
            entries: acc.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn zero() -> Self {
        SparseVector::default()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Scale to unit L2 norm. The zero vector stays zero.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for (_, w) in &mut self.entries {
                *w /= n;
            }
        }
        self
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * dense[i]).sum()
    }

    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    acc += a[i].1 * a[i].1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    acc += b[j].1 * b[j].1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let d = a[i].1 - b[j].1;
                    acc += d * d;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc += a[i..].iter().map(|(_, w)| w * w).sum::<f64>();
        acc += b[j..].iter().map(|(_, w)| w * w).sum::<f64>();
        acc
    }

    pub fn distance(&self, other: &SparseVector) -> f64 {
        self.squared_distance(other).sqrt()
    }
}

/// L2-normalized TF-IDF vector; out-of-vocabulary tokens are ignored.
pub fn tfidf_vector<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVector {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for idx in vocab.encode(tokens) {
        *counts.entry(idx).or_insert(0.0) += 1.0;
    }
    SparseVector::from_pairs(counts.into_iter().map(|(i, c)| (i, c * vocab.idf(i)))).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn docs() -> Vec<Vec<&'static str>> {
        vec![vec!["a", "b"], vec!["a"]]
    }

    #[test]
    fn vocabulary_filters() {
        assert_eq!(
            build_vocabulary(&docs(), 1, 1.0).unwrap().terms(),
            ["a", "b"]
        );
        assert_eq!(build_vocabulary(&docs(), 2, 1.0).unwrap().terms(), ["a"]);
        // df(a) = 2 > 0.5 * 2
        assert_eq!(build_vocabulary(&docs(), 1, 0.5).unwrap().terms(), ["b"]);
        let empty: Vec<Vec<&str>> = vec![];
        assert!(build_vocabulary(&empty, 1, 1.0).is_err());
        assert!(build_vocabulary(&docs(), 0, 1.0).is_err());
        assert!(build_vocabulary(&docs(), 1, 0.0).is_err());
    }

    #[test]
    fn from_parts_rejects_bad_df() {
        assert!(Vocabulary::from_parts(vec!["a".into()], vec![3], 2).is_err());
        assert!(Vocabulary::from_parts(vec!["a".into()], vec![0], 2).is_err());
        assert!(Vocabulary::from_parts(vec!["a".into(), "a".into()], vec![1, 1], 2).is_err());
    }

    #[test]
    fn tfidf_examples() {
        let vocab = Vocabulary::from_parts(vec!["a".into(), "b".into()], vec![1, 2], 2).unwrap();
        let empty: [&str; 0] = [];
        assert!(tfidf_vector(&empty, &vocab).is_zero());

        let one = tfidf_vector(&["b", "zzz"], &vocab);
        assert_eq!(one.entries(), &[(1, 1.0)]);

        // idf(a) = ln(3/2) + 1, idf(b) = ln(3/3) + 1 = 1; normalize.
        let raw_a = (1.5f64).ln() + 1.0;
        let n = (raw_a * raw_a + 1.0).sqrt();
        assert_abs_diff_eq!(raw_a, 1.405465, epsilon = 1e-6);
        let v = tfidf_vector(&["a", "b"], &vocab);
        assert_abs_diff_eq!(v.entries()[0].1, raw_a / n, epsilon = 1e-12);
        assert_abs_diff_eq!(v.entries()[0].1, 0.814802, epsilon = 1e-6);
        assert_abs_diff_eq!(v.entries()[1].1, 1.0 / n, epsilon = 1e-12);
        // 1 / 1.724915
        assert_abs_diff_eq!(v.entries()[1].1, 0.579739, epsilon = 1e-6);
    }

    #[test]
    fn orthonormal_distance() {
        let a = SparseVector::from_pairs([(0, 1.0)]);
        let b = SparseVector::from_pairs([(3, 1.0)]);
        assert_abs_diff_eq!(a.distance(&b), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(a.distance(&a), 0.0);
        assert_abs_diff_eq!(a.distance(&SparseVector::zero()), 1.0);
    }

    fn dense_distance(a: &SparseVector, b: &SparseVector, dim: usize) -> f64 {
        let mut da = vec![0.0; dim];
        let mut db = vec![0.0; dim];
        for &(i, w) in a.entries() {
            da[i] = w;
        }
        for &(i, w) in b.entries() {
            db[i] = w;
        }
        da.iter()
            .zip(&db)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    proptest! {
        #[test]
        fn tfidf_is_scale_free(tokens in prop::collection::vec("[a-e]", 1..30), k in 2usize..5) {
            let vocab = build_vocabulary(
                &[vec!["a", "b", "c"], vec!["a", "d"], vec!["e"]], 1, 1.0).unwrap();
            let v1 = tfidf_vector(&tokens, &vocab);
            let repeated: Vec<String> = tokens.iter().flat_map(|t| std::iter::repeat_n(t.clone(), k)).collect();
            let v2 = tfidf_vector(&repeated, &vocab);
            prop_assert_eq!(v1.nnz(), v2.nnz());
            for (x, y) in v1.entries().iter().zip(v2.entries()) {
                prop_assert_eq!(x.0, y.0);
                prop_assert!((x.1 - y.1).abs() <= 1e-9);
            }
            if !v1.is_zero() {
                prop_assert!((v1.norm() - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn sparse_distance_matches_dense(
            a in prop::collection::vec((0usize..12, -2.0f64..2.0), 0..8),
            b in prop::collection::vec((0usize..12, -2.0f64..2.0), 0..8),
        ) {
            let (a, b) = (SparseVector::from_pairs(a), SparseVector::from_pairs(b));
            prop_assert!((a.distance(&b) - dense_distance(&a, &b, 12)).abs() <= 1e-12);
        }
    }
}
