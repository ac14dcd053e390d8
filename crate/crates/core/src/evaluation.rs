//! Classification precision, NDCG@k over graded annotations, and Fleiss'
//! kappa for annotator agreement.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::read_jsonl;
use crate::error::{Error, Result};

pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 5;

/// Fraction of positions where `predicted[i] == gold[i]`.
pub fn precision<S: AsRef<str>, T: AsRef<str>>(predicted: &[S], gold: &[T]) -> Result<f64> {
    if predicted.len() != gold.len() {
        return Err(Error::validation(format!(
            "precision: {} predictions but {} gold labels",
            predicted.len(),
            gold.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::validation("precision of an empty set"));
    }
    let hits = predicted
        .iter()
        .zip(gold)
        .filter(|(p, g)| p.as_ref() == g.as_ref())
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// `sum_{i < k} (2^rel_i - 1) / log2(i + 2)` over 0-based positions.
pub fn dcg_at_k(relevances: &[f64], k: usize) -> f64 {
    relevances
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &rel)| (2f64.powf(rel) - 1.0) / (i as f64 + 2.0).log2())
        .sum()
}

/// NDCG@k with exponential gain. `ideal` is re-sorted descending here; an
/// all-zero ideal ranking scores 1.0.
pub fn ndcg_at_k(ranked: &[f64], ideal: &[f64], k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::validation("ndcg cutoff k must be at least 1"));
    }
    if let Some(r) = ranked
        .iter()
        .chain(ideal)
        .find(|r| !(r.is_finite() && **r >= 0.0))
    {
        return Err(Error::validation(format!("invalid relevance {r}")));
    }
    let mut sorted = ideal.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg_at_k(&sorted, k);
    if idcg == 0.0 {
        return Ok(1.0);
    }
    Ok(dcg_at_k(ranked, k) / idcg)
}

/// Fleiss' kappa from an items x categories matrix of rater counts.
pub fn fleiss_kappa(ratings: &[Vec<u32>]) -> Result<f64> {
    let Some(first) = ratings.first() else {
        return Err(Error::validation("fleiss kappa of zero items"));
    };
    let n_cat = first.len();
    let raters: u64 = first.iter().map(|&c| u64::from(c)).sum();
    if raters < 2 {
        return Err(Error::validation(format!(
            "fleiss kappa needs at least 2 raters per item, got {raters}"
        )));
    }
    for (i, row) in ratings.iter().enumerate() {
        if row.len() != n_cat {
            return Err(Error::validation(format!(
                "item {i} has {} categories, expected {n_cat}",
                row.len()
            )));
        }
        let s: u64 = row.iter().map(|&c| u64::from(c)).sum();
        if s != raters {
            return Err(Error::validation(format!(
                "item {i} has {s} ratings, expected {raters}"
            )));
        }
    }

    let n_items = ratings.len() as f64;
    let r = raters as f64;
    let sum_sq: u64 = ratings
        .iter()
        .flatten()
        .map(|&c| u64::from(c) * u64::from(c))
        .sum();
    if sum_sq == ratings.len() as u64 * raters * raters {
        // every item unanimous
        return Ok(1.0);
    }
    let p_bar = (sum_sq as f64 - n_items * r) / (n_items * r * (r - 1.0));
    let p_e: f64 = (0..n_cat)
        .map(|j| {
            let col: u64 = ratings.iter().map(|row| u64::from(row[j])).sum();
            let pj = col as f64 / (n_items * r);
            pj * pj
        })
        .sum();
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Strict majority label (more than half the votes), if any.
pub fn majority_domain<S: AsRef<str>>(votes: &[S]) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in votes {
        *counts.entry(v.as_ref()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .find(|&(_, c)| 2 * c > votes.len())
        .map(|(d, _)| d.to_string())
}

/// Annotator score 1..=5 as NDCG relevance 0..=4.
pub fn score_to_relevance(score: u8) -> f64 {
    f64::from(score) - f64::from(MIN_SCORE)
}

/// One annotated hashtag. Either `gold_domain` or per-annotator `domains`
/// must be present; when `domains` is given the gold label is its strict
/// majority.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<Vec<String>>,
    pub scores: Vec<u8>,
}

impl Annotation {
    pub fn gold(&self) -> Option<String> {
        match (&self.gold_domain, &self.domains) {
            (Some(g), _) => Some(g.clone()),
            (None, Some(votes)) => majority_domain(votes),
            (None, None) => None,
        }
    }

    pub fn mean_relevance(&self) -> f64 {
        let total: f64 = self.scores.iter().map(|&s| score_to_relevance(s)).sum();
        total / self.scores.len() as f64
    }
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let path = path.as_ref();
    let records: Vec<Annotation> = read_jsonl(path)?;
    validate_annotations(&records).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(records)
}

pub fn validate_annotations(records: &[Annotation]) -> Result<()> {
    let mut tags = HashSet::new();
    let mut annotators = None;
    for (i, a) in records.iter().enumerate() {
        let rec = i + 1;
        if !tags.insert(a.tag.as_str()) {
            return Err(Error::validation(format!(
                "record {rec}: duplicate tag {:?}",
                a.tag
            )));
        }
        if a.gold_domain.is_none() && a.domains.is_none() {
            return Err(Error::validation(format!(
                "record {rec}: needs gold_domain or domains"
            )));
        }
        if a.scores.is_empty() {
            return Err(Error::validation(format!("record {rec}: no scores")));
        }
        if let Some(s) = a
            .scores
            .iter()
            .find(|s| !(MIN_SCORE..=MAX_SCORE).contains(*s))
        {
            return Err(Error::validation(format!(
                "record {rec}: score {s} outside {MIN_SCORE}..={MAX_SCORE}"
            )));
        }
        match annotators {
            None => annotators = Some(a.scores.len()),
            Some(n) if n != a.scores.len() => {
                return Err(Error::validation(format!(
                    "record {rec}: {} scores but earlier records have {n}",
                    a.scores.len()
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Items x 5 matrix counting how many annotators gave each score.
pub fn score_ratings(annotations: &[&Annotation]) -> Vec<Vec<u32>> {
    annotations
        .iter()
        .map(|a| {
            let mut row = vec![0u32; usize::from(MAX_SCORE - MIN_SCORE + 1)];
            for &s in &a.scores {
                row[usize::from(s - MIN_SCORE)] += 1;
            }
            row
        })
        .collect()
}

/// The model's output for one hashtag, as read back from a rank run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub tag: String,
    pub domain: String,
    pub hot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub precision: f64,
    pub k: usize,
    pub ndcg_at_k: BTreeMap<String, f64>,
    /// Mean of the per-domain NDCG values.
    pub mean_ndcg: Option<f64>,
    /// Fleiss' kappa over annotator hot-value scores; absent with one annotator.
    pub kappa: Option<f64>,
    pub n_annotated: usize,
    /// Annotated hashtags without a majority domain.
    pub n_excluded: usize,
    /// Annotated hashtags the model never saw.
    pub n_unmatched: usize,
    pub n_evaluated: usize,
    pub n_correct: usize,
}

/// Score predictions against annotations.
///
/// Precision covers every annotated hashtag with a gold domain that the model
/// classified. NDCG is computed per domain over the correctly classified
/// hashtags, ordered by predicted hot value, with mean annotator relevance as
/// the gain.
pub fn evaluate(
    predictions: &[Prediction],
    annotations: &[Annotation],
    k: usize,
) -> Result<MetricReport> {
    if k < 1 {
        return Err(Error::validation("ndcg cutoff k must be at least 1"));
    }
    validate_annotations(annotations)?;
    let by_tag: HashMap<&str, &Prediction> =
        predictions.iter().map(|p| (p.tag.as_str(), p)).collect();

    let mut n_excluded = 0;
    let mut n_unmatched = 0;
    let mut evaluated: Vec<(&Annotation, String, &Prediction)> = Vec::new();
    for a in annotations {
        let Some(gold) = a.gold() else {
            n_excluded += 1;
            continue;
        };
        match by_tag.get(a.tag.as_str()) {
            Some(p) => evaluated.push((a, gold, p)),
            None => n_unmatched += 1,
        }
    }
    if evaluated.is_empty() {
        return Err(Error::validation(
            "no annotated hashtag matches a prediction; nothing to evaluate",
        ));
    }

    let predicted: Vec<&str> = evaluated
        .iter()
        .map(|(_, _, p)| p.domain.as_str())
        .collect();
    let gold: Vec<&str> = evaluated.iter().map(|(_, g, _)| g.as_str()).collect();
    let prec = precision(&predicted, &gold)?;

    let mut per_domain: BTreeMap<String, Vec<(&Prediction, f64)>> = BTreeMap::new();
    for (a, g, p) in &evaluated {
        if &p.domain == g {
            per_domain
                .entry(g.clone())
                .or_default()
                .push((p, a.mean_relevance()));
        }
    }
    let mut ndcg = BTreeMap::new();
    for (domain, mut items) in per_domain {
        items.sort_by(|(a, _), (b, _)| b.hot.total_cmp(&a.hot).then_with(|| a.tag.cmp(&b.tag)));
        let rels: Vec<f64> = items.iter().map(|(_, r)| *r).collect();
        ndcg.insert(domain, ndcg_at_k(&rels, &rels, k)?);
    }
    let mean_ndcg = if ndcg.is_empty() {
        None
    } else {
        Some(ndcg.values().sum::<f64>() / ndcg.len() as f64)
    };

    let rated: Vec<&Annotation> = evaluated.iter().map(|(a, _, _)| *a).collect();
    let kappa = if rated[0].scores.len() >= 2 {
        Some(fleiss_kappa(&score_ratings(&rated))?)
    } else {
        None
    };

    Ok(MetricReport {
        precision: prec,
        k,
        ndcg_at_k: ndcg,
        mean_ndcg,
        kappa,
        n_annotated: annotations.len(),
        n_excluded,
        n_unmatched,
        n_evaluated: evaluated.len(),
        n_correct: predicted.iter().zip(&gold).filter(|(p, g)| p == g).count(),
    })
}

/// Aligned plain-text rendering of a report.
pub fn format_report(report: &MetricReport) -> String {
    let mut out = String::new();
    let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    out.push_str(&format!("{:<24}{:.6}\n", "precision", report.precision));
    out.push_str(&format!(
        "{:<24}{}\n",
        format!("mean ndcg@{}", report.k),
        opt(report.mean_ndcg)
    ));
    out.push_str(&format!("{:<24}{}\n", "fleiss kappa", opt(report.kappa)));
    out.push_str(&format!(
        "{:<24}{} of {} ({} excluded, {} unmatched)\n",
        "evaluated", report.n_evaluated, report.n_annotated, report.n_excluded, report.n_unmatched
    ));
    let width = report
        .ndcg_at_k
        .keys()
        .map(|d| d.chars().count())
        .max()
        .unwrap_or(6)
        .max(6);
    out.push_str(&format!("\n{:<width$}  ndcg@{}\n", "domain", report.k));
    for (d, v) in &report.ndcg_at_k {
        out.push_str(&format!("{d:<width$}  {v:.6}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn precision_examples() {
        let a = ["x", "y", "z"];
        assert_eq!(precision(&a, &a).unwrap(), 1.0);
        let pred: Vec<&str> = (0..10).map(|i| if i == 3 { "b" } else { "a" }).collect();
        assert_abs_diff_eq!(precision(&pred, &["a"; 10]).unwrap(), 0.9);
        assert_eq!(precision(&["a", "b"], &["c", "d"]).unwrap(), 0.0);
        assert!(precision(&["a"], &["a", "b"]).is_err());
        let empty: [&str; 0] = [];
        assert!(precision(&empty, &empty).is_err());
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(
            ndcg_at_k(&[3.0, 2.0, 0.0], &[3.0, 2.0, 0.0], 10).unwrap(),
            1.0
        );
        // DCG = 1/log2(2) + 0 + 1/log2(4) = 1.5; IDCG = 1 + 1/log2(3)
        let idcg = 1.0 + 1.0 / 3f64.log2();
        assert_abs_diff_eq!(idcg, 1.630930, epsilon = 1e-6);
        let v = ndcg_at_k(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], 3).unwrap();
        assert_abs_diff_eq!(v, 1.5 / idcg, epsilon = 1e-12);
        // 1.5 / 1.630930
        assert_abs_diff_eq!(v, 0.919721, epsilon = 1e-6);
        assert_eq!(ndcg_at_k(&[0.0, 0.0], &[0.0, 0.0], 5).unwrap(), 1.0);
        assert!(ndcg_at_k(&[-1.0], &[1.0], 1).is_err());
        assert!(ndcg_at_k(&[1.0], &[1.0], 0).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(fleiss_kappa(&[vec![3, 0, 0], vec![0, 0, 3]]).unwrap(), 1.0);
        assert_eq!(fleiss_kappa(&[vec![2, 0], vec![0, 2]]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            fleiss_kappa(&[vec![1, 1], vec![1, 1]]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert!(fleiss_kappa(&[vec![2, 0], vec![1, 0]]).is_err());
        assert!(fleiss_kappa(&[vec![1, 0]]).is_err());
        assert!(fleiss_kappa(&[]).is_err());
    }

    /// Fleiss' original worked example (10 items, 14 raters, 5 categories).
    #[test]
    fn kappa_reference_table() {
        let table = vec![
            vec![0, 0, 0, 0, 14],
            vec![0, 2, 6, 4, 2],
            vec![0, 0, 3, 5, 6],
            vec![0, 3, 9, 2, 0],
            vec![2, 2, 8, 1, 1],
            vec![7, 7, 0, 0, 0],
            vec![3, 2, 6, 3, 0],
            vec![2, 5, 3, 2, 2],
            vec![6, 5, 2, 1, 0],
            vec![0, 2, 2, 3, 7],
        ];
        assert_abs_diff_eq!(fleiss_kappa(&table).unwrap(), 0.20993, epsilon = 1e-5);
    }

    #[test]
    fn majority() {
        assert_eq!(majority_domain(&["a", "a", "b"]), Some("a".into()));
        assert_eq!(majority_domain(&["a", "b", "c"]), None);
        assert_eq!(majority_domain(&["a", "b"]), None);
    }

    fn ann(tag: &str, gold: &str, scores: Vec<u8>) -> Annotation {
        Annotation {
            tag: tag.into(),
            gold_domain: Some(gold.into()),
            domains: None,
            scores,
        }
    }

    fn pred(tag: &str, domain: &str, hot: f64) -> Prediction {
        Prediction {
            tag: tag.into(),
            domain: domain.into(),
            hot,
        }
    }

    #[test]
    fn evaluate_perfect() {
        let anns = vec![
            ann("a", "x", vec![5, 5, 5]),
            ann("b", "x", vec![3, 3, 3]),
            ann("c", "y", vec![2, 2, 2]),
        ];
        let preds = vec![
            pred("a", "x", 9.0),
            pred("b", "x", 2.0),
            pred("c", "y", 1.0),
        ];
        let r = evaluate(&preds, &anns, 10).unwrap();
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.ndcg_at_k["x"], 1.0);
        assert_eq!(r.mean_ndcg, Some(1.0));
        assert_eq!(r.kappa, Some(1.0));
        assert!(format_report(&r).contains("precision"));
    }

    #[test]
    fn evaluate_excludes_and_misses() {
        let mut split = ann("s", "x", vec![1, 2, 3]);
        split.gold_domain = None;
        split.domains = Some(vec!["x".into(), "y".into(), "z".into()]);
        let anns = vec![
            ann("a", "x", vec![5, 4, 5]),
            ann("b", "x", vec![1, 1, 2]),
            split,
            ann("gone", "x", vec![1, 1, 1]),
        ];
        let preds = vec![
            pred("a", "x", 1.0),
            pred("b", "x", 5.0),
            pred("s", "x", 3.0),
        ];
        let r = evaluate(&preds, &anns, 10).unwrap();
        assert_eq!((r.n_excluded, r.n_unmatched, r.n_evaluated), (1, 1, 2));
        assert!(r.ndcg_at_k["x"] < 1.0);
        assert!(evaluate(&[], &anns, 10).is_err());
    }

    #[test]
    fn annotation_validation() {
        assert!(validate_annotations(&[ann("a", "x", vec![0])]).is_err());
        assert!(validate_annotations(&[ann("a", "x", vec![6])]).is_err());
        assert!(
            validate_annotations(&[ann("a", "x", vec![1, 2]), ann("b", "x", vec![1])]).is_err()
        );
        assert!(validate_annotations(&[ann("a", "x", vec![1]), ann("a", "x", vec![1])]).is_err());
        let mut none = ann("a", "x", vec![1]);
        none.gold_domain = None;
        assert!(validate_annotations(&[none]).is_err());
    }

    proptest! {
        #[test]
        fn precision_ignores_relabeling(pairs in prop::collection::vec((0u8..4, 0u8..4), 1..30)) {
            let names = ["a", "b", "c", "d"];
            let renamed = ["w", "x", "y", "z"];
            let p: Vec<&str> = pairs.iter().map(|(x, _)| names[*x as usize]).collect();
            let g: Vec<&str> = pairs.iter().map(|(_, y)| names[*y as usize]).collect();
            let p2: Vec<&str> = pairs.iter().map(|(x, _)| renamed[*x as usize]).collect();
            let g2: Vec<&str> = pairs.iter().map(|(_, y)| renamed[*y as usize]).collect();
            prop_assert_eq!(precision(&p, &g).unwrap(), precision(&p2, &g2).unwrap());
        }

        #[test]
        fn kappa_is_one_iff_unanimous(rows in prop::collection::vec(prop::collection::vec(0u32..4, 3), 1..10)) {
            let r = 3u32;
            // rescale each row to exactly r raters by piling the remainder onto category 0
            let rows: Vec<Vec<u32>> = rows.into_iter().map(|mut row| {
                let mut s: u32 = row.iter().sum();
                while s > r {
                    let j = row.iter().position(|&c| c > 0).unwrap();
                    row[j] -= 1;
                    s -= 1;
                }
                row[0] += r - s;
                row
            }).collect();
            let unanimous = rows.iter().all(|row| row.contains(&r));
            let k = fleiss_kappa(&rows).unwrap();
            prop_assert_eq!(k == 1.0, unanimous);
            prop_assert!((-1.0 - 1e-12..=1.0).contains(&k));
        }
    }
}
