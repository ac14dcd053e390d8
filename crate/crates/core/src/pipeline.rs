//! End-to-end hashtag ranking over a loaded microblog stream, and the output
//! files it produces.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::DomainClassifier;
use crate::corpus::{group_by_hashtag, write_jsonl, HashtagGroup, Microblog};
use crate::error::{Error, Result};
use crate::ranking::{rank_domains, rank_hashtag, DecayParams, RankedHashtag};
use crate::semantic::{classify_hashtag, ClassifiedHashtag, ClusterDiagnostic, SemanticOptions};

pub const RANKINGS_FILE: &str = "rankings.jsonl";
pub const RANKINGS_DIR: &str = "rankings";
pub const CLASSIFICATIONS_FILE: &str = "classifications.jsonl";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";
pub const TABLE_FILE: &str = "rankings.txt";

#[derive(Debug, Clone)]
pub struct RankOptions {
    pub gamma_seconds: f64,
    /// Defaults to the latest post time.
    pub t_p: Option<i64>,
    pub top_k: usize,
    pub min_posts: usize,
    pub semantic: SemanticOptions,
    /// `None` = rayon's default pool size.
    pub workers: Option<usize>,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            gamma_seconds: crate::ranking::DEFAULT_GAMMA_SECONDS,
            t_p: None,
            top_k: 10,
            min_posts: 1,
            semantic: SemanticOptions::default(),
            workers: None,
        }
    }
}

/// One line of `rankings.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub domain: String,
    pub rank: usize,
    pub tag: String,
    pub hot: f64,
    pub p: f64,
    pub n_posts: usize,
}

/// One line of `classifications.jsonl`: every hashtag, ranked or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub tag: String,
    pub domain: String,
    pub p: f64,
    pub hot: f64,
    pub n_posts: usize,
    pub n_semantic: usize,
    /// Domain probabilities in label order.
    pub probs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RankRun {
    pub t_p: i64,
    pub labels: Vec<String>,
    pub classified: Vec<(HashtagGroup, ClassifiedHashtag)>,
    pub hashtags: Vec<RankedHashtag>,
    pub rankings: BTreeMap<String, Vec<RankedHashtag>>,
    pub diagnostics: Vec<ClusterDiagnostic>,
}

/// Reject posts stamped after the reference time.
pub fn check_no_future_posts(posts: &[Microblog], t_p: i64) -> Result<()> {
    match posts.iter().find(|p| p.timestamp > t_p) {
        Some(p) => Err(Error::Consistency(format!(
            "post {:?} at {} is after the reference time {t_p}",
            p.id, p.timestamp
        ))),
        None => Ok(()),
    }
}

/// Group, filter, classify and rank.
pub fn rank_posts(
    posts: &[Microblog],
    clf: &DomainClassifier,
    opts: &RankOptions,
) -> Result<RankRun> {
    if opts.top_k < 1 {
        return Err(Error::validation("top_k must be at least 1"));
    }
    let t_p = opts
        .t_p
        .or_else(|| DecayParams::latest_post_time(posts))
        .unwrap_or(0);
    let params = DecayParams::new(opts.gamma_seconds, t_p)?;
    check_no_future_posts(posts, t_p)?;

    let groups: Vec<HashtagGroup> = group_by_hashtag(posts)
        .into_iter()
        .filter(|g| g.len() >= opts.min_posts.max(1))
        .collect();
    info!("classifying {} hashtags", groups.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::validation(format!("worker pool: {e}")))?;
    let results: Vec<(ClassifiedHashtag, ClusterDiagnostic)> = pool.install(|| {
        groups
            .par_iter()
            .map(|g| classify_hashtag(g, clf, &opts.semantic))
            .collect()
    });

    let mut classified = Vec::with_capacity(groups.len());
    let mut diagnostics = Vec::with_capacity(groups.len());
    for (g, (c, d)) in groups.into_iter().zip(results) {
        classified.push((g, c));
        diagnostics.push(d);
    }
    let hashtags = classified
        .iter()
        .map(|(g, c)| rank_hashtag(g, c, &params))
        .collect::<Result<Vec<_>>>()?;
    let rankings = rank_domains(hashtags.iter().cloned(), &clf.labels, opts.top_k)?;
    Ok(RankRun {
        t_p,
        labels: clf.labels.clone(),
        classified,
        hashtags,
        rankings,
        diagnostics,
    })
}

impl RankRun {
    pub fn ranking_records(&self) -> Vec<RankingRecord> {
        self.rankings
            .iter()
            .flat_map(|(domain, list)| {
                list.iter().enumerate().map(move |(i, r)| RankingRecord {
                    domain: domain.clone(),
                    rank: i + 1,
                    tag: r.tag.clone(),
                    hot: r.hot,
                    p: r.p,
                    n_posts: r.n_posts,
                })
            })
            .collect()
    }

    pub fn classification_records(&self) -> Vec<ClassificationRecord> {
        self.classified
            .iter()
            .zip(&self.hashtags)
            .map(|((g, c), r)| ClassificationRecord {
                tag: c.tag.clone(),
                domain: c.domain.clone(),
                p: c.p,
                hot: r.hot,
                n_posts: g.len(),
                n_semantic: c.semantic_post_ids.len(),
                probs: self
                    .labels
                    .iter()
                    .cloned()
                    .zip(c.distribution.probs.iter().copied())
                    .collect(),
            })
            .collect()
    }

    /// Write `rankings.jsonl`, one `rankings/<domain>.jsonl` per label,
    /// `classifications.jsonl`, `rankings.txt` and, if asked,
    /// `diagnostics.jsonl`.
    pub fn write_outputs(&self, dir: &Path, diagnostics: bool) -> Result<()> {
        let per_domain_dir = dir.join(RANKINGS_DIR);
        fs::create_dir_all(&per_domain_dir).map_err(|e| Error::io(&per_domain_dir, e))?;
        let records = self.ranking_records();
        write_jsonl(&dir.join(RANKINGS_FILE), &records)?;
        for domain in self.rankings.keys() {
            let subset: Vec<&RankingRecord> =
                records.iter().filter(|r| &r.domain == domain).collect();
            let name = format!("{}.jsonl", file_stem(domain));
            write_jsonl(&per_domain_dir.join(name), &subset)?;
        }
        write_jsonl(
            &dir.join(CLASSIFICATIONS_FILE),
            &self.classification_records(),
        )?;
        let table = format_table(&records);
        let table_path = dir.join(TABLE_FILE);
        fs::write(&table_path, table).map_err(|e| Error::io(&table_path, e))?;
        if diagnostics {
            write_jsonl(&dir.join(DIAGNOSTICS_FILE), &self.diagnostics)?;
        }
        Ok(())
    }
}

/// Label made safe as a file name.
pub fn file_stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "_".to_string()
    } else {
        s
    }
}

/// Aligned text table of ranking records.
pub fn format_table(records: &[RankingRecord]) -> String {
    let dw = records
        .iter()
        .map(|r| r.domain.chars().count())
        .max()
        .unwrap_or(0)
        .max(6);
    let tw = records
        .iter()
        .map(|r| r.tag.chars().count())
        .max()
        .unwrap_or(0)
        .max(3);
    let mut out = format!(
        "{:<dw$}  {:>4}  {:<tw$}  {:>12}  {:>8}  {:>7}\n",
        "domain", "rank", "tag", "hot", "p", "n_posts"
    );
    for r in records {
        out.push_str(&format!(
            "{:<dw$}  {:>4}  {:<tw$}  {:>12.6}  {:>8.6}  {:>7}\n",
            r.domain, r.rank, r.tag, r.hot, r.p, r.n_posts
        ));
    }
    out
}
