//! Seeded synthetic news corpora and hashtag streams with ground truth.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{Microblog, NewsArticle};
use crate::error::{Error, Result};
use crate::evaluation::Annotation;
use crate::ranking::SECONDS_PER_DAY;
use crate::rng;

const DOMAIN_NAMES: [&str; 12] = [
    "entertainment",
    "finance",
    "social",
    "sports",
    "technology",
    "military",
    "education",
    "health",
    "travel",
    "auto",
    "culture",
    "house",
];

/// Terms per hashtag that its on-topic posts keep returning to.
const EVENT_TERMS: usize = 12;
/// Share of an on-topic post's tokens drawn from its event terms.
const EVENT_SHARE: f64 = 0.5;
const ANNOTATORS: usize = 3;
/// Size of the advertising vocabulary spam posts are written in.
const SPAM_TERMS: usize = 20;
/// Share of news tokens that are advertising, so the classifier's vocabulary
/// covers spam posts.
const AD_SHARE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_domains: usize,
    pub docs_per_domain: usize,
    pub vocab_per_domain: usize,
    pub overlap_ratio: f64,
    pub doc_len: usize,
    pub n_hashtags: usize,
    pub posts_per_hashtag: usize,
    /// Tokens per microblog post.
    pub post_len: usize,
    pub spam_ratio: f64,
    pub time_span_days: f64,
    /// Latest possible post time, epoch seconds.
    pub end_time: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_domains: 4,
            docs_per_domain: 200,
            vocab_per_domain: 300,
            overlap_ratio: 0.1,
            doc_len: 80,
            n_hashtags: 60,
            posts_per_hashtag: 20,
            post_len: 20,
            spam_ratio: 0.2,
            time_span_days: 30.0,
            end_time: 1_400_000_000,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_domains", self.n_domains),
            ("docs_per_domain", self.docs_per_domain),
            ("vocab_per_domain", self.vocab_per_domain),
            ("doc_len", self.doc_len),
            ("n_hashtags", self.n_hashtags),
            ("posts_per_hashtag", self.posts_per_hashtag),
            ("post_len", self.post_len),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v < 1) {
            return Err(Error::validation(format!(
                "synth {name} must be at least 1"
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_ratio) {
            return Err(Error::validation("synth overlap_ratio must be in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.spam_ratio) {
            return Err(Error::validation("synth spam_ratio must be in [0, 1)"));
        }
        if !(self.time_span_days >= 0.0 && self.time_span_days.is_finite()) {
            return Err(Error::validation(
                "synth time_span_days must be non-negative",
            ));
        }
        if self.end_time < 0 || (self.time_span_days * SECONDS_PER_DAY) as i64 > self.end_time {
            return Err(Error::validation(
                "synth time span reaches before the epoch",
            ));
        }
        Ok(())
    }

    pub fn domains(&self) -> Vec<String> {
        (0..self.n_domains)
            .map(|i| match DOMAIN_NAMES.get(i) {
                Some(n) => n.to_string(),
                None => format!("domain{i}"),
            })
            .collect()
    }

    fn shared_size(&self) -> usize {
        (self.overlap_ratio * self.vocab_per_domain as f64).round() as usize
    }

    /// Number of spam posts per hashtag.
    pub fn spam_per_hashtag(&self) -> usize {
        (self.spam_ratio * self.posts_per_hashtag as f64).round() as usize
    }
}

fn domain_term(domain: &str, i: usize) -> String {
    format!("{domain}{i:03}")
}

fn shared_term(i: usize) -> String {
    format!("common{i:03}")
}

fn spam_term(i: usize) -> String {
    format!("promo{i:03}")
}

/// One token from a domain's mixture of its own block and the shared block.
fn domain_token(cfg: &SynthConfig, domain: &str, r: &mut rng::Rng) -> String {
    let shared = cfg.shared_size();
    if shared > 0 && r.gen::<f64>() < cfg.overlap_ratio {
        shared_term(r.gen_range(0..shared))
    } else {
        domain_term(domain, r.gen_range(0..cfg.vocab_per_domain))
    }
}

/// Labeled articles, interleaved across domains, with a light sprinkling of
/// advertising terms.
pub fn generate_news(cfg: &SynthConfig) -> Result<Vec<NewsArticle>> {
    cfg.validate()?;
    let domains = cfg.domains();
    let mut r = rng::seeded(rng::derive_seed(cfg.seed, "news"));
    let mut out = Vec::with_capacity(cfg.n_domains * cfg.docs_per_domain);
    for j in 0..cfg.docs_per_domain {
        for d in &domains {
            let tokens: Vec<String> = (0..cfg.doc_len)
                .map(|_| {
                    if r.gen::<f64>() < AD_SHARE {
                        spam_term(r.gen_range(0..SPAM_TERMS))
                    } else {
                        domain_token(cfg, d, &mut r)
                    }
                })
                .collect();
            out.push(NewsArticle {
                id: format!("news-{d}-{j:05}"),
                category: d.clone(),
                text: tokens.join(" "),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub tag: String,
    pub true_domain: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthStream {
    pub posts: Vec<Microblog>,
    pub truth: Vec<TruthRecord>,
    /// Ids of the spam posts, for auditing the filter.
    pub spam_ids: Vec<String>,
}

/// Hashtag stream: each tag gets a true domain, on-topic posts drawn from
/// that domain (concentrated on a few event terms) and spam posts drawn from
/// a separate advertising vocabulary. Timestamps are uniform over the span.
pub fn generate_microblogs(cfg: &SynthConfig, domains: &[String]) -> Result<SynthStream> {
    cfg.validate()?;
    if domains.is_empty() {
        return Err(Error::validation("synth needs at least one domain"));
    }
    let mut r = rng::seeded(rng::derive_seed(cfg.seed, "microblogs"));
    let span = (cfg.time_span_days * SECONDS_PER_DAY) as i64;
    let n_spam = cfg.spam_per_hashtag();

    struct Draft {
        timestamp: i64,
        tag_idx: usize,
        k: usize,
        text: String,
        tag: String,
        spam: bool,
    }
    let mut drafts = Vec::new();
    let mut truth = Vec::with_capacity(cfg.n_hashtags);
    for h in 0..cfg.n_hashtags {
        let tag = format!("topic{h:04}");
        let domain = domains[r.gen_range(0..domains.len())].clone();
        let mut block: Vec<usize> = (0..cfg.vocab_per_domain).collect();
        block.shuffle(&mut r);
        let events: Vec<String> = block
            .iter()
            .take(EVENT_TERMS.min(cfg.vocab_per_domain))
            .map(|&i| domain_term(&domain, i))
            .collect();

        for k in 0..cfg.posts_per_hashtag {
            let spam = k >= cfg.posts_per_hashtag - n_spam;
            let tokens: Vec<String> = (0..cfg.post_len)
                .map(|_| {
                    if spam {
                        spam_term(r.gen_range(0..SPAM_TERMS))
                    } else if r.gen::<f64>() < EVENT_SHARE {
                        events[r.gen_range(0..events.len())].clone()
                    } else {
                        domain_token(cfg, &domain, &mut r)
                    }
                })
                .collect();
            let timestamp = cfg.end_time - r.gen_range(0..=span);
            drafts.push(Draft {
                timestamp,
                tag_idx: h,
                k,
                text: format!("{} #{tag}#", tokens.join(" ")),
                tag: tag.clone(),
                spam,
            });
        }
        truth.push(TruthRecord {
            tag,
            true_domain: domain,
        });
    }

    drafts.sort_by_key(|d| (d.timestamp, d.tag_idx, d.k));
    let mut spam_ids = Vec::new();
    let posts = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let id = format!("mb{i:07}");
            if d.spam {
                spam_ids.push(id.clone());
            }
            Microblog {
                id,
                text: d.text,
                timestamp: d.timestamp,
                hashtags: vec![d.tag],
            }
        })
        .collect();
    Ok(SynthStream {
        posts,
        truth,
        spam_ids,
    })
}

/// Annotations consistent with the ground truth: every annotator names the
/// true domain and scores each hashtag 1..=5 by the quintile of its
/// undiscounted-probability hot value within that domain.
pub fn generate_annotations(cfg: &SynthConfig, stream: &SynthStream) -> Vec<Annotation> {
    let gamma = 7.0 * SECONDS_PER_DAY;
    let mut heat: BTreeMap<&str, f64> = BTreeMap::new();
    for p in &stream.posts {
        let w = (-((cfg.end_time - p.timestamp) as f64) / gamma).exp();
        for t in &p.hashtags {
            *heat.entry(t.as_str()).or_insert(0.0) += w;
        }
    }
    let mut by_domain: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for t in &stream.truth {
        by_domain.entry(t.true_domain.as_str()).or_default().push((
            t.tag.as_str(),
            heat.get(t.tag.as_str()).copied().unwrap_or(0.0),
        ));
    }
    let mut scores: BTreeMap<&str, u8> = BTreeMap::new();
    for tags in by_domain.values_mut() {
        tags.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let m = tags.len();
        for (i, (tag, _)) in tags.iter().enumerate() {
            scores.insert(tag, 5 - (5 * i / m) as u8);
        }
    }
    stream
        .truth
        .iter()
        .map(|t| Annotation {
            tag: t.tag.clone(),
            gold_domain: Some(t.true_domain.clone()),
            domains: None,
            scores: vec![scores[t.tag.as_str()]; ANNOTATORS],
        })
        .collect()
}
