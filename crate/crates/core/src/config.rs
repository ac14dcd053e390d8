//! Run configuration: one JSON document, every field optional.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::classifier::{SvmParams, TrainConfig};
use crate::corpus::HashtagStyle;
use crate::error::{Error, Result};
use crate::features::TopicParams;
use crate::semantic::{EdgeRule, SemanticOptions};
use crate::synth::SynthConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub news: PathBuf,
    pub microblogs: PathBuf,
    pub model_dir: PathBuf,
    pub output_dir: PathBuf,
    pub annotations: PathBuf,
    /// Ground-truth sidecar written by `synth`.
    pub truth: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            news: "data/news.jsonl".into(),
            microblogs: "data/microblogs.jsonl".into(),
            model_dir: "model".into(),
            output_dir: "out".into(),
            annotations: "data/annotations.jsonl".into(),
            truth: "data/truth.jsonl".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub n_topics: usize,
    /// `null` means `50 / n_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub train_iters: usize,
    pub infer_iters: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        let t = TopicParams::default();
        FeatureConfig {
            min_df: 2,
            max_df_ratio: 0.5,
            n_topics: t.n_topics,
            alpha: t.alpha,
            beta: t.beta,
            train_iters: t.train_iters,
            infer_iters: t.infer_iters,
        }
    }
}

/// Reference time for decay: explicit epoch seconds or the wall clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeRef {
    Seconds(i64),
    Now,
}

impl TimeRef {
    pub fn resolve(self) -> i64 {
        match self {
            TimeRef::Seconds(s) => s,
            TimeRef::Now => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs() as i64),
        }
    }
}

impl std::str::FromStr for TimeRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "now" {
            return Ok(TimeRef::Now);
        }
        s.parse::<i64>().map(TimeRef::Seconds).map_err(|_| {
            Error::validation(format!("t_p must be epoch seconds or \"now\", got {s:?}"))
        })
    }
}

impl Serialize for TimeRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeRef::Seconds(v) => s.serialize_i64(*v),
            TimeRef::Now => s.serialize_str("now"),
        }
    }
}

impl<'de> Deserialize<'de> for TimeRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(TimeRef::Seconds(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    pub gamma_days: f64,
    /// `null` uses the latest post time in the loaded stream.
    pub t_p: Option<TimeRef>,
    pub top_k: usize,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            gamma_days: 7.0,
            t_p: None,
            top_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    /// Link posts only when strictly closer than the threshold.
    pub strict: bool,
    pub subsample_cap: usize,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            strict: false,
            subsample_cap: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub hashtag_style: HashtagStyle,
    /// Hashtags with fewer posts are not classified or ranked.
    pub min_posts: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            hashtag_style: HashtagStyle::Weibo,
            min_posts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// NDCG cutoff.
    pub k: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub features: FeatureConfig,
    pub svm: SvmParams,
    pub ranking: RankingConfig,
    pub clustering: ClusteringConfig,
    pub corpus: CorpusConfig,
    pub evaluation: EvalConfig,
    /// Generator settings for `synth`; its seed is replaced by the run seed.
    pub synth: SynthConfig,
    pub seed: u64,
    /// Worker threads for per-hashtag classification; `null` = all cores.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            features: FeatureConfig::default(),
            svm: SvmParams::default(),
            ranking: RankingConfig::default(),
            clustering: ClusteringConfig::default(),
            corpus: CorpusConfig::default(),
            evaluation: EvalConfig::default(),
            synth: SynthConfig::default(),
            seed: 42,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.features;
        if f.min_df < 1 {
            return Err(Error::validation("min_df must be at least 1"));
        }
        if !(f.max_df_ratio > 0.0 && f.max_df_ratio <= 1.0) {
            return Err(Error::validation("max_df_ratio must be in (0, 1]"));
        }
        if f.n_topics < 2 {
            return Err(Error::validation("n_topics must be at least 2"));
        }
        if matches!(f.alpha, Some(a) if !(a > 0.0)) || !(f.beta > 0.0) {
            return Err(Error::validation("alpha and beta must be positive"));
        }
        if f.train_iters < 1 || f.infer_iters < 1 {
            return Err(Error::validation(
                "topic model iterations must be at least 1",
            ));
        }
        if !(self.svm.lambda > 0.0) || self.svm.epochs < 1 {
            return Err(Error::validation(
                "svm lambda must be positive and epochs at least 1",
            ));
        }
        if !(self.ranking.gamma_days > 0.0 && self.ranking.gamma_days.is_finite()) {
            return Err(Error::validation("gamma_days must be positive"));
        }
        if self.ranking.top_k < 1 || self.evaluation.k < 1 {
            return Err(Error::validation(
                "top_k and evaluation k must be at least 1",
            ));
        }
        if self.clustering.subsample_cap < 1 {
            return Err(Error::validation("subsample_cap must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::validation("workers must be at least 1"));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let f = &self.features;
        TrainConfig {
            min_df: f.min_df,
            max_df_ratio: f.max_df_ratio,
            topics: TopicParams {
                n_topics: f.n_topics,
                alpha: f.alpha,
                beta: f.beta,
                train_iters: f.train_iters,
                infer_iters: f.infer_iters,
            },
            svm: self.svm,
            seed: self.seed,
        }
    }

    pub fn semantic_options(&self) -> SemanticOptions {
        SemanticOptions {
            edge_rule: if self.clustering.strict {
                EdgeRule::Strict
            } else {
                EdgeRule::Inclusive
            },
            subsample_cap: self.clustering.subsample_cap,
            seed: self.seed,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            ..self.synth.clone()
        }
    }
}
