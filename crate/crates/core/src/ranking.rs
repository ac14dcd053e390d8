//! Domain-sensitive hot values and per-domain rankings.
//!
//! `H(h) = p(h, D) * sum_j exp(-(t_p - t_j) / gamma)` over every post carrying
//! the hashtag, where `D` is the hashtag's assigned domain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{HashtagGroup, Microblog};
use crate::error::{Error, Result};
use crate::semantic::ClassifiedHashtag;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
/// Seven days.
pub const DEFAULT_GAMMA_SECONDS: f64 = 7.0 * SECONDS_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    /// Decay time constant in seconds.
    pub gamma: f64,
    /// Reference ("present") time, epoch seconds.
    pub t_p: i64,
}

impl DecayParams {
    pub fn new(gamma: f64, t_p: i64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::validation(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(DecayParams { gamma, t_p })
    }

    pub fn from_days(gamma_days: f64, t_p: i64) -> Result<Self> {
        DecayParams::new(gamma_days * SECONDS_PER_DAY, t_p)
    }

    /// Reference time defaulting to the latest post.
    pub fn latest_post_time(posts: &[Microblog]) -> Option<i64> {
        posts.iter().map(|p| p.timestamp).max()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHashtag {
    pub tag: String,
    pub domain: String,
    pub hot: f64,
    pub p: f64,
    pub n_posts: usize,
}

/// `exp(-(t_p - t_j) / gamma)`. Posts after `t_p` are rejected.
pub fn decay_weight(t_p: i64, t_j: i64, gamma: f64) -> Result<f64> {
    if t_j > t_p {
        return Err(Error::Consistency(format!(
            "post time {t_j} is after the reference time {t_p}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::validation(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok((-((t_p - t_j) as f64) / gamma).exp())
}

/// Hot value over all posts of the group (not only its semantic text).
pub fn hot_value(
    group: &HashtagGroup,
    classified: &ClassifiedHashtag,
    params: &DecayParams,
) -> Result<f64> {
    if group.tag != classified.tag {
        return Err(Error::validation(format!(
            "hot value for {:?} given classification of {:?}",
            group.tag, classified.tag
        )));
    }
    let mut decayed = 0.0;
    for post in &group.posts {
        decayed += decay_weight(params.t_p, post.timestamp, params.gamma).map_err(|e| match e {
            Error::Consistency(msg) => Error::Consistency(format!("post {:?}: {msg}", post.id)),
            other => other,
        })?;
    }
    Ok(classified.p * decayed)
}

pub fn rank_hashtag(
    group: &HashtagGroup,
    classified: &ClassifiedHashtag,
    params: &DecayParams,
) -> Result<RankedHashtag> {
    Ok(RankedHashtag {
        tag: group.tag.clone(),
        domain: classified.domain.clone(),
        hot: hot_value(group, classified, params)?,
        p: classified.p,
        n_posts: group.posts.len(),
    })
}

/// Bucket by domain, sort by hot value descending (ties by tag), keep `k`.
/// Every label in `domains` gets an entry, possibly empty.
pub fn rank_domains(
    ranked: impl IntoIterator<Item = RankedHashtag>,
    domains: &[String],
    k: usize,
) -> Result<BTreeMap<String, Vec<RankedHashtag>>> {
    if k < 1 {
        return Err(Error::validation("top-k must be at least 1"));
    }
    let mut buckets: BTreeMap<String, Vec<RankedHashtag>> =
        domains.iter().map(|d| (d.clone(), Vec::new())).collect();
    for r in ranked {
        buckets.entry(r.domain.clone()).or_default().push(r);
    }
    for list in buckets.values_mut() {
        list.sort_by(|a, b| b.hot.total_cmp(&a.hot).then_with(|| a.tag.cmp(&b.tag)));
        list.truncate(k);
    }
    Ok(buckets)
}

/// Compute hot values for classified groups and rank them per domain.
pub fn rank_classified(
    classified: &[(HashtagGroup, ClassifiedHashtag)],
    domains: &[String],
    params: &DecayParams,
    k: usize,
) -> Result<BTreeMap<String, Vec<RankedHashtag>>> {
    let ranked = classified
        .iter()
        .map(|(g, c)| rank_hashtag(g, c, params))
        .collect::<Result<Vec<_>>>()?;
    rank_domains(ranked, domains, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::DomainDistribution;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const DAY: i64 = 86_400;
    const T_P: i64 = 1_400_000_000;

    fn group(times: &[i64]) -> HashtagGroup {
        HashtagGroup {
            tag: "t".into(),
            posts: times
                .iter()
                .enumerate()
                .map(|(i, &timestamp)| Microblog {
                    id: format!("m{i}"),
                    text: String::new(),
                    timestamp,
                    hashtags: vec!["t".into()],
                })
                .collect(),
        }
    }

    fn classified(p: f64) -> ClassifiedHashtag {
        ClassifiedHashtag {
            tag: "t".into(),
            domain: "d".into(),
            p,
            distribution: DomainDistribution {
                probs: vec![p, 1.0 - p],
            },
            semantic_post_ids: vec!["m0".into()],
        }
    }

    fn ranked(tag: &str, hot: f64) -> RankedHashtag {
        RankedHashtag {
            tag: tag.into(),
            domain: "d".into(),
            hot,
            p: 1.0,
            n_posts: 1,
        }
    }

    #[test]
    fn decay_examples() {
        let g = DEFAULT_GAMMA_SECONDS;
        assert_eq!(decay_weight(T_P, T_P, g).unwrap(), 1.0);
        assert_abs_diff_eq!(
            decay_weight(T_P, T_P - 7 * DAY, g).unwrap(),
            0.367879,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            decay_weight(T_P, T_P - 14 * DAY, g).unwrap(),
            0.135335,
            epsilon = 1e-6
        );
        assert!(matches!(
            decay_weight(T_P, T_P + 1, g),
            Err(Error::Consistency(_))
        ));
        assert!(decay_weight(T_P, T_P, 0.0).is_err());
    }

    #[test]
    fn hot_value_examples() {
        let params = DecayParams::from_days(7.0, T_P).unwrap();
        assert_abs_diff_eq!(
            hot_value(&group(&[T_P]), &classified(0.8), &params).unwrap(),
            0.8
        );
        let h = hot_value(&group(&[T_P, T_P - 7 * DAY]), &classified(0.5), &params).unwrap();
        assert_abs_diff_eq!(h, 0.683940, epsilon = 1e-6);
        assert_eq!(
            hot_value(&group(&[T_P, T_P - 3]), &classified(0.0), &params).unwrap(),
            0.0
        );
        assert!(matches!(
            hot_value(&group(&[T_P + 5]), &classified(0.5), &params),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn ranking_order_and_truncation() {
        let domains = vec!["d".to_string(), "empty".to_string()];
        let r = rank_domains(
            vec![ranked("b", 2.0), ranked("a", 1.0), ranked("c", 3.0)],
            &domains,
            2,
        )
        .unwrap();
        let tags: Vec<_> = r["d"].iter().map(|x| x.tag.as_str()).collect();
        assert_eq!(tags, ["c", "b"]);
        assert!(r["empty"].is_empty());

        let r = rank_domains(vec![ranked("z", 1.0), ranked("y", 1.0)], &domains, 10).unwrap();
        let tags: Vec<_> = r["d"].iter().map(|x| x.tag.as_str()).collect();
        assert_eq!(tags, ["y", "z"]);

        assert!(rank_domains(vec![], &domains, 0).is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_volume(
            lags in prop::collection::vec(0i64..60 * DAY, 1..20),
            p in 0.0f64..1.0,
        ) {
            let times: Vec<i64> = lags.iter().map(|l| T_P - l).collect();
            let params = DecayParams::from_days(7.0, T_P).unwrap();
            let h = hot_value(&group(&times), &classified(p), &params).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= times.len() as f64 * p + 1e-12);
        }

        #[test]
        fn monotone_in_recency_and_volume(
            lags in prop::collection::vec(1i64..60 * DAY, 1..20),
            idx in any::<prop::sample::Index>(),
            shift in 1i64..DAY,
            p in 0.01f64..1.0,
        ) {
            let params = DecayParams::from_days(7.0, T_P).unwrap();
            let times: Vec<i64> = lags.iter().map(|l| T_P - l).collect();
            let base = hot_value(&group(&times), &classified(p), &params).unwrap();

            let mut later = times.clone();
            let i = idx.index(later.len());
            later[i] = (later[i] + shift).min(T_P);
            prop_assert!(hot_value(&group(&later), &classified(p), &params).unwrap() > base);

            let mut more = times.clone();
            more.push(T_P - lags[0]);
            prop_assert!(hot_value(&group(&more), &classified(p), &params).unwrap() > base);
        }

        #[test]
        fn larger_gamma_never_cools(
            lags in prop::collection::vec(0i64..60 * DAY, 1..20),
            c in 1.0f64..10.0,
        ) {
            let times: Vec<i64> = lags.iter().map(|l| T_P - l).collect();
            let g = group(&times);
            let a = hot_value(&g, &classified(0.7), &DecayParams::from_days(7.0, T_P).unwrap()).unwrap();
            let b = hot_value(&g, &classified(0.7), &DecayParams::from_days(7.0 * c, T_P).unwrap()).unwrap();
            prop_assert!(b >= a);
        }
    }
}
