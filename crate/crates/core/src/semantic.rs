//! Spam filtering of a hashtag's posts by self-adaptive threshold clustering,
//! and hashtag classification from the surviving "semantic text".
//!
//! The threshold for a hashtag is the mean Euclidean distance over all
//! unordered pairs of its post vectors. Posts closer than the threshold are
//! linked, clusters are the connected components of that graph, and the
//! largest cluster is kept.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::classifier::{DomainClassifier, DomainDistribution};
use crate::corpus::{HashtagGroup, Microblog};
use crate::error::{Error, Result};
use crate::features::{tfidf_vector, tokenize, SparseVector};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRule {
    /// Link posts at distance `<= tau`.
    #[default]
    Inclusive,
    /// Link posts at distance `< tau`.
    Strict,
}

impl EdgeRule {
    fn links(self, distance: f64, tau: f64) -> bool {
        match self {
            EdgeRule::Inclusive => distance <= tau,
            EdgeRule::Strict => distance < tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticOptions {
    pub edge_rule: EdgeRule,
    /// Groups larger than this are uniformly subsampled before clustering.
    pub subsample_cap: usize,
    pub seed: u64,
}

impl Default for SemanticOptions {
    fn default() -> Self {
        SemanticOptions {
            edge_rule: EdgeRule::Inclusive,
            subsample_cap: 2000,
            seed: 42,
        }
    }
}

/// A post as seen by the clusterer.
#[derive(Debug, Clone, Copy)]
pub struct ClusterPoint<'a> {
    pub id: &'a str,
    pub timestamp: i64,
    pub vector: &'a SparseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// Post ids per cluster. Members keep input order; clusters are ordered by
    /// their first member.
    pub clusters: Vec<Vec<String>>,
    pub threshold: f64,
    pub chosen: usize,
}

impl ClusterResult {
    pub fn chosen_ids(&self) -> &[String] {
        &self.clusters[self.chosen]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }
}

/// Mean Euclidean distance over all unordered pairs; 0 for a single vector.
pub fn adaptive_threshold(vectors: &[SparseVector]) -> Result<f64> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::validation("adaptive threshold of an empty post set"));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += vectors[i].distance(&vectors[j]);
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so roots are order-stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the graph linking points within `tau`.
///
/// The chosen cluster is the largest; ties go to the cluster holding the
/// earliest post, then to the one holding the smallest post id.
pub fn threshold_clusters(points: &[ClusterPoint<'_>], tau: f64, rule: EdgeRule) -> ClusterResult {
    let n = points.len();
    let mut sets = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rule.links(points[i].vector.distance(points[j].vector), tau) {
                sets.union(i, j);
            }
        }
    }

    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut slot_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let r = sets.find(i);
        if slot_of_root[r] == usize::MAX {
            slot_of_root[r] = members.len();
            members.push(Vec::new());
        }
        members[slot_of_root[r]].push(i);
    }

    let key = |c: &Vec<usize>| {
        let earliest = c
            .iter()
            .map(|&i| points[i].timestamp)
            .min()
            .unwrap_or(i64::MAX);
        let smallest = c.iter().map(|&i| points[i].id).min().unwrap_or("");
        (c.len(), earliest, smallest)
    };
    let mut chosen = 0;
    for (idx, c) in members.iter().enumerate().skip(1) {
        let (size, ts, id) = key(c);
        let (bsize, bts, bid) = key(&members[chosen]);
        let better = match size.cmp(&bsize) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (ts, id) < (bts, bid),
        };
        if better {
            chosen = idx;
        }
    }

    ClusterResult {
        clusters: members
            .iter()
            .map(|c| c.iter().map(|&i| points[i].id.to_string()).collect())
            .collect(),
        threshold: tau,
        chosen,
    }
}

/// Per-hashtag clustering report for auditing the spam filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostic {
    pub tag: String,
    pub n_posts: usize,
    pub n_clustered: usize,
    pub threshold: f64,
    pub cluster_sizes: Vec<usize>,
    pub chosen_ids: Vec<String>,
}

/// Indices (into `group.posts`) of the semantic text, in original order, plus
/// the clustering that produced them.
pub fn select_semantic_posts(
    group: &HashtagGroup,
    clf: &DomainClassifier,
    opts: &SemanticOptions,
) -> (Vec<usize>, ClusterResult) {
    let candidates = subsample(group, opts);
    let vectors: Vec<SparseVector> = candidates
        .iter()
        .map(|&i| tfidf_vector(&tokenize(&group.posts[i].text), &clf.vocab))
        .collect();
    let tau = if vectors.is_empty() {
        0.0
    } else {
        adaptive_threshold(&vectors).expect("non-empty")
    };
    let points: Vec<ClusterPoint<'_>> = candidates
        .iter()
        .zip(&vectors)
        .map(|(&i, v)| ClusterPoint {
            id: &group.posts[i].id,
            timestamp: group.posts[i].timestamp,
            vector: v,
        })
        .collect();
    let result = threshold_clusters(&points, tau, opts.edge_rule);

    let chosen: std::collections::HashSet<&str> =
        result.chosen_ids().iter().map(String::as_str).collect();
    let selected = candidates
        .into_iter()
        .filter(|&i| chosen.contains(group.posts[i].id.as_str()))
        .collect();
    (selected, result)
}

/// Uniform subsample of at most `opts.subsample_cap` posts, drawn from a
/// canonical (timestamp, id) ordering so the draw ignores input order.
fn subsample(group: &HashtagGroup, opts: &SemanticOptions) -> Vec<usize> {
    let n = group.posts.len();
    if n <= opts.subsample_cap.max(1) {
        return (0..n).collect();
    }
    let mut canonical: Vec<usize> = (0..n).collect();
    canonical.sort_by(|&a, &b| {
        let (pa, pb) = (&group.posts[a], &group.posts[b]);
        (pa.timestamp, &pa.id).cmp(&(pb.timestamp, &pb.id))
    });
    let mut r = rng::seeded(rng::derive_seed(opts.seed, &group.tag));
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut r, n, opts.subsample_cap.max(1))
        .into_iter()
        .map(|k| canonical[k])
        .collect();
    picked.sort_unstable();
    picked
}

/// The posts of the chosen cluster, in original order.
pub fn semantic_text(
    group: &HashtagGroup,
    clf: &DomainClassifier,
    opts: &SemanticOptions,
) -> Vec<Microblog> {
    select_semantic_posts(group, clf, opts)
        .0
        .into_iter()
        .map(|i| group.posts[i].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedHashtag {
    pub tag: String,
    pub domain: String,
    /// Probability of `domain`, the maximum of `distribution`.
    pub p: f64,
    pub distribution: DomainDistribution,
    pub semantic_post_ids: Vec<String>,
}

/// Pick the domain from a distribution; ties go to the smaller label.
pub fn decide_domain(labels: &[String], dist: &DomainDistribution) -> (String, f64) {
    let i = dist.argmax();
    (labels[i].clone(), dist.probs[i])
}

/// Classify a hashtag from its semantic text.
pub fn classify_hashtag(
    group: &HashtagGroup,
    clf: &DomainClassifier,
    opts: &SemanticOptions,
) -> (ClassifiedHashtag, ClusterDiagnostic) {
    let (selected, clusters) = select_semantic_posts(group, clf, opts);
    let document = selected
        .iter()
        .map(|&i| group.posts[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let distribution = clf.classify_tokens(&tokenize(&document));
    let (domain, p) = decide_domain(&clf.labels, &distribution);
    let diagnostic = ClusterDiagnostic {
        tag: group.tag.clone(),
        n_posts: group.posts.len(),
        n_clustered: clusters.clusters.iter().map(Vec::len).sum(),
        threshold: clusters.threshold,
        cluster_sizes: clusters.sizes(),
        chosen_ids: clusters.chosen_ids().to_vec(),
    };
    let classified = ClassifiedHashtag {
        tag: group.tag.clone(),
        domain,
        p,
        distribution,
        semantic_post_ids: selected
            .iter()
            .map(|&i| group.posts[i].id.clone())
            .collect(),
    };
    (classified, diagnostic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(i: usize) -> SparseVector {
        SparseVector::from_pairs([(i, 1.0)])
    }

    fn points<'a>(vs: &'a [SparseVector], ids: &'a [String]) -> Vec<ClusterPoint<'a>> {
        vs.iter()
            .zip(ids)
            .enumerate()
            .map(|(k, (v, id))| ClusterPoint {
                id,
                timestamp: k as i64,
                vector: v,
            })
            .collect()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(adaptive_threshold(&[unit(0)]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            adaptive_threshold(&[unit(0), unit(1)]).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        // distances: d(a,a') = 0, d(a,b) = d(a',b) = 1
        let b = SparseVector::zero();
        assert_abs_diff_eq!(
            adaptive_threshold(&[unit(0), unit(0), b]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert!(adaptive_threshold(&[]).is_err());
    }

    #[test]
    fn identical_vectors_form_one_cluster() {
        let vs = vec![unit(2); 4];
        let ids = ids(4);
        for tau in [0.0, 0.5, 3.0] {
            let r = threshold_clusters(&points(&vs, &ids), tau, EdgeRule::Inclusive);
            assert_eq!(r.clusters.len(), 1);
            assert_eq!(r.clusters[0].len(), 4);
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let vs = vec![unit(0), unit(1)];
        let ids = ids(2);
        let tau = adaptive_threshold(&vs).unwrap();
        let r = threshold_clusters(&points(&vs, &ids), tau, EdgeRule::Inclusive);
        assert_eq!(r.clusters.len(), 1);
        let r = threshold_clusters(&points(&vs, &ids), tau, EdgeRule::Strict);
        assert_eq!(r.clusters.len(), 2);
    }

    #[test]
    fn tie_break_prefers_earliest_post() {
        let vs = vec![unit(0), unit(1), unit(0), unit(1)];
        let ids = ids(4);
        let mut pts = points(&vs, &ids);
        // cluster {p1, p3} holds the earliest post
        pts[1].timestamp = -10;
        let r = threshold_clusters(&pts, 0.5, EdgeRule::Inclusive);
        assert_eq!(r.chosen_ids(), ["p1", "p3"]);
        // equal earliest timestamps: smallest id wins
        let mut pts = points(&vs, &ids);
        for p in &mut pts {
            p.timestamp = 0;
        }
        let r = threshold_clusters(&pts, 0.5, EdgeRule::Inclusive);
        assert_eq!(r.chosen_ids(), ["p0", "p2"]);
    }

    #[test]
    fn transitive_merging() {
        // chain 0-1-2 with adjacent distance 1 and end-to-end distance 2
        let vs = vec![
            SparseVector::from_pairs([(0, 0.0), (1, 0.0)]),
            SparseVector::from_pairs([(0, 1.0)]),
            SparseVector::from_pairs([(0, 2.0)]),
        ];
        let ids = ids(3);
        let r = threshold_clusters(&points(&vs, &ids), 1.0, EdgeRule::Inclusive);
        assert_eq!(r.clusters, vec![vec!["p0", "p1", "p2"]]);
    }
}
