//! News and microblog ingestion, hashtag extraction and grouping.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsArticle {
    pub id: String,
    pub category: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Microblog {
    pub id: String,
    pub text: String,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub hashtags: Vec<String>,
}

/// All posts carrying one hashtag.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagGroup {
    pub tag: String,
    pub posts: Vec<Microblog>,
}

impl HashtagGroup {
    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }
}

/// A loaded news corpus with its label set (sorted, distinct categories).
#[derive(Debug, Clone, Default)]
pub struct NewsCorpus {
    pub articles: Vec<NewsArticle>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashtagStyle {
    /// `#tag#`, as used on Sina Weibo.
    #[default]
    Weibo,
    /// `#tag`, terminated by the first character that is not a letter, digit or `_`.
    Twitter,
}

impl FromStr for HashtagStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weibo" => Ok(HashtagStyle::Weibo),
            "twitter" => Ok(HashtagStyle::Twitter),
            other => Err(Error::validation(format!(
                "unknown hashtag style {other:?}"
            ))),
        }
    }
}

/// Extract hashtags in order of first appearance, without duplicates.
pub fn extract_hashtags(text: &str, style: HashtagStyle) -> Vec<String> {
    let raw = match style {
        HashtagStyle::Weibo => extract_weibo(text),
        HashtagStyle::Twitter => extract_twitter(text),
    };
    let mut seen = HashSet::new();
    raw.into_iter().filter(|t| seen.insert(t.clone())).collect()
}

fn extract_weibo(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('#') {
        let after = &rest[open + 1..];
        let Some(close) = after.find('#') else {
            break;
        };
        let inner = after[..close].trim();
        if inner.is_empty() {
            // "##": the second '#' may still open a tag.
            rest = &after[close..];
        } else {
            tags.push(inner.to_string());
            rest = &after[close + 1..];
        }
    }
    tags
}

fn extract_twitter(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + 1;
        let mut end = start;
        while let Some(&(j, d)) = chars.peek() {
            if d.is_alphanumeric() || d == '_' {
                end = j + d.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        if end > start {
            tags.push(text[start..end].to_string());
        }
    }
    tags
}

/// Group posts by hashtag. Groups are sorted by tag; posts keep input order.
pub fn group_by_hashtag(posts: &[Microblog]) -> Vec<HashtagGroup> {
    let mut groups: BTreeMap<&str, Vec<Microblog>> = BTreeMap::new();
    for post in posts {
        let mut seen = HashSet::new();
        for tag in &post.hashtags {
            if seen.insert(tag.as_str()) {
                groups.entry(tag.as_str()).or_default().push(post.clone());
            }
        }
    }
    groups
        .into_iter()
        .map(|(tag, posts)| HashtagGroup {
            tag: tag.to_string(),
            posts,
        })
        .collect()
}

#[derive(Deserialize)]
struct RawMicroblog {
    id: String,
    text: String,
    timestamp: i64,
    #[serde(default)]
    hashtags: Option<Vec<String>>,
}

/// Load a news JSONL file (`{"id", "category", "text"}` per line).
pub fn load_news_corpus(path: impl AsRef<Path>) -> Result<NewsCorpus> {
    let path = path.as_ref();
    let articles: Vec<NewsArticle> = read_jsonl(path)?;
    let mut ids = HashSet::new();
    for (idx, a) in articles.iter().enumerate() {
        if !ids.insert(a.id.as_str()) {
            return Err(Error::validation(format!(
                "{}: duplicate news id {:?}",
                path.display(),
                a.id
            )));
        }
        if a.category.trim().is_empty() {
            return Err(Error::validation(format!(
                "{}: article {:?} (record {}) has an empty category",
                path.display(),
                a.id,
                idx + 1
            )));
        }
        if a.text.trim().is_empty() {
            return Err(Error::validation(format!(
                "{}: article {:?} (record {}) has empty text",
                path.display(),
                a.id,
                idx + 1
            )));
        }
    }
    let labels = label_set(&articles);
    Ok(NewsCorpus { articles, labels })
}

pub fn label_set(articles: &[NewsArticle]) -> Vec<String> {
    articles
        .iter()
        .map(|a| a.category.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Load a microblog JSONL file. Records without a `hashtags` key get their
/// tags extracted from `text` using `style`; an explicit list always wins.
pub fn load_microblogs(path: impl AsRef<Path>, style: HashtagStyle) -> Result<Vec<Microblog>> {
    let path = path.as_ref();
    let raw: Vec<RawMicroblog> = read_jsonl(path)?;
    let mut ids = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        if !ids.insert(r.id.clone()) {
            return Err(Error::validation(format!(
                "{}: duplicate microblog id {:?}",
                path.display(),
                r.id
            )));
        }
        if r.timestamp < 0 {
            return Err(Error::validation(format!(
                "{}: microblog {:?} has negative timestamp {}",
                path.display(),
                r.id,
                r.timestamp
            )));
        }
        let hashtags = match r.hashtags {
            Some(tags) => {
                let mut seen = HashSet::new();
                let mut clean = Vec::with_capacity(tags.len());
                for t in tags {
                    if t.is_empty() || t.contains('#') {
                        return Err(Error::validation(format!(
                            "{}: microblog {:?} has invalid hashtag {:?}",
                            path.display(),
                            r.id,
                            t
                        )));
                    }
                    if seen.insert(t.clone()) {
                        clean.push(t);
                    }
                }
                clean
            }
            None => extract_hashtags(&r.text, style),
        };
        out.push(Microblog {
            id: r.id,
            text: r.text,
            timestamp: r.timestamp,
            hashtags,
        });
    }
    Ok(out)
}

/// Read one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Write one compact JSON value per line, LF-terminated.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn post(id: &str, tags: &[&str]) -> Microblog {
        Microblog {
            id: id.into(),
            text: String::new(),
            timestamp: 0,
            hashtags: tags.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn weibo_extraction() {
        assert_eq!(
            extract_hashtags("watch #MH370_is_missing# now", HashtagStyle::Weibo),
            vec!["MH370_is_missing"]
        );
        assert_eq!(
            extract_hashtags("#a# and #b# and #a#", HashtagStyle::Weibo),
            vec!["a", "b"]
        );
        // unmatched trailing '#'
        assert_eq!(extract_hashtags("#a# #b", HashtagStyle::Weibo), vec!["a"]);
        assert_eq!(extract_hashtags("##a#", HashtagStyle::Weibo), vec!["a"]);
        assert_eq!(
            extract_hashtags("#Dad Where going#", HashtagStyle::Weibo),
            vec!["Dad Where going"]
        );
    }

    #[test]
    fn twitter_extraction() {
        assert!(extract_hashtags("no tags here", HashtagStyle::Twitter).is_empty());
        assert_eq!(
            extract_hashtags("#a b #a", HashtagStyle::Twitter),
            vec!["a"]
        );
        assert_eq!(
            extract_hashtags("go #Sochi_2014! and #中国队", HashtagStyle::Twitter),
            vec!["Sochi_2014", "中国队"]
        );
        assert!(extract_hashtags("# lonely", HashtagStyle::Twitter).is_empty());
    }

    #[test]
    fn grouping() {
        let posts = vec![post("m1", &["a", "b"]), post("m2", &["a"])];
        let groups = group_by_hashtag(&posts);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].tag, "a");
        assert_eq!(
            groups[0]
                .posts
                .iter()
                .map(|p| p.id.as_str())
                .collect::<Vec<_>>(),
            ["m1", "m2"]
        );
        assert_eq!(groups[1].tag, "b");
        assert_eq!(groups[1].posts[0].id, "m1");

        assert!(group_by_hashtag(&[]).is_empty());

        let same = vec![post("1", &["x"]), post("2", &["x"]), post("3", &["x"])];
        let g = group_by_hashtag(&same);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].len(), 3);
    }

    #[test]
    fn load_news() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "news.jsonl",
            "{\"id\":\"a\",\"category\":\"sports\",\"text\":\"x\"}\n{\"id\":\"b\",\"category\":\"social\",\"text\":\"y\"}\n",
        );
        let c = load_news_corpus(&p).unwrap();
        assert_eq!(c.articles.len(), 2);
        assert_eq!(c.articles[0].id, "a");
        assert_eq!(c.labels, ["social", "sports"]);

        let empty = write(&dir, "empty.jsonl", "");
        let c = load_news_corpus(&empty).unwrap();
        assert!(c.articles.is_empty() && c.labels.is_empty());

        let dup = write(
            &dir,
            "dup.jsonl",
            "{\"id\":\"a\",\"category\":\"s\",\"text\":\"x\"}\n{\"id\":\"a\",\"category\":\"s\",\"text\":\"y\"}\n",
        );
        let err = load_news_corpus(&dup).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("\"a\""));

        let bad = write(
            &dir,
            "bad.jsonl",
            "{\"id\":\"a\",\"category\":\"s\",\"text\":\"x\"}\nnot json\n",
        );
        match load_news_corpus(&bad).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }

        let blank = write(
            &dir,
            "blank.jsonl",
            "{\"id\":\"a\",\"category\":\"s\",\"text\":\"  \"}\n",
        );
        assert!(matches!(
            load_news_corpus(&blank),
            Err(Error::Validation(_))
        ));

        assert!(matches!(
            load_news_corpus(dir.path().join("missing.jsonl")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn load_posts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "m.jsonl",
            "{\"id\":\"m1\",\"text\":\"go #TeamA# go\",\"timestamp\":100}\n\
             {\"id\":\"m2\",\"text\":\"#Y# here\",\"timestamp\":5,\"hashtags\":[\"X\"]}\n",
        );
        let posts = load_microblogs(&p, HashtagStyle::Weibo).unwrap();
        assert_eq!(posts[0].hashtags, ["TeamA"]);
        assert_eq!(posts[0].timestamp, 100);
        assert_eq!(posts[1].hashtags, ["X"]);

        let neg = write(
            &dir,
            "neg.jsonl",
            "{\"id\":\"m1\",\"text\":\"\",\"timestamp\":-5}\n",
        );
        assert!(matches!(
            load_microblogs(&neg, HashtagStyle::Weibo),
            Err(Error::Validation(_))
        ));

        let badtag = write(
            &dir,
            "badtag.jsonl",
            "{\"id\":\"m1\",\"text\":\"\",\"timestamp\":1,\"hashtags\":[\"#x\"]}\n",
        );
        assert!(matches!(
            load_microblogs(&badtag, HashtagStyle::Weibo),
            Err(Error::Validation(_))
        ));
    }

    fn arb_post() -> impl Strategy<Value = Microblog> {
        (
            "[a-z0-9]{1,6}",
            "[ a-zA-Z#中国]{0,20}",
            0i64..2_000_000_000,
            prop::collection::vec("[a-c]{1,2}", 0..4),
        )
            .prop_map(|(id, text, timestamp, tags)| {
                let mut seen = HashSet::new();
                Microblog {
                    id,
                    text,
                    timestamp,
                    hashtags: tags
                        .into_iter()
                        .filter(|t| seen.insert(t.clone()))
                        .collect(),
                }
            })
    }

    proptest! {
        #[test]
        fn extracted_tags_are_clean(text in "[ a-z#_中]{0,40}") {
            for style in [HashtagStyle::Weibo, HashtagStyle::Twitter] {
                for t in extract_hashtags(&text, style) {
                    prop_assert!(!t.is_empty());
                    prop_assert!(!t.contains('#'));
                }
            }
        }

        #[test]
        fn group_sizes_match_tag_counts(posts in prop::collection::vec(arb_post(), 0..20)) {
            let total: usize = group_by_hashtag(&posts).iter().map(|g| g.len()).sum();
            let expected: usize = posts.iter().map(|p| p.hashtags.len()).sum();
            prop_assert_eq!(total, expected);
            for g in group_by_hashtag(&posts) {
                prop_assert!(!g.posts.is_empty());
                prop_assert!(g.posts.iter().all(|p| p.hashtags.contains(&g.tag)));
            }
        }

        #[test]
        fn microblog_round_trip(posts in prop::collection::vec(arb_post(), 0..10)) {
            let mut seen = HashSet::new();
            let posts: Vec<_> = posts.into_iter().filter(|p| seen.insert(p.id.clone())).collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.jsonl");
            write_jsonl(&path, &posts).unwrap();
            let back = load_microblogs(&path, HashtagStyle::Weibo).unwrap();
            prop_assert_eq!(back, posts);
        }
    }
}
