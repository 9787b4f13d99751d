//! Structure and growth of threaded discussions.
//!
//! Levels follow the usual h-index convention: the article is the root at
//! level 0, thread-starting comments sit at level 1, their replies at
//! level 2 and so on. A [`CommentEvent`] with `depth = d` is at level `d + 1`.

mod hindex;
mod speed;
mod trace;

pub use hindex::{h_index, h_index_from_counts, HIndexCounter};
pub use speed::{rank_by_speed, SpeedRow, SpeedTable, DEFAULT_MIN_COMMENTS};
pub use trace::{
    delta_h, h_trace, maturity, DeltaH, HStep, HTrace, MaturityStatus, TraceError,
    DEFAULT_MATURITY_MULTIPLE,
};

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::exec::Exec;
use crate::ingest::CommentEvent;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("comment {id} belongs to article {found}, expected {expected}")]
    MixedArticles {
        id: String,
        expected: String,
        found: String,
    },
    #[error("duplicate comment id {0}")]
    DuplicateId(String),
    #[error("duplicate document order {0}")]
    DuplicateOrder(u64),
    #[error("comment {id} references unknown parent {parent}")]
    UnknownParent { id: String, parent: String },
    #[error("comment {id} precedes its parent {parent} in document order")]
    ParentAfterChild { id: String, parent: String },
    #[error("comment {id} at depth {depth} under parent at depth {parent_depth}")]
    DepthMismatch {
        id: String,
        depth: u32,
        parent_depth: u32,
    },
    #[error("comment {id}: depth {depth} without parent")]
    RootDepth { id: String, depth: u32 },
}

/// A validated comment forest of one article, in document order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscussionTree {
    article: String,
    nodes: Vec<CommentEvent>,
    /// `level_counts[d]` = comments at level `d + 1`.
    level_counts: Vec<u64>,
}

impl DiscussionTree {
    pub fn new(article: impl Into<String>, mut nodes: Vec<CommentEvent>) -> Result<Self, TreeError> {
        let article = article.into();
        nodes.sort_by_key(|n| n.doc_order);
        let mut seen: HashMap<&str, (u32, u64)> = HashMap::with_capacity(nodes.len());
        let mut level_counts: Vec<u64> = Vec::new();
        let mut last_order = None;
        for n in &nodes {
            if n.article != article {
                return Err(TreeError::MixedArticles {
                    id: n.id.clone(),
                    expected: article.clone(),
                    found: n.article.clone(),
                });
            }
            if last_order == Some(n.doc_order) {
                return Err(TreeError::DuplicateOrder(n.doc_order));
            }
            last_order = Some(n.doc_order);
            match &n.parent {
                None if n.depth != 0 => {
                    return Err(TreeError::RootDepth {
                        id: n.id.clone(),
                        depth: n.depth,
                    })
                }
                None => {}
                Some(p) => {
                    // parents precede children, so the parent is already known
                    let Some(&(parent_depth, _)) = seen.get(p.as_str()) else {
                        let err = if nodes.iter().any(|m| &m.id == p) {
                            TreeError::ParentAfterChild {
                                id: n.id.clone(),
                                parent: p.clone(),
                            }
                        } else {
                            TreeError::UnknownParent {
                                id: n.id.clone(),
                                parent: p.clone(),
                            }
                        };
                        return Err(err);
                    };
                    if parent_depth + 1 != n.depth {
                        return Err(TreeError::DepthMismatch {
                            id: n.id.clone(),
                            depth: n.depth,
                            parent_depth,
                        });
                    }
                }
            }
            if seen.insert(n.id.as_str(), (n.depth, n.doc_order)).is_some() {
                return Err(TreeError::DuplicateId(n.id.clone()));
            }
            let d = n.depth as usize;
            if level_counts.len() <= d {
                level_counts.resize(d + 1, 0);
            }
            level_counts[d] += 1;
        }
        drop(seen);
        Ok(DiscussionTree {
            article,
            nodes,
            level_counts,
        })
    }

    pub fn article(&self) -> &str {
        &self.article
    }

    pub fn nodes(&self) -> &[CommentEvent] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Comments per level; index 0 holds level 1.
    pub fn level_counts(&self) -> &[u64] {
        &self.level_counts
    }

    /// Deepest occupied level (0 for an empty discussion).
    pub fn max_depth(&self) -> u32 {
        self.level_counts.len() as u32
    }

    pub fn dated(&self) -> usize {
        self.nodes.iter().filter(|n| n.timestamp.is_some()).count()
    }
}

/// Builds one tree per article. Articles whose comments violate the forest
/// invariants are returned separately with the first violation.
pub fn build_trees(
    comments: Vec<CommentEvent>,
    exec: Exec,
) -> (Vec<DiscussionTree>, Vec<(String, TreeError)>) {
    let mut by_article: BTreeMap<String, Vec<CommentEvent>> = BTreeMap::new();
    for c in comments {
        by_article.entry(c.article.clone()).or_default().push(c);
    }
    let groups: Vec<(String, Vec<CommentEvent>)> = by_article.into_iter().collect();
    let built = exec.map_owned(groups, |(article, nodes)| {
        DiscussionTree::new(article.clone(), nodes).map_err(|e| (article, e))
    });
    let mut trees = Vec::new();
    let mut errors = Vec::new();
    for b in built {
        match b {
            Ok(t) => trees.push(t),
            Err(e) => errors.push(e),
        }
    }
    (trees, errors)
}

#[cfg(test)]
pub(crate) mod test_support {
    use chrono::{DateTime, Duration, TimeZone, Utc};

    use crate::ingest::CommentEvent;

    pub fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2007, 1, 1, 0, 0, 0).unwrap()
    }

    pub fn at_day(day: f64) -> DateTime<Utc> {
        t0() + Duration::seconds((day * 86_400.0).round() as i64)
    }

    pub fn node(ord: u64, parent: Option<u64>, depth: u32, day: Option<f64>) -> CommentEvent {
        CommentEvent {
            article: "A".into(),
            id: format!("c{ord}"),
            parent: parent.map(|p| format!("c{p}")),
            depth,
            timestamp: day.map(at_day),
            author: Some("u".into()),
            doc_order: ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::node;
    use super::*;

    #[test]
    fn valid_forest() {
        let t = DiscussionTree::new(
            "A",
            vec![node(2, Some(0), 1, None), node(0, None, 0, None), node(1, None, 0, None)],
        )
        .unwrap();
        assert_eq!(t.level_counts(), &[2, 1]);
        assert_eq!(t.max_depth(), 2);
        assert_eq!(t.nodes()[0].doc_order, 0);
    }

    #[test]
    fn invariant_violations() {
        let err = |nodes| DiscussionTree::new("A", nodes).unwrap_err();
        assert!(matches!(err(vec![node(0, Some(9), 1, None)]), TreeError::UnknownParent { .. }));
        assert!(matches!(
            err(vec![node(0, Some(1), 1, None), node(1, None, 0, None)]),
            TreeError::ParentAfterChild { .. }
        ));
        assert!(matches!(
            err(vec![node(0, None, 0, None), node(1, Some(0), 2, None)]),
            TreeError::DepthMismatch { .. }
        ));
        assert!(matches!(err(vec![node(0, None, 0, None), node(0, None, 0, None)]), TreeError::DuplicateOrder(0)));
        let mut dup = node(1, None, 0, None);
        dup.id = "c0".into();
        assert!(matches!(err(vec![node(0, None, 0, None), dup]), TreeError::DuplicateId(_)));
        assert!(matches!(err(vec![node(0, None, 2, None)]), TreeError::RootDepth { .. }));
        let mut other = node(0, None, 0, None);
        other.article = "B".into();
        assert!(matches!(err(vec![other]), TreeError::MixedArticles { .. }));
    }

    #[test]
    fn build_trees_separates_bad_articles() {
        let mut bad = node(0, Some(5), 1, None);
        bad.article = "B".into();
        let (trees, errors) = build_trees(vec![node(0, None, 0, None), bad], Exec::Sequential);
        assert_eq!(trees.len(), 1);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].0, "B");
    }
}
