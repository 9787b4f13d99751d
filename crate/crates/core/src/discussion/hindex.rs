use super::DiscussionTree;

/// Largest `θ` with at least `θ` comments at level `θ`.
pub fn h_index(tree: &DiscussionTree) -> u32 {
    h_index_from_counts(tree.level_counts())
}

/// `counts[i]` is the number of comments at level `i + 1`.
pub fn h_index_from_counts(counts: &[u64]) -> u32 {
    counts
        .iter()
        .enumerate()
        .rev()
        .find(|&(i, &n)| n > i as u64)
        .map_or(0, |(i, _)| i as u32 + 1)
}

/// Maintains the h-index under comment insertion in O(1) per comment.
///
/// Insertion only raises one level count, so the only level that can newly
/// qualify is the one inserted into.
#[derive(Clone, Debug, Default)]
pub struct HIndexCounter {
    counts: Vec<u64>,
    h: u32,
}

impl HIndexCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a comment at `depth` (level `depth + 1`) and returns the new h.
    pub fn insert(&mut self, depth: u32) -> u32 {
        let d = depth as usize;
        if self.counts.len() <= d {
            self.counts.resize(d + 1, 0);
        }
        self.counts[d] += 1;
        let level = depth + 1;
        if level > self.h && self.counts[d] >= level as u64 {
            self.h = level;
        }
        self.h
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::node;
    use super::*;

    #[test]
    fn empty() {
        assert_eq!(h_index_from_counts(&[]), 0);
        assert_eq!(h_index(&DiscussionTree::new("A", vec![]).unwrap()), 0);
    }

    #[test]
    fn chain_has_h_one() {
        let nodes = (0..42)
            .map(|i| node(i, i.checked_sub(1), i as u32, None))
            .collect();
        let t = DiscussionTree::new("A", nodes).unwrap();
        assert_eq!(t.max_depth(), 42);
        assert_eq!(h_index(&t), 1);
    }

    #[test]
    fn three_by_three() {
        // three threads, each a chain of three comments
        let mut nodes = Vec::new();
        for t in 0..3u64 {
            let base = t * 3;
            nodes.push(node(base, None, 0, None));
            nodes.push(node(base + 1, Some(base), 1, None));
            nodes.push(node(base + 2, Some(base + 1), 2, None));
        }
        let t = DiscussionTree::new("A", nodes).unwrap();
        assert_eq!(t.level_counts(), &[3, 3, 3]);
        assert_eq!(h_index(&t), 3);
    }

    #[test]
    fn non_monotone_levels_take_the_largest_qualifying() {
        assert_eq!(h_index_from_counts(&[10, 1, 3]), 3);
        assert_eq!(h_index_from_counts(&[10, 1, 2]), 1);
        assert_eq!(h_index_from_counts(&[0, 5]), 2);
    }

    #[test]
    fn counter_matches_batch() {
        let depths = [0u32, 1, 1, 2, 2, 0, 2, 3, 3, 3, 3, 1];
        let mut c = HIndexCounter::new();
        for (i, &d) in depths.iter().enumerate() {
            let h = c.insert(d);
            let mut counts = vec![0u64; 4];
            for &e in &depths[..=i] {
                counts[e as usize] += 1;
            }
            assert_eq!(h, h_index_from_counts(&counts));
        }
        assert_eq!(c.h(), 4);
    }
}
