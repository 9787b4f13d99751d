use chrono::NaiveDate;

use super::{delta_h, HTrace};

/// Discussions need strictly more comments than this to be ranked.
pub const DEFAULT_MIN_COMMENTS: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedRow {
    pub article: String,
    pub delta_h: f64,
    /// Day of the earliest dated comment.
    pub start: NaiveDate,
    /// Day the final h-index was first reached.
    pub end: NaiveDate,
    pub duration_days: i64,
    pub final_h: u32,
    pub n_comments: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpeedTable {
    /// Fastest first.
    pub rows: Vec<SpeedRow>,
    /// Discussions above the size cut whose h-index never grew.
    pub no_growth: usize,
}

impl SpeedTable {
    pub fn fastest(&self, n: usize) -> &[SpeedRow] {
        &self.rows[..n.min(self.rows.len())]
    }

    /// Slowest first.
    pub fn slowest(&self, n: usize) -> Vec<&SpeedRow> {
        self.rows.iter().rev().take(n).collect()
    }
}

/// Ranks discussions with more than `min_comments` comments by Δh.
pub fn rank_by_speed<'a, I>(traces: I, min_comments: usize) -> SpeedTable
where
    I: IntoIterator<Item = &'a HTrace>,
{
    let mut table = SpeedTable::default();
    for tr in traces {
        if tr.n_comments <= min_comments {
            continue;
        }
        let Ok(dh) = delta_h(tr) else {
            table.no_growth += 1;
            continue;
        };
        let start = tr.origin.date_naive();
        let end = dh.last_increase.date_naive();
        table.rows.push(SpeedRow {
            article: tr.article.clone(),
            delta_h: dh.value,
            start,
            end,
            duration_days: (end - start).num_days(),
            final_h: dh.final_h,
            n_comments: tr.n_comments,
        });
    }
    table
        .rows
        .sort_by(|a, b| a.delta_h.total_cmp(&b.delta_h).then_with(|| a.article.cmp(&b.article)));
    table
}

#[cfg(test)]
mod tests {
    use super::super::test_support::at_day;
    use super::super::HStep;
    use super::*;

    fn trace(article: &str, spacing: f64, n_comments: usize) -> HTrace {
        HTrace {
            article: article.into(),
            steps: vec![
                HStep { timestamp: at_day(0.0), h: 1 },
                HStep { timestamp: at_day(spacing), h: 2 },
            ],
            h0: 1,
            origin: at_day(0.0),
            n_comments,
        }
    }

    #[test]
    fn ordered_fastest_first() {
        let traces = [trace("slow", 400.0, 2000), trace("fast", 1.0, 2000)];
        let table = rank_by_speed(&traces, 1000);
        let dh: Vec<f64> = table.rows.iter().map(|r| r.delta_h).collect();
        assert_eq!(dh, vec![1.0, 400.0]);
        assert_eq!(table.fastest(1)[0].article, "fast");
        assert_eq!(table.slowest(1)[0].article, "slow");
        assert_eq!(table.rows[1].duration_days, 400);
        assert_eq!(table.rows[1].final_h, 2);
    }

    #[test]
    fn size_cut_is_strict() {
        let traces = [trace("a", 1.0, 1000), trace("b", 1.0, 1001)];
        let table = rank_by_speed(&traces, 1000);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].article, "b");
    }

    #[test]
    fn no_growth_is_counted() {
        let mut t = trace("flat", 1.0, 5000);
        t.steps.pop();
        let table = rank_by_speed([&t], 1000);
        assert!(table.rows.is_empty());
        assert_eq!(table.no_growth, 1);
    }
}
