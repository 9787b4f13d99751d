use serde::Serialize;

use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinScheme {
    Linear,
    Logarithmic,
}

/// Half-open bins `[edge_i, edge_{i+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub scheme: BinScheme,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

impl Histogram {
    pub fn empty(scheme: BinScheme) -> Self {
        Histogram {
            bin_edges: Vec::new(),
            counts: Vec::new(),
            scheme,
        }
    }

    /// Unit-width bins `[v, v+1)` from the smallest to the largest value.
    pub fn integer<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let values: Vec<u64> = values.into_iter().collect();
        let (Some(&lo), Some(&hi)) = (values.iter().min(), values.iter().max()) else {
            return Self::empty(BinScheme::Linear);
        };
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        for v in values {
            counts[(v - lo) as usize] += 1;
        }
        Histogram {
            bin_edges: (lo..=hi + 1).map(|v| v as f64).collect(),
            counts,
            scheme: BinScheme::Linear,
        }
    }

    /// Geometric bins with edges at `10^(k / bins_per_decade)`.
    pub fn log_binned(samples: &[f64], bins_per_decade: u32) -> Result<Self, StatsError> {
        if bins_per_decade == 0 {
            return Err(StatsError::BinsPerDecade);
        }
        if let Some(&bad) = samples.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(StatsError::NonPositiveSample(bad));
        }
        if samples.is_empty() {
            return Ok(Self::empty(BinScheme::Logarithmic));
        }
        let b = bins_per_decade as i64;
        let edge = |k: i64| {
            if k % b == 0 {
                10f64.powi((k / b) as i32)
            } else {
                10f64.powf(k as f64 / b as f64)
            }
        };
        let index = |x: f64| {
            let mut k = (x.log10() * b as f64).floor() as i64;
            while edge(k) > x {
                k -= 1;
            }
            while edge(k + 1) <= x {
                k += 1;
            }
            k
        };
        let ks: Vec<i64> = samples.iter().map(|&x| index(x)).collect();
        let kmin = *ks.iter().min().unwrap();
        let kmax = *ks.iter().max().unwrap();
        let mut counts = vec![0u64; (kmax - kmin + 1) as usize];
        for k in ks {
            counts[(k - kmin) as usize] += 1;
        }
        Ok(Histogram {
            bin_edges: (kmin..=kmax + 1).map(edge).collect(),
            counts,
            scheme: BinScheme::Logarithmic,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bins(&self) -> impl Iterator<Item = Bin> + '_ {
        self.counts.iter().enumerate().map(|(i, &count)| Bin {
            lo: self.bin_edges[i],
            hi: self.bin_edges[i + 1],
            count,
        })
    }

    /// Count per bin divided by total count and bin width, so log-binned
    /// data plots as a probability density.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.bins()
            .map(|b| {
                if total == 0.0 {
                    0.0
                } else {
                    b.count as f64 / (total * (b.hi - b.lo))
                }
            })
            .collect()
    }

    /// `(value, count)` pairs of an integer histogram, skipping empty bins.
    pub fn integer_counts(&self) -> Vec<(u64, u64)> {
        self.bins()
            .filter(|b| b.count > 0)
            .map(|b| (b.lo as u64, b.count))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bin_per_decade() {
        let h = Histogram::log_binned(&[1.0, 10.0, 100.0], 1).unwrap();
        assert_eq!(h.bin_edges, vec![1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(h.counts, vec![1, 1, 1]);
        assert_eq!(h.scheme, BinScheme::Logarithmic);
    }

    #[test]
    fn same_decade_shares_bin() {
        let h = Histogram::log_binned(&[2.0, 3.0], 1).unwrap();
        assert_eq!(h.bin_edges, vec![1.0, 10.0]);
        assert_eq!(h.counts, vec![2]);
    }

    #[test]
    fn empty_and_invalid() {
        assert!(Histogram::log_binned(&[], 5).unwrap().is_empty());
        assert!(matches!(
            Histogram::log_binned(&[1.0, 0.0], 5),
            Err(StatsError::NonPositiveSample(_))
        ));
        assert!(Histogram::log_binned(&[-3.0], 5).is_err());
        assert!(Histogram::log_binned(&[1.0], 0).is_err());
    }

    #[test]
    fn sub_unit_and_fine_bins() {
        let xs = [0.5, 0.9, 1.0, 1.58, 1.59, 99.9];
        let h = Histogram::log_binned(&xs, 5).unwrap();
        assert_eq!(h.total(), xs.len() as u64);
        for (x, b) in xs.iter().zip([0usize, 1, 2, 2, 3]) {
            let bin = h.bins().nth(b).unwrap();
            assert!(bin.lo <= *x && *x < bin.hi, "{x} not in bin {b}: {bin:?}");
        }
        let d = h.density();
        assert!(d.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn integer_bins() {
        let h = Histogram::integer([1, 1, 2]);
        assert_eq!(h.integer_counts(), vec![(1, 2), (2, 1)]);
        let h = Histogram::integer([3, 7]);
        assert_eq!(h.counts, vec![1, 0, 0, 0, 1]);
        assert_eq!(h.bin_edges.len(), 6);
        assert!(Histogram::integer(std::iter::empty()).is_empty());
    }
}
