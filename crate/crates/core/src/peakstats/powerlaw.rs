use super::StatsError;

/// Fewest tail samples accepted by [`fit_power_law`].
pub const MIN_POWER_LAW_SAMPLES: usize = 10;

/// Estimated exponent of `p(x) ∝ x^(-alpha)` for `x >= x_min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: u64,
    pub n_samples: usize,
    /// Every tail sample equals `x_min`; `alpha` is `+inf`.
    pub degenerate: bool,
}

/// Discrete power-law MLE in the continuous approximation
/// `alpha = 1 + n / sum(ln(x_i / (x_min - 1/2)))` over samples `>= x_min`.
pub fn fit_power_law(samples: &[u64], x_min: u64) -> Result<PowerLawFit, StatsError> {
    if x_min == 0 {
        return Err(StatsError::XMin);
    }
    let mut tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.len() < MIN_POWER_LAW_SAMPLES {
        return Err(StatsError::TooFewSamples {
            needed: MIN_POWER_LAW_SAMPLES,
            got: tail.len(),
        });
    }
    let n = tail.len();
    if tail.iter().all(|&x| x == x_min) {
        return Ok(PowerLawFit {
            alpha: f64::INFINITY,
            x_min,
            n_samples: n,
            degenerate: true,
        });
    }
    // Fixed summation order keeps the estimate independent of input order.
    tail.sort_unstable();
    let shift = x_min as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&x| (x as f64 / shift).ln()).sum();
    Ok(PowerLawFit {
        alpha: 1.0 + n as f64 / log_sum,
        x_min,
        n_samples: n,
        degenerate: false,
    })
}
