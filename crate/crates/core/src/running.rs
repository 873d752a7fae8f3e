/// Prefix statistics of a data stream: count, mean and centred sum of
/// squares, updated with Welford's recurrence.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningState {
    n: u64,
    mean: f64,
    ss: f64,
}

impl RunningState {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.ss += delta * (x - self.mean);
    }

    #[inline]
    pub fn count(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sum of squared deviations from the running mean.
    #[inline]
    pub fn sum_sq(&self) -> f64 {
        self.ss
    }

    /// Unbiased variance; NaN below two observations.
    #[inline]
    pub fn unbiased_variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.ss / (self.n - 1) as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Generator;

    #[test]
    fn matches_batch_recomputation_on_long_prefixes() {
        let g = Generator::Normal { mean: 1000.0, sd: 3.0 };
        let xs: Vec<f64> = g.sampler(11).unwrap().take(10_000).collect();
        let mut st = RunningState::new();
        for (i, &x) in xs.iter().enumerate() {
            st.push(x);
            let n = i + 1;
            if n % 997 == 0 || n == xs.len() {
                let prefix = &xs[..n];
                let mean = prefix.iter().sum::<f64>() / n as f64;
                let ss: f64 = prefix.iter().map(|v| (v - mean).powi(2)).sum();
                assert!(((st.mean() - mean) / mean).abs() < 1e-10);
                assert!(((st.sum_sq() - ss) / ss).abs() < 1e-10, "n={n}");
            }
        }
        assert_eq!(st.count(), 10_000);
    }

    #[test]
    fn short_streams() {
        let mut st = RunningState::new();
        assert!(st.unbiased_variance().is_nan());
        st.push(2.0);
        assert_eq!(st.mean(), 2.0);
        assert_eq!(st.sum_sq(), 0.0);
        st.push(4.0);
        assert_eq!(st.unbiased_variance(), 2.0);
    }
}
