//! The first-order limit law of `eps^2 Q_eps`, the occupation time
//! `Q = Leb{s >= 0 : |W(s)| >= s / sigma}`, and a reference sampler for the
//! pair `(A, B)` appearing in the second-order limit of `eps (Q_1 - Q_2)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub sigma: f64,
    /// Simulated horizon `T`; the occupation of `(T, inf)` is ignored.
    pub horizon: f64,
    /// Grid step `ds`.
    pub step: f64,
    pub seed: u64,
}

impl PathConfig {
    /// Horizon `40 sigma^2` and step `sigma^2 / 400`.
    pub fn with_defaults(sigma: f64, seed: u64) -> Self {
        Self {
            sigma,
            horizon: 40.0 * sigma * sigma,
            step: sigma * sigma / 400.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.step > 0.0 && self.horizon >= self.step && self.horizon.is_finite()) {
            return Err(invalid(format!(
                "need 0 < step <= horizon, got step {} horizon {}",
                self.step, self.horizon
            )));
        }
        Ok(())
    }

    pub fn grid_points(&self) -> u64 {
        (self.horizon / self.step).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QLawSample {
    pub q: f64,
    pub horizon: f64,
    pub step: f64,
}

/// One draw of the occupation time, from exact Gaussian increments on the
/// grid `s_k = k ds`, `k = 1..=T/ds`: `q = ds * #{k : |W(s_k)| >= s_k / sigma}`.
pub fn simulate_q(config: &PathConfig) -> Result<QLawSample> {
    config.validate()?;
    let mut rng = stream_rng(config.seed);
    let k_max = config.grid_points();
    let ds = config.step;
    let sd = ds.sqrt();
    let slope = ds / config.sigma;
    let mut w = 0.0f64;
    let mut hits = 0u64;
    for k in 1..=k_max {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        if w.abs() >= slope * k as f64 {
            hits += 1;
        }
    }
    Ok(QLawSample {
        q: ds * hits as f64,
        horizon: k_max as f64 * ds,
        step: ds,
    })
}

/// Occupation times of one path read off nested grids: the path is simulated
/// on step `config.step / 2^halvings` and `q` is evaluated on steps
/// `config.step / 2^k` for `k = 0..=halvings` (coarsest first).
pub fn simulate_q_refinements(config: &PathConfig, halvings: u32) -> Result<Vec<QLawSample>> {
    config.validate()?;
    if halvings > 20 {
        return Err(invalid(format!("at most 20 halvings, got {halvings}")));
    }
    let mut rng = stream_rng(config.seed);
    let fine = config.step / f64::from(1u32 << halvings);
    let k_max = config.grid_points() << halvings;
    let sd = fine.sqrt();
    let slope = fine / config.sigma;
    let mut hits = vec![0u64; halvings as usize + 1];
    let mut w = 0.0f64;
    for k in 1..=k_max {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        if w.abs() >= slope * k as f64 {
            // Grid level j (step config.step / 2^j) contains k when 2^(halvings - j) divides k.
            let tz = k.trailing_zeros().min(halvings);
            for j in (halvings - tz)..=halvings {
                hits[j as usize] += 1;
            }
        }
    }
    Ok(hits
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let ds = config.step / f64::from(1u32 << j);
            QLawSample {
                q: ds * h as f64,
                horizon: config.grid_points() as f64 * config.step,
                step: ds,
            }
        })
        .collect())
}

/// Mixing weight of the countermonotone component: the countermonotone
/// exponential pair has correlation `1 - pi^2/6`, so this weight gives -1/3.
pub fn ab_mixing_weight() -> f64 {
    (1.0 / 3.0) / (std::f64::consts::PI.powi(2) / 6.0 - 1.0)
}

/// Reference pair with exponential marginals of mean `c * xi` and
/// correlation -1/3: with probability [`ab_mixing_weight`] the pair is
/// `(F^-1(U), F^-1(1-U))`, otherwise independent. Only the marginals and
/// the correlation are meant to be matched; the joint law is a stand-in.
#[derive(Debug, Clone)]
pub struct AbSampler {
    mean: f64,
    weight: f64,
    rng: crate::seed::StreamRng,
}

impl AbSampler {
    pub fn new(c: f64, xi: f64, seed: u64) -> Result<Self> {
        if !(c > 0.0 && xi > 0.0) {
            return Err(invalid(format!("need c > 0 and xi > 0, got c={c}, xi={xi}")));
        }
        Ok(Self {
            mean: c * xi,
            weight: ab_mixing_weight(),
            rng: stream_rng(seed),
        })
    }

    /// Exponential quantile of `1 - u`, i.e. `-mean * ln(u)`, for `u` in (0, 1].
    #[inline]
    fn quantile_upper(&self, u: f64) -> f64 {
        -self.mean * u.ln()
    }

    pub fn draw(&mut self) -> (f64, f64) {
        // random::<f64>() is in [0, 1); 1 - that is in (0, 1].
        let u = 1.0 - self.rng.random::<f64>();
        let a = self.quantile_upper(u);
        if self.rng.random::<f64>() < self.weight {
            let b = self.quantile_upper((1.0 - u).max(f64::MIN_POSITIVE));
            (a, b)
        } else {
            let v = 1.0 - self.rng.random::<f64>();
            (a, self.quantile_upper(v))
        }
    }
}

pub fn sample_ab_pair(c: f64, xi: f64, seed: u64) -> Result<(f64, f64)> {
    Ok(AbSampler::new(c, xi, seed)?.draw())
}
