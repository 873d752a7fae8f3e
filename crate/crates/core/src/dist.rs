//! Generating distributions, their exact moments, and seeded samplers.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed::{stream_rng, StreamRng};

/// Mean, standard deviation and skewness of the summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub xi: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub has_fourth_moment: bool,
    pub is_lattice: bool,
}

impl MomentSpec {
    /// A non-lattice spec with finite fourth moment.
    pub fn new(xi: f64, sigma: f64, gamma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        if !xi.is_finite() || !gamma.is_finite() {
            return Err(invalid("moments must be finite"));
        }
        Ok(Self {
            xi,
            sigma,
            gamma,
            has_fourth_moment: true,
            is_lattice: false,
        })
    }
}

/// A generating distribution for the i.i.d. observations.
///
/// Serialized as `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Generator {
    Normal {
        mean: f64,
        sd: f64,
    },
    Exponential {
        mean: f64,
    },
    #[serde(rename = "chi_square1")]
    ChiSquare1,
    Bernoulli {
        p: f64,
    },
    /// Bernoulli whose unit mass is spread uniformly over `[1 - eta, 1 + eta]`.
    SmoothedBernoulli {
        p: f64,
        eta: f64,
    },
}

impl Generator {
    pub fn standard_normal() -> Self {
        Generator::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Generator::Normal { mean, sd } => {
                if !mean.is_finite() || !(sd > 0.0 && sd.is_finite()) {
                    return Err(invalid(format!(
                        "normal needs finite mean and sd > 0, got ({mean}, {sd})"
                    )));
                }
            }
            Generator::Exponential { mean } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(invalid(format!("exponential mean must be positive, got {mean}")));
                }
            }
            Generator::ChiSquare1 => {}
            Generator::Bernoulli { p } => check_p(p)?,
            Generator::SmoothedBernoulli { p, eta } => {
                check_p(p)?;
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(invalid(format!("eta must lie in (0, 1), got {eta}")));
                }
            }
        }
        Ok(())
    }

    /// Exact analytic moments.
    pub fn spec(&self) -> Result<MomentSpec> {
        self.validate()?;
        let (xi, sigma, gamma) = match *self {
            Generator::Normal { mean, sd } => (mean, sd, 0.0),
            Generator::Exponential { mean } => (mean, mean, 2.0),
            Generator::ChiSquare1 => (1.0, 2f64.sqrt(), 2.0 * 2f64.sqrt()),
            Generator::Bernoulli { p } => {
                let q = 1.0 - p;
                (p, (p * q).sqrt(), (q - p) / (p * q).sqrt())
            }
            Generator::SmoothedBernoulli { p, eta } => {
                let q = 1.0 - p;
                let var = p * q + p * eta * eta / 3.0;
                let mu3 = p * q * (q - p) + p * q * eta * eta;
                (p, var.sqrt(), mu3 / var.powf(1.5))
            }
        };
        Ok(MomentSpec {
            xi,
            sigma,
            gamma,
            has_fourth_moment: true,
            is_lattice: matches!(self, Generator::Bernoulli { .. }),
        })
    }

    /// Standardized fourth moment `E(X - xi)^4 / sigma^4`.
    pub fn kurtosis(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Generator::Normal { .. } => 3.0,
            Generator::Exponential { .. } => 9.0,
            Generator::ChiSquare1 => 15.0,
            Generator::Bernoulli { p } => {
                let q = 1.0 - p;
                (1.0 - 3.0 * p * q) / (p * q)
            }
            Generator::SmoothedBernoulli { p, eta } => {
                // X = 0 w.p. q, 1 + V w.p. p, V ~ U[-eta, eta].
                let q = 1.0 - p;
                let (v2, v4) = (eta * eta / 3.0, eta.powi(4) / 5.0);
                let mu4 = q * p.powi(4) + p * (q.powi(4) + 6.0 * q * q * v2 + v4);
                let var = p * q + p * v2;
                mu4 / (var * var)
            }
        })
    }

    /// A seeded, unbounded draw source.
    pub fn sampler(&self, seed: u64) -> Result<Sampler> {
        self.validate()?;
        Ok(Sampler {
            generator: *self,
            rng: stream_rng(seed),
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("p must lie in (0, 1), got {p}")))
    }
}

/// Draws i.i.d. values from a [`Generator`].
///
/// Normal and exponential variates use the ziggurat samplers of `rand_distr`;
/// chi-square(1) is the square of a standard normal draw.
#[derive(Debug, Clone)]
pub struct Sampler {
    generator: Generator,
    rng: StreamRng,
}

impl Sampler {
    #[inline]
    pub fn draw(&mut self) -> f64 {
        match self.generator {
            Generator::Normal { mean, sd } => {
                let z: f64 = self.rng.sample(StandardNormal);
                mean + sd * z
            }
            Generator::Exponential { mean } => {
                let e: f64 = self.rng.sample(Exp1);
                mean * e
            }
            Generator::ChiSquare1 => {
                let z: f64 = self.rng.sample(StandardNormal);
                z * z
            }
            Generator::Bernoulli { p } => {
                if self.rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            Generator::SmoothedBernoulli { p, eta } => {
                if self.rng.random::<f64>() < p {
                    1.0 + eta * (2.0 * self.rng.random::<f64>() - 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }
}

impl Iterator for Sampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.draw())
    }
}

/// The first `n` draws of the stream identified by `(g, seed)`.
pub fn sample_stream(g: &Generator, seed: u64, n: usize) -> Result<std::iter::Take<Sampler>> {
    Ok(g.sampler(seed)?.take(n))
}
