//! Closed-form asymptotic relative deficiencies: limits of expected
//! differences in epsilon-miss counts between estimator sequences sharing a
//! first-order limit, together with their analytic minimizers and the
//! sample-size (Hodges-Lehmann) deficiency for comparison.
//!
//! Every deficiency here is a quadratic in the tuning constant, so formulas
//! are exposed both as point values ([`ArdValue`]) and as
//! [`QuadraticCurve`]s that [`argmin_c`] can minimize exactly.

mod zoo;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use zoo::{denominator_zoo, ZooRow};

use crate::dist::MomentSpec;
use crate::error::{invalid, Error, Result};
use crate::qsim::TransformTag;
use crate::special::{bisect, norm_pdf, norm_sf};

/// Formula identifiers addressable from the command line and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    LambdaA,
    Lambda0,
    Lambda0Transformed,
    SquaredMean,
    Hl,
    HlSquaredMean,
    HlNumeric,
    Binomial,
    BayesAveraged,
}

impl Formula {
    pub const ALL: [Formula; 9] = [
        Formula::LambdaA,
        Formula::Lambda0,
        Formula::Lambda0Transformed,
        Formula::SquaredMean,
        Formula::Hl,
        Formula::HlSquaredMean,
        Formula::HlNumeric,
        Formula::Binomial,
        Formula::BayesAveraged,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Formula::LambdaA => "lambda_a",
            Formula::Lambda0 => "lambda0",
            Formula::Lambda0Transformed => "lambda0_transformed",
            Formula::SquaredMean => "squared_mean",
            Formula::Hl => "hl",
            Formula::HlSquaredMean => "hl_squared_mean",
            Formula::HlNumeric => "hl_numeric",
            Formula::Binomial => "binomial",
            Formula::BayesAveraged => "bayes_averaged",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Formula::ALL
            .into_iter()
            .find(|f| f.id() == key)
            .ok_or_else(|| invalid(format!("unknown formula '{s}'")))
    }
}

/// A transformation summarized by `-h''(xi) / h'(xi)` at the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    /// `None` for a custom transform given only through its ratio.
    pub tag: Option<TransformTag>,
    pub h_ratio: f64,
}

impl TransformSpec {
    pub fn identity() -> Self {
        Self {
            tag: Some(TransformTag::Identity),
            h_ratio: 0.0,
        }
    }

    /// Derive the ratio from a named transform at `xi`; the transform must be
    /// strictly increasing there.
    pub fn from_tag(tag: TransformTag, xi: f64) -> Result<Self> {
        let slope = tag.slope(xi);
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(invalid(format!("{tag:?} is not strictly increasing at {xi}")));
        }
        Ok(Self {
            tag: Some(tag),
            h_ratio: tag.ratio(xi),
        })
    }

    pub fn custom(h_ratio: f64) -> Result<Self> {
        if !h_ratio.is_finite() {
            return Err(invalid("custom transform ratio must be finite"));
        }
        Ok(Self { tag: None, h_ratio })
    }
}

/// Echo of the inputs a deficiency value was computed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ArdInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MomentSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformSpec>,
}

/// A deficiency value: the limiting expected difference in miss counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArdValue {
    pub value: f64,
    pub formula: Formula,
    pub inputs: ArdInputs,
}

/// `quad * x^2 + lin * x + constant` in the tuning constant `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCurve {
    pub quad: f64,
    pub lin: f64,
    pub constant: f64,
}

impl QuadraticCurve {
    pub fn new(quad: f64, lin: f64) -> Self {
        Self {
            quad,
            lin,
            constant: 0.0,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.quad * x * x + self.lin * x + self.constant
    }

    pub fn derivative(&self, x: f64) -> f64 {
        2.0 * self.quad * x + self.lin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Argmin {
    Minimum {
        c0: f64,
        value: f64,
    },
    /// Leading coefficient negative, or zero with a nonzero slope.
    UnboundedBelow,
    /// Constant curve; every point is a minimizer.
    Flat {
        value: f64,
    },
}

impl Argmin {
    pub fn minimum(&self) -> Option<(f64, f64)> {
        match *self {
            Argmin::Minimum { c0, value } => Some((c0, value)),
            _ => None,
        }
    }
}

/// Exact vertex of a quadratic deficiency curve.
pub fn argmin_c(curve: &QuadraticCurve) -> Argmin {
    if curve.quad > 0.0 {
        let c0 = -curve.lin / (2.0 * curve.quad);
        Argmin::Minimum {
            c0,
            value: curve.eval(c0),
        }
    } else if curve.quad == 0.0 && curve.lin == 0.0 {
        Argmin::Flat { value: curve.constant }
    } else {
        Argmin::UnboundedBelow
    }
}

fn check_spec(spec: &MomentSpec) -> Result<()> {
    if spec.sigma > 0.0 && spec.sigma.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("sigma must be positive, got {}", spec.sigma)))
    }
}

/// Deficiency curve in `c` for the shrinkage mean with prior guess `d`,
/// counted among `n >= a / eps^2` for a fixed `a > 0`.
pub fn lambda_a_curve(spec: &MomentSpec, a: f64) -> Result<QuadraticCurve> {
    check_spec(spec)?;
    if !(a > 0.0) {
        return Err(invalid(format!("a must be positive, got {a}")));
    }
    let z = spec.xi / spec.sigma;
    let u = a.sqrt() / spec.sigma;
    let tail = norm_sf(u);
    let skew = 2.0 * spec.gamma / 3.0 * z;
    Ok(QuadraticCurve::new(
        2.0 * z * z * tail,
        -2.0 * (2.0 - skew) * tail - skew * u * norm_pdf(u),
    ))
}

pub fn lambda_a(c: f64, spec: &MomentSpec, a: f64) -> Result<ArdValue> {
    Ok(ArdValue {
        value: lambda_a_curve(spec, a)?.eval(c),
        formula: Formula::LambdaA,
        inputs: ArdInputs {
            c: Some(c),
            a: Some(a),
            spec: Some(*spec),
            ..Default::default()
        },
    })
}

/// Curve in `c` of the transformed-scale deficiency
/// `((xi-d)/sigma)^2 c^2 + {-2 + (2 gamma/3)(xi-d)/sigma + ratio (xi-d)} c`.
pub fn lambda0_transformed_curve(d: f64, spec: &MomentSpec, h: &TransformSpec) -> Result<QuadraticCurve> {
    check_spec(spec)?;
    let offset = spec.xi - d;
    let z = offset / spec.sigma;
    Ok(QuadraticCurve::new(
        z * z,
        -2.0 + 2.0 * spec.gamma / 3.0 * z + h.h_ratio * offset,
    ))
}

/// The untransformed case; shares the arithmetic path of
/// [`lambda0_transformed_curve`] with a zero ratio.
pub fn lambda0_curve(d: f64, spec: &MomentSpec) -> Result<QuadraticCurve> {
    lambda0_transformed_curve(d, spec, &TransformSpec::identity())
}

pub fn lambda0(c: f64, d: f64, spec: &MomentSpec) -> Result<ArdValue> {
    Ok(ArdValue {
        value: lambda0_curve(d, spec)?.eval(c),
        formula: Formula::Lambda0,
        inputs: ArdInputs {
            c: Some(c),
            d: Some(d),
            spec: Some(*spec),
            ..Default::default()
        },
    })
}

pub fn lambda0_transformed(c: f64, d: f64, spec: &MomentSpec, h: &TransformSpec) -> Result<ArdValue> {
    Ok(ArdValue {
        value: lambda0_transformed_curve(d, spec, h)?.eval(c),
        formula: Formula::Lambda0Transformed,
        inputs: ArdInputs {
            c: Some(c),
            d: Some(d),
            spec: Some(*spec),
            transform: Some(*h),
            ..Default::default()
        },
    })
}

fn check_nonzero_mean(spec: &MomentSpec) -> Result<()> {
    check_spec(spec)?;
    if spec.xi == 0.0 {
        Err(invalid("squared-mean deficiency is undefined at xi = 0"))
    } else {
        Ok(())
    }
}

/// Curve in `d` for `mean^2 - d s^2 / n`: `(d^2/4 + d/2) sigma^2 / xi^2`.
/// The same limit holds with known or estimated variance.
pub fn squared_mean_curve(spec: &MomentSpec) -> Result<QuadraticCurve> {
    check_nonzero_mean(spec)?;
    let k = (spec.sigma / spec.xi).powi(2);
    Ok(QuadraticCurve::new(0.25 * k, 0.5 * k))
}

pub fn lambda0_squared_mean(d: f64, spec: &MomentSpec) -> Result<ArdValue> {
    Ok(ArdValue {
        value: squared_mean_curve(spec)?.eval(d),
        formula: Formula::SquaredMean,
        inputs: ArdInputs {
            d: Some(d),
            spec: Some(*spec),
            ..Default::default()
        },
    })
}

/// Sample-size deficiency for the squared mean: `(d^2/4 - d/2) sigma^2 / xi^2`.
pub fn hl_squared_mean_curve(spec: &MomentSpec) -> Result<QuadraticCurve> {
    check_nonzero_mean(spec)?;
    let k = (spec.sigma / spec.xi).powi(2);
    Ok(QuadraticCurve::new(0.25 * k, -0.5 * k))
}

/// Sample-size deficiency curve in `c`: `((xi-d)/sigma)^2 c^2 - 2c`.
pub fn hl_curve(d: f64, spec: &MomentSpec) -> Result<QuadraticCurve> {
    check_spec(spec)?;
    let z = (spec.xi - d) / spec.sigma;
    Ok(QuadraticCurve::new(z * z, -2.0))
}

pub fn hl_deficiency(c: f64, d: f64, spec: &MomentSpec) -> Result<ArdValue> {
    Ok(ArdValue {
        value: hl_curve(d, spec)?.eval(c),
        formula: Formula::Hl,
        inputs: ArdInputs {
            c: Some(c),
            d: Some(d),
            spec: Some(*spec),
            ..Default::default()
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlNumeric {
    /// Extrapolated limit of `n(n0) - n0`.
    pub limit: f64,
    /// `(n0, n(n0) - n0)` for each grid point.
    pub gaps: Vec<(f64, f64)>,
}

/// Sample-size deficiency by matching mean squared errors under the normal
/// model: for each `n0`, solve `MSE_{c,d}(n) = sigma^2 / n0` where
/// `MSE_{c,d}(n) = (n sigma^2 + c^2 (xi-d)^2) / (n + c)^2`, then extrapolate
/// `n - n0` linearly in `1/n0` from the two largest grid points.
pub fn hl_deficiency_numeric(c: f64, d: f64, xi: f64, sigma: f64, n_grid: &[f64]) -> Result<HlNumeric> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    if n_grid.is_empty() {
        return Err(invalid("n0 grid is empty"));
    }
    let bias2 = c * c * (xi - d) * (xi - d);
    let s2 = sigma * sigma;
    let mut gaps = Vec::with_capacity(n_grid.len());
    for &n0 in n_grid {
        if !(n0 > 0.0) {
            return Err(invalid(format!("n0 must be positive, got {n0}")));
        }
        let goal = s2 / n0;
        let f = |n: f64| (n * s2 + bias2) / ((n + c) * (n + c)) - goal;
        // MSE decreases for n beyond its stationary point; search there.
        let floor = (-c).max(0.0);
        let stationary = (c - 2.0 * bias2 / s2).max(0.0);
        let lo = (floor + 1e-9).max(stationary).max(0.25 * n0);
        let mut hi = n0 + 4.0 * (c.abs() + bias2 / s2 + 1.0);
        let mut tries = 0;
        while f(hi) > 0.0 && tries < 60 {
            hi *= 2.0;
            tries += 1;
        }
        let n = bisect(f, lo, hi, 1e-15)?;
        gaps.push((n0, n - n0));
    }
    let limit = match gaps.len() {
        1 => gaps[0].1,
        k => {
            let (na, da) = gaps[k - 2];
            let (nb, db) = gaps[k - 1];
            (nb * db - na * da) / (nb - na)
        }
    };
    Ok(HlNumeric { limit, gaps })
}

/// Deficiency of `(Y_n + c d) / (n + c)` for a binomial proportion, from the
/// smoothed (non-lattice) limit:
/// `((p-d)^2/(pq)) c^2 - 2c - (2/3)((p-q)(p-d)/(pq)) c`.
pub fn binomial_curve(d: f64, p: f64) -> Result<QuadraticCurve> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let q = 1.0 - p;
    let pq = p * q;
    Ok(QuadraticCurve::new(
        (p - d) * (p - d) / pq,
        -2.0 - 2.0 / 3.0 * (p - q) * (p - d) / pq,
    ))
}

pub fn binomial_risk(c: f64, d: f64, p: f64) -> Result<ArdValue> {
    Ok(ArdValue {
        value: binomial_curve(d, p)?.eval(c),
        formula: Formula::Binomial,
        inputs: ArdInputs {
            c: Some(c),
            d: Some(d),
            p: Some(p),
            ..Default::default()
        },
    })
}

/// Normal-mean deficiency averaged over a prior with mean `theta0` and
/// variance `tau2`: `{tau2 + (theta0 - d)^2} c^2 - 2c`.
pub fn bayes_averaged_curve(d: f64, theta0: f64, tau2: f64) -> Result<QuadraticCurve> {
    if !(tau2 > 0.0) {
        return Err(invalid(format!("prior variance must be positive, got {tau2}")));
    }
    Ok(QuadraticCurve::new(tau2 + (theta0 - d) * (theta0 - d), -2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesOptimum {
    pub c: f64,
    pub d: f64,
    /// Averaged deficiency at the optimum, `-1 / tau2`.
    pub averaged_deficiency: f64,
}

/// Minimizer `(c, d) = (1/tau2, theta0)` of the prior-averaged deficiency.
pub fn bayes_optimal_cd(theta0: f64, tau2: f64) -> Result<BayesOptimum> {
    let curve = bayes_averaged_curve(theta0, theta0, tau2)?;
    let c = 1.0 / tau2;
    Ok(BayesOptimum {
        c,
        d: theta0,
        averaged_deficiency: curve.eval(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Generator;

    fn spec(xi: f64, sigma: f64, gamma: f64) -> MomentSpec {
        MomentSpec::new(xi, sigma, gamma).unwrap()
    }

    /// The pre-simplification integral
    /// `2 int_{sqrt(a)/sigma}^inf [z^2 c^2 - 2c - (gamma/3) z (u^2 - 3) c] phi(u) du`
    /// by composite Simpson.
    fn lambda_a_by_quadrature(c: f64, s: &MomentSpec, a: f64) -> f64 {
        let z = s.xi / s.sigma;
        let lo = a.sqrt() / s.sigma;
        let hi = lo + 40.0;
        let k = 200_000;
        let h = (hi - lo) / k as f64;
        let f = |u: f64| 2.0 * (z * z * c * c - 2.0 * c - s.gamma / 3.0 * z * (u * u - 3.0) * c) * norm_pdf(u);
        let mut acc = f(lo) + f(hi);
        for i in 1..k {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + h * i as f64);
        }
        acc * h / 3.0
    }

    #[test]
    fn lambda_a_closed_form() {
        let n = spec(1.0, 1.0, 0.0);
        assert_eq!(lambda_a(0.0, &n, 1.0).unwrap().value, 0.0);
        let v = lambda_a(1.0, &n, 1.0).unwrap().value;
        assert!((v + 2.0 * norm_sf(1.0)).abs() < 1e-15);
        assert!((v + 0.317_310_507_862_914_1).abs() < 1e-12);
        for (c, s, a) in [
            (1.0, n, 1.0),
            (0.4, spec(1.0, 1.0, 2.0), 0.3),
            (-0.7, spec(2.0, 1.5, -0.8), 2.0),
            (1.3, Generator::ChiSquare1.spec().unwrap(), 0.05),
        ] {
            let closed = lambda_a(c, &s, a).unwrap().value;
            let quad = lambda_a_by_quadrature(c, &s, a);
            assert!((closed - quad).abs() < 1e-10, "{closed} vs {quad}");
        }
        assert!(lambda_a(1.0, &n, 0.0).is_err());
    }

    #[test]
    fn lambda_a_tends_to_lambda0() {
        for (c, s) in [(1.0 / 3.0, spec(1.0, 1.0, 2.0)), (0.8, spec(0.5, 2.0, -1.0))] {
            let target = lambda0(c, 0.0, &s).unwrap().value;
            let mut prev = f64::INFINITY;
            for a in [1.0, 0.1, 0.01, 1e-4] {
                let gap = (lambda_a(c, &s, a).unwrap().value - target).abs();
                assert!(gap < prev);
                prev = gap;
            }
            assert!(prev < 1e-2);
        }
    }

    #[test]
    fn lambda0_named_cases() {
        let e = Generator::Exponential { mean: 1.0 }.spec().unwrap();
        let curve = lambda0_curve(0.0, &e).unwrap();
        assert!((curve.quad - 1.0).abs() < 1e-15 && (curve.lin + 2.0 / 3.0).abs() < 1e-15);
        assert!((lambda0(1.0 / 3.0, 0.0, &e).unwrap().value + 1.0 / 9.0).abs() < 1e-15);
        assert!((lambda0(1.0, 0.0, &e).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        let n = spec(2.0, 1.0, 0.0);
        for c in [0.5, 1.0, 4.0] {
            assert!((lambda0(c, 2.0, &n).unwrap().value + 2.0 * c).abs() < 1e-15);
            assert_eq!(lambda0(0.0, 0.7, &e).unwrap().value, 0.0);
        }
    }

    #[test]
    fn transformed_cases() {
        let chi = Generator::ChiSquare1.spec().unwrap();
        let sqrt = TransformSpec::from_tag(TransformTag::Sqrt, chi.xi).unwrap();
        let curve = lambda0_transformed_curve(0.0, &chi, &sqrt).unwrap();
        assert!((curve.quad - 0.5).abs() < 1e-15);
        assert!((curve.lin + 1.0 / 6.0).abs() < 1e-15);
        let (c0, _) = argmin_c(&curve).minimum().unwrap();
        assert!((c0 - 1.0 / 6.0).abs() < 1e-12);

        // log: -h''/h' = 1/xi = 1 gives (1/2)c^2 + (1/3)c.
        let log = TransformSpec::from_tag(TransformTag::Log, chi.xi).unwrap();
        let curve = lambda0_transformed_curve(0.0, &chi, &log).unwrap();
        assert!((curve.lin - 1.0 / 3.0).abs() < 1e-15);

        let id = TransformSpec::identity();
        for (c, d) in [(0.3, 0.0), (-1.2, 0.4), (2.0, 5.0)] {
            let a = lambda0_transformed(c, d, &chi, &id).unwrap().value;
            let b = lambda0(c, d, &chi).unwrap().value;
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(TransformSpec::from_tag(TransformTag::Log, -1.0).is_err());
        assert!(TransformSpec::from_tag(TransformTag::Square, 0.0).is_err());
    }

    #[test]
    fn squared_mean_cases() {
        let s = spec(1.0, 1.0, 0.0);
        assert_eq!(lambda0_squared_mean(0.0, &s).unwrap().value, 0.0);
        assert!((lambda0_squared_mean(-1.0, &s).unwrap().value + 0.25).abs() < 1e-15);
        assert!((lambda0_squared_mean(1.0, &s).unwrap().value - 0.75).abs() < 1e-15);
        let (d0, v) = argmin_c(&squared_mean_curve(&s).unwrap()).minimum().unwrap();
        assert_eq!((d0, v), (-1.0, -0.25));
        let (d_hl, _) = argmin_c(&hl_squared_mean_curve(&s).unwrap()).minimum().unwrap();
        assert_eq!(d_hl, 1.0);
        assert!(lambda0_squared_mean(1.0, &spec(0.0, 1.0, 0.0)).is_err());
        // sigma^2 / xi^2 scaling
        let s2 = spec(2.0, 1.0, 0.0);
        assert!((lambda0_squared_mean(-1.0, &s2).unwrap().value + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn hodges_lehmann_and_skewness_gap() {
        let e = Generator::Exponential { mean: 1.0 }.spec().unwrap();
        assert_eq!(hl_deficiency(0.0, 0.3, &e).unwrap().value, 0.0);
        for (c, d) in [(0.5, 0.0), (1.0, 2.0), (-0.3, 0.25)] {
            let gap = lambda0(c, d, &e).unwrap().value - hl_deficiency(c, d, &e).unwrap().value;
            let want = 2.0 * e.gamma / 3.0 * (e.xi - d) / e.sigma * c;
            assert!((gap - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hl_numeric_matches_closed_form() {
        // Oracle: for c = 2, d = 0, xi = sigma = 1 the matching n solves
        // n^2 + (4 - n0) n + 4 - 4 n0 = 0 in closed form.
        let grid = [1e3, 1e4, 1e5];
        let r = hl_deficiency_numeric(2.0, 0.0, 1.0, 1.0, &grid).unwrap();
        for &(n0, gap) in &r.gaps {
            let n = ((n0 - 4.0) + (n0 * n0 + 8.0 * n0).sqrt()) / 2.0;
            assert!((gap - (n - n0)).abs() < 1e-6, "n0={n0}");
        }
        assert!(r.limit.abs() < 0.01);
        let r = hl_deficiency_numeric(1.0, 0.0, 1.0, 1.0, &grid).unwrap();
        assert!((r.limit + 1.0).abs() < 0.01);
        let r = hl_deficiency_numeric(0.0, 0.0, 1.0, 1.0, &grid).unwrap();
        assert!(r.gaps.iter().all(|g| g.1.abs() < 1e-6));
        assert!(hl_deficiency_numeric(1.0, 0.0, 1.0, 1.0, &[]).is_err());
    }

    #[test]
    fn binomial_minimax_pair_is_flat_in_p() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let v = binomial_risk(4.0 / 3.0, 0.5, p).unwrap().value;
            assert!((v + 8.0 / 3.0).abs() < 1e-12, "p={p}");
        }
        assert_eq!(binomial_risk(0.0, 0.3, 0.2).unwrap().value, 0.0);
        assert!(binomial_risk(1.0, 0.5, 0.0).is_err());
        assert!(binomial_risk(1.0, 0.5, 1.0).is_err());
        // Agrees with lambda0 on the Bernoulli spec.
        let b = Generator::Bernoulli { p: 0.3 }.spec().unwrap();
        let x = binomial_risk(0.9, 0.1, 0.3).unwrap().value;
        assert!((x - lambda0(0.9, 0.1, &b).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn argmin_variants() {
        let e = Generator::Exponential { mean: 1.0 }.spec().unwrap();
        let m = argmin_c(&lambda0_curve(0.0, &e).unwrap());
        let (c0, v) = m.minimum().unwrap();
        assert!((c0 - 1.0 / 3.0).abs() < 1e-15 && (v + 1.0 / 9.0).abs() < 1e-15);
        let chi = Generator::ChiSquare1.spec().unwrap();
        let (c0, _) = argmin_c(&lambda0_curve(0.0, &chi).unwrap()).minimum().unwrap();
        assert!((c0 - 2.0 / 3.0).abs() < 1e-12);
        let n = spec(1.0, 1.0, 0.0);
        assert_eq!(argmin_c(&lambda0_curve(1.0, &n).unwrap()), Argmin::UnboundedBelow);
        assert_eq!(argmin_c(&QuadraticCurve::new(-1.0, 0.0)), Argmin::UnboundedBelow);
        assert_eq!(argmin_c(&QuadraticCurve::new(0.0, 0.0)), Argmin::Flat { value: 0.0 });
    }

    #[test]
    fn bayes_optimum() {
        let o = bayes_optimal_cd(0.0, 1.0).unwrap();
        assert_eq!((o.c, o.d), (1.0, 0.0));
        assert_eq!(o.averaged_deficiency, -1.0);
        let o = bayes_optimal_cd(2.0, 0.25).unwrap();
        assert_eq!((o.c, o.d), (4.0, 2.0));
        assert_eq!(o.averaged_deficiency, -4.0);
        // Direct minimization over a (c, d) grid never beats the optimum.
        for i in 0..=40 {
            for j in 0..=40 {
                let (c, d) = (i as f64 * 0.25, j as f64 * 0.1);
                let v = bayes_averaged_curve(d, 2.0, 0.25).unwrap().eval(c);
                assert!(v >= o.averaged_deficiency - 1e-12);
            }
        }
        assert!(bayes_optimal_cd(0.0, 0.0).is_err());
    }

    #[test]
    fn formula_ids_parse() {
        for f in Formula::ALL {
            assert_eq!(f.id().parse::<Formula>().unwrap(), f);
        }
        assert_eq!("squared-mean".parse::<Formula>().unwrap(), Formula::SquaredMean);
        assert!("lambda9".parse::<Formula>().is_err());
    }
}
