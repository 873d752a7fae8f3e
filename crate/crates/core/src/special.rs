//! Normal-distribution and gamma-family special functions.
//!
//! erfc comes from `libm` (a port of the musl implementation, accurate to a
//! few ulp); log-gamma, digamma and the regularized incomplete gamma come from
//! `statrs`. This module adds the normal-scale wrappers, chi-square moments
//! and a bracketing root finder used for chi-square quantiles.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use statrs::function::gamma;

use crate::error::{Error, Result};

/// 1/sqrt(2*pi)
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(t)`, accurate in relative terms far into the tail.
#[inline]
pub fn norm_sf(t: f64) -> f64 {
    0.5 * libm::erfc(t * FRAC_1_SQRT_2)
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    gamma::digamma(x)
}

/// `E sqrt(chi2_n) = sqrt(2) Gamma((n+1)/2) / Gamma(n/2)`.
pub fn chi_mean(n: f64) -> f64 {
    (0.5 * LN_2 + ln_gamma(0.5 * (n + 1.0)) - ln_gamma(0.5 * n)).exp()
}

/// `E log(chi2_n) = log 2 + psi(n/2)`.
pub fn chi2_mean_log(n: f64) -> f64 {
    LN_2 + digamma(0.5 * n)
}

/// CDF of the chi-square distribution with `n` degrees of freedom.
pub fn chi2_cdf(x: f64, n: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma::gamma_lr(0.5 * n, 0.5 * x)
}

/// Quantile of chi-square(n) by bracketing root search on [`chi2_cdf`].
pub fn chi2_quantile(p: f64, n: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) || n <= 0.0 {
        return Err(crate::error::invalid(format!(
            "chi2 quantile needs p in (0,1) and n > 0, got p={p}, n={n}"
        )));
    }
    let mut hi = n.max(1.0);
    while chi2_cdf(hi, n) < p {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoRoot { lo: 0.0, hi });
        }
    }
    bisect(|x| chi2_cdf(x, n) - p, 0.0, hi, 1e-13)
}

/// Bisection on a sign-changing bracket, to absolute tolerance `tol` in x.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoRoot { lo, hi });
    }
    let mut sa = fa.signum();
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sa {
            a = mid;
            sa = fm.signum();
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn normal_tail_matches_table() {
        // 30-digit reference values.
        let table = [
            (0.5, 0.308_537_538_725_986_9),
            (1.0, 0.158_655_253_931_457_05),
            (2.0, 0.022_750_131_948_179_21),
            (3.0, 0.001_349_898_031_630_094_5),
            (5.0, 2.866_515_718_791_939e-7),
            (8.0, 6.220_960_574_271_784e-16),
        ];
        for (t, want) in table {
            assert!(rel(norm_sf(t), want) < 1e-12, "sf({t})");
            assert!(rel(norm_cdf(-t), want) < 1e-12, "cdf(-{t})");
        }
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_pdf(0.0) - INV_SQRT_2PI).abs() < 1e-16);
    }

    #[test]
    fn gamma_family_matches_table() {
        let lg = [
            (0.5, 0.572_364_942_924_700_1),
            (2.5, 0.284_682_870_472_919_2),
            (10.0, 12.801_827_480_081_469),
            (100.5, 361.435_540_467_777_6),
        ];
        for (x, want) in lg {
            assert!(rel(ln_gamma(x), want) < 1e-13, "ln_gamma({x})");
        }
        let dg = [
            (0.5, -1.963_510_026_021_423_5),
            (1.0, -0.577_215_664_901_532_9),
            (2.5, 0.703_156_640_645_243_2),
            (10.0, 2.251_752_589_066_721),
            (100.5, 4.605_174_352_581_845),
        ];
        for (x, want) in dg {
            assert!(rel(digamma(x), want) < 1e-12, "digamma({x})");
        }
    }

    #[test]
    fn chi_moments_and_median() {
        let table = [
            (1.0, 0.797_884_560_802_865_4),
            (5.0, 2.127_692_162_140_974),
            (19.0, 4.301_946_736_057_308),
            (99.0, 9.924_780_549_814_449),
        ];
        for (n, want) in table {
            assert!(rel(chi_mean(n), want) < 1e-12, "E sqrt chi2_{n}");
        }
        let med10 = chi2_quantile(0.5, 10.0).unwrap();
        assert!((med10 - 9.341_817_765_591_967).abs() < 1e-9);
        let med30 = chi2_quantile(0.5, 30.0).unwrap();
        assert!((med30 - 29.336_031_516_661_586).abs() < 1e-9);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NoRoot { .. })
        ));
        assert!(chi2_quantile(1.5, 3.0).is_err());
    }
}
