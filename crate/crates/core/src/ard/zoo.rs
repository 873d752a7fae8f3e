use serde::{Deserialize, Serialize};

use super::{argmin_c, lambda0_curve, lambda0_transformed_curve, TransformSpec};
use crate::dist::Generator;
use crate::error::{invalid, Result};
use crate::qsim::TransformTag;
use crate::special::{chi2_mean_log, chi2_quantile, chi_mean};

/// One variance-estimator denominator, `SS / D`, singled out by some
/// statistical principle. `c` is the constant in `D = N - 1 + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooRow {
    pub key: String,
    pub principle: String,
    /// Denominator from exact finite-sample special functions (or the
    /// asymptotic constant for rules that only exist in the limit).
    pub exact_denominator: f64,
    pub approx_denominator: f64,
    pub approx_expr: String,
    pub note: String,
}

impl ZooRow {
    pub fn c_exact(&self, n_obs: u64) -> f64 {
        self.exact_denominator - (n_obs as f64 - 1.0)
    }

    pub fn c_approx(&self, n_obs: u64) -> f64 {
        self.approx_denominator - (n_obs as f64 - 1.0)
    }
}

fn row(key: &str, principle: &str, exact: f64, approx: f64, expr: &str, note: &str) -> ZooRow {
    ZooRow {
        key: key.into(),
        principle: principle.into(),
        exact_denominator: exact,
        approx_denominator: approx,
        approx_expr: expr.into(),
        note: note.into(),
    }
}

/// The catalogue of denominators for `sum (Y_i - mean)^2 / D` at sample
/// size `N`, with `n = N - 1` degrees of freedom.
pub fn denominator_zoo(n_obs: u64) -> Result<Vec<ZooRow>> {
    if n_obs < 2 {
        return Err(invalid(format!("the denominator table needs N >= 2, got {n_obs}")));
    }
    if n_obs < 4 {
        return Err(invalid(format!(
            "N = {n_obs} is too small for the vague-prior Bayes rule N - 3"
        )));
    }
    let big_n = n_obs as f64;
    let n = big_n - 1.0;
    let chi_m = chi_mean(n);
    let chi2 = Generator::ChiSquare1.spec()?;

    let rel_c0 = argmin_c(&lambda0_curve(0.0, &chi2)?)
        .minimum()
        .map(|m| m.0)
        .ok_or_else(|| invalid("relative-scale deficiency has no minimum"))?;
    let sd_c0 = argmin_c(&lambda0_transformed_curve(
        0.0,
        &chi2,
        &TransformSpec::from_tag(TransformTag::Sqrt, chi2.xi)?,
    )?)
    .minimum()
    .map(|m| m.0)
    .ok_or_else(|| invalid("sd-scale deficiency has no minimum"))?;
    let log_c0 = argmin_c(&lambda0_transformed_curve(
        0.0,
        &chi2,
        &TransformSpec::from_tag(TransformTag::Log, chi2.xi)?,
    )?)
    .minimum()
    .map(|m| m.0)
    .ok_or_else(|| invalid("log-scale deficiency has no minimum"))?;

    Ok(vec![
        row("i", "maximum likelihood", big_n, big_n, "N", ""),
        row("ii", "unbiased for sigma^2", n, n, "N-1", ""),
        row(
            "iii",
            "unbiased for sigma",
            chi_m * chi_m,
            big_n - 1.5,
            "N-3/2",
            "exact D = (E sqrt(chi2_n))^2",
        ),
        row("iv", "minimum MSE for sigma^2", big_n + 1.0, big_n + 1.0, "N+1", ""),
        row(
            "v",
            "minimum MSE for sigma",
            n * n / (chi_m * chi_m),
            big_n - 0.5,
            "N-1/2",
            "exact D = n^2 / (E sqrt(chi2_n))^2",
        ),
        row(
            "vi",
            "median unbiased",
            chi2_quantile(0.5, n)?,
            n - 2.0 / 3.0 + 4.0 / (27.0 * n),
            "N-5/3+4/(27n)",
            "exact D = median of chi2_n; Wilson-Hilferty approximation",
        ),
        row(
            "vii",
            "unbiased for log sigma",
            chi2_mean_log(n).exp(),
            big_n - 2.0 + 1.0 / (6.0 * big_n),
            "N-2+1/(6N)",
            "exact D = exp(E log chi2_n)",
        ),
        row(
            "viii",
            "Bayes, vague prior, squared error on sigma^2",
            big_n - 3.0,
            big_n - 3.0,
            "N-3",
            "squared error on 1/sigma^2 gives N-1",
        ),
        row(
            "ix",
            "fewest relative misses for sigma^2",
            n + rel_c0,
            n + rel_c0,
            "N-1/3",
            "asymptotic",
        ),
        row(
            "x",
            "fewest relative misses for sigma",
            n + sd_c0,
            n + sd_c0,
            "N-5/6",
            "asymptotic",
        ),
        row(
            "xi",
            "fewest misses for log sigma^2",
            n + log_c0,
            n + log_c0,
            "N-4/3",
            "asymptotic",
        ),
    ])
}
