//! Welch's unequal-variance two-sample t-test, one-sided.

use serde::{Deserialize, Serialize};

use super::special::student_t_sf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// `P(T ≥ t)` under the null; small values support mean(a) > mean(b).
    pub p_value_one_sided: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Test the alternative mean(a) > mean(b).
///
/// When both sample variances are zero the statistic is ±∞ with p = 0 or 1
/// by comparing the means (t = 0, p = ½ when they are equal), and the
/// reported df falls back to `n_a + n_b − 2`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "t-test needs at least 2 observations per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (var_a / na, var_b / nb);
    let se2 = sa + sb;

    let (t, df, p) = if se2 == 0.0 {
        let df = na + nb - 2.0;
        match mean_a.partial_cmp(&mean_b) {
            Some(std::cmp::Ordering::Greater) => (f64::INFINITY, df, 0.0),
            Some(std::cmp::Ordering::Less) => (f64::NEG_INFINITY, df, 1.0),
            _ => (0.0, df, 0.5),
        }
    } else {
        let t = (mean_a - mean_b) / se2.sqrt();
        let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        (t, df, student_t_sf(t, df).clamp(0.0, 1.0))
    };

    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value_one_sided: p,
        n_a: a.len(),
        n_b: b.len(),
        mean_a,
        mean_b,
    })
}

/// Same test on binary correctness flags.
pub fn welch_t_test_flags(a: &[bool], b: &[bool]) -> Result<TTestResult> {
    let to_f = |v: &[bool]| v.iter().map(|&x| x as u8 as f64).collect::<Vec<_>>();
    welch_t_test(&to_f(a), &to_f(b))
}
