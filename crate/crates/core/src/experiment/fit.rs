//! Log-log least-squares fits of sweep statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Ordinary least squares of `log(median)` on `log(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub per_l_medians: Vec<(f64, f64)>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// `(slope, intercept, r^2)` of `y ~ x`. A constant response fits exactly.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy <= f64::EPSILON * my.abs().max(1.0) * n {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Fit over `(L, value)` samples; values that are not finite and positive
/// are skipped. Needs at least three distinct `L`.
pub fn fit_samples(samples: impl IntoIterator<Item = (f64, Option<f64>)>) -> Result<ScalingFit> {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (l, v) in samples {
        if let Some(v) = v.filter(|v| v.is_finite() && *v > 0.0) {
            groups.entry(l.to_bits()).or_default().push(v);
        }
    }
    let mut per_l: Vec<(f64, f64)> = groups
        .into_iter()
        .filter_map(|(l, mut v)| median(&mut v).map(|m| (f64::from_bits(l), m)))
        .collect();
    per_l.sort_by(|a, b| a.0.total_cmp(&b.0));
    if per_l.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} box sizes with valid cells, need 3",
            per_l.len()
        )));
    }
    let xs: Vec<f64> = per_l.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = per_l.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        per_l_medians: per_l,
    })
}
