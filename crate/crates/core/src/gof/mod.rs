//! Goodness-of-fit statistics and model ranking.
//!
//! Kolmogorov–Smirnov and Anderson–Darling statistics are reported raw and
//! used for ranking; only the chi-squared test produces a pass/fail
//! decision, at significance level [`ALPHA`].

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{fit_mle, DistSpec, Family};
use crate::error::{Error, Result};
use crate::histogram::{build_histogram, BinRule};
use crate::special::chi_squared_quantile;

/// Significance level of every test decision.
pub const ALPHA: f64 = 0.01;
/// Default share of the sample treated as each tail.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.05;
/// Smallest sample accepted by [`chi_squared_test`] and [`rank_models`].
pub const MIN_GOF_SAMPLE: usize = 25;
/// Adjacent chi-squared bins are merged until each expects this many points.
pub const MIN_EXPECTED_PER_BIN: f64 = 5.0;
/// Clamp applied to model CDF values inside the Anderson–Darling logarithms.
const AD_CLAMP: f64 = 1e-15;

fn check_sorted(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::domain("statistic needs a non-empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("sample contains NaN"));
    }
    if sample.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("sample must be sorted ascending"));
    }
    Ok(())
}

/// Sorted copy of `sample`.
pub fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample K-S distance `D = max_i max(i/n − F(x_i), F(x_i) − (i−1)/n)`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    check_sorted(sample)?;
    let n = sample.len() as f64;
    let d = sample.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// Critical K-S distance for a sample of `n` at level `alpha`, from the
/// asymptotic Kolmogorov law with Stephens' small-sample adjustment.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let rn = (n as f64).sqrt();
    c / (rn + 0.12 + 0.11 / rn)
}

/// Two-sample K-S distance: the largest gap between the two ECDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Anderson–Darling statistic
/// `A² = −n − (1/n)·Σ (2i−1)·[ln F(x_i) + ln(1 − F(x_{n+1−i}))]`.
pub fn ad_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    check_sorted(sample)?;
    let n = sample.len();
    let f: Vec<f64> = sample
        .iter()
        .map(|&x| cdf(x).clamp(AD_CLAMP, 1.0 - AD_CLAMP))
        .collect();
    let sum: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (f[i].ln() + (-f[n - 1 - i]).ln_1p()))
        .sum();
    let a2 = -(n as f64) - sum / n as f64;
    Ok(a2.max(0.0))
}

/// Outcome of a chi-squared test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquared {
    pub statistic: f64,
    /// Degrees of freedom; at least 1 (see `inconclusive`).
    pub dof: u32,
    /// `statistic` below the 1 − α quantile.
    pub pass: bool,
    /// Too few bins survived merging to leave a positive dof.
    pub inconclusive: bool,
    /// Number of bins after merging.
    pub bins: usize,
}

/// Σ (O − E)² / E over paired bins.
pub fn chi_squared_statistic(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::domain(format!(
            "observed and expected lengths differ or are empty ({} vs {})",
            observed.len(),
            expected.len()
        )));
    }
    if let Some(e) = expected.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(Error::domain(format!("expected counts must be positive (got {e})")));
    }
    Ok(observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum())
}

/// Chi-squared test on binned counts. Adjacent bins are merged from the
/// left until each expects at least [`MIN_EXPECTED_PER_BIN`]; a short
/// remainder joins the last merged bin.
pub fn chi_squared_counts(
    observed: &[u64],
    expected: &[f64],
    fitted_param_count: usize,
) -> Result<ChiSquared> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::domain("observed and expected must be non-empty and equally long"));
    }
    let mut obs: Vec<f64> = Vec::new();
    let mut exp: Vec<f64> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o as f64;
        e_acc += e;
        if e_acc >= MIN_EXPECTED_PER_BIN {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(o), Some(e)) => {
                *o += o_acc;
                *e += e_acc;
            }
            _ => {
                obs.push(o_acc);
                exp.push(e_acc);
            }
        }
    }
    let statistic = chi_squared_statistic(&obs, &exp)?;
    let raw_dof = obs.len() as i64 - 1 - fitted_param_count as i64;
    if raw_dof < 1 {
        return Ok(ChiSquared {
            statistic,
            dof: 1,
            pass: false,
            inconclusive: true,
            bins: obs.len(),
        });
    }
    let dof = raw_dof as u32;
    let critical = chi_squared_quantile(1.0 - ALPHA, dof)?;
    Ok(ChiSquared {
        statistic,
        dof,
        pass: statistic < critical,
        inconclusive: false,
        bins: obs.len(),
    })
}

/// Number of equal-probability bins for a sample of `n`: ⌈2·n^0.4⌉.
pub fn chi_squared_bin_count(n: usize) -> usize {
    (2.0 * (n as f64).powf(0.4)).ceil() as usize
}

/// Chi-squared test of `sample` against `spec` with equal-probability bins.
pub fn chi_squared_test(
    sample: &[f64],
    spec: &DistSpec,
    fitted_param_count: usize,
) -> Result<ChiSquared> {
    if sample.len() < MIN_GOF_SAMPLE {
        return Err(Error::domain(format!(
            "chi-squared test needs at least {MIN_GOF_SAMPLE} points (got {})",
            sample.len()
        )));
    }
    let n = sample.len();
    let k = chi_squared_bin_count(n);
    let mut observed = vec![0u64; k];
    for &x in sample {
        let u = spec.cdf(x);
        let idx = if u.is_nan() { 0 } else { ((u * k as f64).floor().max(0.0) as usize).min(k - 1) };
        observed[idx] += 1;
    }
    let expected = vec![n as f64 / k as f64; k];
    chi_squared_counts(&observed, &expected, fitted_param_count)
}

/// Root mean square difference between paired values.
pub fn rmse(model_values: &[f64], data_values: &[f64]) -> Result<f64> {
    if model_values.len() != data_values.len() {
        return Err(Error::domain(format!(
            "rmse needs equal lengths ({} vs {})",
            model_values.len(),
            data_values.len()
        )));
    }
    if model_values.is_empty() {
        return Err(Error::domain("rmse needs at least one value"));
    }
    let m = model_values.len() as f64;
    let ss: f64 = model_values
        .iter()
        .zip(data_values)
        .map(|(g, h)| (g - h) * (g - h))
        .sum();
    Ok((ss / m).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailErrors {
    pub low: f64,
    pub high: f64,
}

/// Largest ECDF-vs-model gap over the lowest and highest `tail_fraction`
/// of the sorted sample.
pub fn tail_error<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, tail_fraction: f64) -> Result<TailErrors> {
    check_sorted(sample)?;
    if !(tail_fraction > 0.0 && tail_fraction < 0.5) {
        return Err(Error::domain(format!("tail fraction must lie in (0, 0.5) (got {tail_fraction})")));
    }
    let n = sample.len();
    let m = (tail_fraction * n as f64 + 1e-9).floor() as usize;
    if m < 1 {
        return Err(Error::domain(format!(
            "sample of {n} leaves no points in a {tail_fraction} tail"
        )));
    }
    let gap = |i: usize| {
        let f = cdf(sample[i]);
        ((i + 1) as f64 / n as f64 - f).max(f - i as f64 / n as f64)
    };
    let low = (0..m).map(gap).fold(0.0_f64, f64::max);
    let high = (n - m..n).map(gap).fold(0.0_f64, f64::max);
    Ok(TailErrors {
        low: low.clamp(0.0, 1.0),
        high: high.clamp(0.0, 1.0),
    })
}

/// One row of a ranking report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofEntry {
    pub model_name: String,
    pub fit: DistSpec,
    pub converged: bool,
    pub log_likelihood: f64,
    pub ks_stat: f64,
    pub ad_stat: f64,
    pub chi2_stat: f64,
    pub chi2_dof: u32,
    pub chi2_pass: bool,
    pub chi2_inconclusive: bool,
    pub rmse: f64,
    pub tail_low_err: f64,
    pub tail_high_err: f64,
}

impl GofEntry {
    pub fn family(&self) -> Family {
        self.fit.family()
    }
}

/// Candidate models ranked by K-S distance, ties broken by A-D statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub sample_size: usize,
    pub alpha: f64,
    pub entries: Vec<GofEntry>,
}

fn rank_order(a: &GofEntry, b: &GofEntry) -> Ordering {
    a.ks_stat
        .total_cmp(&b.ks_stat)
        .then(a.ad_stat.total_cmp(&b.ad_stat))
        .then(a.family().cmp(&b.family()))
}

impl GofReport {
    /// Entries in A-D order (the second half of the table).
    pub fn by_ad(&self) -> Vec<&GofEntry> {
        let mut v: Vec<&GofEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| {
            a.ad_stat
                .total_cmp(&b.ad_stat)
                .then(a.ks_stat.total_cmp(&b.ks_stat))
                .then(a.family().cmp(&b.family()))
        });
        v
    }

    pub fn is_ranked(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| rank_order(&w[0], &w[1]) != Ordering::Greater)
    }
}

/// Scores a fitted model against a sorted sample.
pub fn score_model(sorted_sample: &[f64], spec: &DistSpec, converged: bool, log_likelihood: f64) -> Result<GofEntry> {
    let cdf = |x: f64| spec.cdf(x);
    let ks = ks_statistic(sorted_sample, cdf)?;
    let ad = ad_statistic(sorted_sample, cdf)?;
    let chi = chi_squared_test(sorted_sample, spec, spec.family().fitted_param_count())?;
    let hist = build_histogram(sorted_sample, BinRule::Auto)?;
    let model_density: Vec<f64> = (0..hist.bins())
        .map(|i| (spec.cdf(hist.bin_edges[i + 1]) - spec.cdf(hist.bin_edges[i])) / hist.width(i))
        .collect();
    let tails = tail_error(sorted_sample, cdf, DEFAULT_TAIL_FRACTION)?;
    Ok(GofEntry {
        model_name: spec.family().display_name().to_string(),
        fit: *spec,
        converged,
        log_likelihood,
        ks_stat: ks,
        ad_stat: ad,
        chi2_stat: chi.statistic,
        chi2_dof: chi.dof,
        chi2_pass: converged && chi.pass,
        chi2_inconclusive: chi.inconclusive,
        rmse: rmse(&model_density, &hist.density)?,
        tail_low_err: tails.low,
        tail_high_err: tails.high,
    })
}

/// Fits every candidate family to `sample` and ranks the fits.
pub fn rank_models(sample: &[f64], candidates: &[Family]) -> Result<GofReport> {
    if sample.len() < MIN_GOF_SAMPLE {
        return Err(Error::domain(format!(
            "ranking needs at least {MIN_GOF_SAMPLE} points (got {})",
            sample.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::domain("no candidate families given"));
    }
    let sorted_sample = sorted(sample);
    let mut entries = candidates
        .par_iter()
        .map(|&family| {
            let fit = fit_mle(family, &sorted_sample)?;
            score_model(&sorted_sample, &fit.spec, fit.converged, fit.log_likelihood)
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(rank_order);
    Ok(GofReport {
        sample_size: sample.len(),
        alpha: ALPHA,
        entries,
    })
}
