//! Maximum-likelihood fitting by Nelder–Mead search in an unconstrained
//! parameterization (log scales), started from method-of-moments estimates.

use serde::{Deserialize, Serialize};

use super::{DistSpec, Family};
use crate::error::{Error, Result};
use crate::simplex::{self, Options};
use crate::special::{ln_beta, ln_gamma};

/// Smallest sample accepted by the iterative fitters.
pub const MIN_FIT_SAMPLE: usize = 10;

/// Relative margin by which the Beta window exceeds the sample maximum.
const BETA_WINDOW_MARGIN: f64 = 1e-6;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: DistSpec,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Sample points where the fitted density vanishes.
    pub support_violations: usize,
}

/// Σ ln f(x_i).
pub fn log_likelihood(spec: &DistSpec, sample: &[f64]) -> f64 {
    sample.iter().map(|&x| spec.ln_pdf(x)).sum()
}

fn support_violations(spec: &DistSpec, sample: &[f64]) -> usize {
    sample
        .iter()
        .filter(|&&x| spec.ln_pdf(x) == f64::NEG_INFINITY)
        .count()
}

struct Moments {
    n: f64,
    mean: f64,
    var: f64,
    min: f64,
    max: f64,
}

fn moments(sample: &[f64]) -> Moments {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let (min, max) = sample
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Moments {
        n,
        mean,
        var,
        min,
        max,
    }
}

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::domain("cannot fit an empty sample"));
    }
    if let Some(x) = sample.iter().find(|x| !x.is_finite()) {
        return Err(Error::domain(format!("sample contains non-finite value {x}")));
    }
    Ok(())
}

fn beta_window(m: &Moments) -> f64 {
    if m.max > 0.0 {
        m.max * (1.0 + BETA_WINDOW_MARGIN)
    } else {
        1.0
    }
}

/// Method-of-moments starting point for `family`. Falls back to a simple
/// member of the family when the moment equations have no valid solution.
pub fn moments_init(family: Family, sample: &[f64]) -> Result<DistSpec> {
    check_sample(sample)?;
    let m = moments(sample);
    let mean_pos = if m.mean > 0.0 { m.mean } else { 1.0 };
    let spec = match family {
        Family::Exponential => DistSpec::Exponential { scale: mean_pos },
        Family::Beta => {
            let window = beta_window(&m);
            let mu = m.mean / window;
            let var = m.var / (window * window);
            let common = if var > 0.0 { mu * (1.0 - mu) / var - 1.0 } else { -1.0 };
            if mu > 0.0 && mu < 1.0 && common > 0.0 {
                DistSpec::Beta {
                    alpha: mu * common,
                    beta: (1.0 - mu) * common,
                    window,
                }
            } else {
                DistSpec::Beta {
                    alpha: 1.0,
                    beta: 1.0,
                    window,
                }
            }
        }
        Family::GeneralizedPareto => {
            let fallback = DistSpec::GeneralizedPareto {
                shape: 0.0,
                scale: mean_pos,
            };
            if m.var > 0.0 && m.mean > 0.0 {
                let ratio = m.mean * m.mean / m.var;
                let shape = 0.5 * (1.0 - ratio);
                let scale = 0.5 * m.mean * (1.0 + ratio);
                let candidate = DistSpec::GeneralizedPareto { shape, scale };
                if shape < 0.0 && m.max >= -scale / shape {
                    fallback
                } else {
                    candidate
                }
            } else {
                fallback
            }
        }
        Family::Weibull => {
            if m.var > 0.0 && m.mean > 0.0 {
                let cv = m.var.sqrt() / m.mean;
                let shape = cv.powf(-1.086).clamp(0.05, 50.0);
                let scale = m.mean / ln_gamma(1.0 + 1.0 / shape).exp();
                DistSpec::Weibull { shape, scale }
            } else {
                DistSpec::Weibull {
                    shape: 1.0,
                    scale: mean_pos,
                }
            }
        }
        Family::Gev => {
            let scale = if m.var > 0.0 {
                (6.0 * m.var).sqrt() / std::f64::consts::PI
            } else {
                1.0
            };
            DistSpec::Gev {
                shape: 0.0,
                location: m.mean - EULER_GAMMA * scale,
                scale,
            }
        }
    };
    Ok(spec)
}

/// Fits `family` to `sample` by maximum likelihood.
///
/// Exponential uses its closed form (the sample mean) and accepts any
/// non-empty sample; the other families need at least [`MIN_FIT_SAMPLE`]
/// points. A sample with no spread is reported with `converged = false`.
pub fn fit_mle(family: Family, sample: &[f64]) -> Result<FitResult> {
    check_sample(sample)?;
    if family != Family::Exponential && sample.len() < MIN_FIT_SAMPLE {
        return Err(Error::domain(format!(
            "{} fit needs at least {MIN_FIT_SAMPLE} points (got {})",
            family.tag(),
            sample.len()
        )));
    }
    let m = moments(sample);
    let init = moments_init(family, sample)?;
    let degenerate = m.var == 0.0;

    let (spec, iterations, converged) = if degenerate {
        (init, 0, false)
    } else {
        match family {
            Family::Exponential => {
                if m.mean > 0.0 {
                    (DistSpec::Exponential { scale: m.mean }, 0, m.min >= 0.0)
                } else {
                    (init, 0, false)
                }
            }
            Family::Beta => fit_beta(sample, &m, init),
            Family::GeneralizedPareto => fit_gpd(sample, init),
            Family::Weibull => fit_weibull(sample, init),
            Family::Gev => fit_gev(sample, &m, init),
        }
    };

    let ll = log_likelihood(&spec, sample);
    let ll_init = log_likelihood(&init, sample);
    // The simplex keeps its starting vertex, so only rounding in the
    // re-evaluation could put the optimum below the start.
    let (spec, ll) = if ll_init > ll || ll.is_nan() {
        (init, ll_init)
    } else {
        (spec, ll)
    };
    let violations = support_violations(&spec, sample);
    Ok(FitResult {
        spec,
        log_likelihood: ll,
        converged: converged && ll.is_finite() && violations == 0,
        iterations,
        support_violations: violations,
    })
}

fn run(objective: impl FnMut(&[f64]) -> f64, x0: &[f64], step: &[f64]) -> simplex::Minimum {
    simplex::minimize(objective, x0, step, Options::default())
}

fn fit_beta(sample: &[f64], m: &Moments, init: DistSpec) -> (DistSpec, usize, bool) {
    let DistSpec::Beta {
        alpha,
        beta,
        window,
    } = init
    else {
        unreachable!()
    };
    if m.min < 0.0 || m.max <= 0.0 {
        return (init, 0, false);
    }
    // Sufficient statistics: Σ ln u and Σ ln(1 − u) with u = x / T.
    let tiny = f64::MIN_POSITIVE;
    let (s_lo, s_hi) = sample.iter().fold((0.0, 0.0), |(a, b), &x| {
        let u = x / window;
        (a + u.max(tiny).ln(), b + (-u).ln_1p())
    });
    let n = m.n;
    let ln_t = window.ln();
    let objective = |p: &[f64]| {
        let (a, b) = (p[0].exp(), p[1].exp());
        -((a - 1.0) * s_lo + (b - 1.0) * s_hi - n * ln_beta(a, b) - n * ln_t)
    };
    let min = run(objective, &[alpha.ln(), beta.ln()], &[0.1, 0.1]);
    let spec = DistSpec::Beta {
        alpha: min.point[0].exp(),
        beta: min.point[1].exp(),
        window,
    };
    (spec, min.iterations, min.converged)
}

fn fit_gpd(sample: &[f64], init: DistSpec) -> (DistSpec, usize, bool) {
    let DistSpec::GeneralizedPareto { shape, scale } = init else {
        unreachable!()
    };
    if sample.iter().any(|&x| x < 0.0) {
        return (init, 0, false);
    }
    let n = sample.len() as f64;
    let sum: f64 = sample.iter().sum();
    let objective = |p: &[f64]| {
        let (xi, ln_scale) = (p[0], p[1]);
        let inv_scale = (-ln_scale).exp();
        if xi == 0.0 {
            return n * ln_scale + sum * inv_scale;
        }
        let c = xi * inv_scale;
        let mut acc = 0.0;
        for &x in sample {
            let z = c * x;
            if z <= -1.0 {
                return f64::INFINITY;
            }
            acc += z.ln_1p();
        }
        n * ln_scale + (1.0 + 1.0 / xi) * acc
    };
    let min = run(objective, &[shape, scale.ln()], &[0.1, 0.1]);
    let spec = DistSpec::GeneralizedPareto {
        shape: min.point[0],
        scale: min.point[1].exp(),
    };
    (spec, min.iterations, min.converged)
}

fn fit_weibull(sample: &[f64], init: DistSpec) -> (DistSpec, usize, bool) {
    let DistSpec::Weibull { shape, scale } = init else {
        unreachable!()
    };
    if sample.iter().any(|&x| x <= 0.0) {
        return (init, 0, false);
    }
    let n = sample.len() as f64;
    let logs: Vec<f64> = sample.iter().map(|x| x.ln()).collect();
    let sum_logs: f64 = logs.iter().sum();
    let objective = |p: &[f64]| {
        let (ln_k, ln_scale) = (p[0], p[1]);
        let k = ln_k.exp();
        let power: f64 = logs.iter().map(|&l| (k * (l - ln_scale)).exp()).sum();
        -(n * ln_k - n * k * ln_scale + (k - 1.0) * sum_logs - power)
    };
    let min = run(objective, &[shape.ln(), scale.ln()], &[0.1, 0.1]);
    let spec = DistSpec::Weibull {
        shape: min.point[0].exp(),
        scale: min.point[1].exp(),
    };
    (spec, min.iterations, min.converged)
}

fn fit_gev(sample: &[f64], m: &Moments, init: DistSpec) -> (DistSpec, usize, bool) {
    // Search on standardized data; location and scale map back linearly.
    let centre = m.mean;
    let spread = m.var.sqrt();
    let z: Vec<f64> = sample.iter().map(|x| (x - centre) / spread).collect();
    let DistSpec::Gev {
        shape,
        location,
        scale,
    } = init
    else {
        unreachable!()
    };
    let n = z.len() as f64;
    let objective = |p: &[f64]| {
        let (xi, mu, ln_sigma) = (p[0], p[1], p[2]);
        // The likelihood is unbounded for ξ ≤ −1.
        if xi <= -1.0 {
            return f64::INFINITY;
        }
        let inv_sigma = (-ln_sigma).exp();
        let mut acc = 0.0;
        if xi == 0.0 {
            for &x in &z {
                let t = (x - mu) * inv_sigma;
                acc += t + (-t).exp();
            }
        } else {
            for &x in &z {
                let arg = xi * (x - mu) * inv_sigma;
                if arg <= -1.0 {
                    return f64::INFINITY;
                }
                let lt = arg.ln_1p();
                acc += (1.0 + 1.0 / xi) * lt + (-lt / xi).exp();
            }
        }
        n * ln_sigma + acc
    };
    let x0 = [shape, (location - centre) / spread, (scale / spread).ln()];
    let min = run(objective, &x0, &[0.1, 0.1, 0.1]);
    let spec = DistSpec::Gev {
        shape: min.point[0],
        location: centre + spread * min.point[1],
        scale: spread * min.point[2].exp(),
    };
    (spec, min.iterations, min.converged)
}
