//! Candidate inter-arrival distributions: density, CDF, quantile, sampling
//! and maximum-likelihood fitting.

mod fit;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{beta_inc, ln_beta};

pub use fit::{fit_mle, log_likelihood, moments_init, FitResult, MIN_FIT_SAMPLE};

/// Distribution family without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Exponential,
    Beta,
    GeneralizedPareto,
    Weibull,
    #[serde(rename = "GEV")]
    Gev,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::GeneralizedPareto,
        Family::Beta,
        Family::Gev,
        Family::Weibull,
        Family::Exponential,
    ];

    /// Stable identifier used in JSON documents and configs.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Exponential => "Exponential",
            Family::Beta => "Beta",
            Family::GeneralizedPareto => "GeneralizedPareto",
            Family::Weibull => "Weibull",
            Family::Gev => "GEV",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::GeneralizedPareto => "Gen. Pareto",
            other => other.tag(),
        }
    }

    /// Number of parameters estimated by `fit_mle`. The Beta window is fixed
    /// from the sample maximum and not counted.
    pub fn fitted_param_count(self) -> usize {
        match self {
            Family::Exponential => 1,
            Family::Beta | Family::GeneralizedPareto | Family::Weibull => 2,
            Family::Gev => 3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "exponential" | "exp" => Ok(Family::Exponential),
            "beta" => Ok(Family::Beta),
            "generalizedpareto" | "genpareto" | "gpd" => Ok(Family::GeneralizedPareto),
            "weibull" => Ok(Family::Weibull),
            "gev" | "generalizedextremevalue" => Ok(Family::Gev),
            _ => Err(Error::domain(format!(
                "unknown distribution family `{s}` (valid: Exponential, Beta, GeneralizedPareto, Weibull, GEV)"
            ))),
        }
    }
}

/// A fully parameterized distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum DistSpec {
    Exponential { scale: f64 },
    /// Beta law stretched over `[0, window]`.
    Beta { alpha: f64, beta: f64, window: f64 },
    /// Generalized Pareto with location 0.
    GeneralizedPareto { shape: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    Gev { shape: f64, location: f64, scale: f64 },
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    family: String,
    params: BTreeMap<String, f64>,
}

impl From<DistSpec> for RawSpec {
    fn from(spec: DistSpec) -> Self {
        RawSpec {
            family: spec.family().tag().to_string(),
            params: spec
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }
}

impl TryFrom<RawSpec> for DistSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let family: Family = raw.family.parse()?;
        let get = |name: &str| {
            raw.params
                .get(name)
                .copied()
                .ok_or_else(|| Error::Format(format!("{} is missing parameter `{name}`", family.tag())))
        };
        let spec = match family {
            Family::Exponential => DistSpec::Exponential { scale: get("scale")? },
            Family::Beta => DistSpec::Beta {
                alpha: get("alpha")?,
                beta: get("beta")?,
                window: get("window")?,
            },
            Family::GeneralizedPareto => DistSpec::GeneralizedPareto {
                shape: get("shape")?,
                scale: get("scale")?,
            },
            Family::Weibull => DistSpec::Weibull {
                shape: get("shape")?,
                scale: get("scale")?,
            },
            Family::Gev => DistSpec::Gev {
                shape: get("shape")?,
                location: get("location")?,
                scale: get("scale")?,
            },
        };
        let expected = spec.params().len();
        if raw.params.len() != expected {
            return Err(Error::Format(format!(
                "{} takes {expected} parameters, got {}",
                family.tag(),
                raw.params.len()
            )));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite (got {v})")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite (got {v})")))
    }
}

impl DistSpec {
    pub fn family(&self) -> Family {
        match self {
            DistSpec::Exponential { .. } => Family::Exponential,
            DistSpec::Beta { .. } => Family::Beta,
            DistSpec::GeneralizedPareto { .. } => Family::GeneralizedPareto,
            DistSpec::Weibull { .. } => Family::Weibull,
            DistSpec::Gev { .. } => Family::Gev,
        }
    }

    /// Named parameters in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            DistSpec::Exponential { scale } => vec![("scale", scale)],
            DistSpec::Beta {
                alpha,
                beta,
                window,
            } => vec![("alpha", alpha), ("beta", beta), ("window", window)],
            DistSpec::GeneralizedPareto { shape, scale } | DistSpec::Weibull { shape, scale } => {
                vec![("shape", shape), ("scale", scale)]
            }
            DistSpec::Gev {
                shape,
                location,
                scale,
            } => vec![("shape", shape), ("location", location), ("scale", scale)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Exponential { scale } => positive("scale", scale),
            DistSpec::Beta {
                alpha,
                beta,
                window,
            } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("window", window)
            }
            DistSpec::GeneralizedPareto { shape, scale } => {
                finite("shape", shape)?;
                positive("scale", scale)
            }
            DistSpec::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            DistSpec::Gev {
                shape,
                location,
                scale,
            } => {
                finite("shape", shape)?;
                finite("location", location)?;
                positive("scale", scale)
            }
        }
    }

    /// Closed support interval `[lo, hi]` (bounds may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistSpec::Exponential { .. } | DistSpec::Weibull { .. } => (0.0, f64::INFINITY),
            DistSpec::Beta { window, .. } => (0.0, window),
            DistSpec::GeneralizedPareto { shape, scale } => {
                if shape < 0.0 {
                    (0.0, -scale / shape)
                } else {
                    (0.0, f64::INFINITY)
                }
            }
            DistSpec::Gev {
                shape,
                location,
                scale,
            } => {
                if shape > 0.0 {
                    (location - scale / shape, f64::INFINITY)
                } else if shape < 0.0 {
                    (f64::NEG_INFINITY, location - scale / shape)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
        }
    }

    /// Natural log of the density; `-∞` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        match *self {
            DistSpec::Exponential { scale } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -scale.ln() - x / scale
                }
            }
            DistSpec::Beta {
                alpha,
                beta,
                window,
            } => {
                if !(0.0..=window).contains(&x) {
                    return f64::NEG_INFINITY;
                }
                let u = x / window;
                xlogy(alpha - 1.0, u) + xlogy(beta - 1.0, 1.0 - u) - ln_beta(alpha, beta) - window.ln()
            }
            DistSpec::GeneralizedPareto { shape, scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                if shape == 0.0 {
                    return -scale.ln() - x / scale;
                }
                let z = shape * x / scale;
                if z <= -1.0 {
                    return f64::NEG_INFINITY;
                }
                -scale.ln() - (1.0 + 1.0 / shape) * z.ln_1p()
            }
            DistSpec::Weibull { shape, scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let r = x / scale;
                (shape / scale).ln() + xlogy(shape - 1.0, r) - r.powf(shape)
            }
            DistSpec::Gev {
                shape,
                location,
                scale,
            } => {
                let z = (x - location) / scale;
                if shape == 0.0 {
                    return -scale.ln() - z - (-z).exp();
                }
                let arg = shape * z;
                if arg <= -1.0 {
                    return f64::NEG_INFINITY;
                }
                let lt = arg.ln_1p();
                -scale.ln() - (1.0 + 1.0 / shape) * lt - (-lt / shape).exp()
            }
        }
    }

    /// Density at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            DistSpec::Exponential { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / scale).exp_m1()
                }
            }
            DistSpec::Beta {
                alpha,
                beta,
                window,
            } => {
                if x <= 0.0 {
                    0.0
                } else if x >= window {
                    1.0
                } else {
                    // Parameters were validated on construction.
                    beta_inc(alpha, beta, x / window).unwrap_or(f64::NAN)
                }
            }
            DistSpec::GeneralizedPareto { shape, scale } => {
                if x <= 0.0 {
                    return 0.0;
                }
                if shape == 0.0 {
                    return -(-x / scale).exp_m1();
                }
                let z = shape * x / scale;
                if z <= -1.0 {
                    return 1.0;
                }
                -(-z.ln_1p() / shape).exp_m1()
            }
            DistSpec::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            DistSpec::Gev {
                shape,
                location,
                scale,
            } => {
                let z = (x - location) / scale;
                if shape == 0.0 {
                    return (-(-z).exp()).exp();
                }
                let arg = shape * z;
                if arg <= -1.0 {
                    return if shape > 0.0 { 0.0 } else { 1.0 };
                }
                (-(-arg.ln_1p() / shape).exp()).exp()
            }
        }
    }

    /// Inverse CDF for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile needs 0 < p < 1 (got {p})")));
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        // −ln(1 − p), accurate for small p.
        let tail = -(-p).ln_1p();
        match *self {
            DistSpec::Exponential { scale } => scale * tail,
            DistSpec::Beta {
                alpha,
                beta,
                window,
            } => window * beta_quantile(alpha, beta, p),
            DistSpec::GeneralizedPareto { shape, scale } => {
                if shape == 0.0 {
                    scale * tail
                } else {
                    scale * (shape * tail).exp_m1() / shape
                }
            }
            DistSpec::Weibull { shape, scale } => scale * tail.powf(1.0 / shape),
            DistSpec::Gev {
                shape,
                location,
                scale,
            } => {
                let y = -p.ln();
                if shape == 0.0 {
                    location - scale * y.ln()
                } else {
                    location + scale * (-shape * y.ln()).exp_m1() / shape
                }
            }
        }
    }

    /// `n` independent draws by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile_unchecked(u)
            })
            .collect()
    }

    /// Mean, when finite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            DistSpec::Exponential { scale } => Some(scale),
            DistSpec::Beta {
                alpha,
                beta,
                window,
            } => Some(window * alpha / (alpha + beta)),
            DistSpec::GeneralizedPareto { shape, scale } => (shape < 1.0).then(|| scale / (1.0 - shape)),
            DistSpec::Weibull { shape, scale } => {
                Some(scale * crate::special::ln_gamma(1.0 + 1.0 / shape).exp())
            }
            DistSpec::Gev { .. } => None,
        }
    }
}

/// `a·ln(y)` with the convention `0·ln(0) = 0`.
fn xlogy(a: f64, y: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * y.ln()
    }
}

/// Quantile of the standard Beta law by safeguarded Newton iteration.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let cdf = |u: f64| beta_inc(a, b, u).unwrap_or(f64::NAN);
    let ln_norm = ln_beta(a, b);
    let pdf = |u: f64| (xlogy(a - 1.0, u) + xlogy(b - 1.0, 1.0 - u) - ln_norm).exp();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = (a / (a + b)).clamp(1e-6, 1.0 - 1e-6);
    for _ in 0..200 {
        let f = cdf(x) - p;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = pdf(x);
        let newton = x - f / d;
        let next = if d > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests;
