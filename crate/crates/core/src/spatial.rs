//! Spatial Poisson fields of devices and event epicenters, distance-based
//! influence functions, and the resulting per-slot activation probability.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Euclidean distance.
pub fn distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Homogeneous Poisson point process restricted to a disk centred at the
/// origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonField {
    /// Points per square metre.
    pub density: f64,
    /// Disk radius in metres.
    pub region_radius: f64,
}

impl PoissonField {
    pub fn new(density: f64, region_radius: f64) -> Result<Self> {
        let field = Self {
            density,
            region_radius,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::domain(format!("field density must be positive (got {})", self.density)));
        }
        if !(self.region_radius > 0.0 && self.region_radius.is_finite()) {
            return Err(Error::domain(format!(
                "region radius must be positive (got {})",
                self.region_radius
            )));
        }
        Ok(())
    }

    /// Expected number of points in the disk.
    pub fn expected_count(&self) -> f64 {
        self.density * PI * self.region_radius * self.region_radius
    }
}

/// Draws one realization of the field.
pub fn sample_ppp<R: Rng + ?Sized>(field: &PoissonField, rng: &mut R) -> Result<Vec<Point2D>> {
    field.validate()?;
    let mean = field.expected_count();
    let count = Poisson::new(mean)
        .map_err(|e| Error::Numeric(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok(sample_disk(field.region_radius, count, rng))
}

/// `count` points uniform on the disk of radius `radius`.
pub fn sample_disk<R: Rng + ?Sized>(radius: f64, count: usize, rng: &mut R) -> Vec<Point2D> {
    (0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            Point2D::new(r * phi.cos(), r * phi.sin())
        })
        .collect()
}

/// Writes points as `x<TAB>y` lines.
pub fn write_points_tsv<W: Write>(points: &[Point2D], mut out: W) -> std::io::Result<()> {
    for p in points {
        writeln!(out, "{}\t{}", p.x, p.y)?;
    }
    Ok(())
}

/// Non-increasing map from distance to trigger probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "scale")]
pub enum InfluenceFunction {
    /// 1 within `radius`, 0 beyond.
    HardDisk(f64),
    /// exp(−d / scale).
    ExponentialDecay(f64),
    /// exp(−d² / (2·scale²)).
    GaussianDecay(f64),
}

impl InfluenceFunction {
    pub fn scale(&self) -> f64 {
        match *self {
            InfluenceFunction::HardDisk(s)
            | InfluenceFunction::ExponentialDecay(s)
            | InfluenceFunction::GaussianDecay(s) => s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.scale();
        if s > 0.0 && s.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("influence scale must be positive (got {s})")))
        }
    }

    fn eval_unchecked(&self, d: f64) -> f64 {
        match *self {
            InfluenceFunction::HardDisk(r) => {
                if d <= r {
                    1.0
                } else {
                    0.0
                }
            }
            InfluenceFunction::ExponentialDecay(s) => (-d / s).exp(),
            InfluenceFunction::GaussianDecay(s) => (-d * d / (2.0 * s * s)).exp(),
        }
    }

    /// Points where the function is not smooth.
    fn breakpoint(&self) -> Option<f64> {
        match *self {
            InfluenceFunction::HardDisk(r) => Some(r),
            _ => None,
        }
    }
}

/// Influence of an epicenter at distance `d`.
pub fn influence(f: &InfluenceFunction, d: f64) -> Result<f64> {
    f.validate()?;
    if d.is_nan() || d < 0.0 {
        return Err(Error::domain(format!("distance must be non-negative (got {d})")));
    }
    Ok(f.eval_unchecked(d))
}

/// Integrand convention for the activation probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AreaElement {
    /// 1 − exp(−2π·λ_T·∫ p(d) dd), the literal one-dimensional form.
    #[default]
    LinearAsWritten,
    /// 1 − exp(−λ_T·∫ 2π·d·p(d) dd), the planar void-probability form.
    RadialCorrected,
}

/// How the influence integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integration {
    /// Closed forms for the built-in kinds.
    #[default]
    Analytic,
    /// Adaptive Gauss–Kronrod quadrature.
    Quadrature,
}

const QUAD_REL_TOL: f64 = 1e-9;

/// Value of the influence integral appearing in the exponent, including the
/// 2π factor: 2π·∫p(d)dd or ∫2π·d·p(d)dd depending on `elem`.
pub fn influence_integral(
    f: &InfluenceFunction,
    elem: AreaElement,
    method: Integration,
) -> Result<f64> {
    f.validate()?;
    let s = f.scale();
    match method {
        Integration::Analytic => Ok(match (elem, f) {
            (AreaElement::LinearAsWritten, InfluenceFunction::HardDisk(_)) => 2.0 * PI * s,
            (AreaElement::LinearAsWritten, InfluenceFunction::ExponentialDecay(_)) => 2.0 * PI * s,
            (AreaElement::LinearAsWritten, InfluenceFunction::GaussianDecay(_)) => {
                2.0 * PI * s * (PI / 2.0).sqrt()
            }
            (AreaElement::RadialCorrected, InfluenceFunction::HardDisk(_)) => PI * s * s,
            (AreaElement::RadialCorrected, _) => 2.0 * PI * s * s,
        }),
        Integration::Quadrature => {
            let integrand = |d: f64| match elem {
                AreaElement::LinearAsWritten => 2.0 * PI * f.eval_unchecked(d),
                AreaElement::RadialCorrected => 2.0 * PI * d * f.eval_unchecked(d),
            };
            match f.breakpoint() {
                Some(b) => Ok(quad::integrate(integrand, 0.0, b, QUAD_REL_TOL)?
                    + quad::integrate_to_infinity(integrand, b, QUAD_REL_TOL)?),
                None => quad::integrate_to_infinity(integrand, 0.0, QUAD_REL_TOL),
            }
        }
    }
}

/// Per-slot activation probability of a device under event density `lambda_t`.
pub fn activation_probability(
    lambda_t: f64,
    f: &InfluenceFunction,
    elem: AreaElement,
) -> Result<f64> {
    activation_probability_with(lambda_t, f, elem, Integration::Analytic)
}

pub fn activation_probability_with(
    lambda_t: f64,
    f: &InfluenceFunction,
    elem: AreaElement,
    method: Integration,
) -> Result<f64> {
    if !(lambda_t > 0.0 && lambda_t.is_finite()) {
        return Err(Error::domain(format!("lambda_t must be positive (got {lambda_t})")));
    }
    let integral = influence_integral(f, elem, method)?;
    let p = -(-lambda_t * integral).exp_m1();
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Numeric(format!("activation probability is not finite ({p})")))
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn point() -> impl Strategy<Value = Point2D> {
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(x, y)| Point2D::new(x, y))
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in point(), b in point(), c in point()) {
            prop_assert_eq!(distance(a, b), distance(b, a));
            prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
        }

        #[test]
        fn influence_non_increasing(scale in 0.1f64..100.0, d1 in 0.0f64..500.0, d2 in 0.0f64..500.0, kind in 0usize..3) {
            let f = [
                InfluenceFunction::HardDisk(scale),
                InfluenceFunction::ExponentialDecay(scale),
                InfluenceFunction::GaussianDecay(scale),
            ][kind];
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let vn = influence(&f, near).unwrap();
            let vf = influence(&f, far).unwrap();
            prop_assert!((0.0..=1.0).contains(&vn) && (0.0..=1.0).contains(&vf));
            prop_assert!(vf <= vn);
        }
    }
}
