use super::*;
use crate::quad;
use crate::rng::stream_rng;
use rand::Rng;

fn integrate_pdf(spec: &DistSpec) -> f64 {
    let (lo, hi) = spec.support();
    let f = |x: f64| spec.pdf(x);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => quad::integrate(f, lo, hi, 1e-10).unwrap(),
        (true, false) => quad::integrate_to_infinity(f, lo, 1e-10).unwrap(),
        (false, true) => quad::integrate_to_infinity(|x| f(2.0 * hi - x), hi, 1e-10).unwrap(),
        (false, false) => quad::integrate_real_line(f, spec.quantile(0.5).unwrap(), 1e-10).unwrap(),
    }
}

fn random_spec<R: Rng>(family: Family, rng: &mut R) -> DistSpec {
    match family {
        Family::Exponential => DistSpec::Exponential {
            scale: rng.random_range(0.1..10.0),
        },
        Family::Beta => DistSpec::Beta {
            alpha: rng.random_range(0.6..5.0),
            beta: rng.random_range(0.6..5.0),
            window: rng.random_range(0.5..100.0),
        },
        Family::GeneralizedPareto => DistSpec::GeneralizedPareto {
            shape: rng.random_range(-0.4..0.8),
            scale: rng.random_range(0.2..5.0),
        },
        Family::Weibull => DistSpec::Weibull {
            shape: rng.random_range(0.6..4.0),
            scale: rng.random_range(0.2..5.0),
        },
        Family::Gev => DistSpec::Gev {
            shape: rng.random_range(-0.4..0.6),
            location: rng.random_range(-5.0..5.0),
            scale: rng.random_range(0.2..5.0),
        },
    }
}

#[test]
fn pdf_examples() {
    let gpd0 = DistSpec::GeneralizedPareto { shape: 0.0, scale: 2.0 };
    assert_eq!(gpd0.pdf(0.0), 0.5);
    let gpd = DistSpec::GeneralizedPareto { shape: 0.2, scale: 1.0 };
    assert!((gpd.pdf(1.0) - 1.2f64.powi(-6)).abs() < 1e-14);
    assert!((gpd.pdf(1.0) - 0.3349).abs() < 1e-4);
    let uniform = DistSpec::Beta { alpha: 1.0, beta: 1.0, window: 10.0 };
    assert!((uniform.pdf(3.0) - 0.1).abs() < 1e-14);
    let b22 = DistSpec::Beta { alpha: 2.0, beta: 2.0, window: 1.0 };
    assert!((b22.pdf(0.5) - 1.5).abs() < 1e-13);
    assert_eq!(b22.pdf(-0.1), 0.0);
    assert_eq!(b22.pdf(1.1), 0.0);
}

#[test]
fn cdf_examples() {
    let e = DistSpec::Exponential { scale: 1.0 };
    assert!((e.cdf(2f64.ln()) - 0.5).abs() < 1e-15);
    let gpd = DistSpec::GeneralizedPareto { shape: 0.2, scale: 1.0 };
    assert!((gpd.cdf(1e12) - 1.0).abs() < 1e-9);
    let mut rng = stream_rng(1, 0);
    for family in Family::ALL {
        let spec = random_spec(family, &mut rng);
        let (lo, _) = spec.support();
        if lo.is_finite() {
            assert_eq!(spec.cdf(lo - 1.0), 0.0, "{spec:?}");
        }
        assert!(spec.cdf(1e300) > 1.0 - 1e-12);
    }
}

#[test]
fn quantile_examples() {
    let e = DistSpec::Exponential { scale: 1.0 };
    assert!((e.quantile(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
    let u = DistSpec::Beta { alpha: 1.0, beta: 1.0, window: 1.0 };
    assert!((u.quantile(0.25).unwrap() - 0.25).abs() < 1e-12);
    assert!(e.quantile(0.0).is_err());
    assert!(e.quantile(1.0).is_err());
    assert!(e.quantile(f64::NAN).is_err());
}

#[test]
fn quantile_round_trip() {
    let mut rng = stream_rng(2, 0);
    for family in Family::ALL {
        for _ in 0..5 {
            let spec = random_spec(family, &mut rng);
            for _ in 0..200 {
                let p: f64 = rng.random_range(1e-6..1.0 - 1e-6);
                let x = spec.quantile(p).unwrap();
                assert!((spec.cdf(x) - p).abs() < 1e-10, "{spec:?} p={p} x={x}");
            }
        }
    }
}

#[test]
fn pdfs_integrate_to_one() {
    let mut rng = stream_rng(3, 0);
    for family in Family::ALL {
        for _ in 0..20 {
            let spec = random_spec(family, &mut rng);
            let total = integrate_pdf(&spec);
            assert!((total - 1.0).abs() < 1e-6, "{spec:?} integrates to {total}");
        }
    }
}

#[test]
fn gpd_small_shape_approaches_exponential_branch() {
    let tiny = DistSpec::GeneralizedPareto { shape: 1e-8, scale: 1.7 };
    let zero = DistSpec::GeneralizedPareto { shape: 0.0, scale: 1.7 };
    for i in 0..=400 {
        let x = i as f64 * 0.05;
        assert!((tiny.pdf(x) - zero.pdf(x)).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn cdfs_are_monotone() {
    let mut rng = stream_rng(4, 0);
    for family in Family::ALL {
        for _ in 0..10 {
            let spec = random_spec(family, &mut rng);
            let lo = spec.quantile(1e-6).unwrap() - 1.0;
            let hi = spec.quantile(1.0 - 1e-6).unwrap() + 1.0;
            let mut prev = 0.0;
            for i in 0..1000 {
                let x = lo + (hi - lo) * i as f64 / 999.0;
                let c = spec.cdf(x);
                assert!(c >= prev && (0.0..=1.0).contains(&c), "{spec:?} at {x}");
                prev = c;
            }
        }
    }
}

#[test]
fn sampling() {
    let gpd = DistSpec::GeneralizedPareto { shape: 0.3, scale: 1.0 };
    let mut rng = stream_rng(5, 0);
    assert!(gpd.sample(10_000, &mut rng).iter().all(|&x| x >= 0.0));

    let e = DistSpec::Exponential { scale: 2.0 };
    let draws = e.sample(1_000_000, &mut stream_rng(6, 0));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((mean - 2.0).abs() < 0.02, "mean {mean}");

    let a = e.sample(100, &mut stream_rng(7, 1));
    let b = e.sample(100, &mut stream_rng(7, 1));
    assert_eq!(a, b);
}

#[test]
fn json_shape() {
    let spec = DistSpec::Gev { shape: 0.1, location: -2.0, scale: 3.0 };
    let json = serde_json::to_string(&spec).unwrap();
    assert_eq!(
        json,
        r#"{"family":"GEV","params":{"location":-2.0,"scale":3.0,"shape":0.1}}"#
    );
    let back: DistSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);

    let gpd: DistSpec =
        serde_json::from_str(r#"{"family":"GeneralizedPareto","params":{"shape":0.2,"scale":1.0}}"#).unwrap();
    assert_eq!(gpd, DistSpec::GeneralizedPareto { shape: 0.2, scale: 1.0 });
    assert!(serde_json::from_str::<DistSpec>(r#"{"family":"Beta","params":{"alpha":1.0}}"#).is_err());
    assert!(serde_json::from_str::<DistSpec>(r#"{"family":"Weibull","params":{"shape":-1.0,"scale":1.0}}"#).is_err());
    assert!(serde_json::from_str::<DistSpec>(r#"{"family":"Cauchy","params":{}}"#).is_err());
}

#[test]
fn family_names() {
    for family in Family::ALL {
        assert_eq!(family.tag().parse::<Family>().unwrap(), family);
    }
    assert_eq!("gpd".parse::<Family>().unwrap(), Family::GeneralizedPareto);
    assert_eq!(Family::GeneralizedPareto.display_name(), "Gen. Pareto");
    assert!("johnson_sb".parse::<Family>().is_err());
}

#[test]
fn exponential_fit_is_the_mean() {
    let fit = fit_mle(Family::Exponential, &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(fit.spec, DistSpec::Exponential { scale: 2.0 });
    assert!(fit.converged);
    let expected_ll = -3.0 * 2f64.ln() - 3.0;
    assert!((fit.log_likelihood - expected_ll).abs() < 1e-12);
}

#[test]
fn small_and_degenerate_samples() {
    assert!(fit_mle(Family::GeneralizedPareto, &[1.0, 2.0, 3.0]).is_err());
    assert!(fit_mle(Family::Weibull, &[]).is_err());
    assert!(fit_mle(Family::Gev, &[1.0; 12].iter().chain(&[f64::NAN]).copied().collect::<Vec<_>>()).is_err());
    for family in Family::ALL {
        let fit = fit_mle(family, &[4.0; 20]).unwrap();
        assert!(!fit.converged, "{family:?}");
    }
}

#[test]
fn gpd_self_fit() {
    let truth = DistSpec::GeneralizedPareto { shape: 0.2, scale: 1.0 };
    let sample = truth.sample(100_000, &mut stream_rng(8, 0));
    let fit = fit_mle(Family::GeneralizedPareto, &sample).unwrap();
    assert!(fit.converged, "{fit:?}");
    let DistSpec::GeneralizedPareto { shape, scale } = fit.spec else { panic!() };
    assert!((shape - 0.2).abs() < 0.05 && (scale - 1.0).abs() < 0.05, "{fit:?}");
    assert_eq!(fit.support_violations, 0);
}

#[test]
fn beta_self_fit_on_uniform() {
    let u = DistSpec::Beta { alpha: 1.0, beta: 1.0, window: 1.0 };
    let sample = u.sample(100_000, &mut stream_rng(9, 0));
    let fit = fit_mle(Family::Beta, &sample).unwrap();
    assert!(fit.converged, "{fit:?}");
    let DistSpec::Beta { alpha, beta, window } = fit.spec else { panic!() };
    let max = sample.iter().copied().fold(0.0, f64::max);
    assert_eq!(window, max * (1.0 + 1e-6));
    assert!((alpha - 1.0).abs() < 0.05 && (beta - 1.0).abs() < 0.05, "{fit:?}");
}

#[test]
fn weibull_and_gev_self_fit() {
    let w = DistSpec::Weibull { shape: 1.7, scale: 3.0 };
    let fit = fit_mle(Family::Weibull, &w.sample(20_000, &mut stream_rng(10, 0))).unwrap();
    assert!(fit.converged);
    let DistSpec::Weibull { shape, scale } = fit.spec else { panic!() };
    assert!((shape - 1.7).abs() < 0.05 && (scale - 3.0).abs() < 0.08, "{fit:?}");

    let g = DistSpec::Gev { shape: 0.15, location: 10.0, scale: 2.0 };
    let fit = fit_mle(Family::Gev, &g.sample(20_000, &mut stream_rng(11, 0))).unwrap();
    assert!(fit.converged, "{fit:?}");
    let DistSpec::Gev { shape, location, scale } = fit.spec else { panic!() };
    assert!((shape - 0.15).abs() < 0.03, "{fit:?}");
    assert!((location - 10.0).abs() < 0.08 && (scale - 2.0).abs() < 0.08, "{fit:?}");
}

#[test]
fn fit_never_degrades_the_starting_point() {
    let mut rng = stream_rng(12, 0);
    for family in Family::ALL {
        for gen in Family::ALL {
            let truth = random_spec(gen, &mut rng);
            let sample = truth.sample(500, &mut rng);
            let init = moments_init(family, &sample).unwrap();
            let fit = fit_mle(family, &sample).unwrap();
            let ll_init = log_likelihood(&init, &sample);
            assert!(
                fit.log_likelihood >= ll_init || ll_init == f64::NEG_INFINITY,
                "{family:?} on {truth:?}: {} < {ll_init}",
                fit.log_likelihood
            );
        }
    }
}

#[test]
fn out_of_support_sample_is_flagged() {
    let mut sample: Vec<f64> = (1..=30).map(|i| i as f64).collect();
    sample[0] = -5.0;
    for family in [Family::GeneralizedPareto, Family::Weibull, Family::Exponential, Family::Beta] {
        let fit = fit_mle(family, &sample).unwrap();
        assert!(!fit.converged, "{family:?}");
        assert!(fit.support_violations >= 1);
    }
}
