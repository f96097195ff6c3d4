//! Statistical properties that span modules: point-process counts, burst
//! sojourns and the stationary behaviour of the device chain.

use mtc_core::gof::chi_squared_counts;
use mtc_core::rng::device_rng;
use mtc_core::spatial::{sample_ppp, PoissonField};
use mtc_core::special::ln_gamma;
use mtc_core::traffic::{sample_burst_duration, simulate_chain};
use mtc_core::MarkovParams;

fn poisson_pmf(k: u64, mu: f64) -> f64 {
    (k as f64 * mu.ln() - mu - ln_gamma(k as f64 + 1.0)).exp()
}

#[test]
fn ppp_counts_are_poisson() {
    let field = PoissonField::new(0.001, 100.0).unwrap();
    let mu = field.expected_count();
    assert!((mu - 0.001 * std::f64::consts::PI * 1e4).abs() < 1e-12);
    let (lo, hi) = (15u64, 50u64);
    let mut observed = vec![0u64; (hi - lo + 1) as usize];
    let draws = 10_000;
    let mut rng = device_rng(17, 0);
    let mut total = 0usize;
    for _ in 0..draws {
        let pts = sample_ppp(&field, &mut rng).unwrap();
        assert!(pts.iter().all(|p| p.norm() <= 100.0));
        total += pts.len();
        observed[(pts.len() as u64).clamp(lo, hi) as usize - lo as usize] += 1;
    }
    let below: f64 = (0..=lo).map(|k| poisson_pmf(k, mu)).sum();
    let mut expected: Vec<f64> = (lo..=hi).map(|k| poisson_pmf(k, mu)).collect();
    expected[0] = below;
    let inner: f64 = expected[..expected.len() - 1].iter().sum();
    *expected.last_mut().unwrap() = 1.0 - inner;
    let expected: Vec<f64> = expected.iter().map(|p| p * draws as f64).collect();
    let chi = chi_squared_counts(&observed, &expected, 0).unwrap();
    assert!(chi.pass, "{chi:?}");
    let mean = total as f64 / draws as f64;
    assert!((mean - mu).abs() < 3.0 * (mu / draws as f64).sqrt() * 1.5);
}

#[test]
fn burst_lengths_follow_the_geometric_law() {
    for q in [0.1_f64, 0.5, 0.9] {
        let n = 100_000;
        let mut rng = device_rng((q * 10.0) as u64, 3);
        let kmax = ((5.0 / n as f64).ln() / q.ln()).floor() as usize;
        let mut observed = vec![0u64; kmax + 1];
        for _ in 0..n {
            let k = sample_burst_duration(q, &mut rng).unwrap();
            observed[(k as usize).min(kmax)] += 1;
        }
        let chi = chi_squared_counts(&observed, &geometric_expected(n, q, kmax), 0).unwrap();
        assert!(chi.pass, "q = {q}: {chi:?}");
    }
}

/// Expected counts of k = 0..kmax−1 under (1 − q)·q^k, tail mass in the last bin.
fn geometric_expected(n: usize, q: f64, kmax: usize) -> Vec<f64> {
    let mut expected: Vec<f64> = (0..kmax).map(|k| n as f64 * (1.0 - q) * q.powi(k as i32)).collect();
    expected.push(n as f64 * q.powi(kmax as i32));
    expected
}

#[test]
fn chain_sojourns_are_one_plus_geometric() {
    for q in [0.1_f64, 0.5, 0.9] {
        let params = MarkovParams::new(0.3, q, 1.0).unwrap();
        let mut rng = device_rng(29, (q * 10.0) as usize);
        let mut sojourns = Vec::new();
        while sojourns.len() < 100_000 {
            let t = simulate_chain("d", &params, 200_000, &mut rng).unwrap();
            let end = t.horizon().index();
            // The last burst may be cut by the horizon.
            sojourns.extend(t.transmissions().iter().filter(|tx| tx.end() < end).map(|tx| tx.duration));
        }
        sojourns.truncate(100_000);
        let n = sojourns.len();
        let kmax = ((5.0 / n as f64).ln() / q.ln()).floor() as usize;
        let mut observed = vec![0u64; kmax + 1];
        for d in sojourns {
            assert!(d >= 1);
            observed[((d - 1) as usize).min(kmax)] += 1;
        }
        let chi = chi_squared_counts(&observed, &geometric_expected(n, q, kmax), 0).unwrap();
        assert!(chi.pass, "q = {q}: {chi:?}");
    }
}

#[test]
fn chain_active_fraction_matches_stationary_law() {
    for (p, q) in [(0.1, 0.5), (0.02, 0.9), (0.5, 0.0)] {
        let params = MarkovParams::new(p, q, 1.0).unwrap();
        let horizon = 2_000_000;
        let t = simulate_chain("d", &params, horizon, &mut device_rng(5, 0)).unwrap();
        let frac = t.active_slots() as f64 / horizon as f64;
        let want = params.stationary_active_fraction();
        assert!((frac - want).abs() < 0.01 * want + 2e-3, "p={p} q={q}: {frac} vs {want}");
    }
}
