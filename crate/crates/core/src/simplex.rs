//! Nelder–Mead downhill simplex minimizer.
//!
//! The objective may return `+∞` (or NaN) for infeasible points; such
//! vertices are always worse than any finite one, so the simplex backs away
//! from the boundary of the feasible set.

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub max_iter: usize,
    /// Stop once every vertex lies within `rel_diameter * max(1, |best|)`
    /// of the best vertex.
    pub rel_diameter: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            rel_diameter: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes `f` starting from `x0` with initial edge lengths `step`.
pub fn minimize<F>(mut f: F, x0: &[f64], step: &[f64], opts: Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(n, step.len(), "step length must match dimension");
    let mut eval = |x: &[f64]| sanitize(f(x));

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let scale = norm(best).max(1.0);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if simplex[0].1.is_finite() && diameter < opts.rel_diameter * scale {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let x = along(0.5);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x);
            (x, v)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (x, b) in vertex.0.iter_mut().zip(&best) {
                *x = b + 0.5 * (*x - b);
            }
            vertex.1 = eval(&vertex.0);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Minimum {
        point,
        value,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let m = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            Options::default(),
        );
        assert!(m.converged);
        assert!((m.point[0] - 1.0).abs() < 1e-6, "{:?}", m.point);
        assert!((m.point[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn respects_infeasible_region() {
        // Minimum of (x − 2)² restricted to x ≤ 1 sits on the boundary.
        let m = minimize(
            |x| if x[0] > 1.0 { f64::INFINITY } else { (x[0] - 2.0).powi(2) },
            &[0.0],
            &[0.25],
            Options::default(),
        );
        assert!(m.point[0] <= 1.0 && m.point[0] > 1.0 - 1e-6);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let m = minimize(
            |x| x[0] * x[0] + x[1] * x[1],
            &[5.0, 5.0],
            &[1.0, 1.0],
            Options {
                max_iter: 3,
                rel_diameter: 1e-8,
            },
        );
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
