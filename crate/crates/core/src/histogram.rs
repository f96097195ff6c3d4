//! Density-normalized histograms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BinRule {
    /// Bins of the given width starting at the sample minimum.
    FixedWidth(f64),
    /// The given number of equal-width bins spanning `[min, max]`.
    FixedCount(usize),
    /// `⌈√n⌉` equal-width bins spanning `[min, max]`.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `count / (n · width)`, so that Σ density·width = 1.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `bin_left<TAB>bin_right<TAB>count<TAB>density`, one row per bin.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.bins() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                self.counts[i],
                self.density[i]
            )?;
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }
}

pub fn build_histogram(values: &[f64], rule: BinRule) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::domain("cannot build a histogram of no values"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("histogram value {v} is not finite")));
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));

    let (lo, width, bins) = match rule {
        BinRule::FixedWidth(w) => {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("bin width must be positive (got {w})")));
            }
            (min, w, ((max - min) / w).floor() as usize + 1)
        }
        BinRule::FixedCount(k) => equal_width(min, max, k)?,
        BinRule::Auto => equal_width(min, max, (values.len() as f64).sqrt().ceil() as usize)?,
    };

    let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in values {
        let idx = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    let density = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / (n * (bin_edges[i + 1] - bin_edges[i])))
        .collect();
    Ok(Histogram {
        bin_edges,
        counts,
        density,
    })
}

fn equal_width(min: f64, max: f64, k: usize) -> Result<(f64, f64, usize)> {
    if k == 0 {
        return Err(Error::domain("bin count must be at least 1"));
    }
    if max > min {
        Ok((min, (max - min) / k as f64, k))
    } else {
        // Zero span: widen to one unit centred on the value.
        Ok((min - 0.5, 1.0 / k as f64, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn mass(h: &Histogram) -> f64 {
        (0..h.bins()).map(|i| h.density[i] * h.width(i)).sum()
    }

    #[test]
    fn degenerate_span() {
        let h = build_histogram(&[1.0, 1.0, 1.0], BinRule::FixedCount(1)).unwrap();
        assert_eq!(h.counts, vec![3]);
        assert_eq!(h.bin_edges, vec![0.5, 1.5]);
        assert!((mass(&h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_width() {
        let h = build_histogram(&[0.0, 1.0, 2.0, 3.0], BinRule::FixedWidth(2.0)).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.bin_edges, vec![0.0, 2.0, 4.0]);
        assert_eq!(h.to_tsv(), "0\t2\t2\t0.25\n2\t4\t2\t0.25\n");
    }

    #[test]
    fn auto_uses_sqrt_bins() {
        let values: Vec<f64> = (0..10).map(f64::from).collect();
        let h = build_histogram(&values, BinRule::Auto).unwrap();
        assert_eq!(h.bins(), 4);
        assert_eq!(h.total(), 10);
        assert_eq!(*h.bin_edges.last().unwrap(), 9.0);
    }

    #[test]
    fn errors() {
        assert!(build_histogram(&[], BinRule::Auto).is_err());
        assert!(build_histogram(&[1.0], BinRule::FixedCount(0)).is_err());
        assert!(build_histogram(&[1.0], BinRule::FixedWidth(0.0)).is_err());
        assert!(build_histogram(&[f64::NAN], BinRule::Auto).is_err());
    }

    #[test]
    fn density_normalized_for_random_inputs() {
        let mut rng = stream_rng(21, 0);
        for _ in 0..100 {
            let n = rng.random_range(1..500);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
            let rule = match rng.random_range(0..3) {
                0 => BinRule::Auto,
                1 => BinRule::FixedCount(rng.random_range(1..40)),
                _ => BinRule::FixedWidth(rng.random_range(0.5..20.0)),
            };
            let h = build_histogram(&values, rule).unwrap();
            assert_eq!(h.total(), n as u64);
            assert!((mass(&h) - 1.0).abs() < 1e-12, "{rule:?}");
        }
    }
}
