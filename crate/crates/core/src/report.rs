//! Report artifacts: the ranking JSON document, the tail-error document and
//! the plain-text ranking table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gof::{tail_error, GofEntry, GofReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailErrorRow {
    pub model_name: String,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailErrorDocument {
    pub tail_fraction: f64,
    pub models: Vec<TailErrorRow>,
}

impl TailErrorDocument {
    /// Tail errors of every ranked model on `sorted_sample`.
    pub fn compute(report: &GofReport, sorted_sample: &[f64], tail_fraction: f64) -> Result<Self> {
        let models = report
            .entries
            .iter()
            .map(|e| {
                let t = tail_error(sorted_sample, |x| e.fit.cdf(x), tail_fraction)?;
                Ok(TailErrorRow {
                    model_name: e.model_name.clone(),
                    low: t.low,
                    high: t.high,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { tail_fraction, models })
    }
}

/// The ranking JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub sample_size: usize,
    pub alpha: f64,
    pub entries: Vec<GofEntry>,
    pub tail_errors: TailErrorDocument,
}

impl ReportDocument {
    pub fn new(report: GofReport, tail_errors: TailErrorDocument) -> Self {
        Self {
            sample_size: report.sample_size,
            alpha: report.alpha,
            entries: report.entries,
            tail_errors,
        }
    }

    pub fn report(&self) -> GofReport {
        GofReport {
            sample_size: self.sample_size,
            alpha: self.alpha,
            entries: self.entries.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn cs_flag(e: &GofEntry) -> &'static str {
    if e.chi2_inconclusive {
        "n/a"
    } else if e.chi2_pass {
        "pass"
    } else {
        "fail"
    }
}

fn marked(e: &GofEntry) -> String {
    if e.chi2_pass {
        format!("{}*", e.model_name)
    } else {
        e.model_name.clone()
    }
}

/// Aligned ranking table: the K-S order and the A-D order side by side, with
/// the chi-squared decision of the K-S-ranked model. Models that pass the
/// chi-squared test carry a `*`.
pub fn render_table(report: &GofReport) -> String {
    let header = ["Rank", "Model", "K-S Statistic", "Model", "A-D Statistic", "C-S"];
    let by_ad = report.by_ad();
    let mut rows: Vec<[String; 6]> = vec![header.map(String::from)];
    for (i, (ks, ad)) in report.entries.iter().zip(&by_ad).enumerate() {
        rows.push([
            (i + 1).to_string(),
            marked(ks),
            format!("{:.3}", ks.ks_stat),
            marked(ad),
            format!("{:.3}", ad.ad_stat),
            cs_flag(ks).to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<w$}", w = widths[c]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    let _ = writeln!(
        out,
        "* passed the chi-squared test at alpha = {} (n = {})",
        report.alpha, report.sample_size
    );
    out
}

/// One row per model in rank order.
pub fn render_tsv(report: &GofReport) -> String {
    let mut out = String::from(
        "rank\tmodel_name\tks_stat\tad_stat\tchi2_stat\tchi2_dof\tchi2_pass\tchi2_inconclusive\trmse\ttail_low_err\ttail_high_err\n",
    );
    for (i, e) in report.entries.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            e.model_name,
            e.ks_stat,
            e.ad_stat,
            e.chi2_stat,
            e.chi2_dof,
            e.chi2_pass,
            e.chi2_inconclusive,
            e.rmse,
            e.tail_low_err,
            e.tail_high_err
        );
    }
    out
}
