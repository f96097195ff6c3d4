//! End-to-end analysis: ingest, classify, extract inter-arrival gaps per
//! traffic class, rank candidate models and write the artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::generators::augment_trace;
use crate::gof::{rank_models, sorted, MIN_GOF_SAMPLE};
use crate::histogram::build_histogram;
use crate::ingest::{group_streams, parse_csv_file, readings_to_trace, Classifier, RawReading, RowError, TrafficClass};
use crate::report::{render_table, to_json, ReportDocument, TailErrorDocument};
use crate::rng::device_rng;
use crate::traffic::inter_arrival_times;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Classify,
    Extract,
    Rank,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Classify => "classify",
            Stage::Extract => "extract",
            Stage::Rank => "rank",
            Stage::Emit => "emit",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub class: TrafficClass,
    pub streams: usize,
    pub sample_size: usize,
    pub best_model: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub artifacts: Vec<PathBuf>,
    pub row_errors: Vec<RowError>,
    pub classes: Vec<ClassSummary>,
}

/// Artifact file names for one traffic class.
pub fn artifact_names(class: TrafficClass) -> [String; 4] {
    let c = class.tag();
    [
        format!("{c}_report.json"),
        format!("{c}_table.txt"),
        format!("{c}_histogram.tsv"),
        format!("{c}_tail_errors.json"),
    ]
}

/// Reads the config at `config_path` (optionally overriding its seed) and
/// runs the pipeline into `out_dir`.
pub fn run_pipeline_file(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<PipelineOutcome, PipelineError> {
    let mut cfg = PipelineConfig::from_file(config_path).at(Stage::Config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run_pipeline(&cfg, out_dir)
}

pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutcome, PipelineError> {
    let parsed = parse_csv_file(&cfg.input).at(Stage::Ingest)?;
    if parsed.readings.is_empty() {
        return Err(Error::Format(format!("{} holds no valid readings", cfg.input.display()))).at(Stage::Ingest);
    }

    let classes = classify(cfg, &parsed.readings).at(Stage::Classify)?;
    let samples = extract(cfg, classes).at(Stage::Extract)?;

    let mut files: Vec<(String, String)> = Vec::new();
    let mut summaries = Vec::new();
    for (class, (streams, sample)) in samples {
        let report = rank_models(&sample, &cfg.candidates).at(Stage::Rank)?;
        let sorted_sample = sorted(&sample);
        let tails = TailErrorDocument::compute(&report, &sorted_sample, cfg.tail_fraction).at(Stage::Rank)?;
        let hist = build_histogram(&sample, cfg.bins).at(Stage::Rank)?;
        let table = render_table(&report);
        summaries.push(ClassSummary {
            class,
            streams,
            sample_size: sample.len(),
            best_model: report.entries[0].model_name.clone(),
        });
        let doc = ReportDocument::new(report, tails.clone());
        let [report_name, table_name, hist_name, tail_name] = artifact_names(class);
        files.push((report_name, doc.to_json()));
        files.push((table_name, table));
        files.push((hist_name, hist.to_tsv()));
        files.push((tail_name, to_json(&tails)));
    }

    let artifacts = emit(out_dir, &files).at(Stage::Emit)?;
    Ok(PipelineOutcome {
        artifacts,
        row_errors: parsed.errors,
        classes: summaries,
    })
}

type Streams = BTreeMap<TrafficClass, Vec<(String, Vec<RawReading>)>>;

fn classify(cfg: &PipelineConfig, readings: &[RawReading]) -> Result<Streams> {
    let mut classifier = Classifier::new();
    for (m, c) in &cfg.class_overrides {
        classifier = classifier.with_override(m, *c)?;
    }
    let wanted = match &cfg.measurements {
        Some(list) => {
            for m in list {
                classifier.classify(m)?;
            }
            Some(list)
        }
        None => None,
    };
    let mut out: Streams = BTreeMap::new();
    for ((device, measurement), rs) in group_streams(readings) {
        if wanted.is_some_and(|w| !w.contains(&measurement)) {
            continue;
        }
        let class = classifier.classify(&measurement)?;
        if cfg.classes.contains(&class) {
            out.entry(class).or_default().push((format!("{device}/{measurement}"), rs));
        }
    }
    Ok(out)
}

/// Pooled inter-arrival gaps (in slots) per class, with the stream count.
fn extract(cfg: &PipelineConfig, streams: Streams) -> Result<BTreeMap<TrafficClass, (usize, Vec<f64>)>> {
    let mut out = BTreeMap::new();
    let mut stream_index = 0usize;
    for &class in &cfg.classes {
        let list = streams.get(&class).map(Vec::as_slice).unwrap_or(&[]);
        let base = stream_index;
        stream_index += list.len();
        let gaps = list
            .par_iter()
            .enumerate()
            .map(|(i, (id, rs))| {
                let mut trace = readings_to_trace(id, rs, cfg.slot_ms)?;
                if cfg.augment_jitter > 0 || cfg.augment_resample > 0.0 {
                    let mut rng = device_rng(cfg.seed, base + i);
                    trace = augment_trace(&trace, cfg.augment_jitter, cfg.augment_resample, &mut rng)?;
                }
                Ok(inter_arrival_times(&trace))
            })
            .collect::<Result<Vec<_>>>()?;
        let sample: Vec<f64> = gaps.into_iter().flatten().map(|g| g as f64).collect();
        if sample.len() < MIN_GOF_SAMPLE {
            return Err(Error::domain(format!(
                "class {class} yields {} inter-arrival gaps from {} streams; at least {MIN_GOF_SAMPLE} are needed",
                sample.len(),
                list.len()
            )));
        }
        out.insert(class, (list.len(), sample));
    }
    Ok(out)
}

/// Writes every artifact or none: on failure the files already written are
/// removed, along with `out_dir` if this call created it.
fn emit(out_dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let created = !out_dir.exists();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, content) in files {
        let path = out_dir.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            if created {
                let _ = std::fs::remove_dir(out_dir);
            }
            return Err(Error::io(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests;
