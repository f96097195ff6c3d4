//! Smart-Campus-schema CSV readings, stream classification and conversion
//! of reading timestamps into slotted traces.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::{Trace, Transmission};

pub const CSV_HEADER: &str = "device_id,sensor_type,measurement,timestamp_ms";

/// Default slot length: the 15-minute reporting cadence of the campus sensors.
pub const DEFAULT_SLOT_MS: u64 = 900_000;

/// The ten measurement names known to the campus deployment.
pub const MEASUREMENTS: [&str; 10] = [
    "co2",
    "sound_avg",
    "sound_peak",
    "motion",
    "light",
    "temperature",
    "humidity",
    "pressure",
    "moisture",
    "battery",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensorType {
    A,
    B,
    C,
}

impl SensorType {
    /// Measurements a sensor of this type can report.
    pub fn capabilities(self) -> &'static [&'static str] {
        match self {
            SensorType::A => &["co2", "motion", "light", "temperature", "humidity", "battery"],
            SensorType::B => &[
                "sound_avg",
                "sound_peak",
                "motion",
                "light",
                "temperature",
                "humidity",
                "battery",
            ],
            SensorType::C => &["pressure", "moisture", "temperature", "humidity", "battery"],
        }
    }

    pub fn measures(self, measurement: &str) -> bool {
        self.capabilities().contains(&measurement)
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensorType::A => "A",
            SensorType::B => "B",
            SensorType::C => "C",
        })
    }
}

impl FromStr for SensorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(SensorType::A),
            "B" => Ok(SensorType::B),
            "C" => Ok(SensorType::C),
            _ => Err(Error::Format(format!("unknown sensor type `{s}` (valid: A, B, C)"))),
        }
    }
}

/// One row of a campus CSV export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReading {
    pub device_id: String,
    pub sensor_type: SensorType,
    pub measurement: String,
    pub timestamp_ms: u64,
}

impl RawReading {
    pub fn new(
        device_id: impl Into<String>,
        sensor_type: SensorType,
        measurement: impl Into<String>,
        timestamp_ms: u64,
    ) -> Result<Self> {
        let r = Self {
            device_id: device_id.into(),
            sensor_type,
            measurement: measurement.into(),
            timestamp_ms,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.device_id.is_empty() {
            return Err(Error::Format("empty device_id".into()));
        }
        if self.device_id.contains([',', '"', '\n', '\r']) {
            return Err(Error::Format(format!("device_id `{}` contains a reserved character", self.device_id)));
        }
        if !MEASUREMENTS.contains(&self.measurement.as_str()) {
            return Err(unknown_measurement(&self.measurement));
        }
        if !self.sensor_type.measures(&self.measurement) {
            return Err(Error::Format(format!(
                "sensor type {} does not measure `{}`",
                self.sensor_type, self.measurement
            )));
        }
        Ok(())
    }
}

fn unknown_measurement(name: &str) -> Error {
    Error::UnknownMeasurement {
        name: name.to_string(),
        valid: MEASUREMENTS.join(", "),
    }
}

/// A malformed data row; `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parsed {
    pub readings: Vec<RawReading>,
    pub errors: Vec<RowError>,
}

/// Parses a campus CSV export.
///
/// A missing or wrong header is fatal. Malformed rows are collected in
/// [`Parsed::errors`] and parsing continues.
pub fn parse_csv<R: Read>(input: R) -> Result<Parsed> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::Format(format!("unreadable header: {e}"))),
        None => return Err(Error::Format(format!("missing header (expected `{CSV_HEADER}`)"))),
    };
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Format(format!(
            "wrong header `{}` (expected `{CSV_HEADER}`)",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut parsed = Parsed::default();
    for (i, record) in records.enumerate() {
        let fallback_line = i as u64 + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(fallback_line, |p| p.line());
                parsed.errors.push(RowError { line, message: e.to_string() });
                continue;
            }
        };
        let line = record.position().map_or(fallback_line, |p| p.line());
        match parse_row(&record) {
            Ok(r) => parsed.readings.push(r),
            Err(e) => parsed.errors.push(RowError { line, message: e.to_string() }),
        }
    }
    Ok(parsed)
}

fn parse_row(record: &csv::StringRecord) -> Result<RawReading> {
    if record.len() != 4 {
        return Err(Error::Format(format!("expected 4 fields, found {}", record.len())));
    }
    let timestamp_ms = record[3]
        .parse::<u64>()
        .map_err(|_| Error::Format(format!("bad timestamp_ms `{}`", &record[3])))?;
    RawReading::new(&record[0], record[1].parse()?, &record[2], timestamp_ms)
}

pub fn parse_csv_file(path: impl AsRef<Path>) -> Result<Parsed> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(file))
}

pub fn write_csv<W: Write>(readings: &[RawReading], mut out: W) -> Result<()> {
    let io = |e| Error::io("<csv output>", e);
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for r in readings {
        r.validate()?;
        writeln!(out, "{},{},{},{}", r.device_id, r.sensor_type, r.measurement, r.timestamp_ms).map_err(io)?;
    }
    Ok(())
}

/// Reads a whitespace-separated list of finite reals; `#` starts a comment.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for tok in content.split_whitespace() {
            match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return Err(Error::Format(format!("line {}: `{tok}` is not a finite number", i + 1))),
            }
        }
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficClass {
    EventDriven,
    QuasiPeriodic,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 2] = [TrafficClass::EventDriven, TrafficClass::QuasiPeriodic];

    pub fn tag(self) -> &'static str {
        match self {
            TrafficClass::EventDriven => "event_driven",
            TrafficClass::QuasiPeriodic => "quasi_periodic",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TrafficClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "event_driven" | "ed" => Ok(TrafficClass::EventDriven),
            "quasi_periodic" | "qp" | "pu" => Ok(TrafficClass::QuasiPeriodic),
            _ => Err(Error::Config(format!(
                "unknown traffic class `{s}` (valid: event_driven, quasi_periodic)"
            ))),
        }
    }
}

/// Default class of a measurement stream: sound, CO2 and motion readings
/// are event driven, environmental drift measurements quasi-periodic.
pub fn classify_stream(measurement: &str) -> Result<TrafficClass> {
    match measurement {
        "co2" | "sound_avg" | "sound_peak" | "motion" => Ok(TrafficClass::EventDriven),
        "temperature" | "humidity" | "pressure" | "moisture" | "light" | "battery" => {
            Ok(TrafficClass::QuasiPeriodic)
        }
        _ => Err(unknown_measurement(measurement)),
    }
}

/// The default measurement map with per-measurement overrides.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classifier {
    overrides: BTreeMap<String, TrafficClass>,
}

impl Classifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_override(mut self, measurement: &str, class: TrafficClass) -> Result<Self> {
        classify_stream(measurement)?;
        self.overrides.insert(measurement.to_string(), class);
        Ok(self)
    }

    pub fn classify(&self, measurement: &str) -> Result<TrafficClass> {
        let default = classify_stream(measurement)?;
        Ok(self.overrides.get(measurement).copied().unwrap_or(default))
    }
}

/// Maps readings of one (device, measurement) stream onto slots of
/// `slot_ms` milliseconds. Readings sharing a slot collapse into one
/// single-slot transmission; the horizon ends after the last occupied slot.
pub fn readings_to_trace(device_id: &str, readings: &[RawReading], slot_ms: u64) -> Result<Trace> {
    if slot_ms == 0 {
        return Err(Error::domain("slot_ms must be positive"));
    }
    let mut slots: Vec<u64> = readings.iter().map(|r| r.timestamp_ms / slot_ms).collect();
    slots.sort_unstable();
    slots.dedup();
    let horizon = slots.last().map_or(0, |&s| s + 1);
    let txs = slots.into_iter().map(|s| Transmission::new(s, 1)).collect();
    Trace::new(device_id, horizon, txs)
}

/// Readings grouped by `(device_id, measurement)`, in key order.
pub fn group_streams(readings: &[RawReading]) -> BTreeMap<(String, String), Vec<RawReading>> {
    let mut streams: BTreeMap<(String, String), Vec<RawReading>> = BTreeMap::new();
    for r in readings {
        streams
            .entry((r.device_id.clone(), r.measurement.clone()))
            .or_default()
            .push(r.clone());
    }
    streams
}
