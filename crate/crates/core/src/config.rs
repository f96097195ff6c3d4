//! Plain-text `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every key may appear once and
//! unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::generators::{EventDrivenConfig, EventMode, QuasiPeriodicConfig, ThreeGppConfig, ThreeGppModel};
use crate::gof::DEFAULT_TAIL_FRACTION;
use crate::histogram::BinRule;
use crate::ingest::{TrafficClass, DEFAULT_SLOT_MS};
use crate::spatial::{AreaElement, InfluenceFunction, PoissonField};

/// Parsed key-value pairs with line numbers; consumed key by key.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {line}: empty key")));
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (line, value.trim().to_string())) {
                return Err(Error::Config(format!("line {line}: key `{key}` already set on line {first}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: invalid value `{v}` for `{key}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Removes and returns every key starting with `prefix`, prefix stripped.
    pub fn take_prefixed(&mut self, prefix: &str) -> Vec<(usize, String, String)> {
        let keys: Vec<String> = self.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        keys.into_iter()
            .map(|k| {
                let (line, v) = self.entries.remove(&k).expect("key listed above");
                (line, k[prefix.len()..].to_string(), v)
            })
            .collect()
    }

    /// Fails if any key was left unconsumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Config(format!("line {line}: unknown key `{key}`"))),
        }
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

/// Parses `auto`, `count:<k>` or `width:<w>`.
pub fn parse_bin_rule(s: &str) -> Result<BinRule> {
    let bad = || Error::Config(format!("invalid bin rule `{s}` (expected auto, count:<k> or width:<w>)"));
    match s.trim().split_once(':') {
        None if s.trim() == "auto" => Ok(BinRule::Auto),
        Some(("count", k)) => match k.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(BinRule::FixedCount(k)),
            _ => Err(bad()),
        },
        Some(("width", w)) => match w.trim().parse::<f64>() {
            Ok(w) if w > 0.0 && w.is_finite() => Ok(BinRule::FixedWidth(w)),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub slot_ms: u64,
    pub seed: u64,
    pub candidates: Vec<Family>,
    /// Restricts the analysis to these measurements; checked when streams
    /// are classified.
    pub measurements: Option<Vec<String>>,
    /// `class.<measurement> = <class>` entries, checked when streams are
    /// classified.
    pub class_overrides: Vec<(String, TrafficClass)>,
    pub classes: Vec<TrafficClass>,
    pub bins: BinRule,
    pub tail_fraction: f64,
    /// Per-transmission start jitter applied before gap extraction.
    pub augment_jitter: u64,
    /// Fraction of bootstrap transmissions added before gap extraction.
    pub augment_resample: f64,
}

impl PipelineConfig {
    pub fn with_input(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            slot_ms: DEFAULT_SLOT_MS,
            seed: 0,
            candidates: Family::ALL.to_vec(),
            measurements: None,
            class_overrides: Vec::new(),
            classes: TrafficClass::ALL.to_vec(),
            bins: BinRule::Auto,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            augment_jitter: 0,
            augment_resample: 0.0,
        }
    }

    /// Parses a config; a relative `input` is resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let input: PathBuf = kv.require("input")?;
        let mut cfg = Self::with_input(base_dir.join(input));
        cfg.slot_ms = kv.get_or("slot_ms", cfg.slot_ms)?;
        if cfg.slot_ms == 0 {
            return Err(Error::Config("slot_ms must be positive".into()));
        }
        cfg.seed = kv.get_or("seed", cfg.seed)?;
        if let Some((_, v)) = kv.take("candidates") {
            cfg.candidates = list(&v)
                .iter()
                .map(|f| f.parse::<Family>().map_err(config_err))
                .collect::<Result<_>>()?;
            if cfg.candidates.is_empty() {
                return Err(Error::Config("candidates list is empty".into()));
            }
        }
        if let Some((_, v)) = kv.take("measurements") {
            cfg.measurements = Some(list(&v));
        }
        if let Some((_, v)) = kv.take("classes") {
            cfg.classes = list(&v).iter().map(|c| c.parse()).collect::<Result<_>>()?;
            if cfg.classes.is_empty() {
                return Err(Error::Config("classes list is empty".into()));
            }
        }
        for (line, name, value) in kv.take_prefixed("class.") {
            let class = value
                .parse()
                .map_err(|e| Error::Config(format!("line {line}: {e}")))?;
            cfg.class_overrides.push((name, class));
        }
        if let Some((_, v)) = kv.take("bins") {
            cfg.bins = parse_bin_rule(&v)?;
        }
        cfg.tail_fraction = kv.get_or("tail_fraction", cfg.tail_fraction)?;
        if !(cfg.tail_fraction > 0.0 && cfg.tail_fraction < 0.5) {
            return Err(Error::Config(format!("tail_fraction must lie in (0, 0.5) (got {})", cfg.tail_fraction)));
        }
        cfg.augment_jitter = kv.get_or("augment_jitter", 0)?;
        cfg.augment_resample = kv.get_or("augment_resample", 0.0)?;
        if !(0.0..=1.0).contains(&cfg.augment_resample) {
            return Err(Error::Config("augment_resample must lie in [0, 1]".into()));
        }
        kv.finish()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    EventDriven(EventDrivenConfig),
    QuasiPeriodic(QuasiPeriodicConfig),
    ThreeGpp(ThreeGppConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub kind: GeneratorKind,
}

impl GeneratorConfig {
    /// Parses a generator config. The `generator` key selects the model
    /// (`event_driven`, `quasi_periodic` or `3gpp`); keys of other models are
    /// rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let seed = kv.get_or("seed", 0)?;
        let generator: String = kv.require("generator")?;
        let kind = match generator.as_str() {
            "event_driven" => GeneratorKind::EventDriven(event_driven(&mut kv)?),
            "quasi_periodic" => GeneratorKind::QuasiPeriodic(quasi_periodic(&mut kv)?),
            "3gpp" => GeneratorKind::ThreeGpp(three_gpp(&mut kv)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown generator `{other}` (valid: event_driven, quasi_periodic, 3gpp)"
                )))
            }
        };
        kv.finish()?;
        Ok(Self { seed, kind })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn event_driven(kv: &mut KeyValues) -> Result<EventDrivenConfig> {
    let radius: f64 = kv.get_or("region_radius", 100.0)?;
    let device_field = PoissonField::new(kv.get_or("device_density", 0.001)?, radius).map_err(config_err)?;
    let epicenter_field = PoissonField::new(kv.get_or("epicenter_density", 0.0005)?, radius).map_err(config_err)?;
    let scale: f64 = kv.get_or("influence_scale", 10.0)?;
    let kind: String = kv.get_or("influence", "exponential".to_string())?;
    let influence = match kind.as_str() {
        "hard_disk" => InfluenceFunction::HardDisk(scale),
        "exponential" => InfluenceFunction::ExponentialDecay(scale),
        "gaussian" => InfluenceFunction::GaussianDecay(scale),
        other => {
            return Err(Error::Config(format!(
                "unknown influence `{other}` (valid: hard_disk, exponential, gaussian)"
            )))
        }
    };
    let lambda_t: f64 = kv.require("lambda_t")?;
    let elem = match kv.get_or("area_element", "linear".to_string())?.as_str() {
        "linear" => AreaElement::LinearAsWritten,
        "radial" => AreaElement::RadialCorrected,
        other => return Err(Error::Config(format!("unknown area_element `{other}` (valid: linear, radial)"))),
    };
    let mode = match kv.get_or("mode", "spatio_temporal".to_string())?.as_str() {
        "spatio_temporal" => EventMode::SpatioTemporal,
        "reduced" => match kv.get::<f64>("p_activate")? {
            Some(p_activate) => EventMode::Reduced { p_activate },
            None => EventMode::reduced_from(lambda_t, &influence, elem).map_err(config_err)?,
        },
        other => return Err(Error::Config(format!("unknown mode `{other}` (valid: spatio_temporal, reduced)"))),
    };
    let cfg = EventDrivenConfig {
        lambda_t,
        device_field,
        epicenter_field,
        influence,
        q: kv.get_or("q", 0.5)?,
        horizon: kv.require("horizon")?,
        mode,
        rate_active: kv.get_or("rate_active", 1.0)?,
        fixed_device_count: kv.get("device_count")?,
    };
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn quasi_periodic(kv: &mut KeyValues) -> Result<QuasiPeriodicConfig> {
    let period: u64 = kv.require("period")?;
    let cfg = QuasiPeriodicConfig {
        nominal_period: period,
        period_spread: kv.get_or("period_spread", 0)?,
        jitter: kv.get_or("jitter", 0)?,
        start_offset: kv.get_or("start_offset", 0)?,
        start_window: kv.get_or("start_window", period)?,
        p_activate: kv.get_or("p_activate", 1.0)?,
        burst_q: kv.get_or("burst_q", 0.0)?,
        device_count: kv.get_or("device_count", 1)?,
        horizon: kv.require("horizon")?,
    };
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn three_gpp(kv: &mut KeyValues) -> Result<ThreeGppConfig> {
    let model = match kv.get_or("model", "beta".to_string())?.as_str() {
        "uniform" => ThreeGppModel::Uniform,
        "beta" => ThreeGppModel::Beta {
            alpha: kv.get_or("alpha", 3.0)?,
            beta: kv.get_or("beta", 4.0)?,
        },
        other => return Err(Error::Config(format!("unknown 3gpp model `{other}` (valid: uniform, beta)"))),
    };
    let cfg = ThreeGppConfig {
        model,
        window: kv.require("window")?,
        device_count: kv.require("device_count")?,
    };
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}
