//! Traffic source models: spatio-temporal event-driven traffic, its reduced
//! per-device chain, quasi-periodic updates, the 3GPP uniform and beta
//! access models, and trace augmentation.
//!
//! Generators take a master seed. Device `j` draws from its own stream, and
//! the shared event process and device positions use reserved streams (see
//! [`crate::rng`]), so outputs do not depend on thread count.

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistSpec;
use crate::error::{Error, Result};
use crate::rng::{device_rng, stream_rng, DEVICE_FIELD_STREAM, EVENT_STREAM};
use crate::spatial::{
    activation_probability, distance, influence, sample_disk, sample_ppp, AreaElement, InfluenceFunction, Point2D,
    PoissonField,
};
use crate::traffic::{
    check_burstiness, check_probability, draw_burst, simulate_chain, MarkovParams, Trace, Transmission,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventMode {
    /// Devices and epicenters are placed explicitly; each event triggers
    /// devices according to their distance from the epicenters.
    SpatioTemporal,
    /// Every device runs the idle/active chain with a common activation
    /// probability.
    Reduced { p_activate: f64 },
}

impl EventMode {
    /// Reduced mode with the activation probability implied by the event
    /// density and influence function.
    pub fn reduced_from(lambda_t: f64, f: &InfluenceFunction, elem: AreaElement) -> Result<Self> {
        Ok(EventMode::Reduced {
            p_activate: activation_probability(lambda_t, f, elem)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventDrivenConfig {
    /// Events per slot.
    pub lambda_t: f64,
    pub device_field: PoissonField,
    pub epicenter_field: PoissonField,
    pub influence: InfluenceFunction,
    pub q: f64,
    pub horizon: u64,
    pub mode: EventMode,
    pub rate_active: f64,
    /// Place exactly this many devices (uniformly on the disk) instead of
    /// drawing the count from the device field.
    #[serde(default)]
    pub fixed_device_count: Option<usize>,
}

impl EventDrivenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_t > 0.0 && self.lambda_t.is_finite()) {
            return Err(Error::domain(format!("lambda_t must be positive (got {})", self.lambda_t)));
        }
        self.device_field.validate()?;
        self.epicenter_field.validate()?;
        self.influence.validate()?;
        check_burstiness(self.q)?;
        if self.horizon == 0 {
            return Err(Error::domain("horizon must be at least 1 slot"));
        }
        if let EventMode::Reduced { p_activate } = self.mode {
            check_probability("p_activate", p_activate)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiPeriodicConfig {
    pub nominal_period: u64,
    /// Largest deviation of a device's period from the nominal one.
    pub period_spread: u64,
    /// Largest per-opportunity shift of a start.
    pub jitter: u64,
    /// Device phases are drawn uniformly from
    /// `[start_offset, start_offset + start_window)`.
    pub start_offset: u64,
    pub start_window: u64,
    pub p_activate: f64,
    pub burst_q: f64,
    pub device_count: usize,
    pub horizon: u64,
}

impl QuasiPeriodicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nominal_period == 0 {
            return Err(Error::domain("nominal_period must be at least 1"));
        }
        if self.jitter >= self.nominal_period {
            return Err(Error::domain(format!(
                "jitter {} must be smaller than nominal_period {}",
                self.jitter, self.nominal_period
            )));
        }
        if self.period_spread >= self.nominal_period {
            return Err(Error::domain(format!(
                "period_spread {} must be smaller than nominal_period {}",
                self.period_spread, self.nominal_period
            )));
        }
        if self.start_window == 0 {
            return Err(Error::domain("start_window must be at least 1"));
        }
        check_probability("p_activate", self.p_activate)?;
        check_burstiness(self.burst_q)?;
        if self.device_count == 0 {
            return Err(Error::domain("device_count must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::domain("horizon must be at least 1 slot"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThreeGppModel {
    /// Traffic model 1: arrivals uniform over the window.
    Uniform,
    /// Traffic model 2: arrivals follow a Beta law stretched over the window.
    Beta { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeGppConfig {
    pub model: ThreeGppModel,
    /// Access window length in slots.
    pub window: f64,
    pub device_count: usize,
}

impl ThreeGppConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::domain(format!("window must be positive (got {})", self.window)));
        }
        if let ThreeGppModel::Beta { alpha, beta } = self.model {
            if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                return Err(Error::domain(format!(
                    "beta model needs alpha, beta > 0 (got {alpha}, {beta})"
                )));
            }
        }
        Ok(())
    }

    /// Arrival-time law of a single device.
    pub fn arrival_law(&self) -> DistSpec {
        match self.model {
            ThreeGppModel::Uniform => DistSpec::Beta {
                alpha: 1.0,
                beta: 1.0,
                window: self.window,
            },
            ThreeGppModel::Beta { alpha, beta } => DistSpec::Beta {
                alpha,
                beta,
                window: self.window,
            },
        }
    }
}

/// Counters collected while generating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Event slots (spatio-temporal mode).
    pub events: u64,
    /// Transmission opportunities considered (quasi-periodic).
    pub opportunities: u64,
    /// Opportunities or triggers that led to an activation draw success.
    pub activations: u64,
    /// Activations dropped because they would overlap the previous burst.
    pub dropped_overlaps: u64,
    /// Activations dropped because their start fell outside the horizon.
    pub dropped_out_of_horizon: u64,
    /// Triggers that reached an already active device.
    pub suppressed_triggers: u64,
}

impl std::ops::AddAssign for Diagnostics {
    fn add_assign(&mut self, o: Self) {
        self.events += o.events;
        self.opportunities += o.opportunities;
        self.activations += o.activations;
        self.dropped_overlaps += o.dropped_overlaps;
        self.dropped_out_of_horizon += o.dropped_out_of_horizon;
        self.suppressed_triggers += o.suppressed_triggers;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub traces: Vec<Trace>,
    pub diagnostics: Diagnostics,
}

pub fn device_name(index: usize) -> String {
    format!("mtd-{index:05}")
}

fn combine(parts: Vec<(Trace, Diagnostics)>, mut diagnostics: Diagnostics) -> Generated {
    let mut traces = Vec::with_capacity(parts.len());
    for (trace, d) in parts {
        diagnostics += d;
        traces.push(trace);
    }
    Generated { traces, diagnostics }
}

/// Event-driven traffic over a Poisson field of devices.
pub fn gen_event_driven(cfg: &EventDrivenConfig, seed: u64) -> Result<Generated> {
    cfg.validate()?;
    let devices = place_devices(cfg, seed)?;
    match cfg.mode {
        EventMode::Reduced { p_activate } => {
            let params = MarkovParams::new(p_activate, cfg.q, cfg.rate_active)?;
            let parts = (0..devices.len())
                .into_par_iter()
                .map(|j| {
                    let mut rng = device_rng(seed, j);
                    let trace = simulate_chain(device_name(j), &params, cfg.horizon, &mut rng)?;
                    let d = Diagnostics {
                        activations: trace.len() as u64,
                        ..Diagnostics::default()
                    };
                    Ok((trace, d))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(combine(parts, Diagnostics::default()))
        }
        EventMode::SpatioTemporal => {
            let events = event_process(cfg, seed)?;
            let parts = devices
                .par_iter()
                .enumerate()
                .map(|(j, &pos)| device_under_events(cfg, seed, j, pos, &events))
                .collect::<Result<Vec<_>>>()?;
            Ok(combine(
                parts,
                Diagnostics {
                    events: events.len() as u64,
                    ..Diagnostics::default()
                },
            ))
        }
    }
}

fn place_devices(cfg: &EventDrivenConfig, seed: u64) -> Result<Vec<Point2D>> {
    let mut rng = stream_rng(seed, DEVICE_FIELD_STREAM);
    match cfg.fixed_device_count {
        Some(n) => Ok(sample_disk(cfg.device_field.region_radius, n, &mut rng)),
        None => sample_ppp(&cfg.device_field, &mut rng),
    }
}

struct Event {
    slot: u64,
    epicenters: Vec<Point2D>,
}

/// Slotted event arrivals (Bernoulli thinning at rate `min(λ_T, 1)`), each
/// with a fresh realization of the epicenter field.
fn event_process(cfg: &EventDrivenConfig, seed: u64) -> Result<Vec<Event>> {
    let mut rng = stream_rng(seed, EVENT_STREAM);
    let p_event = cfg.lambda_t.min(1.0);
    let mut events = Vec::new();
    for slot in 0..cfg.horizon {
        if rng.random_bool(p_event) {
            let epicenters = sample_ppp(&cfg.epicenter_field, &mut rng)?;
            events.push(Event { slot, epicenters });
        }
    }
    Ok(events)
}

fn device_under_events(
    cfg: &EventDrivenConfig,
    seed: u64,
    index: usize,
    pos: Point2D,
    events: &[Event],
) -> Result<(Trace, Diagnostics)> {
    let mut rng = device_rng(seed, index);
    let mut diag = Diagnostics::default();
    let mut transmissions = Vec::new();
    let mut busy_until = 0;
    for event in events {
        // P(at least one epicenter triggers the device).
        let mut miss = 1.0;
        for &e in &event.epicenters {
            miss *= 1.0 - influence(&cfg.influence, distance(e, pos))?;
        }
        let triggered = rng.random_bool((1.0 - miss).clamp(0.0, 1.0));
        if !triggered {
            continue;
        }
        if event.slot < busy_until {
            diag.suppressed_triggers += 1;
            continue;
        }
        diag.activations += 1;
        let k = draw_burst(cfg.q, &mut rng);
        let duration = k.saturating_add(1).min(cfg.horizon - event.slot);
        transmissions.push(Transmission::new(event.slot, duration));
        busy_until = event.slot + duration;
    }
    let trace = Trace::new(device_name(index), cfg.horizon, transmissions)?.with_rate(cfg.rate_active);
    Ok((trace, diag))
}

/// Quasi-periodic traffic: device `j` has a phase `κ_j`, a period `T_j` and
/// transmits at opportunity `m` (base slot `κ_j + (m−1)·T_j`) with
/// probability `p_activate`, shifted by a per-opportunity jitter.
pub fn gen_quasi_periodic(cfg: &QuasiPeriodicConfig, seed: u64) -> Result<Generated> {
    cfg.validate()?;
    let parts = (0..cfg.device_count)
        .into_par_iter()
        .map(|j| quasi_periodic_device(cfg, seed, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(parts, Diagnostics::default()))
}

fn quasi_periodic_device(cfg: &QuasiPeriodicConfig, seed: u64, index: usize) -> Result<(Trace, Diagnostics)> {
    let mut rng = device_rng(seed, index);
    let mut diag = Diagnostics::default();
    let phase = cfg.start_offset + rng.random_range(0..cfg.start_window);
    let period = rng.random_range(cfg.nominal_period - cfg.period_spread..=cfg.nominal_period + cfg.period_spread);
    let jitter = cfg.jitter as i64;

    let mut transmissions: Vec<Transmission> = Vec::new();
    let mut base = phase;
    while base <= cfg.horizon {
        diag.opportunities += 1;
        if rng.random_bool(cfg.p_activate) {
            diag.activations += 1;
            let shift = if jitter > 0 { rng.random_range(-jitter..=jitter) } else { 0 };
            let k = draw_burst(cfg.burst_q, &mut rng);
            let start = (base as i64 + shift).max(0) as u64;
            if start >= cfg.horizon {
                diag.dropped_out_of_horizon += 1;
            } else if transmissions.last().is_some_and(|prev| start < prev.end()) {
                diag.dropped_overlaps += 1;
            } else {
                let duration = k.saturating_add(1).min(cfg.horizon - start);
                transmissions.push(Transmission::new(start, duration));
            }
        }
        base += period;
    }
    Ok((Trace::new(device_name(index), cfg.horizon, transmissions)?, diag))
}

/// One access time per device under a 3GPP traffic model.
pub fn gen_3gpp(cfg: &ThreeGppConfig, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let law = cfg.arrival_law();
    Ok((0..cfg.device_count)
        .into_par_iter()
        .map(|j| {
            let mut rng = device_rng(seed, j);
            match cfg.model {
                ThreeGppModel::Uniform => cfg.window * rng.random::<f64>(),
                ThreeGppModel::Beta { .. } => {
                    let u: f64 = rng.sample(Open01);
                    law.quantile(u).expect("u lies in (0, 1)")
                }
            }
        })
        .collect())
}

/// Jitters every transmission by up to `jitter` slots and adds
/// `round(resample_fraction · n)` bootstrap copies at jittered positions.
/// Overlapping transmissions are merged.
pub fn augment_trace<R: Rng + ?Sized>(
    trace: &Trace,
    jitter: u64,
    resample_fraction: f64,
    rng: &mut R,
) -> Result<Trace> {
    check_probability("resample_fraction", resample_fraction)?;
    let horizon = trace.horizon().index();
    let original = trace.transmissions();
    let j = jitter as i64;
    let shift = |tx: &Transmission, rng: &mut R| {
        let s = if j > 0 { rng.random_range(-j..=j) } else { 0 };
        let latest = (horizon - tx.duration) as i64;
        let start = (tx.start.index() as i64 + s).clamp(0, latest) as u64;
        Transmission::new(start, tx.duration)
    };
    let mut out: Vec<Transmission> = original.iter().map(|tx| shift(tx, rng)).collect();
    if !original.is_empty() {
        let copies = (resample_fraction * original.len() as f64).round() as usize;
        for _ in 0..copies {
            let pick = &original[rng.random_range(0..original.len())];
            out.push(shift(pick, rng));
        }
    }
    out.sort_by_key(|t| (t.start, t.duration));

    let mut merged: Vec<Transmission> = Vec::with_capacity(out.len());
    for tx in out {
        match merged.last_mut() {
            Some(prev) if tx.start.index() < prev.end() => {
                let end = prev.end().max(tx.end());
                prev.duration = end - prev.start.index();
            }
            _ => merged.push(tx),
        }
    }
    let mut result = Trace::new(trace.device_id(), horizon, merged)?;
    if let Some(rate) = trace.rate_active() {
        result = result.with_rate(rate);
    }
    Ok(result)
}
