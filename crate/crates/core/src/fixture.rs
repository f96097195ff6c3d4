//! Synthetic campus dataset in the ingest CSV schema, built from the
//! crate's own generators: 20 devices over 25 hours (500 device-hours) on a
//! one-minute grid.

use rand::{Rng, SeedableRng};

use crate::error::Result;
use crate::generators::{gen_event_driven, gen_quasi_periodic, EventDrivenConfig, EventMode, QuasiPeriodicConfig};
use crate::ingest::{classify_stream, RawReading, SensorType, TrafficClass};
use crate::rng::{stream_rng, SimRng};
use crate::spatial::{InfluenceFunction, PoissonField};
use crate::traffic::Trace;

pub const DEVICES: usize = 20;
pub const HOURS: u64 = 25;
pub const GRID_MS: u64 = 60_000;
/// First timestamp; aligned to both the grid and 15-minute slots.
pub const EPOCH_MS: u64 = 1_700_000_100_000;
pub const DEFAULT_SEED: u64 = 2024;

const FIXTURE_STREAM_BASE: u64 = 1 << 32;

fn sensor_type(device: usize) -> SensorType {
    match device % 3 {
        0 => SensorType::A,
        1 => SensorType::B,
        _ => SensorType::C,
    }
}

fn event_driven(horizon: u64) -> EventDrivenConfig {
    EventDrivenConfig {
        lambda_t: 0.01,
        device_field: PoissonField::new(0.001, 100.0).expect("valid field"),
        epicenter_field: PoissonField::new(0.0005, 100.0).expect("valid field"),
        influence: InfluenceFunction::ExponentialDecay(10.0),
        q: 0.6,
        horizon,
        mode: EventMode::Reduced { p_activate: 0.04 },
        rate_active: 1.0,
        fixed_device_count: Some(1),
    }
}

fn quasi_periodic(horizon: u64) -> QuasiPeriodicConfig {
    QuasiPeriodicConfig {
        nominal_period: 15,
        period_spread: 2,
        jitter: 1,
        start_offset: 0,
        start_window: 15,
        p_activate: 0.95,
        burst_q: 0.0,
        device_count: 1,
        horizon,
    }
}

/// Readings of the fixture, sorted by timestamp, device and measurement.
/// Every active grid slot of a stream yields one reading at a random
/// millisecond inside the slot.
pub fn campus_fixture(seed: u64) -> Result<Vec<RawReading>> {
    let horizon = HOURS * 3_600_000 / GRID_MS;
    let mut readings = Vec::new();
    let mut stream = 0u64;
    for device in 0..DEVICES {
        let st = sensor_type(device);
        let device_id = format!("campus-{st}-{device:02}");
        for &m in st.capabilities() {
            let mut rng: SimRng = stream_rng(seed, FIXTURE_STREAM_BASE + stream);
            stream += 1;
            let sub_seed = rng.random::<u64>();
            let trace: Trace = match classify_stream(m)? {
                TrafficClass::EventDriven => gen_event_driven(&event_driven(horizon), sub_seed)?.traces.remove(0),
                TrafficClass::QuasiPeriodic => gen_quasi_periodic(&quasi_periodic(horizon), sub_seed)?.traces.remove(0),
            };
            let mut offsets = SimRng::seed_from_u64(sub_seed);
            for tx in trace.transmissions() {
                for slot in tx.start.index()..tx.end() {
                    let ts = EPOCH_MS + slot * GRID_MS + offsets.random_range(0..GRID_MS);
                    readings.push(RawReading::new(device_id.clone(), st, m, ts)?);
                }
            }
        }
    }
    readings.sort_by(|a, b| {
        (a.timestamp_ms, &a.device_id, &a.measurement).cmp(&(b.timestamp_ms, &b.device_id, &b.measurement))
    });
    Ok(readings)
}
