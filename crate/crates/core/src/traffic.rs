//! Slotted traffic traces and the two-state idle/active device model.
//!
//! Time advances in transmission time intervals (TTIs). An idle device
//! moves to the active state with probability `p_activate` at every slot
//! boundary; once active it stays for `1 + k` slots, where `k` follows the
//! geometric law `(1 − q)·q^k`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a transmission time interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeSlot(pub u64);

impl TimeSlot {
    pub fn index(self) -> u64 {
        self.0
    }
}

impl From<u64> for TimeSlot {
    fn from(v: u64) -> Self {
        TimeSlot(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub start: TimeSlot,
    /// Number of occupied slots, at least 1.
    pub duration: u64,
}

impl Transmission {
    pub fn new(start: u64, duration: u64) -> Self {
        Self {
            start: TimeSlot(start),
            duration,
        }
    }

    /// First slot after the transmission.
    pub fn end(&self) -> u64 {
        self.start.0 + self.duration
    }
}

/// Activity record of one device over `[0, horizon)`.
///
/// Starts are strictly increasing, transmissions never overlap and every
/// transmission ends at or before the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    device_id: String,
    horizon: TimeSlot,
    transmissions: Vec<Transmission>,
    /// Traffic rate while active; carried along, never used in statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate_active: Option<f64>,
}

impl Trace {
    pub fn new(
        device_id: impl Into<String>,
        horizon: u64,
        transmissions: Vec<Transmission>,
    ) -> Result<Self> {
        let trace = Self {
            device_id: device_id.into(),
            horizon: TimeSlot(horizon),
            transmissions,
            rate_active: None,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn empty(device_id: impl Into<String>, horizon: u64) -> Self {
        Self {
            device_id: device_id.into(),
            horizon: TimeSlot(horizon),
            transmissions: Vec::new(),
            rate_active: None,
        }
    }

    pub fn with_rate(mut self, rate_active: f64) -> Self {
        self.rate_active = Some(rate_active);
        self
    }

    /// Checks the ordering, overlap and horizon invariants.
    pub fn validate(&self) -> Result<()> {
        let mut prev_end: Option<u64> = None;
        for (i, tx) in self.transmissions.iter().enumerate() {
            if tx.duration == 0 {
                return Err(Error::domain(format!("transmission {i} has zero duration")));
            }
            if tx.end() > self.horizon.0 {
                return Err(Error::domain(format!(
                    "transmission {i} ends at {} past horizon {}",
                    tx.end(),
                    self.horizon.0
                )));
            }
            if let Some(end) = prev_end {
                if tx.start.0 < end {
                    return Err(Error::domain(format!(
                        "transmission {i} starts at {} before previous end {end}",
                        tx.start.0
                    )));
                }
            }
            prev_end = Some(tx.end());
        }
        Ok(())
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn horizon(&self) -> TimeSlot {
        self.horizon
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn rate_active(&self) -> Option<f64> {
        self.rate_active
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn starts(&self) -> impl Iterator<Item = u64> + '_ {
        self.transmissions.iter().map(|t| t.start.0)
    }

    /// Total number of active slots.
    pub fn active_slots(&self) -> u64 {
        self.transmissions.iter().map(|t| t.duration).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovParams {
    pub p_activate: f64,
    pub q: f64,
    pub rate_active: f64,
}

impl MarkovParams {
    pub fn new(p_activate: f64, q: f64, rate_active: f64) -> Result<Self> {
        let params = Self {
            p_activate,
            q,
            rate_active,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_activate", self.p_activate)?;
        check_burstiness(self.q)?;
        if !(self.rate_active >= 0.0 && self.rate_active.is_finite()) {
            return Err(Error::domain(format!(
                "rate_active must be a finite non-negative number (got {})",
                self.rate_active
            )));
        }
        Ok(())
    }

    /// Long-run fraction of slots spent active: P_A / (P_A + 1 − q).
    pub fn stationary_active_fraction(&self) -> f64 {
        self.p_activate / (self.p_activate + 1.0 - self.q)
    }
}

/// Per-slot state of a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceState {
    Idle,
    Active { remaining: u64 },
}

impl DeviceState {
    /// State in the next slot: an active count drops by one, reaching idle at zero.
    pub fn tick(self) -> Self {
        match self {
            DeviceState::Idle | DeviceState::Active { remaining: 0..=1 } => DeviceState::Idle,
            DeviceState::Active { remaining } => DeviceState::Active {
                remaining: remaining - 1,
            },
        }
    }

    pub fn is_idle(self) -> bool {
        matches!(self, DeviceState::Idle)
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1] (got {p})")))
    }
}

pub(crate) fn check_burstiness(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::domain(format!("burstiness q must lie in [0, 1) (got {q})")))
    }
}

/// Probability that an active device stays `k` further slots: (1 − q)·q^k.
pub fn geometric_pmf(k: u64, q: f64) -> Result<f64> {
    check_burstiness(q)?;
    if k == 0 {
        return Ok(1.0 - q);
    }
    Ok((1.0 - q) * q.powf(k as f64))
}

/// Draws `k` from the geometric burst law by inversion.
pub fn sample_burst_duration<R: Rng + ?Sized>(q: f64, rng: &mut R) -> Result<u64> {
    check_burstiness(q)?;
    Ok(draw_burst(q, rng))
}

pub(crate) fn draw_burst<R: Rng + ?Sized>(q: f64, rng: &mut R) -> u64 {
    if q == 0.0 {
        return 0;
    }
    // P(k ≥ m) = q^m  ⇔  k = ⌊ln U / ln q⌋ with U uniform on (0, 1].
    let u = 1.0 - rng.random::<f64>();
    let k = (u.ln() / q.ln()).floor();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

/// Runs the idle/active chain for one device over `horizon` slots.
///
/// The device starts idle in slot 0. From an idle slot `t` it becomes active
/// in slot `t + 1` with probability `p_activate`; the activation opens a
/// transmission of `1 + k` slots (truncated at the horizon), after which the
/// device is idle again.
pub fn simulate_chain<R: Rng + ?Sized>(
    device_id: impl Into<String>,
    params: &MarkovParams,
    horizon: u64,
    rng: &mut R,
) -> Result<Trace> {
    params.validate()?;
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least 1 slot"));
    }
    let mut transmissions = Vec::new();
    let mut t = 0;
    while t < horizon {
        if rng.random_bool(params.p_activate) {
            let start = t + 1;
            if start >= horizon {
                break;
            }
            let k = draw_burst(params.q, rng);
            let duration = k.saturating_add(1).min(horizon - start);
            transmissions.push(Transmission::new(start, duration));
            t = start + duration;
        } else {
            t += 1;
        }
    }
    Ok(Trace {
        device_id: device_id.into(),
        horizon: TimeSlot(horizon),
        transmissions,
        rate_active: Some(params.rate_active),
    })
}

/// Gaps between successive transmission starts.
pub fn inter_arrival_times(trace: &Trace) -> Vec<u64> {
    trace
        .transmissions
        .windows(2)
        .map(|w| w[1].start.0 - w[0].start.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::device_rng;

    #[test]
    fn pmf_examples() {
        assert_eq!(geometric_pmf(0, 0.5).unwrap(), 0.5);
        assert_eq!(geometric_pmf(2, 0.5).unwrap(), 0.125);
        assert_eq!(geometric_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(geometric_pmf(3, 0.0).unwrap(), 0.0);
        assert!(geometric_pmf(1, 1.0).is_err());
        assert!(geometric_pmf(1, -0.1).is_err());
    }

    #[test]
    fn pmf_sums_to_one() {
        for &q in &[0.0, 0.1, 0.5, 0.9, 0.99] {
            let mut cum = 0.0;
            let mut k = 0;
            while cum <= 1.0 - 1e-13 {
                cum += geometric_pmf(k, q).unwrap();
                k += 1;
            }
            assert!((cum - 1.0).abs() < 1e-12, "q={q} cum={cum}");
        }
    }

    #[test]
    fn burst_sampling() {
        let mut rng = device_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_burst_duration(0.0, &mut rng).unwrap(), 0);
        }
        assert!(sample_burst_duration(1.0, &mut rng).is_err());

        let n = 1_000_000;
        let mut rng = device_rng(2, 0);
        let mean = (0..n)
            .map(|_| sample_burst_duration(0.5, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");

        let a: Vec<u64> = {
            let mut r = device_rng(9, 5);
            (0..50).map(|_| sample_burst_duration(0.7, &mut r).unwrap()).collect()
        };
        let b: Vec<u64> = {
            let mut r = device_rng(9, 5);
            (0..50).map(|_| sample_burst_duration(0.7, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn chain_degenerate_cases() {
        let mut rng = device_rng(3, 0);
        let never = MarkovParams::new(0.0, 0.5, 1.0).unwrap();
        assert!(simulate_chain("d", &never, 1000, &mut rng).unwrap().is_empty());

        // Always activating with single-slot bursts: every idle slot is
        // followed by a one-slot transmission.
        let always = MarkovParams::new(1.0, 0.0, 1.0).unwrap();
        let trace = simulate_chain("d", &always, 10, &mut rng).unwrap();
        let starts: Vec<u64> = trace.starts().collect();
        assert_eq!(starts, vec![1, 3, 5, 7, 9]);
        assert!(trace.transmissions().iter().all(|t| t.duration == 1));
        assert_eq!(trace.rate_active(), Some(1.0));
        assert!(simulate_chain("d", &always, 0, &mut rng).is_err());
    }

    #[test]
    fn stationary_fraction() {
        let params = MarkovParams::new(0.1, 0.5, 0.0).unwrap();
        let horizon = 1_000_000;
        let mut rng = device_rng(11, 0);
        let trace = simulate_chain("d", &params, horizon, &mut rng).unwrap();
        let frac = trace.active_slots() as f64 / horizon as f64;
        assert!((params.stationary_active_fraction() - 0.1 / 0.6).abs() < 1e-15);
        assert!((frac - 0.1667).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn inter_arrivals() {
        let trace = Trace::new(
            "d",
            200,
            vec![Transmission::new(100, 1), Transmission::new(130, 2), Transmission::new(160, 1)],
        )
        .unwrap();
        assert_eq!(inter_arrival_times(&trace), vec![30, 30]);
        let trace = Trace::new("d", 200, vec![Transmission::new(5, 1)]).unwrap();
        assert!(inter_arrival_times(&trace).is_empty());
        let trace = Trace::new(
            "d",
            200,
            vec![Transmission::new(5, 1), Transmission::new(6, 1), Transmission::new(106, 1)],
        )
        .unwrap();
        assert_eq!(inter_arrival_times(&trace), vec![1, 100]);
    }

    #[test]
    fn trace_invariants_rejected() {
        assert!(Trace::new("d", 10, vec![Transmission::new(0, 0)]).is_err());
        assert!(Trace::new("d", 10, vec![Transmission::new(8, 3)]).is_err());
        assert!(Trace::new("d", 10, vec![Transmission::new(2, 2), Transmission::new(3, 1)]).is_err());
        assert!(Trace::new("d", 10, vec![Transmission::new(2, 1), Transmission::new(2, 1)]).is_err());
    }

    #[test]
    fn device_state_counts_down() {
        let mut s = DeviceState::Active { remaining: 3 };
        s = s.tick();
        assert_eq!(s, DeviceState::Active { remaining: 2 });
        s = s.tick().tick();
        assert!(s.is_idle());
    }

    #[test]
    fn markov_params_domain() {
        assert!(MarkovParams::new(1.1, 0.0, 0.0).is_err());
        assert!(MarkovParams::new(0.5, 1.0, 0.0).is_err());
        assert!(MarkovParams::new(0.5, 0.2, -1.0).is_err());
    }
}
