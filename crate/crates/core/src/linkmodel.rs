//! Back-of-the-envelope link figures for a LEO relay: RTC drift, latency,
//! along-track offset, Doppler and beam footprint.
//!
//! All values are kept at full `f64` precision; rounding happens only when a
//! report is rendered.

use std::fmt::Write as _;

use thiserror::Error;

pub const LIGHT_SPEED_MPS: f64 = 3.0e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("parameter `{0}` must be strictly positive and finite")]
    NonPositive(&'static str),
    #[error("beamwidth must lie in (0, 180) degrees, got {0}")]
    Beamwidth(f64),
    #[error("unknown parameter `{0}`")]
    Unknown(String),
}

/// RTC drift in milliseconds after `elapsed_s` seconds at `ppm`.
pub fn clock_drift_ms(ppm: f64, elapsed_s: f64) -> f64 {
    ppm / 1e6 * elapsed_s * 1000.0
}

pub fn propagation_delay_s(distance_m: f64) -> f64 {
    distance_m / LIGHT_SPEED_MPS
}

pub fn transmission_time_s(bits: f64, bps: f64) -> f64 {
    bits / bps
}

pub fn total_latency_s(distance_m: f64, bits: f64, bps: f64) -> f64 {
    propagation_delay_s(distance_m) + transmission_time_s(bits, bps)
}

/// Ground-relative distance covered in `dt_s`, worst case (retrograde orbit
/// against Earth rotation).
pub fn travel_offset_m(orbital_speed_mps: f64, earth_speed_mps: f64, dt_s: f64) -> f64 {
    (orbital_speed_mps + earth_speed_mps) * dt_s
}

pub fn doppler_shift_hz(relative_speed_mps: f64, carrier_hz: f64) -> f64 {
    relative_speed_mps / LIGHT_SPEED_MPS * carrier_hz
}

/// Mean rate of change over a pass that sweeps from `+shift` to `-shift`.
pub fn doppler_rate_hz_per_s(shift_hz: f64, pass_s: f64) -> f64 {
    2.0 * shift_hz / pass_s
}

pub fn beam_footprint_radius_m(altitude_m: f64, full_beamwidth_deg: f64) -> f64 {
    altitude_m * (full_beamwidth_deg / 2.0).to_radians().tan()
}

pub fn overhead_ratio(new_bits: f64, baseline_bits: f64) -> f64 {
    new_bits / baseline_bits - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub altitude_m: f64,
    /// Encrypted frame size.
    pub data_bits: f64,
    /// Unencrypted frame size the overhead is measured against.
    pub baseline_bits: f64,
    pub carrier_hz: f64,
    pub bandwidth_bps: f64,
    pub orbital_speed_mps: f64,
    pub earth_surface_speed_mps: f64,
    pub pass_duration_s: f64,
    pub beamwidth_deg: f64,
    pub rtc_ppm: f64,
    pub sync_interval_s: f64,
}

impl Default for LinkParams {
    /// 500 km LEO, 406 MHz-class UHF at 9.6 kb/s, twice-daily clock sync.
    fn default() -> Self {
        Self {
            altitude_m: 500_000.0,
            data_bits: 448.0,
            baseline_bits: 250.0,
            carrier_hz: 4.0e8,
            bandwidth_bps: 9_600.0,
            orbital_speed_mps: 7_800.0,
            earth_surface_speed_mps: 465.0,
            pass_duration_s: 600.0,
            beamwidth_deg: 10.0,
            rtc_ppm: 3.0,
            sync_interval_s: 43_200.0,
        }
    }
}

impl LinkParams {
    pub const NAMES: [&'static str; 11] = [
        "altitude_m",
        "data_bits",
        "baseline_bits",
        "carrier_hz",
        "bandwidth_bps",
        "orbital_speed_mps",
        "earth_surface_speed_mps",
        "pass_duration_s",
        "beamwidth_deg",
        "rtc_ppm",
        "sync_interval_s",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), LinkError> {
        let slot = match name {
            "altitude_m" => &mut self.altitude_m,
            "data_bits" => &mut self.data_bits,
            "baseline_bits" => &mut self.baseline_bits,
            "carrier_hz" => &mut self.carrier_hz,
            "bandwidth_bps" => &mut self.bandwidth_bps,
            "orbital_speed_mps" => &mut self.orbital_speed_mps,
            "earth_surface_speed_mps" => &mut self.earth_surface_speed_mps,
            "pass_duration_s" => &mut self.pass_duration_s,
            "beamwidth_deg" => &mut self.beamwidth_deg,
            "rtc_ppm" => &mut self.rtc_ppm,
            "sync_interval_s" => &mut self.sync_interval_s,
            other => return Err(LinkError::Unknown(other.to_string())),
        };
        *slot = value;
        Ok(())
    }

    fn values(&self) -> [f64; 11] {
        [
            self.altitude_m,
            self.data_bits,
            self.baseline_bits,
            self.carrier_hz,
            self.bandwidth_bps,
            self.orbital_speed_mps,
            self.earth_surface_speed_mps,
            self.pass_duration_s,
            self.beamwidth_deg,
            self.rtc_ppm,
            self.sync_interval_s,
        ]
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        for (name, v) in Self::NAMES.iter().zip(self.values()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(LinkError::NonPositive(name));
            }
        }
        if self.beamwidth_deg >= 180.0 {
            return Err(LinkError::Beamwidth(self.beamwidth_deg));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub drift_ms: f64,
    pub one_way_prop_ms: f64,
    pub round_trip_prop_ms: f64,
    pub tx_time_ms: f64,
    pub baseline_tx_time_ms: f64,
    pub total_latency_ms: f64,
    pub baseline_total_latency_ms: f64,
    /// Extra latency of the encrypted frame over the baseline frame.
    pub latency_delta_ms: f64,
    pub orbital_offset_m: f64,
    pub earth_offset_m: f64,
    pub travel_offset_m: f64,
    pub doppler_shift_hz: f64,
    pub doppler_rate_hz_s: f64,
    pub doppler_delta_hz: f64,
    pub footprint_radius_m: f64,
    pub overhead_ratio: f64,
}

/// Evaluate every figure for `params`.
pub fn run(params: &LinkParams) -> Result<LinkReport, LinkError> {
    params.validate()?;
    let p = params;
    let one_way = propagation_delay_s(p.altitude_m);
    let total = total_latency_s(p.altitude_m, p.data_bits, p.bandwidth_bps);
    let baseline_total = total_latency_s(p.altitude_m, p.baseline_bits, p.bandwidth_bps);
    let delta_s = total - baseline_total;
    let shift = doppler_shift_hz(
        p.orbital_speed_mps + p.earth_surface_speed_mps,
        p.carrier_hz,
    );
    let rate = doppler_rate_hz_per_s(shift, p.pass_duration_s);
    Ok(LinkReport {
        drift_ms: clock_drift_ms(p.rtc_ppm, p.sync_interval_s),
        one_way_prop_ms: one_way * 1e3,
        round_trip_prop_ms: 2.0 * one_way * 1e3,
        tx_time_ms: transmission_time_s(p.data_bits, p.bandwidth_bps) * 1e3,
        baseline_tx_time_ms: transmission_time_s(p.baseline_bits, p.bandwidth_bps) * 1e3,
        total_latency_ms: total * 1e3,
        baseline_total_latency_ms: baseline_total * 1e3,
        latency_delta_ms: delta_s * 1e3,
        orbital_offset_m: travel_offset_m(p.orbital_speed_mps, 0.0, delta_s),
        earth_offset_m: travel_offset_m(0.0, p.earth_surface_speed_mps, delta_s),
        travel_offset_m: travel_offset_m(p.orbital_speed_mps, p.earth_surface_speed_mps, delta_s),
        doppler_shift_hz: shift,
        doppler_rate_hz_s: rate,
        doppler_delta_hz: rate * delta_s,
        footprint_radius_m: beam_footprint_radius_m(p.altitude_m, p.beamwidth_deg),
        overhead_ratio: overhead_ratio(p.data_bits, p.baseline_bits),
    })
}

impl LinkReport {
    pub fn quantities(&self) -> Vec<Quantity> {
        let q = |name, value, unit| Quantity { name, value, unit };
        vec![
            q("drift_ms", self.drift_ms, "ms"),
            q("one_way_prop_ms", self.one_way_prop_ms, "ms"),
            q("round_trip_prop_ms", self.round_trip_prop_ms, "ms"),
            q("tx_time_ms", self.tx_time_ms, "ms"),
            q("baseline_tx_time_ms", self.baseline_tx_time_ms, "ms"),
            q("total_latency_ms", self.total_latency_ms, "ms"),
            q(
                "baseline_total_latency_ms",
                self.baseline_total_latency_ms,
                "ms",
            ),
            q("latency_delta_ms", self.latency_delta_ms, "ms"),
            q("orbital_offset_m", self.orbital_offset_m, "m"),
            q("earth_offset_m", self.earth_offset_m, "m"),
            q("travel_offset_m", self.travel_offset_m, "m"),
            q("doppler_shift_hz", self.doppler_shift_hz, "Hz"),
            q("doppler_rate_hz_s", self.doppler_rate_hz_s, "Hz/s"),
            q("doppler_delta_hz", self.doppler_delta_hz, "Hz"),
            q("footprint_radius_m", self.footprint_radius_m, "m"),
            q("overhead_ratio", self.overhead_ratio, "1"),
        ]
    }

    /// Aligned table, values rounded for display.
    pub fn to_text(&self) -> String {
        let quantities = self.quantities();
        let width = quantities.iter().map(|q| q.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for q in quantities {
            let _ = writeln!(out, "{:<width$}  {:>12.3} {}", q.name, q.value, q.unit);
        }
        out
    }

    /// `name = value` lines at full precision.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for q in self.quantities() {
            let _ = writeln!(out, "{} = {:?}", q.name, q.value);
        }
        out
    }
}
