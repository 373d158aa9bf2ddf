// SPDX-License-Identifier: Apache-2.0

//! Static quantities derived from a scenario without simulating it.

use std::collections::BTreeMap;

use super::{Placement, Scenario, SensorStream};

/// Bandwidth of `stream` in bits per second after `compression` and
/// sub-sampling by `rate_divisor`.
pub fn sensor_bandwidth(stream: &SensorStream, compression: f64, rate_divisor: u32) -> f64 {
    debug_assert!(compression >= 1.0 && rate_divisor >= 1);
    stream.bits_per_sample() * (stream.rate_hz / f64::from(rate_divisor)) / compression
}

/// Average power ceiling in mW that drains `capacity_wh` in `target_hours`.
pub fn power_budget(capacity_wh: f64, target_hours: f64) -> f64 {
    1000.0 * capacity_wh / target_hours
}

/// One raw sensor stream that leaves the device.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamDemand {
    pub stream: String,
    pub divisor: u32,
    pub compression: f64,
    /// Bits per second before link scaling.
    pub bandwidth_bps: f64,
    /// Offloaded primitive whose demand sets the rate.
    pub owner: String,
    pub consumers: Vec<String>,
}

/// Raw streams that must be uploaded under the scenario's placement.
///
/// A stream demanded by several offloaded primitives is uploaded once, at the
/// highest bandwidth any of them asks for. On-device consumers of the same
/// stream do not remove the upload.
pub fn stream_demands(scenario: &Scenario) -> Vec<StreamDemand> {
    let mut by_stream: BTreeMap<&str, StreamDemand> = BTreeMap::new();
    for primitive in &scenario.primitives {
        if scenario.placement_of(primitive) != Placement::Offload {
            continue;
        }
        for demand in &primitive.sensors {
            let Some(stream) = scenario.sensor(&demand.stream) else {
                continue;
            };
            let compression = primitive.compression_for(demand);
            let bandwidth = sensor_bandwidth(stream, compression, demand.divisor);
            match by_stream.get_mut(demand.stream.as_str()) {
                Some(existing) => {
                    existing.consumers.push(primitive.id.clone());
                    if bandwidth > existing.bandwidth_bps {
                        existing.bandwidth_bps = bandwidth;
                        existing.divisor = demand.divisor;
                        existing.compression = compression;
                        existing.owner = primitive.id.clone();
                    }
                }
                None => {
                    by_stream.insert(
                        &demand.stream,
                        StreamDemand {
                            stream: demand.stream.clone(),
                            divisor: demand.divisor,
                            compression,
                            bandwidth_bps: bandwidth,
                            owner: primitive.id.clone(),
                            consumers: vec![primitive.id.clone()],
                        },
                    );
                }
            }
        }
    }
    by_stream.into_values().collect()
}

/// Upload demand in bytes per second attributed to each primitive.
///
/// On-device primitives contribute their signal rate. Offloaded primitives
/// contribute the streams they own in [`stream_demands`], so the values sum to
/// the total uplink demand. Link scaling is applied.
pub fn effective_upload_bytes(scenario: &Scenario) -> BTreeMap<String, f64> {
    let factor = scenario.link.factor();
    let mut out: BTreeMap<String, f64> = scenario
        .primitives
        .iter()
        .map(|p| {
            let own = match scenario.placement_of(p) {
                Placement::OnDevice => p.signal_rate * factor,
                Placement::Offload => 0.0,
            };
            (p.id.clone(), own)
        })
        .collect();
    for demand in stream_demands(scenario) {
        *out.entry(demand.owner).or_default() += demand.bandwidth_bps / 8.0 * factor;
    }
    out
}

/// Total uplink demand in bytes per second.
pub fn total_upload_bytes(scenario: &Scenario) -> f64 {
    effective_upload_bytes(scenario).values().fold(0.0, |a, b| a + b)
}
