// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::SimTrace;
use crate::scenario::RadioProfile;

/// Fraction of the run each device spent in each state.
pub fn duty_cycles(trace: &SimTrace) -> BTreeMap<String, BTreeMap<String, f64>> {
    trace
        .timelines
        .iter()
        .map(|(id, tl)| {
            let states = tl
                .state_seconds
                .iter()
                .map(|(s, secs)| {
                    let frac = if trace.duration_s > 0.0 { secs / trace.duration_s } else { 0.0 };
                    (s.clone(), frac)
                })
                .collect();
            (id.clone(), states)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioSchedule {
    pub tx_duty: f64,
    pub maintain_duty: f64,
    pub feasible: bool,
}

/// Analytic duty of a radio carrying `demand_bytes_per_s` on `profile`.
pub fn radio_schedule(demand_bytes_per_s: f64, profile: &RadioProfile) -> RadioSchedule {
    let bits = 8.0 * demand_bytes_per_s;
    let tx_duty = (bits / profile.throughput_bps).min(1.0);
    RadioSchedule {
        tx_duty,
        maintain_duty: 1.0 - tx_duty,
        feasible: bits <= profile.max_bandwidth_bps,
    }
}
