// SPDX-License-Identifier: Apache-2.0

//! Bottom-up power estimation from a simulation trace.
//!
//! Each device contributes its duty-weighted state power plus a per-byte term.
//! Device loads are summed onto their rails and pushed up the regulator tree;
//! regulator losses form the `power_delivery` category. Rounding to two
//! significant figures only ever happens in [`render_percentages`].

mod rails;
mod render;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scenario::{Device, ResourceCategory, Scenario};
use crate::sim::{DeviceTimeline, SimTrace};

pub use rails::{rail_losses, RailFlow};
pub use render::{render_percentages, round_sig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerError {
    #[error("device `{device}` has no power for state `{state}`")]
    UnknownState { device: String, state: String },
    #[error("unknown rail `{0}`")]
    UnknownRail(String),
    #[error("rail cycle through `{0}`")]
    RailCycle(String),
    #[error("rail `{rail}` efficiency {efficiency} is outside (0, 1]")]
    BadEfficiency { rail: String, efficiency: f64 },
    #[error("total power is zero")]
    ZeroTotal,
    #[error("device `{0}` is missing from the trace")]
    MissingDevice(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rounding {
    pub sig_figs: usize,
    /// Stored values are never rounded; this stays false.
    pub applied: bool,
}

impl Default for Rounding {
    fn default() -> Self {
        Rounding { sig_figs: 2, applied: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerReport {
    pub per_component: BTreeMap<String, f64>,
    pub categories: BTreeMap<String, ResourceCategory>,
    pub per_rail_loss: BTreeMap<String, f64>,
    pub per_category: BTreeMap<ResourceCategory, f64>,
    pub total: f64,
    pub battery_draw: f64,
    pub rounding: Rounding,
}

impl PowerReport {
    /// Devices followed by rail losses, each with its power in mW.
    pub fn entries(&self) -> impl Iterator<Item = (&String, f64)> {
        self.per_component
            .iter()
            .chain(self.per_rail_loss.iter())
            .map(|(k, v)| (k, *v))
    }

    /// Category of a device id or `power_delivery` for a rail id.
    pub fn category_of(&self, id: &str) -> ResourceCategory {
        self.categories.get(id).copied().unwrap_or(ResourceCategory::PowerDelivery)
    }

    pub fn category(&self, c: ResourceCategory) -> f64 {
        self.per_category.get(&c).copied().unwrap_or(0.0)
    }

    pub fn share(&self, c: ResourceCategory) -> f64 {
        if self.total > 0.0 {
            self.category(c) / self.total
        } else {
            0.0
        }
    }

    /// Builds a report from device powers and the rail tree.
    pub fn assemble(scenario: &Scenario, per_component: BTreeMap<String, f64>) -> Result<PowerReport, PowerError> {
        let mut attached: BTreeMap<String, f64> = BTreeMap::new();
        let mut categories = BTreeMap::new();
        let mut per_category: BTreeMap<ResourceCategory, f64> = BTreeMap::new();
        for d in &scenario.devices {
            let mw = *per_component.get(&d.id).ok_or_else(|| PowerError::MissingDevice(d.id.clone()))?;
            *attached.entry(d.rail.clone()).or_default() += mw;
            categories.insert(d.id.clone(), d.category);
            *per_category.entry(d.category).or_default() += mw;
        }
        let flow = rail_losses(&attached, &scenario.rails)?;
        let loss_sum: f64 = flow.loss.values().fold(0.0, |a, b| a + b);
        *per_category.entry(ResourceCategory::PowerDelivery).or_default() += loss_sum;
        let total = per_component.values().fold(0.0, |a, b| a + b) + loss_sum;
        Ok(PowerReport {
            per_component,
            categories,
            per_rail_loss: flow.loss,
            per_category,
            total,
            battery_draw: flow.battery_draw,
            rounding: Rounding::default(),
        })
    }
}

/// Average power of a device over `duration` using its own state table.
pub fn device_power(timeline: &DeviceTimeline, device: &Device, duration: f64) -> Result<f64, PowerError> {
    power_with(timeline, device, duration, |s| device.state_power(s))
}

fn power_with(
    timeline: &DeviceTimeline,
    device: &Device,
    duration: f64,
    state_power: impl Fn(&str) -> Option<f64>,
) -> Result<f64, PowerError> {
    if duration <= 0.0 {
        return Ok(0.0);
    }
    let mut energy = 0.0;
    for (state, secs) in &timeline.state_seconds {
        let p = state_power(state).ok_or_else(|| PowerError::UnknownState {
            device: device.id.clone(),
            state: state.clone(),
        })?;
        energy += secs * p;
    }
    Ok(energy / duration + timeline.bytes_moved * device.energy_per_byte_nj / duration * 1e-6)
}

/// Per-device power for a trace of `scenario`.
pub fn component_powers(trace: &SimTrace, scenario: &Scenario) -> Result<BTreeMap<String, f64>, PowerError> {
    scenario
        .devices
        .iter()
        .map(|d| {
            let tl = trace.timelines.get(&d.id).ok_or_else(|| PowerError::MissingDevice(d.id.clone()))?;
            let mw = power_with(tl, d, trace.duration_s, |s| scenario.state_power(d, s))?;
            Ok((d.id.clone(), mw))
        })
        .collect()
}

pub fn aggregate(trace: &SimTrace, scenario: &Scenario) -> Result<PowerReport, PowerError> {
    PowerReport::assemble(scenario, component_powers(trace, scenario)?)
}
