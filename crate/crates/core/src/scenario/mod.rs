// SPDX-License-Identifier: Apache-2.0

//! Declarative device architecture and workload model.
//!
//! A [`Scenario`] bundles the devices and their regulator tree, the sensor
//! streams, the egocentric primitives (with their on-device taskgraphs), the
//! placement of each primitive, and the uplink radio. Scenario files are TOML
//! documents; see [`load_scenario`] and [`parse_scenario`].

mod derive;
mod load;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use derive::{
    effective_upload_bytes, power_budget, sensor_bandwidth, stream_demands, total_upload_bytes,
    StreamDemand,
};
pub use load::{
    load_scenario, parse_scenario, to_toml_string, validate, Diagnostic, LoadOptions,
    ScenarioError,
};

/// Identifier of the virtual root of every rail tree.
pub const BATTERY: &str = "battery";

/// Default virtual simulation time in seconds.
pub const DEFAULT_DURATION_S: f64 = 60.0;

/// Default sustained (thermal) power limit in milliwatts.
pub const DEFAULT_THERMAL_LIMIT_MW: f64 = 2000.0;

/// Default bandwidth under which the fallback radio may be selected.
pub const DEFAULT_FALLBACK_THRESHOLD_BPS: f64 = 1.0e6;

/// Default upper bound on generated upload packet rate.
pub const DEFAULT_UPLOAD_PACKET_HZ: f64 = 100.0;

/// Closed set of resource categories a device can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceCategory {
    Sensor,
    Compute,
    Memory,
    Storage,
    Interconnect,
    Radio,
    Output,
    PowerDelivery,
    SocTopLevel,
}

impl ResourceCategory {
    pub const ALL: [ResourceCategory; 9] = [
        ResourceCategory::Sensor,
        ResourceCategory::Compute,
        ResourceCategory::Memory,
        ResourceCategory::Storage,
        ResourceCategory::Interconnect,
        ResourceCategory::Radio,
        ResourceCategory::Output,
        ResourceCategory::PowerDelivery,
        ResourceCategory::SocTopLevel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceCategory::Sensor => "sensor",
            ResourceCategory::Compute => "compute",
            ResourceCategory::Memory => "memory",
            ResourceCategory::Storage => "storage",
            ResourceCategory::Interconnect => "interconnect",
            ResourceCategory::Radio => "radio",
            ResourceCategory::Output => "output",
            ResourceCategory::PowerDelivery => "power_delivery",
            ResourceCategory::SocTopLevel => "soc_top_level",
        }
    }

    /// Devices of these categories move bytes: task work is a payload size.
    pub fn is_transfer(self) -> bool {
        matches!(
            self,
            ResourceCategory::Interconnect | ResourceCategory::Radio | ResourceCategory::Memory
        )
    }
}

impl fmt::Display for ResourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerState {
    pub name: String,
    pub power_mw: f64,
}

/// Split of a device's power by process/power type. Fractions sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDecomposition {
    #[serde(default)]
    pub digital_dynamic: f64,
    #[serde(default)]
    pub digital_leakage: f64,
    #[serde(default)]
    pub analog: f64,
    #[serde(default)]
    pub rf: f64,
}

impl PowerDecomposition {
    pub fn fractions(&self) -> [f64; 4] {
        [self.digital_dynamic, self.digital_leakage, self.analog, self.rf]
    }

    pub fn sum(&self) -> f64 {
        self.fractions().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: String,
    pub category: ResourceCategory,
    #[serde(default)]
    pub states: Vec<PowerState>,
    /// Throughput-based power term, nanojoules per byte moved.
    #[serde(default)]
    pub energy_per_byte_nj: f64,
    /// Work units (compute) or bytes (transfer devices) served per second.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_rate: Option<f64>,
    #[serde(default)]
    pub capacity_bytes: f64,
    pub rail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_decomposition: Option<PowerDecomposition>,
}

impl Device {
    pub fn state_power(&self, name: &str) -> Option<f64> {
        self.states.iter().find(|s| s.name == name).map(|s| s.power_mw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RailNode {
    pub id: String,
    pub efficiency: f64,
    pub parent: String,
}

/// Compression applied to a stream before upload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub device: String,
    /// Work units charged to the encoder per raw input byte.
    pub work_per_raw_byte: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorStream {
    pub id: String,
    pub device: String,
    #[serde(default = "one_u32")]
    pub width: u32,
    #[serde(default = "one_u32")]
    pub height: u32,
    #[serde(default = "one_u32")]
    pub channels: u32,
    pub bit_depth: u32,
    pub rate_hz: f64,
    /// Interconnect that carries raw samples into memory on the upload path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interconnect: Option<String>,
    /// Memory device buffering the raw and encoded samples on the upload path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<Encoder>,
}

impl SensorStream {
    pub fn bits_per_sample(&self) -> f64 {
        f64::from(self.width) * f64::from(self.height) * f64::from(self.channels) * f64::from(self.bit_depth)
    }

    /// Raw bandwidth in bits per second.
    pub fn raw_bandwidth(&self) -> f64 {
        self.bits_per_sample() * self.rate_hz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub device: String,
    /// Work units for compute devices, payload bytes for transfer devices.
    #[serde(default)]
    pub work: f64,
    #[serde(default)]
    pub deps: Vec<String>,
    /// Memory device holding this task's footprint and output buffer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<String>,
    #[serde(default)]
    pub memory_footprint: f64,
    #[serde(default)]
    pub output_bytes: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverrunPolicy {
    /// A trigger that fires while the previous firing is running is still queued.
    #[default]
    Queue,
    /// Such a trigger is dropped.
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub stream: String,
    #[serde(default = "one_u32")]
    pub divisor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskGraph {
    pub id: String,
    pub trigger: Trigger,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline_s: Option<f64>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub on_overrun: OverrunPolicy,
    pub tasks: Vec<Task>,
}

/// A primitive's demand on one sensor stream when the primitive is offloaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorDemand {
    pub stream: String,
    #[serde(default = "one_u32")]
    pub divisor: u32,
    /// Overrides the primitive's `offload_compression` for this stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compression: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    OnDevice,
    Offload,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::OnDevice => "on_device",
            Placement::Offload => "offload",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub id: String,
    pub sensors: Vec<SensorDemand>,
    /// Egocentric signal output, bytes per second.
    #[serde(default)]
    pub signal_rate: f64,
    #[serde(default = "one_f64")]
    pub offload_compression: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced: Option<Placement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_device_graph: Option<TaskGraph>,
}

impl Primitive {
    pub fn is_free(&self) -> bool {
        self.forced.is_none()
    }

    pub fn compression_for(&self, demand: &SensorDemand) -> f64 {
        demand.compression.unwrap_or(self.offload_compression)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioProfile {
    pub id: String,
    pub throughput_bps: f64,
    pub maintenance_power_mw: f64,
    pub tx_energy_per_byte_nj: f64,
    pub max_bandwidth_bps: f64,
}

impl RadioProfile {
    /// Power of the `tx` state: link upkeep plus transmitting at full throughput.
    pub fn tx_power_mw(&self) -> f64 {
        self.maintenance_power_mw + self.tx_energy_per_byte_nj * self.throughput_bps / 8.0 * 1e-6
    }

    /// Average power at a sustained demand in bits per second.
    pub fn power_at_demand_mw(&self, demand_bps: f64) -> f64 {
        self.maintenance_power_mw + self.tx_energy_per_byte_nj * demand_bps / 8.0 * 1e-6
    }
}

/// The uplink radio device and the link profiles it can operate with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub device: String,
    pub primary: RadioProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<RadioProfile>,
    #[serde(default = "default_fallback_threshold")]
    pub fallback_threshold_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub capacity_wh: f64,
    pub target_hours: f64,
}

/// Extra link-side scaling applied on top of each stream's own compression.
///
/// Only the uploaded payload is scaled; capture and encoding work stay fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkScaling {
    #[serde(default = "one_f64")]
    pub extra_compression: f64,
    #[serde(default = "one_u32")]
    pub rate_divisor: u32,
}

impl Default for LinkScaling {
    fn default() -> Self {
        LinkScaling { extra_compression: 1.0, rate_divisor: 1 }
    }
}

impl LinkScaling {
    pub fn factor(&self) -> f64 {
        1.0 / (self.extra_compression * f64::from(self.rate_divisor))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    pub battery: Battery,
    #[serde(default = "default_thermal_limit")]
    pub thermal_limit_mw: f64,
    #[serde(default = "default_packet_hz")]
    pub upload_packet_hz: f64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub link: LinkScaling,
    #[serde(default)]
    pub placement: BTreeMap<String, Placement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioConfig>,
    #[serde(default)]
    pub rails: Vec<RailNode>,
    #[serde(default)]
    pub devices: Vec<Device>,
    #[serde(default)]
    pub sensors: Vec<SensorStream>,
    #[serde(default)]
    pub primitives: Vec<Primitive>,
}

/// A whole-scenario placement preset or explicit assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlacementPreset {
    FullOffload,
    FullOnDevice,
    Explicit(BTreeMap<String, Placement>),
}

impl Scenario {
    pub fn device(&self, id: &str) -> Option<&Device> {
        self.devices.iter().find(|d| d.id == id)
    }

    pub fn rail(&self, id: &str) -> Option<&RailNode> {
        self.rails.iter().find(|r| r.id == id)
    }

    pub fn sensor(&self, id: &str) -> Option<&SensorStream> {
        self.sensors.iter().find(|s| s.id == id)
    }

    pub fn primitive(&self, id: &str) -> Option<&Primitive> {
        self.primitives.iter().find(|p| p.id == id)
    }

    pub fn placement_of(&self, primitive: &Primitive) -> Placement {
        primitive
            .forced
            .or_else(|| self.placement.get(&primitive.id).copied())
            .unwrap_or(Placement::Offload)
    }

    pub fn radio_device(&self) -> Option<&str> {
        self.radio.as_ref().map(|r| r.device.as_str())
    }

    pub fn battery_budget_mw(&self) -> f64 {
        power_budget(self.battery.capacity_wh, self.battery.target_hours)
    }

    /// Power of `state` on `device`, with the uplink radio's `maintain` and
    /// `tx` states taken from the active radio profile.
    pub fn state_power(&self, device: &Device, state: &str) -> Option<f64> {
        if let Some(radio) = &self.radio {
            if radio.device == device.id {
                match state {
                    "maintain" => return Some(radio.primary.maintenance_power_mw),
                    "tx" => return Some(radio.primary.tx_power_mw()),
                    _ => {}
                }
            }
        }
        device.state_power(state)
    }

    /// Returns a copy with the given placement applied. Forced primitives keep
    /// their forced placement.
    pub fn with_placement(&self, preset: &PlacementPreset) -> Scenario {
        let mut out = self.clone();
        out.placement = self
            .primitives
            .iter()
            .map(|p| {
                let chosen = match (p.forced, preset) {
                    (Some(forced), _) => forced,
                    (None, PlacementPreset::FullOffload) => Placement::Offload,
                    (None, PlacementPreset::FullOnDevice) => Placement::OnDevice,
                    (None, PlacementPreset::Explicit(map)) => {
                        map.get(&p.id).copied().unwrap_or_else(|| self.placement_of(p))
                    }
                };
                (p.id.clone(), chosen)
            })
            .collect();
        out
    }
}

fn one_u32() -> u32 {
    1
}

fn one_f64() -> f64 {
    1.0
}

fn default_duration() -> f64 {
    DEFAULT_DURATION_S
}

fn default_thermal_limit() -> f64 {
    DEFAULT_THERMAL_LIMIT_MW
}

fn default_packet_hz() -> f64 {
    DEFAULT_UPLOAD_PACKET_HZ
}

fn default_fallback_threshold() -> f64 {
    DEFAULT_FALLBACK_THRESHOLD_BPS
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}
