// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::derive::{sensor_bandwidth, stream_demands};
use super::{Placement, ResourceCategory, Scenario, TaskGraph, BATTERY};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Ignore unknown keys instead of rejecting the file.
    pub lenient: bool,
}

/// One validation finding, tied to the entity that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid scenario:\n{}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

impl ScenarioError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ScenarioError::Invalid(d) => d,
            _ => &[],
        }
    }
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

pub fn load_scenario(path: &Path, options: LoadOptions) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, options)
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str, options: LoadOptions) -> Result<Scenario, ScenarioError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut unknown = Vec::new();
    let scenario: Scenario = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if !options.lenient && !unknown.is_empty() {
        return Err(ScenarioError::UnknownKeys(unknown));
    }
    validate(&scenario)?;
    Ok(scenario)
}

pub fn to_toml_string(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario serializes to TOML")
}

/// Checks every cross-reference and numeric invariant, reporting all findings.
pub fn validate(scenario: &Scenario) -> Result<(), ScenarioError> {
    let mut v = Validator { s: scenario, diags: Vec::new() };
    v.top_level();
    v.ids();
    v.rails();
    v.devices();
    v.sensors();
    v.primitives();
    v.placement();
    v.radio();
    if v.diags.is_empty() {
        Ok(())
    } else {
        Err(ScenarioError::Invalid(v.diags))
    }
}

struct Validator<'a> {
    s: &'a Scenario,
    diags: Vec<Diagnostic>,
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

impl<'a> Validator<'a> {
    fn err(&mut self, entity: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic { entity: entity.into(), message: message.into() });
    }

    fn top_level(&mut self) {
        let s = self.s;
        if !positive(s.duration_s) {
            self.err("duration_s", "must be > 0");
        }
        if !positive(s.battery.capacity_wh) {
            self.err("battery", "capacity_wh must be > 0");
        }
        if !positive(s.battery.target_hours) {
            self.err("battery", "target_hours must be > 0");
        }
        if !positive(s.thermal_limit_mw) {
            self.err("thermal_limit_mw", "must be > 0");
        }
        if !positive(s.upload_packet_hz) {
            self.err("upload_packet_hz", "must be > 0");
        }
        if !(s.link.extra_compression >= 1.0) || s.link.rate_divisor < 1 {
            self.err("link", "extra_compression and rate_divisor must be >= 1");
        }
    }

    fn ids(&mut self) {
        let mut seen: HashSet<&str> = HashSet::new();
        let s = self.s;
        let named = s
            .devices
            .iter()
            .map(|d| ("device", d.id.as_str()))
            .chain(s.rails.iter().map(|r| ("rail", r.id.as_str())));
        for (kind, id) in named {
            if id == BATTERY {
                self.err(id, format!("{kind} id `{BATTERY}` is reserved"));
            } else if !seen.insert(id) {
                self.err(id, format!("duplicate {kind} id"));
            }
        }
        let mut sensors = HashSet::new();
        for stream in &s.sensors {
            if !sensors.insert(stream.id.as_str()) {
                self.err(&stream.id, "duplicate sensor stream id");
            }
        }
        let mut prims = HashSet::new();
        for p in &s.primitives {
            if !prims.insert(p.id.as_str()) {
                self.err(&p.id, "duplicate primitive id");
            }
        }
    }

    fn rails(&mut self) {
        let s = self.s;
        let parents: HashMap<&str, &str> =
            s.rails.iter().map(|r| (r.id.as_str(), r.parent.as_str())).collect();
        for rail in &s.rails {
            if !(rail.efficiency.is_finite() && rail.efficiency > 0.0 && rail.efficiency <= 1.0) {
                self.err(&rail.id, format!("efficiency {} outside (0, 1]", rail.efficiency));
            }
            if rail.parent != BATTERY && !parents.contains_key(rail.parent.as_str()) {
                self.err(&rail.id, format!("unknown parent rail `{}`", rail.parent));
            }
        }
        let mut reported: BTreeSet<&str> = BTreeSet::new();
        for rail in &s.rails {
            let mut seen: Vec<&str> = vec![rail.id.as_str()];
            let mut cur = rail.parent.as_str();
            while cur != BATTERY {
                if seen.contains(&cur) {
                    if cur == rail.id && reported.insert(rail.id.as_str()) {
                        self.err(&rail.id, format!("rail cycle: {} -> {}", seen.join(" -> "), cur));
                    }
                    break;
                }
                seen.push(cur);
                match parents.get(cur) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
        }
    }

    fn rail_exists(&self, id: &str) -> bool {
        id == BATTERY || self.s.rails.iter().any(|r| r.id == id)
    }

    fn devices(&mut self) {
        let s = self.s;
        let radio_device = s.radio_device();
        for d in &s.devices {
            let mut names = HashSet::new();
            for st in &d.states {
                if !names.insert(st.name.as_str()) {
                    self.err(&d.id, format!("duplicate state `{}`", st.name));
                }
                if !non_negative(st.power_mw) {
                    self.err(&d.id, format!("state `{}` power must be >= 0", st.name));
                }
            }
            if !names.contains("idle") {
                self.err(&d.id, "missing `idle` state");
            }
            if radio_device == Some(d.id.as_str()) {
                for reserved in ["maintain", "tx"] {
                    if names.contains(reserved) {
                        self.err(&d.id, format!("state `{reserved}` comes from the radio profile"));
                    }
                }
            }
            if !non_negative(d.energy_per_byte_nj) {
                self.err(&d.id, "energy_per_byte_nj must be >= 0");
            }
            if let Some(rate) = d.service_rate {
                if !positive(rate) {
                    self.err(&d.id, "service_rate must be > 0");
                }
            }
            if !non_negative(d.capacity_bytes) {
                self.err(&d.id, "capacity_bytes must be >= 0");
            }
            if !self.rail_exists(&d.rail) {
                self.err(&d.id, format!("unknown rail `{}`", d.rail));
            }
            if let Some(dec) = &d.power_decomposition {
                if dec.fractions().iter().any(|f| !(0.0..=1.0).contains(f)) {
                    self.err(&d.id, "power_decomposition fractions must lie in [0, 1]");
                }
                if (dec.sum() - 1.0).abs() > 1e-9 {
                    self.err(&d.id, format!("power_decomposition sums to {}, not 1", dec.sum()));
                }
            }
        }
    }

    fn device_with(&mut self, owner: &str, id: &str, allowed: &[ResourceCategory], needs_rate: bool) {
        match self.s.device(id) {
            None => self.err(owner, format!("unknown device `{id}`")),
            Some(d) => {
                if !allowed.is_empty() && !allowed.contains(&d.category) {
                    self.err(owner, format!("device `{id}` has category {}", d.category));
                }
                if needs_rate && d.service_rate.is_none() {
                    self.err(owner, format!("device `{id}` has no service_rate"));
                }
            }
        }
    }

    fn sensors(&mut self) {
        use ResourceCategory::*;
        for stream in &self.s.sensors {
            let id = stream.id.as_str();
            self.device_with(id, &stream.device, &[Sensor], false);
            if stream.width < 1 || stream.height < 1 || stream.channels < 1 || stream.bit_depth < 1 {
                self.err(id, "width, height, channels and bit_depth must be >= 1");
            }
            if !positive(stream.rate_hz) {
                self.err(id, "rate_hz must be > 0");
            }
            if let Some(link) = &stream.interconnect {
                self.device_with(id, link, &[Interconnect], true);
            }
            if let Some(mem) = &stream.memory {
                self.device_with(id, mem, &[Memory, Storage], false);
            }
            if let Some(enc) = &stream.encoder {
                self.device_with(id, &enc.device, &[Compute], true);
                if !non_negative(enc.work_per_raw_byte) {
                    self.err(id, "encoder work_per_raw_byte must be >= 0");
                }
            }
        }
    }

    fn primitives(&mut self) {
        let s = self.s;
        for p in &s.primitives {
            let id = p.id.as_str();
            if !non_negative(p.signal_rate) {
                self.err(id, "signal_rate must be >= 0");
            }
            if !(p.offload_compression >= 1.0) {
                self.err(id, "offload_compression must be >= 1");
            }
            let mut compressed_bw = 0.0;
            let mut demanded = HashSet::new();
            for demand in &p.sensors {
                if !demanded.insert(demand.stream.as_str()) {
                    self.err(id, format!("stream `{}` demanded twice", demand.stream));
                }
                if demand.divisor < 1 {
                    self.err(id, format!("divisor for `{}` must be >= 1", demand.stream));
                }
                let compression = p.compression_for(demand);
                if !(compression >= 1.0) {
                    self.err(id, format!("compression for `{}` must be >= 1", demand.stream));
                }
                match s.sensor(&demand.stream) {
                    None => self.err(id, format!("unknown sensor stream `{}`", demand.stream)),
                    Some(stream) if demand.divisor >= 1 && compression >= 1.0 => {
                        compressed_bw += sensor_bandwidth(stream, compression, demand.divisor) / 8.0;
                    }
                    Some(_) => {}
                }
            }
            if p.signal_rate > compressed_bw * (1.0 + 1e-12) {
                self.err(
                    id,
                    format!(
                        "signal_rate {} B/s exceeds compressed sensor bandwidth {} B/s",
                        p.signal_rate, compressed_bw
                    ),
                );
            }
            if p.forced == Some(Placement::OnDevice) && p.on_device_graph.is_none() {
                self.err(id, "forced on_device but no on_device_graph");
            }
            if let Some(graph) = &p.on_device_graph {
                self.graph(graph);
            }
        }
    }

    fn graph(&mut self, g: &TaskGraph) {
        use ResourceCategory::*;
        let gid = format!("graph {}", g.id);
        if self.s.sensor(&g.trigger.stream).is_none() {
            self.err(&gid, format!("trigger references unknown stream `{}`", g.trigger.stream));
        }
        if g.trigger.divisor < 1 {
            self.err(&gid, "trigger divisor must be >= 1");
        }
        if let Some(deadline) = g.deadline_s {
            if !positive(deadline) {
                self.err(&gid, "deadline_s must be > 0");
            }
        }
        if g.tasks.is_empty() {
            self.err(&gid, "has no tasks");
        }
        let mut ids = HashSet::new();
        for t in &g.tasks {
            let tid = format!("task {}/{}", g.id, t.id);
            if !ids.insert(t.id.as_str()) {
                self.err(&tid, "duplicate task id");
            }
            self.device_with(&tid, &t.device, &[], true);
            if let Some(d) = self.s.device(&t.device) {
                if d.category == Sensor {
                    self.err(&tid, "sensor devices cannot serve tasks");
                }
                if self.s.radio_device() != Some(d.id.as_str()) && d.state_power("active").is_none() {
                    self.err(&tid, format!("device `{}` has no `active` state", d.id));
                }
            }
            if let Some(mem) = &t.memory {
                self.device_with(&tid, mem, &[Memory, Storage], false);
            }
            for (name, value) in [
                ("work", t.work),
                ("memory_footprint", t.memory_footprint),
                ("output_bytes", t.output_bytes),
            ] {
                if !non_negative(value) {
                    self.err(&tid, format!("{name} must be >= 0"));
                }
            }
        }
        for t in &g.tasks {
            for dep in &t.deps {
                if !ids.contains(dep.as_str()) {
                    self.err(format!("task {}/{}", g.id, t.id), format!("unknown dependency `{dep}`"));
                }
            }
        }
        if let Some(task) = first_cycle(g) {
            self.err(format!("task {}/{}", g.id, task), "dependency cycle");
        }
    }

    fn placement(&mut self) {
        let s = self.s;
        for key in s.placement.keys() {
            if s.primitive(key).is_none() {
                self.err(format!("placement.{key}"), "unknown primitive");
            }
        }
        for p in &s.primitives {
            let chosen = s.placement.get(&p.id).copied();
            match (p.forced, chosen) {
                (None, None) => self.err(&p.id, "no placement assigned"),
                (Some(forced), Some(c)) if forced != c => self.err(
                    &p.id,
                    format!("placement {} violates forced {}", c.as_str(), forced.as_str()),
                ),
                _ => {}
            }
            if s.placement_of(p) == Placement::OnDevice && p.on_device_graph.is_none() {
                self.err(&p.id, "placed on_device but has no on_device_graph");
            }
        }
    }

    fn radio(&mut self) {
        let s = self.s;
        let Some(radio) = &s.radio else {
            if !s.primitives.is_empty() {
                self.err("radio", "scenario with primitives needs an uplink radio");
            }
            return;
        };
        self.device_with("radio", &radio.device, &[ResourceCategory::Radio], false);
        let profiles = std::iter::once(&radio.primary).chain(radio.fallback.as_ref());
        for profile in profiles {
            let pid = format!("radio profile {}", profile.id);
            if !positive(profile.throughput_bps) {
                self.err(&pid, "throughput_bps must be > 0");
            }
            if !positive(profile.max_bandwidth_bps) {
                self.err(&pid, "max_bandwidth_bps must be > 0");
            }
            if !non_negative(profile.maintenance_power_mw) {
                self.err(&pid, "maintenance_power_mw must be >= 0");
            }
            if !non_negative(profile.tx_energy_per_byte_nj) {
                self.err(&pid, "tx_energy_per_byte_nj must be >= 0");
            }
        }
        if !positive(radio.fallback_threshold_bps) {
            self.err("radio", "fallback_threshold_bps must be > 0");
        }
        if let Some(fb) = &radio.fallback {
            if fb.max_bandwidth_bps < radio.fallback_threshold_bps {
                self.err("radio", "fallback max_bandwidth_bps is below fallback_threshold_bps");
            }
        }
        let demand_bps: f64 = stream_demands(s).iter().map(|d| d.bandwidth_bps).sum::<f64>()
            * s.link.factor()
            + s.primitives
                .iter()
                .filter(|p| s.placement_of(p) == Placement::OnDevice)
                .map(|p| p.signal_rate * 8.0 * s.link.factor())
                .sum::<f64>();
        if demand_bps > radio.primary.max_bandwidth_bps {
            self.err(
                "radio",
                format!(
                    "upload demand {demand_bps} b/s exceeds max_bandwidth_bps {} of `{}`",
                    radio.primary.max_bandwidth_bps, radio.primary.id
                ),
            );
        }
    }
}

/// Returns a task on some dependency cycle, if the graph has one.
fn first_cycle(g: &TaskGraph) -> Option<String> {
    let index: BTreeMap<&str, usize> =
        g.tasks.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark = vec![0u8; g.tasks.len()];
    fn visit(
        i: usize,
        g: &TaskGraph,
        index: &BTreeMap<&str, usize>,
        mark: &mut [u8],
    ) -> Option<usize> {
        mark[i] = 1;
        for dep in &g.tasks[i].deps {
            let Some(&j) = index.get(dep.as_str()) else { continue };
            match mark[j] {
                1 => return Some(j),
                0 => {
                    if let Some(hit) = visit(j, g, index, mark) {
                        return Some(hit);
                    }
                }
                _ => {}
            }
        }
        mark[i] = 2;
        None
    }
    for i in 0..g.tasks.len() {
        if mark[i] == 0 {
            if let Some(hit) = visit(i, g, &index, &mut mark) {
                return Some(g.tasks[hit].id.clone());
            }
        }
    }
    None
}
