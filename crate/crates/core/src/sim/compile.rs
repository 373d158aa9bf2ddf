// SPDX-License-Identifier: Apache-2.0

//! Lowers a scenario into indexed graphs and devices for the event loop.

use std::collections::{BTreeMap, HashMap};

use super::SimError;
use crate::scenario::{
    stream_demands, OverrunPolicy, Placement, ResourceCategory, Scenario, Task, TaskGraph,
};

/// Task id of the signal upload appended to every on-device graph.
pub const SIGNAL_UPLOAD_TASK: &str = "@upload";

/// Prefix of the graphs generated for raw stream uploads.
pub const OFFLOAD_GRAPH_PREFIX: &str = "offload:";

#[derive(Debug, Clone)]
pub struct SimDevice {
    pub id: String,
    pub category: ResourceCategory,
    pub service_rate: Option<f64>,
    pub capacity_bytes: f64,
    pub is_transfer: bool,
    pub is_uplink: bool,
    pub has_active: bool,
    /// Always in its active state for the whole run (streaming sensors).
    pub always_active: bool,
}

#[derive(Debug, Clone)]
pub struct SimTask {
    pub id: String,
    pub device: usize,
    pub duration: f64,
    /// Bytes counted on the serving device when the task completes.
    pub payload: f64,
    pub deps: Vec<usize>,
    pub dependents: Vec<usize>,
    pub memory: Option<usize>,
    pub footprint: f64,
    pub output_bytes: f64,
    pub is_upload: bool,
}

#[derive(Debug, Clone)]
pub struct SimGraph {
    pub id: String,
    pub period: f64,
    pub rate_hz: f64,
    pub divisor: u32,
    pub deadline: f64,
    pub policy: OverrunPolicy,
    /// Sorted by task id; the index is the tie-break rank.
    pub tasks: Vec<SimTask>,
    pub roots: Vec<usize>,
    pub upload_payload: f64,
}

#[derive(Debug, Clone)]
pub struct SimModel {
    pub devices: Vec<SimDevice>,
    /// Sorted by graph id; the index is the tie-break rank.
    pub graphs: Vec<SimGraph>,
    pub uplink: Option<usize>,
    pub link_up: bool,
}

pub fn compile(scenario: &Scenario) -> Result<SimModel, SimError> {
    let uplink_id = scenario.radio_device();
    let mut consumed_sensors: Vec<&str> = Vec::new();
    for p in &scenario.primitives {
        for d in &p.sensors {
            if let Some(s) = scenario.sensor(&d.stream) {
                consumed_sensors.push(&s.device);
            }
        }
        if let Some(g) = &p.on_device_graph {
            if scenario.placement_of(p) == Placement::OnDevice {
                if let Some(s) = scenario.sensor(&g.trigger.stream) {
                    consumed_sensors.push(&s.device);
                }
            }
        }
    }

    let devices: Vec<SimDevice> = scenario
        .devices
        .iter()
        .map(|d| {
            let is_uplink = uplink_id == Some(d.id.as_str());
            SimDevice {
                id: d.id.clone(),
                category: d.category,
                service_rate: if is_uplink {
                    scenario.radio.as_ref().map(|r| r.primary.throughput_bps / 8.0)
                } else {
                    d.service_rate
                },
                capacity_bytes: d.capacity_bytes,
                is_transfer: d.category.is_transfer(),
                is_uplink,
                has_active: d.state_power("active").is_some(),
                always_active: d.category == ResourceCategory::Sensor
                    && consumed_sensors.contains(&d.id.as_str()),
            }
        })
        .collect();
    let device_index: HashMap<&str, usize> =
        devices.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
    let uplink = uplink_id.and_then(|id| device_index.get(id).copied());

    let mut graphs: BTreeMap<String, SimGraph> = BTreeMap::new();
    let factor = scenario.link.factor();

    for p in &scenario.primitives {
        if scenario.placement_of(p) != Placement::OnDevice {
            continue;
        }
        let Some(graph) = &p.on_device_graph else {
            return Err(SimError::Unschedulable {
                task: p.id.clone(),
                device: "<no on_device_graph>".into(),
            });
        };
        let stream = scenario.sensor(&graph.trigger.stream).ok_or_else(|| SimError::Unschedulable {
            task: graph.id.clone(),
            device: format!("<unknown trigger stream {}>", graph.trigger.stream),
        })?;
        let period = f64::from(graph.trigger.divisor) / stream.rate_hz;
        let mut tasks = graph.tasks.clone();
        let signal_bytes = p.signal_rate * period * factor;
        if p.signal_rate > 0.0 {
            if let Some(radio) = uplink_id {
                let sinks: Vec<String> = graph
                    .tasks
                    .iter()
                    .filter(|t| !graph.tasks.iter().any(|o| o.deps.contains(&t.id)))
                    .map(|t| t.id.clone())
                    .collect();
                tasks.push(Task {
                    id: SIGNAL_UPLOAD_TASK.into(),
                    device: radio.to_string(),
                    work: signal_bytes,
                    deps: sinks,
                    memory: None,
                    memory_footprint: 0.0,
                    output_bytes: 0.0,
                });
            }
        }
        let g = TaskGraph { tasks, ..graph.clone() };
        let sim = lower_graph(&g, stream.rate_hz, &devices, &device_index, uplink)?;
        graphs.insert(sim.id.clone(), sim);
    }

    if let Some(radio) = uplink_id {
        for demand in stream_demands(scenario) {
            let Some(stream) = scenario.sensor(&demand.stream) else { continue };
            let sample_rate = stream.rate_hz / f64::from(demand.divisor);
            let batch = (sample_rate / scenario.upload_packet_hz - 1e-9).ceil().max(1.0) as u32;
            let divisor = demand.divisor * batch;
            let raw = stream.bits_per_sample() * f64::from(batch) / 8.0;
            let compressed = raw / demand.compression * factor;

            let mut tasks = Vec::new();
            let mut prev: Option<String> = None;
            if let Some(link) = &stream.interconnect {
                tasks.push(Task {
                    id: "capture".into(),
                    device: link.clone(),
                    work: raw,
                    deps: vec![],
                    memory: stream.memory.clone(),
                    memory_footprint: 0.0,
                    output_bytes: if stream.memory.is_some() { raw } else { 0.0 },
                });
                prev = Some("capture".into());
            }
            if let Some(enc) = &stream.encoder {
                tasks.push(Task {
                    id: "encode".into(),
                    device: enc.device.clone(),
                    work: raw * enc.work_per_raw_byte,
                    deps: prev.iter().cloned().collect(),
                    memory: stream.memory.clone(),
                    memory_footprint: 0.0,
                    output_bytes: if stream.memory.is_some() { compressed } else { 0.0 },
                });
                prev = Some("encode".into());
            }
            tasks.push(Task {
                id: "upload".into(),
                device: radio.to_string(),
                work: compressed,
                deps: prev.iter().cloned().collect(),
                memory: None,
                memory_footprint: 0.0,
                output_bytes: 0.0,
            });
            let g = TaskGraph {
                id: format!("{OFFLOAD_GRAPH_PREFIX}{}", stream.id),
                trigger: crate::scenario::Trigger { stream: stream.id.clone(), divisor },
                deadline_s: None,
                on_overrun: OverrunPolicy::Queue,
                tasks,
            };
            let sim = lower_graph(&g, stream.rate_hz, &devices, &device_index, uplink)?;
            graphs.insert(sim.id.clone(), sim);
        }
    }

    let graphs: Vec<SimGraph> = graphs.into_values().collect();
    let link_up = graphs.iter().any(|g| g.tasks.iter().any(|t| t.is_upload));
    Ok(SimModel { devices, graphs, uplink, link_up })
}

fn lower_graph(
    graph: &TaskGraph,
    rate_hz: f64,
    devices: &[SimDevice],
    device_index: &HashMap<&str, usize>,
    uplink: Option<usize>,
) -> Result<SimGraph, SimError> {
    let mut order: Vec<&Task> = graph.tasks.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let rank: HashMap<&str, usize> = order.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();

    let mut tasks = Vec::with_capacity(order.len());
    for t in &order {
        let unschedulable = || SimError::Unschedulable {
            task: format!("{}/{}", graph.id, t.id),
            device: t.device.clone(),
        };
        let device = *device_index.get(t.device.as_str()).ok_or_else(unschedulable)?;
        let rate = devices[device].service_rate.filter(|r| *r > 0.0).ok_or_else(unschedulable)?;
        let memory = match &t.memory {
            Some(m) => Some(*device_index.get(m.as_str()).ok_or_else(|| SimError::Unschedulable {
                task: format!("{}/{}", graph.id, t.id),
                device: m.clone(),
            })?),
            None => None,
        };
        let deps = t
            .deps
            .iter()
            .map(|d| {
                rank.get(d.as_str()).copied().ok_or_else(|| SimError::Unschedulable {
                    task: format!("{}/{}", graph.id, t.id),
                    device: format!("<unknown dependency {d}>"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        tasks.push(SimTask {
            id: t.id.clone(),
            device,
            duration: t.work / rate,
            payload: if devices[device].is_transfer { t.work } else { 0.0 },
            deps,
            dependents: Vec::new(),
            memory,
            footprint: t.memory_footprint,
            output_bytes: t.output_bytes,
            is_upload: Some(device) == uplink,
        });
    }
    for i in 0..tasks.len() {
        for d in tasks[i].deps.clone() {
            tasks[d].dependents.push(i);
        }
    }
    let roots = (0..tasks.len()).filter(|&i| tasks[i].deps.is_empty()).collect();
    let period = f64::from(graph.trigger.divisor) / rate_hz;
    let upload_payload = tasks.iter().filter(|t| t.is_upload).fold(0.0, |a, t| a + t.payload);
    Ok(SimGraph {
        id: graph.id.clone(),
        period,
        rate_hz,
        divisor: graph.trigger.divisor,
        deadline: graph.deadline_s.unwrap_or(period),
        policy: graph.on_overrun,
        tasks,
        roots,
        upload_payload,
    })
}
