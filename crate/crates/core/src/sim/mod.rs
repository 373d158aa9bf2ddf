// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event simulation of taskgraphs on shared devices.
//!
//! Every device is a single non-preemptive server with a FIFO queue. Ties
//! between tasks that become ready at the same instant are broken by
//! `(graph id, firing, task id)`. Events are processed in `(time, seq)` order,
//! so a run is a pure function of its scenario.

mod compile;
mod queue;
mod radio;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::scenario::{OverrunPolicy, Scenario};

pub use compile::{compile, SimModel, OFFLOAD_GRAPH_PREFIX, SIGNAL_UPLOAD_TASK};
pub use queue::{Event, EventKind, EventQueue};
pub use radio::{duty_cycles, radio_schedule, RadioSchedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("task `{task}` cannot be scheduled on `{device}`")]
    Unschedulable { task: String, device: String },
    #[error("memory `{device}` over-committed at t={time_s}s: {live_bytes} B live > {capacity_bytes} B")]
    MemoryOvercommit { device: String, time_s: f64, live_bytes: f64, capacity_bytes: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Treat memory over-commitment as an error instead of a warning.
    pub strict_memory: bool,
    /// Keep every state interval for trace dumps.
    pub record_intervals: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviceTimeline {
    /// Seconds spent in each visited state.
    pub state_seconds: BTreeMap<String, f64>,
    pub bytes_moved: f64,
    pub queue_peak: usize,
    pub busy_intervals: u64,
}

impl DeviceTimeline {
    pub fn seconds_in(&self, state: &str) -> f64 {
        self.state_seconds.get(state).copied().unwrap_or(0.0)
    }
}

/// Byte accounting for a device that serves transfers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransferStats {
    pub enqueued: f64,
    pub transferred: f64,
    /// Queued or in flight when the run ended.
    pub backlog: f64,
}

/// Buffer accounting for a memory device.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MemoryStats {
    pub written: f64,
    pub read: f64,
    pub freed: f64,
    pub resident: f64,
    pub peak_live_bytes: f64,
    pub overcommits: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphStats {
    pub firings: u64,
    pub completed: u64,
    pub dropped: u64,
    pub deadline_misses: u64,
    pub mean_latency_s: f64,
    pub max_latency_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub device: String,
    pub state: String,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub duration_s: f64,
    pub timelines: BTreeMap<String, DeviceTimeline>,
    pub graph_stats: BTreeMap<String, GraphStats>,
    /// Bytes the uplink radio finished transmitting.
    pub upload_bytes: f64,
    pub transfers: BTreeMap<String, TransferStats>,
    pub memory: BTreeMap<String, MemoryStats>,
    /// Upload bytes of fired graphs whose upload task never became ready.
    pub pending_upload_bytes: f64,
    /// Upload bytes produced by all firings.
    pub produced_upload_bytes: f64,
    pub radio_profile: Option<String>,
    pub warnings: Vec<String>,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DevState {
    Idle,
    Active,
    Maintain,
    Tx,
}

impl DevState {
    fn name(self) -> &'static str {
        match self {
            DevState::Idle => "idle",
            DevState::Active => "active",
            DevState::Maintain => "maintain",
            DevState::Tx => "tx",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueKey {
    time: f64,
    graph: usize,
    k: u64,
    task: usize,
    firing: usize,
}

impl PartialEq for QueueKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueKey {}

impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.graph.cmp(&other.graph))
            .then(self.k.cmp(&other.k))
            .then(self.task.cmp(&other.task))
            .then(self.firing.cmp(&other.firing))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TaskPhase {
    Waiting,
    Queued,
    Running,
    Done,
}

struct Firing {
    graph: usize,
    trigger_time: f64,
    pending: Vec<u32>,
    readers: Vec<u32>,
    phase: Vec<TaskPhase>,
    remaining: usize,
    done_at: Option<f64>,
    overran: bool,
}

#[derive(Default)]
struct DeviceRt {
    queue: BTreeSet<QueueKey>,
    in_service: Option<(usize, usize)>,
    start_pending: bool,
    state: Option<DevState>,
    since: f64,
    acc: [f64; 4],
    visited: [bool; 4],
    timeline: DeviceTimeline,
    transfer: TransferStats,
    live_tasks: u32,
    live_bytes: f64,
    mem: MemoryStats,
}

struct GraphRt {
    next_k: u64,
    last_firing: Option<usize>,
    firings: u64,
    dropped: u64,
}

struct Engine<'m> {
    model: &'m SimModel,
    options: SimOptions,
    duration: f64,
    now: f64,
    events: EventQueue,
    devices: Vec<DeviceRt>,
    graphs: Vec<GraphRt>,
    firings: Vec<Firing>,
    produced_upload: f64,
    warnings: Vec<String>,
    intervals: Vec<Interval>,
}

/// Runs the scenario for its configured duration.
pub fn run(scenario: &Scenario) -> Result<SimTrace, SimError> {
    run_with(scenario, SimOptions::default())
}

pub fn run_with(scenario: &Scenario, options: SimOptions) -> Result<SimTrace, SimError> {
    let model = compile(scenario)?;
    let mut trace = simulate(&model, scenario.duration_s, options)?;
    trace.radio_profile = scenario.radio.as_ref().map(|r| r.primary.id.clone());
    Ok(trace)
}

/// Runs an already-compiled model.
pub fn simulate(model: &SimModel, duration: f64, options: SimOptions) -> Result<SimTrace, SimError> {
    let mut engine = Engine {
        model,
        options,
        duration,
        now: 0.0,
        events: EventQueue::default(),
        devices: model.devices.iter().map(|_| DeviceRt::default()).collect(),
        graphs: model
            .graphs
            .iter()
            .map(|_| GraphRt { next_k: 0, last_firing: None, firings: 0, dropped: 0 })
            .collect(),
        firings: Vec::new(),
        produced_upload: 0.0,
        warnings: Vec::new(),
        intervals: Vec::new(),
    };
    for d in 0..engine.devices.len() {
        engine.set_state(d);
    }
    if duration > 0.0 {
        for g in 0..model.graphs.len() {
            engine.events.push(0.0, EventKind::TriggerFire { graph: g });
        }
    }
    while let Some(t) = engine.events.peek_time() {
        if t > duration {
            break;
        }
        let event = engine.events.pop().expect("peeked");
        engine.now = event.time;
        match event.kind {
            EventKind::TriggerFire { graph } => engine.trigger(graph),
            EventKind::TaskReady { firing, task } => engine.ready(firing, task),
            EventKind::TaskStart { device } => engine.start(device)?,
            EventKind::TaskEnd { device } | EventKind::TransferEnd { device } => engine.end(device),
        }
    }
    Ok(engine.finish())
}

impl<'m> Engine<'m> {
    fn desired_state(&self, d: usize) -> DevState {
        let dev = &self.model.devices[d];
        let rt = &self.devices[d];
        let busy = rt.in_service.is_some() || rt.start_pending;
        if dev.is_uplink {
            if busy {
                DevState::Tx
            } else if self.model.link_up {
                DevState::Maintain
            } else {
                DevState::Idle
            }
        } else if dev.has_active && (busy || rt.live_tasks > 0 || dev.always_active) {
            DevState::Active
        } else {
            DevState::Idle
        }
    }

    fn set_state(&mut self, d: usize) {
        let next = self.desired_state(d);
        let now = self.now;
        let record = self.options.record_intervals;
        let rt = &mut self.devices[d];
        match rt.state {
            Some(cur) if cur == next => {}
            Some(cur) => {
                rt.acc[cur.index()] += now - rt.since;
                if record && now > rt.since {
                    self.intervals.push(Interval {
                        device: self.model.devices[d].id.clone(),
                        state: cur.name().into(),
                        start_s: rt.since,
                        end_s: now,
                    });
                }
                if next != DevState::Idle && next != DevState::Maintain {
                    rt.timeline.busy_intervals += 1;
                }
                rt.state = Some(next);
                rt.visited[next.index()] = true;
                rt.since = now;
            }
            None => {
                rt.state = Some(next);
                rt.visited[next.index()] = true;
                rt.since = now;
            }
        }
    }

    fn trigger(&mut self, g: usize) {
        let graph = &self.model.graphs[g];
        let k = self.graphs[g].next_k;
        self.graphs[g].next_k += 1;
        self.graphs[g].firings += 1;

        let next_time = (k + 1) as f64 * f64::from(graph.divisor) / graph.rate_hz;
        if next_time < self.duration {
            self.events.push(next_time, EventKind::TriggerFire { graph: g });
        }

        let overrun = self.graphs[g]
            .last_firing
            .is_some_and(|f| self.firings[f].done_at.is_none());
        if overrun {
            let prev = self.graphs[g].last_firing.expect("checked");
            self.firings[prev].overran = true;
            if graph.policy == OverrunPolicy::Drop {
                self.graphs[g].dropped += 1;
                return;
            }
        }

        let id = self.firings.len();
        self.firings.push(Firing {
            graph: g,
            trigger_time: self.now,
            pending: graph.tasks.iter().map(|t| t.deps.len() as u32).collect(),
            readers: graph.tasks.iter().map(|t| t.dependents.len() as u32).collect(),
            phase: vec![TaskPhase::Waiting; graph.tasks.len()],
            remaining: graph.tasks.len(),
            done_at: None,
            overran: false,
        });
        self.graphs[g].last_firing = Some(id);
        self.produced_upload += graph.upload_payload;
        for &root in &graph.roots {
            self.events.push(self.now, EventKind::TaskReady { firing: id, task: root });
        }
        if graph.tasks.is_empty() {
            self.firings[id].done_at = Some(self.now);
        }
    }

    fn ready(&mut self, firing: usize, task: usize) {
        let f = &mut self.firings[firing];
        f.phase[task] = TaskPhase::Queued;
        let g = f.graph;
        let spec = &self.model.graphs[g].tasks[task];
        let d = spec.device;
        let key = QueueKey { time: self.now, graph: g, k: firing as u64, task, firing };
        let rt = &mut self.devices[d];
        rt.queue.insert(key);
        rt.transfer.enqueued += spec.payload;
        let waiting = rt.queue.len() - usize::from(rt.in_service.is_none());
        rt.timeline.queue_peak = rt.timeline.queue_peak.max(waiting);
        if rt.in_service.is_none() && !rt.start_pending {
            rt.start_pending = true;
            self.events.push(self.now, EventKind::TaskStart { device: d });
        }
    }

    fn start(&mut self, d: usize) -> Result<(), SimError> {
        self.devices[d].start_pending = false;
        if self.devices[d].in_service.is_some() {
            return Ok(());
        }
        let Some(key) = self.devices[d].queue.pop_first() else {
            self.set_state(d);
            return Ok(());
        };
        let (firing, task) = (key.firing, key.task);
        self.devices[d].in_service = Some((firing, task));
        self.firings[firing].phase[task] = TaskPhase::Running;
        self.set_state(d);

        let graph = &self.model.graphs[self.firings[firing].graph];
        let spec = &graph.tasks[task];
        for &dep in &spec.deps {
            let producer = &graph.tasks[dep];
            let Some(m) = producer.memory else { continue };
            if producer.output_bytes <= 0.0 {
                continue;
            }
            let mem = &mut self.devices[m].mem;
            mem.read += producer.output_bytes;
            self.devices[m].timeline.bytes_moved += producer.output_bytes;
            let readers = &mut self.firings[firing].readers[dep];
            *readers -= 1;
            if *readers == 0 {
                let mem = &mut self.devices[m].mem;
                mem.freed += producer.output_bytes;
                mem.resident -= producer.output_bytes;
            }
        }
        if let Some(m) = spec.memory {
            let capacity = self.model.devices[m].capacity_bytes;
            let rt = &mut self.devices[m];
            rt.live_tasks += 1;
            rt.live_bytes += spec.footprint;
            rt.mem.peak_live_bytes = rt.mem.peak_live_bytes.max(rt.live_bytes);
            if capacity > 0.0 && rt.live_bytes > capacity {
                rt.mem.overcommits += 1;
                let err = SimError::MemoryOvercommit {
                    device: self.model.devices[m].id.clone(),
                    time_s: self.now,
                    live_bytes: rt.live_bytes,
                    capacity_bytes: capacity,
                };
                if self.options.strict_memory {
                    return Err(err);
                }
                if rt.mem.overcommits == 1 {
                    self.warnings.push(err.to_string());
                }
            }
            self.set_state(m);
        }
        let end = self.now + spec.duration;
        let kind = if self.model.devices[d].is_transfer {
            EventKind::TransferEnd { device: d }
        } else {
            EventKind::TaskEnd { device: d }
        };
        self.events.push(end, kind);
        Ok(())
    }

    fn end(&mut self, d: usize) {
        let Some((firing, task)) = self.devices[d].in_service.take() else {
            return;
        };
        let g = self.firings[firing].graph;
        let graph = &self.model.graphs[g];
        let spec = &graph.tasks[task];
        self.firings[firing].phase[task] = TaskPhase::Done;
        {
            let rt = &mut self.devices[d];
            rt.timeline.bytes_moved += spec.payload;
            rt.transfer.transferred += spec.payload;
        }
        if let Some(m) = spec.memory {
            let rt = &mut self.devices[m];
            rt.live_tasks -= 1;
            rt.live_bytes -= spec.footprint;
            if spec.output_bytes > 0.0 {
                rt.mem.written += spec.output_bytes;
                rt.timeline.bytes_moved += spec.output_bytes;
                if spec.dependents.is_empty() {
                    rt.mem.freed += spec.output_bytes;
                } else {
                    rt.mem.resident += spec.output_bytes;
                }
            }
            self.set_state(m);
        }
        for &dep in &spec.dependents {
            let pending = &mut self.firings[firing].pending[dep];
            *pending -= 1;
            if *pending == 0 {
                self.events.push(self.now, EventKind::TaskReady { firing, task: dep });
            }
        }
        let f = &mut self.firings[firing];
        f.remaining -= 1;
        if f.remaining == 0 {
            f.done_at = Some(self.now);
        }
        if !self.devices[d].queue.is_empty() {
            self.devices[d].start_pending = true;
            self.events.push(self.now, EventKind::TaskStart { device: d });
        }
        self.set_state(d);
    }

    fn finish(mut self) -> SimTrace {
        self.now = self.duration;
        let mut timelines = BTreeMap::new();
        let mut transfers = BTreeMap::new();
        let mut memory = BTreeMap::new();
        let mut upload_bytes = 0.0;
        let all_states = [DevState::Idle, DevState::Active, DevState::Maintain, DevState::Tx];
        for (d, dev) in self.model.devices.iter().enumerate() {
            let mut rt = std::mem::take(&mut self.devices[d]);
            if let Some(cur) = rt.state {
                rt.acc[cur.index()] += self.duration - rt.since;
                if self.options.record_intervals && self.duration > rt.since {
                    self.intervals.push(Interval {
                        device: dev.id.clone(),
                        state: cur.name().into(),
                        start_s: rt.since,
                        end_s: self.duration,
                    });
                }
            }
            for s in all_states {
                if rt.visited[s.index()] {
                    rt.timeline.state_seconds.insert(s.name().to_string(), rt.acc[s.index()]);
                }
            }
            if dev.is_transfer {
                let mut backlog: f64 = rt
                    .queue
                    .iter()
                    .map(|k| self.model.graphs[k.graph].tasks[k.task].payload)
                    .sum();
                if let Some((f, t)) = rt.in_service {
                    backlog += self.model.graphs[self.firings[f].graph].tasks[t].payload;
                }
                rt.transfer.backlog = backlog;
                transfers.insert(dev.id.clone(), rt.transfer);
            }
            if dev.is_uplink {
                upload_bytes += rt.timeline.bytes_moved;
            }
            if matches!(
                dev.category,
                crate::scenario::ResourceCategory::Memory | crate::scenario::ResourceCategory::Storage
            ) {
                memory.insert(dev.id.clone(), rt.mem);
            }
            timelines.insert(dev.id.clone(), rt.timeline);
        }

        let mut pending_upload = 0.0;
        let mut stats: Vec<GraphStats> = self
            .graphs
            .iter()
            .map(|g| GraphStats {
                firings: g.firings,
                dropped: g.dropped,
                deadline_misses: g.dropped,
                ..GraphStats::default()
            })
            .collect();
        let mut latency_sum = vec![0.0; self.graphs.len()];
        for f in &self.firings {
            let graph = &self.model.graphs[f.graph];
            let st = &mut stats[f.graph];
            let missed = match f.done_at {
                Some(done) => {
                    let latency = done - f.trigger_time;
                    st.completed += 1;
                    latency_sum[f.graph] += latency;
                    st.max_latency_s = st.max_latency_s.max(latency);
                    f.overran || latency > graph.deadline * (1.0 + 1e-12)
                }
                None => f.overran || self.duration - f.trigger_time > graph.deadline,
            };
            if missed {
                st.deadline_misses += 1;
            }
            if f.done_at.is_none() {
                for (i, t) in graph.tasks.iter().enumerate() {
                    if t.is_upload && f.phase[i] == TaskPhase::Waiting {
                        pending_upload += t.payload;
                    }
                }
            }
        }
        for (i, st) in stats.iter_mut().enumerate() {
            if st.completed > 0 {
                st.mean_latency_s = latency_sum[i] / st.completed as f64;
            }
        }
        let graph_stats = self
            .model
            .graphs
            .iter()
            .zip(stats)
            .map(|(g, s)| (g.id.clone(), s))
            .collect();

        SimTrace {
            duration_s: self.duration,
            timelines,
            graph_stats,
            upload_bytes,
            transfers,
            memory,
            pending_upload_bytes: pending_upload,
            produced_upload_bytes: self.produced_upload,
            radio_profile: None,
            warnings: self.warnings,
            intervals: self.intervals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, LoadOptions};

    /// One 10 Hz stream on `cam`, a compute device `cpu` (1e6 units/s) and an
    /// idle radio. `graphs` holds extra TOML appended at the end.
    fn scenario(duration: f64, graphs: &str) -> Scenario {
        let text = format!(
            r#"
duration_s = {duration}
[battery]
capacity_wh = 3.0
target_hours = 15.0
[radio]
device = "wifi"
[radio.primary]
id = "w"
throughput_bps = 1.0e8
max_bandwidth_bps = 1.0e8
maintenance_power_mw = 1.0
tx_energy_per_byte_nj = 1.0
[[devices]]
id = "cam"
category = "sensor"
rail = "battery"
states = [{{ name = "idle", power_mw = 0.0 }}, {{ name = "active", power_mw = 1.0 }}]
[[devices]]
id = "cpu"
category = "compute"
rail = "battery"
service_rate = 1.0e6
states = [{{ name = "idle", power_mw = 1.0 }}, {{ name = "active", power_mw = 10.0 }}]
[[devices]]
id = "ram"
category = "memory"
rail = "battery"
service_rate = 1.0e9
capacity_bytes = 1000.0
states = [{{ name = "idle", power_mw = 0.0 }}, {{ name = "active", power_mw = 1.0 }}]
[[devices]]
id = "wifi"
category = "radio"
rail = "battery"
states = [{{ name = "idle", power_mw = 0.0 }}]
[[sensors]]
id = "s"
device = "cam"
width = 4
height = 4
channels = 1
bit_depth = 8
rate_hz = 10.0
{graphs}
"#
        );
        parse_scenario(&text, LoadOptions::default()).unwrap()
    }

    fn graph(id: &str, work: f64, extra: &str) -> String {
        format!(
            r#"
[placement]
{id} = "on_device"
[[primitives]]
id = "{id}"
sensors = [{{ stream = "s" }}]
[primitives.on_device_graph]
id = "{id}"
trigger = {{ stream = "s" }}
{extra}
[[primitives.on_device_graph.tasks]]
id = "t"
device = "cpu"
work = {work}
"#
        )
    }

    fn duty(trace: &SimTrace, device: &str, state: &str) -> f64 {
        trace.timelines[device].seconds_in(state) / trace.duration_s
    }

    #[test]
    fn empty_workload_is_all_idle() {
        let t = run(&scenario(5.0, "")).unwrap();
        for (id, tl) in &t.timelines {
            assert_eq!(tl.seconds_in("idle"), 5.0, "{id}");
            assert_eq!(tl.state_seconds.len(), 1, "{id}");
        }
        assert_eq!(t.upload_bytes, 0.0);
    }

    #[test]
    fn ten_hz_ten_ms_task_is_ten_percent_active() {
        let t = run(&scenario(10.0, &graph("g", 1.0e4, ""))).unwrap();
        assert!((duty(&t, "cpu", "active") - 0.10).abs() < 1e-9);
        assert!((duty(&t, "cpu", "idle") - 0.90).abs() < 1e-9);
        assert_eq!(duty(&t, "cam", "active"), 1.0);
        let g = &t.graph_stats["g"];
        assert_eq!((g.firings, g.completed, g.deadline_misses), (100, 100, 0));
        assert!((g.mean_latency_s - 0.01).abs() < 1e-12);
        assert_eq!(t.timelines["cpu"].busy_intervals, 100);
    }

    #[test]
    fn overloaded_device_saturates_and_queues() {
        let two = format!(
            "{}\n{}",
            graph("a", 6.0e4, ""),
            graph("b", 6.0e4, "").replace("[placement]\n", "[placement.x]\n")
        );
        // second [placement] table would be a duplicate key; merge by hand
        let text = two.replace("[placement.x]\nb = \"on_device\"\n", "");
        let text = text.replacen("a = \"on_device\"", "a = \"on_device\"\nb = \"on_device\"", 1);
        let short = run(&scenario(5.0, &text)).unwrap();
        let long = run(&scenario(10.0, &text)).unwrap();
        assert!((duty(&long, "cpu", "active") - 1.0).abs() < 1e-9);
        assert!(long.timelines["cpu"].queue_peak > short.timelines["cpu"].queue_peak);
        assert!(long.graph_stats["a"].deadline_misses > 0);
    }

    #[test]
    fn drop_policy_drops_overrunning_triggers() {
        // 150 ms of work every 100 ms
        let t = run(&scenario(10.0, &graph("g", 1.5e5, "on_overrun = \"drop\""))).unwrap();
        let g = &t.graph_stats["g"];
        assert!(g.dropped > 0);
        assert!(g.deadline_misses >= g.dropped);
        assert_eq!(t.timelines["cpu"].queue_peak, 0);
    }

    #[test]
    fn memory_overcommit_warns_or_fails() {
        let extra = graph("g", 1.0e4, "").replace(
            "work = 10000",
            "work = 10000\nmemory = \"ram\"\nmemory_footprint = 5000.0",
        );
        let s = scenario(1.0, &extra);
        let lenient = run(&s).unwrap();
        assert!(lenient.memory["ram"].overcommits > 0);
        assert!(!lenient.warnings.is_empty());
        let strict = run_with(&s, SimOptions { strict_memory: true, ..SimOptions::default() });
        assert!(matches!(strict, Err(SimError::MemoryOvercommit { .. })));
    }

    #[test]
    fn repeated_runs_are_identical() {
        let s = scenario(3.0, &graph("g", 3.0e4, ""));
        assert_eq!(format!("{:?}", run(&s).unwrap()), format!("{:?}", run(&s).unwrap()));
    }
}
