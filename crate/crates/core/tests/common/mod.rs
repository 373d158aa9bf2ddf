// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use wearsim::scenario::{
    Battery, Device, LinkScaling, OverrunPolicy, Placement, PowerDecomposition, PowerState, Primitive,
    RadioConfig, RadioProfile, ResourceCategory, Scenario, SensorDemand, SensorStream, Task, TaskGraph,
    Trigger,
};

pub fn device(id: &str, category: ResourceCategory, states: &[(&str, f64)], rate: Option<f64>) -> Device {
    Device {
        id: id.into(),
        category,
        states: states.iter().map(|(n, p)| PowerState { name: n.to_string(), power_mw: *p }).collect(),
        energy_per_byte_nj: 0.0,
        service_rate: rate,
        capacity_bytes: 0.0,
        rail: "battery".into(),
        power_decomposition: Some(PowerDecomposition {
            digital_dynamic: 0.5,
            digital_leakage: 0.0,
            analog: 0.5,
            rf: 0.0,
        }),
    }
}

pub fn profile(id: &str, throughput_bps: f64, maintain_mw: f64, nj: f64) -> RadioProfile {
    RadioProfile {
        id: id.into(),
        throughput_bps,
        maintenance_power_mw: maintain_mw,
        tx_energy_per_byte_nj: nj,
        max_bandwidth_bps: throughput_bps,
    }
}

/// Scenario holding only an idle uplink radio `wifi` at 100 Mb/s.
pub fn base(duration_s: f64) -> Scenario {
    Scenario {
        duration_s,
        battery: Battery { capacity_wh: 3.0, target_hours: 15.0 },
        thermal_limit_mw: 2000.0,
        upload_packet_hz: 100.0,
        link: LinkScaling::default(),
        placement: BTreeMap::new(),
        radio: Some(RadioConfig {
            device: "wifi".into(),
            primary: profile("wifi", 100.0e6, 30.0, 20.0),
            fallback: None,
            fallback_threshold_bps: 1.0e6,
        }),
        rails: Vec::new(),
        devices: vec![device("wifi", ResourceCategory::Radio, &[("idle", 0.5)], None)],
        sensors: Vec::new(),
        primitives: Vec::new(),
    }
}

pub fn stream(id: &str, device: &str, dims: (u32, u32, u32, u32), rate_hz: f64) -> SensorStream {
    SensorStream {
        id: id.into(),
        device: device.into(),
        width: dims.0,
        height: dims.1,
        channels: dims.2,
        bit_depth: dims.3,
        rate_hz,
        interconnect: None,
        memory: None,
        encoder: None,
    }
}

pub fn task(id: &str, device: &str, work: f64, deps: &[String]) -> Task {
    Task {
        id: id.into(),
        device: device.into(),
        work,
        deps: deps.to_vec(),
        memory: None,
        memory_footprint: 0.0,
        output_bytes: 0.0,
    }
}

pub fn primitive(id: &str, stream: &str, divisor: u32, tasks: Vec<Task>) -> Primitive {
    Primitive {
        id: id.into(),
        sensors: vec![SensorDemand { stream: stream.into(), divisor: 1, compression: None }],
        signal_rate: 0.0,
        offload_compression: 10.0,
        forced: None,
        on_device_graph: Some(TaskGraph {
            id: id.into(),
            trigger: Trigger { stream: stream.into(), divisor },
            deadline_s: None,
            on_overrun: OverrunPolicy::Queue,
            tasks,
        }),
    }
}

/// Random on-device workload whose graphs never overlap their own next firing
/// and never share a device with another graph. Every firing count is an
/// integer over the 10 s run.
pub fn contention_free<R: Rng>(rng: &mut R) -> Scenario {
    const RATES: [f64; 9] = [1.0, 2.0, 4.0, 5.0, 8.0, 10.0, 20.0, 25.0, 50.0];
    const DIVISORS: [u32; 3] = [1, 2, 5];
    let mut s = base(10.0);
    for g in 0..rng.gen_range(1..=4) {
        let cam = format!("cam{g}");
        s.devices.push(device(&cam, ResourceCategory::Sensor, &[("idle", 0.1), ("active", 2.0)], None));
        let rate = *RATES.choose(rng).unwrap();
        let divisor = *DIVISORS.choose(rng).unwrap();
        let sid = format!("s{g}");
        s.sensors.push(stream(&sid, &cam, (8, 8, 1, 8), rate));

        let cpus: Vec<(String, f64)> = (0..rng.gen_range(1..=3))
            .map(|c| (format!("g{g}_cpu{c}"), 10f64.powf(rng.gen_range(5.0..7.0))))
            .collect();
        for (id, r) in &cpus {
            let active = rng.gen_range(1.0..50.0);
            s.devices.push(device(id, ResourceCategory::Compute, &[("idle", 0.2), ("active", active)], Some(*r)));
        }
        let period = f64::from(divisor) / rate;
        let n = rng.gen_range(1..=5);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let budget = rng.gen_range(0.05..0.8) * period;
        let wsum: f64 = weights.iter().sum();
        let mut tasks = Vec::new();
        for (i, w) in weights.iter().enumerate() {
            let (dev, r) = cpus.choose(rng).unwrap();
            let deps: Vec<String> = (0..i).filter(|_| rng.gen_bool(0.5)).map(|j| format!("t{j}")).collect();
            tasks.push(task(&format!("t{i}"), dev, budget * w / wsum * r, &deps));
        }
        let pid = format!("p{g}");
        s.placement.insert(pid.clone(), Placement::OnDevice);
        s.primitives.push(primitive(&pid, &sid, divisor, tasks));
    }
    s
}

/// Active duty per device computed from the scenario description alone.
pub fn closed_form_duty(s: &Scenario) -> BTreeMap<String, f64> {
    let mut duty: BTreeMap<String, f64> = s.devices.iter().map(|d| (d.id.clone(), 0.0)).collect();
    for p in &s.primitives {
        let g = p.on_device_graph.as_ref().unwrap();
        let st = s.sensors.iter().find(|x| x.id == g.trigger.stream).unwrap();
        *duty.get_mut(&st.device).unwrap() = 1.0;
        let firings_per_s = st.rate_hz / f64::from(g.trigger.divisor);
        for t in &g.tasks {
            let rate = s.devices.iter().find(|d| d.id == t.device).unwrap().service_rate.unwrap();
            *duty.get_mut(&t.device).unwrap() += t.work * firings_per_s / rate;
        }
    }
    duty
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
