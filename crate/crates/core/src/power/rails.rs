// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::PowerError;
use crate::scenario::{RailNode, BATTERY};

/// Power flowing through each regulator of a rail tree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RailFlow {
    pub delivered: BTreeMap<String, f64>,
    pub input: BTreeMap<String, f64>,
    pub loss: BTreeMap<String, f64>,
    /// Input power drawn from the battery, including loads attached to it directly.
    pub battery_draw: f64,
}

/// Propagates leaf loads up the tree. `attached` maps a rail id (or
/// `battery`) to the summed power of the devices it feeds.
pub fn rail_losses(attached: &BTreeMap<String, f64>, rails: &[RailNode]) -> Result<RailFlow, PowerError> {
    let index: BTreeMap<&str, &RailNode> = rails.iter().map(|r| (r.id.as_str(), r)).collect();
    for rail in attached.keys() {
        if rail != BATTERY && !index.contains_key(rail.as_str()) {
            return Err(PowerError::UnknownRail(rail.clone()));
        }
    }

    let mut depth: BTreeMap<&str, usize> = BTreeMap::new();
    for r in rails {
        if !(r.efficiency > 0.0 && r.efficiency <= 1.0) {
            return Err(PowerError::BadEfficiency { rail: r.id.clone(), efficiency: r.efficiency });
        }
        let mut d = 0;
        let mut cur = r;
        while cur.parent != BATTERY {
            cur = index
                .get(cur.parent.as_str())
                .ok_or_else(|| PowerError::UnknownRail(cur.parent.clone()))?;
            d += 1;
            if d > rails.len() {
                return Err(PowerError::RailCycle(r.id.clone()));
            }
        }
        depth.insert(&r.id, d);
    }

    let mut order: Vec<&RailNode> = rails.iter().collect();
    order.sort_by(|a, b| depth[b.id.as_str()].cmp(&depth[a.id.as_str()]).then(a.id.cmp(&b.id)));

    let mut delivered: BTreeMap<String, f64> =
        rails.iter().map(|r| (r.id.clone(), attached.get(&r.id).copied().unwrap_or(0.0))).collect();
    let mut flow = RailFlow::default();
    let mut battery = attached.get(BATTERY).copied().unwrap_or(0.0);
    for r in order {
        let out = delivered[&r.id];
        let input = out / r.efficiency;
        flow.input.insert(r.id.clone(), input);
        flow.loss.insert(r.id.clone(), input - out);
        if r.parent == BATTERY {
            battery += input;
        } else {
            *delivered.get_mut(&r.parent).expect("parent checked") += input;
        }
    }
    flow.delivered = delivered;
    flow.battery_draw = battery;
    Ok(flow)
}
