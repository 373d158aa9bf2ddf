// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::{evaluate, par_map, DseError, SweepOptions};
use crate::scenario::{total_upload_bytes, Placement, PlacementPreset, ResourceCategory, Scenario};

pub const MAX_FREE_PRIMITIVES: usize = 8;

pub const BASELINE_LABEL: &str = "full_offload";

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRow {
    pub label: String,
    pub on_device: Vec<String>,
    pub total_mw: f64,
    pub per_category: BTreeMap<ResourceCategory, f64>,
    pub radio_mw: f64,
    pub upload_bps: f64,
    /// Percent change of `total_mw` against the baseline row.
    pub delta_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub primitives: Vec<String>,
    pub rows: Vec<PlacementRow>,
}

impl SweepResult {
    pub fn baseline(&self) -> &PlacementRow {
        &self.rows[0]
    }

    /// Row whose on-device set is exactly `ids`, in any order.
    pub fn row(&self, ids: &[&str]) -> Option<&PlacementRow> {
        let mut want: Vec<&str> = ids.to_vec();
        want.sort_unstable();
        self.rows.iter().find(|r| {
            let mut have: Vec<&str> = r.on_device.iter().map(String::as_str).collect();
            have.sort_unstable();
            have == want
        })
    }
}

/// Runs every on/off-device combination of `subset`. Primitives outside the
/// subset stay offloaded unless forced on-device. Row `i` places primitive `j`
/// on-device when bit `j` of `i` is set; row 0 is the full-offload baseline.
pub fn placement_sweep(scenario: &Scenario, subset: &[String], options: SweepOptions) -> Result<SweepResult, DseError> {
    if subset.len() > MAX_FREE_PRIMITIVES {
        return Err(DseError::Guard(subset.len()));
    }
    for (i, id) in subset.iter().enumerate() {
        let p = scenario.primitive(id).ok_or_else(|| DseError::UnknownPrimitive(id.clone()))?;
        if !p.is_free() {
            return Err(DseError::ForcedPrimitive(id.clone()));
        }
        if p.on_device_graph.is_none() {
            return Err(DseError::NoOnDeviceGraph(id.clone()));
        }
        if subset[..i].contains(id) {
            return Err(DseError::BadInput(format!("primitive `{id}` listed twice")));
        }
    }

    let masks: Vec<u32> = (0..1u32 << subset.len()).collect();
    let radio = scenario.radio_device().map(str::to_string);
    let evaluated = par_map(options.jobs, &masks, |&mask| {
        let on_device: Vec<String> = subset
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .map(|(_, id)| id.clone())
            .collect();
        let explicit = scenario
            .primitives
            .iter()
            .filter(|p| p.is_free())
            .map(|p| {
                let place = if on_device.contains(&p.id) { Placement::OnDevice } else { Placement::Offload };
                (p.id.clone(), place)
            })
            .collect();
        let config = scenario.with_placement(&PlacementPreset::Explicit(explicit));
        let eval = evaluate(&config, options.sim)?;
        let label = if on_device.is_empty() { BASELINE_LABEL.to_string() } else { on_device.join("+") };
        let radio_mw = radio
            .as_ref()
            .and_then(|r| eval.report.per_component.get(r))
            .copied()
            .unwrap_or(0.0);
        Ok(PlacementRow {
            label,
            on_device,
            total_mw: eval.report.total,
            per_category: eval.report.per_category,
            radio_mw,
            upload_bps: 8.0 * total_upload_bytes(&config),
            delta_percent: 0.0,
        })
    })?;

    let base = evaluated[0].total_mw;
    let rows = evaluated
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.delta_percent = if i == 0 || base == 0.0 { 0.0 } else { 100.0 * (row.total_mw - base) / base };
            row
        })
        .collect();
    Ok(SweepResult { primitives: subset.to_vec(), rows })
}
