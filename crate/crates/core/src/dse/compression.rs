// SPDX-License-Identifier: Apache-2.0

use super::{evaluate, par_map, radio_fallback, DseError, SweepOptions};
use crate::scenario::{total_upload_bytes, LinkScaling, PlacementPreset, Scenario};

pub const DEFAULT_RATIOS: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

pub const DEFAULT_DIVISORS: [u32; 6] = [1, 2, 4, 8, 16, 32];

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionRow {
    pub ratio: f64,
    pub divisor: u32,
    pub demand_bps: f64,
    pub total_mw: f64,
    pub radio_mw: f64,
    pub selected_profile: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionGrid {
    pub ratios: Vec<f64>,
    pub divisors: Vec<u32>,
    /// Divisor-major: all ratios for the first divisor, then the next.
    pub rows: Vec<CompressionRow>,
    /// Total with nothing left to upload, on the profile chosen for zero demand.
    pub floor_mw: f64,
    pub floor_profile: String,
    pub floor_maintenance_mw: f64,
}

impl CompressionGrid {
    pub fn at(&self, ratio: f64, divisor: u32) -> Option<&CompressionRow> {
        self.rows.iter().find(|r| r.ratio == ratio && r.divisor == divisor)
    }
}

/// Full-offload system power over a grid of extra link compression ratios and
/// upload rate divisors. Only the uploaded payload scales; capture and
/// encoding work are held fixed.
pub fn compression_sweep(
    scenario: &Scenario,
    ratios: &[f64],
    divisors: &[u32],
    options: SweepOptions,
) -> Result<CompressionGrid, DseError> {
    if let Some(r) = ratios.iter().find(|r| !(**r >= 1.0)) {
        return Err(DseError::BadInput(format!("compression ratio {r} is below 1")));
    }
    if divisors.contains(&0) {
        return Err(DseError::BadInput("rate divisor 0".into()));
    }
    let base = scenario.with_placement(&PlacementPreset::FullOffload);
    let points: Vec<(f64, u32)> = divisors
        .iter()
        .flat_map(|&d| ratios.iter().map(move |&r| (r, d)))
        .collect();

    let run_point = |link: LinkScaling| -> Result<(f64, f64, f64, String), DseError> {
        let mut config = base.clone();
        config.link = link;
        let demand = 8.0 * total_upload_bytes(&config);
        let radio = config.radio.as_mut().ok_or(DseError::NoRadio)?;
        let chosen = radio_fallback(demand, &radio.primary, radio.fallback.as_ref(), radio.fallback_threshold_bps)?
            .clone();
        radio.primary = chosen.clone();
        let device = radio.device.clone();
        let eval = evaluate(&config, options.sim)?;
        let radio_mw = eval.report.per_component.get(&device).copied().unwrap_or(0.0);
        Ok((demand, eval.report.total, radio_mw, chosen.id))
    };

    let rows = par_map(options.jobs, &points, |&(ratio, divisor)| {
        let (demand_bps, total_mw, radio_mw, selected_profile) =
            run_point(LinkScaling { extra_compression: ratio, rate_divisor: divisor })?;
        Ok(CompressionRow { ratio, divisor, demand_bps, total_mw, radio_mw, selected_profile })
    })?;

    let (_, floor_mw, floor_radio_mw, floor_profile) =
        run_point(LinkScaling { extra_compression: f64::INFINITY, rate_divisor: 1 })?;
    Ok(CompressionGrid {
        ratios: ratios.to_vec(),
        divisors: divisors.to_vec(),
        rows,
        floor_mw,
        floor_profile,
        floor_maintenance_mw: floor_radio_mw,
    })
}
