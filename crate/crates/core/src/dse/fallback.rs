// SPDX-License-Identifier: Apache-2.0

use super::DseError;
use crate::scenario::RadioProfile;

/// Picks the link profile for a sustained demand in bits per second.
///
/// The fallback is taken below `threshold_bps` when it can carry the demand
/// and costs less at that demand. Otherwise the primary is kept if it can
/// carry the demand, and the fallback is the last resort.
pub fn radio_fallback<'a>(
    demand_bps: f64,
    primary: &'a RadioProfile,
    fallback: Option<&'a RadioProfile>,
    threshold_bps: f64,
) -> Result<&'a RadioProfile, DseError> {
    if let Some(fb) = fallback {
        if demand_bps < threshold_bps
            && demand_bps <= fb.max_bandwidth_bps
            && fb.power_at_demand_mw(demand_bps) < primary.power_at_demand_mw(demand_bps)
        {
            return Ok(fb);
        }
    }
    if demand_bps <= primary.max_bandwidth_bps {
        return Ok(primary);
    }
    match fallback {
        Some(fb) if demand_bps <= fb.max_bandwidth_bps => Ok(fb),
        _ => Err(DseError::NoRadioProfile { demand_bps }),
    }
}
