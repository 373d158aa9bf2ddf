// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::{PowerError, PowerReport};

/// Rounds to `sig` significant decimal figures.
pub fn round_sig(x: f64, sig: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", sig.saturating_sub(1), x).parse().expect("formatted float parses")
}

/// Percent share of every component and rail loss, computed from values
/// rounded to two significant figures. Floating residual goes to the largest
/// entry so the shares sum to 100.
pub fn render_percentages(report: &PowerReport) -> Result<BTreeMap<String, f64>, PowerError> {
    let rounded: Vec<(&String, f64)> = report
        .entries()
        .map(|(id, mw)| (id, round_sig(mw, report.rounding.sig_figs)))
        .collect();
    let sum: f64 = rounded.iter().map(|(_, v)| v).sum();
    if !(sum > 0.0) {
        return Err(PowerError::ZeroTotal);
    }
    let mut out: BTreeMap<String, f64> =
        rounded.iter().map(|(id, v)| ((*id).clone(), 100.0 * v / sum)).collect();
    let largest = rounded
        .iter()
        .fold(None::<(&String, f64)>, |best, &(id, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((id, v)),
        })
        .map(|(id, _)| id.clone())
        .expect("non-empty when sum > 0");
    let residual = 100.0 - out.values().sum::<f64>();
    *out.get_mut(&largest).expect("present") += residual;
    Ok(out)
}
