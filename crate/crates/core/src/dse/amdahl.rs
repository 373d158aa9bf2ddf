// SPDX-License-Identifier: Apache-2.0

use super::DseError;
use crate::power::{PowerError, PowerReport};

pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.1, 0.5, 1.0, 5.0, 10.0, 25.0];

#[derive(Debug, Clone, PartialEq)]
pub struct AmdahlRow {
    pub threshold_percent: f64,
    /// Components whose own share is at most the threshold.
    pub count: usize,
    pub cumulative_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmdahlTable {
    pub rows: Vec<AmdahlRow>,
    pub components: usize,
    pub improvable: Vec<String>,
    pub improvable_fraction: f64,
    /// `f64::INFINITY` when everything is improvable.
    pub bound: f64,
}

/// Cumulative share table over the report's components and rail losses.
///
/// Without an explicit `improvable` set, the set is every component above the
/// largest threshold that still leaves some component out of its row.
pub fn amdahl_analysis(
    report: &PowerReport,
    thresholds: &[f64],
    improvable: Option<&[String]>,
) -> Result<AmdahlTable, DseError> {
    let entries: Vec<(&String, f64)> = report.entries().collect();
    let total: f64 = entries.iter().map(|(_, v)| v).sum();
    if !(total > 0.0) {
        return Err(PowerError::ZeroTotal.into());
    }
    let shares: Vec<(&String, f64)> = entries.iter().map(|&(id, v)| (id, 100.0 * v / total)).collect();

    let mut ts: Vec<f64> = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let rows: Vec<AmdahlRow> = ts
        .iter()
        .map(|&t| {
            let below: Vec<f64> = shares.iter().filter(|(_, s)| *s <= t).map(|(_, s)| *s).collect();
            AmdahlRow { threshold_percent: t, count: below.len(), cumulative_percent: below.iter().fold(0.0, |a, b| a + b) }
        })
        .collect();

    let improvable: Vec<String> = match improvable {
        Some(set) => {
            for id in set {
                if !entries.iter().any(|(e, _)| *e == id) {
                    return Err(DseError::BadInput(format!("unknown component `{id}`")));
                }
            }
            set.to_vec()
        }
        None => match rows.iter().rev().find(|r| r.count < shares.len()) {
            Some(cut) => shares
                .iter()
                .filter(|(_, s)| *s > cut.threshold_percent)
                .map(|(id, _)| (*id).clone())
                .collect(),
            None => Vec::new(),
        },
    };
    let fraction: f64 = entries
        .iter()
        .filter(|(id, _)| improvable.contains(id))
        .map(|(_, v)| v)
        .fold(0.0, |a, b| a + b)
        / total;
    let bound = if fraction >= 1.0 { f64::INFINITY } else { 1.0 / (1.0 - fraction) };
    Ok(AmdahlTable {
        rows,
        components: shares.len(),
        improvable,
        improvable_fraction: fraction,
        bound,
    })
}

/// Bound obtained by removing `set` from the report and re-summing what is left.
pub fn bound_by_zeroing(report: &PowerReport, set: &[String]) -> f64 {
    let before: f64 = report.entries().map(|(_, v)| v).sum();
    let after: f64 = report.entries().filter(|(id, _)| !set.contains(id)).fold(0.0, |a, (_, v)| a + v);
    if after > 0.0 {
        before / after
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(values: &[f64]) -> PowerReport {
        let per_component = values.iter().enumerate().map(|(i, v)| (format!("c{i:03}"), *v)).collect();
        PowerReport { per_component, total: values.iter().sum(), ..PowerReport::default() }
    }

    #[test]
    fn single_component_is_unbounded() {
        let t = amdahl_analysis(&report(&[5.0]), &DEFAULT_THRESHOLDS, None).unwrap();
        assert!(t.bound.is_infinite());
        assert_eq!(t.improvable, vec!["c000".to_string()]);
    }

    #[test]
    fn zero_total_is_an_error() {
        assert!(amdahl_analysis(&report(&[0.0, 0.0]), &DEFAULT_THRESHOLDS, None).is_err());
    }

    #[test]
    fn explicit_set_matches_zeroing() {
        let r = report(&[50.0, 30.0, 20.0]);
        let set = vec!["c000".to_string()];
        let t = amdahl_analysis(&r, &[10.0], Some(&set)).unwrap();
        assert!((t.bound - 2.0).abs() < 1e-12);
        assert!((bound_by_zeroing(&r, &set) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rows_follow_sorted_thresholds() {
        let t = amdahl_analysis(&report(&[1.0, 2.0, 97.0]), &[50.0, 1.0, 1.0], None).unwrap();
        let got: Vec<_> = t.rows.iter().map(|r| (r.threshold_percent, r.count)).collect();
        assert_eq!(got, vec![(1.0, 1), (50.0, 2)]);
        assert_eq!(t.improvable, vec!["c002".to_string()]);
    }
}
