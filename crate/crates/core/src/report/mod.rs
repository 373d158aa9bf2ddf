// SPDX-License-Identifier: Apache-2.0

//! Text renderings of reports, sweeps and traces: CSV, Markdown, SVG, and the
//! run manifest. Every function here is a pure function of its inputs.

pub mod svg;

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dse::{AmdahlTable, BudgetCheck, CompressionGrid, PowerType, SweepResult, YearProjection};
use crate::power::{render_percentages, round_sig, PowerReport};
use crate::scenario::ResourceCategory;
use crate::sim::SimTrace;
use svg::Series;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report csv: {0}")]
    Csv(String),
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// `component,category,mW,percent`; rail losses appear as `power_delivery` rows.
pub fn report_csv(report: &PowerReport) -> String {
    let pct = render_percentages(report).unwrap_or_default();
    let rows = report.entries().map(|(id, mw)| {
        vec![
            id.clone(),
            report.category_of(id).to_string(),
            num(mw),
            pct.get(id).map(|p| format!("{p:.2}")).unwrap_or_else(|| "0.00".into()),
        ]
    });
    csv_string(&["component", "category", "mW", "percent"], rows)
}

/// Reads a `report.csv` back into a report holding only components.
pub fn parse_report_csv(text: &str) -> Result<PowerReport, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| ReportError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| ReportError::Csv(format!("missing column `{name}`")))
    };
    let (c_id, c_mw) = (col("component")?, col("mW")?);
    let c_cat = col("category").ok();
    let mut report = PowerReport::default();
    for rec in r.records() {
        let rec = rec.map_err(|e| ReportError::Csv(e.to_string()))?;
        let id = rec.get(c_id).unwrap_or_default().to_string();
        let mw: f64 = rec
            .get(c_mw)
            .unwrap_or_default()
            .parse()
            .map_err(|_| ReportError::Csv(format!("bad mW for `{id}`")))?;
        if report.per_component.insert(id.clone(), mw).is_some() {
            return Err(ReportError::Csv(format!("duplicate component `{id}`")));
        }
        if let Some(c) = c_cat {
            let name = rec.get(c).unwrap_or_default();
            let cat = ResourceCategory::ALL
                .into_iter()
                .find(|k| k.as_str() == name)
                .ok_or_else(|| ReportError::Csv(format!("unknown category `{name}` for `{id}`")))?;
            report.categories.insert(id, cat);
            *report.per_category.entry(cat).or_default() += mw;
        }
    }
    report.total = report.per_component.values().fold(0.0, |a, b| a + b);
    Ok(report)
}

/// Category rollup table with the budget summary.
pub fn report_md(title: &str, report: &PowerReport, budget: &BudgetCheck) -> String {
    let mut s = format!("# {title}\n\n");
    s.push_str("Values are rounded to two significant figures for presentation.\n\n");
    s.push_str("| category | mW | percent |\n|---|---:|---:|\n");
    let rounded_total: f64 = ResourceCategory::ALL.iter().map(|c| round_sig(report.category(*c), 2)).sum();
    for c in ResourceCategory::ALL {
        let mw = report.category(c);
        if mw == 0.0 && !report.per_category.contains_key(&c) {
            continue;
        }
        let r = round_sig(mw, 2);
        let pct = if rounded_total > 0.0 { 100.0 * r / rounded_total } else { 0.0 };
        s.push_str(&format!("| {c} | {r} | {pct:.1} |\n"));
    }
    let total_pct = if rounded_total > 0.0 { 100.0 } else { 0.0 };
    s.push_str(&format!("| **total** | {} | {total_pct:.1} |\n\n", round_sig(report.total, 2)));
    s.push_str(&format!(
        "Average budget: {} mW ({}), margin {} mW.\n\n",
        round_sig(budget.average_budget_mw, 3),
        if budget.average_ok { "ok" } else { "exceeded" },
        round_sig(budget.average_margin_mw, 2)
    ));
    s.push_str(&format!(
        "Sustained limit: {} mW ({}), margin {} mW.\n",
        round_sig(budget.thermal_limit_mw, 3),
        if budget.sustained_ok { "ok" } else { "exceeded" },
        round_sig(budget.sustained_margin_mw, 2)
    ));
    s
}

fn category_series(reports: &[(&str, &PowerReport)]) -> Vec<Series> {
    ResourceCategory::ALL
        .iter()
        .filter(|c| reports.iter().any(|(_, r)| r.category(**c) > 0.0))
        .map(|c| Series { name: c.to_string(), values: reports.iter().map(|(_, r)| r.category(*c)).collect() })
        .collect()
}

/// Stacked bar of category power per configuration.
pub fn composition_svg(reports: &[(&str, &PowerReport)]) -> String {
    let labels: Vec<String> = reports.iter().map(|(l, _)| l.to_string()).collect();
    svg::stacked_bars("Power composition by category", &labels, &category_series(reports), "mW")
}

pub fn placement_csv(sweep: &SweepResult) -> String {
    let mut header = vec!["label", "on_device", "total_mw", "delta_percent", "radio_mw", "upload_bps"];
    let cat_cols: Vec<String> = ResourceCategory::ALL.iter().map(|c| format!("{c}_mw")).collect();
    header.extend(cat_cols.iter().map(String::as_str));
    let rows = sweep.rows.iter().map(|r| {
        let mut row = vec![
            r.label.clone(),
            r.on_device.join(";"),
            num(r.total_mw),
            num(r.delta_percent),
            num(r.radio_mw),
            num(r.upload_bps),
        ];
        row.extend(ResourceCategory::ALL.iter().map(|c| num(r.per_category.get(c).copied().unwrap_or(0.0))));
        row
    });
    csv_string(&header, rows)
}

pub fn placement_svg(sweep: &SweepResult) -> String {
    let labels: Vec<String> = sweep.rows.iter().map(|r| r.label.clone()).collect();
    let series = ResourceCategory::ALL
        .iter()
        .filter(|c| sweep.rows.iter().any(|r| r.per_category.get(c).copied().unwrap_or(0.0) > 0.0))
        .map(|c| Series {
            name: c.to_string(),
            values: sweep.rows.iter().map(|r| r.per_category.get(c).copied().unwrap_or(0.0)).collect(),
        })
        .collect::<Vec<_>>();
    svg::stacked_bars("Placement sweep: power by category", &labels, &series, "mW")
}

pub fn compression_csv(grid: &CompressionGrid) -> String {
    let rows = grid.rows.iter().map(|r| {
        vec![num(r.ratio), r.divisor.to_string(), num(r.total_mw), num(r.radio_mw), r.selected_profile.clone()]
    });
    csv_string(&["ratio", "divisor", "total_mw", "radio_mw", "selected_profile"], rows)
}

pub fn compression_svg(grid: &CompressionGrid) -> String {
    let labels: Vec<String> = grid.ratios.iter().map(|r| format!("{r}:1")).collect();
    let series: Vec<Series> = grid
        .divisors
        .iter()
        .map(|d| Series {
            name: format!("rate / {d}"),
            values: grid
                .ratios
                .iter()
                .map(|r| grid.at(*r, *d).map(|row| row.total_mw).unwrap_or(0.0))
                .collect(),
        })
        .collect();
    svg::line_grid(
        "Compression sweep (compute held fixed, link payload scaled)",
        &labels,
        &series,
        "total mW",
    )
}

pub fn scaling_csv(years: &[YearProjection]) -> String {
    let mut header = vec!["year".to_string(), "node".to_string()];
    header.extend(PowerType::ALL.iter().map(|t| format!("{t}_mw")));
    header.extend(["power_delivery_mw".to_string(), "total_mw".to_string()]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = years.iter().map(|y| {
        let mut row = vec![y.year.to_string(), y.node.to_string()];
        row.extend(y.per_type_mw.iter().map(|v| num(*v)));
        row.push(num(y.power_delivery_mw));
        row.push(num(y.total_mw));
        row
    });
    csv_string(&header, rows)
}

pub fn scaling_svg(years: &[YearProjection]) -> String {
    let labels: Vec<String> = years.iter().map(|y| y.year.to_string()).collect();
    let mut series: Vec<Series> = PowerType::ALL
        .iter()
        .map(|t| Series {
            name: t.to_string(),
            values: years.iter().map(|y| y.per_type_mw[*t as usize]).collect(),
        })
        .collect();
    series.push(Series {
        name: "power_delivery".into(),
        values: years.iter().map(|y| y.power_delivery_mw).collect(),
    });
    svg::stacked_area("Technology scaling projection", &labels, &series, "mW")
}

pub fn amdahl_csv(table: &AmdahlTable) -> String {
    let rows = table
        .rows
        .iter()
        .map(|r| vec![num(r.threshold_percent), r.count.to_string(), format!("{:.2}", r.cumulative_percent)]);
    csv_string(&["threshold", "count", "cumulative_percent"], rows)
}

/// Two sections: state intervals (if recorded), then bytes moved per device.
pub fn trace_csv(trace: &SimTrace) -> String {
    let mut s = csv_string(
        &["device", "state", "start_s", "end_s"],
        trace
            .intervals
            .iter()
            .map(|i| vec![i.device.clone(), i.state.clone(), num(i.start_s), num(i.end_s)]),
    );
    s.push('\n');
    s.push_str(&csv_string(
        &["device", "bytes_moved"],
        trace.timelines.iter().map(|(d, tl)| vec![d.clone(), num(tl.bytes_moved)]),
    ));
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<ScenarioRef>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            inputs: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &str, content: &[u8]) {
        self.inputs.push(ScenarioRef { path: path.into(), sha256: sha256_hex(content) });
    }

    /// Records an output file name with the hash of its content.
    pub fn add_output(&mut self, name: &str, content: &[u8]) {
        self.outputs.insert(name.into(), sha256_hex(content));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(values: &[(&str, f64)]) -> PowerReport {
        let per_component: BTreeMap<String, f64> = values.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let categories = values.iter().map(|(k, _)| (k.to_string(), ResourceCategory::Compute)).collect();
        let total = per_component.values().sum();
        PowerReport {
            per_component,
            categories,
            per_category: [(ResourceCategory::Compute, total)].into_iter().collect(),
            total,
            ..PowerReport::default()
        }
    }

    #[test]
    fn report_csv_round_trips_full_precision() {
        let r = report(&[("a", 1.0 / 3.0), ("b", 2.5)]);
        let text = report_csv(&r);
        assert!(text.starts_with("component,category,mW,percent\n"));
        let back = parse_report_csv(&text).unwrap();
        assert_eq!(back.per_component, r.per_component);
    }

    #[test]
    fn bad_report_csv_is_rejected() {
        assert!(parse_report_csv("component,mW\na,x\n").is_err());
        assert!(parse_report_csv("name,power\na,1\n").is_err());
        assert!(parse_report_csv("component,mW\na,1\na,2\n").is_err());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn markdown_rollup_lists_categories_and_budget() {
        let r = report(&[("a", 150.0)]);
        let b = crate::dse::BudgetCheck {
            total_mw: 150.0,
            average_budget_mw: 200.0,
            thermal_limit_mw: 2000.0,
            average_ok: true,
            sustained_ok: true,
            average_margin_mw: 50.0,
            sustained_margin_mw: 1850.0,
        };
        let md = report_md("t", &r, &b);
        assert!(md.contains("| compute | 150 | 100.0 |"));
        assert!(md.contains("margin 50 mW"));
    }
}
