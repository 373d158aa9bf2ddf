// SPDX-License-Identifier: Apache-2.0

//! Minimal hand-written SVG charts. Output depends only on the inputs and the
//! crate version, so charts diff cleanly between runs.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<!-- wearsim {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#, escape(title));
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn plot_w() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_h() -> f64 {
    HEIGHT - TOP - BOTTOM
}

fn y_axis(s: &mut String, max: f64, unit: &str) {
    let base = TOP + plot_h();
    let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="#333"/>"##);
    let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="#333"/>"##, LEFT + plot_w());
    for i in 0..=4 {
        let v = max * f64::from(i) / 4.0;
        let y = base - plot_h() * f64::from(i) / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">{}</text>"#,
        TOP + plot_h() / 2.0,
        TOP + plot_h() / 2.0,
        escape(unit)
    );
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 16.0 * i as f64;
        let x = LEFT + plot_w() + 16.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            PALETTE[i % PALETTE.len()],
            x + 14.0,
            y + 9.0,
            escape(name)
        );
    }
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        1.0
    } else {
        v * 1.05
    }
}

/// One stacked bar per label; `series[i].values[j]` is series `i` in bar `j`.
pub fn stacked_bars(title: &str, labels: &[String], series: &[Series], unit: &str) -> String {
    let mut s = header(title);
    let totals: Vec<f64> = (0..labels.len()).map(|j| series.iter().map(|x| x.values[j].max(0.0)).sum()).collect();
    let max = nice_max(totals.iter().copied().fold(0.0, f64::max));
    y_axis(&mut s, max, unit);
    let slot = if labels.is_empty() { plot_w() } else { plot_w() / labels.len() as f64 };
    let bar = slot * 0.7;
    let base = TOP + plot_h();
    for (j, label) in labels.iter().enumerate() {
        let x = LEFT + slot * j as f64 + (slot - bar) / 2.0;
        let mut y = base;
        for (i, ser) in series.iter().enumerate() {
            let h = plot_h() * ser.values[j].max(0.0) / max;
            if h > 0.0 {
                y -= h;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{bar:.2}" height="{h:.2}" fill="{}"><title>{} {}: {:.4}</title></rect>"#,
                    PALETTE[i % PALETTE.len()],
                    escape(label),
                    escape(&ser.name),
                    ser.values[j]
                );
            }
        }
        let cx = x + bar / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="end" transform="rotate(-35 {cx:.2} {:.2})">{}</text>"#,
            base + 14.0,
            base + 14.0,
            escape(label)
        );
    }
    let names: Vec<&str> = series.iter().map(|x| x.name.as_str()).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}

/// One polyline per series over shared x positions.
pub fn line_grid(title: &str, x_labels: &[String], series: &[Series], unit: &str) -> String {
    let mut s = header(title);
    let max = nice_max(series.iter().flat_map(|x| x.values.iter().copied()).fold(0.0, f64::max));
    y_axis(&mut s, max, unit);
    let n = x_labels.len().max(2) - 1;
    let base = TOP + plot_h();
    let xpos = |j: usize| LEFT + plot_w() * j as f64 / n as f64;
    for (j, label) in x_labels.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, xpos(j), base + 16.0, escape(label));
    }
    for (i, ser) in series.iter().enumerate() {
        let points: Vec<String> = ser
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| format!("{:.2},{:.2}", xpos(j), base - plot_h() * v / max))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            points.join(" ")
        );
    }
    let names: Vec<&str> = series.iter().map(|x| x.name.as_str()).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}

/// Stacked areas over shared x positions.
pub fn stacked_area(title: &str, x_labels: &[String], series: &[Series], unit: &str) -> String {
    let mut s = header(title);
    let n_x = x_labels.len();
    let totals: Vec<f64> = (0..n_x).map(|j| series.iter().map(|x| x.values[j].max(0.0)).sum()).collect();
    let max = nice_max(totals.iter().copied().fold(0.0, f64::max));
    y_axis(&mut s, max, unit);
    let n = n_x.max(2) - 1;
    let base = TOP + plot_h();
    let xpos = |j: usize| LEFT + plot_w() * j as f64 / n as f64;
    for (j, label) in x_labels.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, xpos(j), base + 16.0, escape(label));
    }
    let mut lower = vec![0.0; n_x];
    for (i, ser) in series.iter().enumerate() {
        let upper: Vec<f64> = lower.iter().zip(&ser.values).map(|(l, v)| l + v.max(0.0)).collect();
        let mut pts: Vec<String> =
            (0..n_x).map(|j| format!("{:.2},{:.2}", xpos(j), base - plot_h() * upper[j] / max)).collect();
        pts.extend((0..n_x).rev().map(|j| format!("{:.2},{:.2}", xpos(j), base - plot_h() * lower[j] / max)));
        let _ = writeln!(
            s,
            r#"<polygon fill="{}" fill-opacity="0.85" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        );
        lower = upper;
    }
    let names: Vec<&str> = series.iter().map(|x| x.name.as_str()).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}
