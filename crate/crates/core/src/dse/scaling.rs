// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DseError;
use crate::power::PowerReport;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PowerType {
    DigitalDynamic,
    DigitalLeakage,
    Analog,
    Rf,
}

impl PowerType {
    pub const ALL: [PowerType; 4] =
        [PowerType::DigitalDynamic, PowerType::DigitalLeakage, PowerType::Analog, PowerType::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            PowerType::DigitalDynamic => "digital_dynamic",
            PowerType::DigitalLeakage => "digital_leakage",
            PowerType::Analog => "analog",
            PowerType::Rf => "rf",
        }
    }
}

impl fmt::Display for PowerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-node multiplicative power factors by power type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingTable {
    pub digital_dynamic: f64,
    pub digital_leakage: f64,
    pub analog: f64,
    pub rf: f64,
    #[serde(default = "default_cadence")]
    pub node_cadence_years: f64,
}

fn default_cadence() -> f64 {
    2.0
}

impl Default for ScalingTable {
    fn default() -> Self {
        ScalingTable {
            digital_dynamic: 0.85,
            digital_leakage: 0.90,
            analog: 0.97,
            rf: 0.98,
            node_cadence_years: 2.0,
        }
    }
}

impl ScalingTable {
    pub fn uniform(factor: f64) -> Self {
        ScalingTable {
            digital_dynamic: factor,
            digital_leakage: factor,
            analog: factor,
            rf: factor,
            node_cadence_years: 2.0,
        }
    }

    pub fn factors(&self) -> [f64; 4] {
        [self.digital_dynamic, self.digital_leakage, self.analog, self.rf]
    }

    pub fn validate(&self) -> Result<(), DseError> {
        for (t, f) in PowerType::ALL.iter().zip(self.factors()) {
            if !(f > 0.0 && f <= 1.0) {
                return Err(DseError::BadScalingTable(format!("{t} factor {f} is outside (0, 1]")));
            }
        }
        if !(self.node_cadence_years > 0.0) {
            return Err(DseError::BadScalingTable("node_cadence_years must be > 0".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, DseError> {
        let table: ScalingTable = toml::from_str(text).map_err(|e| DseError::BadScalingTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn node(&self, year: u32) -> u32 {
        (f64::from(year) / self.node_cadence_years + 1e-12).floor() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearProjection {
    pub year: u32,
    pub node: u32,
    /// Device power split by power type, in `PowerType::ALL` order.
    pub per_type_mw: [f64; 4],
    pub power_delivery_mw: f64,
    pub total_mw: f64,
    pub report: PowerReport,
}

impl YearProjection {
    /// Share of device power (excluding regulator losses) of one power type.
    pub fn type_share(&self, t: PowerType) -> f64 {
        let sum: f64 = self.per_type_mw.iter().sum();
        if sum > 0.0 {
            self.per_type_mw[t as usize] / sum
        } else {
            0.0
        }
    }
}

/// Projects `report` over years `0..=horizon_years`. Each device's power is
/// split by its decomposition and each part is scaled by its factor raised to
/// the node index; regulator losses are recomputed from the scaled loads.
pub fn scaling_projection(
    report: &PowerReport,
    scenario: &Scenario,
    table: &ScalingTable,
    horizon_years: u32,
) -> Result<Vec<YearProjection>, DseError> {
    table.validate()?;
    let mut fractions: BTreeMap<&str, [f64; 4]> = BTreeMap::new();
    for d in &scenario.devices {
        let dec = d.power_decomposition.ok_or_else(|| DseError::MissingDecomposition(d.id.clone()))?;
        fractions.insert(&d.id, dec.fractions());
    }
    let factors = table.factors();
    (0..=horizon_years)
        .map(|year| {
            let node = table.node(year);
            let mut per_type = [0.0; 4];
            let mut scaled = BTreeMap::new();
            for (id, &mw) in &report.per_component {
                let frac = fractions.get(id.as_str()).ok_or_else(|| DseError::MissingDecomposition(id.clone()))?;
                let mut p = 0.0;
                for i in 0..4 {
                    let part = mw * frac[i] * factors[i].powi(node as i32);
                    per_type[i] += part;
                    p += part;
                }
                scaled.insert(id.clone(), p);
            }
            let projected = if node == 0 { report.clone() } else { PowerReport::assemble(scenario, scaled)? };
            Ok(YearProjection {
                year,
                node,
                per_type_mw: per_type,
                power_delivery_mw: projected.per_rail_loss.values().fold(0.0, |a, b| a + b),
                total_mw: projected.total,
                report: projected,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, LoadOptions};

    fn one_device() -> (Scenario, PowerReport) {
        let s = parse_scenario(
            r#"
[battery]
capacity_wh = 3.0
target_hours = 15.0
[[devices]]
id = "d"
category = "compute"
rail = "battery"
states = [{ name = "idle", power_mw = 100.0 }]
power_decomposition = { digital_dynamic = 0.5, analog = 0.5 }
"#,
            LoadOptions::default(),
        )
        .unwrap();
        let report = PowerReport::assemble(&s, [("d".to_string(), 100.0)].into()).unwrap();
        (s, report)
    }

    #[test]
    fn uniform_factor_steps_every_two_years() {
        let (s, r) = one_device();
        let years = scaling_projection(&r, &s, &ScalingTable::uniform(0.8), 4).unwrap();
        let totals: Vec<f64> = years.iter().map(|y| y.total_mw).collect();
        for (got, want) in totals.iter().zip([100.0, 100.0, 80.0, 80.0, 64.0]) {
            assert!((got - want).abs() < 1e-9, "{totals:?}");
        }
        assert_eq!(years.iter().map(|y| y.node).collect::<Vec<_>>(), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn unit_factors_keep_power_constant() {
        let (s, r) = one_device();
        for y in scaling_projection(&r, &s, &ScalingTable::uniform(1.0), 6).unwrap() {
            assert_eq!(y.total_mw, 100.0);
        }
    }

    #[test]
    fn horizon_zero_returns_the_input() {
        let (s, r) = one_device();
        let years = scaling_projection(&r, &s, &ScalingTable::default(), 0).unwrap();
        assert_eq!(years.len(), 1);
        assert_eq!(years[0].report, r);
    }

    #[test]
    fn mixed_types_shift_share() {
        let (s, r) = one_device();
        let years = scaling_projection(&r, &s, &ScalingTable::default(), 2).unwrap();
        assert!(years[2].type_share(PowerType::Analog) > years[0].type_share(PowerType::Analog));
        assert!((years[2].per_type_mw[0] - 50.0 * 0.85).abs() < 1e-12);
    }

    #[test]
    fn table_parsing_and_validation() {
        let t = ScalingTable::parse("digital_dynamic = 0.8\ndigital_leakage = 0.9\nanalog = 1.0\nrf = 1.0\n").unwrap();
        assert_eq!(t.node_cadence_years, 2.0);
        assert!(ScalingTable::parse("digital_dynamic = 1.2\ndigital_leakage = 0.9\nanalog = 1.0\nrf = 1.0\n").is_err());
        assert!(ScalingTable::parse("digital_dynamic = 0.8\n").is_err());
        assert!(ScalingTable::parse(crate::bundled::DEFAULT_SCALING).is_ok());
    }

    #[test]
    fn missing_decomposition_is_an_error() {
        let (mut s, r) = one_device();
        s.devices[0].power_decomposition = None;
        assert!(matches!(
            scaling_projection(&r, &s, &ScalingTable::default(), 2),
            Err(DseError::MissingDecomposition(_))
        ));
    }
}
