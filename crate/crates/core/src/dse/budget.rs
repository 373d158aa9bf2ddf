// SPDX-License-Identifier: Apache-2.0

use crate::power::PowerReport;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetCheck {
    pub total_mw: f64,
    pub average_budget_mw: f64,
    pub thermal_limit_mw: f64,
    pub average_ok: bool,
    pub sustained_ok: bool,
    /// Budget minus total; negative when over.
    pub average_margin_mw: f64,
    pub sustained_margin_mw: f64,
}

pub fn budget_check(report: &PowerReport, scenario: &Scenario) -> BudgetCheck {
    check(report.total, scenario.battery_budget_mw(), scenario.thermal_limit_mw)
}

fn check(total: f64, budget: f64, thermal: f64) -> BudgetCheck {
    BudgetCheck {
        total_mw: total,
        average_budget_mw: budget,
        thermal_limit_mw: thermal,
        average_ok: total <= budget,
        sustained_ok: total <= thermal,
        average_margin_mw: budget - total,
        sustained_margin_mw: thermal - total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::power_budget;

    #[test]
    fn under_budget_with_margin() {
        let c = check(150.0, power_budget(3.0, 15.0), 2000.0);
        assert!(c.average_ok && c.sustained_ok);
        assert_eq!(c.average_margin_mw, 50.0);
    }

    #[test]
    fn boundary_is_inclusive() {
        assert!(check(200.0, 200.0, 2000.0).average_ok);
    }

    #[test]
    fn over_thermal_limit() {
        let c = check(2500.0, 200.0, 2000.0);
        assert!(!c.sustained_ok && !c.average_ok);
        assert_eq!(c.sustained_margin_mw, -500.0);
    }
}
