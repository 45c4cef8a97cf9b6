//! Pricing validity rules.
//!
//! * R1: no two plans may resolve to the same features and limits (price is
//!   not a difference).
//! * R2: every feature must be truthy in some plan or granted truthy by some
//!   add-on.
//! * R3a: no limit period may be longer than the billing period, compared in
//!   canonical days.
//! * R3b: every limit needs a non-blank metric.

use std::fmt;

use serde::Serialize;

use crate::model::Pricing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "R1_DUPLICATE_PLANS")]
    DuplicatePlans,
    #[serde(rename = "R2_ORPHAN_FEATURE")]
    OrphanFeature,
    #[serde(rename = "R3A_PERIOD_EXCEEDS_CONTRACT")]
    PeriodExceedsContract,
    #[serde(rename = "R3B_MISSING_METRIC")]
    MissingMetric,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::DuplicatePlans => "R1_DUPLICATE_PLANS",
            Rule::OrphanFeature => "R2_ORPHAN_FEATURE",
            Rule::PeriodExceedsContract => "R3A_PERIOD_EXCEEDS_CONTRACT",
            Rule::MissingMetric => "R3B_MISSING_METRIC",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub subjects: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn rules(&self) -> Vec<Rule> {
        self.violations.iter().map(|v| v.rule).collect()
    }
}

pub fn validate(pricing: &Pricing) -> ValidationReport {
    let mut violations = Vec::new();

    let resolved = pricing.resolved_plans();
    for (i, a) in resolved.iter().enumerate() {
        for b in &resolved[i + 1..] {
            if a.same_configuration(b) {
                violations.push(Violation {
                    rule: Rule::DuplicatePlans,
                    subjects: vec![a.plan_name.clone(), b.plan_name.clone()],
                    message: format!(
                        "plans `{}` and `{}` offer the same features and usage limits",
                        a.plan_name, b.plan_name
                    ),
                });
            }
        }
    }

    let plan_managed = pricing.plan_managed_features();
    let add_on_managed = pricing.add_on_managed_features();
    for name in pricing.features.keys() {
        if !plan_managed.contains(&name.as_str()) && !add_on_managed.contains(&name.as_str()) {
            violations.push(Violation {
                rule: Rule::OrphanFeature,
                subjects: vec![name.clone()],
                message: format!("feature `{name}` is not available in any plan or add-on"),
            });
        }
    }

    let contract_days = pricing.billing_period.canonical_days();
    for (name, limit) in &pricing.usage_limits {
        if let Some(period) = limit.period {
            if period.canonical_days() > contract_days {
                violations.push(Violation {
                    rule: Rule::PeriodExceedsContract,
                    subjects: vec![name.clone()],
                    message: format!(
                        "limit `{name}` renews every {period} ({} days), longer than the billing period {} ({contract_days} days)",
                        period.canonical_days(),
                        pricing.billing_period,
                    ),
                });
            }
        }
        if limit.metric.trim().is_empty() {
            violations.push(Violation {
                rule: Rule::MissingMetric,
                subjects: vec![name.clone()],
                message: format!("limit `{name}` has no metric to measure usage by"),
            });
        }
    }

    violations.sort_by(|a, b| (a.rule, a.subjects.first()).cmp(&(b.rule, b.subjects.first())));
    ValidationReport {
        valid: violations.is_empty(),
        violations,
    }
}
