use super::{is_identifier, FeatureValue, LimitKind, Period, Pricing, ValueType};

/// A broken model invariant, located by its document path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    /// A name that does not resolve to a declared entity.
    Dangling,
    /// A value whose kind does not match its declared type.
    TypeMismatch,
    Missing,
    /// A field present where the model does not allow it.
    Forbidden,
    /// A name clash between catalogs.
    Duplicate,
    /// A value outside its domain.
    Invalid,
}

struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, kind: IssueKind, message: impl Into<String>) {
        self.0.push(Issue {
            path: path.into(),
            kind,
            message: message.into(),
        });
    }
}

impl Pricing {
    /// Checks every structural invariant of the model. An empty result means
    /// the pricing is well-formed; rule-level validity is the validator's job.
    pub fn check(&self) -> Vec<Issue> {
        let mut out = Issues(Vec::new());
        self.check_metadata(&mut out);
        self.check_features(&mut out);
        self.check_limits(&mut out);
        self.check_plans(&mut out);
        self.check_add_ons(&mut out);
        if self.plans.is_empty() && self.add_ons.is_empty() {
            out.push(
                "plans",
                IssueKind::Missing,
                "a pricing needs at least one plan or add-on",
            );
        }
        out.0
    }

    fn check_metadata(&self, out: &mut Issues) {
        if self.saas_name.trim().is_empty() {
            out.push("saasName", IssueKind::Invalid, "saasName must not be empty");
        }
        let iso = self.currency.len() == 3 && self.currency.bytes().all(|b| b.is_ascii_uppercase());
        if !iso {
            out.push(
                "currency",
                IssueKind::Invalid,
                format!("currency {:?} is not a three-letter ISO-4217 code", self.currency),
            );
        }
        check_period(self.billing_period, "billingPeriod", out);
    }

    fn check_features(&self, out: &mut Issues) {
        for (name, feature) in &self.features {
            let path = format!("features.{name}");
            check_name(name, &path, out);
            if feature.default_value.value_type() != feature.value_type {
                out.push(
                    format!("{path}.defaultValue"),
                    IssueKind::TypeMismatch,
                    format!(
                        "default value {} is not of type {}",
                        feature.default_value, feature.value_type
                    ),
                );
            }
        }
    }

    fn check_limits(&self, out: &mut Issues) {
        for (name, limit) in &self.usage_limits {
            let path = format!("usageLimits.{name}");
            check_name(name, &path, out);
            if self.features.contains_key(name) {
                out.push(
                    path.clone(),
                    IssueKind::Duplicate,
                    format!("`{name}` is already declared as a feature"),
                );
            }
            if limit.metric.trim().is_empty() {
                out.push(format!("{path}.metric"), IssueKind::Invalid, "metric must not be empty");
            }
            match (limit.kind, limit.period) {
                (LimitKind::Renewable, None) => out.push(
                    format!("{path}.period"),
                    IssueKind::Missing,
                    "RENEWABLE limits need a period",
                ),
                (LimitKind::NonRenewable, Some(_)) => out.push(
                    format!("{path}.period"),
                    IssueKind::Forbidden,
                    "NON_RENEWABLE limits cannot declare a period",
                ),
                (_, Some(period)) => check_period(period, &format!("{path}.period"), out),
                _ => {}
            }
            for (i, feature) in limit.linked_features.iter().enumerate() {
                if !self.features.contains_key(feature) {
                    out.push(
                        format!("{path}.linkedFeatures[{i}]"),
                        IssueKind::Dangling,
                        format!("unknown feature `{feature}`"),
                    );
                }
            }
        }
    }

    fn check_plans(&self, out: &mut Issues) {
        for (name, plan) in &self.plans {
            let path = format!("plans.{name}");
            check_name(name, &path, out);
            for (feature, value) in &plan.feature_overrides {
                self.check_feature_value(feature, value, &format!("{path}.features.{feature}"), out);
            }
            for limit in plan.limit_overrides.keys() {
                self.check_limit_ref(limit, &format!("{path}.usageLimits.{limit}"), out);
            }
        }
    }

    fn check_add_ons(&self, out: &mut Issues) {
        for (name, add_on) in &self.add_ons {
            let path = format!("addOns.{name}");
            check_name(name, &path, out);
            for (i, plan) in add_on.available_for.iter().enumerate() {
                if !self.plans.contains_key(plan) {
                    out.push(
                        format!("{path}.availableFor[{i}]"),
                        IssueKind::Dangling,
                        format!("unknown plan `{plan}`"),
                    );
                }
            }
            for (feature, value) in &add_on.feature_grants {
                self.check_feature_value(feature, value, &format!("{path}.features.{feature}"), out);
            }
            for (limit, amount) in &add_on.limit_extensions {
                let limit_path = format!("{path}.usageLimitExtensions.{limit}");
                self.check_limit_ref(limit, &limit_path, out);
                if amount.is_zero() {
                    out.push(
                        format!("{limit_path}.value"),
                        IssueKind::Invalid,
                        "extensions must be positive",
                    );
                }
            }
            if add_on.feature_grants.is_empty() && add_on.limit_extensions.is_empty() {
                out.push(
                    path,
                    IssueKind::Missing,
                    "an add-on must grant a feature or extend a limit",
                );
            }
        }
    }

    fn check_feature_value(&self, feature: &str, value: &FeatureValue, path: &str, out: &mut Issues) {
        match self.features.get(feature) {
            None => out.push(path, IssueKind::Dangling, format!("unknown feature `{feature}`")),
            Some(f) if f.value_type != value.value_type() => out.push(
                format!("{path}.value"),
                IssueKind::TypeMismatch,
                format!(
                    "{value} is not of type {}{}",
                    f.value_type,
                    quoting_hint(f.value_type, value)
                ),
            ),
            Some(_) => {}
        }
    }

    fn check_limit_ref(&self, limit: &str, path: &str, out: &mut Issues) {
        if !self.usage_limits.contains_key(limit) {
            out.push(path, IssueKind::Dangling, format!("unknown usage limit `{limit}`"));
        }
    }
}

fn quoting_hint(expected: ValueType, got: &FeatureValue) -> &'static str {
    if expected == ValueType::Text && !matches!(got, FeatureValue::Text(_)) {
        " (quote the value to make it text)"
    } else {
        ""
    }
}

fn check_name(name: &str, path: &str, out: &mut Issues) {
    if !is_identifier(name) {
        out.push(path, IssueKind::Invalid, format!("`{name}` is not a valid identifier"));
    }
}

fn check_period(period: Period, path: &str, out: &mut Issues) {
    if period.value == 0 {
        out.push(
            format!("{path}.value"),
            IssueKind::Invalid,
            "period value must be at least 1",
        );
    }
}
