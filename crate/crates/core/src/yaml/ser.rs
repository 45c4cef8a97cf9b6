use std::fmt::Write;

use indexmap::{IndexMap, IndexSet};

use crate::model::{is_identifier, Catalog, FeatureValue, Period, Pricing, ValueType};

/// Writes the canonical Yaml4SaaS form: fixed key order, catalogs in
/// declaration order, override maps and name lists in catalog order,
/// schema defaults omitted, two-space indentation and LF line endings.
pub fn serialize(pricing: &Pricing) -> String {
    let mut out = Writer(String::new());
    out.line(0, &format!("saasName: {}", quote(&pricing.saas_name)));
    out.line(0, &format!("version: {}", quote(&pricing.version)));
    out.line(0, &format!("currency: {}", quote(&pricing.currency)));
    out.period(0, "billingPeriod", pricing.billing_period);

    if pricing.features.is_empty() {
        out.line(0, "features: {}");
    } else {
        out.line(0, "features:");
    }
    for (name, feature) in &pricing.features {
        out.line(1, &format!("{}:", key(name)));
        if !feature.description.is_empty() {
            out.line(2, &format!("description: {}", quote(&feature.description)));
        }
        out.line(2, &format!("type: {}", feature.feature_type));
        if feature.value_type != ValueType::Boolean {
            out.line(2, &format!("valueType: {}", feature.value_type));
        }
        if feature.default_value != FeatureValue::schema_default(feature.value_type) {
            out.line(2, &format!("defaultValue: {}", value(&feature.default_value)));
        }
    }

    if !pricing.usage_limits.is_empty() {
        out.line(0, "usageLimits:");
    }
    for (name, limit) in &pricing.usage_limits {
        out.line(1, &format!("{}:", key(name)));
        if !limit.description.is_empty() {
            out.line(2, &format!("description: {}", quote(&limit.description)));
        }
        out.line(2, &format!("type: {}", limit.kind));
        out.line(2, &format!("metric: {}", quote(&limit.metric)));
        if let Some(period) = limit.period {
            out.period(2, "period", period);
        }
        out.line(2, &format!("defaultValue: {}", limit.default_value));
        out.names(2, "linkedFeatures", &limit.linked_features, &pricing.features);
    }

    if !pricing.plans.is_empty() {
        out.line(0, "plans:");
    }
    for (name, plan) in &pricing.plans {
        out.line(1, &format!("{}:", key(name)));
        out.line(2, &format!("price: {}", plan.price));
        out.values(2, "features", &plan.feature_overrides, &pricing.features, value);
        out.values(
            2,
            "usageLimits",
            &plan.limit_overrides,
            &pricing.usage_limits,
            ToString::to_string,
        );
    }

    if !pricing.add_ons.is_empty() {
        out.line(0, "addOns:");
    }
    for (name, add_on) in &pricing.add_ons {
        out.line(1, &format!("{}:", key(name)));
        out.line(2, &format!("price: {}", add_on.price));
        out.names(2, "availableFor", &add_on.available_for, &pricing.plans);
        out.values(2, "features", &add_on.feature_grants, &pricing.features, value);
        out.values(
            2,
            "usageLimitExtensions",
            &add_on.limit_extensions,
            &pricing.usage_limits,
            ToString::to_string,
        );
    }
    out.0
}

struct Writer(String);

impl Writer {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.0.push_str("  ");
        }
        self.0.push_str(text);
        self.0.push('\n');
    }

    fn period(&mut self, depth: usize, name: &str, period: Period) {
        self.line(depth, &format!("{name}:"));
        self.line(depth + 1, &format!("value: {}", period.value));
        self.line(depth + 1, &format!("unit: {}", period.unit));
    }

    fn names<V>(&mut self, depth: usize, name: &str, names: &IndexSet<String>, order: &Catalog<V>) {
        if names.is_empty() {
            return;
        }
        self.line(depth, &format!("{name}:"));
        for item in catalog_order(names.iter(), order) {
            self.line(depth + 1, &format!("- {}", key(item)));
        }
    }

    fn values<T, V>(
        &mut self,
        depth: usize,
        name: &str,
        values: &IndexMap<String, T>,
        order: &Catalog<V>,
        render: impl Fn(&T) -> String,
    ) {
        if values.is_empty() {
            return;
        }
        self.line(depth, &format!("{name}:"));
        for item in catalog_order(values.keys(), order) {
            self.line(depth + 1, &format!("{}:", key(item)));
            self.line(depth + 2, &format!("value: {}", render(&values[item.as_str()])));
        }
    }
}

/// Names sorted by their position in `order`; unknown names keep their
/// relative order at the end.
fn catalog_order<'a, V>(names: impl Iterator<Item = &'a String>, order: &Catalog<V>) -> Vec<&'a String> {
    let mut names: Vec<_> = names.collect();
    names.sort_by_key(|n| order.get_index_of(n.as_str()).unwrap_or(usize::MAX));
    names
}

fn key(name: &str) -> String {
    if is_identifier(name) {
        name.to_owned()
    } else {
        quote(name)
    }
}

fn value(v: &FeatureValue) -> String {
    match v {
        FeatureValue::Bool(b) => b.to_string(),
        FeatureValue::Numeric(n) => n.to_string(),
        FeatureValue::Text(s) => quote(s),
    }
}

/// A YAML double-quoted scalar. Everything outside printable text is escaped.
fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() || matches!(c, '\u{2028}' | '\u{2029}' | '\u{feff}') => {
                let _ = write!(out, "\\u{:04x}", u32::from(c));
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
