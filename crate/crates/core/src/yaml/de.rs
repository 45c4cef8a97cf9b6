use std::collections::HashMap;
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};

use super::node::{self, is_null, Node, NodeKind, Pos};
use super::{ParseError, ParseErrorKind};
use crate::model::{
    AddOn, Amount, AmountError, Catalog, Feature, FeatureType, FeatureValue, IssueKind, LimitKind, Period, PeriodUnit,
    Plan, Pricing, UsageLimit, ValueType,
};

use ParseErrorKind::*;

/// Parses a Yaml4SaaS document. On failure every detected problem is
/// returned, ordered by position.
pub fn parse(text: &str) -> Result<Pricing, Vec<ParseError>> {
    let root = match node::load(text) {
        Ok(Some(root)) => root,
        Ok(None) => {
            return Err(vec![ParseError {
                line: 1,
                column: 1,
                path: String::new(),
                kind: MissingRequired,
                message: "document is empty".into(),
            }])
        }
        Err(e) => {
            return Err(vec![ParseError {
                line: e.pos.line,
                column: e.pos.column,
                path: String::new(),
                kind: Syntax,
                message: e.message,
            }])
        }
    };
    let mut decoder = Decoder::default();
    let pricing = decoder.pricing(&root);
    decoder.model_issues(&pricing, root.pos);
    if decoder.errors.is_empty() {
        Ok(pricing)
    } else {
        let mut errors = decoder.errors;
        errors.sort_by(|a, b| (a.line, a.column, &a.path).cmp(&(b.line, b.column, &b.path)));
        errors.dedup();
        Err(errors)
    }
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_owned()
    } else {
        format!("{parent}.{key}")
    }
}

/// The entries of a mapping that passed key checks.
struct Fields<'n> {
    pos: Pos,
    path: String,
    entries: Vec<(&'n str, &'n Node)>,
}

impl<'n> Fields<'n> {
    fn get(&self, key: &str) -> Option<&'n Node> {
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

#[derive(Default)]
struct Decoder {
    errors: Vec<ParseError>,
    positions: HashMap<String, Pos>,
}

impl Decoder {
    fn error(&mut self, pos: Pos, path: &str, kind: ParseErrorKind, message: impl Into<String>) {
        self.errors.push(ParseError {
            line: pos.line,
            column: pos.column,
            path: path.to_owned(),
            kind,
            message: message.into(),
        });
    }

    fn type_mismatch(&mut self, node: &Node, path: &str, expected: &str) {
        let found = node.describe();
        self.error(
            node.pos,
            path,
            TypeMismatch,
            format!("expected {expected}, found {found}"),
        );
    }

    /// Key/value pairs of a mapping node with scalar, unique keys.
    fn entries<'n>(&mut self, node: &'n Node, path: &str) -> Option<Vec<(&'n str, Pos, &'n Node)>> {
        let NodeKind::Map(pairs) = &node.kind else {
            self.type_mismatch(node, path, "a mapping");
            return None;
        };
        let mut seen: Vec<(&str, Pos, &Node)> = Vec::with_capacity(pairs.len());
        for (key, value) in pairs {
            let NodeKind::Scalar(k) = &key.kind else {
                self.error(key.pos, path, TypeMismatch, "mapping keys must be scalars");
                continue;
            };
            let child = join(path, &k.text);
            if seen.iter().any(|(s, _, _)| *s == k.text) {
                self.error(key.pos, &child, DuplicateKey, format!("duplicate key `{}`", k.text));
                continue;
            }
            let pos = if matches!(value.kind, NodeKind::Map(_)) {
                key.pos
            } else {
                value.pos
            };
            self.positions.entry(child).or_insert(pos);
            seen.push((&k.text, key.pos, value));
        }
        Some(seen)
    }

    /// A mapping with a fixed key set.
    fn fields<'n>(&mut self, node: &'n Node, path: &str, allowed: &[&str]) -> Option<Fields<'n>> {
        let entries = self.entries(node, path)?;
        let mut kept = Vec::with_capacity(entries.len());
        for (key, key_pos, value) in entries {
            if allowed.contains(&key) {
                kept.push((key, value));
            } else {
                let message = format!("unknown key `{key}`; expected one of: {}", allowed.join(", "));
                self.error(key_pos, &join(path, key), UnknownKey, message);
            }
        }
        Some(Fields {
            pos: node.pos,
            path: path.to_owned(),
            entries: kept,
        })
    }

    fn required<'n>(&mut self, fields: &Fields<'n>, key: &str) -> Option<&'n Node> {
        let found = fields.get(key);
        if found.is_none() {
            let path = join(&fields.path, key);
            self.error(
                fields.pos,
                &path,
                MissingRequired,
                format!("missing required key `{key}`"),
            );
        }
        found
    }

    /// An optional container: absent or null means empty.
    fn optional<'n>(&mut self, fields: &Fields<'n>, key: &str) -> Option<&'n Node> {
        fields
            .get(key)
            .filter(|n| !matches!(&n.kind, NodeKind::Scalar(s) if !s.literal && is_null(&s.text)))
    }

    fn string(&mut self, node: &Node, path: &str) -> Option<String> {
        match &node.kind {
            NodeKind::Scalar(s) if s.literal || !is_null(&s.text) => Some(s.text.clone()),
            _ => {
                self.type_mismatch(node, path, "a string");
                None
            }
        }
    }

    fn optional_string(&mut self, fields: &Fields, key: &str) -> String {
        match self.optional(fields, key) {
            Some(node) => self.string(node, &join(&fields.path, key)).unwrap_or_default(),
            None => String::new(),
        }
    }

    fn amount(&mut self, node: &Node, path: &str) -> Option<Amount> {
        match &node.kind {
            NodeKind::Scalar(s) if !s.literal && looks_numeric(&s.text) => match s.text.parse() {
                Ok(amount) => Some(amount),
                Err(e) => {
                    self.error(node.pos, path, TypeMismatch, amount_message(e));
                    None
                }
            },
            _ => {
                self.type_mismatch(node, path, "a number");
                None
            }
        }
    }

    fn count(&mut self, node: &Node, path: &str) -> Option<u32> {
        match &node.kind {
            NodeKind::Scalar(s) if !s.literal && !s.text.is_empty() && s.text.bytes().all(|b| b.is_ascii_digit()) => {
                match s.text.parse() {
                    Ok(n) => Some(n),
                    Err(_) => {
                        self.error(node.pos, path, TypeMismatch, format!("{} is too large", s.text));
                        None
                    }
                }
            }
            _ => {
                self.type_mismatch(node, path, "a positive integer");
                None
            }
        }
    }

    fn keyword<T: FromStr + Copy>(
        &mut self,
        node: &Node,
        path: &str,
        all: &[T],
        name: fn(T) -> &'static str,
    ) -> Option<T> {
        let NodeKind::Scalar(s) = &node.kind else {
            self.type_mismatch(node, path, "a keyword");
            return None;
        };
        match s.text.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                let choices: Vec<_> = all.iter().map(|v| name(*v)).collect();
                let message = format!("`{}` is not one of: {}", s.text, choices.join(", "));
                self.error(node.pos, path, BadEnum, message);
                None
            }
        }
    }

    /// Scalar resolution without a declared type: quoted text is text, plain
    /// scalars follow the YAML core schema.
    fn feature_value(&mut self, node: &Node, path: &str) -> Option<FeatureValue> {
        let NodeKind::Scalar(s) = &node.kind else {
            self.type_mismatch(node, path, "a boolean, number or string");
            return None;
        };
        if s.literal {
            return Some(FeatureValue::Text(s.text.clone()));
        }
        match s.text.as_str() {
            t if is_null(t) => {
                self.type_mismatch(node, path, "a boolean, number or string");
                None
            }
            "true" | "True" | "TRUE" => Some(FeatureValue::Bool(true)),
            "false" | "False" | "FALSE" => Some(FeatureValue::Bool(false)),
            t if looks_numeric(t) => self.amount(node, path).map(FeatureValue::Numeric),
            t => Some(FeatureValue::Text(t.to_owned())),
        }
    }

    fn name_list(&mut self, node: &Node, path: &str) -> IndexSet<String> {
        let NodeKind::Seq(items) = &node.kind else {
            self.type_mismatch(node, path, "a list of names");
            return IndexSet::new();
        };
        let mut names = IndexSet::new();
        for (i, item) in items.iter().enumerate() {
            let item_path = format!("{path}[{i}]");
            self.positions.insert(item_path.clone(), item.pos);
            let Some(name) = self.string(item, &item_path) else {
                continue;
            };
            if names.contains(&name) {
                self.error(item.pos, &item_path, DuplicateKey, format!("`{name}` is listed twice"));
            } else {
                names.insert(name);
            }
        }
        names
    }

    fn period(&mut self, node: &Node, path: &str) -> Option<Period> {
        let fields = self.fields(node, path, &["value", "unit"])?;
        let value = self
            .required(&fields, "value")
            .and_then(|n| self.count(n, &join(path, "value")));
        let unit = self
            .required(&fields, "unit")
            .and_then(|n| self.keyword(n, &join(path, "unit"), PeriodUnit::ALL, PeriodUnit::as_str));
        Some(Period::new(value?, unit?))
    }

    /// `{name: {value: ...}}` override maps.
    fn value_map<T>(
        &mut self,
        node: &Node,
        path: &str,
        mut decode: impl FnMut(&mut Self, &Node, &str) -> Option<T>,
    ) -> IndexMap<String, T> {
        let mut out = IndexMap::new();
        for (name, _, entry) in self.entries(node, path).unwrap_or_default() {
            let entry_path = join(path, name);
            let Some(fields) = self.fields(entry, &entry_path, &["value"]) else {
                continue;
            };
            let Some(value_node) = self.required(&fields, "value") else {
                continue;
            };
            if let Some(value) = decode(self, value_node, &join(&entry_path, "value")) {
                out.insert(name.to_owned(), value);
            }
        }
        out
    }

    fn pricing(&mut self, root: &Node) -> Pricing {
        const KEYS: &[&str] = &[
            "saasName",
            "version",
            "currency",
            "billingPeriod",
            "features",
            "usageLimits",
            "plans",
            "addOns",
        ];
        let mut pricing = Pricing::new("", "", Period::new(1, PeriodUnit::Month));
        let Some(fields) = self.fields(root, "", KEYS) else {
            return pricing;
        };

        if let Some(n) = self.required(&fields, "saasName") {
            pricing.saas_name = self.string(n, "saasName").unwrap_or_default();
        }
        if let Some(n) = self.required(&fields, "version") {
            pricing.version = self.string(n, "version").unwrap_or_default();
        }
        match self.required(&fields, "currency") {
            Some(n) => pricing.currency = self.string(n, "currency").unwrap_or_default(),
            None => pricing.currency = "XXX".into(),
        }
        if let Some(period) = self
            .required(&fields, "billingPeriod")
            .and_then(|n| self.period(n, "billingPeriod"))
        {
            pricing.billing_period = period;
        }
        if let Some(n) = self.required(&fields, "features") {
            pricing.features = self.catalog(n, "features", Self::feature);
        }
        if let Some(n) = self.optional(&fields, "usageLimits") {
            pricing.usage_limits = self.catalog(n, "usageLimits", Self::usage_limit);
        }
        if let Some(n) = self.optional(&fields, "plans") {
            pricing.plans = self.catalog(n, "plans", Self::plan);
        }
        if let Some(n) = self.optional(&fields, "addOns") {
            pricing.add_ons = self.catalog(n, "addOns", Self::add_on);
        }
        pricing
    }

    fn catalog<T>(&mut self, node: &Node, path: &str, decode: fn(&mut Self, &Node, &str) -> T) -> Catalog<T> {
        let mut catalog = Catalog::new();
        for (name, _, entry) in self.entries(node, path).unwrap_or_default() {
            let value = decode(self, entry, &join(path, name));
            catalog.insert(name.to_owned(), value);
        }
        catalog
    }

    // Entity decoders always return a value so that references to a broken
    // entity still resolve; the errors are already recorded.

    fn feature(&mut self, node: &Node, path: &str) -> Feature {
        let mut feature = Feature::boolean(FeatureType::Domain, false);
        let keys = ["description", "type", "valueType", "defaultValue"];
        let Some(fields) = self.fields(node, path, &keys) else {
            return feature;
        };
        feature.description = self.optional_string(&fields, "description");
        if let Some(t) = self
            .required(&fields, "type")
            .and_then(|n| self.keyword(n, &join(path, "type"), FeatureType::ALL, FeatureType::as_str))
        {
            feature.feature_type = t;
        }
        if let Some(n) = fields.get("valueType") {
            if let Some(t) = self.keyword(n, &join(path, "valueType"), ValueType::ALL, ValueType::as_str) {
                feature.value_type = t;
            }
        }
        feature.default_value = fields
            .get("defaultValue")
            .and_then(|n| self.feature_value(n, &join(path, "defaultValue")))
            .unwrap_or_else(|| FeatureValue::schema_default(feature.value_type));
        feature
    }

    fn usage_limit(&mut self, node: &Node, path: &str) -> UsageLimit {
        let mut limit = UsageLimit {
            description: String::new(),
            kind: LimitKind::NonRenewable,
            metric: String::new(),
            period: None,
            default_value: Amount::ZERO,
            linked_features: IndexSet::new(),
        };
        let keys = [
            "description",
            "type",
            "metric",
            "period",
            "defaultValue",
            "linkedFeatures",
        ];
        let Some(fields) = self.fields(node, path, &keys) else {
            return limit;
        };
        limit.description = self.optional_string(&fields, "description");
        if let Some(kind) = self
            .required(&fields, "type")
            .and_then(|n| self.keyword(n, &join(path, "type"), LimitKind::ALL, LimitKind::as_str))
        {
            limit.kind = kind;
        }
        if let Some(n) = self.required(&fields, "metric") {
            limit.metric = self.string(n, &join(path, "metric")).unwrap_or_default();
        }
        if let Some(n) = self.optional(&fields, "period") {
            limit.period = self.period(n, &join(path, "period"));
        }
        if let Some(v) = self
            .required(&fields, "defaultValue")
            .and_then(|n| self.amount(n, &join(path, "defaultValue")))
        {
            limit.default_value = v;
        }
        if let Some(n) = self.optional(&fields, "linkedFeatures") {
            limit.linked_features = self.name_list(n, &join(path, "linkedFeatures"));
        }
        limit
    }

    fn plan(&mut self, node: &Node, path: &str) -> Plan {
        let mut plan = Plan::default();
        let Some(fields) = self.fields(node, path, &["price", "features", "usageLimits"]) else {
            return plan;
        };
        if let Some(price) = self
            .required(&fields, "price")
            .and_then(|n| self.amount(n, &join(path, "price")))
        {
            plan.price = price;
        }
        if let Some(n) = self.optional(&fields, "features") {
            plan.feature_overrides = self.value_map(n, &join(path, "features"), Self::feature_value);
        }
        if let Some(n) = self.optional(&fields, "usageLimits") {
            plan.limit_overrides = self.value_map(n, &join(path, "usageLimits"), Self::amount);
        }
        plan
    }

    fn add_on(&mut self, node: &Node, path: &str) -> AddOn {
        let mut add_on = AddOn::default();
        let keys = ["price", "availableFor", "features", "usageLimitExtensions"];
        let Some(fields) = self.fields(node, path, &keys) else {
            return add_on;
        };
        if let Some(price) = self
            .required(&fields, "price")
            .and_then(|n| self.amount(n, &join(path, "price")))
        {
            add_on.price = price;
        }
        if let Some(n) = self.optional(&fields, "availableFor") {
            add_on.available_for = self.name_list(n, &join(path, "availableFor"));
        }
        if let Some(n) = self.optional(&fields, "features") {
            add_on.feature_grants = self.value_map(n, &join(path, "features"), Self::feature_value);
        }
        if let Some(n) = self.optional(&fields, "usageLimitExtensions") {
            add_on.limit_extensions = self.value_map(n, &join(path, "usageLimitExtensions"), Self::amount);
        }
        add_on
    }

    /// Maps model invariant violations onto located parse errors, skipping
    /// any that overlap a problem already reported.
    fn model_issues(&mut self, pricing: &Pricing, root: Pos) {
        for issue in pricing.check() {
            let overlaps = self.errors.iter().any(|e| overlapping(&e.path, &issue.path));
            if overlaps {
                continue;
            }
            let kind = match issue.kind {
                IssueKind::Dangling => DanglingReference,
                IssueKind::TypeMismatch | IssueKind::Invalid => TypeMismatch,
                IssueKind::Missing => MissingRequired,
                IssueKind::Forbidden => UnknownKey,
                IssueKind::Duplicate => DuplicateKey,
            };
            let pos = self.locate(&issue.path).unwrap_or(root);
            self.error(pos, &issue.path, kind, issue.message);
        }
    }

    fn locate(&self, path: &str) -> Option<Pos> {
        let mut current = path;
        loop {
            if let Some(pos) = self.positions.get(current) {
                return Some(*pos);
            }
            current = &current[..current.rfind(['.', '['])?];
        }
    }
}

fn overlapping(a: &str, b: &str) -> bool {
    let nested = |outer: &str, inner: &str| {
        inner.len() > outer.len() && inner.starts_with(outer) && matches!(inner.as_bytes()[outer.len()], b'.' | b'[')
    };
    a.is_empty() || b.is_empty() || a == b || nested(a, b) || nested(b, a)
}

/// Whether a plain scalar is a number under the YAML 1.2 core schema.
fn looks_numeric(text: &str) -> bool {
    let unsigned = text.strip_prefix(['+', '-']).unwrap_or(text);
    let special = matches!(unsigned, ".inf" | ".Inf" | ".INF") || matches!(text, ".nan" | ".NaN" | ".NAN");
    let radix = |prefix: &str, valid: fn(&u8) -> bool| {
        text.strip_prefix(prefix)
            .is_some_and(|d| !d.is_empty() && d.as_bytes().iter().all(valid))
    };
    special
        || radix("0x", u8::is_ascii_hexdigit)
        || radix("0o", |b| (b'0'..=b'7').contains(b))
        || (unsigned.starts_with(|c: char| c.is_ascii_digit() || c == '.')
            && Amount::from_str(unsigned).is_ok_or_range())
}

trait ParsedNumber {
    fn is_ok_or_range(&self) -> bool;
}

impl ParsedNumber for Result<Amount, AmountError> {
    /// Well-formed decimal literal, even if it overflows.
    fn is_ok_or_range(&self) -> bool {
        !matches!(self, Err(AmountError::Malformed(_)))
    }
}

fn amount_message(error: AmountError) -> String {
    match error {
        AmountError::Malformed(text) => format!("`{text}` is not a decimal literal"),
        other => other.to_string(),
    }
}
