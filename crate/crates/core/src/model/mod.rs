//! In-memory Pricing4SaaS model.
//!
//! A [`Pricing`] owns four ordered catalogs (features, usage limits, plans and
//! add-ons). Entity names are the catalog keys. Plans and add-ons only store
//! deltas over the catalog defaults; [`Pricing::resolve_plan`] expands a plan
//! into its full configuration.

mod amount;
mod check;
mod resolve;

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

pub use amount::{Amount, AmountError};
pub use check::{Issue, IssueKind};
pub use resolve::{FeatureScope, ResolvedPlanConfig, StatsSummary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),
    #[error("pricing declares no plans")]
    NoPlans,
}

/// An insertion-ordered map whose equality is order-sensitive.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Catalog<V>(IndexMap<String, V>);

impl<V> Catalog<V> {
    pub fn new() -> Self {
        Catalog(IndexMap::new())
    }
}

impl<V> Default for Catalog<V> {
    fn default() -> Self {
        Catalog::new()
    }
}

impl<V: PartialEq> PartialEq for Catalog<V> {
    fn eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().eq(other.0.iter())
    }
}

impl<V: Eq> Eq for Catalog<V> {}

impl<V> Deref for Catalog<V> {
    type Target = IndexMap<String, V>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl<V> DerefMut for Catalog<V> {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

impl<V> FromIterator<(String, V)> for Catalog<V> {
    fn from_iter<I: IntoIterator<Item = (String, V)>>(iter: I) -> Self {
        Catalog(iter.into_iter().collect())
    }
}

impl<'a, V> IntoIterator for &'a Catalog<V> {
    type Item = (&'a String, &'a V);
    type IntoIter = indexmap::map::Iter<'a, String, V>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(()),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum! {
    /// What a feature contributes to the system.
    FeatureType {
        Domain => "DOMAIN",
        Integration => "INTEGRATION",
        Automation => "AUTOMATION",
        Management => "MANAGEMENT",
        Information => "INFORMATION",
        Guarantee => "GUARANTEE",
        Support => "SUPPORT",
        Payment => "PAYMENT",
    }
}

keyword_enum! {
    ValueType {
        Boolean => "BOOLEAN",
        Numeric => "NUMERIC",
        Text => "TEXT",
    }
}

keyword_enum! {
    /// How a usage limit's quota is consumed and replenished.
    LimitKind {
        Renewable => "RENEWABLE",
        NonRenewable => "NON_RENEWABLE",
        ResponseDriven => "RESPONSE_DRIVEN",
        TimeDriven => "TIME_DRIVEN",
    }
}

keyword_enum! {
    PeriodUnit {
        Day => "DAY",
        Week => "WEEK",
        Month => "MONTH",
        Year => "YEAR",
    }
}

impl PeriodUnit {
    /// Day-count used only to compare period lengths.
    pub fn canonical_days(self) -> u64 {
        match self {
            PeriodUnit::Day => 1,
            PeriodUnit::Week => 7,
            PeriodUnit::Month => 30,
            PeriodUnit::Year => 365,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Period {
    pub value: u32,
    pub unit: PeriodUnit,
}

impl Period {
    pub const fn new(value: u32, unit: PeriodUnit) -> Self {
        Period { value, unit }
    }

    pub fn canonical_days(self) -> u64 {
        u64::from(self.value) * self.unit.canonical_days()
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// The value a feature takes in a plan or add-on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Bool(bool),
    Numeric(Amount),
    Text(String),
}

impl FeatureValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            FeatureValue::Bool(_) => ValueType::Boolean,
            FeatureValue::Numeric(_) => ValueType::Numeric,
            FeatureValue::Text(_) => ValueType::Text,
        }
    }

    /// `true`, a positive number, or a non-empty string.
    pub fn is_truthy(&self) -> bool {
        match self {
            FeatureValue::Bool(b) => *b,
            FeatureValue::Numeric(n) => !n.is_zero(),
            FeatureValue::Text(s) => !s.is_empty(),
        }
    }

    /// Value assumed when a feature declares no default.
    pub fn schema_default(value_type: ValueType) -> Self {
        match value_type {
            ValueType::Boolean => FeatureValue::Bool(false),
            ValueType::Numeric => FeatureValue::Numeric(Amount::ZERO),
            ValueType::Text => FeatureValue::Text(String::new()),
        }
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Bool(b) => write!(f, "{b}"),
            FeatureValue::Numeric(n) => write!(f, "{n}"),
            FeatureValue::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Feature {
    pub description: String,
    #[serde(rename = "type")]
    pub feature_type: FeatureType,
    pub value_type: ValueType,
    pub default_value: FeatureValue,
}

impl Feature {
    pub fn boolean(feature_type: FeatureType, default: bool) -> Self {
        Feature {
            description: String::new(),
            feature_type,
            value_type: ValueType::Boolean,
            default_value: FeatureValue::Bool(default),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UsageLimit {
    pub description: String,
    #[serde(rename = "type")]
    pub kind: LimitKind,
    /// Objective unit the subscriber's consumption is measured in.
    pub metric: String,
    pub period: Option<Period>,
    pub default_value: Amount,
    /// Empty means the limit applies to the pricing as a whole.
    pub linked_features: IndexSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Plan {
    pub price: Amount,
    pub feature_overrides: IndexMap<String, FeatureValue>,
    pub limit_overrides: IndexMap<String, Amount>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AddOn {
    pub price: Amount,
    /// Empty means available for every plan.
    pub available_for: IndexSet<String>,
    pub feature_grants: IndexMap<String, FeatureValue>,
    /// Added on top of the plan's resolved limit value.
    pub limit_extensions: IndexMap<String, Amount>,
}

impl AddOn {
    pub fn is_available_for(&self, plan: &str) -> bool {
        self.available_for.is_empty() || self.available_for.contains(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Pricing {
    pub saas_name: String,
    pub version: String,
    pub currency: String,
    pub billing_period: Period,
    pub features: Catalog<Feature>,
    pub usage_limits: Catalog<UsageLimit>,
    pub plans: Catalog<Plan>,
    pub add_ons: Catalog<AddOn>,
}

impl Pricing {
    pub fn new(saas_name: impl Into<String>, currency: impl Into<String>, billing_period: Period) -> Self {
        Pricing {
            saas_name: saas_name.into(),
            version: String::new(),
            currency: currency.into(),
            billing_period,
            features: Catalog::new(),
            usage_limits: Catalog::new(),
            plans: Catalog::new(),
            add_ons: Catalog::new(),
        }
    }
}

/// Entity names: ASCII letter or underscore, then letters, digits, `_` or `-`.
pub fn is_identifier(name: &str) -> bool {
    let mut bytes = name.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic() || b == b'_')
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}
