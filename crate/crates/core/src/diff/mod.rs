//! Field-level comparison of two pricing versions.
//!
//! Entities are matched by name, so a rename shows up as a removal plus an
//! addition. Removing an entity implicitly drops every reference to it; the
//! remaining changes are computed against the old pricing with those
//! references already stripped. Added entities carry their full definition
//! and their position in the new catalog, so a change set is enough to turn
//! the old pricing into the new one.

mod impact;

use indexmap::{IndexMap, IndexSet};
use serde::Serialize;

use crate::model::{
    AddOn, Amount, Catalog, Feature, FeatureType, FeatureValue, LimitKind, Period, Plan, Pricing, UsageLimit, ValueType,
};

pub use impact::{impact, ImpactError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MetadataField {
    SaasName,
    Version,
    Currency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CatalogName {
    Features,
    UsageLimits,
    Plans,
    AddOns,
}

/// Where a limit threshold is declared: the catalog default or a plan override.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Scope {
    Default,
    Plan(String),
}

/// One change. Variant order is the order changes are reported in.
///
/// For plan overrides and add-on grants or extensions, `None` means "not
/// declared": the plan inherits the catalog default, or the add-on does not
/// touch the feature or limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "change", rename_all_fields = "camelCase")]
pub enum Change {
    MetadataChanged {
        field: MetadataField,
        old: String,
        new: String,
    },
    BillingPeriodChanged {
        old: Period,
        new: Period,
    },
    FeatureAdded {
        name: String,
        index: usize,
        definition: Feature,
    },
    FeatureRemoved {
        name: String,
    },
    FeatureTypeChanged {
        name: String,
        old: FeatureType,
        new: FeatureType,
    },
    FeatureValueTypeChanged {
        name: String,
        old: ValueType,
        new: ValueType,
    },
    FeatureDescriptionChanged {
        name: String,
        old: String,
        new: String,
    },
    FeatureDefaultChanged {
        name: String,
        old: FeatureValue,
        new: FeatureValue,
    },
    LimitAdded {
        name: String,
        index: usize,
        definition: UsageLimit,
    },
    LimitRemoved {
        name: String,
    },
    LimitKindChanged {
        name: String,
        old: LimitKind,
        new: LimitKind,
    },
    LimitMetricChanged {
        name: String,
        old: String,
        new: String,
    },
    LimitPeriodChanged {
        name: String,
        old: Option<Period>,
        new: Option<Period>,
    },
    LimitDescriptionChanged {
        name: String,
        old: String,
        new: String,
    },
    LimitLinkedFeaturesChanged {
        name: String,
        old: Vec<String>,
        new: Vec<String>,
    },
    LimitThresholdChanged {
        scope: Scope,
        limit: String,
        old: Option<Amount>,
        new: Option<Amount>,
    },
    PlanAdded {
        name: String,
        index: usize,
        definition: Plan,
    },
    PlanRemoved {
        name: String,
    },
    PlanPriceChanged {
        name: String,
        old: Amount,
        new: Amount,
    },
    PlanFeatureValueChanged {
        plan: String,
        feature: String,
        old: Option<FeatureValue>,
        new: Option<FeatureValue>,
    },
    AddOnAdded {
        name: String,
        index: usize,
        definition: AddOn,
    },
    AddOnRemoved {
        name: String,
    },
    AddOnPriceChanged {
        name: String,
        old: Amount,
        new: Amount,
    },
    AddOnAvailabilityChanged {
        name: String,
        old: Vec<String>,
        new: Vec<String>,
    },
    AddOnFeatureGrantChanged {
        add_on: String,
        feature: String,
        old: Option<FeatureValue>,
        new: Option<FeatureValue>,
    },
    AddOnExtensionChanged {
        add_on: String,
        limit: String,
        old: Option<Amount>,
        new: Option<Amount>,
    },
    CatalogOrderChanged {
        catalog: CatalogName,
        order: Vec<String>,
    },
}

impl Change {
    fn rank(&self) -> u8 {
        use Change::*;
        match self {
            MetadataChanged { .. } => 0,
            BillingPeriodChanged { .. } => 1,
            FeatureAdded { .. } => 2,
            FeatureRemoved { .. } => 3,
            FeatureTypeChanged { .. } => 4,
            FeatureValueTypeChanged { .. } => 5,
            FeatureDescriptionChanged { .. } => 6,
            FeatureDefaultChanged { .. } => 7,
            LimitAdded { .. } => 8,
            LimitRemoved { .. } => 9,
            LimitKindChanged { .. } => 10,
            LimitMetricChanged { .. } => 11,
            LimitPeriodChanged { .. } => 12,
            LimitDescriptionChanged { .. } => 13,
            LimitLinkedFeaturesChanged { .. } => 14,
            LimitThresholdChanged { .. } => 15,
            PlanAdded { .. } => 16,
            PlanRemoved { .. } => 17,
            PlanPriceChanged { .. } => 18,
            PlanFeatureValueChanged { .. } => 19,
            AddOnAdded { .. } => 20,
            AddOnRemoved { .. } => 21,
            AddOnPriceChanged { .. } => 22,
            AddOnAvailabilityChanged { .. } => 23,
            AddOnFeatureGrantChanged { .. } => 24,
            AddOnExtensionChanged { .. } => 25,
            CatalogOrderChanged { .. } => 26,
        }
    }

    /// Names identifying what the change is about, outermost first. A
    /// default-scope threshold sorts before every plan scope.
    pub fn subjects(&self) -> Vec<&str> {
        use Change::*;
        match self {
            MetadataChanged { field, .. } => vec![match field {
                MetadataField::SaasName => "saasName",
                MetadataField::Version => "version",
                MetadataField::Currency => "currency",
            }],
            BillingPeriodChanged { .. } => vec![],
            CatalogOrderChanged { catalog, .. } => vec![match catalog {
                CatalogName::Features => "features",
                CatalogName::UsageLimits => "usageLimits",
                CatalogName::Plans => "plans",
                CatalogName::AddOns => "addOns",
            }],
            FeatureAdded { name, .. }
            | FeatureRemoved { name }
            | FeatureTypeChanged { name, .. }
            | FeatureValueTypeChanged { name, .. }
            | FeatureDescriptionChanged { name, .. }
            | FeatureDefaultChanged { name, .. }
            | LimitAdded { name, .. }
            | LimitRemoved { name }
            | LimitKindChanged { name, .. }
            | LimitMetricChanged { name, .. }
            | LimitPeriodChanged { name, .. }
            | LimitDescriptionChanged { name, .. }
            | LimitLinkedFeaturesChanged { name, .. }
            | PlanAdded { name, .. }
            | PlanRemoved { name }
            | PlanPriceChanged { name, .. }
            | AddOnAdded { name, .. }
            | AddOnRemoved { name }
            | AddOnPriceChanged { name, .. }
            | AddOnAvailabilityChanged { name, .. } => vec![name],
            LimitThresholdChanged { scope, limit, .. } => match scope {
                Scope::Default => vec!["", limit],
                Scope::Plan(plan) => vec![plan, limit],
            },
            PlanFeatureValueChanged { plan, feature, .. } => vec![plan, feature],
            AddOnFeatureGrantChanged { add_on, feature, .. } => vec![add_on, feature],
            AddOnExtensionChanged { add_on, limit, .. } => vec![add_on, limit],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct ChangeSet {
    pub changes: Vec<Change>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Change> {
        self.changes.iter()
    }

    /// One JSON object per line, each tagged by its `change` field.
    pub fn to_json_lines(&self) -> String {
        self.changes
            .iter()
            .map(|c| serde_json::to_string(c).expect("changes are always serializable") + "\n")
            .collect()
    }

    fn sort(&mut self) {
        self.changes
            .sort_by(|a, b| (a.rank(), a.subjects()).cmp(&(b.rank(), b.subjects())));
    }
}

impl<'a> IntoIterator for &'a ChangeSet {
    type Item = &'a Change;
    type IntoIter = std::slice::Iter<'a, Change>;

    fn into_iter(self) -> Self::IntoIter {
        self.changes.iter()
    }
}

pub fn diff(old: &Pricing, new: &Pricing) -> ChangeSet {
    let mut out = Vec::new();
    let old = without_removed_references(old, new);

    for (field, a, b) in [
        (MetadataField::SaasName, &old.saas_name, &new.saas_name),
        (MetadataField::Version, &old.version, &new.version),
        (MetadataField::Currency, &old.currency, &new.currency),
    ] {
        if a != b {
            out.push(Change::MetadataChanged {
                field,
                old: a.clone(),
                new: b.clone(),
            });
        }
    }
    if old.billing_period != new.billing_period {
        out.push(Change::BillingPeriodChanged {
            old: old.billing_period,
            new: new.billing_period,
        });
    }

    catalog(
        &old.features,
        &new.features,
        CatalogName::Features,
        &mut out,
        |name, a, b, out| {
            let name = name.to_owned();
            if a.feature_type != b.feature_type {
                out.push(Change::FeatureTypeChanged {
                    name: name.clone(),
                    old: a.feature_type,
                    new: b.feature_type,
                });
            }
            if a.value_type != b.value_type {
                out.push(Change::FeatureValueTypeChanged {
                    name: name.clone(),
                    old: a.value_type,
                    new: b.value_type,
                });
            }
            if a.description != b.description {
                let (old, new) = (a.description.clone(), b.description.clone());
                out.push(Change::FeatureDescriptionChanged {
                    name: name.clone(),
                    old,
                    new,
                });
            }
            if a.default_value != b.default_value {
                let (old, new) = (a.default_value.clone(), b.default_value.clone());
                out.push(Change::FeatureDefaultChanged { name, old, new });
            }
        },
    );

    catalog(
        &old.usage_limits,
        &new.usage_limits,
        CatalogName::UsageLimits,
        &mut out,
        |name, a, b, out| {
            let name = name.to_owned();
            if a.kind != b.kind {
                out.push(Change::LimitKindChanged {
                    name: name.clone(),
                    old: a.kind,
                    new: b.kind,
                });
            }
            if a.metric != b.metric {
                out.push(Change::LimitMetricChanged {
                    name: name.clone(),
                    old: a.metric.clone(),
                    new: b.metric.clone(),
                });
            }
            if a.period != b.period {
                out.push(Change::LimitPeriodChanged {
                    name: name.clone(),
                    old: a.period,
                    new: b.period,
                });
            }
            if a.description != b.description {
                let (old, new) = (a.description.clone(), b.description.clone());
                out.push(Change::LimitDescriptionChanged {
                    name: name.clone(),
                    old,
                    new,
                });
            }
            if a.linked_features != b.linked_features {
                out.push(Change::LimitLinkedFeaturesChanged {
                    name: name.clone(),
                    old: ordered(&a.linked_features, &old.features),
                    new: ordered(&b.linked_features, &new.features),
                });
            }
            if a.default_value != b.default_value {
                out.push(Change::LimitThresholdChanged {
                    scope: Scope::Default,
                    limit: name,
                    old: Some(a.default_value),
                    new: Some(b.default_value),
                });
            }
        },
    );

    catalog(
        &old.plans,
        &new.plans,
        CatalogName::Plans,
        &mut out,
        |name, a, b, out| {
            if a.price != b.price {
                out.push(Change::PlanPriceChanged {
                    name: name.to_owned(),
                    old: a.price,
                    new: b.price,
                });
            }
            for (feature, old, new) in entry_changes(&a.feature_overrides, &b.feature_overrides) {
                out.push(Change::PlanFeatureValueChanged {
                    plan: name.to_owned(),
                    feature,
                    old,
                    new,
                });
            }
            for (limit, old, new) in entry_changes(&a.limit_overrides, &b.limit_overrides) {
                out.push(Change::LimitThresholdChanged {
                    scope: Scope::Plan(name.to_owned()),
                    limit,
                    old,
                    new,
                });
            }
        },
    );

    catalog(
        &old.add_ons,
        &new.add_ons,
        CatalogName::AddOns,
        &mut out,
        |name, a, b, out| {
            if a.price != b.price {
                out.push(Change::AddOnPriceChanged {
                    name: name.to_owned(),
                    old: a.price,
                    new: b.price,
                });
            }
            if a.available_for != b.available_for {
                out.push(Change::AddOnAvailabilityChanged {
                    name: name.to_owned(),
                    old: ordered(&a.available_for, &old.plans),
                    new: ordered(&b.available_for, &new.plans),
                });
            }
            for (feature, old, new) in entry_changes(&a.feature_grants, &b.feature_grants) {
                out.push(Change::AddOnFeatureGrantChanged {
                    add_on: name.to_owned(),
                    feature,
                    old,
                    new,
                });
            }
            for (limit, old, new) in entry_changes(&a.limit_extensions, &b.limit_extensions) {
                out.push(Change::AddOnExtensionChanged {
                    add_on: name.to_owned(),
                    limit,
                    old,
                    new,
                });
            }
        },
    );

    let mut changes = ChangeSet { changes: out };
    changes.sort();
    changes
}

trait Added: Sized {
    fn added(name: String, index: usize, definition: Self) -> Change;
    fn removed(name: String) -> Change;
}

macro_rules! added_removed {
    ($ty:ty, $added:ident, $removed:ident) => {
        impl Added for $ty {
            fn added(name: String, index: usize, definition: Self) -> Change {
                Change::$added {
                    name,
                    index,
                    definition,
                }
            }
            fn removed(name: String) -> Change {
                Change::$removed { name }
            }
        }
    };
}

added_removed!(Feature, FeatureAdded, FeatureRemoved);
added_removed!(UsageLimit, LimitAdded, LimitRemoved);
added_removed!(Plan, PlanAdded, PlanRemoved);
added_removed!(AddOn, AddOnAdded, AddOnRemoved);

fn catalog<T: Added + Clone + PartialEq>(
    old: &Catalog<T>,
    new: &Catalog<T>,
    which: CatalogName,
    out: &mut Vec<Change>,
    mut compare: impl FnMut(&str, &T, &T, &mut Vec<Change>),
) {
    for name in old.keys().filter(|n| !new.contains_key(n.as_str())) {
        out.push(T::removed(name.clone()));
    }
    for (index, (name, entity)) in new.iter().enumerate() {
        match old.get(name) {
            None => out.push(T::added(name.clone(), index, entity.clone())),
            Some(before) => compare(name, before, entity, out),
        }
    }
    let kept_old = old.keys().filter(|n| new.contains_key(n.as_str()));
    let kept_new = new.keys().filter(|n| old.contains_key(n.as_str()));
    if !kept_old.eq(kept_new) {
        out.push(Change::CatalogOrderChanged {
            catalog: which,
            order: new.keys().cloned().collect(),
        });
    }
}

/// Keys whose value differs, was added, or was removed, in key order.
fn entry_changes<T: Clone + PartialEq>(
    old: &IndexMap<String, T>,
    new: &IndexMap<String, T>,
) -> Vec<(String, Option<T>, Option<T>)> {
    let mut keys: Vec<&String> = old
        .keys()
        .chain(new.keys().filter(|k| !old.contains_key(k.as_str())))
        .collect();
    keys.sort();
    keys.into_iter()
        .filter_map(|k| {
            let (a, b) = (old.get(k), new.get(k));
            (a != b).then(|| (k.clone(), a.cloned(), b.cloned()))
        })
        .collect()
}

fn ordered<V>(names: &IndexSet<String>, order: &Catalog<V>) -> Vec<String> {
    let mut names: Vec<String> = names.iter().cloned().collect();
    names.sort_by_key(|n| order.get_index_of(n.as_str()).unwrap_or(usize::MAX));
    names
}

/// `old` with every reference to a feature, limit or plan that `new` no
/// longer declares removed.
pub fn without_removed_references(old: &Pricing, new: &Pricing) -> Pricing {
    let gone_features: IndexSet<&str> = old
        .features
        .keys()
        .map(String::as_str)
        .filter(|f| !new.features.contains_key(*f))
        .collect();
    let gone_limits: IndexSet<&str> = old
        .usage_limits
        .keys()
        .map(String::as_str)
        .filter(|l| !new.usage_limits.contains_key(*l))
        .collect();
    let gone_plans: IndexSet<&str> = old
        .plans
        .keys()
        .map(String::as_str)
        .filter(|p| !new.plans.contains_key(*p))
        .collect();
    let mut stripped = old.clone();
    strip_references(&mut stripped, &gone_features, &gone_limits, &gone_plans);
    stripped
}

/// Drops references to the named entities from every plan, add-on and limit.
pub fn strip_references(
    pricing: &mut Pricing,
    features: &IndexSet<&str>,
    limits: &IndexSet<&str>,
    plans: &IndexSet<&str>,
) {
    for limit in pricing.usage_limits.values_mut() {
        limit.linked_features.retain(|f| !features.contains(f.as_str()));
    }
    for plan in pricing.plans.values_mut() {
        plan.feature_overrides.retain(|f, _| !features.contains(f.as_str()));
        plan.limit_overrides.retain(|l, _| !limits.contains(l.as_str()));
    }
    for add_on in pricing.add_ons.values_mut() {
        add_on.available_for.retain(|p| !plans.contains(p.as_str()));
        add_on.feature_grants.retain(|f, _| !features.contains(f.as_str()));
        add_on.limit_extensions.retain(|l, _| !limits.contains(l.as_str()));
    }
}
