//! Applies a change set to a pricing mechanically, record by record.

use saas_pricing::diff::{CatalogName, Change, ChangeSet, MetadataField, Scope};
use saas_pricing::model::{Catalog, Pricing};

fn set<K: std::hash::Hash + Eq, V>(map: &mut indexmap::IndexMap<K, V>, key: K, value: Option<V>) {
    match value {
        Some(v) => {
            map.insert(key, v);
        }
        None => {
            map.shift_remove(&key);
        }
    }
}

fn reorder<V>(catalog: &mut Catalog<V>, order: &[String]) {
    catalog.sort_by_cached_key(|k, _| order.iter().position(|o| o == k).unwrap_or(usize::MAX));
}

pub fn apply(changes: &ChangeSet, base: &Pricing) -> Pricing {
    use Change::*;
    let mut p = base.clone();

    // Removals first, with every dangling reference dropped by hand.
    for change in changes {
        match change {
            FeatureRemoved { name } => {
                p.features.shift_remove(name);
                for l in p.usage_limits.values_mut() {
                    l.linked_features.shift_remove(name);
                }
                for plan in p.plans.values_mut() {
                    plan.feature_overrides.shift_remove(name);
                }
                for a in p.add_ons.values_mut() {
                    a.feature_grants.shift_remove(name);
                }
            }
            LimitRemoved { name } => {
                p.usage_limits.shift_remove(name);
                for plan in p.plans.values_mut() {
                    plan.limit_overrides.shift_remove(name);
                }
                for a in p.add_ons.values_mut() {
                    a.limit_extensions.shift_remove(name);
                }
            }
            PlanRemoved { name } => {
                p.plans.shift_remove(name);
                for a in p.add_ons.values_mut() {
                    a.available_for.shift_remove(name);
                }
            }
            AddOnRemoved { name } => {
                p.add_ons.shift_remove(name);
            }
            _ => {}
        }
    }

    // Additions in ascending target position.
    let mut added: Vec<&Change> = changes
        .iter()
        .filter(|c| {
            matches!(
                c,
                FeatureAdded { .. } | LimitAdded { .. } | PlanAdded { .. } | AddOnAdded { .. }
            )
        })
        .collect();
    added.sort_by_key(|c| match c {
        FeatureAdded { index, .. } | LimitAdded { index, .. } | PlanAdded { index, .. } | AddOnAdded { index, .. } => {
            *index
        }
        _ => unreachable!(),
    });
    for change in added {
        match change.clone() {
            FeatureAdded {
                name,
                index,
                definition,
            } => {
                p.features.shift_insert(index, name, definition);
            }
            LimitAdded {
                name,
                index,
                definition,
            } => {
                p.usage_limits.shift_insert(index, name, definition);
            }
            PlanAdded {
                name,
                index,
                definition,
            } => {
                p.plans.shift_insert(index, name, definition);
            }
            AddOnAdded {
                name,
                index,
                definition,
            } => {
                p.add_ons.shift_insert(index, name, definition);
            }
            _ => unreachable!(),
        }
    }

    for change in changes {
        match change.clone() {
            MetadataChanged { field, new, .. } => match field {
                MetadataField::SaasName => p.saas_name = new,
                MetadataField::Version => p.version = new,
                MetadataField::Currency => p.currency = new,
            },
            BillingPeriodChanged { new, .. } => p.billing_period = new,
            FeatureTypeChanged { name, new, .. } => p.features[&name].feature_type = new,
            FeatureValueTypeChanged { name, new, .. } => p.features[&name].value_type = new,
            FeatureDescriptionChanged { name, new, .. } => p.features[&name].description = new,
            FeatureDefaultChanged { name, new, .. } => p.features[&name].default_value = new,
            LimitKindChanged { name, new, .. } => p.usage_limits[&name].kind = new,
            LimitMetricChanged { name, new, .. } => p.usage_limits[&name].metric = new,
            LimitPeriodChanged { name, new, .. } => p.usage_limits[&name].period = new,
            LimitDescriptionChanged { name, new, .. } => p.usage_limits[&name].description = new,
            LimitLinkedFeaturesChanged { name, new, .. } => {
                p.usage_limits[&name].linked_features = new.into_iter().collect()
            }
            LimitThresholdChanged {
                scope: Scope::Default,
                limit,
                new,
                ..
            } => p.usage_limits[&limit].default_value = new.expect("catalog default is always declared"),
            LimitThresholdChanged {
                scope: Scope::Plan(plan),
                limit,
                new,
                ..
            } => set(&mut p.plans[&plan].limit_overrides, limit, new),
            PlanPriceChanged { name, new, .. } => p.plans[&name].price = new,
            PlanFeatureValueChanged { plan, feature, new, .. } => {
                set(&mut p.plans[&plan].feature_overrides, feature, new)
            }
            AddOnPriceChanged { name, new, .. } => p.add_ons[&name].price = new,
            AddOnAvailabilityChanged { name, new, .. } => p.add_ons[&name].available_for = new.into_iter().collect(),
            AddOnFeatureGrantChanged {
                add_on, feature, new, ..
            } => set(&mut p.add_ons[&add_on].feature_grants, feature, new),
            AddOnExtensionChanged { add_on, limit, new, .. } => {
                set(&mut p.add_ons[&add_on].limit_extensions, limit, new)
            }
            CatalogOrderChanged { catalog, order } => match catalog {
                CatalogName::Features => reorder(&mut p.features, &order),
                CatalogName::UsageLimits => reorder(&mut p.usage_limits, &order),
                CatalogName::Plans => reorder(&mut p.plans, &order),
                CatalogName::AddOns => reorder(&mut p.add_ons, &order),
            },
            _ => {}
        }
    }
    p
}
