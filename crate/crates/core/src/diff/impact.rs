use indexmap::IndexSet;

use super::{Change, ChangeSet, Scope};
use crate::evaluator::Subscription;
use crate::model::Pricing;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImpactError {
    #[error("subscription plan `{0}` is not part of the old pricing")]
    UnknownPlanInSubscription(String),
}

/// The changes that reach a subscriber of `old`.
///
/// A change is kept when it concerns the subscriber's plan, one of their
/// add-ons, a feature they can use (truthy in their plan or granted by one of
/// their add-ons), or a limit that applies to them (linked to such a feature,
/// global, or extended by one of their add-ons). A default-value change is
/// also kept for any feature the subscriber's plan inherits. Additions never
/// reach an existing subscriber.
pub fn impact(changes: &ChangeSet, old: &Pricing, subscription: &Subscription) -> Result<ChangeSet, ImpactError> {
    let plan_name = subscription.plan.as_str();
    let resolved = old
        .resolve_plan(plan_name)
        .map_err(|_| ImpactError::UnknownPlanInSubscription(plan_name.to_owned()))?;
    let plan = &old.plans[plan_name];
    let add_ons: Vec<_> = old
        .add_ons
        .iter()
        .filter(|(name, _)| subscription.add_ons.contains(name.as_str()))
        .collect();

    let mut features: IndexSet<&str> = resolved
        .feature_values
        .iter()
        .filter(|(_, v)| v.is_truthy())
        .map(|(name, _)| name.as_str())
        .collect();
    for (_, add_on) in &add_ons {
        features.extend(add_on.feature_grants.keys().map(String::as_str));
    }
    let limits: IndexSet<&str> = old
        .usage_limits
        .iter()
        .filter(|(name, limit)| {
            limit.linked_features.is_empty()
                || limit.linked_features.iter().any(|f| features.contains(f.as_str()))
                || add_ons
                    .iter()
                    .any(|(_, a)| a.limit_extensions.contains_key(name.as_str()))
        })
        .map(|(name, _)| name.as_str())
        .collect();
    let subscribed = |name: &str| add_ons.iter().any(|(n, _)| n.as_str() == name);

    let kept = changes
        .iter()
        .filter(|change| {
            use Change::*;
            match change {
                MetadataChanged { .. }
                | BillingPeriodChanged { .. }
                | CatalogOrderChanged { .. }
                | FeatureAdded { .. }
                | LimitAdded { .. }
                | PlanAdded { .. }
                | AddOnAdded { .. } => false,
                FeatureDefaultChanged { name, .. } => {
                    features.contains(name.as_str()) || !plan.feature_overrides.contains_key(name)
                }
                FeatureRemoved { name }
                | FeatureTypeChanged { name, .. }
                | FeatureValueTypeChanged { name, .. }
                | FeatureDescriptionChanged { name, .. } => features.contains(name.as_str()),
                LimitRemoved { name }
                | LimitKindChanged { name, .. }
                | LimitMetricChanged { name, .. }
                | LimitPeriodChanged { name, .. }
                | LimitDescriptionChanged { name, .. }
                | LimitLinkedFeaturesChanged { name, .. } => limits.contains(name.as_str()),
                LimitThresholdChanged {
                    scope: Scope::Default,
                    limit,
                    ..
                } => limits.contains(limit.as_str()),
                LimitThresholdChanged {
                    scope: Scope::Plan(p), ..
                } => p == plan_name,
                PlanRemoved { name } | PlanPriceChanged { name, .. } => name == plan_name,
                PlanFeatureValueChanged { plan, .. } => plan == plan_name,
                AddOnRemoved { name } | AddOnPriceChanged { name, .. } | AddOnAvailabilityChanged { name, .. } => {
                    subscribed(name)
                }
                AddOnFeatureGrantChanged { add_on, .. } | AddOnExtensionChanged { add_on, .. } => subscribed(add_on),
            }
        })
        .cloned()
        .collect();
    Ok(ChangeSet { changes: kept })
}
