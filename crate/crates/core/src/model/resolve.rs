use indexmap::IndexMap;
use serde::Serialize;

use super::{Amount, FeatureType, FeatureValue, LimitKind, ModelError, Pricing};

/// A plan expanded over the catalogs: every feature and limit has a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedPlanConfig {
    pub plan_name: String,
    pub feature_values: IndexMap<String, FeatureValue>,
    pub limit_values: IndexMap<String, Amount>,
}

impl ResolvedPlanConfig {
    /// Same features and limits, ignoring the plan's name and price.
    pub fn same_configuration(&self, other: &ResolvedPlanConfig) -> bool {
        self.feature_values == other.feature_values && self.limit_values == other.limit_values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureScope {
    /// Identical value in every plan.
    Common,
    Specific,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsSummary {
    pub features: usize,
    pub usage_limits: usize,
    pub plans: usize,
    pub add_ons: usize,
    /// Only types that occur, in declaration order of the enum.
    pub feature_types: IndexMap<FeatureType, usize>,
    pub limit_kinds: IndexMap<LimitKind, usize>,
    /// Features truthy in at least one resolved plan.
    pub plan_managed_features: usize,
    /// Features granted truthy by at least one add-on.
    pub add_on_managed_features: usize,
    /// Truthy grants per add-on.
    pub features_per_add_on: IndexMap<String, usize>,
}

impl Pricing {
    pub fn resolve_plan(&self, plan_name: &str) -> Result<ResolvedPlanConfig, ModelError> {
        let plan = self
            .plans
            .get(plan_name)
            .ok_or_else(|| ModelError::UnknownPlan(plan_name.to_owned()))?;
        let feature_values = self
            .features
            .iter()
            .map(|(name, feature)| {
                let value = plan.feature_overrides.get(name).unwrap_or(&feature.default_value);
                (name.clone(), value.clone())
            })
            .collect();
        let limit_values = self
            .usage_limits
            .iter()
            .map(|(name, limit)| {
                let value = plan.limit_overrides.get(name).copied().unwrap_or(limit.default_value);
                (name.clone(), value)
            })
            .collect();
        Ok(ResolvedPlanConfig {
            plan_name: plan_name.to_owned(),
            feature_values,
            limit_values,
        })
    }

    /// Every plan resolved, in catalog order.
    pub fn resolved_plans(&self) -> Vec<ResolvedPlanConfig> {
        self.plans
            .keys()
            .map(|name| self.resolve_plan(name).expect("plan name comes from the catalog"))
            .collect()
    }

    /// Splits features into those that behave identically in every plan and
    /// those that distinguish plans. Add-on grants are not considered.
    pub fn classify_features(&self) -> Result<IndexMap<String, FeatureScope>, ModelError> {
        let resolved = self.resolved_plans();
        let Some((first, rest)) = resolved.split_first() else {
            return Err(ModelError::NoPlans);
        };
        Ok(first
            .feature_values
            .iter()
            .map(|(name, value)| {
                let same = rest.iter().all(|plan| plan.feature_values.get(name) == Some(value));
                let scope = if same {
                    FeatureScope::Common
                } else {
                    FeatureScope::Specific
                };
                (name.clone(), scope)
            })
            .collect())
    }

    /// Names of features truthy in at least one resolved plan.
    pub fn plan_managed_features(&self) -> Vec<&str> {
        let resolved = self.resolved_plans();
        self.features
            .keys()
            .filter(|name| {
                resolved
                    .iter()
                    .any(|plan| plan.feature_values[name.as_str()].is_truthy())
            })
            .map(String::as_str)
            .collect()
    }

    /// Names of features granted truthy by at least one add-on.
    pub fn add_on_managed_features(&self) -> Vec<&str> {
        self.features
            .keys()
            .filter(|name| {
                self.add_ons
                    .values()
                    .any(|a| a.feature_grants.get(name.as_str()).is_some_and(FeatureValue::is_truthy))
            })
            .map(String::as_str)
            .collect()
    }

    pub fn stats(&self) -> StatsSummary {
        let mut feature_types: IndexMap<FeatureType, usize> = IndexMap::new();
        for feature in self.features.values() {
            *feature_types.entry(feature.feature_type).or_default() += 1;
        }
        feature_types.sort_keys();
        let mut limit_kinds: IndexMap<LimitKind, usize> = IndexMap::new();
        for limit in self.usage_limits.values() {
            *limit_kinds.entry(limit.kind).or_default() += 1;
        }
        limit_kinds.sort_keys();
        let features_per_add_on = self
            .add_ons
            .iter()
            .map(|(name, add_on)| {
                let granted = add_on
                    .feature_grants
                    .iter()
                    .filter(|(f, v)| self.features.contains_key(f.as_str()) && v.is_truthy())
                    .count();
                (name.clone(), granted)
            })
            .collect();
        StatsSummary {
            features: self.features.len(),
            usage_limits: self.usage_limits.len(),
            plans: self.plans.len(),
            add_ons: self.add_ons.len(),
            feature_types,
            limit_kinds,
            plan_managed_features: self.plan_managed_features().len(),
            add_on_managed_features: self.add_on_managed_features().len(),
            features_per_add_on,
        }
    }
}
