//! Subscription-time evaluation: which features a subscriber can use, the
//! limits that apply to them, and usage accounting with periodic resets.
//!
//! Every operation takes the current time explicitly and returns a new
//! [`Subscription`] instead of mutating the old one.

pub mod calendar;
mod state;

pub use state::{format_timestamp, parse_timestamp};

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

use crate::model::{Amount, FeatureValue, Period, Pricing};
pub use calendar::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),
    #[error("unknown add-on `{0}`")]
    UnknownAddOn(String),
    #[error("add-on `{add_on}` is not available for plan `{plan}`")]
    AddOnNotAvailableForPlan { add_on: String, plan: String },
    #[error("unknown usage limit `{0}`")]
    UnknownLimit(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("usage amounts must be positive")]
    NonPositiveAmount,
    #[error("{now} is before the subscription start {start}")]
    ClockBeforeStart { now: Timestamp, start: Timestamp },
    #[error("quota exceeded for `{limit}`: {used} used of {effective}, {requested} requested")]
    QuotaExceeded {
        limit: String,
        effective: Amount,
        used: Amount,
        requested: Amount,
    },
    #[error("subscription state does not match the pricing: {0}")]
    StateMismatch(String),
}

/// Consumption of one limit. Window fields are present only for limits that
/// declare a period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UsageState {
    pub used: Amount,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "state::rfc3339_opt")]
    pub window_start: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_index: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Subscription {
    pub plan: String,
    pub add_ons: IndexSet<String>,
    #[serde(with = "state::rfc3339")]
    pub start_instant: Timestamp,
    pub contract_period: Period,
    pub usage: IndexMap<String, UsageState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitStatus {
    pub limit_name: String,
    pub effective: Amount,
    pub used: Amount,
    pub remaining: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationResult {
    pub feature_name: String,
    pub enabled: bool,
    pub value: FeatureValue,
    pub limits: Vec<LimitStatus>,
}

impl Subscription {
    /// Subscribes to `plan` plus `add_ons` at `start`, with zero usage and
    /// every periodic window anchored at `start`. The contract period is the
    /// pricing's billing period.
    pub fn new<S: AsRef<str>>(
        pricing: &Pricing,
        plan: &str,
        add_ons: &[S],
        start: Timestamp,
    ) -> Result<Subscription, EvalError> {
        if !pricing.plans.contains_key(plan) {
            return Err(EvalError::UnknownPlan(plan.to_owned()));
        }
        let mut names = IndexSet::new();
        for name in add_ons.iter().map(AsRef::as_ref) {
            let add_on = pricing
                .add_ons
                .get(name)
                .ok_or_else(|| EvalError::UnknownAddOn(name.to_owned()))?;
            if !add_on.is_available_for(plan) {
                return Err(EvalError::AddOnNotAvailableForPlan {
                    add_on: name.to_owned(),
                    plan: plan.to_owned(),
                });
            }
            names.insert(name.to_owned());
        }
        let usage = pricing
            .usage_limits
            .iter()
            .map(|(name, limit)| {
                let periodic = limit.period.is_some();
                let state = UsageState {
                    used: Amount::ZERO,
                    window_start: periodic.then_some(start),
                    window_index: periodic.then_some(0),
                };
                (name.clone(), state)
            })
            .collect();
        Ok(Subscription {
            plan: plan.to_owned(),
            add_ons: names,
            start_instant: start,
            contract_period: pricing.billing_period,
            usage,
        })
    }

    /// Checks a subscription loaded from elsewhere against `pricing`.
    pub fn check_against(&self, pricing: &Pricing) -> Result<(), EvalError> {
        let fresh = Subscription::new(
            pricing,
            &self.plan,
            &self.add_ons.iter().collect::<Vec<_>>(),
            self.start_instant,
        )?;
        if fresh.usage.len() != self.usage.len() {
            return Err(EvalError::StateMismatch(
                "usage entries do not match the declared limits".into(),
            ));
        }
        for (name, limit) in &pricing.usage_limits {
            let state = self
                .usage
                .get(name)
                .ok_or_else(|| EvalError::StateMismatch(format!("no usage entry for limit `{name}`")))?;
            let expected_start = match (limit.period, state.window_index) {
                (Some(period), Some(k)) => calendar::advance(self.start_instant, period, k),
                (None, None) => None,
                _ => {
                    return Err(EvalError::StateMismatch(format!(
                        "window of limit `{name}` does not match its period"
                    )))
                }
            };
            if state.window_start != expected_start {
                return Err(EvalError::StateMismatch(format!(
                    "window start of limit `{name}` is inconsistent"
                )));
            }
        }
        Ok(())
    }

    fn subscribed_add_ons<'p>(&'p self, pricing: &'p Pricing) -> impl Iterator<Item = &'p crate::model::AddOn> + 'p {
        pricing
            .add_ons
            .iter()
            .filter(|(name, _)| self.add_ons.contains(name.as_str()))
            .map(|(_, add_on)| add_on)
    }

    /// The plan's resolved value for the limit plus every subscribed add-on's
    /// extension of it.
    pub fn effective_limit(&self, pricing: &Pricing, limit: &str) -> Result<Amount, EvalError> {
        let declared = pricing
            .usage_limits
            .get(limit)
            .ok_or_else(|| EvalError::UnknownLimit(limit.to_owned()))?;
        let plan = pricing
            .plans
            .get(&self.plan)
            .ok_or_else(|| EvalError::UnknownPlan(self.plan.clone()))?;
        let base = plan
            .limit_overrides
            .get(limit)
            .copied()
            .unwrap_or(declared.default_value);
        let extensions: Amount = self
            .subscribed_add_ons(pricing)
            .filter_map(|a| a.limit_extensions.get(limit).copied())
            .sum();
        Ok(base + extensions)
    }

    /// Starts new windows for every periodic limit whose current window has
    /// ended by `now`, zeroing their usage. Windows never move backwards.
    pub fn lapse_windows(&self, pricing: &Pricing, now: Timestamp) -> Result<Subscription, EvalError> {
        if now < self.start_instant {
            return Err(EvalError::ClockBeforeStart {
                now,
                start: self.start_instant,
            });
        }
        let mut next = self.clone();
        for (name, state) in next.usage.iter_mut() {
            let Some(period) = pricing.usage_limits.get(name).and_then(|l| l.period) else {
                continue;
            };
            let current = state.window_index.unwrap_or(0);
            let k = calendar::window_index(self.start_instant, period, now);
            if k > current {
                state.used = Amount::ZERO;
                state.window_index = Some(k);
                state.window_start = calendar::advance(self.start_instant, period, k);
            }
        }
        Ok(next)
    }

    /// Consumes `amount` of a limit at `now`, after lapsing windows. Rejection
    /// leaves the subscription untouched.
    pub fn record_usage(
        &self,
        pricing: &Pricing,
        limit: &str,
        amount: Amount,
        now: Timestamp,
    ) -> Result<Subscription, EvalError> {
        if amount.is_zero() {
            return Err(EvalError::NonPositiveAmount);
        }
        let effective = self.effective_limit(pricing, limit)?;
        let mut next = self.lapse_windows(pricing, now)?;
        let state = next
            .usage
            .get_mut(limit)
            .ok_or_else(|| EvalError::StateMismatch(format!("no usage entry for limit `{limit}`")))?;
        match state.used.checked_add(amount) {
            Some(total) if total <= effective => {
                state.used = total;
                Ok(next)
            }
            _ => Err(EvalError::QuotaExceeded {
                limit: limit.to_owned(),
                effective,
                used: state.used,
                requested: amount,
            }),
        }
    }

    /// Zeroes one limit's usage, e.g. when a metered session ends.
    pub fn reset_usage(&self, limit: &str) -> Result<Subscription, EvalError> {
        let mut next = self.clone();
        let state = next
            .usage
            .get_mut(limit)
            .ok_or_else(|| EvalError::UnknownLimit(limit.to_owned()))?;
        state.used = Amount::ZERO;
        Ok(next)
    }

    pub fn evaluate_feature(
        &self,
        pricing: &Pricing,
        feature: &str,
        now: Timestamp,
    ) -> Result<EvaluationResult, EvalError> {
        if !pricing.features.contains_key(feature) {
            return Err(EvalError::UnknownFeature(feature.to_owned()));
        }
        let current = self.lapse_windows(pricing, now)?;
        current.evaluate_lapsed(pricing, feature)
    }

    /// Evaluates every declared feature, in catalog order.
    pub fn evaluation_context(
        &self,
        pricing: &Pricing,
        now: Timestamp,
    ) -> Result<IndexMap<String, EvaluationResult>, EvalError> {
        let current = self.lapse_windows(pricing, now)?;
        pricing
            .features
            .keys()
            .map(|name| Ok((name.clone(), current.evaluate_lapsed(pricing, name)?)))
            .collect()
    }

    fn evaluate_lapsed(&self, pricing: &Pricing, feature: &str) -> Result<EvaluationResult, EvalError> {
        let resolved = pricing
            .resolve_plan(&self.plan)
            .map_err(|_| EvalError::UnknownPlan(self.plan.clone()))?;
        let plan_value = &resolved.feature_values[feature];
        // The first truthy grant in catalog order wins over the plan value.
        let granted = self
            .subscribed_add_ons(pricing)
            .filter_map(|a| a.feature_grants.get(feature))
            .find(|v| v.is_truthy());
        let value = granted.unwrap_or(plan_value).clone();
        let mut limits = Vec::new();
        for (name, limit) in &pricing.usage_limits {
            if !limit.linked_features.contains(feature) {
                continue;
            }
            let effective = self.effective_limit(pricing, name)?;
            let used = self.usage.get(name).map_or(Amount::ZERO, |s| s.used);
            limits.push(LimitStatus {
                limit_name: name.clone(),
                effective,
                used,
                remaining: effective.saturating_sub(used),
            });
        }
        Ok(EvaluationResult {
            feature_name: feature.to_owned(),
            enabled: value.is_truthy(),
            value,
            limits,
        })
    }

    /// Limits whose period is longer than this subscription's contract period.
    pub fn limits_exceeding_contract<'p>(&self, pricing: &'p Pricing) -> Vec<&'p str> {
        let contract = self.contract_period.canonical_days();
        pricing
            .usage_limits
            .iter()
            .filter(|(_, l)| l.period.is_some_and(|p| p.canonical_days() > contract))
            .map(|(name, _)| name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("subscription state is always serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Subscription, serde_json::Error> {
        serde_json::from_str(text)
    }
}
