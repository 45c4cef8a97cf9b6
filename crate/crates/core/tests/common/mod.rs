//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod calendar;
pub mod cli;
pub mod patch;
pub mod replay;

use std::path::PathBuf;

use saas_pricing::model::Pricing;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn zoom() -> Pricing {
    saas_pricing::parse(&fixture_text("zoom.yml")).unwrap()
}

/// Orphaned features by direct enumeration of every (feature, plan) and
/// (feature, add-on) pair, without plan resolution.
pub fn brute_force_orphans(p: &Pricing) -> Vec<String> {
    let mut orphans = Vec::new();
    for (name, feature) in p.features.iter() {
        let mut reachable = false;
        for plan in p.plans.values() {
            let mut value = &feature.default_value;
            for (overridden, v) in plan.feature_overrides.iter() {
                if overridden == name {
                    value = v;
                }
            }
            reachable |= truthy(value);
        }
        for add_on in p.add_ons.values() {
            for (granted, v) in add_on.feature_grants.iter() {
                reachable |= granted == name && truthy(v);
            }
        }
        if !reachable {
            orphans.push(name.clone());
        }
    }
    orphans
}

fn truthy(v: &saas_pricing::model::FeatureValue) -> bool {
    use saas_pricing::model::FeatureValue::*;
    match v {
        Bool(b) => *b,
        Numeric(n) => n.to_string() != "0",
        Text(s) => !s.is_empty(),
    }
}
