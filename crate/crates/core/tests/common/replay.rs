//! Random usage timelines, replayed through the engine and through a
//! from-scratch recomputation.

use chrono::{TimeZone, Utc};
use indexmap::IndexMap;
use proptest::prelude::*;
use rust_decimal::Decimal;
use saas_pricing::evaluator::{EvalError, Subscription};
use saas_pricing::model::{AddOn, Amount, LimitKind, Period, PeriodUnit, Plan, Pricing, UsageLimit};

use super::calendar::{self, Civil, DAY};

pub const PLAN: &str = "PLAN";
const THREE_YEARS: i64 = 3 * 366 * DAY;

#[derive(Debug, Clone)]
pub enum Event {
    Record { limit: String, amount: Amount, at: i64 },
    Reset { limit: String },
    Lapse { at: i64 },
}

#[derive(Debug, Clone)]
pub struct Timeline {
    pub pricing: Pricing,
    pub add_ons: Vec<String>,
    pub start: i64,
    pub events: Vec<Event>,
}

/// What a replay ends with: whether each record was accepted, and per limit
/// the final usage, window index and window start in epoch seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub accepted: Vec<bool>,
    pub usage: IndexMap<String, (Decimal, Option<u64>, Option<i64>)>,
}

#[derive(Debug, Clone)]
enum When {
    After(i64),
    /// Just around the next window boundary of the indexed limit.
    Boundary(usize, i64),
}

#[derive(Debug, Clone)]
enum Seed {
    Record(usize, Amount, When),
    Reset(usize),
    Lapse(When),
}

fn limit_seed() -> impl Strategy<Value = (LimitKind, Option<Period>, Amount)> {
    let period =
        (prop_oneof![Just(1u32), 1u32..4], prop::sample::select(PeriodUnit::ALL)).prop_map(|(v, u)| Period::new(v, u));
    (prop::sample::select(LimitKind::ALL), period, any::<bool>(), 0u32..1000).prop_map(
        |(kind, period, periodic, default)| {
            let period = match kind {
                LimitKind::Renewable => Some(period),
                LimitKind::NonRenewable => None,
                _ => periodic.then_some(period),
            };
            (kind, period, Amount::from(default))
        },
    )
}

fn when() -> impl Strategy<Value = When> {
    // Mean gap of about 5.5 days spreads 200 events over three years.
    prop_oneof![
        6 => (0i64..(11 * DAY)).prop_map(When::After),
        1 => Just(When::After(0)),
        2 => (0usize..4, -1i64..=1).prop_map(|(l, off)| When::Boundary(l, off)),
    ]
}

fn amount() -> impl Strategy<Value = Amount> {
    prop_oneof![
        4 => (1u32..300).prop_map(Amount::from),
        1 => (1i64..30_000).prop_map(|m| Amount::new(Decimal::new(m, 2)).unwrap()),
    ]
}

fn event_seed() -> impl Strategy<Value = Seed> {
    prop_oneof![
        6 => (0usize..4, amount(), when()).prop_map(|(l, a, w)| Seed::Record(l, a, w)),
        1 => (0usize..4).prop_map(Seed::Reset),
        2 => when().prop_map(Seed::Lapse),
    ]
}

fn start() -> impl Strategy<Value = i64> {
    let anchors = vec![
        (2023, 1, 31),
        (2024, 1, 31),
        (2024, 2, 29),
        (2023, 3, 31),
        (2025, 8, 31),
        (2023, 12, 31),
    ];
    prop_oneof![
        2 => (prop::sample::select(anchors), 0i64..DAY)
            .prop_map(|((year, month, day), s)| Civil { year, month, day, second_of_day: s }.epoch()),
        1 => Civil { year: 2020, month: 1, day: 1, second_of_day: 0 }.epoch()
            ..Civil { year: 2030, month: 1, day: 1, second_of_day: 0 }.epoch(),
    ]
}

/// Timelines of up to `max_events` events over a pricing with up to four
/// limits of mixed kinds and periods.
pub fn timeline(max_events: usize) -> impl Strategy<Value = Timeline> {
    (
        prop::collection::vec(limit_seed(), 1..=4),
        prop::collection::vec(0u32..1000, 4),
        prop::collection::vec(
            (any::<bool>(), prop::collection::vec(prop::option::of(1u32..500), 4)),
            0..=2,
        ),
        start(),
        prop::collection::vec(event_seed(), 0..=max_events),
    )
        .prop_map(|(limits, overrides, add_ons, start, seeds)| build(limits, overrides, add_ons, start, seeds))
}

fn build(
    limits: Vec<(LimitKind, Option<Period>, Amount)>,
    overrides: Vec<u32>,
    add_ons: Vec<(bool, Vec<Option<u32>>)>,
    start: i64,
    seeds: Vec<Seed>,
) -> Timeline {
    let mut pricing = Pricing::new("Replay", "USD", Period::new(1, PeriodUnit::Year));
    let names: Vec<String> = (0..limits.len()).map(|i| format!("limit{i}")).collect();
    for (name, (kind, period, default)) in names.iter().zip(&limits) {
        let limit = UsageLimit {
            description: String::new(),
            kind: *kind,
            metric: "units".into(),
            period: *period,
            default_value: *default,
            linked_features: Default::default(),
        };
        pricing.usage_limits.insert(name.clone(), limit);
    }
    let mut plan = Plan::default();
    for (i, name) in names.iter().enumerate() {
        if overrides[i].is_multiple_of(2) {
            plan.limit_overrides.insert(name.clone(), Amount::from(overrides[i]));
        }
    }
    pricing.plans.insert(PLAN.into(), plan);
    let mut subscribed = Vec::new();
    for (i, (subscribe, extensions)) in add_ons.iter().enumerate() {
        let mut add_on = AddOn::default();
        for (name, ext) in names.iter().zip(extensions) {
            if let Some(e) = ext {
                add_on.limit_extensions.insert(name.clone(), Amount::from(*e));
            }
        }
        if add_on.limit_extensions.is_empty() {
            add_on.limit_extensions.insert(names[0].clone(), Amount::from(1));
        }
        let name = format!("addOn{i}");
        if *subscribe {
            subscribed.push(name.clone());
        }
        pricing.add_ons.insert(name, add_on);
    }

    let mut now = start;
    let mut resolve = |w: &When| {
        now = match *w {
            When::After(gap) => now + gap,
            When::Boundary(l, offset) => match limits[l % limits.len()].1 {
                Some(period) => {
                    let starts = calendar::window_starts(start, period, now);
                    (starts.last().copied().unwrap() + offset).max(now)
                }
                None => now,
            },
        }
        .min(start + THREE_YEARS);
        now
    };
    let events = seeds
        .iter()
        .map(|s| match s {
            Seed::Record(l, amount, w) => Event::Record {
                limit: names[l % names.len()].clone(),
                amount: *amount,
                at: resolve(w),
            },
            Seed::Reset(l) => Event::Reset {
                limit: names[l % names.len()].clone(),
            },
            Seed::Lapse(w) => Event::Lapse { at: resolve(w) },
        })
        .collect();
    Timeline {
        pricing,
        add_ons: subscribed,
        start,
        events,
    }
}

pub fn instant(secs: i64) -> chrono::DateTime<Utc> {
    Utc.timestamp_opt(secs, 0).unwrap()
}

/// Runs the timeline through the engine, checking after every accepted
/// record that usage stays within the effective limit.
pub fn engine(t: &Timeline) -> Outcome {
    let p = &t.pricing;
    let mut sub = Subscription::new(p, PLAN, &t.add_ons, instant(t.start)).unwrap();
    let mut accepted = Vec::new();
    for event in &t.events {
        match event {
            Event::Record { limit, amount, at } => match sub.record_usage(p, limit, *amount, instant(*at)) {
                Ok(next) => {
                    let effective = next.effective_limit(p, limit).unwrap();
                    assert!(next.usage[limit].used <= effective, "quota breached on {limit}");
                    sub = next;
                    accepted.push(true);
                }
                Err(EvalError::QuotaExceeded { .. }) => accepted.push(false),
                Err(e) => panic!("unexpected error: {e}"),
            },
            Event::Reset { limit } => sub = sub.reset_usage(limit).unwrap(),
            Event::Lapse { at } => sub = sub.lapse_windows(p, instant(*at)).unwrap(),
        }
    }
    let usage = sub
        .usage
        .iter()
        .map(|(name, s)| {
            (
                name.clone(),
                (s.used.get(), s.window_index, s.window_start.map(|w| w.timestamp())),
            )
        })
        .collect();
    Outcome { accepted, usage }
}

/// Recomputes the outcome from the event list with plain decimals and the
/// test calendar.
pub fn oracle(t: &Timeline) -> Outcome {
    let p = &t.pricing;
    let horizon = t.start + THREE_YEARS + DAY;
    let plan = &p.plans[PLAN];
    let mut effective = IndexMap::new();
    let mut windows = IndexMap::new();
    for (name, limit) in p.usage_limits.iter() {
        let mut total = plan.limit_overrides.get(name).unwrap_or(&limit.default_value).get();
        for add_on in &t.add_ons {
            if let Some(e) = p.add_ons[add_on].limit_extensions.get(name) {
                total += e.get();
            }
        }
        effective.insert(name.clone(), total);
        windows.insert(
            name.clone(),
            limit
                .period
                .map(|period| calendar::window_starts(t.start, period, horizon)),
        );
    }

    // (used, window index) per limit.
    let mut state: IndexMap<String, (Decimal, u64)> =
        p.usage_limits.keys().map(|n| (n.clone(), (Decimal::ZERO, 0))).collect();
    let lapse = |state: &mut IndexMap<String, (Decimal, u64)>, at: i64| {
        for (name, (used, k)) in state.iter_mut() {
            if let Some(starts) = &windows[name] {
                let now = calendar::window_of(starts, at);
                if now > *k {
                    *k = now;
                    *used = Decimal::ZERO;
                }
            }
        }
    };
    let mut accepted = Vec::new();
    for event in &t.events {
        match event {
            Event::Record { limit, amount, at } => {
                let mut next = state.clone();
                lapse(&mut next, *at);
                let ok = next[limit].0 + amount.get() <= effective[limit];
                if ok {
                    next[limit].0 += amount.get();
                    state = next;
                }
                accepted.push(ok);
            }
            Event::Reset { limit } => state[limit].0 = Decimal::ZERO,
            Event::Lapse { at } => lapse(&mut state, *at),
        }
    }
    let usage = state
        .iter()
        .map(|(name, (used, k))| {
            let window = windows[name].as_ref().map(|starts| (*k, starts[*k as usize]));
            (
                name.clone(),
                (used.normalize(), window.map(|w| w.0), window.map(|w| w.1)),
            )
        })
        .collect();
    Outcome { accepted, usage }
}
