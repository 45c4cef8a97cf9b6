//! Window boundaries for periodic limits.
//!
//! Days and weeks are exact multiples of 86 400 seconds. Months and years are
//! calendar steps from the anchor, clamping the day of month (an anchor on
//! Jan 31 gives Feb 28/29, then Mar 31). Each boundary is computed from the
//! anchor, never from the previous boundary.

use chrono::{DateTime, Datelike, Duration, Months, Utc};

use crate::model::{Period, PeriodUnit};

pub type Timestamp = DateTime<Utc>;

const SECONDS_PER_DAY: i64 = 86_400;

/// Start of window `k` for a limit anchored at `anchor`, or `None` past the
/// representable range.
pub fn advance(anchor: Timestamp, period: Period, k: u64) -> Option<Timestamp> {
    let steps = k.checked_mul(u64::from(period.value))?;
    match period.unit {
        PeriodUnit::Day | PeriodUnit::Week => {
            let days = steps.checked_mul(period.unit.canonical_days())?;
            let seconds = i64::try_from(days).ok()?.checked_mul(SECONDS_PER_DAY)?;
            anchor.checked_add_signed(Duration::try_seconds(seconds)?)
        }
        PeriodUnit::Month | PeriodUnit::Year => {
            let months = if period.unit == PeriodUnit::Year {
                steps.checked_mul(12)?
            } else {
                steps
            };
            anchor.checked_add_months(Months::new(u32::try_from(months).ok()?))
        }
    }
}

/// The largest `k` with `advance(anchor, period, k) <= now`. Requires
/// `now >= anchor`.
pub fn window_index(anchor: Timestamp, period: Period, now: Timestamp) -> u64 {
    debug_assert!(now >= anchor);
    let estimate = match period.unit {
        PeriodUnit::Day | PeriodUnit::Week => {
            let length = period.canonical_days() as i64 * SECONDS_PER_DAY;
            return ((now - anchor).num_seconds() / length) as u64;
        }
        PeriodUnit::Month | PeriodUnit::Year => {
            let months = |t: Timestamp| i64::from(t.year()) * 12 + i64::from(t.month0());
            let step = i64::from(period.value) * if period.unit == PeriodUnit::Year { 12 } else { 1 };
            ((months(now) - months(anchor)) / step).max(0) as u64
        }
    };
    let starts_by = |k: u64| advance(anchor, period, k).is_some_and(|t| t <= now);
    let mut k = estimate;
    while k > 0 && !starts_by(k) {
        k -= 1;
    }
    while starts_by(k + 1) {
        k += 1;
    }
    k
}
