//! Calendar arithmetic on plain epoch seconds, written without chrono.

use saas_pricing::model::{Period, PeriodUnit};

pub const DAY: i64 = 86_400;

pub fn is_leap(year: i64) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

pub fn days_in_month(year: i64, month: u32) -> u32 {
    const DAYS: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    if month == 2 && is_leap(year) {
        29
    } else {
        DAYS[month as usize - 1]
    }
}

/// Days since 1970-01-01, counting day by day through whole years and months.
pub fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let mut days = 0;
    if year >= 1970 {
        for y in 1970..year {
            days += if is_leap(y) { 366 } else { 365 };
        }
    } else {
        for y in year..1970 {
            days -= if is_leap(y) { 366 } else { 365 };
        }
    }
    for m in 1..month {
        days += days_in_month(year, m) as i64;
    }
    days + day as i64 - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Civil {
    pub year: i64,
    pub month: u32,
    pub day: u32,
    pub second_of_day: i64,
}

impl Civil {
    pub fn epoch(self) -> i64 {
        days_from_civil(self.year, self.month, self.day) * DAY + self.second_of_day
    }

    pub fn from_epoch(secs: i64) -> Civil {
        let mut days = secs.div_euclid(DAY);
        let second_of_day = secs.rem_euclid(DAY);
        let mut year = 1970;
        loop {
            let len = if is_leap(year) { 366 } else { 365 };
            if days < 0 {
                year -= 1;
                days += if is_leap(year) { 366 } else { 365 };
            } else if days >= len {
                days -= len;
                year += 1;
            } else {
                break;
            }
        }
        let mut month = 1;
        while days >= days_in_month(year, month) as i64 {
            days -= days_in_month(year, month) as i64;
            month += 1;
        }
        Civil {
            year,
            month,
            day: days as u32 + 1,
            second_of_day,
        }
    }

    /// The same wall-clock instant `months` later, clamped to the last day
    /// of a shorter month.
    pub fn plus_months(self, months: i64) -> Civil {
        let index = self.year * 12 + (self.month as i64 - 1) + months;
        let year = index.div_euclid(12);
        let month = index.rem_euclid(12) as u32 + 1;
        Civil {
            year,
            month,
            day: self.day.min(days_in_month(year, month)),
            ..self
        }
    }
}

/// Start of window `k` for a window series anchored at `anchor`.
pub fn window_start(anchor: i64, period: Period, k: i64) -> i64 {
    let n = period.value as i64 * k;
    match period.unit {
        PeriodUnit::Day => anchor + n * DAY,
        PeriodUnit::Week => anchor + n * 7 * DAY,
        PeriodUnit::Month => Civil::from_epoch(anchor).plus_months(n).epoch(),
        PeriodUnit::Year => Civil::from_epoch(anchor).plus_months(12 * n).epoch(),
    }
}

/// Every window start from the anchor up to and including `horizon`.
pub fn window_starts(anchor: i64, period: Period, horizon: i64) -> Vec<i64> {
    let mut starts = Vec::new();
    for k in 0.. {
        let s = window_start(anchor, period, k);
        starts.push(s);
        if s > horizon {
            break;
        }
    }
    starts
}

/// Index of the window containing `t`, by search over the window starts.
pub fn window_of(starts: &[i64], t: i64) -> u64 {
    starts.partition_point(|&s| s <= t) as u64 - 1
}
