use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite, non-negative exact decimal quantity (prices, limit thresholds, usage).
///
/// Values are kept normalized (no trailing fractional zeros) so that equal
/// quantities always print the same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Amount(Decimal);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmountError {
    #[error("not a decimal number: {0:?}")]
    Malformed(String),
    #[error("value is out of range: {0:?}")]
    OutOfRange(String),
    #[error("value must be non-negative, got {0}")]
    Negative(String),
}

impl Amount {
    pub const ZERO: Amount = Amount(Decimal::ZERO);

    /// Wraps a decimal, rejecting negative values.
    pub fn new(value: Decimal) -> Option<Self> {
        (!value.is_sign_negative() || value.is_zero()).then(|| Amount(value.abs().normalize()))
    }

    pub fn from_u64(value: u64) -> Self {
        Amount(Decimal::from(value))
    }

    pub fn get(self) -> Decimal {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    /// Addition that saturates at the largest representable value.
    pub fn saturating_add(self, other: Amount) -> Amount {
        Amount(self.0.saturating_add(other.0).normalize())
    }

    pub fn checked_add(self, other: Amount) -> Option<Amount> {
        self.0.checked_add(other.0).map(|d| Amount(d.normalize()))
    }

    /// `self - other`, floored at zero.
    pub fn saturating_sub(self, other: Amount) -> Amount {
        if other >= self {
            Amount::ZERO
        } else {
            Amount((self.0 - other.0).normalize())
        }
    }
}

impl FromStr for Amount {
    type Err = AmountError;

    /// Parses plain decimal literals (`12`, `0.5`, `+3`, `1e3`). Hex, octal,
    /// infinities and NaN are rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.strip_prefix(['+', '-']).unwrap_or(s);
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (mantissa, None),
        };
        let digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        let well_formed = digits(int_part)
            && frac_part.is_none_or(digits)
            && !(int_part.is_empty() && frac_part.is_none_or(str::is_empty))
            && exponent.is_none_or(|e| {
                let e = e.strip_prefix(['+', '-']).unwrap_or(e);
                !e.is_empty() && digits(e)
            });
        if !well_formed {
            return Err(AmountError::Malformed(s.to_owned()));
        }
        let unsigned = s.strip_prefix('+').unwrap_or(s);
        let parsed = if exponent.is_some() {
            Decimal::from_scientific(unsigned)
        } else {
            Decimal::from_str_exact(unsigned)
        }
        .map_err(|_| AmountError::OutOfRange(s.to_owned()))?;
        Amount::new(parsed).ok_or_else(|| AmountError::Negative(s.to_owned()))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Add for Amount {
    type Output = Amount;

    fn add(self, rhs: Amount) -> Amount {
        self.saturating_add(rhs)
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, Add::add)
    }
}

impl From<u32> for Amount {
    fn from(value: u32) -> Self {
        Amount(Decimal::from(value))
    }
}

// JSON form is an exact number literal, never a float round-trip.
impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        rust_decimal::serde::arbitrary_precision::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = rust_decimal::serde::arbitrary_precision::deserialize(deserializer)?;
        Amount::new(value).ok_or_else(|| serde::de::Error::custom("amount must be non-negative"))
    }
}
