use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{NaiveDate, NaiveTime, Timelike};

macro_rules! token_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(token: impl AsRef<str>) -> Self {
                Self(Arc::from(token.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self::new(s)
            }
        }

        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.0)
            }
        }

        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                String::deserialize(d).map(Self::new)
            }
        }
    };
}

token_id!(
    /// Masked trader identifier.
    TraderId
);
token_id!(StockId);
token_id!(
    /// Order reference, unique within one (stock, day).
    OrderId
);

/// Fixed-point currency amount in ten-thousandths of a unit.
///
/// Prices, notionals, fees and dividends all use this representation so
/// that accounting is exact and independent of summation order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const SCALE: i64 = 10_000;
    pub const ZERO: Money = Money(0);
    /// One cent in raw units.
    pub const CENT: i64 = 100;

    pub const fn from_raw(raw: i64) -> Self {
        Money(raw)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents * Self::CENT)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    /// Rounds an `f64` amount to the nearest raw unit. Intended for
    /// configuration values and synthetic data, never for accounting.
    pub fn from_f64(value: f64) -> Self {
        Money((value * Self::SCALE as f64).round() as i64)
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Amount for `shares` shares at this per-share price.
    pub fn times_shares(self, shares: i64) -> Money {
        Money(self.0 * shares)
    }
}

impl std::ops::Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl std::ops::Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl std::ops::Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseMoneyError {
    #[error("empty amount")]
    Empty,
    #[error("non-numeric amount `{0}`")]
    NotNumeric(String),
    #[error("amount `{0}` has more than 4 decimal places")]
    TooPrecise(String),
    #[error("amount `{0}` out of range")]
    Overflow(String),
}

impl FromStr for Money {
    type Err = ParseMoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseMoneyError::Empty);
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty())
            || !digits_ok(int_part)
            || !digits_ok(frac_part)
        {
            return Err(ParseMoneyError::NotNumeric(s.to_string()));
        }
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.len() > 4 {
            return Err(ParseMoneyError::TooPrecise(s.to_string()));
        }
        let overflow = || ParseMoneyError::Overflow(s.to_string());
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| overflow())?
        };
        let mut frac: i64 = 0;
        for (i, b) in frac_trimmed.bytes().enumerate() {
            frac += i64::from(b - b'0') * 10i64.pow(3 - i as u32);
        }
        let raw = int
            .checked_mul(Self::SCALE)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(overflow)?;
        Ok(Money(if negative { -raw } else { raw }))
    }
}

impl fmt::Display for Money {
    /// At least two decimals; further digits only when non-zero.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / Self::SCALE as u64;
        let frac = abs % Self::SCALE as u64;
        let mut frac_str = format!("{frac:04}");
        while frac_str.len() > 2 && frac_str.ends_with('0') {
            frac_str.pop();
        }
        write!(f, "{sign}{int}.{frac_str}")
    }
}

/// Exchange-local instant on a 0.01 s grid, stored as centiseconds since
/// 1970-01-01 00:00:00.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

pub const CENTIS_PER_DAY: i64 = 8_640_000;

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

impl Timestamp {
    pub const fn from_raw(centis: i64) -> Self {
        Timestamp(centis)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    pub fn new(date: NaiveDate, centis_of_day: u32) -> Self {
        let days = (date - epoch()).num_days();
        Timestamp(days * CENTIS_PER_DAY + i64::from(centis_of_day))
    }

    pub fn from_hms(date: NaiveDate, hour: u32, min: u32, sec: u32, centis: u32) -> Self {
        Self::new(date, ((hour * 60 + min) * 60 + sec) * 100 + centis)
    }

    pub fn date(self) -> NaiveDate {
        epoch() + chrono::Duration::days(self.0.div_euclid(CENTIS_PER_DAY))
    }

    pub fn centis_of_day(self) -> u32 {
        self.0.rem_euclid(CENTIS_PER_DAY) as u32
    }

    /// Start of the day (00:00:00.00) containing this instant.
    pub fn day_start(self) -> Timestamp {
        Timestamp(self.0 - self.0.rem_euclid(CENTIS_PER_DAY))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseTimestampError {
    #[error("bad timestamp `{0}` (expected YYYY-MM-DD HH:MM:SS.cc)")]
    Format(String),
    #[error("timestamp `{0}` has resolution finer than 0.01 s")]
    TooFine(String),
}

/// Parses `HH:MM:SS[.cc]` into centiseconds of day.
pub fn parse_time_of_day(s: &str) -> Result<u32, ParseTimestampError> {
    let bad = || ParseTimestampError::Format(s.to_string());
    let (hms, frac) = s.split_once('.').unwrap_or((s, ""));
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > 2 && frac[2..].bytes().any(|b| b != b'0') {
        return Err(ParseTimestampError::TooFine(s.to_string()));
    }
    let time = NaiveTime::parse_from_str(hms, "%H:%M:%S").map_err(|_| bad())?;
    let mut centis = 0u32;
    for (i, b) in frac.bytes().take(2).enumerate() {
        centis += u32::from(b - b'0') * if i == 0 { 10 } else { 1 };
    }
    Ok(time.num_seconds_from_midnight() * 100 + centis)
}

pub fn format_time_of_day(centis: u32) -> String {
    let secs = centis / 100;
    format!(
        "{:02}:{:02}:{:02}.{:02}",
        secs / 3600,
        (secs / 60) % 60,
        secs % 60,
        centis % 100
    )
}

impl FromStr for Timestamp {
    type Err = ParseTimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (date, time) = s
            .split_once(' ')
            .ok_or_else(|| ParseTimestampError::Format(s.to_string()))?;
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|_| ParseTimestampError::Format(s.to_string()))?;
        let centis = parse_time_of_day(time.trim()).map_err(|e| match e {
            ParseTimestampError::TooFine(_) => ParseTimestampError::TooFine(s.to_string()),
            ParseTimestampError::Format(_) => ParseTimestampError::Format(s.to_string()),
        })?;
        Ok(Timestamp::new(date, centis))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}",
            self.date().format("%Y-%m-%d"),
            format_time_of_day(self.centis_of_day())
        )
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum InvestorClass {
    Individual,
    Institution,
}

impl InvestorClass {
    pub const ALL: [InvestorClass; 2] = [InvestorClass::Individual, InvestorClass::Institution];

    pub fn as_str(self) -> &'static str {
        match self {
            InvestorClass::Individual => "individual",
            InvestorClass::Institution => "institution",
        }
    }

    /// Short token used in order files.
    pub fn code(self) -> &'static str {
        match self {
            InvestorClass::Individual => "ind",
            InvestorClass::Institution => "inst",
        }
    }
}

impl FromStr for InvestorClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ind" | "individual" => Ok(InvestorClass::Individual),
            "inst" | "institution" | "institutional" => Ok(InvestorClass::Institution),
            other => Err(format!("unknown investor class `{other}`")),
        }
    }
}

impl fmt::Display for InvestorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exchange segment.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum Market {
    A,
    B,
}

impl Market {
    pub const ALL: [Market; 2] = [Market::A, Market::B];

    pub fn as_str(self) -> &'static str {
        match self {
            Market::A => "A",
            Market::B => "B",
        }
    }
}

impl FromStr for Market {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "A" | "a" => Ok(Market::A),
            "B" | "b" => Ok(Market::B),
            other => Err(format!("unknown market `{other}`")),
        }
    }
}

impl fmt::Display for Market {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "buy" | "b" => Ok(Side::Buy),
            "sell" | "s" => Ok(Side::Sell),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an order asks the book to do.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OrderKind {
    Limit { price: Money, size: u64 },
    Market { size: u64 },
    Cancel { target: OrderId },
}

impl OrderKind {
    pub fn name(&self) -> &'static str {
        match self {
            OrderKind::Limit { .. } => "limit",
            OrderKind::Market { .. } => "market",
            OrderKind::Cancel { .. } => "cancel",
        }
    }

    pub fn size(&self) -> Option<u64> {
        match self {
            OrderKind::Limit { size, .. } | OrderKind::Market { size } => Some(*size),
            OrderKind::Cancel { .. } => None,
        }
    }

    pub fn price(&self) -> Option<Money> {
        match self {
            OrderKind::Limit { price, .. } => Some(*price),
            _ => None,
        }
    }
}

/// One submitted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderEvent {
    pub trader_id: TraderId,
    pub investor_class: InvestorClass,
    pub stock_id: StockId,
    pub side: Side,
    pub kind: OrderKind,
    pub timestamp: Timestamp,
    pub order_id: OrderId,
}
