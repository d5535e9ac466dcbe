use std::fmt;

use crate::error::{Error, Result};
use crate::orderflow::{Money, Side};

/// A proportional rate in units of 1e-8 (so 0.01475% is 14_750).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(u64);

impl Rate {
    pub const SCALE: u64 = 100_000_000;
    pub const ZERO: Rate = Rate(0);

    pub const fn from_raw(raw: u64) -> Self {
        Rate(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    /// From a fraction such as `0.0015`, rounded to the 1e-8 grid.
    pub fn from_fraction(fraction: f64) -> Result<Self> {
        if !(fraction.is_finite() && fraction >= 0.0) {
            return Err(Error::FeeSchedule(format!(
                "rate {fraction} must be a non-negative number"
            )));
        }
        Ok(Rate((fraction * Self::SCALE as f64).round() as u64))
    }

    pub fn as_fraction(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }
}

impl std::ops::Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_fraction())
    }
}

/// Per-transaction cost parameters for one investor in one market.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeeSchedule {
    pub brokerage: Rate,
    pub exchange: Rate,
    pub supervision: Rate,
    /// Charged on the sell side only.
    pub stamp: Rate,
    /// Floor applied to the brokerage + exchange + supervision part.
    pub min_fee: Money,
}

/// Cap on brokerage + exchange + supervision: 0.3%.
pub const MAX_PROPORTIONAL: Rate = Rate(300_000);

impl FeeSchedule {
    pub fn a_share(brokerage: Rate) -> Result<Self> {
        Self::new(
            brokerage,
            Rate(14_750),
            Rate(4_000),
            Rate(100_000),
            Money::from_cents(500),
        )
    }

    pub fn b_share(brokerage: Rate) -> Result<Self> {
        Self::new(
            brokerage,
            Rate(30_100),
            Rate(4_000),
            Rate(100_000),
            Money::from_cents(500),
        )
    }

    /// No costs at all.
    pub fn zero() -> Self {
        FeeSchedule {
            brokerage: Rate::ZERO,
            exchange: Rate::ZERO,
            supervision: Rate::ZERO,
            stamp: Rate::ZERO,
            min_fee: Money::ZERO,
        }
    }

    pub fn new(
        brokerage: Rate,
        exchange: Rate,
        supervision: Rate,
        stamp: Rate,
        min_fee: Money,
    ) -> Result<Self> {
        let s = FeeSchedule {
            brokerage,
            exchange,
            supervision,
            stamp,
            min_fee,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let proportional = self.proportional();
        if proportional > MAX_PROPORTIONAL {
            return Err(Error::FeeSchedule(format!(
                "brokerage + exchange + supervision = {proportional} exceeds 0.003"
            )));
        }
        if self.min_fee < Money::ZERO {
            return Err(Error::FeeSchedule(
                "minimum fee must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn proportional(&self) -> Rate {
        self.brokerage + self.exchange + self.supervision
    }

    pub fn with_brokerage(mut self, brokerage: Rate) -> Result<Self> {
        self.brokerage = brokerage;
        self.validate()?;
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

/// Cost of one transaction with absolute notional `|p v|`:
/// `max(notional·(b+e+f), floor) + notional·d·[sell]`, rounded half-up to
/// the cent. Computed in exact integer arithmetic.
pub fn transaction_cost(notional: Money, side: Side, schedule: &FeeSchedule) -> Money {
    let n = i128::from(notional.raw().abs());
    let scale = i128::from(Rate::SCALE);
    // amounts below are in raw money units × 1e8
    let proportional = n * i128::from(schedule.proportional().raw());
    let floor = i128::from(schedule.min_fee.raw()) * scale;
    let stamp = match side {
        Side::Sell => n * i128::from(schedule.stamp.raw()),
        Side::Buy => 0,
    };
    let total = proportional.max(floor) + stamp;
    let cent = i128::from(Money::CENT) * scale;
    let cents = (2 * total + cent) / (2 * cent);
    Money::from_cents(cents as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bps25() -> Rate {
        Rate::from_fraction(0.0025).unwrap()
    }

    #[test]
    fn a_share_sell_worked_example() {
        let s = FeeSchedule::a_share(bps25()).unwrap();
        // max(10000 × 0.0026875, 5) + 10 = 36.875 → 36.88
        let c = transaction_cost(Money::from_f64(10_000.0), Side::Sell, &s);
        assert_eq!(c, Money::from_cents(3688));
    }

    #[test]
    fn floor_binds_on_small_buy() {
        let s = FeeSchedule::a_share(bps25()).unwrap();
        let c = transaction_cost(Money::from_f64(1_000.0), Side::Buy, &s);
        assert_eq!(c, Money::from_cents(500));
    }

    #[test]
    fn b_share_sell_worked_example() {
        let s = FeeSchedule::b_share(bps25()).unwrap();
        let c = transaction_cost(Money::from_f64(10_000.0), Side::Sell, &s);
        assert_eq!(c, Money::from_cents(3841));
    }

    #[test]
    fn sell_of_1100_at_quarter_percent() {
        let s = FeeSchedule::a_share(bps25()).unwrap();
        // max(2.95625, 5) + 1.10
        assert_eq!(
            transaction_cost(Money::from_f64(1_100.0), Side::Sell, &s),
            Money::from_cents(610)
        );
    }

    #[test]
    fn rounding_is_half_up() {
        let s = FeeSchedule::new(
            Rate::from_raw(100_000),
            Rate::ZERO,
            Rate::ZERO,
            Rate::ZERO,
            Money::ZERO,
        )
        .unwrap();
        // 0.1% of 5.00 = 0.005 → 0.01; 0.1% of 4.99 = 0.00499 → 0.00
        assert_eq!(
            transaction_cost(Money::from_f64(5.0), Side::Buy, &s),
            Money::from_cents(1)
        );
        assert_eq!(
            transaction_cost(Money::from_f64(4.99), Side::Buy, &s),
            Money::ZERO
        );
    }

    #[test]
    fn proportional_cap_enforced() {
        let err = FeeSchedule::a_share(Rate::from_fraction(0.0029).unwrap()).unwrap_err();
        assert!(err.to_string().contains("exceeds 0.003"));
        assert!(FeeSchedule::a_share(Rate::from_fraction(0.0028).unwrap()).is_ok());
        assert!(Rate::from_fraction(-0.1).is_err());
    }

    #[test]
    fn zero_schedule_costs_nothing() {
        let z = FeeSchedule::zero();
        assert_eq!(
            transaction_cost(Money::from_f64(123.45), Side::Sell, &z),
            Money::ZERO
        );
    }
}
