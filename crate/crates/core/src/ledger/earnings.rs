use super::fees::{transaction_cost, FeeSchedule};
use super::sequence::ActivitySequence;
use crate::orderflow::{DividendEvent, Money, Side, Timestamp};

/// Switches for the two accounting choices the method leaves open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LedgerPolicy {
    /// Charge sell-side costs on the virtual close-out entry.
    pub charge_virtual_closeout: bool,
    /// Count the virtual close-out entry in the transaction count.
    pub count_virtual_in_j: bool,
}

impl Default for LedgerPolicy {
    fn default() -> Self {
        LedgerPolicy {
            charge_virtual_closeout: true,
            count_virtual_in_j: true,
        }
    }
}

/// Capital, proceeds, costs and dividends of one investor in one stock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StockEarnings {
    pub buy_capital: Money,
    pub sell_proceeds: Money,
    pub buy_cost: Money,
    pub sell_cost: Money,
    pub dividends: Money,
}

impl StockEarnings {
    pub fn total_cost(&self) -> Money {
        self.buy_cost + self.sell_cost
    }

    /// `S − B − C + D`.
    pub fn earnings(&self) -> Money {
        self.sell_proceeds - self.buy_capital - self.total_cost() + self.dividends
    }

    /// Denominator contribution of this stock to the portfolio return.
    pub fn invested(&self) -> Money {
        self.buy_capital + self.buy_cost
    }
}

impl std::ops::Add for StockEarnings {
    type Output = StockEarnings;
    fn add(self, o: StockEarnings) -> StockEarnings {
        StockEarnings {
            buy_capital: self.buy_capital + o.buy_capital,
            sell_proceeds: self.sell_proceeds + o.sell_proceeds,
            buy_cost: self.buy_cost + o.buy_cost,
            sell_cost: self.sell_cost + o.sell_cost,
            dividends: self.dividends + o.dividends,
        }
    }
}

/// Shares held at the open of `ex_date` (entries strictly before that day).
pub fn holdings_before(seq: &ActivitySequence, day_start: Timestamp) -> i64 {
    -seq.entries
        .iter()
        .take_while(|e| e.time < day_start)
        .map(|e| e.volume)
        .sum::<i64>()
}

/// Earnings of one sequence. `dividends` may contain events for other
/// stocks; only this sequence's stock is used.
pub fn stock_earnings(
    seq: &ActivitySequence,
    schedule: &FeeSchedule,
    dividends: &[DividendEvent],
    policy: LedgerPolicy,
) -> StockEarnings {
    let mut out = StockEarnings::default();
    for e in &seq.entries {
        let charged = !e.is_virtual || policy.charge_virtual_closeout;
        let cost = if charged {
            transaction_cost(e.notional, e.side(), schedule)
        } else {
            Money::ZERO
        };
        match e.side() {
            Side::Buy => {
                out.buy_capital += e.notional;
                out.buy_cost += cost;
            }
            Side::Sell => {
                out.sell_proceeds += e.notional;
                out.sell_cost += cost;
            }
        }
    }
    for d in dividends.iter().filter(|d| d.stock_id == seq.stock_id) {
        let held = holdings_before(seq, Timestamp::new(d.ex_date, 0));
        out.dividends += d.cash_per_share.times_shares(held);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::fees::Rate;
    use crate::ledger::sequence::Entry;
    use crate::orderflow::CENTIS_PER_DAY;
    use chrono::NaiveDate;

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn day0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2003, 6, 2).unwrap()
    }

    fn at_day(day: i64) -> Timestamp {
        Timestamp::from_raw(Timestamp::new(day0(), 3_600_000).raw() + day * CENTIS_PER_DAY)
    }

    fn seq(entries: &[(i64, &str, i64, bool)]) -> ActivitySequence {
        ActivitySequence {
            investor_id: "I".into(),
            stock_id: "S1".into(),
            entries: entries
                .iter()
                .enumerate()
                .map(|(i, &(v, p, d, virt))| Entry {
                    volume: v,
                    notional: m(p).times_shares(v.abs()),
                    time: at_day(d),
                    seq: i as u64,
                    is_virtual: virt,
                })
                .collect(),
        }
    }

    #[test]
    fn round_trip_worked_example() {
        let schedule = FeeSchedule::a_share(Rate::from_fraction(0.0025).unwrap()).unwrap();
        let s = seq(&[(-100, "10", 0, false), (100, "11", 1, false)]);
        let e = stock_earnings(&s, &schedule, &[], LedgerPolicy::default());
        assert_eq!(e.buy_capital, m("1000"));
        assert_eq!(e.sell_proceeds, m("1100"));
        assert_eq!(e.buy_cost, m("5.00"));
        assert_eq!(e.sell_cost, m("6.10"));
        assert_eq!(e.total_cost(), m("11.10"));
        assert_eq!(e.earnings(), m("88.90"));
    }

    #[test]
    fn empty_sequence_is_all_zero() {
        let e = stock_earnings(
            &seq(&[]),
            &FeeSchedule::zero(),
            &[],
            LedgerPolicy::default(),
        );
        assert_eq!(e, StockEarnings::default());
    }

    #[test]
    fn dividend_on_held_shares() {
        let s = seq(&[(-100, "10", 0, false), (100, "10", 30, true)]);
        let div = DividendEvent {
            stock_id: "S1".into(),
            ex_date: day0() + chrono::Duration::days(8),
            cash_per_share: m("0.12"),
        };
        let other = DividendEvent {
            stock_id: "S2".into(),
            ..div.clone()
        };
        let e = stock_earnings(
            &s,
            &FeeSchedule::zero(),
            &[div, other],
            LedgerPolicy::default(),
        );
        assert_eq!(e.dividends, m("12"));
        assert_eq!(e.earnings(), m("12"));
    }

    #[test]
    fn buy_on_ex_date_earns_no_dividend() {
        let s = seq(&[(-100, "10", 8, false), (100, "10", 30, true)]);
        let div = DividendEvent {
            stock_id: "S1".into(),
            ex_date: day0() + chrono::Duration::days(8),
            cash_per_share: m("0.12"),
        };
        let e = stock_earnings(&s, &FeeSchedule::zero(), &[div], LedgerPolicy::default());
        assert_eq!(e.dividends, Money::ZERO);
    }

    #[test]
    fn virtual_closeout_cost_switch() {
        let schedule = FeeSchedule::a_share(Rate::from_fraction(0.0025).unwrap()).unwrap();
        let s = seq(&[(-100, "10", 0, false), (100, "12", 30, true)]);
        let charged = stock_earnings(&s, &schedule, &[], LedgerPolicy::default());
        let free = stock_earnings(
            &s,
            &schedule,
            &[],
            LedgerPolicy {
                charge_virtual_closeout: false,
                ..LedgerPolicy::default()
            },
        );
        assert_eq!(charged.sell_cost, m("6.20"));
        assert_eq!(free.sell_cost, Money::ZERO);
    }
}
