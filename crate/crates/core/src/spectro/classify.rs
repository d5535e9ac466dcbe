use std::collections::BTreeMap;

use crate::ledger::{InvestorPerformance, Label};
use crate::orderflow::{InvestorClass, Market};

/// Winner/loser/flat counts for one (market, class) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoolCounts {
    pub winners: usize,
    pub losers: usize,
    pub flats: usize,
}

impl PoolCounts {
    pub fn total(&self) -> usize {
        self.winners + self.losers + self.flats
    }

    pub fn fraction(&self, label: Label) -> f64 {
        let n = match label {
            Label::Winner => self.winners,
            Label::Loser => self.losers,
            Label::Flat => self.flats,
        };
        if self.total() == 0 {
            0.0
        } else {
            n as f64 / self.total() as f64
        }
    }
}

/// Strict-sign partition of investors per (market, class).
pub fn classify_investors(
    perfs: &[InvestorPerformance],
) -> BTreeMap<(Market, InvestorClass), PoolCounts> {
    let mut out: BTreeMap<(Market, InvestorClass), PoolCounts> = BTreeMap::new();
    for p in perfs {
        let c = out.entry((p.market, p.class)).or_default();
        match Label::of(p.ret) {
            Label::Winner => c.winners += 1,
            Label::Loser => c.losers += 1,
            Label::Flat => c.flats += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::StockEarnings;

    fn perf(ret: f64, class: InvestorClass) -> InvestorPerformance {
        InvestorPerformance {
            investor_id: "I".into(),
            class,
            market: Market::A,
            ret,
            transactions: 2,
            holding_days: 1.0,
            label: Label::of(ret),
            totals: StockEarnings::default(),
        }
    }

    #[test]
    fn strict_sign_partition() {
        let perfs = [
            perf(0.1, InvestorClass::Individual),
            perf(-0.2, InvestorClass::Individual),
            perf(0.0, InvestorClass::Individual),
        ];
        let c = classify_investors(&perfs)[&(Market::A, InvestorClass::Individual)];
        assert_eq!((c.winners, c.losers, c.flats), (1, 1, 1));
        assert!((c.fraction(Label::Winner) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_winners() {
        let perfs = [
            perf(0.1, InvestorClass::Institution),
            perf(0.3, InvestorClass::Institution),
        ];
        let c = classify_investors(&perfs)[&(Market::A, InvestorClass::Institution)];
        assert_eq!(c.losers, 0);
        assert_eq!(c.fraction(Label::Winner), 1.0);
    }
}
