use std::collections::BTreeMap;

use crate::matching::Fill;
use crate::orderflow::{Money, StockId, Timestamp};

/// Realized trade times and prices of one stock over the period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeTape {
    pub stock_id: StockId,
    /// Strictly increasing timestamps, one price per timestamp.
    points: Vec<(Timestamp, Money)>,
}

impl TradeTape {
    /// Build from `(time, price)` trades in time order; several trades at
    /// one timestamp collapse to the last of them.
    pub fn from_trades(
        stock_id: StockId,
        trades: impl IntoIterator<Item = (Timestamp, Money)>,
    ) -> Self {
        let mut points: Vec<(Timestamp, Money)> = Vec::new();
        for (t, p) in trades {
            match points.last_mut() {
                Some(last) if last.0 == t => last.1 = p,
                Some(last) => {
                    assert!(last.0 < t, "trades must be in time order");
                    points.push((t, p));
                }
                None => points.push((t, p)),
            }
        }
        TradeTape { stock_id, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(Timestamp, Money)] {
        &self.points
    }

    pub fn get(&self, idx: usize) -> (Timestamp, Money) {
        self.points[idx]
    }
}

/// One tape per traded stock, from a time-ordered fill stream.
pub fn tapes_from_fills(fills: &[Fill]) -> BTreeMap<StockId, TradeTape> {
    let mut trades: BTreeMap<&StockId, Vec<(Timestamp, Money)>> = BTreeMap::new();
    for f in fills {
        trades
            .entry(&f.stock_id)
            .or_default()
            .push((f.time, f.price));
    }
    trades
        .into_iter()
        .map(|(s, mut t)| {
            // stable: same-time trades keep execution order
            t.sort_by_key(|(time, _)| *time);
            (s.clone(), TradeTape::from_trades(s.clone(), t))
        })
        .collect()
}
