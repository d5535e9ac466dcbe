use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::matching::Fill;
use crate::orderflow::{InvestorClass, Money, OrderId, Side, StockId, Timestamp, TraderId};

/// One aggregated transaction of an activity sequence.
///
/// `volume` follows the selling-positive convention: a buy of 100 shares
/// is `-100`. The traded amount is kept as an exact notional; the
/// volume-weighted price is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub volume: i64,
    /// `|p · v|`, always positive.
    pub notional: Money,
    pub time: Timestamp,
    /// Sequence number of the last fill, ordering entries that share a time.
    pub seq: u64,
    /// Period-end close-out rather than a real trade.
    pub is_virtual: bool,
}

impl Entry {
    pub fn side(&self) -> Side {
        if self.volume > 0 {
            Side::Sell
        } else {
            Side::Buy
        }
    }

    pub fn shares(&self) -> i64 {
        self.volume.abs()
    }

    /// Volume-weighted price.
    pub fn price(&self) -> f64 {
        self.notional.to_f64() / self.shares() as f64
    }
}

/// Collapse the fills of one order into a single entry: size is the executed
/// volume, price its volume-weighted average, time the last fill's time.
/// Returns `None` for an empty fill set.
pub fn aggregate_fills_to_entry(
    fills: &[(u64, Money, Timestamp, u64)],
    side: Side,
) -> Option<Entry> {
    let (_, _, time, seq) = *fills.iter().max_by_key(|(_, _, t, s)| (*t, *s))?;
    let shares: u64 = fills.iter().map(|(v, ..)| *v).sum();
    let notional: Money = fills
        .iter()
        .map(|(v, p, ..)| p.times_shares(*v as i64))
        .sum();
    let shares = shares as i64;
    Some(Entry {
        volume: match side {
            Side::Sell => shares,
            Side::Buy => -shares,
        },
        notional,
        time,
        seq,
        is_virtual: false,
    })
}

/// Ordered transaction record of one investor in one stock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySequence {
    pub investor_id: TraderId,
    pub stock_id: StockId,
    pub entries: Vec<Entry>,
}

impl ActivitySequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn net_volume(&self) -> i64 {
        self.entries.iter().map(|e| e.volume).sum()
    }

    /// Shares held after each entry.
    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.iter().scan(0i64, |held, e| {
            *held -= e.volume;
            Some(*held)
        })
    }

    pub fn has_virtual(&self) -> bool {
        self.entries.last().is_some_and(|e| e.is_virtual)
    }
}

fn scale_notional(notional: Money, kept: i64, total: i64) -> Money {
    let num = i128::from(notional.raw()) * i128::from(kept);
    let den = i128::from(total);
    Money::from_raw(((2 * num + den) / (2 * den)) as i64)
}

/// Sanitize time-ordered entries into an activity sequence whose volumes sum
/// to zero.
///
/// Sells beyond current holdings are truncated to the holdings (dropped when
/// nothing is held); a truncated sell keeps its average price with its
/// notional rounded to the money grid. Shares still held at the end are sold
/// by one virtual entry at `period_end_price`, stamped `period_end`.
pub fn build_activity_sequence(
    investor_id: TraderId,
    stock_id: StockId,
    entries: &[Entry],
    period_end_price: Option<Money>,
    period_end: Timestamp,
) -> Result<ActivitySequence> {
    let mut held: i64 = 0;
    let mut out = Vec::with_capacity(entries.len() + 1);
    for e in entries.iter().filter(|e| e.volume != 0 && !e.is_virtual) {
        if e.volume < 0 {
            held -= e.volume;
            out.push(*e);
        } else if held > 0 {
            let kept = e.volume.min(held);
            let notional = if kept == e.volume {
                e.notional
            } else {
                scale_notional(e.notional, kept, e.volume)
            };
            held -= kept;
            out.push(Entry {
                volume: kept,
                notional,
                ..*e
            });
        }
    }
    if held > 0 {
        let price = period_end_price.ok_or_else(|| Error::CannotCloseOut {
            investor: investor_id.to_string(),
            stock: stock_id.to_string(),
        })?;
        let seq = out.last().map_or(0, |e: &Entry| e.seq + 1);
        out.push(Entry {
            volume: held,
            notional: price.times_shares(held),
            time: period_end,
            seq,
            is_virtual: true,
        });
    }
    Ok(ActivitySequence {
        investor_id,
        stock_id,
        entries: out,
    })
}

/// Raw (unsanitized) entries per investor and stock, reconstructed from
/// fills by aggregating each order's executions.
#[derive(Debug, Clone, Default)]
pub struct RawActivity {
    pub entries: BTreeMap<(TraderId, StockId), Vec<Entry>>,
    pub classes: BTreeMap<TraderId, InvestorClass>,
}

pub fn entries_from_fills(fills: &[Fill]) -> RawActivity {
    type OrderKey = (StockId, NaiveDate, OrderId, Side);
    type OrderFills = (TraderId, Vec<(u64, Money, Timestamp, u64)>);
    let mut per_order: BTreeMap<OrderKey, OrderFills> = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for f in fills {
        let date = f.time.date();
        for (party, side) in [(&f.buyer, Side::Buy), (&f.seller, Side::Sell)] {
            classes
                .entry(party.trader_id.clone())
                .or_insert(party.class);
            per_order
                .entry((f.stock_id.clone(), date, party.order_id.clone(), side))
                .or_insert_with(|| (party.trader_id.clone(), Vec::new()))
                .1
                .push((f.size, f.price, f.time, f.seq));
        }
    }
    let mut entries: BTreeMap<(TraderId, StockId), Vec<Entry>> = BTreeMap::new();
    for ((stock, _, _, side), (trader, order_fills)) in per_order {
        if let Some(e) = aggregate_fills_to_entry(&order_fills, side) {
            entries.entry((trader, stock)).or_default().push(e);
        }
    }
    for list in entries.values_mut() {
        list.sort_by_key(|e| (e.time, e.seq));
    }
    RawActivity { entries, classes }
}
