use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::orderflow::{
    InvestorClass, Money, OrderEvent, OrderId, OrderKind, Side, StockId, Timestamp, TraderId,
};

/// One side of an execution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Party {
    pub order_id: OrderId,
    pub trader_id: TraderId,
    pub class: InvestorClass,
}

/// One execution between a buy order and a sell order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fill {
    pub stock_id: StockId,
    pub price: Money,
    pub size: u64,
    pub time: Timestamp,
    /// Per-stock execution counter; orders fills that share a timestamp.
    pub seq: u64,
    pub buyer: Party,
    pub seller: Party,
    pub maker_side: Side,
}

impl Fill {
    pub fn is_self_trade(&self) -> bool {
        self.buyer.trader_id == self.seller.trader_id
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Resting {
    pub party: Party,
    pub remaining: u64,
}

/// Outcome of one submission to the continuous book.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Submission {
    pub fills: Vec<Fill>,
    /// Set when the order was rejected or was a no-op.
    pub note: Option<String>,
}

/// Price-time priority limit order book for a single stock.
#[derive(Debug, Clone)]
pub struct OrderBook {
    stock_id: StockId,
    bids: BTreeMap<Reverse<Money>, VecDeque<Resting>>,
    asks: BTreeMap<Money, VecDeque<Resting>>,
    index: HashMap<OrderId, (Side, Money)>,
    last_price: Option<Money>,
    next_seq: u64,
}

impl OrderBook {
    pub fn new(stock_id: StockId) -> Self {
        OrderBook {
            stock_id,
            bids: BTreeMap::new(),
            asks: BTreeMap::new(),
            index: HashMap::new(),
            last_price: None,
            next_seq: 0,
        }
    }

    pub fn stock_id(&self) -> &StockId {
        &self.stock_id
    }

    pub fn best_bid(&self) -> Option<Money> {
        self.bids.keys().next().map(|r| r.0)
    }

    pub fn best_ask(&self) -> Option<Money> {
        self.asks.keys().next().copied()
    }

    pub fn last_price(&self) -> Option<Money> {
        self.last_price
    }

    pub(crate) fn set_last_price(&mut self, price: Money) {
        self.last_price = Some(price);
    }

    /// Continue the fill counter from a previous book (same stock, earlier day).
    pub fn with_seq_start(mut self, seq: u64) -> Self {
        self.next_seq = seq;
        self
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub(crate) fn take_seq(&mut self) -> u64 {
        let s = self.next_seq;
        self.next_seq += 1;
        s
    }

    /// Remaining size resting at each price on `side`, best first.
    pub fn depth(&self, side: Side) -> Vec<(Money, u64)> {
        let level = |q: &VecDeque<Resting>| q.iter().map(|r| r.remaining).sum::<u64>();
        match side {
            Side::Buy => self.bids.iter().map(|(p, q)| (p.0, level(q))).collect(),
            Side::Sell => self.asks.iter().map(|(p, q)| (*p, level(q))).collect(),
        }
    }

    pub fn resting_size(&self, order_id: &OrderId) -> Option<u64> {
        let (side, price) = self.index.get(order_id)?;
        let queue = match side {
            Side::Buy => self.bids.get(&Reverse(*price)),
            Side::Sell => self.asks.get(price),
        }?;
        queue
            .iter()
            .find(|r| &r.party.order_id == order_id)
            .map(|r| r.remaining)
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty() && self.asks.is_empty()
    }

    /// Append a limit order at the back of its price level.
    pub(crate) fn rest(&mut self, side: Side, price: Money, resting: Resting) {
        self.index
            .insert(resting.party.order_id.clone(), (side, price));
        match side {
            Side::Buy => self
                .bids
                .entry(Reverse(price))
                .or_default()
                .push_back(resting),
            Side::Sell => self.asks.entry(price).or_default().push_back(resting),
        }
    }

    fn cancel(&mut self, target: &OrderId) -> Option<u64> {
        let (side, price) = self.index.remove(target)?;
        let remove_from = |queue: &mut VecDeque<Resting>| {
            let pos = queue.iter().position(|r| &r.party.order_id == target)?;
            queue.remove(pos).map(|r| r.remaining)
        };
        match side {
            Side::Buy => {
                let queue = self.bids.get_mut(&Reverse(price))?;
                let removed = remove_from(queue);
                if queue.is_empty() {
                    self.bids.remove(&Reverse(price));
                }
                removed
            }
            Side::Sell => {
                let queue = self.asks.get_mut(&price)?;
                let removed = remove_from(queue);
                if queue.is_empty() {
                    self.asks.remove(&price);
                }
                removed
            }
        }
    }

    /// Execute an incoming order against the opposite side, best price
    /// first and FIFO within a level, while it remains marketable against
    /// `limit` (`None` = market order). Returns the unfilled remainder.
    fn sweep(
        &mut self,
        taker: &Party,
        side: Side,
        limit: Option<Money>,
        mut size: u64,
        time: Timestamp,
        fills: &mut Vec<Fill>,
    ) -> u64 {
        while size > 0 {
            let level_price = match side {
                Side::Buy => self.best_ask(),
                Side::Sell => self.best_bid(),
            };
            let Some(price) = level_price else { break };
            let marketable = match (side, limit) {
                (_, None) => true,
                (Side::Buy, Some(l)) => price <= l,
                (Side::Sell, Some(l)) => price >= l,
            };
            if !marketable {
                break;
            }
            let queue = match side {
                Side::Buy => self.asks.get_mut(&price),
                Side::Sell => self.bids.get_mut(&Reverse(price)),
            }
            .expect("best level exists");
            let mut executed = Vec::new();
            while size > 0 {
                let Some(maker) = queue.front_mut() else {
                    break;
                };
                let qty = size.min(maker.remaining);
                maker.remaining -= qty;
                size -= qty;
                executed.push((maker.party.clone(), qty));
                if maker.remaining == 0 {
                    let done = queue.pop_front().expect("front exists");
                    self.index.remove(&done.party.order_id);
                }
            }
            if queue.is_empty() {
                match side {
                    Side::Buy => self.asks.remove(&price),
                    Side::Sell => self.bids.remove(&Reverse(price)),
                };
            }
            for (maker, qty) in executed {
                let seq = self.take_seq();
                let (buyer, seller) = match side {
                    Side::Buy => (taker.clone(), maker),
                    Side::Sell => (maker, taker.clone()),
                };
                fills.push(Fill {
                    stock_id: self.stock_id.clone(),
                    price,
                    size: qty,
                    time,
                    seq,
                    buyer,
                    seller,
                    maker_side: side.opposite(),
                });
            }
            self.last_price = Some(price);
        }
        size
    }
}

/// Submit one continuous-phase order, stamping fills with `time`.
///
/// Marketable volume executes at resting prices in price-time priority;
/// the limit remainder rests, a market remainder is cancelled. Cancels of
/// unknown or already-filled orders are no-ops with a note.
pub fn submit_at(book: &mut OrderBook, ev: &OrderEvent, time: Timestamp) -> Submission {
    let party = Party {
        order_id: ev.order_id.clone(),
        trader_id: ev.trader_id.clone(),
        class: ev.investor_class,
    };
    let mut fills = Vec::new();
    let note = match &ev.kind {
        OrderKind::Cancel { target } => match book.cancel(target) {
            Some(_) => None,
            None => Some(format!("cancel of unknown or filled order `{target}`")),
        },
        OrderKind::Market { size } => {
            let has_liquidity = match ev.side {
                Side::Buy => book.best_ask().is_some(),
                Side::Sell => book.best_bid().is_some(),
            };
            if !has_liquidity {
                Some(format!(
                    "market order `{}` rejected: empty opposite book",
                    ev.order_id
                ))
            } else {
                let left = book.sweep(&party, ev.side, None, *size, time, &mut fills);
                (left > 0).then(|| {
                    format!(
                        "market order `{}`: {left} unfilled shares cancelled",
                        ev.order_id
                    )
                })
            }
        }
        OrderKind::Limit { price, size } => {
            let left = book.sweep(&party, ev.side, Some(*price), *size, time, &mut fills);
            if left > 0 {
                book.rest(
                    ev.side,
                    *price,
                    Resting {
                        party,
                        remaining: left,
                    },
                );
            }
            None
        }
    };
    Submission { fills, note }
}

/// Submit one continuous-phase order; fills carry the order's timestamp.
pub fn submit_to_book(book: &mut OrderBook, ev: &OrderEvent) -> Submission {
    submit_at(book, ev, ev.timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ts(sec: u32) -> Timestamp {
        Timestamp::from_hms(NaiveDate::from_ymd_opt(2003, 3, 3).unwrap(), 10, 0, sec, 0)
    }

    fn order(id: &str, side: Side, kind: OrderKind, sec: u32) -> OrderEvent {
        OrderEvent {
            trader_id: TraderId::new(format!("T-{id}")),
            investor_class: InvestorClass::Individual,
            stock_id: "S1".into(),
            side,
            kind,
            timestamp: ts(sec),
            order_id: id.into(),
        }
    }

    fn limit(id: &str, side: Side, price: &str, size: u64, sec: u32) -> OrderEvent {
        order(
            id,
            side,
            OrderKind::Limit {
                price: price.parse().unwrap(),
                size,
            },
            sec,
        )
    }

    #[test]
    fn single_level_cross_at_maker_price() {
        let mut book = OrderBook::new("S1".into());
        submit_to_book(&mut book, &limit("A1", Side::Sell, "10.00", 100, 0));
        let sub = submit_to_book(&mut book, &limit("B1", Side::Buy, "10.05", 150, 1));
        assert_eq!(sub.fills.len(), 1);
        let f = &sub.fills[0];
        assert_eq!((f.price.to_string(), f.size), ("10.00".to_string(), 100));
        assert_eq!(f.time, ts(1));
        assert_eq!(f.maker_side, Side::Sell);
        assert_eq!(book.best_bid(), Some("10.05".parse().unwrap()));
        assert_eq!(book.resting_size(&"B1".into()), Some(50));
        assert_eq!(book.best_ask(), None);
    }

    #[test]
    fn time_priority_within_level() {
        let mut book = OrderBook::new("S1".into());
        submit_to_book(&mut book, &limit("A1", Side::Sell, "10.00", 50, 0));
        submit_to_book(&mut book, &limit("A2", Side::Sell, "10.00", 50, 1));
        let sub = submit_to_book(
            &mut book,
            &order("M", Side::Buy, OrderKind::Market { size: 60 }, 2),
        );
        let got: Vec<_> = sub
            .fills
            .iter()
            .map(|f| (f.seller.order_id.to_string(), f.size))
            .collect();
        assert_eq!(got, [("A1".to_string(), 50), ("A2".to_string(), 10)]);
        assert_eq!(book.resting_size(&"A2".into()), Some(40));
        assert_eq!(book.resting_size(&"A1".into()), None);
    }

    #[test]
    fn non_marketable_order_rests() {
        let mut book = OrderBook::new("S1".into());
        submit_to_book(&mut book, &limit("B1", Side::Buy, "10.00", 100, 0));
        let sub = submit_to_book(&mut book, &limit("A1", Side::Sell, "10.50", 100, 1));
        assert!(sub.fills.is_empty());
        assert_eq!(book.best_ask(), Some("10.50".parse().unwrap()));
        assert_eq!(book.best_bid(), Some("10.00".parse().unwrap()));
    }

    #[test]
    fn price_priority_across_levels() {
        let mut book = OrderBook::new("S1".into());
        submit_to_book(&mut book, &limit("A1", Side::Sell, "10.02", 100, 0));
        submit_to_book(&mut book, &limit("A2", Side::Sell, "10.01", 100, 1));
        let sub = submit_to_book(&mut book, &limit("B1", Side::Sell, "10.00", 10, 2));
        assert!(sub.fills.is_empty());
        let sub = submit_to_book(&mut book, &limit("B2", Side::Buy, "10.02", 150, 3));
        let got: Vec<_> = sub
            .fills
            .iter()
            .map(|f| (f.price.to_string(), f.size))
            .collect();
        assert_eq!(
            got,
            [
                ("10.00".to_string(), 10),
                ("10.01".to_string(), 100),
                ("10.02".to_string(), 40)
            ]
        );
        assert_eq!(book.last_price(), Some("10.02".parse().unwrap()));
    }

    #[test]
    fn market_order_against_empty_book_rejected() {
        let mut book = OrderBook::new("S1".into());
        let sub = submit_to_book(
            &mut book,
            &order("M", Side::Sell, OrderKind::Market { size: 10 }, 0),
        );
        assert!(sub.fills.is_empty());
        assert!(sub.note.unwrap().contains("rejected"));
        assert!(book.is_empty());
    }

    #[test]
    fn market_remainder_cancelled() {
        let mut book = OrderBook::new("S1".into());
        submit_to_book(&mut book, &limit("A1", Side::Sell, "10.00", 30, 0));
        let sub = submit_to_book(
            &mut book,
            &order("M", Side::Buy, OrderKind::Market { size: 100 }, 1),
        );
        assert_eq!(sub.fills.iter().map(|f| f.size).sum::<u64>(), 30);
        assert!(sub.note.unwrap().contains("70 unfilled"));
        assert!(book.is_empty());
    }

    #[test]
    fn cancel_removes_remaining_size() {
        let mut book = OrderBook::new("S1".into());
        submit_to_book(&mut book, &limit("B1", Side::Buy, "10.00", 100, 0));
        let sub = submit_to_book(
            &mut book,
            &order(
                "C1",
                Side::Buy,
                OrderKind::Cancel {
                    target: "B1".into(),
                },
                1,
            ),
        );
        assert!(sub.note.is_none());
        assert!(book.is_empty());
        let sub = submit_to_book(
            &mut book,
            &order(
                "C2",
                Side::Buy,
                OrderKind::Cancel {
                    target: "B1".into(),
                },
                2,
            ),
        );
        assert!(sub.note.unwrap().contains("unknown or filled"));
    }

    #[test]
    fn self_trade_is_flagged() {
        let mut book = OrderBook::new("S1".into());
        let mut a = limit("A1", Side::Sell, "10.00", 10, 0);
        let mut b = limit("B1", Side::Buy, "10.00", 10, 1);
        a.trader_id = "X".into();
        b.trader_id = "X".into();
        submit_to_book(&mut book, &a);
        let sub = submit_to_book(&mut book, &b);
        assert!(sub.fills[0].is_self_trade());
    }
}
