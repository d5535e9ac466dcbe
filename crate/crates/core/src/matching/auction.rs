use std::cmp::Ordering;

use super::book::{Fill, OrderBook, Party, Resting};
use crate::orderflow::{Money, OrderEvent, OrderKind, Side, Timestamp};

/// An order collected during the call phase.
#[derive(Debug, Clone)]
pub struct CallOrder {
    pub party: Party,
    pub side: Side,
    /// `None` for market orders, which execute at any clearing price.
    pub limit: Option<Money>,
    pub size: u64,
}

impl CallOrder {
    fn accepts(&self, price: Money) -> bool {
        match (self.side, self.limit) {
            (_, None) => true,
            (Side::Buy, Some(l)) => l >= price,
            (Side::Sell, Some(l)) => l <= price,
        }
    }
}

/// The selected clearing price and the quantities that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClearingChoice {
    pub price: Money,
    pub volume: u64,
    pub imbalance: u64,
}

/// Buy and sell volume willing to trade at `price`.
pub fn demand_supply_at(orders: &[CallOrder], price: Money) -> (u64, u64) {
    orders
        .iter()
        .filter(|o| o.accepts(price))
        .fold((0, 0), |(b, s), o| match o.side {
            Side::Buy => (b + o.size, s),
            Side::Sell => (b, s + o.size),
        })
}

/// Choose the opening price among submitted limit prices: maximum
/// executable volume, then minimum imbalance, then nearest to the previous
/// close, then the lower price. `None` when nothing crosses.
pub fn select_clearing_price(
    orders: &[CallOrder],
    previous_close: Money,
) -> Option<ClearingChoice> {
    let mut candidates: Vec<Money> = orders.iter().filter_map(|o| o.limit).collect();
    candidates.sort_unstable();
    candidates.dedup();

    let distance = |p: Money| (p - previous_close).abs();
    candidates
        .into_iter()
        .map(|price| {
            let (buy, sell) = demand_supply_at(orders, price);
            ClearingChoice {
                price,
                volume: buy.min(sell),
                imbalance: buy.abs_diff(sell),
            }
        })
        .filter(|c| c.volume > 0)
        .min_by(|a, b| {
            b.volume
                .cmp(&a.volume)
                .then(a.imbalance.cmp(&b.imbalance))
                .then(distance(a.price).cmp(&distance(b.price)))
                .then(a.price.cmp(&b.price))
        })
}

/// Priority order for allocation at the clearing price: market orders
/// first, then better limit price, then arrival.
fn priority(side: Side) -> impl Fn(&(usize, &CallOrder), &(usize, &CallOrder)) -> Ordering {
    move |(ia, a), (ib, b)| {
        let by_price = match (a.limit, b.limit) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(pa), Some(pb)) => match side {
                Side::Buy => pb.cmp(&pa),
                Side::Sell => pa.cmp(&pb),
            },
        };
        by_price.then(ia.cmp(ib))
    }
}

#[derive(Debug, Clone, Default)]
pub struct AuctionOutcome {
    pub clearing: Option<ClearingChoice>,
    pub fills: Vec<Fill>,
    pub notes: Vec<String>,
}

/// Orders accumulated, unexecuted, during the opening call.
#[derive(Debug, Clone, Default)]
pub struct CallAuction {
    orders: Vec<CallOrder>,
}

impl CallAuction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn orders(&self) -> &[CallOrder] {
        &self.orders
    }

    /// Collect a call-phase order. Cancels withdraw a pending order and
    /// return a note when the target is unknown.
    pub fn submit(&mut self, ev: &OrderEvent) -> Option<String> {
        let party = Party {
            order_id: ev.order_id.clone(),
            trader_id: ev.trader_id.clone(),
            class: ev.investor_class,
        };
        let (limit, size) = match &ev.kind {
            OrderKind::Limit { price, size } => (Some(*price), *size),
            OrderKind::Market { size } => (None, *size),
            OrderKind::Cancel { target } => {
                return match self.orders.iter().position(|o| &o.party.order_id == target) {
                    Some(pos) => {
                        self.orders.remove(pos);
                        None
                    }
                    None => Some(format!("cancel of unknown order `{target}` during call")),
                };
            }
        };
        self.orders.push(CallOrder {
            party,
            side: ev.side,
            limit,
            size,
        });
        None
    }

    /// Clear at the selected price, stamping fills with `time`. Residual
    /// limit volume seeds `book` in arrival order; residual market volume is
    /// cancelled.
    pub fn clear(
        self,
        previous_close: Money,
        time: Timestamp,
        book: &mut OrderBook,
    ) -> AuctionOutcome {
        let mut outcome = AuctionOutcome {
            clearing: select_clearing_price(&self.orders, previous_close),
            ..AuctionOutcome::default()
        };
        let mut remaining: Vec<u64> = self.orders.iter().map(|o| o.size).collect();

        if let Some(choice) = outcome.clearing {
            let queue = |side: Side| {
                let mut q: Vec<(usize, &CallOrder)> = self
                    .orders
                    .iter()
                    .enumerate()
                    .filter(|(_, o)| o.side == side && o.accepts(choice.price))
                    .collect();
                q.sort_by(priority(side));
                q.into_iter().map(|(i, _)| i).collect::<Vec<_>>()
            };
            let buys = queue(Side::Buy);
            let sells = queue(Side::Sell);
            let (mut bi, mut si) = (0, 0);
            let mut left = choice.volume;
            while left > 0 {
                let (b, s) = (buys[bi], sells[si]);
                let qty = left.min(remaining[b]).min(remaining[s]);
                remaining[b] -= qty;
                remaining[s] -= qty;
                left -= qty;
                let maker_side = if b < s { Side::Buy } else { Side::Sell };
                outcome.fills.push(Fill {
                    stock_id: book.stock_id().clone(),
                    price: choice.price,
                    size: qty,
                    time,
                    seq: book.take_seq(),
                    buyer: self.orders[b].party.clone(),
                    seller: self.orders[s].party.clone(),
                    maker_side,
                });
                if remaining[b] == 0 {
                    bi += 1;
                }
                if remaining[s] == 0 {
                    si += 1;
                }
            }
            book.set_last_price(choice.price);
        }

        for (order, left) in self.orders.into_iter().zip(remaining) {
            if left == 0 {
                continue;
            }
            match order.limit {
                Some(price) => book.rest(
                    order.side,
                    price,
                    Resting {
                        party: order.party,
                        remaining: left,
                    },
                ),
                None => outcome.notes.push(format!(
                    "call-auction market order `{}`: {left} unfilled shares cancelled",
                    order.party.order_id
                )),
            }
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orderflow::InvestorClass;

    fn call(id: usize, side: Side, price: &str, size: u64) -> CallOrder {
        CallOrder {
            party: Party {
                order_id: format!("O{id}").as_str().into(),
                trader_id: format!("T{id}").as_str().into(),
                class: InvestorClass::Individual,
            },
            side,
            limit: Some(price.parse().unwrap()),
            size,
        }
    }

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    #[test]
    fn single_crossing_price() {
        let orders = [
            call(0, Side::Buy, "10.0", 100),
            call(1, Side::Sell, "10.0", 100),
        ];
        let c = select_clearing_price(&orders, m("9.5")).unwrap();
        assert_eq!((c.price, c.volume, c.imbalance), (m("10.0"), 100, 0));
    }

    #[test]
    fn proximity_tie_break() {
        // Brute force over {9.9, 10.0, 10.05, 10.1}: volume 100 and
        // imbalance 100 everywhere, so the previous close decides.
        let orders = [
            call(0, Side::Buy, "10.1", 100),
            call(1, Side::Buy, "10.0", 100),
            call(2, Side::Sell, "9.9", 100),
            call(3, Side::Sell, "10.05", 100),
        ];
        for p in ["9.9", "10.0", "10.05", "10.1"] {
            let (b, s) = demand_supply_at(&orders, m(p));
            assert_eq!((b.min(s), b.abs_diff(s)), (100, 100), "at {p}");
        }
        let c = select_clearing_price(&orders, m("10.0")).unwrap();
        assert_eq!((c.price, c.volume), (m("10.0"), 100));
    }

    #[test]
    fn lower_price_wins_equal_distance() {
        let orders = [
            call(0, Side::Buy, "10.2", 100),
            call(1, Side::Sell, "9.8", 100),
        ];
        let c = select_clearing_price(&orders, m("10.0")).unwrap();
        assert_eq!(c.price, m("9.8"));
    }

    #[test]
    fn no_cross_no_fills() {
        let orders = [
            call(0, Side::Buy, "9.0", 100),
            call(1, Side::Sell, "10.0", 100),
        ];
        assert!(select_clearing_price(&orders, m("9.5")).is_none());
        let mut auction = CallAuction::new();
        auction.orders = orders.to_vec();
        let mut book = OrderBook::new("S1".into());
        let out = auction.clear(m("9.5"), Timestamp::from_raw(0), &mut book);
        assert!(out.fills.is_empty());
        assert_eq!(book.best_bid(), Some(m("9.0")));
        assert_eq!(book.best_ask(), Some(m("10.0")));
    }

    #[test]
    fn allocation_in_price_time_priority_and_residual_seeds_book() {
        let mut auction = CallAuction::new();
        auction.orders = vec![
            call(0, Side::Buy, "10.0", 100),
            call(1, Side::Buy, "10.2", 100),
            call(2, Side::Buy, "10.0", 100),
            call(3, Side::Sell, "9.9", 150),
        ];
        let mut book = OrderBook::new("S1".into());
        let out = auction.clear(m("10.0"), Timestamp::from_raw(0), &mut book);
        let c = out.clearing.unwrap();
        assert_eq!(c.volume, 150);
        let got: Vec<_> = out
            .fills
            .iter()
            .map(|f| (f.buyer.order_id.to_string(), f.size, f.price))
            .collect();
        assert_eq!(
            got,
            [
                ("O1".to_string(), 100, c.price),
                ("O0".to_string(), 50, c.price)
            ]
        );
        assert_eq!(book.resting_size(&"O0".into()), Some(50));
        assert_eq!(book.resting_size(&"O2".into()), Some(100));
        assert_eq!(book.best_ask(), None);
        assert_eq!(book.last_price(), Some(c.price));
    }
}
