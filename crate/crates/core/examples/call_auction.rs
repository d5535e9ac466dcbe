// Opening call auction: clearing-price choice and allocation.

use spectroscopy::matching::{CallAuction, OrderBook};
use spectroscopy::orderflow::{
    InvestorClass, Money, OrderEvent, OrderId, OrderKind, Side, StockId, Timestamp, TraderId,
};

fn order(n: u32, side: Side, price: &str, size: u64) -> OrderEvent {
    let date = chrono::NaiveDate::from_ymd_opt(2003, 3, 3).unwrap();
    OrderEvent {
        trader_id: TraderId::new(format!("T{n}")),
        investor_class: InvestorClass::Individual,
        stock_id: StockId::new("000001"),
        side,
        kind: OrderKind::Limit {
            price: price.parse().unwrap(),
            size,
        },
        timestamp: Timestamp::from_hms(date, 9, 16, n, 0),
        order_id: OrderId::new(format!("O{n}")),
    }
}

fn main() {
    let mut auction = CallAuction::new();
    for ev in [
        order(1, Side::Buy, "10.10", 100),
        order(2, Side::Buy, "10.00", 100),
        order(3, Side::Sell, "9.90", 100),
        order(4, Side::Sell, "10.05", 100),
    ] {
        auction.submit(&ev);
    }
    // Every candidate executes 100 shares with imbalance 100, so the price
    // closest to the previous close wins.
    let previous_close: Money = "10.00".parse().unwrap();
    let date = chrono::NaiveDate::from_ymd_opt(2003, 3, 3).unwrap();
    let mut book = OrderBook::new(StockId::new("000001"));
    let outcome = auction.clear(
        previous_close,
        Timestamp::from_hms(date, 9, 25, 0, 0),
        &mut book,
    );

    let c = outcome.clearing.expect("orders cross");
    println!(
        "clearing price {} volume {} imbalance {}",
        c.price, c.volume, c.imbalance
    );
    for f in &outcome.fills {
        println!(
            "  {} buys {} from {} at {}",
            f.buyer.trader_id, f.size, f.seller.trader_id, f.price
        );
    }
    println!(
        "book after the open: best bid {:?}, best ask {:?}",
        book.best_bid().map(|p| p.to_string()),
        book.best_ask().map(|p| p.to_string())
    );
}
