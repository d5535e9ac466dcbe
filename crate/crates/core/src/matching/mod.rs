//! Execution reconstruction: a price-time priority book for continuous
//! trading and a volume-maximizing opening call auction.

mod auction;
mod book;
mod replay;

pub use auction::{
    demand_supply_at, select_clearing_price, AuctionOutcome, CallAuction, CallOrder, ClearingChoice,
};
pub use book::{submit_at, submit_to_book, Fill, OrderBook, Party, Submission};
pub use replay::{
    merge_fills, replay_day, replay_period, replay_stock_day, write_fills, DayReplayer,
    ReplayOutput, StockDayReplay, FILL_HEADER,
};
