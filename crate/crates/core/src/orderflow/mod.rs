//! Canonical order-flow data model, file parsing and the trading calendar.

mod calendar;
mod parse;
mod reference;
mod types;

pub use calendar::{session_phase, DayPhases, SessionPhase, TradingCalendar};
pub use parse::{
    parse_order_events, write_order_events, OrderSchema, ParseOptions, ParsedOrders, ORDER_HEADER,
};
pub use reference::{
    load_dividends, load_index_series, load_stock_meta, write_stock_meta, DividendEvent, StockMeta,
    META_HEADER,
};
pub use types::{
    format_time_of_day, parse_time_of_day, InvestorClass, Market, Money, OrderEvent, OrderId,
    OrderKind, ParseMoneyError, ParseTimestampError, Side, StockId, Timestamp, TraderId,
    CENTIS_PER_DAY,
};
