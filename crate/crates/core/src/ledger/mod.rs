//! Per-investor accounting: activity sequences, exact transaction costs,
//! earnings, portfolio return, trading frequency and holding time.

mod earnings;
mod fees;
mod holding;
mod performance;
mod sequence;

pub use earnings::{holdings_before, stock_earnings, LedgerPolicy, StockEarnings};
pub use fees::{transaction_cost, FeeSchedule, Rate, MAX_PROPORTIONAL};
pub use holding::{holding_time_fifo, HoldingTime};
pub use performance::{
    compute_ledger, evaluate_sequences, period_end_prices, portfolio_return, trading_frequency,
    write_performances, Evaluation, FeeConfig, InvestorActivity, InvestorPerformance, Label,
    LedgerContext, LedgerOutput, PERFORMANCE_HEADER,
};
pub use sequence::{
    aggregate_fills_to_entry, build_activity_sequence, entries_from_fills, ActivitySequence, Entry,
    RawActivity,
};
