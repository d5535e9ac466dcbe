use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use rayon::prelude::*;

use super::auction::{CallAuction, ClearingChoice};
use super::book::{submit_at, Fill, OrderBook};
use crate::error::{Diagnostic, Error, Result};
use crate::orderflow::{
    DayPhases, Money, OrderEvent, SessionPhase, StockId, StockMeta, Timestamp, TradingCalendar,
};

/// Replay output for one stock on one day.
#[derive(Debug, Clone, Default)]
pub struct StockDayReplay {
    pub fills: Vec<Fill>,
    pub opening: Option<ClearingChoice>,
    pub diagnostics: Vec<Diagnostic>,
    /// Last traded price of the day, if anything traded.
    pub close: Option<Money>,
    /// Fill counter to continue from on the next day.
    pub next_seq: u64,
}

/// Incremental replay of one stock for one day.
///
/// Call-phase orders accumulate and clear at the call close; cooling-phase
/// orders queue until the continuous open; continuous-phase orders flow
/// through the book. Orders stamped in a closed phase are dropped. Events
/// must be pushed in time order.
#[derive(Debug)]
pub struct DayReplayer {
    stock_id: StockId,
    date: NaiveDate,
    phases: DayPhases,
    previous_close: Money,
    book: OrderBook,
    auction: CallAuction,
    cooling: Vec<OrderEvent>,
    opened: bool,
    out: StockDayReplay,
}

impl DayReplayer {
    pub fn new(
        stock_id: StockId,
        date: NaiveDate,
        phases: DayPhases,
        previous_close: Money,
        seq_start: u64,
    ) -> Self {
        DayReplayer {
            book: OrderBook::new(stock_id.clone()).with_seq_start(seq_start),
            stock_id,
            date,
            phases,
            previous_close,
            auction: CallAuction::new(),
            cooling: Vec::new(),
            opened: false,
            out: StockDayReplay::default(),
        }
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    /// Last traded price so far today, else the previous close.
    pub fn reference_price(&self) -> Money {
        self.book.last_price().unwrap_or(self.previous_close)
    }

    /// Fills produced so far.
    pub fn fills(&self) -> &[Fill] {
        &self.out.fills
    }

    fn diag(&self, msg: String) -> Diagnostic {
        Diagnostic::new(
            "matching",
            format!("{} {}: {msg}", self.stock_id, self.date),
        )
    }

    fn open_continuous(&mut self) {
        let call_close = Timestamp::new(self.date, self.phases.call_close);
        let continuous_open = Timestamp::new(self.date, self.phases.morning_open);
        let outcome = std::mem::take(&mut self.auction).clear(
            self.previous_close,
            call_close,
            &mut self.book,
        );
        self.out.opening = outcome.clearing;
        self.out.fills.extend(outcome.fills);
        for note in outcome.notes {
            let d = self.diag(note);
            self.out.diagnostics.push(d);
        }
        for ev in std::mem::take(&mut self.cooling) {
            let sub = submit_at(&mut self.book, &ev, continuous_open);
            self.out.fills.extend(sub.fills);
            if let Some(note) = sub.note {
                let d = self.diag(note);
                self.out.diagnostics.push(d);
            }
        }
        self.opened = true;
    }

    pub fn push(&mut self, ev: &OrderEvent) {
        match self.phases.phase_at(ev.timestamp.centis_of_day()) {
            SessionPhase::Call if !self.opened => {
                if let Some(note) = self.auction.submit(ev) {
                    let d = self.diag(note);
                    self.out.diagnostics.push(d);
                }
            }
            SessionPhase::Cooling if !self.opened => self.cooling.push(ev.clone()),
            SessionPhase::Continuous => {
                if !self.opened {
                    self.open_continuous();
                }
                let sub = submit_at(&mut self.book, ev, ev.timestamp);
                self.out.fills.extend(sub.fills);
                if let Some(note) = sub.note {
                    let d = self.diag(note);
                    self.out.diagnostics.push(d);
                }
            }
            phase => {
                let mut msg = format!("order `{}` at {} ", ev.order_id, ev.timestamp);
                let _ = write!(msg, "in {phase:?} phase dropped");
                let d = self.diag(msg);
                self.out.diagnostics.push(d);
            }
        }
    }

    pub fn finish(mut self) -> StockDayReplay {
        if !self.opened {
            self.open_continuous();
        }
        self.out.close = self.book.last_price();
        self.out.next_seq = self.book.next_seq();
        self.out
    }
}

/// Replay one stock's orders for one day.
pub fn replay_stock_day(
    stock_id: &StockId,
    date: NaiveDate,
    events: &[OrderEvent],
    phases: &DayPhases,
    previous_close: Money,
    seq_start: u64,
) -> StockDayReplay {
    let mut replayer = DayReplayer::new(stock_id.clone(), date, *phases, previous_close, seq_start);
    for ev in events {
        replayer.push(ev);
    }
    replayer.finish()
}

/// Merge fills from several stocks by (time, stock, sequence number).
pub fn merge_fills(mut fills: Vec<Fill>) -> Vec<Fill> {
    fills.sort_by(|a, b| {
        a.time
            .cmp(&b.time)
            .then_with(|| a.stock_id.cmp(&b.stock_id))
            .then(a.seq.cmp(&b.seq))
    });
    fills
}

/// Replay every stock for a single trading day.
///
/// `previous_close` supplies the call-auction reference price per stock;
/// stocks absent from it fall back to the stock's first limit price.
pub fn replay_day(
    events: &[OrderEvent],
    cal: &TradingCalendar,
    previous_close: &BTreeMap<StockId, Money>,
) -> Result<(Vec<Fill>, Vec<Diagnostic>)> {
    let Some(first) = events.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let date = first.timestamp.date();
    if let Some(ev) = events.iter().find(|e| e.timestamp.date() != date) {
        return Err(Error::Config(format!(
            "replay_day given events from {} and {}",
            date,
            ev.timestamp.date()
        )));
    }
    let phases = cal.phases(date)?;
    let mut by_stock: BTreeMap<&StockId, Vec<OrderEvent>> = BTreeMap::new();
    for ev in events {
        by_stock.entry(&ev.stock_id).or_default().push(ev.clone());
    }
    let mut fills = Vec::new();
    let mut diagnostics = Vec::new();
    for (stock, evs) in by_stock {
        let reference = previous_close
            .get(stock)
            .copied()
            .or_else(|| evs.iter().find_map(|e| e.kind.price()))
            .unwrap_or(Money::ZERO);
        let r = replay_stock_day(stock, date, &evs, phases, reference, 0);
        fills.extend(r.fills);
        diagnostics.extend(r.diagnostics);
    }
    Ok((merge_fills(fills), diagnostics))
}

/// Fills and derived price history for a whole period.
#[derive(Debug, Clone, Default)]
pub struct ReplayOutput {
    pub fills: Vec<Fill>,
    pub diagnostics: Vec<Diagnostic>,
    /// Last traded price per stock per day (days without trades omitted).
    pub daily_close: BTreeMap<StockId, BTreeMap<NaiveDate, Money>>,
    pub openings: BTreeMap<StockId, BTreeMap<NaiveDate, ClearingChoice>>,
}

/// Replay a full period. Stocks replay independently and in parallel;
/// within a stock, days run in calendar order so each day's call auction
/// sees the previous close.
pub fn replay_period(
    events: &[OrderEvent],
    cal: &TradingCalendar,
    metas: &BTreeMap<StockId, StockMeta>,
) -> Result<ReplayOutput> {
    let mut by_stock: BTreeMap<&StockId, BTreeMap<NaiveDate, Vec<OrderEvent>>> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for ev in events {
        let date = ev.timestamp.date();
        if !cal.is_trading_day(date) {
            diagnostics.push(Diagnostic::new(
                "matching",
                format!("order `{}` on non-trading day {date} dropped", ev.order_id),
            ));
            continue;
        }
        by_stock
            .entry(&ev.stock_id)
            .or_default()
            .entry(date)
            .or_default()
            .push(ev.clone());
    }
    for stock in by_stock.keys() {
        if !metas.contains_key(*stock) {
            return Err(Error::Config(format!("no stock metadata for `{stock}`")));
        }
    }

    struct StockRun {
        stock: StockId,
        fills: Vec<Fill>,
        diagnostics: Vec<Diagnostic>,
        closes: BTreeMap<NaiveDate, Money>,
        openings: BTreeMap<NaiveDate, ClearingChoice>,
    }

    let runs: Vec<StockRun> = by_stock
        .into_par_iter()
        .map(|(stock, days)| {
            let meta = &metas[stock];
            let mut run = StockRun {
                stock: stock.clone(),
                fills: Vec::new(),
                diagnostics: Vec::new(),
                closes: BTreeMap::new(),
                openings: BTreeMap::new(),
            };
            let mut prev_close = meta.reference_price;
            let mut seq = 0;
            for (date, phases) in cal.days() {
                let reference = meta
                    .previous_close
                    .get(&date)
                    .copied()
                    .unwrap_or(prev_close);
                let Some(evs) = days.get(&date) else { continue };
                let r = replay_stock_day(stock, date, evs, phases, reference, seq);
                seq = r.next_seq;
                if let Some(c) = r.close {
                    run.closes.insert(date, c);
                    prev_close = c;
                } else {
                    prev_close = reference;
                }
                if let Some(o) = r.opening {
                    run.openings.insert(date, o);
                }
                run.fills.extend(r.fills);
                run.diagnostics.extend(r.diagnostics);
            }
            run
        })
        .collect();

    let mut out = ReplayOutput {
        diagnostics,
        ..ReplayOutput::default()
    };
    let mut fills = Vec::new();
    for run in runs {
        fills.extend(run.fills);
        out.diagnostics.extend(run.diagnostics);
        out.daily_close.insert(run.stock.clone(), run.closes);
        out.openings.insert(run.stock, run.openings);
    }
    out.fills = merge_fills(fills);
    Ok(out)
}

pub const FILL_HEADER: &str = "stock,price,size,time,buyer,seller,maker_side";

/// Audit CSV of fills.
pub fn write_fills(fills: &[Fill]) -> String {
    let mut out = String::with_capacity(64 * (fills.len() + 1));
    out.push_str(FILL_HEADER);
    out.push('\n');
    for f in fills {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.stock_id,
            f.price,
            f.size,
            f.time,
            f.buyer.trader_id,
            f.seller.trader_id,
            f.maker_side
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orderflow::{InvestorClass, Market, OrderKind, Side};

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2003, 3, 3).unwrap()
    }

    fn ev(id: &str, side: Side, price: &str, size: u64, h: u32, m: u32) -> OrderEvent {
        OrderEvent {
            trader_id: format!("T{id}").as_str().into(),
            investor_class: InvestorClass::Individual,
            stock_id: "S1".into(),
            side,
            kind: OrderKind::Limit {
                price: price.parse().unwrap(),
                size,
            },
            timestamp: Timestamp::from_hms(day(), h, m, 0, 0),
            order_id: id.into(),
        }
    }

    fn cal() -> TradingCalendar {
        TradingCalendar::weekdays(day(), 1)
    }

    #[test]
    fn empty_day() {
        let (fills, diags) = replay_day(&[], &cal(), &BTreeMap::new()).unwrap();
        assert!(fills.is_empty() && diags.is_empty());
    }

    #[test]
    fn call_auction_then_nothing() {
        let events = [
            ev("B", Side::Buy, "10.0", 100, 9, 16),
            ev("S", Side::Sell, "10.0", 100, 9, 17),
        ];
        let (fills, _) = replay_day(&events, &cal(), &BTreeMap::new()).unwrap();
        assert_eq!(fills.len(), 1);
        assert_eq!(fills[0].time, Timestamp::from_hms(day(), 9, 25, 0, 0));
        assert_eq!(fills[0].size, 100);
    }

    #[test]
    fn cooling_orders_queue_to_open() {
        let events = [
            ev("B", Side::Buy, "10.0", 100, 9, 20),
            ev("S", Side::Sell, "10.0", 100, 9, 27),
            ev("S2", Side::Sell, "9.0", 10, 9, 45),
        ];
        let (fills, _) = replay_day(&events, &cal(), &BTreeMap::new()).unwrap();
        // the queued sell executes at the continuous open, before the 9:45 order
        assert_eq!(fills.len(), 1);
        assert_eq!(fills[0].time, Timestamp::from_hms(day(), 9, 30, 0, 0));
        assert_eq!(fills[0].seller.order_id.as_str(), "S");
    }

    #[test]
    fn closed_phase_orders_dropped() {
        let events = [
            ev("B", Side::Buy, "10.0", 100, 12, 0),
            ev("S", Side::Sell, "10.0", 100, 12, 1),
        ];
        let (fills, diags) = replay_day(&events, &cal(), &BTreeMap::new()).unwrap();
        assert!(fills.is_empty());
        assert_eq!(diags.len(), 2);
        assert!(diags[0].message.contains("Closed"));
    }

    #[test]
    fn period_replay_carries_previous_close() {
        let cal = TradingCalendar::weekdays(day(), 2);
        let d2 = cal.last_day().unwrap();
        let mut meta = StockMeta::new("S1", Market::A, "10.00".parse().unwrap());
        meta.period_end_price = None;
        let metas = BTreeMap::from([(StockId::new("S1"), meta)]);
        let later = |id: &str, side, price: &str, h, m| {
            let mut e = ev(id, side, price, 100, h, m);
            e.timestamp = Timestamp::from_hms(d2, h, m, 0, 0);
            e
        };
        let events = vec![
            ev("A", Side::Buy, "10.5", 100, 10, 0),
            ev("B", Side::Sell, "10.5", 100, 10, 1),
            later("C", Side::Buy, "10.8", 9, 16),
            later("D", Side::Sell, "10.2", 9, 17),
        ];
        let out = replay_period(&events, &cal, &metas).unwrap();
        assert_eq!(out.fills.len(), 2);
        assert_eq!(
            out.daily_close[&StockId::new("S1")][&day()],
            "10.5".parse().unwrap()
        );
        // equidistant from the 10.5 close, so the lower price wins
        assert_eq!(out.fills[1].price, "10.2".parse().unwrap());
        assert_eq!(out.fills[1].seq, 1);
    }

    #[test]
    fn missing_meta_is_an_error() {
        let events = [ev("B", Side::Buy, "10.0", 100, 10, 0)];
        assert!(replay_period(&events, &cal(), &BTreeMap::new()).is_err());
    }
}
