use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::earnings::{stock_earnings, LedgerPolicy, StockEarnings};
use super::fees::{FeeSchedule, Rate};
use super::holding::{holding_time_fifo, HoldingTime};
use super::sequence::{build_activity_sequence, entries_from_fills, ActivitySequence};
use crate::error::{Diagnostic, Error, Result};
use crate::matching::Fill;
use crate::orderflow::{
    DividendEvent, InvestorClass, Market, Money, StockId, StockMeta, Timestamp, TraderId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Winner,
    Loser,
    Flat,
}

impl Label {
    pub fn of(ret: f64) -> Label {
        if ret > 0.0 {
            Label::Winner
        } else if ret < 0.0 {
            Label::Loser
        } else {
            Label::Flat
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Winner => "winner",
            Label::Loser => "loser",
            Label::Flat => "flat",
        }
    }
}

/// Fee schedules per market with the brokerage rate optionally overridden
/// per investor class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeeConfig {
    pub a_share: FeeSchedule,
    pub b_share: FeeSchedule,
    pub class_brokerage: BTreeMap<InvestorClass, Rate>,
}

impl Default for FeeConfig {
    /// Statutory rates with a 0.15% brokerage.
    fn default() -> Self {
        let b = Rate::from_raw(150_000);
        FeeConfig {
            a_share: FeeSchedule::a_share(b).expect("default A-share schedule is valid"),
            b_share: FeeSchedule::b_share(b).expect("default B-share schedule is valid"),
            class_brokerage: BTreeMap::new(),
        }
    }
}

impl FeeConfig {
    pub fn zero() -> Self {
        FeeConfig {
            a_share: FeeSchedule::zero(),
            b_share: FeeSchedule::zero(),
            class_brokerage: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for market in Market::ALL {
            for class in InvestorClass::ALL {
                self.schedule(market, class)?;
            }
        }
        Ok(())
    }

    pub fn schedule(&self, market: Market, class: InvestorClass) -> Result<FeeSchedule> {
        let base = match market {
            Market::A => self.a_share,
            Market::B => self.b_share,
        };
        match self.class_brokerage.get(&class) {
            Some(rate) => base.with_brokerage(*rate),
            None => Ok(base),
        }
    }
}

/// `R = Σ E / (Σ B + Σ C^b)`; `None` when the denominator is zero.
pub fn portfolio_return(per_stock: &[StockEarnings]) -> Option<f64> {
    let total = per_stock
        .iter()
        .copied()
        .fold(StockEarnings::default(), |a, b| a + b);
    let invested = total.invested();
    invested
        .is_positive()
        .then(|| total.earnings().raw() as f64 / invested.raw() as f64)
}

/// Total entry count across sequences.
pub fn trading_frequency(sequences: &[ActivitySequence], policy: LedgerPolicy) -> u64 {
    sequences
        .iter()
        .flat_map(|s| &s.entries)
        .filter(|e| policy.count_virtual_in_j || !e.is_virtual)
        .count() as u64
}

/// All accounting outputs of one investor's set of sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub totals: StockEarnings,
    pub ret: Option<f64>,
    pub transactions: u64,
    pub holding: HoldingTime,
}

pub fn evaluate_sequences(
    sequences: &[ActivitySequence],
    schedule: &FeeSchedule,
    dividends: &[DividendEvent],
    policy: LedgerPolicy,
) -> Evaluation {
    let per_stock: Vec<StockEarnings> = sequences
        .iter()
        .map(|s| stock_earnings(s, schedule, dividends, policy))
        .collect();
    let mut holding = HoldingTime::default();
    for s in sequences {
        holding.merge(&holding_time_fifo(s));
    }
    Evaluation {
        totals: per_stock
            .iter()
            .copied()
            .fold(StockEarnings::default(), |a, b| a + b),
        ret: portfolio_return(&per_stock),
        transactions: trading_frequency(sequences, policy),
        holding,
    }
}

/// The sanitized activity of one investor in one market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvestorActivity {
    pub investor_id: TraderId,
    pub class: InvestorClass,
    pub market: Market,
    pub sequences: Vec<ActivitySequence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvestorPerformance {
    pub investor_id: TraderId,
    pub class: InvestorClass,
    pub market: Market,
    pub ret: f64,
    pub transactions: u64,
    pub holding_days: f64,
    pub label: Label,
    pub totals: StockEarnings,
}

#[derive(Debug, Clone, Default)]
pub struct LedgerOutput {
    pub activities: Vec<InvestorActivity>,
    pub performances: Vec<InvestorPerformance>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Valuation price per stock for the period-end close-out: the metadata
/// value when given, else the last traded price.
pub fn period_end_prices(
    metas: &BTreeMap<StockId, StockMeta>,
    daily_close: &BTreeMap<StockId, BTreeMap<chrono::NaiveDate, Money>>,
) -> BTreeMap<StockId, Money> {
    metas
        .values()
        .filter_map(|m| {
            let price = m.period_end_price.or_else(|| {
                daily_close
                    .get(&m.stock_id)
                    .and_then(|d| d.values().next_back().copied())
            })?;
            Some((m.stock_id.clone(), price))
        })
        .collect()
}

/// Inputs shared by every investor's accounting.
pub struct LedgerContext<'a> {
    pub metas: &'a BTreeMap<StockId, StockMeta>,
    pub period_end: Timestamp,
    pub period_end_prices: &'a BTreeMap<StockId, Money>,
    pub dividends: &'a [DividendEvent],
    pub fees: &'a FeeConfig,
    pub policy: LedgerPolicy,
}

/// Build sanitized sequences from fills and evaluate every investor.
///
/// Investors are keyed by (trader, market); an investor whose sequences
/// are all empty after sanitization is omitted.
pub fn compute_ledger(fills: &[Fill], ctx: &LedgerContext<'_>) -> Result<LedgerOutput> {
    let raw = entries_from_fills(fills);
    let mut grouped: BTreeMap<(TraderId, Market), Vec<ActivitySequence>> = BTreeMap::new();
    for ((trader, stock), entries) in &raw.entries {
        let meta = ctx
            .metas
            .get(stock)
            .ok_or_else(|| Error::Config(format!("no stock metadata for `{stock}`")))?;
        let seq = build_activity_sequence(
            trader.clone(),
            stock.clone(),
            entries,
            ctx.period_end_prices.get(stock).copied(),
            ctx.period_end,
        )?;
        if !seq.is_empty() {
            grouped
                .entry((trader.clone(), meta.market))
                .or_default()
                .push(seq);
        }
    }

    let results: Vec<(InvestorActivity, Result<InvestorPerformance, Diagnostic>)> = grouped
        .into_par_iter()
        .map(|((trader, market), sequences)| {
            let class = raw.classes[&trader];
            let activity = InvestorActivity {
                investor_id: trader,
                class,
                market,
                sequences,
            };
            let perf = evaluate_activity(&activity, ctx);
            (activity, perf)
        })
        .collect();

    let mut out = LedgerOutput::default();
    for (activity, perf) in results {
        match perf {
            Ok(p) => {
                out.performances.push(p);
                out.activities.push(activity);
            }
            Err(d) => out.diagnostics.push(d),
        }
    }
    Ok(out)
}

fn evaluate_activity(
    a: &InvestorActivity,
    ctx: &LedgerContext<'_>,
) -> Result<InvestorPerformance, Diagnostic> {
    let schedule = ctx
        .fees
        .schedule(a.market, a.class)
        .map_err(|e| Diagnostic::new("ledger", e.to_string()))?;
    let eval = evaluate_sequences(&a.sequences, &schedule, ctx.dividends, ctx.policy);
    let ret = eval.ret.ok_or_else(|| {
        Diagnostic::new(
            "ledger",
            format!(
                "investor `{}` ({}) never bought: excluded",
                a.investor_id, a.market
            ),
        )
    })?;
    Ok(InvestorPerformance {
        investor_id: a.investor_id.clone(),
        class: a.class,
        market: a.market,
        ret,
        transactions: eval.transactions,
        holding_days: eval.holding.mean_days().unwrap_or(0.0),
        label: Label::of(ret),
        totals: eval.totals,
    })
}

pub const PERFORMANCE_HEADER: &str = "investor,class,market,R,J,dt_days,label";

pub fn write_performances(perfs: &[InvestorPerformance]) -> String {
    let mut out = String::with_capacity(48 * (perfs.len() + 1));
    out.push_str(PERFORMANCE_HEADER);
    out.push('\n');
    for p in perfs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.investor_id,
            p.class,
            p.market,
            p.ret,
            p.transactions,
            p.holding_days,
            p.label.as_str()
        );
    }
    out
}
