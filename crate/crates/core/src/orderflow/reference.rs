//! Reference data that accompanies the order flow: cash dividends, stock
//! metadata and benchmark index levels.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::NaiveDate;

use super::types::{Market, Money, StockId};
use crate::error::{Diagnostic, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DividendEvent {
    pub stock_id: StockId,
    pub ex_date: NaiveDate,
    pub cash_per_share: Money,
}

fn reader<R: Read>(source: R, has_headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(has_headers)
        .flexible(true)
        .from_reader(source)
}

fn parse_date(raw: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map_err(|_| Error::record(line, format!("bad date `{raw}`")))
}

/// Load `stock,ex_date,cash_per_share` rows. A header row is optional.
///
/// Rows naming a stock outside `known_stocks` are kept with a warning.
pub fn load_dividends<R: Read>(
    source: R,
    known_stocks: Option<&BTreeSet<StockId>>,
) -> Result<(Vec<DividendEvent>, Vec<Diagnostic>)> {
    let mut rdr = reader(source, false);
    let mut events = Vec::new();
    let mut diagnostics = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |i| record.get(i).unwrap_or("");
        if line == 1 && get(0) == "stock" {
            continue;
        }
        if record.len() < 3 {
            return Err(Error::record(line, "expected stock,ex_date,cash_per_share"));
        }
        let stock_id = StockId::new(get(0));
        let ex_date = parse_date(get(1), line)?;
        let cash_per_share: Money = get(2)
            .parse()
            .map_err(|e| Error::record(line, format!("cash_per_share: {e}")))?;
        if cash_per_share < Money::ZERO {
            return Err(Error::record(line, "negative dividend"));
        }
        if let Some(known) = known_stocks {
            if !known.contains(&stock_id) {
                diagnostics.push(Diagnostic::at_line(
                    "orderflow",
                    line,
                    format!("dividend for unknown stock `{stock_id}`"),
                ));
            }
        }
        events.push(DividendEvent {
            stock_id,
            ex_date,
            cash_per_share,
        });
    }
    events.sort();
    if let Some(w) = events
        .windows(2)
        .find(|w| w[0].stock_id == w[1].stock_id && w[0].ex_date == w[1].ex_date)
    {
        return Err(Error::Config(format!(
            "duplicate dividend for {} on {}",
            w[0].stock_id, w[0].ex_date
        )));
    }
    Ok((events, diagnostics))
}

/// Static per-stock data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StockMeta {
    pub stock_id: StockId,
    pub market: Market,
    /// Closing price before the first trading day of the period.
    pub reference_price: Money,
    /// Explicit per-day previous closes; days absent here fall back to the
    /// prior day's last trade.
    pub previous_close: BTreeMap<NaiveDate, Money>,
    /// Valuation price for the period-end close-out. When absent the last
    /// traded price of the period is used.
    pub period_end_price: Option<Money>,
}

impl StockMeta {
    pub fn new(stock_id: impl Into<StockId>, market: Market, reference_price: Money) -> Self {
        StockMeta {
            stock_id: stock_id.into(),
            market,
            reference_price,
            previous_close: BTreeMap::new(),
            period_end_price: None,
        }
    }
}

pub const META_HEADER: &str = "stock,market,reference_price,period_end_price";

/// Load stock metadata from `stock,market,reference_price,period_end_price`
/// (the last column may be blank).
pub fn load_stock_meta<R: Read>(source: R) -> Result<BTreeMap<StockId, StockMeta>> {
    let mut rdr = reader(source, true);
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |i| record.get(i).unwrap_or("");
        let stock_id = StockId::new(get(0));
        if stock_id.as_str().is_empty() {
            return Err(Error::record(line, "missing stock"));
        }
        let market: Market = get(1).parse().map_err(|e: String| Error::record(line, e))?;
        let price = |raw: &str, what: &str| -> Result<Money> {
            let p: Money = raw
                .parse()
                .map_err(|e| Error::record(line, format!("{what}: {e}")))?;
            if !p.is_positive() {
                return Err(Error::record(line, format!("{what} must be positive")));
            }
            Ok(p)
        };
        let reference_price = price(get(2), "reference_price")?;
        let period_end_price = match get(3) {
            "" => None,
            raw => Some(price(raw, "period_end_price")?),
        };
        let meta = StockMeta {
            stock_id: stock_id.clone(),
            market,
            reference_price,
            previous_close: BTreeMap::new(),
            period_end_price,
        };
        if out.insert(stock_id.clone(), meta).is_some() {
            return Err(Error::record(line, format!("duplicate stock `{stock_id}`")));
        }
    }
    Ok(out)
}

pub fn write_stock_meta<'a>(metas: impl IntoIterator<Item = &'a StockMeta>) -> String {
    let mut out = format!("{META_HEADER}\n");
    for m in metas {
        let end = m
            .period_end_price
            .map(|p| p.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            m.stock_id, m.market, m.reference_price, end
        ));
    }
    out
}

/// Daily benchmark index levels keyed by market: `date,market,level`.
pub fn load_index_series<R: Read>(source: R) -> Result<BTreeMap<Market, BTreeMap<NaiveDate, f64>>> {
    let mut rdr = reader(source, true);
    let mut out: BTreeMap<Market, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |i| record.get(i).unwrap_or("");
        let date = parse_date(get(0), line)?;
        let market: Market = get(1).parse().map_err(|e: String| Error::record(line, e))?;
        let level: f64 = get(2)
            .parse()
            .map_err(|_| Error::record(line, format!("non-numeric level `{}`", get(2))))?;
        if !(level.is_finite() && level > 0.0) {
            return Err(Error::record(line, "index level must be positive"));
        }
        out.entry(market).or_default().insert(date, level);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dividend_row_maps_directly() {
        let (events, diags) = load_dividends("S1,2003-06-10,0.12\n".as_bytes(), None).unwrap();
        assert!(diags.is_empty());
        assert_eq!(
            events,
            vec![DividendEvent {
                stock_id: "S1".into(),
                ex_date: NaiveDate::from_ymd_opt(2003, 6, 10).unwrap(),
                cash_per_share: Money::from_raw(1200),
            }]
        );
    }

    #[test]
    fn empty_dividend_file() {
        let (events, _) = load_dividends("".as_bytes(), None).unwrap();
        assert!(events.is_empty());
        let (events, _) =
            load_dividends("stock,ex_date,cash_per_share\n".as_bytes(), None).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn negative_dividend_rejected() {
        let err = load_dividends("S1,2003-06-10,-0.05\n".as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("negative dividend"));
    }

    #[test]
    fn dividends_sorted_and_deduplicated() {
        let src = "S2,2003-01-10,0.1\nS1,2003-06-10,0.2\nS1,2003-02-10,0.3\n";
        let (events, _) = load_dividends(src.as_bytes(), None).unwrap();
        let keys: Vec<_> = events
            .iter()
            .map(|e| (e.stock_id.to_string(), e.ex_date.to_string()))
            .collect();
        assert_eq!(keys[0], ("S1".to_string(), "2003-02-10".to_string()));
        assert_eq!(keys[2].0, "S2");

        let dup = "S1,2003-06-10,0.2\nS1,2003-06-10,0.3\n";
        assert!(load_dividends(dup.as_bytes(), None).is_err());
    }

    #[test]
    fn unknown_stock_dividend_kept_with_warning() {
        let known: BTreeSet<StockId> = [StockId::new("S1")].into();
        let (events, diags) =
            load_dividends("S9,2003-06-10,0.12\n".as_bytes(), Some(&known)).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("unknown stock"));
    }

    #[test]
    fn meta_roundtrip() {
        let src = "stock,market,reference_price,period_end_price\nS1,A,10.00,12.5\nS2,B,1.25,\n";
        let metas = load_stock_meta(src.as_bytes()).unwrap();
        assert_eq!(
            metas[&StockId::new("S1")].period_end_price,
            Some(Money::from_raw(125_000))
        );
        assert_eq!(metas[&StockId::new("S2")].market, Market::B);
        let again = load_stock_meta(write_stock_meta(metas.values()).as_bytes()).unwrap();
        assert_eq!(again, metas);
        assert!(load_stock_meta("stock,market,reference_price\nS1,A,0\n".as_bytes()).is_err());
    }

    #[test]
    fn index_series() {
        let src = "date,market,level\n2003-01-02,A,3000.5\n2003-01-03,A,3010\n2003-01-02,B,200\n";
        let idx = load_index_series(src.as_bytes()).unwrap();
        assert_eq!(idx[&Market::A].len(), 2);
        assert_eq!(idx[&Market::B].values().next(), Some(&200.0));
    }
}
