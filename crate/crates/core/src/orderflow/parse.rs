use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;

use chrono::NaiveDate;

use super::types::{
    InvestorClass, Money, OrderEvent, OrderId, OrderKind, Side, StockId, Timestamp, TraderId,
};
use crate::error::{Diagnostic, Error, Result};

pub const ORDER_HEADER: &str =
    "trader_id,class,stock,side,kind,price,size,cancel_target,timestamp,order_id";

/// Column names for each order field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSchema {
    pub trader_id: String,
    pub class: String,
    pub stock: String,
    pub side: String,
    pub kind: String,
    pub price: String,
    pub size: String,
    pub cancel_target: String,
    pub timestamp: String,
    pub order_id: String,
}

impl Default for OrderSchema {
    fn default() -> Self {
        let c = |s: &str| s.to_string();
        OrderSchema {
            trader_id: c("trader_id"),
            class: c("class"),
            stock: c("stock"),
            side: c("side"),
            kind: c("kind"),
            price: c("price"),
            size: c("size"),
            cancel_target: c("cancel_target"),
            timestamp: c("timestamp"),
            order_id: c("order_id"),
        }
    }
}

struct Columns([usize; 10]);

impl OrderSchema {
    fn resolve(&self, headers: &csv::StringRecord) -> Result<Columns> {
        let names = [
            &self.trader_id,
            &self.class,
            &self.stock,
            &self.side,
            &self.kind,
            &self.price,
            &self.size,
            &self.cancel_target,
            &self.timestamp,
            &self.order_id,
        ];
        let mut idx = [0; 10];
        for (slot, name) in idx.iter_mut().zip(names) {
            *slot = headers
                .iter()
                .position(|h| h == name.as_str())
                .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        }
        Ok(Columns(idx))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept input that is not in timestamp order and stable-sort it.
    pub resort: bool,
}

/// Result of parsing an order file: the valid events plus one positioned
/// diagnostic per rejected record.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedOrders {
    pub events: Vec<OrderEvent>,
    pub rejected: Vec<Diagnostic>,
}

fn parse_record(
    record: &csv::StringRecord,
    cols: &Columns,
) -> std::result::Result<OrderEvent, String> {
    let field = |i: usize| record.get(cols.0[i]).unwrap_or("");
    let required = |i: usize, name: &str| {
        let v = field(i);
        if v.is_empty() {
            Err(format!("missing {name}"))
        } else {
            Ok(v)
        }
    };
    let trader_id = TraderId::new(required(0, "trader_id")?);
    let investor_class: InvestorClass = required(1, "class")?.parse()?;
    let stock_id = StockId::new(required(2, "stock")?);
    let side: Side = required(3, "side")?.parse()?;
    let kind_token = required(4, "kind")?.to_ascii_lowercase();
    let price_raw = field(5);
    let size_raw = field(6);
    let target_raw = field(7);
    let timestamp: Timestamp = required(8, "timestamp")?
        .parse()
        .map_err(|e: super::types::ParseTimestampError| e.to_string())?;
    let order_id = OrderId::new(required(9, "order_id")?);

    let size = || -> std::result::Result<u64, String> {
        if size_raw.is_empty() {
            return Err("missing size".into());
        }
        let v: i64 = size_raw
            .parse()
            .map_err(|_| format!("non-numeric size `{size_raw}`"))?;
        if v <= 0 {
            return Err("non-positive size".into());
        }
        Ok(v as u64)
    };
    let kind = match kind_token.as_str() {
        "limit" => {
            if price_raw.is_empty() {
                return Err("limit order without price".into());
            }
            let price: Money = price_raw.parse().map_err(|e| format!("price: {e}"))?;
            if !price.is_positive() {
                return Err("non-positive limit price".into());
            }
            OrderKind::Limit {
                price,
                size: size()?,
            }
        }
        "market" => {
            if !price_raw.is_empty() {
                return Err("market order carries a price".into());
            }
            OrderKind::Market { size: size()? }
        }
        "cancel" => {
            if target_raw.is_empty() {
                return Err("cancel without cancel_target".into());
            }
            OrderKind::Cancel {
                target: OrderId::new(target_raw),
            }
        }
        other => return Err(format!("unknown order kind `{other}`")),
    };
    Ok(OrderEvent {
        trader_id,
        investor_class,
        stock_id,
        side,
        kind,
        timestamp,
        order_id,
    })
}

/// Parse a comma-separated order file.
///
/// Records that fail validation are dropped and reported in
/// [`ParsedOrders::rejected`] with their line number. A file whose rows are
/// out of timestamp order fails as a whole unless `opts.resort` is set.
pub fn parse_order_events<R: Read>(
    source: R,
    schema: &OrderSchema,
    opts: ParseOptions,
) -> Result<ParsedOrders> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let cols = schema.resolve(rdr.headers()?)?;

    let mut rows: Vec<(u64, OrderEvent)> = Vec::new();
    let mut rejected = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        match parse_record(&record, &cols) {
            Ok(ev) => rows.push((line, ev)),
            Err(msg) => rejected.push(Diagnostic::at_line("orderflow", line, msg)),
        }
    }

    if let Some(w) = rows
        .windows(2)
        .find(|w| w[1].1.timestamp < w[0].1.timestamp)
    {
        if !opts.resort {
            return Err(Error::Unsorted { line: w[1].0 });
        }
        rows.sort_by_key(|(_, ev)| ev.timestamp);
    }

    let mut seen: HashSet<(StockId, NaiveDate, OrderId)> = HashSet::new();
    let mut events = Vec::with_capacity(rows.len());
    for (line, ev) in rows {
        let day = ev.timestamp.date();
        if let OrderKind::Cancel { target } = &ev.kind {
            if !seen.contains(&(ev.stock_id.clone(), day, target.clone())) {
                rejected.push(Diagnostic::at_line(
                    "orderflow",
                    line,
                    format!("cancel references unknown order `{target}`"),
                ));
                continue;
            }
        }
        if !seen.insert((ev.stock_id.clone(), day, ev.order_id.clone())) {
            rejected.push(Diagnostic::at_line(
                "orderflow",
                line,
                format!(
                    "duplicate order_id `{}` for {} on {day}",
                    ev.order_id, ev.stock_id
                ),
            ));
            continue;
        }
        events.push(ev);
    }
    rejected.sort();
    Ok(ParsedOrders { events, rejected })
}

/// Serialize events in the order-file format (header included).
pub fn write_order_events(events: &[OrderEvent]) -> String {
    let mut out = String::with_capacity(64 * (events.len() + 1));
    out.push_str(ORDER_HEADER);
    out.push('\n');
    for ev in events {
        let (price, size, target) = match &ev.kind {
            OrderKind::Limit { price, size } => {
                (price.to_string(), size.to_string(), String::new())
            }
            OrderKind::Market { size } => (String::new(), size.to_string(), String::new()),
            OrderKind::Cancel { target } => (String::new(), String::new(), target.to_string()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            ev.trader_id,
            ev.investor_class.code(),
            ev.stock_id,
            ev.side,
            ev.kind.name(),
            price,
            size,
            target,
            ev.timestamp,
            ev.order_id
        );
    }
    out
}
