use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::Diagnostic;
use crate::orderflow::StockId;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPoint {
    pub date: NaiveDate,
    pub value: f64,
    /// Value relative to the starting capital.
    pub normalized: f64,
    /// Index level relative to its level on the first day, when available.
    pub index_normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OneOverN {
    pub points: Vec<BenchmarkPoint>,
    pub diagnostics: Vec<Diagnostic>,
}

impl OneOverN {
    pub fn total_return(&self) -> Option<f64> {
        self.points.last().map(|p| p.normalized - 1.0)
    }
}

/// Equal-capital buy-and-hold over `days`.
///
/// Each stock receives `capital / N` at its first-day price; daily value is
/// the sum of shares times that day's close. Missing closes carry forward
/// with a diagnostic. Stocks without a first-day price are left out, also
/// with a diagnostic.
pub fn one_over_n_benchmark(
    daily_prices: &BTreeMap<StockId, BTreeMap<NaiveDate, f64>>,
    days: &[NaiveDate],
    capital: f64,
    index: Option<&BTreeMap<NaiveDate, f64>>,
) -> OneOverN {
    let mut out = OneOverN::default();
    let Some(&first) = days.first() else {
        return out;
    };
    let mut holdings: Vec<(&StockId, &BTreeMap<NaiveDate, f64>, f64)> = Vec::new();
    let eligible: Vec<_> = daily_prices
        .iter()
        .filter(|(stock, prices)| match prices.get(&first) {
            Some(p) if *p > 0.0 => true,
            _ => {
                out.diagnostics.push(Diagnostic::new(
                    "spectro",
                    format!("1/N: `{stock}` has no first-day price; excluded"),
                ));
                false
            }
        })
        .collect();
    let n = eligible.len();
    if n == 0 {
        return out;
    }
    for (stock, prices) in eligible {
        let shares = capital / n as f64 / prices[&first];
        holdings.push((stock, prices, shares));
    }
    let mut last_price: Vec<f64> = holdings.iter().map(|(_, p, _)| p[&first]).collect();
    let index_base = index.and_then(|i| i.get(&first).copied());
    for &day in days {
        let mut value = 0.0;
        for (slot, (stock, prices, shares)) in last_price.iter_mut().zip(&holdings) {
            match prices.get(&day) {
                Some(p) => *slot = *p,
                None => out.diagnostics.push(Diagnostic::new(
                    "spectro",
                    format!("1/N: no price for `{stock}` on {day}; carried forward"),
                )),
            }
            value += shares * *slot;
        }
        let index_normalized = match (index.and_then(|i| i.get(&day)), index_base) {
            (Some(level), Some(base)) => Some(level / base),
            _ => None,
        };
        out.points.push(BenchmarkPoint {
            date: day,
            value,
            normalized: value / capital,
            index_normalized,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn days(n: u32) -> Vec<NaiveDate> {
        (0..n)
            .map(|i| NaiveDate::from_ymd_opt(2003, 1, 1 + i).unwrap())
            .collect()
    }

    fn path(days: &[NaiveDate], prices: &[f64]) -> BTreeMap<NaiveDate, f64> {
        days.iter().copied().zip(prices.iter().copied()).collect()
    }

    #[test]
    fn both_up_ten_percent() {
        let d = days(2);
        let prices = BTreeMap::from([
            (StockId::new("S1"), path(&d, &[10.0, 11.0])),
            (StockId::new("S2"), path(&d, &[4.0, 4.4])),
        ]);
        let b = one_over_n_benchmark(&prices, &d, 1000.0, None);
        assert!((b.total_return().unwrap() - 0.10).abs() < 1e-12);
    }

    #[test]
    fn up_and_down_cancel() {
        let d = days(2);
        let prices = BTreeMap::from([
            (StockId::new("S1"), path(&d, &[10.0, 11.0])),
            (StockId::new("S2"), path(&d, &[4.0, 3.6])),
        ]);
        let b = one_over_n_benchmark(&prices, &d, 1000.0, None);
        assert!(b.total_return().unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_stock_tracks_price() {
        let d = days(4);
        let prices = BTreeMap::from([(StockId::new("S1"), path(&d, &[10.0, 12.0, 9.0, 15.0]))]);
        let b = one_over_n_benchmark(&prices, &d, 1.0, None);
        for (p, want) in b.points.iter().zip([1.0, 1.2, 0.9, 1.5]) {
            assert!((p.normalized - want).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_price_carried_forward_and_index_normalized() {
        let d = days(3);
        let mut p = path(&d, &[10.0, 12.0, 11.0]);
        p.remove(&d[1]);
        let prices = BTreeMap::from([(StockId::new("S1"), p)]);
        let index = path(&d, &[200.0, 210.0, 190.0]);
        let b = one_over_n_benchmark(&prices, &d, 100.0, Some(&index));
        assert_eq!(b.points[1].value, 100.0);
        assert_eq!(b.diagnostics.len(), 1);
        assert_eq!(b.points[2].index_normalized, Some(0.95));
    }
}
