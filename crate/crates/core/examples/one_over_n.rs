// Equal-capital buy-and-hold benchmark against a market index.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use spectroscopy::orderflow::StockId;
use spectroscopy::spectro::one_over_n_benchmark;

fn main() {
    let days: Vec<NaiveDate> = (0..5)
        .map(|i| NaiveDate::from_ymd_opt(2003, 3, 3 + i).unwrap())
        .collect();
    let path = |f: &dyn Fn(f64) -> f64| -> BTreeMap<NaiveDate, f64> {
        days.iter()
            .enumerate()
            .map(|(i, d)| (*d, f(i as f64)))
            .collect()
    };
    let prices = BTreeMap::from([
        (StockId::new("000001"), path(&|t| 10.0 * 1.01f64.powf(t))),
        (StockId::new("000002"), path(&|t| 4.0 - 0.05 * t)),
    ]);
    let index = path(&|t| 420.0 + 3.0 * t);

    let bench = one_over_n_benchmark(&prices, &days, 1_000_000.0, Some(&index));
    println!("date        portfolio    normalized  index");
    for p in &bench.points {
        println!(
            "{}  {:>11.2}  {:>10.6}  {:.6}",
            p.date,
            p.value,
            p.normalized,
            p.index_normalized.unwrap()
        );
    }
    println!("total return {:.4}%", 100.0 * bench.total_return().unwrap());
}
