// One investor's activity sequence: sanitization, earnings, return,
// frequency and FIFO holding time.

use chrono::NaiveDate;
use spectroscopy::ledger::{
    build_activity_sequence, evaluate_sequences, holding_time_fifo, Entry, FeeSchedule,
    LedgerPolicy, Rate,
};
use spectroscopy::orderflow::{Money, Timestamp};

fn entry(volume: i64, price: &str, day: u32) -> Entry {
    let date = NaiveDate::from_ymd_opt(2003, 3, day).unwrap();
    Entry {
        volume,
        notional: price.parse::<Money>().unwrap().times_shares(volume.abs()),
        time: Timestamp::from_hms(date, 10, 0, 0, 0),
        seq: u64::from(day),
        is_virtual: false,
    }
}

fn main() -> spectroscopy::Result<()> {
    // Buy 1000, sell 400, try to sell 900 (only 600 are held), buy 200.
    let raw = [
        entry(-1000, "10.00", 3),
        entry(400, "10.50", 5),
        entry(900, "10.80", 10),
        entry(-200, "11.00", 12),
    ];
    let end = Timestamp::from_hms(NaiveDate::from_ymd_opt(2003, 3, 31).unwrap(), 15, 0, 0, 0);
    let seq = build_activity_sequence(
        "T1".into(),
        "000001".into(),
        &raw,
        Some("11.20".parse().unwrap()),
        end,
    )?;
    for e in &seq.entries {
        println!(
            "{:>6} shares at {:.4} on {}{}",
            e.volume,
            e.price(),
            e.time,
            if e.is_virtual {
                " (period-end close-out)"
            } else {
                ""
            }
        );
    }

    let schedule = FeeSchedule::a_share(Rate::from_fraction(0.0015)?)?;
    let eval = evaluate_sequences(
        std::slice::from_ref(&seq),
        &schedule,
        &[],
        LedgerPolicy::default(),
    );
    println!(
        "earnings {}  costs {}",
        eval.totals.earnings(),
        eval.totals.total_cost()
    );
    println!("return R = {:.6}", eval.ret.unwrap());
    println!("frequency J = {}", eval.transactions);
    println!(
        "holding time = {:.3} days",
        holding_time_fifo(&seq).mean_days().unwrap()
    );
    Ok(())
}
