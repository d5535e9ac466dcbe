// Transaction costs under the A- and B-share schedules.

use spectroscopy::ledger::{transaction_cost, FeeSchedule, Rate};
use spectroscopy::orderflow::{Money, Side};

fn main() {
    let brokerage = Rate::from_fraction(0.0025).expect("valid rate");
    let a = FeeSchedule::a_share(brokerage).expect("within the 0.3% cap");
    let b = FeeSchedule::b_share(brokerage).expect("within the 0.3% cap");

    for (label, schedule, notional, side) in [
        ("A-share sell of 10000.00", &a, 10_000.0, Side::Sell),
        ("A-share buy of 1000.00", &a, 1_000.0, Side::Buy),
        ("B-share sell of 10000.00", &b, 10_000.0, Side::Sell),
    ] {
        let cost = transaction_cost(Money::from_f64(notional), side, schedule);
        println!("{label:<26} costs {cost}");
    }

    // Brokerage above 0.3% minus the exchange and supervision fees is refused.
    match FeeSchedule::a_share(Rate::from_fraction(0.0029).expect("valid rate")) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
}
