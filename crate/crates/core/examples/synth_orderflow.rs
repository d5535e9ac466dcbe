// Generate zero-intelligence order flow and print the first orders.

use spectroscopy::orderflow::{write_order_events, TradingCalendar};
use spectroscopy::synth::{generate_orderflow, generate_population, FrequencyDist, PopulationSpec};

fn main() -> spectroscopy::Result<()> {
    let spec = PopulationSpec {
        days: 2,
        frequency: FrequencyDist::PowerLaw {
            exponent: 2.5,
            min: 2,
            cap: 200,
        },
        ..PopulationSpec::default()
    };
    let cal = TradingCalendar::weekdays(
        chrono::NaiveDate::from_ymd_opt(2003, 1, 6).unwrap(),
        spec.days,
    );
    let agents = generate_population(&spec, 42)?;
    let market = generate_orderflow(&agents, &spec, &cal, 42)?;

    let busiest = agents.iter().max_by_key(|a| a.frequency).unwrap();
    println!(
        "{} agents, {} orders; busiest agent {} targets {} orders",
        agents.len(),
        market.events.len(),
        busiest.trader_id,
        busiest.frequency
    );
    for line in write_order_events(&market.events).lines().take(8) {
        println!("{line}");
    }
    println!(
        "ground truth: {}",
        serde_json::to_string(&market.truth.stocks[..2]).unwrap()
    );
    Ok(())
}
