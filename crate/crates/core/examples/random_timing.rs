// Random-timing benchmark of a small market: every investor's volumes are
// kept while trade times are redrawn from the tape.

use std::collections::BTreeMap;

use spectroscopy::counterfactual::{
    run_monte_carlo, tapes_from_fills, MonteCarloSettings, ReplicaContext,
};
use spectroscopy::ledger::{
    compute_ledger, period_end_prices, FeeConfig, LedgerContext, LedgerPolicy,
};
use spectroscopy::matching::replay_period;
use spectroscopy::orderflow::TradingCalendar;
use spectroscopy::spectro::BinGrids;
use spectroscopy::synth::{
    generate_orderflow, generate_population, Cohorts, PopulationSpec, StockUniverse,
};

fn main() -> spectroscopy::Result<()> {
    let spec = PopulationSpec {
        investors: Cohorts {
            a_individual: 150,
            a_institution: 30,
            b_individual: 0,
            b_institution: 0,
        },
        stocks: StockUniverse {
            a_stocks: 4,
            b_stocks: 0,
            ..PopulationSpec::default().stocks
        },
        days: 5,
        ..PopulationSpec::default()
    };
    let cal = TradingCalendar::weekdays(chrono::NaiveDate::from_ymd_opt(2003, 3, 3).unwrap(), 5);
    let agents = generate_population(&spec, 7)?;
    let market = generate_orderflow(&agents, &spec, &cal, 7)?;
    let metas: BTreeMap<_, _> = market
        .metas
        .iter()
        .map(|m| (m.stock_id.clone(), m.clone()))
        .collect();
    let replay = replay_period(&market.events, &cal, &metas)?;

    let fees = FeeConfig::default();
    let prices = period_end_prices(&metas, &replay.daily_close);
    let ledger = compute_ledger(
        &replay.fills,
        &LedgerContext {
            metas: &metas,
            period_end: cal.period_end().unwrap(),
            period_end_prices: &prices,
            dividends: &[],
            fees: &fees,
            policy: LedgerPolicy::default(),
        },
    )?;

    let tapes = tapes_from_fills(&replay.fills);
    let settings = MonteCarloSettings {
        replicas: 200,
        seed: 1,
        strict_position_mode: false,
    };
    let ctx = ReplicaContext {
        tapes: &tapes,
        fees: &fees,
        dividends: &[],
        policy: LedgerPolicy::default(),
    };
    let mc = run_monte_carlo(&ledger.activities, &settings, &BinGrids::default(), &ctx);

    println!(
        "{:<16} {:>4} {:>10} {:>10} {:>8}",
        "investor", "J", "real R", "random R", "std"
    );
    for (perf, rnd) in ledger.performances.iter().zip(&mc.investors).take(12) {
        assert_eq!(perf.investor_id, rnd.investor_id);
        println!(
            "{:<16} {:>4} {:>10.5} {:>10.5} {:>8.5}",
            perf.investor_id, perf.transactions, perf.ret, rnd.mean_ret, rnd.std_ret
        );
    }
    Ok(())
}
