use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::planted::PlantedRelation;
use super::population::Agent;
use super::spec::PopulationSpec;
use super::stream_rng;
use crate::error::{Error, Result};
use crate::matching::DayReplayer;
use crate::orderflow::{
    DayPhases, Market, Money, OrderEvent, OrderId, OrderKind, Side, StockId, StockMeta, Timestamp,
    TradingCalendar,
};

pub const GENERATOR_VERSION: &str = "spectroscopy-synth/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockTruth {
    pub stock_id: StockId,
    pub market: Market,
    pub reference_price: String,
}

/// Everything needed to regenerate a synthetic corpus byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    pub seed: u64,
    pub spec: PopulationSpec,
    pub first_day: Option<NaiveDate>,
    pub stocks: Vec<StockTruth>,
    pub agents: usize,
    pub orders: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<PlantedRelation>,
}

#[derive(Debug, Clone)]
pub struct SyntheticMarket {
    pub events: Vec<OrderEvent>,
    pub metas: Vec<StockMeta>,
    pub truth: GroundTruth,
}

/// Concatenated order windows of the first `days` trading days, addressed
/// by a centisecond offset.
struct TimeGrid {
    /// (offset of segment start, date, time of day at start, length)
    segments: Vec<(u64, NaiveDate, u32, u32)>,
    len: u64,
}

impl TimeGrid {
    fn new<'a>(days: impl Iterator<Item = (NaiveDate, &'a DayPhases)>) -> Self {
        let mut segments = Vec::new();
        let mut len = 0u64;
        for (date, phases) in days {
            for (open, close) in phases.order_windows() {
                if close > open {
                    segments.push((len, date, open, close - open));
                    len += u64::from(close - open);
                }
            }
        }
        TimeGrid { segments, len }
    }

    fn at(&self, offset: u64) -> Timestamp {
        let i = self.segments.partition_point(|s| s.0 <= offset) - 1;
        let (start, date, open, _) = self.segments[i];
        Timestamp::new(date, open + (offset - start) as u32)
    }
}

struct StockPlan {
    stock_id: StockId,
    market: Market,
    reference_price: Money,
    /// (agent index, number of orders), in roster order.
    participants: Vec<(usize, u32)>,
}

fn round_to_cent(x: f64) -> Money {
    Money::from_cents((x * 100.0).round().max(1.0) as i64)
}

/// Split `frequency` orders over up to `max_stocks` of `n` stocks, giving
/// each chosen stock at least two orders whenever possible.
fn assign_stocks(
    rng: &mut ChaCha8Rng,
    frequency: u32,
    n: usize,
    max_stocks: usize,
) -> Vec<(usize, u32)> {
    let kmax = max_stocks.min(n).min((frequency as usize / 2).max(1));
    let k = rng.random_range(1..=kmax);
    let mut chosen = index::sample(rng, n, k).into_vec();
    chosen.sort_unstable();
    if k == 1 {
        return vec![(chosen[0], frequency)];
    }
    let mut counts = vec![2u32; k];
    for _ in 0..frequency - 2 * k as u32 {
        counts[rng.random_range(0..k)] += 1;
    }
    chosen.into_iter().zip(counts).collect()
}

#[derive(Default, Clone, Copy)]
struct Account {
    shares: i64,
    cash: f64,
}

fn generate_stock(
    plan: &StockPlan,
    agents: &[Agent],
    spec: &PopulationSpec,
    grid: &TimeGrid,
    cal: &TradingCalendar,
    seed: u64,
) -> Result<Vec<OrderEvent>> {
    let mut rng = stream_rng(seed, "stock", plan.stock_id.as_str());
    let sizes = LogNormal::new(spec.size.mu, spec.size.sigma)
        .map_err(|e| Error::Config(format!("size distribution: {e}")))?;

    // Arrival times conditioned on the target count are uniform order
    // statistics; draw them without replacement so they are distinct.
    let mut arrivals: Vec<(u64, usize, u32)> = Vec::new();
    for &(agent, count) in &plan.participants {
        let mut offsets: Vec<u64> = index::sample(&mut rng, grid.len as usize, count as usize)
            .into_iter()
            .map(|o| o as u64)
            .collect();
        offsets.sort_unstable();
        arrivals.extend(
            offsets
                .into_iter()
                .enumerate()
                .map(|(k, o)| (o, agent, k as u32)),
        );
    }
    arrivals.sort_unstable_by_key(|&(o, a, _)| (o, a));

    let mut accounts: HashMap<usize, Account> = plan
        .participants
        .iter()
        .map(|&(a, _)| {
            (
                a,
                Account {
                    shares: 0,
                    cash: spec.budget,
                },
            )
        })
        .collect();
    let by_trader: HashMap<&str, usize> = plan
        .participants
        .iter()
        .map(|&(a, _)| (agents[a].trader_id.as_str(), a))
        .collect();

    let mut events = Vec::with_capacity(arrivals.len());
    let mut previous_close = plan.reference_price;
    let mut seq = 0;
    let mut current: Option<DayReplayer> = None;
    for (n, (offset, agent_ix, ordinal)) in arrivals.into_iter().enumerate() {
        let agent = &agents[agent_ix];
        let timestamp = grid.at(offset);
        let date = timestamp.date();
        if current.as_ref().is_none_or(|r| r.date() != date) {
            if let Some(r) = current.take() {
                let out = r.finish();
                previous_close = out.close.unwrap_or(previous_close);
                seq = out.next_seq;
            }
            current = Some(DayReplayer::new(
                plan.stock_id.clone(),
                date,
                *cal.phases(date)?,
                previous_close,
                seq,
            ));
        }
        let replayer = current.as_mut().expect("replayer set above");
        let reference = replayer.reference_price().to_f64();

        let mut side = if ordinal == 0 || rng.random_bool(0.5) {
            Side::Buy
        } else {
            Side::Sell
        };
        let is_market = rng.random_bool(spec.market_order_prob);
        let offset = rng.random_range(-spec.price_band..=spec.price_band);
        let price = round_to_cent(reference * (1.0 + offset));
        let mut lots = (sizes.sample(&mut rng).round() as u64).clamp(1, spec.size.max_lots);

        if spec.budget_constrained {
            let acct = accounts[&agent_ix];
            if side == Side::Sell && acct.shares <= 0 {
                side = Side::Buy;
            }
            if side == Side::Buy {
                let unit =
                    if is_market { reference } else { price.to_f64() } * spec.size.lot as f64;
                let affordable = (acct.cash / unit).floor().max(0.0) as u64;
                if affordable == 0 && acct.shares > 0 {
                    side = Side::Sell;
                } else {
                    // the order count is exact, so a broke agent still bids one lot
                    lots = lots.min(affordable.max(1));
                }
            }
        }
        let mut size = lots * spec.size.lot;
        if spec.budget_constrained && side == Side::Sell {
            size = size.min(accounts[&agent_ix].shares as u64);
        }

        let ev = OrderEvent {
            trader_id: agent.trader_id.clone(),
            investor_class: agent.class,
            stock_id: plan.stock_id.clone(),
            side,
            kind: if is_market {
                OrderKind::Market { size }
            } else {
                OrderKind::Limit { price, size }
            },
            timestamp,
            order_id: OrderId::new(format!("{}-{:07}", plan.stock_id, n + 1)),
        };
        let before = replayer.fills().len();
        replayer.push(&ev);
        if spec.budget_constrained {
            for f in &replayer.fills()[before..] {
                let value = f.price.to_f64() * f.size as f64;
                if let Some(a) = by_trader.get(f.buyer.trader_id.as_str()) {
                    let acct = accounts.get_mut(a).expect("participant account");
                    acct.shares += f.size as i64;
                    acct.cash -= value;
                }
                if let Some(a) = by_trader.get(f.seller.trader_id.as_str()) {
                    let acct = accounts.get_mut(a).expect("participant account");
                    acct.shares -= f.size as i64;
                    acct.cash += value;
                }
            }
        }
        events.push(ev);
    }
    Ok(events)
}

/// Generate order flow for a roster over the first `spec.days` days of `cal`.
///
/// Each stock is an independent stream with its own derived seed. Every
/// agent submits exactly its target number of orders, its first order on
/// each stock is a buy, and limit prices are placed around the last price of
/// a running replay of the stream so books keep crossing.
pub fn generate_orderflow(
    agents: &[Agent],
    spec: &PopulationSpec,
    cal: &TradingCalendar,
    seed: u64,
) -> Result<SyntheticMarket> {
    spec.validate()?;
    if cal.len() < spec.days {
        return Err(Error::Config(format!(
            "calendar has {} trading days but the spec needs {}",
            cal.len(),
            spec.days
        )));
    }
    let grid = TimeGrid::new(cal.days().take(spec.days));

    let mut price_rng = stream_rng(seed, "stocks", "");
    let mut plans: Vec<StockPlan> = Vec::new();
    let mut market_stocks: BTreeMap<Market, Vec<usize>> = BTreeMap::new();
    for market in Market::ALL {
        let base = spec.stocks.reference_price(market);
        let d = spec.stocks.price_dispersion;
        for i in 0..spec.stocks.count(market) {
            let spread = if d > 0.0 {
                price_rng.random_range(-d..=d)
            } else {
                0.0
            };
            market_stocks.entry(market).or_default().push(plans.len());
            plans.push(StockPlan {
                stock_id: StockId::new(format!("{market}{:04}", i + 1)),
                market,
                reference_price: round_to_cent(base * spread.exp()),
                participants: Vec::new(),
            });
        }
    }

    let mut assign_rng = stream_rng(seed, "assign", "");
    for (ix, agent) in agents.iter().enumerate() {
        let Some(stocks) = market_stocks.get(&agent.market) else {
            return Err(Error::Config(format!(
                "agent `{}` trades market {} which has no stocks",
                agent.trader_id, agent.market
            )));
        };
        if agent.frequency == 0 {
            continue;
        }
        for (s, count) in assign_stocks(
            &mut assign_rng,
            agent.frequency,
            stocks.len(),
            spec.max_stocks_per_agent,
        ) {
            plans[stocks[s]].participants.push((ix, count));
        }
    }

    let per_stock: Vec<Vec<OrderEvent>> = plans
        .par_iter()
        .map(|plan| generate_stock(plan, agents, spec, &grid, cal, seed))
        .collect::<Result<_>>()?;
    let mut events: Vec<OrderEvent> = per_stock.into_iter().flatten().collect();
    events.sort_by_key(|e| e.timestamp);

    let metas = plans
        .iter()
        .map(|p| StockMeta::new(p.stock_id.clone(), p.market, p.reference_price))
        .collect();
    let truth = GroundTruth {
        generator: GENERATOR_VERSION.into(),
        seed,
        spec: spec.clone(),
        first_day: cal.first_day(),
        stocks: plans
            .iter()
            .map(|p| StockTruth {
                stock_id: p.stock_id.clone(),
                market: p.market,
                reference_price: p.reference_price.to_string(),
            })
            .collect(),
        agents: agents.len(),
        orders: events.len(),
        planted: None,
    };
    Ok(SyntheticMarket {
        events,
        metas,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::replay_period;
    use crate::orderflow::{parse_order_events, write_order_events, OrderSchema, ParseOptions};
    use crate::synth::{generate_population, Cohorts, FrequencyDist};

    fn small_spec(n: usize, frequency: FrequencyDist, days: usize) -> PopulationSpec {
        PopulationSpec {
            investors: Cohorts {
                a_individual: n,
                a_institution: 0,
                b_individual: 0,
                b_institution: 0,
            },
            frequency,
            days,
            ..PopulationSpec::default()
        }
    }

    fn calendar(days: usize) -> TradingCalendar {
        TradingCalendar::weekdays(NaiveDate::from_ymd_opt(2003, 1, 6).unwrap(), days)
    }

    #[test]
    fn one_agent_two_orders_buy_first() {
        let spec = small_spec(1, FrequencyDist::Constant { value: 2 }, 1);
        let agents = generate_population(&spec, 5).unwrap();
        let m = generate_orderflow(&agents, &spec, &calendar(1), 5).unwrap();
        assert_eq!(m.events.len(), 2);
        assert_eq!(m.events[0].side, Side::Buy);
        assert!(m.events[1].timestamp > m.events[0].timestamp);
    }

    #[test]
    fn counts_exact_and_first_action_is_buy() {
        let spec = PopulationSpec {
            days: 3,
            ..PopulationSpec::default()
        };
        let agents = generate_population(&spec, 11).unwrap();
        let m = generate_orderflow(&agents, &spec, &calendar(3), 11).unwrap();
        let mut counts: HashMap<&str, u32> = HashMap::new();
        let mut seen: std::collections::HashSet<(&str, &str)> = Default::default();
        for ev in &m.events {
            *counts.entry(ev.trader_id.as_str()).or_default() += 1;
            if seen.insert((ev.trader_id.as_str(), ev.stock_id.as_str())) {
                assert_eq!(ev.side, Side::Buy);
            }
        }
        for a in &agents {
            assert_eq!(counts[a.trader_id.as_str()], a.frequency);
        }
    }

    #[test]
    fn stream_parses_cleanly_and_is_deterministic() {
        let spec = small_spec(100, FrequencyDist::Constant { value: 6 }, 2);
        let cal = calendar(2);
        let agents = generate_population(&spec, 42).unwrap();
        let a = generate_orderflow(&agents, &spec, &cal, 42).unwrap();
        let b = generate_orderflow(&agents, &spec, &cal, 42).unwrap();
        let text = write_order_events(&a.events);
        assert_eq!(text, write_order_events(&b.events));
        let parsed = parse_order_events(
            text.as_bytes(),
            &OrderSchema::default(),
            ParseOptions::default(),
        )
        .unwrap();
        assert!(parsed.rejected.is_empty(), "{:?}", parsed.rejected);
        assert_eq!(parsed.events, a.events);
    }

    #[test]
    fn replay_conserves_volume_and_trades() {
        let spec = small_spec(100, FrequencyDist::Constant { value: 8 }, 1);
        let cal = calendar(1);
        let agents = generate_population(&spec, 7).unwrap();
        let m = generate_orderflow(&agents, &spec, &cal, 7).unwrap();
        let metas = m
            .metas
            .iter()
            .map(|x| (x.stock_id.clone(), x.clone()))
            .collect();
        let out = replay_period(&m.events, &cal, &metas).unwrap();
        assert!(!out.fills.is_empty());
        let mut net: HashMap<&str, i64> = HashMap::new();
        for f in &out.fills {
            *net.entry(f.buyer.trader_id.as_str()).or_default() += f.size as i64;
            *net.entry(f.seller.trader_id.as_str()).or_default() -= f.size as i64;
        }
        assert_eq!(net.values().sum::<i64>(), 0);
        let submitted = |side| {
            m.events
                .iter()
                .filter(|e| e.side == side)
                .filter_map(|e| e.kind.size())
                .sum::<u64>()
        };
        let filled: u64 = out.fills.iter().map(|f| f.size).sum();
        assert!(filled <= submitted(Side::Buy) && filled <= submitted(Side::Sell));
    }

    #[test]
    fn budget_constrained_agents_never_sell_short_at_submission() {
        let spec = PopulationSpec {
            budget_constrained: true,
            budget: 20_000.0,
            ..small_spec(50, FrequencyDist::Constant { value: 10 }, 2)
        };
        let cal = calendar(2);
        let agents = generate_population(&spec, 3).unwrap();
        let m = generate_orderflow(&agents, &spec, &cal, 3).unwrap();
        let metas = m
            .metas
            .iter()
            .map(|x| (x.stock_id.clone(), x.clone()))
            .collect();
        let out = replay_period(&m.events, &cal, &metas).unwrap();
        let mut pos: HashMap<(&str, &str), i64> = HashMap::new();
        for f in &out.fills {
            *pos.entry((f.buyer.trader_id.as_str(), f.stock_id.as_str()))
                .or_default() += f.size as i64;
            *pos.entry((f.seller.trader_id.as_str(), f.stock_id.as_str()))
                .or_default() -= f.size as i64;
        }
        assert!(
            pos.values().all(|&p| p >= 0),
            "short position in budget mode"
        );
    }

    #[test]
    fn short_calendar_rejected() {
        let spec = small_spec(1, FrequencyDist::Constant { value: 2 }, 5);
        let agents = generate_population(&spec, 1).unwrap();
        assert!(generate_orderflow(&agents, &spec, &calendar(2), 1).is_err());
    }
}
