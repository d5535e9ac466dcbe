//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use spectroscopy::counterfactual::TradeTape;
use spectroscopy::ledger::{build_activity_sequence, ActivitySequence, Entry, InvestorActivity};
use spectroscopy::matching::Party;
use spectroscopy::matching::{demand_supply_at, CallOrder, ClearingChoice};
use spectroscopy::orderflow::{InvestorClass, Market, Money, Side, Timestamp, CENTIS_PER_DAY};

pub fn ts(day: i64, centis: i64) -> Timestamp {
    Timestamp::from_raw(day * CENTIS_PER_DAY + centis)
}

/// Random raw entries at strictly increasing times, with prices on the cent
/// grid in [5, 15].
pub fn random_entries<R: Rng>(rng: &mut R, max_len: usize) -> Vec<Entry> {
    let n = rng.random_range(0..=max_len);
    let mut t = rng.random_range(0..CENTIS_PER_DAY);
    (0..n)
        .map(|i| {
            t += rng.random_range(1..3 * CENTIS_PER_DAY);
            let shares = 100 * rng.random_range(1..=20);
            let volume = if rng.random_bool(0.5) {
                shares
            } else {
                -shares
            };
            Entry {
                volume,
                notional: Money::from_cents(rng.random_range(500..=1500)).times_shares(shares),
                time: Timestamp::from_raw(t),
                seq: i as u64,
                is_virtual: false,
            }
        })
        .collect()
}

pub fn sanitize(entries: &[Entry], end_price: Money) -> ActivitySequence {
    let end = entries.last().map_or(ts(100, 0), |e| {
        Timestamp::from_raw(e.time.raw() + CENTIS_PER_DAY)
    });
    build_activity_sequence("I".into(), "S".into(), entries, Some(end_price), end).unwrap()
}

/// Share-by-share FIFO: every share is its own lot. Returns
/// (matched shares, Σ share × duration in centiseconds).
pub fn brute_force_fifo(seq: &ActivitySequence) -> (i64, i128) {
    // +1 for a held long share, -1 for a short one, with its open time
    let mut shares: VecDeque<(i8, i64)> = VecDeque::new();
    let (mut matched, mut total) = (0i64, 0i128);
    for e in &seq.entries {
        let sign: i8 = if e.volume < 0 { 1 } else { -1 };
        for _ in 0..e.volume.abs() {
            match shares.front() {
                Some(&(s, opened)) if s != sign => {
                    shares.pop_front();
                    matched += 1;
                    total += i128::from(e.time.raw() - opened);
                }
                _ => shares.push_back((sign, e.time.raw())),
            }
        }
    }
    (matched, total)
}

pub fn party(n: usize) -> Party {
    Party {
        order_id: format!("O{n}").into(),
        trader_id: format!("T{n}").into(),
        class: InvestorClass::Individual,
    }
}

pub fn call_order(n: usize, side: Side, limit: Option<&str>, size: u64) -> CallOrder {
    CallOrder {
        party: party(n),
        side,
        limit: limit.map(|p| p.parse().unwrap()),
        size,
    }
}

/// Random call book: up to 20 orders, limits on a 21-tick grid around 10.00,
/// roughly one market order in ten.
pub fn random_call_orders<R: Rng>(rng: &mut R) -> Vec<CallOrder> {
    let n = rng.random_range(1..=20);
    (0..n)
        .map(|i| CallOrder {
            party: party(i),
            side: if rng.random_bool(0.5) {
                Side::Buy
            } else {
                Side::Sell
            },
            limit: (!rng.random_bool(0.1))
                .then(|| Money::from_cents(990 + rng.random_range(0..=20))),
            size: 100 * rng.random_range(1..=10),
        })
        .collect()
}

/// Exhaustive auction oracle over every cent between the lowest and highest
/// limit. Returns the maximal executable volume there and the choice the
/// documented tie-break chain makes among submitted limit prices.
pub fn brute_force_auction(
    orders: &[CallOrder],
    prev_close: Money,
) -> (u64, Option<ClearingChoice>) {
    let limits: Vec<Money> = orders.iter().filter_map(|o| o.limit).collect();
    let (Some(lo), Some(hi)) = (limits.iter().min(), limits.iter().max()) else {
        return (0, None);
    };
    let volume_at = |p: Money| {
        let (d, s) = demand_supply_at(orders, p);
        (d.min(s), d.abs_diff(s))
    };
    let mut max_volume = 0;
    let mut p = *lo;
    while p <= *hi {
        max_volume = max_volume.max(volume_at(p).0);
        p += Money::from_cents(1);
    }
    let mut candidates: Vec<ClearingChoice> = limits
        .iter()
        .map(|&price| {
            let (volume, imbalance) = volume_at(price);
            ClearingChoice {
                price,
                volume,
                imbalance,
            }
        })
        .filter(|c| c.volume > 0)
        .collect();
    candidates.sort_by_key(|c| {
        (
            std::cmp::Reverse(c.volume),
            c.imbalance,
            (c.price - prev_close).abs(),
            c.price,
        )
    });
    (max_volume, candidates.first().copied())
}

/// Sort-based Tukey hinges: quartiles are medians of the lower and upper
/// halves, each including the median when n is odd.
pub fn tukey_oracle(sample: &[f64]) -> [f64; 5] {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let median = |s: &[f64]| {
        let n = s.len();
        if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        }
    };
    let n = v.len();
    let half = n.div_ceil(2);
    [
        v[0],
        median(&v[..half]),
        median(&v),
        median(&v[n - half..]),
        v[n - 1],
    ]
}

/// `investors` round-trippers in one stock, all trading at `price`, with a
/// constant-price tape long enough for any replica.
pub fn constant_price_fixture(
    investors: usize,
    price: Money,
) -> (
    Vec<InvestorActivity>,
    BTreeMap<spectroscopy::orderflow::StockId, TradeTape>,
) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let stock: spectroscopy::orderflow::StockId = "000001".into();
    let end = ts(30, 0);
    let activities = (0..investors)
        .map(|i| {
            let mut entries = random_entries(&mut rng, 8);
            for e in &mut entries {
                e.notional = price.times_shares(e.shares());
            }
            // ensure at least one buy so the investor has capital at risk
            entries.insert(
                0,
                Entry {
                    volume: -100,
                    notional: price.times_shares(100),
                    time: ts(0, 1),
                    seq: 0,
                    is_virtual: false,
                },
            );
            for (k, e) in entries.iter_mut().enumerate().skip(1) {
                e.time = ts(1 + k as i64, 0);
            }
            let seq = build_activity_sequence(
                format!("I{i:03}").into(),
                stock.clone(),
                &entries,
                Some(price),
                end,
            )
            .unwrap();
            InvestorActivity {
                investor_id: format!("I{i:03}").into(),
                class: if i % 5 == 0 {
                    InvestorClass::Institution
                } else {
                    InvestorClass::Individual
                },
                market: Market::A,
                sequences: vec![seq],
            }
        })
        .collect();
    let tape = TradeTape::from_trades(
        stock.clone(),
        (0..2000).map(|k| (ts(k / 100, 100 + k % 100), price)),
    );
    (activities, BTreeMap::from([(stock, tape)]))
}
