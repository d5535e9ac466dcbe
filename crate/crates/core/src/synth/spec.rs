use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orderflow::{InvestorClass, Market};

/// Investor counts per market and class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cohorts {
    pub a_individual: usize,
    pub a_institution: usize,
    pub b_individual: usize,
    pub b_institution: usize,
}

impl Cohorts {
    pub fn count(&self, market: Market, class: InvestorClass) -> usize {
        match (market, class) {
            (Market::A, InvestorClass::Individual) => self.a_individual,
            (Market::A, InvestorClass::Institution) => self.a_institution,
            (Market::B, InvestorClass::Individual) => self.b_individual,
            (Market::B, InvestorClass::Institution) => self.b_institution,
        }
    }

    pub fn total(&self) -> usize {
        self.a_individual + self.a_institution + self.b_individual + self.b_institution
    }

    pub fn in_market(&self, market: Market) -> usize {
        InvestorClass::ALL
            .iter()
            .map(|&c| self.count(market, c))
            .sum()
    }
}

/// Per-agent target number of submitted orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyDist {
    Constant {
        value: u32,
    },
    /// Discrete power law `P(J) ∝ J^-exponent` on `[min, cap]`.
    PowerLaw {
        exponent: f64,
        min: u32,
        cap: u32,
    },
}

impl FrequencyDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FrequencyDist::Constant { value: 0 } => Err(Error::Config(
                "constant frequency must be at least 1".into(),
            )),
            FrequencyDist::Constant { .. } => Ok(()),
            FrequencyDist::PowerLaw { exponent, min, cap } => {
                if !(exponent.is_finite() && exponent > 0.0) {
                    return Err(Error::Config(format!(
                        "frequency exponent {exponent} must be positive"
                    )));
                }
                if min == 0 {
                    return Err(Error::Config("frequency minimum must be at least 1".into()));
                }
                if cap < 2 || cap < min {
                    return Err(Error::Config(format!(
                        "frequency cap {cap} must be at least 2 and at least the minimum {min}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Stocks per market and their price levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StockUniverse {
    pub a_stocks: usize,
    pub b_stocks: usize,
    pub a_reference_price: f64,
    pub b_reference_price: f64,
    /// Reference prices spread as `base * exp(U(-d, d))`.
    #[serde(default = "default_dispersion")]
    pub price_dispersion: f64,
}

fn default_dispersion() -> f64 {
    0.5
}

impl StockUniverse {
    pub fn count(&self, market: Market) -> usize {
        match market {
            Market::A => self.a_stocks,
            Market::B => self.b_stocks,
        }
    }

    pub fn reference_price(&self, market: Market) -> f64 {
        match market {
            Market::A => self.a_reference_price,
            Market::B => self.b_reference_price,
        }
    }
}

/// Order size in lots, log-normally distributed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeDist {
    /// Log-mean of the lot count.
    pub mu: f64,
    pub sigma: f64,
    #[serde(default = "default_lot")]
    pub lot: u64,
    #[serde(default = "default_max_lots")]
    pub max_lots: u64,
}

fn default_lot() -> u64 {
    100
}

fn default_max_lots() -> u64 {
    10_000
}

/// Zero-intelligence population and market parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub investors: Cohorts,
    pub stocks: StockUniverse,
    pub frequency: FrequencyDist,
    pub size: SizeDist,
    /// Probability that an order is a market order.
    pub market_order_prob: f64,
    /// Limit prices fall uniformly within this relative band around the last price.
    pub price_band: f64,
    /// Trading days, taken from the start of the calendar.
    pub days: usize,
    /// Most distinct stocks a single agent trades.
    #[serde(default = "default_max_stocks")]
    pub max_stocks_per_agent: usize,
    /// Sells never exceed holdings and buys respect a per-stock cash budget.
    #[serde(default)]
    pub budget_constrained: bool,
    #[serde(default = "default_budget")]
    pub budget: f64,
}

fn default_max_stocks() -> usize {
    3
}

fn default_budget() -> f64 {
    1_000_000.0
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            investors: Cohorts {
                a_individual: 600,
                a_institution: 100,
                b_individual: 250,
                b_institution: 50,
            },
            stocks: StockUniverse {
                a_stocks: 30,
                b_stocks: 13,
                a_reference_price: 10.0,
                b_reference_price: 3.0,
                price_dispersion: default_dispersion(),
            },
            frequency: FrequencyDist::PowerLaw {
                exponent: 2.5,
                min: 2,
                cap: 1000,
            },
            size: SizeDist {
                mu: 1.5,
                sigma: 1.0,
                lot: default_lot(),
                max_lots: default_max_lots(),
            },
            market_order_prob: 0.2,
            price_band: 0.05,
            days: 20,
            max_stocks_per_agent: default_max_stocks(),
            budget_constrained: false,
            budget: default_budget(),
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.investors.total() == 0 {
            return bad("population has no investors".into());
        }
        for market in Market::ALL {
            if self.investors.in_market(market) > 0 && self.stocks.count(market) == 0 {
                return bad(format!("market {market} has investors but no stocks"));
            }
            let p = self.stocks.reference_price(market);
            if self.stocks.count(market) > 0 && !(p.is_finite() && p >= 0.01) {
                return bad(format!(
                    "reference price {p} for market {market} must be at least 0.01"
                ));
            }
        }
        if !(self.stocks.price_dispersion.is_finite()
            && (0.0..5.0).contains(&self.stocks.price_dispersion))
        {
            return bad("price_dispersion must lie in [0, 5)".into());
        }
        self.frequency.validate()?;
        if !(self.size.mu.is_finite() && self.size.sigma.is_finite() && self.size.sigma >= 0.0) {
            return bad("size distribution needs finite mu and non-negative sigma".into());
        }
        if self.size.lot == 0 || self.size.max_lots == 0 {
            return bad("lot and max_lots must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.market_order_prob) {
            return bad(format!(
                "market_order_prob {} outside [0, 1]",
                self.market_order_prob
            ));
        }
        if !(self.price_band > 0.0 && self.price_band < 1.0) {
            return bad(format!("price_band {} outside (0, 1)", self.price_band));
        }
        if self.days == 0 {
            return bad("days must be at least 1".into());
        }
        if self.max_stocks_per_agent == 0 {
            return bad("max_stocks_per_agent must be at least 1".into());
        }
        if self.budget_constrained && !(self.budget.is_finite() && self.budget > 0.0) {
            return bad("budget must be positive".into());
        }
        Ok(())
    }
}
