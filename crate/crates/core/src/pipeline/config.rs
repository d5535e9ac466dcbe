use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::counterfactual::MonteCarloSettings;
use crate::error::{Error, Result};
use crate::ledger::{FeeConfig, FeeSchedule, LedgerPolicy, Rate};
use crate::orderflow::{InvestorClass, Money};
use crate::spectro::{BinGrids, FitSettings, GeometricBins};
use crate::synth::PopulationSpec;

/// Files of an ingested corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub orders: PathBuf,
    pub stock_meta: PathBuf,
    pub calendar: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dividends: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,
    /// Stable-sort out-of-order order files instead of rejecting them.
    #[serde(default)]
    pub resort: bool,
}

impl InputPaths {
    fn all(&self) -> impl Iterator<Item = &PathBuf> {
        [
            Some(&self.orders),
            Some(&self.stock_meta),
            Some(&self.calendar),
        ]
        .into_iter()
        .chain([self.dividends.as_ref(), self.index.as_ref()])
        .flatten()
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.orders, &mut self.stock_meta, &mut self.calendar] {
            *p = base.join(&*p);
        }
        for p in [&mut self.dividends, &mut self.index].into_iter().flatten() {
            *p = base.join(&*p);
        }
    }
}

/// Synthetic corpus in place of input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// First calendar day; trading days are the following weekdays.
    pub start_date: NaiveDate,
    /// Generator seed; defaults to the counterfactual seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub population: PopulationSpec,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            start_date: NaiveDate::from_ymd_opt(2003, 1, 2).expect("valid date"),
            seed: None,
            population: PopulationSpec::default(),
        }
    }
}

/// Fee rates of one market as fractions; `min_fee` in currency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub brokerage: f64,
    pub exchange: f64,
    pub supervision: f64,
    pub stamp_duty: f64,
    pub min_fee: f64,
}

impl ScheduleConfig {
    fn from_schedule(s: &FeeSchedule) -> Self {
        ScheduleConfig {
            brokerage: s.brokerage.as_fraction(),
            exchange: s.exchange.as_fraction(),
            supervision: s.supervision.as_fraction(),
            stamp_duty: s.stamp.as_fraction(),
            min_fee: s.min_fee.to_f64(),
        }
    }

    fn to_schedule(self) -> Result<FeeSchedule> {
        FeeSchedule::new(
            Rate::from_fraction(self.brokerage)?,
            Rate::from_fraction(self.exchange)?,
            Rate::from_fraction(self.supervision)?,
            Rate::from_fraction(self.stamp_duty)?,
            Money::from_f64(self.min_fee),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeesConfig {
    pub a: ScheduleConfig,
    pub b: ScheduleConfig,
    /// Brokerage overrides keyed by class (`individual`, `institution`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub class_brokerage: BTreeMap<InvestorClass, f64>,
}

impl Default for FeesConfig {
    fn default() -> Self {
        let f = FeeConfig::default();
        FeesConfig {
            a: ScheduleConfig::from_schedule(&f.a_share),
            b: ScheduleConfig::from_schedule(&f.b_share),
            class_brokerage: BTreeMap::new(),
        }
    }
}

impl FeesConfig {
    pub fn to_fee_config(&self) -> Result<FeeConfig> {
        let cfg = FeeConfig {
            a_share: self.a.to_schedule()?,
            b_share: self.b.to_schedule()?,
            class_brokerage: self
                .class_brokerage
                .iter()
                .map(|(&c, &r)| Ok((c, Rate::from_fraction(r)?)))
                .collect::<Result<_>>()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinningConfig {
    pub frequency_first_edge: f64,
    pub frequency_ratio: f64,
    pub holding_first_edge: f64,
    pub holding_ratio: f64,
}

impl Default for BinningConfig {
    fn default() -> Self {
        let g = BinGrids::default();
        BinningConfig {
            frequency_first_edge: g.frequency.first_edge,
            frequency_ratio: g.frequency.ratio,
            holding_first_edge: g.holding.first_edge,
            holding_ratio: g.holding.ratio,
        }
    }
}

impl BinningConfig {
    pub fn grids(&self) -> Result<BinGrids> {
        let grids = BinGrids {
            frequency: GeometricBins {
                first_edge: self.frequency_first_edge,
                ratio: self.frequency_ratio,
            },
            holding: GeometricBins {
                first_edge: self.holding_first_edge,
                ratio: self.holding_ratio,
            },
        };
        if grids.frequency.is_valid() && grids.holding.is_valid() {
            Ok(grids)
        } else {
            Err(Error::Config(
                "bin edges must be positive and ratios greater than 1".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("report"),
        }
    }
}

/// Full pipeline configuration, read from a sectioned key = value (TOML) file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputPaths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub fees: FeesConfig,
    #[serde(default)]
    pub ledger: LedgerPolicy,
    #[serde(default)]
    pub counterfactual: MonteCarloSettings,
    #[serde(default)]
    pub binning: BinningConfig,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read and validate a configuration file; relative paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(input) = &mut cfg.input {
            input.resolve(base);
        }
        cfg.output.dir = base.join(&cfg.output.dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Seed of the synthetic generator.
    pub fn synth_seed(&self) -> u64 {
        self.synth
            .as_ref()
            .and_then(|s| s.seed)
            .unwrap_or(self.counterfactual.seed)
    }

    /// Override every seed in the configuration.
    pub fn set_seed(&mut self, seed: u64) {
        self.counterfactual.seed = seed;
        if let Some(s) = &mut self.synth {
            s.seed = Some(seed);
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.synth) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "configure either [input] or [synth], not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config("configure one of [input] or [synth]".into()))
            }
            (Some(input), None) => {
                if let Some(missing) = input.all().find(|p| !p.is_file()) {
                    return Err(Error::Config(format!(
                        "input file {} does not exist",
                        missing.display()
                    )));
                }
            }
            (None, Some(s)) => s.population.validate()?,
        }
        self.fees.to_fee_config()?;
        self.binning.grids()?;
        if !(self.fit.k.is_finite() && self.fit.k > 0.0) {
            return Err(Error::Config(format!(
                "fit.k = {} must be positive",
                self.fit.k
            )));
        }
        Ok(())
    }
}

/// Annotated configuration written by `init`; every value is the default.
pub const CONFIG_TEMPLATE: &str = r#"# Pipeline configuration. Values shown are the defaults.
# Configure exactly one of [input] or [synth].

# [input]
# orders = "orders.csv"          # trader_id,class,stock,side,kind,price,size,cancel_target,timestamp,order_id
# stock_meta = "stocks.csv"      # stock,market,reference_price,period_end_price
# calendar = "calendar.csv"      # date[,call_open,call_close,morning_open,morning_close,afternoon_open,afternoon_close]
# dividends = "dividends.csv"    # optional: stock,ex_date,cash_per_share
# index = "index.csv"            # optional: date,market,level
# resort = false                 # stable-sort unsorted order files instead of failing

[synth]
start_date = "2003-01-02"        # trading days are the weekdays from here
# seed = 0                       # defaults to counterfactual.seed

[synth.population]
market_order_prob = 0.2
price_band = 0.05                # limit prices within +-5% of the last trade
days = 20
max_stocks_per_agent = 3
budget_constrained = false
budget = 1000000.0               # per agent and stock, when budget_constrained

[synth.population.investors]
a_individual = 600
a_institution = 100
b_individual = 250
b_institution = 50

[synth.population.stocks]
a_stocks = 30
b_stocks = 13
a_reference_price = 10.0
b_reference_price = 3.0
price_dispersion = 0.5           # reference prices spread as base * exp(U(-d, d))

[synth.population.frequency]
kind = "power_law"               # or kind = "constant" with value = N
exponent = 2.5
min = 2
cap = 1000

[synth.population.size]
mu = 1.5                         # log-mean of the lot count
sigma = 1.0
lot = 100
max_lots = 10000

# Fee rates are fractions of the notional; min_fee is in currency units.
[fees.a]
brokerage = 0.0015
exchange = 0.0001475
supervision = 0.00004
stamp_duty = 0.001
min_fee = 5.0

[fees.b]
brokerage = 0.0015
exchange = 0.000301
supervision = 0.00004
stamp_duty = 0.001
min_fee = 5.0

# [fees.class_brokerage]
# individual = 0.0015
# institution = 0.001

[ledger]
charge_virtual_closeout = true   # the period-end close-out pays fees
count_virtual_in_j = true        # the close-out counts as a transaction

[counterfactual]
replicas = 2000
seed = 0
strict_position_mode = false

[binning]
frequency_first_edge = 1.0
frequency_ratio = 2.0
holding_first_edge = 1.0
holding_ratio = 2.154434690031884   # 10^(1/3)

[fit]
min_count = 10                   # investors per bin for the bin to enter a fit
weighted = false                 # weight bins by their counts
k = 2.0                          # consistency threshold in standard errors

[output]
dir = "report"
"#;
