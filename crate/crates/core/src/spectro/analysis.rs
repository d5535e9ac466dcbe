use std::collections::BTreeMap;

use super::binning::{bin_and_average, BinGrids, BinKind, BinnedSeries, Observation, Pool};
use super::boxstats::{box_stats, BoxStats};
use super::consistency::{check_exponent_relation, ConsistencyReport, ExponentTriple, Measured};
use super::fit::{fit_power_law, FitSettings, PowerLawFit, Relation};
use crate::error::Diagnostic;
use crate::ledger::Label;
use crate::orderflow::{InvestorClass, Market};

/// Fits of the three relations and the consistency verdict for each pool.
#[derive(Debug, Clone, Default)]
pub struct CellFits {
    pub fits: BTreeMap<(Pool, Relation), PowerLawFit>,
    pub consistency: BTreeMap<Pool, (ExponentTriple, ConsistencyReport)>,
}

/// Fit every (pool, relation) pair using `series` to look up binned data.
pub fn fit_cell(
    series: impl Fn(BinKind, Pool) -> BinnedSeries,
    settings: &FitSettings,
) -> CellFits {
    let mut out = CellFits::default();
    for pool in Pool::ALL {
        let freq = series(BinKind::Frequency, pool);
        let hold = series(BinKind::HoldingTime, pool);
        let mut triple = ExponentTriple::default();
        for relation in Relation::ALL {
            let s = match relation.bin_kind() {
                BinKind::Frequency => &freq,
                BinKind::HoldingTime => &hold,
            };
            let fit = fit_power_law(s, relation, settings);
            let m = Measured::from_fit(&fit);
            match relation {
                Relation::ReturnVsFrequency => triple.alpha = m,
                Relation::ReturnVsHolding => triple.beta = m,
                Relation::HoldingVsFrequency => triple.gamma = m,
            }
            out.fits.insert((pool, relation), fit);
        }
        out.consistency
            .insert(pool, (triple, check_exponent_relation(&triple, settings.k)));
    }
    out
}

/// Everything derived from one (market, class) cell of real investors.
#[derive(Debug, Clone)]
pub struct CellAnalysis {
    pub market: Market,
    pub class: InvestorClass,
    pub series: BTreeMap<(BinKind, Pool), BinnedSeries>,
    pub fits: CellFits,
    /// Return distribution per pool; `None` for an empty pool.
    pub boxes: BTreeMap<Pool, Option<BoxStats>>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn analyze_cell(
    market: Market,
    class: InvestorClass,
    observations: &[Observation],
    grids: &BinGrids,
    settings: &FitSettings,
) -> CellAnalysis {
    let mut series = BTreeMap::new();
    for kind in [BinKind::Frequency, BinKind::HoldingTime] {
        for pool in Pool::ALL {
            series.insert(
                (kind, pool),
                bin_and_average(observations, kind, grids.grid(kind), pool),
            );
        }
    }
    let fits = fit_cell(|k, p| series[&(k, p)].clone(), settings);

    let mut boxes = BTreeMap::new();
    for pool in Pool::ALL {
        let rets: Vec<f64> = observations
            .iter()
            .filter(|o| pool.admits(Label::of(o.ret)))
            .map(|o| o.ret)
            .collect();
        boxes.insert(pool, box_stats(&rets));
    }

    let cell = format!("{market}/{}", class.code());
    let mut diagnostics = Vec::new();
    for pool in [Pool::Winner, Pool::Loser] {
        if boxes[&pool].is_none() {
            diagnostics.push(Diagnostic::new(
                "spectro",
                format!("{cell}: {} pool empty, fits skipped", pool.as_str()),
            ));
        }
    }
    for ((pool, relation), fit) in &fits.fits {
        if fit.estimate.is_none() && boxes[pool].is_some() {
            for note in &fit.notes {
                diagnostics.push(Diagnostic::new(
                    "spectro",
                    format!(
                        "{cell} {} {}: {note}",
                        pool.as_str(),
                        relation.exponent_name()
                    ),
                ));
            }
        }
    }
    CellAnalysis {
        market,
        class,
        series,
        fits,
        boxes,
        diagnostics,
    }
}
