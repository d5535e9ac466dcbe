use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;

use crate::counterfactual::ReplicaPools;
use crate::orderflow::{InvestorClass, Market, Money, StockId};
use crate::spectro::{
    BinGrids, BinKind, BinnedSeries, CellAnalysis, CellFits, OneOverN, Pool, PoolCounts, Relation,
};

type Cell = (Market, InvestorClass);

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cell_prefix((market, class): Cell) -> String {
    format!("{market},{}", class.as_str())
}

pub const POOLS_HEADER: &str =
    "market,class,winners,losers,flats,total,winner_fraction,loser_fraction";

pub fn write_pools(counts: &BTreeMap<Cell, PoolCounts>) -> String {
    let mut out = format!("{POOLS_HEADER}\n");
    for (&cell, c) in counts {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            cell_prefix(cell),
            c.winners,
            c.losers,
            c.flats,
            c.total(),
            c.fraction(crate::ledger::Label::Winner),
            c.fraction(crate::ledger::Label::Loser)
        );
    }
    out
}

pub const BINNED_HEADER: &str =
    "market,class,bin_kind,pool,lower,upper,center,count,mean_R,std_R,mean_other";

pub fn write_binned(cells: &[CellAnalysis]) -> String {
    let mut out = format!("{BINNED_HEADER}\n");
    for cell in cells {
        for ((kind, pool), series) in &cell.series {
            for b in &series.bins {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    cell_prefix((cell.market, cell.class)),
                    kind.as_str(),
                    pool.as_str(),
                    b.lower,
                    b.upper,
                    b.center,
                    b.count,
                    b.mean_ret,
                    b.std_ret,
                    b.mean_other
                );
            }
        }
    }
    out
}

pub const FITS_HEADER: &str = "market,class,pool,exponent,name,value,stderr,r2,bins_used";

pub fn write_fits(cells: &[(Cell, &CellFits)]) -> String {
    let mut out = format!("{FITS_HEADER}\n");
    for (cell, fits) in cells {
        for ((pool, relation), fit) in &fits.fits {
            let e = fit.estimate;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                cell_prefix(*cell),
                pool.as_str(),
                relation.exponent_name(),
                relation.label(),
                opt(e.map(|e| e.value)),
                opt(e.map(|e| e.stderr)),
                opt(e.map(|e| e.r2)),
                fit.bins_used
            );
        }
    }
    out
}

pub const CONSISTENCY_HEADER: &str = "market,class,pool,alpha,beta,gamma,beta_gamma,sigma,verdict";

/// `sigma` is the propagated standard error of `beta_gamma`.
pub fn write_consistency(cells: &[(Cell, &CellFits)]) -> String {
    let mut out = format!("{CONSISTENCY_HEADER}\n");
    for (cell, fits) in cells {
        for (pool, (triple, report)) in &fits.consistency {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                cell_prefix(*cell),
                pool.as_str(),
                opt(triple.alpha.map(|m| m.value)),
                opt(triple.beta.map(|m| m.value)),
                opt(triple.gamma.map(|m| m.value)),
                opt(report.beta_gamma.map(|m| m.value)),
                opt(report.beta_gamma.map(|m| m.stderr)),
                report.verdict.as_str()
            );
        }
    }
    out
}

pub const BOXSTATS_HEADER: &str = "market,class,pool,count,min,q1,median,q3,max";

pub fn write_boxstats(cells: &[CellAnalysis]) -> String {
    let mut out = format!("{BOXSTATS_HEADER}\n");
    for cell in cells {
        for (pool, b) in &cell.boxes {
            let Some(b) = b else { continue };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                cell_prefix((cell.market, cell.class)),
                pool.as_str(),
                b.count,
                b.min,
                b.lower_quartile,
                b.median,
                b.upper_quartile,
                b.max
            );
        }
    }
    out
}

fn series_rows(out: &mut String, cell: Cell, source: &str, series: &BinnedSeries) {
    for b in series.bins.iter().filter(|b| b.count > 0) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            cell_prefix(cell),
            series.pool.as_str(),
            source,
            b.lower,
            b.upper,
            b.center,
            b.mean_ret,
            b.std_ret,
            b.count
        );
    }
}

/// Average return against frequency (`kind` = J) or holding time (dt), for
/// real investors and, when available, their random-timing replicas.
pub fn write_return_figure(
    kind: BinKind,
    cells: &[CellAnalysis],
    random: Option<&BTreeMap<Cell, ReplicaPools>>,
    grids: &BinGrids,
) -> String {
    let x = kind.as_str();
    let mut out =
        format!("market,class,pool,source,{x}_lower,{x}_upper,{x}_center,mean_R,std_R,count\n");
    for cell in cells {
        let key = (cell.market, cell.class);
        for pool in Pool::ALL {
            series_rows(&mut out, key, "real", &cell.series[&(kind, pool)]);
            if let Some(pools) = random.and_then(|r| r.get(&key)) {
                series_rows(&mut out, key, "random", &pools.series(kind, pool, grids));
            }
        }
    }
    out
}

pub const POWER_LAW_HEADER: &str = "market,class,pool,relation,x,y,count,fitted_y";

/// Log-log scatter of the three relations for winners and losers, with the
/// fitted line evaluated at each bin center.
pub fn write_power_law_figure(cells: &[CellAnalysis]) -> String {
    let mut out = format!("{POWER_LAW_HEADER}\n");
    for cell in cells {
        for pool in [Pool::Winner, Pool::Loser] {
            for relation in Relation::ALL {
                let series = &cell.series[&(relation.bin_kind(), pool)];
                let fit = cell.fits.fits[&(pool, relation)].estimate;
                for b in series.bins.iter().filter(|b| b.count > 0) {
                    let y = match relation {
                        Relation::HoldingVsFrequency => b.mean_other,
                        _ => b.mean_ret.abs(),
                    };
                    let fitted = fit
                        .map(|e| (e.intercept + relation.sign() * e.value * b.center.ln()).exp());
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        cell_prefix((cell.market, cell.class)),
                        pool.as_str(),
                        relation.label(),
                        b.center,
                        y,
                        b.count,
                        opt(fitted)
                    );
                }
            }
        }
    }
    out
}

pub const ONE_OVER_N_HEADER: &str = "market,date,value,normalized,index_normalized";

pub fn write_one_over_n(series: &BTreeMap<Market, OneOverN>) -> String {
    let mut out = format!("{ONE_OVER_N_HEADER}\n");
    for (market, s) in series {
        for p in &s.points {
            let _ = writeln!(
                out,
                "{market},{},{},{},{}",
                p.date,
                p.value,
                p.normalized,
                opt(p.index_normalized)
            );
        }
    }
    out
}

pub const DAILY_CLOSE_HEADER: &str = "stock,date,close";

pub fn write_daily_close(closes: &BTreeMap<StockId, BTreeMap<NaiveDate, Money>>) -> String {
    let mut out = format!("{DAILY_CLOSE_HEADER}\n");
    for (stock, days) in closes {
        for (date, close) in days {
            let _ = writeln!(out, "{stock},{date},{close}");
        }
    }
    out
}
