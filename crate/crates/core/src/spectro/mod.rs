//! Stylized-fact extraction: winner/loser pools, frequency and holding-time
//! binning, log-log power-law fits, the `α = βγ` consistency check, box
//! statistics and the equal-weight buy-and-hold benchmark.

mod analysis;
mod binning;
mod boxstats;
mod classify;
mod consistency;
mod fit;
mod one_over_n;
mod stats;

pub use analysis::{analyze_cell, fit_cell, CellAnalysis, CellFits};
pub use binning::{
    bin_and_average, Bin, BinAccumulator, BinGrids, BinKind, BinnedSeries, GeometricBins,
    Observation, Pool,
};
pub use boxstats::{box_stats, BoxStats};
pub use classify::{classify_investors, PoolCounts};
pub use consistency::{
    check_exponent_relation, product_with_error, ConsistencyReport, ExponentTriple, Measured,
    Verdict,
};
pub use fit::{fit_power_law, ols, Estimate, FitSettings, PowerLawFit, Relation};
pub use one_over_n::{one_over_n_benchmark, BenchmarkPoint, OneOverN};
pub use stats::RunningStats;
