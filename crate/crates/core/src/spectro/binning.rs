use std::collections::BTreeMap;

use super::stats::RunningStats;
use crate::ledger::{InvestorPerformance, Label};

/// Geometric bin grid `[first·ratio^k, first·ratio^(k+1))` for integer `k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeometricBins {
    pub first_edge: f64,
    pub ratio: f64,
}

impl GeometricBins {
    /// Ratio-2 bins starting at 1, for transaction counts.
    pub const FREQUENCY: GeometricBins = GeometricBins {
        first_edge: 1.0,
        ratio: 2.0,
    };

    /// Three bins per decade, for holding times in days.
    pub fn decade_thirds() -> GeometricBins {
        GeometricBins {
            first_edge: 1.0,
            ratio: 10f64.powf(1.0 / 3.0),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.first_edge.is_finite()
            && self.first_edge > 0.0
            && self.ratio.is_finite()
            && self.ratio > 1.0
    }

    pub fn edge(&self, k: i64) -> f64 {
        self.first_edge * self.ratio.powi(k as i32)
    }

    pub fn center(&self, k: i64) -> f64 {
        (self.edge(k) * self.edge(k + 1)).sqrt()
    }

    /// Bin containing `x`, or `None` for non-positive or non-finite values.
    pub fn index_of(&self, x: f64) -> Option<i64> {
        if !(x.is_finite() && x > 0.0) {
            return None;
        }
        let mut k = ((x / self.first_edge).ln() / self.ratio.ln()).floor() as i64;
        // values within rounding of an edge belong to the upper bin
        let x = x * (1.0 + 1e-12);
        while self.edge(k + 1) <= x {
            k += 1;
        }
        while self.edge(k) > x {
            k -= 1;
        }
        Some(k)
    }
}

/// Grids for the two binning axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinGrids {
    pub frequency: GeometricBins,
    pub holding: GeometricBins,
}

impl Default for BinGrids {
    fn default() -> Self {
        BinGrids {
            frequency: GeometricBins::FREQUENCY,
            holding: GeometricBins::decade_thirds(),
        }
    }
}

impl BinGrids {
    pub fn grid(&self, kind: BinKind) -> GeometricBins {
        match kind {
            BinKind::Frequency => self.frequency,
            BinKind::HoldingTime => self.holding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinKind {
    Frequency,
    HoldingTime,
}

impl BinKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BinKind::Frequency => "J",
            BinKind::HoldingTime => "dt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pool {
    All,
    Winner,
    Loser,
}

impl Pool {
    pub const ALL: [Pool; 3] = [Pool::All, Pool::Winner, Pool::Loser];

    pub fn as_str(self) -> &'static str {
        match self {
            Pool::All => "all",
            Pool::Winner => "winner",
            Pool::Loser => "loser",
        }
    }

    pub fn admits(self, label: Label) -> bool {
        match self {
            Pool::All => true,
            Pool::Winner => label == Label::Winner,
            Pool::Loser => label == Label::Loser,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub index: i64,
    pub lower: f64,
    pub upper: f64,
    pub center: f64,
    pub count: u64,
    pub mean_ret: f64,
    pub std_ret: f64,
    /// Mean holding time (frequency bins) or mean frequency (holding-time bins).
    pub mean_other: f64,
}

/// Per-bin averages of one pool over a contiguous range of bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub kind: BinKind,
    pub pool: Pool,
    pub grid: GeometricBins,
    pub bins: Vec<Bin>,
    /// Values that could not be binned (non-positive).
    pub unbinned: u64,
}

/// One observation to bin: return, transaction count, holding time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub ret: f64,
    pub transactions: u64,
    pub holding_days: f64,
}

impl From<&InvestorPerformance> for Observation {
    fn from(p: &InvestorPerformance) -> Self {
        Observation {
            ret: p.ret,
            transactions: p.transactions,
            holding_days: p.holding_days,
        }
    }
}

/// Accumulates observations per bin in insertion order.
#[derive(Debug, Clone, Default)]
pub struct BinAccumulator {
    bins: BTreeMap<i64, (RunningStats, RunningStats)>,
    unbinned: u64,
}

impl BinAccumulator {
    pub fn push(&mut self, key: Option<i64>, ret: f64, other: f64) {
        match key {
            Some(k) => {
                let slot = self.bins.entry(k).or_default();
                slot.0.push(ret);
                slot.1.push(other);
            }
            None => self.unbinned += 1,
        }
    }

    /// Materialize every bin between the lowest and highest occupied one;
    /// empty bins are kept with count 0.
    pub fn finish(
        &self,
        kind: BinKind,
        pool: Pool,
        grid: GeometricBins,
        range: Option<(i64, i64)>,
    ) -> BinnedSeries {
        let range = range.or_else(|| {
            let lo = *self.bins.keys().next()?;
            let hi = *self.bins.keys().next_back()?;
            Some((lo, hi))
        });
        let bins = match range {
            None => Vec::new(),
            Some((lo, hi)) => (lo..=hi)
                .map(|k| {
                    let (r, o) = self.bins.get(&k).copied().unwrap_or_default();
                    Bin {
                        index: k,
                        lower: grid.edge(k),
                        upper: grid.edge(k + 1),
                        center: grid.center(k),
                        count: r.count(),
                        mean_ret: r.mean(),
                        std_ret: r.std(),
                        mean_other: o.mean(),
                    }
                })
                .collect(),
        };
        BinnedSeries {
            kind,
            pool,
            grid,
            bins,
            unbinned: self.unbinned,
        }
    }

    pub fn occupied_range(&self) -> Option<(i64, i64)> {
        Some((*self.bins.keys().next()?, *self.bins.keys().next_back()?))
    }
}

fn bin_key(kind: BinKind, grid: &GeometricBins, obs: &Observation) -> (Option<i64>, f64) {
    match kind {
        BinKind::Frequency => (grid.index_of(obs.transactions as f64), obs.holding_days),
        BinKind::HoldingTime => (grid.index_of(obs.holding_days), obs.transactions as f64),
    }
}

/// Bin observations by frequency or holding time and average the return
/// per bin, for the given pool. Bins span the range occupied by the whole
/// sample so every pool shares one grid.
pub fn bin_and_average(
    observations: &[Observation],
    kind: BinKind,
    grid: GeometricBins,
    pool: Pool,
) -> BinnedSeries {
    let mut all = BinAccumulator::default();
    let mut acc = BinAccumulator::default();
    for obs in observations {
        let (key, other) = bin_key(kind, &grid, obs);
        all.push(key, obs.ret, other);
        if pool.admits(Label::of(obs.ret)) {
            acc.push(key, obs.ret, other);
        }
    }
    acc.finish(kind, pool, grid, all.occupied_range())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(ret: f64, j: u64, dt: f64) -> Observation {
        Observation {
            ret,
            transactions: j,
            holding_days: dt,
        }
    }

    #[test]
    fn ratio_two_binning() {
        let data = [
            obs(0.1, 1, 1.0),
            obs(0.2, 1, 1.0),
            obs(0.3, 2, 1.0),
            obs(0.4, 3, 1.0),
        ];
        let s = bin_and_average(
            &data,
            BinKind::Frequency,
            GeometricBins::FREQUENCY,
            Pool::All,
        );
        let got: Vec<_> = s.bins.iter().map(|b| (b.lower, b.upper, b.count)).collect();
        assert_eq!(got, [(1.0, 2.0, 2), (2.0, 4.0, 2)]);
        assert!((s.bins[0].mean_ret - 0.15).abs() < 1e-15);
        assert!((s.bins[0].center - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_edges_land_in_upper_bin() {
        let g = GeometricBins::FREQUENCY;
        for k in 0..40 {
            let x = 2f64.powi(k);
            assert_eq!(g.index_of(x), Some(k as i64));
            assert_eq!(g.index_of(x * 1.999_999), Some(k as i64));
        }
        let d = GeometricBins::decade_thirds();
        assert_eq!(d.index_of(10.0), Some(3));
        assert_eq!(d.index_of(0.01), Some(-6));
        assert_eq!(d.index_of(0.0), None);
    }

    #[test]
    fn single_investor_single_bin() {
        let s = bin_and_average(
            &[obs(0.1, 5, 2.0)],
            BinKind::Frequency,
            GeometricBins::FREQUENCY,
            Pool::All,
        );
        assert_eq!(s.bins.len(), 1);
        assert_eq!(s.bins[0].count, 1);
    }

    #[test]
    fn identical_returns_have_zero_std() {
        let data = vec![obs(0.05, 3, 2.0); 6];
        let s = bin_and_average(
            &data,
            BinKind::Frequency,
            GeometricBins::FREQUENCY,
            Pool::All,
        );
        assert_eq!(s.bins[0].std_ret, 0.0);
    }

    #[test]
    fn gaps_kept_as_empty_bins_and_pools_share_grid() {
        let data = [obs(0.1, 1, 1.0), obs(-0.1, 20, 1.0)];
        let w = bin_and_average(
            &data,
            BinKind::Frequency,
            GeometricBins::FREQUENCY,
            Pool::Winner,
        );
        assert_eq!(w.bins.len(), 5);
        assert_eq!(
            w.bins.iter().map(|b| b.count).collect::<Vec<_>>(),
            [1, 0, 0, 0, 0]
        );
        let l = bin_and_average(
            &data,
            BinKind::Frequency,
            GeometricBins::FREQUENCY,
            Pool::Loser,
        );
        assert_eq!(l.bins.last().unwrap().count, 1);
    }

    #[test]
    fn zero_holding_time_unbinned() {
        let data = [obs(0.1, 1, 0.0), obs(0.1, 1, 2.0)];
        let s = bin_and_average(
            &data,
            BinKind::HoldingTime,
            GeometricBins::decade_thirds(),
            Pool::All,
        );
        assert_eq!(s.unbinned, 1);
        assert_eq!(s.bins.iter().map(|b| b.count).sum::<u64>(), 1);
    }
}
