use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sampling::{derive_seed, real_entry_count, reprice, sample_random_times};
use super::tape::TradeTape;
use crate::error::{Diagnostic, Error, Result};
use crate::ledger::{
    evaluate_sequences, ActivitySequence, Evaluation, FeeConfig, FeeSchedule, InvestorActivity,
    Label, LedgerPolicy,
};
use crate::orderflow::{DividendEvent, InvestorClass, Market, StockId, TraderId};
use crate::spectro::{BinAccumulator, BinGrids, BinKind, BinnedSeries, Pool, RunningStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSettings {
    pub replicas: u32,
    pub seed: u64,
    /// Redraw until the replica never holds a negative position.
    pub strict_position_mode: bool,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        MonteCarloSettings {
            replicas: 2000,
            seed: 0,
            strict_position_mode: false,
        }
    }
}

const STRICT_MAX_ATTEMPTS: u32 = 1000;

/// Outcome of one random-timing replica of one investor.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaResult {
    pub investor_id: TraderId,
    pub replica: u32,
    pub ret: f64,
    pub label: Label,
    pub transactions: u64,
    pub holding_days: Option<f64>,
}

/// Shared inputs for replica evaluation.
#[derive(Clone, Copy)]
pub struct ReplicaContext<'a> {
    pub tapes: &'a BTreeMap<StockId, TradeTape>,
    pub fees: &'a FeeConfig,
    pub dividends: &'a [DividendEvent],
    pub policy: LedgerPolicy,
}

/// Reprice each sequence at its drawn tape positions and run the ledger on
/// the result.
pub fn reprice_and_evaluate(
    sequences: &[ActivitySequence],
    positions: &[Vec<usize>],
    tapes: &[&TradeTape],
    schedule: &FeeSchedule,
    dividends: &[DividendEvent],
    policy: LedgerPolicy,
) -> Evaluation {
    let repriced: Vec<ActivitySequence> = sequences
        .iter()
        .zip(positions)
        .zip(tapes)
        .map(|((s, p), t)| reprice(s, p, t))
        .collect();
    evaluate_sequences(&repriced, schedule, dividends, policy)
}

fn tapes_for<'a>(
    activity: &InvestorActivity,
    tapes: &'a BTreeMap<StockId, TradeTape>,
) -> Result<Vec<&'a TradeTape>> {
    activity
        .sequences
        .iter()
        .map(|s| {
            let tape = tapes
                .get(&s.stock_id)
                .ok_or_else(|| Error::InsufficientTape {
                    stock: s.stock_id.to_string(),
                    needed: real_entry_count(s),
                    available: 0,
                })?;
            if tape.len() < real_entry_count(s) {
                return Err(Error::InsufficientTape {
                    stock: s.stock_id.to_string(),
                    needed: real_entry_count(s),
                    available: tape.len(),
                });
            }
            Ok(tape)
        })
        .collect()
}

/// Evaluate replica `replica` of one investor.
pub fn replicate_investor(
    activity: &InvestorActivity,
    replica: u32,
    settings: &MonteCarloSettings,
    ctx: &ReplicaContext<'_>,
) -> Result<ReplicaResult> {
    let tapes = tapes_for(activity, ctx.tapes)?;
    let schedule = ctx.fees.schedule(activity.market, activity.class)?;
    replicate_with(activity, &tapes, &schedule, replica, settings, ctx)
}

fn replicate_with(
    activity: &InvestorActivity,
    tapes: &[&TradeTape],
    schedule: &FeeSchedule,
    replica: u32,
    settings: &MonteCarloSettings,
    ctx: &ReplicaContext<'_>,
) -> Result<ReplicaResult> {
    let mut positions = Vec::with_capacity(activity.sequences.len());
    for (seq, tape) in activity.sequences.iter().zip(tapes) {
        let seed = derive_seed(settings.seed, &activity.investor_id, &seq.stock_id, replica);
        let mut rng = ChaCha8Rng::from_seed(seed);
        let count = real_entry_count(seq);
        let mut drawn = sample_random_times(count, tape, &mut rng)?;
        if settings.strict_position_mode {
            let mut attempts = 1;
            while reprice(seq, &drawn, tape).positions().any(|p| p < 0) {
                if attempts == STRICT_MAX_ATTEMPTS {
                    return Err(Error::Config(format!(
                        "strict position mode: no non-negative replica for {}/{} after {attempts} draws",
                        activity.investor_id, seq.stock_id
                    )));
                }
                drawn = sample_random_times(count, tape, &mut rng)?;
                attempts += 1;
            }
        }
        positions.push(drawn);
    }
    let eval = reprice_and_evaluate(
        &activity.sequences,
        &positions,
        tapes,
        schedule,
        ctx.dividends,
        ctx.policy,
    );
    let ret = eval.ret.unwrap_or(0.0);
    Ok(ReplicaResult {
        investor_id: activity.investor_id.clone(),
        replica,
        ret,
        label: Label::of(ret),
        transactions: eval.transactions,
        holding_days: eval.holding.mean_days(),
    })
}

/// Replica statistics of one investor.
#[derive(Debug, Clone, PartialEq)]
pub struct InvestorReplicaSummary {
    pub investor_id: TraderId,
    pub class: InvestorClass,
    pub market: Market,
    pub transactions: u64,
    pub replicas: u32,
    pub mean_ret: f64,
    pub std_ret: f64,
    pub min_ret: f64,
    pub max_ret: f64,
    pub winners: u32,
    pub losers: u32,
}

/// Pooled replica returns of one (market, class) cell, binned by frequency
/// and by holding time, for the all/winner/loser pools.
#[derive(Debug, Clone, Default)]
pub struct ReplicaPools {
    accumulators: BTreeMap<(BinKind, Pool), BinAccumulator>,
}

impl ReplicaPools {
    fn push(&mut self, r: &ReplicaResult, grids: &BinGrids) {
        let j = r.transactions as f64;
        let dt = r.holding_days.unwrap_or(0.0);
        for pool in Pool::ALL.into_iter().filter(|p| p.admits(r.label)) {
            self.accumulators
                .entry((BinKind::Frequency, pool))
                .or_default()
                .push(grids.frequency.index_of(j), r.ret, dt);
            self.accumulators
                .entry((BinKind::HoldingTime, pool))
                .or_default()
                .push(grids.holding.index_of(dt), r.ret, j);
        }
    }

    /// Binned series for one kind and pool; bins span the range occupied by
    /// the `all` pool.
    pub fn series(&self, kind: BinKind, pool: Pool, grids: &BinGrids) -> BinnedSeries {
        let grid = grids.grid(kind);
        let range = self
            .accumulators
            .get(&(kind, Pool::All))
            .and_then(|a| a.occupied_range());
        match self.accumulators.get(&(kind, pool)) {
            Some(acc) => acc.finish(kind, pool, grid, range),
            None => BinAccumulator::default().finish(kind, pool, grid, range),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MonteCarloOutput {
    pub investors: Vec<InvestorReplicaSummary>,
    pub pooled: BTreeMap<(Market, InvestorClass), ReplicaPools>,
    pub diagnostics: Vec<Diagnostic>,
}

const CHUNK: usize = 64;

/// Run `settings.replicas` random-timing replicas for every investor.
///
/// Replicas are computed in parallel and folded into the summaries in
/// (investor, replica) order, so outputs do not depend on the number of
/// worker threads.
pub fn run_monte_carlo(
    activities: &[InvestorActivity],
    settings: &MonteCarloSettings,
    grids: &BinGrids,
    ctx: &ReplicaContext<'_>,
) -> MonteCarloOutput {
    let mut out = MonteCarloOutput::default();
    let mut runnable = Vec::with_capacity(activities.len());
    for a in activities {
        let prepared =
            tapes_for(a, ctx.tapes).and_then(|t| Ok((t, ctx.fees.schedule(a.market, a.class)?)));
        match prepared {
            Ok((tapes, schedule)) => runnable.push((a, tapes, schedule)),
            Err(e) => out.diagnostics.push(Diagnostic::new(
                "counterfactual",
                format!("investor `{}` ({}) skipped: {e}", a.investor_id, a.market),
            )),
        }
    }

    for chunk in runnable.chunks(CHUNK) {
        let results: Vec<Result<Vec<ReplicaResult>>> = chunk
            .par_iter()
            .map(|(a, tapes, schedule)| {
                (0..settings.replicas)
                    .map(|r| replicate_with(a, tapes, schedule, r, settings, ctx))
                    .collect()
            })
            .collect();
        for ((a, ..), res) in chunk.iter().zip(results) {
            let replicas = match res {
                Ok(r) => r,
                Err(e) => {
                    out.diagnostics.push(Diagnostic::new(
                        "counterfactual",
                        format!("investor `{}` ({}) skipped: {e}", a.investor_id, a.market),
                    ));
                    continue;
                }
            };
            let pools = out.pooled.entry((a.market, a.class)).or_default();
            let mut stats = RunningStats::default();
            let (mut min_ret, mut max_ret) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut winners, mut losers) = (0, 0);
            for r in &replicas {
                pools.push(r, grids);
                stats.push(r.ret);
                min_ret = min_ret.min(r.ret);
                max_ret = max_ret.max(r.ret);
                match r.label {
                    Label::Winner => winners += 1,
                    Label::Loser => losers += 1,
                    Label::Flat => {}
                }
            }
            if replicas.is_empty() {
                continue;
            }
            out.investors.push(InvestorReplicaSummary {
                investor_id: a.investor_id.clone(),
                class: a.class,
                market: a.market,
                transactions: replicas[0].transactions,
                replicas: replicas.len() as u32,
                mean_ret: stats.mean(),
                std_ret: stats.std(),
                min_ret,
                max_ret,
                winners,
                losers,
            });
        }
    }
    out
}

pub const REPLICA_SUMMARY_HEADER: &str = "bin_kind,bin_center,pool,mean_R,std_R,count";

/// Pooled replica summary of one (market, class) cell.
pub fn write_replica_summary(pools: &ReplicaPools, grids: &BinGrids) -> String {
    let mut out = format!("{REPLICA_SUMMARY_HEADER}\n");
    for kind in [BinKind::Frequency, BinKind::HoldingTime] {
        for pool in Pool::ALL {
            for b in pools.series(kind, pool, grids).bins {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    kind.as_str(),
                    b.center,
                    pool.as_str(),
                    b.mean_ret,
                    b.std_ret,
                    b.count
                );
            }
        }
    }
    out
}

pub const REPLICA_INVESTOR_HEADER: &str =
    "investor,class,market,J,replicas,mean_R,std_R,min_R,max_R,winners,losers";

pub fn write_investor_replicas(summaries: &[InvestorReplicaSummary]) -> String {
    let mut out = format!("{REPLICA_INVESTOR_HEADER}\n");
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.investor_id,
            s.class,
            s.market,
            s.transactions,
            s.replicas,
            s.mean_ret,
            s.std_ret,
            s.min_ret,
            s.max_ret,
            s.winners,
            s.losers
        );
    }
    out
}
