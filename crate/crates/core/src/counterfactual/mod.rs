//! Random-timing benchmark: each investor's volumes and transaction counts
//! are kept while execution times are redrawn from the stock's trade tape.

mod monte_carlo;
mod sampling;
mod tape;

pub use monte_carlo::{
    replicate_investor, reprice_and_evaluate, run_monte_carlo, write_investor_replicas,
    write_replica_summary, InvestorReplicaSummary, MonteCarloOutput, MonteCarloSettings,
    ReplicaContext, ReplicaPools, ReplicaResult, REPLICA_INVESTOR_HEADER, REPLICA_SUMMARY_HEADER,
};
pub use sampling::{derive_seed, real_entry_count, reprice, sample_random_times};
pub use tape::{tapes_from_fills, TradeTape};
