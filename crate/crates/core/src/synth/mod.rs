//! Zero-intelligence synthetic order flow with known structure, plus a
//! planted-performance generator for exponent-recovery checks.

mod generate;
mod planted;
mod population;
mod spec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub use generate::{
    generate_orderflow, GroundTruth, StockTruth, SyntheticMarket, GENERATOR_VERSION,
};
pub use planted::{planted_performances, PlantedRelation};
pub use population::{generate_population, Agent, FrequencySampler};
pub use spec::{Cohorts, FrequencyDist, PopulationSpec, SizeDist, StockUniverse};

/// Independent generator stream for `(seed, label, key)`.
pub(crate) fn stream_rng(seed: u64, label: &str, key: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"spectroscopy/synth/v1");
    h.update(seed.to_le_bytes());
    for part in [label, key] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}
