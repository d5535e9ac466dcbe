use rand::Rng;
use sha2::{Digest, Sha256};

use super::tape::TradeTape;
use crate::error::{Error, Result};
use crate::ledger::{ActivitySequence, Entry};
use crate::orderflow::{StockId, TraderId};

/// 32-byte generator seed for one (investor, stock, replica) work item.
///
/// Depends only on its inputs, so replicas are reproducible regardless of
/// scheduling.
pub fn derive_seed(master: u64, investor: &TraderId, stock: &StockId, replica: u32) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"spectroscopy/replica/v1");
    h.update(master.to_le_bytes());
    h.update((investor.as_str().len() as u64).to_le_bytes());
    h.update(investor.as_str().as_bytes());
    h.update((stock.as_str().len() as u64).to_le_bytes());
    h.update(stock.as_str().as_bytes());
    h.update(replica.to_le_bytes());
    h.finalize().into()
}

/// Draw `count` distinct tape positions uniformly without replacement,
/// returned ascending (so the corresponding timestamps are strictly
/// increasing).
pub fn sample_random_times<R: Rng + ?Sized>(
    count: usize,
    tape: &TradeTape,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if count > tape.len() {
        return Err(Error::InsufficientTape {
            stock: tape.stock_id.to_string(),
            needed: count,
            available: tape.len(),
        });
    }
    let mut picked = rand::seq::index::sample(rng, tape.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Replace the times of the real entries with the given tape positions (in
/// entry order) and reprice them at the tape. Volumes and the virtual
/// close-out are unchanged.
pub fn reprice(seq: &ActivitySequence, positions: &[usize], tape: &TradeTape) -> ActivitySequence {
    let mut next = positions.iter();
    let entries = seq
        .entries
        .iter()
        .map(|e| {
            if e.is_virtual {
                return *e;
            }
            let idx = *next.next().expect("one position per real entry");
            let (time, price) = tape.get(idx);
            Entry {
                volume: e.volume,
                notional: price.times_shares(e.shares()),
                time,
                seq: idx as u64,
                is_virtual: false,
            }
        })
        .collect();
    ActivitySequence {
        investor_id: seq.investor_id.clone(),
        stock_id: seq.stock_id.clone(),
        entries,
    }
}

pub fn real_entry_count(seq: &ActivitySequence) -> usize {
    seq.entries.iter().filter(|e| !e.is_virtual).count()
}
