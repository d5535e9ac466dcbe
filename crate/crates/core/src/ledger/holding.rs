use std::collections::VecDeque;

use super::sequence::ActivitySequence;
use crate::orderflow::CENTIS_PER_DAY;

/// FIFO-matched holding periods of one sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HoldingTime {
    /// `(shares, duration in centiseconds)` per matched lot fragment.
    pub round_trips: Vec<(i64, i64)>,
    pub matched_shares: i64,
    /// Σ shares × duration, in share-centiseconds.
    pub weighted_centis: i128,
}

impl HoldingTime {
    /// Share-weighted mean holding time in days; `None` when nothing matched.
    pub fn mean_days(&self) -> Option<f64> {
        mean_days(self.weighted_centis, self.matched_shares)
    }

    pub fn merge(&mut self, other: &HoldingTime) {
        self.round_trips.extend_from_slice(&other.round_trips);
        self.matched_shares += other.matched_shares;
        self.weighted_centis += other.weighted_centis;
    }
}

pub(crate) fn mean_days(weighted_centis: i128, shares: i64) -> Option<f64> {
    (shares > 0).then(|| weighted_centis as f64 / shares as f64 / CENTIS_PER_DAY as f64)
}

/// Match each closing share to the earliest unmatched opening share.
///
/// On a sanitized sequence every sell closes earlier buys. Sequences that go
/// short (random-timing replicas) are handled symmetrically: a buy first
/// closes outstanding short lots.
pub fn holding_time_fifo(seq: &ActivitySequence) -> HoldingTime {
    let mut out = HoldingTime::default();
    // open lots: (signed shares, open time); all lots share one sign
    let mut lots: VecDeque<(i64, i64)> = VecDeque::new();
    for e in &seq.entries {
        // position delta: buys add, sells subtract
        let mut delta = -e.volume;
        let t = e.time.raw();
        while delta != 0 {
            match lots.front_mut() {
                Some((lot, opened)) if lot.signum() != delta.signum() => {
                    let qty = lot.abs().min(delta.abs());
                    let duration = t - *opened;
                    out.round_trips.push((qty, duration));
                    out.matched_shares += qty;
                    out.weighted_centis += i128::from(qty) * i128::from(duration);
                    *lot += qty * delta.signum();
                    delta -= qty * delta.signum();
                    if *lot == 0 {
                        lots.pop_front();
                    }
                }
                _ => {
                    lots.push_back((delta, t));
                    delta = 0;
                }
            }
        }
    }
    out
}
