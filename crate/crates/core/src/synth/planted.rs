use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::error::{Error, Result};
use crate::ledger::{InvestorPerformance, Label, StockEarnings};
use crate::orderflow::{InvestorClass, Market, TraderId};

/// Planted performance structure: `|R| = r0 · J^-alpha` and
/// `Δt = t0 · J^-gamma`, with optional multiplicative log-normal noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedRelation {
    pub alpha: f64,
    pub gamma: f64,
    pub return_scale: f64,
    pub holding_scale: f64,
    /// Standard deviation of the log noise; 0 for exact data.
    pub noise: f64,
    pub min_frequency: u32,
    pub max_frequency: u32,
    /// Fraction of investors whose return is negated.
    #[serde(default)]
    pub loser_fraction: f64,
}

impl PlantedRelation {
    /// Implied `R ~ Δt^beta` exponent.
    pub fn beta(&self) -> f64 {
        self.alpha / self.gamma
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha.is_finite()
            && self.gamma.is_finite()
            && self.gamma != 0.0
            && self.return_scale > 0.0
            && self.holding_scale > 0.0
            && self.noise >= 0.0
            && self.min_frequency >= 1
            && self.max_frequency >= self.min_frequency
            && (0.0..=1.0).contains(&self.loser_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "degenerate planted relation {self:?}"
            )))
        }
    }
}

/// Draw `count` investor performances following `relation`, with `J`
/// log-uniform on the configured range.
pub fn planted_performances(
    relation: &PlantedRelation,
    count: usize,
    market: Market,
    class: InvestorClass,
    seed: u64,
) -> Result<Vec<InvestorPerformance>> {
    relation.validate()?;
    let mut rng = stream_rng(seed, "planted", &format!("{market}-{}", class.code()));
    let (lo, hi) = (
        f64::from(relation.min_frequency).ln(),
        (f64::from(relation.max_frequency) + 1.0).ln(),
    );
    let noise = |rng: &mut rand_chacha::ChaCha8Rng| {
        if relation.noise > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            (relation.noise * z).exp()
        } else {
            1.0
        }
    };
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let j = (rng.random_range(lo..hi).exp().floor() as u32)
            .clamp(relation.min_frequency, relation.max_frequency);
        let jf = f64::from(j);
        let mut ret = relation.return_scale * jf.powf(-relation.alpha) * noise(&mut rng);
        let holding_days = relation.holding_scale * jf.powf(-relation.gamma) * noise(&mut rng);
        if relation.loser_fraction > 0.0 && rng.random_bool(relation.loser_fraction) {
            ret = -ret;
        }
        out.push(InvestorPerformance {
            investor_id: TraderId::new(format!("P-{market}-{}-{:06}", class.code(), i + 1)),
            class,
            market,
            ret,
            transactions: u64::from(j),
            holding_days,
            label: Label::of(ret),
            totals: StockEarnings::default(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relation(noise: f64) -> PlantedRelation {
        PlantedRelation {
            alpha: 0.31,
            gamma: 0.20,
            return_scale: 0.5,
            holding_scale: 30.0,
            noise,
            min_frequency: 16,
            max_frequency: 16_384,
            loser_fraction: 0.0,
        }
    }

    #[test]
    fn noise_free_points_lie_on_the_law() {
        let perfs =
            planted_performances(&relation(0.0), 200, Market::A, InvestorClass::Individual, 1)
                .unwrap();
        for p in &perfs {
            let j = p.transactions as f64;
            assert!((p.ret - 0.5 * j.powf(-0.31)).abs() < 1e-15);
            assert!((16..=16_384).contains(&p.transactions));
        }
    }

    #[test]
    fn deterministic_and_labelled() {
        let mut r = relation(0.05);
        r.loser_fraction = 0.3;
        let a = planted_performances(&r, 500, Market::B, InvestorClass::Institution, 4).unwrap();
        let b = planted_performances(&r, 500, Market::B, InvestorClass::Institution, 4).unwrap();
        assert_eq!(
            a.iter().map(|p| p.ret).collect::<Vec<_>>(),
            b.iter().map(|p| p.ret).collect::<Vec<_>>()
        );
        let losers = a.iter().filter(|p| p.label == Label::Loser).count();
        assert!((100..200).contains(&losers));
    }
}
