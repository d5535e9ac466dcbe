use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::{FrequencyDist, PopulationSpec};
use super::stream_rng;
use crate::error::Result;
use crate::orderflow::{InvestorClass, Market, TraderId};

/// One zero-intelligence agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub trader_id: TraderId,
    pub class: InvestorClass,
    pub market: Market,
    /// Exact number of orders the agent will submit over the period.
    pub frequency: u32,
}

/// Inverse-CDF sampler for the target frequency.
#[derive(Debug, Clone)]
pub struct FrequencySampler {
    min: u32,
    cdf: Vec<f64>,
}

impl FrequencySampler {
    pub fn new(dist: &FrequencyDist) -> Result<Self> {
        dist.validate()?;
        Ok(match *dist {
            FrequencyDist::Constant { value } => FrequencySampler {
                min: value,
                cdf: vec![1.0],
            },
            FrequencyDist::PowerLaw { exponent, min, cap } => {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = (min..=cap)
                    .map(|j| {
                        acc += f64::from(j).powf(-exponent);
                        acc
                    })
                    .collect();
                for c in &mut cdf {
                    *c /= acc;
                }
                FrequencySampler { min, cdf }
            }
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let k = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        self.min + k as u32
    }
}

/// Deterministic roster: agents grouped by market then class, each with a
/// frequency target drawn from the spec.
pub fn generate_population(spec: &PopulationSpec, seed: u64) -> Result<Vec<Agent>> {
    spec.validate()?;
    let sampler = FrequencySampler::new(&spec.frequency)?;
    let mut rng: ChaCha8Rng = stream_rng(seed, "population", "");
    let mut agents = Vec::with_capacity(spec.investors.total());
    for market in Market::ALL {
        for class in InvestorClass::ALL {
            for i in 0..spec.investors.count(market, class) {
                agents.push(Agent {
                    trader_id: TraderId::new(format!("{market}-{}-{:06}", class.code(), i + 1)),
                    class,
                    market,
                    frequency: sampler.sample(&mut rng),
                });
            }
        }
    }
    Ok(agents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::spec::Cohorts;

    fn spec(frequency: FrequencyDist, n: usize) -> PopulationSpec {
        PopulationSpec {
            investors: Cohorts {
                a_individual: n,
                a_institution: 0,
                b_individual: 0,
                b_institution: 0,
            },
            frequency,
            ..PopulationSpec::default()
        }
    }

    #[test]
    fn constant_frequency() {
        let agents =
            generate_population(&spec(FrequencyDist::Constant { value: 4 }, 10), 1).unwrap();
        assert_eq!(agents.len(), 10);
        assert!(agents.iter().all(|a| a.frequency == 4));
    }

    #[test]
    fn same_seed_same_roster() {
        let s = PopulationSpec::default();
        assert_eq!(
            generate_population(&s, 9).unwrap(),
            generate_population(&s, 9).unwrap()
        );
        assert_ne!(
            generate_population(&s, 9).unwrap(),
            generate_population(&s, 10).unwrap()
        );
    }

    #[test]
    fn power_law_respects_bounds() {
        let d = FrequencyDist::PowerLaw {
            exponent: 2.0,
            min: 3,
            cap: 50,
        };
        let agents = generate_population(&spec(d, 2000), 3).unwrap();
        assert!(agents.iter().all(|a| (3..=50).contains(&a.frequency)));
        let threes = agents.iter().filter(|a| a.frequency == 3).count();
        assert!(threes > 500, "mode should sit at the minimum, got {threes}");
    }
}
