//! Seeded random radial feeders for property tests and batch checks.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::RangeInclusive;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{BranchRecord, GridInputs, LoadRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomGridSpec {
    /// Total node count, slack included.
    pub nodes: RangeInclusive<usize>,
    pub resistance: RangeInclusive<f64>,
    pub reactance: RangeInclusive<f64>,
    /// Upper bound on the sum of load magnitudes, per-unit.
    pub max_total_load: f64,
    /// Chance that a node carries generation instead of load.
    pub generation_probability: f64,
}

impl Default for RandomGridSpec {
    fn default() -> Self {
        Self {
            nodes: 5..=15,
            resistance: 0.01..=0.1,
            reactance: 0.02..=0.2,
            max_total_load: 0.5,
            generation_probability: 0.15,
        }
    }
}

impl RandomGridSpec {
    /// Radial tree: node `k` hangs off a uniformly chosen earlier node.
    /// Exponents are drawn from {0, 1, 2}.
    pub fn generate(&self, seed: u64) -> GridInputs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = rng.gen_range(self.nodes.clone());
        let branches = (1..total)
            .map(|k| {
                let parent = rng.gen_range(0..k);
                let r = rng.gen_range(self.resistance.clone());
                let x = rng.gen_range(self.reactance.clone());
                BranchRecord::new(parent, k, Complex64::new(r, x))
            })
            .collect();

        let weights: Vec<f64> = (1..total).map(|_| rng.gen_range(0.05..1.0)).collect();
        let budget = rng.gen_range(0.2..=1.0) * self.max_total_load;
        let scale = budget / weights.iter().sum::<f64>();
        let loads = weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let angle = rng.gen_range(0.0..0.2 * PI);
                let mut power = Complex64::from_polar(w * scale, angle);
                if rng.gen_bool(self.generation_probability) {
                    power.re = -power.re;
                }
                let alpha = f64::from(rng.gen_range(0u8..=2));
                LoadRecord::new(k + 1, power, alpha)
            })
            .collect();
        GridInputs::new(branches, loads)
    }
}

/// Grid from the default spec.
pub fn random_radial_grid(seed: u64) -> GridInputs {
    RandomGridSpec::default().generate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_within_bounds() {
        for seed in 0..20 {
            let a = random_radial_grid(seed);
            assert_eq!(a, random_radial_grid(seed));
            let nodes = a.branches.len() + 1;
            assert!((5..=15).contains(&nodes));
            let total: f64 = a.loads.iter().map(|l| l.power.norm()).sum();
            assert!(total <= 0.5 + 1e-12);
            assert!(a.build().is_ok());
        }
    }
}
