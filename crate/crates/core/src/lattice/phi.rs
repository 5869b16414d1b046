//! Deterministic samplers for index maps `φ: {1..T} → {1..L}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::regulator::IndexMap;

pub const DEFAULT_RANDOM_MAPS: usize = 1000;

/// All constant maps, all staircases `φ(t) = min(t + c, L)`, then `random`
/// uniform maps drawn from a seeded ChaCha stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiSampler {
    pub rows: usize,
    pub cols: usize,
    pub random: usize,
    pub seed: u64,
}

impl PhiSampler {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        PhiSampler { rows: rows.max(1), cols: cols.max(1), random: DEFAULT_RANDOM_MAPS, seed }
    }

    pub fn with_random(mut self, random: usize) -> Self {
        self.random = random;
        self
    }

    pub fn constants(&self) -> Vec<IndexMap> {
        (1..=self.cols).map(|l| IndexMap::constant(self.rows, l)).collect()
    }

    pub fn staircases(&self) -> Vec<IndexMap> {
        (0..self.cols)
            .map(|c| IndexMap::new((1..=self.rows).map(|t| (t + c).min(self.cols)).collect()).expect("1-based"))
            .collect()
    }

    pub fn randoms(&self) -> Vec<IndexMap> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.random)
            .map(|_| {
                let values = (0..self.rows).map(|_| rng.random_range(1..=self.cols)).collect();
                IndexMap::new(values).expect("1-based")
            })
            .collect()
    }

    pub fn sample(&self) -> Vec<IndexMap> {
        let mut all = self.constants();
        all.extend(self.staircases());
        all.extend(self.randoms());
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_ranges() {
        let s = PhiSampler::new(4, 6, 9).with_random(25);
        let maps = s.sample();
        assert_eq!(maps.len(), 6 + 6 + 25);
        for m in &maps {
            assert_eq!(m.len(), 4);
            assert!(m.values().iter().all(|&l| (1..=6).contains(&l)));
        }
        assert_eq!(s.staircases()[0].values(), &[1, 2, 3, 4]);
        assert_eq!(s.staircases()[3].values(), &[4, 5, 6, 6]);
    }

    #[test]
    fn seeded_and_reproducible() {
        let a = PhiSampler::new(5, 5, 1).randoms();
        let b = PhiSampler::new(5, 5, 1).randoms();
        let c = PhiSampler::new(5, 5, 2).randoms();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
