//! The shared random tape. Every endpoint reads the same tape, so public
//! coins cost nothing and are identical everywhere.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Public randomness, handed out one protocol step at a time. Step `s` is
/// ChaCha stream `s` of the seed, so a step's draws do not depend on how many
/// draws earlier steps made.
#[derive(Clone, Debug)]
pub struct RandomTape {
    seed: u64,
    base: ChaCha8Rng,
    next_step: u64,
}

impl RandomTape {
    pub fn new(seed: u64) -> Self {
        RandomTape { seed, base: ChaCha8Rng::seed_from_u64(seed), next_step: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of steps consumed so far.
    pub fn steps(&self) -> u64 {
        self.next_step
    }

    /// Generator for the next protocol step.
    pub fn step(&mut self) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(self.next_step);
        self.next_step += 1;
        rng
    }

    /// A public random function from `u64` keys, fixed for the next step.
    /// Evaluating it at a key is O(1), so a permutation of a huge domain can
    /// be queried without materializing it.
    pub fn keyed(&mut self) -> KeyedCoins {
        KeyedCoins { rng: self.step() }
    }
}

#[derive(Clone, Debug)]
pub struct KeyedCoins {
    rng: ChaCha8Rng,
}

impl KeyedCoins {
    pub fn value(&self, key: u64) -> u64 {
        let mut rng = self.rng.clone();
        rng.set_word_pos(u128::from(key) * 2);
        rng.next_u64()
    }

    /// Rank of `key` in the public order; ties broken by the key itself.
    pub fn rank(&self, key: u64) -> (u64, u64) {
        (self.value(key), key)
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = RandomTape::new(7);
        let mut b = RandomTape::new(7);
        for _ in 0..5 {
            let x: u64 = a.step().random();
            let y: u64 = b.step().random();
            assert_eq!(x, y);
        }
        assert_eq!(a.steps(), 5);
    }

    #[test]
    fn steps_are_independent_of_consumption() {
        let mut a = RandomTape::new(1);
        let mut b = RandomTape::new(1);
        let mut r = a.step();
        for _ in 0..100 {
            r.next_u64();
        }
        b.step();
        assert_eq!(a.step().next_u64(), b.step().next_u64());
    }

    #[test]
    fn keyed_values_are_stable() {
        let mut t = RandomTape::new(3);
        let coins = t.keyed();
        assert_eq!(coins.value(12), coins.value(12));
        assert_ne!(coins.value(12), coins.value(13));
        let mut t2 = RandomTape::new(3);
        assert_eq!(t2.keyed().value(99), coins.value(99));
    }
}
