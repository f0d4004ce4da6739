//! Fixtures shared by the criterion benches.

use maxmean_core::eval::{random_bits, repair};
use maxmean_core::{generate, GeneratorConfig, Instance, InstanceKind, Solution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A Type I instance of size `n` with a fixed seed.
pub fn instance(n: usize) -> Instance {
    generate(&GeneratorConfig::new(n, InstanceKind::TypeI, n as u64)).expect("n >= 2")
}

/// A random feasible solution on `inst`.
pub fn start(inst: &Instance, seed: u64) -> Solution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = random_bits(inst.n(), &mut rng);
    repair(&mut x, &mut rng);
    Solution::new(inst, x).expect("length n")
}
