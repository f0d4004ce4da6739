//! Exhaustive solver for small instances.
//!
//! Enumerates every subset with at least two elements and sums its pairs
//! directly, without the gain vector, so that it can check the incremental
//! machinery in [`crate::eval`] independently.

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Largest `n` the exhaustive search accepts.
pub const MAX_ORACLE_N: usize = 24;

/// Optimal objective value and the lexicographically smallest optimal
/// selection (0-based indices, ascending).
pub fn brute_force(inst: &Instance) -> Result<(f64, Vec<usize>)> {
    let n = inst.n();
    if n > MAX_ORACLE_N {
        return Err(Error::OracleTooLarge {
            n,
            cap: MAX_ORACLE_N,
        });
    }
    let mut best_f = f64::NEG_INFINITY;
    let mut best_set: Vec<usize> = Vec::new();
    let mut members: Vec<usize> = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        members.clear();
        members.extend((0..n).filter(|&i| mask >> i & 1 == 1));
        let f = subset_objective(inst, &members);
        if f > best_f || (f == best_f && members < best_set) {
            best_f = f;
            best_set.clone_from(&members);
        }
    }
    Ok((best_f, best_set))
}

/// Mean pair distance of `members` (ascending, at least two), summed in
/// `i < j` order.
pub fn subset_objective(inst: &Instance, members: &[usize]) -> f64 {
    if members.len() < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (a, &i) in members.iter().enumerate() {
        let row = inst.row(i);
        for &j in &members[a + 1..] {
            sum += row[j];
        }
    }
    sum / members.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate_full, random_bits};
    use crate::instance::{generate, GeneratorConfig, InstanceKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_pair() {
        let inst = Instance::from_pairs(2, [(0, 1, 4.0)], "pair").unwrap();
        assert_eq!(brute_force(&inst).unwrap(), (2.0, vec![0, 1]));
    }

    #[test]
    fn uniform_triangle_takes_all() {
        let inst = Instance::from_pairs(3, [(0, 1, 6.0), (0, 2, 6.0), (1, 2, 6.0)], "six").unwrap();
        assert_eq!(brute_force(&inst).unwrap(), (6.0, vec![0, 1, 2]));
    }

    #[test]
    fn one_positive_pair() {
        let inst =
            Instance::from_pairs(3, [(0, 1, 10.0), (0, 2, -10.0), (1, 2, -10.0)], "mixed").unwrap();
        assert_eq!(brute_force(&inst).unwrap(), (5.0, vec![0, 1]));
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // Pairs {1,2} and {3,4} both score 1; {1,2} is smaller.
        let inst = Instance::from_pairs(
            4,
            [
                (0, 1, 2.0),
                (2, 3, 2.0),
                (0, 2, -9.0),
                (0, 3, -9.0),
                (1, 2, -9.0),
                (1, 3, -9.0),
            ],
            "tie",
        )
        .unwrap();
        assert_eq!(brute_force(&inst).unwrap(), (1.0, vec![0, 1]));
    }

    #[test]
    fn refuses_large_instances() {
        let inst = generate(&GeneratorConfig::new(25, InstanceKind::TypeI, 0)).unwrap();
        assert!(matches!(
            brute_force(&inst),
            Err(Error::OracleTooLarge { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn dominates_random_selections() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..4 {
            let kind = if seed % 2 == 0 {
                InstanceKind::TypeI
            } else {
                InstanceKind::TypeII
            };
            let inst = generate(&GeneratorConfig::new(12, kind, seed)).unwrap();
            let (opt, set) = brute_force(&inst).unwrap();
            let mut x = vec![false; 12];
            for &i in &set {
                x[i] = true;
            }
            assert!((evaluate_full(&inst, &x).f - opt).abs() <= 1e-12);
            for _ in 0..10_000 {
                let x = random_bits(12, &mut rng);
                if x.iter().filter(|&&b| b).count() >= 2 {
                    assert!(evaluate_full(&inst, &x).f <= opt + 1e-12);
                }
            }
        }
    }
}
