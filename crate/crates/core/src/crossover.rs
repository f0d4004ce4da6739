//! Recombination operators. Both keep every element the parents share.

use rand::Rng;

use crate::eval::{repair, Solution};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossoverKind {
    #[default]
    Uniform,
    Greedy,
}

impl std::str::FromStr for CrossoverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "uc" => Ok(CrossoverKind::Uniform),
            "greedy" | "gc" => Ok(CrossoverKind::Greedy),
            other => Err(format!("unknown crossover `{other}`")),
        }
    }
}

impl std::fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CrossoverKind::Uniform => "uniform",
            CrossoverKind::Greedy => "greedy",
        })
    }
}

/// Each child bit comes from either parent with probability 1/2. A child
/// with fewer than two elements is topped up with random elements of the
/// parents' union (or of the whole ground set if the union is too small).
pub fn uniform_crossover<R: Rng + ?Sized>(s1: &Solution, s2: &Solution, rng: &mut R) -> Vec<bool> {
    let mut child = uniform_mix(s1, s2, rng);
    let mut m = child.iter().filter(|&&b| b).count();
    while m < 2 {
        let pool: Vec<usize> = (0..child.len())
            .filter(|&i| !child[i] && (s1.is_selected(i) || s2.is_selected(i)))
            .collect();
        if pool.is_empty() {
            break;
        }
        child[pool[rng.random_range(0..pool.len())]] = true;
        m += 1;
    }
    repair(&mut child, rng);
    child
}

/// The bare uniform mix, before any size repair.
pub fn uniform_mix<R: Rng + ?Sized>(s1: &Solution, s2: &Solution, rng: &mut R) -> Vec<bool> {
    assert_eq!(s1.len(), s2.len(), "parents must have equal length");
    s1.bits()
        .iter()
        .zip(s2.bits())
        .map(|(&a, &b)| if rng.random::<f64>() < 0.5 { a } else { b })
        .collect()
}

/// Target child size: the parents' mean size, rounded half up.
pub fn greedy_target_size(m1: usize, m2: usize) -> usize {
    (m1 + m2).div_ceil(2)
}

/// Starts from the shared elements and alternately adds the best element
/// (largest move value against the partial child) from the first parent's
/// remainder, then the second's, until the child reaches
/// [`greedy_target_size`]. Ties go to the smallest index.
///
/// The size is re-checked after every single addition, so the child never
/// overshoots the target by one as a two-additions-per-pass loop could.
pub fn greedy_crossover(inst: &Instance, s1: &Solution, s2: &Solution) -> Vec<bool> {
    greedy_crossover_logged(inst, s1, s2, |_, _| {})
}

/// [`greedy_crossover`] reporting each addition as `(element, move value)`.
pub fn greedy_crossover_logged<F: FnMut(usize, f64)>(
    inst: &Instance,
    s1: &Solution,
    s2: &Solution,
    mut on_add: F,
) -> Vec<bool> {
    assert_eq!(s1.len(), s2.len(), "parents must have equal length");
    let n = s1.len();
    let target = greedy_target_size(s1.m(), s2.m());

    let common: Vec<bool> = s1
        .bits()
        .iter()
        .zip(s2.bits())
        .map(|(&a, &b)| a && b)
        .collect();
    let mut donor1: Vec<usize> = s1.selected().filter(|&i| !common[i]).collect();
    let mut donor2: Vec<usize> = s2.selected().filter(|&i| !common[i]).collect();
    let mut child = Solution::new(inst, common).expect("length checked above");

    let mut from_first = true;
    while child.m() < target && !(donor1.is_empty() && donor2.is_empty()) {
        let donor = if from_first { &mut donor1 } else { &mut donor2 };
        from_first = !from_first;
        if donor.is_empty() {
            continue;
        }
        let mut pick = 0;
        let mut pick_delta = child.delta_unchecked(donor[0]);
        for (k, &i) in donor.iter().enumerate().skip(1) {
            let delta = child.delta_unchecked(i);
            // donors are ascending, so strict > keeps the smallest index on ties
            if delta > pick_delta {
                pick = k;
                pick_delta = delta;
            }
        }
        let element = donor.remove(pick);
        child
            .flip(inst, element)
            .expect("additions are always legal");
        on_add(element, pick_delta);
    }

    let mut bits = child.into_bits();
    let mut i = 0;
    while bits.iter().filter(|&&b| b).count() < 2 && i < n {
        bits[i] = true;
        i += 1;
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorConfig, InstanceKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sol(inst: &Instance, idx: &[usize]) -> Solution {
        Solution::from_indices(inst, idx).unwrap()
    }

    #[test]
    fn identical_parents() {
        let inst = generate(&GeneratorConfig::new(10, InstanceKind::TypeI, 1)).unwrap();
        let s = sol(&inst, &[1, 4, 5, 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(uniform_crossover(&s, &s, &mut rng), s.bits());
        }
        assert_eq!(greedy_crossover(&inst, &s, &s), s.bits());
    }

    #[test]
    fn uniform_bit_frequency() {
        let inst = generate(&GeneratorConfig::new(4, InstanceKind::TypeI, 1)).unwrap();
        let a = sol(&inst, &[0, 1]);
        let b = sol(&inst, &[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let child = uniform_mix(&a, &b, &mut rng);
            for (c, bit) in counts.iter_mut().zip(&child) {
                *c += *bit as usize;
            }
            let repaired = uniform_crossover(&a, &b, &mut rng);
            assert!(repaired.iter().filter(|&&x| x).count() >= 2);
        }
        for c in counts {
            let p = c as f64 / trials as f64;
            assert!((p - 0.5).abs() <= 0.02, "{p}");
        }
    }

    #[test]
    fn shared_bits_survive() {
        let inst = generate(&GeneratorConfig::new(12, InstanceKind::TypeI, 2)).unwrap();
        let a = sol(&inst, &[0, 3, 4, 7, 9]);
        let b = sol(&inst, &[0, 2, 4, 9, 11]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let child = uniform_crossover(&a, &b, &mut rng);
            for i in [0, 4, 9] {
                assert!(child[i]);
            }
            for (i, &bit) in child.iter().enumerate() {
                assert!(!bit || a.is_selected(i) || b.is_selected(i));
            }
        }
        let g = greedy_crossover(&inst, &a, &b);
        assert!(g[0] && g[4] && g[9]);
    }

    #[test]
    fn greedy_small_case() {
        let inst = generate(&GeneratorConfig::new(3, InstanceKind::TypeI, 5)).unwrap();
        let child = greedy_crossover(&inst, &sol(&inst, &[0, 1]), &sol(&inst, &[0, 2]));
        assert!(child[0]);
        assert_eq!(child.iter().filter(|&&b| b).count(), 2);
        assert!(child[1], "the first parent donates first");
    }

    #[test]
    fn greedy_target_rounds_half_up() {
        assert_eq!(greedy_target_size(2, 2), 2);
        assert_eq!(greedy_target_size(2, 3), 3);
        assert_eq!(greedy_target_size(5, 8), 7);
    }

    #[test]
    fn greedy_replay_audit() {
        let inst = generate(&GeneratorConfig::new(8, InstanceKind::TypeII, 21)).unwrap();
        let a = sol(&inst, &[0, 1, 2, 5]);
        let b = sol(&inst, &[1, 3, 4, 6, 7]);
        let mut adds = Vec::new();
        let child = greedy_crossover_logged(&inst, &a, &b, |i, d| adds.push((i, d)));
        assert_eq!(child.iter().filter(|&&c| c).count(), 5);
        assert!(child[1]);

        let mut partial = sol(&inst, &[1]);
        let mut d1: Vec<usize> = vec![0, 2, 5];
        let mut d2: Vec<usize> = vec![3, 4, 6, 7];
        for (turn, &(element, delta)) in adds.iter().enumerate() {
            let donor = if turn % 2 == 0 { &mut d1 } else { &mut d2 };
            let best = donor
                .iter()
                .map(|&i| partial.delta(i).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((delta - best).abs() <= 1e-12);
            let first_best = *donor
                .iter()
                .find(|&&i| partial.delta(i).unwrap() == best)
                .unwrap();
            assert_eq!(element, first_best);
            donor.retain(|&i| i != element);
            partial.flip(&inst, element).unwrap();
        }
    }
}
