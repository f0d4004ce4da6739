//! Self-checks of the incremental evaluation against direct recomputation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{evaluate_full, Solution};
use crate::instance::Instance;
use crate::oracle::subset_objective;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub cases: usize,
    /// Largest `|Δ_incremental − Δ_recompute| / max(1, |f|)`.
    pub max_delta_error: f64,
    /// Largest absolute gain-vector error after a flip.
    pub max_gain_error: f64,
    /// Largest objective error after flipping the same element twice.
    pub max_involution_error: f64,
    /// Double flips that did not restore the selection exactly.
    pub involution_failures: usize,
}

/// Runs `cases` random (solution, flip) checks on `inst`.
///
/// Solutions are drawn with a random density so that both sparse and
/// dense selections are covered; only legal flips are tested.
pub fn verify_incremental(inst: &Instance, cases: usize, seed: u64) -> VerifyReport {
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport {
        cases,
        ..Default::default()
    };
    let mut done = 0;
    while done < cases {
        let density: f64 = rng.random_range(0.05..0.95);
        let x: Vec<bool> = (0..n).map(|_| rng.random_bool(density)).collect();
        let mut sol = Solution::new(inst, x).expect("length n");
        if sol.m() < 2 {
            continue;
        }
        let i = rng.random_range(0..n);
        if !sol.can_flip(i) {
            continue;
        }
        done += 1;

        let before: Vec<usize> = sol.selected().collect();
        let f_before = subset_objective(inst, &before);
        let delta = sol.delta(i).expect("legal flip");
        let original = sol.clone();
        sol.flip(inst, i).expect("legal flip");
        let after: Vec<usize> = sol.selected().collect();
        let f_after = subset_objective(inst, &after);
        let scale = f_before.abs().max(1.0);
        report.max_delta_error = report
            .max_delta_error
            .max((delta - (f_after - f_before)).abs() / scale);

        let fresh = evaluate_full(inst, sol.bits());
        let gain_err = sol
            .gains()
            .iter()
            .zip(&fresh.w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.max_gain_error = report.max_gain_error.max(gain_err);

        if sol.can_flip(i) {
            sol.flip(inst, i).expect("legal flip");
            if sol.bits() != original.bits() || sol.m() != original.m() {
                report.involution_failures += 1;
            }
            report.max_involution_error = report
                .max_involution_error
                .max((sol.f() - original.f()).abs());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorConfig, InstanceKind};

    #[test]
    fn clean_report_on_generated_instance() {
        let inst = generate(&GeneratorConfig::new(40, InstanceKind::TypeI, 1)).unwrap();
        let r = verify_incremental(&inst, 2000, 7);
        assert_eq!(r.cases, 2000);
        assert!(r.max_delta_error <= 1e-9, "{r:?}");
        assert!(r.max_gain_error <= 1e-9);
        assert!(r.max_involution_error <= 1e-9);
        assert_eq!(r.involution_failures, 0);
    }
}
