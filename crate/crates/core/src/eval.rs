//! Solution representation with cached objective and gain vector.
//!
//! For a selection `M`, `f = (Σ_{i<j ∈ M} d_ij) / |M|` when `|M| >= 2` and
//! `0` otherwise. The gain vector holds `w_i = Σ_{j ∈ M, j != i} d_ij`
//! for every element, selected or not, which makes the value of any
//! one-flip move an O(1) lookup and each applied flip O(n).

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Objective value, gain vector and selection size of a bit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub w: Vec<f64>,
    pub m: usize,
}

/// O(n·|M|) evaluation from scratch.
///
/// # Panics
///
/// If `x.len() != inst.n()`.
pub fn evaluate_full(inst: &Instance, x: &[bool]) -> Evaluation {
    assert_eq!(x.len(), inst.n(), "bit vector length must equal n");
    let n = inst.n();
    let mut w = vec![0.0; n];
    let mut m = 0;
    for (j, _) in x.iter().enumerate().filter(|(_, &b)| b) {
        m += 1;
        for (wi, dij) in w.iter_mut().zip(inst.row(j)) {
            *wi += dij;
        }
    }
    let f = if m >= 2 {
        let twice: f64 = x.iter().zip(&w).filter(|(&b, _)| b).map(|(_, wi)| wi).sum();
        0.5 * twice / m as f64
    } else {
        0.0
    };
    Evaluation { f, w, m }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    x: Vec<bool>,
    m: usize,
    f: f64,
    w: Vec<f64>,
}

impl Solution {
    pub fn new(inst: &Instance, x: Vec<bool>) -> Result<Self> {
        if x.len() != inst.n() {
            return Err(Error::LengthMismatch {
                expected: inst.n(),
                got: x.len(),
            });
        }
        let Evaluation { f, w, m } = evaluate_full(inst, &x);
        Ok(Solution { x, m, f, w })
    }

    /// Selection given as 0-based element indices.
    pub fn from_indices(inst: &Instance, selected: &[usize]) -> Result<Self> {
        let mut x = vec![false; inst.n()];
        for &i in selected {
            if i >= inst.n() {
                return Err(Error::InvalidConfig(format!(
                    "element {i} out of range for n = {}",
                    inst.n()
                )));
            }
            x[i] = true;
        }
        Solution::new(inst, x)
    }

    pub fn bits(&self) -> &[bool] {
        &self.x
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn gains(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn is_selected(&self, i: usize) -> bool {
        self.x[i]
    }

    pub fn is_feasible(&self) -> bool {
        self.m >= 2
    }

    /// 0-based indices of the selected elements, ascending.
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    /// Whether flipping `i` keeps at least two elements selected, or adds.
    #[inline]
    pub fn can_flip(&self, i: usize) -> bool {
        !self.x[i] || self.m > 2
    }

    /// Objective change of flipping `i`, without applying it.
    pub fn delta(&self, i: usize) -> Result<f64> {
        if !self.can_flip(i) {
            return Err(Error::ForbiddenMove {
                index: i,
                m: self.m,
            });
        }
        Ok(self.delta_unchecked(i))
    }

    /// [`Solution::delta`] for callers that already checked [`Solution::can_flip`].
    #[inline]
    pub fn delta_unchecked(&self, i: usize) -> f64 {
        if self.x[i] {
            let k = (self.m - 1) as f64;
            self.f / k - self.w[i] / k
        } else {
            let k = (self.m + 1) as f64;
            -self.f / k + self.w[i] / k
        }
    }

    /// Toggles element `i`, updating the cached state. Returns the move value.
    pub fn flip(&mut self, inst: &Instance, i: usize) -> Result<f64> {
        let delta = self.delta(i)?;
        let row = inst.row(i);
        // row[i] == 0, so w_i is left unchanged.
        if self.x[i] {
            for (wj, dij) in self.w.iter_mut().zip(row) {
                *wj -= dij;
            }
            self.m -= 1;
        } else {
            for (wj, dij) in self.w.iter_mut().zip(row) {
                *wj += dij;
            }
            self.m += 1;
        }
        self.x[i] = !self.x[i];
        self.f = if self.m >= 2 { self.f + delta } else { 0.0 };
        Ok(delta)
    }

    /// Recomputes `f` and `w` from scratch, discarding accumulated rounding.
    pub fn refresh(&mut self, inst: &Instance) {
        let Evaluation { f, w, m } = evaluate_full(inst, &self.x);
        self.f = f;
        self.w = w;
        self.m = m;
    }

    pub fn same_selection(&self, other: &Solution) -> bool {
        self.x == other.x
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "f={:.6} m={} M={{", self.f, self.m)?;
        for (k, i) in self.selected().enumerate() {
            if k > 0 {
                out.write_str(",")?;
            }
            write!(out, "{}", i + 1)?;
        }
        out.write_str("}")
    }
}

/// Fair-coin bit vector.
pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(0.5)).collect()
}

/// Adds uniformly random unselected elements until at least two are selected.
pub fn repair<R: Rng + ?Sized>(x: &mut [bool], rng: &mut R) {
    let mut m = x.iter().filter(|&&b| b).count();
    while m < 2 && m < x.len() {
        let free: Vec<usize> = (0..x.len()).filter(|&i| !x[i]).collect();
        let pick = free[rng.random_range(0..free.len())];
        x[pick] = true;
        m += 1;
    }
}
