//! Tabu search over the one-flip neighbourhood.
//!
//! Each iteration evaluates every legal flip of the incumbent, takes the
//! best eligible one (not tabu, or tabu but better than the best solution
//! of this call), and forbids flipping that variable again for a tenure
//! drawn from a periodic step schedule. The search stops after `alpha`
//! consecutive iterations without improving the best solution.

use std::io::Write;
use std::time::Duration;

use rand::Rng;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::eval::Solution;
use crate::instance::Instance;

/// Objective gains at or below this are not improvements. Also used by the
/// aspiration test so rounding noise cannot revive a tabu move.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Move values this close are treated as tied.
const TIE_EPS: f64 = 1e-10;

const STEP_PATTERN: [u32; 15] = [1, 2, 1, 4, 1, 2, 1, 8, 1, 2, 1, 4, 1, 2, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabuParams {
    /// Consecutive non-improving iterations before the search stops.
    pub alpha: u64,
    /// Largest base tenure of the schedule.
    pub t_max: u32,
}

impl Default for TabuParams {
    fn default() -> Self {
        TabuParams {
            alpha: 50_000,
            t_max: 120,
        }
    }
}

/// Periodic step function for the tabu tenure.
///
/// One period has 15 intervals; interval `i` lasts `5 * a_i` iterations and
/// assigns tenure `a_i + r` with `r` uniform in `{0, 1, 2}`, where
/// `a = t_max / 8 * (1,2,1,4,1,2,1,8,1,2,1,4,1,2,1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TenureSchedule {
    t_max: u32,
    values: [u32; 15],
    margins: [u64; 16],
}

impl TenureSchedule {
    /// `t_max` values that are not multiples of 8 truncate; every value is
    /// at least 1.
    pub fn new(t_max: u32) -> Self {
        let values = STEP_PATTERN.map(|k| (t_max * k / 8).max(1));
        let mut margins = [1u64; 16];
        for i in 0..15 {
            margins[i + 1] = margins[i] + 5 * u64::from(values[i]);
        }
        TenureSchedule {
            t_max,
            values,
            margins,
        }
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    /// Base tenures `a_1..a_15`.
    pub fn values(&self) -> &[u32; 15] {
        &self.values
    }

    /// Interval starts `y_1..y_16`; interval `i` covers `[y_i, y_{i+1} - 1]`.
    pub fn margins(&self) -> &[u64; 16] {
        &self.margins
    }

    /// Iterations in one period, `y_16 - 1`.
    pub fn period(&self) -> u64 {
        self.margins[15] - 1
    }

    /// Tenure assigned at iteration `y >= 1` given the random offset `r`.
    pub fn tenure_at(&self, y: u64, r: u32) -> u32 {
        debug_assert!(y >= 1);
        let pos = (y.max(1) - 1) % self.period() + 1;
        // margins[0] == 1 <= pos, so the partition point is at least 1.
        let interval = self.margins.partition_point(|&start| start <= pos) - 1;
        self.values[interval] + r
    }
}

/// Tabu list: variable `i` may not be flipped while `iteration < expiry[i]`.
#[derive(Debug, Clone)]
pub struct TabuState {
    expiry: Vec<u64>,
    iter: u64,
    schedule: TenureSchedule,
}

impl TabuState {
    pub fn new(n: usize, schedule: TenureSchedule) -> Self {
        TabuState {
            expiry: vec![0; n],
            iter: 1,
            schedule,
        }
    }

    pub fn iteration(&self) -> u64 {
        self.iter
    }

    #[inline]
    pub fn is_tabu(&self, i: usize) -> bool {
        self.iter < self.expiry[i]
    }

    pub fn expiry(&self, i: usize) -> u64 {
        self.expiry[i]
    }

    /// Forbids `i` for the next `tenure` iterations after the current one.
    pub fn forbid(&mut self, i: usize, tenure: u32) {
        self.expiry[i] = self.iter + u64::from(tenure) + 1;
    }

    fn advance(&mut self) {
        self.iter += 1;
    }
}

/// One applied move, for audits.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveRecord {
    pub iteration: u64,
    /// 0-based element index.
    pub index: usize,
    pub delta: f64,
    /// Objective after the move.
    pub f: f64,
    /// First iteration at which `index` may be flipped again.
    pub expiry: u64,
    /// The move was tabu and taken through aspiration.
    pub aspirated: bool,
    /// No move was eligible; the one whose ban ends soonest was forced.
    pub forced: bool,
}

/// Writes a move trace as CSV with 1-based element indices.
pub fn write_trace_csv<W: Write>(trace: &[MoveRecord], mut out: W) -> Result<()> {
    writeln!(out, "iteration,index,delta,f,expiry,aspirated,forced")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{:.9},{:.9},{},{},{}",
            r.iteration,
            r.index + 1,
            r.delta,
            r.f,
            r.expiry,
            r.aspirated as u8,
            r.forced as u8
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TabuOutcome {
    /// Best solution of the call, re-evaluated from scratch.
    pub best: Solution,
    /// Iterations performed by this call.
    pub iterations: u64,
    /// Elapsed budget time when `best` was reached.
    pub best_time: Duration,
    /// Budget iteration count when `best` was reached.
    pub best_iteration: u64,
}

pub fn tabu_search<R: Rng + ?Sized>(
    inst: &Instance,
    s0: Solution,
    params: &TabuParams,
    rng: &mut R,
    budget: &mut Budget,
) -> Result<TabuOutcome> {
    run(inst, s0, params, rng, budget, None)
}

/// [`tabu_search`] that also records every applied move.
pub fn tabu_search_traced<R: Rng + ?Sized>(
    inst: &Instance,
    s0: Solution,
    params: &TabuParams,
    rng: &mut R,
    budget: &mut Budget,
    trace: &mut Vec<MoveRecord>,
) -> Result<TabuOutcome> {
    run(inst, s0, params, rng, budget, Some(trace))
}

fn run<R: Rng + ?Sized>(
    inst: &Instance,
    mut s: Solution,
    params: &TabuParams,
    rng: &mut R,
    budget: &mut Budget,
    mut trace: Option<&mut Vec<MoveRecord>>,
) -> Result<TabuOutcome> {
    if s.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: s.len(),
        });
    }
    s.refresh(inst);
    if !s.is_feasible() {
        return Err(Error::Infeasible { m: s.m() });
    }
    let n = inst.n();
    let schedule = TenureSchedule::new(params.t_max);
    let mut tabu = TabuState::new(n, schedule);

    let mut best_bits = s.bits().to_vec();
    let mut best_f = s.f();
    let mut best_time = budget.elapsed();
    let mut best_iteration = budget.iterations_used();

    let mut ties: Vec<usize> = Vec::with_capacity(n);
    let mut stall = 0u64;
    let mut iterations = 0u64;

    while stall < params.alpha && !budget.poll() {
        ties.clear();
        let mut best_delta = f64::NEG_INFINITY;
        // Fallback when nothing is eligible: the ban that ends soonest.
        let mut forced: Option<(u64, usize)> = None;
        let f = s.f();
        for i in 0..n {
            if !s.can_flip(i) {
                continue;
            }
            let delta = s.delta_unchecked(i);
            if tabu.is_tabu(i) && f + delta <= best_f + IMPROVEMENT_EPS {
                let e = tabu.expiry(i);
                if forced.is_none_or(|(fe, _)| e < fe) {
                    forced = Some((e, i));
                }
                continue;
            }
            if delta > best_delta + TIE_EPS {
                best_delta = delta;
                ties.clear();
                ties.push(i);
            } else if delta >= best_delta - TIE_EPS {
                ties.push(i);
            }
        }

        let (index, was_forced) = match ties.len() {
            0 => match forced {
                Some((_, i)) => (i, true),
                // Only possible when n = 2 and both elements are selected.
                None => break,
            },
            1 => (ties[0], false),
            len => (ties[rng.random_range(0..len)], false),
        };
        let aspirated = !was_forced && tabu.is_tabu(index);

        let delta = s.flip(inst, index)?;
        let tenure = tabu
            .schedule
            .tenure_at(tabu.iteration(), rng.random_range(0..=2));
        tabu.forbid(index, tenure);
        budget.tick();
        iterations += 1;

        if s.f() > best_f + IMPROVEMENT_EPS {
            best_bits.copy_from_slice(s.bits());
            best_f = s.f();
            best_time = budget.elapsed();
            best_iteration = budget.iterations_used();
            stall = 0;
        } else {
            stall += 1;
        }

        if let Some(trace) = trace.as_deref_mut() {
            trace.push(MoveRecord {
                iteration: tabu.iteration(),
                index,
                delta,
                f: s.f(),
                expiry: tabu.expiry(index),
                aspirated,
                forced: was_forced,
            });
        }
        tabu.advance();
    }

    let best = Solution::new(inst, best_bits)?;
    Ok(TabuOutcome {
        best,
        iterations,
        best_time,
        best_iteration,
    })
}
