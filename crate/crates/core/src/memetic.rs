//! Memetic driver: a population of tabu-search local optima recombined
//! pair by pair.
//!
//! Every unordered pair of the current population is recombined exactly
//! once. An offspring that is new and strictly better than the worst member
//! replaces it, which drops the worst member's pending pairs and queues the
//! offspring against everybody else. When no pairs remain the population is
//! rebuilt from scratch, keeping the best solution found so far in place of
//! the new worst member. The run ends at the time or iteration budget.

use std::fmt;
use std::io::Write;
use std::time::Duration;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget::Budget;
use crate::crossover::{greedy_crossover, uniform_crossover, CrossoverKind};
use crate::error::{Error, Result};
use crate::eval::{random_bits, repair, Solution};
use crate::instance::Instance;
use crate::tabu::{tabu_search, TabuParams, IMPROVEMENT_EPS};

/// Attempts at drawing a distinct initial member before a duplicate is
/// accepted.
pub const MAX_INIT_RETRIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MemeticParams {
    /// Population size, at least 2.
    pub p: usize,
    /// Tabu search depth.
    pub alpha: u64,
    /// Maximum base tabu tenure.
    pub t_max: u32,
    /// Wall-clock budget in seconds.
    pub time_limit: Option<f64>,
    /// Cap on total tabu iterations; makes runs exactly reproducible.
    pub max_iters: Option<u64>,
    pub crossover: CrossoverKind,
    pub seed: u64,
    /// Stop as soon as the best objective reaches this value.
    pub target: Option<f64>,
}

impl Default for MemeticParams {
    fn default() -> Self {
        MemeticParams {
            p: 10,
            alpha: 50_000,
            t_max: 120,
            time_limit: Some(10.0),
            max_iters: None,
            crossover: CrossoverKind::Uniform,
            seed: 0,
            target: None,
        }
    }
}

impl MemeticParams {
    pub fn tabu(&self) -> TabuParams {
        TabuParams {
            alpha: self.alpha,
            t_max: self.t_max,
        }
    }

    pub fn budget(&self) -> Budget {
        Budget::new(self.time_limit.map(Duration::from_secs_f64), self.max_iters)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidConfig(format!(
                "population size must be >= 2, got {}",
                self.p
            )));
        }
        if self.alpha == 0 {
            return Err(Error::InvalidConfig(
                "search depth alpha must be positive".into(),
            ));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidConfig("t_max must be positive".into()));
        }
        if let Some(t) = self.time_limit {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("bad time limit {t}")));
            }
        }
        Ok(())
    }

    fn target_reached(&self, f: f64) -> bool {
        self.target.is_some_and(|t| f >= t - IMPROVEMENT_EPS)
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    /// Unique within a run; never reused.
    pub id: u64,
    pub solution: Solution,
}

#[derive(Debug, Clone)]
pub struct Population {
    members: Vec<Member>,
    /// Unordered slot pairs `(i, j)`, `i < j`, not yet recombined.
    pairs: Vec<(usize, usize)>,
    next_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Inserted { slot: usize, id: u64, replaced: u64 },
    Rejected,
}

impl Population {
    /// Population over `solutions` with every pair pending. Ids start at
    /// `first_id`.
    pub fn new(solutions: Vec<Solution>, first_id: u64) -> Self {
        let members = solutions
            .into_iter()
            .zip(first_id..)
            .map(|(solution, id)| Member { id, solution })
            .collect::<Vec<_>>();
        let next_id = first_id + members.len() as u64;
        let mut pop = Population {
            members,
            pairs: Vec::new(),
            next_id,
        };
        pop.reset_pairs();
        pop
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn contains(&self, bits: &[bool]) -> bool {
        self.members.iter().any(|m| m.solution.bits() == bits)
    }

    /// Slot of the lowest objective; ties go to the lowest slot.
    pub fn worst_slot(&self) -> usize {
        let mut worst = 0;
        for (k, m) in self.members.iter().enumerate().skip(1) {
            if m.solution.f() < self.members[worst].solution.f() {
                worst = k;
            }
        }
        worst
    }

    /// Slot of the highest objective; ties go to the lowest slot.
    pub fn best_slot(&self) -> usize {
        let mut best = 0;
        for (k, m) in self.members.iter().enumerate().skip(1) {
            if m.solution.f() > self.members[best].solution.f() {
                best = k;
            }
        }
        best
    }

    pub fn reset_pairs(&mut self) {
        let p = self.members.len();
        self.pairs = (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .collect();
    }

    /// Removes and returns a uniformly random pending pair.
    pub fn draw_pair<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(usize, usize)> {
        if self.pairs.is_empty() {
            return None;
        }
        let k = rng.random_range(0..self.pairs.len());
        Some(self.pairs.swap_remove(k))
    }

    /// Puts `solution` into `slot` under a fresh id and requeues the slot's
    /// pairs. Returns the id that was replaced.
    fn replace(&mut self, slot: usize, solution: Solution) -> (u64, u64) {
        let id = self.next_id;
        self.next_id += 1;
        let old = std::mem::replace(&mut self.members[slot], Member { id, solution });
        self.pairs.retain(|&(a, b)| a != slot && b != slot);
        for k in 0..self.members.len() {
            if k != slot {
                self.pairs.push((k.min(slot), k.max(slot)));
            }
        }
        (id, old.id)
    }
}

/// Replaces the worst member with `offspring` if the offspring is not
/// already present and strictly better than the worst member.
pub fn update_population(pop: &mut Population, offspring: Solution) -> UpdateOutcome {
    if pop.contains(offspring.bits()) {
        return UpdateOutcome::Rejected;
    }
    let worst = pop.worst_slot();
    if offspring.f() <= pop.members[worst].solution.f() + IMPROVEMENT_EPS {
        return UpdateOutcome::Rejected;
    }
    let (id, replaced) = pop.replace(worst, offspring);
    UpdateOutcome::Inserted {
        slot: worst,
        id,
        replaced,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    InitMember {
        id: u64,
        f: f64,
        start_f: f64,
        retries: usize,
    },
    /// A population epoch begins; `members` are the ids after carrying the
    /// best solution over.
    Restart {
        epoch: u64,
        pairs: usize,
        members: Vec<u64>,
        best_carried: bool,
    },
    PairDrawn {
        a: u64,
        b: u64,
    },
    OffspringF {
        f: f64,
    },
    Inserted {
        id: u64,
        replaced: u64,
    },
    Rejected,
    NewBest {
        f: f64,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::InitMember { .. } => "init_member",
            EventKind::Restart { .. } => "restart",
            EventKind::PairDrawn { .. } => "pair_drawn",
            EventKind::OffspringF { .. } => "offspring_f",
            EventKind::Inserted { .. } => "inserted",
            EventKind::Rejected => "rejected",
            EventKind::NewBest { .. } => "new_best",
        }
    }
}

impl fmt::Display for EventKind {
    /// The `detail` column of the CSV log.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::InitMember {
                id,
                f,
                start_f,
                retries,
            } => {
                write!(
                    out,
                    "id={id} f={f:.6} start_f={start_f:.6} retries={retries}"
                )
            }
            EventKind::Restart {
                epoch,
                pairs,
                members,
                best_carried,
            } => {
                write!(
                    out,
                    "epoch={epoch} pairs={pairs} carried={} members=",
                    *best_carried as u8
                )?;
                for (k, id) in members.iter().enumerate() {
                    if k > 0 {
                        out.write_str(";")?;
                    }
                    write!(out, "{id}")?;
                }
                Ok(())
            }
            EventKind::PairDrawn { a, b } => write!(out, "a={a} b={b}"),
            EventKind::OffspringF { f } => write!(out, "f={f:.6}"),
            EventKind::Inserted { id, replaced } => write!(out, "id={id} replaced={replaced}"),
            EventKind::Rejected => Ok(()),
            EventKind::NewBest { f } => write!(out, "f={f:.6}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub wall: Duration,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, budget: &Budget, kind: EventKind) {
        self.events.push(Event {
            wall: budget.elapsed(),
            kind,
        });
    }

    /// The events without timestamps, for determinism checks.
    pub fn kinds(&self) -> impl Iterator<Item = &EventKind> {
        self.events.iter().map(|e| &e.kind)
    }

    /// CSV with header `event,wall_ms,detail`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "event,wall_ms,detail")?;
        for e in &self.events {
            writeln!(
                out,
                "{},{:.3},{}",
                e.kind.name(),
                e.wall.as_secs_f64() * 1e3,
                e.kind
            )?;
        }
        Ok(())
    }
}

fn record(log: &mut Option<&mut EventLog>, budget: &Budget, kind: impl FnOnce() -> EventKind) {
    if let Some(log) = log.as_deref_mut() {
        log.push(budget, kind());
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Best solution, objective recomputed from scratch.
    pub best: Solution,
    pub time_to_best: Duration,
    /// Tabu iterations spent when the best solution was first reached.
    pub iters_to_best: u64,
    pub elapsed: Duration,
    /// Total tabu iterations.
    pub iterations: u64,
    pub ts_calls: u64,
    /// Offspring produced (memetic) or restarts performed (multi-start).
    pub generations: u64,
    /// Population rebuilds after the first.
    pub restarts: u64,
}

impl RunResult {
    pub fn f(&self) -> f64 {
        self.best.f()
    }
}

struct Incumbent {
    best: Solution,
    time: Duration,
    iter: u64,
}

impl Incumbent {
    fn offer(&mut self, sol: &Solution, time: Duration, iter: u64) -> bool {
        if sol.f() > self.best.f() + IMPROVEMENT_EPS {
            self.best = sol.clone();
            self.time = time;
            self.iter = iter;
            true
        } else {
            false
        }
    }
}

fn random_feasible<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Result<Solution> {
    let mut x = random_bits(inst.n(), rng);
    repair(&mut x, rng);
    Solution::new(inst, x)
}

struct Improved {
    solution: Solution,
    time: Duration,
    iter: u64,
}

fn improve<R: Rng + ?Sized>(
    inst: &Instance,
    start: Solution,
    tabu: &TabuParams,
    rng: &mut R,
    budget: &mut Budget,
    calls: &mut u64,
) -> Result<Improved> {
    *calls += 1;
    let out = tabu_search(inst, start, tabu, rng, budget)?;
    Ok(Improved {
        solution: out.best,
        time: out.best_time,
        iter: out.best_iteration,
    })
}

/// Builds `params.p` random solutions, each improved by tabu search.
/// A member that duplicates an earlier one is redrawn up to
/// [`MAX_INIT_RETRIES`] times before it is accepted anyway.
pub fn init_population<R: Rng + ?Sized>(
    inst: &Instance,
    params: &MemeticParams,
    rng: &mut R,
    budget: &mut Budget,
    first_id: u64,
) -> Result<Population> {
    let mut calls = 0;
    let (pop, _) = build_population(inst, params, rng, budget, first_id, &mut calls, &mut None)?;
    Ok(pop)
}

fn build_population<R: Rng + ?Sized>(
    inst: &Instance,
    params: &MemeticParams,
    rng: &mut R,
    budget: &mut Budget,
    first_id: u64,
    calls: &mut u64,
    log: &mut Option<&mut EventLog>,
) -> Result<(Population, Vec<(Duration, u64)>)> {
    params.validate()?;
    let tabu = params.tabu();
    let mut solutions: Vec<Solution> = Vec::with_capacity(params.p);
    let mut found: Vec<(Duration, u64)> = Vec::with_capacity(params.p);
    for k in 0..params.p {
        let mut retries = 0;
        let (start_f, improved) = loop {
            let start = random_feasible(inst, rng)?;
            let start_f = start.f();
            let improved = improve(inst, start, &tabu, rng, budget, calls)?;
            let duplicate = solutions
                .iter()
                .any(|s| s.bits() == improved.solution.bits());
            if !duplicate {
                break (start_f, improved);
            }
            if retries == MAX_INIT_RETRIES {
                warn!("population member {k} duplicates an earlier one after {retries} retries");
                break (start_f, improved);
            }
            retries += 1;
        };
        let id = first_id + k as u64;
        let f = improved.solution.f();
        record(log, budget, || EventKind::InitMember {
            id,
            f,
            start_f,
            retries,
        });
        found.push((improved.time, improved.iter));
        solutions.push(improved.solution);
    }
    Ok((Population::new(solutions, first_id), found))
}

/// Runs the memetic algorithm until the budget or target is reached.
pub fn solve(inst: &Instance, params: &MemeticParams) -> Result<RunResult> {
    solve_inner(inst, params, None)
}

/// [`solve`] that appends every population event to `log`.
pub fn solve_logged(
    inst: &Instance,
    params: &MemeticParams,
    log: &mut EventLog,
) -> Result<RunResult> {
    solve_inner(inst, params, Some(log))
}

fn solve_inner(
    inst: &Instance,
    params: &MemeticParams,
    mut log: Option<&mut EventLog>,
) -> Result<RunResult> {
    params.validate()?;
    let mut budget = params.budget();
    if inst.n() == 2 {
        return Ok(trivial_result(inst, &budget));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let tabu = params.tabu();
    let mut ts_calls = 0u64;
    let mut generations = 0u64;
    let mut incumbent: Option<Incumbent> = None;
    let mut next_id = 0u64;
    let mut epoch = 0u64;

    loop {
        let (mut pop, found) = build_population(
            inst,
            params,
            &mut rng,
            &mut budget,
            next_id,
            &mut ts_calls,
            &mut log,
        )?;

        let mut carried = false;
        if let Some(inc) = &incumbent {
            if pop.contains(inc.best.bits()) {
                carried = true;
            } else {
                let worst = pop.worst_slot();
                pop.replace(worst, inc.best.clone());
                carried = true;
            }
        }
        pop.reset_pairs();
        next_id = pop.next_id();

        let top = pop.best_slot();
        let top_sol = &pop.members[top].solution;
        match &mut incumbent {
            None => {
                let (time, iter) = found[top];
                incumbent = Some(Incumbent {
                    best: top_sol.clone(),
                    time,
                    iter,
                });
                record(&mut log, &budget, || EventKind::NewBest { f: top_sol.f() });
            }
            Some(inc) => {
                let (time, iter) = found
                    .get(top)
                    .copied()
                    .unwrap_or((budget.elapsed(), budget.iterations_used()));
                if inc.offer(top_sol, time, iter) {
                    record(&mut log, &budget, || EventKind::NewBest { f: top_sol.f() });
                }
            }
        }
        let members = pop.members.iter().map(|m| m.id).collect();
        let pairs = pop.pairs.len();
        record(&mut log, &budget, || EventKind::Restart {
            epoch,
            pairs,
            members,
            best_carried: carried,
        });

        let inc = incumbent.as_mut().expect("set above");
        while !params.target_reached(inc.best.f()) && !budget.is_exhausted() {
            let Some((i, j)) = pop.draw_pair(&mut rng) else {
                break;
            };
            let (a, b) = (&pop.members[i], &pop.members[j]);
            record(&mut log, &budget, || EventKind::PairDrawn {
                a: a.id,
                b: b.id,
            });
            let child = match params.crossover {
                CrossoverKind::Uniform => uniform_crossover(&a.solution, &b.solution, &mut rng),
                CrossoverKind::Greedy => greedy_crossover(inst, &a.solution, &b.solution),
            };
            let child = Solution::new(inst, child)?;
            let improved = improve(inst, child, &tabu, &mut rng, &mut budget, &mut ts_calls)?;
            generations += 1;
            let offspring = improved.solution;
            record(&mut log, &budget, || EventKind::OffspringF {
                f: offspring.f(),
            });
            if inc.offer(&offspring, improved.time, improved.iter) {
                record(&mut log, &budget, || EventKind::NewBest {
                    f: offspring.f(),
                });
            }
            match update_population(&mut pop, offspring) {
                UpdateOutcome::Inserted { id, replaced, .. } => {
                    record(&mut log, &budget, || EventKind::Inserted { id, replaced })
                }
                UpdateOutcome::Rejected => record(&mut log, &budget, || EventKind::Rejected),
            }
        }
        next_id = next_id.max(pop.next_id());

        if params.target_reached(inc.best.f()) || budget.is_exhausted() {
            break;
        }
        epoch += 1;
    }

    let inc = incumbent.expect("at least one population is built");
    Ok(RunResult {
        best: Solution::new(inst, inc.best.into_bits())?,
        time_to_best: inc.time,
        iters_to_best: inc.iter,
        elapsed: budget.elapsed(),
        iterations: budget.iterations_used(),
        ts_calls,
        generations,
        restarts: epoch,
    })
}

fn trivial_result(inst: &Instance, budget: &Budget) -> RunResult {
    let best = Solution::new(inst, vec![true, true]).expect("n = 2");
    RunResult {
        best,
        time_to_best: Duration::ZERO,
        iters_to_best: 0,
        elapsed: budget.elapsed(),
        iterations: 0,
        ts_calls: 0,
        generations: 0,
        restarts: 0,
    }
}

/// Repeated tabu search from fresh random solutions until the budget or
/// target is reached.
pub fn multi_start_tabu(inst: &Instance, params: &MemeticParams) -> Result<RunResult> {
    multi_start(inst, params, None)
}

/// One tabu search from a random start; the first restart of
/// [`multi_start_tabu`] with the same seed.
pub fn single_tabu(inst: &Instance, params: &MemeticParams) -> Result<RunResult> {
    multi_start(inst, params, Some(1))
}

fn multi_start(
    inst: &Instance,
    params: &MemeticParams,
    max_starts: Option<u64>,
) -> Result<RunResult> {
    params.validate()?;
    let mut budget = params.budget();
    if inst.n() == 2 {
        return Ok(trivial_result(inst, &budget));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let tabu = params.tabu();
    let mut ts_calls = 0u64;
    let mut incumbent: Option<Incumbent> = None;
    loop {
        let start = random_feasible(inst, &mut rng)?;
        let improved = improve(inst, start, &tabu, &mut rng, &mut budget, &mut ts_calls)?;
        match &mut incumbent {
            None => {
                incumbent = Some(Incumbent {
                    best: improved.solution,
                    time: improved.time,
                    iter: improved.iter,
                })
            }
            Some(inc) => {
                inc.offer(&improved.solution, improved.time, improved.iter);
            }
        }
        let inc = incumbent.as_ref().expect("set above");
        if params.target_reached(inc.best.f())
            || budget.is_exhausted()
            || max_starts.is_some_and(|m| ts_calls >= m)
        {
            break;
        }
    }
    let inc = incumbent.expect("at least one start");
    Ok(RunResult {
        best: inc.best,
        time_to_best: inc.time,
        iters_to_best: inc.iter,
        elapsed: budget.elapsed(),
        iterations: budget.iterations_used(),
        ts_calls,
        generations: ts_calls,
        restarts: ts_calls.saturating_sub(1),
    })
}
