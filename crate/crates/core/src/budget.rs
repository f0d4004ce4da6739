use std::time::{Duration, Instant};

/// Stopping rule shared by every search in one run: an optional wall-clock
/// cutoff and an optional cap on the total number of tabu iterations.
///
/// The iteration cap gives exactly reproducible runs; the wall-clock cutoff
/// is what benchmarks use.
#[derive(Debug, Clone)]
pub struct Budget {
    start: Instant,
    deadline: Option<Instant>,
    max_iters: Option<u64>,
    iters: u64,
    polls: u32,
}

impl Budget {
    pub fn new(time_limit: Option<Duration>, max_iters: Option<u64>) -> Self {
        let start = Instant::now();
        Budget {
            start,
            deadline: time_limit.map(|t| start + t),
            max_iters,
            iters: 0,
            polls: 0,
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(None, None)
    }

    pub fn seconds(secs: f64) -> Self {
        Budget::new(Some(Duration::from_secs_f64(secs)), None)
    }

    pub fn iterations(max: u64) -> Self {
        Budget::new(None, Some(max))
    }

    pub fn is_exhausted(&self) -> bool {
        if self.max_iters.is_some_and(|max| self.iters >= max) {
            return true;
        }
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Like [`Budget::is_exhausted`] but reads the clock only on every
    /// 32nd call. The iteration cap is still checked exactly.
    #[inline]
    pub fn poll(&mut self) -> bool {
        if self.max_iters.is_some_and(|max| self.iters >= max) {
            return true;
        }
        self.polls = self.polls.wrapping_add(1);
        if self.polls % 32 != 1 {
            return false;
        }
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    #[inline]
    pub fn tick(&mut self) {
        self.iters += 1;
    }

    /// Tabu iterations consumed so far.
    pub fn iterations_used(&self) -> u64 {
        self.iters
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deadline.is_none()
    }
}
