//! Time sources for the search loop.

use core::cell::Cell;

/// Milliseconds elapsed since the search started.
pub trait Clock {
    fn elapsed_ms(&self) -> u64;

    /// Reports work done since the last call: exact evaluations
    /// (reallocation plus simulation) and approximate screenings.
    fn charge(&self, _exact: u64, _approx: u64) {}
}

/// A logical clock that advances by a fixed step on every reading. Traces
/// produced with it depend only on the seed, never on machine speed.
#[derive(Debug)]
pub struct StepClock {
    now: Cell<u64>,
    step: u64,
}

impl StepClock {
    pub fn new(step_ms: u64) -> Self {
        StepClock {
            now: Cell::new(0),
            step: step_ms,
        }
    }
}

impl Clock for StepClock {
    fn elapsed_ms(&self) -> u64 {
        let t = self.now.get();
        self.now.set(t + self.step);
        t
    }
}

/// A logical clock driven by the work the search reports. Each exact
/// evaluation costs `exact_us` microseconds and each approximate screening
/// `approx_us`, so a budget buys the same amount of work on any machine
/// while still rewarding cheaper iterations.
#[derive(Debug)]
pub struct WorkClock {
    micros: Cell<u64>,
    exact_us: u64,
    approx_us: u64,
}

impl WorkClock {
    pub fn new(exact_us: u64, approx_us: u64) -> Self {
        WorkClock {
            micros: Cell::new(0),
            exact_us,
            approx_us,
        }
    }
}

impl Clock for WorkClock {
    fn elapsed_ms(&self) -> u64 {
        self.micros.get() / 1000
    }

    fn charge(&self, exact: u64, approx: u64) {
        self.micros
            .set(self.micros.get() + exact * self.exact_us + approx * self.approx_us);
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn elapsed_ms(&self) -> u64 {
        (**self).elapsed_ms()
    }

    fn charge(&self, exact: u64, approx: u64) {
        (**self).charge(exact, approx)
    }
}
