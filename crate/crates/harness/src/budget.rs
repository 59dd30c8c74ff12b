//! Per-trial wall-time budgets.
//!
//! Every algorithm draws its randomness through the trial's RNG, so the RNG
//! is where a runaway trial gets stopped: [`BudgetRng`] checks the clock every
//! few thousand draws and unwinds with [`BudgetHit`] once the deadline passes.
//! [`run_with_budget`] catches that unwind and reports it.

use std::panic::{self, AssertUnwindSafe};
use std::sync::Once;
use std::time::{Duration, Instant};

use rand::RngCore;

/// Panic payload used to abort a trial that ran out of time.
#[derive(Debug, Clone, Copy)]
pub struct BudgetHit;

const CHECK_EVERY: u32 = 4096;

pub struct BudgetRng<R> {
    inner: R,
    deadline: Option<Instant>,
    calls: u32,
}

impl<R: RngCore> BudgetRng<R> {
    pub fn new(inner: R, budget: Option<Duration>) -> Self {
        Self { inner, deadline: budget.map(|b| Instant::now() + b), calls: 0 }
    }

    fn tick(&mut self) {
        self.calls += 1;
        if self.calls >= CHECK_EVERY {
            self.calls = 0;
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                panic::panic_any(BudgetHit);
            }
        }
    }
}

impl<R: RngCore> RngCore for BudgetRng<R> {
    fn next_u32(&mut self) -> u32 {
        self.tick();
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.tick();
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.tick();
        self.inner.fill_bytes(dst)
    }
}

pub enum Budgeted<T> {
    Done(T),
    OutOfTime,
    Panicked(String),
}

fn install_quiet_hook() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        let previous = panic::take_hook();
        panic::set_hook(Box::new(move |info| {
            if info.payload().downcast_ref::<BudgetHit>().is_none() {
                previous(info);
            }
        }));
    });
}

/// Run `f`, turning a [`BudgetHit`] unwind into `OutOfTime` and any other panic into `Panicked`.
pub fn run_with_budget<T>(f: impl FnOnce() -> T) -> Budgeted<T> {
    install_quiet_hook();
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => Budgeted::Done(v),
        Err(payload) => {
            if payload.downcast_ref::<BudgetHit>().is_some() {
                Budgeted::OutOfTime
            } else if let Some(s) = payload.downcast_ref::<&str>() {
                Budgeted::Panicked((*s).to_owned())
            } else if let Some(s) = payload.downcast_ref::<String>() {
                Budgeted::Panicked(s.clone())
            } else {
                Budgeted::Panicked("panic".to_owned())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shiftlab_core::rng::rng_from_seed;

    #[test]
    fn deadline_stops_a_spinning_trial() {
        let out = run_with_budget(|| {
            let mut rng = BudgetRng::new(rng_from_seed(1), Some(Duration::from_millis(20)));
            loop {
                rng.next_u64();
            }
        });
        assert!(matches!(out, Budgeted::<()>::OutOfTime));
    }

    #[test]
    fn no_budget_passes_values_through() {
        let mut a = BudgetRng::new(rng_from_seed(2), None);
        let mut b = rng_from_seed(2);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert!(matches!(run_with_budget(|| 3), Budgeted::Done(3)));
    }
}
