//! Runs of a program under every opaque-decision schedule up to a length.

use cohere::modes::{run_program, AnnotatedProgram};
use cohere::semantics::{Outcome, Schedule};
use cohere::Store;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleRun {
    /// Decisions actually consumed; later ones read as false.
    pub schedule: Vec<bool>,
    pub outcome: Outcome,
    pub store: Store,
    pub abstraction_held: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleReport {
    pub runs: Vec<ScheduleRun>,
    /// Some run asked for more than `k` decisions.
    pub truncated: bool,
}

impl ScheduleReport {
    pub fn outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.runs.iter().map(|r| &r.outcome)
    }

    pub fn all_done(&self) -> bool {
        self.outcomes().all(Outcome::is_done)
    }

    /// Abstraction correctness held at every block boundary of every run.
    pub fn abstraction_held(&self) -> bool {
        self.runs.iter().all(|r| r.abstraction_held)
    }

    /// Some run got stuck or broke abstraction correctness.
    pub fn violation_observed(&self) -> bool {
        self.runs
            .iter()
            .any(|r| matches!(r.outcome, Outcome::Stuck(_)) || !r.abstraction_held)
    }
}

/// Runs the translation of `p` under every schedule of at most `k`
/// decisions. Schedules that differ only in trailing `false`s behave the
/// same, so each distinct behaviour is run once: a run that consumed
/// decisions past its prefix branches by flipping each such decision to
/// `true`.
pub fn all_schedules_run(p: &AnnotatedProgram, k: usize, fuel: usize) -> ScheduleReport {
    let mut report = ScheduleReport {
        runs: Vec::new(),
        truncated: false,
    };
    let mut pending = vec![Vec::new()];
    while let Some(prefix) = pending.pop() {
        let mut schedule = Schedule::new(prefix.clone());
        let run = run_program(p, fuel, &mut schedule, false)
            .expect("fuel is positive and the program validated");
        let requested = schedule.requested();
        if requested > k {
            report.truncated = true;
        }
        for j in prefix.len()..requested.min(k) {
            let mut next = prefix.clone();
            next.resize(j, false);
            next.push(true);
            pending.push(next);
        }
        let mut used = prefix;
        used.resize(requested.min(k).max(used.len()), false);
        report.runs.push(ScheduleRun {
            schedule: used,
            abstraction_held: run.abstraction_held(),
            outcome: run.outcome,
            store: run.store,
        });
    }
    report
}
