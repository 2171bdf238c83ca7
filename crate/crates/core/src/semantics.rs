//! Small-step operational semantics over validity stores.
//!
//! A configuration is a normalized program and a store. Each step rewrites
//! the head statement by one of six rules:
//!
//! | rule            | head                      | effect on the configuration                 |
//! |-----------------|---------------------------|---------------------------------------------|
//! | `effect`        | `E x`                     | `σ(x) := post` where `σ(x)` unifies with `pre` |
//! | `remote-effect` | `[E x]`                   | same on the swapped pair, result swapped back |
//! | `while-true`    | `while (c) S` with `c`    | unfold `S; while (c) S`                     |
//! | `while-false`   | `while (c) S` with `¬c`   | drop the loop                               |
//! | `if-true`       | `if (c) S else S'` with `c`  | continue with `S`                        |
//! | `if-false`      | `if (c) S else S'` with `¬c` | continue with `S'`                       |
//!
//! A head effect whose `pre` does not unify is stuck. Conditions always
//! evaluate; opaque ones take their value from a [`Schedule`].

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::effect::{apply_signature, effect_signature, EffectKind, Pattern};
use crate::store::Store;
use crate::syntax::{Condition, Site, Statement, Target, VarKey};
use crate::validity::{Flag, Pair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    /// The program mentions a key the store does not hold. This is a
    /// construction bug in the caller, never a stuck configuration.
    #[error("key `{0}` is not in the store")]
    UnknownKey(VarKey),
    #[error("fuel must be positive")]
    NoFuel,
}

/// Finite sequence of outcomes for opaque conditions. Once exhausted every
/// further opaque condition is false.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    bits: Vec<bool>,
    requested: usize,
}

impl Schedule {
    pub fn new(bits: Vec<bool>) -> Self {
        Schedule { bits, requested: 0 }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn always(value: bool, len: usize) -> Self {
        Self::new(vec![value; len])
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(bits: &str) -> Option<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn decide(&mut self) -> bool {
        let bit = self.bits.get(self.requested).copied().unwrap_or(false);
        self.requested += 1;
        bit
    }

    /// How many opaque decisions have been requested so far, including ones
    /// answered by the exhausted default.
    pub fn requested(&self) -> usize {
        self.requested
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

pub fn eval_condition(
    cond: &Condition,
    store: &Store,
    schedule: &mut Schedule,
) -> Result<bool, SemanticsError> {
    let flag = |view: &crate::syntax::Name| {
        let key = VarKey::Abstract(view.clone());
        store.get(&key).ok_or(SemanticsError::UnknownKey(key))
    };
    Ok(match cond {
        Condition::IsValid(view) => flag(view)?.local == Flag::V,
        Condition::RemIsValid(view) => flag(view)?.remote == Flag::V,
        Condition::Opaque(_) => schedule.decide(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub program: Statement,
    pub store: Store,
}

impl Configuration {
    pub fn new(program: Statement, store: Store) -> Self {
        Configuration {
            program: program.normalize(),
            store,
        }
    }
}

/// A failed unification, in store orientation: `expected` is the pattern
/// `σ(key)` had to match (the swapped `pre` for remote effects).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stuck {
    pub key: VarKey,
    pub kind: EffectKind,
    pub site: Site,
    pub actual: Pair,
    pub expected: Pattern,
}

impl fmt::Display for Stuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.site {
            Site::Local => self.kind.to_string(),
            Site::Remote => format!("g{}", self.kind),
        };
        write!(
            f,
            "`{op}` on {} needs {} but the status is {}",
            self.key, self.expected, self.actual
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped(Configuration),
    Done(Store),
    Stuck { config: Configuration, stuck: Stuck },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Effect,
    RemoteEffect,
    WhileTrue,
    WhileFalse,
    IfTrue,
    IfFalse,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Effect => "effect",
            Rule::RemoteEffect => "remote-effect",
            Rule::WhileTrue => "while-true",
            Rule::WhileFalse => "while-false",
            Rule::IfTrue => "if-true",
            Rule::IfFalse => "if-false",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Change {
    pub key: VarKey,
    pub before: Pair,
    pub after: Pair,
}

/// One reduction: the rule used, the statement it consumed, and the keys
/// whose status changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: Rule,
    pub head: Statement,
    pub delta: Vec<Change>,
}

/// Applies `kind` at `site` to every key of `target`, all or nothing.
fn apply_effect(
    store: &Store,
    kind: EffectKind,
    site: Site,
    target: &Target,
) -> Result<Result<Vec<Change>, Stuck>, SemanticsError> {
    let sig = effect_signature(kind);
    let mut changes = Vec::new();
    for key in target.keys() {
        let before = store
            .get(&key)
            .ok_or_else(|| SemanticsError::UnknownKey(key.clone()))?;
        let after = match site {
            Site::Local => apply_signature(sig, before),
            Site::Remote => apply_signature(sig, before.swap()).map(Pair::swap),
        };
        match after {
            Some(after) => {
                if after != before {
                    changes.push(Change { key, before, after });
                }
            }
            None => {
                let expected = match site {
                    Site::Local => sig.pre,
                    Site::Remote => sig.pre.swap(),
                };
                return Ok(Err(Stuck {
                    key,
                    kind,
                    site,
                    actual: before,
                    expected,
                }));
            }
        }
    }
    Ok(Ok(changes))
}

pub fn step(config: Configuration, schedule: &mut Schedule) -> Result<StepOutcome, SemanticsError> {
    step_traced(config, schedule).map(|(outcome, _)| outcome)
}

fn step_traced(
    config: Configuration,
    schedule: &mut Schedule,
) -> Result<(StepOutcome, Option<TraceStep>), SemanticsError> {
    let Configuration { program, mut store } = config;
    let Some((head, rest)) = program.split_head() else {
        return Ok((StepOutcome::Done(store), None));
    };
    let (rule, next, delta) = match &head {
        Statement::Effect { kind, site, target } => {
            match apply_effect(&store, *kind, *site, target)? {
                Ok(delta) => {
                    for change in &delta {
                        store.set(change.key.clone(), change.after);
                    }
                    let rule = match site {
                        Site::Local => Rule::Effect,
                        Site::Remote => Rule::RemoteEffect,
                    };
                    (rule, rest, delta)
                }
                Err(stuck) => {
                    let config = Configuration {
                        program: head.then(rest),
                        store,
                    };
                    return Ok((StepOutcome::Stuck { config, stuck }, None));
                }
            }
        }
        Statement::While(cond, body) => {
            if eval_condition(cond, &store, schedule)? {
                let again = (**body).clone().then(head.clone().then(rest));
                (Rule::WhileTrue, again, Vec::new())
            } else {
                (Rule::WhileFalse, rest, Vec::new())
            }
        }
        Statement::If(cond, then, otherwise) => {
            if eval_condition(cond, &store, schedule)? {
                (Rule::IfTrue, (**then).clone().then(rest), Vec::new())
            } else {
                (Rule::IfFalse, (**otherwise).clone().then(rest), Vec::new())
            }
        }
        Statement::Noop | Statement::Seq(..) => unreachable!("program is not normalized"),
    };
    let trace = TraceStep { rule, head, delta };
    Ok((
        StepOutcome::Stepped(Configuration {
            program: next,
            store,
        }),
        Some(trace),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Stuck(Stuck),
    FuelExhausted,
}

impl Outcome {
    pub fn is_done(&self) -> bool {
        matches!(self, Outcome::Done)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Done => "done",
            Outcome::Stuck(_) => "stuck",
            Outcome::FuelExhausted => "fuel-exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: Outcome,
    /// Final store (the store at the stuck configuration for `Stuck`).
    pub store: Store,
    /// Program left when the run stopped; `Noop` when done.
    pub remaining: Statement,
    pub steps: usize,
    /// Empty unless the run was traced.
    pub trace: Vec<TraceStep>,
}

/// Iterates [`step`] until done, stuck, or `fuel` steps have been taken,
/// recording every step.
pub fn run(
    program: Statement,
    store: Store,
    fuel: usize,
    schedule: &mut Schedule,
) -> Result<RunResult, SemanticsError> {
    run_impl(program, store, fuel, schedule, true)
}

/// [`run`] without the trace.
pub fn run_untraced(
    program: Statement,
    store: Store,
    fuel: usize,
    schedule: &mut Schedule,
) -> Result<RunResult, SemanticsError> {
    run_impl(program, store, fuel, schedule, false)
}

fn run_impl(
    program: Statement,
    store: Store,
    fuel: usize,
    schedule: &mut Schedule,
    traced: bool,
) -> Result<RunResult, SemanticsError> {
    if fuel == 0 {
        return Err(SemanticsError::NoFuel);
    }
    let mut config = Configuration::new(program, store);
    let mut trace = Vec::new();
    let mut steps = 0;
    loop {
        if matches!(config.program, Statement::Noop) {
            return Ok(RunResult {
                outcome: Outcome::Done,
                store: config.store,
                remaining: Statement::Noop,
                steps,
                trace,
            });
        }
        if steps == fuel {
            return Ok(RunResult {
                outcome: Outcome::FuelExhausted,
                store: config.store,
                remaining: config.program,
                steps,
                trace,
            });
        }
        let (outcome, record) = step_traced(config, schedule)?;
        match outcome {
            StepOutcome::Stepped(next) => {
                steps += 1;
                if traced {
                    trace.extend(record);
                }
                config = next;
            }
            StepOutcome::Stuck { config, stuck } => {
                return Ok(RunResult {
                    outcome: Outcome::Stuck(stuck),
                    store: config.store,
                    remaining: config.program,
                    steps,
                    trace,
                })
            }
            StepOutcome::Done(_) => unreachable!("empty program handled above"),
        }
    }
}
