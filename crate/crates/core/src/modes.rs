//! Access-mode declarations and their translation into synchronisation code.
//!
//! A program is a sequence of blocks `M { S }`: a set of access modes `M`
//! over views, protecting a body `S` that touches only concrete keys. Each
//! mode translates to a check of the view's abstract flag, transfers of the
//! concrete data and of the flag when the check fails, and an abstract write
//! for modes that write:
//!
//! ```text
//! R x     =>  if (valid(x)) {} else { pull x; pull x^; }
//! GR x    =>  if (gvalid(x)) {} else { push x; push x^; }
//! RW x    =>  R x; w x^;
//! GRW x   =>  GR x; gw x^;
//! W x     =>  w x^;
//! GW x    =>  gw x^;
//! ```
//!
//! and a program translates to `[M1]; S1; [M2]; S2; ...`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::decl::{initial_store, DeclError, Layout, View};
use crate::effect::EffectKind;
use crate::semantics::{run, run_untraced, Outcome, Schedule, SemanticsError, TraceStep};
use crate::store::Store;
use crate::syntax::{Condition, Name, Site, Statement, Target};
use crate::validity::leq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ModeKind {
    R,
    W,
    RW,
}

impl ModeKind {
    pub fn reads(self) -> bool {
        matches!(self, ModeKind::R | ModeKind::RW)
    }

    pub fn writes(self) -> bool {
        matches!(self, ModeKind::W | ModeKind::RW)
    }

    /// `self` grants at least the accesses `other` grants.
    pub fn covers(self, other: ModeKind) -> bool {
        self == other || self == ModeKind::RW
    }
}

/// Where a mode entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Declared,
    /// Declared with kind `from`, raised to `RW` by overlap inference.
    Upgraded {
        from: ModeKind,
    },
    /// Added by overlap inference for a view the block does not name.
    Shadow,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessMode {
    pub kind: ModeKind,
    pub site: Site,
    pub view: Name,
    pub origin: Origin,
}

impl AccessMode {
    pub fn new(kind: ModeKind, site: Site, view: Name) -> Self {
        AccessMode {
            kind,
            site,
            view,
            origin: Origin::Declared,
        }
    }

    pub fn local(kind: ModeKind, view: &str) -> Self {
        Self::new(kind, Site::Local, crate::syntax::name(view))
    }

    pub fn remote(kind: ModeKind, view: &str) -> Self {
        Self::new(kind, Site::Remote, crate::syntax::name(view))
    }

    /// The mode as the programmer wrote it, before inference.
    pub fn declared(&self) -> Option<AccessMode> {
        let kind = match self.origin {
            Origin::Declared => self.kind,
            Origin::Upgraded { from } => from,
            Origin::Shadow => return None,
        };
        Some(AccessMode::new(kind, self.site, self.view.clone()))
    }

    /// Annotation keyword: `R`, `W`, `RW`, or `G`-prefixed for remote.
    pub fn keyword(&self) -> &'static str {
        match (self.site, self.kind) {
            (Site::Local, ModeKind::R) => "R",
            (Site::Local, ModeKind::W) => "W",
            (Site::Local, ModeKind::RW) => "RW",
            (Site::Remote, ModeKind::R) => "GR",
            (Site::Remote, ModeKind::W) => "GW",
            (Site::Remote, ModeKind::RW) => "GRW",
        }
    }
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.keyword(), self.view)?;
        match self.origin {
            Origin::Declared => Ok(()),
            Origin::Shadow => f.write_str(" /*shadow*/"),
            Origin::Upgraded { from } => write!(f, " /*was {from:?}*/"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclBlock {
    /// In translation order; at most one entry per view.
    pub modes: Vec<AccessMode>,
    pub body: Statement,
}

impl DeclBlock {
    pub fn new(modes: Vec<AccessMode>, body: Statement) -> Self {
        DeclBlock {
            modes,
            body: body.normalize(),
        }
    }

    pub fn mode_for(&self, view: &str) -> Option<&AccessMode> {
        self.modes.iter().find(|m| &*m.view == view)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error(transparent)]
    Decl(#[from] DeclError),
    #[error("block {block} declares `{view}` more than once")]
    DuplicateMode { block: usize, view: Name },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedProgram {
    pub layout: Layout,
    pub blocks: Vec<DeclBlock>,
}

impl AnnotatedProgram {
    /// Checks that every mode names a declared view, once per block, and
    /// that bodies only mention declared views.
    pub fn new(layout: Layout, blocks: Vec<DeclBlock>) -> Result<Self, ProgramError> {
        for (i, block) in blocks.iter().enumerate() {
            for (j, mode) in block.modes.iter().enumerate() {
                if layout.view(&mode.view).is_none() {
                    return Err(DeclError::UnknownView(mode.view.clone()).into());
                }
                if block.modes[..j].iter().any(|m| m.view == mode.view) {
                    return Err(ProgramError::DuplicateMode {
                        block: i,
                        view: mode.view.clone(),
                    });
                }
            }
            let mut unknown = None;
            block.body.visit(&mut |s| {
                let view = match s {
                    Statement::Effect { target, .. } => target.view(),
                    Statement::If(Condition::IsValid(v) | Condition::RemIsValid(v), ..)
                    | Statement::While(Condition::IsValid(v) | Condition::RemIsValid(v), _) => v,
                    _ => return,
                };
                if unknown.is_none() && layout.view(view).is_none() {
                    unknown = Some(view.clone());
                }
            });
            if let Some(view) = unknown {
                return Err(DeclError::UnknownView(view).into());
            }
        }
        Ok(AnnotatedProgram { layout, blocks })
    }
}

pub fn translate_mode(mode: &AccessMode, layout: &Layout) -> Result<Statement, DeclError> {
    let data = layout.sync_target(&mode.view)?;
    let flag = Target::Abstract(mode.view.clone());
    let (check, transfer) = match mode.site {
        Site::Local => (Condition::IsValid(mode.view.clone()), EffectKind::Pull),
        Site::Remote => (Condition::RemIsValid(mode.view.clone()), EffectKind::Push),
    };
    let fetch = Statement::if_(
        check,
        Statement::Noop,
        Statement::block([
            Statement::local(transfer, data),
            Statement::local(transfer, flag.clone()),
        ]),
    );
    let mark = Statement::Effect {
        kind: EffectKind::Write,
        site: mode.site,
        target: flag,
    };
    Ok(match mode.kind {
        ModeKind::R => fetch,
        ModeKind::RW => Statement::block([fetch, mark]),
        ModeKind::W => mark,
    })
}

/// Synchronisation code of a whole mode set, in declaration order.
pub fn translate_modes(modes: &[AccessMode], layout: &Layout) -> Result<Statement, DeclError> {
    let parts = modes
        .iter()
        .map(|m| translate_mode(m, layout))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Statement::block(parts))
}

pub fn translate_block(block: &DeclBlock, layout: &Layout) -> Result<Statement, DeclError> {
    Ok(translate_modes(&block.modes, layout)?.then(block.body.clone()))
}

pub fn translate_program(p: &AnnotatedProgram) -> Result<Statement, DeclError> {
    let parts = p
        .blocks
        .iter()
        .map(|b| translate_block(b, &p.layout))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Statement::block(parts))
}

/// A view whose abstract flag does not safely summarise one of its keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbstractionViolation {
    pub view: Name,
    pub key: crate::syntax::VarKey,
    pub abstract_: crate::validity::Pair,
    pub concrete: crate::validity::Pair,
}

pub fn abstraction_violations(store: &Store, layout: &Layout) -> Vec<AbstractionViolation> {
    let mut out = Vec::new();
    for view in layout.views() {
        let flag_key = crate::syntax::VarKey::Abstract(view.name().clone());
        let Some(abs) = store.get(&flag_key) else {
            continue;
        };
        let keys = match view {
            View::Scalar(n) => vec![crate::syntax::VarKey::Scalar(n.clone())],
            View::Array(a) => Target::Array(a.clone()).keys(),
        };
        for key in keys {
            if let Some(concrete) = store.get(&key) {
                if !leq(abs, concrete) {
                    out.push(AbstractionViolation {
                        view: view.name().clone(),
                        key,
                        abstract_: abs,
                        concrete,
                    });
                }
            }
        }
    }
    out
}

/// Every scalar's flag, and every array view's flag for each element in
/// its range, is below the concrete status in the abstraction order.
pub fn abstraction_correct(store: &Store, layout: &Layout) -> bool {
    abstraction_violations(store, layout).is_empty()
}

/// Abstraction check at the boundary before block `before_block`
/// (`blocks.len()` for the final store).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub before_block: usize,
    pub violations: Vec<AbstractionViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramRun {
    pub outcome: Outcome,
    pub store: Store,
    pub steps: usize,
    /// Block in which the run stopped when it did not finish.
    pub stopped_in: Option<usize>,
    pub checkpoints: Vec<Checkpoint>,
    pub trace: Vec<TraceStep>,
}

impl ProgramRun {
    pub fn abstraction_held(&self) -> bool {
        self.checkpoints.iter().all(|c| c.violations.is_empty())
    }
}

/// Runs the translation of `p` from its initial store, block by block,
/// checking abstraction correctness at every block boundary. `fuel` and the
/// schedule are shared by all blocks.
pub fn run_program(
    p: &AnnotatedProgram,
    fuel: usize,
    schedule: &mut Schedule,
    traced: bool,
) -> Result<ProgramRun, SemanticsError> {
    if fuel == 0 {
        return Err(SemanticsError::NoFuel);
    }
    let mut store = initial_store(&p.layout);
    let mut checkpoints = vec![Checkpoint {
        before_block: 0,
        violations: abstraction_violations(&store, &p.layout),
    }];
    let mut trace = Vec::new();
    let mut steps = 0;
    for (i, block) in p.blocks.iter().enumerate() {
        let program = translate_block(block, &p.layout).map_err(|e| match e {
            DeclError::UnknownView(v) => {
                SemanticsError::UnknownKey(crate::syntax::VarKey::Abstract(v))
            }
            other => unreachable!("validated program: {other}"),
        })?;
        let left = fuel - steps;
        if program == Statement::Noop {
            checkpoints.push(Checkpoint {
                before_block: i + 1,
                violations: abstraction_violations(&store, &p.layout),
            });
            continue;
        }
        if left == 0 {
            return Ok(ProgramRun {
                outcome: Outcome::FuelExhausted,
                store,
                steps,
                stopped_in: Some(i),
                checkpoints,
                trace,
            });
        }
        let r = if traced {
            run(program, store, left, schedule)?
        } else {
            run_untraced(program, store, left, schedule)?
        };
        steps += r.steps;
        trace.extend(r.trace);
        store = r.store;
        if !r.outcome.is_done() {
            return Ok(ProgramRun {
                outcome: r.outcome,
                store,
                steps,
                stopped_in: Some(i),
                checkpoints,
                trace,
            });
        }
        checkpoints.push(Checkpoint {
            before_block: i + 1,
            violations: abstraction_violations(&store, &p.layout),
        });
    }
    Ok(ProgramRun {
        outcome: Outcome::Done,
        store,
        steps,
        stopped_in: None,
        checkpoints,
        trace,
    })
}
