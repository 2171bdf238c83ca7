//! Static well-declaredness check.
//!
//! A block `M { S }` is well-declared when
//!
//! * `S` contains no `push`/`pull`,
//! * every write (read) of a view in `S` is covered by a `W`/`RW` (`R`/`RW`)
//!   mode for that view at the same site,
//! * every `W` view is written on all execution paths of `S`, every element
//!   of its range for array views, and
//! * every element written through `x` that is shared with an overlapping
//!   view `y` is covered by a `W`/`RW` mode for `y` at the same site.
//!
//! "All execution paths" is approximated syntactically: a sequence writes
//! what either part writes, a conditional what both branches write, a loop
//! nothing (it may run zero times). The approximation is sound and
//! incomplete; `while (c) { w x; } w x;` passes, a loop-only write fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::decl::{Layout, View};
use crate::effect::EffectKind;
use crate::modes::{AnnotatedProgram, DeclBlock, ModeKind, Origin};
use crate::overlap::{rewrite_program, OverlapQuery};
use crate::syntax::{Name, Site, Statement, Target};

/// Closed catalog of diagnostic identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RuleId {
    #[serde(rename = "D2-NO-SYNC")]
    NoSync,
    #[serde(rename = "D2-ABSTRACT-IN-BODY")]
    AbstractInBody,
    #[serde(rename = "D2-UNDECLARED-WRITE")]
    UndeclaredWrite,
    #[serde(rename = "D2-UNDECLARED-READ")]
    UndeclaredRead,
    #[serde(rename = "D2-W-NOT-ALL-PATHS")]
    WriteNotOnAllPaths,
    #[serde(rename = "D4-W-NOT-ALL-ELEMENTS")]
    WriteNotAllElements,
    #[serde(rename = "P3-MIXED-SITE")]
    MixedSite,
    #[serde(rename = "OVL-MISSING-RW")]
    OverlapMissingRw,
    #[serde(rename = "OVL-SITE-CONFLICT")]
    OverlapSiteConflict,
    #[serde(rename = "N-UNUSED-MODE")]
    UnusedMode,
}

impl RuleId {
    pub const ALL: [RuleId; 10] = [
        RuleId::NoSync,
        RuleId::AbstractInBody,
        RuleId::UndeclaredWrite,
        RuleId::UndeclaredRead,
        RuleId::WriteNotOnAllPaths,
        RuleId::WriteNotAllElements,
        RuleId::MixedSite,
        RuleId::OverlapMissingRw,
        RuleId::OverlapSiteConflict,
        RuleId::UnusedMode,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RuleId::NoSync => "D2-NO-SYNC",
            RuleId::AbstractInBody => "D2-ABSTRACT-IN-BODY",
            RuleId::UndeclaredWrite => "D2-UNDECLARED-WRITE",
            RuleId::UndeclaredRead => "D2-UNDECLARED-READ",
            RuleId::WriteNotOnAllPaths => "D2-W-NOT-ALL-PATHS",
            RuleId::WriteNotAllElements => "D4-W-NOT-ALL-ELEMENTS",
            RuleId::MixedSite => "P3-MIXED-SITE",
            RuleId::OverlapMissingRw => "OVL-MISSING-RW",
            RuleId::OverlapSiteConflict => "OVL-SITE-CONFLICT",
            RuleId::UnusedMode => "N-UNUSED-MODE",
        }
    }

    pub fn is_error(self) -> bool {
        self != RuleId::UnusedMode
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Where a diagnostic points. Statement indices count the non-sequence
/// statements of a body in source order, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "at", rename_all = "lowercase")]
pub enum Location {
    Block { block: usize },
    Mode { block: usize, mode: usize },
    Stmt { block: usize, stmt: usize },
}

impl Location {
    pub fn block(self) -> usize {
        match self {
            Location::Block { block }
            | Location::Mode { block, .. }
            | Location::Stmt { block, .. } => block,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: RuleId,
    pub view: Option<Name>,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    fn new(rule: RuleId, view: Option<&Name>, location: Location, message: String) -> Self {
        Diagnostic {
            rule,
            view: view.cloned(),
            location,
            message,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

fn site_index(site: Site) -> usize {
    match site {
        Site::Local => 0,
        Site::Remote => 1,
    }
}

/// Accesses to one view, indexed by site (local, remote).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViewAccess {
    pub reads: [bool; 2],
    pub writes: [bool; 2],
    /// Element indices written, per site; empty for scalars.
    pub written_elements: [BTreeSet<usize>; 2],
}

impl ViewAccess {
    pub fn reads_at(&self, site: Site) -> bool {
        self.reads[site_index(site)]
    }

    pub fn writes_at(&self, site: Site) -> bool {
        self.writes[site_index(site)]
    }

    pub fn accessed_at(&self, site: Site) -> bool {
        self.reads_at(site) || self.writes_at(site)
    }

    pub fn accessed(&self) -> bool {
        self.accessed_at(Site::Local) || self.accessed_at(Site::Remote)
    }
}

/// Syntactic summary of a body: an effect counts if it occurs anywhere as a
/// sub-statement, whatever branch it sits in.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessSummary {
    pub views: BTreeMap<Name, ViewAccess>,
    pub sync_ops_present: bool,
}

impl AccessSummary {
    pub fn view(&self, view: &str) -> Option<&ViewAccess> {
        self.views.get(view)
    }
}

pub fn collect_accesses(body: &Statement) -> AccessSummary {
    let mut summary = AccessSummary::default();
    body.visit(&mut |s| {
        let Statement::Effect { kind, site, target } = s else {
            return;
        };
        if kind.is_sync() {
            summary.sync_ops_present = true;
            return;
        }
        let entry = summary.views.entry(target.view().clone()).or_default();
        let i = site_index(*site);
        match kind {
            EffectKind::Read => entry.reads[i] = true,
            EffectKind::Write => {
                entry.writes[i] = true;
                if let Target::Element { index, .. } = target {
                    entry.written_elements[i].insert(*index);
                }
            }
            _ => {}
        }
    });
    summary
}

/// A location a write can cover: a scalar, or one element of a view.
pub type WriteKey = (Name, Option<usize>);

/// Writes at `site` that happen on every complete execution of `body`.
pub fn must_writes(body: &Statement, site: Site) -> BTreeSet<WriteKey> {
    match body {
        Statement::Noop | Statement::While(..) => BTreeSet::new(),
        Statement::Effect {
            kind: EffectKind::Write,
            site: s,
            target,
        } if *s == site => match target {
            Target::Scalar(n) => BTreeSet::from([(n.clone(), None)]),
            Target::Element { array, index } => {
                BTreeSet::from([(array.view.clone(), Some(*index))])
            }
            Target::Array(_) | Target::Abstract(_) => BTreeSet::new(),
        },
        Statement::Effect { .. } => BTreeSet::new(),
        Statement::Seq(a, b) => {
            let mut w = must_writes(a, site);
            w.extend(must_writes(b, site));
            w
        }
        Statement::If(_, a, b) => {
            let wa = must_writes(a, site);
            let wb = must_writes(b, site);
            wa.intersection(&wb).cloned().collect()
        }
    }
}

/// `view` is written at `site` on every execution path of `body`, every
/// element of its range for array views.
pub fn must_write(body: &Statement, view: &View, site: Site) -> bool {
    missing_writes(&must_writes(body, site), view).is_empty()
}

/// Elements of `view` (or the scalar itself, as `None`) not in `written`.
fn missing_writes(written: &BTreeSet<WriteKey>, view: &View) -> Vec<Option<usize>> {
    match view {
        View::Scalar(n) => {
            if written.contains(&(n.clone(), None)) {
                vec![]
            } else {
                vec![None]
            }
        }
        View::Array(a) => a
            .range()
            .filter(|i| !written.contains(&(a.view.clone(), Some(*i))))
            .map(Some)
            .collect(),
    }
}

fn site_word(site: Site) -> &'static str {
    match site {
        Site::Local => "locally",
        Site::Remote => "remotely",
    }
}

/// Body effects with their statement index.
fn indexed_effects(body: &Statement) -> Vec<(usize, EffectKind, Site, &Target)> {
    let mut out = Vec::new();
    let mut n = 0;
    body.visit(&mut |s| {
        if let Statement::Effect { kind, site, target } = s {
            out.push((n, *kind, *site, target));
        }
        n += 1;
    });
    out
}

pub fn check_block(
    block: &DeclBlock,
    index: usize,
    layout: &Layout,
    registry: &dyn OverlapQuery,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let effects = indexed_effects(&block.body);
    let stmt = |stmt| Location::Stmt { block: index, stmt };

    let mut reported = BTreeSet::new();
    for &(n, kind, site, target) in &effects {
        let view = target.view();
        if kind.is_sync() {
            out.push(Diagnostic::new(
                RuleId::NoSync,
                Some(view),
                stmt(n),
                format!(
                    "`{kind} {target}` in a body; transfers are generated from the access modes"
                ),
            ));
            continue;
        }
        if matches!(target, Target::Abstract(_)) {
            out.push(Diagnostic::new(
                RuleId::AbstractInBody,
                Some(view),
                stmt(n),
                format!("body acts on the abstract flag `{target}`"),
            ));
            continue;
        }
        let (rule, needed) = match kind {
            EffectKind::Read => (RuleId::UndeclaredRead, ModeKind::R),
            EffectKind::Write => (RuleId::UndeclaredWrite, ModeKind::W),
            _ => continue,
        };
        let covered = block
            .mode_for(view)
            .is_some_and(|m| m.site == site && m.kind.covers(needed));
        if !covered && reported.insert((rule, view.clone(), site)) {
            let what = if needed == ModeKind::R {
                "read"
            } else {
                "written"
            };
            let modes = if needed == ModeKind::R {
                "R or RW"
            } else {
                "W or RW"
            };
            let prefix = if site == Site::Remote { "G" } else { "" };
            out.push(Diagnostic::new(
                rule,
                Some(view),
                stmt(n),
                format!(
                    "`{view}` is {what} {} but not declared {prefix}{}",
                    site_word(site),
                    modes.replace(" or ", &format!(" or {prefix}"))
                ),
            ));
        }
    }

    for (m, mode) in block.modes.iter().enumerate() {
        if mode.kind != ModeKind::W {
            continue;
        }
        let Some(view) = layout.view(&mode.view) else {
            continue;
        };
        let missing = missing_writes(&must_writes(&block.body, mode.site), view);
        if missing.is_empty() {
            continue;
        }
        let loc = Location::Mode {
            block: index,
            mode: m,
        };
        match view {
            View::Scalar(n) => out.push(Diagnostic::new(
                RuleId::WriteNotOnAllPaths,
                Some(n),
                loc,
                format!(
                    "{mode} requires `{n}` to be written {} on every path",
                    site_word(mode.site)
                ),
            )),
            View::Array(a) => {
                let list: Vec<String> = missing.iter().flatten().map(|i| i.to_string()).collect();
                out.push(Diagnostic::new(
                    RuleId::WriteNotAllElements,
                    Some(&a.view),
                    loc,
                    format!(
                        "{mode} requires every element of `{}` to be written {} on every path; \
                         not guaranteed for index {}",
                        a.view,
                        site_word(mode.site),
                        list.join(", ")
                    ),
                ))
            }
        }
    }

    let mut reported = BTreeSet::new();
    for &(n, kind, site, target) in &effects {
        let (EffectKind::Write, Target::Element { array, index: i }) = (kind, target) else {
            continue;
        };
        for other in registry.overlapping(array) {
            let Some(View::Array(y)) = layout.view(&other) else {
                continue;
            };
            if !y.contains(*i) {
                continue;
            }
            let ok = block
                .mode_for(&other)
                .is_some_and(|m| m.site == site && m.kind.writes());
            if !ok && reported.insert((other.clone(), site)) {
                let prefix = if site == Site::Remote { "G" } else { "" };
                out.push(Diagnostic::new(
                    RuleId::OverlapMissingRw,
                    Some(&other),
                    stmt(n),
                    format!(
                        "writing `{}[{i}]` changes overlapping view `{other}`, \
                         which is not declared {prefix}W or {prefix}RW",
                        array.view
                    ),
                ));
            }
        }
    }
    out
}

/// Views accessed both locally and remotely in one body.
pub fn check_localised(block: &DeclBlock, index: usize) -> Vec<Diagnostic> {
    let summary = collect_accesses(&block.body);
    summary
        .views
        .iter()
        .filter(|(_, a)| a.accessed_at(Site::Local) && a.accessed_at(Site::Remote))
        .map(|(view, _)| {
            Diagnostic::new(
                RuleId::MixedSite,
                Some(view),
                Location::Block { block: index },
                format!("`{view}` is accessed both locally and remotely in one body"),
            )
        })
        .collect()
}

/// Concatenated [`check_block`] diagnostics; empty means well-declared.
pub fn check_program(p: &AnnotatedProgram, registry: &dyn OverlapQuery) -> Vec<Diagnostic> {
    p.blocks
        .iter()
        .enumerate()
        .flat_map(|(i, b)| check_block(b, i, &p.layout, registry))
        .collect()
}

/// Informational notes: declared `R`/`RW` views the body never touches.
pub fn program_notes(p: &AnnotatedProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, block) in p.blocks.iter().enumerate() {
        let summary = collect_accesses(&block.body);
        for (m, mode) in block.modes.iter().enumerate() {
            if mode.origin == Origin::Shadow || mode.kind == ModeKind::W {
                continue;
            }
            if !summary.view(&mode.view).is_some_and(ViewAccess::accessed) {
                out.push(Diagnostic::new(
                    RuleId::UnusedMode,
                    Some(&mode.view),
                    Location::Mode { block: i, mode: m },
                    format!("{mode} is declared but `{}` is not accessed", mode.view),
                ));
            }
        }
    }
    out
}

/// Result of checking a program, after the overlap rewrite when requested.
#[derive(Debug, Clone)]
pub struct Certification {
    /// The program that was checked: the rewritten one when the rewrite ran
    /// and succeeded, the input otherwise.
    pub program: AnnotatedProgram,
    pub diagnostics: Vec<Diagnostic>,
    pub notes: Vec<Diagnostic>,
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Optionally extends every block by the overlap closure, then checks.
pub fn certify(p: &AnnotatedProgram, registry: &dyn OverlapQuery, rewrite: bool) -> Certification {
    let program = if rewrite {
        match rewrite_program(p, registry) {
            Ok(rewritten) => rewritten,
            Err(e) => {
                let view = match &e.error {
                    crate::overlap::ClosureError::SiteConflict { view, .. }
                    | crate::overlap::ClosureError::DuplicateView(view) => view.clone(),
                };
                return Certification {
                    program: p.clone(),
                    diagnostics: vec![Diagnostic::new(
                        RuleId::OverlapSiteConflict,
                        Some(&view),
                        Location::Block { block: e.block },
                        e.error.to_string(),
                    )],
                    notes: Vec::new(),
                };
            }
        }
    } else {
        p.clone()
    };
    let diagnostics = check_program(&program, registry);
    let notes = program_notes(&program);
    Certification {
        program,
        diagnostics,
        notes,
    }
}
