//! Overlapping array views.
//!
//! Views over one buffer share element keys, so a write through one view
//! changes elements another view's abstract flag summarises. Two pieces
//! keep that flag honest:
//!
//! * an [`OverlapRegistry`] that answers "which registered views intersect
//!   this one", and
//! * [`infer_overlap_closure`], which extends a block's mode set so every
//!   view overlapping a written view is declared `RW` at the same site.
//!
//! The closure rules, for a mode set `M`:
//!
//! ```text
//! E x  in M                                    =>  E x  in Overlap(M)
//! W x  in M,  W y  not in M,  x overlaps y     =>  RW y in Overlap(M)
//! RW x in M,  x overlaps y                     =>  RW y in Overlap(M)
//! ```
//!
//! plus the same rules at the remote site. A view that ends up with both its
//! own entry and an inferred `RW` keeps a single entry, raised to `RW`.
//! Inferred entries do not trigger further inference.

mod index;

use std::collections::HashMap;

use thiserror::Error;

pub use index::{IntervalIndex, SegmentTree, SortedList};

use crate::decl::{Layout, ViewDecl};
use crate::modes::{AccessMode, AnnotatedProgram, DeclBlock, ModeKind, Origin};
use crate::syntax::{Name, Site};

/// Same buffer and intersecting ranges.
pub fn overlaps(a: &ViewDecl, b: &ViewDecl) -> bool {
    a.buffer == b.buffer && a.lo <= b.hi && b.lo <= a.hi
}

/// Read access to an overlap index.
pub trait OverlapQuery {
    /// Registered views other than `view` that overlap it, in registration
    /// order.
    fn overlapping(&self, view: &ViewDecl) -> Vec<Name>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("view `{0}` is already registered")]
    Duplicate(Name),
    #[error("view `{0}` is not registered")]
    Absent(Name),
}

/// Per-buffer dynamic index of view intervals.
#[derive(Debug, Clone)]
pub struct OverlapRegistry<I = SortedList> {
    buffers: HashMap<Name, I>,
    ids: HashMap<Name, (usize, Name)>,
    names: Vec<Name>,
}

impl<I: IntervalIndex> Default for OverlapRegistry<I> {
    fn default() -> Self {
        OverlapRegistry {
            buffers: HashMap::new(),
            ids: HashMap::new(),
            names: Vec::new(),
        }
    }
}

impl<I: IntervalIndex> OverlapRegistry<I> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every array view of `layout`, in declaration order.
    pub fn from_layout(layout: &Layout) -> Self {
        let mut r = Self::new();
        for view in layout.arrays() {
            r.insert(view).expect("layout view names are unique");
        }
        r
    }

    pub fn insert(&mut self, view: &ViewDecl) -> Result<(), RegistryError> {
        if self.ids.contains_key(&view.view) {
            return Err(RegistryError::Duplicate(view.view.clone()));
        }
        let id = self.names.len();
        self.names.push(view.view.clone());
        self.ids
            .insert(view.view.clone(), (id, view.buffer.clone()));
        self.buffers
            .entry(view.buffer.clone())
            .or_default()
            .insert(id, view.lo, view.hi);
        Ok(())
    }

    pub fn remove(&mut self, view: &str) -> Result<(), RegistryError> {
        let (id, buffer) = self
            .ids
            .remove(view)
            .ok_or_else(|| RegistryError::Absent(crate::syntax::name(view)))?;
        let index = self
            .buffers
            .get_mut(&buffer)
            .expect("buffer of a registered view");
        index.remove(id);
        if index.is_empty() {
            self.buffers.remove(&buffer);
        }
        Ok(())
    }

    pub fn contains(&self, view: &str) -> bool {
        self.ids.contains_key(view)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Registered views overlapping `view`, excluding `view` itself. The
    /// probe need not be registered; its interval is used directly.
    pub fn query(&self, view: &ViewDecl) -> Vec<Name> {
        let Some(index) = self.buffers.get(&view.buffer) else {
            return Vec::new();
        };
        index
            .query(view.lo, view.hi)
            .into_iter()
            .map(|id| self.names[id].clone())
            .filter(|n| *n != view.view)
            .collect()
    }
}

impl<I: IntervalIndex> OverlapQuery for OverlapRegistry<I> {
    fn overlapping(&self, view: &ViewDecl) -> Vec<Name> {
        self.query(view)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("`{0}` is declared more than once")]
    DuplicateView(Name),
    #[error(
        "`{view}` overlaps `{source_view}`, which is written at the {inferred:?} site, \
         but `{view}` is already declared at the {existing:?} site"
    )]
    SiteConflict {
        view: Name,
        source_view: Name,
        existing: Site,
        inferred: Site,
    },
}

/// Extends `modes` with the access modes overlapping views need.
///
/// The result keeps the original entries in order, raises any original entry
/// that receives an inferred `RW` at its own site, and appends one `Shadow`
/// entry per view not named in `modes`. Entries already marked as inferred
/// are reverted first, so applying the closure twice changes nothing.
pub fn infer_overlap_closure(
    modes: &[AccessMode],
    layout: &Layout,
    registry: &dyn OverlapQuery,
) -> Result<Vec<AccessMode>, ClosureError> {
    let original: Vec<AccessMode> = modes.iter().filter_map(AccessMode::declared).collect();
    for (i, m) in original.iter().enumerate() {
        if original[..i].iter().any(|o| o.view == m.view) {
            return Err(ClosureError::DuplicateView(m.view.clone()));
        }
    }
    let mut result = original.clone();
    for source in original.iter().filter(|m| m.kind.writes()) {
        let Some(array) = layout.view(&source.view).and_then(|v| v.as_array()) else {
            continue;
        };
        for other in registry.overlapping(array) {
            if source.kind == ModeKind::W
                && original
                    .iter()
                    .any(|m| m.view == other && m.site == source.site && m.kind == ModeKind::W)
            {
                continue;
            }
            match result.iter_mut().find(|m| m.view == other) {
                Some(entry) if entry.site != source.site => {
                    return Err(ClosureError::SiteConflict {
                        view: other,
                        source_view: source.view.clone(),
                        existing: entry.site,
                        inferred: source.site,
                    })
                }
                Some(entry) => {
                    if entry.kind != ModeKind::RW {
                        entry.origin = Origin::Upgraded { from: entry.kind };
                        entry.kind = ModeKind::RW;
                    }
                }
                None => result.push(AccessMode {
                    kind: ModeKind::RW,
                    site: source.site,
                    view: other,
                    origin: Origin::Shadow,
                }),
            }
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("block {block}: {error}")]
pub struct RewriteError {
    pub block: usize,
    pub error: ClosureError,
}

/// Replaces every block's modes by their overlap closure; bodies unchanged.
pub fn rewrite_program(
    p: &AnnotatedProgram,
    registry: &dyn OverlapQuery,
) -> Result<AnnotatedProgram, RewriteError> {
    let blocks = p
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            infer_overlap_closure(&b.modes, &p.layout, registry)
                .map(|modes| DeclBlock {
                    modes,
                    body: b.body.clone(),
                })
                .map_err(|error| RewriteError { block: i, error })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnnotatedProgram {
        layout: p.layout.clone(),
        blocks,
    })
}
