//! Declared variables: scalars, buffers, and array views over buffers.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::store::Store;
use crate::syntax::{name, ArrayRef, Name, Target, VarKey};
use crate::validity::Pair;

/// A view over a buffer; a whole vector is the full-range view.
pub type ViewDecl = ArrayRef;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Decl {
    Scalar(Name),
    Buffer {
        name: Name,
        len: usize,
    },
    View {
        name: Name,
        buffer: Name,
        lo: usize,
        hi: usize,
    },
}

impl Decl {
    pub fn name(&self) -> &Name {
        match self {
            Decl::Scalar(n) | Decl::Buffer { name: n, .. } | Decl::View { name: n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeclError {
    #[error("`{0}` is declared twice")]
    Duplicate(Name),
    #[error("buffer `{0}` must have at least one element")]
    EmptyBuffer(Name),
    #[error("view `{view}` refers to unknown buffer `{buffer}`")]
    UnknownBuffer { view: Name, buffer: Name },
    #[error("view `{view}` range [{lo}:{hi}] does not fit buffer `{buffer}` of length {len}")]
    BadRange {
        view: Name,
        buffer: Name,
        lo: usize,
        hi: usize,
        len: usize,
    },
    #[error("`{0}` is not a declared scalar or view")]
    UnknownView(Name),
    #[error("`{0}` is a scalar and cannot be indexed")]
    IndexedScalar(Name),
    #[error("`{0}` is an array view; reads and writes need an index")]
    UnindexedArray(Name),
    #[error("index {index} is outside the range [{lo}:{hi}] of view `{view}`")]
    IndexOutOfRange {
        view: Name,
        index: usize,
        lo: usize,
        hi: usize,
    },
}

/// Something a statement can name: a scalar or an array view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum View {
    Scalar(Name),
    Array(Arc<ViewDecl>),
}

impl View {
    pub fn name(&self) -> &Name {
        match self {
            View::Scalar(n) => n,
            View::Array(a) => &a.view,
        }
    }

    pub fn as_array(&self) -> Option<&Arc<ViewDecl>> {
        match self {
            View::Array(a) => Some(a),
            View::Scalar(_) => None,
        }
    }
}

/// Validated declarations with name resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    decls: Vec<Decl>,
    views: Vec<View>,
    by_name: HashMap<Name, usize>,
    buffers: Vec<(Name, usize)>,
}

impl Layout {
    pub fn new(decls: Vec<Decl>) -> Result<Self, DeclError> {
        let mut layout = Layout::default();
        for decl in decls {
            layout.push(decl)?;
        }
        Ok(layout)
    }

    pub fn push(&mut self, decl: Decl) -> Result<(), DeclError> {
        let taken =
            |n: &Name| self.by_name.contains_key(n) || self.buffers.iter().any(|(b, _)| b == n);
        if taken(decl.name()) {
            return Err(DeclError::Duplicate(decl.name().clone()));
        }
        match &decl {
            Decl::Scalar(n) => {
                self.by_name.insert(n.clone(), self.views.len());
                self.views.push(View::Scalar(n.clone()));
            }
            Decl::Buffer { name, len } => {
                if *len == 0 {
                    return Err(DeclError::EmptyBuffer(name.clone()));
                }
                self.buffers.push((name.clone(), *len));
            }
            Decl::View {
                name,
                buffer,
                lo,
                hi,
            } => {
                let len = self
                    .buffer_len(buffer)
                    .ok_or_else(|| DeclError::UnknownBuffer {
                        view: name.clone(),
                        buffer: buffer.clone(),
                    })?;
                if lo > hi || *hi >= len {
                    return Err(DeclError::BadRange {
                        view: name.clone(),
                        buffer: buffer.clone(),
                        lo: *lo,
                        hi: *hi,
                        len,
                    });
                }
                self.by_name.insert(name.clone(), self.views.len());
                self.views.push(View::Array(Arc::new(ArrayRef {
                    view: name.clone(),
                    buffer: buffer.clone(),
                    lo: *lo,
                    hi: *hi,
                })));
            }
        }
        self.decls.push(decl);
        Ok(())
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    /// Scalars and array views in declaration order.
    pub fn views(&self) -> &[View] {
        &self.views
    }

    pub fn arrays(&self) -> impl Iterator<Item = &Arc<ViewDecl>> {
        self.views.iter().filter_map(View::as_array)
    }

    pub fn buffers(&self) -> &[(Name, usize)] {
        &self.buffers
    }

    pub fn buffer_len(&self, buffer: &str) -> Option<usize> {
        self.buffers
            .iter()
            .find(|(b, _)| &**b == buffer)
            .map(|(_, l)| *l)
    }

    pub fn view(&self, name: &str) -> Option<&View> {
        self.by_name.get(name).map(|&i| &self.views[i])
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.by_name.contains_key(name) || self.buffer_len(name).is_some()
    }

    fn lookup(&self, view: &str) -> Result<&View, DeclError> {
        self.view(view)
            .ok_or_else(|| DeclError::UnknownView(name(view)))
    }

    /// Target of a read or write of `view` (a scalar).
    pub fn scalar_target(&self, view: &str) -> Result<Target, DeclError> {
        match self.lookup(view)? {
            View::Scalar(n) => Ok(Target::Scalar(n.clone())),
            View::Array(a) => Err(DeclError::UnindexedArray(a.view.clone())),
        }
    }

    /// Target `view[index]`, `index` being an absolute buffer index.
    pub fn element_target(&self, view: &str, index: usize) -> Result<Target, DeclError> {
        match self.lookup(view)? {
            View::Scalar(n) => Err(DeclError::IndexedScalar(n.clone())),
            View::Array(a) if !a.contains(index) => Err(DeclError::IndexOutOfRange {
                view: a.view.clone(),
                index,
                lo: a.lo,
                hi: a.hi,
            }),
            View::Array(a) => Ok(Target::Element {
                array: a.clone(),
                index,
            }),
        }
    }

    /// Target of a whole-view synchronisation.
    pub fn sync_target(&self, view: &str) -> Result<Target, DeclError> {
        Ok(match self.lookup(view)? {
            View::Scalar(n) => Target::Scalar(n.clone()),
            View::Array(a) => Target::Array(a.clone()),
        })
    }
}

/// The starting store: every scalar, every buffer element and every
/// abstract flag holds `(V,I)`, data living on the host.
pub fn initial_store(layout: &Layout) -> Store {
    let mut store = Store::new();
    for (buffer, len) in layout.buffers() {
        for index in 0..*len {
            store.set(
                VarKey::Element {
                    buffer: buffer.clone(),
                    index,
                },
                Pair::VI,
            );
        }
    }
    for view in layout.views() {
        if let View::Scalar(n) = view {
            store.set(VarKey::Scalar(n.clone()), Pair::VI);
        }
        store.set(VarKey::Abstract(view.name().clone()), Pair::VI);
    }
    store
}
