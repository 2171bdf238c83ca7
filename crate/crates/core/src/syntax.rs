//! Abstract syntax of the core calculus.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::effect::EffectKind;

/// Interned identifier.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Address space an operation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Local,
    Remote,
}

impl Site {
    pub fn other(self) -> Site {
        match self {
            Site::Local => Site::Remote,
            Site::Remote => Site::Local,
        }
    }
}

/// A key of the validity store.
///
/// Overlapping views of one buffer share their `Element` keys; only the
/// `Abstract` key is per view.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    Scalar(Name),
    Element { buffer: Name, index: usize },
    Abstract(Name),
}

impl VarKey {
    pub fn scalar(n: &str) -> Self {
        VarKey::Scalar(name(n))
    }

    pub fn element(buffer: &str, index: usize) -> Self {
        VarKey::Element {
            buffer: name(buffer),
            index,
        }
    }

    pub fn abstract_(view: &str) -> Self {
        VarKey::Abstract(name(view))
    }

    pub fn is_abstract(&self) -> bool {
        matches!(self, VarKey::Abstract(_))
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Scalar(n) => f.write_str(n),
            VarKey::Element { buffer, index } => write!(f, "{buffer}[{index}]"),
            VarKey::Abstract(n) => write!(f, "{n}^"),
        }
    }
}

impl Serialize for VarKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A whole array view: the inclusive element range `lo..=hi` of `buffer`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArrayRef {
    pub view: Name,
    pub buffer: Name,
    pub lo: usize,
    pub hi: usize,
}

impl ArrayRef {
    pub fn range(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn contains(&self, index: usize) -> bool {
        self.range().contains(&index)
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// What an effect acts on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Scalar(Name),
    /// `x[i]`: element `index` (an absolute buffer index) seen through `view`.
    Element {
        array: Arc<ArrayRef>,
        index: usize,
    },
    /// A whole view; only meaningful for `Push` and `Pull`.
    Array(Arc<ArrayRef>),
    /// The abstract status flag of a view.
    Abstract(Name),
}

impl Target {
    /// Name of the view the target belongs to.
    pub fn view(&self) -> &Name {
        match self {
            Target::Scalar(n) | Target::Abstract(n) => n,
            Target::Element { array, .. } | Target::Array(array) => &array.view,
        }
    }

    /// Store keys touched, in the order effects are applied.
    pub fn keys(&self) -> Vec<VarKey> {
        match self {
            Target::Scalar(n) => vec![VarKey::Scalar(n.clone())],
            Target::Abstract(n) => vec![VarKey::Abstract(n.clone())],
            Target::Element { array, index } => vec![VarKey::Element {
                buffer: array.buffer.clone(),
                index: *index,
            }],
            Target::Array(array) => array
                .range()
                .map(|index| VarKey::Element {
                    buffer: array.buffer.clone(),
                    index,
                })
                .collect(),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Scalar(n) => f.write_str(n),
            Target::Element { array, index } => write!(f, "{}[{index}]", array.view),
            Target::Array(array) => f.write_str(&array.view),
            Target::Abstract(n) => write!(f, "{n}^"),
        }
    }
}

/// Loop and branch conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    /// Local flag of the view's abstract status.
    IsValid(Name),
    /// Remote flag of the view's abstract status.
    RemIsValid(Name),
    /// A condition on data values. Its outcome comes from the run's schedule.
    Opaque(Option<Name>),
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::IsValid(n) => write!(f, "valid({n})"),
            Condition::RemIsValid(n) => write!(f, "gvalid({n})"),
            Condition::Opaque(None) => f.write_str("opaque"),
            Condition::Opaque(Some(tag)) => write!(f, "opaque({tag})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    Noop,
    Effect {
        kind: EffectKind,
        site: Site,
        target: Target,
    },
    Seq(Box<Statement>, Box<Statement>),
    If(Condition, Box<Statement>, Box<Statement>),
    While(Condition, Box<Statement>),
}

impl Statement {
    pub fn local(kind: EffectKind, target: Target) -> Self {
        Statement::Effect {
            kind,
            site: Site::Local,
            target,
        }
    }

    pub fn remote(kind: EffectKind, target: Target) -> Self {
        Statement::Effect {
            kind,
            site: Site::Remote,
            target,
        }
    }

    /// Builds a normalized sequence from its parts.
    pub fn block(parts: impl IntoIterator<Item = Statement>) -> Self {
        let mut flat = Vec::new();
        for part in parts {
            part.flatten_into(&mut flat);
        }
        Self::from_normalized_list(flat)
    }

    pub fn seq(self, next: Statement) -> Self {
        Statement::block([self, next])
    }

    pub fn if_(cond: Condition, then: Statement, otherwise: Statement) -> Self {
        Statement::If(
            cond,
            Box::new(then.normalize()),
            Box::new(otherwise.normalize()),
        )
    }

    pub fn while_(cond: Condition, body: Statement) -> Self {
        Statement::While(cond, Box::new(body.normalize()))
    }

    /// Canonical form: sequences nested to the right, no `Noop` except as
    /// the whole (empty) program, applied recursively under `if`/`while`.
    pub fn normalize(self) -> Self {
        let mut flat = Vec::new();
        self.flatten_into(&mut flat);
        Self::from_normalized_list(flat)
    }

    pub fn is_normalized(&self) -> bool {
        fn item_ok(s: &Statement) -> bool {
            match s {
                Statement::Noop | Statement::Seq(..) => false,
                Statement::Effect { .. } => true,
                Statement::If(_, a, b) => a.is_normalized() && b.is_normalized(),
                Statement::While(_, body) => body.is_normalized(),
            }
        }
        let mut cur = self;
        if matches!(cur, Statement::Noop) {
            return true;
        }
        loop {
            match cur {
                Statement::Seq(head, rest) => {
                    if !item_ok(head) || matches!(**rest, Statement::Noop) {
                        return false;
                    }
                    cur = rest;
                }
                other => return item_ok(other),
            }
        }
    }

    fn flatten_into(self, out: &mut Vec<Statement>) {
        match self {
            Statement::Noop => {}
            Statement::Seq(a, b) => {
                a.flatten_into(out);
                b.flatten_into(out);
            }
            Statement::If(c, a, b) => out.push(Statement::If(
                c,
                Box::new(a.normalize()),
                Box::new(b.normalize()),
            )),
            Statement::While(c, body) => out.push(Statement::While(c, Box::new(body.normalize()))),
            effect @ Statement::Effect { .. } => out.push(effect),
        }
    }

    fn from_normalized_list(items: Vec<Statement>) -> Self {
        items
            .into_iter()
            .rev()
            .fold(Statement::Noop, |rest, item| match rest {
                Statement::Noop => item,
                rest => Statement::Seq(Box::new(item), Box::new(rest)),
            })
    }

    /// Splits a normalized program into its first statement and the rest.
    /// `None` for the empty program.
    pub fn split_head(self) -> Option<(Statement, Statement)> {
        match self {
            Statement::Noop => None,
            Statement::Seq(head, rest) => Some((*head, *rest)),
            other => Some((other, Statement::Noop)),
        }
    }

    /// Appends `rest` after `self`; both normalized, result normalized.
    pub fn then(self, rest: Statement) -> Self {
        match (self, rest) {
            (Statement::Noop, rest) => rest,
            (first, Statement::Noop) => first,
            (Statement::Seq(head, tail), rest) => Statement::Seq(head, Box::new(tail.then(rest))),
            (first, rest) => Statement::Seq(Box::new(first), Box::new(rest)),
        }
    }

    /// Top-level items of a normalized sequence.
    pub fn items(&self) -> Vec<&Statement> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Statement::Noop => return out,
                Statement::Seq(head, rest) => {
                    out.push(&**head);
                    cur = rest;
                }
                other => {
                    out.push(other);
                    return out;
                }
            }
        }
    }

    /// Visits every sub-statement other than `Seq` and `Noop`, in source
    /// (pre-)order.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Statement)) {
        match self {
            Statement::Noop => {}
            Statement::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Statement::If(_, a, b) => {
                f(self);
                a.visit(f);
                b.visit(f);
            }
            Statement::While(_, body) => {
                f(self);
                body.visit(f);
            }
            Statement::Effect { .. } => f(self),
        }
    }

    /// Number of top-level and nested statements, ignoring `Seq`/`Noop`.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::dsl::print::write_statement_inline(f, self)
    }
}
