//! Effect signatures.
//!
//! Every primitive operation carries a signature `pre ↦ post` over validity
//! pairs. Applying an operation unifies the current status with `pre`,
//! binding the pattern variables `X` and `Y`, and yields `post` under that
//! binding. No pattern variable occurs twice in a `pre` pattern, so
//! unification is a component-wise match.

use std::fmt;

use serde::Serialize;

use crate::validity::{Flag, Pair};

/// The primitive operations on one memory location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EffectKind {
    /// Upload the local copy to the remote side.
    Push,
    /// Download the remote copy to the local side.
    Pull,
    Read,
    Write,
    Noop,
}

impl EffectKind {
    pub const ALL: [EffectKind; 5] = [
        EffectKind::Push,
        EffectKind::Pull,
        EffectKind::Read,
        EffectKind::Write,
        EffectKind::Noop,
    ];

    pub fn signature(self) -> Signature {
        effect_signature(self)
    }

    pub fn is_sync(self) -> bool {
        matches!(self, EffectKind::Push | EffectKind::Pull)
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectKind::Push => "push",
            EffectKind::Pull => "pull",
            EffectKind::Read => "r",
            EffectKind::Write => "w",
            EffectKind::Noop => "noop",
        })
    }
}

/// One component of a signature pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Slot {
    Is(Flag),
    X,
    Y,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Is(flag) => flag.fmt(f),
            Slot::X => f.write_str("X"),
            Slot::Y => f.write_str("Y"),
        }
    }
}

/// A pattern over validity pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Pattern(pub Slot, pub Slot);

impl Pattern {
    pub fn swap(self) -> Self {
        Pattern(self.1, self.0)
    }

    pub fn matches(self, pair: Pair) -> bool {
        self.bind(pair).is_some()
    }

    fn bind(self, pair: Pair) -> Option<Binding> {
        let mut binding = Binding::default();
        binding.unify(self.0, pair.local)?;
        binding.unify(self.1, pair.remote)?;
        Some(binding)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

#[derive(Default)]
struct Binding {
    x: Option<Flag>,
    y: Option<Flag>,
}

impl Binding {
    fn unify(&mut self, slot: Slot, flag: Flag) -> Option<()> {
        let var = match slot {
            Slot::Is(f) => return (f == flag).then_some(()),
            Slot::X => &mut self.x,
            Slot::Y => &mut self.y,
        };
        match var {
            Some(bound) if *bound != flag => None,
            _ => {
                *var = Some(flag);
                Some(())
            }
        }
    }

    fn resolve(&self, slot: Slot) -> Flag {
        match slot {
            Slot::Is(f) => f,
            Slot::X => self.x.expect("post variable X bound in pre"),
            Slot::Y => self.y.expect("post variable Y bound in pre"),
        }
    }
}

/// `pre ↦ post`; every variable of `post` occurs in `pre`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub pre: Pattern,
    pub post: Pattern,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ↦ {}", self.pre, self.post)
    }
}

const V: Slot = Slot::Is(Flag::V);
const I: Slot = Slot::Is(Flag::I);

pub fn effect_signature(kind: EffectKind) -> Signature {
    use Slot::{X, Y};
    let (pre, post) = match kind {
        EffectKind::Push => (Pattern(V, X), Pattern(V, V)),
        EffectKind::Pull => (Pattern(X, V), Pattern(V, V)),
        EffectKind::Read => (Pattern(V, X), Pattern(V, X)),
        EffectKind::Write => (Pattern(X, Y), Pattern(V, I)),
        EffectKind::Noop => (Pattern(X, Y), Pattern(X, Y)),
    };
    Signature { pre, post }
}

/// Unifies `status` with `sig.pre`; `None` when no binding exists.
pub fn apply_signature(sig: Signature, status: Pair) -> Option<Pair> {
    let binding = sig.pre.bind(status)?;
    Some(Pair::new(
        binding.resolve(sig.post.0),
        binding.resolve(sig.post.1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_table() {
        let sig = |k| effect_signature(k).to_string();
        assert_eq!(sig(EffectKind::Push), "(V,X) ↦ (V,V)");
        assert_eq!(sig(EffectKind::Pull), "(X,V) ↦ (V,V)");
        assert_eq!(sig(EffectKind::Read), "(V,X) ↦ (V,X)");
        assert_eq!(sig(EffectKind::Write), "(X,Y) ↦ (V,I)");
        assert_eq!(sig(EffectKind::Noop), "(X,Y) ↦ (X,Y)");
    }

    #[test]
    fn apply_examples() {
        let read = effect_signature(EffectKind::Read);
        assert_eq!(apply_signature(read, Pair::VV), Some(Pair::VV));
        assert_eq!(apply_signature(read, Pair::IV), None);
        let noop = effect_signature(EffectKind::Noop);
        assert_eq!(apply_signature(noop, Pair::II), Some(Pair::II));
    }

    #[test]
    fn post_variables_are_bound_in_pre() {
        for kind in EffectKind::ALL {
            let sig = effect_signature(kind);
            for slot in [sig.post.0, sig.post.1] {
                if slot != V && slot != I {
                    assert!(sig.pre.0 == slot || sig.pre.1 == slot, "{kind}");
                }
            }
            assert!(sig.pre.0 != sig.pre.1 || matches!(sig.pre.0, Slot::Is(_)));
        }
    }

    #[test]
    fn no_effect_produces_ii_from_a_safe_pair() {
        for kind in EffectKind::ALL {
            for p in Pair::ALL.into_iter().filter(|p| !p.is_unsafe()) {
                if let Some(q) = apply_signature(effect_signature(kind), p) {
                    assert!(!q.is_unsafe(), "{kind} on {p}");
                }
            }
        }
    }
}
