//! Validity flags and the (local, remote) status pair tracked for every
//! memory location.

use std::fmt;

use serde::Serialize;

/// Status of one copy of a location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Flag {
    /// The copy holds usable data.
    V,
    /// The copy is stale.
    I,
}

impl Flag {
    pub fn is_valid(self) -> bool {
        self == Flag::V
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::V => "V",
            Flag::I => "I",
        })
    }
}

/// Status of a location in both address spaces: `local` is the host copy,
/// `remote` the device copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pair {
    pub local: Flag,
    pub remote: Flag,
}

impl Pair {
    pub const VV: Pair = Pair::new(Flag::V, Flag::V);
    pub const VI: Pair = Pair::new(Flag::V, Flag::I);
    pub const IV: Pair = Pair::new(Flag::I, Flag::V);
    pub const II: Pair = Pair::new(Flag::I, Flag::I);

    /// All four pairs, in a fixed order.
    pub const ALL: [Pair; 4] = [Pair::VV, Pair::VI, Pair::IV, Pair::II];

    pub const fn new(local: Flag, remote: Flag) -> Self {
        Pair { local, remote }
    }

    /// Exchanges the roles of the two address spaces.
    pub fn swap(self) -> Self {
        Pair::new(self.remote, self.local)
    }

    /// Neither copy holds usable data.
    pub fn is_unsafe(self) -> bool {
        self == Pair::II
    }

    /// The abstraction order: `self` safely summarises `concrete`.
    ///
    /// A pair abstracts itself, and forgetting one of two valid copies is
    /// safe, so `(V,I)` and `(I,V)` both abstract `(V,V)`.
    pub fn abstracts(self, concrete: Pair) -> bool {
        self == concrete || (concrete == Pair::VV && (self == Pair::VI || self == Pair::IV))
    }
}

/// `abstract_ <= concrete` in the abstraction order.
pub fn leq(abstract_: Pair, concrete: Pair) -> bool {
    abstract_.abstracts(concrete)
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.local, self.remote)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_is_an_involution() {
        for p in Pair::ALL {
            assert_eq!(p.swap().swap(), p);
        }
        assert_eq!(Pair::VI.swap(), Pair::IV);
    }

    #[test]
    fn order_examples() {
        assert!(leq(Pair::VI, Pair::VV));
        assert!(leq(Pair::IV, Pair::VV));
        assert!(leq(Pair::IV, Pair::IV));
        assert!(leq(Pair::VV, Pair::VV));
        assert!(!leq(Pair::VI, Pair::IV));
        assert!(!leq(Pair::VV, Pair::VI));
    }

    #[test]
    fn order_is_a_partial_order() {
        let n = Pair::ALL
            .iter()
            .flat_map(|a| Pair::ALL.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| leq(*a, *b))
            .count();
        // four reflexive pairs plus the two forgetful abstractions of (V,V)
        assert_eq!(n, 6);
        for a in Pair::ALL {
            for b in Pair::ALL {
                if leq(a, b) && leq(b, a) {
                    assert_eq!(a, b);
                }
            }
        }
    }
}
