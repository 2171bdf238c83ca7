use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::VarKey;
use crate::validity::Pair;

/// Validity store: the status pair of every concrete and abstract key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    map: BTreeMap<VarKey, Pair>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &VarKey) -> Option<Pair> {
        self.map.get(key).copied()
    }

    pub fn set(&mut self, key: VarKey, pair: Pair) {
        self.map.insert(key, pair);
    }

    pub fn contains(&self, key: &VarKey) -> bool {
        self.map.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarKey, Pair)> {
        self.map.iter().map(|(k, p)| (k, *p))
    }

    /// Some key holds `(I,I)`.
    pub fn is_unsafe(&self) -> bool {
        self.map.values().any(|p| p.is_unsafe())
    }
}

pub fn is_unsafe(store: &Store) -> bool {
    store.is_unsafe()
}

impl FromIterator<(VarKey, Pair)> for Store {
    fn from_iter<T: IntoIterator<Item = (VarKey, Pair)>>(iter: T) -> Self {
        Store {
            map: iter.into_iter().collect(),
        }
    }
}

/// One `key local remote` line per entry.
impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (key, pair) in self.iter() {
            writeln!(f, "{key} {} {}", pair.local, pair.remote)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_is_functional() {
        let mut s: Store = [
            (VarKey::scalar("x"), Pair::VI),
            (VarKey::scalar("y"), Pair::IV),
        ]
        .into_iter()
        .collect();
        s.set(VarKey::scalar("x"), Pair::VV);
        assert_eq!(s.get(&VarKey::scalar("x")), Some(Pair::VV));
        assert_eq!(s.get(&VarKey::scalar("y")), Some(Pair::IV));
        assert!(!s.is_unsafe());
        s.set(VarKey::scalar("y"), Pair::II);
        assert!(is_unsafe(&s));
    }

    #[test]
    fn display_lines() {
        let s: Store = [
            (VarKey::scalar("x"), Pair::VV),
            (VarKey::abstract_("x"), Pair::VI),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.to_string(), "x V V\nx^ V I\n");
    }
}
