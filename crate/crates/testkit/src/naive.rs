//! A second interpreter, written rule by rule with its own signature table
//! and store representation, used to cross-check `cohere::semantics`.
//!
//! The program is a work list of pending statements; sequences are unpacked
//! for free, everything else is one reduction step.

use std::collections::{BTreeMap, HashMap};

use cohere::syntax::{Condition, Site, Statement, Target};
use cohere::{EffectKind, Flag, Pair, Store};

/// `"x"`, `"b[3]"` or `"x^"` to `(local, remote)` as `'V'`/`'I'`.
pub type NaiveStore = BTreeMap<String, (char, char)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NaiveOutcome {
    Done,
    Stuck { key: String, actual: (char, char) },
    OutOfFuel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveRun {
    pub outcome: NaiveOutcome,
    pub store: NaiveStore,
    /// Store after every step, in order.
    pub history: Vec<NaiveStore>,
}

/// `(pre, post)` per effect; upper case letters are literal flags, lower
/// case ones are variables.
fn table(kind: EffectKind) -> ([char; 2], [char; 2]) {
    match kind {
        EffectKind::Push => (['V', 'x'], ['V', 'V']),
        EffectKind::Pull => (['x', 'V'], ['V', 'V']),
        EffectKind::Read => (['V', 'x'], ['V', 'x']),
        EffectKind::Write => (['x', 'y'], ['V', 'I']),
        EffectKind::Noop => (['x', 'y'], ['x', 'y']),
    }
}

fn unify(pattern: [char; 2], actual: [char; 2]) -> Option<HashMap<char, char>> {
    let mut env = HashMap::new();
    for (p, a) in pattern.into_iter().zip(actual) {
        if p.is_ascii_uppercase() {
            if p != a {
                return None;
            }
        } else if *env.entry(p).or_insert(a) != a {
            return None;
        }
    }
    Some(env)
}

fn instantiate(post: [char; 2], env: &HashMap<char, char>) -> [char; 2] {
    post.map(|c| if c.is_ascii_uppercase() { c } else { env[&c] })
}

fn keys(target: &Target) -> Vec<String> {
    match target {
        Target::Scalar(n) => vec![n.to_string()],
        Target::Abstract(n) => vec![format!("{n}^")],
        Target::Element { array, index } => vec![format!("{}[{index}]", array.buffer)],
        Target::Array(array) => (array.lo..=array.hi)
            .map(|i| format!("{}[{i}]", array.buffer))
            .collect(),
    }
}

fn flag_char(f: Flag) -> char {
    match f {
        Flag::V => 'V',
        Flag::I => 'I',
    }
}

pub fn from_store(store: &Store) -> NaiveStore {
    store
        .iter()
        .map(|(k, p)| (k.to_string(), (flag_char(p.local), flag_char(p.remote))))
        .collect()
}

pub fn pair_chars(p: Pair) -> (char, char) {
    (flag_char(p.local), flag_char(p.remote))
}

/// Runs `program` for at most `fuel` steps; opaque conditions take the next
/// bit of `schedule`, false once it runs out.
pub fn run_naive(
    program: &Statement,
    store: NaiveStore,
    fuel: usize,
    schedule: &[bool],
) -> NaiveRun {
    let mut store = store;
    let mut work: Vec<Statement> = vec![program.clone()];
    let mut bits = schedule.iter().copied();
    let mut history = Vec::new();
    let mut steps = 0;
    loop {
        let Some(next) = work.pop() else {
            return NaiveRun {
                outcome: NaiveOutcome::Done,
                store,
                history,
            };
        };
        match next {
            Statement::Noop => continue,
            Statement::Seq(a, b) => {
                work.push(*b);
                work.push(*a);
                continue;
            }
            _ => {}
        }
        if steps == fuel {
            return NaiveRun {
                outcome: NaiveOutcome::OutOfFuel,
                store,
                history,
            };
        }
        match next {
            Statement::Effect { kind, site, target } => {
                let (pre, post) = table(kind);
                let mut updated = store.clone();
                for key in keys(&target) {
                    let Some(&(l, r)) = store.get(&key) else {
                        panic!("key {key} missing from store");
                    };
                    let seen = match site {
                        Site::Local => [l, r],
                        Site::Remote => [r, l],
                    };
                    let Some(env) = unify(pre, seen) else {
                        return NaiveRun {
                            outcome: NaiveOutcome::Stuck {
                                key,
                                actual: (l, r),
                            },
                            store,
                            history,
                        };
                    };
                    let [a, b] = instantiate(post, &env);
                    let after = match site {
                        Site::Local => (a, b),
                        Site::Remote => (b, a),
                    };
                    updated.insert(key, after);
                }
                store = updated;
            }
            Statement::If(c, a, b) => {
                if holds(&c, &store, &mut bits) {
                    work.push(*a);
                } else {
                    work.push(*b);
                }
            }
            Statement::While(c, body) => {
                if holds(&c, &store, &mut bits) {
                    work.push(Statement::While(c, body.clone()));
                    work.push(*body);
                }
            }
            Statement::Noop | Statement::Seq(..) => unreachable!(),
        }
        steps += 1;
        history.push(store.clone());
    }
}

fn holds(c: &Condition, store: &NaiveStore, bits: &mut impl Iterator<Item = bool>) -> bool {
    match c {
        Condition::IsValid(v) => store[&format!("{v}^")].0 == 'V',
        Condition::RemIsValid(v) => store[&format!("{v}^")].1 == 'V',
        Condition::Opaque(_) => bits.next().unwrap_or(false),
    }
}
