//! Validity-status calculus for programs that share data between two
//! address spaces, such as a CPU host and a GPU device.
//!
//! Every variable carries a pair of flags `(local, remote)`, each `V`
//! (holds the latest data) or `I` (stale). Operations have effect
//! signatures on these pairs; a read of a stale copy has no matching
//! signature and the program is stuck. Access-mode declarations generate
//! the synchronisation a block needs, and the [`checker`] certifies that a
//! program's declarations are honest, so that the generated code never
//! gets stuck.
//!
//! ```
//! use cohere::dsl::parse;
//! use cohere::modes::run_program;
//! use cohere::semantics::{Outcome, Schedule};
//!
//! let p = parse("scalar x  RW(x) { w x; }  GR(x) { gr x; }").unwrap();
//! let r = run_program(&p, 100, &mut Schedule::empty(), false).unwrap();
//! assert_eq!(r.outcome, Outcome::Done);
//! assert!(r.abstraction_held());
//! ```

pub mod checker;
pub mod decl;
pub mod dsl;
pub mod effect;
pub mod modes;
pub mod overlap;
pub mod semantics;
pub mod store;
pub mod syntax;
pub mod validity;

pub use checker::{check_program, Diagnostic, RuleId};
pub use decl::{initial_store, Decl, Layout};
pub use effect::EffectKind;
pub use modes::{AccessMode, AnnotatedProgram, DeclBlock, ModeKind};
pub use overlap::{OverlapRegistry, SegmentTree, SortedList};
pub use semantics::{run, Outcome, Schedule};
pub use store::Store;
pub use syntax::{Site, Statement, Target, VarKey};
pub use validity::{Flag, Pair};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/validity.md")]
    mod validity {}
    #[doc = include_str!("../../../book/src/semantics.md")]
    mod semantics {}
    #[doc = include_str!("../../../book/src/access-modes.md")]
    mod access_modes {}
    #[doc = include_str!("../../../book/src/checker.md")]
    mod checker {}
    #[doc = include_str!("../../../book/src/overlaps.md")]
    mod overlaps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
