//! Text format for annotated and raw programs.
//!
//! ```text
//! program := decl* block*                 (annotated)
//!          | decl* stmt*                  (raw)
//! decl    := "scalar" NAME | "buffer" NAME "[" INT "]"
//!          | "view" NAME "=" NAME "[" INT ":" INT "]"
//! block   := [mode ("," mode)*] "{" stmt* "}"
//! mode    := ("R"|"W"|"RW"|"GR"|"GW"|"GRW") "(" NAME ")" [marker]
//! marker  := "/*shadow*/" | "/*was R*/" | "/*was W*/"
//! stmt    := effect target ";"
//!          | "if" "(" cond ")" "{" stmt* "}" ["else" "{" stmt* "}"]
//!          | "while" "(" cond ")" "{" stmt* "}"
//! effect  := "r" | "w" | "push" | "pull" | "noop"   (local)
//!          | "gr" | "gw" | "gpush" | "gpull" | "gnoop"   (remote)
//! target  := NAME | NAME "[" INT "]" | NAME "^"
//! cond    := "valid" "(" NAME ")" | "gvalid" "(" NAME ")"
//!          | "opaque" ["(" NAME ")"]
//! ```
//!
//! Indices are absolute positions in the underlying buffer. In raw mode an
//! undeclared name used without an index is declared as a scalar on first
//! use. `//` and `/* */` comments are ignored, except that a block comment
//! right after a mode is read as that mode's origin marker.

mod parse;
pub mod print;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::checker::Location;
use crate::decl::Layout;
use crate::modes::AnnotatedProgram;
use crate::syntax::Statement;

pub use parse::{parse, parse_raw, parse_source};
pub use print::{print_program, print_raw, print_statement};

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

/// Core-calculus program without access modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawProgram {
    pub layout: Layout,
    pub body: Statement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Annotated(AnnotatedProgram),
    Raw(RawProgram),
}

impl Program {
    pub fn layout(&self) -> &Layout {
        match self {
            Program::Annotated(p) => &p.layout,
            Program::Raw(p) => &p.layout,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockSpans {
    pub at: Pos,
    pub modes: Vec<Pos>,
    /// Statement positions in the order of [`Statement::visit`].
    pub stmts: Vec<Pos>,
}

/// Positions of the parsed items. A raw program has a single block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanMap {
    pub decls: Vec<Pos>,
    pub blocks: Vec<BlockSpans>,
}

impl SpanMap {
    pub fn locate(&self, loc: Location) -> Pos {
        let Some(block) = self.blocks.get(loc.block()) else {
            return Pos::default();
        };
        match loc {
            Location::Block { .. } => block.at,
            Location::Mode { mode, .. } => block.modes.get(mode).copied().unwrap_or(block.at),
            Location::Stmt { stmt, .. } => block.stmts.get(stmt).copied().unwrap_or(block.at),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub program: Program,
    pub spans: SpanMap,
}
