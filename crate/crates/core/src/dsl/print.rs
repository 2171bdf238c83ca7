//! Pretty printers. [`print_program`] output re-parses to an equal program.

use std::fmt::{self, Write};

use crate::decl::Decl;
use crate::effect::EffectKind;
use crate::modes::AnnotatedProgram;
use crate::syntax::{Site, Statement};

use super::RawProgram;

fn effect_keyword(kind: EffectKind, site: Site) -> &'static str {
    use EffectKind::*;
    match (site, kind) {
        (Site::Local, Push) => "push",
        (Site::Local, Pull) => "pull",
        (Site::Local, Read) => "r",
        (Site::Local, Write) => "w",
        (Site::Local, Noop) => "noop",
        (Site::Remote, Push) => "gpush",
        (Site::Remote, Pull) => "gpull",
        (Site::Remote, Read) => "gr",
        (Site::Remote, Write) => "gw",
        (Site::Remote, Noop) => "gnoop",
    }
}

/// Single-line form: `w x; if (valid(x)) {} else { pull x; pull x^; }`.
/// The empty program prints as nothing.
pub fn write_statement_inline(f: &mut impl Write, s: &Statement) -> fmt::Result {
    for (i, item) in s.items().into_iter().enumerate() {
        if i > 0 {
            f.write_char(' ')?;
        }
        match item {
            Statement::Effect { kind, site, target } => {
                write!(f, "{} {target};", effect_keyword(*kind, *site))?
            }
            Statement::If(c, a, b) => {
                write!(f, "if ({c}) ")?;
                inline_block(f, a)?;
                if **b != Statement::Noop {
                    f.write_str(" else ")?;
                    inline_block(f, b)?;
                }
            }
            Statement::While(c, body) => {
                write!(f, "while ({c}) ")?;
                inline_block(f, body)?;
            }
            Statement::Noop | Statement::Seq(..) => unreachable!("items are never sequences"),
        }
    }
    Ok(())
}

fn inline_block(f: &mut impl Write, s: &Statement) -> fmt::Result {
    if *s == Statement::Noop {
        return f.write_str("{}");
    }
    f.write_str("{ ")?;
    write_statement_inline(f, s)?;
    f.write_str(" }")
}

fn write_lines(out: &mut String, s: &Statement, indent: usize) {
    let pad = "    ".repeat(indent);
    for item in s.items() {
        out.push_str(&pad);
        match item {
            Statement::Effect { kind, site, target } => {
                let _ = writeln!(out, "{} {target};", effect_keyword(*kind, *site));
            }
            Statement::If(c, a, b) => {
                let _ = write!(out, "if ({c}) ");
                write_block(out, a, indent);
                if **b != Statement::Noop {
                    out.push_str(" else ");
                    write_block(out, b, indent);
                }
                out.push('\n');
            }
            Statement::While(c, body) => {
                let _ = write!(out, "while ({c}) ");
                write_block(out, body, indent);
                out.push('\n');
            }
            Statement::Noop | Statement::Seq(..) => unreachable!("items are never sequences"),
        }
    }
}

fn write_block(out: &mut String, s: &Statement, indent: usize) {
    if *s == Statement::Noop {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    write_lines(out, s, indent + 1);
    out.push_str(&"    ".repeat(indent));
    out.push('}');
}

/// One statement per line, nested bodies indented by four spaces.
pub fn print_statement(s: &Statement) -> String {
    let mut out = String::new();
    write_lines(&mut out, s, 0);
    out
}

fn write_decls(out: &mut String, decls: &[Decl]) {
    for d in decls {
        let _ = match d {
            Decl::Scalar(n) => writeln!(out, "scalar {n}"),
            Decl::Buffer { name, len } => writeln!(out, "buffer {name}[{len}]"),
            Decl::View {
                name,
                buffer,
                lo,
                hi,
            } => writeln!(out, "view {name} = {buffer}[{lo}:{hi}]"),
        };
    }
}

pub fn print_program(p: &AnnotatedProgram) -> String {
    let mut out = String::new();
    write_decls(&mut out, p.layout.decls());
    for block in &p.blocks {
        if !out.is_empty() {
            out.push('\n');
        }
        let modes: Vec<String> = block.modes.iter().map(|m| m.to_string()).collect();
        out.push_str(&modes.join(", "));
        if !modes.is_empty() {
            out.push(' ');
        }
        write_block(&mut out, &block.body, 0);
        out.push('\n');
    }
    out
}

pub fn print_raw(p: &RawProgram) -> String {
    let mut out = String::new();
    write_decls(&mut out, p.layout.decls());
    if !out.is_empty() && p.body != Statement::Noop {
        out.push('\n');
    }
    out.push_str(&print_statement(&p.body));
    out
}
