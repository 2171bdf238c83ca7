use crate::decl::{Decl, DeclError, Layout, View};
use crate::effect::EffectKind;
use crate::modes::{AccessMode, AnnotatedProgram, DeclBlock, ModeKind, Origin};
use crate::syntax::{name, Condition, Site, Statement, Target};

use super::{BlockSpans, ParseError, Pos, Program, RawProgram, SourceProgram, SpanMap};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Sym(char),
    Comment(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Comment(_) => "comment".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const RESERVED: &[&str] = &[
    "scalar", "buffer", "view", "if", "else", "while", "valid", "gvalid", "opaque", "r", "w", "gr",
    "gw", "push", "pull", "gpush", "gpull", "noop", "gnoop", "R", "W", "RW", "GR", "GW", "GRW",
];

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    pos: Pos,
}

impl Cursor {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.i + ahead).copied()
    }

    fn advance(&mut self) {
        if self.chars[self.i] == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        self.i += 1;
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.i;
        while self.peek(0).is_some_and(&f) {
            self.advance();
        }
        self.chars[start..self.i].iter().collect()
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        i: 0,
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek(0) {
        let pos = cur.pos;
        if c.is_whitespace() {
            cur.advance();
        } else if c == '/' && cur.peek(1) == Some('/') {
            cur.take_while(|c| c != '\n');
        } else if c == '/' && cur.peek(1) == Some('*') {
            cur.advance();
            cur.advance();
            let start = cur.i;
            while !(cur.peek(0) == Some('*') && cur.peek(1) == Some('/')) {
                if cur.peek(0).is_none() {
                    return err(pos, "unterminated comment");
                }
                cur.advance();
            }
            let body: String = cur.chars[start..cur.i].iter().collect();
            cur.advance();
            cur.advance();
            out.push((Tok::Comment(body.trim().to_string()), pos));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let word = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
            out.push((Tok::Ident(word), pos));
        } else if c.is_ascii_digit() {
            let digits = cur.take_while(|c| c.is_ascii_digit());
            match digits.parse() {
                Ok(n) => out.push((Tok::Int(n), pos)),
                Err(_) => return err(pos, format!("integer `{digits}` is too large")),
            }
        } else if "(){}[];,=:^".contains(c) {
            cur.advance();
            out.push((Tok::Sym(c), pos));
        } else {
            return err(pos, format!("unexpected character `{c}`"));
        }
    }
    out.push((Tok::Eof, cur.pos));
    Ok(out)
}

fn mode_keyword(kw: &str) -> Option<(ModeKind, Site)> {
    Some(match kw {
        "R" => (ModeKind::R, Site::Local),
        "W" => (ModeKind::W, Site::Local),
        "RW" => (ModeKind::RW, Site::Local),
        "GR" => (ModeKind::R, Site::Remote),
        "GW" => (ModeKind::W, Site::Remote),
        "GRW" => (ModeKind::RW, Site::Remote),
        _ => return None,
    })
}

fn effect_keyword(kw: &str) -> Option<(EffectKind, Site)> {
    use EffectKind::*;
    Some(match kw {
        "push" => (Push, Site::Local),
        "pull" => (Pull, Site::Local),
        "r" => (Read, Site::Local),
        "w" => (Write, Site::Local),
        "noop" => (Noop, Site::Local),
        "gpush" => (Push, Site::Remote),
        "gpull" => (Pull, Site::Remote),
        "gr" => (Read, Site::Remote),
        "gw" => (Write, Site::Remote),
        "gnoop" => (Noop, Site::Remote),
        _ => return None,
    })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    raw: bool,
    layout: Layout,
    decls: Vec<Pos>,
    stmts: Vec<Pos>,
}

impl Parser {
    fn skip_comments(&mut self) {
        while matches!(self.toks[self.i].0, Tok::Comment(_)) {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> (Tok, Pos) {
        self.skip_comments();
        self.toks[self.i].clone()
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.peek();
        if t.0 != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn at_sym(&mut self, c: char) -> bool {
        self.peek().0 == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<Pos, ParseError> {
        let (t, pos) = self.bump();
        if t == Tok::Sym(c) {
            Ok(pos)
        } else {
            err(pos, format!("expected `{c}`, found {}", t.describe()))
        }
    }

    fn expect_int(&mut self) -> Result<usize, ParseError> {
        match self.bump() {
            (Tok::Int(n), _) => Ok(n),
            (t, pos) => err(pos, format!("expected an integer, found {}", t.describe())),
        }
    }

    fn expect_name(&mut self) -> Result<(String, Pos), ParseError> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => err(pos, format!("expected a name, found {}", t.describe())),
        }
    }

    fn decl_error<T>(&self, pos: Pos, e: DeclError) -> Result<T, ParseError> {
        err(pos, e.to_string())
    }

    fn parse_decl(&mut self, kw: &str) -> Result<(), ParseError> {
        let (n, pos) = self.expect_name()?;
        if RESERVED.contains(&n.as_str()) {
            return err(pos, format!("`{n}` is a reserved word"));
        }
        let decl = match kw {
            "scalar" => Decl::Scalar(name(&n)),
            "buffer" => {
                self.expect_sym('[')?;
                let len = self.expect_int()?;
                self.expect_sym(']')?;
                Decl::Buffer {
                    name: name(&n),
                    len,
                }
            }
            _ => {
                self.expect_sym('=')?;
                let (buffer, _) = self.expect_name()?;
                self.expect_sym('[')?;
                let lo = self.expect_int()?;
                self.expect_sym(':')?;
                let hi = self.expect_int()?;
                self.expect_sym(']')?;
                Decl::View {
                    name: name(&n),
                    buffer: name(&buffer),
                    lo,
                    hi,
                }
            }
        };
        if let Err(e) = self.layout.push(decl) {
            return self.decl_error(pos, e);
        }
        self.decls.push(pos);
        Ok(())
    }

    /// Resolves a view name used in a statement or condition, declaring it
    /// as a scalar in raw mode.
    fn resolve(&mut self, n: &str, pos: Pos) -> Result<View, ParseError> {
        if self.layout.view(n).is_none() {
            if !self.raw || self.layout.is_declared(n) {
                return self.decl_error(pos, DeclError::UnknownView(name(n)));
            }
            if RESERVED.contains(&n) {
                return err(pos, format!("`{n}` is a reserved word"));
            }
            if let Err(e) = self.layout.push(Decl::Scalar(name(n))) {
                return self.decl_error(pos, e);
            }
        }
        Ok(self.layout.view(n).cloned().expect("just resolved"))
    }

    fn parse_target(&mut self, kind: EffectKind) -> Result<Target, ParseError> {
        let (n, pos) = self.expect_name()?;
        if self.at_sym('^') {
            self.bump();
            self.resolve(&n, pos)?;
            return Ok(Target::Abstract(name(&n)));
        }
        if self.at_sym('[') {
            self.bump();
            let index = self.expect_int()?;
            self.expect_sym(']')?;
            if self.raw && self.layout.view(&n).is_none() {
                return self.decl_error(pos, DeclError::UnknownView(name(&n)));
            }
            return self
                .layout
                .element_target(&n, index)
                .or_else(|e| self.decl_error(pos, e));
        }
        self.resolve(&n, pos)?;
        let whole = matches!(kind, EffectKind::Push | EffectKind::Pull | EffectKind::Noop);
        let t = if whole {
            self.layout.sync_target(&n)
        } else {
            self.layout.scalar_target(&n)
        };
        t.or_else(|e| self.decl_error(pos, e))
    }

    fn parse_cond(&mut self) -> Result<Condition, ParseError> {
        self.expect_sym('(')?;
        let (kw, pos) = self.expect_name()?;
        let cond = match kw.as_str() {
            "valid" | "gvalid" => {
                self.expect_sym('(')?;
                let (n, npos) = self.expect_name()?;
                self.resolve(&n, npos)?;
                self.expect_sym(')')?;
                if kw == "valid" {
                    Condition::IsValid(name(&n))
                } else {
                    Condition::RemIsValid(name(&n))
                }
            }
            "opaque" => {
                if self.at_sym('(') {
                    self.bump();
                    let (tag, _) = self.expect_name()?;
                    self.expect_sym(')')?;
                    Condition::Opaque(Some(name(&tag)))
                } else {
                    Condition::Opaque(None)
                }
            }
            other => {
                return err(
                    pos,
                    format!("expected `valid`, `gvalid` or `opaque`, found `{other}`"),
                )
            }
        };
        self.expect_sym(')')?;
        Ok(cond)
    }

    fn parse_body(&mut self) -> Result<Statement, ParseError> {
        self.expect_sym('{')?;
        let mut parts = Vec::new();
        while !self.at_sym('}') {
            parts.push(self.parse_stmt()?);
        }
        self.bump();
        Ok(Statement::block(parts))
    }

    fn parse_stmt(&mut self) -> Result<Statement, ParseError> {
        let (kw, pos) = match self.bump() {
            (Tok::Ident(s), pos) => (s, pos),
            (t, pos) => return err(pos, format!("expected a statement, found {}", t.describe())),
        };
        self.stmts.push(pos);
        match kw.as_str() {
            "if" => {
                let c = self.parse_cond()?;
                let then = self.parse_body()?;
                let otherwise = if self.peek().0 == Tok::Ident("else".into()) {
                    self.bump();
                    self.parse_body()?
                } else {
                    Statement::Noop
                };
                Ok(Statement::if_(c, then, otherwise))
            }
            "while" => {
                let c = self.parse_cond()?;
                Ok(Statement::while_(c, self.parse_body()?))
            }
            other => {
                let Some((kind, site)) = effect_keyword(other) else {
                    return err(pos, format!("unknown statement `{other}`"));
                };
                let target = self.parse_target(kind)?;
                self.expect_sym(';')?;
                Ok(Statement::Effect { kind, site, target })
            }
        }
    }

    fn parse_marker(&mut self, mode: &mut AccessMode) -> Result<(), ParseError> {
        let (Tok::Comment(text), pos) = self.toks[self.i].clone() else {
            return Ok(());
        };
        let origin = match text.as_str() {
            "shadow" => Origin::Shadow,
            "was R" => Origin::Upgraded { from: ModeKind::R },
            "was W" => Origin::Upgraded { from: ModeKind::W },
            _ => return Ok(()),
        };
        if matches!(origin, Origin::Upgraded { .. }) && mode.kind != ModeKind::RW {
            return err(
                pos,
                format!(
                    "`/*{text}*/` marks an upgrade to RW, but the mode is {}",
                    mode.keyword()
                ),
            );
        }
        self.i += 1;
        mode.origin = origin;
        Ok(())
    }

    fn parse_block(&mut self, index: usize) -> Result<(DeclBlock, BlockSpans), ParseError> {
        let mut spans = BlockSpans {
            at: self.peek().1,
            ..BlockSpans::default()
        };
        let mut modes: Vec<AccessMode> = Vec::new();
        if !self.at_sym('{') {
            loop {
                let (kw, pos) = self.expect_name()?;
                let Some((kind, site)) = mode_keyword(&kw) else {
                    return err(pos, format!("expected an access mode, found `{kw}`"));
                };
                self.expect_sym('(')?;
                let (n, npos) = self.expect_name()?;
                if self.layout.view(&n).is_none() {
                    return self.decl_error(npos, DeclError::UnknownView(name(&n)));
                }
                self.expect_sym(')')?;
                if modes.iter().any(|m| *m.view == *n) {
                    return err(pos, format!("block {index} declares `{n}` more than once"));
                }
                let mut mode = AccessMode::new(kind, site, name(&n));
                self.parse_marker(&mut mode)?;
                modes.push(mode);
                spans.modes.push(pos);
                if !self.at_sym(',') {
                    break;
                }
                self.bump();
            }
        }
        self.stmts.clear();
        let body = self.parse_body()?;
        spans.stmts = std::mem::take(&mut self.stmts);
        Ok((DeclBlock::new(modes, body), spans))
    }

    fn parse_program(&mut self) -> Result<(Program, SpanMap), ParseError> {
        loop {
            match self.peek() {
                (Tok::Ident(kw), _) if matches!(kw.as_str(), "scalar" | "buffer" | "view") => {
                    self.bump();
                    self.parse_decl(&kw)?;
                }
                _ => break,
            }
        }
        let mut spans = SpanMap {
            decls: std::mem::take(&mut self.decls),
            blocks: Vec::new(),
        };
        if self.raw {
            let at = self.peek().1;
            let mut parts = Vec::new();
            while self.peek().0 != Tok::Eof {
                parts.push(self.parse_stmt()?);
            }
            spans.blocks.push(BlockSpans {
                at,
                modes: Vec::new(),
                stmts: std::mem::take(&mut self.stmts),
            });
            let layout = std::mem::take(&mut self.layout);
            return Ok((
                Program::Raw(RawProgram {
                    layout,
                    body: Statement::block(parts),
                }),
                spans,
            ));
        }
        let mut blocks = Vec::new();
        loop {
            match self.peek() {
                (Tok::Eof, _) => break,
                (Tok::Ident(kw), pos) if matches!(kw.as_str(), "scalar" | "buffer" | "view") => {
                    return err(pos, "declarations must come before the first block");
                }
                _ => {
                    let (block, block_spans) = self.parse_block(blocks.len())?;
                    blocks.push(block);
                    spans.blocks.push(block_spans);
                }
            }
        }
        let layout = std::mem::take(&mut self.layout);
        let program = AnnotatedProgram::new(layout, blocks).map_err(|e| ParseError {
            pos: Pos::default(),
            message: e.to_string(),
        })?;
        Ok((Program::Annotated(program), spans))
    }
}

/// Parses an annotated (`raw == false`) or raw program, keeping positions.
pub fn parse_source(text: &str, raw: bool) -> Result<SourceProgram, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        i: 0,
        raw,
        layout: Layout::default(),
        decls: Vec::new(),
        stmts: Vec::new(),
    };
    let (program, spans) = p.parse_program()?;
    Ok(SourceProgram {
        text: text.to_string(),
        program,
        spans,
    })
}

pub fn parse(text: &str) -> Result<AnnotatedProgram, ParseError> {
    match parse_source(text, false)?.program {
        Program::Annotated(p) => Ok(p),
        Program::Raw(_) => unreachable!("annotated parse"),
    }
}

pub fn parse_raw(text: &str) -> Result<RawProgram, ParseError> {
    match parse_source(text, true)?.program {
        Program::Raw(p) => Ok(p),
        Program::Annotated(_) => unreachable!("raw parse"),
    }
}
